//! Graded polynomials, the linear Poisson structures on g*[1] and flows.

#![allow(clippy::needless_range_loop)]

use lie2::algebra::CrossedModule;
use lie2::bialgebra::TwoRMatrix;
use lie2::lax::{naive_quadratic, quadratic_hamiltonian};
use lie2::poisson::{
    check_invariance, flow, pullback_equivariance_residual, random_points,
    su2_vector_form_residual, GradedPoint, GradedPolynomial, Mode, PoissonStructure,
};
use lie2::tensor::{eye, zeros2};
use lie2::Error;
use proptest::prelude::*;

const N: usize = 3;

fn beta(i: usize) -> GradedPolynomial {
    GradedPolynomial::beta(N, N, i)
}

fn alpha(a: usize) -> GradedPolynomial {
    GradedPolynomial::alpha(N, N, a)
}

fn plain(cm: &CrossedModule) -> PoissonStructure {
    PoissonStructure::new(cm, None, Mode::Plain, 1e-9).unwrap()
}

fn assert_poly_eq(p: &GradedPolynomial, q: &GradedPolynomial) {
    let d = p.sub(q);
    assert!(d.max_coeff() < 1e-12, "{p} != {q}");
}

#[test]
fn su2_coordinate_brackets() {
    let ps = plain(&CrossedModule::id_su2());
    assert_poly_eq(&ps.bracket(&beta(0), &beta(1)), &beta(2));
    assert_poly_eq(&ps.bracket(&beta(0), &alpha(1)), &alpha(2));
    // Peiffer part of the bracket.
    assert_poly_eq(&ps.bracket(&alpha(0), &alpha(1)), &alpha(2));
}

#[test]
fn su2_vector_form_is_exact_on_integer_samples() {
    let mut samples = Vec::new();
    for k in 0..8 {
        let f = |s: i32| ((k * 7 + s) % 9 - 4) as f64;
        samples.push([
            [f(0), f(1), f(2)],
            [f(3), f(4), f(5)],
            [f(6), f(7), f(8)],
            [f(9), f(10), f(11)],
        ]);
    }
    assert_eq!(su2_vector_form_residual(&samples), 0.0);
}

#[test]
fn bracket_with_self_and_constants_vanishes() {
    for mode in [Mode::Plain, Mode::Rmatrix] {
        let cm = CrossedModule::id_sl2();
        let ps = PoissonStructure::new(&cm, Some(&TwoRMatrix::sl2_dj()), mode, 1e-9).unwrap();
        let a = beta(0).mul(&alpha(2)).add(&beta(1).pow(2));
        assert!(ps.bracket(&a, &a).is_zero() || ps.bracket(&a, &a).max_coeff() < 1e-12);
        let c = GradedPolynomial::constant(N, N, 3.5);
        assert!(ps.bracket(&c, &a).is_zero());
    }
}

#[test]
fn su2_r_brackets_vanish_for_symmetric_r() {
    let cm = CrossedModule::id_su2();
    let ps = PoissonStructure::new(&cm, Some(&TwoRMatrix::su2_canonical()), Mode::Rmatrix, 1e-9)
        .unwrap();
    for a in 0..2 * N {
        for b in 0..2 * N {
            assert!(ps.coord_bracket(a, b).is_zero());
        }
    }
}

#[test]
fn rmatrix_mode_needs_an_rmatrix() {
    let cm = CrossedModule::id_sl2();
    assert!(PoissonStructure::new(&cm, None, Mode::Rmatrix, 1e-9).is_err());
    assert!(matches!("bogus".parse::<Mode>(), Err(Error::Config(_))));
}

#[test]
fn leibniz_example() {
    let ps = plain(&CrossedModule::id_su2());
    let lhs = ps.bracket(&beta(0).pow(2), &alpha(0));
    let rhs = beta(0).scale(2.0).mul(&ps.bracket(&beta(0), &alpha(0)));
    assert_poly_eq(&lhs, &rhs);
}

#[test]
fn jacobi_on_coordinates() {
    let ps = plain(&CrossedModule::id_su2());
    let (a, b, c) = (beta(0), alpha(1), beta(2));
    let s = ps
        .bracket(&a, &ps.bracket(&b, &c))
        .add(&ps.bracket(&b, &ps.bracket(&c, &a)))
        .add(&ps.bracket(&c, &ps.bracket(&a, &b)));
    assert!(s.max_coeff() < 1e-12);
}

#[test]
fn invariance_checks() {
    let pts = random_points(N, N, 50, 3);
    for (cm, r) in [
        (CrossedModule::id_su2(), TwoRMatrix::su2_canonical()),
        (CrossedModule::id_sl2(), TwoRMatrix::sl2_dj()),
    ] {
        let h = quadratic_hamiltonian(&cm, &r).unwrap();
        assert!(check_invariance(&cm, &h, &pts) < 1e-12);
        assert!(check_invariance(&cm, &beta(0), &pts) > 1e-3);
        assert!(check_invariance(&cm, &naive_quadratic(N, N), &pts) > 1e-3);
        assert_eq!(check_invariance(&cm, &GradedPolynomial::constant(N, N, 1.0), &pts), 0.0);
    }
}

#[test]
fn su2_quadratic_casimir_on_g0_is_stationary_at_zero_f() {
    let cm = CrossedModule::id_su2();
    let mut q = zeros2(2 * N, 2 * N);
    for i in 0..N {
        q[i][i] = 1.0;
    }
    let h = GradedPolynomial::quadratic_form(N, N, &q);
    let p0 = GradedPoint::new(vec![0.3, -0.4, 1.2], vec![0.0; 3]);
    let traj = flow(&cm, None, Mode::Plain, &h, &p0, 0.01, 50, 1e-9).unwrap();
    for p in &traj {
        assert_eq!(p, &p0);
    }
}

#[test]
fn zero_steps_returns_initial_point() {
    let cm = CrossedModule::id_sl2();
    let p0 = random_points(N, N, 1, 9).remove(0);
    let traj = flow(&cm, None, Mode::Plain, &beta(1), &p0, 0.1, 0, 1e-9).unwrap();
    assert_eq!(traj, vec![p0]);
}

#[test]
fn rk4_is_fourth_order() {
    let cm = CrossedModule::id_sl2();
    let ps = plain(&cm);
    // Not a Casimir, so the flow moves.
    let h = beta(0).pow(2).add(&alpha(2).mul(&beta(1))).add(&alpha(0));
    let p0 = GradedPoint::new(vec![0.2, -0.1, 0.3], vec![0.1, 0.2, -0.3]);
    let end = |steps: usize| ps.flow(&h, &p0, 1.0 / steps as f64, steps).unwrap().pop().unwrap();
    let reference = end(4096).coords();
    let err = |steps: usize| {
        end(steps)
            .coords()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(32) / err(64);
    assert!((14.0..=18.0).contains(&ratio), "{ratio}");
}

#[test]
fn flow_conserves_the_hamiltonian() {
    let cm = CrossedModule::id_su2();
    let h = quadratic_hamiltonian(&cm, &TwoRMatrix::su2_canonical()).unwrap();
    let p0 = GradedPoint::new(vec![0.5, -0.2, 0.1], vec![0.3, 0.4, -0.6]);
    let traj = flow(&cm, None, Mode::Plain, &h, &p0, 1e-2, 500, 1e-9).unwrap();
    let h0 = h.eval_at(&p0);
    for p in &traj {
        assert!((h.eval_at(p) - h0).abs() < 1e-10);
    }
}

#[test]
fn pullback_is_equivariant() {
    for cm in [CrossedModule::id_su2(), CrossedModule::id_sl2()] {
        let ps = plain(&cm);
        assert_eq!(pullback_equivariance_residual(&ps, &cm), 0.0);
    }
}

#[test]
fn polynomial_json_round_trip() {
    let p = beta(0).mul(&alpha(2)).scale(1.5).add(&GradedPolynomial::constant(N, N, -2.0));
    let back = GradedPolynomial::from_json(&p.to_json(), "inline").unwrap();
    assert_eq!(back, p);
    assert!(GradedPolynomial::from_json("{", "inline").is_err());
}

#[test]
fn quadratic_form_evaluates_half_xtqx() {
    let h = GradedPolynomial::quadratic_form(N, N, &eye(2 * N));
    let xi = [1.0, 2.0, 3.0, -1.0, 0.5, 2.0];
    let want = 0.5 * xi.iter().map(|x| x * x).sum::<f64>();
    assert!((h.eval(&xi) - want).abs() < 1e-14);
}

fn poly(max_terms: usize) -> impl Strategy<Value = GradedPolynomial> {
    prop::collection::vec((prop::collection::vec(0u32..2, 2 * N), -2.0..2.0f64), 1..max_terms).prop_map(
        |terms| {
            let mut p = GradedPolynomial::zero(N, N);
            for (e, c) in terms {
                p.add_term(e, c);
            }
            p
        },
    )
}

fn cubic() -> impl Strategy<Value = GradedPolynomial> {
    poly(5).prop_map(|p| {
        // Keep the degree at most three.
        let mut q = GradedPolynomial::zero(N, N);
        for (mono, c) in &p.terms {
            if mono.degree() <= 3 {
                q.add_term(mono.0.clone(), *c);
            }
        }
        q
    })
}

fn structures() -> Vec<PoissonStructure> {
    let sl2 = CrossedModule::id_sl2();
    vec![
        plain(&CrossedModule::id_su2()),
        plain(&sl2),
        PoissonStructure::new(&sl2, Some(&TwoRMatrix::sl2_dj()), Mode::Rmatrix, 1e-9).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_antisymmetric(p in cubic(), q in cubic()) {
        for ps in structures() {
            let s = ps.bracket(&p, &q).add(&ps.bracket(&q, &p));
            prop_assert!(s.max_coeff() < 1e-10);
        }
    }

    #[test]
    fn bracket_leibniz(p in cubic(), q in cubic(), r in cubic()) {
        for ps in structures() {
            let lhs = ps.bracket(&p, &q.mul(&r));
            let rhs = ps.bracket(&p, &q).mul(&r).add(&q.mul(&ps.bracket(&p, &r)));
            prop_assert!(lhs.sub(&rhs).max_coeff() < 1e-9);
        }
    }

    #[test]
    fn bracket_jacobi_on_cubics(p in cubic(), q in cubic(), r in cubic()) {
        for ps in structures() {
            let s = ps
                .bracket(&p, &ps.bracket(&q, &r))
                .add(&ps.bracket(&q, &ps.bracket(&r, &p)))
                .add(&ps.bracket(&r, &ps.bracket(&p, &q)));
            prop_assert!(s.max_coeff() < 1e-8);
        }
    }

    #[test]
    fn product_evaluates_pointwise(p in cubic(), q in cubic(),
                                   xi in prop::collection::vec(-1.0..1.0f64, 2 * N)) {
        let lhs = p.mul(&q).eval(&xi);
        let rhs = p.eval(&xi) * q.eval(&xi);
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}
