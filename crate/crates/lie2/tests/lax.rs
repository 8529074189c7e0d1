//! 2-Lax pairs: residuals, the {L,L} conditions, the induced 1-Lax pair and
//! the identity lift.

use lie2::algebra::{su2_constants, sl2_constants, CrossedModule, GradedElement};
use lie2::bialgebra::{dj_sl2, TwoRMatrix};
use lie2::lax::{
    build_1lax, build_2lax, check_l_conditions, induced_1lax, lambda_invariance_residual,
    lax_residual, lax_residual_signed, lift_1lax, one_lax_residual, quadratic_casimir_1,
    quadratic_hamiltonian,
};
use lie2::poisson::{random_points, GradedPoint, GradedPolynomial};
use lie2::tensor::{eye, zeros2};
use lie2::Error;
use proptest::prelude::*;

fn sl2_pair() -> (CrossedModule, lie2::lax::TwoLaxPair) {
    let cm = CrossedModule::id_sl2();
    let r = TwoRMatrix::sl2_dj();
    let h = quadratic_hamiltonian(&cm, &r).unwrap();
    let pair = build_2lax(&cm, &r, &h, 1e-9).unwrap();
    (cm, pair)
}

#[test]
fn su2_lax_has_identity_blocks() {
    let cm = CrossedModule::id_su2();
    let r = TwoRMatrix::su2_canonical();
    let pair = build_2lax(&cm, &r, &quadratic_hamiltonian(&cm, &r).unwrap(), 1e-9).unwrap();
    assert_eq!(pair.l0, eye(3));
    assert_eq!(pair.lm1, eye(3));
    // L(β_a + α_a) has coefficient 1 on both σ_a and κ_a.
    for a in 0..3 {
        let mut f = vec![0.0; 3];
        f[a] = 1.0;
        let z = pair.l_at(&GradedPoint::new(vec![0.0; 3], f.clone()));
        assert_eq!(z.x, f);
        let mut g = vec![0.0; 3];
        g[a] = 1.0;
        let z = pair.l_at(&GradedPoint::new(g.clone(), vec![0.0; 3]));
        assert_eq!(z.y, g);
    }
    assert_eq!(pair.lbar(&cm), eye(3));
}

#[test]
fn constant_hamiltonian_gives_zero_p() {
    let (cm, pair) = sl2_pair();
    let h = GradedPolynomial::constant(3, 3, 2.0);
    let cpair = build_2lax(&cm, &TwoRMatrix::sl2_dj(), &h, 1e-9).unwrap();
    for p in random_points(3, 3, 10, 1) {
        assert_eq!(cpair.p_at(&p), GradedElement::zero(3, 3));
        assert_eq!(lax_residual(&cpair, &cm, &p).unwrap(), 0.0);
    }
    assert!(pair.invariance_residual < 1e-12);
}

#[test]
fn dj_lax_residual_on_100_points() {
    let (cm, pair) = sl2_pair();
    let pts = random_points(3, 3, 100, 2);
    let mut worst = 0.0f64;
    let mut p_size = 0.0f64;
    for p in &pts {
        worst = worst.max(lax_residual(&pair, &cm, p).unwrap());
        p_size = p_size.max(pair.p_at(p).to_full().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    assert!(worst < 1e-10, "{worst:e}");
    assert!(p_size > 1e-2);
}

#[test]
fn wrong_sign_is_detected() {
    let (cm, pair) = sl2_pair();
    let pts = random_points(3, 3, 20, 4);
    let worst = pts
        .iter()
        .map(|p| lax_residual_signed(&pair, &cm, p, -1.0).unwrap())
        .fold(0.0f64, f64::max);
    assert!(worst > 1e-2);
}

#[test]
fn lambda_is_invariant() {
    let (cm, pair) = sl2_pair();
    assert!(lambda_invariance_residual(&cm, &pair.lambda) < 1e-12);
}

#[test]
fn l_conditions() {
    let su2 = CrossedModule::id_su2();
    let r = TwoRMatrix::su2_canonical();
    let pair = build_2lax(&su2, &r, &quadratic_hamiltonian(&su2, &r).unwrap(), 1e-9).unwrap();
    let pts = random_points(3, 3, 20, 6);
    let lc = check_l_conditions(&pair, &su2, &pts);
    assert_eq!(lc.t_compat, 0.0);
    assert!(lc.ll_residual < 1e-12);
    let (cm, pair) = sl2_pair();
    let lc = check_l_conditions(&pair, &cm, &pts);
    assert_eq!(lc.t_compat, 0.0);
    assert!(lc.ll_residual < 1e-10, "{:e}", lc.ll_residual);
    assert!(lc.sign_consistent);
    assert_eq!(lc.sign, -1);
}

#[test]
fn zero_rmatrix_cannot_define_a_lax_pair() {
    let cm = CrossedModule::skeletal_u1();
    let h = GradedPolynomial::constant(1, 1, 0.0);
    assert!(matches!(
        build_2lax(&cm, &TwoRMatrix::zero(1, 1), &h, 1e-9),
        Err(Error::NonDegenerate(_))
    ));
}

#[test]
fn induced_1lax_cases() {
    let su2 = CrossedModule::id_su2();
    let r = TwoRMatrix::su2_canonical();
    let pair = build_2lax(&su2, &r, &quadratic_hamiltonian(&su2, &r).unwrap(), 1e-9).unwrap();
    let pts = random_points(3, 3, 20, 8);
    let ind = induced_1lax(&pair, &su2, &pts).unwrap();
    assert_eq!(ind.lbar, eye(3));
    assert!(ind.residual < 1e-12);
    let (cm, pair) = sl2_pair();
    let pts = random_points(3, 3, 100, 8);
    let ind = induced_1lax(&pair, &cm, &pts).unwrap();
    assert!(ind.residual < 1e-10, "{:e}", ind.residual);
}

#[test]
fn one_lax_su2_and_sl2() {
    let one = build_1lax(&su2_constants(), &eye(3), &quadratic_casimir_1(&eye(3)), 1e-9).unwrap();
    assert_eq!(one.l, eye(3));
    let r = dj_sl2();
    let one = build_1lax(&sl2_constants(), &r, &quadratic_casimir_1(&r), 1e-9).unwrap();
    for p in random_points(3, 0, 100, 10) {
        assert!(one_lax_residual(&one, &p.g) < 1e-10);
    }
    let flat = build_1lax(&sl2_constants(), &r, &GradedPolynomial::constant(3, 0, 1.0), 1e-9).unwrap();
    assert_eq!(flat.p_at(&[0.3, 0.2, -0.1]), vec![0.0; 3]);
}

#[test]
fn one_lax_rejects_non_invariant_r() {
    let mut r = eye(3);
    r[0][0] = 2.0;
    let h = quadratic_casimir_1(&r);
    assert!(matches!(build_1lax(&su2_constants(), &r, &h, 1e-9), Err(Error::Invariance { .. })));
}

#[test]
fn su2_lift_matches_direct_construction() {
    let one = build_1lax(&su2_constants(), &eye(3), &quadratic_casimir_1(&eye(3)), 1e-9).unwrap();
    let lift = lift_1lax(&one, 1e-9).unwrap();
    let direct = build_2lax(
        &CrossedModule::id_su2(),
        &TwoRMatrix::su2_canonical(),
        &lift.h,
        1e-9,
    )
    .unwrap();
    assert_eq!(lift.r, TwoRMatrix::su2_canonical());
    assert_eq!(lift.pair.l0, direct.l0);
    assert_eq!(lift.pair.lm1, direct.lm1);
    assert_eq!(lift.pair.lambda, direct.lambda);
    assert_eq!(lift.pair.phi, direct.phi);
}

#[test]
fn zero_hamiltonian_lifts_to_zero_p() {
    let one = build_1lax(&su2_constants(), &eye(3), &GradedPolynomial::zero(3, 0), 1e-9).unwrap();
    let lift = lift_1lax(&one, 1e-9).unwrap();
    assert!(lift.h.is_zero());
    let p = random_points(3, 3, 1, 0).remove(0);
    assert_eq!(lift.pair.p_at(&p), GradedElement::zero(3, 3));
}

#[test]
fn sl2_lift_round_trip() {
    let r = dj_sl2();
    let one = build_1lax(&sl2_constants(), &r, &quadratic_casimir_1(&r), 1e-9).unwrap();
    let lift = lift_1lax(&one, 1e-9).unwrap();
    let pts = random_points(3, 3, 100, 12);
    for p in &pts {
        assert!(lax_residual(&lift.pair, &lift.cm, p).unwrap() < 1e-10);
    }
    let back = induced_1lax(&lift.pair, &lift.cm, &pts).unwrap();
    assert_eq!(back.lbar, one.l);
    // The lifted quadratic H is the 2-Casimir of the lift.
    let direct = quadratic_hamiltonian(&lift.cm, &lift.r).unwrap();
    assert!(lift.h.sub(&direct).max_coeff() < 1e-12);
}

#[test]
fn dimension_mismatch_is_reported() {
    let cm = CrossedModule::id_sl2();
    let h = GradedPolynomial::constant(2, 2, 1.0);
    assert!(matches!(
        build_2lax(&cm, &TwoRMatrix::sl2_dj(), &h, 1e-9),
        Err(Error::Dimension { .. })
    ));
    let bad = TwoRMatrix::new(zeros2(2, 3), zeros2(3, 3));
    assert!(build_2lax(&cm, &bad, &GradedPolynomial::zero(3, 3), 1e-9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lax_equation_holds_at_random_points(xi in prop::collection::vec(-3.0..3.0f64, 6)) {
        let (cm, pair) = sl2_pair();
        let p = GradedPoint::from_coords(&xi, 3);
        prop_assert!(lax_residual(&pair, &cm, &p).unwrap() < 1e-9);
    }

    #[test]
    fn point_for_inverts_l(z in prop::collection::vec(-3.0..3.0f64, 6)) {
        let (_, pair) = sl2_pair();
        let ze = GradedElement::from_full(&z, 3);
        let back = pair.l_at(&pair.point_for(&ze).unwrap()).to_full();
        for k in 0..6 {
            prop_assert!((back[k] - z[k]).abs() < 1e-12);
        }
    }
}
