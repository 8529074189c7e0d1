//! 2-representations, the genuine block-triangular representation, trace
//! polynomials and the conservation monitor.

use lie2::algebra::{CrossedModule, GradedElement};
use lie2::bialgebra::TwoRMatrix;
use lie2::lax::{build_2lax, quadratic_hamiltonian};
use lie2::poisson::{random_points, GradedPoint};
use lie2::representations::{
    adjoint_2rep, basis_pairs, conservation_monitor, eigen_union, rho_gen, rho_gen_hom_residual,
    trace_polys, validate_2rep, TwoRepresentation,
};
use nalgebra::Complex;
use proptest::prelude::*;

fn sigma3() -> GradedElement {
    GradedElement::new(vec![0.0, 0.0, 1.0], vec![0.0; 3])
}

#[test]
fn adjoint_representations_pass() {
    for cm in [CrossedModule::id_su2(), CrossedModule::id_sl2(), CrossedModule::skeletal_u1()] {
        let rep = validate_2rep(&cm, &adjoint_2rep(&cm), 1e-12);
        assert!(rep.pass, "{}: {:?}", cm.name, rep.failed());
        assert_eq!(rep.max_residual(), 0.0);
    }
}

#[test]
fn zero_representation_passes() {
    let cm = CrossedModule::id_sl2();
    assert!(validate_2rep(&cm, &TwoRepresentation::zero(&cm, 2, 3), 1e-12).pass);
}

#[test]
fn abelian_adjoint_is_zero() {
    let c = vec![vec![vec![0.0; 2]; 2]; 2];
    let cm = CrossedModule::identity("abelian", &c).unwrap();
    let rep = adjoint_2rep(&cm);
    assert!(rep.rho00.iter().chain(&rep.rho01).chain(&rep.rho1).flatten().flatten().all(|v| *v == 0.0));
}

#[test]
fn corrupted_rho1_fails_peiffer_type_axiom() {
    let cm = CrossedModule::id_su2();
    let mut rep = adjoint_2rep(&cm);
    rep.rho1[0][1][2] += 1e-3;
    let report = validate_2rep(&cm, &rep, 1e-12);
    assert!(report.failed().contains(&"partial_rho1"), "{:?}", report.failed());
}

#[test]
fn wrong_shape_is_reported() {
    let cm = CrossedModule::id_su2();
    let mut rep = adjoint_2rep(&cm);
    rep.rho1.pop();
    assert!(!validate_2rep(&cm, &rep, 1e-12).pass);
}

#[test]
fn rho_gen_cases() {
    let cm = CrossedModule::id_su2();
    let rep = adjoint_2rep(&cm);
    let g = rho_gen(&cm, &rep, &GradedElement::zero(3, 3)).unwrap();
    assert!(g.iter().flatten().all(|v| *v == 0.0));
    let g = rho_gen(&cm, &rep, &sigma3()).unwrap();
    let rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(g[i][j], rot[i][j]);
            assert_eq!(g[3 + i][3 + j], rot[i][j]);
            assert_eq!(g[i][3 + j], 0.0);
            assert_eq!(g[3 + i][j], 0.0);
        }
    }
}

#[test]
fn rho_gen_is_a_homomorphism() {
    for cm in [CrossedModule::id_su2(), CrossedModule::id_sl2()] {
        let rep = adjoint_2rep(&cm);
        assert!(rho_gen_hom_residual(&cm, &rep, &basis_pairs(&cm)).unwrap() < 1e-12);
        let pts = random_points(3, 3, 40, 21);
        let pairs: Vec<_> = pts
            .chunks(2)
            .map(|c| {
                (
                    GradedElement::new(c[0].g.clone(), c[0].f.clone()),
                    GradedElement::new(c[1].g.clone(), c[1].f.clone()),
                )
            })
            .collect();
        assert_eq!(pairs.len(), 20);
        assert!(rho_gen_hom_residual(&cm, &rep, &pairs).unwrap() < 1e-12);
    }
}

#[test]
fn trace_polynomial_cases() {
    let cm = CrossedModule::id_su2();
    let rep = adjoint_2rep(&cm);
    assert_eq!(trace_polys(&cm, &rep, &GradedElement::zero(3, 3), 4).unwrap(), vec![0.0; 4]);
    let f = trace_polys(&cm, &rep, &sigma3(), 2).unwrap();
    assert_eq!(f[1], -4.0);
    assert!(trace_polys(&cm, &rep, &sigma3(), 0).is_err());
}

#[test]
fn eigenvalue_cases() {
    let cm = CrossedModule::id_su2();
    let rep = adjoint_2rep(&cm);
    let zero = eigen_union(&cm, &rep, &GradedElement::zero(3, 3)).unwrap();
    assert!(zero.full.iter().all(|c| c.norm() == 0.0));
    let u = eigen_union(&cm, &rep, &sigma3()).unwrap();
    let mut want = vec![
        Complex::new(0.0, -1.0),
        Complex::new(0.0, -1.0),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 1.0),
        Complex::new(0.0, 1.0),
    ];
    lie2::representations::sort_spectrum(&mut want);
    assert!(lie2::representations::multiset_distance(&u.full, &want) < 1e-12);
    let sl2 = CrossedModule::id_sl2();
    let rep = adjoint_2rep(&sl2);
    for p in random_points(3, 3, 20, 30) {
        let u = eigen_union(&sl2, &rep, &GradedElement::new(p.g, p.f)).unwrap();
        assert!(u.residual < 1e-8);
    }
}

#[test]
fn stationary_trajectory_has_zero_drift() {
    let cm = CrossedModule::id_sl2();
    let r = TwoRMatrix::sl2_dj();
    let pair = build_2lax(&cm, &r, &quadratic_hamiltonian(&cm, &r).unwrap(), 1e-9).unwrap();
    let p = GradedPoint::new(vec![0.1, 0.2, 0.3], vec![-0.2, 0.4, 0.0]);
    let traj = vec![p; 10];
    let table = conservation_monitor(&cm, &adjoint_2rep(&cm), &pair, &traj, 0.1, 4, 3).unwrap();
    assert_eq!(table.max_rel_drift(), 0.0);
    assert_eq!(table.max_eig_drift, 0.0);
    // Rows at steps 0, 3, 6, 9.
    assert_eq!(table.rows.len(), 4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("drift.csv");
    table.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,F_1,F_2,F_3,F_4,eig_drift\n"));
    assert_eq!(text.lines().count(), 5);
}

proptest! {
    #[test]
    fn block_triangular_trace_identity(z in prop::collection::vec(-2.0..2.0f64, 6), k in 1usize..5) {
        let cm = CrossedModule::id_sl2();
        let rep = adjoint_2rep(&cm);
        let z = GradedElement::from_full(&z, 3);
        let f = trace_polys(&cm, &rep, &z, k).unwrap();
        let ty = cm.tmap_apply(&z.y).unwrap();
        let xt: Vec<f64> = z.x.iter().zip(&ty).map(|(a, b)| a + b).collect();
        let top = lie2::representations::trace_polys_matrix(&rep.rho01_of(&xt), k);
        let bot = lie2::representations::trace_polys_matrix(&rep.rho00_of(&z.x), k);
        for j in 0..k {
            prop_assert!((f[j] - top[j] - bot[j]).abs() < 1e-9 * (1.0 + f[j].abs()));
        }
    }

    #[test]
    fn rho_gen_hom_random(z in prop::collection::vec(-2.0..2.0f64, 6),
                          w in prop::collection::vec(-2.0..2.0f64, 6)) {
        let cm = CrossedModule::id_sl2();
        let rep = adjoint_2rep(&cm);
        let pair = (GradedElement::from_full(&z, 3), GradedElement::from_full(&w, 3));
        prop_assert!(rho_gen_hom_residual(&cm, &rep, &[pair]).unwrap() < 1e-11);
    }
}
