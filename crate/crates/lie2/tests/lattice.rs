//! The spin rectangle: initial data, right-hand sides, energies, the t̄
//! projection, the 1D monodromy, configs and snapshots.

use lie2::lattice::{
    dot, hamiltonians, init_state, integrate, kappa_defect, monodromy_1d, read_snapshot,
    rhs_bulk2d, rhs_chain, rhs_coupled, rhs_lattice_h, run, spinor, su2_defining, tbar_project,
    write_snapshot, InitMode, LatticeMode, LatticeState2D, SimConfig, V3,
};
use lie2::Error;
use proptest::prelude::*;

fn random_state(lu: usize, lv: usize, seed: u64) -> LatticeState2D {
    let mut cfg = SimConfig::new(lu, lv, 0.01, 0, LatticeMode::Coupled, InitMode::RandomUnit);
    cfg.seed = seed;
    init_state(&cfg).unwrap()
}

fn norm(v: &V3) -> f64 {
    dot(v, v).sqrt()
}

fn max_diff(a: &[V3], b: &[V3]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..3).map(move |k| (x[k] - y[k]).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn random_unit_init_is_deterministic_and_normalized() {
    let a = random_state(5, 4, 9);
    assert_eq!(a, random_state(5, 4, 9));
    assert_ne!(a.sigma, random_state(5, 4, 10).sigma);
    assert!(a.sigma.iter().all(|s| (norm(s) - 1.0).abs() < 1e-14));
}

#[test]
fn v_uniform_init_is_constant_along_v() {
    let mut cfg = SimConfig::new(6, 5, 0.01, 0, LatticeMode::Bulk2d, InitMode::VUniform);
    cfg.seed = 4;
    let st = init_state(&cfg).unwrap();
    for n in 0..6 {
        for m in 1..5 {
            assert_eq!(st.s(n, m), st.s(n, 0));
        }
    }
    // The projected κ equals the column.
    assert!(kappa_defect(&st) < 1e-15);
}

#[test]
fn spinor_at_quarter_turn() {
    let s = spinor(std::f64::consts::FRAC_PI_4, 0.0);
    assert!((s[0] - 0.5).abs() < 1e-15 && s[1].abs() < 1e-15 && s[2].abs() < 1e-15);
    assert_eq!(spinor(0.0, 1.3), [0.0, 0.0, 1.0]);
}

#[test]
fn uniform_fields_are_stationary() {
    let col = vec![[0.6, 0.0, 0.8]; 4];
    let st = LatticeState2D::v_uniform_from(&col, 3, 0.5);
    assert!(rhs_bulk2d(&st, -2.0).iter().all(|v| *v == [0.0; 3]));
    assert!(rhs_lattice_h(&st).iter().all(|v| norm(v) < 1e-16));
    let d = rhs_coupled(&st, -2.0);
    assert!(d.sigma.iter().chain(&d.kappa).all(|v| norm(v) < 1e-15));
}

#[test]
fn v_uniform_bulk_reduces_to_chain() {
    let col: Vec<V3> = (0..7).map(|p| spinor(0.3 + 0.1 * p as f64, 0.7 * p as f64)).collect();
    let st = LatticeState2D::v_uniform_from(&col, 4, 0.5);
    let bulk = rhs_bulk2d(&st, -2.0);
    let chain = rhs_chain(&col, 0.5, -2.0);
    for n in 0..7 {
        for m in 0..4 {
            assert!(max_diff(&[bulk[n * 4 + m]], &[chain[n]]) < 1e-13);
        }
    }
}

#[test]
fn bulk_stencil_is_local() {
    let base = random_state(6, 6, 2);
    let mut bumped = base.clone();
    let i = bumped.idx(2, 3);
    bumped.sigma[i][0] += 0.1;
    let (a, b) = (rhs_bulk2d(&base, -2.0), rhs_bulk2d(&bumped, -2.0));
    let touched = [(2, 3), (1, 3), (3, 3), (2, 2), (2, 4)];
    for n in 0..6 {
        for m in 0..6 {
            let k = base.idx(n, m);
            let changed = a[k] != b[k];
            assert_eq!(changed, touched.contains(&(n, m)), "site ({n},{m})");
        }
    }
    // In the coupled flow σ̇ only sees κ and the site itself.
    let (a, b) = (rhs_coupled(&base, -2.0), rhs_coupled(&bumped, -2.0));
    for k in 0..36 {
        assert_eq!(a.sigma[k] != b.sigma[k], k == i);
    }
}

#[test]
fn bulk_rhs_sums_to_zero_and_preserves_norms() {
    let st = random_state(8, 7, 5);
    let r = rhs_bulk2d(&st, -2.0);
    let total = r.iter().fold([0.0; 3], |a, v| [a[0] + v[0], a[1] + v[1], a[2] + v[2]]);
    assert!(norm(&total) < 1e-12);
    for (s, v) in st.sigma.iter().zip(&r) {
        assert!(dot(s, v).abs() < 1e-13);
    }
    let chain = rhs_chain(&st.kappa, st.ell, -2.0);
    for (k, v) in st.kappa.iter().zip(&chain) {
        assert!(dot(k, v).abs() < 1e-13);
    }
}

#[test]
fn aligned_neighbours_exert_no_torque() {
    let mut st = LatticeState2D::v_uniform_from(&[[0.0, 0.0, 1.0]; 3], 3, 1.0);
    let i = st.idx(1, 1);
    st.sigma[i] = [0.0, 0.0, 2.0];
    assert_eq!(rhs_lattice_h(&st)[i], [0.0; 3]);
}

#[test]
fn gradient_energy_matches_bond_sum() {
    let st = random_state(5, 6, 8);
    let e = hamiltonians(&st);
    let mut bonds = 0.0;
    for n in 0..5 {
        for m in 0..6 {
            bonds += 2.0 * (1.0 - dot(st.s(n, m), st.s((n + 1) % 5, m)));
            bonds += 2.0 * (1.0 - dot(st.s(n, m), st.s(n, (m + 1) % 6)));
        }
    }
    assert!((e.h2d_grad - bonds).abs() < 1e-12);
}

#[test]
fn v_uniform_energy_identity() {
    let col: Vec<V3> = (0..6).map(|p| spinor(0.2 * p as f64, 1.1 * p as f64)).collect();
    let col: Vec<V3> = col.iter().map(|s| s.map(|x| x / norm(s))).collect();
    let (lu, lv) = (6usize, 5usize);
    let mut st = LatticeState2D::v_uniform_from(&col, lv, 1.0);
    st.kappa = col;
    let e = hamiltonians(&st);
    let want = lv as f64 * e.h1d_nn + 0.5 * (lu * lv) as f64;
    assert!((e.h2d_nn - want).abs() < 1e-12);
}

#[test]
fn tbar_projection_cases() {
    let col: Vec<V3> = (0..4).map(|p| spinor(0.4, p as f64)).collect();
    let st = LatticeState2D::v_uniform_from(&col, 5, 0.25);
    let tb = tbar_project(&st);
    for (k, s) in tb.iter().zip(&col) {
        assert!(max_diff(&[*k], &[s.map(|x| 5.0 * 0.25 * x)]) < 1e-15);
    }
    let zero = LatticeState2D::zeros(3, 3, 1.0);
    assert!(tbar_project(&zero).iter().all(|k| *k == [0.0; 3]));
    // Projected κ is consistent with t̄σ at t = 0.
    assert!(kappa_defect(&random_state(6, 5, 1)) < 1e-12);
}

#[test]
fn zero_steps_emit_only_the_initial_row() {
    let cfg = SimConfig::new(4, 4, 0.01, 0, LatticeMode::Bulk2d, InitMode::RandomUnit);
    let out = run(&cfg).unwrap();
    assert_eq!(out.observables.len(), 1);
    assert_eq!(out.observables[0].step, 0);
    assert_eq!(out.initial, out.final_state);
}

#[test]
fn cadence_controls_rows() {
    let mut cfg = SimConfig::new(4, 4, 0.01, 25, LatticeMode::Bulk2d, InitMode::RandomUnit);
    cfg.cadence = 10;
    // Steps 0, 10, 20 and the last one.
    assert_eq!(run(&cfg).unwrap().observables.len(), 4);
}

#[test]
fn lattice_h_conserves_energy_and_magnetization() {
    let st = random_state(6, 6, 12);
    let e0 = hamiltonians(&st).h2d_nn;
    let m0 = lie2::lattice::magnetization(&st);
    let end = integrate(&st, LatticeMode::LatticeH, -2.0, 0.01, 1000, false, |_, _| {}).unwrap();
    assert!((hamiltonians(&end).h2d_nn - e0).abs() < 1e-9);
    assert!(max_diff(&[lie2::lattice::magnetization(&end)], &[m0]) < 1e-9);
}

#[test]
fn monodromy_cases() {
    let rep = su2_defining();
    let flat = monodromy_1d(&[[0.0; 3]; 5], 0.5, &rep);
    assert!((flat.trace.re - 2.0).abs() < 1e-15 && flat.trace.im.abs() < 1e-15);
    let c = 1.7;
    let one = monodromy_1d(&[[0.0, 0.0, c]], 0.5, &rep);
    assert!((one.trace.re - 2.0 * (0.5 * c / 2.0).cos()).abs() < 1e-14);
    assert!(one.trace.im.abs() < 1e-14);
    let kappa: Vec<V3> = (0..6).map(|p| spinor(0.3 * p as f64, p as f64)).collect();
    let mut rotated = kappa.clone();
    rotated.rotate_left(2);
    let (a, b) = (monodromy_1d(&kappa, 0.3, &rep), monodromy_1d(&rotated, 0.3, &rep));
    assert!((a.trace - b.trace).norm() < 1e-12);
}

#[test]
fn su2_defining_satisfies_the_brackets() {
    let s = su2_defining();
    let comm = |a: usize, b: usize| s[a] * s[b] - s[b] * s[a];
    assert!((comm(0, 1) - s[2]).norm() < 1e-15);
    assert!((comm(1, 2) - s[0]).norm() < 1e-15);
    assert!((comm(2, 0) - s[1]).norm() < 1e-15);
}

#[test]
fn config_validation() {
    let ok = "Lu = 4\nLv = 4\ndt = 0.01\nsteps = 10\nmode = \"bulk2d\"\ninit = \"random-unit\"\n";
    let cfg = SimConfig::parse(ok, "ok.toml").unwrap();
    assert_eq!((cfg.lu, cfg.lv, cfg.prefactor()), (4, 4, -2.0));
    let json = r#"{"Lu": 3, "Lv": 3, "dt": 0.1, "steps": 1, "mode": "latticeH", "init": "spinwave"}"#;
    assert_eq!(SimConfig::parse(json, "ok.json").unwrap().mode().unwrap(), LatticeMode::LatticeH);
    let bad_mode = ok.replace("bulk2d", "bogus");
    match SimConfig::parse(&bad_mode, "bad.toml") {
        Err(Error::Config(msg)) => {
            for name in LatticeMode::NAMES {
                assert!(msg.contains(name), "{msg}");
            }
        }
        other => panic!("expected config error, got {other:?}"),
    }
    for bad in [
        ok.replace("Lu = 4", "Lu = 1"),
        ok.replace("dt = 0.01", "dt = -0.01"),
        ok.replace("random-unit", "file"),
        format!("{ok}wave = [1.5, 2.0]\n"),
        format!("{ok}typo = 1\n"),
    ] {
        assert!(matches!(SimConfig::parse(&bad, "bad.toml"), Err(Error::Config(_))), "{bad}");
    }
}

#[test]
fn snapshot_round_trip_and_file_init() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snap.csv");
    let mut st = random_state(4, 3, 6);
    st.time = 1.25;
    write_snapshot(&path, &st).unwrap();
    assert_eq!(read_snapshot(&path).unwrap(), st);
    let mut cfg = SimConfig::new(4, 3, 0.01, 0, LatticeMode::Coupled, InitMode::File);
    cfg.init_file = Some(path.clone());
    assert_eq!(init_state(&cfg).unwrap(), st);
    cfg.lu = 5;
    assert!(init_state(&cfg).is_err());
    std::fs::write(&path, "# Lu=2 Lv=2 ell=1 time=0\nfield,i,j,c1,c2,c3\nsigma,9,0,1,0,0\n").unwrap();
    assert!(matches!(read_snapshot(&path), Err(Error::Parse { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rhs_is_tangent(seed in 0u64..1000, lu in 2usize..7, lv in 2usize..7) {
        let st = random_state(lu, lv, seed);
        for (s, v) in st.sigma.iter().zip(&rhs_bulk2d(&st, -2.0)) {
            prop_assert!(dot(s, v).abs() < 1e-12);
        }
        for (s, v) in st.sigma.iter().zip(&rhs_lattice_h(&st)) {
            prop_assert!(dot(s, v).abs() < 1e-12);
        }
        let d = rhs_coupled(&st, -2.0);
        for (s, v) in st.sigma.iter().zip(&d.sigma) {
            prop_assert!(dot(s, v).abs() < 1e-12);
        }
    }
}
