//! 2-representations, the genuine block representation, trace polynomials,
//! eigenvalues and conservation monitoring along flows.
//!
//! `ρ^gen(x + y)` acts on `V₋₁ ⊕ V₀` (`V₋₁` first) as
//! `[[ρ₀¹(x + t y), ρ₁(y)], [0, ρ₀⁰(x)]]`.

use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{AxiomReport, CrossedModule, GradedElement};
use crate::error::{dim_err, Error, Result};
use crate::lax::TwoLaxPair;
use crate::poisson::GradedPoint;
use crate::tensor::{check2, matmul, max_abs_diff, sub, to_dmatrix, zeros2, Mat};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRepresentation {
    pub dv0: usize,
    pub dvm1: usize,
    /// `∂: V₋₁ -> V₀`, `dv0 x dvm1`.
    pub partial: Mat,
    /// `ρ₀⁰(T_i) ∈ End(V₀)`, one matrix per basis element of `g0`.
    pub rho00: Vec<Mat>,
    /// `ρ₀¹(T_i) ∈ End(V₋₁)`.
    pub rho01: Vec<Mat>,
    /// `ρ₁(S_a) ∈ Hom(V₀, V₋₁)`, `dvm1 x dv0`.
    pub rho1: Vec<Mat>,
}

fn lin(mats: &[Mat], c: &[f64], r: usize, k: usize) -> Mat {
    let mut out = zeros2(r, k);
    for (m, &ci) in mats.iter().zip(c) {
        if ci == 0.0 {
            continue;
        }
        for (orow, mrow) in out.iter_mut().zip(m) {
            for (o, v) in orow.iter_mut().zip(mrow) {
                *o += ci * v;
            }
        }
    }
    out
}

fn comm(a: &Mat, b: &Mat) -> Mat {
    sub(&matmul(a, b), &matmul(b, a))
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; k];
    e[i] = 1.0;
    e
}

impl TwoRepresentation {
    pub fn zero(cm: &CrossedModule, dv0: usize, dvm1: usize) -> Self {
        Self {
            dv0,
            dvm1,
            partial: zeros2(dv0, dvm1),
            rho00: vec![zeros2(dv0, dv0); cm.n],
            rho01: vec![zeros2(dvm1, dvm1); cm.n],
            rho1: vec![zeros2(dvm1, dv0); cm.m],
        }
    }

    pub fn check(&self, cm: &CrossedModule) -> Result<()> {
        check2("∂", &self.partial, self.dv0, self.dvm1)?;
        if self.rho00.len() != cm.n || self.rho01.len() != cm.n || self.rho1.len() != cm.m {
            return Err(dim_err(
                "representation generators",
                format!("{}/{}/{}", cm.n, cm.n, cm.m),
                format!("{}/{}/{}", self.rho00.len(), self.rho01.len(), self.rho1.len()),
            ));
        }
        for m in &self.rho00 {
            check2("ρ₀⁰", m, self.dv0, self.dv0)?;
        }
        for m in &self.rho01 {
            check2("ρ₀¹", m, self.dvm1, self.dvm1)?;
        }
        for m in &self.rho1 {
            check2("ρ₁", m, self.dvm1, self.dv0)?;
        }
        Ok(())
    }

    pub fn rho00_of(&self, x: &[f64]) -> Mat {
        lin(&self.rho00, x, self.dv0, self.dv0)
    }

    pub fn rho01_of(&self, x: &[f64]) -> Mat {
        lin(&self.rho01, x, self.dvm1, self.dvm1)
    }

    pub fn rho1_of(&self, y: &[f64]) -> Mat {
        lin(&self.rho1, y, self.dvm1, self.dv0)
    }

    pub fn dim(&self) -> usize {
        self.dv0 + self.dvm1
    }
}

/// Named checks: `end0` (`ρ₀⁰(X)∂ = ∂ρ₀¹(X)`), `partial_rho1`
/// (`ρ₀⁰(tY) = ∂ρ₁(Y)`), `rho1_partial` (`ρ₀¹(tY) = ρ₁(Y)∂`),
/// `rho1_equivariance` (`ρ₁(X▷Y) = ρ₀¹(X)ρ₁(Y) − ρ₁(Y)ρ₀⁰(X)`),
/// `hom_rho00`, `hom_rho01`.
pub fn validate_2rep(cm: &CrossedModule, rep: &TwoRepresentation, tol: f64) -> AxiomReport {
    let mut report = AxiomReport::new(tol);
    if let Err(e) = rep.check(cm) {
        report.push(&format!("shape: {e}"), f64::INFINITY);
        return report;
    }
    let (n, m) = (cm.n, cm.m);
    let d = &rep.partial;
    let mut end0 = 0.0f64;
    let mut h00 = 0.0f64;
    let mut h01 = 0.0f64;
    for i in 0..n {
        end0 = end0.max(max_abs_diff(&matmul(&rep.rho00[i], d), &matmul(d, &rep.rho01[i])));
        for j in 0..n {
            let br = cm.bracket0(&unit(n, i), &unit(n, j)).expect("basis shapes");
            h00 = h00.max(max_abs_diff(
                &rep.rho00_of(&br),
                &comm(&rep.rho00[i], &rep.rho00[j]),
            ));
            h01 = h01.max(max_abs_diff(
                &rep.rho01_of(&br),
                &comm(&rep.rho01[i], &rep.rho01[j]),
            ));
        }
    }
    let mut pr = 0.0f64;
    let mut rp = 0.0f64;
    let mut eq = 0.0f64;
    for a in 0..m {
        let ty = cm.tmap_apply(&unit(m, a)).expect("basis shapes");
        pr = pr.max(max_abs_diff(&rep.rho00_of(&ty), &matmul(d, &rep.rho1[a])));
        rp = rp.max(max_abs_diff(&rep.rho01_of(&ty), &matmul(&rep.rho1[a], d)));
        for i in 0..n {
            let xy = cm.act_on(&unit(n, i), &unit(m, a)).expect("basis shapes");
            let rhs = sub(
                &matmul(&rep.rho01[i], &rep.rho1[a]),
                &matmul(&rep.rho1[a], &rep.rho00[i]),
            );
            eq = eq.max(max_abs_diff(&rep.rho1_of(&xy), &rhs));
        }
    }
    report.push("end0", end0);
    report.push("partial_rho1", pr);
    report.push("rho1_partial", rp);
    report.push("rho1_equivariance", eq);
    report.push("hom_rho00", h00);
    report.push("hom_rho01", h01);
    report
}

/// `V₀ = g0`, `V₋₁ = g-1`, `∂ = t`, `ρ₀⁰ = ad`, `ρ₀¹ = X ▷ ·`,
/// `ρ₁(Y): X ↦ −X ▷ Y`.
pub fn adjoint_2rep(cm: &CrossedModule) -> TwoRepresentation {
    let (n, m) = (cm.n, cm.m);
    let rho00 = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| (0..n).map(|j| cm.c0[k][i][j]).collect())
                .collect()
        })
        .collect();
    let rho01 = (0..n)
        .map(|i| {
            (0..m)
                .map(|b| (0..m).map(|a| cm.act[b][i][a]).collect())
                .collect()
        })
        .collect();
    let rho1 = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| (0..n).map(|i| -cm.act[b][i][a]).collect())
                .collect()
        })
        .collect();
    TwoRepresentation {
        dv0: n,
        dvm1: m,
        partial: cm.tmap.clone(),
        rho00,
        rho01,
        rho1,
    }
}

/// The block upper-triangular matrix `ρ^gen(z)`.
pub fn rho_gen(cm: &CrossedModule, rep: &TwoRepresentation, z: &GradedElement) -> Result<Mat> {
    let ty = cm.tmap_apply(&z.y)?;
    crate::tensor::check_len("graded element x", &z.x, cm.n)?;
    let xt: Vec<f64> = z.x.iter().zip(&ty).map(|(a, b)| a + b).collect();
    let top = rep.rho01_of(&xt);
    let off = rep.rho1_of(&z.y);
    let bot = rep.rho00_of(&z.x);
    let (p, q) = (rep.dvm1, rep.dv0);
    let mut g = zeros2(p + q, p + q);
    for i in 0..p {
        g[i][..p].copy_from_slice(&top[i]);
        g[i][p..].copy_from_slice(&off[i]);
    }
    for i in 0..q {
        g[p + i][p..].copy_from_slice(&bot[i]);
    }
    Ok(g)
}

/// `max |ρ^gen([z, z']) − [ρ^gen z, ρ^gen z']|` under the total bracket.
pub fn rho_gen_hom_residual(
    cm: &CrossedModule,
    rep: &TwoRepresentation,
    pairs: &[(GradedElement, GradedElement)],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (z, zp) in pairs {
        let lhs = rho_gen(cm, rep, &cm.total_bracket(z, zp)?)?;
        let rhs = comm(&rho_gen(cm, rep, z)?, &rho_gen(cm, rep, zp)?);
        worst = worst.max(max_abs_diff(&lhs, &rhs));
    }
    Ok(worst)
}

/// Every basis pair of the total space.
pub fn basis_pairs(cm: &CrossedModule) -> Vec<(GradedElement, GradedElement)> {
    let nv = cm.dim();
    let mut out = Vec::new();
    for a in 0..nv {
        for b in 0..nv {
            out.push((
                GradedElement::from_full(&unit(nv, a), cm.n),
                GradedElement::from_full(&unit(nv, b), cm.n),
            ));
        }
    }
    out
}

fn trace(a: &Mat) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// `F_k = tr ρ^gen(z)^k` for `k = 1..=kmax`.
pub fn trace_polys_matrix(g: &Mat, kmax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax);
    let mut pw = g.clone();
    for k in 1..=kmax {
        if k > 1 {
            pw = matmul(&pw, g);
        }
        out.push(trace(&pw));
    }
    out
}

pub fn trace_polys(
    cm: &CrossedModule,
    rep: &TwoRepresentation,
    z: &GradedElement,
    kmax: usize,
) -> Result<Vec<f64>> {
    if kmax == 0 {
        return Err(Error::Config("kmax must be at least 1".into()));
    }
    Ok(trace_polys_matrix(&rho_gen(cm, rep, z)?, kmax))
}

pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex<f64>>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let ev = to_dmatrix(a).complex_eigenvalues();
    let out: Vec<Complex<f64>> = ev.iter().copied().collect();
    if out.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite values".into()));
    }
    Ok(out)
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// equally sized multisets.
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn sort_spectrum(v: &mut [Complex<f64>]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[derive(Clone, Debug)]
pub struct EigenUnion {
    /// Spectrum of `ρ^gen(z)`, sorted by real then imaginary part.
    pub full: Vec<Complex<f64>>,
    /// Union of the diagonal blocks' spectra, sorted the same way.
    pub blocks: Vec<Complex<f64>>,
    pub residual: f64,
}

pub fn eigen_union(
    cm: &CrossedModule,
    rep: &TwoRepresentation,
    z: &GradedElement,
) -> Result<EigenUnion> {
    let g = rho_gen(cm, rep, z)?;
    let ty = cm.tmap_apply(&z.y)?;
    let xt: Vec<f64> = z.x.iter().zip(&ty).map(|(a, b)| a + b).collect();
    let mut full = eigenvalues(&g)?;
    let mut blocks = eigenvalues(&rep.rho01_of(&xt))?;
    blocks.extend(eigenvalues(&rep.rho00_of(&z.x))?);
    sort_spectrum(&mut full);
    sort_spectrum(&mut blocks);
    let residual = multiset_distance(&full, &blocks);
    Ok(EigenUnion {
        full,
        blocks,
        residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftRow {
    pub t: f64,
    pub f: Vec<f64>,
    pub eig_drift: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftTable {
    pub kmax: usize,
    pub rows: Vec<DriftRow>,
    /// Per `k`, `max |F_k(t) − F_k(0)|`.
    pub abs_drift: Vec<f64>,
    /// Per `k`, `max |F_k(t) − F_k(0)| / max(1, |F_k(0)|)`.
    pub rel_drift: Vec<f64>,
    pub max_eig_drift: f64,
}

impl DriftTable {
    pub fn max_rel_drift(&self) -> f64 {
        self.rel_drift.iter().fold(0.0, |m, x| m.max(*x))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.kmax).map(|k| format!("F_{k}")));
        header.push("eig_drift".into());
        w.write_record(&header).map_err(io)?;
        for row in &self.rows {
            let mut rec = vec![format!("{:e}", row.t)];
            rec.extend(row.f.iter().map(|v| format!("{v:e}")));
            rec.push(format!("{:e}", row.eig_drift));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Trace polynomials and spectrum of `ρ^gen(L)` along a trajectory sampled
/// at spacing `dt`; every `stride`-th point is recorded.
pub fn conservation_monitor(
    cm: &CrossedModule,
    rep: &TwoRepresentation,
    pair: &TwoLaxPair,
    trajectory: &[GradedPoint],
    dt: f64,
    kmax: usize,
    stride: usize,
) -> Result<DriftTable> {
    let stride = stride.max(1);
    let mut table = DriftTable {
        kmax,
        rows: Vec::new(),
        abs_drift: vec![0.0; kmax],
        rel_drift: vec![0.0; kmax],
        max_eig_drift: 0.0,
    };
    let Some(first) = trajectory.first() else {
        return Ok(table);
    };
    let g0 = rho_gen(cm, rep, &pair.l_at(first))?;
    let f0 = trace_polys_matrix(&g0, kmax);
    let e0 = eigenvalues(&g0)?;
    for (s, p) in trajectory.iter().enumerate() {
        let last = s + 1 == trajectory.len();
        if s % stride != 0 && !last {
            continue;
        }
        let g = rho_gen(cm, rep, &pair.l_at(p))?;
        let f = trace_polys_matrix(&g, kmax);
        let ed = multiset_distance(&eigenvalues(&g)?, &e0);
        for k in 0..kmax {
            let d = (f[k] - f0[k]).abs();
            table.abs_drift[k] = table.abs_drift[k].max(d);
            table.rel_drift[k] = table.rel_drift[k].max(d / f0[k].abs().max(1.0));
        }
        table.max_eig_drift = table.max_eig_drift.max(ed);
        table.rows.push(DriftRow {
            t: s as f64 * dt,
            f,
            eig_drift: ed,
        });
    }
    Ok(table)
}
