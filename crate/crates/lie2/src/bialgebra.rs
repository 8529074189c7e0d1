//! 2-graded classical r-matrices and the Lie 2-bialgebra they induce.
//!
//! `R = R1 ⊕ R2` with `R1[a][i]` the coefficient of `S_a ⊗ T_i` and
//! `R2[i][a]` the coefficient of `T_i ⊗ S_a`. `decompose` returns the
//! unhalved blocks; the constructions downstream use the halved parts
//! `R^∧ = skew / 2`, `R^⊙ = sym / 2`, so that `R = R^∧ + R^⊙`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{AxiomReport, CrossedModule, GradedElement};
use crate::error::{Error, Result};
use crate::tensor::{
    check2, eye, inverse, matmul, max_abs, scale, transpose, zeros2, zeros3, Mat, T3,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRMatrix {
    #[serde(rename = "R1")]
    pub r1: Mat,
    #[serde(rename = "R2")]
    pub r2: Mat,
}

/// A pair of blocks shaped like an r-matrix: `a` in `g-1 ⊗ g0` (`m x n`),
/// `b` in `g0 ⊗ g-1` (`n x m`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blocks {
    pub a: Mat,
    pub b: Mat,
}

impl Blocks {
    /// Full `(n+m) x (n+m)` tensor over the total basis, `T` first.
    pub fn to_full(&self) -> Mat {
        let m = self.a.len();
        let n = self.b.len();
        let mut r = zeros2(n + m, n + m);
        for a in 0..m {
            for i in 0..n {
                r[n + a][i] = self.a[a][i];
                r[i][n + a] = self.b[i][a];
            }
        }
        r
    }

    pub fn halved(&self) -> Blocks {
        Blocks {
            a: scale(&self.a, 0.5),
            b: scale(&self.b, 0.5),
        }
    }
}

impl TwoRMatrix {
    pub fn new(r1: Mat, r2: Mat) -> Self {
        Self { r1, r2 }
    }

    pub fn check(&self, cm: &CrossedModule) -> Result<()> {
        check2("R1", &self.r1, cm.m, cm.n)?;
        check2("R2", &self.r2, cm.n, cm.m)
    }

    /// Identity lift of a 1-graded r-matrix on `g` to `id_g`: two copies.
    pub fn identity_lift(r: &Mat) -> Self {
        Self {
            r1: r.clone(),
            r2: r.clone(),
        }
    }

    /// `Σ σ_a ⊗ κ_a` on `id_su2`, in both mixed components.
    pub fn su2_canonical() -> Self {
        Self::identity_lift(&eye(3))
    }

    /// The single-block reading `R2 = 1`, `R1 = 0`; kept as a negative
    /// control (it violates `D_t⁻` and ID1).
    pub fn su2_single_block() -> Self {
        Self {
            r1: zeros2(3, 3),
            r2: eye(3),
        }
    }

    /// Identity lift of the Drinfeld–Jimbo r-matrix of sl2.
    pub fn sl2_dj() -> Self {
        Self::identity_lift(&dj_sl2())
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            r1: zeros2(m, n),
            r2: zeros2(n, m),
        }
    }

    /// Default r-matrix shipped with each built-in algebra.
    pub fn for_builtin(name: &str) -> Option<Self> {
        match name {
            "id_su2" => Some(Self::su2_canonical()),
            "id_sl2" => Some(Self::sl2_dj()),
            "skeletal_u1" => Some(Self::zero(1, 1)),
            _ => None,
        }
    }

    /// Halved skew part `R^∧`.
    pub fn skew_half(&self) -> Blocks {
        decompose(self).0.halved()
    }

    /// Halved symmetric part `R^⊙`.
    pub fn sym_half(&self) -> Blocks {
        decompose(self).1.halved()
    }
}

/// Drinfeld–Jimbo r-matrix `½ σ3⊗σ3 + 2 σ+⊗σ-` on sl2 in the basis
/// `(σ+, σ-, σ3)`. Its symmetric part is the Casimir of the trace form.
pub fn dj_sl2() -> Mat {
    vec![
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.5],
    ]
}

/// Trace form `tr(XY)` of sl2 in the defining representation.
pub fn sl2_trace_form() -> Mat {
    vec![
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 2.0],
    ]
}

/// Unhalved skew and symmetric parts:
/// skew = `(R1 − R2ᵀ) ⊕ (R2 − R1ᵀ)`, sym = `(R1 + R2ᵀ) ⊕ (R2 + R1ᵀ)`.
pub fn decompose(r: &TwoRMatrix) -> (Blocks, Blocks) {
    let r1t = transpose(&r.r1);
    let r2t = transpose(&r.r2);
    let zip = |p: &Mat, q: &Mat, s: f64| -> Mat {
        p.iter()
            .zip(q)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + s * y).collect())
            .collect()
    };
    let skew = Blocks {
        a: zip(&r.r1, &r2t, -1.0),
        b: zip(&r.r2, &r1t, -1.0),
    };
    let sym = Blocks {
        a: zip(&r.r1, &r2t, 1.0),
        b: zip(&r.r2, &r1t, 1.0),
    };
    (skew, sym)
}

/// Failure of `M = B tᵀ`, `M[i][j] = Σ_a skew.b[i][a] t[j][a]`, to be
/// antisymmetric: `max |M + Mᵀ|`. This is the condition under which φ
/// intertwines `t`.
pub fn check_dt_minus(cm: &CrossedModule, skew: &Blocks) -> f64 {
    let n = cm.n;
    let mut mm = zeros2(n, n);
    for i in 0..n {
        for j in 0..n {
            mm[i][j] = (0..cm.m).map(|a| skew.b[i][a] * cm.tmap[j][a]).sum();
        }
    }
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            r = r.max((mm[i][j] + mm[j][i]).abs());
        }
    }
    r
}

/// The invariant pairing `⟨T_i, S_a⟩ = p0[i][a]` determined by `R^⊙`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingForm {
    pub p0: Mat,
    /// `p0_inv[a][i]`, with `Σ_a p0[i][a] p0_inv[a][j] = δ_ij`.
    pub p0_inv: Mat,
    pub invariance_residual: f64,
    pub t_symmetry_residual: f64,
}

impl PairingForm {
    /// Off-diagonal form on the total space.
    pub fn full(&self) -> Mat {
        let n = self.p0.len();
        let m = self.p0_inv.len();
        let mut g = zeros2(n + m, n + m);
        for i in 0..n {
            for a in 0..m {
                g[i][n + a] = self.p0[i][a];
                g[n + a][i] = self.p0[i][a];
            }
        }
        g
    }

    /// `⟨Z, W⟩` on total-space coordinates.
    pub fn eval(&self, z: &[f64], w: &[f64]) -> f64 {
        let g = self.full();
        bilinear(&g, z, w)
    }
}

pub fn bilinear(g: &Mat, z: &[f64], w: &[f64]) -> f64 {
    g.iter()
        .zip(z)
        .map(|(row, zi)| zi * row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// Max over basis triples of `⟨[Z,W],W'⟩ + ⟨W,[Z,W']⟩` for the bracket
/// with constants `f`.
pub fn form_invariance_residual(f: &T3, g: &Mat) -> f64 {
    let nn = g.len();
    let mut r = 0.0f64;
    for z in 0..nn {
        for w in 0..nn {
            for v in 0..nn {
                let mut s = 0.0;
                for c in 0..nn {
                    s += f[c][z][w] * g[c][v] + g[w][c] * f[c][z][v];
                }
                r = r.max(s.abs());
            }
        }
    }
    r
}

/// Builds the pairing from the unhalved symmetric blocks of `decompose`:
/// `p0` is the inverse of the halved `g0 ⊗ g-1` block. Checks μ₂
/// invariance and `t`-symmetry `⟨tY, Y'⟩ = ⟨tY', Y⟩`.
pub fn pairing_from_sym(cm: &CrossedModule, sym: &Blocks, tol: f64) -> Result<PairingForm> {
    check2("sym g0⊗g-1 block", &sym.b, cm.n, cm.m)?;
    check2("sym g-1⊗g0 block", &sym.a, cm.m, cm.n)?;
    let cb = scale(&sym.b, 0.5);
    if cm.n != cm.m || max_abs(&cb) == 0.0 {
        return Err(Error::NonDegenerate(
            "symmetric part R^⊙ does not define a non-degenerate pairing".into(),
        ));
    }
    // Σ_a cb[i][a] p0[j][a] = δ_ij, so p0 = cb^{-T}.
    let cb_inv = inverse(&cb, "symmetric part R^⊙")?;
    let p0 = transpose(&cb_inv);
    let p0_inv = transpose(&cb);
    let mut form = PairingForm {
        p0,
        p0_inv,
        invariance_residual: 0.0,
        t_symmetry_residual: 0.0,
    };
    form.invariance_residual = form_invariance_residual(&cm.mu2_constants(), &form.full());
    let tp = matmul(&transpose(&cm.tmap), &form.p0);
    let mut ts = 0.0f64;
    for a in 0..cm.m {
        for b in 0..cm.m {
            ts = ts.max((tp[a][b] - tp[b][a]).abs());
        }
    }
    form.t_symmetry_residual = ts;
    let worst = form.invariance_residual.max(ts);
    if worst >= tol {
        return Err(Error::Invariance {
            residual: worst,
            tol,
        });
    }
    Ok(form)
}

/// Cobracket coefficients on the total basis: `d[C][A][B]` is the
/// coefficient of `Z_A ⊗ Z_B` in `δ(Z_C)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cobracket {
    pub n: usize,
    pub m: usize,
    pub d: T3,
}

impl Cobracket {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            d: zeros3(n + m, n + m, n + m),
        }
    }

    /// `δ₋₁(S_a)` coefficients `[a][b][c]` of `S_b ⊗ S_c`.
    pub fn dminus1(&self) -> T3 {
        let n = self.n;
        (0..self.m)
            .map(|a| {
                (0..self.m)
                    .map(|b| (0..self.m).map(|c| self.d[n + a][n + b][n + c]).collect())
                    .collect()
            })
            .collect()
    }

    /// `δ₀(T_i)` coefficients `[i][j][b]` of `T_j ⊗ S_b`.
    pub fn d0_ts(&self) -> T3 {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..self.m).map(|b| self.d[i][j][n + b]).collect())
                    .collect()
            })
            .collect()
    }

    /// `δ₀(T_i)` coefficients `[i][b][j]` of `S_b ⊗ T_j`.
    pub fn d0_st(&self) -> T3 {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..self.m)
                    .map(|b| (0..n).map(|j| self.d[i][n + b][j]).collect())
                    .collect()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.d.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `δ(Z) = [Z ⊗ 1 + 1 ⊗ Z, R^∧]` with μ₂ acting on each factor; `skew`
/// is the unhalved output of `decompose`.
pub fn coboundary_delta(cm: &CrossedModule, skew: &Blocks) -> Cobracket {
    let f = cm.mu2_constants();
    let r = skew.halved().to_full();
    let nn = cm.dim();
    let mut d = zeros3(nn, nn, nn);
    for c in 0..nn {
        for a in 0..nn {
            for b in 0..nn {
                let mut s = 0.0;
                for x in 0..nn {
                    s += f[a][c][x] * r[x][b] + f[b][c][x] * r[a][x];
                }
                d[c][a][b] = s;
            }
        }
    }
    Cobracket {
        n: cm.n,
        m: cm.m,
        d,
    }
}

/// Block-embedded `t` on the total space: maps `S_a` to `t(S_a)`.
fn t_full(cm: &CrossedModule) -> Mat {
    let n = cm.n;
    let mut t = zeros2(cm.dim(), cm.dim());
    for i in 0..n {
        for a in 0..cm.m {
            t[i][n + a] = cm.tmap[i][a];
        }
    }
    t
}

/// `ad_Z` of μ₂ as a matrix on the total space.
fn ad_matrix(f: &T3, z: usize) -> Mat {
    let nn = f.len();
    let mut ad = zeros2(nn, nn);
    for c in 0..nn {
        for x in 0..nn {
            ad[c][x] = f[c][z][x];
        }
    }
    ad
}

/// `(M ⊗ 1 + 1 ⊗ M) T` for a 2-tensor `T`.
fn act2(mx: &Mat, t: &Mat) -> Mat {
    let a = matmul(mx, t);
    let b = matmul(t, &transpose(mx));
    a.iter()
        .zip(&b)
        .map(|(p, q)| p.iter().zip(q).map(|(x, y)| x + y).collect())
        .collect()
}

fn max_diff(a: &Mat, b: &Mat) -> f64 {
    crate::tensor::max_abs_diff(a, b)
}

/// The four 2-cocycle conditions, plus a grading check that `δ₀` lands in
/// the mixed components and `δ₋₁` in `g-1 ⊗ g-1`.
pub fn validate_cocycle(cm: &CrossedModule, delta: &Cobracket, tol: f64) -> AxiomReport {
    let (n, m) = (cm.n, cm.m);
    let nn = n + m;
    let f = cm.mu2_constants();
    let t = t_full(cm);
    let d = &delta.d;
    let mut rep = AxiomReport::new(tol);

    let mut g = 0.0f64;
    for c in 0..nn {
        for a in 0..nn {
            for b in 0..nn {
                let allowed = if c < n {
                    (a < n) != (b < n)
                } else {
                    a >= n && b >= n
                };
                if !allowed {
                    g = g.max(d[c][a][b].abs());
                }
            }
        }
    }
    rep.push("grading", g);

    // ID1: δ₀(tY) = (t⊗1 + 1⊗t) δ₋₁(Y)
    let mut r = 0.0f64;
    for a in 0..m {
        let mut lhs = zeros2(nn, nn);
        for i in 0..n {
            let ti = cm.tmap[i][a];
            if ti == 0.0 {
                continue;
            }
            for p in 0..nn {
                for q in 0..nn {
                    lhs[p][q] += ti * d[i][p][q];
                }
            }
        }
        r = r.max(max_diff(&lhs, &act2(&t, &d[n + a])));
    }
    rep.push("ID1", r);

    // ID2: (t⊗1 − 1⊗t) δ₀ = 0
    let mut r = 0.0f64;
    for i in 0..n {
        let p = matmul(&t, &d[i]);
        let q = matmul(&d[i], &transpose(&t));
        r = r.max(max_diff(&p, &q));
    }
    rep.push("ID2", r);

    // δ([Z,W]) = ad_Z δ(W) − ad_W δ(Z), split by the degrees of (Z, W).
    let mut inv = 0.0f64;
    let mut id3 = 0.0f64;
    for z in 0..nn {
        for w in 0..nn {
            if z >= n {
                continue;
            }
            let mut lhs = zeros2(nn, nn);
            for c in 0..nn {
                let fc = f[c][z][w];
                if fc == 0.0 {
                    continue;
                }
                for p in 0..nn {
                    for q in 0..nn {
                        lhs[p][q] += fc * d[c][p][q];
                    }
                }
            }
            let a = act2(&ad_matrix(&f, z), &d[w]);
            let b = act2(&ad_matrix(&f, w), &d[z]);
            let rhs: Mat = a
                .iter()
                .zip(&b)
                .map(|(p, q)| p.iter().zip(q).map(|(x, y)| x - y).collect())
                .collect();
            let res = max_diff(&lhs, &rhs);
            if w < n {
                inv = inv.max(res);
            } else {
                id3 = id3.max(res);
            }
        }
    }
    rep.push("ad_invariance", inv);
    rep.push("ID3", id3);
    rep
}

/// `(δ⊗1)δ(Z)`, `(1⊗δ)δ(Z)` as rank-3 tensors.
fn codouble(d: &T3, c: usize) -> (T3, T3) {
    let nn = d.len();
    let mut left = zeros3(nn, nn, nn);
    let mut right = zeros3(nn, nn, nn);
    for x in 0..nn {
        for y in 0..nn {
            let v = d[c][x][y];
            if v == 0.0 {
                continue;
            }
            for p in 0..nn {
                for q in 0..nn {
                    left[p][q][y] += v * d[x][p][q];
                    right[x][p][q] += v * d[y][p][q];
                }
            }
        }
    }
    (left, right)
}

/// Dual Jacobi identities `(δ⊗1)δ − (1⊗δ)δ + (τ⊗1)(1⊗δ)δ = 0` on `g0`
/// and on `g-1`. The variant with a minus on the τ term is reported as a
/// diagnostic.
pub fn validate_cobracket(cm: &CrossedModule, delta: &Cobracket, tol: f64) -> AxiomReport {
    let n = cm.n;
    let nn = cm.dim();
    let d = &delta.d;
    let mut rep = AxiomReport::new(tol);
    let mut res = [0.0f64; 2];
    let mut alt = [0.0f64; 2];
    for c in 0..nn {
        let (l, r) = codouble(d, c);
        let k = usize::from(c >= n);
        for p in 0..nn {
            for q in 0..nn {
                for s in 0..nn {
                    let plus = l[p][q][s] - r[p][q][s] + r[q][p][s];
                    let minus = l[p][q][s] - r[p][q][s] - r[q][p][s];
                    res[k] = res[k].max(plus.abs());
                    alt[k] = alt[k].max(minus.abs());
                }
            }
        }
    }
    rep.push("cojacobi_g0", res[0]);
    rep.push("cojacobi_gm1", res[1]);
    rep.diagnostic("cojacobi_g0_minus_tau", alt[0]);
    rep.diagnostic("cojacobi_gm1_minus_tau", alt[1]);
    rep
}

/// Structure constants of the dual 2-algebra `g*[1]`, returned as a
/// crossed module with `g-1*` in degree 0 and `g0*` in degree −1:
/// `[f^a, f^b] = δ₋₁`-dual, `f^a ▷ g^i` from the `g-1 ⊗ g0` block of `δ₀`,
/// `t* = tᵀ`.
pub fn dual_structure_constants(
    cm: &CrossedModule,
    r: &TwoRMatrix,
    tol: f64,
) -> Result<CrossedModule> {
    r.check(cm)?;
    let (skew, sym) = decompose(r);
    pairing_from_sym(cm, &sym, tol)?;
    let delta = coboundary_delta(cm, &skew);
    let (n, m) = (cm.n, cm.m);
    let mut c0 = zeros3(m, m, m);
    for c in 0..m {
        for a in 0..m {
            for b in 0..m {
                c0[c][a][b] = delta.d[n + c][n + a][n + b];
            }
        }
    }
    let mut act = zeros3(n, m, n);
    for j in 0..n {
        for a in 0..m {
            for i in 0..n {
                act[j][a][i] = delta.d[j][n + a][i];
            }
        }
    }
    CrossedModule::new(&format!("dual_{}", cm.name), c0, act, transpose(&cm.tmap))
}

/// `φ₀` (`n x n`) and `φ₋₁` (`m x m`) acting on coefficient columns:
/// `φ₋₁(S_b) = Σ B[i][a] ⟨S_b, T_i⟩ S_a`, `φ₀(T_j) = Σ A[a][i] ⟨T_j, S_a⟩ T_i`
/// with the halved skew blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiMap {
    pub phi0: Mat,
    pub phim1: Mat,
    pub hom_residual: f64,
}

impl PhiMap {
    /// Block-diagonal matrix on the total space.
    pub fn full(&self) -> Mat {
        let n = self.phi0.len();
        let m = self.phim1.len();
        let mut p = zeros2(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                p[i][j] = self.phi0[i][j];
            }
        }
        for a in 0..m {
            for b in 0..m {
                p[n + a][n + b] = self.phim1[a][b];
            }
        }
        p
    }

    pub fn apply(&self, z: &GradedElement) -> GradedElement {
        GradedElement {
            x: crate::tensor::matvec(&self.phi0, &z.x),
            y: crate::tensor::matvec(&self.phim1, &z.y),
        }
    }
}

pub fn phi_map(cm: &CrossedModule, r: &TwoRMatrix, tol: f64) -> Result<PhiMap> {
    r.check(cm)?;
    let (skew, sym) = decompose(r);
    let form = pairing_from_sym(cm, &sym, tol)?;
    let dt = check_dt_minus(cm, &skew);
    if dt >= tol {
        return Err(Error::Structural(format!(
            "D_t⁻ R^∧ = {dt:e} is not zero; φ does not intertwine t"
        )));
    }
    let h = skew.halved();
    let (n, m) = (cm.n, cm.m);
    let mut phim1 = zeros2(m, m);
    for a in 0..m {
        for b in 0..m {
            phim1[a][b] = (0..n).map(|i| h.b[i][a] * form.p0[i][b]).sum();
        }
    }
    let mut phi0 = zeros2(n, n);
    for i in 0..n {
        for j in 0..n {
            phi0[i][j] = (0..m).map(|a| h.a[a][i] * form.p0[j][a]).sum();
        }
    }
    let lhs = matmul(&cm.tmap, &phim1);
    let rhs = matmul(&phi0, &cm.tmap);
    let hom_residual = max_diff(&lhs, &rhs);
    if hom_residual >= tol {
        return Err(Error::Structural(format!(
            "t∘φ₋₁ − φ₀∘t = {hom_residual:e}"
        )));
    }
    Ok(PhiMap {
        phi0,
        phim1,
        hom_residual,
    })
}

/// `[φZ, Z'] + [Z, φZ']` with μ₂.
pub fn r_bracket(
    cm: &CrossedModule,
    phi: &PhiMap,
    z: &GradedElement,
    zp: &GradedElement,
) -> Result<GradedElement> {
    let a = cm.graded_bracket(&phi.apply(z), zp)?;
    let b = cm.graded_bracket(z, &phi.apply(zp))?;
    Ok(GradedElement {
        x: a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect(),
        y: a.y.iter().zip(&b.y).map(|(p, q)| p + q).collect(),
    })
}

/// The crossed module carrying the R-bracket: `[X,X']_R` on `g0`,
/// `X ▷_R Y = φX ▷ Y + X ▷ φY`, same `t`. Its μ₂ is `r_bracket` and its
/// Peiffer bracket is the R-bracket on `g-1`.
pub fn r_crossed_module(cm: &CrossedModule, phi: &PhiMap) -> CrossedModule {
    let (n, m) = (cm.n, cm.m);
    let (p0, p1) = (&phi.phi0, &phi.phim1);
    let mut c0 = zeros3(n, n, n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += cm.c0[k][l][j] * p0[l][i] + cm.c0[k][i][l] * p0[l][j];
                }
                c0[k][i][j] = s;
            }
        }
    }
    let mut act = zeros3(m, n, m);
    for b in 0..m {
        for i in 0..n {
            for a in 0..m {
                let mut s = 0.0;
                for l in 0..n {
                    s += p0[l][i] * cm.act[b][l][a];
                }
                for c in 0..m {
                    s += cm.act[b][i][c] * p1[c][a];
                }
                act[b][i][a] = s;
            }
        }
    }
    CrossedModule::new(&format!("{}_R", cm.name), c0, act, cm.tmap.clone())
        .expect("shapes inherited from a valid crossed module")
}

/// Residual of the duality between the R-bracket and the coboundary dual:
/// `⟨Z₀, [Z,Z']_R⟩ = (h ⊗ h')(δ Z₀)` with `h = ⟨·, Z⟩`, `h' = ⟨·, Z'⟩`.
pub fn r_bracket_duality_residual(
    cm: &CrossedModule,
    r: &TwoRMatrix,
    triples: &[(Vec<f64>, Vec<f64>, Vec<f64>)],
    tol: f64,
) -> Result<f64> {
    let (skew, sym) = decompose(r);
    let form = pairing_from_sym(cm, &sym, tol)?;
    let phi = phi_map(cm, r, tol)?;
    let delta = coboundary_delta(cm, &skew);
    let g = form.full();
    let n = cm.n;
    let mut worst = 0.0f64;
    for (z0, z, zp) in triples {
        let zz = GradedElement::from_full(z, n);
        let zzp = GradedElement::from_full(zp, n);
        let br = r_bracket(cm, &phi, &zz, &zzp)?.to_full();
        let lhs = bilinear(&g, z0, &br);
        let h: Vec<f64> = crate::tensor::matvec(&g, z);
        let hp: Vec<f64> = crate::tensor::matvec(&g, zp);
        let mut rhs = 0.0;
        for (c, zc) in z0.iter().enumerate() {
            rhs += zc * bilinear(&delta.d[c], &h, &hp);
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// The 2-adjoint representation: `ad_X` on `g0`, `χ_X = X ▷ ·` on `g-1`,
/// and `ad₋₁(Y) = · ▷ Y : g0 -> g-1`, one matrix per basis element.
#[derive(Clone, Debug)]
pub struct TwoAdjoint {
    pub ad0: Vec<Mat>,
    pub chi: Vec<Mat>,
    pub adm1: Vec<Mat>,
}

pub fn two_adjoint(cm: &CrossedModule) -> TwoAdjoint {
    let (n, m) = (cm.n, cm.m);
    let ad0 = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| (0..n).map(|j| cm.c0[k][i][j]).collect())
                .collect()
        })
        .collect();
    let chi = (0..n)
        .map(|i| {
            (0..m)
                .map(|b| (0..m).map(|a| cm.act[b][i][a]).collect())
                .collect()
        })
        .collect();
    let adm1 = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| (0..n).map(|i| cm.act[b][i][a]).collect())
                .collect()
        })
        .collect();
    TwoAdjoint { ad0, chi, adm1 }
}

/// Max residual of `ad_X t = t χ_X`, `ad₋₁(Y) t = −ad_Y`,
/// `t ad₋₁(Y) = −ad_{tY}` over basis elements.
pub fn two_adjoint_identities(cm: &CrossedModule) -> [f64; 3] {
    let tw = two_adjoint(cm);
    let t = &cm.tmap;
    let (n, m) = (cm.n, cm.m);
    let mut r = [0.0f64; 3];
    for i in 0..n {
        r[0] = r[0].max(max_diff(&matmul(&tw.ad0[i], t), &matmul(t, &tw.chi[i])));
    }
    for a in 0..m {
        // ad_Y on g-1: Y' ↦ [Y, Y'].
        let ady: Mat = (0..m)
            .map(|c| (0..m).map(|b| -cm.cminus1[c][a][b]).collect())
            .collect();
        r[1] = r[1].max(max_diff(&matmul(&tw.adm1[a], t), &ady));
        let mut adty = zeros2(n, n);
        for k in 0..n {
            for j in 0..n {
                adty[k][j] = -(0..n).map(|i| t[i][a] * cm.c0[k][i][j]).sum::<f64>();
            }
        }
        r[2] = r[2].max(max_diff(&matmul(t, &tw.adm1[a]), &adty));
    }
    r
}

pub fn load_rmatrix(path: &Path) -> Result<TwoRMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}
