//! Strict Lie 2-algebras given as Lie algebra crossed modules
//! `t: g-1 -> g0` with an action of `g0` on `g-1`, stored by structure
//! constants.
//!
//! Index conventions:
//! - `c0[k][i][j]`: `[T_i, T_j] = c0[k][i][j] T_k`
//! - `act[b][i][a]`: `T_i ▷ S_a = act[b][i][a] S_b`
//! - `tmap[i][a]`: `t(S_a) = tmap[i][a] T_i`
//! - `cminus1[c][a][b]`: `[S_a, S_b] = cminus1[c][a][b] S_c`, always derived
//!   from the Peiffer identity.
//!
//! Elements of the total space `g0 ⊕ g-1` are also handled as flat vectors
//! of length `n + m`, with the `T` basis first.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{check2, check3, check_len, eye, zeros2, zeros3, Mat, T3};

#[derive(Clone, Debug, PartialEq)]
pub struct CrossedModule {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub c0: T3,
    pub act: T3,
    pub tmap: Mat,
    pub cminus1: T3,
}

/// An element `Y + X` of `g-1 ⊕ g0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedElement {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GradedElement {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; m],
        }
    }

    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    /// Flat coordinates, `x` first.
    pub fn to_full(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }

    pub fn from_full(v: &[f64], n: usize) -> Self {
        Self {
            x: v[..n].to_vec(),
            y: v[n..].to_vec(),
        }
    }
}

/// One named axiom check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

/// Per-axiom maximum residuals. `diagnostics` are reported but do not
/// affect `pass`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub diagnostics: Vec<(String, f64)>,
    pub tol: f64,
    pub pass: bool,
}

impl AxiomReport {
    pub fn new(tol: f64) -> Self {
        Self {
            checks: Vec::new(),
            diagnostics: Vec::new(),
            tol,
            pass: true,
        }
    }

    pub fn push(&mut self, name: &str, residual: f64) {
        let pass = residual.is_finite() && residual < self.tol;
        self.pass &= pass;
        self.checks.push(AxiomCheck {
            name: name.to_string(),
            residual,
            pass,
        });
    }

    pub fn diagnostic(&mut self, name: &str, value: f64) {
        self.diagnostics.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |c| c.residual)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.residual))
    }
}

/// Names of the crossed-module axioms, in report order.
pub const AXIOMS: [&str; 7] = [
    "c0_antisymmetry",
    "jacobi_g0",
    "action_representation",
    "equivariance",
    "peiffer_antisymmetry",
    "jacobi_gm1",
    "t_homomorphism",
];

impl CrossedModule {
    /// Builds a crossed module, checking shapes and deriving `cminus1`.
    pub fn new(name: &str, c0: T3, act: T3, tmap: Mat) -> Result<Self> {
        let n = c0.len();
        let m = act.len();
        check3("c0", &c0, n, n, n)?;
        check3("act", &act, m, n, m)?;
        check2("t", &tmap, n, m)?;
        let mut cminus1 = zeros3(m, m, m);
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    cminus1[c][a][b] = (0..n).map(|i| tmap[i][a] * act[c][i][b]).sum();
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            n,
            m,
            c0,
            act,
            tmap,
            cminus1,
        })
    }

    /// The identity crossed module `id: g -> g` on a Lie algebra with
    /// structure constants `c`.
    pub fn identity(name: &str, c: &T3) -> Result<Self> {
        let n = c.len();
        Self::new(name, c.clone(), c.clone(), eye(n))
    }

    /// `id_su2`: `[σ_a, σ_b] = ε_abc σ_c`, `t = 1`.
    pub fn id_su2() -> Self {
        Self::identity("id_su2", &su2_constants()).expect("su2 constants are well-shaped")
    }

    /// `id_sl2` in the basis `(σ+, σ-, σ3)`, `t = 1`.
    pub fn id_sl2() -> Self {
        Self::identity("id_sl2", &sl2_constants()).expect("sl2 constants are well-shaped")
    }

    /// `skeletal_u1`: `n = m = 1`, `t = 0`, all brackets zero.
    pub fn skeletal_u1() -> Self {
        Self::new("skeletal_u1", zeros3(1, 1, 1), zeros3(1, 1, 1), zeros2(1, 1))
            .expect("skeletal constants are well-shaped")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "id_su2" => Some(Self::id_su2()),
            "id_sl2" => Some(Self::id_sl2()),
            "skeletal_u1" => Some(Self::skeletal_u1()),
            _ => None,
        }
    }

    pub const BUILTINS: [&'static str; 3] = ["id_su2", "id_sl2", "skeletal_u1"];

    /// Dimension of the total space `g0 ⊕ g-1`.
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    /// Structure constants `F[C][A][B]` of the graded bracket μ₂ on the
    /// total space: the `[Y, Y']` component is dropped.
    pub fn mu2_constants(&self) -> T3 {
        let (n, m) = (self.n, self.m);
        let mut f = zeros3(n + m, n + m, n + m);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    f[k][i][j] = self.c0[k][i][j];
                }
            }
        }
        for b in 0..m {
            for i in 0..n {
                for a in 0..m {
                    f[n + b][i][n + a] = self.act[b][i][a];
                    f[n + b][n + a][i] = -self.act[b][i][a];
                }
            }
        }
        f
    }

    /// Structure constants of the total Lie algebra `g0 ⋉ g-1`: μ₂ plus the
    /// Peiffer bracket on `g-1`.
    pub fn total_constants(&self) -> T3 {
        let n = self.n;
        let mut f = self.mu2_constants();
        for c in 0..self.m {
            for a in 0..self.m {
                for b in 0..self.m {
                    f[n + c][n + a][n + b] = self.cminus1[c][a][b];
                }
            }
        }
        f
    }

    fn check_x(&self, what: &str, x: &[f64]) -> Result<()> {
        check_len(what, x, self.n)
    }

    fn check_y(&self, what: &str, y: &[f64]) -> Result<()> {
        check_len(what, y, self.m)
    }

    fn check_z(&self, z: &GradedElement) -> Result<()> {
        self.check_x("graded element x", &z.x)?;
        self.check_y("graded element y", &z.y)
    }

    /// `[x, x']₀`.
    pub fn bracket0(&self, x: &[f64], xp: &[f64]) -> Result<Vec<f64>> {
        self.check_x("bracket0 lhs", x)?;
        self.check_x("bracket0 rhs", xp)?;
        Ok(contract(&self.c0, x, xp))
    }

    /// `x ▷ y`.
    pub fn act_on(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_x("action lhs", x)?;
        self.check_y("action rhs", y)?;
        Ok(contract(&self.act, x, y))
    }

    /// `t(y)`.
    pub fn tmap_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_y("t-map argument", y)?;
        Ok(self
            .tmap
            .iter()
            .map(|row| row.iter().zip(y).map(|(t, v)| t * v).sum())
            .collect())
    }

    /// `[y, y']` on `g-1`, which equals `t(y) ▷ y'`.
    pub fn bracket_minus1(&self, y: &[f64], yp: &[f64]) -> Result<Vec<f64>> {
        self.check_y("bracket_minus1 lhs", y)?;
        self.check_y("bracket_minus1 rhs", yp)?;
        Ok(contract(&self.cminus1, y, yp))
    }

    /// μ₂: `([x,x'], x▷y' − x'▷y)`; no degree −2 output.
    pub fn graded_bracket(&self, z: &GradedElement, zp: &GradedElement) -> Result<GradedElement> {
        self.check_z(z)?;
        self.check_z(zp)?;
        let x = contract(&self.c0, &z.x, &zp.x);
        let a = contract(&self.act, &z.x, &zp.y);
        let b = contract(&self.act, &zp.x, &z.y);
        let y = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        Ok(GradedElement { x, y })
    }

    /// Bracket of the total algebra `g0 ⋉ g-1`: μ₂ plus `[y, y']`.
    pub fn total_bracket(&self, z: &GradedElement, zp: &GradedElement) -> Result<GradedElement> {
        let mut out = self.graded_bracket(z, zp)?;
        let p = contract(&self.cminus1, &z.y, &zp.y);
        for (o, v) in out.y.iter_mut().zip(p) {
            *o += v;
        }
        Ok(out)
    }

    pub fn to_file(&self) -> AlgebraFile {
        AlgebraFile {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            c0: self.c0.clone(),
            act: self.act.clone(),
            t: self.tmap.clone(),
        }
    }
}

/// `out[k] = Σ_ij t[k][i][j] u[i] v[j]`.
pub fn contract(t: &T3, u: &[f64], v: &[f64]) -> Vec<f64> {
    t.iter()
        .map(|mk| {
            let mut s = 0.0;
            for (i, row) in mk.iter().enumerate() {
                if u[i] == 0.0 {
                    continue;
                }
                let inner: f64 = row.iter().zip(v).map(|(c, w)| c * w).sum();
                s += u[i] * inner;
            }
            s
        })
        .collect()
}

/// `ε_abc` as `c[c][a][b]`.
pub fn su2_constants() -> T3 {
    let mut c = zeros3(3, 3, 3);
    for (a, b, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        c[k][a][b] = 1.0;
        c[k][b][a] = -1.0;
    }
    c
}

/// sl2 in the basis `(σ+, σ-, σ3)`:
/// `[σ+,σ-] = σ3`, `[σ3,σ+] = 2σ+`, `[σ3,σ-] = −2σ-`.
pub fn sl2_constants() -> T3 {
    let mut c = zeros3(3, 3, 3);
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        c[k][i][j] = v;
        c[k][j][i] = -v;
    };
    set(0, 1, 2, 1.0);
    set(2, 0, 0, 2.0);
    set(2, 1, 1, -2.0);
    c
}

/// Evaluates every crossed-module axiom on all basis triples.
pub fn validate_crossed_module(cm: &CrossedModule, tol: f64) -> AxiomReport {
    let (n, m) = (cm.n, cm.m);
    let (c0, act, t, cm1) = (&cm.c0, &cm.act, &cm.tmap, &cm.cminus1);
    let mut rep = AxiomReport::new(tol);

    let mut r = 0.0f64;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r = r.max((c0[k][i][j] + c0[k][j][i]).abs());
            }
        }
    }
    rep.push(AXIOMS[0], r);

    // [T_i,[T_j,T_l]] + cyclic
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += c0[k][i][p] * c0[p][j][l]
                            + c0[k][j][p] * c0[p][l][i]
                            + c0[k][l][p] * c0[p][i][j];
                    }
                    r = r.max(s.abs());
                }
            }
        }
    }
    rep.push(AXIOMS[1], r);

    // T_i▷(T_j▷S_a) − T_j▷(T_i▷S_a) − [T_i,T_j]▷S_a
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for c in 0..m {
                        s += act[b][i][c] * act[c][j][a] - act[b][j][c] * act[c][i][a];
                    }
                    for k in 0..n {
                        s -= c0[k][i][j] * act[b][k][a];
                    }
                    r = r.max(s.abs());
                }
            }
        }
    }
    rep.push(AXIOMS[2], r);

    // t(T_i▷S_a) = [T_i, t S_a]
    let mut r = 0.0f64;
    for i in 0..n {
        for a in 0..m {
            for k in 0..n {
                let lhs: f64 = (0..m).map(|b| t[k][b] * act[b][i][a]).sum();
                let rhs: f64 = (0..n).map(|j| c0[k][i][j] * t[j][a]).sum();
                r = r.max((lhs - rhs).abs());
            }
        }
    }
    rep.push(AXIOMS[3], r);

    // Peiffer bracket (tY)▷Y' must be antisymmetric.
    let mut r = 0.0f64;
    for c in 0..m {
        for a in 0..m {
            for b in 0..m {
                r = r.max((cm1[c][a][b] + cm1[c][b][a]).abs());
            }
        }
    }
    rep.push(AXIOMS[4], r);

    let mut r = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for e in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for p in 0..m {
                        s += cm1[c][a][p] * cm1[p][b][e]
                            + cm1[c][b][p] * cm1[p][e][a]
                            + cm1[c][e][p] * cm1[p][a][b];
                    }
                    r = r.max(s.abs());
                }
            }
        }
    }
    rep.push(AXIOMS[5], r);

    // t[S_a,S_b] = [tS_a, tS_b]
    let mut r = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                let lhs: f64 = (0..m).map(|c| t[k][c] * cm1[c][a][b]).sum();
                let mut rhs = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        rhs += c0[k][i][j] * t[i][a] * t[j][b];
                    }
                }
                r = r.max((lhs - rhs).abs());
            }
        }
    }
    rep.push(AXIOMS[6], r);
    rep
}

/// On-disk algebra format. `cminus1` is never read; it is recomputed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub c0: T3,
    pub act: T3,
    pub t: Mat,
}

impl AlgebraFile {
    pub fn into_crossed_module(self) -> Result<CrossedModule> {
        check3("c0", &self.c0, self.n, self.n, self.n)?;
        check3("act", &self.act, self.m, self.n, self.m)?;
        check2("t", &self.t, self.n, self.m)?;
        CrossedModule::new(&self.name, self.c0, self.act, self.t)
    }
}

pub fn parse_algebra(text: &str, origin: &str) -> Result<CrossedModule> {
    let file: AlgebraFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        msg: e.to_string(),
    })?;
    file.into_crossed_module()
}

pub fn load_algebra(path: &Path) -> Result<CrossedModule> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_algebra(&text, &path.display().to_string())
}

pub fn save_algebra(cm: &CrossedModule, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&cm.to_file()).expect("algebra serializes");
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Resolves a built-in name or a JSON file path.
pub fn resolve_algebra(source: &str) -> Result<CrossedModule> {
    match CrossedModule::builtin(source) {
        Some(cm) => Ok(cm),
        None => load_algebra(Path::new(source)),
    }
}
