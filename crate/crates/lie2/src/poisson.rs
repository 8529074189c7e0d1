//! Linear graded Poisson brackets on polynomial observables over `g*[1]`.
//!
//! Coordinates: `β_i` (index `i`, value `g_i`) pairs with `T_i`, `α_a`
//! (index `n + a`, value `f_a`) pairs with `S_a`. The bracket is the
//! Lie–Poisson bracket of the total algebra `g0 ⋉ g-1` (μ₂ plus the
//! Peiffer bracket), `{x_A, x_B} = Σ_C F[C][A][B] x_C`; in `rmatrix` mode
//! the constants are those of the R-bracket.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{contract, CrossedModule};
use crate::bialgebra::{phi_map, r_crossed_module, TwoRMatrix};
use crate::error::{Error, Result};
use crate::tensor::{check_len, zeros2, Mat, T3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedPoint {
    pub g: Vec<f64>,
    pub f: Vec<f64>,
}

impl GradedPoint {
    pub fn new(g: Vec<f64>, f: Vec<f64>) -> Self {
        Self { g, f }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            g: vec![0.0; n],
            f: vec![0.0; m],
        }
    }

    /// Concatenated coordinates `ξ = (g, f)`.
    pub fn coords(&self) -> Vec<f64> {
        self.g.iter().chain(&self.f).copied().collect()
    }

    pub fn from_coords(xi: &[f64], n: usize) -> Self {
        Self {
            g: xi[..n].to_vec(),
            f: xi[n..].to_vec(),
        }
    }

    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        check_len("point g", &self.g, n)?;
        check_len("point f", &self.f, m)
    }

    pub fn is_finite(&self) -> bool {
        self.g.iter().chain(&self.f).all(|x| x.is_finite())
    }
}

/// `count` points with coordinates uniform in `[-1, 1]`, reproducible from
/// `seed`.
pub fn random_points(n: usize, m: usize, count: usize, seed: u64) -> Vec<GradedPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let f = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            GradedPoint { g, f }
        })
        .collect()
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `n + m` coordinates; the first `n` are the `β_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedPolynomial {
    pub n: usize,
    pub m: usize,
    pub terms: BTreeMap<Monomial, f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyFile {
    n: usize,
    m: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl GradedPolynomial {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.n + self.m
    }

    pub fn constant(n: usize, m: usize, c: f64) -> Self {
        let mut p = Self::zero(n, m);
        p.add_term(vec![0; n + m], c);
        p
    }

    /// Coordinate function `x_k` (`β_k` for `k < n`, `α_{k-n}` otherwise).
    pub fn var(n: usize, m: usize, k: usize) -> Self {
        let mut e = vec![0; n + m];
        e[k] = 1;
        let mut p = Self::zero(n, m);
        p.add_term(e, 1.0);
        p
    }

    pub fn beta(n: usize, m: usize, i: usize) -> Self {
        Self::var(n, m, i)
    }

    pub fn alpha(n: usize, m: usize, a: usize) -> Self {
        Self::var(n, m, n + a)
    }

    /// `Σ_k c_k x_k`.
    pub fn linear(n: usize, m: usize, c: &[f64]) -> Self {
        let mut p = Self::zero(n, m);
        for (k, &ck) in c.iter().enumerate() {
            let mut e = vec![0; n + m];
            e[k] = 1;
            p.add_term(e, ck);
        }
        p
    }

    /// `½ ξᵀ Q ξ` for a symmetric `Q`.
    pub fn quadratic_form(n: usize, m: usize, q: &Mat) -> Self {
        let mut p = Self::zero(n, m);
        let nv = n + m;
        for a in 0..nv {
            for b in 0..nv {
                let mut e = vec![0; nv];
                e[a] += 1;
                e[b] += 1;
                p.add_term(e, 0.5 * q[a][b]);
            }
        }
        p
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let key = Monomial(exps);
        let v = self.terms.entry(key.clone()).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.terms.values().all(|c| c.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (k, c) in &other.terms {
            p.add_term(k.0.clone(), *c);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.n, self.m);
        for (k, c) in &self.terms {
            p.add_term(k.0.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.n, self.m);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let e = ka.0.iter().zip(&kb.0).map(|(x, y)| x + y).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut p = Self::constant(self.n, self.m, 1.0);
        for _ in 0..k {
            p = p.mul(self);
        }
        p
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                c * k
                    .0
                    .iter()
                    .zip(xi)
                    .map(|(&e, x)| x.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn eval_at(&self, p: &GradedPoint) -> f64 {
        self.eval(&p.coords())
    }

    /// `∂/∂x_k`.
    pub fn derivative(&self, k: usize) -> Self {
        let mut p = Self::zero(self.n, self.m);
        for (key, c) in &self.terms {
            let e = key.0[k];
            if e == 0 {
                continue;
            }
            let mut ex = key.0.clone();
            ex[k] -= 1;
            p.add_term(ex, c * f64::from(e));
        }
        p
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars()).map(|k| self.derivative(k)).collect()
    }

    /// Substitutes `x_k ↦ Σ_j lin[k][j] y_j` into a polynomial over the
    /// `(n', m')` coordinates `y`.
    pub fn compose_linear(&self, lin: &Mat, n2: usize, m2: usize) -> Self {
        let subs: Vec<Self> = lin.iter().map(|row| Self::linear(n2, m2, row)).collect();
        let mut out = Self::zero(n2, m2);
        for (key, c) in &self.terms {
            let mut t = Self::constant(n2, m2, *c);
            for (k, &e) in key.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&subs[k].pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Drops coefficients with `|c| <= eps`.
    pub fn prune(&self, eps: f64) -> Self {
        let mut p = self.clone();
        p.terms.retain(|_, c| c.abs() > eps);
        p
    }

    pub fn to_json(&self) -> String {
        let file = PolyFile {
            n: self.n,
            m: self.m,
            terms: self.terms.iter().map(|(k, c)| (k.0.clone(), *c)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("polynomial serializes")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let file: PolyFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            msg: e.to_string(),
        })?;
        let mut p = Self::zero(file.n, file.m);
        for (e, c) in file.terms {
            if e.len() != file.n + file.m {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    msg: format!("monomial has {} exponents, expected {}", e.len(), file.n + file.m),
                });
            }
            if !c.is_finite() {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    msg: "non-finite coefficient".into(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, &e) in k.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if v < self.n {
                    format!("β{}", v + 1)
                } else {
                    format!("α{}", v - self.n + 1)
                };
                if e == 1 {
                    write!(f, "·{name}")?;
                } else {
                    write!(f, "·{name}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Plain,
    Rmatrix,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "rmatrix" => Ok(Mode::Rmatrix),
            _ => Err(Error::Config(format!(
                "unknown mode {s:?}; valid modes: plain, rmatrix"
            ))),
        }
    }
}

/// A linear Poisson structure `{x_A, x_B} = Σ_C f[C][A][B] x_C`.
#[derive(Clone, Debug)]
pub struct PoissonStructure {
    pub n: usize,
    pub m: usize,
    pub f: T3,
    pub mode: Mode,
}

impl PoissonStructure {
    /// The 2KK bracket of `cm` (plain) or of its R-bracket (rmatrix).
    pub fn new(cm: &CrossedModule, r: Option<&TwoRMatrix>, mode: Mode, tol: f64) -> Result<Self> {
        let f = match mode {
            Mode::Plain => cm.total_constants(),
            Mode::Rmatrix => {
                let r = r.ok_or_else(|| {
                    Error::Config("rmatrix mode needs a 2-graded r-matrix".into())
                })?;
                let phi = phi_map(cm, r, tol)?;
                r_crossed_module(cm, &phi).total_constants()
            }
        };
        Ok(Self {
            n: cm.n,
            m: cm.m,
            f,
            mode,
        })
    }

    /// Structure from explicit constants; `m = 0` gives an ordinary
    /// Lie–Poisson bracket.
    pub fn from_constants(n: usize, m: usize, f: T3, mode: Mode) -> Self {
        Self { n, m, f, mode }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn coord_bracket(&self, a: usize, b: usize) -> GradedPolynomial {
        let c: Vec<f64> = (0..self.dim()).map(|k| self.f[k][a][b]).collect();
        GradedPolynomial::linear(self.n, self.m, &c)
    }

    /// `Π[A][B](ξ) = {x_A, x_B}(ξ)`.
    pub fn bivector_at(&self, xi: &[f64]) -> Mat {
        let nv = self.dim();
        let mut pi = zeros2(nv, nv);
        for (c, xc) in xi.iter().enumerate() {
            if *xc == 0.0 {
                continue;
            }
            for a in 0..nv {
                for b in 0..nv {
                    pi[a][b] += self.f[c][a][b] * xc;
                }
            }
        }
        pi
    }

    /// `{F, G} = Σ ∂_A F ∂_B G {x_A, x_B}`.
    pub fn bracket(&self, p: &GradedPolynomial, q: &GradedPolynomial) -> GradedPolynomial {
        let nv = self.dim();
        let dp = p.gradient();
        let dq = q.gradient();
        let mut out = GradedPolynomial::zero(self.n, self.m);
        for a in 0..nv {
            if dp[a].is_zero() {
                continue;
            }
            for b in 0..nv {
                if dq[b].is_zero() {
                    continue;
                }
                let cb = self.coord_bracket(a, b);
                if cb.is_zero() {
                    continue;
                }
                out = out.add(&dp[a].mul(&dq[b]).mul(&cb));
            }
        }
        out
    }

    /// `ẋ_A = {H, x_A} = Σ_B ∂_B H Π[B][A]` given the gradient of `H`.
    pub fn vector_field(&self, dh: &[GradedPolynomial], xi: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = dh.iter().map(|d| d.eval(xi)).collect();
        self.vector_field_from_grad(&g, xi)
    }

    pub fn vector_field_from_grad(&self, grad: &[f64], xi: &[f64]) -> Vec<f64> {
        let pi = self.bivector_at(xi);
        let nv = self.dim();
        (0..nv)
            .map(|a| (0..nv).map(|b| grad[b] * pi[b][a]).sum())
            .collect()
    }

    /// Hamiltonian flow by classical RK4; `steps + 1` points.
    pub fn flow(
        &self,
        h: &GradedPolynomial,
        p0: &GradedPoint,
        dt: f64,
        steps: usize,
    ) -> Result<Vec<GradedPoint>> {
        let mut out = Vec::with_capacity(steps + 1);
        self.flow_with(h, p0, dt, steps, |p| out.push(p.clone()))?;
        Ok(out)
    }

    /// Same as `flow`, handing each point to `visit` instead of storing it.
    pub fn flow_with(
        &self,
        h: &GradedPolynomial,
        p0: &GradedPoint,
        dt: f64,
        steps: usize,
        mut visit: impl FnMut(&GradedPoint),
    ) -> Result<GradedPoint> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        p0.check(self.n, self.m)?;
        let dh = h.gradient();
        let mut xi = p0.coords();
        visit(p0);
        for step in 1..=steps {
            xi = rk4_step(&xi, dt, |x| self.vector_field(&dh, x));
            if xi.iter().any(|x| !x.is_finite()) {
                return Err(Error::Divergence { step });
            }
            visit(&GradedPoint::from_coords(&xi, self.n));
        }
        Ok(GradedPoint::from_coords(&xi, self.n))
    }
}

/// One classical RK4 step of `ẋ = v(x)`.
pub fn rk4_step(x: &[f64], dt: f64, v: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + s * q).collect()
    };
    let k1 = v(x);
    let k2 = v(&axpy(x, 0.5 * dt, &k1));
    let k3 = v(&axpy(x, 0.5 * dt, &k2));
    let k4 = v(&axpy(x, dt, &k3));
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

pub fn coord_bracket(
    cm: &CrossedModule,
    r: Option<&TwoRMatrix>,
    mode: Mode,
    a: usize,
    b: usize,
    tol: f64,
) -> Result<GradedPolynomial> {
    Ok(PoissonStructure::new(cm, r, mode, tol)?.coord_bracket(a, b))
}

pub fn poisson_bracket(
    cm: &CrossedModule,
    r: Option<&TwoRMatrix>,
    mode: Mode,
    p: &GradedPolynomial,
    q: &GradedPolynomial,
    tol: f64,
) -> Result<GradedPolynomial> {
    Ok(PoissonStructure::new(cm, r, mode, tol)?.bracket(p, q))
}

/// Max over points and basis `Z` of `|⟨g + f, [Z, d_{g+f} H]⟩|` with the
/// total bracket of `cm`.
pub fn check_invariance(cm: &CrossedModule, h: &GradedPolynomial, points: &[GradedPoint]) -> f64 {
    let f = cm.total_constants();
    let nv = cm.dim();
    let dh = h.gradient();
    let mut worst = 0.0f64;
    for p in points {
        let xi = p.coords();
        let grad: Vec<f64> = dh.iter().map(|d| d.eval(&xi)).collect();
        for z in 0..nv {
            let mut e = vec![0.0; nv];
            e[z] = 1.0;
            let br = contract(&f, &e, &grad);
            let s: f64 = br.iter().zip(&xi).map(|(a, b)| a * b).sum();
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// Flow a Hamiltonian under the structure selected by `mode`.
#[allow(clippy::too_many_arguments)]
pub fn flow(
    cm: &CrossedModule,
    r: Option<&TwoRMatrix>,
    mode: Mode,
    h: &GradedPolynomial,
    p0: &GradedPoint,
    dt: f64,
    steps: usize,
    tol: f64,
) -> Result<Vec<GradedPoint>> {
    PoissonStructure::new(cm, r, mode, tol)?.flow(h, p0, dt, steps)
}

/// Vector form of the plain bracket on `id_su2`: for linear functions
/// `F = u·β + v·α`, `F' = u'·β + v'·α`,
/// `{F, F'} = β·(u×u') + α·(u×v' − u'×v) + α·(v×v')`, the last term being
/// the Peiffer part. Returns the max coefficient deviation over the given
/// coefficient quadruples.
pub fn su2_vector_form_residual(samples: &[[[f64; 3]; 4]]) -> f64 {
    let cm = CrossedModule::id_su2();
    let ps = PoissonStructure::from_constants(3, 3, cm.total_constants(), Mode::Plain);
    let cross = |a: &[f64; 3], b: &[f64; 3]| -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut worst = 0.0f64;
    for [u, v, up, vp] in samples {
        let fl: Vec<f64> = u.iter().chain(v).copied().collect();
        let gl: Vec<f64> = up.iter().chain(vp).copied().collect();
        let br = ps.bracket(
            &GradedPolynomial::linear(3, 3, &fl),
            &GradedPolynomial::linear(3, 3, &gl),
        );
        let uu = cross(u, up);
        let uv = cross(u, vp);
        let vu = cross(up, v);
        let vv = cross(v, vp);
        let mut expect = vec![0.0; 6];
        for k in 0..3 {
            expect[k] = uu[k];
            expect[3 + k] = uv[k] - vu[k] + vv[k];
        }
        let got = GradedPolynomial::linear(3, 3, &expect);
        worst = worst.max(br.sub(&got).max_coeff());
    }
    worst
}

/// Pullback along `t`: substitutes `α_a ↦ Σ_i t[i][a] β_i`.
pub fn pullback_t(cm: &CrossedModule, p: &GradedPolynomial) -> GradedPolynomial {
    let (n, m) = (cm.n, cm.m);
    let mut lin = zeros2(n + m, n + m);
    for i in 0..n {
        lin[i][i] = 1.0;
    }
    for a in 0..m {
        for i in 0..n {
            lin[n + a][i] = cm.tmap[i][a];
        }
    }
    p.compose_linear(&lin, n, m)
}

/// Max coefficient residual of the graded equivariance identities on
/// coordinates, `{t*α_a, t*α_b} = t*{α_a, α_b}` and
/// `{β_i, t*α_a} = t*{β_i, α_a}`.
pub fn pullback_equivariance_residual(ps: &PoissonStructure, cm: &CrossedModule) -> f64 {
    let (n, m) = (cm.n, cm.m);
    let mut worst = 0.0f64;
    for a in 0..m {
        let ta = pullback_t(cm, &GradedPolynomial::alpha(n, m, a));
        for b in 0..m {
            let tb = pullback_t(cm, &GradedPolynomial::alpha(n, m, b));
            let lhs = ps.bracket(&ta, &tb);
            let rhs = pullback_t(cm, &ps.coord_bracket(n + a, n + b));
            worst = worst.max(lhs.sub(&rhs).max_coeff());
        }
        for i in 0..n {
            let lhs = ps.bracket(&GradedPolynomial::beta(n, m, i), &ta);
            let rhs = pullback_t(cm, &ps.coord_bracket(i, n + a));
            worst = worst.max(lhs.sub(&rhs).max_coeff());
        }
    }
    worst
}
