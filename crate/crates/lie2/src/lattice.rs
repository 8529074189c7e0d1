//! The XXX spin rectangle: su(2) fields `σ(n, m)` on a periodic `Lu x Lv`
//! lattice and a boundary field `κ(p)` on `Lu` sites, with the coupled,
//! bulk 2+1d LLE, boundary 1+1d LLE and nearest-neighbour Heisenberg
//! dynamics, energies, the `t̄` projection and the 1D monodromy.
//!
//! Site `(n, m)` is stored at `n * Lv + m`. Second derivatives use the
//! centered 3-point (1D) and 5-point (2D) stencils with periodic wrap, and
//! `∫ dv` is `ℓ Σ_m`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Complex, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type V3 = [f64; 3];

#[inline]
pub fn cross(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn norm(a: &V3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(a: &V3, s: f64, b: &V3) -> V3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState2D {
    pub lu: usize,
    pub lv: usize,
    pub ell: f64,
    pub time: f64,
    pub sigma: Vec<V3>,
    pub kappa: Vec<V3>,
}

impl LatticeState2D {
    pub fn zeros(lu: usize, lv: usize, ell: f64) -> Self {
        Self {
            lu,
            lv,
            ell,
            time: 0.0,
            sigma: vec![[0.0; 3]; lu * lv],
            kappa: vec![[0.0; 3]; lu],
        }
    }

    #[inline]
    pub fn idx(&self, n: usize, m: usize) -> usize {
        n * self.lv + m
    }

    pub fn s(&self, n: usize, m: usize) -> &V3 {
        &self.sigma[self.idx(n, m)]
    }

    /// Copies `κ` into every column, `σ(n, m) = κ(n)`.
    pub fn v_uniform_from(kappa: &[V3], lv: usize, ell: f64) -> Self {
        let lu = kappa.len();
        let mut st = Self::zeros(lu, lv, ell);
        for n in 0..lu {
            for m in 0..lv {
                st.sigma[n * lv + m] = kappa[n];
            }
        }
        st.kappa = kappa.to_vec();
        st
    }

    pub fn is_finite(&self) -> bool {
        self.sigma
            .iter()
            .chain(&self.kappa)
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn wrap(i: usize, d: isize, l: usize) -> usize {
        (i as isize + d).rem_euclid(l as isize) as usize
    }

    /// Sum of the four nearest neighbours of `(n, m)`.
    pub fn neighbour_sum(&self, n: usize, m: usize) -> V3 {
        let (lu, lv) = (self.lu, self.lv);
        let a = self.s(Self::wrap(n, 1, lu), m);
        let b = self.s(Self::wrap(n, -1, lu), m);
        let c = self.s(n, Self::wrap(m, 1, lv));
        let d = self.s(n, Self::wrap(m, -1, lv));
        [
            a[0] + b[0] + c[0] + d[0],
            a[1] + b[1] + c[1] + d[1],
            a[2] + b[2] + c[2] + d[2],
        ]
    }

    /// 5-point Laplacian `∇²σ(n, m)`.
    pub fn laplacian(&self, n: usize, m: usize) -> V3 {
        let nb = self.neighbour_sum(n, m);
        let s = self.s(n, m);
        let h2 = self.ell * self.ell;
        [
            (nb[0] - 4.0 * s[0]) / h2,
            (nb[1] - 4.0 * s[1]) / h2,
            (nb[2] - 4.0 * s[2]) / h2,
        ]
    }

    /// Centered `κ''(p)`.
    pub fn kappa_dd(&self, p: usize) -> V3 {
        second_diff(&self.kappa, p, self.ell)
    }
}

/// Centered periodic second difference of a 1D field.
pub fn second_diff(f: &[V3], p: usize, ell: f64) -> V3 {
    let l = f.len();
    let a = &f[(p + 1) % l];
    let b = &f[(p + l - 1) % l];
    let c = &f[p];
    let h2 = ell * ell;
    [
        (a[0] - 2.0 * c[0] + b[0]) / h2,
        (a[1] - 2.0 * c[1] + b[1]) / h2,
        (a[2] - 2.0 * c[2] + b[2]) / h2,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeMode {
    Coupled,
    Bulk2d,
    Boundary1d,
    #[serde(rename = "latticeH")]
    LatticeH,
}

impl LatticeMode {
    pub const NAMES: [&'static str; 4] = ["coupled", "bulk2d", "boundary1d", "latticeH"];
}

impl std::str::FromStr for LatticeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupled" => Ok(Self::Coupled),
            "bulk2d" => Ok(Self::Bulk2d),
            "boundary1d" => Ok(Self::Boundary1d),
            "latticeH" => Ok(Self::LatticeH),
            _ => Err(Error::Config(format!(
                "unknown mode {s:?}; valid modes: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    RandomUnit,
    Spinwave,
    VUniform,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaInit {
    /// `κ = t̄σ / (Lv ℓ)`.
    Projected,
    /// Drawn like a boundary column of its own.
    Independent,
}

fn default_ell() -> f64 {
    1.0
}
fn default_cadence() -> usize {
    1
}
fn default_theta0() -> f64 {
    std::f64::consts::FRAC_PI_4
}
fn default_theta_amp() -> f64 {
    0.3
}
fn default_kappa_init() -> KappaInit {
    KappaInit::Projected
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(rename = "Lu")]
    pub lu: usize,
    #[serde(rename = "Lv")]
    pub lv: usize,
    pub dt: f64,
    pub steps: usize,
    pub mode: String,
    pub init: InitMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub renormalize: bool,
    /// Use prefactor −1 instead of −2 in the LLE right-hand sides.
    #[serde(default)]
    pub rescale: bool,
    #[serde(default = "default_ell")]
    pub ell: f64,
    /// Observable cadence in steps; 0 writes only the initial row.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Spinwave wave numbers `(ku, kv)`; must be integers.
    #[serde(default)]
    pub wave: Option<[f64; 2]>,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    #[serde(default = "default_theta_amp")]
    pub theta_amp: f64,
    #[serde(default)]
    pub phi0: f64,
    #[serde(default = "default_kappa_init")]
    pub kappa_init: KappaInit,
    /// Snapshot to start from when `init = "file"`.
    #[serde(default)]
    pub init_file: Option<PathBuf>,
}

impl SimConfig {
    pub fn new(lu: usize, lv: usize, dt: f64, steps: usize, mode: LatticeMode, init: InitMode) -> Self {
        let mode = match mode {
            LatticeMode::Coupled => "coupled",
            LatticeMode::Bulk2d => "bulk2d",
            LatticeMode::Boundary1d => "boundary1d",
            LatticeMode::LatticeH => "latticeH",
        };
        Self {
            lu,
            lv,
            dt,
            steps,
            mode: mode.into(),
            init,
            seed: 0,
            renormalize: false,
            rescale: false,
            ell: 1.0,
            cadence: 1,
            output: None,
            wave: None,
            theta0: default_theta0(),
            theta_amp: default_theta_amp(),
            phi0: 0.0,
            kappa_init: KappaInit::Projected,
            init_file: None,
        }
    }

    pub fn mode(&self) -> Result<LatticeMode> {
        self.mode.parse()
    }

    pub fn validate(&self) -> Result<()> {
        self.mode()?;
        if self.lu < 2 || self.lv < 2 {
            return Err(Error::Config(format!(
                "Lu and Lv must be at least 2, got {}x{}",
                self.lu, self.lv
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::Config(format!("ell must be positive, got {}", self.ell)));
        }
        if let Some(w) = self.wave {
            if w.iter().any(|k| k.fract() != 0.0 || !k.is_finite()) {
                return Err(Error::Config(format!(
                    "spinwave wave numbers must be integers, got {w:?}"
                )));
            }
        }
        if self.init == InitMode::File && self.init_file.is_none() {
            return Err(Error::Config("init = \"file\" needs init_file".into()));
        }
        Ok(())
    }

    pub fn prefactor(&self) -> f64 {
        if self.rescale {
            -1.0
        } else {
            -2.0
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// Spinor parametrisation `σ₃ = cos 2θ`, `σ₁ = ½ sin 2θ cos φ`,
/// `σ₂ = ½ sin 2θ sin φ`.
pub fn spinor(theta: f64, phi: f64) -> V3 {
    let s = (2.0 * theta).sin();
    [0.5 * s * phi.cos(), 0.5 * s * phi.sin(), (2.0 * theta).cos()]
}

fn random_unit(rng: &mut ChaCha8Rng) -> V3 {
    // Uniform on the sphere via z = cos θ uniform.
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * a.cos(), r * a.sin(), z]
}

/// Spinwave value at physical position `(u, v)` on a periodic box of size
/// `(Pu, Pv)`.
pub fn spinwave_at(cfg: &SimConfig, u: f64, v: f64, pu: f64, pv: f64) -> V3 {
    let [ku, kv] = cfg.wave.unwrap_or([1.0, 1.0]);
    let phase = std::f64::consts::TAU * (ku * u / pu + kv * v / pv);
    let theta = cfg.theta0 + cfg.theta_amp * phase.sin();
    spinor(theta, cfg.phi0 + phase)
}

pub fn init_state(cfg: &SimConfig) -> Result<LatticeState2D> {
    cfg.validate()?;
    let (lu, lv, ell) = (cfg.lu, cfg.lv, cfg.ell);
    let mut st = LatticeState2D::zeros(lu, lv, ell);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.init {
        InitMode::RandomUnit => {
            for s in st.sigma.iter_mut() {
                *s = random_unit(&mut rng);
            }
        }
        InitMode::Spinwave => {
            let (pu, pv) = (lu as f64 * ell, lv as f64 * ell);
            for n in 0..lu {
                for m in 0..lv {
                    let i = st.idx(n, m);
                    st.sigma[i] = spinwave_at(cfg, n as f64 * ell, m as f64 * ell, pu, pv);
                }
            }
        }
        InitMode::VUniform => {
            let col: Vec<V3> = (0..lu).map(|_| random_unit(&mut rng)).collect();
            st = LatticeState2D::v_uniform_from(&col, lv, ell);
        }
        InitMode::File => {
            let path = cfg.init_file.as_ref().expect("validated");
            st = read_snapshot(path)?;
            if st.lu != lu || st.lv != lv {
                return Err(Error::Config(format!(
                    "snapshot is {}x{}, config asks for {lu}x{lv}",
                    st.lu, st.lv
                )));
            }
            return Ok(st);
        }
    }
    st.kappa = match cfg.kappa_init {
        KappaInit::Projected => {
            let w = 1.0 / (lv as f64 * ell);
            tbar_project(&st).iter().map(|k| k.map(|x| x * w)).collect()
        }
        KappaInit::Independent => (0..lu).map(|_| random_unit(&mut rng)).collect(),
    };
    Ok(st)
}

/// Time derivatives of `(σ, κ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub sigma: Vec<V3>,
    pub kappa: Vec<V3>,
}

/// `σ̇ = c ∇²σ × σ` with `c` the LLE prefactor.
pub fn rhs_bulk2d(state: &LatticeState2D, c: f64) -> Vec<V3> {
    let lv = state.lv;
    (0..state.sigma.len())
        .into_par_iter()
        .map(|i| {
            let (n, m) = (i / lv, i % lv);
            let x = cross(&state.laplacian(n, m), &state.sigma[i]);
            x.map(|v| c * v)
        })
        .collect()
}

/// `κ̇ = c κ'' × κ`.
pub fn rhs_boundary1d(state: &LatticeState2D, c: f64) -> Vec<V3> {
    rhs_chain(&state.kappa, state.ell, c)
}

/// `κ̇ = c κ'' × κ` for a bare 1D field.
pub fn rhs_chain(kappa: &[V3], ell: f64, c: f64) -> Vec<V3> {
    (0..kappa.len())
        .map(|p| cross(&second_diff(kappa, p, ell), &kappa[p]).map(|v| c * v))
        .collect()
}

/// `σ̇ = c κ'' × σ`, `κ̇ = c ℓ Σ_m ∇²σ × σ + c κ'' × κ`.
pub fn rhs_coupled(state: &LatticeState2D, c: f64) -> Derivative {
    let lv = state.lv;
    let kdd: Vec<V3> = (0..state.lu).map(|p| state.kappa_dd(p)).collect();
    let sigma = (0..state.sigma.len())
        .into_par_iter()
        .map(|i| cross(&kdd[i / lv], &state.sigma[i]).map(|v| c * v))
        .collect();
    let bulk = rhs_bulk2d(state, c);
    let kappa = (0..state.lu)
        .map(|n| {
            let mut acc = [0.0; 3];
            for m in 0..lv {
                let b = &bulk[n * lv + m];
                acc = axpy(&acc, state.ell, b);
            }
            let own = cross(&kdd[n], &state.kappa[n]).map(|v| c * v);
            axpy(&acc, 1.0, &own)
        })
        .collect();
    Derivative { sigma, kappa }
}

/// Hamiltonian flow of `H₂d = ½ Σ σ(n,m)·σ(n+1,m) + σ(n,m)·σ(n,m+1)` under
/// `{σ_a, σ_b} = ε_abc σ_c` (site-local), `ẋ = {H, x}`:
/// `σ̇ = ½ σ × N` with `N` the neighbour sum.
pub fn rhs_lattice_h(state: &LatticeState2D) -> Vec<V3> {
    let lv = state.lv;
    (0..state.sigma.len())
        .into_par_iter()
        .map(|i| {
            let nb = state.neighbour_sum(i / lv, i % lv);
            cross(&state.sigma[i], &nb).map(|v| 0.5 * v)
        })
        .collect()
}

pub fn rhs(state: &LatticeState2D, mode: LatticeMode, c: f64) -> Derivative {
    let zero_k = || vec![[0.0; 3]; state.lu];
    let zero_s = || vec![[0.0; 3]; state.sigma.len()];
    match mode {
        LatticeMode::Coupled => rhs_coupled(state, c),
        LatticeMode::Bulk2d => Derivative {
            sigma: rhs_bulk2d(state, c),
            kappa: zero_k(),
        },
        LatticeMode::Boundary1d => Derivative {
            sigma: zero_s(),
            kappa: rhs_boundary1d(state, c),
        },
        LatticeMode::LatticeH => Derivative {
            sigma: rhs_lattice_h(state),
            kappa: zero_k(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energies {
    /// `ℓ² Σ |∇σ|²` with forward differences.
    pub h2d_grad: f64,
    /// `ℓ Σ |κ'|²` with forward differences.
    pub h1d_grad: f64,
    /// `½ Σ σ(n,m)·σ(n+1,m) + σ(n,m)·σ(n,m+1)`.
    pub h2d_nn: f64,
    /// `½ Σ κ(p)·κ(p+1)`.
    pub h1d_nn: f64,
}

pub fn hamiltonians(state: &LatticeState2D) -> Energies {
    let (lu, lv, ell) = (state.lu, state.lv, state.ell);
    let mut grad = 0.0;
    let mut nn = 0.0;
    for n in 0..lu {
        for m in 0..lv {
            let s = state.s(n, m);
            let a = state.s((n + 1) % lu, m);
            let b = state.s(n, (m + 1) % lv);
            let da = axpy(a, -1.0, s);
            let db = axpy(b, -1.0, s);
            grad += dot(&da, &da) + dot(&db, &db);
            nn += dot(s, a) + dot(s, b);
        }
    }
    let mut g1 = 0.0;
    let mut n1 = 0.0;
    for p in 0..lu {
        let k = &state.kappa[p];
        let kn = &state.kappa[(p + 1) % lu];
        let d = axpy(kn, -1.0, k);
        g1 += dot(&d, &d);
        n1 += dot(k, kn);
    }
    Energies {
        h2d_grad: grad,
        h1d_grad: g1 / ell,
        h2d_nn: 0.5 * nn,
        h1d_nn: 0.5 * n1,
    }
}

/// `κ̄(n) = ℓ Σ_m σ(n, m)`.
pub fn tbar_project(state: &LatticeState2D) -> Vec<V3> {
    (0..state.lu)
        .map(|n| {
            let mut acc = [0.0; 3];
            for m in 0..state.lv {
                acc = axpy(&acc, state.ell, state.s(n, m));
            }
            acc
        })
        .collect()
}

/// `ℓ² Σ σ`.
pub fn magnetization(state: &LatticeState2D) -> V3 {
    let mut acc = [0.0; 3];
    let w = state.ell * state.ell;
    for s in &state.sigma {
        acc = axpy(&acc, w, s);
    }
    acc
}

/// `max_n |κ(n) − t̄σ(n) / (Lv ℓ)|`.
pub fn kappa_defect(state: &LatticeState2D) -> f64 {
    let w = 1.0 / (state.lv as f64 * state.ell);
    tbar_project(state)
        .iter()
        .zip(&state.kappa)
        .map(|(kb, k)| norm(&axpy(k, -w, kb)))
        .fold(0.0, f64::max)
}

fn update(base: &LatticeState2D, s: f64, d: &Derivative) -> LatticeState2D {
    let mut out = base.clone();
    for (o, v) in out.sigma.iter_mut().zip(&d.sigma) {
        *o = axpy(o, s, v);
    }
    for (o, v) in out.kappa.iter_mut().zip(&d.kappa) {
        *o = axpy(o, s, v);
    }
    out
}

/// One classical RK4 step; `dt` may be negative.
pub fn rk4_step(state: &LatticeState2D, mode: LatticeMode, c: f64, dt: f64) -> LatticeState2D {
    let k1 = rhs(state, mode, c);
    let k2 = rhs(&update(state, 0.5 * dt, &k1), mode, c);
    let k3 = rhs(&update(state, 0.5 * dt, &k2), mode, c);
    let k4 = rhs(&update(state, dt, &k3), mode, c);
    let mut out = state.clone();
    let w = dt / 6.0;
    for i in 0..out.sigma.len() {
        for a in 0..3 {
            out.sigma[i][a] +=
                w * (k1.sigma[i][a] + 2.0 * k2.sigma[i][a] + 2.0 * k3.sigma[i][a] + k4.sigma[i][a]);
        }
    }
    for i in 0..out.kappa.len() {
        for a in 0..3 {
            out.kappa[i][a] +=
                w * (k1.kappa[i][a] + 2.0 * k2.kappa[i][a] + 2.0 * k3.kappa[i][a] + k4.kappa[i][a]);
        }
    }
    out.time = state.time + dt;
    out
}

fn normalize_all(v: &mut [V3]) {
    for s in v.iter_mut() {
        let r = norm(s);
        if r > 0.0 {
            *s = s.map(|x| x / r);
        }
    }
}

/// Integrates `steps` RK4 steps without I/O, calling `visit(step, state)`
/// after each one.
pub fn integrate(
    state: &LatticeState2D,
    mode: LatticeMode,
    c: f64,
    dt: f64,
    steps: usize,
    renormalize: bool,
    mut visit: impl FnMut(usize, &LatticeState2D),
) -> Result<LatticeState2D> {
    let mut st = state.clone();
    for step in 1..=steps {
        st = rk4_step(&st, mode, c, dt);
        if renormalize {
            normalize_all(&mut st.sigma);
            if mode == LatticeMode::Boundary1d {
                normalize_all(&mut st.kappa);
            }
        }
        if !st.is_finite() {
            return Err(Error::Divergence { step });
        }
        visit(step, &st);
    }
    Ok(st)
}

/// One row of the observables CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub step: usize,
    pub t: f64,
    pub h2d_grad: f64,
    #[serde(rename = "H2d_nn")]
    pub h2d_nn: f64,
    pub h1d_grad: f64,
    pub mag_x: f64,
    pub mag_y: f64,
    pub mag_z: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    pub kappa_defect: f64,
}

pub fn observe(step: usize, state: &LatticeState2D) -> Observables {
    let e = hamiltonians(state);
    let mag = magnetization(state);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for s in &state.sigma {
        let r = norm(s);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Observables {
        step,
        t: state.time,
        h2d_grad: e.h2d_grad,
        h2d_nn: e.h2d_nn,
        h1d_grad: e.h1d_grad,
        mag_x: mag[0],
        mag_y: mag[1],
        mag_z: mag[2],
        min_norm: lo,
        max_norm: hi,
        kappa_defect: kappa_defect(state),
    }
}

pub const OBSERVABLE_COLUMNS: [&str; 11] = [
    "step", "t", "h2d_grad", "H2d_nn", "h1d_grad", "mag_x", "mag_y", "mag_z", "min_norm",
    "max_norm", "kappa_defect",
];

/// Result of `run`: observables, the final state and any files written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub observables: Vec<Observables>,
    pub initial: LatticeState2D,
    pub final_state: LatticeState2D,
    pub files: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Writes observables with full round-trip precision.
pub fn write_observables(path: &Path, rows: &[Observables]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(OBSERVABLE_COLUMNS).map_err(csv_err(path))?;
    for r in rows {
        let rec = [
            r.step.to_string(),
            format!("{:e}", r.t),
            format!("{:e}", r.h2d_grad),
            format!("{:e}", r.h2d_nn),
            format!("{:e}", r.h1d_grad),
            format!("{:e}", r.mag_x),
            format!("{:e}", r.mag_y),
            format!("{:e}", r.mag_z),
            format!("{:e}", r.min_norm),
            format!("{:e}", r.max_norm),
            format!("{:e}", r.kappa_defect),
        ];
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Snapshot: `# Lu=.. Lv=.. ell=.. time=..` header, then `sigma,n,m,σ1,σ2,σ3`
/// and `kappa,p,,κ1,κ2,κ3` rows.
pub fn write_snapshot(path: &Path, st: &LatticeState2D) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    let e = io_err(path);
    writeln!(w, "# Lu={} Lv={} ell={:e} time={:e}", st.lu, st.lv, st.ell, st.time).map_err(&e)?;
    writeln!(w, "field,i,j,c1,c2,c3").map_err(&e)?;
    for n in 0..st.lu {
        for m in 0..st.lv {
            let s = st.s(n, m);
            writeln!(w, "sigma,{n},{m},{:e},{:e},{:e}", s[0], s[1], s[2]).map_err(&e)?;
        }
    }
    for (p, k) in st.kappa.iter().enumerate() {
        writeln!(w, "kappa,{p},,{:e},{:e},{:e}", k[0], k[1], k[2]).map_err(&e)?;
    }
    w.flush().map_err(e)
}

pub fn read_snapshot(path: &Path) -> Result<LatticeState2D> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let perr = |msg: String| Error::Parse {
        path: path.display().to_string(),
        msg,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr("empty snapshot".into()))?;
    let mut lu = None;
    let mut lv = None;
    let mut ell = None;
    let mut time = None;
    for tok in header.trim_start_matches('#').split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| perr(format!("bad header token {tok:?}")))?;
        match k {
            "Lu" => lu = v.parse().ok(),
            "Lv" => lv = v.parse().ok(),
            "ell" => ell = v.parse().ok(),
            "time" => time = v.parse().ok(),
            _ => {}
        }
    }
    let (Some(lu), Some(lv), Some(ell), Some(time)) = (lu, lv, ell, time) else {
        return Err(perr("header needs Lu, Lv, ell, time".into()));
    };
    let mut st = LatticeState2D::zeros(lu, lv, ell);
    st.time = time;
    for line in lines.skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(perr(format!("bad row {line:?}")));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| perr(format!("bad number {s:?}")))
        };
        let idx = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| perr(format!("bad index {s:?}")))
        };
        let v = [num(cols[3])?, num(cols[4])?, num(cols[5])?];
        match cols[0] {
            "sigma" => {
                let (n, m) = (idx(cols[1])?, idx(cols[2])?);
                if n >= lu || m >= lv {
                    return Err(perr(format!("site ({n},{m}) out of range")));
                }
                st.sigma[n * lv + m] = v;
            }
            "kappa" => {
                let p = idx(cols[1])?;
                if p >= lu {
                    return Err(perr(format!("boundary site {p} out of range")));
                }
                st.kappa[p] = v;
            }
            other => return Err(perr(format!("unknown field {other:?}"))),
        }
    }
    Ok(st)
}

/// Runs the configured simulation. With `cfg.output` set, writes
/// `observables.csv`, `tbar.csv`, `initial.csv` and `final.csv` there.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    let mode = cfg.mode()?;
    let init = init_state(cfg)?;
    let c = cfg.prefactor();
    let cadence = cfg.cadence;
    let mut rows = vec![observe(0, &init)];
    let mut tbar_rows: Vec<(usize, Vec<V3>)> = vec![(0, tbar_project(&init))];
    let result = integrate(&init, mode, c, cfg.dt, cfg.steps, cfg.renormalize, |step, st| {
        if cadence > 0 && (step % cadence == 0 || step == cfg.steps) {
            rows.push(observe(step, st));
            tbar_rows.push((step, tbar_project(st)));
        }
    });
    let mut files = Vec::new();
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let obs = dir.join("observables.csv");
        write_observables(&obs, &rows)?;
        files.push(obs);
        let tb = dir.join("tbar.csv");
        let mut w = csv::Writer::from_path(&tb).map_err(csv_err(&tb))?;
        w.write_record(["step", "p", "k1", "k2", "k3"]).map_err(csv_err(&tb))?;
        for (step, kb) in &tbar_rows {
            for (p, k) in kb.iter().enumerate() {
                w.write_record(&[
                    step.to_string(),
                    p.to_string(),
                    format!("{:e}", k[0]),
                    format!("{:e}", k[1]),
                    format!("{:e}", k[2]),
                ])
                .map_err(csv_err(&tb))?;
            }
        }
        w.flush().map_err(io_err(&tb))?;
        files.push(tb);
        let ini = dir.join("initial.csv");
        write_snapshot(&ini, &init)?;
        files.push(ini);
        if let Ok(fin) = &result {
            let p = dir.join("final.csv");
            write_snapshot(&p, fin)?;
            files.push(p);
        }
    }
    let final_state = result?;
    Ok(RunOutput {
        observables: rows,
        initial: init,
        final_state,
        files,
    })
}

pub type C2 = Matrix2<Complex<f64>>;

/// Defining representation of su(2) with `[s_a, s_b] = ε_abc s_c`:
/// `s_a = −(i/2) τ_a` with `τ_a` the Pauli matrices.
pub fn su2_defining() -> [C2; 3] {
    let z = Complex::new(0.0, 0.0);
    let h = |re: f64, im: f64| Complex::new(re, im);
    [
        C2::new(z, h(0.0, -0.5), h(0.0, -0.5), z),
        C2::new(z, h(-0.5, 0.0), h(0.5, 0.0), z),
        C2::new(h(0.0, -0.5), z, z, h(0.0, 0.5)),
    ]
}

#[derive(Clone, Debug)]
pub struct Monodromy {
    /// `𝒯 = E(L−1) ⋯ E(1) E(0)`, `E(p) = exp(−ℓ Σ_a κ_a(p) s_a)`.
    pub matrix: C2,
    pub trace: Complex<f64>,
    /// Each cell uses `∫ l ≈ ℓ l(p)`.
    pub first_order_cells: bool,
    /// `−ln tr 𝒯`.
    pub neg_ln_trace: Complex<f64>,
    /// `−det ln 𝒯` with `ln 𝒯 ≈ −ℓ Σ_p l(p)`, first order in `ℓ`.
    pub neg_det_ln_first_order: Complex<f64>,
}

pub fn monodromy_1d(kappa: &[V3], ell: f64, rep: &[C2; 3]) -> Monodromy {
    let mut t = C2::identity();
    let mut sum = C2::zeros();
    for k in kappa {
        let l = rep[0] * Complex::from(k[0]) + rep[1] * Complex::from(k[1]) + rep[2] * Complex::from(k[2]);
        sum += l;
        let e = (l * Complex::from(-ell)).exp();
        t = e * t;
    }
    let trace = t.trace();
    let ln_t = sum * Complex::from(-ell);
    Monodromy {
        matrix: t,
        trace,
        first_order_cells: true,
        neg_ln_trace: -trace.ln(),
        neg_det_ln_first_order: -ln_t.determinant(),
    }
}

/// `(H, B)` with `H` the latticeH RHS rescaled by `−2c/ℓ²` and `B` the
/// bulk2d RHS, both at the site at physical position `at`, for spinwave
/// data sampled with spacing `ell` on the periodic box `bx`. `at` must be
/// a multiple of `ell`.
pub fn spinwave_rhs_pair(cfg: &SimConfig, bx: [f64; 2], at: [f64; 2], ell: f64) -> Result<(V3, V3)> {
    let lu = (bx[0] / ell).round() as usize;
    let lv = (bx[1] / ell).round() as usize;
    let (n, m) = ((at[0] / ell).round() as usize, (at[1] / ell).round() as usize);
    if (n as f64 * ell - at[0]).abs() > 1e-12 || (m as f64 * ell - at[1]).abs() > 1e-12 {
        return Err(Error::Config(format!("{at:?} is not a lattice point at spacing {ell}")));
    }
    let mut c = cfg.clone();
    c.lu = lu;
    c.lv = lv;
    c.ell = ell;
    c.init = InitMode::Spinwave;
    let st = init_state(&c)?;
    let i = st.idx(n % lu, m % lv);
    let k = cfg.prefactor();
    let h = rhs_lattice_h(&st)[i].map(|v| v * (-2.0 * k / (ell * ell)));
    let b = rhs_bulk2d(&st, k)[i];
    Ok((h, b))
}

/// Richardson ratio `|H(ℓ) − B(ℓ/2)| / |H(ℓ/2) − B(ℓ/4)|` comparing the
/// rescaled latticeH RHS against the bulk2d RHS at a fixed physical site;
/// both stencils are second order, so this tends to 4.
pub fn spatial_richardson_ratio(cfg: &SimConfig, bx: [f64; 2], at: [f64; 2], ell: f64) -> Result<f64> {
    let (h1, _) = spinwave_rhs_pair(cfg, bx, at, ell)?;
    let (h2, b2) = spinwave_rhs_pair(cfg, bx, at, ell / 2.0)?;
    let (_, b4) = spinwave_rhs_pair(cfg, bx, at, ell / 4.0)?;
    let d1 = norm(&axpy(&h1, -1.0, &b2));
    let d2 = norm(&axpy(&h2, -1.0, &b4));
    Ok(d1 / d2)
}
