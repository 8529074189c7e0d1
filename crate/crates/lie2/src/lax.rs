//! 2-Lax pairs on `g*[1]` built from a 2-graded r-matrix, the induced
//! ordinary Lax pair, the ordinary Lax pair of a Lie bialgebra and its
//! identity lift.
//!
//! The Lax element at `ξ = (g, f)` is `Z(ξ) = Λ ξ` with
//! `Λ = [[−t·L₋₁, L₀], [L₋₁, 0]]`, i.e. `x = L₀ f − t L₋₁ g`, `y = L₋₁ g`,
//! where `L₀`, `L₋₁` are the halved symmetric blocks of `R`. `Λ` is the
//! ad-invariant tensor of the total algebra `g0 ⋉ g-1` whose off-diagonal
//! blocks are `R^⊙`. `P = φ(dH)`.

use serde::{Deserialize, Serialize};

use crate::algebra::{contract, CrossedModule, GradedElement};
use crate::bialgebra::{
    decompose, form_invariance_residual, pairing_from_sym, phi_map, PhiMap, TwoRMatrix,
};
use crate::error::{Error, Result};
use crate::poisson::{
    check_invariance, random_points, GradedPoint, GradedPolynomial, Mode, PoissonStructure,
};
use crate::tensor::{
    add, check2, inverse, matmul, matvec, max_abs_diff, scale, sub, transpose, vec_max_abs,
    vec_max_abs_diff, zeros2, zeros3, Mat, T3,
};

/// Number of seeded sample points used for the construction-time
/// invariance check.
const INVARIANCE_SAMPLES: usize = 16;

#[derive(Clone, Debug)]
pub struct TwoLaxPair {
    pub n: usize,
    pub m: usize,
    /// `L₀: g-1* -> g0`, `n x m`.
    pub l0: Mat,
    /// `L₋₁: g0* -> g-1`, `m x n`.
    pub lm1: Mat,
    /// `Λ` on the total space.
    pub lambda: Mat,
    pub phi: PhiMap,
    pub h: GradedPolynomial,
    dh: Vec<GradedPolynomial>,
    /// R-bracket Poisson structure driving `L̇ = {H, L}_R`.
    pub poisson_r: PoissonStructure,
    pub mode: Mode,
    /// Sampled residual of `check_invariance` for `h`.
    pub invariance_residual: f64,
}

impl TwoLaxPair {
    /// `L(ξ) = Λ ξ` as a graded element.
    pub fn l_at(&self, p: &GradedPoint) -> GradedElement {
        GradedElement::from_full(&matvec(&self.lambda, &p.coords()), self.n)
    }

    /// `d_{g+f} H` as a graded element (`∂_g H ∈ g0`, `∂_f H ∈ g-1`).
    pub fn dh_at(&self, p: &GradedPoint) -> GradedElement {
        let xi = p.coords();
        let d: Vec<f64> = self.dh.iter().map(|q| q.eval(&xi)).collect();
        GradedElement::from_full(&d, self.n)
    }

    /// `P = (φ₀ ∂_g H, φ₋₁ ∂_f H)`.
    pub fn p_at(&self, p: &GradedPoint) -> GradedElement {
        self.phi.apply(&self.dh_at(p))
    }

    /// Coordinate functions of `L` as linear polynomials.
    pub fn l_functions(&self) -> Vec<GradedPolynomial> {
        self.lambda
            .iter()
            .map(|row| GradedPolynomial::linear(self.n, self.m, row))
            .collect()
    }

    /// The point `ξ` with `L(ξ) = z`, i.e. `ξ = Λ⁻¹ z`.
    pub fn point_for(&self, z: &GradedElement) -> Result<GradedPoint> {
        let inv = inverse(&self.lambda, "Λ")?;
        Ok(GradedPoint::from_coords(&matvec(&inv, &z.to_full()), self.n))
    }

    /// `t ∘ L₋₁`, the coefficient matrix of the induced Lax potential.
    pub fn lbar(&self, cm: &CrossedModule) -> Mat {
        matmul(&cm.tmap, &self.lm1)
    }
}

/// `Λ = [[−t·L₋₁, L₀], [L₋₁, 0]]` from the halved symmetric blocks.
pub fn lambda_matrix(cm: &CrossedModule, l0: &Mat, lm1: &Mat) -> Mat {
    let n = cm.n;
    let tl = matmul(&cm.tmap, lm1);
    let mut lam = zeros2(cm.dim(), cm.dim());
    for i in 0..n {
        for j in 0..n {
            lam[i][j] = -tl[i][j];
        }
        for a in 0..cm.m {
            lam[i][n + a] = l0[i][a];
            lam[n + a][i] = lm1[a][i];
        }
    }
    lam
}

/// Max over basis `Z` of `|ad_Z Λ + Λ ad_Zᵀ|` under the total bracket.
pub fn lambda_invariance_residual(cm: &CrossedModule, lam: &Mat) -> f64 {
    let f = cm.total_constants();
    let nv = cm.dim();
    let mut worst = 0.0f64;
    for z in 0..nv {
        let ad: Mat = (0..nv)
            .map(|c| (0..nv).map(|x| f[c][z][x]).collect())
            .collect();
        let s = add(&matmul(&ad, lam), &matmul(lam, &transpose(&ad)));
        worst = worst.max(crate::tensor::max_abs(&s));
    }
    worst
}

/// The quadratic 2-Casimir `H = ½ ξᵀ Λ ξ = ½ ⟨Z(ξ), Z(ξ)⟩`.
pub fn quadratic_hamiltonian(cm: &CrossedModule, r: &TwoRMatrix) -> Result<GradedPolynomial> {
    r.check(cm)?;
    let sym = r.sym_half();
    let lam = lambda_matrix(cm, &sym.b, &sym.a);
    Ok(GradedPolynomial::quadratic_form(cm.n, cm.m, &lam))
}

/// `½(|g|² + |f|²)`; not invariant in general, kept as a control.
pub fn naive_quadratic(n: usize, m: usize) -> GradedPolynomial {
    let mut q = zeros2(n + m, n + m);
    for (k, row) in q.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    GradedPolynomial::quadratic_form(n, m, &q)
}

pub fn build_2lax(
    cm: &CrossedModule,
    r: &TwoRMatrix,
    h: &GradedPolynomial,
    tol: f64,
) -> Result<TwoLaxPair> {
    r.check(cm)?;
    if h.n != cm.n || h.m != cm.m {
        return Err(crate::error::dim_err(
            "Hamiltonian coordinates",
            format!("({}, {})", cm.n, cm.m),
            format!("({}, {})", h.n, h.m),
        ));
    }
    let (_, sym) = decompose(r);
    pairing_from_sym(cm, &sym, tol)?;
    let phi = phi_map(cm, r, tol)?;
    let half = sym.halved();
    let l0 = half.b;
    let lm1 = half.a;
    let lambda = lambda_matrix(cm, &l0, &lm1);
    let poisson_r = PoissonStructure::new(cm, Some(r), Mode::Rmatrix, tol)?;
    let pts = random_points(cm.n, cm.m, INVARIANCE_SAMPLES, 0);
    let invariance_residual = check_invariance(cm, h, &pts);
    Ok(TwoLaxPair {
        n: cm.n,
        m: cm.m,
        l0,
        lm1,
        lambda,
        phi,
        dh: h.gradient(),
        h: h.clone(),
        poisson_r,
        mode: Mode::Rmatrix,
        invariance_residual,
    })
}

/// `‖{H, L}_R(p) − [L(p), P(p)]‖∞`.
pub fn lax_residual(pair: &TwoLaxPair, cm: &CrossedModule, p: &GradedPoint) -> Result<f64> {
    lax_residual_signed(pair, cm, p, 1.0)
}

/// As `lax_residual` with `P` replaced by `sign · P`.
pub fn lax_residual_signed(
    pair: &TwoLaxPair,
    cm: &CrossedModule,
    p: &GradedPoint,
    sign: f64,
) -> Result<f64> {
    let xi = p.coords();
    let lhs: Vec<f64> = pair
        .l_functions()
        .iter()
        .map(|lc| pair.poisson_r.bracket(&pair.h, lc).eval(&xi))
        .collect();
    let mut pp = pair.p_at(p);
    pp.x.iter_mut().chain(pp.y.iter_mut()).for_each(|v| *v *= sign);
    let rhs = cm.total_bracket(&pair.l_at(p), &pp)?.to_full();
    Ok(vec_max_abs_diff(&lhs, &rhs))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LConditionsReport {
    /// `max |t∘L₋₁ − L₀∘tᵀ|`.
    pub t_compat: f64,
    /// `max |{L, L}_R − s·[L⊗1 + 1⊗L, r_G]|` with the selected sign.
    pub ll_residual: f64,
    /// Sign `s` selected at the first point (`+1` or `-1`).
    pub sign: i8,
    /// Whether every point selects the same sign.
    pub sign_consistent: bool,
    /// Ad-invariance of `Λ` under the total bracket.
    pub lambda_invariance: f64,
}

/// `r_G = Φ Λ`, the tensor of φ; its mixed blocks are `−R^∧`.
pub fn r_tensor(pair: &TwoLaxPair) -> Mat {
    matmul(&pair.phi.full(), &pair.lambda)
}

pub fn check_l_conditions(
    pair: &TwoLaxPair,
    cm: &CrossedModule,
    points: &[GradedPoint],
) -> LConditionsReport {
    let t_compat = max_abs_diff(&matmul(&cm.tmap, &pair.lm1), &matmul(&pair.l0, &transpose(&cm.tmap)));
    let f = cm.total_constants();
    let rg = r_tensor(pair);
    let nv = cm.dim();
    let mut sign = 0i8;
    let mut consistent = true;
    let mut worst = 0.0f64;
    for p in points {
        let xi = p.coords();
        let pi = pair.poisson_r.bivector_at(&xi);
        let ll = matmul(&matmul(&pair.lambda, &pi), &transpose(&pair.lambda));
        let l = matvec(&pair.lambda, &xi);
        let mut adl = zeros2(nv, nv);
        for c in 0..nv {
            for x in 0..nv {
                adl[c][x] = (0..nv).map(|k| l[k] * f[c][k][x]).sum();
            }
        }
        let s = add(&matmul(&adl, &rg), &matmul(&rg, &transpose(&adl)));
        let plus = max_abs_diff(&ll, &s);
        let minus = crate::tensor::max_abs(&add(&ll, &s));
        let here: i8 = if plus <= minus { 1 } else { -1 };
        // Both sides vanish: either sign fits.
        let degenerate = plus == minus;
        if sign == 0 && !degenerate {
            sign = here;
        } else if !degenerate && here != sign {
            consistent = false;
        }
        worst = worst.max(if sign == -1 { minus } else { plus });
    }
    LConditionsReport {
        t_compat,
        ll_residual: worst,
        sign: if sign == 0 { 1 } else { sign },
        sign_consistent: consistent,
        lambda_invariance: lambda_invariance_residual(cm, &pair.lambda),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InducedLax {
    /// `L̲ = t∘L₋₁ = L₀∘tᵀ`, `n x n`.
    pub lbar: Mat,
    /// `max |{H, u}_R − [u, P₀ + tP₋₁]|` with `u = L₀ f`.
    pub residual: f64,
    /// `max |[L₀ f, tP₋₁]|`; reported, not required to vanish.
    pub commutator_diagnostic: f64,
    /// `max |t L̇₋₁ − [t L₋₁, P₀]|`; reported, not required to vanish.
    pub boundary_diagnostic: f64,
}

/// The ordinary Lax pair on `g0` obtained by pushing the 2-Lax pair
/// through the homomorphism `(x, y) ↦ x + t y`.
pub fn induced_1lax(
    pair: &TwoLaxPair,
    cm: &CrossedModule,
    points: &[GradedPoint],
) -> Result<InducedLax> {
    let n = cm.n;
    let lbar = pair.lbar(cm);
    let u_fns: Vec<GradedPolynomial> = pair
        .l0
        .iter()
        .map(|row| {
            let mut c = vec![0.0; n];
            c.extend_from_slice(row);
            GradedPolynomial::linear(n, cm.m, &c)
        })
        .collect();
    let mut residual = 0.0f64;
    let mut comm = 0.0f64;
    let mut bdry = 0.0f64;
    for p in points {
        let xi = p.coords();
        let pp = pair.p_at(p);
        let tp1 = cm.tmap_apply(&pp.y)?;
        let pbar: Vec<f64> = pp.x.iter().zip(&tp1).map(|(a, b)| a + b).collect();
        let u = matvec(&pair.l0, &p.f);
        let lhs: Vec<f64> = u_fns
            .iter()
            .map(|uk| pair.poisson_r.bracket(&pair.h, uk).eval(&xi))
            .collect();
        let rhs = cm.bracket0(&u, &pbar)?;
        residual = residual.max(vec_max_abs_diff(&lhs, &rhs));
        comm = comm.max(vec_max_abs(&cm.bracket0(&u, &tp1)?));
        // t L̇₋₁ with L₋₁ = L₋₁-block applied to g.
        let vf = pair.poisson_r.vector_field(&pair.dh, &xi);
        let gdot = &vf[..n];
        let tldot = matvec(&lbar, gdot);
        let tl = matvec(&lbar, &p.g);
        let br = cm.bracket0(&tl, &pp.x)?;
        bdry = bdry.max(vec_max_abs_diff(&tldot, &br));
    }
    Ok(InducedLax {
        lbar,
        residual,
        commutator_diagnostic: comm,
        boundary_diagnostic: bdry,
    })
}

/// Ordinary Lax pair on `g*` of a quasitriangular Lie bialgebra.
#[derive(Clone, Debug)]
pub struct OneLaxPair {
    pub n: usize,
    pub c0: T3,
    pub r: Mat,
    /// `L = r^⊙`, `L(x) = Σ r^⊙[k][i] x_i T_k`.
    pub l: Mat,
    /// `φ(T_k) = Σ_j phi[j][k] T_j`.
    pub phi: Mat,
    pub h: GradedPolynomial,
    /// R-bracket Lie–Poisson structure on `g*`.
    pub poisson_r: PoissonStructure,
}

impl OneLaxPair {
    pub fn l_at(&self, x: &[f64]) -> Vec<f64> {
        matvec(&self.l, x)
    }

    pub fn p_at(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = (0..self.n).map(|k| self.h.derivative(k).eval(x)).collect();
        matvec(&self.phi, &d)
    }
}

/// `c_r[k][i][j] = Σ_l c[k][l][j] φ[l][i] + c[k][i][l] φ[l][j]`.
pub fn r_constants(c0: &T3, phi: &Mat) -> T3 {
    let n = c0.len();
    let mut cr = zeros3(n, n, n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                cr[k][i][j] = (0..n)
                    .map(|l| c0[k][l][j] * phi[l][i] + c0[k][i][l] * phi[l][j])
                    .sum();
            }
        }
    }
    cr
}

/// `r^⊙ = (r + rᵀ)/2` must be invertible with an ad-invariant inverse;
/// `φ[j][k] = Σ_i r^∧[i][j] K[k][i]` with `K = (r^⊙)⁻¹`.
pub fn build_1lax(c0: &T3, r: &Mat, h: &GradedPolynomial, tol: f64) -> Result<OneLaxPair> {
    let n = c0.len();
    check2("r-matrix", r, n, n)?;
    crate::tensor::check3("structure constants", c0, n, n, n)?;
    if h.n != n || h.m != 0 {
        return Err(crate::error::dim_err(
            "Hamiltonian coordinates",
            format!("({n}, 0)"),
            format!("({}, {})", h.n, h.m),
        ));
    }
    let rt = transpose(r);
    let sym = scale(&add(r, &rt), 0.5);
    let skew = scale(&sub(r, &rt), 0.5);
    let k = inverse(&sym, "symmetric part r^⊙")?;
    let inv = form_invariance_residual(c0, &k);
    if inv >= tol {
        return Err(Error::Invariance { residual: inv, tol });
    }
    let mut phi = zeros2(n, n);
    for j in 0..n {
        for kk in 0..n {
            phi[j][kk] = (0..n).map(|i| skew[i][j] * k[kk][i]).sum();
        }
    }
    let poisson_r = PoissonStructure::from_constants(n, 0, r_constants(c0, &phi), Mode::Rmatrix);
    Ok(OneLaxPair {
        n,
        c0: c0.clone(),
        r: r.clone(),
        l: sym,
        phi,
        h: h.clone(),
        poisson_r,
    })
}

/// `‖{H, L}_r(x) − [L(x), P(x)]‖∞`.
pub fn one_lax_residual(one: &OneLaxPair, x: &[f64]) -> f64 {
    let lhs: Vec<f64> = one
        .l
        .iter()
        .map(|row| {
            let lk = GradedPolynomial::linear(one.n, 0, row);
            one.poisson_r.bracket(&one.h, &lk).eval(x)
        })
        .collect();
    let rhs = contract(&one.c0, &one.l_at(x), &one.p_at(x));
    vec_max_abs_diff(&lhs, &rhs)
}

/// `½ xᵀ r^⊙ x`, the quadratic Casimir of a 1-Lax pair.
pub fn quadratic_casimir_1(r: &Mat) -> GradedPolynomial {
    let sym = scale(&add(r, &transpose(r)), 0.5);
    GradedPolynomial::quadratic_form(r.len(), 0, &sym)
}

/// The identity lift of a 1-Lax pair: algebra, r-matrix, Hamiltonian and
/// the resulting 2-Lax pair.
#[derive(Clone, Debug)]
pub struct LiftedLax {
    pub cm: CrossedModule,
    pub r: TwoRMatrix,
    pub h: GradedPolynomial,
    pub pair: TwoLaxPair,
}

/// Two copies of `one` on `id_g`: `R1 = R2 = r`,
/// `H_lift(g, f) = H(f) − H(f − g)`.
pub fn lift_1lax(one: &OneLaxPair, tol: f64) -> Result<LiftedLax> {
    let n = one.n;
    let cm = CrossedModule::identity("id_lift", &one.c0)?;
    let r = TwoRMatrix::identity_lift(&one.r);
    let mut at_f = zeros2(n, 2 * n);
    let mut at_fmg = zeros2(n, 2 * n);
    for k in 0..n {
        at_f[k][n + k] = 1.0;
        at_fmg[k][n + k] = 1.0;
        at_fmg[k][k] = -1.0;
    }
    let h = one
        .h
        .compose_linear(&at_f, n, n)
        .sub(&one.h.compose_linear(&at_fmg, n, n));
    let pair = build_2lax(&cm, &r, &h, tol)?;
    Ok(LiftedLax { cm, r, h, pair })
}
