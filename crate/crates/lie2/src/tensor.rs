//! Small dense tensors stored as nested vectors, plus the handful of
//! matrix operations the algebraic modules need.

use nalgebra::DMatrix;

use crate::error::{dim_err, Error, Result};

/// Row-major matrix, `m[row][col]`.
pub type Mat = Vec<Vec<f64>>;
/// Rank-3 tensor, `t[out][in1][in2]` for structure constants.
pub type T3 = Vec<Vec<Vec<f64>>>;

pub fn zeros2(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn zeros3(a: usize, b: usize, c: usize) -> T3 {
    vec![vec![vec![0.0; c]; b]; a]
}

pub fn eye(n: usize) -> Mat {
    let mut m = zeros2(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn shape2(m: &Mat) -> (usize, usize) {
    (m.len(), m.first().map_or(0, |r| r.len()))
}

/// Checks that `m` is `r x c` with uniform rows.
pub fn check2(what: &str, m: &Mat, r: usize, c: usize) -> Result<()> {
    if m.len() != r || m.iter().any(|row| row.len() != c) {
        let (gr, gc) = shape2(m);
        return Err(dim_err(what, format!("{r}x{c}"), format!("{gr}x{gc}")));
    }
    Ok(())
}

/// Checks that `t` is `a x b x c` with uniform sub-arrays.
pub fn check3(what: &str, t: &T3, a: usize, b: usize, c: usize) -> Result<()> {
    let ok = t.len() == a
        && t.iter()
            .all(|m| m.len() == b && m.iter().all(|row| row.len() == c));
    if !ok {
        let ga = t.len();
        let gb = t.first().map_or(0, |m| m.len());
        let gc = t.first().and_then(|m| m.first()).map_or(0, |r| r.len());
        return Err(dim_err(what, format!("{a}x{b}x{c}"), format!("{ga}x{gb}x{gc}")));
    }
    Ok(())
}

pub fn check_len(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(dim_err(what, n, v.len()));
    }
    Ok(())
}

pub fn transpose(m: &Mat) -> Mat {
    let (r, c) = shape2(m);
    let mut out = zeros2(c, r);
    for i in 0..r {
        for j in 0..c {
            out[j][i] = m[i][j];
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (r, k) = shape2(a);
    let c = shape2(b).1;
    let mut out = zeros2(r, c);
    for i in 0..r {
        for l in 0..k {
            let av = a[i][l];
            if av == 0.0 {
                continue;
            }
            for j in 0..c {
                out[i][j] += av * b[l][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn scale(a: &Mat, s: f64) -> Mat {
    a.iter()
        .map(|r| r.iter().map(|x| x * s).collect())
        .collect()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn vec_max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn vec_max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn to_dmatrix(m: &Mat) -> DMatrix<f64> {
    let (r, c) = shape2(m);
    DMatrix::from_fn(r, c, |i, j| m[i][j])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Inverse of a square matrix; fails when singular or badly conditioned.
pub fn inverse(m: &Mat, what: &str) -> Result<Mat> {
    let (r, c) = shape2(m);
    if r != c || r == 0 {
        return Err(Error::NonDegenerate(format!(
            "{what} is {r}x{c}, not a non-empty square matrix"
        )));
    }
    let d = to_dmatrix(m);
    let scale = d.amax().max(f64::MIN_POSITIVE);
    let lu = d.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(r as i32) {
        return Err(Error::NonDegenerate(format!("{what} is singular (det = {det:e})")));
    }
    lu.try_inverse()
        .map(|inv| from_dmatrix(&inv))
        .ok_or_else(|| Error::NonDegenerate(format!("{what} is singular")))
}
