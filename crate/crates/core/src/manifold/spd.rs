//! Symmetric positive definite matrices with the affine-invariant metric.
//!
//! Points and tangents are dense row-major n-by-n matrices. Matrix
//! functions go through a symmetric eigendecomposition; the dimension is
//! capped at 64.

use nalgebra::DMatrix;

use crate::error::{GeoError, Result};

pub const MAX_DIM: usize = 64;

fn to_matrix(coords: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, coords)
}

fn to_coords(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn check_symmetric(coords: &[f64], n: usize, tol: f64) -> Result<()> {
    if coords.len() != n * n {
        return Err(GeoError::ContractViolation(format!(
            "expected {}x{} matrix, got {} entries",
            n,
            n,
            coords.len()
        )));
    }
    for i in 0..n {
        for j in 0..i {
            let d = (coords[i * n + j] - coords[j * n + i]).abs();
            let scale = 1.0 + coords[i * n + j].abs();
            if d > tol * scale {
                return Err(GeoError::ContractViolation(format!(
                    "matrix not symmetric: |A[{i},{j}] - A[{j},{i}]| = {d}"
                )));
            }
        }
    }
    Ok(())
}

pub fn check_point(coords: &[f64], n: usize, tol: f64) -> Result<()> {
    if n > MAX_DIM {
        return Err(GeoError::InvalidParameter(format!(
            "SPD dimension {n} exceeds the supported cap {MAX_DIM}"
        )));
    }
    check_symmetric(coords, n, tol)?;
    let eig = to_matrix(coords, n).symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(GeoError::ContractViolation(format!(
            "matrix not positive definite: smallest eigenvalue {min}"
        )));
    }
    Ok(())
}

pub fn symmetrize(coords: Vec<f64>, n: usize) -> Vec<f64> {
    let mut out = coords;
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (out[i * n + j] + out[j * n + i]);
            out[i * n + j] = avg;
            out[j * n + i] = avg;
        }
    }
    out
}

/// Apply `f` to the eigenvalues of a symmetric matrix.
fn matrix_function(
    m: &DMatrix<f64>,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        *v = f(*v)?;
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&vals) * q.transpose())
}

pub fn expm(coords: &[f64], n: usize) -> Result<Vec<f64>> {
    let m = matrix_function(&to_matrix(coords, n), |v| Ok(v.exp()))?;
    Ok(to_coords(&m))
}

fn logm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    matrix_function(m, |v| {
        if v <= 0.0 {
            Err(GeoError::Numerical(format!(
                "matrix logarithm of a non-positive eigenvalue {v}"
            )))
        } else {
            Ok(v.ln())
        }
    })
}

/// Returns (X^{1/2}, X^{-1/2}).
fn sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = m.clone().symmetric_eigen();
    let mut s = eig.eigenvalues.clone();
    let mut si = eig.eigenvalues.clone();
    for (a, b) in s.iter_mut().zip(si.iter_mut()) {
        if *a <= 0.0 {
            return Err(GeoError::Numerical(format!(
                "matrix square root of a non-positive eigenvalue {a}"
            )));
        }
        let r = a.sqrt();
        *a = r;
        *b = 1.0 / r;
    }
    let q = &eig.eigenvectors;
    Ok((
        q * DMatrix::from_diagonal(&s) * q.transpose(),
        q * DMatrix::from_diagonal(&si) * q.transpose(),
    ))
}

/// tr(X^{-1} U X^{-1} V), the affine-invariant inner product.
pub fn inner(x: &[f64], u: &[f64], v: &[f64], n: usize) -> f64 {
    let xm = to_matrix(x, n);
    let um = to_matrix(u, n);
    let vm = to_matrix(v, n);
    let xinv = xm
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .unwrap_or_else(|| xm.try_inverse().expect("SPD point is invertible"));
    (&xinv * um * &xinv * vm).trace()
}

/// Exp_X(V) = X^{1/2} expm(X^{-1/2} V X^{-1/2}) X^{1/2}.
pub fn exp(x: &[f64], v: &[f64], n: usize) -> Result<Vec<f64>> {
    let (xs, xsi) = sqrt_pair(&to_matrix(x, n))?;
    let inner = &xsi * to_matrix(v, n) * &xsi;
    let e = matrix_function(&inner, |t| Ok(t.exp()))?;
    Ok(to_coords(&(&xs * e * &xs)))
}

/// Log_X(Y) = X^{1/2} logm(X^{-1/2} Y X^{-1/2}) X^{1/2}.
pub fn log(x: &[f64], y: &[f64], n: usize) -> Result<Vec<f64>> {
    let (xs, xsi) = sqrt_pair(&to_matrix(x, n))?;
    let inner = &xsi * to_matrix(y, n) * &xsi;
    let l = logm(&inner)?;
    Ok(to_coords(&(&xs * l * &xs)))
}

pub fn dist(x: &[f64], y: &[f64], n: usize) -> Result<f64> {
    let (_, xsi) = sqrt_pair(&to_matrix(x, n))?;
    let inner = &xsi * to_matrix(y, n) * &xsi;
    let l = logm(&inner)?;
    Ok(l.norm())
}

/// Transport along the geodesic from X to Y: U -> E U E^T with
/// E = X^{1/2} expm((1/2) X^{-1/2} Log_X(Y) X^{-1/2}) X^{-1/2}.
pub fn transport(x: &[f64], y: &[f64], u: &[f64], n: usize) -> Result<Vec<f64>> {
    let (xs, xsi) = sqrt_pair(&to_matrix(x, n))?;
    let inner = &xsi * to_matrix(y, n) * &xsi;
    let half_log = matrix_function(&logm(&inner)?, |t| Ok((0.5 * t).exp()))?;
    let e = &xs * half_log * &xsi;
    Ok(to_coords(&(&e * to_matrix(u, n) * e.transpose())))
}
