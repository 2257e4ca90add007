//! Upper hyperboloid model of hyperbolic space in Minkowski space R^{1,n}.

use super::minkowski_dot;
use crate::scalar::sinh_over;

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    // The difference of two hyperboloid points is spacelike with
    // <x-y, x-y>_M = 2(cosh(theta) - 1) = 4 sinh(theta/2)^2. The asinh
    // form stays well conditioned near theta = 0, where acosh of the
    // Gram value loses half the significant digits.
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let q = minkowski_dot(&diff, &diff).max(0.0);
    2.0 * (0.5 * q.sqrt()).asinh()
}

pub fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let theta = minkowski_dot(v, v).max(0.0).sqrt();
    let c = theta.cosh();
    let s = sinh_over(theta);
    x.iter().zip(v).map(|(xi, vi)| c * xi + s * vi).collect()
}

pub fn log(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = minkowski_dot(x, y);
    let theta = dist(x, y);
    // y + <x,y>_M x is sinh(theta) times the unit initial direction.
    let scale = 1.0 / sinh_over(theta);
    x.iter()
        .zip(y)
        .map(|(xi, yi)| scale * (yi + m * xi))
        .collect()
}

pub fn transport(x: &[f64], y: &[f64], u: &[f64]) -> Vec<f64> {
    let v = log(x, y);
    let theta = minkowski_dot(&v, &v).max(0.0).sqrt();
    if theta == 0.0 {
        return u.to_vec();
    }
    let e: Vec<f64> = v.iter().map(|c| c / theta).collect();
    let a = minkowski_dot(&e, u);
    let (s, c) = (theta.sinh(), theta.cosh());
    u.iter()
        .zip(x.iter().zip(&e))
        .map(|(ui, (xi, ei))| ui + a * ((c - 1.0) * ei + s * xi))
        .collect()
}
