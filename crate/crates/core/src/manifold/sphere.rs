//! Unit hypersphere in R^{n+1} with the round metric.

use crate::error::{GeoError, Result};
use crate::scalar::{clamp_unit, sin_over};

/// Distance beyond which log/transport report a cut-locus error.
const CUT_LOCUS_MARGIN: f64 = 1e-6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    let c = clamp_unit(dot(x, y));
    if c >= 0.0 {
        // Chord-based form: well conditioned near theta = 0, where acos
        // loses half the significant digits.
        let chord_sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        2.0 * (0.5 * chord_sq.sqrt()).clamp(-1.0, 1.0).asin()
    } else {
        c.acos()
    }
}

pub fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let theta = dot(v, v).max(0.0).sqrt();
    let c = theta.cos();
    let s = sin_over(theta);
    x.iter().zip(v).map(|(xi, vi)| c * xi + s * vi).collect()
}

pub fn log(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let c = clamp_unit(dot(x, y));
    let theta = dist(x, y);
    if theta > std::f64::consts::PI - CUT_LOCUS_MARGIN {
        return Err(GeoError::CutLocus(format!(
            "sphere log undefined near the antipode (distance {theta})"
        )));
    }
    // y - <x,y> x is sin(theta) times the unit initial direction.
    let scale = 1.0 / sin_over(theta);
    Ok(x.iter()
        .zip(y)
        .map(|(xi, yi)| scale * (yi - c * xi))
        .collect())
}

pub fn transport(x: &[f64], y: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let v = log(x, y)?;
    let theta = dot(&v, &v).sqrt();
    if theta == 0.0 {
        return Ok(u.to_vec());
    }
    let e: Vec<f64> = v.iter().map(|c| c / theta).collect();
    let a = dot(&e, u);
    // The component along the geodesic direction rotates in the (x, e) plane;
    // the orthogonal complement is unchanged.
    let (s, c) = theta.sin_cos();
    Ok(u.iter()
        .zip(x.iter().zip(&e))
        .map(|(ui, (xi, ei))| ui + a * ((c - 1.0) * ei - s * xi))
        .collect())
}
