//! Comparison-geometry checks: laws of cosines, the squared-distance
//! sandwich bounds for small triangles, the multiplicative distortion
//! bound for tangent-space distances, and two exact multinomial
//! identities.

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeoError, Result};
use crate::manifold::{Manifold, ManifoldPoint};
use crate::scalar::clamp_unit;

/// Two sides and the included angle of a geodesic triangle in a model space.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicTriangle {
    pub b: f64,
    pub c: f64,
    /// Angle between sides `b` and `c`, in [0, pi].
    pub angle: f64,
    /// Model-space curvature: -1, 0 or +1.
    pub curvature: f64,
}

impl GeodesicTriangle {
    pub fn new(b: f64, c: f64, angle: f64, curvature: f64) -> Result<Self> {
        if !(b >= 0.0 && c >= 0.0 && b.is_finite() && c.is_finite()) {
            return Err(GeoError::InvalidParameter("side lengths must be finite and nonnegative".into()));
        }
        if !(0.0..=std::f64::consts::PI).contains(&angle) {
            return Err(GeoError::InvalidParameter("angle must lie in [0, pi]".into()));
        }
        Ok(GeodesicTriangle { b, c, angle, curvature })
    }
}

/// Third side from the Euclidean law of cosines.
pub fn euclidean_side(t: &GeodesicTriangle) -> f64 {
    let a_sq = t.b * t.b + t.c * t.c - 2.0 * t.b * t.c * t.angle.cos();
    a_sq.max(0.0).sqrt()
}

/// Third side from the hyperbolic law of cosines (curvature -1).
pub fn hyperbolic_side(t: &GeodesicTriangle) -> f64 {
    let ch = t.b.cosh() * t.c.cosh() - t.b.sinh() * t.c.sinh() * t.angle.cos();
    ch.max(1.0).acosh()
}

/// Third side from the spherical law of cosines (curvature +1).
pub fn spherical_side(t: &GeodesicTriangle) -> f64 {
    let cs = t.b.cos() * t.c.cos() + t.b.sin() * t.c.sin() * t.angle.cos();
    clamp_unit(cs).acos()
}

/// Third side in constant curvature -K, by rescaling the curvature -1 law.
pub fn hyperbolic_side_scaled(t: &GeodesicTriangle, k: f64) -> f64 {
    let rk = k.sqrt();
    let scaled = GeodesicTriangle { b: rk * t.b, c: rk * t.c, ..*t };
    hyperbolic_side(&scaled) / rk
}

/// Result of one sandwich-inequality evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SandwichCheck {
    pub a_sq: f64,
    pub a_bar_sq: f64,
    pub holds: bool,
}

fn sandwich_tol(scale: f64) -> f64 {
    // Absolute 1e-12 on O(1) squared lengths, relative 1e-10 beyond that.
    (1e-10 * scale).max(1e-12)
}

/// Check `a_bar^2 <= a^2 <= (1 + 2b^2) a_bar^2` for a hyperbolic triangle
/// with `b <= 1/4`.
pub fn check_hyperbolic_sandwich(t: &GeodesicTriangle) -> Result<SandwichCheck> {
    if t.b > 0.25 {
        return Err(GeoError::HypothesisViolated(format!(
            "hyperbolic sandwich requires b <= 1/4, got b = {}",
            t.b
        )));
    }
    let a = hyperbolic_side(t);
    let a_bar = euclidean_side(t);
    let a_sq = a * a;
    let a_bar_sq = a_bar * a_bar;
    let tol = sandwich_tol(a_sq.max(a_bar_sq));
    let holds =
        a_bar_sq <= a_sq + tol && a_sq <= (1.0 + 2.0 * t.b * t.b) * a_bar_sq + tol;
    Ok(SandwichCheck { a_sq, a_bar_sq, holds })
}

/// Check `a^2 <= a_bar^2 <= (1 + 2b^2) a^2` for a spherical triangle with
/// `b <= 1/4` and `c` in [0, pi/2].
pub fn check_spherical_sandwich(t: &GeodesicTriangle) -> Result<SandwichCheck> {
    if t.b > 0.25 {
        return Err(GeoError::HypothesisViolated(format!(
            "spherical sandwich requires b <= 1/4, got b = {}",
            t.b
        )));
    }
    if t.c > std::f64::consts::FRAC_PI_2 {
        return Err(GeoError::HypothesisViolated(format!(
            "spherical sandwich requires c <= pi/2, got c = {}",
            t.c
        )));
    }
    let a = spherical_side(t);
    let a_bar = euclidean_side(t);
    let a_sq = a * a;
    let a_bar_sq = a_bar * a_bar;
    let tol = sandwich_tol(a_sq.max(a_bar_sq));
    let holds =
        a_sq <= a_bar_sq + tol && a_bar_sq <= (1.0 + 2.0 * t.b * t.b) * a_sq + tol;
    Ok(SandwichCheck { a_sq, a_bar_sq, holds })
}

/// One evaluation of the multiplicative distortion bound for the
/// tangent-space distance between `x_star` and `v` as the base point moves
/// from `y0` to `y1`.
#[derive(Debug, Clone)]
pub struct DistortionSample {
    pub b_max: f64,
    /// Squared tangent distance measured at the new base `y1`.
    pub lhs: f64,
    /// Squared tangent distance measured at the old base `y0`.
    pub rhs: f64,
    /// `1 + 5 K b_max^2`.
    pub bound_factor: f64,
    pub holds: bool,
}

/// Evaluate the distortion bound
/// `lhs <= (1 + 5 K b_max^2) rhs` where
/// `b_max = max(d(y0, x_star), d(y1, x_star))`.
///
/// Rejects the sample when `K > 0` and `b_max > 1/(4 sqrt(K))`.
pub fn check_distortion(
    manifold: &Manifold,
    x_star: &ManifoldPoint,
    v: &ManifoldPoint,
    y0: &ManifoldPoint,
    y1: &ManifoldPoint,
) -> Result<DistortionSample> {
    let k = manifold.curvature_magnitude();
    let b_max = manifold.dist(y0, x_star)?.max(manifold.dist(y1, x_star)?);
    if k > 0.0 && b_max > 1.0 / (4.0 * k.sqrt()) {
        return Err(GeoError::HypothesisViolated(format!(
            "distortion bound requires b_max <= 1/(4 sqrt(K)), got {b_max}"
        )));
    }
    let diff0 = manifold.log(y0, x_star)?.sub(&manifold.log(y0, v)?)?;
    let diff1 = manifold.log(y1, x_star)?.sub(&manifold.log(y1, v)?)?;
    let rhs = manifold.inner(y0, &diff0, &diff0)?;
    let lhs = manifold.inner(y1, &diff1, &diff1)?;
    let bound_factor = 1.0 + 5.0 * k * b_max * b_max;
    let tol = sandwich_tol(lhs.max(rhs));
    Ok(DistortionSample {
        b_max,
        lhs,
        rhs,
        bound_factor,
        holds: lhs <= bound_factor * rhs + tol,
    })
}

/// Exact evaluation of one of the two multinomial identities.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub equal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityVariant {
    Even,
    Odd,
}

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product::<BigUint>().max(BigUint::from(1u32))
}

/// n! / (a! b! c!) with a + b + c = n, exact.
fn multinomial(n: u64, a: u64, b: u64, c: u64) -> BigUint {
    debug_assert_eq!(a + b + c, n);
    factorial(n) / (factorial(a) * factorial(b) * factorial(c))
}

/// Check one of the identities
/// `(2p+2q)!/((2p)!(2q)!) = sum_k C(p+q; p-k, q-k, 2k) 4^k`  (even) or
/// `(2p+2q+2)!/((2p+1)!(2q+1)!) = sum_k C(p+q+1; p-k, q-k, 2k+1) 2*4^k` (odd),
/// in exact big-integer arithmetic.
pub fn multinomial_identity(p: u64, q: u64, variant: IdentityVariant) -> Result<IdentityCheck> {
    if q > p || p > 20 {
        return Err(GeoError::InvalidParameter(format!(
            "identity defined for 0 <= q <= p <= 20, got p = {p}, q = {q}"
        )));
    }
    let (lhs, rhs) = match variant {
        IdentityVariant::Even => {
            let lhs = factorial(2 * p + 2 * q) / (factorial(2 * p) * factorial(2 * q));
            let rhs = (0..=q)
                .map(|k| {
                    multinomial(p + q, p - k, q - k, 2 * k)
                        * BigUint::from(2u32).pow(2 * k as u32)
                })
                .sum();
            (lhs, rhs)
        }
        IdentityVariant::Odd => {
            let lhs =
                factorial(2 * p + 2 * q + 2) / (factorial(2 * p + 1) * factorial(2 * q + 1));
            let rhs = (0..=q)
                .map(|k| {
                    multinomial(p + q + 1, p - k, q - k, 2 * k + 1)
                        * BigUint::from(2u32).pow(2 * k as u32 + 1)
                })
                .sum();
            (lhs, rhs)
        }
    };
    let equal = lhs == rhs;
    Ok(IdentityCheck { lhs, rhs, equal })
}

/// Aggregate result of a Monte-Carlo verification run.
#[derive(Debug, Clone, Default)]
pub struct GeometryReport {
    pub samples: u64,
    pub rejected: u64,
    pub violations: u64,
    /// Largest observed lhs/(factor * rhs) style ratio among admissible samples.
    pub max_ratio_observed: f64,
    /// Largest observed |lhs/rhs - 1| between the two compared squared
    /// distances; stays at rounding level when the comparison is an exact
    /// equality, as in flat space.
    pub max_equality_deviation: f64,
}

/// Sandwich-inequality Monte Carlo in a constant-curvature model space.
///
/// Samples are stratified half-and-half over `c >= 1/2` and `c <= 1/2`, the
/// case split used to establish the upper bound.
pub fn run_sandwich_mc(curvature: f64, samples: u64, seed: u64) -> Result<GeometryReport> {
    if curvature != 1.0 && curvature != -1.0 {
        return Err(GeoError::InvalidParameter("model curvature must be +1 or -1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GeometryReport::default();
    let c_cap = if curvature > 0.0 { std::f64::consts::FRAC_PI_2 } else { 10.0 };
    for i in 0..samples {
        let b = rng.gen::<f64>() * 0.25;
        let c = if i % 2 == 0 {
            0.5 + rng.gen::<f64>() * (c_cap - 0.5)
        } else {
            rng.gen::<f64>() * 0.5
        };
        let angle = rng.gen::<f64>() * std::f64::consts::PI;
        let t = GeodesicTriangle { b, c, angle, curvature };
        let check = if curvature > 0.0 {
            check_spherical_sandwich(&t)?
        } else {
            check_hyperbolic_sandwich(&t)?
        };
        report.samples += 1;
        if !check.holds {
            report.violations += 1;
        }
        let denom = (1.0 + 2.0 * b * b) * check.a_bar_sq.max(check.a_sq);
        if denom > 0.0 {
            let ratio = check.a_sq.min(check.a_bar_sq) / denom;
            // ratio <= 1 means the upper bound held with that much room.
            let upper = if curvature > 0.0 {
                check.a_bar_sq / ((1.0 + 2.0 * b * b) * check.a_sq)
            } else {
                check.a_sq / ((1.0 + 2.0 * b * b) * check.a_bar_sq)
            };
            report.max_ratio_observed = report.max_ratio_observed.max(upper.max(ratio));
        }
        if check.a_bar_sq > 0.0 {
            report.max_equality_deviation = report
                .max_equality_deviation
                .max((check.a_sq / check.a_bar_sq - 1.0).abs());
        }
    }
    Ok(report)
}

/// Distortion-bound Monte Carlo on a curved manifold.
///
/// Draws `x_star` at random, the two base points within `1/(4 sqrt(K))` of
/// it, and the target within distance 1; quadruples failing the theorem
/// hypothesis are counted as rejected.
pub fn run_distortion_mc(manifold: &Manifold, samples: u64, seed: u64) -> Result<GeometryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = manifold.curvature_magnitude();
    let b_cap = if k > 0.0 { 1.0 / (4.0 * k.sqrt()) } else { 1.0 };
    let mut report = GeometryReport::default();
    for _ in 0..samples {
        let x_star = manifold.random_point(&mut rng);
        let y0 = manifold.exp(&x_star, &manifold.random_tangent(&x_star, &mut rng, b_cap))?;
        let y1 = manifold.exp(&x_star, &manifold.random_tangent(&x_star, &mut rng, b_cap))?;
        let v = manifold.exp(&x_star, &manifold.random_tangent(&x_star, &mut rng, 1.0))?;
        match check_distortion(manifold, &x_star, &v, &y0, &y1) {
            Ok(sample) => {
                report.samples += 1;
                if !sample.holds {
                    report.violations += 1;
                }
                let denom = sample.bound_factor * sample.rhs;
                if denom > 0.0 {
                    report.max_ratio_observed =
                        report.max_ratio_observed.max(sample.lhs / denom);
                }
                if sample.rhs > 0.0 {
                    report.max_equality_deviation = report
                        .max_equality_deviation
                        .max((sample.lhs / sample.rhs - 1.0).abs());
                }
            }
            Err(GeoError::HypothesisViolated(_)) => report.rejected += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn euclidean_345() {
        let t = GeodesicTriangle { b: 3.0, c: 4.0, angle: FRAC_PI_2, curvature: 0.0 };
        assert_relative_eq!(euclidean_side(&t), 5.0, max_relative = 1e-14);
    }

    #[test]
    fn euclidean_degenerate() {
        let t = GeodesicTriangle { b: 0.0, c: 2.5, angle: 1.0, curvature: 0.0 };
        assert_relative_eq!(euclidean_side(&t), 2.5, max_relative = 1e-14);
        let t = GeodesicTriangle { b: 1.5, c: 2.5, angle: PI, curvature: 0.0 };
        assert_relative_eq!(euclidean_side(&t), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn hyperbolic_right_angle() {
        let t = GeodesicTriangle { b: 1.0, c: 1.0, angle: FRAC_PI_2, curvature: -1.0 };
        let expected = (1.0f64.cosh() * 1.0f64.cosh()).acosh();
        assert_relative_eq!(hyperbolic_side(&t), expected, max_relative = 1e-14);
    }

    #[test]
    fn hyperbolic_degenerate_cases() {
        let t = GeodesicTriangle { b: 0.0, c: 0.7, angle: 0.3, curvature: -1.0 };
        assert_relative_eq!(hyperbolic_side(&t), 0.7, max_relative = 1e-12);
        let t = GeodesicTriangle { b: 0.3, c: 0.3, angle: PI, curvature: -1.0 };
        assert_relative_eq!(hyperbolic_side(&t), 0.6, max_relative = 1e-12);
    }

    #[test]
    fn spherical_right_angle() {
        let t = GeodesicTriangle { b: PI / 4.0, c: PI / 4.0, angle: FRAC_PI_2, curvature: 1.0 };
        assert_relative_eq!(spherical_side(&t), PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn spherical_degenerate_cases() {
        let t = GeodesicTriangle { b: 0.0, c: 0.9, angle: 0.4, curvature: 1.0 };
        assert_relative_eq!(spherical_side(&t), 0.9, max_relative = 1e-12);
        let t = GeodesicTriangle { b: 0.8, c: 0.8, angle: 0.0, curvature: 1.0 };
        assert!(spherical_side(&t).abs() < 1e-7);
    }

    #[test]
    fn sandwich_examples() {
        let t = GeodesicTriangle { b: 0.25, c: 0.5, angle: FRAC_PI_2, curvature: -1.0 };
        assert!(check_hyperbolic_sandwich(&t).unwrap().holds);
        let t = GeodesicTriangle { b: 0.25, c: FRAC_PI_2, angle: FRAC_PI_2, curvature: 1.0 };
        assert!(check_spherical_sandwich(&t).unwrap().holds);
        let t = GeodesicTriangle { b: 0.0, c: 1.0, angle: 0.7, curvature: -1.0 };
        let c = check_hyperbolic_sandwich(&t).unwrap();
        assert!(c.holds);
        assert_relative_eq!(c.a_sq, c.a_bar_sq, max_relative = 1e-10);
    }

    #[test]
    fn sandwich_rejects_large_b() {
        let t = GeodesicTriangle { b: 0.3, c: 1.0, angle: 1.0, curvature: -1.0 };
        assert!(matches!(
            check_hyperbolic_sandwich(&t),
            Err(GeoError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn curvature_rescaling_identity() {
        let t = GeodesicTriangle { b: 0.4, c: 1.3, angle: 0.9, curvature: -1.0 };
        for &k in &[0.25, 0.5, 2.0, 4.0] {
            let direct = hyperbolic_side_scaled(&t, k);
            let rk = k.sqrt();
            let scaled = GeodesicTriangle { b: rk * t.b, c: rk * t.c, ..t };
            assert_relative_eq!(direct, hyperbolic_side(&scaled) / rk, epsilon = 1e-12);
        }
    }

    #[test]
    fn small_triangle_limit_matches_euclidean() {
        // Both curved laws approach the flat law as the triangle shrinks,
        // with a second-order curvature correction in the scale.
        let base = GeodesicTriangle { b: 0.6, c: 0.9, angle: 1.1, curvature: 0.0 };
        let mut prev_h_err = f64::INFINITY;
        let mut prev_s_err = f64::INFINITY;
        for &s in &[0.1, 0.05, 0.025, 0.0125] {
            let t = GeodesicTriangle { b: s * base.b, c: s * base.c, ..base };
            let e = euclidean_side(&t);
            let h_err = (hyperbolic_side(&t) / e - 1.0).abs();
            let s_err = (spherical_side(&t) / e - 1.0).abs();
            // Halving the scale should cut the relative error ~4x.
            assert!(h_err < prev_h_err * 0.3 + 1e-14);
            assert!(s_err < prev_s_err * 0.3 + 1e-14);
            prev_h_err = h_err;
            prev_s_err = s_err;
        }
    }

    #[test]
    fn composed_bound_dominates() {
        // (1 + 2Kb^2)^2 <= 1 + 5Kb^2 for b <= 1/(4 sqrt(K)).
        for &k in &[0.5, 1.0, 2.0] {
            let cap = 1.0 / (4.0 * f64::sqrt(k));
            for i in 0..=1000 {
                let b = cap * (i as f64) / 1000.0;
                let lhs = (1.0 + 2.0 * k * b * b).powi(2);
                assert!(lhs <= 1.0 + 5.0 * k * b * b + 1e-15);
            }
        }
    }

    #[test]
    fn identity_base_cases() {
        let c = multinomial_identity(0, 0, IdentityVariant::Even).unwrap();
        assert_eq!(c.lhs, BigUint::from(1u32));
        assert!(c.equal);
        let c = multinomial_identity(1, 1, IdentityVariant::Even).unwrap();
        assert_eq!(c.lhs, BigUint::from(6u32));
        assert_eq!(c.rhs, BigUint::from(6u32));
    }

    #[test]
    fn identity_all_small() {
        for p in 0..=12u64 {
            for q in 0..=p {
                assert!(multinomial_identity(p, q, IdentityVariant::Even).unwrap().equal);
                assert!(multinomial_identity(p, q, IdentityVariant::Odd).unwrap().equal);
            }
        }
    }

    #[test]
    fn identity_rejects_bad_input() {
        assert!(multinomial_identity(2, 3, IdentityVariant::Even).is_err());
        assert!(multinomial_identity(21, 0, IdentityVariant::Even).is_err());
    }

    #[test]
    fn sandwich_mc_smoke() {
        let r = run_sandwich_mc(-1.0, 20_000, 7).unwrap();
        assert_eq!(r.violations, 0);
        let r = run_sandwich_mc(1.0, 20_000, 7).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn distortion_euclidean_is_exact() {
        let m = Manifold::Euclidean(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x_star = m.random_point(&mut rng);
            let v = m.random_point(&mut rng);
            let y0 = m.random_point(&mut rng);
            let y1 = m.random_point(&mut rng);
            let s = check_distortion(&m, &x_star, &v, &y0, &y1).unwrap();
            assert_relative_eq!(s.lhs, s.rhs, max_relative = 1e-12);
            assert_eq!(s.bound_factor, 1.0);
            assert!(s.holds);
        }
    }

    #[test]
    fn distortion_same_base_trivial() {
        let m = Manifold::Sphere(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x_star = m.random_point(&mut rng);
        let y0 = m.exp(&x_star, &m.random_tangent(&x_star, &mut rng, 0.2)).unwrap();
        let v = m.exp(&x_star, &m.random_tangent(&x_star, &mut rng, 0.5)).unwrap();
        let s = check_distortion(&m, &x_star, &v, &y0, &y0).unwrap();
        assert_relative_eq!(s.lhs, s.rhs, max_relative = 1e-12);
        assert!(s.holds);
    }

    #[test]
    fn distortion_mc_smoke() {
        for m in [Manifold::Sphere(3), Manifold::Hyperbolic(3)] {
            let r = run_distortion_mc(&m, 2_000, 5).unwrap();
            assert_eq!(r.violations, 0, "violations on {m:?}");
            assert!(r.samples > 0);
        }
    }
}
