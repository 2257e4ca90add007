//! Small scalar helpers shared by the manifold implementations.

/// Threshold below which sinc-style functions switch to their series.
const SERIES_CUTOFF: f64 = 1e-4;

/// sin(t)/t, evaluated by series near zero to avoid cancellation.
pub fn sin_over(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// sinh(t)/t, evaluated by series near zero.
pub fn sinh_over(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let t2 = t * t;
        1.0 + t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sinh() / t
    }
}

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_at_cutoff() {
        for &t in &[9.9e-5, 1.1e-4, 1e-3, 0.5] {
            assert!((sin_over(t) - t.sin() / t).abs() < 1e-15);
            assert!((sinh_over(t) - t.sinh() / t).abs() < 1e-15);
        }
    }

    #[test]
    fn limits_at_zero() {
        assert_eq!(sin_over(0.0), 1.0);
        assert_eq!(sinh_over(0.0), 1.0);
    }
}
