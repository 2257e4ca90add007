//! Geodesically strongly convex test objectives with value/gradient
//! oracles, strong-convexity/smoothness constants valid on a stated ball,
//! and checkers for the defining inequalities.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{GeoError, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};

type ValueFn = Box<dyn Fn(&ManifoldPoint) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&ManifoldPoint) -> Result<TangentVector> + Send + Sync>;

/// A smooth, strongly geodesically convex objective on one manifold.
///
/// `mu` and `lipschitz` are the strong-convexity and gradient-Lipschitz
/// constants, valid on the ball of `domain_radius` around `domain_center`.
pub struct Objective {
    pub manifold: Manifold,
    value: ValueFn,
    grad: GradFn,
    pub mu: f64,
    pub lipschitz: f64,
    pub minimizer: Option<ManifoldPoint>,
    pub domain_center: ManifoldPoint,
    pub domain_radius: f64,
}

impl Objective {
    pub fn value(&self, x: &ManifoldPoint) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: &ManifoldPoint) -> Result<TangentVector> {
        (self.grad)(x)
    }

    /// Whether `x` lies in the ball on which `mu` and `lipschitz` are valid.
    pub fn in_domain(&self, x: &ManifoldPoint) -> Result<bool> {
        Ok(self.manifold.dist(&self.domain_center, x)? <= self.domain_radius + 1e-12)
    }

    /// Minimum value, when the minimizer is known.
    pub fn min_value(&self) -> Option<f64> {
        self.minimizer.as_ref().map(|m| self.value(m))
    }
}

/// Hessian bounds for (1/2) d(., p)^2 from standard Hessian comparison.
///
/// On a manifold with curvature in [-K_lo, K_up], the directional second
/// derivatives at distance d from p lie between sqrt(K_up) d cot(sqrt(K_up) d)
/// and sqrt(K_lo) d coth(sqrt(K_lo) d).
fn squared_distance_constants(manifold: &Manifold, radius: f64) -> (f64, f64) {
    let (lo, up) = manifold.curvature_bounds();
    let mu = if up > 0.0 {
        let t = up.sqrt() * radius;
        if t == 0.0 { 1.0 } else { t / t.tan() }
    } else {
        1.0
    };
    let lipschitz = if lo < 0.0 {
        let t = (-lo).sqrt() * radius;
        if t == 0.0 { 1.0 } else { t / t.tanh() }
    } else {
        1.0
    };
    (mu, lipschitz)
}

/// f(x) = (1/2) d(x, p)^2 with gradient -Log_x(p), minimized at `p`.
///
/// `radius` is the ball around `p` on which the constants are claimed; on
/// the sphere it must stay below pi/2 so the ball is geodesically convex.
pub fn squared_distance_objective(
    manifold: Manifold,
    p: ManifoldPoint,
    radius: f64,
) -> Result<Objective> {
    if p.manifold != manifold {
        return Err(GeoError::ContractViolation("anchor point on wrong manifold".into()));
    }
    let max_radius = match manifold {
        Manifold::Sphere(_) => std::f64::consts::FRAC_PI_2,
        _ => f64::INFINITY,
    };
    if !(radius > 0.0 && radius < max_radius) {
        return Err(GeoError::InvalidParameter(format!(
            "radius {radius} outside (0, {max_radius})"
        )));
    }
    let (mu, lipschitz) = squared_distance_constants(&manifold, radius);
    let m = manifold;
    let pv = p.clone();
    let pg = p.clone();
    Ok(Objective {
        manifold,
        value: Box::new(move |x| {
            let d = m.dist(x, &pv).expect("same manifold");
            0.5 * d * d
        }),
        grad: Box::new(move |x| Ok(m.log(x, &pg)?.scale(-1.0))),
        mu,
        lipschitz,
        minimizer: Some(p.clone()),
        domain_center: p,
        domain_radius: radius,
    })
}

/// f(x) = (1/2) sum_i w_i d(x, p_i)^2 with gradient -sum_i w_i Log_x(p_i).
///
/// All anchors must lie in a ball of the given radius; constants come from
/// the per-term bounds at the worst-case distance `2 * radius`.
pub fn frechet_mean_objective(
    manifold: Manifold,
    points: Vec<ManifoldPoint>,
    weights: Vec<f64>,
    radius: f64,
) -> Result<Objective> {
    if points.is_empty() {
        return Err(GeoError::InvalidParameter("empty anchor point list".into()));
    }
    if points.len() != weights.len() {
        return Err(GeoError::InvalidParameter("weights/points length mismatch".into()));
    }
    if weights.iter().any(|w| *w < 0.0) {
        return Err(GeoError::InvalidParameter("negative weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(GeoError::InvalidParameter(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    let max_radius = match manifold {
        Manifold::Sphere(_) => std::f64::consts::FRAC_PI_2 / 2.0,
        _ => f64::INFINITY,
    };
    if !(radius > 0.0 && radius < max_radius) {
        return Err(GeoError::InvalidParameter(format!(
            "radius {radius} outside (0, {max_radius})"
        )));
    }
    let center = points[0].clone();
    for p in &points {
        if p.manifold != manifold {
            return Err(GeoError::ContractViolation("anchor on wrong manifold".into()));
        }
        if manifold.dist(&center, p)? > 2.0 * radius {
            return Err(GeoError::InvalidParameter(
                "anchor points are not contained in a ball of the given radius".into(),
            ));
        }
    }
    // Any point of the ball is within 2*radius of every anchor.
    let (mu, lipschitz) = squared_distance_constants(&manifold, 2.0 * radius);
    let m = manifold;
    let pv: Vec<ManifoldPoint> = points.clone();
    let wv = weights.clone();
    let pg = points;
    let wg = weights;
    Ok(Objective {
        manifold,
        value: Box::new(move |x| {
            pv.iter()
                .zip(&wv)
                .map(|(p, w)| {
                    let d = m.dist(x, p).expect("same manifold");
                    0.5 * w * d * d
                })
                .sum()
        }),
        grad: Box::new(move |x| {
            let mut g = TangentVector::zero(x.clone());
            for (p, w) in pg.iter().zip(&wg) {
                g = g.combine(1.0, &m.log(x, p)?, -w)?;
            }
            Ok(g)
        }),
        mu,
        lipschitz,
        minimizer: None,
        domain_center: center,
        domain_radius: radius,
    })
}

/// f(x) = (1/2) x'Ax - b'x on Euclidean space, for SPD `a`.
pub fn euclidean_quadratic(a: DMatrix<f64>, b: DVector<f64>) -> Result<Objective> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(GeoError::InvalidParameter("dimension mismatch in quadratic".into()));
    }
    if (&a - a.transpose()).norm() > 1e-10 * (1.0 + a.norm()) {
        return Err(GeoError::InvalidParameter("quadratic matrix must be symmetric".into()));
    }
    let eig = a.clone().symmetric_eigen();
    let mu = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lipschitz = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if mu <= 0.0 {
        return Err(GeoError::InvalidParameter(format!(
            "quadratic matrix not positive definite (lambda_min = {mu})"
        )));
    }
    let minimizer = a
        .clone()
        .cholesky()
        .ok_or_else(|| GeoError::Numerical("Cholesky failed on SPD matrix".into()))?
        .solve(&b);
    let manifold = Manifold::Euclidean(n);
    let min_point = ManifoldPoint::new_unchecked(manifold, minimizer.iter().cloned().collect());
    let av = a.clone();
    let bv = b.clone();
    let ag = a;
    let bg = b;
    Ok(Objective {
        manifold,
        value: Box::new(move |x| {
            let xv = DVector::from_column_slice(&x.coords);
            0.5 * (&av * &xv).dot(&xv) - bv.dot(&xv)
        }),
        grad: Box::new(move |x| {
            let xv = DVector::from_column_slice(&x.coords);
            let g = &ag * &xv - &bg;
            Ok(TangentVector { base: x.clone(), coords: g.iter().cloned().collect() })
        }),
        mu,
        lipschitz,
        minimizer: Some(min_point.clone()),
        domain_center: min_point,
        domain_radius: f64::INFINITY,
    })
}

/// Outcome of one definitional-inequality evaluation.
#[derive(Debug, Clone, Copy)]
pub struct InequalityCheck {
    pub slack: f64,
    pub holds: bool,
}

const SLACK_TOL: f64 = 1e-9;

/// Strong geodesic convexity at the pair (x, y):
/// `f(y) >= f(x) + <g_x, Log_x(y)> + (mu/2) d(x,y)^2`.
pub fn check_g_strong_convexity(
    obj: &Objective,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
) -> Result<InequalityCheck> {
    let m = obj.manifold;
    let log_xy = m.log(x, y)?;
    let g = obj.grad(x)?;
    let d_sq = m.inner(x, &log_xy, &log_xy)?;
    let rhs = obj.value(x) + m.inner(x, &g, &log_xy)? + 0.5 * obj.mu * d_sq;
    let slack = obj.value(y) - rhs;
    let scale = obj.value(y).abs().max(rhs.abs()).max(1.0);
    Ok(InequalityCheck { slack, holds: slack >= -SLACK_TOL * scale })
}

/// Result of the two smoothness inequalities at a pair (x, y).
#[derive(Debug, Clone, Copy)]
pub struct SmoothnessCheck {
    /// Slack of the quadratic upper bound (nonnegative when it holds).
    pub slack: f64,
    pub holds: bool,
    /// Slack of `L d(x,y) - ||g(x) - transport(g(y))||`.
    pub grad_lipschitz_slack: f64,
    pub grad_lipschitz_holds: bool,
}

/// Geodesic smoothness at the pair (x, y): the quadratic upper bound
/// `f(y) <= f(x) + <g_x, Log_x(y)> + (L/2) d(x,y)^2` together with the
/// transported-gradient Lipschitz inequality.
pub fn check_g_smoothness(
    obj: &Objective,
    x: &ManifoldPoint,
    y: &ManifoldPoint,
) -> Result<SmoothnessCheck> {
    let m = obj.manifold;
    let log_xy = m.log(x, y)?;
    let gx = obj.grad(x)?;
    let d_sq = m.inner(x, &log_xy, &log_xy)?;
    let rhs = obj.value(x) + m.inner(x, &gx, &log_xy)? + 0.5 * obj.lipschitz * d_sq;
    let slack = rhs - obj.value(y);
    let scale = obj.value(y).abs().max(rhs.abs()).max(1.0);

    let gy = obj.grad(y)?;
    let gy_at_x = m.transport(y, x, &gy)?;
    let diff = gx.sub(&gy_at_x)?;
    let diff_norm = m.inner(x, &diff, &diff)?.max(0.0).sqrt();
    let grad_lipschitz_slack = obj.lipschitz * d_sq.max(0.0).sqrt() - diff_norm;
    let grad_scale = diff_norm.max(1.0);
    Ok(SmoothnessCheck {
        slack,
        holds: slack >= -SLACK_TOL * scale,
        grad_lipschitz_slack,
        grad_lipschitz_holds: grad_lipschitz_slack >= -SLACK_TOL * grad_scale,
    })
}

/// Compare the analytic gradient against central differences along random
/// unit tangent directions; returns the largest deviation observed.
pub fn finite_diff_grad_check<R: Rng>(
    obj: &Objective,
    x: &ManifoldPoint,
    directions: usize,
    step: f64,
    rng: &mut R,
) -> Result<f64> {
    if step <= 0.0 {
        return Err(GeoError::InvalidParameter("step must be positive".into()));
    }
    let m = obj.manifold;
    let g = obj.grad(x)?;
    let mut max_err = 0.0f64;
    for _ in 0..directions {
        let u = m.random_tangent(x, rng, 1.0);
        let norm = u.norm();
        if norm < 1e-12 {
            continue;
        }
        let u = u.scale(1.0 / norm);
        let fp = obj.value(&m.exp(x, &u.scale(step))?);
        let fm = obj.value(&m.exp(x, &u.scale(-step))?);
        let fd = (fp - fm) / (2.0 * step);
        let analytic = m.inner(x, &g, &u)?;
        max_err = max_err.max((fd - analytic).abs());
    }
    Ok(max_err)
}

/// High-precision Riemannian gradient descent used to pin down minimizers
/// of objectives that lack a closed form (weighted means). Independent of
/// the accelerated scheme.
pub fn numerical_minimizer(
    obj: &Objective,
    x0: &ManifoldPoint,
    grad_tol: f64,
    max_iters: usize,
) -> Result<ManifoldPoint> {
    let m = obj.manifold;
    let h = 1.0 / obj.lipschitz;
    let mut x = x0.clone();
    for _ in 0..max_iters {
        let g = obj.grad(&x)?;
        if g.norm() <= grad_tol {
            return Ok(x);
        }
        x = m.exp(&x, &g.scale(-h))?;
    }
    let g = obj.grad(&x)?;
    if g.norm() <= grad_tol {
        Ok(x)
    } else {
        Err(GeoError::Numerical(format!(
            "minimizer search stalled with gradient norm {}",
            g.norm()
        )))
    }
}
