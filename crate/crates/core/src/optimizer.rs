//! Riemannian gradient descent and the accelerated Nesterov-style scheme,
//! in its general form (per-iteration step sizes and shrinkage) and the
//! constant-step instantiation.

use crate::diagnostics::{DiagnosticsEngine, DiagnosticsRecord};
use crate::error::{GeoError, Result};
use crate::manifold::{ManifoldPoint, TangentVector};
use crate::objective::Objective;

/// Per-iteration parameter schedule.
#[derive(Debug, Clone)]
pub enum Schedule {
    Constant(f64),
    /// Explicit per-iteration values; the last value repeats past the end.
    PerIter(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PerIter(vs) => *vs.get(k).or_else(|| vs.last()).unwrap_or(&0.0),
        }
    }
}

/// Parameters of the accelerated scheme.
#[derive(Debug, Clone)]
pub struct RagdParams {
    /// Step sizes, each at most 1/L.
    pub h: Schedule,
    /// Positive shrinkage parameters.
    pub beta: Schedule,
    pub gamma0: f64,
    pub max_iters: usize,
    /// Stop when the gradient norm (or the f-gap, when the minimizer is
    /// known) falls below this.
    pub tolerance: f64,
}

/// One iteration's state bundle.
///
/// After step k the bundle holds x_{k+1}, v_{k+1}, gamma_{k+1} together
/// with the y_k, alpha_k and gamma_bar_{k+1} that produced them.
#[derive(Debug, Clone)]
pub struct RagdState {
    pub k: usize,
    pub x: ManifoldPoint,
    pub v: ManifoldPoint,
    pub y: ManifoldPoint,
    pub alpha: f64,
    pub gamma: f64,
    pub gamma_bar: f64,
}

impl RagdState {
    pub fn initial(x0: ManifoldPoint, gamma0: f64) -> Self {
        RagdState {
            k: 0,
            x: x0.clone(),
            v: x0.clone(),
            y: x0,
            alpha: 0.0,
            gamma: gamma0,
            gamma_bar: gamma0,
        }
    }
}

/// Intermediate quantities of one accelerated step, consumed by the
/// estimate-sequence diagnostics.
#[derive(Debug, Clone)]
pub struct StepInfo {
    pub k: usize,
    pub y: ManifoldPoint,
    pub alpha: f64,
    /// gamma_k (before shrinkage).
    pub gamma_prev: f64,
    pub gamma_bar: f64,
    pub h: f64,
    pub beta: f64,
    pub f_y: f64,
    pub grad_y: TangentVector,
    /// Log_{y_k}(v_k).
    pub log_y_v: TangentVector,
    /// The tangent combination whose exponential is v_{k+1}.
    pub v_combo: TangentVector,
}

/// Positive root of `alpha^2 - (mu - gamma) h alpha - gamma h = 0`,
/// required to lie in (0, 1).
pub fn solve_alpha(h: f64, gamma: f64, mu: f64) -> Result<f64> {
    if h <= 0.0 || gamma <= 0.0 || mu <= 0.0 {
        return Err(GeoError::InvalidParameter(
            "solve_alpha requires h, gamma, mu > 0".into(),
        ));
    }
    let b = (mu - gamma) * h;
    let disc = (b * b + 4.0 * gamma * h).sqrt();
    // Pick the branch that avoids subtracting nearly equal quantities.
    let alpha = if b >= 0.0 {
        0.5 * (b + disc)
    } else {
        2.0 * gamma * h / (disc - b)
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GeoError::InvalidParameter(format!(
            "no root in (0,1): alpha = {alpha} (is h*mu < 1?)"
        )));
    }
    Ok(alpha)
}

/// Closed-form constant parameters of the constant-step scheme.
#[derive(Debug, Clone, Copy)]
pub struct ConstantParams {
    pub alpha: f64,
    pub gamma: f64,
    pub gamma_bar: f64,
}

/// alpha = (sqrt(beta^2 + 4(1+beta) mu h) - beta)/2, with
/// gamma = mu (sqrt(..) - beta)/(sqrt(..) + beta) and gamma_bar = (1+beta) gamma.
///
/// `beta = 0` is allowed and collapses to alpha = sqrt(mu h), gamma = mu.
pub fn constant_params(h: f64, beta: f64, mu: f64) -> Result<ConstantParams> {
    if h <= 0.0 || mu <= 0.0 || beta < 0.0 {
        return Err(GeoError::InvalidParameter(
            "constant_params requires h, mu > 0 and beta >= 0".into(),
        ));
    }
    let root = (beta * beta + 4.0 * (1.0 + beta) * mu * h).sqrt();
    let alpha = 0.5 * (root - beta);
    let gamma = mu * (root - beta) / (root + beta);
    Ok(ConstantParams { alpha, gamma, gamma_bar: (1.0 + beta) * gamma })
}

/// Theoretical contraction factor `1 - 0.9 sqrt(mu/L)` of the local fast
/// rate.
pub fn theoretical_rate(mu: f64, lipschitz: f64) -> f64 {
    1.0 - 0.9 * (mu / lipschitz).sqrt()
}

/// Radius `D = (mu/L)^{3/4} / (20 sqrt(K))` of the ball around the
/// minimizer on which the fast local rate is guaranteed; infinite for
/// flat space.
pub fn radius_d(mu: f64, lipschitz: f64, curvature_bound: f64) -> f64 {
    if curvature_bound == 0.0 {
        f64::INFINITY
    } else {
        (mu / lipschitz).powf(0.75) / (20.0 * curvature_bound.sqrt())
    }
}

/// Mixing point `y = Exp_x((alpha gamma / (gamma + alpha mu)) Log_x(v))`.
pub(crate) fn compute_y(
    x: &ManifoldPoint,
    v: &ManifoldPoint,
    gamma: f64,
    alpha: f64,
    mu: f64,
) -> Result<ManifoldPoint> {
    let m = x.manifold;
    let log_xv = m.log(x, v)?;
    let coeff = alpha * gamma / (gamma + alpha * mu);
    m.exp(x, &log_xv.scale(coeff))
}

/// One step of the accelerated scheme.
pub fn ragd_step(
    state: &RagdState,
    h: f64,
    beta: f64,
    obj: &Objective,
) -> Result<(RagdState, StepInfo)> {
    let k = state.k;
    let m = obj.manifold;
    let mu = obj.mu;
    let gamma = state.gamma;
    let alpha = solve_alpha(h, gamma, mu).map_err(|e| e.at_iteration(k))?;
    let gamma_bar = (1.0 - alpha) * gamma + alpha * mu;

    let y = compute_y(&state.x, &state.v, gamma, alpha, mu).map_err(|e| e.at_iteration(k))?;
    let f_y = obj.value(&y);
    let grad_y = obj.grad(&y).map_err(|e| e.at_iteration(k))?;

    let x_next = m.exp(&y, &grad_y.scale(-h)).map_err(|e| e.at_iteration(k))?;

    // The v-update is a single tangent-space combination at y_k followed by
    // one exponential.
    let log_y_v = m.log(&y, &state.v).map_err(|e| e.at_iteration(k))?;
    let v_combo = log_y_v
        .combine((1.0 - alpha) * gamma / gamma_bar, &grad_y, -alpha / gamma_bar)
        .map_err(|e| e.at_iteration(k))?;
    let v_next = m.exp(&y, &v_combo).map_err(|e| e.at_iteration(k))?;

    let next = RagdState {
        k: k + 1,
        x: x_next,
        v: v_next,
        y: y.clone(),
        alpha,
        gamma: gamma_bar / (1.0 + beta),
        gamma_bar,
    };
    let info = StepInfo {
        k,
        y,
        alpha,
        gamma_prev: gamma,
        gamma_bar,
        h,
        beta,
        f_y,
        grad_y,
        log_y_v,
        v_combo,
    };
    Ok((next, info))
}

/// One Riemannian gradient descent step `x -> Exp_x(-h grad f(x))`.
pub fn rgd_step(x: &ManifoldPoint, h: f64, obj: &Objective) -> Result<ManifoldPoint> {
    let g = obj.grad(x)?;
    obj.manifold.exp(x, &g.scale(-h))
}

/// Per-iteration record of a solver run.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub k: usize,
    pub f_value: f64,
    /// `f(x_k) - f(x*)`, when the minimizer is known.
    pub f_gap: Option<f64>,
    pub dist_to_min: Option<f64>,
    pub grad_norm: f64,
    pub state: RagdState,
    /// Whether x_k is inside the objective's valid ball; leaving the ball
    /// is recorded, not prevented.
    pub in_ball: bool,
}

/// Full history of a run, with optional estimate-sequence diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

impl Trace {
    pub fn final_f_gap(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.f_gap)
    }

    /// Geometric mean of successive f-gap ratios over the last half of the
    /// run; `None` when gaps are unavailable or degenerate.
    pub fn empirical_contraction(&self) -> Option<f64> {
        let gaps: Vec<f64> = self.records.iter().filter_map(|r| r.f_gap).collect();
        if gaps.len() < 4 {
            return None;
        }
        let start = gaps.len() / 2;
        let mut log_sum = 0.0;
        let mut count = 0usize;
        for w in gaps[start..].windows(2) {
            if w[0] > 0.0 && w[1] > 0.0 {
                log_sum += (w[1] / w[0]).ln();
                count += 1;
            }
        }
        if count == 0 {
            None
        } else {
            Some((log_sum / count as f64).exp())
        }
    }
}

fn make_record(k: usize, state: &RagdState, obj: &Objective) -> Result<TraceRecord> {
    let f_value = obj.value(&state.x);
    let grad_norm = obj.grad(&state.x)?.norm();
    let (f_gap, dist_to_min) = match &obj.minimizer {
        Some(xs) => (
            Some(f_value - obj.value(xs)),
            Some(obj.manifold.dist(&state.x, xs)?),
        ),
        None => (None, None),
    };
    let in_ball = obj.in_domain(&state.x)?;
    Ok(TraceRecord { k, f_value, f_gap, dist_to_min, grad_norm, state: state.clone(), in_ball })
}

fn should_stop(rec: &TraceRecord, tolerance: f64) -> bool {
    if tolerance <= 0.0 {
        return false;
    }
    match rec.f_gap {
        Some(gap) => gap <= tolerance,
        None => rec.grad_norm <= tolerance,
    }
}

/// Run the accelerated scheme from `x0`, recording a trace and, when an
/// engine is supplied, per-iteration estimate-sequence diagnostics.
pub fn ragd_run(
    x0: &ManifoldPoint,
    params: &RagdParams,
    obj: &Objective,
    mut diag: Option<&mut DiagnosticsEngine>,
) -> Result<Trace> {
    let mut trace = Trace::default();
    let mut state = RagdState::initial(x0.clone(), params.gamma0);
    let rec = make_record(0, &state, obj)?;
    let mut stop = should_stop(&rec, params.tolerance);
    trace.records.push(rec);

    for k in 0..params.max_iters {
        if stop {
            break;
        }
        let h = params.h.at(k);
        let beta = params.beta.at(k);
        let (next, info) = ragd_step(&state, h, beta, obj)?;
        if let Some(engine) = diag.as_deref_mut() {
            // The comparison inequality involves y_{k+1}, which the next
            // step would compute; peek at it here.
            let h_next = params.h.at(k + 1);
            let alpha_next = solve_alpha(h_next, next.gamma, obj.mu)?;
            let y_next = compute_y(&next.x, &next.v, next.gamma, alpha_next, obj.mu)?;
            let record = engine.observe(&info, &next, &y_next, obj)?;
            trace.diagnostics.push(record);
        }
        state = next;
        let rec = make_record(k + 1, &state, obj)?;
        stop = should_stop(&rec, params.tolerance);
        trace.records.push(rec);
    }
    Ok(trace)
}

/// Run plain Riemannian gradient descent; the trace reuses the state
/// bundle with v = y = x.
pub fn rgd_run(
    x0: &ManifoldPoint,
    h: f64,
    max_iters: usize,
    tolerance: f64,
    obj: &Objective,
) -> Result<Trace> {
    let mut trace = Trace::default();
    let mut x = x0.clone();
    for k in 0..=max_iters {
        let state = RagdState::initial(x.clone(), obj.mu);
        let rec = make_record(k, &state, obj)?;
        let stop = should_stop(&rec, tolerance);
        trace.records.push(rec);
        if stop || k == max_iters {
            break;
        }
        x = rgd_step(&x, h, obj).map_err(|e| e.at_iteration(k))?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Manifold;
    use crate::objective::{euclidean_quadratic, squared_distance_objective};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alpha_reduces_to_sqrt_mu_h() {
        // gamma = mu collapses the quadratic to alpha^2 = mu h.
        let alpha = solve_alpha(0.01, 1.0, 1.0).unwrap();
        assert_relative_eq!(alpha, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn alpha_satisfies_its_quadratic() {
        for &(h, gamma, mu) in &[(0.01, 0.5, 2.0), (0.3, 3.0, 1.0), (1e-4, 1e-3, 10.0)] {
            let alpha = solve_alpha(h, gamma, mu).unwrap();
            let residual = alpha * alpha - h * ((1.0 - alpha) * gamma + alpha * mu);
            assert!(residual.abs() <= 1e-14, "residual {residual}");
        }
    }

    #[test]
    fn alpha_rejects_overlong_step() {
        // h*mu >= 1 pushes the root out of (0,1).
        assert!(solve_alpha(2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_params_reference_configuration() {
        // mu/L = 0.01, h = 1/L, beta = (1/5) sqrt(mu/L).
        let p = constant_params(1.0, 0.02, 0.01).unwrap();
        assert_relative_eq!(p.alpha, 0.0914886, epsilon = 5e-6);
        // Independent oracle: bisect the defining equation
        // a^2 + beta a - h (1+beta) mu = 0 on (0, 1).
        let g = |a: f64| a * a + 0.02 * a - 1.02 * 0.01;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(p.alpha, 0.5 * (lo + hi), epsilon = 1e-14);
        assert!(p.alpha >= 0.9 * (0.01f64).sqrt());
        // Identities mu - gamma = beta alpha / ((1+beta) h), gamma = alpha^2 / ((1+beta) h).
        assert_relative_eq!(
            0.01 - p.gamma,
            0.02 * p.alpha / (1.02 * 1.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(p.gamma, p.alpha * p.alpha / 1.02, epsilon = 1e-15);
        assert_relative_eq!(p.gamma_bar, 1.02 * p.gamma, epsilon = 1e-15);
    }

    #[test]
    fn constant_params_beta_zero_degenerates() {
        let p = constant_params(0.04, 0.0, 1.0).unwrap();
        assert_relative_eq!(p.alpha, 0.2, epsilon = 1e-15);
        assert_relative_eq!(p.gamma, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.gamma_bar, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn solve_alpha_consistent_with_constant_params() {
        let (h, beta, mu) = (0.5, 0.07, 0.3);
        let p = constant_params(h, beta, mu).unwrap();
        let alpha = solve_alpha(h, p.gamma, mu).unwrap();
        assert_relative_eq!(alpha, p.alpha, epsilon = 1e-14);
    }

    #[test]
    fn rate_and_radius_examples() {
        assert_relative_eq!(theoretical_rate(1.0, 1.0), 0.1, epsilon = 1e-15);
        assert_relative_eq!(theoretical_rate(1.0, 100.0), 0.91, epsilon = 1e-15);
        assert_relative_eq!(theoretical_rate(1.0, 4.0), 0.55, epsilon = 1e-15);
        assert_relative_eq!(radius_d(1.0, 1.0, 1.0), 0.05, epsilon = 1e-15);
        assert_relative_eq!(radius_d(1.0, 100.0, 1.0), 0.0015811, epsilon = 1e-7);
        assert_eq!(radius_d(1.0, 10.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn first_step_mixes_point_with_itself() {
        // v_0 = x_0 forces y_0 = x_0.
        let obj = euclidean_quadratic(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])),
            DVector::zeros(2),
        )
        .unwrap();
        let x0 = ManifoldPoint::new(Manifold::Euclidean(2), vec![1.0, 1.0]).unwrap();
        let state = RagdState::initial(x0.clone(), obj.mu);
        let (_, info) = ragd_step(&state, 1.0 / obj.lipschitz, 0.1, &obj).unwrap();
        for (a, b) in info.y.coords.iter().zip(&x0.coords) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_gradient_fixes_x() {
        let m = Manifold::Sphere(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = m.random_point(&mut rng);
        let obj = squared_distance_objective(m, p.clone(), 0.5).unwrap();
        // At the minimizer the gradient is zero: x_{k+1} = y_k and v moves
        // along the geodesic toward v_k only.
        let state = RagdState::initial(p.clone(), obj.mu);
        let (next, info) = ragd_step(&state, 1.0, 0.1, &obj).unwrap();
        for (a, b) in next.x.coords.iter().zip(&info.y.coords) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn descent_estimate_per_step() {
        // f(x_{k+1}) <= f(y_k) - (h/2) ||grad f(y_k)||^2 for h <= 1/L.
        let m = Manifold::Hyperbolic(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = m.random_point(&mut rng);
        let obj = squared_distance_objective(m, p.clone(), 2.0).unwrap();
        let x0 = m.exp(&p, &m.random_tangent(&p, &mut rng, 1.0)).unwrap();
        let h = 1.0 / obj.lipschitz;
        let mut state = RagdState::initial(x0, obj.mu);
        for _ in 0..20 {
            let (next, info) = ragd_step(&state, h, 0.1, &obj).unwrap();
            let gn = info.grad_y.norm();
            assert!(
                obj.value(&next.x) <= info.f_y - 0.5 * h * gn * gn + 1e-12,
                "descent estimate violated"
            );
            state = next;
        }
    }

    #[test]
    fn scalars_stay_constant_under_matching_gamma0() {
        let (h, beta, mu) = (0.02, 0.05, 0.5);
        let cp = constant_params(h, beta, mu).unwrap();
        let obj = euclidean_quadratic(
            DMatrix::from_diagonal(&DVector::from_vec(vec![mu, 1.0 / h])),
            DVector::zeros(2),
        )
        .unwrap();
        let x0 = ManifoldPoint::new(Manifold::Euclidean(2), vec![1.0, -0.5]).unwrap();
        let mut state = RagdState::initial(x0, cp.gamma);
        for _ in 0..100 {
            let (next, info) = ragd_step(&state, h, beta, &obj).unwrap();
            assert_relative_eq!(info.alpha, cp.alpha, epsilon = 1e-12);
            assert_relative_eq!(next.gamma, cp.gamma, epsilon = 1e-12);
            assert_relative_eq!(next.gamma_bar, cp.gamma_bar, epsilon = 1e-12);
            state = next;
        }
    }

    #[test]
    fn rgd_single_step_solves_identity_quadratic() {
        let obj = euclidean_quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let x = ManifoldPoint::new(Manifold::Euclidean(2), vec![3.0, -4.0]).unwrap();
        let next = rgd_step(&x, 1.0, &obj).unwrap();
        assert!(next.coords.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn rgd_monotone_on_sphere() {
        let m = Manifold::Sphere(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = m.random_point(&mut rng);
        let obj = squared_distance_objective(m, p.clone(), 0.8).unwrap();
        let x0 = m.exp(&p, &m.random_tangent(&p, &mut rng, 0.7)).unwrap();
        let trace = rgd_run(&x0, 1.0 / obj.lipschitz, 100, 0.0, &obj).unwrap();
        for w in trace.records.windows(2) {
            assert!(w[1].f_value <= w[0].f_value + 1e-15);
        }
    }

    #[test]
    fn zero_iterations_yields_single_record() {
        let obj = euclidean_quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let x0 = ManifoldPoint::new(Manifold::Euclidean(2), vec![1.0, 2.0]).unwrap();
        let params = RagdParams {
            h: Schedule::Constant(1.0),
            beta: Schedule::Constant(0.1),
            gamma0: obj.mu,
            max_iters: 0,
            tolerance: 0.0,
        };
        let trace = ragd_run(&x0, &params, &obj, None).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].k, 0);
    }
}
