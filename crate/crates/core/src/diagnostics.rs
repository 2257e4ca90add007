//! Runtime verification of the estimate-sequence analysis: the Phi*
//! recursion and its lower-bound property, the weak-estimate-sequence
//! inequality at the minimizer, the tangent-space comparison inequality,
//! and the two convergence bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::manifold::{Manifold, ManifoldPoint};
use crate::objective::Objective;
use crate::optimizer::{RagdState, StepInfo, Trace};

/// Slack relative to max(1, magnitude of the larger side).
fn slack(a: f64, b: f64) -> f64 {
    1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Estimate-sequence scalar state: the running minimum Phi*_k and the
/// vanishing weight lambda_k.
#[derive(Debug, Clone, Copy)]
pub struct EstimateSeqState {
    pub phi_star: f64,
    pub lambda: f64,
    pub k: usize,
}

/// One application of the Phi* recursion:
///
/// Phi*_{k+1} = (1-a) Phi*_k + a f(y_k) - a^2/(2 gb) ||g||^2
///              + a(1-a) g_k / gb * (mu/2 ||Log_{y_k}(v_k)||^2 + <g, Log_{y_k}(v_k)>)
#[allow(clippy::too_many_arguments)]
pub fn update_phi_star(
    phi_star: f64,
    alpha: f64,
    gamma: f64,
    gamma_bar: f64,
    f_y: f64,
    grad_norm_sq: f64,
    inner_grad_logv: f64,
    logv_norm_sq: f64,
    mu: f64,
) -> f64 {
    (1.0 - alpha) * phi_star + alpha * f_y
        - alpha * alpha / (2.0 * gamma_bar) * grad_norm_sq
        + alpha * (1.0 - alpha) * gamma / gamma_bar
            * (0.5 * mu * logv_norm_sq + inner_grad_logv)
}

/// `Phi*_k >= f(x_k)` up to slack.
pub fn check_lower_bound(phi_star: f64, f_x: f64) -> bool {
    phi_star >= f_x - slack(phi_star, f_x)
}

/// Weak estimate-sequence inequality at the minimizer:
/// `Phi_k(x*) <= (1 - lambda_k) f(x*) + lambda_k Phi_0(x*)`.
pub fn check_weak_estimate(
    phi_at_xstar: f64,
    lambda: f64,
    phi0_at_xstar: f64,
    f_xstar: f64,
) -> bool {
    let rhs = (1.0 - lambda) * f_xstar + lambda * phi0_at_xstar;
    phi_at_xstar <= rhs + slack(phi_at_xstar, rhs)
}

/// Terminal bound `f(x_T) - f(x*) <= lambda_T (f(x_0) - f(x*) + gamma_0/2 d_0^2)`.
pub fn check_theorem1(
    f_x_t: f64,
    f_xstar: f64,
    lambda_t: f64,
    f_x0: f64,
    gamma0: f64,
    dist0: f64,
) -> bool {
    let lhs = f_x_t - f_xstar;
    let rhs = lambda_t * (f_x0 - f_xstar + 0.5 * gamma0 * dist0 * dist0);
    lhs <= rhs + slack(lhs, rhs)
}

/// Per-iteration fast local rate
/// `f(x_k) - f(x*) <= (1 - 0.9 sqrt(mu/L))^k (f(x_0) - f(x*) + mu/2 d_0^2)`.
///
/// Records without a known f-gap yield `false`.
pub fn check_theorem4(trace: &Trace, mu: f64, lipschitz: f64, dist0: f64) -> Vec<bool> {
    let rate = crate::optimizer::theoretical_rate(mu, lipschitz);
    let Some(gap0) = trace.records.first().and_then(|r| r.f_gap) else {
        return vec![false; trace.records.len()];
    };
    let base = gap0 + 0.5 * mu * dist0 * dist0;
    trace
        .records
        .iter()
        .map(|r| match r.f_gap {
            Some(gap) => {
                let rhs = rate.powi(r.k as i32) * base;
                gap <= rhs + slack(gap, rhs)
            }
            None => false,
        })
        .collect()
}

/// Result of one tangent-space comparison-inequality evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonCheck {
    /// gamma_{k+1} times the squared tangent distance at y_{k+1}.
    pub lhs: f64,
    /// gamma_bar_{k+1} times the squared tangent distance at y_k.
    pub rhs: f64,
    pub held: bool,
    /// max(||Log_{y_k}(x*)||, ||Log_{y_{k+1}}(x*)||).
    pub b_next: f64,
    /// 1 + 5 K b_next^2.
    pub bound_factor: f64,
    /// Whether the sufficient condition 5 K b^2 <= beta held.
    pub sufficient_held: bool,
    /// Unscaled squared tangent distance at y_{k+1}; reused for Phi(x*).
    pub lhs_unscaled: f64,
}

/// Evaluate the comparison inequality
/// `g_{k+1} ||Log_{y_{k+1}}(x*) - Log_{y_{k+1}}(v_{k+1})||^2
///   <= gb_{k+1} ||Log_{y_k}(x*) - Log_{y_k}(v_{k+1})||^2`.
#[allow(clippy::too_many_arguments)]
pub fn check_comparison(
    manifold: &Manifold,
    y_k: &ManifoldPoint,
    y_next: &ManifoldPoint,
    v_next: &ManifoldPoint,
    x_star: &ManifoldPoint,
    gamma_next: f64,
    gamma_bar_next: f64,
    beta: f64,
) -> Result<ComparisonCheck> {
    let k = manifold.curvature_magnitude();
    let log_y_xs = manifold.log(y_k, x_star)?;
    let log_y_vn = manifold.log(y_k, v_next)?;
    let diff_old = log_y_xs.sub(&log_y_vn)?;
    let rhs_unscaled = manifold.inner(y_k, &diff_old, &diff_old)?;

    let log_yn_xs = manifold.log(y_next, x_star)?;
    let log_yn_vn = manifold.log(y_next, v_next)?;
    let diff_new = log_yn_xs.sub(&log_yn_vn)?;
    let lhs_unscaled = manifold.inner(y_next, &diff_new, &diff_new)?;

    let lhs = gamma_next * lhs_unscaled;
    let rhs = gamma_bar_next * rhs_unscaled;
    let b_old = manifold.inner(y_k, &log_y_xs, &log_y_xs)?.max(0.0).sqrt();
    let b_new = manifold.inner(y_next, &log_yn_xs, &log_yn_xs)?.max(0.0).sqrt();
    let b_next = b_old.max(b_new);
    let bound_factor = 1.0 + 5.0 * k * b_next * b_next;
    let in_radius = k == 0.0 || b_next <= 1.0 / (4.0 * k.sqrt());
    Ok(ComparisonCheck {
        lhs,
        rhs,
        held: lhs <= rhs + 1e-12 * lhs.abs().max(rhs.abs()).max(1.0),
        b_next,
        bound_factor,
        sufficient_held: in_radius && 5.0 * k * b_next * b_next <= beta,
        lhs_unscaled,
    })
}

/// Per-iteration diagnostics, one record per accelerated step.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    /// Step index k; the record describes quantities indexed k+1.
    pub k: usize,
    pub comparison_lhs: f64,
    pub comparison_rhs: f64,
    pub comparison_held: bool,
    pub b_next: f64,
    pub bound_factor: f64,
    /// Whether 5 K b_{k+1}^2 <= beta (with b within the theorem radius).
    pub sufficient_held: bool,
    /// Phi*_{k+1}.
    pub phi_star: f64,
    /// lambda_{k+1}.
    pub lambda: f64,
    /// Phi*_{k+1} >= f(x_{k+1}).
    pub lower_bound_held: bool,
    /// Weak estimate-sequence inequality at x*; `None` once a comparison
    /// inequality has failed (the statement is conditional).
    pub weak_es_held: Option<bool>,
    pub theorem1_rhs: f64,
    pub theorem1_held: Option<bool>,
    /// Largest complete-square residual over the probe points.
    pub complete_square_residual: f64,
}

/// Streaming observer that follows a run and verifies the analysis step
/// by step. Requires a known minimizer.
pub struct DiagnosticsEngine {
    x_star: ManifoldPoint,
    f_star: f64,
    f_x0: f64,
    dist0: f64,
    gamma0: f64,
    phi0_at_xstar: f64,
    state: EstimateSeqState,
    all_comparisons_held: bool,
    probes: usize,
    probe_radius: f64,
    rng: ChaCha8Rng,
}

impl DiagnosticsEngine {
    /// `probes` complete-square probe points are drawn per iteration
    /// within `probe_radius` of y_k.
    pub fn new(
        obj: &Objective,
        x0: &ManifoldPoint,
        gamma0: f64,
        x_star: ManifoldPoint,
        probes: usize,
        probe_radius: f64,
        seed: u64,
    ) -> Result<Self> {
        let f_star = obj.value(&x_star);
        let f_x0 = obj.value(x0);
        let dist0 = obj.manifold.dist(x0, &x_star)?;
        Ok(DiagnosticsEngine {
            x_star,
            f_star,
            f_x0,
            dist0,
            gamma0,
            phi0_at_xstar: f_x0 + 0.5 * gamma0 * dist0 * dist0,
            state: EstimateSeqState { phi_star: f_x0, lambda: 1.0, k: 0 },
            all_comparisons_held: true,
            probes,
            probe_radius,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn estimate_state(&self) -> EstimateSeqState {
        self.state
    }

    pub fn all_comparisons_held(&self) -> bool {
        self.all_comparisons_held
    }

    /// Ingest one accelerated step. `y_next` is the mixing point the next
    /// step will use.
    pub fn observe(
        &mut self,
        info: &StepInfo,
        next: &RagdState,
        y_next: &ManifoldPoint,
        obj: &Objective,
    ) -> Result<DiagnosticsRecord> {
        let m = obj.manifold;
        let y = &info.y;
        let grad_norm_sq = m.inner(y, &info.grad_y, &info.grad_y)?;
        let inner_grad_logv = m.inner(y, &info.grad_y, &info.log_y_v)?;
        let logv_norm_sq = m.inner(y, &info.log_y_v, &info.log_y_v)?;

        let phi_star_next = update_phi_star(
            self.state.phi_star,
            info.alpha,
            info.gamma_prev,
            info.gamma_bar,
            info.f_y,
            grad_norm_sq,
            inner_grad_logv,
            logv_norm_sq,
            obj.mu,
        );
        let lambda_next = (1.0 - info.alpha) * self.state.lambda;

        let residual = self.complete_square_residual(info, next, phi_star_next, obj)?;

        let cmp = check_comparison(
            &m,
            y,
            y_next,
            &next.v,
            &self.x_star,
            next.gamma,
            next.gamma_bar,
            info.beta,
        )?;
        self.all_comparisons_held &= cmp.held;

        let f_x_next = obj.value(&next.x);
        let lower_bound_held = check_lower_bound(phi_star_next, f_x_next);

        // Phi_{k+1}(x*) from the closed form at the new base point.
        let phi_at_xstar = phi_star_next + 0.5 * next.gamma * cmp.lhs_unscaled;
        let theorem1_rhs =
            lambda_next * (self.f_x0 - self.f_star + 0.5 * self.gamma0 * self.dist0 * self.dist0);
        let (weak_es_held, theorem1_held) = if self.all_comparisons_held {
            (
                Some(check_weak_estimate(
                    phi_at_xstar,
                    lambda_next,
                    self.phi0_at_xstar,
                    self.f_star,
                )),
                Some(check_theorem1(
                    f_x_next,
                    self.f_star,
                    lambda_next,
                    self.f_x0,
                    self.gamma0,
                    self.dist0,
                )),
            )
        } else {
            (None, None)
        };

        self.state = EstimateSeqState {
            phi_star: phi_star_next,
            lambda: lambda_next,
            k: info.k + 1,
        };

        Ok(DiagnosticsRecord {
            k: info.k,
            comparison_lhs: cmp.lhs,
            comparison_rhs: cmp.rhs,
            comparison_held: cmp.held,
            b_next: cmp.b_next,
            bound_factor: cmp.bound_factor,
            sufficient_held: cmp.sufficient_held,
            phi_star: phi_star_next,
            lambda: lambda_next,
            lower_bound_held,
            weak_es_held,
            theorem1_rhs,
            theorem1_held,
            complete_square_residual: residual,
        })
    }

    /// Compare the recursion form of the next estimate function against its
    /// completed-square closed form at random probe points near y_k.
    fn complete_square_residual(
        &mut self,
        info: &StepInfo,
        next: &RagdState,
        phi_star_next: f64,
        obj: &Objective,
    ) -> Result<f64> {
        if self.probes == 0 {
            return Ok(0.0);
        }
        let m = obj.manifold;
        let y = &info.y;
        let log_y_vnext = m.log(y, &next.v)?;
        let mut max_residual = 0.0f64;
        for _ in 0..=self.probes {
            // First probe is v_{k+1} itself, where the closed form attains
            // its minimum Phi*_{k+1}; the rest are random.
            let log_y_probe = if max_residual == 0.0 && self.probes > 0 {
                log_y_vnext.clone()
            } else {
                let t = m.random_tangent(y, &mut self.rng, self.probe_radius);
                m.log(y, &m.exp(y, &t)?)?
            };
            let d_vk = log_y_probe.sub(&info.log_y_v)?;
            let phi_k = self.state.phi_star
                + 0.5 * info.gamma_prev * m.inner(y, &d_vk, &d_vk)?;
            let probe_norm_sq = m.inner(y, &log_y_probe, &log_y_probe)?;
            let recursion = (1.0 - info.alpha) * phi_k
                + info.alpha
                    * (info.f_y
                        + m.inner(y, &info.grad_y, &log_y_probe)?
                        + 0.5 * obj.mu * probe_norm_sq);
            let d_vnext = log_y_probe.sub(&log_y_vnext)?;
            let closed =
                phi_star_next + 0.5 * info.gamma_bar * m.inner(y, &d_vnext, &d_vnext)?;
            let residual =
                (recursion - closed).abs() / recursion.abs().max(closed.abs()).max(1.0);
            max_residual = max_residual.max(residual);
        }
        Ok(max_residual)
    }
}

/// Check the lambda product identity `lambda_k = prod_{i<k} (1 - alpha_i)`
/// against a recursively accumulated sequence.
pub fn lambda_product_matches(alphas: &[f64], lambdas: &[f64], tol: f64) -> bool {
    if lambdas.len() != alphas.len() + 1 || lambdas.first() != Some(&1.0) {
        return false;
    }
    let mut product = 1.0;
    for (alpha, lambda) in alphas.iter().zip(&lambdas[1..]) {
        product *= 1.0 - alpha;
        if (product - lambda).abs() > tol * product.abs().max(1.0) {
            return false;
        }
    }
    true
}
