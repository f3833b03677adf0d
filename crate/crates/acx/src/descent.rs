//! Gradient descent as an extrapolatable fixed-point mapping.
//!
//! A differentiable objective becomes the mapping `F(x) = x - a grad f(x)`
//! whose fixed points are the stationary points of `f`. The descent step `a`
//! is held constant within each extrapolation cycle and adapted between
//! cycles so the secant step length stays inside a preferred band; near the
//! optimum a progressive guard grows `a` back whenever differences fall
//! below machine precision.

use crate::solver::{apply_bounds, BoxBounds, Mapping, RunReport};
use crate::vecmath::{all_finite, norm2};
use thiserror::Error;

/// Boxed objective callback: `x -> f(x)`.
pub type ObjectiveFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Boxed vector callback writing into a caller buffer (gradients, maps).
pub type VectorFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A differentiable problem: objective and gradient callbacks over dense
/// vectors.
pub struct DescentProblem {
    dim: usize,
    objective: ObjectiveFn,
    gradient: VectorFn,
}

impl DescentProblem {
    pub fn new(
        dim: usize,
        objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            objective: Box::new(objective),
            gradient: Box::new(gradient),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }
}

impl std::fmt::Debug for DescentProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DescentProblem")
            .field("dim", &self.dim)
            .finish()
    }
}

/// Step-size policy for the descent mapping.
#[derive(Debug, Clone)]
pub struct AlphaPolicy {
    /// Sufficient-decrease constant in the initial step search.
    pub c_ag: f64,
    /// Cap on the gradient-norm growth accepted by the initial step search.
    pub l_n: f64,
    /// Multiplicative adaptation factor (> 1).
    pub theta: f64,
    /// Band inside which the step length leaves `a` unchanged.
    pub l_sigma_lower: f64,
    pub l_sigma_upper: f64,
    /// Cap applied by the tiny-difference guard.
    pub alpha_cap: f64,
    /// Reduction divisor applied to `a` per consecutive backtrack.
    pub rho_alpha: f64,
    /// Divisor for the downward phase of the initial step search. Coarser
    /// than `theta` so the search costs a handful of objective evaluations
    /// even when the admissible step is orders of magnitude below one.
    pub search_down: f64,
    /// Lowest step considered by the initial search.
    pub alpha_floor: f64,
    /// Use the squared gradient norm in the sufficient-decrease condition
    /// (classical Armijo) instead of the plain norm.
    pub armijo_squared: bool,
}

impl Default for AlphaPolicy {
    fn default() -> Self {
        Self {
            c_ag: 0.25,
            l_n: 2.0,
            theta: 1.5,
            l_sigma_lower: 1.0,
            l_sigma_upper: 2.0,
            alpha_cap: 1.0,
            rho_alpha: 2.0,
            search_down: 4.0,
            alpha_floor: 1e-12,
            armijo_squared: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum DescentError {
    /// No step down to the floor satisfied both initial-step conditions.
    #[error("no admissible initial step above {floor:e} (gradient norm {grad_norm:e})")]
    NoAdmissibleStep { floor: f64, grad_norm: f64 },
    #[error(transparent)]
    Config(#[from] crate::solver::ConfigError),
}

/// Largest step on the geometric grid satisfying both conditions:
/// sufficient decrease `f(x - a g) <= f(x) - c a |g|` and bounded gradient
/// growth `|grad f(x - a g)| <= L_n |g|`.
///
/// Searches upward from 1 by `theta` while both conditions hold, otherwise
/// downward by `search_down` until they do. Bounded problems evaluate the
/// conditions at the clamped trial point, since that is the point the
/// mapping would actually produce. Returns the step together with the
/// evaluation counts spent: (alpha, objective evals, gradient evals).
pub fn initial_alpha(
    problem: &DescentProblem,
    x0: &[f64],
    policy: &AlphaPolicy,
    bounds: Option<&BoxBounds>,
) -> Result<(f64, u64, u64), DescentError> {
    let n = problem.dim();
    let mut objs = 0u64;
    let mut grads = 0u64;
    let f0 = problem.objective(x0);
    objs += 1;
    let mut g0 = vec![0.0; n];
    problem.gradient(x0, &mut g0);
    grads += 1;
    let gn0 = norm2(&g0);
    if gn0 == 0.0 {
        // Already stationary; the caller reports immediate convergence.
        return Ok((0.0, objs, grads));
    }
    let decrease_scale = if policy.armijo_squared { gn0 * gn0 } else { gn0 };

    let mut trial = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut admissible = |alpha: f64, objs: &mut u64, grads: &mut u64| -> bool {
        for j in 0..n {
            trial[j] = x0[j] - alpha * g0[j];
        }
        if let Some(b) = bounds {
            let prop = trial.clone();
            apply_bounds(x0, &prop, b, &mut trial);
        }
        let ft = problem.objective(&trial);
        *objs += 1;
        if !ft.is_finite() || ft > f0 - policy.c_ag * alpha * decrease_scale {
            return false;
        }
        problem.gradient(&trial, &mut gt);
        *grads += 1;
        all_finite(&gt) && norm2(&gt) <= policy.l_n * gn0
    };

    let mut alpha = 1.0;
    if admissible(alpha, &mut objs, &mut grads) {
        while alpha < 2f64.powi(60) {
            let next = alpha * policy.theta;
            if admissible(next, &mut objs, &mut grads) {
                alpha = next;
            } else {
                break;
            }
        }
        Ok((alpha, objs, grads))
    } else {
        loop {
            alpha /= policy.search_down;
            if alpha < policy.alpha_floor {
                return Err(DescentError::NoAdmissibleStep {
                    floor: policy.alpha_floor,
                    grad_norm: gn0,
                });
            }
            if admissible(alpha, &mut objs, &mut grads) {
                return Ok((alpha, objs, grads));
            }
        }
    }
}

/// One adaptation step for the descent step size.
///
/// The secant step length behaves like `1 / (a * curvature)`: values above
/// the band flag a step size too small for the local curvature and values
/// below the band flag one too large, so `a` moves toward the band by a
/// factor `theta` and holds inside it.
pub fn adapt_alpha(alpha: f64, sigma: f64, policy: &AlphaPolicy) -> f64 {
    if sigma > policy.l_sigma_upper {
        alpha * policy.theta
    } else if sigma < policy.l_sigma_lower {
        alpha / policy.theta
    } else {
        alpha
    }
}

/// Guard for differences below machine precision: force a unit step length
/// and grow the descent step, doubling harder on each recurrence.
///
/// Returns `(sigma, next alpha, next occurrence count)`.
pub fn tiny_difference_guard(alpha: f64, t: u32, policy: &AlphaPolicy) -> (f64, f64, u32) {
    let next = policy.alpha_cap.min(2f64.powi(1 + t as i32) * alpha);
    (1.0, next, t + 1)
}

/// Order for the first cycle of a leading order-3 schedule: a squared step
/// length below one signals an oversized descent step, and the run opens
/// with a squared extrapolation instead.
pub fn first_cycle_order(sigma2: f64) -> usize {
    if sigma2 < 1.0 {
        2
    } else {
        3
    }
}

/// The fixed-point mapping `x -> clamp(x - a grad f(x))`.
///
/// Implements the solver hooks: per-cycle step adaptation, the
/// tiny-difference guard, step reduction on backtracks and the soft start.
pub struct DescentMapping<'p> {
    problem: &'p DescentProblem,
    policy: AlphaPolicy,
    bounds: Option<BoxBounds>,
    alpha: f64,
    pending_alpha: f64,
    tiny_count: u32,
    grad_evals: u64,
    grad_buf: Vec<f64>,
    soft_start: bool,
}

impl<'p> DescentMapping<'p> {
    pub fn new(
        problem: &'p DescentProblem,
        alpha0: f64,
        policy: AlphaPolicy,
        bounds: Option<BoxBounds>,
        soft_start: bool,
    ) -> Self {
        let n = problem.dim();
        Self {
            problem,
            policy,
            bounds,
            alpha: alpha0,
            pending_alpha: alpha0,
            tiny_count: 0,
            grad_evals: 0,
            grad_buf: vec![0.0; n],
            soft_start,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals
    }
}

impl Mapping for DescentMapping<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        self.problem.gradient(x, &mut self.grad_buf);
        self.grad_evals += 1;
        for j in 0..x.len() {
            out[j] = x[j] - self.alpha * self.grad_buf[j];
        }
        if let Some(b) = &self.bounds {
            let prop = out.to_vec();
            apply_bounds(x, &prop, b, out);
        }
    }

    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        Some(self.problem.objective(x))
    }

    fn residual_scale(&self) -> f64 {
        self.alpha
    }

    fn cycle_finished(&mut self, sigma: f64) {
        self.pending_alpha = adapt_alpha(self.alpha, sigma, &self.policy);
        self.alpha = self.pending_alpha;
    }

    fn tiny_difference(&mut self) {
        let (_, next, t) = tiny_difference_guard(self.alpha, self.tiny_count, &self.policy);
        self.alpha = next;
        self.tiny_count = t;
    }

    fn backtracked(&mut self, _streak: u32) {
        self.alpha /= self.policy.rho_alpha;
    }

    fn prefers_soft_start(&self) -> bool {
        self.soft_start
    }
}

/// Minimizes a descent problem with the extrapolated gradient mapping.
///
/// Picks the initial step with [`initial_alpha`], then drives
/// [`crate::solver::solve`] over the descent mapping. The configured
/// tolerance applies to the gradient norm (the mapping residual divided by
/// the current step). Gradient and objective evaluation counters include the
/// initial step search.
pub fn minimize(
    problem: &DescentProblem,
    x0: &[f64],
    cfg: &crate::solver::AcxConfig,
    policy: &AlphaPolicy,
) -> Result<RunReport, DescentError> {
    let (alpha0, search_objs, search_grads) =
        initial_alpha(problem, x0, policy, cfg.bounds.as_ref())?;
    if alpha0 == 0.0 {
        // Zero gradient at the start: nothing to do.
        return Ok(RunReport {
            x_final: x0.to_vec(),
            status: crate::solver::RunStatus::Converged,
            maps: 0,
            grad_evals: search_grads,
            objective_evals: search_objs,
            iterations: 0,
            final_residual: 0.0,
            final_objective: Some(problem.objective(x0)),
            backtracks: 0,
            trajectory: None,
        });
    }
    let soft_start = cfg.schedule.order_at(0) == 3;
    let mut mapping = DescentMapping::new(
        problem,
        alpha0,
        policy.clone(),
        cfg.bounds.clone(),
        soft_start,
    );
    // The mapping clamps every gradient step itself; the solver still clamps
    // extrapolated points, so keep the bounds in the config too.
    let mut report = crate::solver::solve(&mut mapping, x0, cfg)?;
    report.grad_evals = mapping.grad_evals() + search_grads;
    report.objective_evals += search_objs;
    report.final_objective = Some(problem.objective(&report.x_final));
    Ok(report)
}
