//! The extrapolation driver: order cycling plus the stability devices —
//! step-length constraining, stabilization mappings, box bounds with a
//! buffer, best-iterate tracking and backtracking.

use crate::extrapolation::{
    extrapolate, step_length, DifferenceStack, InvalidSchedule, OrderSchedule, StepLengthKind,
};
use crate::vecmath::{all_finite, next_down, next_up, norm_inf, norm2};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

/// A fixed-point map over dense `f64` vectors.
///
/// `apply` must preserve dimension; it signals failure by writing NaN or
/// infinity, which the driver answers with a backtrack. The remaining
/// methods are hooks with no-op defaults: adapters that carry internal state
/// (the gradient-descent step size in particular) use them to stay in sync
/// with the cycle structure.
pub trait Mapping {
    fn dim(&self) -> usize;

    fn apply(&mut self, x: &[f64], out: &mut [f64]);

    /// Objective value at `x`, when the problem has one.
    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        let _ = x;
        None
    }

    /// Scale relating the raw residual `|F(x) - x|` to the convergence
    /// metric. Gradient-descent mappings return the current descent step so
    /// that tolerances apply to the gradient norm itself.
    fn residual_scale(&self) -> f64 {
        1.0
    }

    /// Called once after each completed extrapolation cycle with the step
    /// length actually applied.
    fn cycle_finished(&mut self, sigma: f64) {
        let _ = sigma;
    }

    /// Called when the p-th difference fell below the machine-precision
    /// floor (the driver substitutes a unit step for this cycle).
    fn tiny_difference(&mut self) {}

    /// Called on the `streak`-th consecutive backtrack since the last
    /// improvement of the tracked metric.
    fn backtracked(&mut self, streak: u32) {
        let _ = streak;
    }

    /// Whether the first cycle of a leading order-3 schedule should drop to
    /// order 2 when the squared step length signals an oversized mapping
    /// step. Gradient-descent adapters turn this on.
    fn prefers_soft_start(&self) -> bool {
        false
    }
}

impl<M: Mapping + ?Sized> Mapping for &mut M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        (**self).apply(x, out)
    }
    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        (**self).objective(x)
    }
    fn residual_scale(&self) -> f64 {
        (**self).residual_scale()
    }
    fn cycle_finished(&mut self, sigma: f64) {
        (**self).cycle_finished(sigma)
    }
    fn tiny_difference(&mut self) {
        (**self).tiny_difference()
    }
    fn backtracked(&mut self, streak: u32) {
        (**self).backtracked(streak)
    }
    fn prefers_soft_start(&self) -> bool {
        (**self).prefers_soft_start()
    }
}

/// Norm used for residuals and convergence checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Inf,
    Two,
}

impl Norm {
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            Norm::Inf => norm_inf(v),
            Norm::Two => norm2(v),
        }
    }

    fn eval_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Inf => a
                .iter()
                .zip(b)
                .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs())),
            Norm::Two => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" => Ok(Norm::Inf),
            "two" | "2" => Ok(Norm::Two),
            other => Err(format!("unknown norm '{other}' (expected inf or two)")),
        }
    }
}

/// Per-coordinate box with a buffer: one step may cover at most the fraction
/// `omega` of the remaining distance to either bound. Infinite entries
/// deactivate the corresponding side.
#[derive(Debug, Clone)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub omega: f64,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, omega: f64) -> Result<Self, ConfigError> {
        if lower.len() != upper.len() {
            return Err(ConfigError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if omega.is_nan() || omega <= 0.0 || omega >= 1.0 {
            return Err(ConfigError::BadOmega(omega));
        }
        // NaN bounds fail this check too.
        if let Some(i) =
            (0..lower.len()).find(|&i| lower[i].partial_cmp(&upper[i]) != Some(Ordering::Less))
        {
            return Err(ConfigError::EmptyBox { index: i });
        }
        Ok(Self {
            lower,
            upper,
            omega,
        })
    }

    /// Same scalar interval for every coordinate.
    pub fn uniform(lo: f64, hi: f64, omega: f64, dim: usize) -> Result<Self, ConfigError> {
        Self::new(vec![lo; dim], vec![hi; dim], omega)
    }

    pub fn contains_strict(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| v > lo && v < hi)
    }
}

/// Clamps a proposed iterate against the box, relative to the previous one.
///
/// Per coordinate the result is
/// `max(min(prop, w*hi + (1-w)*prev), w*lo + (1-w)*prev)`, so a step covers
/// at most the fraction `omega` of the remaining distance to either bound.
/// The output is additionally kept one ulp inside any finite bound, which
/// keeps iterates strictly interior even once the remaining distance rounds
/// away.
pub fn apply_bounds(x_prev: &[f64], x_prop: &[f64], b: &BoxBounds, out: &mut [f64]) {
    let w = b.omega;
    for j in 0..x_prop.len() {
        let mut v = x_prop[j];
        let (lo, hi) = (b.lower[j], b.upper[j]);
        if hi.is_finite() {
            v = v.min(w * hi + (1.0 - w) * x_prev[j]);
            if v >= hi {
                v = next_down(hi);
            }
        }
        if lo.is_finite() {
            v = v.max(w * lo + (1.0 - w) * x_prev[j]);
            if v <= lo {
                v = next_up(lo);
            }
        }
        out[j] = v;
    }
}

/// Which metric picks the best iterate (and the reported final point).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrackBest {
    /// Residual norm, divided by the mapping's residual scale (so it is the
    /// gradient norm on descent mappings).
    #[default]
    ResidualNorm,
    /// Objective value; requires the mapping to expose one.
    Objective,
}

/// Driver configuration. `Default` gives the general-purpose setup:
/// schedule (3,2), absolute secant steps, inf-norm tolerance 1e-7.
#[derive(Debug, Clone)]
pub struct AcxConfig {
    pub schedule: OrderSchedule,
    pub step_kind: StepLengthKind,
    /// Lower constraint on the step length (`max(sigma_min, sigma)`), for
    /// mappings with guaranteed progress such as EM.
    pub sigma_min: Option<f64>,
    /// Apply one extra mapping before each cycle and extrapolate from its
    /// image.
    pub stabilize: bool,
    pub bounds: Option<BoxBounds>,
    pub tol: f64,
    pub norm: Norm,
    pub max_maps: u64,
    /// Backtracking reduction divisor: after t consecutive failures the step
    /// lengths are scaled by (1/rho_sigma)^t.
    pub rho_sigma: f64,
    /// Consecutive backtracks tolerated before giving up.
    pub backtrack_cap: u32,
    pub track_best_by: TrackBest,
    /// Record one (residual, objective) sample per cycle.
    pub record_trajectory: bool,
}

impl Default for AcxConfig {
    fn default() -> Self {
        Self {
            schedule: OrderSchedule::new(vec![3, 2]).unwrap(),
            step_kind: StepLengthKind::AbsP,
            sigma_min: None,
            stabilize: false,
            bounds: None,
            tol: 1e-7,
            norm: Norm::Inf,
            max_maps: 100_000,
            rho_sigma: 2.0,
            backtrack_cap: 30,
            track_best_by: TrackBest::ResidualNorm,
            record_trajectory: false,
        }
    }
}

impl AcxConfig {
    pub fn with_schedule(orders: &[usize]) -> Result<Self, InvalidSchedule> {
        Ok(Self {
            schedule: OrderSchedule::new(orders.to_vec())?,
            ..Self::default()
        })
    }

    fn validate(&self, dim: usize) -> Result<(), ConfigError> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ConfigError::BadTolerance(self.tol));
        }
        if self.max_maps < self.schedule.max_order() as u64 {
            return Err(ConfigError::BadMapBudget(self.max_maps));
        }
        if self.rho_sigma.is_nan() || self.rho_sigma <= 1.0 {
            return Err(ConfigError::BadRho(self.rho_sigma));
        }
        if let Some(s) = self.sigma_min {
            if s.is_nan() || s < 0.0 {
                return Err(ConfigError::BadSigmaMin(s));
            }
        }
        if let Some(b) = &self.bounds {
            if b.lower.len() != dim {
                return Err(ConfigError::DimensionMismatch {
                    expected: dim,
                    got: b.lower.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Schedule(#[from] InvalidSchedule),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("max_maps ({0}) is below the largest scheduled order")]
    BadMapBudget(u64),
    #[error("backtracking divisor must exceed 1, got {0}")]
    BadRho(f64),
    #[error("sigma_min must be nonnegative, got {0}")]
    BadSigmaMin(f64),
    #[error("omega must lie in (0,1), got {0}")]
    BadOmega(f64),
    #[error("box is empty at coordinate {index}")]
    EmptyBox { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("starting point is not finite")]
    BadStart,
    #[error("starting point violates the bounds")]
    StartOutOfBounds,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    MaxMapsExceeded,
    /// More consecutive backtracks than the configured cap.
    BacktrackingFailed,
}

/// One trajectory sample, recorded per extrapolation cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u64,
    pub residual: f64,
    pub objective: Option<f64>,
}

/// Outcome of a run: the best iterate seen, status and effort counters.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub x_final: Vec<f64>,
    pub status: RunStatus,
    /// Number of mapping applications.
    pub maps: u64,
    /// Gradient evaluations (filled in by the descent adapter; equals 0 for
    /// plain mappings).
    pub grad_evals: u64,
    pub objective_evals: u64,
    /// Completed extrapolation cycles.
    pub iterations: u64,
    /// Scaled residual norm at the best iterate.
    pub final_residual: f64,
    pub final_objective: Option<f64>,
    pub backtracks: u64,
    pub trajectory: Option<Vec<TracePoint>>,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

/// True iff `delta` is within tolerance in the configured norm.
pub fn check_convergence(delta: &[f64], cfg: &AcxConfig) -> bool {
    cfg.norm.eval(delta) <= cfg.tol
}

/// Lower-constrains a step length when the config asks for it.
pub fn constrain_sigma(sigma: f64, cfg: &AcxConfig) -> f64 {
    match cfg.sigma_min {
        Some(m) => sigma.max(m),
        None => sigma,
    }
}

struct BestIterate {
    x: Vec<f64>,
    metric: f64,
    residual: f64,
}

/// Runs the alternating cyclic extrapolation driver.
///
/// Cycles build a difference stack from the current point (checking each
/// fresh residual against the tolerance), compute a constrained step length,
/// extrapolate, clamp against any bounds and repeat, cycling the order
/// schedule. Non-finite mappings or extrapolations restart from the best
/// iterate with geometrically reduced steps. The report always carries the
/// best iterate seen under the tracked metric.
pub fn solve<M: Mapping + ?Sized>(
    map: &mut M,
    x0: &[f64],
    cfg: &AcxConfig,
) -> Result<RunReport, ConfigError> {
    let n = x0.len();
    if n != map.dim() {
        return Err(ConfigError::DimensionMismatch {
            expected: map.dim(),
            got: n,
        });
    }
    cfg.validate(n)?;
    if !all_finite(x0) {
        return Err(ConfigError::BadStart);
    }
    if let Some(b) = &cfg.bounds {
        if !b.contains_strict(x0) {
            return Err(ConfigError::StartOutOfBounds);
        }
    }

    let mut x = x0.to_vec();
    let mut stack = DifferenceStack::new(&x, 2);
    let mut fx = vec![0.0; n];
    let mut xnext = vec![0.0; n];

    let mut best = BestIterate {
        x: x.clone(),
        metric: f64::INFINITY,
        residual: f64::INFINITY,
    };
    let mut maps: u64 = 0;
    let mut objective_evals: u64 = 0;
    let mut iterations: u64 = 0;
    let mut backtracks: u64 = 0;
    let mut streak: u32 = 0;
    let mut sigma_scale = 1.0;
    let mut cycle: u64 = 0;
    let mut trajectory = cfg.record_trajectory.then(Vec::new);
    let status;

    // Tracks the best iterate; returns true when the scaled residual meets
    // the tolerance.
    macro_rules! observe {
        ($pt:expr, $resid:expr) => {{
            let scaled = $resid / map.residual_scale();
            let metric = match cfg.track_best_by {
                TrackBest::ResidualNorm => scaled,
                TrackBest::Objective => {
                    objective_evals += 1;
                    map.objective($pt).unwrap_or(scaled)
                }
            };
            if metric < best.metric {
                best.metric = metric;
                best.residual = scaled;
                best.x.clear();
                best.x.extend_from_slice($pt);
                if streak > 0 {
                    streak = 0;
                    sigma_scale = 1.0;
                }
            }
            scaled <= cfg.tol
        }};
    }

    macro_rules! backtrack {
        () => {{
            backtracks += 1;
            streak += 1;
            if streak > cfg.backtrack_cap {
                status = RunStatus::BacktrackingFailed;
                break;
            }
            sigma_scale = (1.0 / cfg.rho_sigma).powi(streak as i32);
            map.backtracked(streak);
            x.clear();
            x.extend_from_slice(&best.x);
            continue;
        }};
    }

    'outer: loop {
        if maps >= cfg.max_maps {
            status = RunStatus::MaxMapsExceeded;
            break;
        }
        let scheduled = cfg.schedule.order_at(cycle);
        let soft_start = map.prefers_soft_start() && cycle == 0 && scheduled == 3;

        // Optional stabilization mapping: the cycle base becomes F(x).
        if cfg.stabilize {
            map.apply(&x, &mut fx);
            maps += 1;
            if !all_finite(&fx) {
                backtrack!();
            }
            let resid = cfg.norm.eval_diff(&fx, &x);
            if observe!(&x, resid) {
                status = RunStatus::Converged;
                break;
            }
            std::mem::swap(&mut x, &mut fx);
        }

        stack.reset(&x, scheduled);
        let mut order = scheduled;
        let mut converged = false;
        let mut failed = false;
        while stack.maps_pushed() < order {
            map.apply(stack.last_point(), &mut fx);
            maps += 1;
            if !all_finite(&fx) {
                failed = true;
                break;
            }
            let resid = cfg.norm.eval_diff(&fx, stack.last_point());
            if observe!(stack.last_point(), resid) {
                converged = true;
                break;
            }
            stack.push_map(&fx);
            if soft_start && stack.maps_pushed() == 2 && order == 3 {
                // A squared step below one signals an oversized mapping
                // step; open with an order-2 cycle in that case.
                if let Ok(sl) = stack.step_length_at(2, cfg.step_kind) {
                    if crate::descent::first_cycle_order(sl.sigma) == 2 {
                        stack.truncate_order(2);
                        order = 2;
                    }
                }
            }
            if maps >= cfg.max_maps && stack.maps_pushed() < order {
                status = RunStatus::MaxMapsExceeded;
                break 'outer;
            }
        }
        if converged {
            status = RunStatus::Converged;
            break;
        }
        if failed {
            backtrack!();
        }

        let mut tiny = false;
        let sigma = match step_length(&stack, cfg.step_kind) {
            Ok(sl) => {
                let s = constrain_sigma(sl.sigma, cfg) * sigma_scale;
                if !s.is_finite() {
                    backtrack!();
                }
                s
            }
            Err(_) => {
                tiny = true;
                map.tiny_difference();
                1.0
            }
        };

        extrapolate(&stack, sigma, &mut xnext);
        if let Some(b) = &cfg.bounds {
            let prop = xnext.clone();
            apply_bounds(stack.base(), &prop, b, &mut xnext);
        }
        if !all_finite(&xnext) {
            backtrack!();
        }
        if !tiny {
            map.cycle_finished(sigma);
        }
        if let Some(tr) = trajectory.as_mut() {
            let objective = map.objective(&xnext);
            if objective.is_some() {
                objective_evals += 1;
            }
            tr.push(TracePoint {
                iteration: iterations,
                residual: best.residual,
                objective,
            });
        }
        std::mem::swap(&mut x, &mut xnext);
        iterations += 1;
        cycle += 1;
    }

    let final_objective = map.objective(&best.x);
    Ok(RunReport {
        x_final: best.x,
        status,
        maps,
        grad_evals: 0,
        objective_evals,
        iterations,
        final_residual: best.residual,
        final_objective,
        backtracks,
        trajectory,
    })
}

/// The unaccelerated baseline: iterate `x <- F(x)` until the residual meets
/// the tolerance or the map budget runs out.
pub fn fixed_point_iterate<M: Mapping + ?Sized>(
    map: &mut M,
    x0: &[f64],
    tol: f64,
    norm: Norm,
    max_maps: u64,
) -> RunReport {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = vec![0.0; n];
    let mut maps = 0u64;
    let status = loop {
        if maps >= max_maps {
            break RunStatus::MaxMapsExceeded;
        }
        map.apply(&x, &mut fx);
        maps += 1;
        if !all_finite(&fx) {
            break RunStatus::BacktrackingFailed;
        }
        let resid = norm.eval_diff(&fx, &x);
        std::mem::swap(&mut x, &mut fx);
        if resid <= tol {
            break RunStatus::Converged;
        }
    };
    let final_residual = {
        let mut d = vec![0.0; n];
        for j in 0..n {
            d[j] = fx[j] - x[j];
        }
        norm.eval(&d)
    };
    let final_objective = map.objective(&x);
    RunReport {
        x_final: x,
        status,
        maps,
        grad_evals: 0,
        objective_evals: 0,
        iterations: maps,
        final_residual,
        final_objective,
        backtracks: 0,
        trajectory: None,
    }
}
