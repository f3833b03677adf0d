//! Classical gradient baselines on the linear-quadratic problem: steepest
//! descent with the exact Cauchy step and the two-point spectral step
//! method, sharing the solver's report format so the harness can compare
//! them directly.

use super::linquad::LinearQuadratic;
use crate::solver::{Norm, RunReport, RunStatus};
use crate::vecmath::{dot, norm2};

/// Stopping rule for the baselines.
///
/// The historical experiments these counts come from ran steepest descent to
/// near machine precision and the spectral method to a relative gradient
/// tolerance, so both rules are available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Gradient norm below an absolute tolerance.
    GradAbs { tol: f64, norm: Norm },
    /// Gradient norm below `rel` times the starting gradient norm.
    GradRel { rel: f64, norm: Norm },
}

impl StopRule {
    fn threshold(&self, g0_norm: f64) -> f64 {
        match self {
            StopRule::GradAbs { tol, .. } => *tol,
            StopRule::GradRel { rel, .. } => rel * g0_norm,
        }
    }
    fn norm(&self) -> Norm {
        match self {
            StopRule::GradAbs { norm, .. } | StopRule::GradRel { norm, .. } => *norm,
        }
    }
}

fn report(q: &LinearQuadratic, x: Vec<f64>, grads: u64, resid: f64, conv: bool) -> RunReport {
    let final_objective = Some(q.objective(&x));
    RunReport {
        x_final: x,
        status: if conv {
            RunStatus::Converged
        } else {
            RunStatus::MaxMapsExceeded
        },
        maps: grads,
        grad_evals: grads,
        objective_evals: 0,
        iterations: grads,
        final_residual: resid,
        final_objective,
        backtracks: 0,
        trajectory: None,
    }
}

/// Steepest descent with the exact Cauchy step `a = g'g / g'Ag`.
pub fn steepest_descent(
    q: &LinearQuadratic,
    x0: &[f64],
    stop: StopRule,
    max_grads: u64,
) -> RunReport {
    let n = q.dim();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut grads = 0u64;
    let mut limit = f64::NAN;
    loop {
        q.gradient(&x, &mut g);
        grads += 1;
        if grads == 1 {
            limit = stop.threshold(norm2(&g));
        }
        let gn = stop.norm().eval(&g);
        if gn <= limit {
            return report(q, x, grads, gn, true);
        }
        if grads >= max_grads {
            return report(q, x, grads, gn, false);
        }
        let ag: Vec<f64> = g.iter().zip(&q.eigs).map(|(v, l)| l * v).collect();
        let alpha = dot(&g, &g) / dot(&g, &ag);
        for j in 0..n {
            x[j] -= alpha * g[j];
        }
    }
}

/// Which spectral step the two-point method reuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BbVariant {
    /// s's / s'y — the delayed Cauchy step on quadratics.
    #[default]
    Long,
    /// s'y / y'y.
    Short,
}

/// The two-point step-size gradient method: a first Cauchy step, then each
/// iteration reuses the secant information of the previous one.
pub fn barzilai_borwein(
    q: &LinearQuadratic,
    x0: &[f64],
    variant: BbVariant,
    stop: StopRule,
    max_grads: u64,
) -> RunReport {
    let n = q.dim();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    q.gradient(&x, &mut g);
    let mut grads = 1u64;
    let g0_norm = norm2(&g);
    let limit = stop.threshold(g0_norm);
    let mut gn = stop.norm().eval(&g);
    if gn <= limit {
        return report(q, x, grads, gn, true);
    }
    let ag: Vec<f64> = g.iter().zip(&q.eigs).map(|(v, l)| l * v).collect();
    let mut alpha = dot(&g, &g) / dot(&g, &ag);
    loop {
        let mut x_next = x.clone();
        for j in 0..n {
            x_next[j] -= alpha * g[j];
        }
        let mut g_next = vec![0.0; n];
        q.gradient(&x_next, &mut g_next);
        grads += 1;
        gn = stop.norm().eval(&g_next);
        if gn <= limit {
            return report(q, x_next, grads, gn, true);
        }
        if grads >= max_grads {
            return report(q, x_next, grads, gn, false);
        }
        let s: Vec<f64> = x_next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        alpha = match variant {
            BbVariant::Long => dot(&s, &s) / dot(&s, &y),
            BbVariant::Short => dot(&s, &y) / dot(&y, &y),
        };
        x = x_next;
        g = g_next;
    }
}
