//! The chained Rosenbrock test function in its pairwise-separable form:
//! f(x) = sum over pairs of 100 (x_odd^2 - x_even)^2 + (x_odd - 1)^2.

use super::{CatalogError, ProblemInstance, ProblemKind};
use crate::descent::DescentProblem;
use crate::solver::{BoxBounds, Norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Objective and analytic gradient for `n` parameters (`n` even). The global
/// minimum is the all-ones vector with value zero.
pub fn rosenbrock(n: usize) -> DescentProblem {
    assert!(n >= 2 && n.is_multiple_of(2), "parameter count must be even");
    DescentProblem::new(
        n,
        move |x| {
            let mut f = 0.0;
            for i in (0..x.len()).step_by(2) {
                let (a, b) = (x[i], x[i + 1]);
                let t = a * a - b;
                f += 100.0 * t * t + (a - 1.0) * (a - 1.0);
            }
            f
        },
        move |x, g| {
            for i in (0..x.len()).step_by(2) {
                let (a, b) = (x[i], x[i + 1]);
                let t = a * a - b;
                g[i] = 400.0 * a * t + 2.0 * (a - 1.0);
                g[i + 1] = -200.0 * t;
            }
        },
    )
}

pub(super) fn instantiate(
    dim: Option<usize>,
    seed: u64,
    boxed: bool,
) -> Result<ProblemInstance, CatalogError> {
    let dim = dim.unwrap_or(1000);
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(CatalogError::BadDimension {
            name: if boxed { "rosenbrock-box" } else { "rosenbrock" }.into(),
            dim,
            reason: "parameter count must be even and at least 2".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if boxed {
        // Upper bounds inside the unit interval, starts below zero, and a
        // thin buffer so iterates can ride close to the active bounds.
        let upper: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
        let lower = vec![f64::NEG_INFINITY; dim];
        let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..0.0)).collect();
        let bounds = BoxBounds::new(lower, upper, 0.999).expect("valid box");
        Ok(ProblemInstance {
            name: "rosenbrock-box",
            kind: ProblemKind::Descent(rosenbrock(dim)),
            x0,
            bounds: Some(bounds),
            stabilize: false,
            tol: 1e-7,
            norm: Norm::Inf,
            quadratic: None,
        })
    } else {
        let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        Ok(ProblemInstance {
            name: "rosenbrock",
            kind: ProblemKind::Descent(rosenbrock(dim)),
            x0,
            bounds: None,
            stabilize: false,
            tol: 1e-7,
            norm: Norm::Inf,
            quadratic: None,
        })
    }
}
