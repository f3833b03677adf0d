//! Simulated logistic regression: negative log-likelihood and its gradient.
//!
//! Coefficients and covariates are uniform on [-1, 1] with an intercept
//! column of ones; responses are Bernoulli draws from the implied
//! probabilities. The benchmark start point is the zero vector.

use super::{CatalogError, ProblemInstance, ProblemKind};
use crate::descent::DescentProblem;
use crate::solver::Norm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

struct Data {
    rows: usize,
    cols: usize,
    x: Vec<f64>, // row-major rows x cols
    y: Vec<f64>,
}

impl Data {
    fn simulate(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta_true: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut x = vec![0.0; rows * cols];
        for i in 0..rows {
            x[i * cols] = 1.0;
            for j in 1..cols {
                x[i * cols + j] = rng.random_range(-1.0..1.0);
            }
        }
        let y: Vec<f64> = (0..rows)
            .map(|i| {
                let z: f64 = (0..cols).map(|j| x[i * cols + j] * beta_true[j]).sum();
                let p = 1.0 / (1.0 + (-z).exp());
                if rng.random_range(0.0..1.0) < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self { rows, cols, x, y }
    }

    /// log(1 + e^z) without overflow.
    fn log1p_exp(z: f64) -> f64 {
        if z > 0.0 {
            z + (-z).exp().ln_1p()
        } else {
            z.exp().ln_1p()
        }
    }

    fn nll(&self, beta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            let z: f64 = (0..self.cols)
                .map(|j| self.x[i * self.cols + j] * beta[j])
                .sum();
            acc += Self::log1p_exp(z) - self.y[i] * z;
        }
        acc
    }

    fn grad(&self, beta: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.rows {
            let z: f64 = (0..self.cols)
                .map(|j| self.x[i * self.cols + j] * beta[j])
                .sum();
            let p = 1.0 / (1.0 + (-z).exp());
            let r = p - self.y[i];
            let row = &self.x[i * self.cols..(i + 1) * self.cols];
            for (o, xv) in out.iter_mut().zip(row) {
                *o += xv * r;
            }
        }
    }
}

/// Simulates a dataset with `rows` observations and `cols` coefficients and
/// returns the negative log-likelihood problem.
pub fn logistic_regression(rows: usize, cols: usize, seed: u64) -> DescentProblem {
    assert!(rows > cols && cols >= 2, "need rows > cols >= 2");
    let data = Arc::new(Data::simulate(rows, cols, seed));
    let d1 = Arc::clone(&data);
    DescentProblem::new(
        cols,
        move |beta| data.nll(beta),
        move |beta, g| d1.grad(beta, g),
    )
}

pub(super) fn instantiate(dim: Option<usize>, seed: u64) -> Result<ProblemInstance, CatalogError> {
    let cols = dim.unwrap_or(100);
    if cols < 2 {
        return Err(CatalogError::BadDimension {
            name: "logistic".into(),
            dim: cols,
            reason: "needs at least an intercept and one covariate".into(),
        });
    }
    let rows = 20 * cols;
    Ok(ProblemInstance {
        name: "logistic",
        kind: ProblemKind::Descent(logistic_regression(rows, cols, seed)),
        x0: vec![0.0; cols],
        bounds: None,
        stabilize: false,
        tol: 1e-7,
        norm: Norm::Inf,
        quadratic: None,
    })
}
