//! Diagonal linear-quadratic test problem: f(x) = x'Ax/2 - b'x with
//! A = diag(eigs), equivalently the fixed-point map F(x) = x - (Ax - b).

use super::{CatalogError, MappingProblem, ProblemInstance, ProblemKind};
use crate::descent::DescentProblem;
use crate::solver::Norm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// The problem data: positive eigenvalues and the right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQuadratic {
    pub eigs: Vec<f64>,
    pub b: Vec<f64>,
}

impl LinearQuadratic {
    pub fn dim(&self) -> usize {
        self.eigs.len()
    }

    /// The known minimizer / fixed point x* = A^{-1} b.
    pub fn solution(&self) -> Vec<f64> {
        self.eigs.iter().zip(&self.b).map(|(l, b)| b / l).collect()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let quad: f64 = x.iter().zip(&self.eigs).map(|(v, l)| 0.5 * l * v * v).sum();
        let lin: f64 = x.iter().zip(&self.b).map(|(v, b)| v * b).sum();
        quad - lin
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for j in 0..x.len() {
            out[j] = self.eigs[j] * x[j] - self.b[j];
        }
    }

    /// Elliptic error norm sqrt(e' A^{-1} e) used by the contraction tests.
    pub fn elliptic_norm(&self, e: &[f64]) -> f64 {
        e.iter()
            .zip(&self.eigs)
            .map(|(v, l)| v * v / l)
            .sum::<f64>()
            .sqrt()
    }

    pub fn descent_problem(&self) -> DescentProblem {
        let data = Arc::new(self.clone());
        let d1 = Arc::clone(&data);
        DescentProblem::new(
            self.dim(),
            move |x| data.objective(x),
            move |x, g| d1.gradient(x, g),
        )
    }

    pub fn mapping_problem(&self) -> MappingProblem {
        let data = Arc::new(self.clone());
        let d1 = Arc::clone(&data);
        MappingProblem::new(self.dim(), move |x, out| {
            for j in 0..x.len() {
                out[j] = x[j] - (data.eigs[j] * x[j] - data.b[j]);
            }
        })
        .with_objective(move |x| d1.objective(x))
    }
}

/// Builds the problem from explicit eigenvalues and right-hand side.
pub fn linear_quadratic(eigs: &[f64], b: &[f64]) -> LinearQuadratic {
    assert_eq!(eigs.len(), b.len());
    assert!(eigs.iter().all(|&l| l > 0.0), "eigenvalues must be positive");
    LinearQuadratic {
        eigs: eigs.to_vec(),
        b: b.to_vec(),
    }
}

pub(super) fn instantiate(dim: Option<usize>, seed: u64) -> Result<ProblemInstance, CatalogError> {
    let dim = dim.unwrap_or(4);
    if dim == 0 {
        return Err(CatalogError::BadDimension {
            name: "linquad".into(),
            dim,
            reason: "needs at least one variable".into(),
        });
    }
    // Dimension 4 is the classic ill-conditioned instance; other sizes get
    // seeded spectra with condition number up to 100.
    let q = if dim == 4 {
        linear_quadratic(&[20.0, 10.0, 2.0, 1.0], &[1.0; 4])
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eigs: Vec<f64> = (0..dim)
            .map(|_| 10f64.powf(rng.random_range(0.0..2.0)))
            .collect();
        linear_quadratic(&eigs, &vec![1.0; dim])
    };
    Ok(ProblemInstance {
        name: "linquad",
        kind: ProblemKind::Mapping(q.mapping_problem()),
        x0: vec![0.0; dim],
        bounds: None,
        stabilize: false,
        tol: 1e-8,
        norm: Norm::Two,
        quadratic: Some(q),
    })
}
