//! Alternating projections for two-way fixed-effects demeaning.
//!
//! One mapping application demeans the residual vector against each grouping
//! factor in sequence; the fixed point is the vector orthogonal to every
//! group indicator (the within transformation). The synthetic panel
//! generator controls how strongly the two factors overlap: high locality
//! makes the factor dummies near-collinear, which is the slow case for the
//! unaccelerated iteration.

use super::{CatalogError, MappingProblem, ProblemInstance, ProblemKind};
use crate::solver::Norm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A panel with two grouping factors and an outcome vector to demean.
#[derive(Debug, Clone)]
pub struct AltProjProblem {
    /// Group id per observation, one vector per factor.
    pub factors: Vec<Vec<u32>>,
    /// Number of groups per factor.
    pub sizes: Vec<usize>,
    /// The raw outcome vector (the iteration's start point).
    pub outcome: Vec<f64>,
}

impl AltProjProblem {
    pub fn n_obs(&self) -> usize {
        self.outcome.len()
    }

    /// Demeans `v` in place against factor `f`.
    pub fn demean_factor(&self, f: usize, v: &mut [f64]) {
        let ids = &self.factors[f];
        let g = self.sizes[f];
        let mut sums = vec![0.0; g];
        let mut counts = vec![0u32; g];
        for (i, &id) in ids.iter().enumerate() {
            sums[id as usize] += v[i];
            counts[id as usize] += 1;
        }
        for k in 0..g {
            if counts[k] > 0 {
                sums[k] /= counts[k] as f64;
            }
        }
        for (i, &id) in ids.iter().enumerate() {
            v[i] -= sums[id as usize];
        }
    }

    /// Largest absolute group mean across all factors; zero at the joint
    /// fixed point.
    pub fn max_group_mean(&self, v: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for f in 0..self.factors.len() {
            let ids = &self.factors[f];
            let g = self.sizes[f];
            let mut sums = vec![0.0; g];
            let mut counts = vec![0u32; g];
            for (i, &id) in ids.iter().enumerate() {
                sums[id as usize] += v[i];
                counts[id as usize] += 1;
            }
            for k in 0..g {
                if counts[k] > 0 {
                    worst = worst.max((sums[k] / counts[k] as f64).abs());
                }
            }
        }
        worst
    }

    /// One full demeaning cycle as a fixed-point mapping, with half the
    /// squared norm as the reported objective (all algorithms meet at the
    /// joint projection, so discrepancies flag divergent runs).
    pub fn mapping_problem(self: &Arc<Self>) -> MappingProblem {
        let p = Arc::clone(self);
        MappingProblem::new(self.n_obs(), move |x, out| {
            out.copy_from_slice(x);
            for f in 0..p.factors.len() {
                p.demean_factor(f, out);
            }
        })
        .with_objective(|x| 0.5 * x.iter().map(|v| v * v).sum::<f64>())
    }
}

/// Synthetic unbalanced two-factor panel.
///
/// `locality` in [0,1] is the probability that an observation's second
/// factor falls in a small window aligned with its first factor; 0 gives an
/// essentially crossed design, values near 1 give nearly nested factors and
/// a small Friedrichs angle.
pub fn alternating_projections(
    n_obs: usize,
    groups: (usize, usize),
    locality: f64,
    seed: u64,
) -> AltProjProblem {
    let (g1, g2) = groups;
    assert!(g1 >= 2 && g2 >= 2 && n_obs >= g1.max(g2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f1: Vec<u32> = (0..n_obs).map(|_| rng.random_range(0..g1 as u32)).collect();
    let window = (g2 / 20).max(2) as u32;
    let f2: Vec<u32> = f1
        .iter()
        .map(|&a| {
            if rng.random_range(0.0..1.0) < locality {
                let base = (a as usize * g2 / g1) as u32;
                (base + rng.random_range(0..window)) % g2 as u32
            } else {
                rng.random_range(0..g2 as u32)
            }
        })
        .collect();
    // Outcome with effects from both factors plus noise.
    let a1: Vec<f64> = (0..g1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a2: Vec<f64> = (0..g2).map(|_| rng.random_range(-1.0..1.0)).collect();
    let outcome: Vec<f64> = (0..n_obs)
        .map(|i| a1[f1[i] as usize] + a2[f2[i] as usize] + rng.random_range(-1.0..1.0))
        .collect();
    AltProjProblem {
        factors: vec![f1, f2],
        sizes: vec![g1, g2],
        outcome,
    }
}

pub(super) fn instantiate(dim: Option<usize>, seed: u64) -> Result<ProblemInstance, CatalogError> {
    let n_obs = dim.unwrap_or(10_000);
    if n_obs < 200 {
        return Err(CatalogError::BadDimension {
            name: "altproj".into(),
            dim: n_obs,
            reason: "panel needs at least 200 observations".into(),
        });
    }
    let problem = Arc::new(alternating_projections(
        n_obs,
        (n_obs / 50, n_obs / 100),
        0.95,
        seed,
    ));
    let x0 = problem.outcome.clone();
    Ok(ProblemInstance {
        name: "altproj",
        kind: ProblemKind::Mapping(problem.mapping_problem()),
        x0,
        bounds: None,
        stabilize: false,
        tol: 1e-8,
        norm: Norm::Two,
        quadratic: None,
    })
}
