//! Two-component Poisson admixture fitted by EM on the death-notice counts.
//!
//! The parameter vector is (mu1, mu2, pi): the two component means and the
//! mixing weight of component one. One EM step computes the posterior
//! weights of component one at each count and re-estimates the three
//! parameters in closed form; the negative log-likelihood is the tracked
//! objective.

use super::{CatalogError, MappingProblem, ProblemInstance, ProblemKind};
use crate::solver::{BoxBounds, Norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Observed death counts 0..=9 and their frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmixtureData {
    pub frequencies: [f64; 10],
}

impl AdmixtureData {
    pub fn total(&self) -> f64 {
        self.frequencies.iter().sum()
    }
}

/// The death-notice table: frequency of each observed count.
pub const DEATH_NOTICES: AdmixtureData = AdmixtureData {
    frequencies: [162.0, 267.0, 271.0, 185.0, 111.0, 61.0, 27.0, 8.0, 3.0, 1.0],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("parameters outside the domain: means must be positive and pi in (0,1)")]
pub struct DomainError;

/// One EM update of (mu1, mu2, pi).
pub fn em_update(params: &[f64; 3], data: &AdmixtureData) -> Result<[f64; 3], DomainError> {
    let [m1, m2, pi] = *params;
    if !(m1 > 0.0 && m2 > 0.0 && pi > 0.0 && pi < 1.0) {
        return Err(DomainError);
    }
    let (lm1, lm2) = (m1.ln(), m2.ln());
    let (lpi, lqi) = (pi.ln(), (1.0 - pi).ln());
    let mut sw = 0.0; // sum y_i w_i
    let mut swi = 0.0; // sum y_i i w_i
    let mut su = 0.0; // sum y_i (1 - w_i)
    let mut sui = 0.0; // sum y_i i (1 - w_i)
    for (i, &y) in data.frequencies.iter().enumerate() {
        let i_f = i as f64;
        let l1 = lpi - m1 + i_f * lm1;
        let l2 = lqi - m2 + i_f * lm2;
        let d = (l2 - l1).clamp(-700.0, 700.0);
        let w = 1.0 / (1.0 + d.exp());
        sw += y * w;
        swi += y * i_f * w;
        su += y * (1.0 - w);
        sui += y * i_f * (1.0 - w);
    }
    if sw <= 0.0 || su <= 0.0 {
        return Err(DomainError);
    }
    Ok([swi / sw, sui / su, sw / data.total()])
}

/// Negative log-likelihood of the full Poisson mixture (including the
/// factorial terms, so values are comparable across parameterizations).
pub fn admixture_nll(params: &[f64], data: &AdmixtureData) -> f64 {
    let (m1, m2, pi) = (params[0], params[1], params[2]);
    if !(m1 > 0.0 && m2 > 0.0 && pi > 0.0 && pi < 1.0) {
        return f64::INFINITY;
    }
    let mut log_fact = 0.0;
    let mut acc = 0.0;
    for (i, &y) in data.frequencies.iter().enumerate() {
        if i > 0 {
            log_fact += (i as f64).ln();
        }
        let i_f = i as f64;
        let l1 = pi.ln() - m1 + i_f * m1.ln() - log_fact;
        let l2 = (1.0 - pi).ln() - m2 + i_f * m2.ln() - log_fact;
        // log(e^l1 + e^l2) via the larger exponent
        let (hi, lo) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
        acc += y * (hi + (lo - hi).exp().ln_1p());
    }
    -acc
}

/// The EM mapping over (mu1, mu2, pi) with the likelihood as objective.
pub fn poisson_admixture() -> MappingProblem {
    let data = DEATH_NOTICES;
    MappingProblem::new(3, move |x, out| {
        match em_update(&[x[0], x[1], x[2]], &data) {
            Ok(next) => out.copy_from_slice(&next),
            Err(DomainError) => out.fill(f64::NAN),
        }
    })
    .with_objective(move |x| admixture_nll(x, &DEATH_NOTICES))
}

pub(super) fn instantiate(dim: Option<usize>, seed: u64) -> Result<ProblemInstance, CatalogError> {
    if let Some(d) = dim {
        if d != 3 {
            return Err(CatalogError::BadDimension {
                name: "admixture".into(),
                dim: d,
                reason: "the admixture model has exactly 3 parameters".into(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = vec![
        rng.random_range(0.0..20.0),
        rng.random_range(0.0..20.0),
        rng.random_range(0.05..0.95),
    ];
    let bounds = BoxBounds::new(
        vec![0.0, 0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY, 1.0],
        0.9,
    )
    .expect("valid box");
    Ok(ProblemInstance {
        name: "admixture",
        kind: ProblemKind::Mapping(poisson_admixture()),
        x0,
        bounds: Some(bounds),
        stabilize: true,
        tol: 1e-7,
        norm: Norm::Inf,
        quadratic: None,
    })
}
