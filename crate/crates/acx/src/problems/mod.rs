//! Benchmark problem catalog with deterministic seeded generators.
//!
//! Every problem is addressable by name (`linquad`, `rosenbrock`,
//! `rosenbrock-box`, `logistic`, `admixture`, `power`, `altproj`) and
//! instantiates from a `(name, dim, seed)` triple into bit-identical data,
//! so benchmark runs are reproducible by construction.

mod admixture;
mod altproj;
mod baselines;
mod linquad;
mod logistic;
mod power;
mod rosenbrock;

pub use admixture::{
    admixture_nll, em_update, poisson_admixture, AdmixtureData, DomainError, DEATH_NOTICES,
};
pub use altproj::{alternating_projections, AltProjProblem};
pub use baselines::{barzilai_borwein, steepest_descent, BbVariant, StopRule};
pub use linquad::{linear_quadratic, LinearQuadratic};
pub use logistic::logistic_regression;
pub use power::{power_method, CsrMatrix, PowerProblem};
pub use rosenbrock::rosenbrock;

use crate::descent::DescentProblem;
use crate::solver::{BoxBounds, Mapping, Norm};
use thiserror::Error;

/// Names accepted by [`instantiate`] and the CLI.
pub const PROBLEM_NAMES: [&str; 7] = [
    "linquad",
    "rosenbrock",
    "rosenbrock-box",
    "logistic",
    "admixture",
    "power",
    "altproj",
];

/// Identifies one reproducible problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    /// Parameter count where it applies; `None` picks the problem default.
    pub dim: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown problem '{0}' (known: linquad, rosenbrock, rosenbrock-box, logistic, admixture, power, altproj)")]
    UnknownProblem(String),
    #[error("problem '{name}' rejects dimension {dim}: {reason}")]
    BadDimension {
        name: String,
        dim: usize,
        reason: String,
    },
}

/// A fixed-point map given as plain callbacks, with an optional objective
/// used for best-iterate tracking and reporting.
pub struct MappingProblem {
    dim: usize,
    map: crate::descent::VectorFn,
    objective: Option<crate::descent::ObjectiveFn>,
}

impl MappingProblem {
    pub fn new(dim: usize, map: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            map: Box::new(map),
            objective: None,
        }
    }

    pub fn with_objective(
        mut self,
        objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.objective = Some(Box::new(objective));
        self
    }
}

impl std::fmt::Debug for MappingProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MappingProblem")
            .field("dim", &self.dim)
            .finish()
    }
}

impl Mapping for MappingProblem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&mut self, x: &[f64], out: &mut [f64]) {
        (self.map)(x, out)
    }
    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        self.objective.as_ref().map(|f| f(x))
    }
}

#[derive(Debug)]
pub enum ProblemKind {
    Mapping(MappingProblem),
    Descent(DescentProblem),
}

/// One draw of a catalog problem: the map or objective, the start point and
/// the solver settings the benchmark uses for it.
#[derive(Debug)]
pub struct ProblemInstance {
    pub name: &'static str,
    pub kind: ProblemKind,
    pub x0: Vec<f64>,
    pub bounds: Option<BoxBounds>,
    pub stabilize: bool,
    pub tol: f64,
    pub norm: Norm,
    /// Present for the linear-quadratic problem; the gradient baselines run
    /// against it.
    pub quadratic: Option<LinearQuadratic>,
}

impl ProblemInstance {
    /// Objective value used for reporting and the discrepancy filter.
    pub fn report_objective(&mut self, x: &[f64]) -> Option<f64> {
        match &mut self.kind {
            ProblemKind::Mapping(m) => m.objective(x),
            ProblemKind::Descent(d) => Some(d.objective(x)),
        }
    }
}

/// SplitMix64; the standard 64-bit seed scrambler.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic per-cell seed: mixes the suite seed, problem name and draw
/// index so cells are independent but reproducible.
pub fn cell_seed(seed: u64, name: &str, draw: u32) -> u64 {
    splitmix64(seed ^ fnv1a(name) ^ splitmix64(draw as u64))
}

/// Builds one problem instance. Same `(name, dim, seed)` always produces
/// bit-identical data.
pub fn instantiate(
    name: &str,
    dim: Option<usize>,
    seed: u64,
) -> Result<ProblemInstance, CatalogError> {
    match name {
        "linquad" => linquad::instantiate(dim, seed),
        "rosenbrock" => rosenbrock::instantiate(dim, seed, false),
        "rosenbrock-box" => rosenbrock::instantiate(dim, seed, true),
        "logistic" => logistic::instantiate(dim, seed),
        "admixture" => admixture::instantiate(dim, seed),
        "power" => power::instantiate(dim, seed),
        "altproj" => altproj::instantiate(dim, seed),
        other => Err(CatalogError::UnknownProblem(other.to_string())),
    }
}
