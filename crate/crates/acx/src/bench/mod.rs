//! Benchmark harness: runs algorithm x problem x draw grids, filters draws
//! with discrepant final objectives, and computes performance-profile
//! curves from the timings.

mod io;
mod profile;

pub use io::{
    emit_curves_csv, emit_table_csv, emit_table_json, parse_table_csv, read_to_string_err, IoError,
};
pub use profile::{default_tau_grid, discrepancy_filter, performance_profile, ProfileCurve};

use crate::descent::{minimize, AlphaPolicy};
use crate::problems::{
    barzilai_borwein, cell_seed, instantiate, steepest_descent, BbVariant, CatalogError,
    ProblemInstance, ProblemKind, ProblemSpec, StopRule,
};
use crate::extrapolation::OrderSchedule;
use crate::solver::{fixed_point_iterate, AcxConfig, Norm, RunReport};
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};
use thiserror::Error;

pub use crate::extrapolation::OrderSchedule as Schedule;

/// An algorithm entry in a benchmark grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub kind: AlgorithmKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmKind {
    /// The extrapolated solver with the given order schedule.
    Acx { orders: Vec<usize> },
    /// Plain fixed-point iteration.
    Unaccelerated,
    /// Cauchy steepest descent (linear-quadratic problems only).
    SteepestDescent,
    /// Two-point spectral gradient method (linear-quadratic problems only).
    BarzilaiBorwein,
}

impl AlgorithmSpec {
    pub fn acx(name: &str, orders: &[usize]) -> Self {
        Self {
            name: name.to_string(),
            kind: AlgorithmKind::Acx {
                orders: orders.to_vec(),
            },
        }
    }
}

/// A full benchmark grid.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub problems: Vec<ProblemSpec>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub draws: u32,
    /// Per-run wall-clock budget; runs exceeding it are recorded as
    /// non-converged.
    pub timeout: Duration,
    /// Fan cells out across threads (each cell stays single-threaded).
    pub parallel: bool,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("draws must be at least 1")]
    NoDraws,
    #[error("duplicate algorithm name '{0}'")]
    DuplicateAlgorithm(String),
    #[error("algorithm '{0}' requires a linear-quadratic problem")]
    BaselineNeedsQuadratic(String),
    #[error("algorithm '{0}' runs only on mapping problems")]
    BaselineNeedsMapping(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("the parallel flag requires the 'parallel' feature")]
    ParallelUnavailable,
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub problem: String,
    pub draw: u32,
    pub algorithm: String,
    /// Median wall-clock milliseconds; `None` marks a non-converged run
    /// (infinite time in profile arithmetic).
    pub time_ms: Option<f64>,
    pub maps: u64,
    pub grad_evals: u64,
    pub obj_evals: u64,
    pub converged: bool,
    pub final_objective: Option<f64>,
}

/// Rows in deterministic (problem, draw, algorithm) order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileTable {
    pub rows: Vec<ProfileRow>,
}

impl ProfileTable {
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.problem.as_str(), a.draw, a.algorithm.as_str()).cmp(&(
                b.problem.as_str(),
                b.draw,
                b.algorithm.as_str(),
            ))
        });
    }
}

/// Built-in per-problem algorithm rosters mirroring the benchmark design:
/// descent problems compare the three schedules, mapping problems add the
/// unaccelerated baseline, and the linear example adds the two gradient
/// baselines.
pub fn suite_algorithms(problem: &str) -> Vec<AlgorithmSpec> {
    let acx2 = AlgorithmSpec::acx("acx2", &[2]);
    let acx32 = AlgorithmSpec::acx("acx32", &[3, 2]);
    let acx332 = AlgorithmSpec::acx("acx332", &[3, 3, 2]);
    let none = AlgorithmSpec {
        name: "none".into(),
        kind: AlgorithmKind::Unaccelerated,
    };
    match problem {
        "linquad" => vec![
            acx2,
            acx32,
            AlgorithmSpec {
                name: "sd".into(),
                kind: AlgorithmKind::SteepestDescent,
            },
            AlgorithmSpec {
                name: "bb".into(),
                kind: AlgorithmKind::BarzilaiBorwein,
            },
        ],
        "rosenbrock" | "rosenbrock-box" | "logistic" => vec![acx2, acx32, acx332],
        _ => vec![acx2, acx32, acx332, none],
    }
}

/// Solver configuration the suite uses for one problem instance.
pub fn config_for(instance: &ProblemInstance, orders: &[usize]) -> AcxConfig {
    AcxConfig {
        schedule: OrderSchedule::new(orders.to_vec()).expect("validated orders"),
        tol: instance.tol,
        norm: instance.norm,
        stabilize: instance.stabilize,
        bounds: instance.bounds.clone(),
        ..AcxConfig::default()
    }
}

fn run_algorithm(instance: &mut ProblemInstance, alg: &AlgorithmSpec) -> RunReport {
    match &alg.kind {
        AlgorithmKind::Acx { orders } => {
            let cfg = config_for(instance, orders);
            match &mut instance.kind {
                ProblemKind::Mapping(m) => {
                    crate::solver::solve(m, &instance.x0, &cfg).expect("validated config")
                }
                ProblemKind::Descent(d) => {
                    minimize(d, &instance.x0, &cfg, &AlphaPolicy::default())
                        .expect("validated config")
                }
            }
        }
        AlgorithmKind::Unaccelerated => match &mut instance.kind {
            ProblemKind::Mapping(m) => {
                fixed_point_iterate(m, &instance.x0, instance.tol, instance.norm, 100_000)
            }
            ProblemKind::Descent(_) => {
                unreachable!("validated: unaccelerated runs on mapping problems")
            }
        },
        AlgorithmKind::SteepestDescent => {
            let q = instance.quadratic.as_ref().expect("validated");
            // Runs to near machine precision, matching the published count.
            steepest_descent(
                q,
                &instance.x0,
                StopRule::GradAbs {
                    tol: 1e-14,
                    norm: Norm::Inf,
                },
                100_000,
            )
        }
        AlgorithmKind::BarzilaiBorwein => {
            let q = instance.quadratic.as_ref().expect("validated");
            barzilai_borwein(
                q,
                &instance.x0,
                BbVariant::Long,
                StopRule::GradRel {
                    rel: 1e-6,
                    norm: Norm::Two,
                },
                100_000,
            )
        }
    }
}

fn run_cell(
    problem: &ProblemSpec,
    draw: u32,
    algorithms: &[AlgorithmSpec],
    timeout: Duration,
) -> Result<Vec<ProfileRow>, BenchError> {
    let seed = cell_seed(problem.seed, &problem.name, draw);
    let mut rows = Vec::with_capacity(algorithms.len());
    for alg in algorithms {
        // Fresh instance per algorithm: identical data and start point, but
        // independent state.
        let mut instance = instantiate(&problem.name, problem.dim, seed)?;
        // Warm-up run, discarded.
        let _ = run_algorithm(&mut instance, alg);
        // Measured run: counters come from here.
        let t0 = Instant::now();
        let rep = run_algorithm(&mut instance, alg);
        let first = t0.elapsed();
        let timed_out = first > timeout;
        let converged = rep.converged() && !timed_out;
        let final_objective = instance
            .report_objective(&rep.x_final)
            .or(rep.final_objective);
        let time_ms = if !converged {
            None
        } else {
            // Median of repeated timings: 5 repetitions for slow runs, up
            // to 100 (capped by a wall-clock budget) for sub-0.1 s runs.
            let reps = if first.as_secs_f64() >= 0.1 { 5 } else { 100 };
            let budget = Duration::from_secs(2);
            let mut times = vec![first.as_secs_f64() * 1e3];
            let spent = Instant::now();
            for _ in 1..reps {
                if spent.elapsed() > budget {
                    break;
                }
                let t = Instant::now();
                let _ = run_algorithm(&mut instance, alg);
                times.push(t.elapsed().as_secs_f64() * 1e3);
            }
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Some(times[times.len() / 2])
        };
        rows.push(ProfileRow {
            problem: problem.name.clone(),
            draw,
            algorithm: alg.name.clone(),
            time_ms,
            maps: rep.maps,
            grad_evals: rep.grad_evals,
            obj_evals: rep.objective_evals,
            converged,
            final_objective,
        });
    }
    Ok(rows)
}

fn validate(spec: &BenchSpec) -> Result<(), BenchError> {
    if spec.draws == 0 {
        return Err(BenchError::NoDraws);
    }
    let mut names: Vec<&str> = spec.algorithms.iter().map(|a| a.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(BenchError::DuplicateAlgorithm(w[0].to_string()));
    }
    for p in &spec.problems {
        // Catalog miss (or bad dimension) surfaces before any run.
        let probe = instantiate(&p.name, p.dim, cell_seed(p.seed, &p.name, 0))?;
        let is_quad = probe.quadratic.is_some();
        let is_descent = matches!(probe.kind, ProblemKind::Descent(_));
        for alg in &spec.algorithms {
            match alg.kind {
                AlgorithmKind::SteepestDescent | AlgorithmKind::BarzilaiBorwein if !is_quad => {
                    return Err(BenchError::BaselineNeedsQuadratic(alg.name.clone()));
                }
                AlgorithmKind::Unaccelerated if is_descent => {
                    return Err(BenchError::BaselineNeedsMapping(alg.name.clone()));
                }
                _ => {}
            }
        }
    }
    if spec.parallel && !cfg!(feature = "parallel") {
        return Err(BenchError::ParallelUnavailable);
    }
    Ok(())
}

/// Runs the whole grid. Every algorithm within a cell starts from the same
/// draw-seeded point; rows come back sorted by (problem, draw, algorithm)
/// regardless of execution order, and counter columns are deterministic
/// across runs.
pub fn run_suite(spec: &BenchSpec) -> Result<ProfileTable, BenchError> {
    validate(spec)?;
    let cells: Vec<(&ProblemSpec, u32)> = spec
        .problems
        .iter()
        .flat_map(|p| (0..spec.draws).map(move |d| (p, d)))
        .collect();

    let results: Result<Vec<Vec<ProfileRow>>, BenchError> = if spec.parallel {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|(p, d)| run_cell(p, *d, &spec.algorithms, spec.timeout))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            unreachable!("validated: parallel requires the feature")
        }
    } else {
        cells
            .iter()
            .map(|(p, d)| run_cell(p, *d, &spec.algorithms, spec.timeout))
            .collect()
    };

    let mut table = ProfileTable {
        rows: results?.into_iter().flatten().collect(),
    };
    table.sort();
    Ok(table)
}
