//! Command-line interface: `solve` runs one problem, `bench` runs a
//! problem/algorithm/draw grid to CSV or JSON, `profile` turns bench output
//! into performance-profile curves.

use crate::bench::{
    default_tau_grid, discrepancy_filter, emit_curves_csv, emit_table_csv, emit_table_json,
    parse_table_csv, performance_profile, run_suite, suite_algorithms, BenchSpec,
};
use crate::descent::{minimize, AlphaPolicy};
use crate::problems::{instantiate, ProblemKind, ProblemSpec, PROBLEM_NAMES};
use crate::solver::{solve, AcxConfig, BoxBounds, Norm, RunReport, RunStatus};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::time::Duration;

#[derive(Parser)]
#[command(
    name = "acx",
    version,
    about = "Cycled-extrapolation acceleration for fixed-point iterations and gradient descent"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one catalog problem and print a summary.
    Solve(SolveArgs),
    /// Run a benchmark grid and write the result table.
    Bench(BenchArgs),
    /// Compute performance-profile curves from a bench table.
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Abs,
    Bb1,
    Bb2,
    Rv,
}

impl From<StepArg> for crate::extrapolation::StepLengthKind {
    fn from(s: StepArg) -> Self {
        use crate::extrapolation::StepLengthKind::*;
        match s {
            StepArg::Abs => AbsP,
            StepArg::Bb1 => Bb1,
            StepArg::Bb2 => Bb2,
            StepArg::Rv => Rv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Inf,
    Two,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Inf => Norm::Inf,
            NormArg::Two => Norm::Two,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Problem name (linquad, rosenbrock, rosenbrock-box, logistic,
    /// admixture, power, altproj).
    #[arg(long)]
    problem: String,
    /// Parameter count; defaults to the problem's benchmark size.
    #[arg(long)]
    dim: Option<usize>,
    /// Extrapolation order schedule, e.g. 3,3,2.
    #[arg(long, default_value = "3,2", value_delimiter = ',')]
    orders: Vec<usize>,
    /// Step-length kind.
    #[arg(long, value_enum, default_value = "abs")]
    step: StepArg,
    /// Convergence tolerance (problem default when omitted).
    #[arg(long)]
    tol: Option<f64>,
    /// Residual norm (problem default when omitted).
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
    /// Constrain the step length from below.
    #[arg(long)]
    sigma_min: Option<f64>,
    /// Apply one stabilization mapping before each cycle.
    #[arg(long)]
    stabilize: bool,
    /// Uniform box "lo,hi" applied to every coordinate.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    bounds: Option<Vec<f64>>,
    /// Buffer fraction for bounds checking.
    #[arg(long, default_value_t = 0.9)]
    omega: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Mapping budget.
    #[arg(long, default_value_t = 100_000)]
    max_maps: u64,
    /// Write the per-cycle trajectory (iteration,residual,objective) CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem suite to run: a problem name or "all".
    #[arg(long)]
    suite: String,
    /// Draws per problem.
    #[arg(long, default_value_t = 1)]
    draws: u32,
    /// Suite seed; cells derive their own seeds from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-run timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Output path for the result table.
    #[arg(long)]
    out: PathBuf,
    /// Output format.
    #[arg(long, default_value = "csv")]
    format: FormatArg,
    /// Fan independent cells out across threads (timings become noisier;
    /// counters are unaffected).
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct ProfileArgs {
    /// Bench CSV to read.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output CSV for the curves (algorithm,tau,fraction).
    #[arg(long)]
    out: PathBuf,
    /// Largest time ratio on the grid.
    #[arg(long, default_value_t = 100.0)]
    tau_max: f64,
    /// Objective-discrepancy tolerance for dropping draws.
    #[arg(long, default_value_t = 1e-5)]
    crit_tol: f64,
}

/// Exit codes: 0 success, 1 solver failure, 2 configuration error.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Profile(args) => cmd_profile(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<i32, String> {
    let seed = crate::problems::cell_seed(args.seed, &args.problem, 0);
    let mut instance =
        instantiate(&args.problem, args.dim, seed).map_err(|e| e.to_string())?;

    let bounds = match &args.bounds {
        Some(b) => Some(
            BoxBounds::uniform(b[0], b[1], args.omega, instance.x0.len())
                .map_err(|e| e.to_string())?,
        ),
        None => instance.bounds.clone(),
    };
    let cfg = AcxConfig {
        schedule: crate::extrapolation::OrderSchedule::new(args.orders.clone())
            .map_err(|e| e.to_string())?,
        step_kind: args.step.into(),
        tol: args.tol.unwrap_or(instance.tol),
        norm: args.norm.map(Norm::from).unwrap_or(instance.norm),
        sigma_min: args.sigma_min,
        stabilize: args.stabilize || instance.stabilize,
        max_maps: args.max_maps,
        record_trajectory: args.trace.is_some(),
        bounds,
        ..AcxConfig::default()
    };

    let report: RunReport = match &mut instance.kind {
        ProblemKind::Mapping(m) => solve(m, &instance.x0, &cfg).map_err(|e| e.to_string())?,
        ProblemKind::Descent(d) => minimize(d, &instance.x0, &cfg, &AlphaPolicy::default())
            .map_err(|e| e.to_string())?,
    };

    println!("problem:        {}", instance.name);
    println!("dimension:      {}", instance.x0.len());
    println!(
        "orders:         {:?}  (tol {:e}, {} norm)",
        args.orders,
        cfg.tol,
        match cfg.norm {
            Norm::Inf => "inf",
            Norm::Two => "two",
        }
    );
    println!("status:         {:?}", report.status);
    println!("maps:           {}", report.maps);
    if report.grad_evals > 0 {
        println!("gradient evals: {}", report.grad_evals);
    }
    println!("objective evals:{}", report.objective_evals);
    println!("cycles:         {}", report.iterations);
    println!("residual:       {:.3e}", report.final_residual);
    if let Some(f) = report.final_objective {
        println!("objective:      {f:.10}");
    }
    if report.backtracks > 0 {
        println!("backtracks:     {}", report.backtracks);
    }

    if let (Some(path), Some(tr)) = (&args.trace, &report.trajectory) {
        let mut out = String::from("iteration,residual,objective\n");
        for t in tr {
            out.push_str(&format!(
                "{},{:.16e},{}\n",
                t.iteration,
                t.residual,
                t.objective.map(|o| format!("{o:.16e}")).unwrap_or_default()
            ));
        }
        std::fs::write(path, out).map_err(|e| format!("{}: {e}", path.display()))?;
        println!("trace:          {}", path.display());
    }

    Ok(if report.status == RunStatus::Converged {
        0
    } else {
        1
    })
}

fn cmd_bench(args: BenchArgs) -> Result<i32, String> {
    let names: Vec<String> = if args.suite == "all" {
        PROBLEM_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        vec![args.suite.clone()]
    };
    // Every problem in the grid shares the algorithm roster of its own
    // suite; mixed grids run one suite per problem.
    let mut tables = Vec::new();
    for name in &names {
        let spec = BenchSpec {
            problems: vec![ProblemSpec {
                name: name.clone(),
                dim: None,
                seed: args.seed,
            }],
            algorithms: suite_algorithms(name),
            draws: args.draws,
            timeout: Duration::from_secs_f64(args.timeout),
            parallel: args.parallel,
        };
        let table = run_suite(&spec).map_err(|e| e.to_string())?;
        tables.push(table);
    }
    let mut merged = crate::bench::ProfileTable {
        rows: tables.into_iter().flat_map(|t| t.rows).collect(),
    };
    merged.sort();
    match args.format {
        FormatArg::Csv => emit_table_csv(&merged, &args.out).map_err(|e| e.to_string())?,
        FormatArg::Json => emit_table_json(&merged, &args.out).map_err(|e| e.to_string())?,
    }
    let conv = merged.rows.iter().filter(|r| r.converged).count();
    println!(
        "{} rows ({} converged) -> {}",
        merged.rows.len(),
        conv,
        args.out.display()
    );
    Ok(0)
}

fn cmd_profile(args: ProfileArgs) -> Result<i32, String> {
    let table = parse_table_csv(&args.input).map_err(|e| e.to_string())?;
    let (kept, rejection_rate) = discrepancy_filter(&table, args.crit_tol);
    let grid = default_tau_grid(args.tau_max);
    let curves = performance_profile(&kept, &grid);
    emit_curves_csv(&curves, &args.out).map_err(|e| e.to_string())?;
    println!(
        "{} rows kept ({:.2}% of draws rejected) -> {}",
        kept.rows.len(),
        rejection_rate * 100.0,
        args.out.display()
    );
    Ok(0)
}
