//! Command-line front end: validated integration runs, explicit-vs-implicit
//! tightness benchmarks, the attractor certification driver, and the
//! order/step-ratio model tables.
//!
//! Exit codes: 0 verified/success, 1 falsified or indeterminate,
//! 2 usage error, 3 solver failure.

mod config;
mod output;
mod run;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rigode", version, about = "validated ODE integration and attractor certification")]
struct Cli {
    /// Plain-text key=value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one system and emit a CSV trajectory with enclosure bounds.
    Integrate(IntegrateArgs),
    /// Run the explicit and implicit algorithms side by side at a fixed step
    /// and emit t, S_LO, S_HO, h rows (S = log10 of the variational width).
    Benchmark(BenchmarkArgs),
    /// Certify the attractor: trapping region, covering relations, cone
    /// condition, or all three.
    Prove(ProveArgs),
    /// Print the per-step operation model and the step-ratio table.
    Models(ModelsArgs),
}

#[derive(Args, Clone, Default)]
struct SolverArgs {
    /// Integration algorithm: "lohner" (predictor only) or "ho"
    /// (predictor-corrector).
    #[arg(long)]
    algorithm: Option<String>,

    /// Method order m (Taylor degree; the corrector splits it as p+q).
    #[arg(long)]
    order: Option<usize>,

    /// Corrector split: forward degree p (default ceil(m/2)).
    #[arg(long)]
    p: Option<usize>,

    /// Corrector split: backward degree q (default floor(m/2)).
    #[arg(long)]
    q: Option<usize>,

    /// Fixed time step.
    #[arg(long)]
    step: Option<f64>,

    /// Per-step truncation tolerance (adaptive step mode).
    #[arg(long)]
    tol: Option<f64>,

    /// Smallest admissible step before an enclosure failure is reported.
    #[arg(long)]
    min_step: Option<f64>,

    /// Largest step the adaptive mode may take.
    #[arg(long)]
    max_step: Option<f64>,

    /// Override a named system parameter, e.g. --param mu=0.0009537.
    #[arg(long, value_name = "NAME=VALUE")]
    param: Vec<String>,
}

#[derive(Args)]
struct IntegrateArgs {
    /// Built-in system name or path to a vector-field text file.
    #[arg(long)]
    system: Option<String>,

    /// Total integration time.
    #[arg(long)]
    time: Option<f64>,

    /// Initial condition as comma-separated decimals (outward-rounded).
    #[arg(long)]
    ic: Option<String>,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,

    /// Skip the variational equations (state enclosure only).
    #[arg(long)]
    no_variational: bool,

    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Built-in system name or path to a vector-field text file.
    #[arg(long)]
    system: Option<String>,

    /// Total integration time.
    #[arg(long)]
    time: Option<f64>,

    /// Initial condition as comma-separated decimals (outward-rounded).
    #[arg(long)]
    ic: Option<String>,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,

    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ProveArgs {
    /// Which certificate to establish: trapping, covering, cones, or all.
    #[arg(long, default_value = "all")]
    part: String,

    /// Uniform y-subdivision of the trapping box B.
    #[arg(long = "subdiv-b")]
    subdiv_b: Option<usize>,

    /// Uniform y-subdivision of M for the cone condition.
    #[arg(long = "subdiv-m")]
    subdiv_m: Option<usize>,

    /// Uniform y-subdivision of N for the cone condition.
    #[arg(long = "subdiv-n")]
    subdiv_n: Option<usize>,

    /// Edge subdivision for the covering relations (1 = none).
    #[arg(long)]
    subdiv: Option<usize>,

    /// Adaptive bisection depth for failed pieces.
    #[arg(long)]
    max_depth: Option<usize>,

    /// Worker threads for piece dispatch.
    #[arg(long)]
    threads: Option<usize>,

    /// Positive cone coefficient (lambda > 0).
    #[arg(long)]
    cone_lambda: Option<f64>,

    /// Negative cone coefficient (mu < 0).
    #[arg(long)]
    cone_mu: Option<f64>,

    /// Write the full certificate report here (stdout summary always).
    #[arg(long)]
    out: Option<String>,

    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ModelsArgs {
    /// Phase-space dimension for the operation counts.
    #[arg(long, default_value_t = 3)]
    n: u32,

    /// Multiplication cost of one vector-field evaluation.
    #[arg(long, default_value_t = 1.0)]
    cf: f64,

    /// Largest order in the table.
    #[arg(long, default_value_t = 24)]
    max_order: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_cfg = match cli.config.as_deref().map(config::load) {
        Some(Ok(map)) => map,
        Some(Err(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        None => Default::default(),
    };
    let result = match cli.command {
        Command::Integrate(args) => run::integrate(args, &file_cfg),
        Command::Benchmark(args) => run::benchmark(args, &file_cfg),
        Command::Prove(args) => run::prove(args, &file_cfg),
        Command::Models(args) => run::models(args),
    };
    match result {
        Ok(code) => code,
        Err(run::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(run::CliError::Solver(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(3)
        }
        Err(run::CliError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(3)
        }
    }
}
