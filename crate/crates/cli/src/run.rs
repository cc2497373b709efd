//! Subcommand implementations.

use crate::config::{resolve, FileConfig};
use crate::output::{num, Sink};
use crate::{BenchmarkArgs, IntegrateArgs, ModelsArgs, ProveArgs, SolverArgs};
use rigode::enclosure::EnclosureConfig;
use rigode::interval::{IVector, Interval};
use rigode::poincare::PoincareConfig;
use rigode::proofs::{
    check_cone, check_covering, check_trapping, rossler, Certificate, ConeMatrix, ProofContext,
};
use rigode::stepper::{
    coeffs, Algorithm, MethodOrder, Solver, SolverConfig, StepMode,
};
use rigode::vectorfield::{systems, VectorField};
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

pub enum CliError {
    Usage(String),
    Solver(rigode::Error),
    Io(std::io::Error),
}

impl From<rigode::Error> for CliError {
    fn from(e: rigode::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Resolve a system name to a built-in or load a field file.
fn load_system(name: &str) -> Result<VectorField, CliError> {
    if let Some(f) = systems::by_name(name) {
        return Ok(f);
    }
    if std::path::Path::new(name).exists() {
        let text = std::fs::read_to_string(name)?;
        return VectorField::from_text(&text).map_err(CliError::Solver);
    }
    usage(format!(
        "unknown system {name:?}; built-ins: {}, or pass a field file path",
        systems::SYSTEM_NAMES.join(", ")
    ))
}

fn parse_ic(text: &str, dim: usize) -> Result<IVector, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != dim {
        return usage(format!("initial condition has {} components, system needs {dim}", parts.len()));
    }
    let entries = parts
        .iter()
        .map(|p| Interval::parse_outward(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Solver)?;
    Ok(IVector::from_entries(entries))
}

struct Setup {
    field: VectorField,
    cfg: SolverConfig,
    ic: IVector,
    system_name: String,
    algorithm_name: String,
}

fn build_setup(
    system: &Option<String>,
    ic: &Option<String>,
    solver: &SolverArgs,
    cfg_file: &FileConfig,
    track_variational: bool,
) -> Result<Setup, CliError> {
    let system_name = resolve(system, cfg_file, "system", |s| Some(s.to_string()))
        .map_err(CliError::Usage)?
        .ok_or(CliError::Usage("no system given (use --system)".into()))?;
    let mut field = load_system(&system_name)?;

    // parameter overrides: --param name=value flags plus param.<name> keys
    let mut params: Vec<(String, String)> = cfg_file
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("param.").map(|n| (n.to_string(), v.clone())))
        .collect();
    params.sort();
    for spec in &solver.param {
        let Some((name, value)) = spec.split_once('=') else {
            return usage(format!("--param wants NAME=VALUE, got {spec:?}"));
        };
        params.push((name.trim().to_string(), value.trim().to_string()));
    }
    for (name, value) in params {
        let v = Interval::parse_outward(&value).map_err(CliError::Solver)?;
        field.set_param(&name, v).map_err(CliError::Solver)?;
    }

    let order = resolve(&solver.order, cfg_file, "order", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(14);
    let p = resolve(&solver.p, cfg_file, "p", |s| s.parse().ok()).map_err(CliError::Usage)?;
    let q = resolve(&solver.q, cfg_file, "q", |s| s.parse().ok()).map_err(CliError::Usage)?;
    let method = match (p, q) {
        (Some(p), Some(q)) => MethodOrder::with_split(order, p, q).map_err(CliError::Solver)?,
        (None, None) => MethodOrder::new(order),
        _ => return usage("--p and --q must be given together"),
    };

    let algorithm_name = resolve(&solver.algorithm, cfg_file, "algorithm", |s| Some(s.to_string()))
        .map_err(CliError::Usage)?
        .unwrap_or_else(|| "ho".into());
    let algorithm = match algorithm_name.as_str() {
        "ho" | "hermite-obreshkov" => Algorithm::HermiteObreshkov,
        "lohner" | "lo" => Algorithm::Lohner,
        other => return usage(format!("unknown algorithm {other:?} (lohner | ho)")),
    };

    let step = resolve(&solver.step, cfg_file, "step", |s| s.parse().ok()).map_err(CliError::Usage)?;
    let tol = resolve(&solver.tol, cfg_file, "tol", |s| s.parse().ok()).map_err(CliError::Usage)?;
    let mode = match (step, tol) {
        (Some(_), Some(_)) => return usage("--step and --tol are mutually exclusive"),
        (Some(h), None) if h > 0.0 => StepMode::Fixed(h),
        (None, Some(t)) if t > 0.0 => StepMode::Tolerance(t),
        (None, None) => StepMode::Tolerance(1e-10),
        _ => return usage("step and tolerance must be positive"),
    };

    let mut cfg = SolverConfig::new(method, algorithm, mode);
    cfg.track_variational = track_variational;
    if let Some(ms) = resolve(&solver.min_step, cfg_file, "min-step", |s| s.parse().ok())
        .map_err(CliError::Usage)?
    {
        cfg.enclosure = EnclosureConfig { min_step: ms, ..cfg.enclosure };
    }
    if let Some(ms) = resolve(&solver.max_step, cfg_file, "max-step", |s| s.parse().ok())
        .map_err(CliError::Usage)?
    {
        cfg.max_step = ms;
    }

    let ic_text = resolve(ic, cfg_file, "ic", |s| Some(s.to_string())).map_err(CliError::Usage)?;
    let ic = match ic_text {
        Some(text) => parse_ic(&text, field.dim())?,
        None => systems::default_ic(&system_name).ok_or(CliError::Usage(
            "custom field needs an explicit --ic".into(),
        ))?,
    };

    Ok(Setup { field, cfg, ic, system_name, algorithm_name })
}

fn log10_diam(v: &rigode::interval::IMatrix) -> f64 {
    v.diam().log10()
}

pub fn integrate(args: IntegrateArgs, cfg_file: &FileConfig) -> Result<ExitCode, CliError> {
    let track = !args.no_variational;
    let setup = build_setup(&args.system, &args.ic, &args.solver, cfg_file, track)?;
    let time = resolve(&args.time, cfg_file, "time", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(1.0);

    let mut sink = Sink::open(args.out.as_deref())?;
    writeln!(
        sink,
        "# rigode csv v1 integrate system={} algorithm={} order={}",
        setup.system_name, setup.algorithm_name, setup.cfg.order.m
    )?;
    let names = setup.field.var_names().to_vec();
    let mut header = String::from("t");
    for n in &names {
        header += &format!(",{n}_lo,{n}_hi");
    }
    if track {
        header += ",s";
    }
    header += ",h";
    writeln!(sink, "{header}")?;

    let mut solver = Solver::new(&setup.field, setup.cfg, &setup.ic);
    while solver.t.hi() < time {
        let step = match solver.advance() {
            Ok(s) => s,
            Err(e) => {
                writeln!(sink, "# error: {e}")?;
                sink.flush()?;
                return Err(CliError::Solver(e));
            }
        };
        let hull = solver.x_hull();
        let mut row = num(solver.t.mid());
        for i in 0..names.len() {
            row += &format!(",{},{}", num(hull[i].lo()), num(hull[i].hi()));
        }
        if track {
            row += &format!(",{}", num(log10_diam(&solver.v_hull().expect("tracked"))));
        }
        row += &format!(",{}", num(step.h));
        writeln!(sink, "{row}")?;
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn benchmark(args: BenchmarkArgs, cfg_file: &FileConfig) -> Result<ExitCode, CliError> {
    let mut setup = build_setup(&args.system, &args.ic, &args.solver, cfg_file, true)?;
    let time = resolve(&args.time, cfg_file, "time", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(1.0);
    if !matches!(setup.cfg.step, StepMode::Fixed(_)) {
        return usage("benchmark compares both algorithms on a shared grid; give a fixed --step");
    }

    let mut sink = Sink::open(args.out.as_deref())?;
    writeln!(
        sink,
        "# rigode csv v1 benchmark system={} order={} step={:?}",
        setup.system_name,
        setup.cfg.order.m,
        match setup.cfg.step {
            StepMode::Fixed(h) => h,
            StepMode::Tolerance(t) => t,
        }
    )?;
    writeln!(sink, "t,s_lo,s_ho,h")?;

    setup.cfg.algorithm = Algorithm::Lohner;
    let mut lo = Solver::new(&setup.field, setup.cfg.clone(), &setup.ic);
    setup.cfg.algorithm = Algorithm::HermiteObreshkov;
    let mut ho = Solver::new(&setup.field, setup.cfg.clone(), &setup.ic);

    while lo.t.hi() < time {
        let (sl, sh) = match (lo.advance(), ho.advance()) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                writeln!(sink, "# error: {e}")?;
                sink.flush()?;
                return Err(CliError::Solver(e));
            }
        };
        if sl.h != sh.h {
            let e = rigode::Error::Config(format!(
                "step grids diverged (explicit {} vs implicit {}); lower --step",
                sl.h, sh.h
            ));
            writeln!(sink, "# error: {e}")?;
            sink.flush()?;
            return Err(CliError::Solver(e));
        }
        writeln!(
            sink,
            "{},{},{},{}",
            num(lo.t.mid()),
            num(log10_diam(&lo.v_hull().expect("tracked"))),
            num(log10_diam(&ho.v_hull().expect("tracked"))),
            num(sl.h)
        )?;
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn prove(args: ProveArgs, cfg_file: &FileConfig) -> Result<ExitCode, CliError> {
    let part = resolve(&Some(args.part.clone()), cfg_file, "part", |s| Some(s.to_string()))
        .map_err(CliError::Usage)?
        .unwrap();
    let known = ["trapping", "covering", "cones", "all"];
    if !known.contains(&part.as_str()) {
        return usage(format!("unknown part {part:?} (trapping | covering | cones | all)"));
    }

    // certification defaults: implicit corrector of order 25, per-step
    // tolerance 1e-10
    let mut solver_args = args.solver.clone();
    if solver_args.order.is_none() && !cfg_file.contains_key("order") {
        solver_args.order = Some(rossler::SOLVER_ORDER);
    }
    if solver_args.tol.is_none() && solver_args.step.is_none() {
        solver_args.tol = Some(rossler::SOLVER_TOL);
    }
    let system = Some("rossler".to_string());
    let setup = build_setup(&system, &None, &solver_args, cfg_file, false)?;

    let subdiv_b = resolve(&args.subdiv_b, cfg_file, "subdiv-b", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(rossler::TRAPPING_SUBDIV);
    let subdiv_m = resolve(&args.subdiv_m, cfg_file, "subdiv-m", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(rossler::M_SUBDIV);
    let subdiv_n = resolve(&args.subdiv_n, cfg_file, "subdiv-n", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(rossler::N_SUBDIV);
    let edge_subdiv = resolve(&args.subdiv, cfg_file, "subdiv", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(1);
    let max_depth = resolve(&args.max_depth, cfg_file, "max-depth", |s| s.parse().ok())
        .map_err(CliError::Usage)?
        .unwrap_or(3);
    let threads = resolve(&args.threads, cfg_file, "threads", |s| s.parse().ok())
        .map_err(CliError::Usage)?;
    let lambda = args.cone_lambda.unwrap_or(rossler::CONE_LAMBDA);
    let mu = args.cone_mu.unwrap_or(rossler::CONE_MU);

    let mut ctx = ProofContext {
        field: &setup.field,
        section: rossler::section(),
        solver: setup.cfg.clone(),
        poincare: PoincareConfig::default(),
        max_depth,
        threads,
    };
    ctx.solver.max_step = 0.4;

    let mut sink = Sink::open(args.out.as_deref())?;
    let mut all_verified = true;
    let mut run_part = |name: &str, cert: Certificate, elapsed: std::time::Duration| {
        let steps: usize = cert.pieces.iter().map(|p| p.steps).sum();
        println!(
            "{name}: {} ({} pieces, {} steps, {:.2?})",
            if cert.verified { "VERIFIED" } else { "NOT VERIFIED" },
            cert.pieces.len(),
            steps,
            elapsed
        );
        if !cert.verified {
            for p in cert.pieces.iter().filter(|p| !p.passed).take(3) {
                println!("  first failures: {} {}", p.label, p.detail);
            }
        }
        all_verified &= cert.verified;
        let _ = writeln!(sink, "{}", cert.report());
        let _ = writeln!(sink, "wall time: {:.3?}\n", elapsed);
    };

    if part == "trapping" || part == "all" {
        let t0 = Instant::now();
        let cert = check_trapping(&ctx, &rossler::trapping_box(), subdiv_b);
        run_part("trapping", cert, t0.elapsed());
    }
    if part == "covering" || part == "all" {
        let t0 = Instant::now();
        let cert = check_covering(&ctx, &rossler::m_box(), &rossler::n_box(), edge_subdiv);
        run_part("covering", cert, t0.elapsed());
    }
    if part == "cones" || part == "all" {
        let q = ConeMatrix::new(lambda, mu).map_err(CliError::Solver)?;
        let mut cone_ctx = ProofContext { solver: ctx.solver.clone(), ..ctx };
        cone_ctx.solver.track_variational = true;
        let t0 = Instant::now();
        let cert = check_cone(&cone_ctx, &rossler::m_box(), &rossler::n_box(), &q, subdiv_m, subdiv_n);
        run_part("cones", cert, t0.elapsed());
    }
    sink.flush()?;

    Ok(if all_verified { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn models(args: ModelsArgs) -> Result<ExitCode, CliError> {
    println!("# per-step operation model: n={}, c_f={}", args.n, args.cf);
    println!("{:>4} {:>10} {:>14} {:>14} {:>8}", "m", "g(m)", "C_LO", "C_HO", "ratio");
    for m in 1..=args.max_order {
        let g = coeffs::step_ratio_g(m);
        let (c_lo, c_ho, ratio) = coeffs::cost_model(args.n, m, args.cf);
        println!("{m:>4} {g:>10.4} {c_lo:>14.1} {c_ho:>14.1} {ratio:>8.4}");
    }
    println!(
        "# matrix-dominated limit (c_f = 0): C_HO/C_LO = 23/17 = {:.5}",
        23.0 / 17.0
    );
    println!("# step-ratio limit: g(m) -> 2 as m grows");
    Ok(ExitCode::SUCCESS)
}
