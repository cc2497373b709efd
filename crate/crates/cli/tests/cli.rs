//! End-to-end checks of the command-line surface: subcommands, flags,
//! config-file precedence, CSV determinism, and the exit-code contract
//! (0 verified, 1 falsified/indeterminate, 2 usage, 3 solver failure).

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rigode"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["integrate"]).status.code(), Some(2)); // no system
    assert_eq!(run(&["integrate", "--system", "nope"]).status.code(), Some(2));
    assert_eq!(
        run(&["integrate", "--system", "lorenz", "--step", "0.1", "--tol", "1e-9"]).status.code(),
        Some(2)
    );
    // benchmark needs a fixed step for a shared grid
    assert_eq!(
        run(&["benchmark", "--system", "lorenz", "--tol", "1e-9"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["prove", "--part", "everything"]).status.code(),
        Some(2)
    );
}

#[test]
fn zero_time_emits_header_only() {
    let out = run(&["benchmark", "--system", "lorenz", "--step", "0.02", "--time", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("# rigode csv v1 benchmark"));
    assert_eq!(lines[1], "t,s_lo,s_ho,h");
}

#[test]
fn csv_output_is_deterministic() {
    let args = [
        "integrate", "--system", "rossler", "--time", "0.3", "--tol", "1e-9", "--order", "10",
    ];
    let first = stdout(&run(&args));
    let second = stdout(&run(&args));
    assert!(!first.is_empty());
    assert_eq!(first, second);
    // header row carries per-coordinate bounds and the step column
    assert!(first.lines().nth(1).unwrap().contains("x_lo,x_hi,y_lo,y_hi,z_lo,z_hi"));
}

#[test]
fn benchmark_rows_share_one_grid_and_tighter_corrector() {
    let out = run(&["benchmark", "--system", "lorenz", "--step", "0.02", "--time", "0.4", "--order", "10"]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        assert!(cols[2] <= cols[1] + 1e-9, "s_ho > s_lo in {line}");
        assert_eq!(cols[3], 0.02);
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join("rigode-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "system = rossler\ntime = 0.2\norder = 8\ntol = 1e-8\n").unwrap();

    let out = run(&["--config", cfg.to_str().unwrap(), "integrate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("# rigode csv v1 integrate system=rossler"));

    // flag overrides the file
    let out = run(&["--config", cfg.to_str().unwrap(), "integrate", "--system", "lorenz"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("# rigode csv v1 integrate system=lorenz"));
}

#[test]
fn custom_field_file_with_explicit_ic() {
    let dir = std::env::temp_dir().join("rigode-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let field = dir.join("decay.field");
    std::fs::write(&field, "params: k = 2\nu' = -k*u\n").unwrap();
    let out = run(&[
        "integrate", "--system", field.to_str().unwrap(), "--ic", "1.0", "--time", "0.5",
        "--step", "0.1", "--order", "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    // u(0.5) = e^{-1}
    let truth = (-1.0f64).exp();
    assert!(cols[1] <= truth && truth <= cols[2], "{last}");
}

#[test]
fn models_table_prints_known_values() {
    let out = run(&["models", "--n", "1", "--cf", "0", "--max-order", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // n=1, c_f=0: C_LO = 17, C_HO = 23 for every order
    assert!(text.contains("17.0"));
    assert!(text.contains("23.0"));
    assert!(text.contains("1.3529"));
    // g(6) ~ 1.53
    let g6 = text.lines().find(|l| l.trim_start().starts_with("6 ")).unwrap();
    assert!(g6.contains("1.53"));
}

#[test]
fn prove_covering_verifies_and_exits_zero() {
    let out = run(&["prove", "--part", "covering"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("covering: VERIFIED"));
}

#[test]
fn prove_underresolved_trapping_exits_one() {
    // two fat slabs cannot land strictly inside; depth 0 forbids rescue
    let out = run(&[
        "prove", "--part", "trapping", "--subdiv-b", "2", "--max-depth", "0", "--order", "14",
        "--tol", "1e-8",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("trapping: NOT VERIFIED"));
}

#[test]
fn prove_report_written_to_file() {
    let dir = std::env::temp_dir().join("rigode-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("covering.txt");
    let out = run(&["prove", "--part", "covering", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("certificate: covering"));
    assert!(text.contains("result: VERIFIED"));
    assert!(text.contains("edge {l_M} x Z"));
    assert!(text.contains("wall time"));
}
