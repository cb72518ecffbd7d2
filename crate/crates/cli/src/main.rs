//! Command-line harness for the private positive-LP solvers.
//!
//! Subcommands: `solve` runs one of the four solvers on an instance file
//! and writes a canonical report; `certify` independently re-checks a
//! report against its instance; `experiment` sweeps seeds and α/ε grids
//! over a generated family and emits a tab-separated summary; `smax`
//! evaluates the truncated softmax; `generate` writes instance files.
//!
//! Exit codes: 0 success (violations are data, not errors), 2 parse or
//! input problems, 3 configuration problems, 4 internal invariant
//! failures. Certification failures exit 1.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use poslp_core::{
    certify_report, generate, parse_instance, parse_report, serialize_instance, serialize_report,
    smax_u, smin_u, solve_instance, Error, Family, GenSpec, Instance, LpKind, Report, SolveConfig,
    SolverKind,
};

#[derive(Parser)]
#[command(
    name = "poslp",
    version,
    about = "Differentially private positive-LP solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a private solver on an instance file and write a report.
    Solve(SolveArgs),
    /// Re-check a report against its instance.
    Certify(CertifyArgs),
    /// Sweep seeds and parameter grids, emitting a TSV summary.
    Experiment(ExperimentArgs),
    /// Evaluate the truncated softmax or softmin on a vector.
    Smax(SmaxArgs),
    /// Generate an instance file from a seeded family.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// packing | covering | mixed-dd | mixed-di
    #[arg(long)]
    kind: String,
    /// Instance file path.
    #[arg(long = "in")]
    input: String,
    /// Report file path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Known optimum; falls back to the instance's `opt` field.
    #[arg(long)]
    opt: Option<f64>,
    /// Feasible mass 1ᵀx₀; falls back to the instance's `V` field.
    #[arg(long = "V")]
    feasible_mass: Option<f64>,
    /// Column-max range as `m,M`; falls back to the instance's `range`.
    #[arg(long, value_parser = parse_pair)]
    range: Option<(f64, f64)>,
    /// Clip large entries before solving (and post-process for packing).
    #[arg(long)]
    preprocess: bool,
    /// Argmax mode: exact maximization instead of sampling.
    #[arg(long)]
    deterministic: bool,
    /// Include the per-coordinate step histogram in the report.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CertifyArgs {
    /// Report file path.
    #[arg(long)]
    report: String,
    /// Instance file path.
    #[arg(long = "in")]
    input: String,
}

#[derive(Args)]
struct ExperimentArgs {
    /// packing | covering | mixed-dd | mixed-di
    #[arg(long)]
    kind: String,
    /// random_uniform | set_cover | identity | planted_feasible
    #[arg(long, default_value = "planted_feasible")]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Comma-separated approximation slacks.
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    /// Comma-separated privacy budgets.
    #[arg(long, value_delimiter = ',', required = true)]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// Number of seeds (0..count) per grid cell.
    #[arg(long, default_value_t = 20)]
    num_seeds: u64,
    /// Explicit comma-separated seed list; overrides --num-seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Seed of the generated instance itself.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    #[arg(long)]
    preprocess: bool,
    #[arg(long)]
    deterministic: bool,
    /// Output TSV path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SmaxArgs {
    /// Comma-separated vector entries.
    #[arg(long, conflicts_with = "input")]
    x: Option<String>,
    /// File with whitespace-separated entries.
    #[arg(long = "in")]
    input: Option<String>,
    /// The cap U.
    #[arg(long)]
    u: f64,
    /// Evaluate the softmin instead.
    #[arg(long)]
    smin: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// packing | covering | mixed
    #[arg(long)]
    kind: String,
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected `m,M`".into());
    }
    let m: f64 = parts[0].trim().parse().map_err(|_| "bad m")?;
    let big_m: f64 = parts[1].trim().parse().map_err(|_| "bad M")?;
    Ok((m, big_m))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::DimensionMismatch { .. } => 2,
        Error::Internal(_) => 4,
        _ => 3,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn read_file(path: &str) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| fail(2, format!("cannot read {path}: {e}")))
}

fn write_output(path: Option<&str>, content: &str) -> Result<(), ExitCode> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(|e| fail(2, format!("cannot write {p}: {e}")))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_instance(path: &str) -> Result<Instance, ExitCode> {
    let text = read_file(path)?;
    parse_instance(&text).map_err(|e| fail(exit_code(&e), format!("{path}: {e}")))
}

fn solver_kind(name: &str) -> Result<SolverKind, ExitCode> {
    name.parse::<SolverKind>().map_err(|e| fail(3, e))
}

fn kinds_compatible(kind: SolverKind, instance: &Instance) -> bool {
    match instance.kind {
        LpKind::Packing => kind == SolverKind::Packing,
        LpKind::Covering => kind == SolverKind::Covering,
        LpKind::Mixed => kind.is_mixed(),
    }
}

fn run_solve(args: &SolveArgs) -> Result<ExitCode, ExitCode> {
    let kind = solver_kind(&args.kind)?;
    let instance = load_instance(&args.input)?;
    if !kinds_compatible(kind, &instance) {
        return Err(fail(
            3,
            format!(
                "--kind {} does not fit a {} instance",
                kind.as_str(),
                instance.kind.as_str()
            ),
        ));
    }
    let config = SolveConfig {
        alpha: args.alpha,
        beta: args.beta,
        epsilon: args.eps,
        delta: args.delta,
        opt: args.opt,
        feasible_mass: args.feasible_mass,
        column_range: args.range,
        preprocess: args.preprocess,
        deterministic: args.deterministic,
        seed: args.seed,
        trace: args.trace,
    };
    let report = solve_instance(&instance, kind, &config).map_err(|e| fail(exit_code(&e), e))?;
    summarize(&report);
    write_output(args.out.as_deref(), &serialize_report(&report))?;
    Ok(ExitCode::SUCCESS)
}

fn summarize(report: &Report) {
    eprintln!(
        "kind {} seed {} objective {} violations {} (budget s = {}){}{} [{} ms]",
        report.kind.as_str(),
        report.seed,
        report.objective,
        report.total_violations(),
        report.params.violation_budget,
        if report.vacuous_bound {
            " [warning: vacuous bound, s exceeds the row count]"
        } else {
            ""
        },
        report
            .scale
            .map(|k| format!(" scale {k}"))
            .unwrap_or_default(),
        report.wall_time_ms,
    );
}

fn run_certify(args: &CertifyArgs) -> Result<ExitCode, ExitCode> {
    let instance = load_instance(&args.input)?;
    let report_text = read_file(&args.report)?;
    let report = parse_report(&report_text)
        .map_err(|e| fail(exit_code(&e), format!("{}: {e}", args.report)))?;
    let cert = certify_report(&instance, &report).map_err(|e| fail(exit_code(&e), e))?;
    for check in &cert.checks {
        println!(
            "{} {}{}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            if check.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", check.detail)
            }
        );
    }
    if cert.pass() {
        println!("certified");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("not certified");
        Ok(ExitCode::from(1))
    }
}

fn family(name: &str) -> Result<Family, ExitCode> {
    name.parse::<Family>().map_err(|e| fail(3, e))
}

fn lp_kind(name: &str) -> Result<LpKind, ExitCode> {
    match name {
        "packing" => Ok(LpKind::Packing),
        "covering" => Ok(LpKind::Covering),
        "mixed" => Ok(LpKind::Mixed),
        other => Err(fail(3, format!("unknown instance kind `{other}`"))),
    }
}

fn run_experiment(args: &ExperimentArgs) -> Result<ExitCode, ExitCode> {
    let kind = solver_kind(&args.kind)?;
    let lp = match kind {
        SolverKind::Packing => LpKind::Packing,
        SolverKind::Covering => LpKind::Covering,
        _ => LpKind::Mixed,
    };
    let fam = family(&args.family)?;
    let instance = generate(
        lp,
        &GenSpec {
            rows: args.n,
            cols: args.d,
            density: args.density,
            seed: args.instance_seed,
            family: fam,
        },
    )
    .map_err(|e| fail(exit_code(&e), e))?;
    let seeds: Vec<u64> = args
        .seeds
        .clone()
        .unwrap_or_else(|| (0..args.num_seeds).collect());
    if seeds.is_empty() {
        return Err(fail(3, "experiment needs at least one seed"));
    }

    let mut table = String::new();
    let _ = writeln!(
        table,
        "kind\tfamily\tn\td\talpha\teps\tdelta\tbeta\truns\tmean_violations\tmax_violations\ts_bound\tvacuous\tsuccess_rate"
    );
    for &alpha in &args.alphas {
        for &eps in &args.epsilons {
            let runs: Vec<Report> = seeds
                .par_iter()
                .map(|&seed| {
                    let config = SolveConfig {
                        alpha,
                        beta: args.beta,
                        epsilon: eps,
                        delta: args.delta,
                        preprocess: args.preprocess,
                        deterministic: args.deterministic,
                        seed,
                        ..SolveConfig::default()
                    };
                    solve_instance(&instance, kind, &config)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fail(exit_code(&e), e))?;
            let counts: Vec<usize> = runs.iter().map(|r| r.total_violations()).collect();
            let s_bound = runs[0].params.violation_budget;
            let vacuous = runs[0].vacuous_bound;
            let successes = counts.iter().filter(|&&c| (c as u64) <= s_bound).count();
            let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
            let max = counts.iter().max().copied().unwrap_or(0);
            let _ = writeln!(
                table,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                kind.as_str(),
                fam.as_str(),
                args.n,
                args.d,
                alpha,
                eps,
                args.delta,
                args.beta,
                runs.len(),
                mean,
                max,
                s_bound,
                vacuous,
                successes as f64 / runs.len() as f64,
            );
        }
    }
    write_output(args.out.as_deref(), &table)?;
    Ok(ExitCode::SUCCESS)
}

/// Decimal rendering with 12 significant digits.
fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (11 - exponent).clamp(0, 30) as usize;
    format!("{v:.decimals$}")
}

fn run_smax(args: &SmaxArgs) -> Result<ExitCode, ExitCode> {
    let entries: Vec<f64> = match (&args.x, &args.input) {
        (Some(csv), None) => csv
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| fail(2, format!("cannot parse --x: {e}")))?,
        (None, Some(path)) => read_file(path)?
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| fail(2, format!("cannot parse {path}: {e}")))?,
        _ => return Err(fail(3, "exactly one of --x or --in is required")),
    };
    let eval = if args.smin {
        smin_u(&entries, args.u)
    } else {
        smax_u(&entries, args.u)
    }
    .map_err(|e| fail(exit_code(&e), e))?;
    println!("value {}", sig12(eval.value));
    println!("threshold {}", sig12(eval.threshold));
    let capped: Vec<String> = eval.capped_set.iter().map(|i| i.to_string()).collect();
    println!("capped_set {}", capped.join(" "));
    let grad: Vec<String> = eval.gradient.weights().iter().map(|&w| sig12(w)).collect();
    println!("gradient {}", grad.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn run_generate(args: &GenerateArgs) -> Result<ExitCode, ExitCode> {
    let kind = lp_kind(&args.kind)?;
    let fam = family(&args.family)?;
    let instance = generate(
        kind,
        &GenSpec {
            rows: args.n,
            cols: args.d,
            density: args.density,
            seed: args.seed,
            family: fam,
        },
    )
    .map_err(|e| fail(exit_code(&e), e))?;
    write_output(args.out.as_deref(), &serialize_instance(&instance))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Certify(args) => run_certify(args),
        Command::Experiment(args) => run_experiment(args),
        Command::Smax(args) => run_smax(args),
        Command::Generate(args) => run_generate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(code) => code,
    }
}
