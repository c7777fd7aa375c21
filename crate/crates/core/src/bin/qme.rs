//! `qme`: solve, benchmark and reproduce from the command line.
//!
//! Exit codes: 0 success, 1 solver failure (or failed reproduction check),
//! 2 configuration or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qme::bench::{
    doubling, example1_experiment, example2_experiment, example3_experiment, format_records, reproduce_all, run,
    OutputFormat, ProblemSource, RunSpec, SolverKind, EXAMPLE3_MS, EXAMPLE3_SEED,
};
use qme::io::write_matrix_market;
use qme::poly::Field;
use qme::QmeError;

#[derive(Parser)]
#[command(name = "qme", version, about = "Solvers for A0 + A1 X + A2 X^2 = 0 and X^2 A0 + X A1 + A2 = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one problem.
    Solve(SolveArgs),
    /// Run one experiment and print its table.
    Bench(BenchArgs),
    /// Run every experiment and write tables plus summary.md.
    Reproduce {
        #[arg(long, default_value = "reproduce_out")]
        outdir: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_solver)]
    solver: SolverKind,
    /// Built-in problem: example1, example2, example3 or random.
    #[arg(long, conflicts_with_all = ["a0", "bundle"])]
    problem: Option<String>,
    #[arg(long, requires_all = ["a1", "a2"])]
    a0: Option<PathBuf>,
    #[arg(long)]
    a1: Option<PathBuf>,
    #[arg(long)]
    a2: Option<PathBuf>,
    /// JSON bundle with m, field, A0, A1, A2.
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// example2 block order.
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// example3 or random size.
    #[arg(long, default_value_t = 16)]
    m: usize,
    /// example3 case.
    #[arg(long, default_value_t = 1)]
    case: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of unimodular eigenvalues of G (bscr).
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Defaults: 100 for cr and scr, 12 for the bscr subspace stage, 200000 for fpi.
    #[arg(long)]
    max_iter: Option<usize>,
    /// bscr gap threshold.
    #[arg(long, default_value_t = qme::bscr::DEFAULT_EPS)]
    eps: f64,
    /// bscr: stop the subspace stage once the residual meets --tol.
    #[arg(long)]
    accept_on_residual: bool,
    #[arg(long, value_parser = parse_format, default_value = "json")]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write G as a Matrix Market file.
    #[arg(long)]
    g_out: Option<PathBuf>,
    /// Write R as a Matrix Market file.
    #[arg(long)]
    r_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// example1, example2 or example3.
    #[arg(long)]
    experiment: String,
    #[arg(long, default_value_t = 4)]
    pmin: usize,
    #[arg(long, default_value_t = 64)]
    pmax: usize,
    #[arg(long, default_value_t = EXAMPLE3_SEED)]
    seed: u64,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: QmeError| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: QmeError| e.to_string())
}

enum Outcome {
    Ok,
    SolverFailure,
}

fn emit(text: &str, output: Option<&Path>) -> qme::Result<()> {
    match output {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn source(a: &SolveArgs) -> qme::Result<ProblemSource> {
    if let Some(path) = &a.bundle {
        return Ok(ProblemSource::Bundle(path.clone()));
    }
    if let (Some(a0), Some(a1), Some(a2)) = (&a.a0, &a.a1, &a.a2) {
        return Ok(ProblemSource::MatrixMarket {
            a0: a0.clone(),
            a1: a1.clone(),
            a2: a2.clone(),
        });
    }
    match a.problem.as_deref() {
        Some("example1") => Ok(ProblemSource::Example1),
        Some("example2") => Ok(ProblemSource::Example2 { p: a.p }),
        Some("example3") => Ok(ProblemSource::Example3 {
            m: a.m,
            case: a.case,
            seed: a.seed,
        }),
        Some("random") => Ok(ProblemSource::Random {
            m: a.m,
            ell: a.ell.unwrap_or(2),
            seed: a.seed,
        }),
        Some(other) => Err(QmeError::InvalidArgument(format!("unknown problem {other:?}"))),
        None => Err(QmeError::InvalidArgument("give --problem, --a0/--a1/--a2 or --bundle".into())),
    }
}

fn solve(a: SolveArgs) -> qme::Result<Outcome> {
    let inst = source(&a)?.load()?;
    let spec = RunSpec {
        solver: a.solver,
        tol: a.tol,
        kmax: a.max_iter,
        ell: a.ell,
        eps: a.eps,
        accept_on_residual: a.accept_on_residual,
    };
    let out = run(&spec, &inst)?;
    emit(&format_records(std::slice::from_ref(&out.record), a.format)?, a.output.as_deref())?;
    if let Some(sol) = &out.solution {
        let field = if inst.polynomial.is_real() { Field::Real } else { Field::Complex };
        if let Some(path) = &a.g_out {
            fs::write(path, write_matrix_market(&sol.g, field))?;
        }
        if let Some(path) = &a.r_out {
            fs::write(path, write_matrix_market(&sol.r, field))?;
        }
    }
    if out.record.converged {
        Ok(Outcome::Ok)
    } else {
        eprintln!("{}", serde_json::json!({ "error": "solver did not converge", "diagnostics": out.record.diagnostics }));
        Ok(Outcome::SolverFailure)
    }
}

fn bench(a: BenchArgs) -> qme::Result<Outcome> {
    let exp = match a.experiment.as_str() {
        "example1" => example1_experiment(),
        "example2" => example2_experiment(&doubling(a.pmin, a.pmax))?,
        "example3" => example3_experiment(&EXAMPLE3_MS, &[1, 2, 3], a.seed)?,
        other => return Err(QmeError::InvalidArgument(format!("unknown experiment {other:?}"))),
    };
    let text = match a.format {
        OutputFormat::Json => format_records(&exp.records, OutputFormat::Json)?,
        OutputFormat::Csv => exp.tables.iter().map(|(_, t)| t.to_csv()).collect::<qme::Result<Vec<_>>>()?.join("\n"),
        OutputFormat::Md => exp.tables.iter().map(|(n, t)| format!("{n}\n\n{}", t.to_markdown())).collect::<Vec<_>>().join("\n"),
    };
    emit(&text, a.output.as_deref())?;
    Ok(Outcome::Ok)
}

fn reproduce(outdir: &Path) -> qme::Result<Outcome> {
    let summary = reproduce_all(outdir)?;
    for c in &summary.checks {
        println!("{} {}: {} ({})", if c.pass { "pass" } else { "FAIL" }, c.experiment, c.item, c.measured);
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(if summary.all_pass() { Outcome::Ok } else { Outcome::SolverFailure })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Reproduce { outdir } => reproduce(&outdir),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::SolverFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(if e.is_usage_error() { 2 } else { 1 })
        }
    }
}
