//! Benchmark harness: single runs, experiment tables and full reproduction.
//!
//! Every run produces a [`RunRecord`]. Solver failures become records with
//! `converged = false` and the error in `diagnostics`, so a table always has
//! one row per planned run. Floating-point cells are written with 17
//! significant digits; only `time_ms` varies between identical runs.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline::{fpi_solve, fpi_solve_with, scr_solve, BaselineConfig, BaselineSolution, CR_KMAX, FPI_KMAX};
use crate::bscr::{bscr_solve, BscrConfig, DEFAULT_EPS, DEFAULT_KMAX, DEFAULT_TOL};
use crate::cr::cr_solve;
use crate::dense::{ones, re, zeros};
use crate::io::{fmt_f64, load_bundle, load_polynomial_mtx};
use crate::poly::{QuadMatrixPolynomial, SolutionPair};
use crate::problems::{example1, example2, example3, random_split_instance, ProblemInstance};
use crate::report::SolveReport;
use crate::{QmeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Bscr,
    Cr,
    Scr,
    Fpi,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Bscr, SolverKind::Scr, SolverKind::Cr, SolverKind::Fpi];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Bscr => "bscr",
            SolverKind::Cr => "cr",
            SolverKind::Scr => "scr",
            SolverKind::Fpi => "fpi",
        }
    }

    /// Display name used in tables.
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Bscr => "BS-CR",
            SolverKind::Cr => "CR",
            SolverKind::Scr => "S-CR",
            SolverKind::Fpi => "FPI",
        }
    }

    /// For `bscr` this caps the subspace stage.
    pub fn default_kmax(self) -> usize {
        match self {
            SolverKind::Bscr => DEFAULT_KMAX,
            SolverKind::Cr | SolverKind::Scr => CR_KMAX,
            SolverKind::Fpi => FPI_KMAX,
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = QmeError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| QmeError::InvalidArgument(format!("unknown solver {s:?} (expected bscr, cr, scr or fpi)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Md,
}

impl FromStr for OutputFormat {
    type Err = QmeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "md" | "markdown" => Ok(OutputFormat::Md),
            other => Err(QmeError::InvalidArgument(format!("unknown format {other:?} (expected csv, json or md)"))),
        }
    }
}

/// Where the coefficients come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Example1,
    Example2 { p: usize },
    Example3 { m: usize, case: u32, seed: u64 },
    Random { m: usize, ell: usize, seed: u64 },
    MatrixMarket { a0: PathBuf, a1: PathBuf, a2: PathBuf },
    Bundle(PathBuf),
}

impl ProblemSource {
    pub fn load(&self) -> Result<ProblemInstance> {
        let from_file = |polynomial: QuadMatrixPolynomial, label: String| ProblemInstance {
            polynomial,
            ell: 0,
            known_g: None,
            known_r: None,
            label,
            seed: None,
        };
        match self {
            ProblemSource::Example1 => Ok(example1()),
            ProblemSource::Example2 { p } => example2(*p),
            ProblemSource::Example3 { m, case, seed } => example3(*m, *case, *seed),
            ProblemSource::Random { m, ell, seed } => {
                random_split_instance(*m, *ell, *seed, crate::poly::Field::Complex)
            }
            ProblemSource::MatrixMarket { a0, a1, a2 } => {
                Ok(from_file(load_polynomial_mtx(a0, a1, a2)?, a0.display().to_string()))
            }
            ProblemSource::Bundle(path) => Ok(from_file(load_bundle(path)?, path.display().to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub solver: SolverKind,
    pub tol: f64,
    /// `None` picks the solver default.
    pub kmax: Option<usize>,
    /// Required for `bscr` unless the instance carries one.
    pub ell: Option<usize>,
    /// `bscr` only: gap threshold of the subspace stage.
    pub eps: f64,
    /// `bscr` only: also stop the subspace stage on a small residual.
    pub accept_on_residual: bool,
}

impl RunSpec {
    pub fn new(solver: SolverKind) -> Self {
        Self {
            solver,
            tol: DEFAULT_TOL,
            kmax: None,
            ell: None,
            eps: DEFAULT_EPS,
            accept_on_residual: false,
        }
    }

    pub fn kmax(&self) -> usize {
        self.kmax.unwrap_or(self.solver.default_kmax())
    }

    /// Checks the solver can run on `inst`; failures are configuration errors.
    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        if !(self.tol > 0.0) || self.kmax() == 0 {
            return Err(QmeError::InvalidArgument(format!(
                "need tol > 0 and max-iter >= 1 (got {:e}, {})",
                self.tol,
                self.kmax()
            )));
        }
        match self.solver {
            SolverKind::Bscr => {
                let ell = self.resolved_ell(inst)?;
                if ell >= inst.polynomial.m() {
                    return Err(QmeError::InvalidArgument(format!("ell = {ell} must be below m = {}", inst.polynomial.m())));
                }
            }
            SolverKind::Scr => inst
                .polynomial
                .qbd_check()
                .map_err(|e| QmeError::InvalidArgument(format!("scr needs QBD input: {e}")))?,
            SolverKind::Cr | SolverKind::Fpi => {}
        }
        Ok(())
    }

    fn resolved_ell(&self, inst: &ProblemInstance) -> Result<usize> {
        match self.ell.or((inst.ell > 0).then_some(inst.ell)) {
            Some(l) if l >= 1 => Ok(l),
            _ => Err(QmeError::InvalidArgument("bscr needs --ell >= 1".into())),
        }
    }

    pub fn bscr_config(&self, inst: &ProblemInstance) -> Result<BscrConfig> {
        Ok(BscrConfig {
            ell: self.resolved_ell(inst)?,
            eps: self.eps,
            kmax: self.kmax(),
            tol: self.tol,
            accept_on_residual: self.accept_on_residual,
        })
    }
}

/// One row of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub m: usize,
    pub ell: Option<usize>,
    pub case: Option<u32>,
    pub p: Option<usize>,
    pub iterations: usize,
    pub residual_g: f64,
    pub residual_r: f64,
    pub time_ms: f64,
    pub converged: bool,
    /// `||R + A2 (A1 + A2 G)^-1|| / ||R||` when the run converged.
    pub gr_defect: Option<f64>,
    /// Messages joined with `"; "`.
    pub diagnostics: String,
}

impl RunRecord {
    pub const HEADER: [&'static str; 13] = [
        "problem",
        "solver",
        "m",
        "ell",
        "case",
        "p",
        "iterations",
        "residual_g",
        "residual_r",
        "time_ms",
        "converged",
        "gr_defect",
        "diagnostics",
    ];

    pub fn from_report(inst: &ProblemInstance, solver: &str, ell: Option<usize>, report: &SolveReport) -> Self {
        let (case, p) = parse_label(&inst.label);
        Self {
            problem: inst.label.clone(),
            solver: solver.to_string(),
            m: inst.polynomial.m(),
            ell,
            case,
            p,
            iterations: report.iterations,
            residual_g: report.residual_g,
            residual_r: report.residual_r,
            time_ms: report.wall_time.as_secs_f64() * 1e3,
            converged: report.converged,
            gr_defect: None,
            diagnostics: report.diagnostics.join("; "),
        }
    }

    /// Like [`RunRecord::from_report`], adding the G/R coupling defect of a converged run.
    pub fn solved(inst: &ProblemInstance, solver: &str, ell: Option<usize>, solution: &SolutionPair, report: &SolveReport) -> Self {
        let mut rec = Self::from_report(inst, solver, ell, report);
        if report.converged {
            rec.gr_defect = inst.polynomial.gr_coupling_defect(&solution.g, &solution.r).ok();
        }
        rec
    }

    fn failed(inst: &ProblemInstance, solver: &str, ell: Option<usize>, err: &QmeError) -> Self {
        let mut rec = match err.root() {
            QmeError::Breakdown { partial: Some(rep), .. } => Self::from_report(inst, solver, ell, rep),
            _ => Self::from_report(inst, solver, ell, &SolveReport::new(solver, inst.polynomial.m())),
        };
        rec.converged = false;
        let msg = format!("error: {err}");
        rec.diagnostics = if rec.diagnostics.is_empty() { msg } else { format!("{}; {msg}", rec.diagnostics) };
        rec
    }

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |x: Option<String>| x.unwrap_or_default();
        vec![
            self.problem.clone(),
            self.solver.clone(),
            self.m.to_string(),
            opt(self.ell.map(|x| x.to_string())),
            opt(self.case.map(|x| x.to_string())),
            opt(self.p.map(|x| x.to_string())),
            self.iterations.to_string(),
            fmt_f64(self.residual_g),
            fmt_f64(self.residual_r),
            fmt_f64(self.time_ms),
            self.converged.to_string(),
            opt(self.gr_defect.map(fmt_f64)),
            self.diagnostics.clone(),
        ]
    }
}

fn parse_label(label: &str) -> (Option<u32>, Option<usize>) {
    let field = |key: &str| {
        label
            .split('-')
            .find_map(|part| part.strip_prefix(key))
            .and_then(|v| v.parse::<usize>().ok())
    };
    (field("case").map(|c| c as u32), field("p"))
}

pub struct RunOutcome {
    pub record: RunRecord,
    pub solution: Option<SolutionPair>,
}

/// Runs `spec` on `inst`. Numerical failures are folded into the record;
/// configuration problems are returned as errors.
pub fn run(spec: &RunSpec, inst: &ProblemInstance) -> Result<RunOutcome> {
    spec.validate(inst)?;
    let p = &inst.polynomial;
    let name = spec.solver.name();
    let baseline = BaselineConfig::new(spec.tol, spec.kmax());
    let (result, ell): (Result<(SolutionPair, SolveReport)>, Option<usize>) = match spec.solver {
        SolverKind::Bscr => {
            let cfg = spec.bscr_config(inst)?;
            let res = bscr_solve(p, &cfg).map(|s| {
                let mut report = s.report.solve;
                report.note(format!(
                    "gap ratios {:.3e} {:.3e}, rcond(Z11) {:.3e}, rcond(A122) {:.3e}",
                    s.report.gap_ratios[0], s.report.gap_ratios[1], s.report.z11_rcond, s.report.a122_rcond
                ));
                (s.solution, report)
            });
            (res, Some(cfg.ell))
        }
        SolverKind::Cr => (cr_solve(p, spec.tol, spec.kmax()).map(|s| (s.solution, s.report)), None),
        SolverKind::Scr => (scr_solve(p, &baseline).map(split), None),
        SolverKind::Fpi => (fpi_solve(p, &baseline).map(split), None),
    };
    Ok(match result {
        Ok((solution, report)) => {
            let record = RunRecord::solved(inst, name, ell, &solution, &report);
            RunOutcome {
                record,
                solution: Some(solution),
            }
        }
        Err(e) => RunOutcome {
            record: RunRecord::failed(inst, name, ell, &e),
            solution: None,
        },
    })
}

fn split(s: BaselineSolution) -> (SolutionPair, SolveReport) {
    (s.solution, s.report)
}

pub fn format_records(records: &[RunRecord], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(records)? + "\n"),
        OutputFormat::Csv => csv_string(&RunRecord::HEADER, records.iter().map(RunRecord::csv_row)),
        OutputFormat::Md => Ok(markdown_table(&RunRecord::HEADER, records.iter().map(RunRecord::csv_row))),
    }
}

fn csv_string<I: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: I) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| QmeError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

fn markdown_table<I: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: I) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

/// Short human form for summaries.
fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

/// A published-vs-measured comparison with its pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub experiment: String,
    pub item: String,
    pub published: String,
    pub measured: String,
    pub pass: bool,
}

impl Check {
    fn new(experiment: &str, item: impl Into<String>, published: impl Into<String>, measured: impl Into<String>, pass: bool) -> Self {
        Self {
            experiment: experiment.into(),
            item: item.into(),
            published: published.into(),
            measured: measured.into(),
            pass,
        }
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        csv_string(&self.header, self.rows.iter().cloned())
    }

    pub fn to_markdown(&self) -> String {
        markdown_table(&self.header, self.rows.iter().cloned())
    }
}

pub struct Experiment {
    pub records: Vec<RunRecord>,
    pub tables: Vec<(&'static str, Table)>,
    pub checks: Vec<Check>,
}

fn must(spec: &RunSpec, inst: &ProblemInstance) -> RunRecord {
    run(spec, inst).map(|o| o.record).unwrap_or_else(|e| RunRecord::failed(inst, spec.solver.name(), spec.ell, &e))
}

const EX1_PUBLISHED: [(SolverKind, usize, f64); 4] = [
    (SolverKind::Bscr, 1, 3.9e-15),
    (SolverKind::Scr, 29, 3.0e-12),
    (SolverKind::Cr, 30, 4.4e-16),
    (SolverKind::Fpi, 200_000, 1.5e-10),
];

/// The 4x4 null-recurrent QBD with every solver. CR and S-CR stop at
/// residual `1e-10`; FPI runs until `1e-10` or 200,000 steps.
pub fn example1_experiment() -> Experiment {
    let inst = example1();
    let p = &inst.polynomial;
    let mut records: Vec<RunRecord> = [SolverKind::Bscr, SolverKind::Scr, SolverKind::Cr]
        .into_iter()
        .map(|kind| {
            let spec = match kind {
                SolverKind::Bscr => RunSpec { ell: Some(3), ..RunSpec::new(kind) },
                _ => RunSpec { tol: 1e-10, ..RunSpec::new(kind) },
            };
            must(&spec, &inst)
        })
        .collect();

    // FPI is run directly to record the 20,000-step residual on the way, once
    // from the uniform stochastic start and once from zero for comparison.
    let fpi_from = |g0, label: &str| {
        let mut r20k = f64::NAN;
        let cfg = BaselineConfig::new(1e-10, FPI_KMAX);
        let res = fpi_solve_with(p, g0, &cfg, |k, _, r| {
            if k == 20_000 {
                r20k = r;
            }
        });
        let rec = match res {
            Ok(s) => RunRecord::solved(&inst, label, None, &s.solution, &s.report),
            Err(e) => RunRecord::failed(&inst, label, None, &e),
        };
        (rec, r20k)
    };
    let (uniform, r20k) = fpi_from(ones(4, 4) / re(4.0), "fpi");
    let (zero, r20k_zero) = fpi_from(zeros(4, 4), "fpi-zero-start");
    records.push(uniform);
    records.push(zero.clone());

    let mut rows = Vec::new();
    for (rec, published) in records.iter().zip(EX1_PUBLISHED.iter().map(Some).chain([None])) {
        let label = match published {
            Some((k, _, _)) => k.label().to_string(),
            None => "FPI (G0 = 0)".to_string(),
        };
        rows.push(vec![
            label,
            rec.iterations.to_string(),
            fmt_f64(rec.residual_g),
            fmt_f64(rec.residual_r),
            rec.converged.to_string(),
            fmt_f64(rec.time_ms),
            published.map(|(_, it, _)| it.to_string()).unwrap_or_default(),
            published.map(|(_, _, r)| fmt_f64(*r)).unwrap_or_default(),
        ]);
    }
    let table = Table {
        header: vec![
            "method",
            "iterations",
            "residual_g",
            "residual_r",
            "converged",
            "time_ms",
            "published_iterations",
            "published_residual",
        ],
        rows,
    };

    let [bscr, scr, cr, fpi, _] = [0, 1, 2, 3, 4].map(|i| &records[i]);
    let e = "example1";
    let checks = vec![
        Check::new(e, "BS-CR iterations <= 3, residual <= 1e-12", "1, 3.9e-15", format!("{}, {}", bscr.iterations, sci(bscr.residual_g)), bscr.iterations <= 3 && bscr.residual_g <= 1e-12),
        Check::new(e, "CR residual <= 1e-10 within 40 iterations", "30, 4.4e-16", format!("{}, {}", cr.iterations, sci(cr.residual_g)), cr.iterations <= 40 && cr.residual_g <= 1e-10),
        Check::new(
            e,
            "S-CR residual <= 1e-10 within 40 iterations, more than BS-CR",
            "29, 3.0e-12",
            format!("{}, {}", scr.iterations, sci(scr.residual_g)),
            scr.iterations <= 40 && scr.residual_g <= 1e-10 && scr.iterations > bscr.iterations,
        ),
        Check::new(
            e,
            "FPI residual at 200,000 in [1e-11, 1e-9], 20,000 residual >= 3x",
            "200,000, 1.5e-10",
            format!("{}, {} (20,000: {}; zero start {} / {})", fpi.iterations, sci(fpi.residual_g), sci(r20k), sci(zero.residual_g), sci(r20k_zero)),
            fpi.iterations == FPI_KMAX && (1e-11..=1e-9).contains(&fpi.residual_g) && r20k >= 3.0 * fpi.residual_g,
        ),
    ];
    Experiment {
        records,
        tables: vec![("example1_table.csv", table)],
        checks,
    }
}

/// `p = pmin, 2 pmin, ...` up to `pmax`.
pub fn doubling(pmin: usize, pmax: usize) -> Vec<usize> {
    std::iter::successors(Some(pmin.max(2)), |&p| Some(p * 2)).take_while(|&p| p <= pmax).collect()
}

/// CR and S-CR run the full 100 steps (no residual stop); BS-CR stops on the gap test.
pub fn example2_experiment(ps: &[usize]) -> Result<Experiment> {
    let mut records = Vec::new();
    let mut res_rows = Vec::new();
    let mut time_rows = Vec::new();
    let mut checks = Vec::new();
    for &pp in ps {
        let inst = example2(pp)?;
        let run_one = |kind: SolverKind| {
            let spec = match kind {
                SolverKind::Bscr => RunSpec { ell: Some(2), ..RunSpec::new(kind) },
                _ => RunSpec { tol: f64::MIN_POSITIVE, ..RunSpec::new(kind) },
            };
            must(&spec, &inst)
        };
        let [b, s, c] = [SolverKind::Bscr, SolverKind::Scr, SolverKind::Cr].map(run_one);
        res_rows.push(vec![pp.to_string(), fmt_f64(b.residual_g), fmt_f64(s.residual_g), fmt_f64(c.residual_g)]);
        time_rows.push(vec![
            pp.to_string(),
            inst.polynomial.m().to_string(),
            b.iterations.to_string(),
            fmt_f64(b.time_ms),
            s.iterations.to_string(),
            fmt_f64(s.time_ms),
            c.iterations.to_string(),
            fmt_f64(c.time_ms),
        ]);
        checks.push(Check::new(
            "example2",
            format!("p = {pp}: BS-CR residual <= 1e-12, CR residual >= 10x BS-CR"),
            "BS-CR ~1e-15, CR ~1e-8",
            format!("BS-CR {} ({} it), CR {}, S-CR {}", sci(b.residual_g), b.iterations, sci(c.residual_g), sci(s.residual_g)),
            b.residual_g <= 1e-12 && c.residual_g >= 10.0 * b.residual_g && b.iterations <= DEFAULT_KMAX,
        ));
        records.extend([b, s, c]);
    }
    let residuals = Table {
        header: vec!["p", "residual_bscr", "residual_scr", "residual_cr"],
        rows: res_rows,
    };
    let times = Table {
        header: vec!["p", "m", "iterations_bscr", "time_ms_bscr", "iterations_scr", "time_ms_scr", "iterations_cr", "time_ms_cr"],
        rows: time_rows,
    };
    Ok(Experiment {
        records,
        tables: vec![("example2_residuals.csv", residuals), ("example2_time_iters.csv", times)],
        checks,
    })
}

const EX3_PUBLISHED: [(usize, u32, usize, f64, Option<usize>, f64); 12] = [
    (16, 1, 4, 1.23e-12, Some(17), 6.11e-9),
    (16, 2, 4, 8.44e-13, Some(19), 5.52e-9),
    (16, 3, 4, 1.52e-12, None, 3.03e-6),
    (32, 1, 4, 2.27e-12, Some(18), 3.56e-9),
    (32, 2, 4, 3.84e-12, Some(18), 7.63e-9),
    (32, 3, 4, 1.06e-11, None, 4.94e-6),
    (64, 1, 4, 7.49e-11, Some(17), 7.19e-9),
    (64, 2, 4, 6.58e-10, None, 1.38e-6),
    (64, 3, 4, 5.90e-10, None, 8.39e-6),
    (128, 1, 4, 5.49e-11, Some(19), 3.05e-9),
    (128, 2, 4, 5.36e-10, None, 3.86e-6),
    (128, 3, 4, 1.91e-10, None, 1.24e-5),
];

/// BS-CR stops as soon as residual `<= 1e-7` (or on the gap test); CR
/// stops on the same residual or after 100 steps.
pub fn example3_experiment(ms: &[usize], cases: &[u32], seed: u64) -> Result<Experiment> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let dash = |it: usize, conv: bool| if conv { it.to_string() } else { "-".to_string() };
    for &m in ms {
        for &case in cases {
            let inst = example3(m, case, seed)?;
            let bspec = RunSpec { accept_on_residual: true, ..RunSpec::new(SolverKind::Bscr) };
            let b = must(&bspec, &inst);
            let c = must(&RunSpec::new(SolverKind::Cr), &inst);
            let published = EX3_PUBLISHED.iter().find(|x| x.0 == m && x.1 == case);
            rows.push(vec![
                m.to_string(),
                case.to_string(),
                dash(b.iterations, b.converged),
                fmt_f64(b.residual_g),
                dash(c.iterations, c.converged),
                fmt_f64(c.residual_g),
                published.map(|x| x.2.to_string()).unwrap_or_default(),
                published.map(|x| fmt_f64(x.3)).unwrap_or_default(),
                published.map(|x| x.4.map_or("-".into(), |i| i.to_string())).unwrap_or_default(),
                published.map(|x| fmt_f64(x.5)).unwrap_or_default(),
            ]);
            let pub_b = published.map_or(String::new(), |x| format!("{}, {}", x.2, sci(x.3)));
            checks.push(Check::new(
                "example3",
                format!("m = {m}, case {case}: BS-CR iterations <= 6, residual <= 1e-8"),
                pub_b,
                format!("{}, {}", b.iterations, sci(b.residual_g)),
                b.iterations <= 6 && b.residual_g <= 1e-8,
            ));
            if case == 3 {
                let pub_c = published.map_or(String::new(), |x| format!("-, {}", sci(x.5)));
                checks.push(Check::new(
                    "example3",
                    format!("m = {m}, case 3: CR does not reach 1e-7 within 100 iterations"),
                    pub_c,
                    format!("{}, {}", dash(c.iterations, c.converged), sci(c.residual_g)),
                    !c.converged,
                ));
            }
            records.extend([b, c]);
        }
    }
    let table = Table {
        header: vec![
            "m",
            "case",
            "iterations_bscr",
            "residual_bscr",
            "iterations_cr",
            "residual_cr",
            "published_iterations_bscr",
            "published_residual_bscr",
            "published_iterations_cr",
            "published_residual_cr",
        ],
        rows,
    };
    Ok(Experiment {
        records,
        tables: vec![("example3_table.csv", table)],
        checks,
    })
}

pub struct Summary {
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
    pub markdown: String,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const EXAMPLE2_PS: [usize; 5] = [4, 8, 16, 32, 64];
pub const EXAMPLE3_MS: [usize; 4] = [16, 32, 64, 128];
pub const EXAMPLE3_SEED: u64 = 1;

/// Runs all three experiments and writes their CSV tables and `summary.md`
/// into `outdir`. An experiment that cannot run is reported in the summary
/// and the remaining ones still run.
pub fn reproduce_all(outdir: &Path) -> Result<Summary> {
    fs::create_dir_all(outdir)?;
    let mut files = Vec::new();
    let mut checks = Vec::new();
    let mut md = String::from("# Reproduction summary\n\n");
    type Runner = Box<dyn Fn() -> Result<Experiment>>;
    let experiments: [(&str, Runner); 3] = [
        ("Example 1", Box::new(|| Ok(example1_experiment()))),
        ("Example 2", Box::new(|| example2_experiment(&EXAMPLE2_PS))),
        ("Example 3", Box::new(|| example3_experiment(&EXAMPLE3_MS, &[1, 2, 3], EXAMPLE3_SEED))),
    ];
    for (title, exp) in experiments {
        let _ = writeln!(md, "## {title}\n");
        match exp() {
            Ok(exp) => {
                for (name, table) in &exp.tables {
                    let path = outdir.join(name);
                    fs::write(&path, table.to_csv()?)?;
                    files.push(path);
                    let _ = writeln!(md, "`{name}`\n\n{}", table.to_markdown());
                }
                checks.extend(exp.checks);
            }
            Err(e) => {
                let _ = writeln!(md, "not run: {e}\n");
                checks.push(Check::new(title, "experiment ran", "", format!("error: {e}"), false));
            }
        }
    }
    let rows = checks.iter().map(|c| {
        vec![
            c.experiment.clone(),
            c.item.clone(),
            c.published.clone(),
            c.measured.clone(),
            if c.pass { "pass" } else { "FAIL" }.to_string(),
        ]
    });
    let _ = writeln!(md, "## Checks\n\n{}", markdown_table(&["experiment", "check", "published", "measured", "result"], rows));
    let passed = checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(md, "{passed} of {} checks pass. Time columns are informational only.", checks.len());
    let path = outdir.join("summary.md");
    fs::write(&path, &md)?;
    files.push(path);
    Ok(Summary {
        checks,
        files,
        markdown: md,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("newton".parse::<SolverKind>().is_err());
        assert_eq!("md".parse::<OutputFormat>().unwrap(), OutputFormat::Md);
    }

    #[test]
    fn default_iteration_caps() {
        assert_eq!(SolverKind::Cr.default_kmax(), 100);
        assert_eq!(SolverKind::Scr.default_kmax(), 100);
        assert_eq!(SolverKind::Bscr.default_kmax(), 12);
        assert_eq!(SolverKind::Fpi.default_kmax(), 200_000);
        assert_eq!(RunSpec::new(SolverKind::Cr).tol, 1e-7);
    }

    #[test]
    fn labels_are_parsed() {
        assert_eq!(parse_label("example3-m16-case2"), (Some(2), None));
        assert_eq!(parse_label("example2-p8"), (None, Some(8)));
        assert_eq!(parse_label("a0.mtx"), (None, None));
    }

    #[test]
    fn compatibility_is_checked_before_running() {
        let inst = example3(6, 1, 1).unwrap();
        let err = run(&RunSpec::new(SolverKind::Scr), &inst).err().unwrap();
        assert!(err.is_usage_error(), "{err}");
        let mut file_like = inst.clone();
        file_like.ell = 0;
        let err = run(&RunSpec::new(SolverKind::Bscr), &file_like).err().unwrap();
        assert!(err.is_usage_error(), "{err}");
    }

    #[test]
    fn failures_become_records() {
        // Example 1 with the wrong ell has no gap.
        let spec = RunSpec { ell: Some(1), ..RunSpec::new(SolverKind::Bscr) };
        let out = run(&spec, &example1()).unwrap();
        assert!(out.solution.is_none());
        assert!(!out.record.converged);
        assert!(out.record.diagnostics.contains("no singular value gap"), "{}", out.record.diagnostics);
    }

    #[test]
    fn csv_row_round_trips_through_serde() {
        let out = run(&RunSpec { ell: Some(3), ..RunSpec::new(SolverKind::Bscr) }, &example1()).unwrap();
        let text = format_records(std::slice::from_ref(&out.record), OutputFormat::Csv).unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let back: RunRecord = rd.deserialize().next().unwrap().unwrap();
        assert_eq!(back, out.record);
        let json = format_records(std::slice::from_ref(&out.record), OutputFormat::Json).unwrap();
        let back: Vec<RunRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0], out.record);
    }

    #[test]
    fn doubling_sequence() {
        assert_eq!(doubling(4, 64), vec![4, 8, 16, 32, 64]);
        assert_eq!(doubling(5, 30), vec![5, 10, 20]);
    }
}
