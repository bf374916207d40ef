//! The `witness` command-line front end.
//!
//! Each command reads an optional JSON payload, runs one library operation and
//! produces an artifact (JSON or CSV) plus a one-line summary. With `--out`
//! the artifact goes to the file and the summary to stdout; otherwise the
//! artifact goes to stdout and the summary to stderr.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 size limit.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::boolfn::{mermin_klyshko_f, walsh_beta, SignFunction};
use crate::error::{Error, Result};
use crate::montecarlo::{
    prop2_tail, sample_max_norms, szk_tail, theorem1_exceedance, write_records_csv, TailReport,
};
use crate::oracle::{
    build_dense, eigen_magnitudes, separable_bound_check, verify_ghz_eigenvectors,
};
use crate::polytope::{first_violated_facet, CorrelationVector};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectrum::{full_spectrum, maximize_norm, AngleConfig, OptimizeOptions};

/// Largest allowed dense-versus-closed-form eigenvalue discrepancy.
pub const ORACLE_TOL: f64 = 1e-10;

const DEFAULT_SAMPLES: usize = 200;
const DEFAULT_PROP2_SAMPLES: usize = 10_000;
const DEFAULT_SEPARABLE_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Walsh coefficients of a sign function.
    Transform,
    /// Maximize the witness norm over measurement angles.
    Optimize,
    /// Closed-form spectrum at given (or optimized) angles.
    Spectrum,
    /// Cross-check closed forms against dense matrices.
    OracleCheck,
    /// Test a correlation vector against every facet.
    PolytopeCheck,
    /// Optimized norms of uniformly random facets.
    Sample,
    /// Eigenvalue tail at fixed angles against 1/M².
    Prop2,
    /// Sup-norm tail report for random trigonometric polynomials.
    Szk,
    /// Certify the Mermin-Klyshko facet.
    Mk,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Optimize => "optimize",
            Command::Spectrum => "spectrum",
            Command::OracleCheck => "oracle-check",
            Command::PolytopeCheck => "polytope-check",
            Command::Sample => "sample",
            Command::Prop2 => "prop2",
            Command::Szk => "szk",
            Command::Mk => "mk",
        }
    }

    fn needs_input(self) -> bool {
        matches!(
            self,
            Command::Transform
                | Command::Optimize
                | Command::Spectrum
                | Command::OracleCheck
                | Command::PolytopeCheck
        )
    }

    fn needs_seed(self) -> bool {
        matches!(self, Command::Sample | Command::Prop2 | Command::Szk)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Parsed command line.
#[derive(Clone, Debug, Parser)]
#[command(
    name = "witness",
    version,
    about = "Werner-Wolf entanglement witness toolkit"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Number of parties.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Master seed; required by sample, prop2 and szk.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Worker threads for sampling commands (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Artifact path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON payload path.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Comma-separated C values (sample, szk) or M values (prop2).
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Vec<f64>,
}

/// What a successful run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    pub summary: String,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(command: Command, body: T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Envelope {
        schema: 1,
        command: command.name(),
        body,
    })?;
    text.push('\n');
    Ok(text)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in rows {
        writer.serialize(r)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Flat CSV form of a [`TailReport`].
#[derive(Serialize)]
struct TailRow {
    n: usize,
    samples: usize,
    parameter: f64,
    threshold: f64,
    exceedances: usize,
    empirical_probability: f64,
    ci_lo: f64,
    ci_hi: f64,
    bound: Option<f64>,
    tolerance: Option<f64>,
    consistent: Option<bool>,
}

impl From<&TailReport> for TailRow {
    fn from(t: &TailReport) -> Self {
        TailRow {
            n: t.n,
            samples: t.samples,
            parameter: t.parameter,
            threshold: t.threshold,
            exceedances: t.exceedances,
            empirical_probability: t.empirical_probability,
            ci_lo: t.wilson_ci_95[0],
            ci_hi: t.wilson_ci_95[1],
            bound: t.bound,
            tolerance: t.tolerance,
            consistent: t.consistent,
        }
    }
}

fn tail_csv(reports: &[TailReport]) -> Result<String> {
    csv_rows(&reports.iter().map(TailRow::from).collect::<Vec<_>>())
}

impl RunConfig {
    /// Config for `command` with every flag at its default.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            n: None,
            seed: None,
            samples: None,
            restarts: 32,
            tol: 1e-12,
            workers: None,
            out: None,
            format: Format::Json,
            input: None,
            grid: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == Some(0) {
            return Err(Error::InvalidInput("--n must be at least 1".into()));
        }
        if self.samples == Some(0) {
            return Err(Error::InvalidInput("--samples must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("--restarts must be at least 1".into()));
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::InvalidInput("--tol must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidInput("--workers must be at least 1".into()));
        }
        if self.command.needs_seed() && self.seed.is_none() {
            return Err(Error::InvalidInput(format!(
                "{} requires --seed",
                self.command.name()
            )));
        }
        Ok(())
    }

    fn optimizer(&self) -> OptimizeOptions {
        OptimizeOptions {
            restarts: self.restarts,
            tol: self.tol,
            seed: self.seed.unwrap_or(0),
            ..OptimizeOptions::default()
        }
    }

    fn required_n(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::InvalidInput(format!("{} requires --n", self.command.name())))
    }

    fn check_n(&self, n: usize) -> Result<()> {
        match self.n {
            Some(m) if m != n => Err(Error::InvalidInput(format!(
                "--n {m} does not match input with n = {n}"
            ))),
            _ => Ok(()),
        }
    }

    fn grid_or(&self, default: &[f64]) -> Vec<f64> {
        if self.grid.is_empty() {
            default.to_vec()
        } else {
            self.grid.clone()
        }
    }
}

/// A sign function, optionally with angles.
struct WitnessInput {
    f: SignFunction,
    angles: Option<AngleConfig>,
}

/// Accepts a bare sign function or `{"schema": 1, "f": {...}, "angles": [...]}`.
fn parse_witness(text: &str) -> Result<WitnessInput> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("f").is_none() {
        return Ok(WitnessInput {
            f: serde_json::from_value(value)?,
            angles: None,
        });
    }
    if let Some(schema) = value.get("schema") {
        if schema != 1 {
            return Err(Error::InvalidInput(format!("unsupported schema {schema}")));
        }
    }
    let f: SignFunction = serde_json::from_value(value["f"].clone())?;
    let angles: Option<AngleConfig> = match value.get("angles") {
        None | Some(serde_json::Value::Null) => None,
        Some(a) => Some(serde_json::from_value(a.clone())?),
    };
    if let Some(a) = &angles {
        if a.n() != f.n() {
            return Err(Error::InvalidInput(format!(
                "{} angle pairs for a function of n = {}",
                a.n(),
                f.n()
            )));
        }
    }
    Ok(WitnessInput { f, angles })
}

/// Runs one command. `input` is the payload text for commands that need one.
pub fn run(config: &RunConfig, input: Option<&str>) -> Result<Outcome> {
    config.validate()?;
    let cmd = config.command;
    let payload = if cmd.needs_input() {
        Some(input.ok_or_else(|| Error::InvalidInput(format!("{} requires --input", cmd.name())))?)
    } else {
        None
    };
    match cmd {
        Command::Transform => transform(config, payload.expect("checked")),
        Command::Optimize => optimize(config, payload.expect("checked")),
        Command::Spectrum => spectrum(config, payload.expect("checked")),
        Command::OracleCheck => oracle_check(config, payload.expect("checked")),
        Command::PolytopeCheck => polytope_check(config, payload.expect("checked")),
        Command::Sample => sample(config),
        Command::Prop2 => prop2(config),
        Command::Szk => szk(config),
        Command::Mk => mk(config),
    }
}

fn transform(config: &RunConfig, text: &str) -> Result<Outcome> {
    let f: SignFunction = serde_json::from_str(text)?;
    config.check_n(f.n())?;
    let beta = walsh_beta(&f);
    #[derive(Serialize)]
    struct Row {
        s: usize,
        numerator: i64,
        beta: f64,
    }
    let rows: Vec<Row> = beta
        .numerators()
        .iter()
        .enumerate()
        .map(|(s, &numerator)| Row {
            s,
            numerator,
            beta: beta.beta(s),
        })
        .collect();
    let artifact = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                n: usize,
                denominator: i64,
                numerators: Vec<i64>,
                beta: Vec<f64>,
                support_size: usize,
                plancherel: bool,
            }
            json(
                Command::Transform,
                Body {
                    n: f.n(),
                    denominator: beta.denominator(),
                    numerators: beta.numerators().to_vec(),
                    beta: beta.betas(),
                    support_size: beta.support_size(),
                    plancherel: beta.is_plancherel_normalized(),
                },
            )?
        }
        Format::Csv => csv_rows(&rows)?,
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "transform: n = {}, support size {}, Plancherel {}",
            f.n(),
            beta.support_size(),
            if beta.is_plancherel_normalized() {
                "ok"
            } else {
                "FAILED"
            }
        ),
    })
}

fn optimize(config: &RunConfig, text: &str) -> Result<Outcome> {
    let input = parse_witness(text)?;
    config.check_n(input.f.n())?;
    let report = maximize_norm(&input.f, &config.optimizer())?;
    let artifact = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                f_hex: String,
                #[serde(flatten)]
                report: &'a crate::spectrum::OptimizeReport,
            }
            json(
                Command::Optimize,
                Body {
                    f_hex: input.f.to_hex(),
                    report: &report,
                },
            )?
        }
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                sweep: usize,
                best_norm: f64,
            }
            let rows: Vec<Row> = report
                .history
                .iter()
                .enumerate()
                .map(|(sweep, &best_norm)| Row { sweep, best_norm })
                .collect();
            csv_rows(&rows)?
        }
    };
    let summary = format!(
        "optimize: best_norm {} after {} sweeps ({})",
        report.best_norm,
        report.sweeps,
        if report.converged {
            "converged"
        } else {
            "NOT converged"
        }
    );
    if !report.converged {
        return Err(Error::DidNotConverge {
            sweeps: report.sweeps,
            best_norm: report.best_norm,
        });
    }
    Ok(Outcome { artifact, summary })
}

fn spectrum(config: &RunConfig, text: &str) -> Result<Outcome> {
    let input = parse_witness(text)?;
    config.check_n(input.f.n())?;
    let angles = match input.angles {
        Some(a) => a,
        None => {
            maximize_norm(&input.f, &config.optimizer())?
                .ensure_converged()?
                .best_angles
        }
    };
    let result = full_spectrum(&input.f, &angles)?;
    let artifact = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                angles: &'a AngleConfig,
                #[serde(flatten)]
                result: &'a crate::spectrum::SpectrumResult,
            }
            json(
                Command::Spectrum,
                Body {
                    angles: &angles,
                    result: &result,
                },
            )?
        }
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                omega_index: usize,
                omega: String,
                magnitude: f64,
                phase: f64,
            }
            let rows: Vec<Row> = result
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| Row {
                    omega_index: i,
                    omega: e
                        .omega
                        .iter()
                        .map(|&w| if w > 0 { '+' } else { '-' })
                        .collect(),
                    magnitude: e.magnitude,
                    phase: e.phase,
                })
                .collect();
            csv_rows(&rows)?
        }
    };
    Ok(Outcome {
        artifact,
        summary: format!("spectrum: norm {}", result.norm),
    })
}

fn oracle_check(config: &RunConfig, text: &str) -> Result<Outcome> {
    let input = parse_witness(text)?;
    let f = input.f;
    config.check_n(f.n())?;
    let seed = config.seed.unwrap_or(0);
    let angles = input
        .angles
        .unwrap_or_else(|| AngleConfig::random(f.n(), &mut rng_from_seed(derive_seed(seed, 0))));
    let dense = eigen_magnitudes(&build_dense(&f, &angles)?)?;
    let mut analytic = full_spectrum(&f, &angles)?.magnitudes();
    analytic.sort_by(|a, b| b.total_cmp(a));
    let max_eigen_gap = dense
        .iter()
        .zip(&analytic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ghz_residual = verify_ghz_eigenvectors(&f, &angles)?;
    let samples = config.samples.unwrap_or(DEFAULT_SEPARABLE_SAMPLES);
    let separable_max = separable_bound_check(&f, &angles, samples, derive_seed(seed, 1))?;
    if max_eigen_gap > ORACLE_TOL {
        return Err(Error::NumericalFailure(format!(
            "dense and closed-form spectra differ by {max_eigen_gap:e}"
        )));
    }
    if ghz_residual > ORACLE_TOL {
        return Err(Error::NumericalFailure(format!(
            "GHZ residual {ghz_residual:e}"
        )));
    }
    #[derive(Serialize)]
    struct Body<'a> {
        n: usize,
        f_hex: String,
        angles: &'a AngleConfig,
        norm: f64,
        max_eigen_gap: f64,
        ghz_residual: f64,
        separable_samples: usize,
        separable_max: f64,
    }
    let body = Body {
        n: f.n(),
        f_hex: f.to_hex(),
        angles: &angles,
        norm: analytic[0],
        max_eigen_gap,
        ghz_residual,
        separable_samples: samples,
        separable_max,
    };
    let artifact = match config.format {
        Format::Json => json(Command::OracleCheck, body)?,
        Format::Csv => return Err(Error::InvalidInput("oracle-check only writes JSON".into())),
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "oracle-check: eigenvalue gap {max_eigen_gap:e}, GHZ residual {ghz_residual:e}, separable max {separable_max}"
        ),
    })
}

fn polytope_check(config: &RunConfig, text: &str) -> Result<Outcome> {
    let q: CorrelationVector = serde_json::from_str(text)?;
    config.check_n(q.n())?;
    let violated = first_violated_facet(&q)?;
    #[derive(Serialize)]
    struct Body {
        n: usize,
        inside: bool,
        violated_facet: Option<String>,
    }
    let hex = violated.as_ref().map(SignFunction::to_hex);
    let artifact = match config.format {
        Format::Json => json(
            Command::PolytopeCheck,
            Body {
                n: q.n(),
                inside: hex.is_none(),
                violated_facet: hex.clone(),
            },
        )?,
        Format::Csv => {
            return Err(Error::InvalidInput(
                "polytope-check only writes JSON".into(),
            ))
        }
    };
    Ok(Outcome {
        artifact,
        summary: hex.unwrap_or_else(|| "inside".into()),
    })
}

fn sample(config: &RunConfig) -> Result<Outcome> {
    let n = config.required_n()?;
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = config.seed.expect("validated");
    let run = sample_max_norms(n, samples, seed, &config.optimizer(), config.workers)?;
    let summary = format!(
        "sample: n = {n}, {samples} samples, median {}, max {}, unconverged {}",
        run.row.median, run.row.max, run.row.unconverged
    );
    let artifact = match config.format {
        Format::Json => {
            let exceedance = if n > 1 {
                theorem1_exceedance(
                    std::slice::from_ref(&run),
                    &config.grid_or(&[1.0, 2.0, 4.0]),
                )?
            } else {
                Vec::new()
            };
            #[derive(Serialize)]
            struct Body<'a> {
                seed: u64,
                row: &'a crate::montecarlo::ScalingRow,
                exceedance: Vec<TailReport>,
                records: &'a [crate::montecarlo::SampleRecord],
            }
            json(
                Command::Sample,
                Body {
                    seed,
                    row: &run.row,
                    exceedance,
                    records: &run.records,
                },
            )?
        }
        Format::Csv => {
            let mut buf = Vec::new();
            write_records_csv(&run.records, &mut buf)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
    };
    Ok(Outcome { artifact, summary })
}

fn prop2(config: &RunConfig) -> Result<Outcome> {
    let n = config.required_n()?;
    let samples = config.samples.unwrap_or(DEFAULT_PROP2_SAMPLES);
    let seed = config.seed.expect("validated");
    let reports = prop2_tail(
        n,
        samples,
        &config.grid_or(&[2.0, 3.0, 5.0]),
        seed,
        config.workers,
    )?;
    let all_ok = reports.iter().all(|r| r.consistent == Some(true));
    let artifact = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                n: usize,
                samples: usize,
                seed: u64,
                consistent: bool,
                tails: &'a [TailReport],
            }
            json(
                Command::Prop2,
                Body {
                    n,
                    samples,
                    seed,
                    consistent: all_ok,
                    tails: &reports,
                },
            )?
        }
        Format::Csv => tail_csv(&reports)?,
    };
    let probs: Vec<String> = reports
        .iter()
        .map(|r| format!("M={}: {}", r.parameter, r.empirical_probability))
        .collect();
    Ok(Outcome {
        artifact,
        summary: format!(
            "prop2: n = {n}, {} ({})",
            probs.join(", "),
            if all_ok {
                "within 1/M² + 4σ"
            } else {
                "EXCEEDS 1/M² + 4σ"
            }
        ),
    })
}

fn szk(config: &RunConfig) -> Result<Outcome> {
    let n = config.required_n()?;
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = config.seed.expect("validated");
    let report = szk_tail(
        n,
        samples,
        seed,
        &config.optimizer(),
        &config.grid_or(&[1.0, 2.0, 4.0]),
        config.workers,
    )?;
    let artifact = match config.format {
        Format::Json => json(Command::Szk, &report)?,
        Format::Csv => tail_csv(&report.tails)?,
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "szk: n = {n}, ceiling {:e}, identity gap {:e}",
            report.ceiling, report.identity_max_gap
        ),
    })
}

fn mk(config: &RunConfig) -> Result<Outcome> {
    let n = config.required_n()?;
    let cert = mermin_klyshko_f(n, &config.optimizer())?;
    let artifact = match config.format {
        Format::Json => json(Command::Mk, &cert)?,
        Format::Csv => return Err(Error::InvalidInput("mk only writes JSON".into())),
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "mk: n = {n}, certified norm {} for f {}",
            cert.report.best_norm, cert.f_hex
        ),
    })
}

/// Runs a parsed config end to end, handling I/O, and returns the exit code.
pub fn execute(config: &RunConfig) -> i32 {
    match execute_inner(config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute_inner(config: &RunConfig) -> Result<()> {
    let input = match &config.input {
        Some(path) => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let outcome = run(config, input.as_deref())?;
    match &config.out {
        Some(path) => {
            std::fs::write(path, &outcome.artifact)?;
            println!("{}", outcome.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.artifact.as_bytes())?;
            stdout.flush()?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(())
}

/// Entry point for the binary: parses `args` and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => execute(&config),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
