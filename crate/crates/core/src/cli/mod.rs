//! Command-line front end: `curvature`, `verify` and `construct`.
//!
//! Exit codes: 0 pass, 1 residual failure, 2 config error, 3 numeric failure.

pub mod config;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::curvature_at;
use crate::error::GeomError;
use crate::families::GrwRule;
use crate::field::ScalarField;
use crate::soliton::{classify, infer_lambda, sample_points, SolitonData};
use config::{ConfigError, Construction, Job, JobError, Overrides, Potential, RawConfig};
use report::{fmt_point, fmt_sci, Csv};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Rows in the sampled tables of a construct artifact.
const TABLE_POINTS: usize = 17;

#[derive(Debug, Parser)]
#[command(
    name = "soliton-lab",
    version,
    about = "Curvature and Yamabe soliton checks for coordinate metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Job configuration (JSON).
    pub config: PathBuf,
    /// Output file; overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Residual tolerance; overrides the config's `tolerance`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Points per grid axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Use the formulas exactly as published (walker3, walker4).
    #[arg(long)]
    pub paper_literal: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scalar curvature and Ricci components over the grid.
    Curvature(Common),
    /// Soliton residuals over the grid with an inferred or given lambda.
    Verify(Common),
    /// Build a family's soliton, write it out, then verify it.
    Construct(Common),
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        CliError::Config(e)
    }
}

impl From<JobError> for CliError {
    fn from(e: JobError) -> CliError {
        match e {
            JobError::Config(c) => CliError::Config(c),
            JobError::Numeric(g) => CliError::Numeric(g.to_string()),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> CliError {
        CliError::Numeric(e.to_string())
    }
}

/// What a command prints and where its report goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Verdict line for standard output.
    pub verdict: Option<String>,
    pub report: String,
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_CONFIG,
            };
        }
    };
    let (common, which) = match &cli.command {
        Command::Curvature(c) => (c, Which::Curvature),
        Command::Verify(c) => (c, Which::Verify),
        Command::Construct(c) => (c, Which::Construct),
    };
    match execute(which, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    Curvature,
    Verify,
    Construct,
}

fn execute(which: Which, common: &Common) -> Result<i32, CliError> {
    let text = fs::read_to_string(&common.config).map_err(|e| {
        CliError::Config(ConfigError::new(
            "",
            format!("cannot read {}: {e}", common.config.display()),
        ))
    })?;
    let raw = RawConfig::from_json(&text)?;
    let ov = Overrides {
        tolerance: common.tol,
        grid_count: common.grid,
        paper_literal: common.paper_literal,
    };
    let job = Job::from_raw(&raw, ov)?;
    let outcome = match which {
        Which::Curvature => cmd_curvature(&job)?,
        Which::Verify => cmd_verify(&job)?,
        Which::Construct => cmd_construct(&job)?,
    };
    let out = common.out.clone().or_else(|| job.output.as_ref().map(PathBuf::from));
    match out {
        Some(path) => write_file(&path, &outcome.report)?,
        None if which != Which::Verify => {
            let _ = std::io::stdout().write_all(outcome.report.as_bytes());
        }
        None => {}
    }
    if let Some(v) = &outcome.verdict {
        let _ = writeln!(std::io::stdout(), "{v}");
    }
    Ok(outcome.exit_code)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))
}

fn coord_names(job: &Job) -> Vec<String> {
    job.metric.chart().names().to_vec()
}

fn numeric_at(p: &[f64], e: GeomError) -> CliError {
    CliError::Numeric(format!("at {}: {e}", fmt_point(p)))
}

/// τ and the upper triangle of the Ricci tensor at every grid point.
pub fn cmd_curvature(job: &Job) -> Result<Outcome, CliError> {
    let names = coord_names(job);
    let n = names.len();
    let mut header = names.clone();
    header.push("tau".into());
    for i in 0..n {
        for j in i..n {
            header.push(format!("ric_{}_{}", names[i], names[j]));
        }
    }
    let points = job.grid.points();
    let rows = points
        .par_iter()
        .map(|p| {
            let c = curvature_at(&job.metric, p).map_err(|e| numeric_at(p, e))?;
            let mut row = p.clone();
            row.push(c.tau);
            for i in 0..n {
                for j in i..n {
                    row.push(c.ricci[(i, j)]);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut csv = Csv::new(&[("command", "curvature"), ("family", job.family.name())], &header);
    for r in &rows {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Numeric(format!(
                "non-finite curvature at {}",
                fmt_point(&r[..n])
            )));
        }
        csv.row(r);
    }
    Ok(Outcome {
        exit_code: EXIT_PASS,
        verdict: None,
        report: csv.as_str().to_string(),
    })
}

/// Summary of a soliton check over the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub lambda: f64,
    pub lambda_spread: f64,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub class: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        if self.pass {
            format!("PASS λ={} class={}", fmt_sci(self.lambda), self.class)
        } else {
            format!(
                "FAIL max_residual={} at {} lambda_spread={}",
                fmt_sci(self.max_residual),
                fmt_point(&self.worst_point),
                fmt_sci(self.lambda_spread)
            )
        }
    }
}

fn potential_of(job: &Job) -> Result<&std::sync::Arc<dyn ScalarField>, CliError> {
    match &job.potential {
        Potential::Field(f) => Ok(f),
        Potential::None => Err(CliError::Config(ConfigError::new("potential", "missing"))),
    }
}

fn verify_rows(job: &Job) -> Result<(Verdict, Csv), CliError> {
    let phi = potential_of(job)?;
    let points = job.grid.points();
    let fit = infer_lambda(&job.metric, phi.as_ref(), job.mu, &points).map_err(CliError::from)?;
    let lambda = job.lambda.unwrap_or(fit.lambda_hat);
    // spread around the λ actually used, so a wrong explicit λ cannot pass
    let spread = fit
        .per_point
        .iter()
        .fold(0.0f64, |a, l| a.max((l - lambda).abs()))
        .max(fit.spread);
    let data = SolitonData::new(phi.clone(), lambda, job.mu);
    let samples = sample_points(&job.metric, &data, &points).map_err(CliError::from)?;

    let mut header = coord_names(job);
    header.extend(["residual_max", "tau", "laplacian", "lambda_at"].map(String::from));
    let mut csv = Csv::new(&[("command", "verify"), ("family", job.family.name())], &header);
    let mut worst = 0;
    for (k, s) in samples.iter().enumerate() {
        let mut row = s.point.clone();
        row.extend([s.residual_max, s.tau, s.laplacian, s.lambda_at]);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Numeric(format!(
                "non-finite residual at {}",
                fmt_point(&s.point)
            )));
        }
        csv.row(&row);
        if s.residual_max > samples[worst].residual_max {
            worst = k;
        }
    }
    let max_residual = samples[worst].residual_max;
    let verdict = Verdict {
        pass: max_residual <= job.tolerance && spread <= job.tolerance,
        lambda,
        lambda_spread: spread,
        max_residual,
        worst_point: samples[worst].point.clone(),
        class: classify(lambda, job.tolerance).to_string(),
    };
    Ok((verdict, csv))
}

/// Residual CSV plus a PASS/FAIL verdict.
pub fn cmd_verify(job: &Job) -> Result<Outcome, CliError> {
    let (verdict, csv) = verify_rows(job)?;
    Ok(Outcome {
        exit_code: if verdict.pass { EXIT_PASS } else { EXIT_FAIL },
        verdict: Some(verdict.line()),
        report: csv.as_str().to_string(),
    })
}

#[derive(Debug, Serialize)]
struct Artifact {
    schema: u32,
    family: String,
    form: String,
    potential: String,
    metric_function: String,
    table_columns: Vec<String>,
    table: Vec<Vec<f64>>,
    tolerance: f64,
    verdict: Verdict,
}

/// Construct the family's soliton, self-verify, and emit a JSON artifact.
pub fn cmd_construct(job: &Job) -> Result<Outcome, CliError> {
    let construction = job.construction.as_ref().ok_or_else(|| {
        let field = match job.family {
            config::Family::Grw => "alpha",
            config::Family::Walker3 => "eta",
            config::Family::Walker4 => "c",
            _ => "family",
        };
        CliError::Config(ConfigError::new(
            field,
            format!(
                "construct needs a grw, walker3 or walker4 construction (family `{}`)",
                job.family.name()
            ),
        ))
    })?;
    let (verdict, _) = verify_rows(job)?;
    let (potential, metric_function, columns, table) = match construction {
        Construction::Grw { spec, potential } => {
            let rows = potential
                .sample(TABLE_POINTS)?
                .into_iter()
                .map(|(t, v)| vec![t, v])
                .collect();
            let integrand = match potential.rule {
                GrwRule::InverseWarp => format!("1/({})", spec.b),
                GrwRule::Warp => spec.b.to_string(),
            };
            (
                format!("{}*integral({integrand}, {}, t)", potential.alpha, potential.t0),
                spec.b.to_string(),
                vec!["t".to_string(), "phi".to_string()],
                rows,
            )
        }
        Construction::Walker3(inst) => (inst.f.to_string(), inst.phi.to_string(), Vec::new(), Vec::new()),
        Construction::Walker4 { spec, instance } => {
            let rows = instance
                .e
                .sample(TABLE_POINTS)?
                .into_iter()
                .map(|(t, b, e)| vec![t, b, e])
                .collect();
            (
                instance.f.describe(),
                spec.b.to_string(),
                vec!["t".to_string(), "int_b".to_string(), "E".to_string()],
                rows,
            )
        }
    };
    let artifact = Artifact {
        schema: report::SCHEMA,
        family: job.family.name().to_string(),
        form: match construction {
            Construction::Grw { potential, .. } => potential.rule.name().to_string(),
            _ => job.form.to_string(),
        },
        potential,
        metric_function,
        table_columns: columns,
        table,
        tolerance: job.tolerance,
        verdict: verdict.clone(),
    };
    let mut text = serde_json::to_string_pretty(&artifact).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    Ok(Outcome {
        exit_code: if verdict.pass { EXIT_PASS } else { EXIT_FAIL },
        verdict: Some(verdict.line()),
        report: text,
    })
}
