//! The `hgkit` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
//! 3 input that parses but is not a valid model, 4 a verification with
//! failing checks.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::classify::{dimension_gate, ClassTarget, DimensionAdvisory};
use crate::error::HgError;
use crate::io::{ModelFile, PointModelFile};
use crate::model::{JacobiPolicy, LieAlgebraModel, PointModelSpace};
use crate::report::{Report, Section};
use crate::residual::DEFAULT_TOL;
use crate::search::{search_class, PenaltyRecord, SearchOptions};
use crate::suites::{nullspace_report, Analysis, Suite};
use crate::tensor::Dim;

#[derive(Debug, Parser)]
#[command(name = "hgkit", version, about = "Left-invariant almost hypercomplex structures on Lie algebras")]
pub struct Cli {
    /// Relative tolerance; overrides the tolerance stored in a model file.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write PREFIX.txt and PREFIX.json instead of printing only to stdout.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub output: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class residuals and membership of a model.
    Classify { model: PathBuf },
    /// Run identity suites; exits 4 if any applicable check fails.
    Verify {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Potentials, the connection D, its torsion and their identities.
    Connection { model: PathBuf },
    /// Curvature identities, scalar curvatures and the strong/weak/flat verdict.
    Curvature { model: PathBuf },
    /// Search for structure constants in a target class.
    Search {
        /// `W133`, `W133-strict`, or labels such as `W3J2,W3J3`.
        #[arg(long)]
        target: String,
        /// Quaternionic dimension; the algebra has dimension 4n.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optimizer iterations per restart.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Stop after this many certified models.
        #[arg(long, default_value_t = 1)]
        models: usize,
    },
    /// Dimensions of the linear solution spaces for the standard structure.
    Nullspace {
        #[arg(long)]
        n: usize,
    },
    /// Sample admissible point data, optionally inside a class.
    GeneratePointModel {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        class: Option<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Invalid(String),
    Failed(usize),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::Failed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Invalid(m) => write!(f, "invalid model: {m}"),
            CliError::Failed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(e: HgError) -> CliError {
    CliError::Usage(e.to_string())
}

fn load(path: &Path) -> CliResult<(LieAlgebraModel, Option<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file = ModelFile::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let model = file
        .into_model(JacobiPolicy::Reject)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok((model, file.tolerance))
}

fn tolerance(cli: Option<f64>, file: Option<f64>) -> CliResult<f64> {
    let tol = cli.or(file).unwrap_or(DEFAULT_TOL);
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("tolerance must be positive, got {tol}")))
    }
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(report: &Report, output: Option<&Path>) -> CliResult<()> {
    let text = report.to_text();
    print!("{text}");
    if let Some(prefix) = output {
        write(&with_suffix(prefix, ".txt"), &text)?;
        write(&with_suffix(prefix, ".json"), &report.to_json())?;
    }
    Ok(())
}

fn emit_checked(report: &Report, output: Option<&Path>) -> CliResult<()> {
    emit(report, output)?;
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::Failed(n)),
    }
}

fn dim(n: usize) -> CliResult<Dim> {
    Dim::new(n).map_err(usage)
}

#[derive(Serialize)]
struct SearchJson<'a> {
    report: &'a Report,
    advisory: &'a DimensionAdvisory,
    penalty_log: &'a [PenaltyRecord],
}

fn search(
    target: &str,
    n: usize,
    seed: u64,
    opts: SearchOptions,
    output: Option<&Path>,
) -> CliResult<()> {
    let target: ClassTarget = target.parse().map_err(usage)?;
    let dim = dim(n)?;
    let outcome = search_class(&target, dim, seed, &opts).map_err(usage)?;
    let mut report = Report::new(format!("search for {target} in dimension {}", dim.ambient()), opts.tol);
    let mut s = Section::new("search")
        .text("seed", seed.to_string())
        .count("restarts", opts.restarts)
        .count("iterations per restart", opts.budget)
        .count("class subspace dimension", outcome.subspace_dim)
        .count("point-data nullspace dimension", outcome.advisory.nullspace_dim)
        .value("best penalty", outcome.best_penalty)
        .count("certified models", outcome.models.len());
    if let Some(m) = &outcome.advisory.message {
        s = s.text("advisory", m.clone());
    }
    report.push(s);
    for (k, found) in outcome.models.iter().enumerate() {
        let analysis = Analysis::new(&found.model, opts.tol);
        let mut s = Section::new(format!("model {}", k + 1))
            .value("penalty", found.penalty)
            .text("restart", found.restart.map_or("abelian".to_string(), |r| r.to_string()))
            .count("iterations", found.iterations)
            .value("max |F1| / max |C|", found.f1_ratio)
            .text("class", found.report.summary());
        if let Some(weak) = analysis.is_weak() {
            s = s.text("curvature of D", if weak { "weak" } else { "strong or flat" });
        }
        report.push(s);
    }
    let text = report.to_text();
    print!("{text}");
    let models: Vec<String> = outcome
        .models
        .iter()
        .map(|f| ModelFile::from_model(&f.model, Some(opts.tol)).to_json())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    match output {
        Some(prefix) => {
            write(&with_suffix(prefix, ".txt"), &text)?;
            let json = SearchJson {
                report: &report,
                advisory: &outcome.advisory,
                penalty_log: &outcome.log,
            };
            write(
                &with_suffix(prefix, ".json"),
                &serde_json::to_string_pretty(&json).expect("search summary serializes"),
            )?;
            for (k, m) in models.iter().enumerate() {
                write(&with_suffix(prefix, &format!(".model{}.json", k + 1)), m)?;
            }
        }
        None => {
            for (k, m) in models.iter().enumerate() {
                println!("\n--- model {} ---\n{m}", k + 1);
            }
        }
    }
    Ok(())
}

fn generate_point_model(n: usize, seed: u64, class: Option<&str>, output: Option<&Path>) -> CliResult<()> {
    let dim = dim(n)?;
    let conditions = match class {
        Some(c) => {
            let target: ClassTarget = c.parse().map_err(usage)?;
            if target.strict {
                return Err(CliError::Usage("strict classes are not linear; drop the -strict suffix".into()));
            }
            if dimension_gate(dim, &target).nullspace_dim == 0 {
                log::warn!("{target} admits only zero point data in dimension {}", dim.ambient());
            }
            target.conditions()
        }
        None => Vec::new(),
    };
    let space = PointModelSpace::standard(dim, &conditions);
    let json = PointModelFile::from_point_model(&space.sample(seed))
        .to_json()
        .map_err(|e| CliError::Input(e.to_string()))?;
    match output {
        Some(prefix) => write(&with_suffix(prefix, ".json"), &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Classify { model } => {
            let (m, ft) = load(model)?;
            emit(&Analysis::new(&m, tolerance(cli.tol, ft)?).classify_report(), output)
        }
        Command::Verify { model, suite } => {
            let (m, ft) = load(model)?;
            emit_checked(&Analysis::new(&m, tolerance(cli.tol, ft)?).verify_report(*suite), output)
        }
        Command::Connection { model } => {
            let (m, ft) = load(model)?;
            emit_checked(&Analysis::new(&m, tolerance(cli.tol, ft)?).connection_report(), output)
        }
        Command::Curvature { model } => {
            let (m, ft) = load(model)?;
            emit_checked(&Analysis::new(&m, tolerance(cli.tol, ft)?).curvature_report(), output)
        }
        Command::Search {
            target,
            n,
            seed,
            budget,
            restarts,
            models,
        } => {
            let opts = SearchOptions {
                restarts: *restarts,
                budget: *budget,
                max_models: (*models).max(1),
                tol: tolerance(cli.tol, None)?,
                ..SearchOptions::default()
            };
            search(target, *n, *seed, opts, output)
        }
        Command::Nullspace { n } => {
            let d = dim(*n)?;
            if *n > 2 {
                log::warn!("dimension {} builds dense systems with {} unknowns", d.ambient(), d.ambient().pow(4));
            }
            emit(&nullspace_report(d), output)
        }
        Command::GeneratePointModel { n, seed, class } => generate_point_model(*n, *seed, class.as_deref(), output),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hgkit: {e}");
            e.code()
        }
    }
}
