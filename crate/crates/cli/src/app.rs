//! Argument parsing and dispatch, shared by the binary and in-process callers.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Report};
use crate::config::{AnalysisConfig, DEFAULT_DISPERSION, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::{CliError, CliResult};
use crate::tables::{read_matrix, read_preferences, read_pwi};
use pwi_core::model::{PreferenceStatement, DEFAULT_TIE_TOL};
use pwi_core::scoring::{DEFAULT_BIG_M, DEFAULT_CAP, DEFAULT_DELTA};

/// Score alternatives from pairwise winning indices.
#[derive(Parser)]
#[command(name = "pwiscore", version, about)]
pub struct Cli {
    /// Directory receiving all artifacts.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Standardize a raw performance CSV (alt_id, g1, …).
    Normalize { input: PathBuf },
    /// Estimate pairwise winning indices from a normalized CSV.
    Pwi {
        normalized: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Maximize eta, run the diagnostics and rank the alternatives.
    Score {
        /// Winning indices: JSON fractions or a percent CSV.
        pwi: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Enumerate compatible value functions at resolution delta.
    Enumerate {
        pwi: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
        #[command(flatten)]
        enumeration: Enumeration,
    },
    /// Best-case utility of every alternative.
    Dea { normalized: PathBuf },
    /// normalize, pwi, dea, score and enumerate in one go.
    Pipeline {
        input: PathBuf,
        #[arg(long)]
        prefs: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
        tie_tol: f64,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        enumeration: Enumeration,
    },
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct Scoring {
    /// Normalized evaluations the indices were computed from.
    #[arg(long)]
    matrix: PathBuf,
    /// Preference statements as a JSON list of {kind, a, b}.
    #[arg(long)]
    prefs: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
    tie_tol: f64,
}

#[derive(Args)]
struct Enumeration {
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_BIG_M)]
    big_m: f64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Number of dispersed functions to select for plotting.
    #[arg(long, default_value_t = DEFAULT_DISPERSION)]
    dispersion: usize,
    /// Comma-separated deltas; reports function counts instead of a single
    /// enumeration.
    #[arg(long, value_delimiter = ',')]
    delta_sweep: Option<Vec<f64>>,
}

fn load_prefs(path: Option<&Path>) -> CliResult<Vec<PreferenceStatement>> {
    path.map_or(Ok(Vec::new()), read_preferences)
}

/// Computes everything for one invocation; nothing is written yet.
pub fn run(cli: Cli) -> CliResult<Report> {
    let dir = cli.out_dir.as_path();
    let mut report = Report::new();
    let mut cfg = AnalysisConfig::default();
    match cli.command {
        Command::Normalize { input } => {
            let raw = read_matrix(&input)?;
            commands::normalize(&raw, dir, &mut report)?;
        }
        Command::Pwi {
            normalized,
            sampling,
        } => {
            cfg.samples = sampling.samples;
            cfg.seed = sampling.seed;
            cfg.validate()?;
            let norm = read_matrix(&normalized)?;
            commands::pwi(&norm, &cfg, dir, &mut report)?;
        }
        Command::Score { pwi, scoring } => {
            cfg.tie_tol = scoring.tie_tol;
            cfg.validate()?;
            let norm = read_matrix(&scoring.matrix)?;
            let p = read_pwi(&pwi)?;
            let prefs = load_prefs(scoring.prefs.as_deref())?;
            commands::score(&norm, &p, &prefs, &cfg, dir, &mut report)?;
        }
        Command::Enumerate {
            pwi,
            scoring,
            enumeration,
        } => {
            cfg.tie_tol = scoring.tie_tol;
            cfg.delta = enumeration.delta;
            cfg.big_m = enumeration.big_m;
            cfg.cap = enumeration.cap;
            cfg.dispersion = enumeration.dispersion;
            cfg.validate()?;
            let norm = read_matrix(&scoring.matrix)?;
            let p = read_pwi(&pwi)?;
            let prefs = load_prefs(scoring.prefs.as_deref())?;
            // Scoring artifacts are not part of this command's output.
            let mut scratch = Report::new();
            let scored = commands::score(&norm, &p, &prefs, &cfg, dir, &mut scratch)?;
            let Some(scored) = scored else {
                report.summary = scratch.summary;
                report.deferred = scratch.deferred;
                return Ok(report);
            };
            match enumeration.delta_sweep {
                Some(deltas) => {
                    commands::delta_sweep(&scored, &cfg, &deltas, dir, &mut report)?;
                }
                None => {
                    commands::enumerate(&scored, &cfg, dir, &mut report)?;
                }
            }
        }
        Command::Dea { normalized } => {
            let norm = read_matrix(&normalized)?;
            commands::dea(&norm, dir, &mut report)?;
        }
        Command::Pipeline {
            input,
            prefs,
            tie_tol,
            sampling,
            enumeration,
        } => {
            cfg = AnalysisConfig {
                samples: sampling.samples,
                seed: sampling.seed,
                delta: enumeration.delta,
                big_m: enumeration.big_m,
                cap: enumeration.cap,
                tie_tol,
                dispersion: enumeration.dispersion,
            };
            if enumeration.delta_sweep.is_some() {
                return Err(CliError::Input(
                    "--delta-sweep is only available on `enumerate`".into(),
                ));
            }
            let raw = read_matrix(&input)?;
            let prefs = load_prefs(prefs.as_deref())?;
            report = commands::pipeline(&raw, &prefs, &cfg, dir)?;
        }
    }
    Ok(report)
}


/// Parses `args` (program name first), runs and writes the artifacts.
/// Returns the written paths and the summary lines.
pub fn execute<I, T>(args: I) -> CliResult<(Vec<PathBuf>, Vec<String>)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Input(e.to_string()))?;
    run(cli).and_then(Report::finish)
}
