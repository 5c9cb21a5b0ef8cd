//! Command-line front end.
//!
//! Exit codes form the contract: 0 success, 2 invariant violations, 3
//! unreadable or unparseable files, 4 undefined update, 5 convergence
//! failure, 6 oracle disagreement, 7 enumeration guard exceeded.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::inference::gbr_curve;
use crate::model::{ModelFile, QueryFile};
use crate::oracle::{brute_force_updated_lower, DEFAULT_ENUMERATION_GUARD};
use crate::outputs::likelihood_vector;
use crate::propagation::PropagationConfig;
use crate::{updated_lower_expectation, Icthmc, ObservationSequence, Query};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNREADABLE: i32 = 3;
pub const EXIT_UNDEFINED: i32 = 4;
pub const EXIT_NO_CONVERGENCE: i32 = 5;
pub const EXIT_ORACLE_MISMATCH: i32 = 6;
pub const EXIT_GUARD: i32 = 7;

/// Inference for imprecise continuous-time hidden Markov chains.
#[derive(Debug, Parser)]
#[command(name = "icthmc", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check model (and optionally query) files against every structural
    /// invariant, printing one line per violation.
    Validate {
        model: PathBuf,
        query: Option<PathBuf>,
    },
    /// Compute the updated lower and upper expectation for a query.
    Infer {
        model: PathBuf,
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Emit the sampled lower curve of the shifted product expectation as
    /// CSV, for external plotting.
    GbrCurve {
        model: PathBuf,
        query: PathBuf,
        #[arg(long, default_value_t = 33)]
        samples: usize,
    },
    /// Cross-check the solver against brute-force enumeration of grid
    /// processes.
    OracleCheck {
        model: PathBuf,
        query: PathBuf,
        /// Grid pieces per time segment.
        #[arg(long, default_value_t = 6)]
        grid: usize,
        /// Cap on the number of enumerated grid processes.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_GUARD)]
        guard: u128,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Propagation settings, honouring `ICTHMC_MAX_REFINEMENTS`.
fn config() -> PropagationConfig {
    let mut cfg = PropagationConfig::default();
    if let Ok(raw) = std::env::var("ICTHMC_MAX_REFINEMENTS") {
        match raw.parse::<u32>() {
            Ok(v) => cfg.max_refinements = v,
            Err(_) => eprintln!("ignoring unparseable ICTHMC_MAX_REFINEMENTS={raw:?}"),
        }
    }
    cfg
}

fn read(path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        EXIT_UNREADABLE
    })
}

fn parse_model(path: &Path) -> Result<ModelFile, i32> {
    ModelFile::from_json(&read(path)?).map_err(|e| {
        eprintln!("cannot parse {}: {e}", path.display());
        EXIT_UNREADABLE
    })
}

fn parse_query(path: &Path) -> Result<QueryFile, i32> {
    QueryFile::from_json(&read(path)?).map_err(|e| {
        eprintln!("cannot parse {}: {e}", path.display());
        EXIT_UNREADABLE
    })
}

/// Load, validate, and convert a model/query pair.
fn load(model: &Path, query: &Path) -> Result<(Icthmc, ObservationSequence, Query), i32> {
    let mf = parse_model(model)?;
    let qf = parse_query(query)?;
    let mut diags = mf.validate();
    diags.extend(qf.validate(&mf.states));
    if !diags.is_empty() {
        for d in &diags {
            println!("{d}");
        }
        return Err(EXIT_INVALID);
    }
    let m = mf.to_model().map_err(|e| {
        println!("{e}");
        EXIT_INVALID
    })?;
    let obs = qf.to_observations().map_err(|e| {
        println!("{e}");
        EXIT_INVALID
    })?;
    let q = qf.to_query(&m.states).map_err(|e| {
        println!("{e}");
        EXIT_INVALID
    })?;
    Ok((m, obs, q))
}

fn inference_exit(e: &Error) -> i32 {
    match e {
        Error::UpdateUndefined => EXIT_UNDEFINED,
        Error::Convergence { .. } => EXIT_NO_CONVERGENCE,
        Error::EnumerationGuard { .. } => EXIT_GUARD,
        _ => EXIT_INVALID,
    }
}

fn cmd_validate(model: &Path, query: Option<&PathBuf>) -> i32 {
    let mf = match parse_model(model) {
        Ok(mf) => mf,
        Err(code) => return code,
    };
    let mut diags = mf.validate();
    if let Some(qpath) = query {
        match parse_query(qpath) {
            Ok(qf) => diags.extend(qf.validate(&mf.states)),
            Err(code) => return code,
        }
    }
    if diags.is_empty() {
        println!("OK");
        EXIT_OK
    } else {
        for d in &diags {
            println!("{d}");
        }
        EXIT_INVALID
    }
}

fn cmd_infer(model: &Path, query: &Path, format: Format) -> i32 {
    let (m, obs, q) = match load(model, query) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match updated_lower_expectation(&m, &obs, &q, &config()) {
        Ok(out) => {
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "lower": out.lower,
                        "upper": out.upper,
                        "regime": out.regime.to_string(),
                        "iterations": out.iterations,
                        "tolerance": out.tolerance,
                    })
                ),
                Format::Text => println!(
                    "lower {:.10}  upper {:.10}  regime {}  iterations {}  tolerance {:.3e}",
                    out.lower, out.upper, out.regime, out.iterations, out.tolerance
                ),
            }
            EXIT_OK
        }
        Err(e @ Error::UpdateUndefined) => {
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({"regime": "AllZero", "error": e.to_string()})
                ),
                Format::Text => println!("regime AllZero: {e}"),
            }
            EXIT_UNDEFINED
        }
        Err(e) => {
            eprintln!("{e}");
            inference_exit(&e)
        }
    }
}

fn cmd_gbr_curve(model: &Path, query: &Path, samples: usize) -> i32 {
    let (m, obs, q) = match load(model, query) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let factors: Result<Vec<_>, _> = obs
        .observations()
        .iter()
        .map(|o| likelihood_vector(&m.output, o))
        .collect();
    let factors = match factors {
        Ok(f) => f,
        Err(e) => {
            println!("{e}");
            return EXIT_INVALID;
        }
    };
    let mut cfg = config();
    cfg.tolerance = q.tolerance;
    match gbr_curve(
        &m.rates,
        &m.initial,
        &obs.times(),
        &factors,
        q.target_time,
        &q.f,
        samples,
        &cfg,
    ) {
        Ok(rows) => {
            println!("mu,G_lower(mu)");
            for (mu, g) in rows {
                println!("{mu},{g}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            inference_exit(&e)
        }
    }
}

fn cmd_oracle_check(model: &Path, query: &Path, grid: usize, guard: u128) -> i32 {
    let (m, obs, q) = match load(model, query) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let solved = match updated_lower_expectation(&m, &obs, &q, &config()) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("{e}");
            return inference_exit(&e);
        }
    };
    let factors: Vec<_> = obs
        .observations()
        .iter()
        .map(|o| likelihood_vector(&m.output, o))
        .collect::<Result<_, _>>()
        .expect("factors already computed once");
    match brute_force_updated_lower(
        &m.rates,
        &m.initial,
        &obs.times(),
        &factors,
        q.target_time,
        &q.f,
        grid,
        guard,
    ) {
        Ok((oracle_lo, _)) => {
            let gap = oracle_lo - solved.lower;
            println!(
                "solver lower {:.10}  oracle lower {:.10}  gap {:.3e}",
                solved.lower, oracle_lo, gap
            );
            if oracle_lo >= solved.lower - q.tolerance {
                EXIT_OK
            } else {
                eprintln!(
                    "oracle lower fell below solver lower by more than the tolerance {:.3e}",
                    q.tolerance
                );
                EXIT_ORACLE_MISMATCH
            }
        }
        Err(e) => {
            eprintln!("{e}");
            inference_exit(&e)
        }
    }
}

/// Parse the given arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version; usage errors exit 2.
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Validate { model, query } => cmd_validate(&model, query.as_ref()),
        Command::Infer {
            model,
            query,
            format,
        } => cmd_infer(&model, &query, format),
        Command::GbrCurve {
            model,
            query,
            samples,
        } => cmd_gbr_curve(&model, &query, samples),
        Command::OracleCheck {
            model,
            query,
            grid,
            guard,
        } => cmd_oracle_check(&model, &query, grid, guard),
    }
}
