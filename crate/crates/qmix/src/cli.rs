//! Argument parsing and dispatch. Every failure is reported as one JSON object
//! on stderr; the process exit code follows `CliError::exit_code`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use qmix_core::regularity::{InstanceKind, ScanConfig};
use serde::Serialize;
use serde_json::json;

use crate::analyze::{analyze, AnalyzeOptions, Section};
use crate::error::{CliError, CliResult, EXIT_OK};
use crate::mixing_cmd::{mixing, write_curve, MixingOptions};
use crate::reproduce::{reproduce, ReproduceOptions, Target};
use crate::scan::{existing_lines, parse_kind, resume_seed, run_scan, ScanOptions};
use crate::spec::GeneratorSpec;

#[derive(Debug, Parser)]
#[command(
    name = "qmix",
    version,
    about = "Spectral gap, Log-Sobolev constants and mixing bounds for Lindblad generators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gap, α₁, α₂, regularity evidence and ordering verdicts for one generator.
    Analyze {
        spec: PathBuf,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Estimator restarts per constant.
        #[arg(long, default_value_t = 24)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, value_delimiter = ',')]
        skip: Vec<Section>,
        /// Probes for the h-functional profile.
        #[arg(long, default_value_t = 10)]
        probes: usize,
    },
    /// Empirical worst-case distances and the χ²/LS bound curves.
    Mixing {
        spec: PathBuf,
        /// Curve path: CSV, or JSON when the extension is `.json`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        grid_n: usize,
        /// Haar-random initial states in addition to σ's eigenprojectors.
        #[arg(long, default_value_t = 50)]
        states: usize,
        #[arg(long, default_value_t = 24)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run a fixed experiment and compare against its tolerances.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[arg(long, default_value_t = 24)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Include slow cases.
        #[arg(long)]
        full: bool,
    },
    /// Regularity scan over random generators, streamed as JSON lines.
    Scan {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec!["generic".to_string(), "reversible".to_string(), "davies".to_string()])]
        kinds: Vec<String>,
        #[arg(long, default_value_t = 10)]
        probes: usize,
        /// Seed; taken from the output file when resuming.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn emit_error(e: &CliError) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}", e.to_json());
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{}", json!({"event": "seed_selected", "seed": s}));
        s
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::io(p, e)),
        None => {
            let mut o = std::io::stdout().lock();
            writeln!(o, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            emit_error(&err);
            return err.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            emit_error(&e);
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Analyze {
            spec,
            out,
            budget,
            seed,
            skip,
            probes,
        } => {
            let g = GeneratorSpec::load(&spec)?.build()?;
            let opts = AnalyzeOptions {
                budget,
                seed: resolve_seed(seed),
                skip: skip.into_iter().collect::<BTreeSet<_>>(),
                regularity_probes: probes,
            };
            let (report, violation) = analyze(&g, &opts)?;
            write_json(&report, out.as_deref())?;
            violation.map_or(Ok(()), Err)
        }
        Command::Mixing {
            spec,
            out,
            epsilon,
            t_max,
            grid_n,
            states,
            budget,
            seed,
        } => {
            let g = GeneratorSpec::load(&spec)?.build()?;
            let opts = MixingOptions {
                epsilon,
                t_max,
                grid_n,
                states,
                budget,
                seed: resolve_seed(seed),
            };
            let (curve, summary) = mixing(&g, &opts)?;
            write_curve(&curve, &out)?;
            write_json(&summary, None)?;
            if summary.dominated {
                Ok(())
            } else {
                Err(CliError::Verdict(format!(
                    "empirical trace distance exceeds a bound curve by {:e}",
                    summary.max_violation
                )))
            }
        }
        Command::Reproduce {
            target,
            budget,
            seed,
            full,
        } => {
            let opts = ReproduceOptions {
                budget,
                seed: resolve_seed(seed),
                full,
            };
            let report = reproduce(target, &opts)?;
            write_json(&report, None)?;
            if report.pass {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(CliError::Verdict(format!(
                    "failed checks: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::Scan {
            out,
            n,
            dims,
            kinds,
            probes,
            seed,
            jobs,
        } => {
            let kinds = kinds
                .iter()
                .map(|k| {
                    parse_kind(k)
                        .ok_or_else(|| CliError::Usage(format!("unknown instance kind `{k}`")))
                })
                .collect::<CliResult<Vec<InstanceKind>>>()?;
            if dims.iter().any(|&d| d < 2) {
                return Err(CliError::Usage("dimensions must be at least 2".to_string()));
            }
            let existing = existing_lines(&out)?;
            let seed = resolve_seed(resume_seed(&existing, seed)?);
            let opts = ScanOptions {
                n,
                config: ScanConfig {
                    dims,
                    kinds,
                    probes,
                    ..ScanConfig::default()
                },
                jobs,
            };
            let summary = run_scan(&out, seed, &existing, &opts)?;
            write_json(&summary, None)?;
            if summary.weak_violations + summary.strong_violations_reversible > 0 {
                Err(CliError::Verdict(format!(
                    "{} weak and {} reversible strong regularity violations",
                    summary.weak_violations, summary.strong_violations_reversible
                )))
            } else {
                Ok(())
            }
        }
    }
}
