//! `capasym`: capillary-rise dynamics from the command line.
//!
//! Subcommands: `simulate` (reference integration vs the periodic
//! approximation), `eps-study` (small-damping convergence), `delta-study`
//! (undamped comparison solutions), `asym` (large-time amplitude recursion)
//! and `validate` (internal consistency checks). Results are written as
//! deterministic CSV or JSON; wall time goes to stderr only.

mod commands;
mod config;
mod output;

use capasym_core::integrator::Tolerances;
use capasym_core::model::DimensionlessParams;
use capasym_core::perturbation::IcFamily;
use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{CmdError, Fault};
use config::{ConfigError, Preset};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "capasym",
    version,
    about = "Capillary-rise oscillations: reference solver, perturbation studies, large-time asymptotics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Absolute local error tolerance of the stepper
    #[arg(long = "tol-abs")]
    tol_abs: Option<f64>,
    /// Relative local error tolerance of the stepper
    #[arg(long = "tol-rel")]
    tol_rel: Option<f64>,
}

impl CommonArgs {
    fn tolerances(&self, default: f64) -> Tolerances {
        Tolerances::new(
            self.tol_abs.unwrap_or(default),
            self.tol_rel.unwrap_or(default),
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the damped rise from rest and tabulate it against u0
    Simulate {
        /// Damping parameter eps = 1/sqrt(omega)
        #[arg(long, conflicts_with = "physical")]
        epsilon: Option<f64>,
        /// Config file with a [physical] block (tube parameters)
        #[arg(long)]
        physical: Option<PathBuf>,
        /// End of the integration interval
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Output grid spacing
        #[arg(long)]
        grid: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep eps and measure sup |u - u0| on [0, T]
    EpsStudy {
        /// Comma-separated eps values
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Launch undamped comparison solutions at s = delta and fit the error order
    DeltaStudy {
        /// Initial-condition family (A or B)
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated delta values
        #[arg(long)]
        deltas: Option<String>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Figure preset: fig2a or fig2b
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Amplitude recursion of the large-time asymptotics vs the numeric oscillator
    Asym {
        #[arg(long)]
        epsilon: Option<f64>,
        /// Anchor time T of the integral equation
        #[arg(long = "anchor-T")]
        anchor_t: Option<f64>,
        /// Picard iterations n
        #[arg(long)]
        iterations: Option<u32>,
        /// Truncation order N of the m-sum
        #[arg(long)]
        truncation: Option<u32>,
        /// Comparison window length past the anchor
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        grid: Option<f64>,
        /// Figure preset: fig3 or fig4
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the internal consistency checks (exit 0 iff all pass)
    Validate {
        #[arg(long, hide = true)]
        fault: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() {
    let started = Instant::now();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{{\"error\": {{\"kind\": \"{}\", \"message\": \"{}\"}}}}",
                e.kind(),
                e.message().replace('\\', "\\\\").replace('"', "\\\"")
            );
            e.exit_code()
        }
    };
    eprintln!("# wall_ms={}", started.elapsed().as_millis());
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, CmdError> {
    match cli.command {
        Command::Simulate {
            epsilon,
            physical,
            t_end,
            grid,
            common,
        } => {
            let mut t_end = t_end;
            let mut grid = grid;
            let mut tol_abs = common.tol_abs;
            let mut tol_rel = common.tol_rel;
            let dimensionless = match (epsilon, &physical) {
                (Some(e), None) => DimensionlessParams::from_epsilon(e)
                    .map_err(|err| CmdError::Config(err.to_string()))?,
                (None, Some(path)) => {
                    let (_, d) = config::physical_from_file(path).map_err(config_err)?;
                    // [run] keys in the file are defaults; flags override
                    let map = config::parse_config_file(path).map_err(config_err)?;
                    if t_end.is_none() {
                        t_end = parse_opt(&map, "run.t_end")?;
                    }
                    if grid.is_none() {
                        grid = parse_opt(&map, "run.grid")?;
                    }
                    if tol_abs.is_none() {
                        tol_abs = parse_opt(&map, "run.tol_abs")?;
                    }
                    if tol_rel.is_none() {
                        tol_rel = parse_opt(&map, "run.tol_rel")?;
                    }
                    d
                }
                (None, None) => {
                    return Err(CmdError::Config(
                        "exactly one of --epsilon or --physical is required".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let params = commands::SimulateParams {
                dimensionless,
                t_end: t_end.unwrap_or(40.0),
                grid: grid.unwrap_or(0.05),
                tolerances: Tolerances::new(tol_abs.unwrap_or(1e-10), tol_rel.unwrap_or(1e-10)),
            };
            let record = commands::cmd_simulate(&params)?;
            write_record(&record, &common)?;
            Ok(0)
        }
        Command::EpsStudy {
            epsilons,
            t_end,
            common,
        } => {
            let epsilons = match epsilons {
                Some(raw) => config::parse_list(&raw).map_err(config_err)?,
                None => vec![1e-1, 1e-2, 1e-3, 1e-4],
            };
            let params = commands::EpsStudyParams {
                epsilons,
                t_end: t_end.unwrap_or(12.0),
                tolerances: common.tolerances(1e-10),
                threads: config::thread_cap(),
            };
            let record = commands::cmd_eps_study(&params)?;
            write_record(&record, &common)?;
            Ok(0)
        }
        Command::DeltaStudy {
            family,
            deltas,
            t_end,
            preset,
            common,
        } => {
            let preset = preset
                .map(|p| Preset::parse(&p).and_then(config::delta_preset))
                .transpose()
                .map_err(config_err)?;
            let (preset_family, preset_deltas, preset_t) = match preset {
                Some((f, d, t)) => (Some(f), Some(d), Some(t)),
                None => (None, None, None),
            };
            let family = match family {
                Some(ref s) => match s.as_str() {
                    "A" | "a" => IcFamily::A,
                    "B" | "b" => IcFamily::B,
                    other => {
                        return Err(CmdError::Config(format!(
                            "unknown family `{other}` (expected A or B)"
                        )))
                    }
                },
                None => preset_family.ok_or_else(|| {
                    CmdError::Config("either --family or --preset is required".into())
                })?,
            };
            let deltas = match deltas {
                Some(raw) => config::parse_list(&raw).map_err(config_err)?,
                None => preset_deltas.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.02, 0.01]),
            };
            let params = commands::DeltaStudyParams {
                family,
                deltas,
                t_end: t_end.or(preset_t).unwrap_or(6.0),
                tolerances: common.tolerances(1e-10),
                threads: config::thread_cap(),
            };
            let record = commands::cmd_delta_study(&params)?;
            write_record(&record, &common)?;
            Ok(0)
        }
        Command::Asym {
            epsilon,
            anchor_t,
            iterations,
            truncation,
            window,
            grid,
            preset,
            common,
        } => {
            let preset = preset
                .map(|p| Preset::parse(&p).and_then(config::asym_preset))
                .transpose()
                .map_err(config_err)?;
            let (epsilon, t_anchor) = match (epsilon, anchor_t, preset) {
                (Some(e), Some(t), _) => (e, t),
                (e, t, Some((pe, pt))) => (e.unwrap_or(pe), t.unwrap_or(pt)),
                _ => {
                    return Err(CmdError::Config(
                        "need --epsilon and --anchor-T, or a --preset".into(),
                    ))
                }
            };
            let params = commands::AsymParams {
                epsilon,
                t_anchor,
                iterations: iterations.unwrap_or(6),
                truncation: truncation.unwrap_or(30),
                window: window.unwrap_or(20.0),
                grid: grid.unwrap_or(0.05),
                tolerances: common.tolerances(1e-12),
            };
            let record = commands::cmd_asym(&params)?;
            write_record(&record, &common)?;
            Ok(0)
        }
        Command::Validate { fault, common } => {
            let fault = match fault.as_deref() {
                None => None,
                Some("sigma") => Some(Fault::Sigma),
                Some(other) => return Err(CmdError::Config(format!("unknown fault `{other}`"))),
            };
            let (record, all_pass) = commands::cmd_validate(fault)?;
            write_record(&record, &common)?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn config_err(e: ConfigError) -> CmdError {
    CmdError::Config(e.to_string())
}

fn parse_opt(
    map: &std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<Option<f64>, CmdError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CmdError::Config(format!("`{key}` is not a number: {raw}"))),
    }
}

fn write_record(record: &output::OutputRecord, common: &CommonArgs) -> Result<(), CmdError> {
    let text = match common.format {
        Format::Csv => record.to_csv(),
        Format::Json => record.to_json(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CmdError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
