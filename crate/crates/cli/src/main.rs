mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spintomo::circuits::InitialCircuit;
use spintomo::experiments::AnalysisOptions;
use spintomo::indicators::{Bipartition, PccMode};
use spintomo::measures::TwoQubitMeasurement;
use spintomo::Error;

use crate::config::{Experiment, RunConfig};

/// Tomographic correlation indicators, discord and spin squeezing for small spin registers.
#[derive(Parser, Debug)]
#[command(name = "spintomo", version)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for all sampling.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Use noiseless probabilities instead of shot sampling.
    #[arg(long, global = true)]
    exact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run experiment I, II or III and write the time series.
    Experiment(ExperimentArgs),
    /// Indicators and squeezing of a tomogram file.
    AnalyzeTomogram(AnalyzeArgs),
    /// Shot-sampled tomography of the equivalent circuit.
    Circuit(CircuitArgs),
    /// Print the built-in cases.
    ListPresets,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// I, II or III; inferred from --case when omitted.
    experiment: Option<Experiment>,
    /// Case label: i, ii, iii (experiment II) or A, B, C, D (experiment III).
    #[arg(long)]
    case: Option<String>,
    /// Write the tomogram at the grid point nearest to each time.
    #[arg(long, value_delimiter = ',', value_name = "T")]
    snapshot: Vec<f64>,
    /// Slice labels for the reduced average, e.g. xx,xy,xz.
    #[arg(long, value_delimiter = ',')]
    reduced: Option<Vec<String>>,
    /// Restrict two-qubit discord measurements to local products.
    #[arg(long)]
    product_measurement: bool,
    #[arg(long)]
    no_discord: bool,
    /// PCC of a multi-qubit side from the per-qubit maximum instead of the summed spin.
    #[arg(long)]
    pcc_per_qubit: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Tomogram file (JSON).
    path: Option<PathBuf>,
    /// Bipartition such as 0|1 or 0|1,2.
    #[arg(long)]
    bipartition: Option<Bipartition>,
    /// Slice labels for the reduced average.
    #[arg(long, value_delimiter = ',')]
    reduced: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// Rotation angle in [0, pi).
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Initial-state circuit instead: theta-zero or compact.
    #[arg(long)]
    initial: Option<InitialCircuit>,
    /// Shots per basis setting.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
}

fn analysis_mut(cfg: &mut RunConfig) -> Result<&mut AnalysisOptions, Error> {
    if cfg.analysis.is_none() {
        let base = match cfg.experiment_plan()? {
            config::Plan::I(c) => c.analysis,
            config::Plan::N(c) => c.analysis,
        };
        cfg.analysis = Some(base);
    }
    Ok(cfg.analysis.as_mut().expect("just set"))
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.exact |= cli.exact;
    match &cli.command {
        Command::Experiment(a) => {
            if a.experiment.is_some() {
                cfg.experiment = a.experiment;
            }
            if a.case.is_some() {
                cfg.case = a.case.clone();
            }
            if !a.snapshot.is_empty() {
                cfg.snapshots = a.snapshot.clone();
            }
            if a.reduced.is_some() || a.product_measurement || a.no_discord || a.pcc_per_qubit {
                let analysis = analysis_mut(&mut cfg)?;
                if let Some(r) = &a.reduced {
                    analysis.reduced_subset = Some(r.clone());
                }
                if a.product_measurement {
                    analysis.discord.two_qubit = TwoQubitMeasurement::LocalProduct;
                }
                if a.no_discord {
                    analysis.compute_discord = false;
                }
                if a.pcc_per_qubit {
                    analysis.pcc_mode = PccMode::PerQubitMax;
                }
            }
        }
        Command::AnalyzeTomogram(a) => {
            if a.path.is_some() {
                cfg.tomogram.path = a.path.clone();
            }
            if a.bipartition.is_some() {
                cfg.tomogram.bipartition = a.bipartition.clone();
            }
            if a.reduced.is_some() {
                cfg.tomogram.reduced_subset = a.reduced.clone();
            }
        }
        Command::Circuit(a) => {
            if let Some(t) = a.theta {
                cfg.circuit.theta = t;
                cfg.circuit.initial = None;
            }
            if a.initial.is_some() {
                cfg.circuit.initial = a.initial;
            }
            if let Some(s) = a.shots {
                cfg.circuit.shots = s;
            }
            if let Some(r) = a.repetitions {
                cfg.circuit.repetitions = r;
            }
        }
        Command::ListPresets => {}
    }
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CrossCheck(_) => 3,
        Error::Config(_)
        | Error::Parse(_)
        | Error::Json(_)
        | Error::InvalidArgument(_)
        | Error::Data(_)
        | Error::MissingSlice(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| match &cli.command {
        Command::Experiment(_) => commands::experiment(&cfg),
        Command::AnalyzeTomogram(_) => commands::analyze_tomogram(&cfg),
        Command::Circuit(_) => commands::circuit(&cfg),
        Command::ListPresets => commands::list_presets(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
