use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hemo1d::config::{NetworkConfig, Overrides};
use hemo1d::output::{write_coupling_errors, write_diagnostics, write_snapshot_csv};
use hemo1d::study::{custom_study, run_study, StudyOptions, REFERENCE_CELLS, TABLE_LEVELS};
use hemo1d::{Error, SchemeOrder};
use log::{error, info};

const DEFAULT_OUT: &str = "hemo1d-out";

#[derive(Parser)]
#[command(name = "hemo1d", version, about = "One-dimensional blood flow on vascular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct OverrideArgs {
    /// Courant number.
    #[arg(long)]
    cfl: Option<f64>,
    /// Cells per edge.
    #[arg(long)]
    cells: Option<usize>,
    /// Relaxation rate; 0 selects the relaxation limit.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    order: Option<u32>,
}

impl From<OverrideArgs> for Overrides {
    fn from(a: OverrideArgs) -> Self {
        Overrides {
            cfl: a.cfl,
            cells: a.cells,
            epsilon: a.epsilon,
            order: a.order,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured network and write snapshots and diagnostics as CSV.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Output directory; defaults to `run.output_dir`, then HEMO1D_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run a convergence study: table1, table2, table3, viscoelastic-compare or custom.
    Study {
        name: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
        order: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Network for the custom study.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cell counts of the custom study.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Reference cell count of the custom study.
        #[arg(long, default_value_t = REFERENCE_CELLS)]
        reference: usize,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

fn output_dir(flag: Option<PathBuf>, config: Option<&Path>) -> PathBuf {
    flag.or_else(|| config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os("HEMO1D_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load(path: &Path, overrides: OverrideArgs) -> hemo1d::Result<NetworkConfig> {
    let mut cfg = NetworkConfig::load(path)?;
    cfg.apply(&overrides.into());
    Ok(cfg)
}

fn run(config: &Path, overrides: OverrideArgs, out: Option<PathBuf>) -> hemo1d::Result<()> {
    let cfg = load(config, overrides)?;
    let mut net = cfg.build()?;
    let dir = output_dir(out, cfg.run.output_dir.as_deref());
    info!(
        "running {} edge(s), {} junction(s) to t = {}",
        net.edges.len(),
        net.junctions.len(),
        net.settings.t_end
    );
    let record = net.run()?;
    let files = write_snapshot_csv(&record, &dir)?;
    write_diagnostics(&record, fs::File::create(dir.join("diagnostics.csv"))?)?;
    if !record.coupling.is_empty() {
        write_coupling_errors(&record, fs::File::create(dir.join("coupling_errors.csv"))?)?;
    }
    info!(
        "{} steps, {} snapshot file(s) in {}",
        record.steps.len(),
        files.len(),
        dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn study(
    name: &str,
    order: u32,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
    levels: Option<Vec<usize>>,
    reference: usize,
    epsilon: Option<f64>,
) -> hemo1d::Result<()> {
    let mut opts = StudyOptions::with_order(SchemeOrder::from_int(order)?);
    if let Some(e) = epsilon {
        opts.epsilon = e;
    }
    let dir = output_dir(out, None);
    let report = if name == "custom" {
        let path = config.ok_or_else(|| Error::Domain("the custom study needs --config".into()))?;
        let mut cfg = NetworkConfig::load(&path)?;
        cfg.run.order = order;
        if let Some(e) = epsilon {
            cfg.run.epsilon = e;
        }
        let levels = levels.unwrap_or_else(|| TABLE_LEVELS.to_vec());
        custom_study(&cfg, &levels, reference, opts.cfl2_per_cm)?
    } else {
        run_study(name, &opts)?
    };
    let files = report.write(&dir)?;
    print!("{}", report.text);
    info!("wrote {} file(s) to {}", files.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides, out } => run(&config, overrides, out),
        Command::Validate { config, overrides } => load(&config, overrides).and_then(|c| c.build()).map(|net| {
            info!(
                "{}: {} edge(s), {} junction(s), valid",
                config.display(),
                net.edges.len(),
                net.junctions.len()
            );
        }),
        Command::Study {
            name,
            order,
            out,
            config,
            levels,
            reference,
            epsilon,
        } => study(&name, order, out, config, levels, reference, epsilon),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
