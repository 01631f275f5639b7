use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ris_chanest::harness::report::{write_outputs, write_summary_csv, write_sweep, Format};
use ris_chanest::harness::{run_experiment, run_sweep, Axis, AxisValue, RunOptions};
use ris_chanest::{Error, Estimator, Resolution, SystemConfig};

#[derive(Parser)]
#[command(name = "ris-chanest", version, about = "Monte-Carlo NMSE experiments for RIS cascaded-channel estimation with few-bit ADCs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run(Common),
    /// Sweep one parameter with common random numbers across values.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Swept parameter: snr_db, bits or tau.
        #[arg(long)]
        axis: Axis,
        /// Comma-separated axis values; defaults to the matching figure's grid.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML config file; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; trial k draws from streams derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo trials per configuration.
    #[arg(long)]
    trials: Option<usize>,
    /// SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// ADC bits per real dimension (1-8) or `inf`.
    #[arg(long)]
    bits: Option<Resolution>,
    /// Training length.
    #[arg(long)]
    tau: Option<usize>,
    /// Comma-separated subset of bigamp, ls, almmse.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<Estimator>>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write the per-iteration BiG-AMP trace.
    #[arg(long)]
    trace: bool,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<SystemConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                SystemConfig::from_toml_str(&text)?
            }
            None => SystemConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.snr_db {
            cfg.snr_db = v;
        }
        if let Some(v) = self.bits {
            cfg.resolution = v;
        }
        if let Some(v) = self.tau {
            cfg.training_len = v;
        }
        if let Some(v) = &self.estimators {
            cfg.estimators = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn options(&self) -> RunOptions {
        RunOptions { workers: self.workers, trace: self.trace }
    }
}

fn default_values(axis: Axis) -> &'static str {
    match axis {
        Axis::SnrDb => "-10,0,10,20",
        Axis::Bits => "1,2,3,4,5,6,7,8,inf",
        Axis::Tau => "100,200,300,400,500",
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (summary, files) = match cli.command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let out = run_experiment::<f64>(&cfg, common.options())?;
            let files = write_outputs(&common.out, "none", "plot", std::slice::from_ref(&out), common.format)?;
            (out.summary, files)
        }
        Command::Sweep { common, axis, values } => {
            let cfg = common.config()?;
            let values: Vec<AxisValue> = axis.parse_values(values.as_deref().unwrap_or(default_values(axis)))?;
            let sweep = run_sweep::<f64>(&cfg, axis, &values, common.options())?;
            let files = write_sweep(&common.out, &sweep, common.format)?;
            (sweep.summary(), files)
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    write_summary_csv(&summary, &mut lock)?;
    lock.flush()?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
