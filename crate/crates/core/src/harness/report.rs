use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::experiment::{AggregateRow, ExperimentOutput, SweepOutput};

pub const SUMMARY_HEADER: &str = "axis_value,estimator,mean_nmse,median_nmse,stderr,trials_ok,trials_diverged";
pub const PLOT_HEADER: &str = "axis_value,estimator,mean_nmse_db,median_nmse_db";
pub const TRIALS_HEADER: &str = "axis_value,trial,seed,estimator,nmse,amp_iterations,amp_restarts,diverged";
pub const TRACE_HEADER: &str = "axis_value,trial,iteration,residual,nmse";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn write_summary_csv<W: Write>(rows: &[AggregateRow], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:e},{:e},{:e},{},{}",
            r.axis_value, r.estimator, r.mean_nmse, r.median_nmse, r.stderr, r.trials_ok, r.trials_diverged
        )?;
    }
    Ok(())
}

/// NMSE in dB, ready for plotting against the axis value.
pub fn write_plot_csv<W: Write>(rows: &[AggregateRow], mut out: W) -> Result<()> {
    writeln!(out, "{PLOT_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{:.6},{:.6}", r.axis_value, r.estimator, db(r.mean_nmse), db(r.median_nmse))?;
    }
    Ok(())
}

pub fn write_trials_csv<W: Write>(points: &[ExperimentOutput], mut out: W) -> Result<()> {
    writeln!(out, "{TRIALS_HEADER}")?;
    for p in points {
        for t in &p.trials {
            for (est, v) in &t.nmse {
                writeln!(
                    out,
                    "{},{},{},{est},{v:e},{},{},{}",
                    p.axis_value, t.trial, t.seed, t.amp_iterations, t.amp_restarts, t.diverged
                )?;
            }
            for est in t.failures.keys() {
                writeln!(
                    out,
                    "{},{},{},{est},NaN,{},{},{}",
                    p.axis_value, t.trial, t.seed, t.amp_iterations, t.amp_restarts, t.diverged
                )?;
            }
        }
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(points: &[ExperimentOutput], mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for p in points {
        for t in &p.trials {
            for pt in &t.trace {
                writeln!(out, "{},{},{},{:e},{:e}", p.axis_value, t.trial, pt.iteration, pt.residual, pt.nmse)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    axis: &'a str,
    summary: &'a [AggregateRow],
    points: &'a [ExperimentOutput],
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, std::io::BufWriter<fs::File>)> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok((path, std::io::BufWriter::new(file)))
}

/// Writes the result files into `dir` and returns their paths.
///
/// CSV output produces `summary.csv`, `trials.csv`, the plot file
/// `<plot_stem>.csv`, and `trace.csv` when any trial carries a trace.
/// JSON output produces a single `results.json`.
pub fn write_outputs(
    dir: &Path,
    axis: &str,
    plot_stem: &str,
    points: &[ExperimentOutput],
    format: Format,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let summary: Vec<AggregateRow> = points.iter().flat_map(|p| p.summary.iter().cloned()).collect();
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            let (path, mut w) = create(dir, "summary.csv")?;
            write_summary_csv(&summary, &mut w)?;
            w.flush()?;
            written.push(path);
            let (path, mut w) = create(dir, "trials.csv")?;
            write_trials_csv(points, &mut w)?;
            w.flush()?;
            written.push(path);
            let (path, mut w) = create(dir, &format!("{plot_stem}.csv"))?;
            write_plot_csv(&summary, &mut w)?;
            w.flush()?;
            written.push(path);
            if points.iter().any(|p| p.trials.iter().any(|t| !t.trace.is_empty())) {
                let (path, mut w) = create(dir, "trace.csv")?;
                write_trace_csv(points, &mut w)?;
                w.flush()?;
                written.push(path);
            }
        }
        Format::Json => {
            let (path, mut w) = create(dir, "results.json")?;
            let report = JsonReport { axis, summary: &summary, points };
            serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w)?;
            w.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes a sweep with the plot file named after its figure.
pub fn write_sweep(dir: &Path, sweep: &SweepOutput, format: Format) -> Result<Vec<PathBuf>> {
    write_outputs(dir, sweep.axis.name(), sweep.axis.plot_stem(), &sweep.points, format)
}
