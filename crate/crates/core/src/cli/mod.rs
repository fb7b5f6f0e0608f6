//! Run orchestration: config in, CSV files, a gnuplot script and a summary
//! table out.

mod config;

pub use config::{
    parse_config, parse_snr_range, Overrides, Preset, RunConfig, DEFAULT_PREFIX, DEFAULT_SEED,
    DEFAULT_TRIALS,
};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::montecarlo::{run_sweep, SweepResult};

pub const OUTAGE_HEADER: [&str; 8] = [
    "scheme",
    "link",
    "snr_db",
    "analytic",
    "mc_estimate",
    "ci_low",
    "ci_high",
    "trials",
];
pub const THROUGHPUT_HEADER: [&str; 4] =
    ["scheme", "snr_db", "throughput_mc", "throughput_analytic"];
pub const NA: &str = "NA";
pub const WORKERS_ENV: &str = "NOMA_LAB_WORKERS";

/// Formats with 17 significant digits so that parsing recovers the value exactly.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), format_f64)
}

/// Reads the worker cap from `NOMA_LAB_WORKERS`; unset means the hardware default.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::param(WORKERS_ENV, e.to_string())),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::param(
                WORKERS_ENV,
                format!("expected a positive integer, got `{s}`"),
            )),
        },
    }
}

/// Which files a run emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub outage: bool,
    pub throughput: bool,
}

impl Outputs {
    pub fn for_preset(preset: Option<Preset>) -> Self {
        match preset {
            Some(Preset::Fig3) => Outputs {
                outage: true,
                throughput: false,
            },
            Some(Preset::Fig4) => Outputs {
                outage: false,
                throughput: true,
            },
            None => Outputs {
                outage: true,
                throughput: true,
            },
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn outage_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, "_outage.csv")
}

pub fn throughput_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, "_throughput.csv")
}

pub fn script_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".gp")
}

/// Outage CSV: one row per (scheme, link, SNR point).
pub fn write_outage_csv<W: std::io::Write>(out: W, results: &[SweepResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OUTAGE_HEADER)?;
    for r in results {
        for &link in r.scheme.links() {
            for p in &r.points {
                let Some(e) = p.link(link) else { continue };
                w.write_record([
                    r.scheme.name().to_string(),
                    link.name().to_string(),
                    format_f64(p.snr_db),
                    format_opt(e.analytic),
                    format_f64(e.mc_estimate),
                    format_f64(e.ci_low),
                    format_f64(e.ci_high),
                    p.trials.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Throughput CSV: one row per (scheme, SNR point).
pub fn write_throughput_csv<W: std::io::Write>(out: W, results: &[SweepResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THROUGHPUT_HEADER)?;
    for r in results {
        for p in &r.points {
            w.write_record([
                r.scheme.name().to_string(),
                format_f64(p.snr_db),
                format_f64(p.throughput_mc),
                format_opt(p.throughput_analytic),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(
        || p.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

/// A gnuplot script that plots the emitted CSVs. Data paths are relative to
/// the script's own directory.
pub fn gnuplot_script(prefix: &Path, outputs: Outputs, results: &[SweepResult]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run from this file's directory: gnuplot -p <script>\n");
    s.push_str("set datafile separator ','\nset key outside right\nset grid\nset xlabel 'Transmit SNR (dB)'\n");
    if outputs.outage {
        let file = file_name(&outage_path(prefix));
        s.push_str("\nset logscale y\nset format y '10^{%L}'\nset ylabel 'Outage probability'\n");
        s.push_str("sel(s, l, col) = (strcol(1) eq s && strcol(2) eq l) ? column(col) : 1/0\n");
        let mut curves = Vec::new();
        for r in results {
            let scheme = r.scheme.name();
            for &link in r.scheme.links() {
                let l = link.name();
                curves.push(format!(
                    "'{file}' using 3:(sel('{scheme}', '{l}', 5)) with points title '{scheme} {l} (MC)'"
                ));
                if r.points
                    .iter()
                    .any(|p| p.link(link).and_then(|e| e.analytic).is_some())
                {
                    curves.push(format!(
                        "'{file}' using 3:(sel('{scheme}', '{l}', 4)) with lines title '{scheme} {l} (analytic)'"
                    ));
                }
            }
        }
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        s.push_str("unset logscale y\nset format y '%g'\n");
        if outputs.throughput {
            s.push_str("pause -1 'press enter for the throughput plot'\n");
        }
    }
    if outputs.throughput {
        let file = file_name(&throughput_path(prefix));
        s.push_str("\nset ylabel 'Outage throughput (bits/s/Hz)'\n");
        s.push_str("tsel(s, col) = (strcol(1) eq s) ? column(col) : 1/0\n");
        let mut curves = Vec::new();
        for r in results {
            let scheme = r.scheme.name();
            curves.push(format!(
                "'{file}' using 2:(tsel('{scheme}', 3)) with points title '{scheme} (MC)'"
            ));
            if r.points.iter().any(|p| p.throughput_analytic.is_some()) {
                curves.push(format!(
                    "'{file}' using 2:(tsel('{scheme}', 4)) with lines title '{scheme} (analytic)'"
                ));
            }
        }
        let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    }
    s
}

/// Human-readable table of Monte Carlo (and analytic) values per point.
pub fn summary_table(results: &[SweepResult]) -> String {
    let mut s = String::new();
    for r in results {
        let links = r.scheme.links();
        let _ = writeln!(s, "{}", r.scheme.name());
        let _ = write!(s, "{:>8}", "snr_db");
        for l in links {
            let _ = write!(s, " {:>23}", l.name());
        }
        let _ = writeln!(s, " {:>19}", "throughput");
        for p in &r.points {
            let _ = write!(s, "{:>8.2}", p.snr_db);
            for &l in links {
                let cell = match p.link(l) {
                    Some(e) => match e.analytic {
                        Some(a) => format!("{:.3e} ({:.3e})", e.mc_estimate, a),
                        None => format!("{:.3e} (NA)", e.mc_estimate),
                    },
                    None => "-".to_string(),
                };
                let _ = write!(s, " {cell:>23}");
            }
            let tp = match p.throughput_analytic {
                Some(a) => format!("{:.4} ({:.4})", p.throughput_mc, a),
                None => format!("{:.4} (NA)", p.throughput_mc),
            };
            let _ = writeln!(s, " {tp:>19}");
        }
        s.push('\n');
    }
    s.push_str("cells: Monte Carlo estimate (closed form)\n");
    s
}

#[derive(Debug)]
pub struct RunReport {
    pub results: Vec<SweepResult>,
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// Set when the sweep stopped early; whatever finished was still written.
    pub failure: Option<Error>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failure.is_some())
    }
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}

fn write_outputs(prefix: &Path, outputs: Outputs, results: &[SweepResult]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if outputs.outage {
        let p = outage_path(prefix);
        write_outage_csv(std::io::BufWriter::new(create(&p)?), results)?;
        files.push(p);
    }
    if outputs.throughput {
        let p = throughput_path(prefix);
        write_throughput_csv(std::io::BufWriter::new(create(&p)?), results)?;
        files.push(p);
    }
    let p = script_path(prefix);
    fs::write(&p, gnuplot_script(prefix, outputs, results))?;
    files.push(p);
    Ok(files)
}

/// Runs the sweep and writes every requested file.
///
/// I/O errors are returned directly. A sweep that stops early still has its
/// completed points written; the report then carries the cause and a
/// nonzero exit code.
pub fn run(config: &RunConfig, workers: Option<usize>) -> Result<RunReport> {
    let spec = config.sweep_spec()?;
    let (results, failure) = match run_sweep(&config.params, &spec, &config.quadrature, workers) {
        Ok(r) => (r, None),
        Err(partial) => (partial.completed, Some(partial.cause)),
    };
    let outputs = Outputs::for_preset(config.preset);
    let files = write_outputs(&config.output_prefix, outputs, &results)?;
    let summary = summary_table(&results);
    Ok(RunReport {
        results,
        files,
        summary,
        failure,
    })
}
