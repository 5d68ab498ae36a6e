//! Command-line front end. Exit codes: 0 success, 1 I/O failure, 2 usage
//! or validation error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use crate::curve::{bootstrap, instruments_on, max_repricing_error};
use crate::data_io::{read_config, read_dataset, write_dataset, CsvSchema, RunConfig};
use crate::error::{Error, Result};
use crate::harness::{emit_report, run_benchmark, BOXPLOT_FILE, NORMALITY_FILE};
use crate::imputers::{impute, ImputerConfig, ImputerKind};
use crate::masking::{apply_mask, plan_mcar};
use crate::model::{MaskConfig, DEFAULT_MISSING_RATE};
use crate::synth::{synth_panel, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bondgap", version, about = "Imputation benchmark and curve bootstrapping for auction data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a random subset of cells (MCAR).
    Mask {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MISSING_RATE)]
        rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_masked: PathBuf,
        #[arg(long)]
        out_plan: PathBuf,
    },
    /// Fill missing cells with one method.
    Impute {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated mask/impute/score runs with normality tests and box plots.
    Benchmark {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Bootstrap a zero curve from one auction date.
    Curve {
        #[arg(long)]
        input: PathBuf,
        /// Auction date (YYYY-MM-DD); defaults to the latest.
        #[arg(long)]
        date: Option<NaiveDate>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a complete synthetic panel.
    Synth {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the tables of a benchmark report directory.
    #[command(alias = "report-inspect")]
    Inspect {
        #[arg(long)]
        dir: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_environmental() {
                EXIT_IO
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    let schema = CsvSchema::default();
    match cmd {
        Command::Mask {
            input,
            rate,
            seed,
            out_masked,
            out_plan,
        } => {
            let d = read_dataset(&input, &schema)?;
            let plan = plan_mcar(&d, &MaskConfig::new(seed).with_rate(rate))?;
            let (masked, _) = apply_mask(&d, &plan)?;
            write_dataset(&masked, &out_masked, &schema)?;
            write_file(&out_plan, &plan.to_csv())?;
            writeln!(out, "masked {} of {} cells", plan.cells.len(), d.len() * 3).map_err(io_out)?;
        }
        Command::Impute {
            input,
            method,
            config,
            seed,
            out: out_path,
        } => {
            let kind: ImputerKind = method.parse()?;
            let run_cfg = config.as_deref().map(read_config).transpose()?;
            let icfg = run_cfg.as_ref().map(ImputerConfig::from_run_config).unwrap_or_default();
            let seed = seed.or(run_cfg.map(|c| c.seed)).unwrap_or(0);
            let d = read_dataset(&input, &schema)?;
            let res = impute(&d, kind, &icfg, seed)?;
            write_dataset(&res.completed, &out_path, &schema)?;
            let mut sidecar = out_path.clone().into_os_string();
            sidecar.push(".diagnostics");
            write_file(Path::new(&sidecar), &res.diagnostics_text())?;
            writeln!(out, "residual_missing = {}", res.residual_missing).map_err(io_out)?;
        }
        Command::Benchmark {
            input,
            config,
            out_dir,
            threads,
        } => {
            let cfg: RunConfig = read_config(&config)?;
            let d = read_dataset(&input, &schema)?;
            let report = run_benchmark(&d, &cfg, threads)?;
            emit_report(&report, &out_dir)?;
            writeln!(out, "{:<18} {:<8} {:>8} {:>8} {:>10}", "method", "variable", "W", "p", "median")
                .map_err(io_out)?;
            for c in &report.cells {
                let (w, p) = match &c.normality {
                    Some(n) => (format!("{:.4}", n.w_statistic), format!("{:.4}", n.p_value)),
                    None => ("NA".into(), "NA".into()),
                };
                writeln!(
                    out,
                    "{:<18} {:<8} {:>8} {:>8} {:>10.4}",
                    c.method.name(),
                    c.variable.name(),
                    w,
                    p,
                    c.median()
                )
                .map_err(io_out)?;
            }
        }
        Command::Curve { input, date, out: out_path } => {
            let d = read_dataset(&input, &schema)?;
            let date = match date {
                Some(x) => x,
                None => d.records().iter().map(|r| r.auction_date).max().ok_or(Error::EmptyDataset)?,
            };
            let inst = instruments_on(&d, date)?;
            let curve = bootstrap(&inst)?;
            write_file(&out_path, &curve.to_csv())?;
            let err = max_repricing_error(&curve, &inst)?;
            writeln!(out, "{} nodes on {date}; max repricing error {err:e}", curve.points.len()).map_err(io_out)?;
        }
        Command::Synth { rows, seed, out: out_path } => {
            let d = synth_panel(&SynthConfig::new(rows, seed))?;
            write_dataset(&d, &out_path, &schema)?;
            writeln!(out, "wrote {} rows", d.len()).map_err(io_out)?;
        }
        Command::Inspect { dir } => {
            for name in [NORMALITY_FILE, BOXPLOT_FILE] {
                let path = dir.join(name);
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                writeln!(out, "== {name}").map_err(io_out)?;
                print_aligned(&text, out).map_err(io_out)?;
            }
        }
    }
    Ok(())
}

fn print_aligned(csv_text: &str, out: &mut dyn Write) -> std::io::Result<()> {
    let rows: Vec<Vec<&str>> = csv_text.lines().map(|l| l.split(',').collect()).collect();
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncol)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    for r in &rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        writeln!(out, "{}", line.join("  ").trim_end())?;
    }
    Ok(())
}
