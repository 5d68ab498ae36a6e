//! Repeated mask, impute, score runs and their report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::data_io::RunConfig;
use crate::error::{Error, Result};
use crate::imputers::{impute, impute_column_mean, impute_next, impute_previous, ImputerConfig, ImputerKind};
use crate::masking::{apply_mask, plan_mcar};
use crate::model::{Dataset, MaskConfig, Variable};
use crate::rng;
use crate::stats::{boxplot_summary, mae, shapiro_wilk, BoxplotSummary, MaeScore, NormalityTestResult};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub repetition: usize,
    pub method: ImputerKind,
    pub seed: u64,
    /// Cells left by the method and filled by the carry or mean backstop.
    pub fallback_count: usize,
    pub mae: [MaeScore; 3],
}

/// Summary of one method on one variable across all repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: ImputerKind,
    pub variable: Variable,
    pub maes: Vec<f64>,
    /// `None` when every repetition scored the same MAE.
    pub normality: Option<NormalityTestResult>,
    pub boxplot: BoxplotSummary,
}

impl CellSummary {
    pub fn median(&self) -> f64 {
        self.boxplot.median
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub config: RunConfig,
    pub trials: Vec<TrialResult>,
    pub cells: Vec<CellSummary>,
}

impl BenchmarkReport {
    pub fn cell(&self, method: ImputerKind, variable: Variable) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.variable == variable)
    }
}

pub fn mask_seed(master: u64, repetition: usize) -> u64 {
    rng::derive_seed(master, &[repetition as u64, 0])
}

pub fn method_seed(master: u64, repetition: usize, kind: ImputerKind) -> u64 {
    rng::derive_seed(master, &[repetition as u64, kind.index() as u64 + 1])
}

/// Fills what a method left behind: carry forward, then backward, then the
/// column mean. Previous is backstopped by Next first and Next by Previous.
fn backstop(d: &Dataset, kind: ImputerKind) -> (Dataset, usize) {
    let before = d.missing_count();
    if before == 0 {
        return (d.clone(), 0);
    }
    let mut out = if kind == ImputerKind::Previous {
        impute_next(d).completed
    } else {
        impute_previous(d).completed
    };
    if kind != ImputerKind::Previous {
        out = impute_next(&out).completed;
    } else {
        out = impute_previous(&out).completed;
    }
    out = impute_column_mean(&out);
    let filled = before - out.missing_count();
    (out, filled)
}

fn run_trial(
    d: &Dataset,
    cfg: &RunConfig,
    icfg: &ImputerConfig,
    repetition: usize,
) -> Result<Vec<TrialResult>> {
    let mcfg = MaskConfig::new(mask_seed(cfg.seed, repetition)).with_rate(cfg.missing_rate);
    let wrap = |method: &str, e: Error| Error::Trial {
        repetition,
        method: method.to_string(),
        source: Box::new(e),
    };
    let plan = plan_mcar(d, &mcfg).map_err(|e| wrap("mask", e))?;
    let (masked, truth) = apply_mask(d, &plan).map_err(|e| wrap("mask", e))?;
    cfg.methods
        .iter()
        .map(|&kind| {
            let seed = method_seed(cfg.seed, repetition, kind);
            let res = impute(&masked, kind, icfg, seed).map_err(|e| wrap(kind.name(), e))?;
            let (completed, fallback_count) = backstop(&res.completed, kind);
            let mut scores = Vec::with_capacity(3);
            for v in Variable::ALL {
                scores.push(mae(&truth, &completed, &plan, v).map_err(|e| wrap(kind.name(), e))?);
            }
            Ok(TrialResult {
                repetition,
                method: kind,
                seed,
                fallback_count,
                mae: [scores[0], scores[1], scores[2]],
            })
        })
        .collect()
}

/// Runs every repetition on a pool of `threads` workers (0 means rayon's
/// default). Output does not depend on the thread count.
pub fn run_benchmark(d: &Dataset, cfg: &RunConfig, threads: usize) -> Result<BenchmarkReport> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let icfg = ImputerConfig::from_run_config(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let per_rep: Vec<Result<Vec<TrialResult>>> = pool.install(|| {
        (0..cfg.repetitions)
            .into_par_iter()
            .map(|r| run_trial(d, cfg, &icfg, r))
            .collect()
    });
    let mut trials = Vec::with_capacity(cfg.repetitions * cfg.methods.len());
    for r in per_rep {
        trials.extend(r?);
    }

    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for v in Variable::ALL {
            let maes: Vec<f64> = trials
                .iter()
                .filter(|t| t.method == method)
                .map(|t| t.mae[v.index()].value)
                .collect();
            let normality = match shapiro_wilk(&maes, cfg.alpha) {
                Ok(r) => Some(r),
                Err(Error::DegenerateSample) => None,
                Err(e) => return Err(e),
            };
            let boxplot = boxplot_summary(&maes)?;
            cells.push(CellSummary {
                method,
                variable: v,
                maes,
                normality,
                boxplot,
            });
        }
    }
    Ok(BenchmarkReport {
        config: cfg.clone(),
        trials,
        cells,
    })
}

/// Methods ordered by median MAE on `variable`, best first; ties by name.
pub fn rank_methods(report: &BenchmarkReport, variable: Variable) -> Vec<(ImputerKind, f64)> {
    let mut out: Vec<(ImputerKind, f64)> = report
        .cells
        .iter()
        .filter(|c| c.variable == variable)
        .map(|c| (c.method, c.median()))
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.name().cmp(b.0.name())));
    out
}

pub const NORMALITY_FILE: &str = "normality_table.csv";
pub const BOXPLOT_FILE: &str = "boxplots.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const MANIFEST_FILE: &str = "run_manifest.txt";

pub fn normality_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("method,variable,w,p_value,verdict\n");
    for c in &report.cells {
        match &c.normality {
            Some(n) => writeln!(
                out,
                "{},{},{},{},{}",
                c.method,
                c.variable,
                n.w_statistic,
                n.p_value,
                if n.verdict { "normal" } else { "non-normal" }
            ),
            None => writeln!(out, "{},{},NA,NA,degenerate", c.method, c.variable),
        }
        .unwrap();
    }
    out
}

pub fn boxplot_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("method,variable,min,q1,median,q3,max,whisker_low,whisker_high,outliers\n");
    for c in &report.cells {
        let b = &c.boxplot;
        let outliers: Vec<String> = b.outliers.iter().map(|x| x.to_string()).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.method,
            c.variable,
            b.min,
            b.q1,
            b.median,
            b.q3,
            b.max,
            b.whisker_low,
            b.whisker_high,
            outliers.join(";")
        )
        .unwrap();
    }
    out
}

pub fn trials_csv(report: &BenchmarkReport) -> String {
    let mut out = String::from("repetition,method,seed,fallback_count");
    for v in Variable::ALL {
        write!(out, ",mae_{v},n_{v}").unwrap();
    }
    out.push('\n');
    for t in &report.trials {
        write!(out, "{},{},{},{}", t.repetition, t.method, t.seed, t.fallback_count).unwrap();
        for s in &t.mae {
            write!(out, ",{},{}", s.value, s.n_cells).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn manifest_text(report: &BenchmarkReport) -> String {
    format!(
        "{}rng = {}\nseed_derivation = {}\nmaster_seed = {}\n",
        report.config.to_text(),
        rng::RNG_ALGORITHM,
        rng::SEED_DERIVATION,
        report.config.seed
    )
}

/// Writes the four report files into `dir`, creating it if needed.
pub fn emit_report(report: &BenchmarkReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in [
        (NORMALITY_FILE, normality_csv(report)),
        (BOXPLOT_FILE, boxplot_csv(report)),
        (TRIALS_FILE, trials_csv(report)),
        (MANIFEST_FILE, manifest_text(report)),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
