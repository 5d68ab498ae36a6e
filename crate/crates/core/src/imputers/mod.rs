//! The six imputation methods behind one contract.
//!
//! Every method returns a completed copy of its input in which originally
//! observed cells are untouched, no observed cell becomes missing, and the
//! output is a deterministic function of `(dataset, config, seed)`. Cells a
//! method cannot fill stay missing and are counted in `residual_missing`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Dataset, Variable};

mod fill;
mod forest;
mod knn;
mod linreg;
mod mice;
mod missforest;

pub use fill::{impute_next, impute_previous};
pub use forest::{ForestParams, RegressionForest};
pub use knn::{impute_knn, KnnConfig};
pub use linreg::impute_linear_regression;
pub use mice::{impute_mice, MiceConfig};
pub use missforest::{impute_missforest, MissForestConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ImputerKind {
    Previous,
    Next,
    Knn,
    Mice,
    MissForest,
    LinearRegression,
}

impl ImputerKind {
    pub const ALL: [ImputerKind; 6] = [
        ImputerKind::Previous,
        ImputerKind::Next,
        ImputerKind::Knn,
        ImputerKind::Mice,
        ImputerKind::MissForest,
        ImputerKind::LinearRegression,
    ];

    /// Stable identifier used in files and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            ImputerKind::Previous => "previous",
            ImputerKind::Next => "next",
            ImputerKind::Knn => "knn",
            ImputerKind::Mice => "mice",
            ImputerKind::MissForest => "missforest",
            ImputerKind::LinearRegression => "linear_regression",
        }
    }

    /// Human-readable label for printed tables.
    pub fn label(self) -> &'static str {
        match self {
            ImputerKind::Previous => "Previous value",
            ImputerKind::Next => "Next value",
            ImputerKind::Knn => "KNN",
            ImputerKind::Mice => "MICE",
            ImputerKind::MissForest => "missForest",
            ImputerKind::LinearRegression => "Linear Regression",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ImputerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ImputerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ImputerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

pub type Diagnostics = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult {
    pub completed: Dataset,
    pub residual_missing: usize,
    pub method: ImputerKind,
    pub diagnostics: Diagnostics,
}

impl ImputationResult {
    pub(crate) fn new(completed: Dataset, method: ImputerKind, diagnostics: Diagnostics) -> Self {
        ImputationResult {
            residual_missing: completed.missing_count(),
            completed,
            method,
            diagnostics,
        }
    }

    /// Diagnostics as `key = value` lines.
    pub fn diagnostics_text(&self) -> String {
        let mut out = format!(
            "method = {}\nresidual_missing = {}\n",
            self.method, self.residual_missing
        );
        for (k, v) in &self.diagnostics {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Settings for every method; each method reads its own part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImputerConfig {
    pub knn: KnnConfig,
    pub mice: MiceConfig,
    pub missforest: MissForestConfig,
}

impl ImputerConfig {
    pub fn from_run_config(cfg: &crate::data_io::RunConfig) -> Self {
        ImputerConfig {
            knn: KnnConfig { k: cfg.knn_k },
            mice: MiceConfig {
                iterations: cfg.mice_iterations,
                imputations: cfg.mice_imputations,
                ..MiceConfig::default()
            },
            missforest: MissForestConfig {
                trees: cfg.forest_trees,
                ..MissForestConfig::default()
            },
        }
    }
}

pub fn impute(d: &Dataset, kind: ImputerKind, cfg: &ImputerConfig, seed: u64) -> Result<ImputationResult> {
    match kind {
        ImputerKind::Previous => Ok(impute_previous(d)),
        ImputerKind::Next => Ok(impute_next(d)),
        ImputerKind::Knn => impute_knn(d, &cfg.knn),
        ImputerKind::Mice => impute_mice(d, &cfg.mice, seed),
        ImputerKind::MissForest => impute_missforest(d, &cfg.missforest, seed),
        ImputerKind::LinearRegression => Ok(impute_linear_regression(d)),
    }
}

/// Fills every missing cell with its column's observed mean.
///
/// Not one of the six methods; it is the starting point of the iterative
/// methods and the baseline they are measured against.
pub fn impute_column_mean(d: &Dataset) -> Dataset {
    let means = Variable::ALL.map(|v| observed_mean(d, v));
    let cells: Vec<_> = (0..d.len())
        .flat_map(|i| Variable::ALL.map(move |v| (i, v)))
        .filter(|&(i, v)| !d.is_observed(i, v))
        .filter_map(|(i, v)| means[v.index()].map(|m| (i, v, m)))
        .collect();
    d.with_filled(cells)
}

pub(crate) fn observed_mean(d: &Dataset, v: Variable) -> Option<f64> {
    let vals = d.observed_values(v);
    let first = *vals.first()?;
    Some(first + vals.iter().map(|x| x - first).sum::<f64>() / vals.len() as f64)
}

pub(crate) fn observed_range(d: &Dataset, v: Variable) -> Option<(f64, f64)> {
    let vals = d.observed_values(v);
    if vals.is_empty() {
        return None;
    }
    Some(vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    }))
}

/// Covariates shared by the model-based methods: maturity in years and the
/// auction date ordinal.
pub(crate) fn covariates(d: &Dataset, i: usize) -> [f64; 2] {
    [d.records()[i].maturity.years_f64(), d.date_ordinal(i) as f64]
}

/// Checks shared by the chained methods: each variable with gaps needs at
/// least three observed cells.
pub(crate) fn check_chained_preconditions(d: &Dataset) -> Result<()> {
    for v in Variable::ALL {
        let missing = d.missing_in(v);
        let observed = d.len() - missing;
        if missing > 0 && observed < 3 {
            return Err(Error::Precondition(format!(
                "{v} has {observed} observed cells; at least 3 are required"
            )));
        }
    }
    Ok(())
}

/// Variables with gaps, fewest gaps first.
pub(crate) fn visit_order(d: &Dataset) -> Vec<Variable> {
    let mut vars: Vec<Variable> = Variable::ALL
        .into_iter()
        .filter(|&v| d.missing_in(v) > 0)
        .collect();
    vars.sort_by_key(|&v| (d.missing_in(v), v));
    vars
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::{AuctionRecord, Dataset, Maturity};
    use chrono::NaiveDate;

    /// Single-maturity dataset whose price column is `prices`; coupon and
    /// yield are complete.
    pub fn price_series(prices: &[Option<f64>]) -> Dataset {
        let start = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
        Dataset::from_records(
            prices
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    AuctionRecord::new(
                        start + chrono::Days::new(7 * i as u64),
                        Maturity::years(2),
                        Some(9.0),
                        *p,
                        Some(9.5),
                    )
                })
                .collect(),
        )
    }

    pub fn prices(d: &Dataset) -> Vec<Option<f64>> {
        (0..d.len())
            .map(|i| d.value(i, crate::model::Variable::Price))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ImputerKind::ALL {
            assert_eq!(k.name().parse::<ImputerKind>().unwrap(), k);
        }
        let err = "typo".parse::<ImputerKind>().unwrap_err().to_string();
        for k in ImputerKind::ALL {
            assert!(err.contains(k.name()));
        }
    }

    #[test]
    fn dispatch_matches_direct_call() {
        let d = testutil::price_series(&[Some(5.0), None, Some(6.0), None]);
        let cfg = ImputerConfig::default();
        assert_eq!(impute(&d, ImputerKind::Previous, &cfg, 0).unwrap(), impute_previous(&d));
        assert_eq!(impute(&d, ImputerKind::Next, &cfg, 0).unwrap(), impute_next(&d));
    }

    #[test]
    fn column_mean_fills_everything() {
        let d = testutil::price_series(&[Some(5.0), None, Some(7.0)]);
        let filled = impute_column_mean(&d);
        assert_eq!(filled.value(1, Variable::Price), Some(6.0));
        assert_eq!(filled.missing_count(), 0);
    }
}
