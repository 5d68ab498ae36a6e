//! Reproducible MCAR masking.
//!
//! A plan hides exactly `round(rate × N)` of the `N` targeted cells, drawn
//! uniformly without replacement. The draw sees only cell coordinates, never
//! cell values, which is what makes the missingness completely at random.

use std::fmt::Write as _;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::model::{Dataset, MaskConfig, MaskTargets, Variable};
use crate::rng;

/// Cells to hide, in canonical `(record, variable)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPlan {
    pub cells: Vec<(usize, Variable)>,
    pub seed: u64,
    pub rate: f64,
}

impl MaskPlan {
    pub fn cells_of(&self, v: Variable) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().filter(move |(_, cv)| *cv == v).map(|(i, _)| *i)
    }

    /// Audit CSV: `record_index,variable`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("record_index,variable\n");
        for (i, v) in &self.cells {
            writeln!(out, "{i},{v}").unwrap();
        }
        out
    }
}

/// Number of units hidden at `rate` out of `n`.
pub fn planned_count(rate: f64, n: usize) -> usize {
    (rate * n as f64).round() as usize
}

pub fn plan_mcar(d: &Dataset, cfg: &MaskConfig) -> Result<MaskPlan> {
    if !(0.0..=1.0).contains(&cfg.missing_rate) {
        return Err(Error::range("missing_rate", cfg.missing_rate, "must be in [0, 1]"));
    }
    let vars: Vec<Variable> = match &cfg.targets {
        MaskTargets::Variables(vs) => {
            let mut vs = vs.clone();
            vs.sort();
            vs.dedup();
            vs
        }
        MaskTargets::WholeRow => Variable::ALL.to_vec(),
    };
    for i in 0..d.len() {
        for &v in &vars {
            if !d.is_observed(i, v) {
                return Err(Error::NotComplete { record: i, variable: v });
            }
        }
    }

    let mut rng = rng::stream(cfg.seed, &[]);
    let mut cells: Vec<(usize, Variable)> = match cfg.targets {
        MaskTargets::WholeRow => {
            let k = planned_count(cfg.missing_rate, d.len());
            index::sample(&mut rng, d.len(), k)
                .into_iter()
                .flat_map(|i| Variable::ALL.map(|v| (i, v)))
                .collect()
        }
        MaskTargets::Variables(_) => {
            let n = d.len() * vars.len();
            let k = planned_count(cfg.missing_rate, n);
            index::sample(&mut rng, n, k)
                .into_iter()
                .map(|c| (c / vars.len(), vars[c % vars.len()]))
                .collect()
        }
    };
    cells.sort();
    Ok(MaskPlan {
        cells,
        seed: cfg.seed,
        rate: cfg.missing_rate,
    })
}

/// Hides the planned cells. Returns `(masked, truth)`.
pub fn apply_mask(d: &Dataset, plan: &MaskPlan) -> Result<(Dataset, Dataset)> {
    for &(i, v) in &plan.cells {
        if i >= d.len() || !d.is_observed(i, v) {
            return Err(Error::PlanCell { record: i, variable: v });
        }
    }
    Ok((d.with_hidden(plan.cells.iter().copied()), d.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{missing_fraction, AuctionRecord, Maturity};
    use chrono::NaiveDate;

    pub(crate) fn panel(rows: usize) -> Dataset {
        let start = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
        Dataset::from_records(
            (0..rows)
                .map(|i| {
                    AuctionRecord::new(
                        start + chrono::Days::new(7 * i as u64),
                        Maturity::years(2),
                        Some(9.0 + i as f64 * 0.01),
                        Some(100.0 - i as f64 * 0.1),
                        Some(9.0 + i as f64 * 0.02),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn zero_and_full_rate() {
        let d = panel(10);
        assert!(plan_mcar(&d, &MaskConfig::new(1).with_rate(0.0)).unwrap().cells.is_empty());
        let full = plan_mcar(&d, &MaskConfig::new(1).with_rate(1.0)).unwrap();
        assert_eq!(full.cells.len(), 30);
        let (masked, truth) = apply_mask(&d, &full).unwrap();
        assert_eq!(missing_fraction(&masked).unwrap(), 1.0);
        assert_eq!(truth, d);
    }

    #[test]
    fn twenty_rows_hide_21_cells() {
        let plan = plan_mcar(&panel(20), &MaskConfig::new(9)).unwrap();
        assert_eq!(plan.cells.len(), 21);
        let mut dedup = plan.cells.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 21);
    }

    #[test]
    fn rejects_gappy_input_and_bad_rate() {
        let d = panel(5).with_hidden([(2, Variable::Yield)]);
        assert!(matches!(
            plan_mcar(&d, &MaskConfig::new(1)),
            Err(Error::NotComplete { record: 2, variable: Variable::Yield })
        ));
        // untargeted gaps are fine
        let only_price = MaskConfig::new(1).with_targets(MaskTargets::Variables(vec![Variable::Price]));
        assert!(plan_mcar(&d, &only_price).is_ok());
        assert!(matches!(
            plan_mcar(&panel(5), &MaskConfig::new(1).with_rate(1.2)),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn apply_identity_and_single_cell() {
        let d = panel(4);
        let empty = MaskPlan { cells: vec![], seed: 0, rate: 0.0 };
        let (m, t) = apply_mask(&d, &empty).unwrap();
        assert_eq!(m, d);
        assert_eq!(t, d);
        let one = MaskPlan { cells: vec![(1, Variable::Price)], seed: 0, rate: 0.0 };
        let (m, _) = apply_mask(&d, &one).unwrap();
        let diffs: usize = (0..4)
            .flat_map(|i| Variable::ALL.map(move |v| (i, v)))
            .filter(|&(i, v)| m.is_observed(i, v) != d.is_observed(i, v))
            .count();
        assert_eq!(diffs, 1);
        let bad = MaskPlan { cells: vec![(9, Variable::Price)], seed: 0, rate: 0.0 };
        assert!(matches!(apply_mask(&d, &bad), Err(Error::PlanCell { record: 9, .. })));
        assert!(matches!(apply_mask(&m, &one), Err(Error::PlanCell { record: 1, .. })));
    }

    #[test]
    fn whole_row_mode_hides_rows() {
        let d = panel(20);
        let cfg = MaskConfig::new(4).with_targets(MaskTargets::WholeRow);
        let plan = plan_mcar(&d, &cfg).unwrap();
        assert_eq!(plan.cells.len(), 3 * 7);
        for chunk in plan.cells.chunks(3) {
            assert!(chunk.iter().all(|(i, _)| *i == chunk[0].0));
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let d = panel(30);
        let a = plan_mcar(&d, &MaskConfig::new(11)).unwrap();
        let b = plan_mcar(&d, &MaskConfig::new(11)).unwrap();
        let c = plan_mcar(&d, &MaskConfig::new(12)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_ne!(a.cells, c.cells);
    }

    proptest::proptest! {
        #[test]
        fn exact_count(rows in 1usize..60, rate in 0.0f64..=1.0, seed: u64) {
            let plan = plan_mcar(&panel(rows), &MaskConfig::new(seed).with_rate(rate)).unwrap();
            proptest::prop_assert_eq!(plan.cells.len(), planned_count(rate, rows * 3));
            let mut sorted = plan.cells.clone();
            sorted.dedup();
            proptest::prop_assert_eq!(sorted.len(), plan.cells.len());
        }
    }
}
