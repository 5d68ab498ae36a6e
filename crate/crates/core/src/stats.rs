//! Evaluation statistics: MAE on masked cells, the Shapiro-Wilk normality
//! test, and Tukey box-plot summaries.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::masking::MaskPlan;
use crate::model::{Dataset, Variable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaeScore {
    pub variable: Variable,
    pub value: f64,
    pub n_cells: usize,
}

/// Mean absolute error over the planned cells of `variable` only.
pub fn mae(truth: &Dataset, completed: &Dataset, plan: &MaskPlan, variable: Variable) -> Result<MaeScore> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for record in plan.cells_of(variable) {
        let t = truth
            .records()
            .get(record)
            .and_then(|_| truth.value(record, variable))
            .ok_or(Error::PlanCell { record, variable })?;
        let c = completed
            .records()
            .get(record)
            .and_then(|_| completed.value(record, variable))
            .ok_or(Error::ResidualMissing { record, variable })?;
        sum += (c - t).abs();
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyScoreSet(variable));
    }
    Ok(MaeScore {
        variable,
        value: sum / n as f64,
        n_cells: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityTestResult {
    pub w_statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// True when normality is not rejected, i.e. `p > alpha`.
    pub verdict: bool,
}

const SMALL: f64 = 1e-19;

// Royston's polynomial approximations (AS R94).
const G: [f64; 2] = [-2.273, 0.459];
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

fn poly(cc: &[f64], x: f64) -> f64 {
    let mut ret = cc[0];
    if cc.len() > 1 {
        let mut p = x * cc[cc.len() - 1];
        for &c in cc[1..cc.len() - 1].iter().rev() {
            p = (p + c) * x;
        }
        ret += p;
    }
    ret
}

/// Shapiro-Wilk W and p-value via Royston's AS R94 algorithm, for
/// `3 <= n <= 5000`.
pub fn shapiro_wilk(sample: &[f64], alpha: f64) -> Result<NormalityTestResult> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::range("sample size", n, "Shapiro-Wilk needs 3 <= n <= 5000"));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition("sample contains non-finite values".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < SMALL {
        return Err(Error::DegenerateSample);
    }

    let a = coefficients(n);
    let an = n as f64;
    // a[] is 1-based; the coefficient for order statistic i (0-based) is
    // sign(i - j) * a[min(i, j) + 1] with j = n - 1 - i.
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => -a[i + 1],
            std::cmp::Ordering::Greater => a[j + 1],
            std::cmp::Ordering::Equal => 0.0,
        }
    };

    let sa = (0..n).map(coef).sum::<f64>() / an;
    let sx = x.iter().map(|v| v / range).sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = xi / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    // 1 - W, computed directly to keep precision for W near 1
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p_value = if n == 3 {
        use std::f64::consts::{FRAC_PI_3, PI};
        // asin(sqrt(3/4)) = pi/3
        (6.0 / PI * (w.sqrt().asin() - FRAC_PI_3)).max(0.0)
    } else {
        let y = w1.ln();
        let ln_n = an.ln();
        let (y, m, s) = if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                return Ok(NormalityTestResult {
                    w_statistic: w,
                    p_value: 1e-99,
                    n,
                    verdict: 1e-99 > alpha,
                });
            }
            (-(gamma - y).ln(), poly(&C3, an), poly(&C4, an).exp())
        } else {
            (y, poly(&C5, ln_n), poly(&C6, ln_n).exp())
        };
        Normal::new(m, s).expect("positive scale").sf(y)
    };
    let p_value = p_value.clamp(0.0, 1.0);
    Ok(NormalityTestResult {
        w_statistic: w.min(1.0),
        p_value,
        n,
        verdict: p_value > alpha,
    })
}

/// Coefficients `a[1..=n/2]` (index 0 unused).
fn coefficients(n: usize) -> Vec<f64> {
    let nn2 = n / 2;
    let mut a = vec![0.0; nn2 + 1];
    if n == 3 {
        a[1] = 0.5f64.sqrt();
        return a;
    }
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    let an = n as f64;
    let an25 = an + 0.25;
    let mut summ2 = 0.0;
    for (i, ai) in a.iter_mut().enumerate().skip(1) {
        *ai = std_normal.inverse_cdf((i as f64 - 0.375) / an25);
        summ2 += *ai * *ai;
    }
    summ2 *= 2.0;
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - a[1] / ssumm2;

    let (first_scaled, fac) = if n > 5 {
        let a2 = -a[2] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[2] = a2;
        (3, fac)
    } else {
        let fac = ((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (2, fac)
    };
    a[1] = a1;
    for ai in a.iter_mut().skip(first_scaled) {
        *ai /= -fac;
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Sample quantile by linear interpolation between order statistics, with
/// the k-th order statistic (1-based) at probability `(k - 1) / (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn boxplot_summary(sample: &[f64]) -> Result<BoxplotSummary> {
    if sample.is_empty() {
        return Err(Error::Precondition("box plot of an empty sample".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&x, 0.25);
    let median = quantile_sorted(&x, 0.5);
    let q3 = quantile_sorted(&x, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = x.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v)).collect();
    let outliers = x.iter().copied().filter(|v| !(lo_fence..=hi_fence).contains(v)).collect();
    Ok(BoxplotSummary {
        min: x[0],
        q1,
        median,
        q3,
        max: x[x.len() - 1],
        // the quartiles always lie inside the fences, so `inside` is non-empty
        whisker_low: inside[0].min(q1),
        whisker_high: inside[inside.len() - 1].max(q3),
        outliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AuctionRecord, Maturity};
    use chrono::NaiveDate;

    fn column(vals: &[f64]) -> Dataset {
        let start = NaiveDate::from_ymd_opt(2020, 1, 6).unwrap();
        Dataset::from_records(
            vals.iter()
                .enumerate()
                .map(|(i, &p)| {
                    AuctionRecord::new(start + chrono::Days::new(i as u64), Maturity::years(2), Some(1.0), Some(p), Some(1.0))
                })
                .collect(),
        )
    }

    fn plan(cells: &[usize]) -> MaskPlan {
        MaskPlan {
            cells: cells.iter().map(|&i| (i, Variable::Price)).collect(),
            seed: 0,
            rate: 0.0,
        }
    }

    #[test]
    fn mae_perfect_and_mixed_sign() {
        let truth = column(&[10.0, 20.0, 30.0]);
        let p = plan(&[0, 2]);
        assert_eq!(mae(&truth, &truth, &p, Variable::Price).unwrap().value, 0.0);
        let completed = column(&[11.0, 20.0, 27.0]);
        let s = mae(&truth, &completed, &p, Variable::Price).unwrap();
        assert_eq!(s.value, 2.0);
        assert_eq!(s.n_cells, 2);
    }

    #[test]
    fn mae_only_scores_planned_cells() {
        let truth = column(&[10.0, 20.0, 30.0]);
        let completed = column(&[10.0, 99.0, 31.0]);
        assert_eq!(mae(&truth, &completed, &plan(&[2]), Variable::Price).unwrap().value, 1.0);
    }

    #[test]
    fn mae_errors() {
        let truth = column(&[10.0, 20.0]);
        let holey = truth.with_hidden([(1, Variable::Price)]);
        assert!(matches!(
            mae(&truth, &holey, &plan(&[1]), Variable::Price),
            Err(Error::ResidualMissing { record: 1, .. })
        ));
        assert!(matches!(
            mae(&truth, &truth, &plan(&[]), Variable::Price),
            Err(Error::EmptyScoreSet(Variable::Price))
        ));
    }

    #[test]
    fn mae_21_cells_against_direct_sum() {
        let errors = [
            0.5, -1.25, 2.0, -0.75, 0.1, 0.0, -3.5, 1.5, 0.25, -0.2, 0.9, -1.1, 0.05, 2.5, -0.6, 0.3,
            -0.45, 1.75, -2.25, 0.8, -0.15,
        ];
        let truth_vals: Vec<f64> = (0..21).map(|i| 90.0 + i as f64).collect();
        let filled: Vec<f64> = truth_vals.iter().zip(&errors).map(|(t, e)| t + e).collect();
        // spreadsheet-style: |e| summed left to right, divided by 21
        let expected = 20.9 / 21.0;
        let s = mae(&column(&truth_vals), &column(&filled), &plan(&(0..21).collect::<Vec<_>>()), Variable::Price)
            .unwrap();
        assert!((s.value - expected).abs() < 1e-12, "{}", s.value);
    }

    #[test]
    fn sw_three_equally_spaced_is_one() {
        let r = shapiro_wilk(&[1.0, 2.0, 3.0], 0.05).unwrap();
        assert!((r.w_statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sw_rejects_degenerate_and_out_of_range() {
        assert!(matches!(shapiro_wilk(&[5.0, 5.0, 5.0], 0.05), Err(Error::DegenerateSample)));
        assert!(matches!(shapiro_wilk(&[1.0, 2.0], 0.05), Err(Error::Range { .. })));
        assert!(matches!(shapiro_wilk(&vec![1.0; 5001], 0.05), Err(Error::Range { .. })));
    }

    #[test]
    fn sw_is_affine_invariant() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 37) % 23) as f64 + (i as f64).sqrt()).collect();
        let base = shapiro_wilk(&x, 0.05).unwrap().w_statistic;
        for (a, b) in [(3.0, -7.0), (0.01, 100.0), (250.0, 0.5)] {
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let w = shapiro_wilk(&y, 0.05).unwrap().w_statistic;
            assert!((w - base).abs() < 1e-12, "{a} {b}: {w} vs {base}");
        }
    }

    #[test]
    fn boxplot_symmetric_odd() {
        let b = boxplot_summary(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert!(b.outliers.is_empty());
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 5.0));
    }

    #[test]
    fn boxplot_single_value() {
        let b = boxplot_summary(&[7.0]).unwrap();
        assert_eq!([b.min, b.q1, b.median, b.q3, b.max], [7.0; 5]);
        assert!(b.outliers.is_empty());
        assert!(boxplot_summary(&[]).is_err());
    }

    #[test]
    fn boxplot_flags_far_point() {
        let mut x: Vec<f64> = (1..=9).map(f64::from).collect();
        x.push(100.0);
        let b = boxplot_summary(&x).unwrap();
        assert_eq!((b.q1, b.q3), (3.25, 7.75));
        assert_eq!(b.outliers, vec![100.0]);
        assert_eq!(b.whisker_high, 9.0);
    }

    proptest::proptest! {
        #[test]
        fn boxplot_ordering(xs in proptest::collection::vec(-1e6f64..1e6, 1..80)) {
            let b = boxplot_summary(&xs).unwrap();
            proptest::prop_assert!(b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max);
            proptest::prop_assert!(b.min <= b.whisker_low && b.whisker_low <= b.q1);
            proptest::prop_assert!(b.q3 <= b.whisker_high && b.whisker_high <= b.max);
            let iqr = b.q3 - b.q1;
            proptest::prop_assert!(b.whisker_high <= b.q3 + 1.5 * iqr + 1e-9 * iqr.abs().max(1.0));
        }

        #[test]
        fn mae_is_permutation_invariant(errs in proptest::collection::vec(-5.0f64..5.0, 1..30), rot in 0usize..30) {
            let truth_vals: Vec<f64> = (0..errs.len()).map(|i| 100.0 + i as f64).collect();
            let filled: Vec<f64> = truth_vals.iter().zip(&errs).map(|(t, e)| t + e).collect();
            let truth = column(&truth_vals);
            let completed = column(&filled);
            let mut cells: Vec<usize> = (0..errs.len()).collect();
            let a = mae(&truth, &completed, &plan(&cells), Variable::Price).unwrap().value;
            cells.rotate_left(rot % errs.len());
            let b = mae(&truth, &completed, &plan(&cells), Variable::Price).unwrap().value;
            proptest::prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn mae_shift_by_delta(errs in proptest::collection::vec(0.0f64..5.0, 1..30), delta in 0.0f64..3.0) {
            let truth_vals: Vec<f64> = (0..errs.len()).map(|i| 100.0 + i as f64).collect();
            let filled: Vec<f64> = truth_vals.iter().zip(&errs).map(|(t, e)| t + e).collect();
            let shifted: Vec<f64> = filled.iter().map(|f| f + delta).collect();
            let cells: Vec<usize> = (0..errs.len()).collect();
            let a = mae(&column(&truth_vals), &column(&filled), &plan(&cells), Variable::Price).unwrap().value;
            let b = mae(&column(&truth_vals), &column(&shifted), &plan(&cells), Variable::Price).unwrap().value;
            proptest::prop_assert!((b - a - delta).abs() < 1e-9);
        }
    }
}
