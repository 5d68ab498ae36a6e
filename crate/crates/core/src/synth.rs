//! Synthetic auction panels.
//!
//! Each auction date has a zero curve `z(t) = level + slope * (1 - exp(-t / 3))`
//! whose level and slope follow mean-reverting AR(1) paths. Bills and bonds
//! are priced off that curve, so every complete cross-section bootstraps back
//! to it. Bonds pay an annual coupon equal to the par yield rounded to a
//! quarter point.

use chrono::{Days, NaiveDate};
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{AuctionRecord, Dataset, Maturity};
use crate::rng;

/// Tenor ladder. Every bond coupon date below 10y lands on a ladder node.
pub fn tenor_ladder() -> Vec<Maturity> {
    let mut v = vec![Maturity::weeks(13), Maturity::weeks(26), Maturity::years(1)];
    v.extend((2..=10).map(Maturity::years));
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub rows: usize,
    pub seed: u64,
    pub start: NaiveDate,
    /// Days between auction dates.
    pub spacing_days: u64,
    pub ar_coefficient: f64,
    pub level_sd: f64,
    pub slope_sd: f64,
}

impl SynthConfig {
    pub fn new(rows: usize, seed: u64) -> Self {
        SynthConfig {
            rows,
            seed,
            start: NaiveDate::from_ymd_opt(2015, 1, 5).unwrap(),
            spacing_days: 7,
            ar_coefficient: 0.95,
            level_sd: 0.08,
            slope_sd: 0.05,
        }
    }
}

const LEVEL_MEAN: f64 = 4.0;
const SLOPE_MEAN: f64 = 2.5;

fn zero_rate(level: f64, slope: f64, t: f64) -> f64 {
    level + slope * (1.0 - (-t / 3.0).exp())
}

fn round_to(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}

/// Price of an annual-coupon bond at a flat annually compounded yield.
fn price_at_yield(coupon: f64, years: u64, y_pct: f64) -> f64 {
    let g = 1.0 + y_pct / 100.0;
    let annuity: f64 = (1..=years).map(|k| g.powi(-(k as i32))).sum();
    coupon * annuity + 100.0 * g.powi(-(years as i32))
}

/// Yield to maturity by bisection; price is decreasing in yield.
fn yield_to_maturity(coupon: f64, years: u64, price: f64) -> f64 {
    let (mut lo, mut hi) = (-50.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if price_at_yield(coupon, years, mid) > price {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn instrument(m: Maturity, level: f64, slope: f64) -> (f64, f64, f64) {
    let t = m.years_f64();
    if m.is_bill() {
        let z = zero_rate(level, slope, t);
        let price = round_to(100.0 * (1.0 + z / 100.0).powf(-t), 4);
        let y = ((100.0 / price).powf(1.0 / t) - 1.0) * 100.0;
        return (0.0, price, round_to(y, 3));
    }
    let years = t.round() as u64;
    let dfs: Vec<f64> = (1..=years)
        .map(|k| (1.0 + zero_rate(level, slope, k as f64) / 100.0).powi(-(k as i32)))
        .collect();
    let annuity: f64 = dfs.iter().sum();
    let par = 100.0 * (1.0 - dfs[dfs.len() - 1]) / annuity;
    let coupon = (par * 4.0).round() / 4.0;
    let price = round_to(coupon * annuity + 100.0 * dfs[dfs.len() - 1], 4);
    (coupon, price, round_to(yield_to_maturity(coupon, years, price), 3))
}

/// A complete panel of `rows` auctions, filled date by date across the ladder.
pub fn synth_panel(cfg: &SynthConfig) -> Result<Dataset> {
    if cfg.rows == 0 {
        return Err(Error::range("rows", 0.0, "must be at least 1"));
    }
    if cfg.ar_coefficient.is_nan() || cfg.ar_coefficient.abs() >= 1.0 {
        return Err(Error::range("ar_coefficient", cfg.ar_coefficient, "must be in (-1, 1)"));
    }
    let ladder = tenor_ladder();
    let mut rng = rng::stream(cfg.seed, &[]);
    let level_shock = Normal::new(0.0, cfg.level_sd).map_err(|e| Error::Invalid(e.to_string()))?;
    let slope_shock = Normal::new(0.0, cfg.slope_sd).map_err(|e| Error::Invalid(e.to_string()))?;
    let (mut level, mut slope) = (LEVEL_MEAN, SLOPE_MEAN);
    let phi = cfg.ar_coefficient;

    let dates = cfg.rows.div_ceil(ladder.len());
    let mut records = Vec::with_capacity(cfg.rows);
    for d in 0..dates {
        level = LEVEL_MEAN + phi * (level - LEVEL_MEAN) + level_shock.sample(&mut rng);
        slope = SLOPE_MEAN + phi * (slope - SLOPE_MEAN) + slope_shock.sample(&mut rng);
        // keep every zero rate positive so discount factors fall with tenor
        level = level.max(0.25);
        let date = cfg.start + Days::new(cfg.spacing_days * d as u64);
        for &m in ladder.iter().take(cfg.rows - d * ladder.len()) {
            let (c, p, y) = instrument(m, level, slope);
            records.push(AuctionRecord::new(date, m, Some(c), Some(p), Some(y)));
        }
    }
    Ok(Dataset::from_records(records))
}

/// Panel whose three variables move linearly in time within each tenor,
/// with no noise. Useful where an imputer that models time trends should
/// win outright.
pub fn synth_linear_panel(dates: usize, start: NaiveDate) -> Dataset {
    let tenors = [Maturity::weeks(26), Maturity::years(2), Maturity::years(5), Maturity::years(10)];
    let mut records = Vec::new();
    for d in 0..dates {
        let date = start + Days::new(14 * d as u64);
        let s = d as f64;
        for (k, &m) in tenors.iter().enumerate() {
            let kf = k as f64;
            records.push(AuctionRecord::new(
                date,
                m,
                Some(2.0 + 0.5 * kf + 0.02 * s),
                Some(99.0 - 0.8 * kf - 0.05 * s),
                Some(2.5 + 0.4 * kf + 0.015 * s),
            ));
        }
    }
    Dataset::from_records(records)
}
