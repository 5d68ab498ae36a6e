//! Zero-coupon curve bootstrapping from a complete instrument ladder.
//!
//! Conventions: coupons are paid annually in arrears counting back from
//! maturity, rates compound annually, and a bill is an instrument with a
//! zero coupon. There is no interpolation: every coupon date of an
//! instrument must coincide with the maturity of an earlier instrument.

use std::fmt::Write as _;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Node times closer than this are the same date.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveInstrument {
    pub maturity_years: f64,
    /// Annual coupon, percent of face.
    pub coupon: f64,
    /// Price per 100 face.
    pub price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub maturity_years: f64,
    pub discount_factor: f64,
    /// Annually compounded, in percent.
    pub zero_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCurve {
    pub points: Vec<CurvePoint>,
}

impl ZeroCurve {
    fn df_at(&self, t: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.maturity_years - t).abs() < TIME_EPS)
            .map(|p| p.discount_factor)
    }

    /// `maturity_years,discount_factor,zero_rate` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("maturity_years,discount_factor,zero_rate\n");
        for p in &self.points {
            writeln!(out, "{},{},{}", p.maturity_years, p.discount_factor, p.zero_rate).unwrap();
        }
        out
    }
}

pub fn zero_rate_from_df(df: f64, t: f64) -> f64 {
    (df.powf(-1.0 / t) - 1.0) * 100.0
}

/// Coupon dates of an instrument strictly before maturity, earliest first.
fn coupon_dates_before(maturity: f64) -> Vec<f64> {
    let mut dates = Vec::new();
    let mut t = maturity - 1.0;
    while t > TIME_EPS {
        dates.push(t);
        t -= 1.0;
    }
    dates.reverse();
    dates
}

/// Solves discount factors in maturity order:
/// `df_n = (P_n - c_n * sum(df at earlier coupon dates)) / (100 + c_n)`.
pub fn bootstrap(instruments: &[CurveInstrument]) -> Result<ZeroCurve> {
    if instruments.is_empty() {
        return Err(Error::IncompleteSeries("no instruments".into()));
    }
    for (k, w) in instruments.windows(2).enumerate() {
        if w[1].maturity_years <= w[0].maturity_years + TIME_EPS {
            return Err(Error::Unsorted(k + 1));
        }
    }
    let mut curve = ZeroCurve { points: Vec::new() };
    for inst in instruments {
        let t = inst.maturity_years;
        if !(t > 0.0 && inst.price.is_finite() && inst.coupon.is_finite()) {
            return Err(Error::Precondition(format!("invalid instrument at {t}y")));
        }
        let mut annuity = 0.0;
        for cf in coupon_dates_before(t) {
            annuity += curve.df_at(cf).ok_or_else(|| {
                Error::IncompleteSeries(format!(
                    "the {t}y instrument pays a coupon at {cf}y but there is no instrument maturing there"
                ))
            })?;
        }
        let df = (inst.price - inst.coupon * annuity) / (100.0 + inst.coupon);
        if df <= 0.0 || df > 1.0 {
            return Err(Error::Arbitrage {
                tenor: t,
                reason: format!("solved discount factor {df} outside (0, 1]"),
            });
        }
        if let Some(prev) = curve.points.last() {
            if df >= prev.discount_factor {
                return Err(Error::Arbitrage {
                    tenor: t,
                    reason: format!(
                        "discount factor {df} does not fall below {} at {}y",
                        prev.discount_factor, prev.maturity_years
                    ),
                });
            }
        }
        curve.points.push(CurvePoint {
            maturity_years: t,
            discount_factor: df,
            zero_rate: zero_rate_from_df(df, t),
        });
    }
    Ok(curve)
}

/// Present value per 100 face of an annual-coupon bond whose every cash
/// flow falls on a curve node.
pub fn price_bond(curve: &ZeroCurve, coupon: f64, maturity_years: f64) -> Result<f64> {
    let df_n = curve
        .df_at(maturity_years)
        .ok_or(Error::OffGrid(maturity_years))?;
    let mut annuity = 0.0;
    for cf in coupon_dates_before(maturity_years) {
        annuity += curve.df_at(cf).ok_or(Error::OffGrid(cf))?;
    }
    Ok(coupon * (annuity + df_n) + 100.0 * df_n)
}

/// Largest absolute repricing error over the inputs.
pub fn max_repricing_error(curve: &ZeroCurve, instruments: &[CurveInstrument]) -> Result<f64> {
    instruments.iter().try_fold(0.0f64, |acc, inst| {
        let p = price_bond(curve, inst.coupon, inst.maturity_years)?;
        Ok(acc.max((p - inst.price).abs()))
    })
}

/// Instruments of one auction date, ordered by maturity. Any missing coupon
/// or price makes the series incomplete.
pub fn instruments_on(d: &Dataset, date: NaiveDate) -> Result<Vec<CurveInstrument>> {
    let mut out = Vec::new();
    for (i, r) in d.records().iter().enumerate() {
        if r.auction_date != date {
            continue;
        }
        let (Some(coupon), Some(price)) = (d.value(i, crate::model::Variable::Coupon), d.value(i, crate::model::Variable::Price)) else {
            return Err(Error::IncompleteSeries(format!(
                "{} {} has a missing coupon or price",
                date, r.maturity
            )));
        };
        out.push(CurveInstrument {
            maturity_years: r.maturity.years_f64(),
            coupon,
            price,
        });
    }
    if out.is_empty() {
        return Err(Error::IncompleteSeries(format!("no records on {date}")));
    }
    Ok(out)
}
