//! Domain types shared by every other module: tenors, auction records, the
//! masked dataset panel, and the masking configuration.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use num_rational::Ratio;

use crate::error::{Error, Result};

/// Weeks per year. Bill tenors (13, 26, 52 weeks) convert exactly.
pub const WEEKS_PER_YEAR: u64 = 52;

/// Upper sanity bound on a price quoted per 100 face.
pub const PRICE_MAX: f64 = 300.0;

/// Upper bound on coupon and yield, in percent.
pub const RATE_MAX: f64 = 100.0;

/// The three variables that can be missing and get imputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    Coupon,
    Price,
    Yield,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::Coupon, Variable::Price, Variable::Yield];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Coupon => "coupon",
            Variable::Price => "price",
            Variable::Yield => "yield",
        }
    }

    /// Capitalized label used in printed tables.
    pub fn label(self) -> &'static str {
        match self {
            Variable::Coupon => "Coupon",
            Variable::Price => "Price",
            Variable::Yield => "Yield",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupon" => Ok(Variable::Coupon),
            "price" => Ok(Variable::Price),
            "yield" => Ok(Variable::Yield),
            other => Err(Error::Precondition(format!(
                "unknown variable `{other}`; expected coupon, price or yield"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaturityUnit {
    Weeks,
    Years,
}

impl MaturityUnit {
    pub fn name(self) -> &'static str {
        match self {
            MaturityUnit::Weeks => "weeks",
            MaturityUnit::Years => "years",
        }
    }
}

impl FromStr for MaturityUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weeks" => Ok(MaturityUnit::Weeks),
            "years" => Ok(MaturityUnit::Years),
            other => Err(Error::Invalid(format!(
                "unknown maturity unit `{other}`; expected weeks or years"
            ))),
        }
    }
}

/// A tenor held as an exact positive rational.
///
/// Always stored in canonical form: weeks below one year, years from one
/// year up. Two maturities are equal iff they describe the same tenor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Maturity {
    value: Ratio<u64>,
    unit: MaturityUnit,
}

impl Maturity {
    pub fn new(value: Ratio<u64>, unit: MaturityUnit) -> Result<Self> {
        if *value.numer() == 0 {
            return Err(Error::Invalid("maturity must be positive".into()));
        }
        let weeks = match unit {
            MaturityUnit::Weeks => value,
            MaturityUnit::Years => value * Ratio::from_integer(WEEKS_PER_YEAR),
        };
        Ok(if weeks < Ratio::from_integer(WEEKS_PER_YEAR) {
            Maturity {
                value: weeks,
                unit: MaturityUnit::Weeks,
            }
        } else {
            Maturity {
                value: weeks / Ratio::from_integer(WEEKS_PER_YEAR),
                unit: MaturityUnit::Years,
            }
        })
    }

    pub fn weeks(n: u64) -> Self {
        Self::new(Ratio::from_integer(n), MaturityUnit::Weeks).expect("positive week count")
    }

    pub fn years(n: u64) -> Self {
        Self::new(Ratio::from_integer(n), MaturityUnit::Years).expect("positive year count")
    }

    /// Parses a terminating decimal such as `13`, `2.5` or `0.25` in the
    /// given unit.
    pub fn parse(value: &str, unit: &str) -> Result<Self> {
        let unit: MaturityUnit = unit.parse()?;
        let ratio = parse_decimal_ratio(value)
            .ok_or_else(|| Error::Invalid(format!("bad maturity value `{value}`")))?;
        Self::new(ratio, unit)
    }

    pub fn value(&self) -> Ratio<u64> {
        self.value
    }

    pub fn unit(&self) -> MaturityUnit {
        self.unit
    }

    pub fn in_years(&self) -> Ratio<u64> {
        match self.unit {
            MaturityUnit::Weeks => self.value / Ratio::from_integer(WEEKS_PER_YEAR),
            MaturityUnit::Years => self.value,
        }
    }

    pub fn in_weeks(&self) -> Ratio<u64> {
        match self.unit {
            MaturityUnit::Weeks => self.value,
            MaturityUnit::Years => self.value * Ratio::from_integer(WEEKS_PER_YEAR),
        }
    }

    pub fn years_f64(&self) -> f64 {
        let y = self.in_years();
        *y.numer() as f64 / *y.denom() as f64
    }

    /// Bills are the sub-year and one-year discount tenors.
    pub fn is_bill(&self) -> bool {
        self.in_weeks() <= Ratio::from_integer(WEEKS_PER_YEAR)
    }

    /// A `(value, unit)` pair whose value is a terminating decimal.
    ///
    /// Prefers the canonical unit; a week count such as 60 has no finite
    /// decimal in years, so it falls back to weeks.
    pub fn decimal_parts(&self) -> (String, MaturityUnit) {
        if let Some(s) = format_decimal_ratio(self.value) {
            return (s, self.unit);
        }
        let weeks = self.in_weeks();
        let s = format_decimal_ratio(weeks).expect("decimal inputs always terminate in one unit");
        (s, MaturityUnit::Weeks)
    }
}

impl Ord for Maturity {
    fn cmp(&self, other: &Self) -> Ordering {
        self.in_weeks().cmp(&other.in_weeks())
    }
}

impl PartialOrd for Maturity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Maturity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (v, unit) = self.decimal_parts();
        let suffix = match unit {
            MaturityUnit::Weeks => "w",
            MaturityUnit::Years => "y",
        };
        write!(f, "{v}{suffix}")
    }
}

fn parse_decimal_ratio(s: &str) -> Option<Ratio<u64>> {
    let s = s.trim();
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if frac.len() > 12 || int.len() > 6 {
        return None;
    }
    let denom = 10u64.pow(frac.len() as u32);
    let int_part: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_part: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Ratio::new(int_part * denom + frac_part, denom))
}

fn format_decimal_ratio(r: Ratio<u64>) -> Option<String> {
    let mut d = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while d.is_multiple_of(2) {
        d /= 2;
        twos += 1;
    }
    while d.is_multiple_of(5) {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return None;
    }
    let places = twos.max(fives);
    let scale = 10u64.pow(places);
    let scaled = *r.numer() * (scale / *r.denom());
    if places == 0 {
        return Some(scaled.to_string());
    }
    let int = scaled / scale;
    let frac = scaled % scale;
    let frac = format!("{frac:0width$}", width = places as usize);
    Some(format!("{int}.{}", frac.trim_end_matches('0')))
}

/// One auction result. Coupon, price and yield may each be absent.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionRecord {
    pub auction_date: NaiveDate,
    pub maturity: Maturity,
    values: [Option<f64>; 3],
}

impl AuctionRecord {
    pub fn new(
        auction_date: NaiveDate,
        maturity: Maturity,
        coupon: Option<f64>,
        price: Option<f64>,
        yield_pct: Option<f64>,
    ) -> Self {
        AuctionRecord {
            auction_date,
            maturity,
            values: [coupon, price, yield_pct],
        }
    }

    pub fn get(&self, v: Variable) -> Option<f64> {
        self.values[v.index()]
    }

    pub fn set(&mut self, v: Variable, value: Option<f64>) {
        self.values[v.index()] = value;
    }

    pub fn coupon(&self) -> Option<f64> {
        self.get(Variable::Coupon)
    }

    pub fn price(&self) -> Option<f64> {
        self.get(Variable::Price)
    }

    pub fn yield_pct(&self) -> Option<f64> {
        self.get(Variable::Yield)
    }

    fn key(&self) -> (NaiveDate, Maturity) {
        (self.auction_date, self.maturity)
    }
}

/// Days since 1970-01-01; the date covariate used by every model.
pub fn date_ordinal(date: NaiveDate) -> i64 {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    (date - epoch).num_days()
}

/// A panel of auction records plus an explicit observed/missing mask.
///
/// `mask[i][v]` is true when variable `v` of record `i` is observed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<AuctionRecord>,
    mask: Vec<[bool; 3]>,
}

impl Dataset {
    /// Sorts records canonically by `(auction_date, maturity)` and derives
    /// the mask from which fields are present.
    pub fn from_records(mut records: Vec<AuctionRecord>) -> Self {
        records.sort_by_key(|a| a.key());
        let mask = records
            .iter()
            .map(|r| Variable::ALL.map(|v| r.get(v).is_some()))
            .collect();
        Dataset { records, mask }
    }

    /// Assembles a dataset verbatim, without sorting or checking the mask.
    /// Use [`dataset_validate`] to find out whether the result is sound.
    pub fn from_parts(records: Vec<AuctionRecord>, mask: Vec<[bool; 3]>) -> Self {
        Dataset { records, mask }
    }

    pub fn records(&self) -> &[AuctionRecord] {
        &self.records
    }

    pub fn mask(&self) -> &[[bool; 3]] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_observed(&self, record: usize, v: Variable) -> bool {
        self.mask[record][v.index()]
    }

    pub fn value(&self, record: usize, v: Variable) -> Option<f64> {
        if self.is_observed(record, v) {
            self.records[record].get(v)
        } else {
            None
        }
    }

    /// Count of unobserved cells across all three variables.
    pub fn missing_count(&self) -> usize {
        self.mask
            .iter()
            .map(|row| row.iter().filter(|o| !**o).count())
            .sum()
    }

    pub fn missing_in(&self, v: Variable) -> usize {
        self.mask.iter().filter(|row| !row[v.index()]).count()
    }

    /// Observed values of one variable, in record order.
    pub fn observed_values(&self, v: Variable) -> Vec<f64> {
        (0..self.len()).filter_map(|i| self.value(i, v)).collect()
    }

    /// Indices of records, grouped by maturity, each group in date order.
    pub fn maturity_groups(&self) -> Vec<(Maturity, Vec<usize>)> {
        let mut groups: Vec<(Maturity, Vec<usize>)> = Vec::new();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (self.records[i].maturity, self.records[i].auction_date));
        for i in order {
            let m = self.records[i].maturity;
            match groups.last_mut() {
                Some((gm, idx)) if *gm == m => idx.push(i),
                _ => groups.push((m, vec![i])),
            }
        }
        groups
    }

    pub fn date_ordinal(&self, record: usize) -> i64 {
        date_ordinal(self.records[record].auction_date)
    }

    /// Returns a copy with the given cells set and marked observed.
    pub fn with_filled(&self, cells: impl IntoIterator<Item = (usize, Variable, f64)>) -> Dataset {
        let mut out = self.clone();
        for (i, v, x) in cells {
            out.records[i].set(v, Some(x));
            out.mask[i][v.index()] = true;
        }
        out
    }

    /// Returns a copy with the given cells removed and marked missing.
    pub fn with_hidden(&self, cells: impl IntoIterator<Item = (usize, Variable)>) -> Dataset {
        let mut out = self.clone();
        for (i, v) in cells {
            out.records[i].set(v, None);
            out.mask[i][v.index()] = false;
        }
        out
    }
}

/// One broken invariant, located by record (when applicable) and field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub record: Option<usize>,
    pub field: &'static str,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.record {
            Some(i) => write!(f, "record {i}, {}: {}", self.field, self.rule),
            None => write!(f, "{}: {}", self.field, self.rule),
        }
    }
}

/// Checks every dataset invariant and lists what is broken.
pub fn dataset_validate(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.mask.len() != d.records.len() {
        out.push(Violation {
            record: None,
            field: "mask",
            rule: format!(
                "mask has {} rows but dataset has {} records",
                d.mask.len(),
                d.records.len()
            ),
        });
    }
    for (i, rec) in d.records.iter().enumerate() {
        if let Some(row) = d.mask.get(i) {
            for v in Variable::ALL {
                match (row[v.index()], rec.get(v)) {
                    (true, None) => out.push(Violation {
                        record: Some(i),
                        field: v.name(),
                        rule: "mask marks cell observed but value is absent".into(),
                    }),
                    (false, Some(_)) => out.push(Violation {
                        record: Some(i),
                        field: v.name(),
                        rule: "mask marks cell missing but value is present".into(),
                    }),
                    _ => {}
                }
            }
        }
        for v in Variable::ALL {
            let Some(x) = rec.get(v) else { continue };
            let ok = match v {
                Variable::Price => x.is_finite() && x > 0.0 && x <= PRICE_MAX,
                _ => x.is_finite() && (0.0..=RATE_MAX).contains(&x),
            };
            if !ok {
                let bound = match v {
                    Variable::Price => "(0, 300]",
                    _ => "[0, 100]",
                };
                out.push(Violation {
                    record: Some(i),
                    field: v.name(),
                    rule: format!("value {x} outside {bound}"),
                });
            }
        }
        if i > 0 {
            let prev = d.records[i - 1].key();
            match prev.cmp(&rec.key()) {
                Ordering::Less => {}
                Ordering::Equal => out.push(Violation {
                    record: Some(i),
                    field: "auction_date/maturity",
                    rule: format!(
                        "duplicate (date, maturity) pair ({}, {})",
                        rec.auction_date, rec.maturity
                    ),
                }),
                Ordering::Greater => out.push(Violation {
                    record: Some(i),
                    field: "auction_date/maturity",
                    rule: "records not sorted by (date, maturity)".into(),
                }),
            }
        }
    }
    out
}

/// Share of unobserved cells among all `3 × |records|` cells.
pub fn missing_fraction(d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(d.missing_count() as f64 / (3 * d.len()) as f64)
}

/// Missingness mechanisms. Only MCAR can be generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingnessMechanism {
    /// Missing completely at random: independent of every value.
    Mcar,
    /// Missing at random: depends only on observed values.
    Mar,
    /// Missing not at random: depends on the missing value itself.
    Mnar,
}

impl MissingnessMechanism {
    pub fn supports_generation(self) -> bool {
        matches!(self, MissingnessMechanism::Mcar)
    }
}

/// Which cells a mask may hide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskTargets {
    /// Individual cells of the listed variables, pooled into one draw.
    Variables(Vec<Variable>),
    /// Whole records: a chosen row loses all three variables.
    WholeRow,
}

impl Default for MaskTargets {
    fn default() -> Self {
        MaskTargets::Variables(Variable::ALL.to_vec())
    }
}

pub const DEFAULT_MISSING_RATE: f64 = 0.35;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskConfig {
    pub missing_rate: f64,
    pub seed: u64,
    pub targets: MaskTargets,
}

impl MaskConfig {
    pub fn new(seed: u64) -> Self {
        MaskConfig {
            missing_rate: DEFAULT_MISSING_RATE,
            seed,
            targets: MaskTargets::default(),
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.missing_rate = rate;
        self
    }

    pub fn with_targets(mut self, targets: MaskTargets) -> Self {
        self.targets = targets;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, d).unwrap()
    }

    fn complete3() -> Dataset {
        Dataset::from_records(vec![
            AuctionRecord::new(day(1), Maturity::weeks(13), Some(0.0), Some(98.0), Some(8.0)),
            AuctionRecord::new(day(1), Maturity::years(2), Some(9.0), Some(99.5), Some(9.3)),
            AuctionRecord::new(day(8), Maturity::weeks(13), Some(0.0), Some(98.1), Some(7.9)),
        ])
    }

    #[test]
    fn maturity_is_canonical() {
        assert_eq!(Maturity::weeks(52), Maturity::years(1));
        assert_eq!(Maturity::weeks(104), Maturity::years(2));
        assert_eq!(Maturity::parse("0.25", "years").unwrap(), Maturity::weeks(13));
        assert_eq!(Maturity::weeks(26).unit(), MaturityUnit::Weeks);
        assert_eq!(Maturity::weeks(78).unit(), MaturityUnit::Years);
        assert_eq!(Maturity::weeks(78).decimal_parts().0, "1.5");
        assert!(Maturity::weeks(13) < Maturity::weeks(26));
        assert!(Maturity::weeks(26) < Maturity::years(1));
        assert!(Maturity::parse("0", "weeks").is_err());
        assert!(Maturity::parse("-1", "weeks").is_err());
    }

    #[test]
    fn non_terminating_years_fall_back_to_weeks() {
        let m = Maturity::weeks(60);
        assert_eq!(m.unit(), MaturityUnit::Years);
        assert_eq!(m.decimal_parts(), ("60".to_string(), MaturityUnit::Weeks));
        assert!((m.years_f64() - 60.0 / 52.0).abs() < 1e-15);
    }

    #[test]
    fn complete_dataset_validates() {
        assert!(dataset_validate(&complete3()).is_empty());
    }

    #[test]
    fn mask_field_mismatch_is_one_violation() {
        let d = complete3();
        let mut records = d.records().to_vec();
        records[1].set(Variable::Price, None);
        let bad = Dataset::from_parts(records, d.mask().to_vec());
        let v = dataset_validate(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].record, Some(1));
        assert_eq!(v[0].field, "price");
    }

    #[test]
    fn duplicate_key_is_one_violation() {
        let r = AuctionRecord::new(day(1), Maturity::years(2), Some(9.0), Some(99.5), Some(9.3));
        let d = Dataset::from_records(vec![r.clone(), r]);
        let v = dataset_validate(&d);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("duplicate"));
    }

    #[test]
    fn range_checks() {
        let d = Dataset::from_records(vec![AuctionRecord::new(
            day(1),
            Maturity::years(2),
            Some(101.0),
            Some(0.0),
            Some(f64::NAN),
        )]);
        assert_eq!(dataset_validate(&d).len(), 3);
    }

    #[test]
    fn missing_fraction_counts() {
        let d = complete3();
        assert_eq!(missing_fraction(&d).unwrap(), 0.0);
        let all: Vec<_> = (0..3)
            .flat_map(|i| Variable::ALL.map(|v| (i, v)))
            .collect();
        assert_eq!(missing_fraction(&d.with_hidden(all)).unwrap(), 1.0);
        assert!(matches!(
            missing_fraction(&Dataset::from_records(vec![])),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn missing_fraction_21_of_60() {
        let records = (0..20)
            .map(|i| {
                AuctionRecord::new(
                    day(1) + chrono::Days::new(i),
                    Maturity::years(2),
                    Some(9.0),
                    Some(99.0),
                    Some(9.1),
                )
            })
            .collect();
        let d = Dataset::from_records(records);
        let cells: Vec<_> = (0..20)
            .flat_map(|i| Variable::ALL.map(|v| (i, v)))
            .take(21)
            .collect();
        assert_eq!(missing_fraction(&d.with_hidden(cells)).unwrap(), 21.0 / 60.0);
    }

    #[test]
    fn toggling_any_mask_cell_breaks_validation() {
        let d = complete3();
        for i in 0..d.len() {
            for v in Variable::ALL {
                let mut mask = d.mask().to_vec();
                mask[i][v.index()] = !mask[i][v.index()];
                let toggled = Dataset::from_parts(d.records().to_vec(), mask);
                assert!(!dataset_validate(&toggled).is_empty());
            }
        }
    }

    #[test]
    fn groups_follow_date_order() {
        let g = complete3().maturity_groups();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].0, Maturity::weeks(13));
        assert_eq!(g[0].1, vec![0, 2]);
        assert_eq!(g[1].1, vec![1]);
    }

    #[test]
    fn only_mcar_generates() {
        assert!(MissingnessMechanism::Mcar.supports_generation());
        assert!(!MissingnessMechanism::Mar.supports_generation());
        assert!(!MissingnessMechanism::Mnar.supports_generation());
    }
}
