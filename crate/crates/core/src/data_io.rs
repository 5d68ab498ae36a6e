//! Dataset CSV and run-configuration files.
//!
//! Dataset files are UTF-8 CSV with LF line endings and the fixed header
//! `auction_date,maturity_value,maturity_unit,coupon,price,yield`. Missing
//! cells are read from either an empty field or `NA`; only `NA` is written.
//! Numbers are written in their shortest exact form, so a write followed by
//! a read reproduces the dataset bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::imputers::ImputerKind;
use crate::model::{dataset_validate, AuctionRecord, Dataset, Maturity, Variable};

pub const MISSING_MARKER: &str = "NA";

/// Column layout of the dataset CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvSchema {
    pub columns: [&'static str; 6],
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            columns: [
                "auction_date",
                "maturity_value",
                "maturity_unit",
                "coupon",
                "price",
                "yield",
            ],
        }
    }
}

impl CsvSchema {
    pub fn header(&self) -> String {
        self.columns.join(",")
    }
}

pub fn read_dataset(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, schema)
}

pub fn parse_dataset(text: &str, schema: &CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(h) => h.map_err(|e| csv_error(e, 1))?,
        None => {
            return Err(Error::Header {
                expected: schema.header(),
                found: String::new(),
            })
        }
    };
    let found: Vec<&str> = header.iter().collect();
    if found != schema.columns {
        return Err(Error::Header {
            expected: schema.header(),
            found: found.join(","),
        });
    }

    let mut records = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        if row.len() != schema.columns.len() {
            return Err(Error::Parse {
                line,
                column: schema.columns.get(row.len()).unwrap_or(&"<extra>").to_string(),
                message: format!("expected {} fields, found {}", schema.columns.len(), row.len()),
            });
        }
        let cell_err = |col: usize, message: String| Error::Parse {
            line,
            column: schema.columns[col].to_string(),
            message,
        };

        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
            .map_err(|_| cell_err(0, format!("`{}` is not an ISO 8601 date", &row[0])))?;
        // Reject forms chrono tolerates but ISO 8601 does not, e.g. `2020-1-5`.
        if row[0].len() != 10 {
            return Err(cell_err(0, format!("`{}` is not an ISO 8601 date", &row[0])));
        }
        let maturity = Maturity::parse(&row[1], &row[2]).map_err(|e| match &e {
            Error::Invalid(msg) if msg.contains("unit") => cell_err(2, msg.clone()),
            _ => cell_err(1, e.to_string()),
        })?;

        let mut values = [None; 3];
        for v in Variable::ALL {
            let col = 3 + v.index();
            let raw = &row[col];
            values[v.index()] = if raw.is_empty() || raw == MISSING_MARKER {
                None
            } else {
                let x: f64 = raw
                    .parse()
                    .map_err(|_| cell_err(col, format!("`{raw}` is not a number")))?;
                if !x.is_finite() {
                    return Err(cell_err(col, format!("`{raw}` is not finite")));
                }
                Some(x)
            };
        }
        let [coupon, price, yld] = values;
        records.push((line, AuctionRecord::new(date, maturity, coupon, price, yld)));
    }

    let lines: Vec<(chrono::NaiveDate, Maturity, usize)> = records
        .iter()
        .map(|(l, r)| (r.auction_date, r.maturity, *l))
        .collect();
    let d = Dataset::from_records(records.into_iter().map(|(_, r)| r).collect());
    if let Some(v) = dataset_validate(&d).into_iter().next() {
        let line = v
            .record
            .and_then(|i| {
                let r = &d.records()[i];
                lines
                    .iter()
                    .filter(|(dt, m, _)| *dt == r.auction_date && *m == r.maturity)
                    .map(|(_, _, l)| *l)
                    .max()
            })
            .unwrap_or(0);
        return Err(Error::Parse {
            line,
            column: v.field.to_string(),
            message: v.rule,
        });
    }
    Ok(d)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    Error::Parse {
        line,
        column: String::from("<row>"),
        message: e.to_string(),
    }
}

pub fn format_dataset(d: &Dataset, schema: &CsvSchema) -> String {
    let mut out = schema.header();
    out.push('\n');
    for (i, r) in d.records().iter().enumerate() {
        let (mv, mu) = r.maturity.decimal_parts();
        write!(out, "{},{},{}", r.auction_date.format("%Y-%m-%d"), mv, mu.name()).unwrap();
        for v in Variable::ALL {
            match d.value(i, v) {
                Some(x) => write!(out, ",{x}").unwrap(),
                None => write!(out, ",{MISSING_MARKER}").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_dataset(d: &Dataset, path: impl AsRef<Path>, schema: &CsvSchema) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_dataset(d, schema)).map_err(|e| Error::io(path, e))
}

/// Parameters of one benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub repetitions: usize,
    pub missing_rate: f64,
    pub methods: Vec<ImputerKind>,
    pub knn_k: usize,
    pub mice_iterations: usize,
    pub mice_imputations: usize,
    pub forest_trees: usize,
    pub alpha: f64,
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        RunConfig {
            seed,
            repetitions: 100,
            missing_rate: 0.35,
            methods: ImputerKind::ALL.to_vec(),
            knn_k: 10,
            mice_iterations: 5,
            mice_imputations: 5,
            forest_trees: 100,
            alpha: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 3 {
            return Err(Error::range(
                "repetitions",
                self.repetitions,
                "must be >= 3 (Shapiro-Wilk needs n >= 3)",
            ));
        }
        if !(0.0..=1.0).contains(&self.missing_rate) {
            return Err(Error::range("missing_rate", self.missing_rate, "must be in [0, 1]"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::range("alpha", self.alpha, "must be in (0, 1)"));
        }
        if self.methods.is_empty() {
            return Err(Error::range("methods", "[]", "must name at least one method"));
        }
        for (name, value) in [
            ("knn_k", self.knn_k),
            ("mice_iterations", self.mice_iterations),
            ("mice_imputations", self.mice_imputations),
            ("forest_trees", self.forest_trees),
        ] {
            if value == 0 {
                return Err(Error::range(name, value, "must be >= 1"));
            }
        }
        Ok(())
    }

    /// Renders the config in the same `key = value` format `read_config` accepts.
    pub fn to_text(&self) -> String {
        let methods: Vec<String> = self
            .methods
            .iter()
            .map(|m| format!("\"{}\"", m.name()))
            .collect();
        format!(
            "seed = {}\nrepetitions = {}\nmissing_rate = {}\nmethods = [{}]\nknn_k = {}\nmice_iterations = {}\nmice_imputations = {}\nforest_trees = {}\nalpha = {}\n",
            self.seed,
            self.repetitions,
            self.missing_rate,
            methods.join(", "),
            self.knn_k,
            self.mice_iterations,
            self.mice_imputations,
            self.forest_trees,
            self.alpha,
        )
    }
}

pub const CONFIG_KEYS: [&str; 9] = [
    "seed",
    "repetitions",
    "missing_rate",
    "methods",
    "knn_k",
    "mice_iterations",
    "mice_imputations",
    "forest_trees",
    "alpha",
];

pub fn read_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Splits `key = value` lines, dropping blanks and `#` comments.
pub(crate) fn config_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        out.push((n + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(0);
    let mut seen: Vec<String> = Vec::new();
    for (line, key, value) in config_pairs(text)? {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {line}: unknown key `{key}`")));
        }
        if seen.contains(&key) {
            return Err(Error::Config(format!("line {line}: duplicate key `{key}`")));
        }
        apply_key(&mut cfg, &key, &value)?;
        seen.push(key);
    }
    if !seen.iter().any(|k| k == "seed") {
        return Err(Error::Config("missing required key `seed`".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply_key(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    fn int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a non-negative integer")))
    }
    fn real(key: &str, value: &str) -> Result<f64> {
        value
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Config(format!("`{key}`: `{value}` is not a number")))
    }
    match key {
        "seed" => cfg.seed = int(key, value)?,
        "repetitions" => cfg.repetitions = int(key, value)?,
        "missing_rate" => cfg.missing_rate = real(key, value)?,
        "knn_k" => cfg.knn_k = int(key, value)?,
        "mice_iterations" => cfg.mice_iterations = int(key, value)?,
        "mice_imputations" => cfg.mice_imputations = int(key, value)?,
        "forest_trees" => cfg.forest_trees = int(key, value)?,
        "alpha" => cfg.alpha = real(key, value)?,
        "methods" => cfg.methods = parse_methods(value)?,
        _ => unreachable!("key checked against CONFIG_KEYS"),
    }
    Ok(())
}

fn parse_methods(value: &str) -> Result<Vec<ImputerKind>> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .unwrap_or(value);
    let mut methods = Vec::new();
    for item in inner.split(',') {
        let name = item.trim().trim_matches('"').trim();
        if name.is_empty() {
            continue;
        }
        let kind: ImputerKind = name.parse()?;
        if methods.contains(&kind) {
            return Err(Error::Config(format!("`methods`: `{name}` listed twice")));
        }
        methods.push(kind);
    }
    Ok(methods)
}
