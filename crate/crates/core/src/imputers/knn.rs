use super::{covariates, Diagnostics, ImputationResult, ImputerKind};
use crate::error::{Error, Result};
use crate::model::{Dataset, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 10 }
    }
}

/// Per-feature standardization: `(mean, sd)`, or `None` for a feature with
/// no spread.
type Scales = Vec<Option<(f64, f64)>>;

/// Feature vector of record `i` when imputing `target`: the two other
/// variables (absent when unobserved), maturity, date ordinal.
fn features(d: &Dataset, i: usize, target: Variable) -> Vec<Option<f64>> {
    let mut f: Vec<Option<f64>> = Variable::ALL
        .into_iter()
        .filter(|&v| v != target)
        .map(|v| d.value(i, v))
        .collect();
    f.extend(covariates(d, i).map(Some));
    f
}

fn scales(d: &Dataset, target: Variable) -> Scales {
    let rows: Vec<Vec<Option<f64>>> = (0..d.len()).map(|i| features(d, i, target)).collect();
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|j| {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            if vals.len() < 2 {
                return None;
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let sd = (vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            (sd > 0.0 && sd.is_finite()).then_some((mean, sd))
        })
        .collect()
}

/// K-nearest-neighbour imputation over the pooled panel.
///
/// Distance is Euclidean over standardized features observed in both rows;
/// the `k` nearest donors observing the target variable are averaged with
/// weights proportional to `exp(-distance)`. Ties go to the earlier row.
pub fn impute_knn(d: &Dataset, cfg: &KnnConfig) -> Result<ImputationResult> {
    if cfg.k == 0 {
        return Err(Error::range("knn_k", 0, "must be >= 1"));
    }
    let mut cells = Vec::new();
    let mut unusable = 0usize;
    for v in Variable::ALL {
        if d.missing_in(v) == 0 {
            continue;
        }
        let sc = scales(d, v);
        let feats: Vec<Vec<Option<f64>>> = (0..d.len()).map(|i| features(d, i, v)).collect();
        let donors: Vec<usize> = (0..d.len()).filter(|&i| d.is_observed(i, v)).collect();

        for target in (0..d.len()).filter(|&i| !d.is_observed(i, v)) {
            if donors.len() < cfg.k {
                return Err(Error::InsufficientDonors {
                    record: target,
                    variable: v,
                    needed: cfg.k,
                    available: donors.len(),
                });
            }
            let usable = feats[target]
                .iter()
                .zip(&sc)
                .any(|(x, s)| x.is_some() && s.is_some());
            if !usable {
                unusable += 1;
                continue;
            }
            let mut ranked: Vec<(f64, usize)> = donors
                .iter()
                .map(|&j| (distance(&feats[target], &feats[j], &sc), j))
                .collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            ranked.truncate(cfg.k);

            let nearest = ranked[0].0;
            let (mut num, mut den) = (0.0, 0.0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &(dist, j) in &ranked {
                // exp(-d) up to a common factor, which cancels in the ratio
                let w = (nearest - dist).exp();
                let x = d.value(j, v).expect("donor observes target");
                num += w * x;
                den += w;
                lo = lo.min(x);
                hi = hi.max(x);
            }
            cells.push((target, v, (num / den).clamp(lo, hi)));
        }
    }
    let mut diag = Diagnostics::new();
    diag.insert("k".into(), cfg.k.to_string());
    diag.insert("unusable_targets".into(), unusable.to_string());
    Ok(ImputationResult::new(d.with_filled(cells), ImputerKind::Knn, diag))
}

fn distance(a: &[Option<f64>], b: &[Option<f64>], sc: &Scales) -> f64 {
    a.iter()
        .zip(b)
        .zip(sc)
        .filter_map(|((x, y), s)| match (x, y, s) {
            (Some(x), Some(y), Some((_, sd))) => Some(((x - y) / sd).powi(2)),
            _ => None,
        })
        .sum::<f64>()
        .sqrt()
}
