use rand::Rng as _;
use rayon::prelude::*;

use super::{
    check_chained_preconditions, covariates, observed_mean, observed_range, visit_order, Diagnostics,
    ImputationResult, ImputerKind,
};
use crate::error::{Error, Result};
use crate::model::{Dataset, Variable};
use crate::ols;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiceConfig {
    /// Sweeps over the variables per chain.
    pub iterations: usize,
    /// Independent chains averaged into the point estimate.
    pub imputations: usize,
    /// Predictive-mean-matching donor pool size.
    pub donor_pool: usize,
}

impl Default for MiceConfig {
    fn default() -> Self {
        MiceConfig {
            iterations: 5,
            imputations: 5,
            donor_pool: 5,
        }
    }
}

struct Chain {
    /// Final values of the missing cells, per variable, in row order.
    fills: [Vec<f64>; 3],
    singular_fallbacks: usize,
}

/// Multivariate imputation by chained equations.
///
/// Each chain starts from column means and then, for `iterations` sweeps,
/// regresses every incomplete variable on the other two plus maturity and
/// date, refilling its gaps by predictive mean matching. The chains are
/// averaged cell by cell.
pub fn impute_mice(d: &Dataset, cfg: &MiceConfig, seed: u64) -> Result<ImputationResult> {
    if cfg.iterations == 0 || cfg.imputations == 0 || cfg.donor_pool == 0 {
        return Err(Error::Precondition(
            "MICE iterations, imputations and donor pool must be >= 1".into(),
        ));
    }
    let mut diag = Diagnostics::new();
    diag.insert("iterations".into(), cfg.iterations.to_string());
    diag.insert("chains".into(), cfg.imputations.to_string());
    if d.missing_count() == 0 {
        diag.insert("singular_fallbacks".into(), "0".into());
        return Ok(ImputationResult::new(d.clone(), ImputerKind::Mice, diag));
    }
    check_chained_preconditions(d)?;

    let chains: Vec<Chain> = (0..cfg.imputations)
        .into_par_iter()
        .map(|c| run_chain(d, cfg, seed, c as u64))
        .collect();

    let mut cells = Vec::new();
    for v in Variable::ALL {
        let (lo, hi) = match observed_range(d, v) {
            Some(r) => r,
            None => continue,
        };
        let missing: Vec<usize> = (0..d.len()).filter(|&i| !d.is_observed(i, v)).collect();
        for (k, &i) in missing.iter().enumerate() {
            let sum: f64 = chains.iter().map(|ch| ch.fills[v.index()][k]).sum();
            cells.push((i, v, (sum / chains.len() as f64).clamp(lo, hi)));
        }
    }
    let singular: usize = chains.iter().map(|c| c.singular_fallbacks).sum();
    diag.insert("singular_fallbacks".into(), singular.to_string());
    Ok(ImputationResult::new(d.with_filled(cells), ImputerKind::Mice, diag))
}

fn run_chain(d: &Dataset, cfg: &MiceConfig, seed: u64, chain: u64) -> Chain {
    let mut rng = rng::stream(seed, &[chain]);
    let means = Variable::ALL.map(|v| observed_mean(d, v).unwrap_or(0.0));
    let mut current: Vec<[f64; 3]> = (0..d.len())
        .map(|i| Variable::ALL.map(|v| d.value(i, v).unwrap_or(means[v.index()])))
        .collect();
    let covs: Vec<[f64; 2]> = (0..d.len()).map(|i| covariates(d, i)).collect();
    let order = visit_order(d);
    let mut singular_fallbacks = 0;

    for _ in 0..cfg.iterations {
        for &v in &order {
            let design = |i: usize| -> Vec<f64> {
                let mut row: Vec<f64> = Variable::ALL
                    .into_iter()
                    .filter(|&u| u != v)
                    .map(|u| current[i][u.index()])
                    .collect();
                row.extend(covs[i]);
                row
            };
            let obs: Vec<usize> = (0..d.len()).filter(|&i| d.is_observed(i, v)).collect();
            let mis: Vec<usize> = (0..d.len()).filter(|&i| !d.is_observed(i, v)).collect();
            let x_obs: Vec<Vec<f64>> = obs.iter().map(|&i| design(i)).collect();
            let y_obs: Vec<f64> = obs.iter().map(|&i| current[i][v.index()]).collect();

            let fit = match ols::fit(&x_obs, &y_obs) {
                Ok(f) => f,
                Err(_) => {
                    singular_fallbacks += 1;
                    for &i in &mis {
                        current[i][v.index()] = means[v.index()];
                    }
                    continue;
                }
            };
            let fitted_obs: Vec<f64> = x_obs.iter().map(|r| fit.predict(r)).collect();
            let fitted_mis: Vec<f64> = mis.iter().map(|&i| fit.predict(&design(i))).collect();
            let pool = cfg.donor_pool.min(obs.len());
            for (&i, &target) in mis.iter().zip(&fitted_mis) {
                let donors = nearest_donors(&fitted_obs, target, pool);
                let pick = donors[rng.gen_range(0..donors.len())];
                current[i][v.index()] = y_obs[pick];
            }
        }
    }

    let fills = Variable::ALL.map(|v| {
        (0..d.len())
            .filter(|&i| !d.is_observed(i, v))
            .map(|i| current[i][v.index()])
            .collect()
    });
    Chain {
        fills,
        singular_fallbacks,
    }
}

/// Positions of the `pool` fitted values closest to `target`, earlier
/// positions winning ties.
fn nearest_donors(fitted: &[f64], target: f64, pool: usize) -> Vec<usize> {
    let mut ranked: Vec<(f64, usize)> = fitted
        .iter()
        .enumerate()
        .map(|(k, f)| ((f - target).abs(), k))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if pool < ranked.len() {
        ranked.select_nth_unstable_by(pool - 1, cmp);
        ranked.truncate(pool);
    }
    ranked.sort_by(cmp);
    ranked.into_iter().map(|(_, k)| k).collect()
}
