use super::{Diagnostics, ImputationResult, ImputerKind};
use crate::model::{Dataset, Variable};

/// Regresses each `(maturity, variable)` series on the auction date, using
/// only observations dated strictly before the gap, and predicts the gap.
///
/// One prior observation falls back to carrying it forward; none leaves the
/// cell missing. Both fallbacks are counted in the diagnostics.
pub fn impute_linear_regression(d: &Dataset) -> ImputationResult {
    let mut cells = Vec::new();
    let (mut regressed, mut carried, mut unfilled) = (0usize, 0usize, 0usize);
    for (_, idx) in d.maturity_groups() {
        for v in Variable::ALL {
            // (date ordinal, value) of observed cells, in date order
            let mut priors: Vec<(f64, f64)> = Vec::new();
            for &i in &idx {
                let t = d.date_ordinal(i) as f64;
                match d.value(i, v) {
                    Some(x) => priors.push((t, x)),
                    None => match priors.len() {
                        0 => unfilled += 1,
                        1 => {
                            carried += 1;
                            cells.push((i, v, priors[0].1));
                        }
                        _ => {
                            regressed += 1;
                            cells.push((i, v, predict_at(&priors, t)));
                        }
                    },
                }
            }
        }
    }
    let mut diag = Diagnostics::new();
    diag.insert("regressed".into(), regressed.to_string());
    diag.insert("fallback_carry_forward".into(), carried.to_string());
    diag.insert("fallback_unfilled".into(), unfilled.to_string());
    ImputationResult::new(d.with_filled(cells), ImputerKind::LinearRegression, diag)
}

/// OLS line through `points` evaluated at `t`. Dates are distinct within a
/// series, so two or more points always determine the line.
fn predict_at(points: &[(f64, f64)], t: f64) -> f64 {
    let n = points.len() as f64;
    let t0 = points[0].0;
    let y0 = points[0].1;
    let mx = points.iter().map(|p| p.0 - t0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1 - y0).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - t0 - mx;
        sxy += dx * (y - y0 - my);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    y0 + my + slope * (t - t0 - mx)
}
