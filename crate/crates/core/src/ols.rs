//! Ordinary least squares with an intercept, solved by Householder QR.
//!
//! Predictor columns are centred and scaled before the solve. Columns with no
//! spread carry no information beyond the intercept and are dropped; any
//! remaining rank deficiency is reported as [`Error::Singular`].

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LinearFit {
    intercept: f64,
    /// Per original column: `(mean, scale, coefficient)`, or `None` when dropped.
    columns: Vec<Option<(f64, f64, f64)>>,
}

impl LinearFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut y = self.intercept;
        for (x, c) in row.iter().zip(&self.columns) {
            if let Some((mean, scale, beta)) = c {
                y += beta * (x - mean) / scale;
            }
        }
        y
    }

    pub fn used_columns(&self) -> usize {
        self.columns.iter().filter(|c| c.is_some()).count()
    }
}

/// Fits `y ~ 1 + x` where `x` holds one row of predictors per observation.
pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let n = y.len();
    if n == 0 || x.len() != n {
        return Err(Error::Singular);
    }
    let p = x[0].len();
    let y_mean = mean(y);

    let mut columns = vec![None; p];
    let mut design: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for j in 0..p {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        let m = mean(&col);
        let scale = col.iter().map(|v| (v - m).abs()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            continue;
        }
        design.push(col.iter().map(|v| (v - m) / scale).collect());
        kept.push((j, m, scale));
    }

    let k = design.len();
    if k == 0 {
        return Ok(LinearFit {
            intercept: y_mean,
            columns,
        });
    }
    if n <= k {
        return Err(Error::Singular);
    }

    let mut rhs: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let beta = householder_solve(&mut design, &mut rhs)?;
    for ((j, m, scale), b) in kept.into_iter().zip(beta) {
        columns[j] = Some((m, scale, b));
    }
    Ok(LinearFit {
        intercept: y_mean,
        columns,
    })
}

fn mean(v: &[f64]) -> f64 {
    let first = v[0];
    first + v.iter().map(|x| x - first).sum::<f64>() / v.len() as f64
}

/// Least squares on centred columns (column-major), overwriting inputs.
fn householder_solve(cols: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<Vec<f64>> {
    let k = cols.len();
    let n = rhs.len();
    let mut diag = vec![0.0; k];
    for j in 0..k {
        let norm = cols[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let col_scale = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * col_scale.max(1.0) {
            return Err(Error::Singular);
        }
        let alpha = if cols[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(j + 1) {
            let dot: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col[j..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&rhs[j..n]).map(|(a, b)| a * b).sum();
        let f = 2.0 * dot / vnorm2;
        for (r, vi) in rhs[j..].iter_mut().zip(&v) {
            *r -= f * vi;
        }
    }
    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = rhs[j];
        for (l, b) in beta.iter().enumerate().skip(j + 1) {
            s -= cols[l][j] * b;
        }
        beta[j] = s / diag[j];
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_plane() {
        let x: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, (i * i) as f64 % 7.0, 18000.0 + 14.0 * ((i * 3) % 10) as f64])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| 1.5 + 2.0 * r[0] - 0.5 * r[1] + 0.01 * r[2]).collect();
        let f = fit(&x, &y).unwrap();
        for (r, t) in x.iter().zip(&y) {
            assert!((f.predict(r) - t).abs() < 1e-9);
        }
        assert!((f.predict(&[20.0, 3.0, 18500.0]) - (1.5 + 40.0 - 1.5 + 185.0)).abs() < 1e-8);
    }

    #[test]
    fn constant_columns_are_dropped() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![3.0, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 * i as f64).collect();
        let f = fit(&x, &y).unwrap();
        assert_eq!(f.used_columns(), 1);
        assert!((f.predict(&[99.0, 7.0]) - 14.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_are_singular() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64 + 1.0]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert!(matches!(fit(&x, &y), Err(Error::Singular)));
    }

    #[test]
    fn matches_closed_form_simple_regression() {
        let xs = [1.0, 2.0, 4.0, 7.0, 8.0];
        let ys = [2.1, 2.9, 5.2, 7.8, 9.1];
        let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        let f = fit(&xs.iter().map(|x| vec![*x]).collect::<Vec<_>>(), &ys).unwrap();
        assert!((f.predict(&[10.0]) - (my + slope * (10.0 - mx))).abs() < 1e-12);
    }
}
