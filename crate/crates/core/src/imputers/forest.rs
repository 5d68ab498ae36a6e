//! Regression random forest: bootstrap-sampled CART trees with variance
//! reduction splits and a random feature subset at every node.

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;

use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(p))`.
    pub max_features: Option<usize>,
    /// Minimum number of samples in each child of a split.
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            max_features: None,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionForest {
    trees: Vec<Tree>,
    y_range: (f64, f64),
}

impl RegressionForest {
    /// Fits `trees` trees; tree `t` draws from its own stream keyed by
    /// `(seed, t)`, so the fit is identical under any thread count.
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &ForestParams, seed: u64) -> Self {
        assert!(!y.is_empty() && x.len() == y.len(), "forest needs matching non-empty data");
        let p = x[0].len();
        let mtry = params
            .max_features
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1));
        let min_leaf = params.min_leaf.max(1);
        let trees = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::stream(seed, &[t as u64]);
                let mut sample: Vec<usize> = (0..y.len()).map(|_| rng.gen_range(0..y.len())).collect();
                let mut nodes = Vec::new();
                grow(x, y, &mut sample, mtry, min_leaf, &mut rng, &mut nodes);
                Tree { nodes }
            })
            .collect();
        let y_range = y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        RegressionForest { trees, y_range }
    }

    /// Average of the tree predictions, a convex combination of training
    /// targets.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        (sum / self.trees.len() as f64).clamp(self.y_range.0, self.y_range.1)
    }
}

fn leaf_mean(y: &[f64], idx: &[usize]) -> f64 {
    let first = y[idx[0]];
    first + idx.iter().map(|&i| y[i] - first).sum::<f64>() / idx.len() as f64
}

fn grow(
    x: &[Vec<f64>],
    y: &[f64],
    idx: &mut [usize],
    mtry: usize,
    min_leaf: usize,
    rng: &mut rng::Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    nodes.push(Node::Leaf(leaf_mean(y, idx)));
    let n = idx.len();
    if n < 2 * min_leaf || idx.iter().all(|&i| y[i] == y[idx[0]]) {
        return id;
    }

    let p = x[0].len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let base = total * total / n as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    for feature in index::sample(rng, p, mtry).into_iter() {
        pairs.clear();
        pairs.extend(idx.iter().map(|&i| (x[i][feature], y[i])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_sum = 0.0;
        for s in 1..n {
            left_sum += pairs[s - 1].1;
            if s < min_leaf || n - s < min_leaf || pairs[s - 1].0 == pairs[s].0 {
                continue;
            }
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / s as f64 + right_sum * right_sum / (n - s) as f64;
            if best.is_none_or(|b| score > b.0) {
                let (lo, hi) = (pairs[s - 1].0, pairs[s].0);
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some((score, feature, threshold));
            }
        }
    }
    let Some((score, feature, threshold)) = best else {
        return id;
    };
    if score - base <= 1e-12 * base.abs().max(1e-300) {
        return id;
    }

    let mut split = 0;
    for k in 0..n {
        if x[idx[k]][feature] <= threshold {
            idx.swap(k, split);
            split += 1;
        }
    }
    let (l, r) = idx.split_at_mut(split);
    let left = grow(x, y, l, mtry, min_leaf, rng, nodes);
    let right = grow(x, y, r, mtry, min_leaf, rng, nodes);
    nodes[id] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_a_step() {
        let x: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<f64> = (0..60).map(|i| if i < 30 { 1.0 } else { 5.0 }).collect();
        let f = RegressionForest::fit(&x, &y, &ForestParams { trees: 50, max_features: Some(2), min_leaf: 5 }, 9);
        assert!(f.predict(&[5.0, 5.0]) < 1.5);
        assert!(f.predict(&[55.0, 6.0]) > 4.5);
    }

    #[test]
    fn constant_target_predicts_constant() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y = vec![0.1; 20];
        let f = RegressionForest::fit(&x, &y, &ForestParams::default(), 1);
        assert_eq!(f.predict(&[3.0]), 0.1);
    }

    #[test]
    fn predictions_stay_in_training_range() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 37 % 11) as f64, i as f64]).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i * 13) % 17) as f64 * 0.3).collect();
        let f = RegressionForest::fit(&x, &y, &ForestParams { trees: 30, ..Default::default() }, 4);
        for probe in [-100.0, 0.0, 5.5, 1e6] {
            let v = f.predict(&[probe, probe]);
            assert!((0.0..=16.0 * 0.3).contains(&v));
        }
    }

    #[test]
    fn thread_count_does_not_change_fit() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (i * i % 13) as f64]).collect();
        let y: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let params = ForestParams { trees: 40, ..Default::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let f = RegressionForest::fit(&x, &y, &params, 77);
                    (0..50).map(|i| f.predict(&x[i]).to_bits()).collect::<Vec<_>>()
                })
        };
        assert_eq!(run(1), run(8));
    }
}
