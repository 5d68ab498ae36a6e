// Shapiro-Wilk on a normal and a skewed sample.

use bondgap::stats::shapiro_wilk;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

pub fn run_example() -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let normal: Vec<f64> = (0..100).map(|_| StandardNormal.sample(&mut rng)).collect();
    let skewed: Vec<f64> = (0..100).map(|_| Exp::new(1.0).unwrap().sample(&mut rng)).collect();

    let a = shapiro_wilk(&normal, 0.05).unwrap();
    let b = shapiro_wilk(&skewed, 0.05).unwrap();
    println!("normal      W = {:.5}  p = {:.4}  normal: {}", a.w_statistic, a.p_value, a.verdict);
    println!("exponential W = {:.5}  p = {:.2e}  normal: {}", b.w_statistic, b.p_value, b.verdict);
    (a.p_value, b.p_value)
}

#[allow(dead_code)]
fn main() {
    run_example();
}
