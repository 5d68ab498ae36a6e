// Mask one panel and score all six imputers on it.

use bondgap::imputers::{impute, ImputerConfig, ImputerKind, MissForestConfig};
use bondgap::masking::{apply_mask, plan_mcar, MaskPlan};
use bondgap::model::{Dataset, MaskConfig, Variable};
use bondgap::stats::mae;
use bondgap::synth::{synth_panel, SynthConfig};

fn filled_mae(truth: &Dataset, completed: &Dataset, plan: &MaskPlan, v: Variable) -> f64 {
    let errs: Vec<f64> = plan
        .cells_of(v)
        .filter_map(|i| Some((completed.value(i, v)? - truth.value(i, v)?).abs()))
        .collect();
    errs.iter().sum::<f64>() / errs.len() as f64
}

pub fn run_example() -> Vec<(ImputerKind, [f64; 3])> {
    let d = synth_panel(&SynthConfig::new(120, 5)).unwrap();
    let plan = plan_mcar(&d, &MaskConfig::new(17).with_rate(0.2)).unwrap();
    let (masked, truth) = apply_mask(&d, &plan).unwrap();
    let cfg = ImputerConfig {
        missforest: MissForestConfig { trees: 30, ..Default::default() },
        ..Default::default()
    };

    println!("{:<18} {:>8} {:>8} {:>8} {:>9}", "method", "coupon", "price", "yield", "residual");
    let mut rows = Vec::new();
    for kind in ImputerKind::ALL {
        let res = impute(&masked, kind, &cfg, 1).unwrap();
        // carry-based methods can leave a series' first or last cell empty;
        // those methods are scored on the cells they did fill
        let m = Variable::ALL.map(|v| match mae(&truth, &res.completed, &plan, v) {
            Ok(s) => s.value,
            Err(_) => filled_mae(&truth, &res.completed, &plan, v),
        });
        println!(
            "{:<18} {:>8.4} {:>8.4} {:>8.4} {:>9}",
            kind.label(),
            m[0],
            m[1],
            m[2],
            res.residual_missing
        );
        rows.push((kind, m));
    }
    rows
}

#[allow(dead_code)]
fn main() {
    run_example();
}
