// Hide 35% of the cells of a complete panel and show the plan.

use bondgap::masking::{apply_mask, plan_mcar};
use bondgap::model::{missing_fraction, MaskConfig, Variable};
use bondgap::synth::{synth_panel, SynthConfig};

pub fn run_example() -> usize {
    let d = synth_panel(&SynthConfig::new(24, 3)).unwrap();
    let plan = plan_mcar(&d, &MaskConfig::new(2024)).unwrap();
    let (masked, truth) = apply_mask(&d, &plan).unwrap();
    assert_eq!(truth, d);

    println!("{} of {} cells hidden", plan.cells.len(), 3 * d.len());
    for v in Variable::ALL {
        println!("  {v:<6} {}", plan.cells_of(v).count());
    }
    println!("missing fraction {:.4}", missing_fraction(&masked).unwrap());
    print!("{}", plan.to_csv().lines().take(5).collect::<Vec<_>>().join("\n"));
    println!();
    plan.cells.len()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
