// Generate a small synthetic auction panel and check it.

use bondgap::data_io::{format_dataset, CsvSchema};
use bondgap::model::dataset_validate;
use bondgap::synth::{synth_panel, SynthConfig};

pub fn run_example() -> usize {
    let d = synth_panel(&SynthConfig::new(36, 11)).expect("synth");
    assert!(dataset_validate(&d).is_empty());
    let text = format_dataset(&d, &CsvSchema::default());
    for line in text.lines().take(6) {
        println!("{line}");
    }
    println!("... {} rows, {} missing", d.len(), d.missing_count());
    d.len()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
