// A short benchmark run: normality table, box plots and a ranking.

use bondgap::data_io::RunConfig;
use bondgap::harness::{emit_report, normality_csv, rank_methods, run_benchmark};
use bondgap::model::Variable;
use bondgap::synth::{synth_panel, SynthConfig};

pub fn run_example() -> usize {
    let d = synth_panel(&SynthConfig::new(96, 8)).unwrap();
    let cfg = RunConfig {
        repetitions: 8,
        forest_trees: 20,
        ..RunConfig::new(42)
    };
    let report = run_benchmark(&d, &cfg, 0).unwrap();
    print!("{}", normality_csv(&report));

    for v in Variable::ALL {
        let ranked: Vec<String> = rank_methods(&report, v)
            .iter()
            .map(|(k, m)| format!("{k} {m:.4}"))
            .collect();
        println!("{v}: {}", ranked.join(" < "));
    }

    let dir = std::env::temp_dir().join("bondgap_benchmark_example");
    emit_report(&report, &dir).unwrap();
    println!("report written to {}", dir.display());
    report.cells.len()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
