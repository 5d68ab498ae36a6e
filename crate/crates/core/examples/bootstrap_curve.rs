// Bootstrap a zero curve from a bill and bond ladder, then reprice it.

use bondgap::curve::{bootstrap, max_repricing_error, price_bond, CurveInstrument};

pub fn run_example() -> f64 {
    let ladder = [
        (0.25, 0.0, 98.9),
        (0.5, 0.0, 97.8),
        (1.0, 0.0, 95.5),
        (2.0, 5.25, 100.1),
        (3.0, 5.5, 99.9),
        (4.0, 5.75, 99.9),
        (5.0, 6.0, 100.2),
    ];
    let inst: Vec<CurveInstrument> = ladder
        .iter()
        .map(|&(t, c, p)| CurveInstrument { maturity_years: t, coupon: c, price: p })
        .collect();
    let curve = bootstrap(&inst).unwrap();
    print!("{}", curve.to_csv());

    let err = max_repricing_error(&curve, &inst).unwrap();
    println!("max repricing error {err:.2e}");
    println!("5y 4% bond on this curve: {:.4}", price_bond(&curve, 4.0, 5.0).unwrap());
    err
}

#[allow(dead_code)]
fn main() {
    run_example();
}
