use super::{Diagnostics, ImputationResult, ImputerKind};
use crate::model::{Dataset, Variable};

/// Carries the last observed value forward within each maturity series.
pub fn impute_previous(d: &Dataset) -> ImputationResult {
    carry(d, ImputerKind::Previous)
}

/// Carries the next observed value backward within each maturity series.
pub fn impute_next(d: &Dataset) -> ImputationResult {
    carry(d, ImputerKind::Next)
}

fn carry(d: &Dataset, kind: ImputerKind) -> ImputationResult {
    let mut cells = Vec::new();
    for (_, mut idx) in d.maturity_groups() {
        if kind == ImputerKind::Next {
            idx.reverse();
        }
        for v in Variable::ALL {
            let mut last = None;
            for &i in &idx {
                match d.value(i, v) {
                    Some(x) => last = Some(x),
                    None => {
                        if let Some(x) = last {
                            cells.push((i, v, x));
                        }
                    }
                }
            }
        }
    }
    let mut diag = Diagnostics::new();
    diag.insert("filled".into(), cells.len().to_string());
    ImputationResult::new(d.with_filled(cells), kind, diag)
}
