//! Acceptance suite: one PASS/FAIL line per criterion.

mod chem;
mod data;
mod harness;
mod oracle;
mod scoring;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

/// A criterion's outcome: a one-line summary either way.
pub type Outcome = Result<String, String>;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn fixture_molecules() -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/molecules.smi");
    std::fs::read_to_string(path)
        .expect("molecule fixture")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

pub fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("canonical-invariance", chem::canonical_invariance),
        ("canonical-soundness", chem::canonical_soundness),
        ("parser-totality", chem::parser_totality),
        ("formula-correctness", chem::formula_correctness),
        ("auc-oracle", scoring::auc_oracle),
        ("metric-spot-values", scoring::metric_spot_values),
        ("scaffold-split", data::scaffold_split_criterion),
        ("taskgen-goldens", data::taskgen_goldens),
        ("masked-nll", scoring::masked_nll_criterion),
        ("end-to-end-harness", harness::end_to_end),
        ("report-regression", harness::report_regression),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        if filter.as_deref().is_some_and(|p| !name.contains(p)) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.2} s)");
            }
        }
    }
    std::panic::set_hook(default_hook);
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
