//! One line per acceptance criterion; exits nonzero if any line is red.
//! Runs without the test harness so the lines show up in `cargo test`.

use egdeg::numerics::{with_pool_size, Numerics};
use egdeg::verify::{name, results_json, run_criterion, run_suite, Suite, TimedResult};

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(4)
}

fn main() {
    let num = Numerics::default();
    let mut lines: Vec<(u8, bool, String)> = Vec::new();
    let mut record = |t: &TimedResult| {
        lines.push((t.result.id, t.passed(), t.line()));
        for f in &t.result.failures {
            println!("    criterion {} failure: {f}", t.result.id);
        }
    };

    let axioms = run_suite(Suite::Axioms, &num, 1);
    axioms.iter().for_each(&mut record);
    for id in [7, 9] {
        record(&with_pool_size(workers(), || run_criterion(id, &num)));
    }

    // determinism: the axioms results file written under 1 and 4 workers
    let start = std::time::Instant::now();
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let one = dir.join("axioms_pool1.json");
    let four = dir.join("axioms_pool4.json");
    std::fs::write(&one, results_json(Suite::Axioms, &axioms)).unwrap();
    std::fs::write(&four, results_json(Suite::Axioms, &run_suite(Suite::Axioms, &num, 4))).unwrap();
    let same = std::fs::read(&one).unwrap() == std::fs::read(&four).unwrap();
    lines.push((
        10,
        same,
        format!(
            "criterion 10 {:<18} {}  results files identical: {same}, {:.2} s",
            name(10),
            if same { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        ),
    ));

    lines.sort_by_key(|l| l.0);
    for (_, _, line) in &lines {
        println!("{line}");
    }
    let red: Vec<u8> = lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    if !red.is_empty() {
        eprintln!("failing criteria: {red:?}");
        std::process::exit(1);
    }
}
