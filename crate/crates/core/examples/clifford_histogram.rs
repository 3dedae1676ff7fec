//! Minimal MS counts for random two-qubit Cliffords.

use ms_compiler::cli::{m_histogram, run_bench};
use ms_compiler::objective::TargetSpec;
use ms_compiler::optimizer::SearchConfig;
use ms_compiler::sampler::{default_clifford_steps, is_clifford, random_clifford};

fn main() -> ms_compiler::Result<()> {
    let samples = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let cfg = SearchConfig {
        max_entangling: 3,
        ..SearchConfig::default()
    };
    let steps = default_clifford_steps(2);
    let records = run_bench(samples, 2, "clifford", 7, &cfg, |s| {
        let u = random_clifford(2, steps, s);
        assert!(is_clifford(&u, 1e-8));
        TargetSpec::full(u)
    })?;
    for bin in m_histogram(&records) {
        println!(
            "M = {}: {:>4} ({:.3} ± {:.3}) {}",
            bin.m,
            bin.count,
            bin.fraction,
            bin.std_dev,
            "#".repeat(bin.count)
        );
    }
    Ok(())
}
