//! Compile Haar-random targets at the saturating MS count and report how
//! many restarts each needed.
//!
//! Run with `cargo run --release --example haar_scaling -- [qubits] [samples]`.

use ms_compiler::cli::{run_bench, saturating_m, summarize_scaling};
use ms_compiler::objective::TargetSpec;
use ms_compiler::optimizer::SearchConfig;
use ms_compiler::sampler::haar_unitary;

fn main() -> ms_compiler::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let samples: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let m = saturating_m(n).expect("1 to 4 qubits");
    let cfg = SearchConfig {
        min_entangling: m,
        max_entangling: m,
        ..SearchConfig::default()
    };
    let records = run_bench(samples, n, "haar", 42, &cfg, |s| {
        TargetSpec::full(haar_unitary(1 << n, s))
    })?;
    for r in &records {
        println!(
            "task {:>3}: M = {}, deficit {:.2e}, restarts {:>3}, {:.2} s",
            r.task, r.m, r.deficit, r.restarts, r.wall_time
        );
    }
    for s in summarize_scaling(&records) {
        println!(
            "N = {}: {}/{} compiled, median restarts {}, median time {:.2} s",
            s.qubits, s.successes, s.samples, s.median_restarts, s.median_wall_time
        );
    }
    Ok(())
}
