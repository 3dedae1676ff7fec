//! Compile the Toffoli gate to collective, addressed-Z and MS pulses.
//!
//! Run with `cargo run --example compile_toffoli -- [seed]`.

use ms_compiler::io::format_sequence;
use ms_compiler::objective::TargetSpec;
use ms_compiler::optimizer::{compile, SearchConfig};
use ms_compiler::targets;

fn main() -> ms_compiler::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let spec = TargetSpec::full(targets::toffoli())?;
    let cfg = SearchConfig {
        master_seed: seed,
        ..SearchConfig::default()
    };
    let report = compile(&spec, 3, &cfg)?;
    for r in &report.rounds {
        println!(
            "M = {}: {} restarts, best deficit {:.3e}",
            r.m, r.restarts, r.best_deficit
        );
    }
    println!(
        "Toffoli: M = {}, deficit {:.2e}, physical deficit {:.2e}, {} pulses ({} collective, {} addressed, {} MS), {:.1} s",
        report.m,
        report.deficit,
        report.physical_deficit,
        report.sequence.len(),
        report.sequence.count_collective(),
        report.sequence.count_addressed(),
        report.sequence.count_ms(),
        report.wall_time
    );
    print!("{}", format_sequence(&report.sequence));
    Ok(())
}
