//! Toffoli followed by a measurement of the target qubit.
//!
//! With the target qubit prepared in |0⟩ only four input columns matter, and
//! the two measurement outcomes may pick up different phases. The search is
//! run on that relaxed target and on the full Toffoli for comparison.

use ms_compiler::objective::{fidelity, TargetSpec};
use ms_compiler::optimizer::{compile, SearchConfig};
use ms_compiler::{gateset, targets};

fn main() -> ms_compiler::Result<()> {
    let cfg = SearchConfig {
        master_seed: 3,
        ..SearchConfig::default()
    };
    let relaxed = targets::toffoli_measurement_spec();
    let full = TargetSpec::full(targets::toffoli())?;
    for (name, spec) in [("measured", &relaxed), ("full", &full)] {
        let r = compile(spec, 3, &cfg)?;
        let u = gateset::sequence_unitary(&r.sequence)?;
        println!(
            "{name:>8}: M = {}, {} pulses, block fidelity {:.12}, phases {:?}, {:.1} s",
            r.m,
            r.sequence.len(),
            fidelity(&u, spec)?,
            r.discarded_global_phase,
            r.wall_time
        );
    }
    Ok(())
}
