//! Named benchmark targets.

use crate::linalg::{self, CMatrix};
use crate::objective::{select_columns, SubspaceBlock, TargetSpec};

/// Permutation matrix sending basis state `b` to `perm[b]`.
pub fn permutation_matrix(perm: &[usize]) -> CMatrix {
    let d = perm.len();
    let mut m = CMatrix::zeros(d, d);
    for (b, &p) in perm.iter().enumerate() {
        m[(p, b)] = linalg::ONE;
    }
    m
}

/// Controlled-NOT with control qubit 1 and target qubit 2.
pub fn cnot() -> CMatrix {
    permutation_matrix(&[0, 3, 2, 1])
}

/// Toffoli gate: qubits 1 and 2 control a flip of qubit 3.
pub fn toffoli() -> CMatrix {
    let mut perm: Vec<usize> = (0..8).collect();
    perm.swap(3, 7);
    permutation_matrix(&perm)
}

/// Fredkin gate: qubit 1 controls a swap of qubits 2 and 3.
pub fn fredkin() -> CMatrix {
    let mut perm: Vec<usize> = (0..8).collect();
    perm.swap(3, 5);
    permutation_matrix(&perm)
}

/// Toffoli followed by a measurement of qubit 3, with qubit 3 prepared in
/// `|0⟩`: the inputs `|000⟩, |100⟩, |010⟩` must map to themselves and `|110⟩`
/// to `|111⟩`, with a free relative phase between the two measurement
/// outcomes.
pub fn toffoli_measurement_spec() -> TargetSpec {
    let t = toffoli();
    let a = vec![0, 1, 2];
    let b = vec![3];
    TargetSpec::PhasedSubspaces(vec![
        SubspaceBlock {
            block: select_columns(&t, &a).expect("columns in range"),
            indices: a,
        },
        SubspaceBlock {
            block: select_columns(&t, &b).expect("columns in range"),
            indices: b,
        },
    ])
}

/// Look up a target by name: `cnot`, `toffoli`, `fredkin`, `identity<N>`.
pub fn named(name: &str) -> Option<CMatrix> {
    match name.to_ascii_lowercase().as_str() {
        "cnot" => Some(cnot()),
        "toffoli" | "ccx" => Some(toffoli()),
        "fredkin" | "cswap" => Some(fredkin()),
        other => {
            let n: usize = other.strip_prefix("identity")?.parse().ok()?;
            (1..=6).contains(&n).then(|| linalg::identity(1 << n))
        }
    }
}
