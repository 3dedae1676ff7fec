//! Benchmark target generation: Haar-random unitaries, random-walk Clifford
//! operations and a matrix-level Clifford membership test.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, Mat2};

/// Name of the generator behind [`RandomStream`]; part of the
/// reproducibility contract.
pub const STREAM_ALGORITHM: &str = "chacha20";

/// Deterministic, portable random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; advances `self` by one draw.
    pub fn fork(&mut self) -> RandomStream {
        let s = self.rng.random::<u64>();
        RandomStream::new(mix_seed(&[self.seed, s]))
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a tuple of integers into a seed. Used for counter-based child seeds
/// such as `(master, M, restart)`.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908u64, |acc, &p| {
        splitmix(acc ^ splitmix(p))
    })
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` divided out.
pub fn haar_unitary(dim: usize, stream: &mut RandomStream) -> CMatrix {
    assert!(dim >= 1);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(dim, dim, |_, _| {
        let re = stream.normal();
        let im = stream.normal();
        Complex64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let lambda = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            linalg::ONE
        }
    });
    let mut u = q;
    for (j, l) in lambda.iter().enumerate() {
        for i in 0..dim {
            u[(i, j)] *= l;
        }
    }
    u
}

/// Generators of the random Clifford walk. Qubits are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGenerator {
    H(usize),
    S(usize),
    Cz(usize, usize),
}

/// All generators for an `n`-qubit register in a fixed order.
pub fn clifford_generators(n_qubits: usize) -> Vec<CliffordGenerator> {
    let mut g: Vec<CliffordGenerator> = (1..=n_qubits).map(CliffordGenerator::H).collect();
    g.extend((1..=n_qubits).map(CliffordGenerator::S));
    for a in 1..=n_qubits {
        for b in a + 1..=n_qubits {
            g.push(CliffordGenerator::Cz(a, b));
        }
    }
    g
}

/// Default walk length `10·N⁸`.
pub fn default_clifford_steps(n_qubits: usize) -> usize {
    10 * n_qubits.pow(8)
}

/// Product of the given generators in order (first draw applied first).
pub fn clifford_walk(
    n_qubits: usize,
    draws: impl IntoIterator<Item = CliffordGenerator>,
) -> CMatrix {
    let d = 1usize << n_qubits;
    let mut u = linalg::identity(d);
    let h = linalg::hadamard();
    let s = Mat2::new(linalg::ONE, linalg::ZERO, linalg::ZERO, linalg::I);
    for g in draws {
        match g {
            CliffordGenerator::H(q) => linalg::apply_left_1q(&mut u, &h, q - 1),
            CliffordGenerator::S(q) => linalg::apply_left_1q(&mut u, &s, q - 1),
            CliffordGenerator::Cz(a, b) => {
                let mask = (1usize << (a - 1)) | (1usize << (b - 1));
                let diag: Vec<Complex64> = (0..d)
                    .map(|i| {
                        if i & mask == mask {
                            -linalg::ONE
                        } else {
                            linalg::ONE
                        }
                    })
                    .collect();
                linalg::apply_left_diag(&mut u, &diag);
            }
        }
    }
    u
}

/// Random-walk Clifford: `steps` generators drawn uniformly from
/// `{H_i, S_i, CZ_ij}`.
pub fn random_clifford(n_qubits: usize, steps: usize, stream: &mut RandomStream) -> CMatrix {
    let gens = clifford_generators(n_qubits);
    let draws: Vec<CliffordGenerator> =
        (0..steps).map(|_| gens[stream.below(gens.len())]).collect();
    clifford_walk(n_qubits, draws)
}

/// Whether `m` is `c · X^x Z^z` with `c ∈ {±1, ±i}`.
fn is_pauli_element(m: &CMatrix, tol: f64) -> bool {
    let d = m.nrows();
    let Some(x) = (0..d).find(|&r| m[(r, 0)].norm() > 0.5) else {
        return false;
    };
    let c = m[(x, 0)];
    let on_grid = [linalg::ONE, -linalg::ONE, linalg::I, -linalg::I]
        .iter()
        .any(|p| (c - p).norm() < tol);
    if !on_grid {
        return false;
    }
    // sign pattern s(a) = (−1)^{a·z}
    let mut z = 0usize;
    let mut bit = 1usize;
    while bit < d {
        if (m[(x ^ bit, bit)] / c).re < 0.0 {
            z |= bit;
        }
        bit <<= 1;
    }
    for a in 0..d {
        for r in 0..d {
            let expected = if r == x ^ a {
                let sign = if (a & z).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                c * sign
            } else {
                linalg::ZERO
            };
            if (m[(r, a)] - expected).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Clifford membership: every `U σ U†` for `σ ∈ {X_i, Z_i}` must be a
/// Pauli-group element.
pub fn is_clifford(u: &CMatrix, tol: f64) -> bool {
    let d = u.nrows();
    if d != u.ncols() || !d.is_power_of_two() {
        return false;
    }
    let n = d.trailing_zeros() as usize;
    let ud = u.adjoint();
    for q in 0..n {
        for p in [linalg::pauli_x(), linalg::pauli_z()] {
            let mut m = ud.clone();
            linalg::apply_left_1q(&mut m, &p, q);
            let conj = u * m;
            if !is_pauli_element(&conj, tol) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset::ms_unitary;
    use crate::linalg::unitarity_error;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_haar_is_a_phase() {
        let mut s = RandomStream::new(1);
        let u = haar_unitary(1, &mut s);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_outputs_are_unitary_and_deterministic() {
        for dim in [2, 4, 8, 16] {
            let a = haar_unitary(dim, &mut RandomStream::new(42));
            let b = haar_unitary(dim, &mut RandomStream::new(42));
            assert!(unitarity_error(&a) < 1e-12);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn haar_second_moment() {
        // E|tr U|² = 1 for the Haar measure
        let mut s = RandomStream::new(2024);
        let n = 2000;
        let mean: f64 = (0..n)
            .map(|_| haar_unitary(4, &mut s).trace().norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((0.85..=1.15).contains(&mean), "mean |tr U|² = {mean}");
    }

    #[test]
    fn forced_hadamards_cancel() {
        let u = clifford_walk(2, vec![CliffordGenerator::H(1); 6]);
        assert!(linalg::max_abs_diff(&u, &linalg::identity(4)) < 1e-14);
    }

    #[test]
    fn membership_examples() {
        let h = linalg::from_mat2(&linalg::hadamard());
        assert!(is_clifford(&h, 1e-8));
        let t = linalg::from_mat2(&crate::gateset::z_rotation(PI / 4.0));
        assert!(!is_clifford(&t, 1e-8));
        assert!(is_clifford(&ms_unitary(2, PI / 2.0, 0.0), 1e-8));
        assert!(!is_clifford(&ms_unitary(2, PI / 3.0, 0.0), 1e-8));
    }

    #[test]
    fn random_cliffords_pass_and_compose() {
        let mut s = RandomStream::new(7);
        let a = random_clifford(2, default_clifford_steps(2), &mut s);
        let b = random_clifford(2, default_clifford_steps(2), &mut s);
        assert!(is_clifford(&a, 1e-8));
        assert!(is_clifford(&b, 1e-8));
        assert!(is_clifford(&(&a * &b), 1e-8));
        let c3 = random_clifford(3, 500, &mut s);
        assert!(is_clifford(&c3, 1e-8));
    }

    #[test]
    fn haar_is_not_clifford() {
        let u = haar_unitary(4, &mut RandomStream::new(3));
        assert!(!is_clifford(&u, 1e-8));
    }

    #[test]
    fn child_seeds_differ() {
        assert_ne!(mix_seed(&[1, 0, 0]), mix_seed(&[1, 0, 1]));
        assert_ne!(mix_seed(&[1, 1, 0]), mix_seed(&[1, 0, 1]));
        let mut s = RandomStream::new(9);
        let mut t = RandomStream::new(9);
        assert_eq!(s.fork().uniform(), t.fork().uniform());
    }
}
