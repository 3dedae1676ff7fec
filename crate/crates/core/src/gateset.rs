//! The experimental toolbox: collective equatorial rotations `C(θ,φ)`,
//! addressed Z rotations `Z_n(θ)` and global Mølmer–Sørensen gates
//! `MS_φ(θ)`, with exact matrix builders.
//!
//! Qubits are 1-based. Qubit `n` is bit `n-1` of the basis-state index and
//! `|0⟩` is the `+1` eigenstate of `σ_z`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMatrix, Mat2};

/// One toolbox gate instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pulse {
    /// `C(θ,φ) = exp(-iθ(S_x cosφ + S_y sinφ)/2)` on the whole register.
    Collective { theta: f64, phi: f64 },
    /// `Z_n(θ) = exp(-iθσ_n^z/2)`.
    AddressedZ { qubit: usize, theta: f64 },
    /// `MS_φ(θ) = exp(-iθ(S_x cosφ + S_y sinφ)²/4)`.
    Ms { theta: f64, phi: f64 },
}

impl Pulse {
    pub fn collective(theta: f64, phi: f64) -> Self {
        Pulse::Collective { theta, phi }
    }

    pub fn z(qubit: usize, theta: f64) -> Self {
        Pulse::AddressedZ { qubit, theta }
    }

    pub fn ms(theta: f64, phi: f64) -> Self {
        Pulse::Ms { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            Pulse::Collective { theta, .. }
            | Pulse::AddressedZ { theta, .. }
            | Pulse::Ms { theta, .. } => theta,
        }
    }

    pub fn is_entangling(&self) -> bool {
        matches!(self, Pulse::Ms { .. })
    }

    /// The inverse pulse (same kind, negated rotation angle).
    pub fn inverse(&self) -> Self {
        match *self {
            Pulse::Collective { theta, phi } => Pulse::Collective { theta: -theta, phi },
            Pulse::AddressedZ { qubit, theta } => Pulse::AddressedZ {
                qubit,
                theta: -theta,
            },
            Pulse::Ms { theta, phi } => Pulse::Ms { theta: -theta, phi },
        }
    }

    /// Canonical ranges `θ ∈ (-2π, 2π]`, `φ ∈ (-π, π]`. The θ reduction is
    /// by `4π`, which leaves rotations exact and changes an MS gate by at most
    /// a global sign.
    pub fn normalized(&self) -> Self {
        match *self {
            Pulse::Collective { theta, phi } => Pulse::Collective {
                theta: wrap_theta(theta),
                phi: wrap_phi(phi),
            },
            Pulse::AddressedZ { qubit, theta } => Pulse::AddressedZ {
                qubit,
                theta: wrap_theta(theta),
            },
            Pulse::Ms { theta, phi } => Pulse::Ms {
                theta: wrap_theta(theta),
                phi: wrap_phi(phi),
            },
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            Pulse::Collective { theta, phi } | Pulse::Ms { theta, phi } => {
                if !theta.is_finite() || !phi.is_finite() {
                    return Err(Error::NonFinite("pulse angle"));
                }
            }
            Pulse::AddressedZ { qubit, theta } => {
                if !theta.is_finite() {
                    return Err(Error::NonFinite("pulse angle"));
                }
                if qubit == 0 || qubit > n_qubits {
                    return Err(Error::InvalidQubit { qubit, n_qubits });
                }
            }
        }
        Ok(())
    }
}

/// Reduce into `(-2π, 2π]`.
pub fn wrap_theta(theta: f64) -> f64 {
    if theta > -2.0 * PI && theta <= 2.0 * PI {
        return theta;
    }
    let period = 4.0 * PI;
    let mut t = theta.rem_euclid(period);
    if t > 2.0 * PI {
        t -= period;
    }
    t
}

/// Reduce into `(-π, π]`.
pub fn wrap_phi(phi: f64) -> f64 {
    if phi > -PI && phi <= PI {
        return phi;
    }
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Chronologically ordered pulses on an `n_qubits` register. `pulses[0]` is
/// applied first, so the sequence matrix is `pulses[last] ⋯ pulses[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub n_qubits: usize,
    pub pulses: Vec<Pulse>,
}

impl PulseSequence {
    pub fn new(n_qubits: usize) -> Self {
        PulseSequence {
            n_qubits,
            pulses: Vec::new(),
        }
    }

    pub fn from_pulses(n_qubits: usize, pulses: Vec<Pulse>) -> Self {
        PulseSequence { n_qubits, pulses }
    }

    pub fn push(&mut self, pulse: Pulse) {
        self.pulses.push(pulse);
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn count_ms(&self) -> usize {
        self.pulses.iter().filter(|p| p.is_entangling()).count()
    }

    pub fn count_collective(&self) -> usize {
        self.pulses
            .iter()
            .filter(|p| matches!(p, Pulse::Collective { .. }))
            .count()
    }

    pub fn count_addressed(&self) -> usize {
        self.pulses
            .iter()
            .filter(|p| matches!(p, Pulse::AddressedZ { .. }))
            .count()
    }

    /// Pulse-wise inverse: reversed order, negated angles.
    pub fn inverse(&self) -> Self {
        PulseSequence {
            n_qubits: self.n_qubits,
            pulses: self.pulses.iter().rev().map(Pulse::inverse).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        PulseSequence {
            n_qubits: self.n_qubits,
            pulses: self.pulses.iter().map(Pulse::normalized).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidSubset(
                "register must have at least one qubit".into(),
            ));
        }
        self.pulses
            .iter()
            .try_for_each(|p| p.validate(self.n_qubits))
    }

    /// Drop pulses whose rotation angle is below `tol` in magnitude.
    pub fn pruned(&self, tol: f64) -> Self {
        PulseSequence {
            n_qubits: self.n_qubits,
            pulses: self
                .pulses
                .iter()
                .copied()
                .filter(|p| p.theta().abs() >= tol)
                .collect(),
        }
    }
}

/// 2×2 single-qubit factor of `C(θ,φ)`.
pub fn equatorial_rotation(theta: f64, phi: f64) -> Mat2 {
    linalg::rotation(theta, [phi.cos(), phi.sin(), 0.0])
}

/// 2×2 `exp(-iθσ_z/2)`.
pub fn z_rotation(theta: f64) -> Mat2 {
    let h = theta / 2.0;
    Mat2::new(cis(-h), linalg::ZERO, linalg::ZERO, cis(h))
}

/// `m_b = N − 2·popcount(b)`: eigenvalue of `S_z` on basis state `b`.
#[inline]
pub fn spin_z(n_qubits: usize, b: usize) -> i32 {
    n_qubits as i32 - 2 * b.count_ones() as i32
}

/// Diagonal of the collective Z rotation `Zc(φ) = ⊗ exp(-iφσ_z/2)`.
pub fn collective_z_diag(n_qubits: usize, phi: f64) -> Vec<Complex64> {
    (0..1usize << n_qubits)
        .map(|b| cis(-phi * spin_z(n_qubits, b) as f64 / 2.0))
        .collect()
}

/// `MS_x(θ) = H^{⊗N} · diag(e^{-iθ m_b²/4}) · H^{⊗N}`, exact.
pub fn ms_x_unitary(n_qubits: usize, theta: f64) -> CMatrix {
    let d = 1usize << n_qubits;
    let phases: Vec<Complex64> = (0..d)
        .map(|b| {
            let m = spin_z(n_qubits, b) as f64;
            cis(-theta * m * m / 4.0)
        })
        .collect();
    let norm = 1.0 / d as f64;
    CMatrix::from_fn(d, d, |a, b| {
        let mut acc = linalg::ZERO;
        for (k, ph) in phases.iter().enumerate() {
            // H^{⊗N}[a,k] H^{⊗N}[k,b] = (-1)^{|a&k| + |k&b|} / d
            let sign = ((a & k).count_ones() + (k & b).count_ones()) & 1;
            if sign == 0 {
                acc += ph;
            } else {
                acc -= ph;
            }
        }
        acc * norm
    })
}

/// `MS_φ(θ) = Zc(φ) · MS_x(θ) · Zc(-φ)`, applied entrywise.
pub fn ms_unitary(n_qubits: usize, theta: f64, phi: f64) -> CMatrix {
    let mut u = ms_x_unitary(n_qubits, theta);
    if phi != 0.0 {
        let d = u.nrows();
        for b in 0..d {
            for a in 0..d {
                let dm = (spin_z(n_qubits, a) - spin_z(n_qubits, b)) as f64;
                u[(a, b)] *= cis(-phi * dm / 2.0);
            }
        }
    }
    u
}

/// Exact register matrix of a single pulse.
pub fn pulse_unitary(pulse: &Pulse, n_qubits: usize) -> Result<CMatrix> {
    if n_qubits == 0 {
        return Err(Error::InvalidSubset(
            "register must have at least one qubit".into(),
        ));
    }
    pulse.validate(n_qubits)?;
    Ok(match *pulse {
        Pulse::Collective { theta, phi } => {
            linalg::tensor_power(&equatorial_rotation(theta, phi), n_qubits)
        }
        Pulse::AddressedZ { qubit, theta } => {
            let d = 1usize << n_qubits;
            let mask = 1usize << (qubit - 1);
            let h = theta / 2.0;
            CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |b, _| {
                if b & mask == 0 {
                    cis(-h)
                } else {
                    cis(h)
                }
            }))
        }
        Pulse::Ms { theta, phi } => ms_unitary(n_qubits, theta, phi),
    })
}

/// Chronological product `pulses[last] ⋯ pulses[0]`.
pub fn sequence_unitary(seq: &PulseSequence) -> Result<CMatrix> {
    seq.validate()?;
    let n = seq.n_qubits;
    let mut u = linalg::identity(1 << n);
    for p in &seq.pulses {
        match *p {
            Pulse::Collective { theta, phi } => {
                let g = equatorial_rotation(theta, phi);
                for bit in 0..n {
                    linalg::apply_left_1q(&mut u, &g, bit);
                }
            }
            Pulse::AddressedZ { qubit, theta } => {
                linalg::apply_left_1q(&mut u, &z_rotation(theta), qubit - 1);
            }
            Pulse::Ms { theta, phi } => {
                u = ms_unitary(n, theta, phi) * u;
            }
        }
    }
    Ok(u)
}

/// Lift a `|subset|`-qubit operator onto an `n_total` register, acting as
/// the identity on spectators. `subset` holds 1-based qubit indices; its
/// `k`-th entry plays the role of local qubit `k+1`.
pub fn embed_matrix(local: &CMatrix, subset: &[usize], n_total: usize) -> Result<CMatrix> {
    validate_subset(subset, n_total)?;
    let k = subset.len();
    if local.nrows() != 1 << k || local.ncols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: local.nrows(),
        });
    }
    let d = 1usize << n_total;
    let sub_mask: usize = subset.iter().map(|q| 1usize << (q - 1)).sum();
    let compress = |b: usize| -> usize {
        subset
            .iter()
            .enumerate()
            .map(|(i, q)| ((b >> (q - 1)) & 1) << i)
            .sum()
    };
    Ok(CMatrix::from_fn(d, d, |a, b| {
        if a & !sub_mask != b & !sub_mask {
            linalg::ZERO
        } else {
            local[(compress(a), compress(b))]
        }
    }))
}

fn validate_subset(subset: &[usize], n_total: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::InvalidSubset("empty subset".into()));
    }
    let mut seen = vec![false; n_total + 1];
    for &q in subset {
        if q == 0 || q > n_total {
            return Err(Error::InvalidQubit {
                qubit: q,
                n_qubits: n_total,
            });
        }
        if seen[q] {
            return Err(Error::InvalidSubset(format!("qubit {q} listed twice")));
        }
        seen[q] = true;
    }
    Ok(())
}

/// Register matrix of `seq` when its pulses are restricted to `subset` of an
/// `n_total`-qubit register.
pub fn embed_on_subset(seq: &PulseSequence, subset: &[usize], n_total: usize) -> Result<CMatrix> {
    validate_subset(subset, n_total)?;
    if seq.n_qubits != subset.len() {
        return Err(Error::DimensionMismatch {
            expected: subset.len(),
            found: seq.n_qubits,
        });
    }
    let local = sequence_unitary(seq)?;
    embed_matrix(&local, subset, n_total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_error};

    fn phase_invariant_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
        let d = a.nrows() as f64;
        (a.adjoint() * b).trace().norm() / d
    }

    #[test]
    fn z1_pi_is_diag_minus_i_plus_i() {
        let u = pulse_unitary(&Pulse::z(1, PI), 1).unwrap();
        assert!((u[(0, 0)] - linalg::c(0.0, -1.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - linalg::c(0.0, 1.0)).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn zero_angle_collective_is_identity() {
        for n in 1..=4 {
            for &phi in &[0.0, 0.3, -2.0, PI] {
                let u = pulse_unitary(&Pulse::collective(0.0, phi), n).unwrap();
                assert!(max_abs_diff(&u, &linalg::identity(1 << n)) < 1e-15);
            }
        }
    }

    #[test]
    fn ms_pi_dichotomy() {
        for n in 1..=4 {
            let ms = pulse_unitary(&Pulse::ms(PI, 0.0), n).unwrap();
            let reference = if n % 2 == 1 {
                linalg::identity(1 << n)
            } else {
                pulse_unitary(&Pulse::collective(PI, 0.0), n).unwrap()
            };
            assert!(
                (phase_invariant_overlap(&ms, &reference) - 1.0).abs() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn addressed_z_rejects_bad_qubit() {
        assert!(matches!(
            pulse_unitary(&Pulse::z(3, 0.1), 2),
            Err(Error::InvalidQubit {
                qubit: 3,
                n_qubits: 2
            })
        ));
        assert!(matches!(
            pulse_unitary(&Pulse::z(0, 0.1), 2),
            Err(Error::InvalidQubit { .. })
        ));
        assert!(matches!(
            pulse_unitary(&Pulse::collective(f64::NAN, 0.0), 2),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn empty_sequence_is_identity() {
        let u = sequence_unitary(&PulseSequence::new(2)).unwrap();
        assert!(max_abs_diff(&u, &linalg::identity(4)) < 1e-15);
    }

    #[test]
    fn sequence_then_inverse_is_identity() {
        let seq = PulseSequence::from_pulses(
            3,
            vec![
                Pulse::collective(0.4, 1.1),
                Pulse::ms(0.9, -0.3),
                Pulse::z(2, 2.2),
                Pulse::collective(-1.7, 0.2),
                Pulse::ms(PI / 2.0, 0.7),
                Pulse::z(3, -0.5),
            ],
        );
        let mut both = seq.clone();
        both.pulses.extend(seq.inverse().pulses);
        let u = sequence_unitary(&both).unwrap();
        assert!(max_abs_diff(&u, &linalg::identity(8)) < 1e-12);
        assert!(unitarity_error(&sequence_unitary(&seq).unwrap()) < 1e-12);
    }

    #[test]
    fn sequence_order_is_chronological() {
        let a = Pulse::collective(0.5, 0.0);
        let b = Pulse::z(1, 0.8);
        let seq = PulseSequence::from_pulses(2, vec![a, b]);
        let expected = pulse_unitary(&b, 2).unwrap() * pulse_unitary(&a, 2).unwrap();
        assert!(max_abs_diff(&sequence_unitary(&seq).unwrap(), &expected) < 1e-14);
    }

    #[test]
    fn normalization_keeps_rotations() {
        let p = Pulse::collective(9.0, 7.5);
        let q = p.normalized();
        if let Pulse::Collective { theta, phi } = q {
            assert!(theta > -2.0 * PI && theta <= 2.0 * PI);
            assert!(phi > -PI && phi <= PI);
        }
        let u = pulse_unitary(&p, 2).unwrap();
        let v = pulse_unitary(&q, 2).unwrap();
        assert!(max_abs_diff(&u, &v) < 1e-12);
    }

    #[test]
    fn embed_full_subset_matches_sequence() {
        let seq = PulseSequence::from_pulses(2, vec![Pulse::ms(0.7, 0.2), Pulse::z(2, 0.3)]);
        let full = embed_on_subset(&seq, &[1, 2], 2).unwrap();
        assert!(max_abs_diff(&full, &sequence_unitary(&seq).unwrap()) < 1e-15);
    }

    #[test]
    fn embed_ms_on_two_of_three() {
        let seq = PulseSequence::from_pulses(2, vec![Pulse::ms(PI / 2.0, 0.0)]);
        let full = embed_on_subset(&seq, &[1, 2], 3).unwrap();
        // qubit 3 is the high bit, so the embedded operator is I ⊗ MS
        let expected = linalg::kron(&linalg::identity(2), &ms_unitary(2, PI / 2.0, 0.0));
        assert!(max_abs_diff(&full, &expected) < 1e-15);
    }

    #[test]
    fn embed_collective_on_single_qubit() {
        let (theta, phi) = (1.1, 0.4);
        let seq = PulseSequence::from_pulses(1, vec![Pulse::collective(theta, phi)]);
        let full = embed_on_subset(&seq, &[2], 2).unwrap();
        let r = linalg::from_mat2(&equatorial_rotation(theta, phi));
        let expected = linalg::kron(&r, &linalg::identity(2));
        assert!(max_abs_diff(&full, &expected) < 1e-15);
    }

    #[test]
    fn embed_rejects_collisions() {
        let seq = PulseSequence::new(2);
        assert!(matches!(
            embed_on_subset(&seq, &[1, 1], 3),
            Err(Error::InvalidSubset(_))
        ));
        assert!(matches!(
            embed_on_subset(&seq, &[1, 4], 3),
            Err(Error::InvalidQubit { .. })
        ));
        assert!(matches!(
            embed_on_subset(&seq, &[1, 2, 3], 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
