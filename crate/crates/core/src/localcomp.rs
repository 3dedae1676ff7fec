//! Analytic compilation of local unitaries `U = U_1 ⊗ ⋯ ⊗ U_N` into
//! collective equatorial rotations and addressed Z rotations.
//!
//! Three flavours are provided:
//!
//! * exact: `C'_N C_N Z_{N-1} C_{N-1} ⋯ Z_1 C_1`,
//! * up to a trailing collective Z rotation: `C_N Z_{N-1} ⋯ Z_1 C_1`,
//! * up to trailing independent Z rotations on every qubit, where the
//!   addressed equations are solved in commuting pairs that share a single
//!   collective pulse.
//!
//! Every factor is first normalized to SU(2); the discarded phases are
//! reported so the register target is reproduced up to one global phase.
//! Internally the qubits are renamed by an ordering permutation: role `k`
//! (1-based) is played by physical qubit `order[k-1] + 1`, and role `N` is
//! the reference factor eliminated from the others.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gateset::{equatorial_rotation, z_rotation, Pulse, PulseSequence};
use crate::linalg::{self, c, CMatrix, Mat2};

/// Angles below this are treated as identity steps and pruned.
pub const PRUNE_TOL: f64 = 1e-10;
/// Two factors equal up to a global phase within this Frobenius distance
/// are compiled as a single group.
pub const GROUP_TOL: f64 = 1e-9;
/// Largest number of distinct factors for which all orderings are tried.
pub const MAX_PERMUTED_FACTORS: usize = 8;

/// Tensor product of single-qubit unitaries; `factors[0]` acts on qubit 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    pub factors: Vec<Mat2>,
}

impl LocalUnitary {
    pub fn new(factors: Vec<Mat2>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSubset(
                "local unitary needs at least one factor".into(),
            ));
        }
        for f in &factors {
            let err = linalg::unitarity_error2(f);
            if err > 1e-10 {
                return Err(Error::NotUnitary(err));
            }
        }
        Ok(LocalUnitary { factors })
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn matrix(&self) -> CMatrix {
        linalg::tensor_factors(&self.factors)
    }

    /// Each factor replaced by its SU(2) representative.
    pub fn su2_normalized(&self) -> LocalUnitary {
        LocalUnitary {
            factors: self
                .factors
                .iter()
                .map(|f| su2_normalize_unchecked(f).0)
                .collect(),
        }
    }
}

/// Rotation angle and Bloch axis of an SU(2) element,
/// `V = cos(α/2)·1 − i sin(α/2)·u`, with
/// `u = sinθ cosφ σ_x + sinθ sinφ σ_y + cosθ σ_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    /// In `[0, 2π]`; `2π` only for `−1`.
    pub alpha: f64,
    pub theta_axis: f64,
    pub phi_axis: f64,
}

impl AxisAngle {
    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta_axis.sin_cos();
        let (sp, cp) = self.phi_axis.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn matrix(&self) -> Mat2 {
        linalg::rotation(self.alpha, self.axis())
    }
}

/// Which trailing freedom a local compilation exploited.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    None,
    /// Angle `r` such that `Zc(r)·sequence = target`.
    CollectiveZ(f64),
    /// Per-qubit angles `r_q` such that `(⊗ Z_q(r_q))·sequence = target`.
    IndependentZ(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalMode {
    Exact,
    ModCollectiveZ,
    ModIndependentZ,
}

impl std::str::FromStr for LocalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(LocalMode::Exact),
            "mod-collective-z" => Ok(LocalMode::ModCollectiveZ),
            "mod-independent-z" => Ok(LocalMode::ModIndependentZ),
            other => Err(Error::InvalidSpec(format!("unknown local mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalCompileResult {
    pub sequence: PulseSequence,
    /// Phase `γ` with `target = e^{iγ} · residual · sequence`.
    pub discarded_global_phase: f64,
    pub residual: Residual,
}

impl LocalCompileResult {
    /// 2×2 trailing residual rotation seen by physical qubit `q` (0-based).
    pub fn residual_on(&self, q: usize) -> Mat2 {
        match &self.residual {
            Residual::None => Mat2::identity(),
            Residual::CollectiveZ(r) => z_rotation(*r),
            Residual::IndependentZ(rs) => z_rotation(rs[q]),
        }
    }

    /// Residual applied after the sequence, as per-qubit 2×2 operators.
    pub fn reconstructed_factors(&self) -> Vec<Mat2> {
        (0..self.sequence.n_qubits)
            .map(|q| self.residual_on(q) * qubit_view(&self.sequence, q))
            .collect()
    }
}

/// `V = e^{-iδ} U` with `det V = 1`, `δ = arg(det U)/2 ∈ (−π/2, π/2]`.
pub fn su2_normalize(u: &Mat2) -> Result<(Mat2, f64)> {
    let err = linalg::unitarity_error2(u);
    if err > 1e-10 {
        return Err(Error::NotUnitary(err));
    }
    Ok(su2_normalize_unchecked(u))
}

fn su2_normalize_unchecked(u: &Mat2) -> (Mat2, f64) {
    let det = u.determinant();
    let delta = det.arg() / 2.0;
    (u * linalg::cis(-delta), delta)
}

/// Axis and angle of an SU(2) matrix. For `α < 1e-12` the axis is `+z`.
pub fn axis_angle(v: &Mat2) -> AxisAngle {
    let a0 = (v[(0, 0)].re + v[(1, 1)].re) / 2.0;
    let az = (v[(1, 1)].im - v[(0, 0)].im) / 2.0;
    let ax = -(v[(0, 1)].im + v[(1, 0)].im) / 2.0;
    let ay = (v[(1, 0)].re - v[(0, 1)].re) / 2.0;
    let s = (ax * ax + ay * ay + az * az).sqrt();
    let alpha = 2.0 * s.atan2(a0);
    if s < 1e-14 || alpha < 1e-12 {
        return AxisAngle {
            alpha,
            theta_axis: 0.0,
            phi_axis: 0.0,
        };
    }
    let rho = ax.hypot(ay);
    let theta_axis = rho.atan2(az);
    let phi_axis = if rho < 1e-300 { 0.0 } else { ay.atan2(ax) };
    AxisAngle {
        alpha,
        theta_axis,
        phi_axis,
    }
}

/// Collective pulse `C` with `C⁻¹ σ_z C = u`: generator
/// `c = sinφ σ_x − cosφ σ_y`, angle `γ = θ`.
pub fn equatorial_conjugator(axis: &AxisAngle) -> Pulse {
    Pulse::collective(axis.theta_axis, axis.phi_axis - PI / 2.0)
}

fn pulse_mat2(p: &Pulse) -> Mat2 {
    match *p {
        Pulse::Collective { theta, phi } => equatorial_rotation(theta, phi),
        Pulse::AddressedZ { theta, .. } => z_rotation(theta),
        Pulse::Ms { .. } => panic!("MS pulse has no single-qubit view"),
    }
}

/// The 2×2 operator a local pulse sequence applies to qubit `q` (0-based).
pub fn qubit_view(seq: &PulseSequence, q: usize) -> Mat2 {
    let mut m = Mat2::identity();
    for p in &seq.pulses {
        match *p {
            Pulse::Collective { .. } => m = pulse_mat2(p) * m,
            Pulse::AddressedZ { qubit, theta } if qubit == q + 1 => m = z_rotation(theta) * m,
            Pulse::AddressedZ { .. } => {}
            Pulse::Ms { .. } => panic!("qubit_view called on an entangling sequence"),
        }
    }
    m
}

fn max_abs2(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Write `V = C_2 · C_1` with two equatorial rotations of equal angle.
///
/// Uses `cos²(α/2) = ½(cos(β/2)+1) sin²θ` and recovers `Δ` with a
/// two-argument arctangent; if the product check fails, all sign and
/// branch combinations are tried before giving up.
pub fn two_equatorial_split(v: &Mat2) -> Result<(Pulse, Pulse)> {
    let aa = axis_angle(v);
    if aa.alpha < PRUNE_TOL {
        return Ok((Pulse::collective(0.0, 0.0), Pulse::collective(0.0, 0.0)));
    }
    let half_beta = aa.alpha / 2.0;
    let (sb, cb) = half_beta.sin_cos();
    let st = aa.theta_axis.sin();
    let ct = aa.theta_axis.cos();
    let cos2 = (0.5 * (cb + 1.0) * st * st).clamp(0.0, 1.0);
    let sin2 = 1.0 - cos2;
    let half_alpha = cos2.sqrt().acos();
    let phi = aa.phi_axis;

    let check = |c1: Pulse, c2: Pulse| -> bool {
        max_abs2(&(pulse_mat2(&c2) * pulse_mat2(&c1)), v) < 1e-10
    };

    let delta = (sb * ct).atan2(cos2 - cb);
    let first = (
        Pulse::collective(2.0 * half_alpha, phi + delta / 2.0),
        Pulse::collective(2.0 * half_alpha, phi - delta / 2.0),
    );
    if check(first.0, first.1) {
        return Ok(first);
    }

    // Branch enumeration on the printed closed form.
    let cos_delta = if sin2 > 1e-15 {
        (cos2 - cb) / sin2
    } else {
        1.0
    };
    if cos_delta.abs() > 1.0 + 1e-9 {
        return Err(Error::NoSolution(format!("|cos Δ| = {}", cos_delta.abs())));
    }
    let base = cos_delta.clamp(-1.0, 1.0).acos();
    for &d in &[base, -base] {
        for &alpha in &[2.0 * half_alpha, 2.0 * PI - 2.0 * half_alpha] {
            for &reference in &[phi, phi + PI] {
                let c1 = Pulse::collective(alpha, reference + d / 2.0);
                let c2 = Pulse::collective(alpha, reference - d / 2.0);
                if check(c1, c2) {
                    return Ok((c1, c2));
                }
            }
        }
    }
    Err(Error::NoSolution("no branch reproduced the target".into()))
}

/// Z angle of a 2×2 matrix that is (numerically) a Z rotation.
fn z_angle(m: &Mat2) -> f64 {
    2.0 * m[(1, 1)].arg()
}

/// `β` such that `Z(β)·W` rotates about an equatorial axis.
fn equatorializing_z(w: &Mat2) -> f64 {
    let aa = axis_angle(w);
    let uz = aa.axis()[2];
    let half = aa.alpha / 2.0;
    2.0 * (-half.sin() * uz).atan2(half.cos())
}

/// Collective pulse for an SU(2) matrix known to be an equatorial rotation.
fn as_collective(m: &Mat2) -> Option<Pulse> {
    let aa = axis_angle(m);
    if aa.alpha < PRUNE_TOL {
        None
    } else {
        Some(Pulse::collective(aa.alpha, aa.phi_axis))
    }
}

struct Solver {
    pulses: Vec<Pulse>,
    /// Product of the collective pulses emitted so far (single-qubit view).
    frame: Mat2,
}

impl Solver {
    fn new() -> Self {
        Solver {
            pulses: Vec::new(),
            frame: Mat2::identity(),
        }
    }

    /// Solve `frame·L·frame⁻¹ = C⁻¹ Z_k C` jointly for a set of commuting
    /// left-hand sides sharing one collective pulse. `members` are
    /// `(physical qubit, L)` pairs.
    fn solve_group(&mut self, members: &[(usize, Mat2)]) {
        let conj: Vec<(usize, Mat2)> = members
            .iter()
            .map(|(q, l)| (*q, self.frame * l * self.frame.adjoint()))
            .collect();
        let leader = conj
            .iter()
            .map(|(_, l)| axis_angle(l))
            .max_by(|a, b| (a.alpha / 2.0).sin().total_cmp(&(b.alpha / 2.0).sin()))
            .expect("non-empty group");
        if leader.alpha < PRUNE_TOL {
            return;
        }
        let cp = equatorial_conjugator(&leader);
        let cm = pulse_mat2(&cp);
        if cp.theta().abs() >= PRUNE_TOL {
            self.pulses.push(cp);
            self.frame = cm * self.frame;
        }
        for (q, l) in conj {
            let z = cm * l * cm.adjoint();
            let angle = z_angle(&z);
            if angle.abs() >= PRUNE_TOL {
                self.pulses.push(Pulse::z(q + 1, angle));
            }
        }
    }
}

fn check_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidSubset(format!(
            "ordering has {} entries for {} qubits",
            order.len(),
            n
        )));
    }
    for &q in order {
        if q >= n || seen[q] {
            return Err(Error::InvalidSubset(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        seen[q] = true;
    }
    Ok(())
}

fn finish(target: &LocalUnitary, pulses: Vec<Pulse>, residual: Residual) -> LocalCompileResult {
    let sequence = PulseSequence::from_pulses(target.n_qubits(), pulses);
    let mut result = LocalCompileResult {
        sequence,
        discarded_global_phase: 0.0,
        residual,
    };
    let rebuilt = result.reconstructed_factors();
    result.discarded_global_phase = target
        .factors
        .iter()
        .zip(&rebuilt)
        .map(|(t, r)| (r.adjoint() * t).trace().arg())
        .sum();
    result
}

/// Exact compilation into `C'_N C_N Z_{N-1} C_{N-1} ⋯ Z_1 C_1`.
pub fn compile_local_exact(target: &LocalUnitary, order: &[usize]) -> Result<LocalCompileResult> {
    let n = target.n_qubits();
    check_order(n, order)?;
    let v = target.su2_normalized().factors;
    let reference = v[order[n - 1]];
    let mut solver = Solver::new();
    for &q in &order[..n - 1] {
        solver.solve_group(&[(q, reference.adjoint() * v[q])]);
    }
    let w = reference * solver.frame.adjoint();
    let (c_n, c_prime) = two_equatorial_split(&w)?;
    let mut pulses = solver.pulses;
    pulses.extend(
        [c_n, c_prime]
            .into_iter()
            .filter(|p| p.theta().abs() >= PRUNE_TOL),
    );
    Ok(finish(target, pulses, Residual::None))
}

/// Compilation into `C_N Z_{N-1} ⋯ Z_1 C_1` followed by a free collective
/// Z rotation, which is returned as the residual.
pub fn compile_local_mod_collective_z(
    target: &LocalUnitary,
    order: &[usize],
) -> Result<LocalCompileResult> {
    let n = target.n_qubits();
    check_order(n, order)?;
    let v = target.su2_normalized().factors;
    let reference = v[order[n - 1]];
    let mut solver = Solver::new();
    for &q in &order[..n - 1] {
        solver.solve_group(&[(q, reference.adjoint() * v[q])]);
    }
    let w = reference * solver.frame.adjoint();
    let beta = equatorializing_z(&w);
    let mut pulses = solver.pulses;
    pulses.extend(as_collective(&(z_rotation(beta) * w)));
    Ok(finish(target, pulses, Residual::CollectiveZ(-beta)))
}

/// SO(3) image of an SU(2) matrix: `R_ij = ½ tr(σ_i U σ_j U†)`.
pub fn bloch_rotation(u: &Mat2) -> [[f64; 3]; 3] {
    let paulis = [linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()];
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = 0.5 * (paulis[i] * u * paulis[j] * u.adjoint()).trace().re;
        }
    }
    r
}

fn mat_vec(r: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    a.map(|x| x * s)
}

/// Z angles `(β₁, β₂)` with `[Z(β₁)U₁, Z(β₂)U₂] = 0`.
///
/// A Z rotation preserves the z component of a Bloch vector, so the shared
/// generator `v` must satisfy `(U_i⁻¹ ẑ U_i − ẑ)·v = 0` for both factors;
/// `v` is the normalized cross product of those two vectors. The angles
/// then follow from comparing the azimuths of `v` and `U_i v U_i⁻¹`.
pub fn commuting_z_pair(u1: &Mat2, u2: &Mat2) -> (f64, f64) {
    let z = [0.0, 0.0, 1.0];
    let rs = [bloch_rotation(u1), bloch_rotation(u2)];
    // R^T z − z
    let ws = rs.map(|r| [r[2][0] - z[0], r[2][1] - z[1], r[2][2] - z[2]]);
    let cr = cross(ws[0], ws[1]);
    let v = if norm(cr) > 1e-9 {
        scale(cr, 1.0 / norm(cr))
    } else {
        // Parallel or vanishing constraints: any v orthogonal to the larger
        // one will do.
        let w = if norm(ws[0]) >= norm(ws[1]) {
            ws[0]
        } else {
            ws[1]
        };
        if norm(w) < 1e-12 {
            z
        } else {
            let p = cross(w, z);
            if norm(p) > 1e-9 {
                scale(p, 1.0 / norm(p))
            } else {
                [1.0, 0.0, 0.0]
            }
        }
    };
    let horizontal = v[0].hypot(v[1]);
    if horizontal < 1e-12 {
        return (0.0, 0.0);
    }
    let phi = v[1].atan2(v[0]);
    let betas = rs.map(|r| {
        let vp = mat_vec(&r, v);
        phi - vp[1].atan2(vp[0])
    });
    (betas[0], betas[1])
}

/// Compilation up to independent trailing Z rotations: the addressed
/// equations are paired so each pair shares one collective pulse. For odd
/// `N` the form is `C_N Z_{N-1} Z_{N-2} C_{N-2} ⋯ C_3 Z_2 Z_1 C_1`; for even
/// `N` the last addressed equation is left unpaired with its own pulse.
pub fn compile_local_mod_independent_z(
    target: &LocalUnitary,
    order: &[usize],
) -> Result<LocalCompileResult> {
    let n = target.n_qubits();
    check_order(n, order)?;
    let v = target.su2_normalized().factors;
    let reference = v[order[n - 1]];
    let roles = &order[..n - 1];

    // Z'' angles: paired roles get the commuting-pair solution, an unpaired
    // role keeps 0.
    let mut z_pp = vec![0.0; n];
    let groups: Vec<&[usize]> = roles.chunks(2).collect();
    for g in &groups {
        if let [a, b] = g {
            let (ba, bb) = commuting_z_pair(
                &(v[*a] * reference.adjoint()),
                &(v[*b] * reference.adjoint()),
            );
            z_pp[*a] = ba;
            z_pp[*b] = bb;
        }
    }

    let mut solver = Solver::new();
    for g in &groups {
        let members: Vec<(usize, Mat2)> = g
            .iter()
            .map(|&q| (q, reference.adjoint() * z_rotation(z_pp[q]) * v[q]))
            .collect();
        solver.solve_group(&members);
    }
    let w = reference * solver.frame.adjoint();
    let beta = equatorializing_z(&w);
    let mut pulses = solver.pulses;
    pulses.extend(as_collective(&(z_rotation(beta) * w)));
    // Z'_q = Z(β)·Z''_q and target_q = Z'_q⁻¹ · sequence_q
    let residual = (0..n).map(|q| -(beta + z_pp[q])).collect();
    Ok(finish(target, pulses, Residual::IndependentZ(residual)))
}

pub fn compile_local(
    target: &LocalUnitary,
    mode: LocalMode,
    order: &[usize],
) -> Result<LocalCompileResult> {
    match mode {
        LocalMode::Exact => compile_local_exact(target, order),
        LocalMode::ModCollectiveZ => compile_local_mod_collective_z(target, order),
        LocalMode::ModIndependentZ => compile_local_mod_independent_z(target, order),
    }
}

/// Frobenius distance after aligning the global phase of `b` onto `a`.
fn phase_aligned_distance(a: &Mat2, b: &Mat2) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 1e-15 {
        overlap / overlap.norm()
    } else {
        linalg::ONE
    };
    (a - b * phase).norm()
}

/// Partition qubits into groups of factors equal up to global phase.
pub fn group_factors(target: &LocalUnitary) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (q, f) in target.factors.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|g| phase_aligned_distance(&target.factors[g[0]], f) < GROUP_TOL)
        {
            Some(g) => g.push(q),
            None => groups.push(vec![q]),
        }
    }
    groups
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    // Lexicographic enumeration.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    loop {
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| perm[i] < perm[i + 1])
        else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
        out.push(perm.clone());
    }
}

/// Group equal factors, compile the reduced problem (optionally over every
/// ordering of the distinct factors) and fan addressed pulses back out to
/// every member of a group.
///
/// The permutation search returns the fewest-pulse result, ties broken by
/// the lexicographically smallest ordering. More than
/// [`MAX_PERMUTED_FACTORS`] distinct factors are refused unless `force`.
pub fn group_and_compile(
    target: &LocalUnitary,
    mode: LocalMode,
    try_permutations: bool,
    force: bool,
) -> Result<LocalCompileResult> {
    let groups = group_factors(target);
    let reduced = LocalUnitary {
        factors: groups.iter().map(|g| target.factors[g[0]]).collect(),
    };
    let g = groups.len();
    let orders = if try_permutations {
        if g > MAX_PERMUTED_FACTORS && !force {
            return Err(Error::TooManyFactors(g));
        }
        permutations(g)
    } else {
        vec![(0..g).collect()]
    };
    let results: Vec<Result<LocalCompileResult>> = orders
        .par_iter()
        .map(|o| compile_local(&reduced, mode, o))
        .collect();
    let mut best: Option<LocalCompileResult> = None;
    for r in results {
        let r = r?;
        if best
            .as_ref()
            .is_none_or(|b| r.sequence.len() < b.sequence.len())
        {
            best = Some(r);
        }
    }
    let best = best.expect("at least one ordering");

    let n = target.n_qubits();
    let mut pulses = Vec::new();
    for p in &best.sequence.pulses {
        match *p {
            Pulse::AddressedZ { qubit, theta } => {
                pulses.extend(groups[qubit - 1].iter().map(|&q| Pulse::z(q + 1, theta)));
            }
            other => pulses.push(other),
        }
    }
    let residual = match best.residual {
        Residual::IndependentZ(rs) => {
            let mut full = vec![0.0; n];
            for (gi, members) in groups.iter().enumerate() {
                for &q in members {
                    full[q] = rs[gi];
                }
            }
            Residual::IndependentZ(full)
        }
        other => other,
    };
    Ok(finish(target, pulses, residual))
}

/// Factor a register matrix into single-qubit unitaries, up to global phase.
pub fn factor_local(u: &CMatrix) -> Result<LocalUnitary> {
    let d = u.nrows();
    if d != u.ncols() || !d.is_power_of_two() || d < 2 {
        return Err(Error::DimensionMismatch {
            expected: d.next_power_of_two().max(2),
            found: d,
        });
    }
    let n = d.trailing_zeros() as usize;
    let (mut ra, mut rb, mut best) = (0, 0, -1.0);
    for b in 0..d {
        for a in 0..d {
            if u[(a, b)].norm() > best {
                best = u[(a, b)].norm();
                ra = a;
                rb = b;
            }
        }
    }
    let mut factors = Vec::with_capacity(n);
    for q in 0..n {
        let mask = 1usize << q;
        let idx = |base: usize, bit: usize| (base & !mask) | (bit << q);
        let mut f = Mat2::from_fn(|x, y| u[(idx(ra, x), idx(rb, y))]);
        let scale = f.determinant().norm().sqrt();
        if scale < 1e-12 {
            return Err(Error::NotLocal);
        }
        f /= c(scale, 0.0);
        factors.push(f);
    }
    let rebuilt = linalg::tensor_factors(&factors);
    let overlap = (rebuilt.adjoint() * u).trace().norm() / d as f64;
    if (1.0 - overlap).abs() > 1e-9 {
        return Err(Error::NotLocal);
    }
    LocalUnitary::new(factors)
}

/// Basis-change unitary that maps the eigenbasis of the named Pauli onto the
/// computational basis, so a following Z measurement reads out that Pauli.
pub fn measurement_basis_change(basis: char) -> Result<Mat2> {
    let s_dag = Mat2::new(linalg::ONE, linalg::ZERO, linalg::ZERO, -linalg::I);
    match basis.to_ascii_uppercase() {
        'X' => Ok(linalg::hadamard()),
        'Y' => Ok(linalg::hadamard() * s_dag),
        'Z' => Ok(Mat2::identity()),
        other => Err(Error::InvalidSpec(format!(
            "unknown measurement basis `{other}`"
        ))),
    }
}

/// Local unitary for a tomography setting such as `"XYZ"` (qubit 1 measured
/// in X, qubit 2 in Y, qubit 3 in Z).
pub fn tomography_setting(bases: &str) -> Result<LocalUnitary> {
    let factors = bases
        .chars()
        .map(measurement_basis_change)
        .collect::<Result<Vec<_>>>()?;
    LocalUnitary::new(factors)
}
