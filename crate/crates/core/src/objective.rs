//! Fidelity objectives for full unitaries, column subspaces and phased
//! subspace families, with exact gradients through parameterized circuits.
//!
//! Every objective is written as a list of terms `(S_j, T_j)` where `S_j` is
//! a set of input basis indices and `T_j` is the `d × |S_j|` block the
//! circuit should produce on those columns. The fidelity is
//! `Σ_j |tr(T_j† U|_{S_j})|² / Σ_j |S_j|²`, so a full target is a single term
//! over all columns and a plain subspace target is a single term over `S`.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gateset::{equatorial_rotation, ms_unitary, spin_z, z_rotation};
use crate::linalg::{self, c, CMatrix, Mat2};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// One block of a phased subspace target.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBlock {
    /// Input basis indices `S_j`, in the column order of `block`.
    pub indices: Vec<usize>,
    /// `d × |S_j|` target columns.
    pub block: CMatrix,
}

/// What the compiled circuit should implement.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Full(CMatrix),
    Subspace(SubspaceBlock),
    PhasedSubspaces(Vec<SubspaceBlock>),
}

fn check_block(b: &SubspaceBlock, d: usize) -> Result<()> {
    if b.indices.is_empty() {
        return Err(Error::InvalidSpec("empty index set".into()));
    }
    if b.block.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: b.block.nrows(),
        });
    }
    if b.block.ncols() != b.indices.len() {
        return Err(Error::InvalidSpec(format!(
            "block has {} columns for {} indices",
            b.block.ncols(),
            b.indices.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for &i in &b.indices {
        if i >= d {
            return Err(Error::InvalidSpec(format!(
                "index {i} outside dimension {d}"
            )));
        }
        if !seen.insert(i) {
            return Err(Error::InvalidSpec(format!("index {i} repeated")));
        }
    }
    if b.block
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::NonFinite("target block"));
    }
    let gram = b.block.adjoint() * &b.block;
    let k = gram.nrows();
    let err = linalg::max_abs_diff(&gram, &linalg::identity(k));
    if err > ORTHONORMAL_TOL {
        return Err(Error::InvalidSpec(format!(
            "block columns are not orthonormal (error {err:e})"
        )));
    }
    Ok(())
}

impl TargetSpec {
    pub fn full(u: CMatrix) -> Result<Self> {
        let s = TargetSpec::Full(u);
        s.validate()?;
        Ok(s)
    }

    pub fn subspace(indices: Vec<usize>, columns: CMatrix) -> Result<Self> {
        let s = TargetSpec::Subspace(SubspaceBlock {
            indices,
            block: columns,
        });
        s.validate()?;
        Ok(s)
    }

    pub fn phased(blocks: Vec<SubspaceBlock>) -> Result<Self> {
        let s = TargetSpec::PhasedSubspaces(blocks);
        s.validate()?;
        Ok(s)
    }

    /// Subspace target taking the columns `indices` of a full matrix.
    pub fn columns_of(u: &CMatrix, indices: &[usize]) -> Result<Self> {
        let cols = select_columns(u, indices)?;
        TargetSpec::subspace(indices.to_vec(), cols)
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::Full(u) => u.nrows(),
            TargetSpec::Subspace(b) => b.block.nrows(),
            TargetSpec::PhasedSubspaces(bs) => bs.first().map_or(0, |b| b.block.nrows()),
        }
    }

    pub fn n_qubits(&self) -> Result<usize> {
        let d = self.dim();
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "dimension {d} is not a power of two ≥ 2"
            )));
        }
        Ok(d.trailing_zeros() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetSpec::Full(u) => {
                if u.nrows() != u.ncols() {
                    return Err(Error::DimensionMismatch {
                        expected: u.nrows(),
                        found: u.ncols(),
                    });
                }
                if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite("target matrix"));
                }
                let err = linalg::unitarity_error(u);
                if err > ORTHONORMAL_TOL {
                    return Err(Error::NotUnitary(err));
                }
                Ok(())
            }
            TargetSpec::Subspace(b) => check_block(b, b.block.nrows()),
            TargetSpec::PhasedSubspaces(bs) => {
                let Some(first) = bs.first() else {
                    return Err(Error::InvalidSpec(
                        "phased target needs at least one block".into(),
                    ));
                };
                let d = first.block.nrows();
                let mut seen = BTreeSet::new();
                for b in bs {
                    check_block(b, d)?;
                    for &i in &b.indices {
                        if !seen.insert(i) {
                            return Err(Error::InvalidSpec(format!(
                                "index {i} appears in two blocks"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// The terms `(S_j, T_j)` of the objective.
    pub fn terms(&self) -> Vec<SubspaceBlock> {
        match self {
            TargetSpec::Full(u) => vec![SubspaceBlock {
                indices: (0..u.ncols()).collect(),
                block: u.clone(),
            }],
            TargetSpec::Subspace(b) => vec![b.clone()],
            TargetSpec::PhasedSubspaces(bs) => bs.clone(),
        }
    }

    /// Normalization `Σ_j |S_j|²`.
    pub fn normalization(&self) -> f64 {
        self.terms()
            .iter()
            .map(|t| (t.indices.len() as f64).powi(2))
            .sum()
    }

    /// Sorted union of every constrained input index.
    pub fn constrained_columns(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .terms()
            .iter()
            .flat_map(|t| t.indices.clone())
            .collect();
        set.into_iter().collect()
    }
}

/// Columns `indices` of `u` as a `d × k` matrix.
pub fn select_columns(u: &CMatrix, indices: &[usize]) -> Result<CMatrix> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= u.ncols()) {
        return Err(Error::InvalidSpec(format!(
            "column {bad} outside dimension {}",
            u.ncols()
        )));
    }
    Ok(CMatrix::from_fn(u.nrows(), indices.len(), |r, k| {
        u[(r, indices[k])]
    }))
}

fn block_overlap(u: &CMatrix, b: &SubspaceBlock) -> Complex64 {
    let mut acc = linalg::ZERO;
    for (k, &col) in b.indices.iter().enumerate() {
        for r in 0..u.nrows() {
            acc += b.block[(r, k)].conj() * u[(r, col)];
        }
    }
    acc
}

fn check_dim(u: &CMatrix, d: usize) -> Result<()> {
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.nrows().max(u.ncols()),
        });
    }
    Ok(())
}

/// `|tr(T†U)|² / d²`.
pub fn full_fidelity(u: &CMatrix, t: &CMatrix) -> Result<f64> {
    check_dim(u, t.nrows())?;
    check_dim(t, t.nrows())?;
    let d = t.nrows() as f64;
    Ok(linalg::trace_product(&t.adjoint(), u).norm_sqr() / (d * d))
}

/// `|tr(T|_S† U|_S)|² / d_S²`.
pub fn subspace_fidelity(u: &CMatrix, b: &SubspaceBlock) -> Result<f64> {
    check_dim(u, b.block.nrows())?;
    check_block(b, u.nrows())?;
    let ds = b.indices.len() as f64;
    Ok(block_overlap(u, b).norm_sqr() / (ds * ds))
}

/// `Σ_j |tr(T_j† U|_{S_j})|² / Σ_j d_j²`.
pub fn phased_subspace_fidelity(u: &CMatrix, blocks: &[SubspaceBlock]) -> Result<f64> {
    if blocks.is_empty() {
        return Err(Error::InvalidSpec(
            "phased target needs at least one block".into(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for b in blocks {
        check_dim(u, b.block.nrows())?;
        check_block(b, u.nrows())?;
        num += block_overlap(u, b).norm_sqr();
        den += (b.indices.len() as f64).powi(2);
    }
    Ok(num / den)
}

/// Fidelity of `u` against any target kind.
pub fn fidelity(u: &CMatrix, spec: &TargetSpec) -> Result<f64> {
    match spec {
        TargetSpec::Full(t) => full_fidelity(u, t),
        TargetSpec::Subspace(b) => subspace_fidelity(u, b),
        TargetSpec::PhasedSubspaces(bs) => phased_subspace_fidelity(u, bs),
    }
}

/// `1 − fidelity`, clamped at zero.
pub fn deficit(u: &CMatrix, spec: &TargetSpec) -> Result<f64> {
    Ok((1.0 - fidelity(u, spec)?).max(0.0))
}

/// A gate angle: either a constant or `scale · x[index]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param { index: usize, scale: f64 },
}

impl Angle {
    pub fn param(index: usize) -> Self {
        Angle::Param { index, scale: 1.0 }
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param { index, scale } => scale * x[index],
        }
    }
}

/// Elementary gate of a [`ParamCircuit`]. Bits are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Single-qubit `exp(-iθ(σ_x cosφ + σ_y sinφ)/2)`.
    Equatorial {
        bit: usize,
        theta: Angle,
        phi: Angle,
    },
    /// Single-qubit `exp(-iθσ_z/2)`.
    Zrot { bit: usize, theta: Angle },
    /// Register-wide Mølmer–Sørensen gate.
    Ms { theta: Angle, phi: Angle },
    /// Constant register matrix.
    Dense(CMatrix),
    /// Constant single-qubit matrix.
    Fixed1q { bit: usize, matrix: Mat2 },
}

/// Chronological list of gates over a shared parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    pub n_qubits: usize,
    pub n_params: usize,
    pub gates: Vec<Gate>,
}

/// Objective value and its gradient with respect to the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub fidelity: f64,
    pub gradient: Vec<f64>,
}

/// Derivative of `exp(-iθ n·σ/2)` for an equatorial axis with respect to θ.
fn d_theta_equatorial(g: &Mat2, phi: f64) -> Mat2 {
    let n = linalg::pauli_x() * c(phi.cos(), 0.0) + linalg::pauli_y() * c(phi.sin(), 0.0);
    n * g * c(0.0, -0.5)
}

/// `∂_φ G = -i/2 [σ_z, G]` from `G(φ) = Z(φ) G(0) Z(-φ)`.
fn d_phi_equatorial(g: &Mat2) -> Mat2 {
    let z = linalg::pauli_z();
    (z * g - g * z) * c(0.0, -0.5)
}

fn d_theta_z(g: &Mat2) -> Mat2 {
    linalg::pauli_z() * g * c(0.0, -0.5)
}

/// `∂_θ MS_φ(θ)`: the diagonal phases of `MS_x` pick up `-i m²/4`.
fn d_theta_ms(n_qubits: usize, theta: f64, phi: f64) -> CMatrix {
    let d = 1usize << n_qubits;
    let norm = 1.0 / d as f64;
    let weights: Vec<Complex64> = (0..d)
        .map(|b| {
            let m = spin_z(n_qubits, b) as f64;
            linalg::cis(-theta * m * m / 4.0) * c(0.0, -m * m / 4.0)
        })
        .collect();
    CMatrix::from_fn(d, d, |a, b| {
        let mut acc = linalg::ZERO;
        for (k, w) in weights.iter().enumerate() {
            if ((a & k).count_ones() + (k & b).count_ones()) & 1 == 0 {
                acc += w;
            } else {
                acc -= w;
            }
        }
        let dm = (spin_z(n_qubits, a) - spin_z(n_qubits, b)) as f64;
        acc * norm * linalg::cis(-phi * dm / 2.0)
    })
}

/// `∂_φ MS_φ(θ)`: entry `(a,b)` picks up `-i(m_a − m_b)/2`.
fn d_phi_ms(n_qubits: usize, ms: &CMatrix) -> CMatrix {
    CMatrix::from_fn(ms.nrows(), ms.ncols(), |a, b| {
        let dm = (spin_z(n_qubits, a) - spin_z(n_qubits, b)) as f64;
        ms[(a, b)] * c(0.0, -dm / 2.0)
    })
}

enum Evaluated {
    One { bit: usize, g: Mat2 },
    Many(CMatrix),
}

impl ParamCircuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        ParamCircuit {
            n_qubits,
            n_params,
            gates: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    fn check_params(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_params {
            return Err(Error::ParamLength {
                expected: self.n_params,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(())
    }

    fn evaluate(&self, gate: &Gate, x: &[f64]) -> Evaluated {
        match gate {
            Gate::Equatorial { bit, theta, phi } => Evaluated::One {
                bit: *bit,
                g: equatorial_rotation(theta.value(x), phi.value(x)),
            },
            Gate::Zrot { bit, theta } => Evaluated::One {
                bit: *bit,
                g: z_rotation(theta.value(x)),
            },
            Gate::Fixed1q { bit, matrix } => Evaluated::One {
                bit: *bit,
                g: *matrix,
            },
            Gate::Ms { theta, phi } => {
                Evaluated::Many(ms_unitary(self.n_qubits, theta.value(x), phi.value(x)))
            }
            Gate::Dense(m) => Evaluated::Many(m.clone()),
        }
    }

    /// Full register matrix at parameters `x`.
    pub fn unitary(&self, x: &[f64]) -> Result<CMatrix> {
        self.check_params(x)?;
        let mut u = linalg::identity(self.dim());
        for gate in &self.gates {
            match self.evaluate(gate, x) {
                Evaluated::One { bit, g } => linalg::apply_left_1q(&mut u, &g, bit),
                Evaluated::Many(m) => u = m * u,
            }
        }
        Ok(u)
    }

    /// Fidelity against `spec` and its exact gradient, from one forward
    /// sweep of partial products and one backward sweep.
    pub fn objective_with_gradient(&self, x: &[f64], spec: &TargetSpec) -> Result<ObjectiveValue> {
        self.check_params(x)?;
        let d = self.dim();
        if spec.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: spec.dim(),
            });
        }
        let cols = spec.constrained_columns();
        let k = cols.len();
        let mut position = vec![usize::MAX; d];
        for (s, &col) in cols.iter().enumerate() {
            position[col] = s;
        }

        // Forward: prefixes[i] is the state of the constrained columns
        // before gate i.
        let evaluated: Vec<Evaluated> = self.gates.iter().map(|g| self.evaluate(g, x)).collect();
        let mut p = CMatrix::from_fn(d, k, |r, s| {
            if r == cols[s] {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        });
        let mut prefixes = Vec::with_capacity(evaluated.len());
        for e in &evaluated {
            prefixes.push(p.clone());
            match e {
                Evaluated::One { bit, g } => linalg::apply_left_1q(&mut p, g, *bit),
                Evaluated::Many(m) => p = m * &p,
            }
        }

        let terms = spec.terms();
        let norm = spec.normalization();
        let mut fid = 0.0;
        // W with tr(W · U|_cols) = Σ_j conj(g_j) g_j / norm.
        let mut w = CMatrix::zeros(k, d);
        for t in &terms {
            let mut g = linalg::ZERO;
            for (j, &col) in t.indices.iter().enumerate() {
                let s = position[col];
                for r in 0..d {
                    g += t.block[(r, j)].conj() * p[(r, s)];
                }
            }
            fid += g.norm_sqr();
            let scale = g.conj() / norm;
            for (j, &col) in t.indices.iter().enumerate() {
                let s = position[col];
                for r in 0..d {
                    w[(s, r)] += scale * t.block[(r, j)].conj();
                }
            }
        }
        fid /= norm;

        // Backward: b = W · G_last ⋯ G_{i+1} while visiting gate i.
        let mut grad = vec![0.0; self.n_params];
        let mut b = w;
        for (i, gate) in self.gates.iter().enumerate().rev() {
            let pre = &prefixes[i];
            let mut add = |angle: &Angle, value: Complex64| {
                if let Angle::Param { index, scale } = *angle {
                    grad[index] += 2.0 * scale * value.re;
                }
            };
            match (gate, &evaluated[i]) {
                (Gate::Equatorial { bit, theta, phi }, Evaluated::One { g, .. }) => {
                    if matches!(theta, Angle::Param { .. }) {
                        let dg = d_theta_equatorial(g, phi.value(x));
                        add(theta, linalg::trace_sandwich_1q(&b, &dg, *bit, pre));
                    }
                    if matches!(phi, Angle::Param { .. }) {
                        let dg = d_phi_equatorial(g);
                        add(phi, linalg::trace_sandwich_1q(&b, &dg, *bit, pre));
                    }
                }
                (Gate::Zrot { bit, theta }, Evaluated::One { g, .. }) => {
                    if matches!(theta, Angle::Param { .. }) {
                        add(
                            theta,
                            linalg::trace_sandwich_1q(&b, &d_theta_z(g), *bit, pre),
                        );
                    }
                }
                (Gate::Ms { theta, phi }, Evaluated::Many(m))
                    if matches!(theta, Angle::Param { .. })
                        || matches!(phi, Angle::Param { .. }) =>
                {
                    let bm = &b * m;
                    // tr(B ∂G P): ∂θ via dense derivative, ∂φ via entrywise weights
                    if matches!(theta, Angle::Param { .. }) {
                        let dm = d_theta_ms(self.n_qubits, theta.value(x), phi.value(x));
                        add(theta, linalg::trace_product(&(&b * dm), pre));
                    }
                    if matches!(phi, Angle::Param { .. }) {
                        let dm = d_phi_ms(self.n_qubits, m);
                        add(phi, linalg::trace_product(&(&b * dm), pre));
                    }
                    b = bm;
                    continue;
                }
                _ => {}
            }
            match &evaluated[i] {
                Evaluated::One { bit, g } => linalg::apply_right_1q(&mut b, g, *bit),
                Evaluated::Many(m) => b = &b * m,
            }
        }
        Ok(ObjectiveValue {
            fidelity: fid,
            gradient: grad,
        })
    }
}
