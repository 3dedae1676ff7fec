//! Layered sequence template: local layers interleaved with Mølmer–Sørensen
//! gates, its flat parameter layout, and lowering to toolbox pulses.
//!
//! Layer `i` sits between `MS_i` and `MS_{i+1}`. In the default template the
//! first and last layers, and every even interior layer, are arbitrary local
//! unitaries `U_q = X(a₃)·Z(a₂)·X(a₁)` per qubit; odd interior layers only
//! carry addressed Z rotations, because the X parts of those layers can be
//! moved through the neighbouring MS gates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateset::{equatorial_rotation, ms_unitary, z_rotation, Pulse, PulseSequence};
use crate::linalg::{self, CMatrix, Mat2};
use crate::localcomp::{group_and_compile, LocalMode, LocalUnitary, Residual, PRUNE_TOL};
use crate::objective::{Angle, Gate, ParamCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    /// Z-only odd interior layers.
    Paper,
    /// Every layer an arbitrary local unitary.
    Full,
}

impl std::str::FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Template::Paper),
            "full" => Ok(Template::Full),
            other => Err(Error::InvalidSpec(format!("unknown template `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    /// Per-qubit `(a₁, a₂, a₃)` for `X(a₃)Z(a₂)X(a₁)`.
    FullLocal,
    /// Per-qubit `z` for `Z(z)`.
    ZOnly,
}

impl LayerKind {
    pub fn params_per_qubit(self) -> usize {
        match self {
            LayerKind::FullLocal => 3,
            LayerKind::ZOnly => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredAnsatz {
    pub n_qubits: usize,
    pub n_entangling: usize,
    pub template: Template,
    /// `n_entangling + 1` layer kinds.
    pub layers: Vec<LayerKind>,
}

/// Build the layer layout for `n_qubits` and `n_entangling` MS gates.
pub fn build_ansatz(n_qubits: usize, n_entangling: usize, template: Template) -> LayeredAnsatz {
    assert!(n_qubits >= 1, "ansatz needs at least one qubit");
    let m = n_entangling;
    let layers = (0..=m)
        .map(|i| match template {
            Template::Paper if i != 0 && i != m && i % 2 == 1 => LayerKind::ZOnly,
            _ => LayerKind::FullLocal,
        })
        .collect();
    LayeredAnsatz {
        n_qubits,
        n_entangling,
        template,
        layers,
    }
}

/// Structured view of a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    /// Per layer, qubit-major parameters (`a₁,a₂,a₃` or `z` per qubit).
    pub layers: Vec<Vec<f64>>,
    /// `(θ, φ)` of each MS gate.
    pub ms: Vec<(f64, f64)>,
}

impl LayeredAnsatz {
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn layer_len(&self, layer: usize) -> usize {
        self.layers[layer].params_per_qubit() * self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        2 * self.n_entangling
            + (0..self.layers.len())
                .map(|l| self.layer_len(l))
                .sum::<usize>()
    }

    pub fn count_layers(&self, kind: LayerKind) -> usize {
        self.layers.iter().filter(|&&k| k == kind).count()
    }

    /// Offset of layer `l` in the flat vector.
    pub fn layer_offset(&self, layer: usize) -> usize {
        (0..layer).map(|l| self.layer_len(l) + 2).sum()
    }

    /// Offset of the `(θ, φ)` pair of MS gate `k` (0-based).
    pub fn ms_offset(&self, k: usize) -> usize {
        self.layer_offset(k) + self.layer_len(k)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_params() {
            return Err(Error::ParamLength {
                expected: self.n_params(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ansatz parameters"));
        }
        Ok(())
    }

    pub fn unpack(&self, x: &[f64]) -> Result<AnsatzParams> {
        self.check_len(x)?;
        let layers = (0..self.layers.len())
            .map(|l| {
                let o = self.layer_offset(l);
                x[o..o + self.layer_len(l)].to_vec()
            })
            .collect();
        let ms = (0..self.n_entangling)
            .map(|k| {
                let o = self.ms_offset(k);
                (x[o], x[o + 1])
            })
            .collect();
        Ok(AnsatzParams { layers, ms })
    }

    pub fn pack(&self, p: &AnsatzParams) -> Result<Vec<f64>> {
        if p.layers.len() != self.layers.len() || p.ms.len() != self.n_entangling {
            return Err(Error::ParamLength {
                expected: self.layers.len(),
                found: p.layers.len(),
            });
        }
        let mut x = Vec::with_capacity(self.n_params());
        for (l, layer) in p.layers.iter().enumerate() {
            if layer.len() != self.layer_len(l) {
                return Err(Error::ParamLength {
                    expected: self.layer_len(l),
                    found: layer.len(),
                });
            }
            x.extend_from_slice(layer);
            if let Some(&(t, f)) = p.ms.get(l) {
                x.push(t);
                x.push(f);
            }
        }
        Ok(x)
    }

    /// Per-qubit 2×2 factors of layer `l`.
    pub fn layer_factors(&self, layer: usize, values: &[f64]) -> Vec<Mat2> {
        match self.layers[layer] {
            LayerKind::FullLocal => values
                .chunks(3)
                .map(|a| {
                    equatorial_rotation(a[2], 0.0)
                        * z_rotation(a[1])
                        * equatorial_rotation(a[0], 0.0)
                })
                .collect(),
            LayerKind::ZOnly => values.iter().map(|&z| z_rotation(z)).collect(),
        }
    }

    /// Gate-level circuit sharing this ansatz's parameter layout.
    pub fn circuit(&self) -> ParamCircuit {
        let mut circ = ParamCircuit::new(self.n_qubits, self.n_params());
        for l in 0..self.layers.len() {
            let o = self.layer_offset(l);
            for q in 0..self.n_qubits {
                match self.layers[l] {
                    LayerKind::FullLocal => {
                        let b = o + 3 * q;
                        circ.gates.push(Gate::Equatorial {
                            bit: q,
                            theta: Angle::param(b),
                            phi: Angle::Fixed(0.0),
                        });
                        circ.gates.push(Gate::Zrot {
                            bit: q,
                            theta: Angle::param(b + 1),
                        });
                        circ.gates.push(Gate::Equatorial {
                            bit: q,
                            theta: Angle::param(b + 2),
                            phi: Angle::Fixed(0.0),
                        });
                    }
                    LayerKind::ZOnly => circ.gates.push(Gate::Zrot {
                        bit: q,
                        theta: Angle::param(o + q),
                    }),
                }
            }
            if l < self.n_entangling {
                let m = self.ms_offset(l);
                circ.gates.push(Gate::Ms {
                    theta: Angle::param(m),
                    phi: Angle::param(m + 1),
                });
            }
        }
        circ
    }
}

/// Exact product of the layer unitaries.
pub fn ansatz_unitary(ansatz: &LayeredAnsatz, x: &[f64]) -> Result<CMatrix> {
    let p = ansatz.unpack(x)?;
    let mut u = linalg::identity(ansatz.dim());
    for (l, values) in p.layers.iter().enumerate() {
        u = linalg::tensor_factors(&ansatz.layer_factors(l, values)) * u;
        if let Some(&(theta, phi)) = p.ms.get(l) {
            u = ms_unitary(ansatz.n_qubits, theta, phi) * u;
        }
    }
    Ok(u)
}

/// Physical lowering of a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub sequence: PulseSequence,
    /// Collective Z angle `f` with `ansatz = e^{iγ}·Zc(f)·sequence`; zero
    /// when the frame was absorbed into the last layer.
    pub terminal_frame: f64,
}

/// Lower to toolbox pulses. Local layers are compiled modulo a collective Z
/// rotation, which is carried forward as a frame change into the phases of
/// later pulses; the last layer absorbs the remaining frame so the result
/// matches [`ansatz_unitary`] up to global phase.
pub fn emit_physical(ansatz: &LayeredAnsatz, x: &[f64]) -> Result<PulseSequence> {
    Ok(emit_physical_with_frame(ansatz, x, true)?.sequence)
}

/// As [`emit_physical`]; with `absorb_frame = false` the last layer is also
/// compiled modulo collective Z and the leftover rotation is returned in
/// [`Emission::terminal_frame`] instead of being emitted.
pub fn emit_physical_with_frame(
    ansatz: &LayeredAnsatz,
    x: &[f64],
    absorb_frame: bool,
) -> Result<Emission> {
    let p = ansatz.unpack(x)?;
    let n = ansatz.n_qubits;
    let last = ansatz.layers.len() - 1;
    let mut seq = PulseSequence::new(n);
    let mut frame = 0.0;
    for (l, values) in p.layers.iter().enumerate() {
        match ansatz.layers[l] {
            LayerKind::ZOnly => {
                for (q, &z) in values.iter().enumerate() {
                    seq.push(Pulse::z(q + 1, z));
                }
            }
            LayerKind::FullLocal => {
                let zf = z_rotation(frame);
                let zf_inv = z_rotation(-frame);
                let factors: Vec<Mat2> = ansatz
                    .layer_factors(l, values)
                    .into_iter()
                    .map(|u| {
                        if l == last && absorb_frame {
                            u * zf
                        } else {
                            zf_inv * u * zf
                        }
                    })
                    .collect();
                let target = LocalUnitary::new(factors)?;
                let mode = if l == last && absorb_frame {
                    LocalMode::Exact
                } else {
                    LocalMode::ModCollectiveZ
                };
                let compiled = group_and_compile(&target, mode, false, false)?;
                seq.pulses.extend(compiled.sequence.pulses);
                if l == last && absorb_frame {
                    frame = 0.0;
                } else if let Residual::CollectiveZ(r) = compiled.residual {
                    frame += r;
                }
            }
        }
        if let Some(&(theta, phi)) = p.ms.get(l) {
            seq.push(Pulse::ms(theta, phi - frame));
        }
    }
    Ok(Emission {
        sequence: seq.pruned(PRUNE_TOL),
        terminal_frame: frame,
    })
}

/// For each MS gate, `Some(k)` when `θ` lies within `tol` of `k·π/8`
/// (with `k` taken modulo 16, the period of `θ`).
pub fn ms_grid_annotations(
    ansatz: &LayeredAnsatz,
    x: &[f64],
    tol: f64,
) -> Result<Vec<Option<u32>>> {
    let p = ansatz.unpack(x)?;
    Ok(p.ms
        .iter()
        .map(|&(theta, _)| {
            let k = (theta / (PI / 8.0)).round();
            ((theta - k * PI / 8.0).abs() <= tol).then(|| k.rem_euclid(16.0) as u32)
        })
        .collect())
}
