//! File formats: pulse-sequence text, unitary JSON, target-spec JSON and
//! error-model JSON.
//!
//! Sequence files list one pulse per line in chronological order:
//!
//! ```text
//! # qubits 3
//! C 1.5707963267948966e0 0.0000000000000000e0
//! Z 2 -7.8539816339744828e-1
//! MS 1.5707963267948966e0 0.0000000000000000e0
//! ```
//!
//! Angles are written normalized with 17 significant digits, so a written
//! file re-parses to exactly the pulses that were written.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::errcomp::{ErrorModel, PulseOverride};
use crate::error::{Error, Result};
use crate::gateset::{Pulse, PulseSequence};
use crate::linalg::{self, c, CMatrix};
use crate::objective::{SubspaceBlock, TargetSpec};

fn fmt_angle(x: f64) -> String {
    format!("{x:.16e}")
}

/// One pulse as a text line (angles as given, not normalized).
pub fn format_pulse(p: &Pulse) -> String {
    match *p {
        Pulse::Collective { theta, phi } => format!("C {} {}", fmt_angle(theta), fmt_angle(phi)),
        Pulse::AddressedZ { qubit, theta } => format!("Z {qubit} {}", fmt_angle(theta)),
        Pulse::Ms { theta, phi } => format!("MS {} {}", fmt_angle(theta), fmt_angle(phi)),
    }
}

fn parse_angle(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: "missing angle".into(),
    })?;
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number `{tok}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite angle `{tok}`"),
        });
    }
    Ok(v)
}

/// Parse a single pulse line (without comment).
pub fn parse_pulse(text: &str, line: usize) -> Result<Pulse> {
    let mut toks = text.split_whitespace();
    let kind = toks.next().ok_or_else(|| Error::Parse {
        line,
        msg: "empty pulse".into(),
    })?;
    let pulse = match kind.to_ascii_uppercase().as_str() {
        "C" => Pulse::collective(
            parse_angle(toks.next(), line)?,
            parse_angle(toks.next(), line)?,
        ),
        "Z" => {
            let q = toks.next().ok_or_else(|| Error::Parse {
                line,
                msg: "missing qubit index".into(),
            })?;
            let qubit: usize = q.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid qubit index `{q}`"),
            })?;
            Pulse::z(qubit, parse_angle(toks.next(), line)?)
        }
        "MS" => Pulse::ms(
            parse_angle(toks.next(), line)?,
            parse_angle(toks.next(), line)?,
        ),
        other => {
            return Err(Error::Parse {
                line,
                msg: format!("unknown pulse kind `{other}`"),
            })
        }
    };
    if let Some(extra) = toks.next() {
        return Err(Error::Parse {
            line,
            msg: format!("unexpected token `{extra}`"),
        });
    }
    Ok(pulse)
}

/// Serialize a sequence. Angles are normalized first.
pub fn format_sequence(seq: &PulseSequence) -> String {
    let mut out = format!("# qubits {}\n", seq.n_qubits);
    for p in &seq.normalized().pulses {
        let _ = writeln!(out, "{}", format_pulse(p));
    }
    out
}

/// Parse a sequence file. The register size comes from a `# qubits N`
/// header, then from `n_qubits`, then from the largest addressed qubit.
pub fn parse_sequence(text: &str, n_qubits: Option<usize>) -> Result<PulseSequence> {
    let mut header = None;
    let mut pulses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (body, comment) = match raw.find('#') {
            Some(k) => (&raw[..k], Some(&raw[k + 1..])),
            None => (raw, None),
        };
        if let Some(cmt) = comment {
            let mut t = cmt.split_whitespace();
            if t.next() == Some("qubits") {
                if let Some(Ok(n)) = t.next().map(str::parse::<usize>) {
                    header = Some(n);
                }
            }
        }
        if body.trim().is_empty() {
            continue;
        }
        pulses.push(parse_pulse(body, line)?);
    }
    let inferred = pulses
        .iter()
        .filter_map(|p| match p {
            Pulse::AddressedZ { qubit, .. } => Some(*qubit),
            _ => None,
        })
        .max()
        .unwrap_or(1);
    let n = n_qubits.or(header).unwrap_or(inferred);
    if let (Some(a), Some(b)) = (n_qubits, header) {
        if a != b {
            return Err(Error::Parse {
                line: 1,
                msg: format!("file declares {b} qubits but {a} were requested"),
            });
        }
    }
    let seq = PulseSequence::from_pulses(n, pulses);
    seq.validate()?;
    Ok(seq)
}

pub fn read_sequence(path: &Path, n_qubits: Option<usize>) -> Result<PulseSequence> {
    parse_sequence(&std::fs::read_to_string(path)?, n_qubits)
}

pub fn write_sequence(path: &Path, seq: &PulseSequence) -> Result<()> {
    std::fs::write(path, format_sequence(seq))?;
    Ok(())
}

impl Serialize for Pulse {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_pulse(self))
    }
}

impl<'de> Deserialize<'de> for Pulse {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_pulse(&s, 1).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    n_qubits: usize,
    pulses: Vec<Pulse>,
}

impl Serialize for PulseSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SequenceJson {
            n_qubits: self.n_qubits,
            pulses: self.pulses.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PulseSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SequenceJson::deserialize(d)?;
        let seq = PulseSequence::from_pulses(j.n_qubits, j.pulses);
        seq.validate().map_err(D::Error::custom)?;
        Ok(seq)
    }
}

/// Row-major `[[[re, im], …], …]`.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|k| [m[(r, k)].re, m[(r, k)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 {
        return Err(Error::InvalidSpec("empty matrix".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != nc) {
        return Err(Error::DimensionMismatch {
            expected: nc,
            found: bad.len(),
        });
    }
    let m = CMatrix::from_fn(nr, nc, |r, k| c(rows[r][k][0], rows[r][k][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix entry"));
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct UnitaryJson {
    n_qubits: usize,
    matrix: MatrixJson,
}

/// Unitary file contents.
pub fn unitary_to_json(u: &CMatrix) -> Result<String> {
    let n = u.nrows().trailing_zeros() as usize;
    Ok(serde_json::to_string_pretty(&UnitaryJson {
        n_qubits: n,
        matrix: matrix_to_json(u),
    })?)
}

fn check_unitary(u: &CMatrix, n_qubits: usize) -> Result<()> {
    if u.nrows() != 1usize << n_qubits || u.ncols() != u.nrows() {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_qubits,
            found: u.nrows(),
        });
    }
    let err = linalg::unitarity_error(u);
    if err > 1e-12 {
        return Err(Error::NotUnitary(err));
    }
    Ok(())
}

/// Parse a unitary file, checking shape and unitarity (to 1e−12).
pub fn unitary_from_json(text: &str) -> Result<CMatrix> {
    let j: UnitaryJson = serde_json::from_str(text)?;
    let u = matrix_from_json(&j.matrix)?;
    check_unitary(&u, j.n_qubits)?;
    Ok(u)
}

pub fn read_unitary(path: &Path) -> Result<CMatrix> {
    unitary_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_unitary(path: &Path, u: &CMatrix) -> Result<()> {
    std::fs::write(path, unitary_to_json(u)?)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    indices: Vec<usize>,
    block: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    columns: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<BlockJson>>,
}

/// Target-spec JSON. `subspace` takes `matrix` either as the `d × |S|`
/// block or as a full `d × d` matrix whose `columns` are selected.
pub fn spec_to_json(spec: &TargetSpec) -> Result<String> {
    let j = match spec {
        TargetSpec::Full(u) => SpecJson {
            kind: "full".into(),
            n_qubits: Some(u.nrows().trailing_zeros() as usize),
            matrix: Some(matrix_to_json(u)),
            columns: None,
            blocks: None,
        },
        TargetSpec::Subspace(b) => SpecJson {
            kind: "subspace".into(),
            n_qubits: None,
            matrix: Some(matrix_to_json(&b.block)),
            columns: Some(b.indices.clone()),
            blocks: None,
        },
        TargetSpec::PhasedSubspaces(bs) => SpecJson {
            kind: "phased".into(),
            n_qubits: None,
            matrix: None,
            columns: None,
            blocks: Some(
                bs.iter()
                    .map(|b| BlockJson {
                        indices: b.indices.clone(),
                        block: matrix_to_json(&b.block),
                    })
                    .collect(),
            ),
        },
    };
    Ok(serde_json::to_string_pretty(&j)?)
}

/// Parse a target spec. A plain unitary file (no `kind`) is accepted as a
/// full target.
pub fn spec_from_json(text: &str) -> Result<TargetSpec> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("kind").is_none() {
        return Ok(TargetSpec::Full(unitary_from_json(text)?));
    }
    let j: SpecJson = serde_json::from_value(value)?;
    let missing = |what: &str| Error::InvalidSpec(format!("`{}` target needs `{what}`", j.kind));
    let spec = match j.kind.as_str() {
        "full" => {
            let u = matrix_from_json(j.matrix.as_ref().ok_or_else(|| missing("matrix"))?)?;
            let n = j.n_qubits.unwrap_or(u.nrows().trailing_zeros() as usize);
            check_unitary(&u, n)?;
            TargetSpec::Full(u)
        }
        "subspace" => {
            let m = matrix_from_json(j.matrix.as_ref().ok_or_else(|| missing("matrix"))?)?;
            let cols = j.columns.clone().ok_or_else(|| missing("columns"))?;
            if m.ncols() == cols.len() {
                TargetSpec::subspace(cols, m)?
            } else {
                TargetSpec::columns_of(&m, &cols)?
            }
        }
        "phased" => {
            let blocks = j
                .blocks
                .as_ref()
                .ok_or_else(|| missing("blocks"))?
                .iter()
                .map(|b| {
                    Ok(SubspaceBlock {
                        indices: b.indices.clone(),
                        block: matrix_from_json(&b.block)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            TargetSpec::PhasedSubspaces(blocks)
        }
        other => return Err(Error::InvalidSpec(format!("unknown target kind `{other}`"))),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn read_spec(path: &Path) -> Result<TargetSpec> {
    spec_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_spec(path: &Path, spec: &TargetSpec) -> Result<()> {
    std::fs::write(path, spec_to_json(spec)?)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct OverrideJson {
    pulse: String,
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize, Default)]
struct ModelJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crosstalk: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    overrides: Vec<OverrideJson>,
}

pub fn model_to_json(model: &ErrorModel) -> Result<String> {
    let j = ModelJson {
        crosstalk: model.crosstalk.clone(),
        overrides: model
            .overrides
            .iter()
            .map(|o| OverrideJson {
                pulse: format_pulse(&o.pulse),
                matrix: matrix_to_json(&o.matrix),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&j)?)
}

pub fn model_from_json(text: &str) -> Result<ErrorModel> {
    let j: ModelJson = serde_json::from_str(text)?;
    let overrides = j
        .overrides
        .iter()
        .enumerate()
        .map(|(i, o)| {
            Ok(PulseOverride {
                pulse: parse_pulse(&o.pulse, i + 1)?,
                matrix: matrix_from_json(&o.matrix)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model = ErrorModel {
        crosstalk: j.crosstalk,
        overrides,
    };
    model.validate()?;
    Ok(model)
}

pub fn read_model(path: &Path) -> Result<ErrorModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_model(path: &Path, model: &ErrorModel) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}
