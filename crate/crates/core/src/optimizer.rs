//! BFGS minimization, seeded repeated local search and the entangling-gate
//! escalation loop.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, emit_physical, ms_grid_annotations, LayeredAnsatz, Template};
use crate::error::{Error, Result};
use crate::gateset::{sequence_unitary, PulseSequence};
use crate::objective::{self, ParamCircuit, TargetSpec};
use crate::sampler::{mix_seed, RandomStream};

/// Physical sequences must reproduce the target to this deficit.
pub const VERIFY_DEFICIT: f64 = 1e-8;

/// Tolerance for reporting an MS angle as lying on the `k·π/8` grid.
pub const GRID_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    TargetReached,
    MaxIterations,
    LineSearchFailed,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop when `‖∇f‖_∞` falls below this.
    pub grad_tol: f64,
    /// Stop as soon as `f` reaches this value (at or below when
    /// minimizing, at or above when maximizing).
    pub target_value: Option<f64>,
    /// Stop when `f` improved by less than `stall_tol` over `stall_window`
    /// iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iters: 2000,
            grad_tol: 1e-10,
            target_value: None,
            stall_window: 25,
            stall_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct Probe {
    alpha: f64,
    value: f64,
    grad: DVector<f64>,
    slope: f64,
}

/// Line search satisfying the strong Wolfe conditions (bracketing followed
/// by zoom with safeguarded quadratic interpolation).
fn wolfe_search<F>(
    f: &mut F,
    x: &DVector<f64>,
    p: &DVector<f64>,
    f0: f64,
    d0: f64,
    evals: &mut usize,
) -> Result<Option<Probe>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    const MAX_STEPS: usize = 40;

    let mut probe = |alpha: f64, evals: &mut usize| -> Result<Probe> {
        let xa = x + p * alpha;
        let (value, g) = f(xa.as_slice())?;
        *evals += 1;
        if !value.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective"));
        }
        let grad = DVector::from_vec(g);
        let slope = grad.dot(p);
        Ok(Probe {
            alpha,
            value,
            grad,
            slope,
        })
    };

    let mut prev = Probe {
        alpha: 0.0,
        value: f0,
        grad: DVector::zeros(0),
        slope: d0,
    };
    let mut alpha = 1.0;
    let mut bracket = None;
    for i in 0..MAX_STEPS {
        let cur = probe(alpha, evals)?;
        if cur.value > f0 + C1 * alpha * d0 || (i > 0 && cur.value >= prev.value) {
            bracket = Some((prev, cur));
            break;
        }
        if cur.slope.abs() <= -C2 * d0 {
            return Ok(Some(cur));
        }
        if cur.slope >= 0.0 {
            bracket = Some((cur, prev));
            break;
        }
        prev = cur;
        alpha *= 2.0;
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    for _ in 0..MAX_STEPS {
        let width = hi.alpha - lo.alpha;
        if width.abs() < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
        // minimizer of the quadratic through (lo.value, lo.slope) and hi.value
        let denom = 2.0 * (hi.value - lo.value - lo.slope * width);
        let mut alpha = if denom > 0.0 {
            lo.alpha - lo.slope * width * width / denom
        } else {
            lo.alpha + 0.5 * width
        };
        let (a, b) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let margin = 0.1 * (b - a);
        if !(alpha > a + margin && alpha < b - margin) {
            alpha = 0.5 * (a + b);
        }
        let cur = probe(alpha, evals)?;
        if cur.value > f0 + C1 * alpha * d0 || cur.value >= lo.value {
            hi = cur;
        } else {
            if cur.slope.abs() <= -C2 * d0 {
                return Ok(Some(cur));
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // Accept the best sufficient-decrease point even without curvature.
    if lo.alpha > 0.0 && lo.value <= f0 + C1 * lo.alpha * d0 && lo.grad.len() == x.len() {
        return Ok(Some(lo));
    }
    Ok(None)
}

/// Minimize `f` with BFGS from `x0`. `f` returns the value and its exact
/// gradient. Curvature updates with `sᵀy ≤ 0` are skipped.
pub fn bfgs_minimize<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial point"));
    }
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut fx, g) = f(x0)?;
    let mut evals = 1;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("objective"));
    }
    let mut g = DVector::from_vec(g);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh_h = true;
    let mut history = vec![fx];
    let mut iter = 0;
    let termination = loop {
        if opts.target_value.is_some_and(|t| fx <= t) {
            break Termination::TargetReached;
        }
        if inf_norm(&g) <= opts.grad_tol {
            break Termination::GradientTolerance;
        }
        if iter >= opts.max_iters {
            break Termination::MaxIterations;
        }
        let w = opts.stall_window;
        if w > 0 && history.len() > w && history[history.len() - 1 - w] - fx <= opts.stall_tol {
            break Termination::Stalled;
        }
        let mut p = -(&h * &g);
        let mut d0 = g.dot(&p);
        if d0 >= 0.0 {
            h.fill_with_identity();
            fresh_h = true;
            p = -g.clone();
            d0 = g.dot(&p);
        }
        let step = match wolfe_search(&mut f, &x, &p, fx, d0, &mut evals)? {
            Some(s) => s,
            None if !fresh_h => {
                h.fill_with_identity();
                fresh_h = true;
                continue;
            }
            None => break Termination::LineSearchFailed,
        };
        let s = &p * step.alpha;
        let y = &step.grad - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if fresh_h {
                // scale the initial inverse Hessian before the first update
                h *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            h.ger(-rho, &hy, &s, 1.0);
            h.ger(-rho, &s, &hy, 1.0);
            h.ger(rho * rho * yhy + rho, &s, &s, 1.0);
            fresh_h = false;
        }
        x += &s;
        fx = step.value;
        g = step.grad;
        history.push(fx);
        iter += 1;
    };
    Ok(BfgsResult {
        x: x.as_slice().to_vec(),
        value: fx,
        grad_inf: inf_norm(&g),
        iterations: iter,
        evaluations: evals,
        termination,
    })
}

/// Maximize `f` by minimizing `−f`; the reported value is the maximum.
pub fn bfgs_maximize<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let neg_opts = BfgsOptions {
        target_value: opts.target_value.map(|t| -t),
        ..*opts
    };
    let mut r = bfgs_minimize(
        |x| {
            let (v, g) = f(x)?;
            Ok((-v, g.into_iter().map(|v| -v).collect()))
        },
        x0,
        &neg_opts,
    )?;
    r.value = -r.value;
    Ok(r)
}

/// Deficit `1 − f` and its gradient for a circuit against `spec`.
pub fn deficit_with_gradient(
    circ: &ParamCircuit,
    spec: &TargetSpec,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let v = circ.objective_with_gradient(x, spec)?;
    Ok((
        1.0 - v.fidelity,
        v.gradient.into_iter().map(|g| -g).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub master_seed: u64,
    pub max_restarts: usize,
    pub success_deficit: f64,
    pub polish_deficit: f64,
    pub min_entangling: usize,
    pub max_entangling: usize,
    pub bfgs_max_iters: usize,
    pub bfgs_grad_tol: f64,
    /// Initial angles are drawn uniformly from `(−init_scale, init_scale]`.
    pub init_scale: f64,
    pub template: Template,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            master_seed: 0,
            max_restarts: 200,
            success_deficit: 1e-4,
            polish_deficit: 1e-9,
            min_entangling: 0,
            max_entangling: 30,
            bfgs_max_iters: 2000,
            bfgs_grad_tol: 1e-10,
            init_scale: PI,
            template: Template::Paper,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(format!("search configuration: {m}")));
        if self.max_restarts == 0 {
            return bad("max_restarts must be positive");
        }
        if !(self.success_deficit > 0.0 && self.polish_deficit > 0.0) {
            return bad("deficit thresholds must be positive");
        }
        if self.success_deficit < self.polish_deficit {
            return bad("success_deficit must be at least polish_deficit");
        }
        if self.bfgs_max_iters == 0 || self.bfgs_grad_tol.is_nan() || self.bfgs_grad_tol < 0.0 {
            return bad("BFGS limits must be positive");
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return bad("init_scale must be positive");
        }
        if self.min_entangling > self.max_entangling {
            return bad("min_entangling exceeds max_entangling");
        }
        Ok(())
    }

    fn bfgs_options(&self, target: f64) -> BfgsOptions {
        BfgsOptions {
            max_iters: self.bfgs_max_iters,
            grad_tol: self.bfgs_grad_tol,
            target_value: Some(target),
            ..BfgsOptions::default()
        }
    }
}

/// Result of one local optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub index: usize,
    pub params: Vec<f64>,
    pub deficit: f64,
    /// Met `success_deficit` and polished down to `polish_deficit`.
    pub accepted: bool,
}

/// Child seed of restart `r` at entangling count `m`.
pub fn restart_seed(master: u64, m: usize, r: usize) -> u64 {
    mix_seed(&[master, m as u64, r as u64])
}

fn run_restart(
    ansatz: &LayeredAnsatz,
    circ: &ParamCircuit,
    spec: &TargetSpec,
    cfg: &SearchConfig,
    r: usize,
) -> RestartResult {
    let mut stream = RandomStream::new(restart_seed(cfg.master_seed, ansatz.n_entangling, r));
    let x0: Vec<f64> = (0..circ.n_params)
        .map(|_| cfg.init_scale - 2.0 * cfg.init_scale * stream.uniform())
        .collect();
    let failed = |x0: Vec<f64>| RestartResult {
        index: r,
        params: x0,
        deficit: f64::INFINITY,
        accepted: false,
    };
    let opts = cfg.bfgs_options(cfg.polish_deficit * 1e-2);
    let Ok(res) = bfgs_minimize(|x| deficit_with_gradient(circ, spec, x), &x0, &opts) else {
        return failed(x0);
    };
    let deficit = res.value.max(0.0);
    if deficit > cfg.success_deficit {
        return RestartResult {
            index: r,
            params: res.x,
            deficit,
            accepted: false,
        };
    }
    match polish(circ, spec, cfg, &res.x) {
        Ok((params, deficit)) => RestartResult {
            index: r,
            accepted: deficit <= cfg.polish_deficit,
            params,
            deficit,
        },
        Err(_) => failed(x0),
    }
}

/// Continue optimizing an accepted solution toward `polish_deficit`.
pub fn polish(
    circ: &ParamCircuit,
    spec: &TargetSpec,
    cfg: &SearchConfig,
    x: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let (d0, _) = deficit_with_gradient(circ, spec, x)?;
    if d0 <= cfg.polish_deficit {
        return Ok((x.to_vec(), d0.max(0.0)));
    }
    let opts = BfgsOptions {
        stall_window: 0,
        ..cfg.bfgs_options(cfg.polish_deficit * 1e-2)
    };
    let r = bfgs_minimize(|p| deficit_with_gradient(circ, spec, p), x, &opts)?;
    if r.value < d0 {
        Ok((r.x, r.value.max(0.0)))
    } else {
        Ok((x.to_vec(), d0.max(0.0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub success: bool,
    /// Winning restart on success, lowest-deficit restart otherwise.
    pub best: RestartResult,
    /// Index of the winning restart plus one, or every restart on failure.
    pub restarts_used: usize,
}

/// Multistart BFGS. Restarts run in parallel batches; the answer is the
/// lowest-index accepted restart, so it does not depend on scheduling or
/// worker count. A restart is accepted when it reaches `success_deficit`
/// and polishing then takes it to `polish_deficit`; local optima that
/// merely dip under `success_deficit` are not solutions.
pub fn repeated_local_search(
    ansatz: &LayeredAnsatz,
    spec: &TargetSpec,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    if spec.dim() != ansatz.dim() {
        return Err(Error::DimensionMismatch {
            expected: ansatz.dim(),
            found: spec.dim(),
        });
    }
    let circ = ansatz.circuit();
    let batch = rayon::current_num_threads().max(1);
    let mut best: Option<RestartResult> = None;
    let mut start = 0;
    while start < cfg.max_restarts {
        let end = (start + batch).min(cfg.max_restarts);
        let results: Vec<RestartResult> = (start..end)
            .into_par_iter()
            .map(|r| run_restart(ansatz, &circ, spec, cfg, r))
            .collect();
        for r in results {
            if r.accepted {
                return Ok(SearchOutcome {
                    success: true,
                    restarts_used: r.index + 1,
                    best: r,
                });
            }
            if best.as_ref().is_none_or(|b| r.deficit < b.deficit) {
                best = Some(r);
            }
        }
        start = end;
    }
    Ok(SearchOutcome {
        success: false,
        best: best.expect("at least one restart"),
        restarts_used: cfg.max_restarts,
    })
}

/// Outcome of one round of the escalation loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub m: usize,
    pub restarts: usize,
    pub best_deficit: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub success: bool,
    pub n_qubits: usize,
    /// Lowered pulses; empty when no round succeeded.
    pub sequence: PulseSequence,
    pub ansatz: LayeredAnsatz,
    pub ansatz_params: Vec<f64>,
    pub m: usize,
    /// Ansatz deficit after polishing.
    pub deficit: f64,
    /// Deficit of the emitted pulse sequence.
    pub physical_deficit: f64,
    pub restarts_used: usize,
    pub rounds: Vec<RoundRecord>,
    pub wall_time: f64,
    /// `arg tr(T_j† U|_{S_j})` for each target block; the first entry is
    /// the global phase dropped for full and subspace targets.
    pub discarded_global_phase: Vec<f64>,
    /// Per MS gate, `k` when `θ` lies within 1e−6 of `k·π/8`.
    pub snapped_ms_grid: Vec<Option<u32>>,
    pub master_seed: u64,
}

impl CompileReport {
    /// Equality on everything except wall-clock time.
    pub fn same_result(&self, other: &CompileReport) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        &a == other
    }
}

fn block_phases(u: &nalgebra::DMatrix<num_complex::Complex64>, spec: &TargetSpec) -> Vec<f64> {
    spec.terms()
        .iter()
        .map(|t| {
            let mut acc = crate::linalg::ZERO;
            for (k, &col) in t.indices.iter().enumerate() {
                for r in 0..u.nrows() {
                    acc += u[(r, col)].conj() * t.block[(r, k)];
                }
            }
            acc.arg()
        })
        .collect()
}

/// Escalate the number of MS gates from `min_entangling` until the search
/// succeeds, then lower the solution to pulses and verify it.
pub fn compile(spec: &TargetSpec, n_qubits: usize, cfg: &SearchConfig) -> Result<CompileReport> {
    spec.validate()?;
    cfg.validate()?;
    if spec.dim() != 1usize << n_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_qubits,
            found: spec.dim(),
        });
    }
    let started = Instant::now();
    let mut rounds = Vec::new();
    let mut last = None;
    for m in cfg.min_entangling..=cfg.max_entangling {
        let ansatz = build_ansatz(n_qubits, m, cfg.template);
        let outcome = repeated_local_search(&ansatz, spec, cfg)?;
        rounds.push(RoundRecord {
            m,
            restarts: outcome.restarts_used,
            best_deficit: outcome.best.deficit,
            success: outcome.success,
        });
        let success = outcome.success;
        last = Some((ansatz, outcome));
        if success {
            break;
        }
    }
    let (ansatz, outcome) = last.expect("at least one round");
    let wall = |t: Instant| t.elapsed().as_secs_f64();
    if !outcome.success {
        return Ok(CompileReport {
            success: false,
            n_qubits,
            sequence: PulseSequence::new(n_qubits),
            m: ansatz.n_entangling,
            ansatz,
            ansatz_params: outcome.best.params,
            deficit: outcome.best.deficit,
            physical_deficit: f64::NAN,
            restarts_used: outcome.restarts_used,
            rounds,
            wall_time: wall(started),
            discarded_global_phase: Vec::new(),
            snapped_ms_grid: Vec::new(),
            master_seed: cfg.master_seed,
        });
    }
    let params = outcome.best.params;
    let sequence = emit_physical(&ansatz, &params)?.normalized();
    let u = sequence_unitary(&sequence)?;
    let physical_deficit = objective::deficit(&u, spec)?;
    if physical_deficit > VERIFY_DEFICIT.max(outcome.best.deficit + 1e-9) {
        return Err(Error::NoSolution(format!(
            "lowered sequence verifies at deficit {physical_deficit:e}"
        )));
    }
    Ok(CompileReport {
        success: true,
        n_qubits,
        discarded_global_phase: block_phases(&u, spec),
        snapped_ms_grid: ms_grid_annotations(&ansatz, &params, GRID_TOL)?,
        sequence,
        m: ansatz.n_entangling,
        ansatz,
        ansatz_params: params,
        deficit: outcome.best.deficit,
        physical_deficit,
        restarts_used: outcome.restarts_used,
        rounds,
        wall_time: wall(started),
        master_seed: cfg.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateset::equatorial_rotation;
    use crate::linalg;
    use crate::localcomp::{compile_local, LocalMode, LocalUnitary};
    use crate::sampler::haar_unitary;
    use crate::targets;

    #[test]
    fn quadratic_converges() {
        let c = [1.5, -0.3, 2.0, 0.7];
        let mut s = RandomStream::new(1);
        let x0: Vec<f64> = (0..4).map(|_| 10.0 * s.normal()).collect();
        let r = bfgs_maximize(
            |x| {
                let v = -x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                let g = x.iter().zip(&c).map(|(a, b)| -2.0 * (a - b)).collect();
                Ok((v, g))
            },
            &x0,
            &BfgsOptions::default(),
        )
        .unwrap();
        let err =
            r.x.iter()
                .zip(&c)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
        assert!(err < 1e-8, "{r:?}");
    }

    #[test]
    fn rosenbrock_converges() {
        let r = bfgs_maximize(
            |x| {
                let (a, b) = (x[0], x[1]);
                let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ];
                Ok((-v, g.into_iter().map(|v| -v).collect()))
            },
            &[-1.2, 1.0],
            &BfgsOptions {
                stall_window: 0,
                ..BfgsOptions::default()
            },
        )
        .unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{r:?}"
        );
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let r = bfgs_minimize(
            |_| Ok((f64::NAN, vec![0.0])),
            &[0.0],
            &BfgsOptions::default(),
        );
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn single_qubit_target_from_any_seed() {
        let t = linalg::from_mat2(&equatorial_rotation(0.7, 0.0));
        let spec = TargetSpec::full(t).unwrap();
        let ansatz = build_ansatz(1, 0, Template::Paper);
        let circ = ansatz.circuit();
        for seed in 0..10 {
            let mut s = RandomStream::new(seed);
            let x0: Vec<f64> = (0..3).map(|_| PI - 2.0 * PI * s.uniform()).collect();
            let opts = BfgsOptions {
                target_value: Some(1e-14),
                ..BfgsOptions::default()
            };
            let r = bfgs_minimize(|x| deficit_with_gradient(&circ, &spec, x), &x0, &opts).unwrap();
            let u = crate::ansatz::ansatz_unitary(&ansatz, &r.x).unwrap();
            assert!(
                objective::deficit(&u, &spec).unwrap() < 1e-10,
                "seed {seed}: {r:?}"
            );
        }
    }

    #[test]
    fn identity_succeeds_at_first_restart() {
        let spec = TargetSpec::full(linalg::identity(4)).unwrap();
        let out = repeated_local_search(
            &build_ansatz(2, 0, Template::Paper),
            &spec,
            &SearchConfig::default(),
        )
        .unwrap();
        assert!(out.success);
        assert_eq!(out.restarts_used, 1);
        assert!(out.best.deficit <= 1e-9);
    }

    #[test]
    fn config_validation() {
        let bad = SearchConfig {
            success_deficit: 1e-12,
            ..SearchConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SearchConfig::default().validate().is_ok());
    }

    #[test]
    fn local_target_compiles_without_entanglers() {
        let mut s = RandomStream::new(5);
        let factors: Vec<_> = (0..2)
            .map(|_| linalg::to_mat2(&haar_unitary(2, &mut s)))
            .collect();
        let local = LocalUnitary::new(factors).unwrap();
        let spec = TargetSpec::full(local.matrix()).unwrap();
        let report = compile(&spec, 2, &SearchConfig::default()).unwrap();
        assert!(report.success);
        assert_eq!(report.m, 0);
        assert!(report.physical_deficit <= VERIFY_DEFICIT);
        let direct = compile_local(&local, LocalMode::Exact, &[0, 1]).unwrap();
        let u = sequence_unitary(&direct.sequence).unwrap();
        assert!(objective::deficit(&u, &spec).unwrap() < 1e-9);
    }

    #[test]
    fn cnot_fits_three_entanglers() {
        let spec = TargetSpec::full(targets::cnot()).unwrap();
        let cfg = SearchConfig {
            min_entangling: 3,
            max_entangling: 3,
            master_seed: 11,
            ..SearchConfig::default()
        };
        let report = compile(&spec, 2, &cfg).unwrap();
        assert!(report.success);
        assert!(report.deficit < 1e-9);
        assert!(report.physical_deficit < 1e-8);
    }

    #[test]
    fn failure_report_lists_rounds() {
        let mut s = RandomStream::new(8);
        let spec = TargetSpec::full(haar_unitary(4, &mut s)).unwrap();
        let cfg = SearchConfig {
            max_entangling: 1,
            max_restarts: 3,
            ..SearchConfig::default()
        };
        let report = compile(&spec, 2, &cfg).unwrap();
        assert!(!report.success);
        assert_eq!(report.rounds.len(), 2);
        assert!(report
            .rounds
            .iter()
            .all(|r| !r.success && r.best_deficit > 1e-3));
        assert!(report.sequence.is_empty());
    }
}
