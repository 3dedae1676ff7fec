//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.
//! `ACCEPTANCE_SMOKE=1` runs the reduced three-qubit variant (two targets,
//! 50 restarts at M = 7) instead of the full one.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use ms_compiler::ansatz::{ansatz_unitary, build_ansatz, emit_physical, Template};
use ms_compiler::cli::{m_histogram, run_bench, BenchRecord};
use ms_compiler::errcomp::{apply_model, compensate, CompensationMode, ErrorModel};
use ms_compiler::gateset::{
    embed_on_subset, ms_unitary, ms_x_unitary, pulse_unitary, sequence_unitary, Pulse,
    PulseSequence,
};
use ms_compiler::linalg::{self, c, CMatrix, Mat2};
use ms_compiler::localcomp::{compile_local, LocalMode, LocalUnitary};
use ms_compiler::objective::{self, select_columns, SubspaceBlock, TargetSpec};
use ms_compiler::optimizer::{compile, repeated_local_search, CompileReport, SearchConfig};
use ms_compiler::sampler::{haar_unitary, is_clifford, mix_seed, random_clifford, RandomStream};

const SUITE_SEED: u64 = 0xACCE_55ED;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Results shared between criteria.
#[derive(Default)]
struct Shared {
    two_qubit: Vec<(CMatrix, CompileReport)>,
    saturating_restarts: Vec<usize>,
    toffoli: Option<CompileReport>,
}

// ---------------------------------------------------------------- oracles

/// `|tr(T†U)|² / d²` summed entry by entry.
fn oracle_deficit(u: &CMatrix, t: &CMatrix) -> f64 {
    let d = t.nrows();
    let mut acc = c(0.0, 0.0);
    for r in 0..d {
        for k in 0..d {
            acc += t[(r, k)].conj() * u[(r, k)];
        }
    }
    1.0 - acc.norm_sqr() / (d * d) as f64
}

/// Permutation matrix with `|b⟩ ↦ |perm[b]⟩`, built independently of the
/// library's target table.
fn oracle_permutation(perm: &[usize]) -> CMatrix {
    let d = perm.len();
    CMatrix::from_fn(d, d, |r, k| {
        if perm[k] == r {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn oracle_toffoli() -> CMatrix {
    // qubit n is bit n-1; flip bit 2 when bits 0 and 1 are set
    let perm: Vec<usize> = (0..8).map(|b| if b & 3 == 3 { b ^ 4 } else { b }).collect();
    oracle_permutation(&perm)
}

fn oracle_fredkin() -> CMatrix {
    // swap bits 1 and 2 when bit 0 is set
    let perm: Vec<usize> = (0..8)
        .map(|b| {
            if b & 1 == 1 {
                let (q2, q3) = ((b >> 1) & 1, (b >> 2) & 1);
                1 | (q3 << 1) | (q2 << 2)
            } else {
                b
            }
        })
        .collect();
    oracle_permutation(&perm)
}

fn kron_all(ops: &[CMatrix]) -> CMatrix {
    // ops[0] acts on qubit 1 (least significant bit)
    ops.iter()
        .fold(linalg::identity(1), |acc, op| op.kronecker(&acc))
}

fn pauli_on(n: usize, q: usize, p: &Mat2) -> CMatrix {
    let ops: Vec<CMatrix> = (0..n)
        .map(|k| {
            if k == q {
                linalg::from_mat2(p)
            } else {
                linalg::identity(2)
            }
        })
        .collect();
    kron_all(&ops)
}

/// `S_φ = Σ_n (cos φ σ_x^n + sin φ σ_y^n)`.
fn collective_spin(n: usize, phi: f64) -> CMatrix {
    let axis = linalg::pauli_x() * c(phi.cos(), 0.0) + linalg::pauli_y() * c(phi.sin(), 0.0);
    let d = 1 << n;
    (0..n).fold(CMatrix::zeros(d, d), |acc, q| acc + pauli_on(n, q, &axis))
}

fn brute_force_ms(n: usize, theta: f64, phi: f64) -> CMatrix {
    let s = collective_spin(n, phi);
    (&s * &s * c(0.0, -theta / 4.0)).exp()
}

fn random_su2_factors(n: usize, s: &mut RandomStream) -> Vec<Mat2> {
    (0..n)
        .map(|_| linalg::to_mat2(&haar_unitary(2, s)))
        .collect()
}

fn two_qubit_targets() -> Vec<CMatrix> {
    let mut s = RandomStream::new(mix_seed(&[SUITE_SEED, 2]));
    (0..20).map(|_| haar_unitary(4, &mut s)).collect()
}

fn max_rel_fd_error(
    ansatz: &ms_compiler::ansatz::LayeredAnsatz,
    spec: &TargetSpec,
    x: &[f64],
) -> f64 {
    let circ = ansatz.circuit();
    let v = circ.objective_with_gradient(x, spec).unwrap();
    let f = |x: &[f64]| objective::fidelity(&ansatz_unitary(ansatz, x).unwrap(), spec).unwrap();
    let h = 1e-6;
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let fd = (f(&xp) - f(&xm)) / (2.0 * h);
        // relative to max(|fd|, 1e-3): below that the difference quotient
        // itself carries ~1e-10 absolute noise
        worst = worst.max((fd - v.gradient[i]).abs() / fd.abs().max(1e-3));
    }
    worst
}

// --------------------------------------------------------------- criteria

fn criterion_1(_: &mut Shared) -> Verdict {
    let mut s = RandomStream::new(mix_seed(&[SUITE_SEED, 1]));
    let modes = [
        LocalMode::Exact,
        LocalMode::ModCollectiveZ,
        LocalMode::ModIndependentZ,
    ];
    let mut worst = 0.0_f64;
    let mut bound_violations = 0;
    let mut cases = 0;
    for i in 0..500 {
        let n = 1 + i % 5;
        let target = LocalUnitary::new(random_su2_factors(n, &mut s)).unwrap();
        let normalized = target.su2_normalized().matrix();
        let order: Vec<usize> = (0..n).collect();
        for mode in modes {
            let r = compile_local(&target, mode, &order).unwrap();
            let rebuilt = linalg::tensor_factors(&r.reconstructed_factors());
            worst = worst.max(oracle_deficit(&rebuilt, &normalized));
            let (max_c, max_z) = match mode {
                LocalMode::Exact => (n + 1, n - 1),
                LocalMode::ModCollectiveZ => (n, n - 1),
                LocalMode::ModIndependentZ => (n / 2 + 1, n - 1),
            };
            if r.sequence.count_collective() > max_c
                || r.sequence.count_addressed() > max_z
                || r.sequence.count_ms() > 0
            {
                bound_violations += 1;
            }
            cases += 1;
        }
    }
    verdict(
        worst < 1e-9 && bound_violations == 0,
        format!("{cases} compilations, worst deficit {worst:.2e}, {bound_violations} pulse-bound violations"),
    )
}

fn criterion_2(shared: &mut Shared) -> Verdict {
    let mut problems = Vec::new();
    let mut worst = 0.0_f64;
    for (i, t) in two_qubit_targets().into_iter().enumerate() {
        let spec = TargetSpec::full(t.clone()).unwrap();
        let cfg = SearchConfig {
            master_seed: i as u64,
            ..SearchConfig::default()
        };
        let r = compile(&spec, 2, &cfg).unwrap();
        let physical = oracle_deficit(&sequence_unitary(&r.sequence).unwrap(), &t);
        worst = worst.max(r.deficit);
        let lower_failed = r
            .rounds
            .iter()
            .filter(|x| x.m < 3)
            .all(|x| !x.success && x.restarts == 200)
            && r.rounds.iter().filter(|x| x.m < 3).count() == 3;
        if !(r.success && r.m == 3 && lower_failed && r.deficit <= 1e-9 && physical <= 1e-8) {
            problems.push(format!(
                "target {i}: M={} success={} deficit {:.1e}",
                r.m, r.success, r.deficit
            ));
        }
        shared.saturating_restarts.push(r.restarts_used);
        shared.two_qubit.push((t, r));
    }
    let ms: Vec<usize> = shared.two_qubit.iter().map(|(_, r)| r.m).collect();
    verdict(
        problems.is_empty(),
        format!(
            "M found {:?}; M=0..2 failed with 200 restarts each; worst polished deficit {worst:.1e}{}",
            ms,
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn criterion_3(shared: &mut Shared) -> Verdict {
    let smoke = std::env::var("ACCEPTANCE_SMOKE").is_ok();
    let (targets, restarts_m7) = if smoke { (2, 50) } else { (5, 200) };
    let mut s = RandomStream::new(mix_seed(&[SUITE_SEED, 3]));
    let mut lines = Vec::new();
    let mut pass = true;
    for i in 0..targets {
        let t = haar_unitary(8, &mut s);
        let spec = TargetSpec::full(t.clone()).unwrap();
        let cfg = SearchConfig {
            master_seed: 100 + i as u64,
            ..SearchConfig::default()
        };
        let hit = repeated_local_search(&build_ansatz(3, 8, Template::Paper), &spec, &cfg).unwrap();
        let physical = emit_physical(&build_ansatz(3, 8, Template::Paper), &hit.best.params)
            .and_then(|seq| sequence_unitary(&seq))
            .map(|u| oracle_deficit(&u, &t))
            .unwrap_or(1.0);
        let miss_cfg = SearchConfig {
            max_restarts: restarts_m7,
            ..cfg
        };
        let miss =
            repeated_local_search(&build_ansatz(3, 7, Template::Paper), &spec, &miss_cfg).unwrap();
        let ok = hit.success && hit.best.deficit <= 1e-9 && physical <= 1e-8 && !miss.success;
        pass &= ok;
        if hit.success {
            shared.saturating_restarts.push(hit.restarts_used);
        }
        lines.push(format!(
            "M=8 {} after {} ({:.0e}), M=7 best {:.1e}",
            if hit.success { "hit" } else { "MISS" },
            hit.restarts_used,
            hit.best.deficit,
            miss.best.deficit
        ));
    }
    verdict(
        pass,
        format!(
            "{}{targets} targets, {restarts_m7} restarts at M=7: {}",
            if smoke { "smoke: " } else { "" },
            lines.join("; ")
        ),
    )
}

fn criterion_4(shared: &mut Shared) -> Verdict {
    let mut r = shared.saturating_restarts.clone();
    if r.is_empty() {
        return verdict(
            false,
            "no successful runs recorded (criteria 2 and 3 must run first)",
        );
    }
    r.sort_unstable();
    let median = if r.len() % 2 == 1 {
        r[r.len() / 2] as f64
    } else {
        0.5 * (r[r.len() / 2 - 1] + r[r.len() / 2]) as f64
    };
    verdict(
        median == 1.0,
        format!("median restarts {median} over {} runs {:?}", r.len(), r),
    )
}

fn criterion_5(shared: &mut Shared) -> Verdict {
    let cfg = SearchConfig {
        master_seed: 5,
        ..SearchConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, oracle, want, n_spec) in [
        (
            "Toffoli",
            oracle_toffoli(),
            3,
            ms_compiler::targets::toffoli(),
        ),
        (
            "Fredkin",
            oracle_fredkin(),
            4,
            ms_compiler::targets::fredkin(),
        ),
    ] {
        let r = compile(&TargetSpec::full(n_spec).unwrap(), 3, &cfg).unwrap();
        let physical = oracle_deficit(&sequence_unitary(&r.sequence).unwrap(), &oracle);
        let ok = r.success && r.m == want && physical <= 1e-8;
        pass &= ok;
        parts.push(format!(
            "{name} M={} ({} pulses) deficit {physical:.1e} in {:.1} s",
            r.m,
            r.sequence.len(),
            r.wall_time
        ));
        if name == "Toffoli" {
            shared.toffoli = Some(r);
        }
    }
    verdict(pass, parts.join("; "))
}

fn phased_from(t: &CMatrix, split: &[Vec<usize>]) -> TargetSpec {
    TargetSpec::phased(
        split
            .iter()
            .map(|idx| SubspaceBlock {
                block: select_columns(t, idx).unwrap(),
                indices: idx.clone(),
            })
            .collect(),
    )
    .unwrap()
}

fn criterion_6(shared: &mut Shared) -> Verdict {
    let cfg = SearchConfig {
        master_seed: 6,
        ..SearchConfig::default()
    };
    let toffoli = oracle_toffoli();
    let spec = phased_from(&toffoli, &[vec![0, 1, 2], vec![3]]);
    let r = compile(&spec, 3, &cfg).unwrap();
    let u = sequence_unitary(&r.sequence).unwrap();
    // per-block overlaps, each with its own phase
    let worst_block = [vec![0usize, 1, 2], vec![3]]
        .iter()
        .map(|idx| {
            let mut acc = c(0.0, 0.0);
            for &k in idx {
                for row in 0..8 {
                    acc += toffoli[(row, k)].conj() * u[(row, k)];
                }
            }
            acc.norm() / idx.len() as f64
        })
        .fold(1.0_f64, f64::min);
    let full = shared
        .toffoli
        .clone()
        .unwrap_or_else(|| compile(&TargetSpec::full(toffoli.clone()).unwrap(), 3, &cfg).unwrap());
    let mut pass =
        r.success && r.m <= 3 && worst_block * worst_block >= 1.0 - 1e-8 && r.m <= full.m;

    // phased targets never need more MS gates than the full unitary
    let mut s = RandomStream::new(mix_seed(&[SUITE_SEED, 6]));
    let mut pairs = Vec::new();
    for i in 0..4 {
        let t = haar_unitary(4, &mut s);
        let c2 = SearchConfig {
            master_seed: 60 + i,
            ..SearchConfig::default()
        };
        let rf = compile(&TargetSpec::full(t.clone()).unwrap(), 2, &c2).unwrap();
        let rp = compile(&phased_from(&t, &[vec![0, 1], vec![2, 3]]), 2, &c2).unwrap();
        pass &= rf.success && rp.success && rp.m <= rf.m;
        pairs.push(format!("{}≤{}", rp.m, rf.m));
    }
    verdict(
        pass,
        format!(
            "measured Toffoli: M={} with {} pulses, block fidelity {:.10}; full Toffoli: M={} with {} pulses; random 2-qubit phased≤full: {}",
            r.m,
            r.sequence.len(),
            worst_block * worst_block,
            full.m,
            full.sequence.len(),
            pairs.join(", ")
        ),
    )
}

fn criterion_7(_: &mut Shared) -> Verdict {
    let mut s = RandomStream::new(mix_seed(&[SUITE_SEED, 7]));
    let mut worst = 0.0_f64;
    let mut points = 0;
    while points < 100 {
        for n in 1..=3usize {
            for m in 0..=2usize {
                for kind in 0..3 {
                    let d = 1 << n;
                    let template = if points % 2 == 0 {
                        Template::Paper
                    } else {
                        Template::Full
                    };
                    let a = build_ansatz(n, m, template);
                    let t = haar_unitary(d, &mut s);
                    let spec = match kind {
                        0 => TargetSpec::full(t).unwrap(),
                        1 => TargetSpec::columns_of(&t, &[0, d - 1]).unwrap(),
                        _ if n == 1 => phased_from(&t, &[vec![0], vec![1]]),
                        _ => phased_from(&t, &[vec![0, 1], vec![d - 1]]),
                    };
                    let x: Vec<f64> = (0..a.n_params())
                        .map(|_| PI * (2.0 * s.uniform() - 1.0))
                        .collect();
                    worst = worst.max(max_rel_fd_error(&a, &spec, &x));
                    points += 1;
                }
            }
        }
    }
    verdict(
        worst < 1e-6,
        format!("{points} points, max relative error {worst:.2e}"),
    )
}

fn criterion_8(_: &mut Shared) -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for n in 1..=4 {
        let ms = ms_x_unitary(n, PI);
        let expect = if n % 2 == 1 {
            linalg::identity(1 << n)
        } else {
            pulse_unitary(&Pulse::collective(PI, 0.0), n).unwrap()
        };
        let d = oracle_deficit(&ms, &expect);
        pass &= d < 1e-12;
        notes.push(format!("N={n} {:.0e}", d));
    }
    let mut s = RandomStream::new(mix_seed(&[SUITE_SEED, 8]));
    let mut worst_exp = 0.0_f64;
    for trial in 0..20 {
        let n = 1 + trial % 4;
        let theta = PI * (2.0 * s.uniform() - 1.0);
        let phi = PI * (2.0 * s.uniform() - 1.0);
        worst_exp = worst_exp.max(linalg::max_abs_diff(
            &ms_unitary(n, theta, phi),
            &brute_force_ms(n, theta, phi),
        ));
    }
    pass &= worst_exp < 1e-10;

    let mut worst_embed = 0.0_f64;
    let mut seq3 = PulseSequence::new(3);
    seq3.push(Pulse::collective(0.3, 1.1));
    seq3.push(Pulse::ms(0.7, -0.4));
    seq3.push(Pulse::z(2, 0.9));
    worst_embed = worst_embed.max(linalg::max_abs_diff(
        &embed_on_subset(&seq3, &[1, 2, 3], 3).unwrap(),
        &sequence_unitary(&seq3).unwrap(),
    ));
    let ms2 = PulseSequence::from_pulses(2, vec![Pulse::ms(PI / 2.0, 0.0)]);
    worst_embed = worst_embed.max(linalg::max_abs_diff(
        &embed_on_subset(&ms2, &[1, 2], 3).unwrap(),
        &linalg::identity(2).kronecker(&brute_force_ms(2, PI / 2.0, 0.0)),
    ));
    let rot = PulseSequence::from_pulses(1, vec![Pulse::collective(0.8, 0.25)]);
    let r2 = pulse_unitary(&Pulse::collective(0.8, 0.25), 1).unwrap();
    worst_embed = worst_embed.max(linalg::max_abs_diff(
        &embed_on_subset(&rot, &[2], 2).unwrap(),
        &r2.kronecker(&linalg::identity(2)),
    ));
    pass &= worst_embed < 1e-12;
    verdict(
        pass,
        format!(
            "MS(π) deficits [{}]; closed form vs exponential {worst_exp:.1e}; embedding {worst_embed:.1e}",
            notes.join(", ")
        ),
    )
}

fn clifford_run(seed: u64, checked: &AtomicUsize) -> Vec<BenchRecord> {
    let cfg = SearchConfig {
        max_entangling: 3,
        ..SearchConfig::default()
    };
    run_bench(100, 2, "clifford", seed, &cfg, |s| {
        let u = random_clifford(2, ms_compiler::sampler::default_clifford_steps(2), s);
        if is_clifford(&u, 1e-8) {
            checked.fetch_add(1, Ordering::Relaxed);
        }
        TargetSpec::full(u)
    })
    .unwrap()
}

fn criterion_9(_: &mut Shared) -> Verdict {
    let checked = AtomicUsize::new(0);
    let a = clifford_run(SUITE_SEED, &checked);
    let b = clifford_run(SUITE_SEED, &AtomicUsize::new(0));
    let strip = |rs: &[BenchRecord]| -> Vec<BenchRecord> {
        rs.iter()
            .map(|r| BenchRecord {
                wall_time: 0.0,
                ..r.clone()
            })
            .collect()
    };
    let hist = m_histogram(&a);
    let all_compiled = a.iter().all(|r| r.success);
    let supported = hist.iter().all(|bin| bin.m <= 3);
    let deterministic = strip(&a) == strip(&b) && hist == m_histogram(&b);
    let n_checked = checked.load(Ordering::Relaxed);
    verdict(
        n_checked == 100 && all_compiled && supported && deterministic,
        format!(
            "{n_checked}/100 Clifford, histogram {:?}, repeat identical: {deterministic}",
            hist.iter().map(|b| (b.m, b.count)).collect::<Vec<_>>()
        ),
    )
}

fn criterion_10(shared: &mut Shared) -> Verdict {
    let spec = TargetSpec::full(oracle_toffoli()).unwrap();
    let cfg = SearchConfig {
        master_seed: 10,
        ..SearchConfig::default()
    };
    let compiled = match &shared.toffoli {
        Some(r) => r.clone(),
        None => compile(&spec, 3, &cfg).unwrap(),
    };
    let model = ErrorModel::uniform_crosstalk(3, 0.05);
    let basis = |seq: &PulseSequence| -> Vec<f64> {
        let u = apply_model(seq, &model).unwrap();
        let t = oracle_toffoli();
        (0..8)
            .map(|k| {
                let mut acc = c(0.0, 0.0);
                for r in 0..8 {
                    acc += t[(r, k)].conj() * u[(r, k)];
                }
                acc.norm_sqr()
            })
            .collect()
    };
    let before = basis(&compiled.sequence);
    let full_before = oracle_deficit(
        &apply_model(&compiled.sequence, &model).unwrap(),
        &oracle_toffoli(),
    );

    let approx = compensate(
        &compiled.sequence,
        &model,
        &spec,
        &cfg,
        CompensationMode::Approximate,
        2,
    )
    .unwrap();
    let after = basis(&approx.compensated);
    let degraded: Vec<usize> = (0..8).filter(|&k| before[k] < 1.0 - 1e-12).collect();
    let improved = degraded.iter().all(|&k| after[k] > before[k]);
    let added = approx.compensated.len() as isize - compiled.sequence.len() as isize;

    let exact = compensate(
        &compiled.sequence,
        &model,
        &spec,
        &cfg,
        CompensationMode::Exact,
        2,
    )
    .unwrap();
    let exact_deficit = oracle_deficit(
        &apply_model(&exact.compensated, &model).unwrap(),
        &oracle_toffoli(),
    );
    let min_gain = degraded
        .iter()
        .map(|&k| after[k] - before[k])
        .fold(f64::INFINITY, f64::min);
    verdict(
        full_before > 0.0 && !degraded.is_empty() && improved && added <= 4 && exact_deficit <= 1e-6,
        format!(
            "uncompensated deficit {full_before:.4}; approximate: {} pulses added, {}/{} degraded inputs improved (smallest gain {min_gain:.1e}); exact: deficit {exact_deficit:.1e}",
            added,
            degraded.iter().filter(|&&k| after[k] > before[k]).count(),
            degraded.len()
        ),
    )
}

fn criterion_11(shared: &mut Shared) -> Verdict {
    let targets: Vec<CMatrix> = if shared.two_qubit.is_empty() {
        two_qubit_targets()
    } else {
        shared.two_qubit.iter().map(|(t, _)| t.clone()).collect()
    };
    let run = |threads: usize| -> Vec<CompileReport> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            targets
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let cfg = SearchConfig {
                        master_seed: i as u64,
                        ..SearchConfig::default()
                    };
                    compile(&TargetSpec::full(t.clone()).unwrap(), 2, &cfg).unwrap()
                })
                .collect()
        })
    };
    let mut reference: Vec<CompileReport> =
        shared.two_qubit.iter().map(|(_, r)| r.clone()).collect();
    if reference.is_empty() {
        reference = run(rayon::current_num_threads());
    }
    let mut mismatches = 0;
    let counts = [1usize, 2, 4];
    for &threads in &counts {
        for (a, b) in reference.iter().zip(run(threads)) {
            if !a.same_result(&b) {
                mismatches += 1;
            }
        }
    }
    verdict(
        mismatches == 0,
        format!(
            "{} reports compared against pools of {:?} threads, {mismatches} mismatches",
            reference.len(),
            counts
        ),
    )
}

type Criterion = fn(&mut Shared) -> Verdict;

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(u32, &str, Duration, Criterion); 11] = [
        (
            1,
            "local compiler exactness",
            Duration::from_secs(30),
            criterion_1,
        ),
        (
            2,
            "two-qubit saturation at M=3",
            Duration::from_secs(600),
            criterion_2,
        ),
        (
            3,
            "three-qubit saturation at M=8",
            Duration::from_secs(7200),
            criterion_3,
        ),
        (4, "median restarts", Duration::from_secs(1), criterion_4),
        (
            5,
            "Toffoli M=3, Fredkin M=4",
            Duration::from_secs(1800),
            criterion_5,
        ),
        (
            6,
            "isometry compilation",
            Duration::from_secs(1800),
            criterion_6,
        ),
        (
            7,
            "gradient vs finite differences",
            Duration::from_secs(60),
            criterion_7,
        ),
        (8, "gate algebra", Duration::from_secs(10), criterion_8),
        (9, "Clifford bench", Duration::from_secs(3600), criterion_9),
        (
            10,
            "crosstalk compensation",
            Duration::from_secs(600),
            criterion_10,
        ),
        (
            11,
            "determinism across worker counts",
            Duration::from_secs(1800),
            criterion_11,
        ),
    ];
    let mut shared = Shared::default();
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let started = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(|| run(&mut shared)))
            .unwrap_or_else(|_| verdict(false, "panicked"));
        let elapsed = started.elapsed();
        let in_time = elapsed <= budget;
        let pass = v.pass && in_time;
        println!(
            "criterion {id:>2} {}: {name} ({:.1} s{}) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time {
                String::new()
            } else {
                format!(", over the {} s budget", budget.as_secs())
            },
            v.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
