//! Command-line front end for the `msc` binary: argument parsing, file I/O,
//! dispatch and the benchmark harness.
//!
//! Exit codes: 0 on success, 1 when compilation (or verification, or exact
//! compensation) fails, 2 on I/O and validation errors.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::ansatz::Template;
use crate::errcomp::{self, CompensationMode, CompensationReport};
use crate::gateset::sequence_unitary;
use crate::io;
use crate::linalg::CMatrix;
use crate::localcomp::{self, LocalMode, Residual};
use crate::objective::{self, TargetSpec};
use crate::optimizer::{compile, CompileReport, SearchConfig, VERIFY_DEFICIT};
use crate::sampler::{self, RandomStream};
use crate::targets;
use crate::{Error, Result};

/// Registers this large need `--extended`.
const EXTENDED_QUBITS: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "msc",
    version,
    about = "Compile unitaries into collective, addressed-Z and MS pulse sequences"
)]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "MSC_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a target with the fewest MS gates found.
    Compile(CompileArgs),
    /// Compile a local (tensor-product) unitary without entangling gates.
    CompileLocal(CompileLocalArgs),
    /// Check a sequence against a target.
    Verify(VerifyArgs),
    /// Print the unitary of a sequence.
    Simulate(SimulateArgs),
    /// Draw a Haar-random unitary.
    SampleHaar(SampleArgs),
    /// Draw a random Clifford by a generator random walk.
    SampleClifford(SampleCliffordArgs),
    /// Add correction pulses against a coherent error model.
    Compensate(CompensateArgs),
    /// Time Haar-random compilations at the saturating MS count.
    BenchScaling(BenchScalingArgs),
    /// Histogram of minimal MS counts for random Cliffords.
    BenchClifford(BenchCliffordArgs),
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Target file: unitary JSON or target-spec JSON.
    #[arg(long, conflicts_with = "gate")]
    pub target: Option<PathBuf>,

    /// Built-in target: cnot, toffoli, fredkin, toffoli-measure, identity<N>.
    #[arg(long)]
    pub gate: Option<String>,
}

impl TargetArgs {
    fn load(&self) -> Result<TargetSpec> {
        match (&self.target, &self.gate) {
            (Some(path), _) => io::read_spec(path),
            (None, Some(name)) => named_spec(name),
            (None, None) => Err(Error::InvalidSpec(
                "one of --target or --gate is required".into(),
            )),
        }
    }
}

fn named_spec(name: &str) -> Result<TargetSpec> {
    if matches!(name, "toffoli-measure" | "toffoli_measure") {
        return Ok(targets::toffoli_measurement_spec());
    }
    let u =
        targets::named(name).ok_or_else(|| Error::InvalidSpec(format!("unknown gate `{name}`")))?;
    TargetSpec::full(u)
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub target: TargetArgs,

    /// Register size; inferred from the target when omitted.
    #[arg(long)]
    pub qubits: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Restarts per MS count.
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,

    #[arg(long, default_value_t = 0)]
    pub min_ms: usize,

    #[arg(long, default_value_t = 30)]
    pub max_ms: usize,

    /// Deficit at which a restart counts as a hit.
    #[arg(long, default_value_t = 1e-4)]
    pub deficit: f64,

    #[arg(long, default_value = "paper")]
    pub template: Template,

    /// Show which MS angles sit on the k·π/8 grid.
    #[arg(long)]
    pub snap_grid: bool,

    /// Allow registers of four or more qubits.
    #[arg(long)]
    pub extended: bool,

    /// Write the pulse sequence here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileLocalArgs {
    /// Unitary JSON of a tensor-product unitary.
    #[arg(long, conflicts_with = "basis")]
    pub target: Option<PathBuf>,

    /// Measurement setting, one Pauli letter per qubit (e.g. XYZ).
    #[arg(long)]
    pub basis: Option<String>,

    #[arg(long, default_value = "exact")]
    pub mode: LocalMode,

    /// Search over orderings of the distinct factors.
    #[arg(long)]
    pub permute: bool,

    /// Permit the ordering search above its size limit.
    #[arg(long)]
    pub force: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub sequence: PathBuf,

    #[command(flatten)]
    pub target: TargetArgs,

    #[arg(long)]
    pub qubits: Option<usize>,

    /// Largest accepted deficit.
    #[arg(long, default_value_t = VERIFY_DEFICIT)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub sequence: PathBuf,

    #[arg(long)]
    pub qubits: Option<usize>,

    /// Write the unitary JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub qubits: usize,

    #[arg(long)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleCliffordArgs {
    #[command(flatten)]
    pub sample: SampleArgs,

    /// Walk length (default 10·N⁸).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompensateArgs {
    #[arg(long)]
    pub sequence: PathBuf,

    /// Error-model JSON.
    #[arg(long)]
    pub model: PathBuf,

    #[command(flatten)]
    pub target: TargetArgs,

    #[arg(long, default_value = "approx")]
    pub mode: CompensationMode,

    /// Correction pulses at each end.
    #[arg(long, default_value_t = 2)]
    pub budget: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchScalingArgs {
    /// Register sizes, e.g. `2`, `2..3` or `2-3`.
    #[arg(long, default_value = "2..3")]
    pub qubits: String,

    #[arg(long, default_value_t = 20)]
    pub samples: usize,

    #[arg(long, required = true)]
    pub seed: Option<u64>,

    #[arg(long, default_value_t = 200)]
    pub restarts: usize,

    /// Escalate from zero MS gates instead of starting at the saturating count.
    #[arg(long)]
    pub escalate: bool,

    #[arg(long)]
    pub extended: bool,

    /// Per-task CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// SVG chart of median wall time per register size.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchCliffordArgs {
    #[arg(long, default_value_t = 2)]
    pub qubits: usize,

    #[arg(long, default_value_t = 100)]
    pub samples: usize,

    #[arg(long, required = true)]
    pub seed: Option<u64>,

    /// Walk length (default 10·N⁸).
    #[arg(long)]
    pub steps: Option<usize>,

    #[arg(long, default_value_t = 200)]
    pub restarts: usize,

    #[arg(long)]
    pub extended: bool,

    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// SVG histogram.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// One benchmark task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub task: usize,
    pub qubits: usize,
    /// `haar`, `clifford` or `named`.
    pub class: String,
    pub success: bool,
    /// MS count found (the last tried on failure).
    pub m: usize,
    pub deficit: f64,
    pub restarts: usize,
    pub wall_time: f64,
    /// Seed for both the target draw and the compilation.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub qubits: usize,
    pub m: usize,
    pub samples: usize,
    pub successes: usize,
    pub mean_wall_time: f64,
    pub median_wall_time: f64,
    pub mean_restarts: f64,
    pub median_restarts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub m: usize,
    pub count: usize,
    pub fraction: f64,
    /// One standard deviation of the fraction (binomial).
    pub std_dev: f64,
}

/// Known MS count at which Haar-random targets always compile.
pub fn saturating_m(n_qubits: usize) -> Option<usize> {
    match n_qubits {
        1 => Some(0),
        2 => Some(3),
        3 => Some(8),
        4 => Some(25),
        _ => None,
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Run `tasks` targets through `compile`; records come back in task order.
pub fn run_bench<F>(
    tasks: usize,
    qubits: usize,
    class: &str,
    seed: u64,
    cfg: &SearchConfig,
    target: F,
) -> Result<Vec<BenchRecord>>
where
    F: Fn(&mut RandomStream) -> Result<TargetSpec> + Sync,
{
    (0..tasks)
        .into_par_iter()
        .map(|task| {
            let task_seed = sampler::mix_seed(&[seed, qubits as u64, task as u64]);
            let spec = target(&mut RandomStream::new(task_seed))?;
            let cfg = SearchConfig {
                master_seed: task_seed,
                ..cfg.clone()
            };
            let report = compile(&spec, qubits, &cfg)?;
            Ok(BenchRecord {
                task,
                qubits,
                class: class.to_string(),
                success: report.success,
                m: report.m,
                deficit: report.deficit,
                restarts: report.restarts_used,
                wall_time: report.wall_time,
                seed: task_seed,
            })
        })
        .collect()
}

pub fn summarize_scaling(records: &[BenchRecord]) -> Vec<ScalingSummary> {
    let mut by_n: BTreeMap<usize, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.qubits).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let mut times: Vec<f64> = rs.iter().map(|r| r.wall_time).collect();
            let mut restarts: Vec<f64> = rs.iter().map(|r| r.restarts as f64).collect();
            ScalingSummary {
                qubits: n,
                m: rs.iter().map(|r| r.m).max().unwrap_or(0),
                samples: rs.len(),
                successes: rs.iter().filter(|r| r.success).count(),
                mean_wall_time: mean(&times),
                median_wall_time: median(&mut times),
                mean_restarts: mean(&restarts),
                median_restarts: median(&mut restarts),
            }
        })
        .collect()
}

/// Histogram of `m` over successful records, with binomial error bars.
pub fn m_histogram(records: &[BenchRecord]) -> Vec<HistogramBin> {
    let hits: Vec<usize> = records.iter().filter(|r| r.success).map(|r| r.m).collect();
    let Some(&top) = hits.iter().max() else {
        return Vec::new();
    };
    let n = hits.len() as f64;
    (0..=top)
        .map(|m| {
            let count = hits.iter().filter(|&&x| x == m).count();
            let p = count as f64 / n;
            HistogramBin {
                m,
                count,
                fraction: p,
                std_dev: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect()
}

pub fn parse_qubit_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidSpec(format!("bad qubit range `{s}`"));
    let (lo, hi) = match s.split_once("..").or_else(|| s.split_once('-')) {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn require_extended(n: usize, extended: bool) -> Result<()> {
    if n >= EXTENDED_QUBITS && !extended {
        return Err(Error::InvalidSpec(format!(
            "{n}-qubit runs take hours; pass --extended to allow them"
        )));
    }
    Ok(())
}

fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Minimal SVG bar chart with optional error bars.
pub fn svg_bars(title: &str, x_label: &str, bars: &[(String, f64, f64)]) -> String {
    let (w, h, pad) = (480.0, 300.0, 40.0);
    let top = bars
        .iter()
        .map(|b| b.1 + b.2)
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let slot = (w - 2.0 * pad) / bars.len().max(1) as f64;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        w / 2.0,
        w / 2.0,
        h - 5.0,
        h - pad,
        w - pad,
        h - pad
    );
    for (i, (label, v, err)) in bars.iter().enumerate() {
        let scale = (h - 2.0 * pad) / top;
        let x = pad + slot * (i as f64 + 0.15);
        let bw = slot * 0.7;
        let y = h - pad - v * scale;
        s += &format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bw:.1}\" height=\"{:.1}\" fill=\"steelblue\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{v:.3}</text>\n",
            v * scale,
            x + bw / 2.0,
            h - pad + 15.0,
            x + bw / 2.0,
            y - 4.0 - err * scale,
        );
        if *err > 0.0 {
            let cx = x + bw / 2.0;
            s += &format!(
                "<line x1=\"{cx:.1}\" y1=\"{:.1}\" x2=\"{cx:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
                y - err * scale,
                y + err * scale
            );
        }
    }
    s + "</svg>\n"
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Error::InvalidSpec(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Run the parsed command; `Ok(false)` means a reported failure (exit 1).
pub fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Compile(a) => cmd_compile(a, cli.json),
        Command::CompileLocal(a) => cmd_compile_local(a, cli.json),
        Command::Verify(a) => cmd_verify(a, cli.json),
        Command::Simulate(a) => cmd_simulate(a, cli.json),
        Command::SampleHaar(a) => cmd_sample(a, None, cli.json),
        Command::SampleClifford(a) => cmd_sample(&a.sample, Some(a.steps), cli.json),
        Command::Compensate(a) => cmd_compensate(a, cli.json),
        Command::BenchScaling(a) => cmd_bench_scaling(a, cli.json),
        Command::BenchClifford(a) => cmd_bench_clifford(a, cli.json),
    }
}

fn spec_qubits(spec: &TargetSpec, qubits: Option<usize>) -> Result<usize> {
    let inferred = spec.n_qubits()?;
    match qubits {
        Some(n) if n != inferred => Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: spec.dim(),
        }),
        _ => Ok(inferred),
    }
}

fn cmd_compile(a: &CompileArgs, json: bool) -> Result<bool> {
    let spec = a.target.load()?;
    let n = spec_qubits(&spec, a.qubits)?;
    require_extended(n, a.extended)?;
    let cfg = SearchConfig {
        master_seed: a.seed,
        max_restarts: a.restarts,
        success_deficit: a.deficit,
        min_entangling: a.min_ms,
        max_entangling: a.max_ms,
        template: a.template,
        ..SearchConfig::default()
    };
    let report = compile(&spec, n, &cfg)?;
    if let Some(path) = &a.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    if report.success {
        if let Some(path) = &a.out {
            io::write_sequence(path, &report.sequence)?;
        }
    }
    if json {
        emit_json(&report)?;
    } else {
        print_compile_summary(&report, a.snap_grid);
        if report.success && a.out.is_none() {
            print!("{}", io::format_sequence(&report.sequence));
        }
    }
    Ok(report.success)
}

fn print_compile_summary(r: &CompileReport, snap_grid: bool) {
    for round in &r.rounds {
        eprintln!(
            "M={:<3} restarts {:>4}  best deficit {:.3e}{}",
            round.m,
            round.restarts,
            round.best_deficit,
            if round.success { "  ok" } else { "" }
        );
    }
    if !r.success {
        eprintln!(
            "no sequence found within the MS budget ({:.2} s)",
            r.wall_time
        );
        return;
    }
    eprintln!(
        "compiled with {} MS gates, {} pulses; deficit {:.3e} (sequence {:.3e}); {} restarts; {:.2} s",
        r.m,
        r.sequence.len(),
        r.deficit,
        r.physical_deficit,
        r.restarts_used,
        r.wall_time
    );
    if snap_grid {
        let grid: Vec<String> = r
            .snapped_ms_grid
            .iter()
            .map(|k| k.map_or("-".to_string(), |k| format!("{k}π/8")))
            .collect();
        eprintln!("MS angles on the π/8 grid: [{}]", grid.join(", "));
    }
}

fn cmd_compile_local(a: &CompileLocalArgs, json: bool) -> Result<bool> {
    let target = match (&a.target, &a.basis) {
        (Some(path), _) => localcomp::factor_local(&io::read_unitary(path)?)?,
        (None, Some(bases)) => localcomp::tomography_setting(bases)?,
        (None, None) => {
            return Err(Error::InvalidSpec(
                "one of --target or --basis is required".into(),
            ))
        }
    };
    let result = localcomp::group_and_compile(&target, a.mode, a.permute, a.force)?;
    if let Some(path) = &a.out {
        io::write_sequence(path, &result.sequence)?;
    }
    let (kind, angles) = match &result.residual {
        Residual::None => ("none", Vec::new()),
        Residual::CollectiveZ(r) => ("collective-z", vec![*r]),
        Residual::IndependentZ(rs) => ("independent-z", rs.clone()),
    };
    if json {
        emit_json(&json!({
            "sequence": result.sequence.normalized(),
            "collective": result.sequence.count_collective(),
            "addressed": result.sequence.count_addressed(),
            "discarded_global_phase": result.discarded_global_phase,
            "residual": { "kind": kind, "angles": angles },
        }))?;
    } else {
        eprintln!(
            "{} collective, {} addressed pulses; residual {kind} {:?}; global phase {:.6}",
            result.sequence.count_collective(),
            result.sequence.count_addressed(),
            angles,
            result.discarded_global_phase
        );
        if a.out.is_none() {
            print!("{}", io::format_sequence(&result.sequence));
        }
    }
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs, json: bool) -> Result<bool> {
    let spec = a.target.load()?;
    let n = spec_qubits(&spec, a.qubits)?;
    let seq = io::read_sequence(&a.sequence, Some(n))?;
    let u = sequence_unitary(&seq)?;
    let fidelity = objective::fidelity(&u, &spec)?;
    let deficit = 1.0 - fidelity;
    let pass = deficit <= a.tol;
    if json {
        emit_json(&json!({
            "fidelity": fidelity,
            "deficit": deficit,
            "tol": a.tol,
            "pass": pass,
            "ms_gates": seq.count_ms(),
            "pulses": seq.len(),
        }))?;
    } else {
        println!(
            "deficit {deficit:.3e} ({} pulses, {} MS): {}",
            seq.len(),
            seq.count_ms(),
            if pass { "pass" } else { "FAIL" }
        );
    }
    Ok(pass)
}

fn format_matrix(u: &CMatrix) -> String {
    let mut s = String::new();
    for r in 0..u.nrows() {
        let row: Vec<String> = (0..u.ncols())
            .map(|c| format!("{:+.6}{:+.6}i", u[(r, c)].re, u[(r, c)].im))
            .collect();
        s += &row.join("  ");
        s.push('\n');
    }
    s
}

fn cmd_simulate(a: &SimulateArgs, json: bool) -> Result<bool> {
    let seq = io::read_sequence(&a.sequence, a.qubits)?;
    let u = sequence_unitary(&seq)?;
    if let Some(path) = &a.out {
        io::write_unitary(path, &u)?;
    }
    if json {
        println!("{}", io::unitary_to_json(&u)?);
    } else if a.out.is_none() {
        print!("{}", format_matrix(&u));
    }
    Ok(true)
}

fn cmd_sample(a: &SampleArgs, clifford_steps: Option<Option<usize>>, json: bool) -> Result<bool> {
    if a.qubits == 0 || a.qubits > 6 {
        return Err(Error::InvalidSpec(format!(
            "cannot sample {} qubits",
            a.qubits
        )));
    }
    let mut stream = RandomStream::new(a.seed);
    let u = match clifford_steps {
        None => sampler::haar_unitary(1 << a.qubits, &mut stream),
        Some(steps) => {
            let steps = steps.unwrap_or_else(|| sampler::default_clifford_steps(a.qubits));
            sampler::random_clifford(a.qubits, steps, &mut stream)
        }
    };
    match &a.out {
        Some(path) => io::write_unitary(path, &u)?,
        None => println!("{}", io::unitary_to_json(&u)?),
    }
    if !json && a.out.is_some() {
        eprintln!("wrote {}-qubit unitary", a.qubits);
    }
    Ok(true)
}

fn cmd_compensate(a: &CompensateArgs, json: bool) -> Result<bool> {
    let spec = a.target.load()?;
    let n = spec.n_qubits()?;
    let seq = io::read_sequence(&a.sequence, Some(n))?;
    let model = io::read_model(&a.model)?;
    let cfg = SearchConfig {
        master_seed: a.seed,
        ..SearchConfig::default()
    };
    let report = errcomp::compensate(&seq, &model, &spec, &cfg, a.mode, a.budget)?;
    if let Some(path) = &a.out {
        io::write_sequence(path, &report.compensated)?;
    }
    if json {
        emit_json(&report)?;
    } else {
        print_compensation(&report);
        if a.out.is_none() {
            print!("{}", io::format_sequence(&report.compensated));
        }
    }
    Ok(a.mode == CompensationMode::Approximate || report.success)
}

fn print_compensation(r: &CompensationReport) {
    eprintln!(
        "fidelity {:.6} -> {:.6}, {} pulses added",
        r.fidelity_before, r.fidelity_after, r.pulses_added
    );
    for ((input, before), (_, after)) in r.basis_before.iter().zip(&r.basis_after) {
        eprintln!("  input {input:>3}: {before:.6} -> {after:.6}");
    }
}

fn cmd_bench_scaling(a: &BenchScalingArgs, json: bool) -> Result<bool> {
    let seed = a.seed.expect("clap enforces --seed");
    let sizes = parse_qubit_range(&a.qubits)?;
    let mut records = Vec::new();
    for &n in &sizes {
        require_extended(n, a.extended)?;
        let m = saturating_m(n)
            .ok_or_else(|| Error::InvalidSpec(format!("no scaling run for {n} qubits")))?;
        let cfg = SearchConfig {
            max_restarts: a.restarts,
            min_entangling: if a.escalate { 0 } else { m },
            max_entangling: m,
            ..SearchConfig::default()
        };
        let started = Instant::now();
        let mut batch = run_bench(a.samples, n, "haar", seed, &cfg, |s| {
            TargetSpec::full(sampler::haar_unitary(1 << n, s))
        })?;
        if !json {
            eprintln!(
                "{n} qubits: {} targets in {:.1} s",
                a.samples,
                started.elapsed().as_secs_f64()
            );
        }
        for r in &mut batch {
            r.task += records.len();
        }
        records.extend(batch);
    }
    let summary = summarize_scaling(&records);
    if let Some(path) = &a.csv {
        write_csv(path, &records)?;
    }
    if let Some(path) = &a.plot {
        let bars: Vec<(String, f64, f64)> = summary
            .iter()
            .map(|s| (format!("N={}", s.qubits), s.median_wall_time, 0.0))
            .collect();
        std::fs::write(
            path,
            svg_bars("median compile time [s]", "register size", &bars),
        )?;
    }
    if json {
        emit_json(&json!({ "records": records, "summary": summary }))?;
    } else {
        println!("qubits,m,samples,successes,mean_wall_time,median_wall_time,mean_restarts,median_restarts");
        for s in &summary {
            println!(
                "{},{},{},{},{:.4},{:.4},{:.2},{}",
                s.qubits,
                s.m,
                s.samples,
                s.successes,
                s.mean_wall_time,
                s.median_wall_time,
                s.mean_restarts,
                s.median_restarts
            );
        }
    }
    Ok(records.iter().all(|r| r.success))
}

fn cmd_bench_clifford(a: &BenchCliffordArgs, json: bool) -> Result<bool> {
    let seed = a.seed.expect("clap enforces --seed");
    let n = a.qubits;
    require_extended(n, a.extended)?;
    if !(2..=EXTENDED_QUBITS).contains(&n) {
        return Err(Error::InvalidSpec(format!(
            "Clifford bench needs 2 to 4 qubits, got {n}"
        )));
    }
    let steps = a
        .steps
        .unwrap_or_else(|| sampler::default_clifford_steps(n));
    let cfg = SearchConfig {
        max_restarts: a.restarts,
        max_entangling: saturating_m(n).unwrap_or(30),
        ..SearchConfig::default()
    };
    let records = run_bench(a.samples, n, "clifford", seed, &cfg, |s| {
        let u = sampler::random_clifford(n, steps, s);
        if !sampler::is_clifford(&u, 1e-8) {
            return Err(Error::InvalidSpec(
                "random walk left the Clifford group".into(),
            ));
        }
        TargetSpec::full(u)
    })?;
    let histogram = m_histogram(&records);
    let failures = records.iter().filter(|r| !r.success).count();
    if let Some(path) = &a.csv {
        write_csv(path, &records)?;
    }
    if let Some(path) = &a.plot {
        let bars: Vec<(String, f64, f64)> = histogram
            .iter()
            .map(|b| (format!("M={}", b.m), b.fraction, b.std_dev))
            .collect();
        std::fs::write(
            path,
            svg_bars(
                &format!("{n}-qubit Cliffords, {} samples", a.samples),
                "MS gates",
                &bars,
            ),
        )?;
    }
    if json {
        emit_json(&json!({
            "qubits": n,
            "samples": a.samples,
            "steps": steps,
            "failures": failures,
            "histogram": histogram,
            "records": records,
        }))?;
    } else {
        println!("m,count,fraction,std_dev");
        for b in &histogram {
            println!("{},{},{:.4},{:.4}", b.m, b.count, b.fraction, b.std_dev);
        }
        if failures > 0 {
            eprintln!("{failures} targets did not compile within the MS budget");
        }
    }
    Ok(failures == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_ranges() {
        assert_eq!(parse_qubit_range("2..3").unwrap(), vec![2, 3]);
        assert_eq!(parse_qubit_range("2-4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_qubit_range("3").unwrap(), vec![3]);
        assert!(parse_qubit_range("3..2").is_err());
        assert!(parse_qubit_range("x").is_err());
    }

    #[test]
    fn median_and_histogram() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        let rec = |m, success| BenchRecord {
            task: 0,
            qubits: 2,
            class: "clifford".into(),
            success,
            m,
            deficit: 0.0,
            restarts: 1,
            wall_time: 0.0,
            seed: 0,
        };
        let h = m_histogram(&[
            rec(0, true),
            rec(2, true),
            rec(2, true),
            rec(3, true),
            rec(3, false),
        ]);
        assert_eq!(h.len(), 4);
        assert_eq!(
            h.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![1, 0, 2, 1]
        );
        assert!((h[2].fraction - 0.5).abs() < 1e-15);
        assert!((h[2].std_dev - 0.25).abs() < 1e-15);
    }

    #[test]
    fn four_qubits_need_extended() {
        assert!(require_extended(4, false).is_err());
        assert!(require_extended(4, true).is_ok());
        assert!(require_extended(3, false).is_ok());
    }

    #[test]
    fn bench_seed_is_mandatory() {
        assert!(Cli::try_parse_from(["msc", "bench-clifford", "--qubits", "2"]).is_err());
        assert!(Cli::try_parse_from(["msc", "bench-scaling", "--seed", "1"]).is_ok());
    }

    #[test]
    fn svg_has_one_rect_per_bar() {
        let s = svg_bars("t", "x", &[("a".into(), 1.0, 0.1), ("b".into(), 0.5, 0.0)]);
        assert_eq!(s.matches("<rect").count(), 2);
    }
}
