//! Command surface. Data goes to standard output (or `--out`), diagnostics
//! to standard error.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qtmlab_core::gates::{apply_circuit, basis_state, povm_trials, Circuit, CircuitSpec, InstructionSet};
use qtmlab_core::machine::{decode, encode, Machine, MachineKind, MachineSpec};
use qtmlab_core::ptm::{
    counts_to_distribution, ptm_accepts, ptm_exact_distribution, ptm_output_probability, ptm_sample_chunk, PtmDescription, SHOT_CHUNK,
};
use qtmlab_core::qtm::corpus::{three_branch_machine, valid_corpus, violating_corpus};
use qtmlab_core::qtm::{
    check_well_formed, check_well_formed_approx, default_oracle_seeds, finite_section_unitarity_oracle, output_distribution, Amp,
    QtmDescription, QtmOutput, QtmSampler, SparseState,
};
use qtmlab_core::scalar::{tvd, ExactAmplitude, Mass, C64};
use qtmlab_core::sk::{lower_bound_demo, scaling_study, sk_compile, BasisNet, CompileOptions, GateSet, Su2};
use qtmlab_core::suhd::{conjecture_row, suhd_run, ObservePlan, OutcomePolicy, ResetMode};
use qtmlab_core::tm::{tm_run, TmDescription};
use qtmlab_core::universal::{universality_probe, BoundedOutcome, Verdict};
use qtmlab_core::utm::textbook_utm;
use qtmlab_core::{Error, Result, DEFAULT_CONFIG_GUARD};

use crate::formats::{
    distribution_json, float_distribution_json, rational_json, read_net, ring_prob_json, write_net, CorpusEntry, MatrixFile, ProbeCases,
};
use crate::manifest::RunManifest;
use crate::parallel::par_map;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub const GUARD_ENV: &str = "QTMLAB_GUARD_CONFIGS";

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::NotAMachine(_) | Error::UnsupportedAmplitude(_) | Error::InvalidBranch | Error::Precision(_) => {
            EXIT_VALIDATION
        }
        Error::Resource(_) | Error::ArithmeticCapacity => EXIT_RESOURCE,
        Error::Numeric(_) | Error::HaltCollision(_) => EXIT_NUMERIC,
    }
}

#[derive(Parser, Debug)]
#[command(name = "qtmlab", version, about = "Exact machine-model workbench: TMs, PTMs, QTMs, gates, Solovay-Kitaev, reset experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel subcommands.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Record wall time in the manifest (makes reports differ between runs).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Goedel number of a machine description.
    Encode { machine: PathBuf },
    /// Machine description of a Goedel number.
    Decode {
        number: String,
        #[arg(long)]
        kind: Option<MachineKind>,
    },
    #[command(subcommand)]
    Tm(TmCommand),
    #[command(subcommand)]
    Ptm(PtmCommand),
    #[command(subcommand)]
    Universal(UniversalCommand),
    #[command(subcommand)]
    Qtm(QtmCommand),
    #[command(subcommand)]
    Circuit(CircuitCommand),
    #[command(subcommand)]
    Povm(PovmCommand),
    #[command(subcommand)]
    Sk(SkCommand),
    #[command(subcommand)]
    Suhd(SuhdCommand),
}

#[derive(Subcommand, Debug)]
pub enum TmCommand {
    Run {
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum PtmCommand {
    /// Exact halted-output distribution, optionally checked against sampling.
    Dist {
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Whether the machine outputs `--output` with probability above 3/4.
    Accept {
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        output: String,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum UniversalCommand {
    Probe {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
    /// Prints the shipped universal machine.
    Utm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RunMode {
    Exact,
    Sample,
}

#[derive(Subcommand, Debug)]
pub enum QtmCommand {
    /// Checks the local well-formedness conditions and runs the
    /// finite-section oracle.
    Validate {
        machine: PathBuf,
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    Run {
        machine: PathBuf,
        /// Basis input; repeat for an equal superposition.
        #[arg(long, default_values_t = [String::new()])]
        input: Vec<String>,
        #[arg(long)]
        steps: usize,
        /// Comma-separated observation steps (the horizon is always observed).
        #[arg(long, default_value = "")]
        schedule: String,
        #[arg(long, value_enum, default_value_t = RunMode::Exact)]
        mode: RunMode,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
    },
    /// Output distribution under several observation schedules.
    Dist {
        machine: PathBuf,
        #[arg(long, default_values_t = [String::new()])]
        input: Vec<String>,
        #[arg(long)]
        steps: usize,
        /// Extra comma-separated schedules to compare.
        #[arg(long)]
        schedule: Vec<String>,
        #[arg(long, default_value_t = 10)]
        random_schedules: usize,
    },
    /// Writes the generated test corpus as JSON files.
    Corpus {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CircuitCommand {
    Run {
        circuit: PathBuf,
        /// Index of the computational basis input.
        #[arg(long, default_value_t = 0)]
        basis: usize,
    },
    /// Validates the Clifford+T instruction set at a register width.
    Isa {
        #[arg(long, default_value_t = 2)]
        width: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum PovmCommand {
    Check {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value = "1,2,3")]
        widths: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum SkCommand {
    /// Builds a basis net and writes it to `--out`.
    Net {
        #[arg(long, default_value = "clifford-t")]
        set: String,
        #[arg(long, default_value_t = 12)]
        l0: usize,
        /// Random targets used to measure the covering radius.
        #[arg(long, default_value_t = 1000)]
        sample: usize,
        /// Fail unless the measured covering radius is at most this.
        #[arg(long)]
        require_eps0: Option<f64>,
    },
    Compile {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        /// Precision to which the target entries are known.
        #[arg(long)]
        target_precision: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    Scaling {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value = "0.1,0.05,0.02,0.01,0.005")]
        grid: String,
        #[arg(long, default_value_t = 50)]
        targets: usize,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
    },
    LowerBound {
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SuhdCommand {
    Run {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_values_t = [String::new()])]
        input: Vec<String>,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 10)]
        tmax: usize,
        #[arg(long)]
        observe_at: Option<usize>,
        /// `sample`, `most-likely`, or a fixed outcome label.
        #[arg(long, default_value = "sample")]
        outcome: String,
        #[arg(long)]
        reboot: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    Conjecture {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

/// What a command produced.
pub enum Reply {
    Json(Value, i32),
    Text(String),
}

pub struct Ctx {
    pub global: Global,
    pub guard: usize,
    pub manifest: RunManifest,
}

impl Ctx {
    fn report(&mut self, result: Value) -> Value {
        self.manifest.finish();
        json!({ "manifest": self.manifest, "result": result })
    }

    /// Loads a machine file or a corpus entry wrapping one.
    fn machine(&mut self, path: &Path) -> Result<Machine> {
        let text = self.manifest.read_text(path)?;
        let spec = match serde_json::from_str::<CorpusEntry>(&text) {
            Ok(entry) => entry.machine,
            Err(_) => MachineSpec::from_json(&text)?,
        };
        Machine::from_spec(&spec)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn guard_from_env() -> Result<usize> {
    match std::env::var(GUARD_ENV) {
        Err(_) => Ok(DEFAULT_CONFIG_GUARD),
        Ok(v) => {
            v.trim().parse::<usize>().ok().filter(|&g| g > 0).ok_or_else(|| invalid(format!("{GUARD_ENV}={v:?} is not a positive integer")))
        }
    }
}

fn want_tm(m: Machine) -> Result<TmDescription> {
    match m {
        Machine::Tm(t) => Ok(t),
        other => Err(invalid(format!("expected a tm, found a {}", other.kind()))),
    }
}

fn want_ptm(m: Machine) -> Result<PtmDescription> {
    match m {
        Machine::Tm(t) => Ok(PtmDescription::from_tm(&t)),
        Machine::Ptm(p) => Ok(p),
        other => Err(invalid(format!("expected a ptm, found a {}", other.kind()))),
    }
}

fn want_qtm(m: Machine) -> Result<QtmDescription> {
    match m {
        Machine::Qtm(q) => Ok(q),
        Machine::Tm(t) => Ok(QtmDescription::from_tm(&t)),
        other => Err(invalid(format!("expected a qtm, found a {}", other.kind()))),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| t.parse().map_err(|_| invalid(format!("bad {what} {t:?}")))).collect()
}

fn sample_counts(
    jobs: usize,
    shots: u64,
    chunk: impl Fn(u64, u64) -> Result<BTreeMap<String, u64>> + Sync,
) -> Result<BTreeMap<String, u64>> {
    let chunks: Vec<u64> = (0..shots.div_ceil(SHOT_CHUNK)).collect();
    let parts = par_map(jobs, &chunks, |&c| chunk(SHOT_CHUNK.min(shots - c * SHOT_CHUNK), c));
    let mut counts = BTreeMap::new();
    for part in parts {
        for (k, v) in part? {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    Ok(counts)
}

fn run_tm(ctx: &mut Ctx, cmd: TmCommand) -> Result<Reply> {
    let TmCommand::Run { machine, input, budget } = cmd;
    let m = want_tm(ctx.machine(&machine)?)?;
    let r = tm_run(&m, &input, budget)?;
    Ok(Reply::Json(ctx.report(serde_json::to_value(r).expect("run result")), EXIT_OK))
}

fn run_ptm(ctx: &mut Ctx, cmd: PtmCommand) -> Result<Reply> {
    match cmd {
        PtmCommand::Dist { machine, input, budget, shots } => {
            let m = want_ptm(ctx.machine(&machine)?)?;
            let d = ptm_exact_distribution(&m, &input, budget, ctx.guard)?;
            let mut result = json!({
                "halted": distribution_json(&d.halted, rational_json),
                "residual": rational_json(&d.residual),
                "explored": d.explored,
            });
            if let Some(shots) = shots {
                let seed = ctx.global.seed;
                let counts = sample_counts(ctx.global.jobs, shots, |n, c| ptm_sample_chunk(&m, &input, budget, n, seed, c))?;
                let sampled = counts_to_distribution(&counts)?;
                let exact = d.as_complete()?.to_float();
                result["sampled"] = float_distribution_json(&sampled);
                result["shots"] = json!(shots);
                result["tvd"] = json!(tvd(&exact, &sampled)?);
            }
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
        PtmCommand::Accept { machine, input, output, budget } => {
            let m = want_ptm(ctx.machine(&machine)?)?;
            let p = ptm_output_probability(&m, &input, &output, budget, ctx.guard)?;
            let accepts = ptm_accepts(&m, &input, &output, budget, ctx.guard)?;
            let result = json!({ "output": output, "probability": rational_json(&p), "threshold": [3, 4], "accepts": accepts });
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
    }
}

fn outcome_json(o: &BoundedOutcome) -> Value {
    json!({ "halted": distribution_json(&o.halted, rational_json), "residual": rational_json(&o.residual) })
}

fn run_universal(ctx: &mut Ctx, cmd: UniversalCommand) -> Result<Reply> {
    match cmd {
        UniversalCommand::Utm => Ok(Reply::Text(textbook_utm().to_spec().to_canonical_json())),
        UniversalCommand::Probe { candidate, tests, budget } => {
            let cand = ctx.machine(&candidate)?;
            let cand_code = qtmlab_core::machine::encode_machine(&cand)?.value;
            let text = ctx.manifest.read_text(&tests)?;
            let cases: ProbeCases = serde_json::from_str(&text).map_err(|e| invalid(format!("test list: {e}")))?;
            let mut list = Vec::new();
            for c in cases.cases {
                let code = match (c.machine, c.code) {
                    (Some(spec), None) => encode(&spec)?.value,
                    (None, Some(code)) => code.trim().parse::<BigUint>().map_err(|_| invalid(format!("bad machine code {code:?}")))?,
                    _ => return Err(invalid("each case needs exactly one of \"machine\" and \"code\"")),
                };
                list.push((code, c.input));
            }
            let r = universality_probe(&cand_code, &list, budget, ctx.guard)?;
            let entries: Vec<Value> = r
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "target_code": e.target.to_string(),
                        "input": e.input,
                        "pair": e.pair.to_string(),
                        "verdict": e.verdict,
                        "target": e.target_outcome.as_ref().map(outcome_json),
                        "candidate": e.candidate_outcome.as_ref().map(outcome_json),
                        "note": e.note,
                    })
                })
                .collect();
            let result = json!({
                "candidate_code": r.candidate.to_string(),
                "budget": budget,
                "matches": r.count(Verdict::Match),
                "mismatches": r.count(Verdict::Mismatch),
                "inconclusive": r.count(Verdict::Inconclusive),
                "witness": r.witness(),
                "entries": entries,
            });
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
    }
}

fn qtm_output_json<P: Mass>(o: &QtmOutput<P>, f: impl Fn(&P) -> Value) -> Value {
    json!({
        "halted": distribution_json(&o.halted, &f),
        "residual": f(&o.residual),
        "by_step": o.by_step.iter().map(|(t, p)| json!([t, f(p)])).collect::<Vec<_>>(),
    })
}

fn exact_or_float<T>(m: &QtmDescription, exact: impl FnOnce() -> Result<T>, float: impl FnOnce() -> Result<T>) -> Result<T> {
    if m.is_exact() {
        exact()
    } else {
        float()
    }
}

fn inputs_ref(inputs: &[String]) -> Vec<&str> {
    inputs.iter().map(String::as_str).collect()
}

fn random_schedule(rng: &mut ChaCha8Rng, horizon: usize) -> Vec<usize> {
    (1..=horizon).filter(|_| rng.gen_bool(0.5)).collect()
}

fn schedule_invariance<A: Amp>(
    m: &QtmDescription,
    inputs: &[&str],
    horizon: usize,
    schedules: &[Vec<usize>],
    guard: usize,
    f: impl Fn(&A::Prob) -> Value,
) -> Result<Value> {
    let psi = SparseState::<A>::superposed_inputs(m, inputs)?;
    let reference = output_distribution(m, &psi, horizon, &[], guard)?.as_complete()?;
    let mut rows = Vec::new();
    let mut invariant = true;
    for s in schedules {
        let d = output_distribution(m, &psi, horizon, s, guard)?.as_complete()?;
        let same = d == reference;
        invariant &= same;
        rows.push(json!({ "schedule": s, "identical": same, "tvd": tvd(&reference.to_float(), &d.to_float())? }));
    }
    Ok(json!({ "distribution": distribution_json(&reference, f), "schedules": rows, "invariant": invariant }))
}

fn run_qtm(ctx: &mut Ctx, cmd: QtmCommand) -> Result<Reply> {
    match cmd {
        QtmCommand::Validate { machine, radius } => {
            let m = want_qtm(ctx.machine(&machine)?)?;
            let report = if m.is_exact() { check_well_formed(&m)? } else { check_well_formed_approx(&m, 1e-10)? };
            let mut result = json!({
                "verdict": report.verdict,
                "condition": report.condition,
                "witness": report.witness_views(&m),
                "detail": report.detail,
            });
            if m.is_exact() {
                // Per-seed sections keep each oracle run small.
                let mut pass = true;
                let mut largest = 0;
                let mut witness = None;
                for seed in default_oracle_seeds(&m) {
                    let o = finite_section_unitarity_oracle(&m, std::slice::from_ref(&seed), radius, ctx.guard)?;
                    largest = largest.max(o.size);
                    if !o.pass {
                        pass = false;
                        witness = Some(o.detail);
                        break;
                    }
                }
                result["oracle"] = json!({ "radius": radius, "pass": pass, "largest_section": largest, "detail": witness });
                result["agree"] = json!(pass == report.is_well_formed());
            }
            let code = if report.is_well_formed() { EXIT_OK } else { EXIT_VALIDATION };
            Ok(Reply::Json(ctx.report(result), code))
        }
        QtmCommand::Run { machine, input, steps, schedule, mode, shots } => {
            let m = want_qtm(ctx.machine(&machine)?)?;
            let schedule: Vec<usize> = parse_list(&schedule, "observation step")?;
            let inputs = inputs_ref(&input);
            let guard = ctx.guard;
            let result = match mode {
                RunMode::Exact => exact_or_float(
                    &m,
                    || {
                        let psi = SparseState::<ExactAmplitude>::superposed_inputs(&m, &inputs)?;
                        Ok(qtm_output_json(&output_distribution(&m, &psi, steps, &schedule, guard)?, ring_prob_json))
                    },
                    || {
                        let psi = SparseState::<C64>::superposed_inputs(&m, &inputs)?;
                        Ok(qtm_output_json(&output_distribution(&m, &psi, steps, &schedule, guard)?, |p| json!(p)))
                    },
                )?,
                RunMode::Sample => {
                    let sampler = exact_or_float(
                        &m,
                        || QtmSampler::new(&m, &SparseState::<ExactAmplitude>::superposed_inputs(&m, &inputs)?, steps, &schedule, guard),
                        || QtmSampler::new(&m, &SparseState::<C64>::superposed_inputs(&m, &inputs)?, steps, &schedule, guard),
                    )?;
                    let seed = ctx.global.seed;
                    let counts = sample_counts(ctx.global.jobs, shots, |n, c| Ok(sampler.sample_chunk(n, seed, c)))?;
                    json!({ "shots": shots, "frequencies": float_distribution_json(&counts_to_distribution(&counts)?) })
                }
            };
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
        QtmCommand::Dist { machine, input, steps, schedule, random_schedules } => {
            let m = want_qtm(ctx.machine(&machine)?)?;
            let inputs = inputs_ref(&input);
            let mut schedules = vec![Vec::new(), (1..=steps).collect::<Vec<_>>()];
            for s in &schedule {
                schedules.push(parse_list(s, "observation step")?);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
            schedules.extend((0..random_schedules).map(|_| random_schedule(&mut rng, steps)));
            let guard = ctx.guard;
            let result = exact_or_float(
                &m,
                || schedule_invariance::<ExactAmplitude>(&m, &inputs, steps, &schedules, guard, ring_prob_json),
                || schedule_invariance::<C64>(&m, &inputs, steps, &schedules, guard, |p| json!(p)),
            )?;
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
        QtmCommand::Corpus { dir } => {
            let mut written = Vec::new();
            let three =
                qtmlab_core::qtm::corpus::CorpusMachine { name: "three-branch".into(), machine: three_branch_machine(), input: "0".into() };
            for (sub, list) in [("valid", valid_corpus()), ("violating", violating_corpus()), ("float", vec![three])] {
                let d = dir.join(sub);
                std::fs::create_dir_all(&d).map_err(|e| invalid(format!("cannot create {}: {e}", d.display())))?;
                for cm in list {
                    let entry = CorpusEntry { name: cm.name.clone(), input: cm.input, steps: None, machine: cm.machine.to_spec() };
                    let path = d.join(format!("{}.json", cm.name));
                    let text = serde_json::to_string_pretty(&entry).expect("corpus entry") + "\n";
                    std::fs::write(&path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
                    written.push(path.display().to_string());
                }
            }
            Ok(Reply::Json(ctx.report(json!({ "written": written })), EXIT_OK))
        }
    }
}

fn run_circuit(ctx: &mut Ctx, cmd: CircuitCommand) -> Result<Reply> {
    match cmd {
        CircuitCommand::Run { circuit, basis } => {
            let text = ctx.manifest.read_text(&circuit)?;
            let spec: CircuitSpec = serde_json::from_str(&text).map_err(|e| invalid(format!("circuit JSON: {e}")))?;
            let c = Circuit::from_spec(&spec)?;
            if basis >= 1 << c.width {
                return Err(invalid(format!("basis index {basis} outside a {}-qubit register", c.width)));
            }
            let out = apply_circuit(&c, &basis_state(c.width, basis))?;
            let label = |k: usize| (0..c.width).map(|q| if (k >> (c.width - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect::<String>();
            let amplitudes: BTreeMap<String, [f64; 2]> = out.iter().enumerate().map(|(k, z)| (label(k), [z.re, z.im])).collect();
            let probabilities: BTreeMap<String, f64> = out.iter().enumerate().map(|(k, z)| (label(k), z.norm_sqr())).collect();
            let result = json!({ "width": c.width, "input": label(basis), "amplitudes": amplitudes, "probabilities": probabilities });
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
        CircuitCommand::Isa { width } => {
            let set = InstructionSet::clifford_t(width)?;
            let r = set.validate()?;
            let names: Vec<String> = set.gates.iter().map(|g| format!("{}{:?}", g.gate.name, g.targets)).collect();
            let result = json!({ "width": width, "gates": names, "valid": r.valid, "problems": r.problems });
            Ok(Reply::Json(ctx.report(result), if r.valid { EXIT_OK } else { EXIT_VALIDATION }))
        }
    }
}

fn run_povm(ctx: &mut Ctx, cmd: PovmCommand) -> Result<Reply> {
    let PovmCommand::Check { trials, widths } = cmd;
    let widths: Vec<usize> = parse_list(&widths, "width")?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
    let s = povm_trials(&widths, trials, &mut rng)?;
    let code = if s.violations == 0 { EXIT_OK } else { EXIT_NUMERIC };
    Ok(Reply::Json(ctx.report(serde_json::to_value(s).expect("summary")), code))
}

fn load_net(ctx: &mut Ctx, path: &Path) -> Result<BasisNet> {
    let bytes = ctx.manifest.read(path)?;
    read_net(bytes.as_slice())
}

fn run_sk(ctx: &mut Ctx, cmd: SkCommand) -> Result<Reply> {
    match cmd {
        SkCommand::Net { set, l0, sample, require_eps0 } => {
            let Some(out) = ctx.global.out.clone() else {
                return Err(invalid("sk net writes a binary file; pass --out"));
            };
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
            let net = BasisNet::build(GateSet::by_name(&set)?, l0, sample, ctx.guard, &mut rng)?;
            if let Some(e) = require_eps0 {
                net.require_coverage(e)?;
            }
            let mut buf = Vec::new();
            write_net(&net, &mut buf).map_err(|e| invalid(e.to_string()))?;
            std::fs::write(&out, buf).map_err(|e| invalid(format!("cannot write {}: {e}", out.display())))?;
            let result = json!({ "set": set, "l0": l0, "entries": net.len(), "eps0": net.eps0, "sample": sample, "path": out.display().to_string() });
            // The summary goes to standard error; the file is the data.
            eprintln!("{}", serde_json::to_string_pretty(&ctx.report(result)).expect("summary"));
            Ok(Reply::Text(String::new()))
        }
        SkCommand::Compile { target, epsilon, net, max_depth, target_precision, report } => {
            let file = MatrixFile::parse(&ctx.manifest.read_text(&target)?)?;
            let u = file.to_matrix()?;
            let net = load_net(ctx, &net)?;
            let opts = CompileOptions { epsilon, max_depth, target_precision };
            let started = std::time::Instant::now();
            let (_, mut r) = sk_compile(&net, &u, &opts)?;
            if ctx.global.timing {
                r.wall_time_s = Some(started.elapsed().as_secs_f64());
            }
            let body = ctx.report(serde_json::to_value(&r).expect("compile report"));
            if let Some(path) = report {
                write_file(&path, &pretty(&body))?;
            }
            let code = if r.recomputed_distance <= epsilon { EXIT_OK } else { EXIT_NUMERIC };
            Ok(Reply::Json(body, code))
        }
        SkCommand::Scaling { net, grid, targets, max_depth } => {
            let net = load_net(ctx, &net)?;
            let grid: Vec<f64> = parse_list(&grid, "epsilon")?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
            let sample: Vec<Su2> = (0..targets).map(|_| Su2::random(&mut rng)).collect();
            let r = scaling_study(&net, &sample, &grid, max_depth)?;
            Ok(Reply::Json(ctx.report(serde_json::to_value(r).expect("scaling report")), EXIT_OK))
        }
        SkCommand::LowerBound { qubits, epsilon, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
            let r = lower_bound_demo(qubits, epsilon, samples, &mut rng)?;
            Ok(Reply::Json(ctx.report(serde_json::to_value(r).expect("lower-bound report")), EXIT_OK))
        }
    }
}

fn read_corpus(ctx: &mut Ctx, dir: &Path) -> Result<Vec<CorpusEntry>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| invalid(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(invalid(format!("no .json machines in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let text = ctx.manifest.read_text(p)?;
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn run_suhd(ctx: &mut Ctx, cmd: SuhdCommand) -> Result<Reply> {
    match cmd {
        SuhdCommand::Run { machine, input, epsilon, tmax, observe_at, outcome, reboot, report } => {
            let m = want_qtm(ctx.machine(&machine)?)?;
            let policy = match outcome.as_str() {
                "sample" => OutcomePolicy::Sample { seed: ctx.global.seed },
                "most-likely" => OutcomePolicy::MostLikely,
                label => OutcomePolicy::Branch(label.to_string()),
            };
            let observe = observe_at.map(|at| ObservePlan { at, policy });
            let mode = if reboot { ResetMode::Reboot } else { ResetMode::InverseEvolution };
            let trace = suhd_run(&m, &inputs_ref(&input), epsilon, tmax, observe, mode, ctx.guard)?;
            let body = ctx.report(serde_json::to_value(&trace).expect("trace"));
            if let Some(path) = report {
                write_file(&path, &pretty(&body))?;
            }
            Ok(Reply::Json(body, EXIT_OK))
        }
        SuhdCommand::Conjecture { corpus, trials } => {
            let entries = read_corpus(ctx, &corpus)?;
            let machines = entries
                .iter()
                .map(|e| Ok((e.name.clone(), want_qtm(Machine::from_spec(&e.machine)?)?, e.input.clone(), e.steps.unwrap_or(1))))
                .collect::<Result<Vec<_>>>()?;
            let indices: Vec<usize> = (0..machines.len()).collect();
            let (seed, guard) = (ctx.global.seed, ctx.guard);
            let rows = par_map(ctx.global.jobs, &indices, |&i| {
                let (name, m, input, steps) = &machines[i];
                conjecture_row(name, m, &[input.as_str()], *steps, trials, seed, i as u64, guard)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let broken = rows.iter().filter(|r| r.observation_breaks_reset).count();
            let result = json!({ "trials": trials, "machines": rows.len(), "observation_breaks_reset": broken, "rows": rows });
            Ok(Reply::Json(ctx.report(result), EXIT_OK))
        }
    }
}

fn run_encode(ctx: &mut Ctx, machine: &Path) -> Result<Reply> {
    let text = ctx.manifest.read_text(machine)?;
    Ok(Reply::Text(encode(&MachineSpec::from_json(&text)?)?.to_string()))
}

fn run_decode(number: &str, kind: Option<MachineKind>) -> Result<Reply> {
    let n: BigUint = number.trim().parse().map_err(|_| invalid(format!("{number:?} is not a natural number")))?;
    let m = decode(&n)?;
    if let Some(k) = kind {
        if k != m.kind() {
            return Err(Error::NotAMachine(format!("code describes a {}, not a {k}", m.kind())));
        }
    }
    Ok(Reply::Text(m.to_spec().to_canonical_json()))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value") + "\n"
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

pub fn dispatch(cli: Cli, argv: Vec<String>) -> Result<Reply> {
    let guard = guard_from_env()?;
    if cli.global.jobs == 0 {
        return Err(invalid("--jobs must be at least 1"));
    }
    let manifest = RunManifest::new(argv, cli.global.seed, cli.global.jobs, guard, cli.global.timing);
    let mut ctx = Ctx { global: cli.global, guard, manifest };
    match cli.command {
        Command::Encode { machine } => run_encode(&mut ctx, &machine),
        Command::Decode { number, kind } => run_decode(&number, kind),
        Command::Tm(c) => run_tm(&mut ctx, c),
        Command::Ptm(c) => run_ptm(&mut ctx, c),
        Command::Universal(c) => run_universal(&mut ctx, c),
        Command::Qtm(c) => run_qtm(&mut ctx, c),
        Command::Circuit(c) => run_circuit(&mut ctx, c),
        Command::Povm(c) => run_povm(&mut ctx, c),
        Command::Sk(c) => run_sk(&mut ctx, c),
        Command::Suhd(c) => run_suhd(&mut ctx, c),
    }
}

/// Parses `argv`, runs the command, writes its data, and returns the exit
/// code.
pub fn main_with(argv: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    }
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let out = cli.global.out.clone();
    let writes_binary = matches!(cli.command, Command::Sk(SkCommand::Net { .. }));
    match dispatch(cli, argv) {
        Err(e) => {
            let _ = writeln!(stderr, "qtmlab: {e}");
            exit_code(&e)
        }
        Ok(reply) => {
            let (text, code) = match reply {
                Reply::Json(v, code) => (pretty(&v), code),
                Reply::Text(t) if t.is_empty() => return EXIT_OK,
                Reply::Text(t) => (t + "\n", EXIT_OK),
            };
            match out.filter(|_| !writes_binary) {
                Some(path) => {
                    if let Err(e) = write_file(&path, &text) {
                        let _ = writeln!(stderr, "qtmlab: {e}");
                        return exit_code(&e);
                    }
                }
                None => {
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            code
        }
    }
}

/// Lists the machines of a corpus directory (used by the acceptance run).
pub fn corpus_names(dir: &Path) -> Result<BTreeSet<String>> {
    let mut ctx = Ctx {
        global: Global { seed: 0, jobs: 1, timing: false, out: None },
        guard: DEFAULT_CONFIG_GUARD,
        manifest: RunManifest::new(vec![], 0, 1, 0, false),
    };
    Ok(read_corpus(&mut ctx, dir)?.into_iter().map(|e| e.name).collect())
}
