//! Semi-universal hybrid device loop: simulate a QTM under an accuracy
//! contract, optionally observe it, then try to reset it by running the
//! evolution backwards.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{validation, Error, Result};
use crate::machine::encode;
use crate::ptm::UNHALTED;
use crate::qtm::{
    adjoint_step_on, check_well_formed, evolve_recording, inner_product, norm_sqr, observation_branches, output_distribution, Amp,
    Configuration, QtmDescription, SparseState,
};
use crate::scalar::{tvd_unchecked, ExactAmplitude, Mass, OutputDistribution, C64};

/// Fidelity within this distance of 1 counts as a successful reset.
pub const REVERSIBLE_TOL: f64 = 1e-9;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The program record and step budget promised for simulating a machine on
/// inputs of length `n` to accuracy `epsilon` for `horizon` steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyContract {
    /// Fingerprint of the machine's code (the full code is in the trace).
    pub code_fingerprint: String,
    pub input_length: usize,
    pub epsilon: f64,
    pub horizon: usize,
    /// Canonical serialization of `(code, n, epsilon, horizon)`.
    pub program: String,
    /// Engine steps the simulation is allowed; the engine never runs past it.
    pub step_budget: usize,
    /// Mantissa bits the a-priori error bound asks for; the engine runs in
    /// f64, so values above 53 mean the bound alone cannot certify the run.
    pub required_bits: u32,
}

impl AccuracyContract {
    pub fn new(m: &QtmDescription, input_length: usize, epsilon: f64, horizon: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(validation("epsilon must be positive"));
        }
        let fp = format!("{:016x}", fnv1a(m.to_spec().to_canonical_json().as_bytes()));
        let program = format!("sim(code#{fp}, n={input_length}, eps={epsilon:e}, T={horizon})");
        // Rounding each amplitude to 2^-b moves a state of support S by at
        // most sqrt(S) 2^-b per step; the TVD is at most twice the drift.
        let support = 1.0 + input_length as f64;
        let branch = m.max_branching().max(1) as f64;
        let bits =
            libm::log2(2.0 * horizon.max(1) as f64 / epsilon) + 0.5 * libm::log2(support) + 0.5 * horizon as f64 * libm::log2(branch);
        Ok(Self {
            code_fingerprint: fp,
            input_length,
            epsilon,
            horizon,
            program,
            step_budget: horizon,
            required_bits: libm::ceil(bits).min(u32::MAX as f64) as u32,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// Exact reference against the approximate engine.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationVerdict {
    pub contract: AccuracyContract,
    /// Number of superposed basis inputs; the tolerance is `epsilon / m`.
    pub inputs: usize,
    pub effective_epsilon: f64,
    pub reference: Option<BTreeMap<String, f64>>,
    pub simulated: BTreeMap<String, f64>,
    pub tvd: Option<f64>,
    pub status: VerdictStatus,
    /// Engine steps actually taken.
    pub steps_taken: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SimulationVerdict {
    pub fn pass(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

fn to_map(d: &OutputDistribution<f64>) -> BTreeMap<String, f64> {
    d.iter().map(|(k, v)| (k.clone(), *v)).collect()
}

fn observed_distribution<A: Amp>(state: &SparseState<A>) -> Result<OutputDistribution<f64>> {
    let mut d = OutputDistribution::new();
    for b in observation_branches(state)? {
        d.add_mass(b.label, &b.probability.to_f64())?;
    }
    Ok(d)
}

fn input_state<A: Amp>(m: &QtmDescription, inputs: &[&str]) -> Result<SparseState<A>> {
    SparseState::superposed_inputs(m, inputs)
}

/// Float evolution for at most `budget` steps.
fn approximate_engine(m: &QtmDescription, inputs: &[&str], budget: usize, guard: usize) -> Result<(OutputDistribution<f64>, usize)> {
    let psi = input_state::<C64>(m, inputs)?;
    let (state, supports) = evolve_recording(m, &psi, budget, guard)?;
    Ok((observed_distribution(&state)?, supports.len()))
}

/// Runs the approximate engine for `horizon` steps and compares its output
/// distribution (observed once, at the horizon) with the exact one.
pub fn approx_simulate(m: &QtmDescription, inputs: &[&str], horizon: usize, epsilon: f64, guard: usize) -> Result<SimulationVerdict> {
    if inputs.is_empty() {
        return Err(validation("at least one input is required"));
    }
    let n = inputs.iter().map(|s| s.len()).max().unwrap_or(0);
    let contract = AccuracyContract::new(m, n, epsilon, horizon)?;
    if m.is_exact() && !check_well_formed(m)?.is_well_formed() {
        return Err(validation("machine is not well-formed"));
    }
    let effective = epsilon / inputs.len() as f64;
    let (q, steps_taken) = approximate_engine(m, inputs, contract.step_budget, guard)?;
    let simulated = to_map(&q);
    let inconclusive = |note: String| SimulationVerdict {
        contract: contract.clone(),
        inputs: inputs.len(),
        effective_epsilon: effective,
        reference: None,
        simulated: simulated.clone(),
        tvd: None,
        status: VerdictStatus::Inconclusive,
        steps_taken,
        note: Some(note),
    };
    if !m.is_exact() {
        return Ok(inconclusive("amplitudes outside the exact ring: no exact reference".into()));
    }
    let psi = match input_state::<ExactAmplitude>(m, inputs) {
        Ok(p) => p,
        Err(Error::UnsupportedAmplitude(e)) => return Ok(inconclusive(format!("reference unavailable: {e}"))),
        Err(e) => return Err(e),
    };
    let p = match output_distribution(m, &psi, horizon, &[], guard) {
        Ok(out) => out.as_complete()?.to_float(),
        Err(e @ (Error::Resource(_) | Error::ArithmeticCapacity)) => return Ok(inconclusive(format!("reference unavailable: {e}"))),
        Err(e) => return Err(e),
    };
    let d = tvd_unchecked(&p, &q)?;
    Ok(SimulationVerdict {
        contract,
        inputs: inputs.len(),
        effective_epsilon: effective,
        reference: Some(to_map(&p)),
        simulated,
        tvd: Some(d),
        status: if d <= effective { VerdictStatus::Pass } else { VerdictStatus::Fail },
        steps_taken,
        note: None,
    })
}

/// How the outcome of a scheduled observation is chosen.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomePolicy {
    /// Born-rule sample from a seeded generator.
    Sample {
        seed: u64,
    },
    /// A fixed outcome label (a tape, or the unhalted marker).
    Branch(String),
    MostLikely,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservePlan {
    /// Iteration (value of T) at whose signal the device is observed.
    pub at: usize,
    pub policy: OutcomePolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResetMode {
    /// Apply the exact inverse evolution for the steps just taken.
    InverseEvolution,
    /// An operator reinitializes the device; not autonomous.
    Reboot,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResetReport {
    pub mode: ResetMode,
    pub autonomous: bool,
    pub observation_step: Option<usize>,
    pub outcome: Option<String>,
    pub outcome_probability: Option<f64>,
    /// `|<psi0|chi>|^2 / <chi|chi>` for the reset state `chi`.
    pub fidelity: f64,
    /// Mean fidelity over the measurement outcomes, from resetting each.
    pub expected_fidelity: f64,
    /// `sum_b p_b^2`, the value the expectation should equal.
    pub analytic_fidelity: f64,
    pub reversible: bool,
    /// The reset state equals the initial one amplitude for amplitude.
    pub exact_restore: bool,
}

/// One outcome of observing the device: probability and the fidelity a
/// reset achieves afterwards.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchReset {
    pub label: String,
    pub probability: f64,
    pub fidelity: f64,
}

fn reset_state<A: Amp>(m: &QtmDescription, supports: &[BTreeSet<Configuration>], state: &SparseState<A>) -> Result<SparseState<A>> {
    let mut s = state.clone();
    for d in supports.iter().rev() {
        s = adjoint_step_on(m, d, &s)?;
    }
    Ok(s)
}

/// `|<psi0|chi>|^2 / <phi|phi>` where `chi` is the reset of `phi`.
///
/// The projected adjoint drops the part of `U^dg phi` that leaves the
/// recorded supports. That part is orthogonal to the whole forward
/// trajectory of `psi0`, so the overlap is exact, and the ideal inverse
/// preserves the norm of `phi`, which is therefore the normalizer.
fn fidelity<A: Amp>(psi0: &SparseState<A>, chi: &SparseState<A>, phi: &SparseState<A>) -> Result<f64> {
    let num = inner_product(psi0, chi)?.norm_sqr()?.to_f64();
    let den = norm_sqr(phi)?.to_f64();
    if den <= 0.0 {
        return Err(Error::InvalidBranch);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

fn states_match<A: Amp>(a: &SparseState<A>, b: &SparseState<A>) -> bool {
    if A::EXACT {
        return a == b;
    }
    let keys: BTreeSet<&Configuration> = a.configurations().chain(b.configurations()).collect();
    keys.into_iter().all(|c| {
        let x = a.get(c).map_or(C64::new(0.0, 0.0), |v| v.to_c64());
        let y = b.get(c).map_or(C64::new(0.0, 0.0), |v| v.to_c64());
        (x - y).norm() <= 1e-12
    })
}

/// Evolves `psi0` for `steps`, observes, and resets every outcome branch.
pub fn branch_resets<A: Amp>(m: &QtmDescription, psi0: &SparseState<A>, steps: usize, guard: usize) -> Result<Vec<BranchReset>> {
    let (state, supports) = evolve_recording(m, psi0, steps, guard)?;
    observation_branches(&state)?
        .into_iter()
        .map(|b| {
            let chi = reset_state(m, &supports, &b.projection)?;
            Ok(BranchReset { label: b.label, probability: b.probability.to_f64(), fidelity: fidelity(psi0, &chi, &b.projection)? })
        })
        .collect()
}

fn device_iteration<A: Amp>(
    m: &QtmDescription,
    psi0: &SparseState<A>,
    steps: usize,
    observe: Option<&ObservePlan>,
    mode: ResetMode,
    guard: usize,
) -> Result<ResetReport> {
    let (state, supports) = evolve_recording(m, psi0, steps, guard)?;
    debug_assert_eq!(supports.len(), steps);
    let Some(plan) = observe else {
        let (fid, exact) = match mode {
            ResetMode::Reboot => (1.0, true),
            ResetMode::InverseEvolution => {
                let chi = reset_state(m, &supports, &state)?;
                (fidelity(psi0, &chi, &state)?, states_match(&chi, psi0))
            }
        };
        return Ok(ResetReport {
            mode,
            autonomous: mode == ResetMode::InverseEvolution,
            observation_step: None,
            outcome: None,
            outcome_probability: None,
            fidelity: fid,
            expected_fidelity: fid,
            analytic_fidelity: 1.0,
            reversible: 1.0 - fid <= REVERSIBLE_TOL,
            exact_restore: exact,
        });
    };
    let branches = observation_branches(&state)?;
    let probs: Vec<f64> = branches.iter().map(|b| b.probability.to_f64()).collect();
    let pick = match &plan.policy {
        OutcomePolicy::Sample { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(plan.at as u64);
            let total: f64 = probs.iter().sum();
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            probs
                .iter()
                .position(|p| {
                    acc += p;
                    u < acc
                })
                .unwrap_or(probs.len() - 1)
        }
        OutcomePolicy::Branch(label) => branches.iter().position(|b| &b.label == label).ok_or(Error::InvalidBranch)?,
        OutcomePolicy::MostLikely => {
            probs.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(Ordering::Equal)).map(|x| x.0).unwrap_or(0)
        }
    };
    let mut fids = Vec::with_capacity(branches.len());
    for b in &branches {
        fids.push(match mode {
            ResetMode::Reboot => 1.0,
            ResetMode::InverseEvolution => fidelity(psi0, &reset_state(m, &supports, &b.projection)?, &b.projection)?,
        });
    }
    let chosen = &branches[pick];
    let exact = match mode {
        ResetMode::Reboot => true,
        ResetMode::InverseEvolution => states_match(&reset_state(m, &supports, &chosen.projection)?, psi0),
    };
    Ok(ResetReport {
        mode,
        autonomous: mode == ResetMode::InverseEvolution,
        observation_step: Some(steps),
        outcome: Some(chosen.label.clone()),
        outcome_probability: Some(probs[pick]),
        fidelity: fids[pick],
        expected_fidelity: probs.iter().zip(&fids).map(|(p, f)| p * f).sum(),
        analytic_fidelity: probs.iter().map(|p| p * p).sum(),
        reversible: 1.0 - fids[pick] <= REVERSIBLE_TOL,
        exact_restore: exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuhdIteration {
    pub t: usize,
    /// Accuracy asked of this iteration: `epsilon / T`.
    pub epsilon: f64,
    pub verdict: SimulationVerdict,
    /// The device emits its "may be observed" signal after each run.
    pub signal: bool,
    pub reset: ResetReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuhdTrace {
    pub machine_code: String,
    pub inputs: Vec<String>,
    pub epsilon: f64,
    pub max_t: usize,
    pub observe: Option<ObservePlan>,
    pub mode: ResetMode,
    pub iterations: Vec<SuhdIteration>,
}

/// The device loop: for T = 1, 2, ..., max_t simulate to accuracy
/// `epsilon / T` within the contract's step budget, signal, observe if this
/// is the scheduled window, then reset.
pub fn suhd_run(
    m: &QtmDescription,
    inputs: &[&str],
    epsilon: f64,
    max_t: usize,
    observe: Option<ObservePlan>,
    mode: ResetMode,
    guard: usize,
) -> Result<SuhdTrace> {
    if let Some(p) = &observe {
        if p.at == 0 || p.at > max_t {
            return Err(validation(format!("observation at T = {} lies outside the signalled windows 1..={max_t}", p.at)));
        }
    }
    if m.is_exact() && !check_well_formed(m)?.is_well_formed() {
        return Err(validation("machine is not well-formed"));
    }
    let code = encode(&m.to_spec())?;
    let mut iterations = Vec::with_capacity(max_t);
    for t in 1..=max_t {
        let eps_t = epsilon / t as f64;
        let verdict = approx_simulate(m, inputs, t, eps_t, guard)?;
        let steps = verdict.contract.step_budget;
        let plan = observe.as_ref().filter(|p| p.at == t);
        let reset = if m.is_exact() {
            device_iteration(m, &input_state::<ExactAmplitude>(m, inputs)?, steps, plan, mode, guard)?
        } else {
            device_iteration(m, &input_state::<C64>(m, inputs)?, steps, plan, mode, guard)?
        };
        iterations.push(SuhdIteration { t, epsilon: eps_t, verdict, signal: true, reset });
    }
    Ok(SuhdTrace {
        machine_code: format!("{code}"),
        inputs: inputs.iter().map(|s| String::from(*s)).collect(),
        epsilon,
        max_t,
        observe,
        mode,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub machine: String,
    pub steps: usize,
    pub trials: u64,
    pub mean_fidelity: f64,
    pub standard_error: f64,
    /// Fraction of trials whose reset fidelity is below `1 - 1e-6`.
    pub broken_fraction: f64,
    /// `sum_b p_b^2` from the exact branch weights.
    pub analytic: f64,
    pub within_3se: bool,
    /// Some outcome with positive probability cannot be reset.
    pub observation_breaks_reset: bool,
    pub branches: Vec<BranchReset>,
}

/// Observes the machine after `steps` steps in every trial (outcome drawn by
/// the Born rule), resets it and records the fidelity. `stream` separates
/// the random streams of different machines under one seed.
#[allow(clippy::too_many_arguments)]
pub fn conjecture_row(
    name: &str,
    m: &QtmDescription,
    inputs: &[&str],
    steps: usize,
    trials: u64,
    seed: u64,
    stream: u64,
    guard: usize,
) -> Result<ConjectureRow> {
    if trials == 0 {
        return Err(validation("at least one trial is required"));
    }
    let branches = if m.is_exact() {
        branch_resets(m, &input_state::<ExactAmplitude>(m, inputs)?, steps, guard)?
    } else {
        branch_resets(m, &input_state::<C64>(m, inputs)?, steps, guard)?
    };
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (mut sum, mut sum2, mut broken) = (0.0, 0.0, 0u64);
    for _ in 0..trials {
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let b = branches
            .iter()
            .find(|b| {
                acc += b.probability;
                u < acc
            })
            .unwrap_or(&branches[branches.len() - 1]);
        sum += b.fidelity;
        sum2 += b.fidelity * b.fidelity;
        if b.fidelity < 1.0 - 1e-6 {
            broken += 1;
        }
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    let se = libm::sqrt(var / n);
    let analytic: f64 = branches.iter().map(|b| b.probability * b.probability).sum::<f64>() / (total * total);
    Ok(ConjectureRow {
        machine: String::from(name),
        steps,
        trials,
        mean_fidelity: mean,
        standard_error: se,
        broken_fraction: broken as f64 / n,
        analytic,
        within_3se: libm::fabs(mean - analytic) <= 3.0 * se + 1e-12,
        observation_breaks_reset: branches.iter().any(|b| b.probability > 0.0 && b.fidelity < 1.0 - 1e-6),
        branches,
    })
}

/// Whether any outcome of the observation at `steps` is the unhalted one.
pub fn has_unhalted_branch(branches: &[BranchReset]) -> bool {
    branches.iter().any(|b| b.label == UNHALTED)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtm::corpus::{coin_machine, flip_walker, three_branch_machine, valid_corpus};
    use crate::DEFAULT_CONFIG_GUARD as G;

    #[test]
    fn permutation_machine_simulates_exactly() {
        let v = approx_simulate(&flip_walker(), &["0110"], 8, 1e-3, G).unwrap();
        assert_eq!(v.tvd, Some(0.0));
        assert!(v.pass());
        assert_eq!(v.steps_taken, 8);
    }

    #[test]
    fn coin_within_float_precision() {
        let v = approx_simulate(&coin_machine(), &["0"], 3, 1e-6, G).unwrap();
        assert!(v.tvd.unwrap() <= 1e-12, "{v:?}");
        assert!(v.pass());
        let r = v.reference.unwrap();
        assert!((r["0"] - 0.5).abs() < 1e-15 && (r["1"] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn superposed_input_tightens_epsilon() {
        let v = approx_simulate(&coin_machine(), &["0", "1"], 2, 1e-6, G).unwrap();
        assert_eq!(v.effective_epsilon, 5e-7);
        assert!(v.pass());
    }

    #[test]
    fn float_machine_is_inconclusive() {
        let v = approx_simulate(&three_branch_machine(), &["0"], 2, 1e-6, G).unwrap();
        assert_eq!(v.status, VerdictStatus::Inconclusive);
    }

    #[test]
    fn unobserved_loop_is_reversible() {
        for cm in valid_corpus().iter().take(8) {
            let tr = suhd_run(&cm.machine, &[&cm.input], 1e-3, 6, None, ResetMode::InverseEvolution, G).unwrap();
            for it in &tr.iterations {
                assert!(it.reset.exact_restore && it.reset.reversible, "{} T={}", cm.name, it.t);
                assert_eq!(it.reset.fidelity, 1.0);
                assert_eq!(it.epsilon, 1e-3 / it.t as f64);
                assert!(it.verdict.pass());
            }
        }
    }

    #[test]
    fn observed_coin_loses_half() {
        let plan = ObservePlan { at: 2, policy: OutcomePolicy::Branch("1".into()) };
        let tr = suhd_run(&coin_machine(), &["0"], 1e-3, 3, Some(plan), ResetMode::InverseEvolution, G).unwrap();
        let r = &tr.iterations[1].reset;
        assert_eq!(r.observation_step, Some(2));
        assert!((r.fidelity - 0.5).abs() < 1e-12);
        assert!((r.expected_fidelity - 0.5).abs() < 1e-12);
        assert!((r.analytic_fidelity - 0.5).abs() < 1e-12);
        assert!(!r.reversible);
        assert!(tr.iterations[0].reset.reversible && tr.iterations[2].reset.reversible);
    }

    #[test]
    fn reboot_is_not_autonomous() {
        let plan = ObservePlan { at: 1, policy: OutcomePolicy::MostLikely };
        let tr = suhd_run(&coin_machine(), &["0"], 1e-3, 1, Some(plan), ResetMode::Reboot, G).unwrap();
        let r = &tr.iterations[0].reset;
        assert_eq!(r.fidelity, 1.0);
        assert!(!r.autonomous);
    }

    #[test]
    fn basis_state_observation_is_harmless() {
        let plan = ObservePlan { at: 5, policy: OutcomePolicy::Sample { seed: 3 } };
        let tr = suhd_run(&flip_walker(), &["0110"], 1e-3, 5, Some(plan), ResetMode::InverseEvolution, G).unwrap();
        let r = &tr.iterations[4].reset;
        assert_eq!(r.fidelity, 1.0);
        assert!(r.exact_restore);
    }

    #[test]
    fn observation_outside_windows_is_refused() {
        let plan = ObservePlan { at: 4, policy: OutcomePolicy::MostLikely };
        assert!(suhd_run(&coin_machine(), &["0"], 1e-3, 3, Some(plan), ResetMode::InverseEvolution, G).is_err());
    }

    #[test]
    fn conjecture_rows() {
        let coin = conjecture_row("coin", &coin_machine(), &["0"], 1, 10_000, 7, 0, G).unwrap();
        assert!((coin.mean_fidelity - 0.5).abs() < 0.01);
        assert!((coin.analytic - 0.5).abs() < 1e-12);
        assert!(coin.within_3se && coin.observation_breaks_reset);
        let three = conjecture_row("three", &three_branch_machine(), &["0"], 1, 10_000, 7, 1, G).unwrap();
        assert!((three.mean_fidelity - 1.0 / 3.0).abs() < 0.01);
        let walker = conjecture_row("walker", &flip_walker(), &["01"], 3, 100, 7, 2, G).unwrap();
        assert_eq!(walker.mean_fidelity, 1.0);
        assert!(!walker.observation_breaks_reset);
    }

    #[test]
    fn contract_is_deterministic() {
        let a = AccuracyContract::new(&coin_machine(), 1, 1e-3, 5).unwrap();
        let b = AccuracyContract::new(&coin_machine(), 1, 1e-3, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.step_budget, 5);
        assert_ne!(a.program, AccuracyContract::new(&coin_machine(), 1, 1e-3, 6).unwrap().program);
    }
}
