//! Probabilistic Turing machines with exact rational branch probabilities.
//!
//! A machine computes `y` on input `x` when it halts with output `y` with
//! probability strictly greater than 3/4.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{validation, Error, Result};
use crate::machine::{BranchSpec, MachineKind, MachineSpec, Move, RuleSpec, StateId, Symbol, Tape};
use crate::scalar::OutputDistribution;
use crate::tm::{DenseTape, TmDescription};

/// Label used for probability mass that has not halted within the budget.
pub const UNHALTED: &str = "<unhalted>";

/// Shots per independently seeded chunk in Monte Carlo sampling.
pub const SHOT_CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct PtmBranch {
    pub p: BigRational,
    pub write: Symbol,
    pub mv: Move,
    pub next: StateId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtmDescription {
    pub names: Vec<String>,
    pub initial: StateId,
    pub halt: StateId,
    pub rules: BTreeMap<(StateId, Symbol), Vec<PtmBranch>>,
}

fn ratio(n: u64, d: u64) -> Result<BigRational> {
    if d == 0 {
        return Err(validation("probability denominator is zero"));
    }
    Ok(BigRational::new(BigInt::from(n), BigInt::from(d)))
}

impl PtmDescription {
    pub fn from_spec(spec: &MachineSpec) -> Result<Self> {
        if spec.kind != MachineKind::Ptm {
            return Err(validation("expected a machine of kind \"ptm\""));
        }
        let idx = spec.state_index()?;
        let halt = MachineSpec::lookup(&idx, &spec.halt)?;
        let mut rules = BTreeMap::new();
        for r in &spec.rules {
            let state = MachineSpec::lookup(&idx, &r.state)?;
            if state == halt {
                return Err(validation("the halting state has no transition rules"));
            }
            if r.branches.is_empty() {
                return Err(validation(format!("rule ({}, {:?}) has no branches", r.state, r.read)));
            }
            let mut branches = Vec::new();
            let mut total = BigRational::zero();
            for b in &r.branches {
                if b.amplitude.is_some() {
                    return Err(validation("probabilistic branches carry no amplitude"));
                }
                let p = match b.p {
                    Some((n, d)) => ratio(n, d)?,
                    None if r.branches.len() == 1 => BigRational::one(),
                    None => return Err(validation("every branch of a probabilistic split needs \"p\"")),
                };
                if !p.is_positive() {
                    return Err(validation("branch probabilities must be positive"));
                }
                total += &p;
                branches.push(PtmBranch { p, write: b.write, mv: b.mv, next: MachineSpec::lookup(&idx, &b.next)? });
            }
            if total != BigRational::one() {
                return Err(validation(format!("probabilities of ({}, {:?}) sum to {total}, not 1", r.state, r.read)));
            }
            if rules.insert((state, r.read), branches).is_some() {
                return Err(validation(format!("more than one rule for ({}, {:?})", r.state, r.read)));
            }
        }
        Ok(Self { names: spec.states.clone(), initial: MachineSpec::lookup(&idx, &spec.initial)?, halt, rules })
    }

    pub fn to_spec(&self) -> MachineSpec {
        let name = |s: StateId| self.names[s as usize].clone();
        MachineSpec {
            kind: MachineKind::Ptm,
            states: self.names.clone(),
            initial: name(self.initial),
            halt: name(self.halt),
            rules: self
                .rules
                .iter()
                .map(|(&(q, s), bs)| RuleSpec {
                    state: name(q),
                    read: s,
                    branches: bs
                        .iter()
                        .map(|b| BranchSpec {
                            p: Some((b.p.numer().to_u64().unwrap_or(u64::MAX), b.p.denom().to_u64().unwrap_or(u64::MAX))),
                            amplitude: None,
                            write: b.write,
                            mv: b.mv,
                            next: name(b.next),
                        })
                        .collect(),
                })
                .collect(),
        }
        .canonical()
    }

    /// The deterministic machine viewed as a PTM with probability-one rules.
    pub fn from_tm(tm: &TmDescription) -> Self {
        let rules = tm
            .rules
            .iter()
            .map(|(&k, a)| (k, alloc::vec![PtmBranch { p: BigRational::one(), write: a.write, mv: a.mv, next: a.next }]))
            .collect();
        Self { names: tm.names.clone(), initial: tm.initial, halt: tm.halt, rules }
    }
}

/// Exact halted-output distribution plus the mass still running at the
/// budget. `halted` total plus `residual` is exactly one.
#[derive(Clone, Debug, PartialEq)]
pub struct PtmDistribution {
    pub halted: OutputDistribution<BigRational>,
    pub residual: BigRational,
    pub explored: usize,
}

impl PtmDistribution {
    /// Halted outputs with the residual folded in under [`UNHALTED`].
    pub fn as_complete(&self) -> Result<OutputDistribution<BigRational>> {
        let mut d = self.halted.clone();
        d.add_mass(UNHALTED, &self.residual)?;
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct PtmConfig {
    state: StateId,
    head: i64,
    tape: Tape,
}

/// Enumerates every branch of `m` on `input` for `budget` steps.
///
/// Identical configurations reached at the same step are merged, so the
/// frontier never holds more entries than distinct configurations.
pub fn ptm_exact_distribution(m: &PtmDescription, input: &str, budget: u64, guard: usize) -> Result<PtmDistribution> {
    if budget == 0 {
        return Err(validation("step budget must be at least 1"));
    }
    let mut frontier = BTreeMap::new();
    frontier.insert(PtmConfig { state: m.initial, head: 0, tape: Tape::from_input(input)? }, BigRational::one());
    let mut halted = OutputDistribution::new();
    let mut explored = 0usize;
    for _ in 0..budget {
        if frontier.is_empty() {
            break;
        }
        let mut next: BTreeMap<PtmConfig, BigRational> = BTreeMap::new();
        for (cfg, mass) in frontier {
            explored += 1;
            if explored > guard {
                return Err(Error::Resource(format!("PTM enumeration explored more than {guard} configurations")));
            }
            let sym = cfg.tape.read(cfg.head);
            let Some(branches) = m.rules.get(&(cfg.state, sym)) else {
                halted.add_mass(cfg.tape.render(), &mass)?;
                continue;
            };
            for b in branches {
                let p = &mass * &b.p;
                let succ = PtmConfig { state: b.next, head: cfg.head + b.mv.delta(), tape: cfg.tape.with(cfg.head, b.write) };
                if succ.state == m.halt {
                    halted.add_mass(succ.tape.render(), &p)?;
                } else {
                    *next.entry(succ).or_insert_with(BigRational::zero) += p;
                }
            }
        }
        frontier = next;
    }
    let residual = frontier.values().fold(BigRational::zero(), |acc, p| acc + p);
    Ok(PtmDistribution { halted, residual, explored })
}

/// Exact probability that `m` halts with output `target` within `budget`.
pub fn ptm_output_probability(m: &PtmDescription, input: &str, target: &str, budget: u64, guard: usize) -> Result<BigRational> {
    Ok(ptm_exact_distribution(m, input, budget, guard)?.halted.get(target))
}

/// Acceptance with the 3/4 threshold.
pub fn ptm_accepts(m: &PtmDescription, input: &str, target: &str, budget: u64, guard: usize) -> Result<bool> {
    let p = ptm_output_probability(m, input, target, budget, guard)?;
    Ok(p > BigRational::new(BigInt::from(3), BigInt::from(4)))
}

/// Integer sampling table for one rule: cumulative numerators over a common
/// denominator.
#[derive(Clone, Debug)]
enum BranchSampler {
    Integer { cumulative: Vec<u64>, total: u64 },
    Float { cumulative: Vec<f64> },
}

impl BranchSampler {
    fn new(branches: &[PtmBranch]) -> Self {
        let lcm = branches.iter().try_fold(1u64, |acc, b| {
            let d = b.p.denom().to_u64()?;
            let g = num_integer::gcd(acc, d);
            acc.checked_mul(d / g)
        });
        if let Some(total) = lcm {
            let mut acc = 0u64;
            let cumulative = branches
                .iter()
                .map(|b| {
                    let scaled = b.p.numer() * BigInt::from(total) / b.p.denom();
                    acc += scaled.to_u64().unwrap_or(0);
                    acc
                })
                .collect();
            BranchSampler::Integer { cumulative, total }
        } else {
            let mut acc = 0.0;
            let cumulative = branches
                .iter()
                .map(|b| {
                    acc += b.p.to_f64().unwrap_or(0.0);
                    acc
                })
                .collect();
            BranchSampler::Float { cumulative }
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            BranchSampler::Integer { cumulative, total } => {
                let u = rng.gen_range(0..*total);
                cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
            }
            BranchSampler::Float { cumulative } => {
                let u: f64 = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(1.0);
                cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
            }
        }
    }
}

/// Runs one chunk of Monte Carlo shots and returns raw outcome counts.
///
/// Chunk `i` draws from the ChaCha stream `i` of `seed`, so results do not
/// depend on how chunks are spread over workers.
pub fn ptm_sample_chunk(m: &PtmDescription, input: &str, budget: u64, shots: u64, seed: u64, chunk: u64) -> Result<BTreeMap<String, u64>> {
    let samplers: BTreeMap<_, _> = m.rules.iter().map(|(k, bs)| (*k, BranchSampler::new(bs))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let mut tape = DenseTape::from_input(input)?;
        let mut state = m.initial;
        let mut head = 0i64;
        let mut steps = 0u64;
        let label = loop {
            if state == m.halt {
                break tape.render();
            }
            if steps >= budget {
                break String::from(UNHALTED);
            }
            steps += 1;
            let sym = tape.read(head);
            match m.rules.get(&(state, sym)) {
                None => state = m.halt,
                Some(bs) => {
                    let b = &bs[samplers[&(state, sym)].pick(&mut rng)];
                    tape.write(head, b.write);
                    head += b.mv.delta();
                    state = b.next;
                }
            }
        };
        *counts.entry(label).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Turns merged counts into empirical frequencies.
pub fn counts_to_distribution(counts: &BTreeMap<String, u64>) -> Result<OutputDistribution<f64>> {
    let n: u64 = counts.values().sum();
    let mut d = OutputDistribution::new();
    for (k, c) in counts {
        d.add_mass(k.clone(), &(*c as f64 / n as f64))?;
    }
    Ok(d)
}

/// Sequential Monte Carlo estimate over `shots` runs.
pub fn ptm_sample(m: &PtmDescription, input: &str, budget: u64, shots: u64, seed: u64) -> Result<OutputDistribution<f64>> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let chunks = shots.div_ceil(SHOT_CHUNK);
    for c in 0..chunks {
        let n = SHOT_CHUNK.min(shots - c * SHOT_CHUNK);
        for (k, v) in ptm_sample_chunk(m, input, budget, n, seed, c)? {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    counts_to_distribution(&counts)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::tm::fixtures::spec;

    pub fn fair_coin() -> PtmDescription {
        PtmDescription::from_spec(&spec(
            r#"{"kind":"ptm","states":["q0","qh"],"initial":"q0","halt":"qh","rules":[
            {"state":"q0","read":"_","branches":[
              {"p":[1,2],"write":"0","move":0,"next":"qh"},
              {"p":[1,2],"write":"1","move":0,"next":"qh"}]}]}"#,
        ))
        .unwrap()
    }

    pub fn two_coins() -> PtmDescription {
        PtmDescription::from_spec(&spec(
            r#"{"kind":"ptm","states":["q0","q1","qh"],"initial":"q0","halt":"qh","rules":[
            {"state":"q0","read":"_","branches":[
              {"p":[1,2],"write":"0","move":1,"next":"q1"},
              {"p":[1,2],"write":"1","move":1,"next":"q1"}]},
            {"state":"q1","read":"_","branches":[
              {"p":[1,2],"write":"0","move":0,"next":"qh"},
              {"p":[1,2],"write":"1","move":0,"next":"qh"}]}]}"#,
        ))
        .unwrap()
    }

    /// Outputs "1" with probability 7/8 using three fair coins: it writes 0
    /// only if all three coins come up 0.
    pub fn seven_eighths() -> PtmDescription {
        PtmDescription::from_spec(&spec(
            r#"{"kind":"ptm","states":["q0","q1","q2","qh"],"initial":"q0","halt":"qh","rules":[
            {"state":"q0","read":"_","branches":[
              {"p":[1,2],"write":"1","move":0,"next":"qh"},
              {"p":[1,2],"write":"_","move":0,"next":"q1"}]},
            {"state":"q1","read":"_","branches":[
              {"p":[1,2],"write":"1","move":0,"next":"qh"},
              {"p":[1,2],"write":"_","move":0,"next":"q2"}]},
            {"state":"q2","read":"_","branches":[
              {"p":[1,2],"write":"1","move":0,"next":"qh"},
              {"p":[1,2],"write":"0","move":0,"next":"qh"}]}]}"#,
        ))
        .unwrap()
    }
}
