//! Bounded universality probes for deterministic and probabilistic machines.
//!
//! A candidate is fed `pair(n, m)` as a single tape: the target's program
//! ([`crate::utm::program_tape`]), a blank, then `m`. The natural number
//! `pair(n, nat(m))` is reported alongside so each test case has a numeric
//! name. Both sides run under the same step budget.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::encoding::{bits_to_nat, pair};
use crate::error::{validation, Result};
use crate::machine::{decode, Machine};
use crate::ptm::{ptm_exact_distribution, PtmDescription};
use crate::scalar::OutputDistribution;
use crate::tm::TmDescription;
use crate::utm::utm_input;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    Mismatch,
    Inconclusive,
}

/// Halted mass within the budget plus the mass still running.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedOutcome {
    pub halted: OutputDistribution<BigRational>,
    pub residual: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeEntry {
    pub target: BigUint,
    pub input: String,
    pub pair: BigUint,
    pub verdict: Verdict,
    pub target_outcome: Option<BoundedOutcome>,
    pub candidate_outcome: Option<BoundedOutcome>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub candidate: BigUint,
    pub budget: u64,
    pub entries: Vec<ProbeEntry>,
}

impl ProbeReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.entries.iter().filter(|e| e.verdict == v).count()
    }

    /// Index of the first case that disproves universality.
    pub fn witness(&self) -> Option<usize> {
        self.entries.iter().position(|e| e.verdict == Verdict::Mismatch)
    }

    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Match)
    }
}

/// The machine with no rules: it halts at once and outputs its input.
pub fn identity_machine() -> TmDescription {
    TmDescription { names: ["q0", "qh"].map(String::from).to_vec(), initial: 0, halt: 1, rules: Default::default() }
}

fn as_ptm(m: &Machine, role: &str) -> Result<PtmDescription> {
    match m {
        Machine::Tm(t) => Ok(PtmDescription::from_tm(t)),
        Machine::Ptm(p) => Ok(p.clone()),
        Machine::Qtm(_) => Err(validation(format!("the {role} must be a TM or PTM, not a QTM"))),
    }
}

/// A PTM whose every rule has one branch, read as a TM.
fn deterministic_view(m: &Machine) -> Option<TmDescription> {
    match m {
        Machine::Tm(t) => Some(t.clone()),
        Machine::Ptm(p) => {
            let mut rules = alloc::collections::BTreeMap::new();
            for (&k, bs) in &p.rules {
                let [b] = bs.as_slice() else { return None };
                rules.insert(k, crate::tm::TmAction { write: b.write, mv: b.mv, next: b.next });
            }
            Some(TmDescription { names: p.names.clone(), initial: p.initial, halt: p.halt, rules })
        }
        Machine::Qtm(_) => None,
    }
}

fn bounded(m: &PtmDescription, input: &str, budget: u64, guard: usize) -> Result<BoundedOutcome> {
    let d = ptm_exact_distribution(m, input, budget, guard)?;
    Ok(BoundedOutcome { halted: d.halted, residual: d.residual })
}

/// Compares two bounded outcomes.
///
/// Halted mass only grows with more steps, so a label whose mass on one side
/// already exceeds everything the other side could still reach is a proof of
/// difference even when mass is still running.
pub fn compare(a: &BoundedOutcome, b: &BoundedOutcome) -> Verdict {
    let done = a.residual.is_zero() && b.residual.is_zero();
    if done {
        return if a.halted == b.halted { Verdict::Match } else { Verdict::Mismatch };
    }
    let exceeds =
        |x: &BoundedOutcome, y: &BoundedOutcome| x.halted.iter().any(|(label, p)| (p - y.halted.get(label) - &y.residual).is_positive());
    if exceeds(a, b) || exceeds(b, a) {
        Verdict::Mismatch
    } else {
        Verdict::Inconclusive
    }
}

/// Runs `candidate` on every `(n, m)` test case and compares with `n` on `m`.
pub fn universality_probe(candidate: &BigUint, tests: &[(BigUint, String)], budget: u64, guard: usize) -> Result<ProbeReport> {
    let cand = as_ptm(&decode(candidate)?, "candidate")?;
    let mut entries = Vec::with_capacity(tests.len());
    for (n, m) in tests {
        let target = decode(n)?;
        let nat = bits_to_nat(m).ok_or_else(|| validation(format!("test input {m:?} is not a bit string")))?;
        let target_outcome = bounded(&as_ptm(&target, "target")?, m, budget, guard)?;
        let mut entry = ProbeEntry {
            target: n.clone(),
            input: m.clone(),
            pair: pair(n, &nat),
            verdict: Verdict::Inconclusive,
            target_outcome: None,
            candidate_outcome: None,
            note: None,
        };
        match deterministic_view(&target) {
            None => entry.note = Some("probabilistic targets have no program tape".to_string()),
            Some(t) => {
                let tape = utm_input(&t, m)?;
                let out = bounded(&cand, &tape, budget, guard)?;
                entry.verdict = compare(&target_outcome, &out);
                entry.candidate_outcome = Some(out);
            }
        }
        entry.target_outcome = Some(target_outcome);
        entries.push(entry);
    }
    Ok(ProbeReport { candidate: candidate.clone(), budget, entries })
}
