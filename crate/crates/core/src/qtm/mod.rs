//! Quantum Turing machines.
//!
//! The computation basis is `|h>|q>|T>|x>`: halt bit, internal state, finite
//! tape content and head position. One step applies a finite table of local
//! rules keyed by `(state, scanned symbol)`; each rule maps to a superposition
//! of `(written symbol, move, next state)` targets. The halt bit is derived:
//! it becomes 1 exactly when the next state is the halting state. Halted
//! branches never touch state or tape again; their head drifts one cell to the
//! right per step.
//!
//! Everything here is generic over [`Amp`], so the same engine runs with exact
//! Z[i, 1/sqrt(2)] amplitudes or with doubles.

mod amp;
pub mod corpus;
mod evolve;
mod observe;
mod oracle;
mod wellformed;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use amp::{Amp, Amplitude};
pub use evolve::{adjoint_step_on, evolve, evolve_recording, inner_product, norm_sqr, step};
pub use observe::{
    halt_probability, measure_halt, measure_halt_branch, observation_branches, output_distribution, sample_run, HaltCollapse,
    ObservedBranch, QtmOutput, QtmSampler,
};
pub use oracle::{default_oracle_seeds, finite_section_unitarity_oracle, OracleReport};
pub use wellformed::{check_well_formed, check_well_formed_approx, Condition, Verdict, WellFormednessReport};

use crate::error::{validation, Result};
use crate::machine::{BranchSpec, MachineKind, MachineSpec, Move, RuleSpec, StateId, Symbol, Tape};

/// One term of a local rule: amplitude, written symbol, move and next state.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleTarget {
    pub amp: Amplitude,
    pub write: Symbol,
    pub mv: Move,
    pub next: StateId,
}

/// Local transition rule for one `(state, symbol)` key.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRule {
    pub state: StateId,
    pub read: Symbol,
    pub targets: Vec<RuleTarget>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QtmDescription {
    pub names: Vec<String>,
    pub initial: StateId,
    pub halt: StateId,
    pub rules: BTreeMap<(StateId, Symbol), Vec<RuleTarget>>,
}

impl QtmDescription {
    pub fn from_spec(spec: &MachineSpec) -> Result<Self> {
        if spec.kind != MachineKind::Qtm {
            return Err(validation("expected a machine of kind \"qtm\""));
        }
        let idx = spec.state_index()?;
        let halt = MachineSpec::lookup(&idx, &spec.halt)?;
        let mut rules = BTreeMap::new();
        for r in &spec.rules {
            let state = MachineSpec::lookup(&idx, &r.state)?;
            if state == halt {
                return Err(validation("the halting state has no transition rules (halted branches follow the fixed drift rule)"));
            }
            let mut targets = Vec::with_capacity(r.branches.len());
            for b in &r.branches {
                if b.p.is_some() {
                    return Err(validation("quantum branches carry an amplitude, not a probability"));
                }
                let amp = b.amplitude.ok_or_else(|| validation(format!("branch of ({}, {:?}) lacks an amplitude", r.state, r.read)))?;
                targets.push(RuleTarget { amp, write: b.write, mv: b.mv, next: MachineSpec::lookup(&idx, &b.next)? });
            }
            if rules.insert((state, r.read), targets).is_some() {
                return Err(validation(format!("more than one rule for ({}, {:?})", r.state, r.read)));
            }
        }
        Ok(Self { names: spec.states.clone(), initial: MachineSpec::lookup(&idx, &spec.initial)?, halt, rules })
    }

    pub fn to_spec(&self) -> MachineSpec {
        let name = |s: StateId| self.names[s as usize].clone();
        MachineSpec {
            kind: MachineKind::Qtm,
            states: self.names.clone(),
            initial: name(self.initial),
            halt: name(self.halt),
            rules: self
                .rules
                .iter()
                .map(|(&(q, s), ts)| RuleSpec {
                    state: name(q),
                    read: s,
                    branches: ts
                        .iter()
                        .map(|t| BranchSpec { p: None, amplitude: Some(t.amp), write: t.write, mv: t.mv, next: name(t.next) })
                        .collect(),
                })
                .collect(),
        }
        .canonical()
    }

    /// All amplitudes lie in the exact ring.
    pub fn is_exact(&self) -> bool {
        self.rules.values().flatten().all(|t| matches!(t.amp, Amplitude::Exact(_)))
    }

    pub fn running_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.names.len() as StateId).filter(move |&q| q != self.halt)
    }

    pub fn local_rules(&self) -> Vec<LocalRule> {
        self.rules.iter().map(|(&(state, read), t)| LocalRule { state, read, targets: t.clone() }).collect()
    }

    /// Largest number of targets of any rule, at least one.
    pub fn max_branching(&self) -> usize {
        self.rules.values().map(Vec::len).max().unwrap_or(1).max(1)
    }

    /// Lifts a reversible deterministic machine: every rule gets amplitude 1.
    pub fn from_tm(tm: &crate::tm::TmDescription) -> Self {
        let rules = tm
            .rules
            .iter()
            .map(|(&k, a)| {
                (
                    k,
                    alloc::vec![RuleTarget {
                        amp: Amplitude::Exact(crate::scalar::ExactAmplitude::ONE),
                        write: a.write,
                        mv: a.mv,
                        next: a.next
                    }],
                )
            })
            .collect();
        Self { names: tm.names.clone(), initial: tm.initial, halt: tm.halt, rules }
    }
}

/// A computation-basis state `|h>|q>|T>|x>`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub h: bool,
    pub q: StateId,
    pub tape: Tape,
    pub x: i64,
}

impl Configuration {
    /// `|0>|q0>|input>|0>`.
    pub fn input(m: &QtmDescription, bits: &str) -> Result<Self> {
        Ok(Self { h: false, q: m.initial, tape: Tape::from_input(bits)?, x: 0 })
    }

    pub fn scanned(&self) -> Symbol {
        self.tape.read(self.x)
    }

    /// Short human-readable digest: `h|state|tape|head`.
    pub fn digest(&self, m: &QtmDescription) -> String {
        let (lo, tape) = match self.tape.extent() {
            Some((lo, _)) => (lo, self.tape.render()),
            None => (0, String::new()),
        };
        format!("{}|{}|{}@{}|{}", self.h as u8, m.names[self.q as usize], tape, lo, self.x)
    }
}

/// Finite superposition of configurations. Exact zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<A> {
    amps: BTreeMap<Configuration, A>,
}

impl<A: Amp> Default for SparseState<A> {
    fn default() -> Self {
        Self { amps: BTreeMap::new() }
    }
}

impl<A: Amp> SparseState<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(c: Configuration) -> Self {
        let mut s = Self::new();
        s.amps.insert(c, A::one());
        s
    }

    /// Adds `a` to the amplitude of `c`, pruning exact zeros.
    pub fn add(&mut self, c: Configuration, a: &A) -> Result<()> {
        match self.amps.get(&c) {
            Some(cur) => {
                let v = cur.plus(a)?;
                if v.is_zero() {
                    self.amps.remove(&c);
                } else {
                    self.amps.insert(c, v);
                }
            }
            None => {
                if !a.is_zero() {
                    self.amps.insert(c, a.clone());
                }
            }
        }
        Ok(())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Configuration, A)>) -> Result<Self> {
        let mut s = Self::new();
        for (c, a) in pairs {
            s.add(c, &a)?;
        }
        Ok(s)
    }

    /// Equal-weight superposition of basis inputs. Exact amplitudes need the
    /// number of inputs to be a power of two.
    pub fn superposed_inputs(m: &QtmDescription, inputs: &[&str]) -> Result<Self> {
        if inputs.is_empty() {
            return Err(validation("at least one input is required"));
        }
        let amp = A::uniform_amplitude(inputs.len())?;
        let mut s = Self::new();
        for bits in inputs {
            let c = Configuration::input(m, bits)?;
            if s.amps.contains_key(&c) {
                return Err(validation(format!("input {bits:?} listed twice")));
            }
            s.add(c, &amp)?;
        }
        Ok(s)
    }

    pub fn get(&self, c: &Configuration) -> Option<&A> {
        self.amps.get(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &A)> {
        self.amps.iter()
    }

    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        self.amps.keys()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn map_amplitudes(&self, f: impl Fn(&A) -> Result<A>) -> Result<Self> {
        let mut s = Self::new();
        for (c, a) in &self.amps {
            s.add(c.clone(), &f(a)?)?;
        }
        Ok(s)
    }

    pub fn filter(&self, keep: impl Fn(&Configuration) -> bool) -> Self {
        Self { amps: self.amps.iter().filter(|(c, _)| keep(c)).map(|(c, a)| (c.clone(), a.clone())).collect() }
    }

    pub fn to_float(&self) -> SparseState<crate::scalar::C64> {
        SparseState { amps: self.amps.iter().map(|(c, a)| (c.clone(), a.to_c64())).collect() }
    }
}

/// Entry of a state listing used in reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfigurationView {
    pub h: u8,
    pub state: String,
    pub tape: String,
    pub tape_origin: i64,
    pub head: i64,
}

impl ConfigurationView {
    pub fn of(m: &QtmDescription, c: &Configuration) -> Self {
        Self {
            h: c.h as u8,
            state: m.names[c.q as usize].clone(),
            tape: c.tape.render(),
            tape_origin: c.tape.extent().map(|e| e.0).unwrap_or(0),
            head: c.x,
        }
    }
}
