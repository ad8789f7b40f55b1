//! Deterministic Turing machines over the alphabet `{0, 1, blank}`.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::error::{validation, Result};
use crate::machine::{BranchSpec, MachineKind, MachineSpec, Move, RuleSpec, StateId, Symbol, Tape};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TmAction {
    pub write: Symbol,
    pub mv: Move,
    pub next: StateId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TmDescription {
    pub names: Vec<String>,
    pub initial: StateId,
    pub halt: StateId,
    pub rules: BTreeMap<(StateId, Symbol), TmAction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Halted,
    StepBudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub status: RunStatus,
    /// Present iff the machine halted.
    pub tape: Option<String>,
    pub steps: u64,
}

impl TmDescription {
    pub fn from_spec(spec: &MachineSpec) -> Result<Self> {
        if spec.kind != MachineKind::Tm {
            return Err(validation("expected a machine of kind \"tm\""));
        }
        let idx = spec.state_index()?;
        let halt = MachineSpec::lookup(&idx, &spec.halt)?;
        let mut rules = BTreeMap::new();
        for r in &spec.rules {
            let state = MachineSpec::lookup(&idx, &r.state)?;
            if state == halt {
                return Err(validation("the halting state has no transition rules"));
            }
            let [b] = r.branches.as_slice() else {
                return Err(validation(format!("deterministic rule ({}, {:?}) needs exactly one branch", r.state, r.read)));
            };
            if b.p.is_some_and(|(n, d)| n != d) || b.amplitude.is_some() {
                return Err(validation("deterministic branches carry no probability or amplitude"));
            }
            let action = TmAction { write: b.write, mv: b.mv, next: MachineSpec::lookup(&idx, &b.next)? };
            if rules.insert((state, r.read), action).is_some() {
                return Err(validation(format!("more than one rule for ({}, {:?})", r.state, r.read)));
            }
        }
        Ok(Self { names: spec.states.clone(), initial: MachineSpec::lookup(&idx, &spec.initial)?, halt, rules })
    }

    pub fn to_spec(&self) -> MachineSpec {
        let name = |s: StateId| self.names[s as usize].clone();
        MachineSpec {
            kind: MachineKind::Tm,
            states: self.names.clone(),
            initial: name(self.initial),
            halt: name(self.halt),
            rules: self
                .rules
                .iter()
                .map(|(&(q, s), a)| RuleSpec {
                    state: name(q),
                    read: s,
                    branches: alloc::vec![BranchSpec { p: None, amplitude: None, write: a.write, mv: a.mv, next: name(a.next) }],
                })
                .collect(),
        }
        .canonical()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s as usize]
    }
}

/// Growable two-way tape backed by a deque.
#[derive(Clone, Debug)]
pub(crate) struct DenseTape {
    cells: VecDeque<Symbol>,
    /// Tape position of `cells[0]`.
    origin: i64,
}

impl DenseTape {
    pub(crate) fn from_input(input: &str) -> Result<Self> {
        let t = Tape::from_input(input)?;
        let mut cells: VecDeque<Symbol> = (0..input.chars().count() as i64).map(|p| t.read(p)).collect();
        if cells.is_empty() {
            cells.push_back(Symbol::Blank);
        }
        Ok(Self { cells, origin: 0 })
    }

    fn slot(&mut self, pos: i64) -> &mut Symbol {
        while pos < self.origin {
            self.cells.push_front(Symbol::Blank);
            self.origin -= 1;
        }
        while pos >= self.origin + self.cells.len() as i64 {
            self.cells.push_back(Symbol::Blank);
        }
        &mut self.cells[(pos - self.origin) as usize]
    }

    pub(crate) fn read(&mut self, pos: i64) -> Symbol {
        *self.slot(pos)
    }

    pub(crate) fn write(&mut self, pos: i64, s: Symbol) {
        *self.slot(pos) = s;
    }

    pub(crate) fn render(&self) -> String {
        let s: String = self.cells.iter().map(|c| c.as_char()).collect();
        String::from(s.trim_matches('_'))
    }
}

/// Runs `m` on `input` for at most `budget` steps.
///
/// The head starts over position 0, the first input cell. A missing rule
/// sends the machine to its halting state in one step.
pub fn tm_run(m: &TmDescription, input: &str, budget: u64) -> Result<RunResult> {
    if budget == 0 {
        return Err(validation("step budget must be at least 1"));
    }
    let mut tape = DenseTape::from_input(input)?;
    let mut state = m.initial;
    let mut head = 0i64;
    let mut steps = 0u64;
    while state != m.halt {
        if steps >= budget {
            return Ok(RunResult { status: RunStatus::StepBudgetExhausted, tape: None, steps });
        }
        let sym = tape.read(head);
        steps += 1;
        match m.rules.get(&(state, sym)) {
            None => state = m.halt,
            Some(a) => {
                tape.write(head, a.write);
                head += a.mv.delta();
                state = a.next;
            }
        }
    }
    Ok(RunResult { status: RunStatus::Halted, tape: Some(tape.render()), steps })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn spec(json: &str) -> MachineSpec {
        MachineSpec::from_json(json).unwrap()
    }

    pub fn immediate_halt() -> TmDescription {
        TmDescription::from_spec(&spec(r#"{"kind":"tm","states":["q0","qh"],"initial":"q0","halt":"qh","rules":[]}"#)).unwrap()
    }

    pub fn bit_flip() -> TmDescription {
        TmDescription::from_spec(&spec(
            r#"{"kind":"tm","states":["q0","qh"],"initial":"q0","halt":"qh","rules":[
            {"state":"q0","read":"0","branches":[{"write":"1","move":0,"next":"qh"}]},
            {"state":"q0","read":"1","branches":[{"write":"0","move":0,"next":"qh"}]}]}"#,
        ))
        .unwrap()
    }

    pub fn right_forever() -> TmDescription {
        TmDescription::from_spec(&spec(
            r#"{"kind":"tm","states":["q0","qh"],"initial":"q0","halt":"qh","rules":[
            {"state":"q0","read":"0","branches":[{"write":"0","move":1,"next":"q0"}]},
            {"state":"q0","read":"1","branches":[{"write":"1","move":1,"next":"q0"}]},
            {"state":"q0","read":"_","branches":[{"write":"_","move":1,"next":"q0"}]}]}"#,
        ))
        .unwrap()
    }
}
