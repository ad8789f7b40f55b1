//! Shared machine vocabulary: tape symbols, head moves, sparse tapes, the
//! JSON machine description and its Gödel numbering.
//!
//! A machine is encoded by serializing its canonical JSON description, reading
//! the bytes as a base-256 natural, and appending a two-bit kind tag:
//! `code = bytes * 4 + tag` with `tm = 0`, `ptm = 1`, `qtm = 2`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::encoding::{bytes_to_nat, nat_to_bytes};
use crate::error::{validation, Error, Result};
use crate::ptm::PtmDescription;
use crate::qtm::Amplitude;
use crate::qtm::QtmDescription;
use crate::tm::TmDescription;

/// Tape alphabet `{0, 1, blank}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "_")]
    Blank,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Blank];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Blank => '_',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            '_' | ' ' => Some(Symbol::Blank),
            _ => None,
        }
    }
}

/// Head displacement, one of -1, 0, +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Stay, Move::Right];

    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Stay => 0,
            Move::Right => 1,
        }
    }
}

impl TryFrom<i8> for Move {
    type Error = Error;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Move::Left),
            0 => Ok(Move::Stay),
            1 => Ok(Move::Right),
            _ => Err(validation(format!("move must be -1, 0 or 1, got {v}"))),
        }
    }
}

impl From<Move> for i8 {
    fn from(m: Move) -> i8 {
        m.delta() as i8
    }
}

pub type StateId = u16;

/// Finite tape content; absent cells are blank.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tape {
    cells: BTreeMap<i64, Symbol>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Input written from position 0 rightwards. Accepts `0`, `1` and `_`.
    pub fn from_input(input: &str) -> Result<Self> {
        let mut t = Self::new();
        for (i, c) in input.chars().enumerate() {
            let s = Symbol::from_char(c).ok_or_else(|| validation(format!("invalid tape character {c:?}")))?;
            t.write(i as i64, s);
        }
        Ok(t)
    }

    pub fn read(&self, pos: i64) -> Symbol {
        self.cells.get(&pos).copied().unwrap_or(Symbol::Blank)
    }

    pub fn write(&mut self, pos: i64, s: Symbol) {
        if s == Symbol::Blank {
            self.cells.remove(&pos);
        } else {
            self.cells.insert(pos, s);
        }
    }

    pub fn with(&self, pos: i64, s: Symbol) -> Self {
        let mut t = self.clone();
        t.write(pos, s);
        t
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, Symbol)> + '_ {
        self.cells.iter().map(|(p, s)| (*p, *s))
    }

    pub fn extent(&self) -> Option<(i64, i64)> {
        Some((*self.cells.keys().next()?, *self.cells.keys().next_back()?))
    }

    /// Content between the outermost non-blank cells; interior blanks are `_`.
    pub fn render(&self) -> String {
        match self.extent() {
            None => String::new(),
            Some((lo, hi)) => (lo..=hi).map(|p| self.read(p).as_char()).collect(),
        }
    }
}

impl fmt::Display for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Tm,
    Ptm,
    Qtm,
}

impl MachineKind {
    fn tag(self) -> u32 {
        match self {
            MachineKind::Tm => 0,
            MachineKind::Ptm => 1,
            MachineKind::Qtm => 2,
        }
    }

    fn from_tag(t: u32) -> Option<Self> {
        match t {
            0 => Some(MachineKind::Tm),
            1 => Some(MachineKind::Ptm),
            2 => Some(MachineKind::Qtm),
            _ => None,
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::Tm => "tm",
            MachineKind::Ptm => "ptm",
            MachineKind::Qtm => "qtm",
        })
    }
}

impl core::str::FromStr for MachineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tm" => Ok(MachineKind::Tm),
            "ptm" => Ok(MachineKind::Ptm),
            "qtm" => Ok(MachineKind::Qtm),
            _ => Err(validation(format!("unknown machine kind {s:?}"))),
        }
    }
}

/// One outcome of a rule. `p` is used by probabilistic machines, `amplitude`
/// by quantum ones; deterministic machines leave both out.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Amplitude>,
    pub write: Symbol,
    #[serde(rename = "move")]
    pub mv: Move,
    pub next: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub state: String,
    pub read: Symbol,
    pub branches: Vec<BranchSpec>,
}

/// The machine JSON schema shared by all three kinds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub kind: MachineKind,
    pub states: Vec<String>,
    pub initial: String,
    pub halt: String,
    pub rules: Vec<RuleSpec>,
}

impl MachineSpec {
    /// Sorted states, rules and branches; implicit probability on
    /// deterministic branches dropped.
    pub fn canonical(&self) -> Self {
        let mut s = self.clone();
        s.states.sort();
        s.states.dedup();
        for r in &mut s.rules {
            for b in &mut r.branches {
                if s.kind == MachineKind::Tm && b.p == Some((1, 1)) {
                    b.p = None;
                }
                if let Some((n, d)) = b.p {
                    let g = num_integer::gcd(n, d).max(1);
                    b.p = Some((n / g, d / g));
                }
            }
            r.branches.sort();
        }
        s.rules.sort_by(|a, b| (&a.state, a.read).cmp(&(&b.state, b.read)));
        s
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("machine spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| validation(format!("machine JSON: {e}")))
    }

    /// Maps state names to dense ids. `initial` and `halt` must be listed.
    pub(crate) fn state_index(&self) -> Result<BTreeMap<String, StateId>> {
        let mut idx = BTreeMap::new();
        for (i, name) in self.states.iter().enumerate() {
            if idx.insert(name.clone(), i as StateId).is_some() {
                return Err(validation(format!("duplicate state {name:?}")));
            }
        }
        for name in [&self.initial, &self.halt] {
            if !idx.contains_key(name) {
                return Err(validation(format!("state {name:?} is not declared")));
            }
        }
        if self.initial == self.halt {
            return Err(validation("initial and halting state must differ"));
        }
        Ok(idx)
    }

    pub(crate) fn lookup(idx: &BTreeMap<String, StateId>, name: &str) -> Result<StateId> {
        idx.get(name).copied().ok_or_else(|| validation(format!("undeclared state {name:?}")))
    }
}

/// A decoded machine of any kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Machine {
    Tm(TmDescription),
    Ptm(PtmDescription),
    Qtm(QtmDescription),
}

impl Machine {
    pub fn from_spec(spec: &MachineSpec) -> Result<Self> {
        Ok(match spec.kind {
            MachineKind::Tm => Machine::Tm(TmDescription::from_spec(spec)?),
            MachineKind::Ptm => Machine::Ptm(PtmDescription::from_spec(spec)?),
            MachineKind::Qtm => Machine::Qtm(QtmDescription::from_spec(spec)?),
        })
    }

    pub fn to_spec(&self) -> MachineSpec {
        match self {
            Machine::Tm(m) => m.to_spec(),
            Machine::Ptm(m) => m.to_spec(),
            Machine::Qtm(m) => m.to_spec(),
        }
    }

    pub fn kind(&self) -> MachineKind {
        match self {
            Machine::Tm(_) => MachineKind::Tm,
            Machine::Ptm(_) => MachineKind::Ptm,
            Machine::Qtm(_) => MachineKind::Qtm,
        }
    }
}

/// Gödel number of a machine.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineCode {
    pub value: BigUint,
    pub kind: MachineKind,
}

impl MachineCode {
    pub fn from_value(value: BigUint) -> Result<Self> {
        let tag = (&value % 4u32).to_u32().unwrap_or(3);
        let kind = MachineKind::from_tag(tag).ok_or_else(|| Error::NotAMachine("kind tag 3 is unused".into()))?;
        Ok(Self { value, kind })
    }
}

impl fmt::Display for MachineCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Validates `spec` and returns the code of its canonical form.
pub fn encode(spec: &MachineSpec) -> Result<MachineCode> {
    Machine::from_spec(spec)?;
    let json = spec.to_canonical_json();
    let value = (bytes_to_nat(json.as_bytes()) << 2u32) + spec.kind.tag();
    Ok(MachineCode { value, kind: spec.kind })
}

pub fn encode_machine(m: &Machine) -> Result<MachineCode> {
    encode(&m.to_spec())
}

/// Recovers the machine a code describes.
pub fn decode(value: &BigUint) -> Result<Machine> {
    let code = MachineCode::from_value(value.clone())?;
    let bytes = nat_to_bytes(&(value >> 2u32));
    let text = core::str::from_utf8(&bytes).map_err(|_| Error::NotAMachine("payload is not UTF-8".into()))?;
    let spec: MachineSpec =
        serde_json::from_str(text).map_err(|e| Error::NotAMachine(format!("payload is not a machine description: {e}")))?;
    if spec.kind != code.kind {
        return Err(Error::NotAMachine(format!("kind tag says {} but description says {}", code.kind, spec.kind)));
    }
    Machine::from_spec(&spec).map_err(|e| Error::NotAMachine(e.to_string()))
}
