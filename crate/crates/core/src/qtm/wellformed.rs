//! Local well-formedness conditions.
//!
//! The step map on the running sector is an isometry iff the images of any
//! two running configurations are orthonormal. Two images can only overlap
//! when the heads are at most two cells apart, which reduces the check to
//! finitely many local conditions on the rule columns `v_(q,s)` indexed by
//! `(next state, written symbol, move)`:
//!
//! * C1: every column has unit norm (a missing rule is a zero column);
//! * C2: columns of distinct keys are orthogonal (same head position);
//! * C3: heads one apart — for all keys and written symbols `t1`, `t2`:
//!   `sum_q' v1(t1,q',0) conj v2(t2,q',-1) + v1(t1,q',+1) conj v2(t2,q',0) = 0`;
//!   heads two apart — `sum_q' v1(t1,q',+1) conj v2(t2,q',-1) = 0`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Amp, Configuration, ConfigurationView, QtmDescription};
use crate::error::Result;
use crate::machine::{Move, StateId, Symbol, Tape};
use crate::scalar::{ExactAmplitude, Mass, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2,
    C3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    WellFormed,
    Violation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellFormednessReport {
    pub verdict: Verdict,
    pub condition: Option<Condition>,
    /// Two running configurations whose images are not orthonormal (the
    /// same configuration twice for a norm defect).
    pub witness: Option<(Configuration, Configuration)>,
    pub detail: String,
}

impl WellFormednessReport {
    pub fn is_well_formed(&self) -> bool {
        self.verdict == Verdict::WellFormed
    }

    pub fn witness_views(&self, m: &QtmDescription) -> Option<[ConfigurationView; 2]> {
        self.witness.as_ref().map(|(a, b)| [ConfigurationView::of(m, a), ConfigurationView::of(m, b)])
    }
}

type Column<A> = BTreeMap<(StateId, Symbol, Move), A>;

fn columns<A: Amp>(m: &QtmDescription) -> Result<BTreeMap<(StateId, Symbol), Column<A>>> {
    let mut cols = BTreeMap::new();
    for q in m.running_states() {
        for s in Symbol::ALL {
            let mut col: Column<A> = BTreeMap::new();
            for t in m.rules.get(&(q, s)).into_iter().flatten() {
                let a = A::from_amplitude(&t.amp)?;
                let e = col.entry((t.next, t.write, t.mv)).or_insert_with(A::zero);
                *e = e.plus(&a)?;
            }
            cols.insert((q, s), col);
        }
    }
    Ok(cols)
}

fn running(q: StateId, cells: &[(i64, Symbol)], x: i64) -> Configuration {
    let mut tape = Tape::new();
    for &(p, s) in cells {
        tape.write(p, s);
    }
    Configuration { h: false, q, tape, x }
}

/// `sum_q' v1(t1, q', d1) conj v2(t2, q', d2)` over the given move pairs.
fn overlap<A: Amp>(states: usize, v1: &Column<A>, t1: Symbol, v2: &Column<A>, t2: Symbol, moves: &[(Move, Move)]) -> Result<A> {
    let mut acc = A::zero();
    for q in 0..states as StateId {
        for &(d1, d2) in moves {
            if let (Some(a), Some(b)) = (v1.get(&(q, t1, d1)), v2.get(&(q, t2, d2))) {
                acc = acc.plus(&a.times(&b.conj())?)?;
            }
        }
    }
    Ok(acc)
}

fn inner<A: Amp>(v1: &Column<A>, v2: &Column<A>) -> Result<A> {
    let mut acc = A::zero();
    for (k, a) in v1 {
        if let Some(b) = v2.get(k) {
            acc = acc.plus(&a.times(&b.conj())?)?;
        }
    }
    Ok(acc)
}

fn check<A: Amp>(m: &QtmDescription, is_zero: impl Fn(&A) -> bool, is_unit: impl Fn(&A::Prob) -> bool) -> Result<WellFormednessReport> {
    let cols = columns::<A>(m)?;
    let n = m.names.len();
    let name = |q: StateId| &m.names[q as usize];
    let violation = |condition, a: Configuration, b: Configuration, detail: String| WellFormednessReport {
        verdict: Verdict::Violation,
        condition: Some(condition),
        witness: Some((a, b)),
        detail,
    };

    for (&(q, s), v) in &cols {
        let norm = v.values().try_fold(A::Prob::zero(), |acc, a| acc.plus(&a.norm_sqr()?))?;
        if !is_unit(&norm) {
            let c = running(q, &[(0, s)], 0);
            let detail = if v.is_empty() {
                format!("no rule for ({}, {}): its column is zero", name(q), s.as_char())
            } else {
                format!("column ({}, {}) has squared norm {}", name(q), s.as_char(), norm.to_f64())
            };
            return Ok(violation(Condition::C1, c.clone(), c, detail));
        }
    }

    let keys: Vec<_> = cols.keys().copied().collect();
    for (i, k1) in keys.iter().enumerate() {
        for k2 in &keys[i + 1..] {
            if !is_zero(&inner(&cols[k1], &cols[k2])?) {
                return Ok(violation(
                    Condition::C2,
                    running(k1.0, &[(0, k1.1)], 0),
                    running(k2.0, &[(0, k2.1)], 0),
                    format!("columns ({}, {}) and ({}, {}) are not orthogonal", name(k1.0), k1.1.as_char(), name(k2.0), k2.1.as_char()),
                ));
            }
        }
    }

    const ADJACENT: [(Move, Move); 2] = [(Move::Stay, Move::Left), (Move::Right, Move::Stay)];
    const GAP: [(Move, Move); 1] = [(Move::Right, Move::Left)];
    for k1 in &keys {
        for k2 in &keys {
            for t1 in Symbol::ALL {
                for t2 in Symbol::ALL {
                    let (v1, v2) = (&cols[k1], &cols[k2]);
                    if !is_zero(&overlap(n, v1, t1, v2, t2, &ADJACENT)?) {
                        return Ok(violation(
                            Condition::C3,
                            running(k1.0, &[(0, k1.1), (1, t2)], 0),
                            running(k2.0, &[(0, t1), (1, k2.1)], 1),
                            format!(
                                "({}, {}) writing {} and ({}, {}) one cell to the right writing {} interfere",
                                name(k1.0),
                                k1.1.as_char(),
                                t1.as_char(),
                                name(k2.0),
                                k2.1.as_char(),
                                t2.as_char()
                            ),
                        ));
                    }
                    if !is_zero(&overlap(n, v1, t1, v2, t2, &GAP)?) {
                        return Ok(violation(
                            Condition::C3,
                            running(k1.0, &[(0, k1.1), (2, t2)], 0),
                            running(k2.0, &[(0, t1), (2, k2.1)], 2),
                            format!(
                                "({}, {}) writing {} and ({}, {}) two cells to the right writing {} interfere",
                                name(k1.0),
                                k1.1.as_char(),
                                t1.as_char(),
                                name(k2.0),
                                k2.1.as_char(),
                                t2.as_char()
                            ),
                        ));
                    }
                }
            }
        }
    }

    Ok(WellFormednessReport { verdict: Verdict::WellFormed, condition: None, witness: None, detail: String::from("C1-C3 hold") })
}

/// Exact check of C1-C3. Machines with float amplitudes are rejected with
/// an unsupported-amplitude error.
pub fn check_well_formed(m: &QtmDescription) -> Result<WellFormednessReport> {
    check::<ExactAmplitude>(m, |a| a.is_zero(), |p| p.real_cmp(&ExactAmplitude::ONE) == Ok(Ordering::Equal))
}

/// C1-C3 up to `tol`, for machines given with float amplitudes.
pub fn check_well_formed_approx(m: &QtmDescription, tol: f64) -> Result<WellFormednessReport> {
    check::<C64>(m, |a| a.norm() <= tol, |p| libm::fabs(p - 1.0) <= tol)
}
