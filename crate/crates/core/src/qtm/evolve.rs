use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::{Amp, Configuration, QtmDescription, SparseState};
use crate::error::{Error, Result};
use crate::machine::{Move, StateId, Symbol};

type Column<A> = Vec<(A, Symbol, Move, StateId)>;

/// Rule table with amplitudes converted to the simulation scalar.
pub(crate) struct Kernel<A> {
    halt: StateId,
    rules: BTreeMap<(StateId, Symbol), Column<A>>,
}

impl<A: Amp> Kernel<A> {
    pub(crate) fn new(m: &QtmDescription) -> Result<Self> {
        let mut rules = BTreeMap::new();
        for (&k, ts) in &m.rules {
            let v = ts.iter().map(|t| Ok((A::from_amplitude(&t.amp)?, t.write, t.mv, t.next))).collect::<Result<Vec<_>>>()?;
            rules.insert(k, v);
        }
        Ok(Self { halt: m.halt, rules })
    }

    /// Calls `emit` for every term of `U|c>`. A running configuration without
    /// a rule has no image.
    pub(crate) fn image(&self, c: &Configuration, mut emit: impl FnMut(Configuration, &A) -> Result<()>) -> Result<()> {
        if c.h {
            let next = Configuration { h: true, q: c.q, tape: c.tape.clone(), x: c.x + 1 };
            return emit(next, &A::one());
        }
        if let Some(ts) = self.rules.get(&(c.q, c.scanned())) {
            for (a, w, mv, q) in ts {
                let next = Configuration { h: *q == self.halt, q: *q, tape: c.tape.with(c.x, *w), x: c.x + mv.delta() };
                emit(next, a)?;
            }
        }
        Ok(())
    }

    pub(crate) fn image_state(&self, c: &Configuration) -> Result<SparseState<A>> {
        let mut out = SparseState::new();
        self.image(c, |n, a| out.add(n, a))?;
        Ok(out)
    }

    pub(crate) fn step(&self, psi: &SparseState<A>) -> Result<SparseState<A>> {
        let mut out = SparseState::new();
        let mut drifted = BTreeSet::new();
        let mut halted_into = BTreeSet::new();
        for (c, a) in psi.iter() {
            let was_halted = c.h;
            self.image(c, |n, t| {
                if was_halted {
                    drifted.insert(n.clone());
                } else if n.h {
                    halted_into.insert(n.clone());
                }
                out.add(n, &a.times(t)?)
            })?;
        }
        if let Some(c) = drifted.intersection(&halted_into).next() {
            return Err(Error::HaltCollision(format!(
                "configuration with state {} and head {} is reached both by drift and by halting",
                c.q, c.x
            )));
        }
        Ok(out)
    }
}

/// One application of the time-evolution operator.
pub fn step<A: Amp>(m: &QtmDescription, psi: &SparseState<A>) -> Result<SparseState<A>> {
    Kernel::new(m)?.step(psi)
}

fn guard_check(len: usize, guard: usize, t: usize) -> Result<()> {
    if len > guard {
        return Err(Error::Resource(format!("support grew to {len} configurations at step {t} (guard {guard})")));
    }
    Ok(())
}

/// `U^steps |psi>` without observation.
pub fn evolve<A: Amp>(m: &QtmDescription, psi: &SparseState<A>, steps: usize, guard: usize) -> Result<SparseState<A>> {
    let k = Kernel::new(m)?;
    let mut s = psi.clone();
    guard_check(s.len(), guard, 0)?;
    for t in 1..=steps {
        s = k.step(&s)?;
        guard_check(s.len(), guard, t)?;
    }
    Ok(s)
}

/// Like [`evolve`], also returning the support before each step. The supports
/// are the domains on which [`adjoint_step_on`] inverts the evolution.
pub fn evolve_recording<A: Amp>(
    m: &QtmDescription,
    psi: &SparseState<A>,
    steps: usize,
    guard: usize,
) -> Result<(SparseState<A>, Vec<BTreeSet<Configuration>>)> {
    let k = Kernel::new(m)?;
    let mut s = psi.clone();
    let mut supports = Vec::with_capacity(steps);
    guard_check(s.len(), guard, 0)?;
    for t in 1..=steps {
        supports.push(s.configurations().cloned().collect());
        s = k.step(&s)?;
        guard_check(s.len(), guard, t)?;
    }
    Ok((s, supports))
}

/// `P_D U^dagger |phi>`: the adjoint step projected onto the span of `domain`.
///
/// Globally the halting convention is not invertible (the halted sector drifts
/// rightwards into itself), but on the span of any support produced by a
/// collision-free forward step the evolution is an isometry, so this undoes
/// that step exactly.
pub fn adjoint_step_on<A: Amp>(m: &QtmDescription, domain: &BTreeSet<Configuration>, phi: &SparseState<A>) -> Result<SparseState<A>> {
    let k = Kernel::<A>::new(m)?;
    let mut out = SparseState::new();
    for c in domain {
        let mut acc = A::zero();
        k.image(c, |n, a| {
            if let Some(p) = phi.get(&n) {
                acc = acc.plus(&a.conj().times(p)?)?;
            }
            Ok(())
        })?;
        out.add(c.clone(), &acc)?;
    }
    Ok(out)
}

/// `<psi|phi>`.
pub fn inner_product<A: Amp>(psi: &SparseState<A>, phi: &SparseState<A>) -> Result<A> {
    let (small, large, flip) = if psi.len() <= phi.len() { (psi, phi, false) } else { (phi, psi, true) };
    let mut acc = A::zero();
    for (c, a) in small.iter() {
        if let Some(b) = large.get(c) {
            let term = if flip { b.conj().times(a)? } else { a.conj().times(b)? };
            acc = acc.plus(&term)?;
        }
    }
    Ok(acc)
}

/// `<psi|psi>`.
pub fn norm_sqr<A: Amp>(psi: &SparseState<A>) -> Result<A::Prob> {
    use crate::scalar::Mass;
    psi.iter().try_fold(A::Prob::zero(), |acc, (_, a)| acc.plus(&a.norm_sqr()?))
}
