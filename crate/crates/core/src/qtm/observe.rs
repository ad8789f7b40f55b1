use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::evolve::{norm_sqr, Kernel};
use super::{Amp, QtmDescription, SparseState};
use crate::error::{validation, Error, Result};
use crate::ptm::{counts_to_distribution, SHOT_CHUNK, UNHALTED};
use crate::scalar::{Mass, OutputDistribution};

/// `P(h = 1)` for a normalized state.
pub fn halt_probability<A: Amp>(psi: &SparseState<A>) -> Result<A::Prob> {
    norm_sqr(&psi.filter(|c| c.h))
}

/// One branch of a halt-bit measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct HaltCollapse<A: Amp> {
    pub outcome: bool,
    pub probability: A::Prob,
    /// Post-measurement state; renormalized whenever `1/sqrt(p)` is
    /// representable, otherwise left as the bare projection.
    pub state: SparseState<A>,
    pub normalized: bool,
}

/// Projects onto halt outcome `outcome`.
pub fn measure_halt_branch<A: Amp>(psi: &SparseState<A>, outcome: bool) -> Result<HaltCollapse<A>> {
    let projected = psi.filter(|c| c.h == outcome);
    let probability = norm_sqr(&projected)?;
    if probability.sign()? != Ordering::Greater {
        return Err(Error::InvalidBranch);
    }
    let (state, normalized) = match A::inv_sqrt(&probability) {
        Some(s) => (projected.map_amplitudes(|a| a.times(&s))?, true),
        None => (projected, false),
    };
    Ok(HaltCollapse { outcome, probability, state, normalized })
}

/// Born-rule sample of the halt bit.
pub fn measure_halt<A: Amp, R: Rng + ?Sized>(psi: &SparseState<A>, rng: &mut R) -> Result<HaltCollapse<A>> {
    let p1 = halt_probability(psi)?.to_f64();
    let outcome = rng.gen::<f64>() < p1;
    match measure_halt_branch(psi, outcome) {
        // Rounding can pick a branch of vanishing weight; take the other one.
        Err(Error::InvalidBranch) => measure_halt_branch(psi, !outcome),
        r => r,
    }
}

/// Outcome of a full observation: the halt bit and, when it reads 1, the tape.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedBranch<A: Amp> {
    /// Tape content, or [`UNHALTED`] for the `h = 0` branch.
    pub label: String,
    pub probability: A::Prob,
    /// Unnormalized projection of the observed state onto this branch.
    pub projection: SparseState<A>,
}

/// All branches with non-zero weight of "measure the halt bit, read the tape
/// if it is set".
pub fn observation_branches<A: Amp>(psi: &SparseState<A>) -> Result<Vec<ObservedBranch<A>>> {
    let mut parts: BTreeMap<String, SparseState<A>> = BTreeMap::new();
    for (c, a) in psi.iter() {
        let label = if c.h { c.tape.render() } else { String::from(UNHALTED) };
        parts.entry(label).or_default().add(c.clone(), a)?;
    }
    let mut out = Vec::new();
    for (label, projection) in parts {
        let probability = norm_sqr(&projection)?;
        if probability.sign()? == Ordering::Greater {
            out.push(ObservedBranch { label, probability, projection });
        }
    }
    Ok(out)
}

/// Output distribution over tape contents for halts observed by the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct QtmOutput<P> {
    pub halted: OutputDistribution<P>,
    /// Mass still unhalted at the horizon; never renormalized away.
    pub residual: P,
    /// Halt mass first seen at each observed step, in step order.
    pub by_step: Vec<(usize, P)>,
}

impl<P: Mass> QtmOutput<P> {
    /// Halted outcomes plus the residual under [`UNHALTED`].
    pub fn as_complete(&self) -> Result<OutputDistribution<P>> {
        let mut d = self.halted.clone();
        d.add_mass(UNHALTED, &self.residual)?;
        Ok(d)
    }
}

fn effective_schedule(horizon: usize, schedule: &[usize]) -> Result<BTreeSet<usize>> {
    let mut s = BTreeSet::new();
    for &t in schedule {
        if t == 0 || t > horizon {
            return Err(validation(alloc::format!("observation step {t} outside 1..={horizon}")));
        }
        s.insert(t);
    }
    // The horizon is always observed, otherwise halts after the last
    // scheduled step would silently vanish into the residual.
    if horizon > 0 {
        s.insert(horizon);
    }
    Ok(s)
}

/// Exact output distribution: evolve, and at each scheduled step project the
/// halted part out, reading its tape. The horizon is always an observation.
pub fn output_distribution<A: Amp>(
    m: &QtmDescription,
    input: &SparseState<A>,
    horizon: usize,
    schedule: &[usize],
    guard: usize,
) -> Result<QtmOutput<A::Prob>> {
    if input.is_empty() {
        return Err(validation("empty input state"));
    }
    if input.configurations().any(|c| c.h || c.q != m.initial) {
        return Err(validation("input states must be unhalted and in the initial state"));
    }
    let observe = effective_schedule(horizon, schedule)?;
    let kernel = Kernel::new(m)?;
    let mut state = input.clone();
    let mut halted = OutputDistribution::new();
    let mut by_step = Vec::new();
    for t in 1..=horizon {
        state = kernel.step(&state)?;
        if state.len() > guard {
            return Err(Error::Resource(alloc::format!("support of {} configurations at step {t}", state.len())));
        }
        if observe.contains(&t) {
            let mut step_mass = A::Prob::zero();
            for b in observation_branches(&state)? {
                if b.label != UNHALTED {
                    step_mass = step_mass.plus(&b.probability)?;
                    halted.add_mass(b.label, &b.probability)?;
                }
            }
            if step_mass.sign()? != Ordering::Equal {
                by_step.push((t, step_mass));
            }
            state = state.filter(|c| !c.h);
        }
    }
    Ok(QtmOutput { halted, residual: norm_sqr(&state)?, by_step })
}

/// Monte Carlo counterpart of [`output_distribution`].
///
/// The post-measurement state after "not halted yet" is unique, so the
/// branch weights are computed once; every shot then walks the observation
/// steps, drawing the halt bit with its conditional probability and, on a
/// halt, the tape content.
pub struct QtmSampler {
    steps: Vec<Vec<(String, f64)>>,
}

impl QtmSampler {
    pub fn new<A: Amp>(m: &QtmDescription, input: &SparseState<A>, horizon: usize, schedule: &[usize], guard: usize) -> Result<Self> {
        let observe = effective_schedule(horizon, schedule)?;
        let kernel = Kernel::new(m)?;
        let mut state = input.clone();
        let mut steps = Vec::new();
        for t in 1..=horizon {
            state = kernel.step(&state)?;
            if state.len() > guard {
                return Err(Error::Resource(alloc::format!("support of {} configurations at step {t}", state.len())));
            }
            if observe.contains(&t) {
                let halted: Vec<(String, f64)> = observation_branches(&state)?
                    .into_iter()
                    .filter(|b| b.label != UNHALTED)
                    .map(|b| (b.label, b.probability.to_f64()))
                    .collect();
                if !halted.is_empty() {
                    steps.push(halted);
                }
                state = state.filter(|c| !c.h);
            }
        }
        Ok(Self { steps })
    }

    pub fn sample_chunk(&self, shots: u64, seed: u64, chunk: u64) -> BTreeMap<String, u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let mut remaining = 1.0f64;
            let mut label = None;
            for halted in &self.steps {
                let mass: f64 = halted.iter().map(|(_, p)| p).sum();
                let u = rng.gen::<f64>() * remaining;
                if u < mass {
                    let mut acc = 0.0;
                    let mut pick = &halted[halted.len() - 1].0;
                    for (l, p) in halted {
                        acc += p;
                        if u < acc {
                            pick = l;
                            break;
                        }
                    }
                    label = Some(pick.clone());
                    break;
                }
                remaining -= mass;
            }
            *counts.entry(label.unwrap_or_else(|| String::from(UNHALTED))).or_insert(0) += 1;
        }
        counts
    }
}

/// Seeded shot-based estimate of the output distribution, observing the halt
/// bit at every scheduled step (and at the horizon).
pub fn sample_run<A: Amp>(
    m: &QtmDescription,
    input: &SparseState<A>,
    horizon: usize,
    schedule: &[usize],
    shots: u64,
    seed: u64,
    guard: usize,
) -> Result<OutputDistribution<f64>> {
    if shots == 0 {
        return Err(validation("at least one shot is required"));
    }
    let sampler = QtmSampler::new(m, input, horizon, schedule, guard)?;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let chunks = shots.div_ceil(SHOT_CHUNK);
    for c in 0..chunks {
        let n = SHOT_CHUNK.min(shots - c * SHOT_CHUNK);
        for (k, v) in sampler.sample_chunk(n, seed, c) {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    counts_to_distribution(&counts)
}
