//! Brute-force check of the step map on a finite section of the running
//! sector, independent of the local conditions in `wellformed`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::evolve::Kernel;
use super::{Configuration, QtmDescription};
use crate::error::{Error, Result};
use crate::machine::{Move, Symbol, Tape};
use crate::scalar::ExactAmplitude;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub pass: bool,
    /// Number of configurations (columns) in the section.
    pub size: usize,
    pub witness: Option<(Configuration, Configuration)>,
    pub detail: String,
}

/// Every running state at head 0 with every content of cells 0, 1 and 2.
/// Any violation of the local conditions has a witness pair in which one
/// member is such a seed and the other a candidate preimage of its image.
pub fn default_oracle_seeds(m: &QtmDescription) -> Vec<Configuration> {
    let mut out = Vec::new();
    for q in m.running_states() {
        for a in Symbol::ALL {
            for b in Symbol::ALL {
                for c in Symbol::ALL {
                    let mut tape = Tape::new();
                    tape.write(0, a);
                    tape.write(1, b);
                    tape.write(2, c);
                    out.push(Configuration { h: false, q, tape, x: 0 });
                }
            }
        }
    }
    out
}

fn insert_guarded(set: &mut BTreeSet<Configuration>, c: Configuration, guard: usize) -> Result<bool> {
    let fresh = set.insert(c);
    if set.len() > guard {
        return Err(Error::Resource(format!("finite section exceeds {guard} configurations")));
    }
    Ok(fresh)
}

/// Builds the section generated from the running seeds by up to `radius`
/// forward steps, closes it under candidate preimages of all its images, and
/// checks that the images of its configurations are exactly orthonormal.
pub fn finite_section_unitarity_oracle(m: &QtmDescription, seeds: &[Configuration], radius: usize, guard: usize) -> Result<OracleReport> {
    let k = Kernel::<ExactAmplitude>::new(m)?;
    let mut section = BTreeSet::new();
    let mut frontier = Vec::new();
    for c in seeds.iter().filter(|c| !c.h) {
        if insert_guarded(&mut section, c.clone(), guard)? {
            frontier.push(c.clone());
        }
    }
    for _ in 0..radius {
        let mut next = Vec::new();
        for c in &frontier {
            let mut images = Vec::new();
            k.image(c, |n, _| {
                images.push(n);
                Ok(())
            })?;
            for n in images.into_iter().filter(|n| !n.h) {
                if insert_guarded(&mut section, n.clone(), guard)? {
                    next.push(n);
                }
            }
        }
        frontier = next;
    }

    let mut images = BTreeSet::new();
    for c in &section {
        k.image(c, |n, _| {
            images.insert(n);
            Ok(())
        })?;
    }
    let running: Vec<_> = m.running_states().collect();
    for img in &images {
        for mv in [Move::Left, Move::Stay, Move::Right] {
            let x = img.x - mv.delta();
            for &q in &running {
                for s in Symbol::ALL {
                    insert_guarded(&mut section, Configuration { h: false, q, tape: img.tape.with(x, s), x }, guard)?;
                }
            }
        }
    }

    let cols: Vec<Configuration> = section.into_iter().collect();
    let mut rows: BTreeMap<Configuration, Vec<(usize, ExactAmplitude)>> = BTreeMap::new();
    for (i, c) in cols.iter().enumerate() {
        let img = k.image_state(c)?;
        for (n, a) in img.iter() {
            rows.entry(n.clone()).or_default().push((i, *a));
        }
    }
    let mut gram: BTreeMap<(usize, usize), ExactAmplitude> = BTreeMap::new();
    for entries in rows.values() {
        for (x, (i, a)) in entries.iter().enumerate() {
            for (j, b) in &entries[x..] {
                let e = gram.entry((*i, *j)).or_insert(ExactAmplitude::ZERO);
                *e = e.try_add(&a.conj().try_mul(b)?)?;
            }
        }
    }
    let size = cols.len();
    for (i, c) in cols.iter().enumerate() {
        let d = gram.get(&(i, i)).copied().unwrap_or(ExactAmplitude::ZERO);
        if d != ExactAmplitude::ONE {
            return Ok(OracleReport {
                pass: false,
                size,
                witness: Some((c.clone(), c.clone())),
                detail: format!("column has squared norm {}", d.to_f64_real()),
            });
        }
    }
    for (&(i, j), v) in &gram {
        if i != j && !v.is_zero() {
            return Ok(OracleReport {
                pass: false,
                size,
                witness: Some((cols[i].clone(), cols[j].clone())),
                detail: format!("columns overlap with inner product {}", v),
            });
        }
    }
    Ok(OracleReport { pass: true, size, witness: None, detail: format!("{size} columns orthonormal") })
}
