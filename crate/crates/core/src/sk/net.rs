use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::kdtree::KdTree;
use super::su2::Su2;
use crate::error::{validation, Error, Result};
use crate::gates::standard_gate;

/// A generator of the instruction set with the index of its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisGate {
    pub name: String,
    pub q: Su2,
    pub inverse: u8,
}

/// Instruction set on one qubit, normalized into SU(2) and inverse-closed
/// up to the centre.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSet {
    pub name: String,
    pub gates: Vec<BasisGate>,
}

impl GateSet {
    /// Pairs every gate with an inverse from the set.
    pub fn new(name: &str, gates: Vec<(String, Su2)>) -> Result<Self> {
        if gates.is_empty() || gates.len() > 64 {
            return Err(validation("a gate set needs between 1 and 64 gates"));
        }
        let mut out = Vec::new();
        for (gname, q) in &gates {
            let inv = q.inverse();
            let j = gates
                .iter()
                .position(|(_, p)| p.distance(&inv) < 1e-10)
                .ok_or_else(|| validation(format!("the inverse of {gname} is not in the set")))?;
            out.push(BasisGate { name: gname.clone(), q: *q, inverse: j as u8 });
        }
        Ok(Self { name: String::from(name), gates: out })
    }

    fn standard(names: &[&str]) -> Vec<(String, Su2)> {
        names
            .iter()
            .map(|n| {
                let g = standard_gate(n).expect("standard gate");
                (String::from(*n), Su2::from_matrix(&g.matrix).expect("2x2 gate"))
            })
            .collect()
    }

    /// `{H, H^dg, S, S^dg, T, T^dg}`. H and H^dg coincide up to the centre
    /// once normalized; both are kept so every name has its own inverse.
    pub fn clifford_t() -> Self {
        let mut gates = Self::standard(&["H"]);
        gates.push((String::from("Hdg"), gates[0].1.inverse()));
        gates.extend(Self::standard(&["S", "Sdg", "T", "Tdg"]));
        Self::new("clifford-t", gates).expect("clifford+T is inverse-closed")
    }

    /// `{H, T, T^dg}`.
    pub fn h_t() -> Self {
        Self::new("h-t", Self::standard(&["H", "T", "Tdg"])).expect("H, T, T^dg is inverse-closed")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "clifford-t" => Ok(Self::clifford_t()),
            "h-t" => Ok(Self::h_t()),
            _ => Err(validation(format!("unknown gate set {name:?} (known: clifford-t, h-t)"))),
        }
    }

    pub fn product(&self, word: &[u8]) -> Su2 {
        word.iter().fold(Su2::IDENTITY, |acc, &g| acc * self.gates[g as usize].q)
    }

    pub fn inverse_word(&self, word: &[u8]) -> Vec<u8> {
        word.iter().rev().map(|&g| self.gates[g as usize].inverse).collect()
    }

    pub fn names(&self, word: &[u8]) -> Vec<String> {
        word.iter().map(|&g| self.gates[g as usize].name.clone()).collect()
    }

    /// Removes adjacent `g g^-1` pairs until none remain.
    pub fn cancel(&self, word: &[u8]) -> Vec<u8> {
        let mut out: Vec<u8> = Vec::with_capacity(word.len());
        for &g in word {
            match out.last() {
                Some(&p) if self.gates[p as usize].inverse == g => {
                    out.pop();
                }
                _ => out.push(g),
            }
        }
        out
    }
}

/// Reduced words up to length `l0` with distinct products (up to the centre).
pub struct BasisNet {
    pub set: GateSet,
    pub l0: usize,
    pub words: Vec<Vec<u8>>,
    pub products: Vec<Su2>,
    /// Covering radius measured on random targets.
    pub eps0: f64,
    tree: KdTree,
}

fn key(q: &Su2) -> [i64; 4] {
    let c = q.canonical();
    c.as_array().map(|v| libm::round(v * 1e9) as i64)
}

fn tree_for(products: &[Su2]) -> KdTree {
    let mut pts = Vec::with_capacity(products.len() * 2);
    for q in products {
        let a = q.as_array();
        pts.push(a);
        pts.push(a.map(|v| -v));
    }
    KdTree::new(pts)
}

impl BasisNet {
    /// Breadth-first enumeration of words, keeping the first (shortest) word
    /// for each product. Adjacent inverse pairs are never extended.
    pub fn build<R: Rng + ?Sized>(set: GateSet, l0: usize, sample: usize, guard: usize, rng: &mut R) -> Result<Self> {
        if l0 > 16 {
            return Err(validation("l0 is limited to 16"));
        }
        let mut seen = BTreeSet::new();
        seen.insert(key(&Su2::IDENTITY));
        let mut words: Vec<Vec<u8>> = vec![Vec::new()];
        let mut products = vec![Su2::IDENTITY];
        let mut frontier = vec![0usize];
        for _ in 0..l0 {
            let mut next = Vec::new();
            for &i in &frontier {
                let last = words[i].last().copied();
                for (g, bg) in set.gates.iter().enumerate() {
                    if last.is_some_and(|l| set.gates[l as usize].inverse == g as u8) {
                        continue;
                    }
                    let q = products[i] * bg.q;
                    if seen.insert(key(&q)) {
                        let mut w = words[i].clone();
                        w.push(g as u8);
                        words.push(w);
                        products.push(q);
                        next.push(words.len() - 1);
                        if words.len() > guard {
                            return Err(Error::Resource(format!("basis net exceeds {guard} entries")));
                        }
                    }
                }
            }
            frontier = next;
        }
        let tree = tree_for(&products);
        let mut net = Self { set, l0, words, products, eps0: 0.0, tree };
        net.eps0 = net.measure_coverage(sample, rng);
        Ok(net)
    }

    /// Reassembles a net from stored words (the products are recomputed).
    pub fn from_words(set: GateSet, l0: usize, eps0: f64, words: Vec<Vec<u8>>) -> Result<Self> {
        if words.iter().any(|w| w.len() > l0 || w.iter().any(|&g| g as usize >= set.gates.len())) {
            return Err(validation("net word longer than l0 or with an unknown gate"));
        }
        let products: Vec<Su2> = words.iter().map(|w| set.product(w)).collect();
        let tree = tree_for(&products);
        Ok(Self { set, l0, words, products, eps0, tree })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Entry nearest to `target` and its distance.
    pub fn nearest(&self, target: &Su2) -> (usize, f64) {
        let (i, _) = self.tree.nearest(&target.as_array()).expect("net is never empty");
        let e = i / 2;
        (e, self.products[e].distance(target))
    }

    /// Largest nearest-entry distance over `sample` Haar-random targets.
    pub fn measure_coverage<R: Rng + ?Sized>(&self, sample: usize, rng: &mut R) -> f64 {
        (0..sample).map(|_| self.nearest(&Su2::random(rng)).1).fold(0.0, f64::max)
    }

    /// Fails when the measured covering radius exceeds `eps0`.
    pub fn require_coverage(&self, eps0: f64) -> Result<()> {
        if self.eps0 > eps0 {
            return Err(Error::Resource(format!("net too sparse: measured covering radius {:.4} exceeds requested {eps0}", self.eps0)));
        }
        Ok(())
    }
}
