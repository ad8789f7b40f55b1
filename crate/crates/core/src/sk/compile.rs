//! Solovay-Kitaev recursion with the balanced group commutator.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::net::BasisNet;
use super::su2::Su2;
use crate::error::{validation, Error, Result};
use crate::gates::standard_gate;
use crate::scalar::matrix::UNITARITY_TOL;
use crate::scalar::{distance_mod_center, DenseMatrix};

/// Word over the net's gate set; its product is `g1 * g2 * ... * gk`, so the
/// last letter acts first on a state.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSequence {
    pub word: Vec<u8>,
    pub product: Su2,
}

/// `V W V^dg W^dg = delta` with V, W rotations by the same small angle.
pub fn group_commutator(delta: &Su2) -> Result<(Su2, Su2)> {
    let (n, theta) = delta.axis_angle();
    if theta < 1e-15 {
        return Ok((Su2::IDENTITY, Su2::IDENTITY));
    }
    // sin(theta/2) = 2 sin^2(phi/2) sqrt(1 - sin^4(phi/2))
    let s2 = libm::sqrt(((1.0 - libm::cos(theta / 2.0)) / 2.0).max(0.0));
    let phi = 2.0 * libm::asin(libm::sqrt(s2).min(1.0));
    let v = Su2::rotation([1.0, 0.0, 0.0], phi);
    let w = Su2::rotation([0.0, 1.0, 0.0], phi);
    let c = v * w * v.inverse() * w.inverse();
    let (m, _) = c.axis_angle();
    let cross = [m[1] * n[2] - m[2] * n[1], m[2] * n[0] - m[0] * n[2], m[0] * n[1] - m[1] * n[0]];
    let sin = libm::sqrt(cross.iter().map(|x| x * x).sum());
    let cos = m[0] * n[0] + m[1] * n[1] + m[2] * n[2];
    let s = if sin > 1e-12 {
        Su2::rotation(cross.map(|x| x / sin), libm::atan2(sin, cos))
    } else if cos > 0.0 {
        Su2::IDENTITY
    } else {
        // Antiparallel: a half turn about any axis orthogonal to m.
        let t = if libm::fabs(m[0]) < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let p = [m[1] * t[2] - m[2] * t[1], m[2] * t[0] - m[0] * t[2], m[0] * t[1] - m[1] * t[0]];
        let pn = libm::sqrt(p.iter().map(|x| x * x).sum());
        Su2::rotation(p.map(|x| x / pn), core::f64::consts::PI)
    };
    let (v2, w2) = (s * v * s.inverse(), s * w * s.inverse());
    if !(v2.w.is_finite() && w2.w.is_finite()) {
        return Err(Error::Numeric("group commutator decomposition produced non-finite rotations".into()));
    }
    Ok((v2, w2))
}

fn combine(net: &BasisNet, v: &GateSequence, w: &GateSequence, u: &GateSequence) -> GateSequence {
    let set = &net.set;
    let mut word = Vec::with_capacity(2 * v.word.len() + 2 * w.word.len() + u.word.len());
    word.extend_from_slice(&v.word);
    word.extend_from_slice(&w.word);
    word.extend(set.inverse_word(&v.word));
    word.extend(set.inverse_word(&w.word));
    word.extend_from_slice(&u.word);
    let product = v.product * w.product * v.product.inverse() * w.product.inverse() * u.product;
    GateSequence { word, product }
}

fn base(net: &BasisNet, u: &Su2) -> GateSequence {
    let (e, _) = net.nearest(u);
    GateSequence { word: net.words[e].clone(), product: net.products[e] }
}

/// Plain recursion of depth `n`.
pub fn sk_approximate(net: &BasisNet, u: &Su2, n: usize) -> Result<GateSequence> {
    approximate(net, u, n, 0.0)
}

/// Recursion of depth at most `n` that stops as soon as `tol` is met.
fn approximate(net: &BasisNet, u: &Su2, n: usize, tol: f64) -> Result<GateSequence> {
    let mut cur = base(net, u);
    for k in 1..=n {
        if cur.product.distance(u) <= tol {
            break;
        }
        cur = refine(net, u, &cur, k, tol)?;
    }
    Ok(cur)
}

fn commutator_ok((v, w): &(Su2, Su2), delta: &Su2) -> bool {
    (*v * *w * v.inverse() * w.inverse()).distance(delta) < 1e-8
}

fn refine(net: &BasisNet, u: &Su2, prev: &GateSequence, n: usize, tol: f64) -> Result<GateSequence> {
    let delta = *u * prev.product.inverse();
    let (v, w) = match group_commutator(&delta) {
        Ok(vw) if commutator_ok(&vw, &delta) => vw,
        _ => {
            // Nudge the correction off the degenerate point and try once more.
            let nudged = delta * Su2::rotation([0.6, 0.0, 0.8], 1e-7);
            let vw = group_commutator(&nudged)?;
            if !commutator_ok(&vw, &nudged) {
                return Err(Error::Numeric("group commutator decomposition is ill-conditioned".into()));
            }
            vw
        }
    };
    // Errors d in V and W move the commutator by about 4 phi d, phi being
    // their rotation angle, so the factors only need tol / (8 phi).
    let phi = v.axis_angle().1.max(1e-6);
    let sub = tol / (8.0 * phi);
    let sv = approximate(net, &v, n - 1, sub)?;
    let sw = approximate(net, &w, n - 1, sub)?;
    Ok(combine(net, &sv, &sw, prev))
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub epsilon: f64,
    pub max_depth: usize,
    /// Precision to which the target's entries are known. Targets only
    /// known to `p` cannot be compiled below `10 p`.
    pub target_precision: Option<f64>,
}

impl CompileOptions {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, max_depth: 8, target_precision: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompileReport {
    pub gate_set: String,
    pub epsilon: f64,
    /// Distance computed along the compilation (quaternion products).
    pub achieved_distance: f64,
    /// Distance recomputed from the textbook gate matrices.
    pub recomputed_distance: f64,
    pub length: usize,
    pub depth: usize,
    /// Depth predicted by the shrinkage schedule `eps_{n+1} = C eps_n^1.5`.
    pub predicted_depth: Option<usize>,
    pub shrink_constant: f64,
    pub distance_by_depth: Vec<f64>,
    pub gates: Vec<String>,
    /// Filled in by callers that own a clock.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Measured constant of the shrinkage schedule: the median of
/// `d1 / d0^1.5` over a fixed sample of targets, where `d0`, `d1` are the
/// distances after zero and one refinement steps.
pub fn shrink_constant(net: &BasisNet) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut ratios = Vec::new();
    for _ in 0..64 {
        let u = Su2::random(&mut rng);
        let d0 = base(net, &u).product.distance(&u);
        if d0 > 1e-9 {
            ratios.push(sk_approximate(net, &u, 1)?.product.distance(&u) / libm::pow(d0, 1.5));
        }
    }
    if ratios.is_empty() {
        return Ok(0.0);
    }
    ratios.sort_by(f64::total_cmp);
    Ok(ratios[ratios.len() / 2])
}

/// Smallest `n` with predicted `eps_n <= epsilon`, if the schedule contracts.
pub fn predicted_depth(eps0: f64, c: f64, epsilon: f64, max_depth: usize) -> Option<usize> {
    let mut e = eps0;
    for n in 0..=max_depth {
        if e <= epsilon {
            return Some(n);
        }
        let next = c * libm::pow(e, 1.5);
        // Also stops on NaN.
        if next.partial_cmp(&e) != Some(core::cmp::Ordering::Less) {
            return None;
        }
        e = next;
    }
    None
}

/// Product of the textbook matrices of the emitted gates.
pub fn recompute_product(names: &[String]) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::identity(2);
    for n in names {
        let base = n.strip_suffix("dg").filter(|b| *b == "H").unwrap_or(n);
        let g = standard_gate(base).ok_or_else(|| validation(format!("unknown gate {n:?}")))?;
        m = m.mul(&g.matrix);
    }
    Ok(m)
}

/// Phase-invariant distance between a target and emitted gates, from
/// scratch.
pub fn recompute_distance(target: &DenseMatrix, names: &[String]) -> Result<f64> {
    let p = recompute_product(names)?.special_unitarized();
    distance_mod_center(&target.special_unitarized(), &p)
}

/// Compiles `target` (a 2x2 unitary) to accuracy `epsilon`, raising the depth
/// from 0 until the measured distance meets `epsilon` or `max_depth` is hit.
/// The schedule's predicted depth is reported next to the one used.
pub fn sk_compile(net: &BasisNet, target: &DenseMatrix, opts: &CompileOptions) -> Result<(GateSequence, CompileReport)> {
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(validation("epsilon must be positive"));
    }
    if let Some(p) = opts.target_precision {
        if opts.epsilon < 10.0 * p {
            return Err(Error::Precision(format!("target known to precision {p:e}; accuracy below {:e} cannot be certified", 10.0 * p)));
        }
    }
    if target.dim() != 2 {
        return Err(validation("the compiler handles single-qubit (2x2) targets"));
    }
    let tol = opts.target_precision.map_or(UNITARITY_TOL, |p| UNITARITY_TOL.max(8.0 * p));
    if target.unitarity_defect() > tol {
        return Err(validation(format!("target is not unitary (defect {:e})", target.unitarity_defect())));
    }
    let u = Su2::from_matrix(target).ok_or_else(|| validation("target is singular"))?;
    let c = shrink_constant(net)?;
    let predicted = predicted_depth(net.eps0, c, opts.epsilon, opts.max_depth);
    let mut cur = base(net, &u);
    let mut by_depth = alloc::vec![cur.product.distance(&u)];
    let mut depth = 0;
    while by_depth[depth] > opts.epsilon && depth < opts.max_depth {
        depth += 1;
        cur = refine(net, &u, &cur, depth, opts.epsilon)?;
        by_depth.push(cur.product.distance(&u));
    }
    let word = net.set.cancel(&cur.word);
    let product = net.set.product(&word);
    let gates = net.set.names(&word);
    let achieved = product.distance(&u);
    let recomputed = recompute_distance(target, &gates)?;
    let report = CompileReport {
        gate_set: net.set.name.clone(),
        epsilon: opts.epsilon,
        achieved_distance: achieved,
        recomputed_distance: recomputed,
        length: word.len(),
        depth,
        predicted_depth: predicted,
        shrink_constant: c,
        distance_by_depth: by_depth,
        gates,
        wall_time_s: None,
    };
    Ok((GateSequence { word, product }, report))
}
