//! Length scaling of compiled sequences and the volume lower bound.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::Serialize;

use super::compile::{sk_compile, CompileOptions};
use super::net::BasisNet;
use super::su2::Su2;
use crate::error::{validation, Result};
use crate::scalar::matrix::random_unitary;
use crate::scalar::{distance_mod_center, DenseMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub mean_length: f64,
    pub mean_depth: f64,
    pub max_distance: f64,
    /// Every target reached `epsilon` within the depth limit.
    pub all_met: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub targets: usize,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln L` against `ln ln(1/eps)`.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Mean lengths never decrease as epsilon shrinks.
    pub monotone: bool,
}

/// Slope, intercept and R^2 of an ordinary least-squares line.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Compiles every target at every epsilon and fits `L ~ a ln^c(1/eps)`.
pub fn scaling_study(net: &BasisNet, targets: &[Su2], epsilons: &[f64], max_depth: usize) -> Result<ScalingReport> {
    let mut eps: Vec<f64> = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    if eps.len() < 2 {
        return Err(validation("a scaling fit needs at least two distinct epsilon values"));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(validation("epsilon values must lie in (0, 1)"));
    }
    if targets.is_empty() {
        return Err(validation("no targets"));
    }
    let mut rows = Vec::with_capacity(eps.len());
    for &e in &eps {
        let mut opts = CompileOptions::new(e);
        opts.max_depth = max_depth;
        let (mut len, mut depth, mut worst, mut met) = (0usize, 0usize, 0f64, true);
        for t in targets {
            let (_, rep) = sk_compile(net, &t.to_matrix(), &opts)?;
            len += rep.length;
            depth += rep.depth;
            worst = worst.max(rep.achieved_distance);
            met &= rep.achieved_distance <= e;
        }
        let n = targets.len() as f64;
        rows.push(ScalingRow { epsilon: e, mean_length: len as f64 / n, mean_depth: depth as f64 / n, max_distance: worst, all_met: met });
    }
    let xs: Vec<f64> = rows.iter().map(|r| libm::log(libm::log(1.0 / r.epsilon))).collect();
    let ys: Vec<f64> = rows.iter().map(|r| libm::log(r.mean_length.max(1.0))).collect();
    let (exponent, intercept, r_squared) = linear_fit(&xs, &ys);
    let monotone = rows.windows(2).all(|w| w[1].mean_length >= w[0].mean_length);
    Ok(ScalingReport { targets: targets.len(), rows, exponent, intercept, r_squared, monotone })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub qubits: usize,
    pub epsilon: f64,
    pub samples: usize,
    /// Greedy epsilon-packing of Haar samples, a lower estimate of the
    /// number of distinct circuits needed at this accuracy.
    pub packing_size: usize,
    /// Real dimension of SU(2^d); the covering number grows like
    /// `(1/eps)^dim`.
    pub manifold_dimension: usize,
    pub volume_log10: f64,
    /// `2^d ln(1/eps) / ln d`; undefined for a single qubit.
    pub omega_length: Option<f64>,
    /// `d^2 4^d ln^c(d^2 4^d / eps)` with `c = ln 5 / ln 1.5`.
    pub upper_length: f64,
}

fn far(u: &DenseMatrix, v: &DenseMatrix, eps: f64) -> Result<bool> {
    // Frobenius norm / sqrt(n) bounds the operator norm from below.
    let n = u.dim();
    let cheap = (0..n).all(|k| {
        let w = C64::from_polar(1.0, 2.0 * core::f64::consts::PI * k as f64 / n as f64);
        let d = u.sub(&v.scale(w));
        let f: f64 = d.entries().iter().map(|z| z.norm_sqr()).sum();
        libm::sqrt(f / n as f64) > eps
    });
    Ok(cheap || distance_mod_center(u, v)? > eps)
}

pub fn lower_bound_demo<R: Rng + ?Sized>(qubits: usize, epsilon: f64, samples: usize, rng: &mut R) -> Result<LowerBoundReport> {
    if !(1..=3).contains(&qubits) {
        return Err(validation("lower-bound demo supports 1 to 3 qubits"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(validation(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let n = 1usize << qubits;
    let mut packing: Vec<DenseMatrix> = Vec::new();
    for _ in 0..samples {
        let u = random_unitary(n, rng).special_unitarized();
        let mut ok = true;
        for p in &packing {
            if !far(&u, p, epsilon)? {
                ok = false;
                break;
            }
        }
        if ok {
            packing.push(u);
        }
    }
    let dim = n * n - 1;
    let d = qubits as f64;
    let size = d * d * libm::pow(4.0, d);
    let c = libm::log(5.0) / libm::log(1.5);
    Ok(LowerBoundReport {
        qubits,
        epsilon,
        samples,
        packing_size: packing.len(),
        manifold_dimension: dim,
        volume_log10: dim as f64 * libm::log10(1.0 / epsilon),
        omega_length: (qubits > 1).then(|| libm::pow(2.0, d) * libm::log(1.0 / epsilon) / libm::log(d)),
        upper_length: size * libm::pow(libm::log(size / epsilon), c),
    })
}
