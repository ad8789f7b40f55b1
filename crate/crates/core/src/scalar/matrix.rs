//! Small dense complex matrices, the operator norm and unitary sampling.

// Float supplies sqrt when std is not linked.
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)]
use num_traits::Float as _;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

use crate::error::{validation, Error, Result};

pub type C64 = Complex64;

/// Tolerance used when validating unitarity.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Tolerance used for probability bookkeeping.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Largest supported dimension (ten qubits).
pub const MAX_DIM: usize = 1 << 10;

/// Row-major square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![C64::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(validation("matrix entry count does not match dim*dim"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(validation("matrix entries must be finite"));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim).map(|i| self.entries[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.entries.iter().zip(&rhs.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |(M^dagger M - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARITY_TOL
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> C64 {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm())).unwrap_or(col);
            if a[pivot * n + col].is_zero() {
                return C64::zero();
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= f * v;
                }
            }
        }
        det
    }

    /// Multiplies by `det^(-1/dim)` so the result has determinant one.
    pub fn special_unitarized(&self) -> Self {
        let det = self.determinant();
        let phase = C64::from_polar(1.0, -det.arg() / self.dim as f64);
        self.scale(phase)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
///
/// `a` is row-major `n x n` and is destroyed. Returns the diagonal after
/// convergence, unsorted.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 100;
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Numeric("Jacobi eigenvalue iteration did not converge".into()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Uses the real embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is that of
/// the input with every eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    let r = 2 * n;
    let mut a = vec![0.0; r * r];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            a[i * r + j] = z.re;
            a[(i + n) * r + (j + n)] = z.re;
            a[i * r + (j + n)] = -z.im;
            a[(i + n) * r + j] = z.im;
        }
    }
    let mut ev = symmetric_eigenvalues(a, r)?;
    ev.sort_by(f64::total_cmp);
    Ok(ev.into_iter().step_by(2).collect())
}

/// Largest singular value of `m`.
///
/// The top eigenvalue of the Gram matrix `m^dagger m` is found by Jacobi
/// iteration for dimensions up to 64; larger matrices fall back to power
/// iteration on the Gram matrix with a fixed iteration budget.
pub fn operator_norm(m: &DenseMatrix) -> Result<f64> {
    let n = m.dim();
    if n == 0 {
        return Ok(0.0);
    }
    if n > MAX_DIM {
        return Err(validation("operator_norm supports dimensions up to 2^10"));
    }
    if m.entries().iter().all(|z| z.is_zero()) {
        return Ok(0.0);
    }
    let gram = m.adjoint().mul(m);
    let top = if n <= 64 { hermitian_eigenvalues(&gram)?.last().copied().unwrap_or(0.0) } else { power_top_eigenvalue(&gram)? };
    Ok(top.max(0.0).sqrt())
}

fn power_top_eigenvalue(g: &DenseMatrix) -> Result<f64> {
    const BUDGET: usize = 20_000;
    let n = g.dim();
    // Deterministic start vector with support on every coordinate.
    let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i as f64) * 1e-3, 0.5)).collect();
    let mut last = 0.0f64;
    for it in 0..BUDGET {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|z| *z /= norm);
        let w = g.apply(&v);
        let lambda: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        if it > 10 && (lambda - last).abs() <= 1e-15 * lambda.abs().max(1e-300) {
            return Ok(lambda);
        }
        last = lambda;
        v = w;
    }
    Err(Error::Numeric("power iteration for operator norm did not converge".into()))
}

/// `min_k ||u - w^k v||` over the `dim`-th roots of unity `w^k`.
///
/// For special unitaries those roots are exactly the global phases that keep
/// the product special, so this is the phase-invariant distance used when
/// comparing compiled circuits against their targets.
pub fn distance_mod_center(u: &DenseMatrix, v: &DenseMatrix) -> Result<f64> {
    let n = u.dim();
    let mut best = f64::INFINITY;
    for k in 0..n {
        let w = C64::from_polar(1.0, 2.0 * core::f64::consts::PI * k as f64 / n as f64);
        best = best.min(operator_norm(&u.sub(&v.scale(w)))?);
    }
    Ok(best)
}

/// Standard complex normal sample via Box-Muller.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = libm::sqrt(-2.0 * libm::log(u1));
    let t = 2.0 * core::f64::consts::PI * u2;
    C64::new(r * libm::cos(t), r * libm::sin(t)) * core::f64::consts::FRAC_1_SQRT_2
}

/// Gram-Schmidt on the columns; `None` if they are (numerically) dependent.
pub fn orthonormalize_columns(m: &DenseMatrix) -> Option<DenseMatrix> {
    let dim = m.dim();
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|j| (0..dim).map(|i| m[(i, j)]).collect()).collect();
    for j in 0..dim {
        for p in 0..j {
            let (head, tail) = cols.split_at_mut(j);
            let proj: C64 = head[p].iter().zip(&tail[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in tail[0].iter_mut().zip(&head[p]) {
                *x -= proj * y;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    let mut q = DenseMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            q[(i, j)] = *z;
        }
    }
    Some(q)
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix { dim, entries: (0..dim * dim).map(|_| complex_normal(rng)).collect() }
}

/// Haar-random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseMatrix {
    loop {
        if let Some(q) = orthonormalize_columns(&ginibre(dim, rng)) {
            return q;
        }
    }
}

/// Random unitary at distance roughly `scale` from the identity.
pub fn random_near_identity<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> DenseMatrix {
    loop {
        let m = DenseMatrix::identity(dim).add(&ginibre(dim, rng).scale(C64::new(scale, 0.0)));
        if let Some(q) = orthonormalize_columns(&m) {
            return q;
        }
    }
}

/// Haar-random normalized state vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}
