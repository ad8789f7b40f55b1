//! Exact arithmetic in the ring Z[i, 1/sqrt(2)].
//!
//! Every element is stored as five integers `(a, b, c, d, k)` with value
//!
//! ```text
//! (a + b*sqrt(2) + i*(c + d*sqrt(2))) / 2^k
//! ```
//!
//! The ring contains every entry of the Hadamard, phase and T gates, so every
//! amplitude a Clifford+T quantum Turing machine can produce is represented
//! without rounding. Coefficients are `i128` and all arithmetic is checked: an
//! overflow surfaces as [`Error::ArithmeticCapacity`] rather than a wrong value.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of Z[i, 1/sqrt(2)] in canonical (minimal `k`) form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i128; 5]", into = "[i128; 5]")]
pub struct ExactAmplitude {
    a: i128,
    b: i128,
    c: i128,
    d: i128,
    k: u32,
}

const SQRT_2: f64 = core::f64::consts::SQRT_2;

fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::ArithmeticCapacity)
}

/// `(x0 + x1*sqrt2) * (y0 + y1*sqrt2)` in Z[sqrt2].
fn zs_mul(x0: i128, x1: i128, y0: i128, y1: i128) -> Result<(i128, i128)> {
    let r0 = ck(ck(x0.checked_mul(y0))?.checked_add(ck(ck(x1.checked_mul(y1))?.checked_mul(2))?))?;
    let r1 = ck(ck(x0.checked_mul(y1))?.checked_add(ck(x1.checked_mul(y0))?))?;
    Ok((r0, r1))
}

/// Sign of `x0 + x1*sqrt2`.
fn zs_sign(x0: i128, x1: i128) -> Result<Ordering> {
    let s0 = x0.cmp(&0);
    let s1 = x1.cmp(&0);
    match (s0, s1) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => Ok(s),
        (a, b) if a == b => Ok(a),
        _ => {
            // Opposite signs: compare x0^2 with 2*x1^2.
            let lhs = ck(x0.checked_mul(x0))?;
            let rhs = ck(ck(x1.checked_mul(x1))?.checked_mul(2))?;
            // lhs == rhs is impossible since sqrt(2) is irrational.
            let rational_wins = lhs > rhs;
            Ok(if rational_wins { s0 } else { s1 })
        }
    }
}

impl ExactAmplitude {
    pub const ZERO: Self = Self { a: 0, b: 0, c: 0, d: 0, k: 0 };
    pub const ONE: Self = Self { a: 1, b: 0, c: 0, d: 0, k: 0 };
    pub const I: Self = Self { a: 0, b: 0, c: 1, d: 0, k: 0 };
    /// 1/sqrt(2) = sqrt(2)/2.
    pub const INV_SQRT2: Self = Self { a: 0, b: 1, c: 0, d: 0, k: 1 };
    /// exp(i*pi/4) = (sqrt(2) + i*sqrt(2)) / 2.
    pub const OMEGA: Self = Self { a: 0, b: 1, c: 0, d: 1, k: 1 };
    /// 1/2.
    pub const HALF: Self = Self { a: 1, b: 0, c: 0, d: 0, k: 1 };

    /// Builds `(a + b*sqrt2 + i*(c + d*sqrt2)) / 2^k` and reduces it.
    pub fn new(a: i128, b: i128, c: i128, d: i128, k: u32) -> Self {
        let mut z = Self { a, b, c, d, k };
        z.reduce();
        z
    }

    pub fn from_int(n: i128) -> Self {
        Self::new(n, 0, 0, 0, 0)
    }

    /// `(a, b, c, d, k)` of the canonical form.
    pub fn parts(&self) -> (i128, i128, i128, i128, u32) {
        (self.a, self.b, self.c, self.d, self.k)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0 && self.d == 0
    }

    pub fn is_real(&self) -> bool {
        self.c == 0 && self.d == 0
    }

    fn reduce(&mut self) {
        if self.is_zero() {
            self.k = 0;
            return;
        }
        while self.k > 0 && self.a % 2 == 0 && self.b % 2 == 0 && self.c % 2 == 0 && self.d % 2 == 0 {
            self.a /= 2;
            self.b /= 2;
            self.c /= 2;
            self.d /= 2;
            self.k -= 1;
        }
    }

    /// Coefficients rescaled to denominator `2^k` (`k >= self.k`).
    fn scaled(&self, k: u32) -> Result<[i128; 4]> {
        let shift = k - self.k;
        if shift >= 126 {
            return if self.is_zero() { Ok([0; 4]) } else { Err(Error::ArithmeticCapacity) };
        }
        let f = 1i128 << shift;
        Ok([ck(self.a.checked_mul(f))?, ck(self.b.checked_mul(f))?, ck(self.c.checked_mul(f))?, ck(self.d.checked_mul(f))?])
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        let k = self.k.max(rhs.k);
        let x = self.scaled(k)?;
        let y = rhs.scaled(k)?;
        Ok(Self::new(ck(x[0].checked_add(y[0]))?, ck(x[1].checked_add(y[1]))?, ck(x[2].checked_add(y[2]))?, ck(x[3].checked_add(y[3]))?, k))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.try_add(&rhs.neg_exact())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        let (pp0, pp1) = zs_mul(self.a, self.b, rhs.a, rhs.b)?;
        let (qq0, qq1) = zs_mul(self.c, self.d, rhs.c, rhs.d)?;
        let (pq0, pq1) = zs_mul(self.a, self.b, rhs.c, rhs.d)?;
        let (qp0, qp1) = zs_mul(self.c, self.d, rhs.a, rhs.b)?;
        let k = self.k.checked_add(rhs.k).ok_or(Error::ArithmeticCapacity)?;
        Ok(Self::new(ck(pp0.checked_sub(qq0))?, ck(pp1.checked_sub(qq1))?, ck(pq0.checked_add(qp0))?, ck(pq1.checked_add(qp1))?, k))
    }

    fn neg_exact(&self) -> Self {
        Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d, k: self.k }
    }

    pub fn conj(&self) -> Self {
        Self { a: self.a, b: self.b, c: -self.c, d: -self.d, k: self.k }
    }

    /// Multiplication by 1/sqrt(2).
    pub fn try_mul_inv_sqrt2(&self) -> Result<Self> {
        // (x0 + x1*sqrt2) * sqrt2 / 2 = (2*x1 + x0*sqrt2) / 2
        Ok(Self::new(
            ck(self.b.checked_mul(2))?,
            self.a,
            ck(self.d.checked_mul(2))?,
            self.c,
            self.k.checked_add(1).ok_or(Error::ArithmeticCapacity)?,
        ))
    }

    /// Division by two.
    pub fn try_half(&self) -> Result<Self> {
        Ok(Self::new(self.a, self.b, self.c, self.d, self.k.checked_add(1).ok_or(Error::ArithmeticCapacity)?))
    }

    /// `|z|^2`, an element with zero imaginary part.
    pub fn try_norm_sqr(&self) -> Result<Self> {
        self.try_mul(&self.conj())
    }

    /// Sign of a real element. Fails on elements with an imaginary part.
    pub fn real_sign(&self) -> Result<Ordering> {
        if !self.is_real() {
            return Err(Error::Validation("sign of a non-real amplitude".into()));
        }
        zs_sign(self.a, self.b)
    }

    /// Total order on real elements.
    pub fn real_cmp(&self, other: &Self) -> Result<Ordering> {
        self.try_sub(other)?.real_sign()
    }

    pub fn try_abs_real(&self) -> Result<Self> {
        Ok(match self.real_sign()? {
            Ordering::Less => self.neg_exact(),
            _ => *self,
        })
    }

    pub fn to_c64(&self) -> Complex64 {
        let scale = libm::ldexp(1.0, -(self.k as i32));
        let re = (self.a as f64 + self.b as f64 * SQRT_2) * scale;
        let im = (self.c as f64 + self.d as f64 * SQRT_2) * scale;
        Complex64::new(re, im)
    }

    pub fn to_f64_real(&self) -> f64 {
        self.to_c64().re
    }
}

impl Default for ExactAmplitude {
    fn default() -> Self {
        Self::ZERO
    }
}

impl TryFrom<[i128; 5]> for ExactAmplitude {
    type Error = Error;
    fn try_from(p: [i128; 5]) -> Result<Self> {
        let k = u32::try_from(p[4]).map_err(|_| Error::Validation("amplitude exponent k must be a non-negative u32".into()))?;
        Ok(Self::new(p[0], p[1], p[2], p[3], k))
    }
}

impl From<ExactAmplitude> for [i128; 5] {
    fn from(z: ExactAmplitude) -> Self {
        [z.a, z.b, z.c, z.d, z.k as i128]
    }
}

impl fmt::Debug for ExactAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.a, self.b, self.c, self.d, self.k)
    }
}

impl fmt::Display for ExactAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*sqrt2 + i*({} + {}*sqrt2))/2^{}", self.a, self.b, self.c, self.d, self.k)
    }
}

// Operator sugar for tests and small constant expressions. Simulation code
// uses the `try_*` forms and propagates overflow.
impl Add for ExactAmplitude {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("exact arithmetic capacity exceeded")
    }
}

impl Sub for ExactAmplitude {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("exact arithmetic capacity exceeded")
    }
}

impl Mul for ExactAmplitude {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("exact arithmetic capacity exceeded")
    }
}

impl Neg for ExactAmplitude {
    type Output = Self;
    fn neg(self) -> Self {
        self.neg_exact()
    }
}

/// Ring product, named for the operation table it implements.
pub fn exact_mul(x: &ExactAmplitude, y: &ExactAmplitude) -> Result<ExactAmplitude> {
    x.try_mul(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Z = ExactAmplitude;

    /// Independent model: value as (rational + rational*sqrt2) + i(...), with
    /// 1/2^k carried as an exact rational.
    #[derive(Debug, PartialEq)]
    struct Model([Ratio<i128>; 4]);

    fn model(a: i128, b: i128, c: i128, d: i128, k: u32) -> Model {
        let den = Ratio::from_integer(1i128 << k);
        Model([Ratio::from_integer(a) / den, Ratio::from_integer(b) / den, Ratio::from_integer(c) / den, Ratio::from_integer(d) / den])
    }

    fn model_of(z: &Z) -> Model {
        let (a, b, c, d, k) = z.parts();
        model(a, b, c, d, k)
    }

    fn model_mul(x: &Model, y: &Model) -> Model {
        let two = Ratio::from_integer(2);
        let zs = |p0: Ratio<i128>, p1: Ratio<i128>, q0: Ratio<i128>, q1: Ratio<i128>| (p0 * q0 + two * p1 * q1, p0 * q1 + p1 * q0);
        let [a1, b1, c1, d1] = x.0;
        let [a2, b2, c2, d2] = y.0;
        let (pp0, pp1) = zs(a1, b1, a2, b2);
        let (qq0, qq1) = zs(c1, d1, c2, d2);
        let (pq0, pq1) = zs(a1, b1, c2, d2);
        let (qp0, qp1) = zs(c1, d1, a2, b2);
        Model([pp0 - qq0, pp1 - qq1, pq0 + qp0, pq1 + qp1])
    }

    #[test]
    fn table_examples() {
        assert_eq!(Z::ONE * Z::ONE, Z::new(1, 0, 0, 0, 0));
        let h = Z::new(0, 1, 0, 0, 1);
        assert_eq!(h * h, Z::new(1, 0, 0, 0, 1));
        assert_eq!(h * h, Z::HALF);
        let x = Z::new(1, 0, 1, 0, 0);
        let y = Z::new(1, 0, -1, 0, 0);
        let p = x * y;
        assert_eq!(p.parts(), (2, 0, 0, 0, 0));
        assert_eq!(model_of(&p), model_mul(&model_of(&x), &model_of(&y)));
    }

    #[test]
    fn canonical_form_is_minimal() {
        let z = Z::new(4, 2, 0, 8, 3);
        assert_eq!(z.parts(), (2, 1, 0, 4, 2));
        assert_eq!(Z::new(0, 0, 0, 0, 7).parts(), (0, 0, 0, 0, 0));
        // sqrt2/2 can not lose its denominator in this basis.
        assert_eq!(Z::INV_SQRT2.parts(), (0, 1, 0, 0, 1));
    }

    #[test]
    fn omega_powers() {
        let mut w = Z::ONE;
        for _ in 0..8 {
            w = w * Z::OMEGA;
        }
        assert_eq!(w, Z::ONE);
        assert_eq!(Z::OMEGA * Z::OMEGA, Z::I);
        assert_eq!(Z::OMEGA.try_norm_sqr().unwrap(), Z::ONE);
    }

    #[test]
    fn inv_sqrt2_matches_multiplication() {
        let z = Z::new(3, -1, 5, 2, 2);
        assert_eq!(z.try_mul_inv_sqrt2().unwrap(), z * Z::INV_SQRT2);
    }

    #[test]
    fn real_sign_decides_irrational_comparisons() {
        // 3 - 2*sqrt2 > 0, 1 - sqrt2 < 0, -3 + 2*sqrt2 < 0
        assert_eq!(Z::new(3, -2, 0, 0, 0).real_sign().unwrap(), Ordering::Greater);
        assert_eq!(Z::new(1, -1, 0, 0, 0).real_sign().unwrap(), Ordering::Less);
        assert_eq!(Z::new(-3, 2, 0, 0, 0).real_sign().unwrap(), Ordering::Less);
        assert!(Z::I.real_sign().is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = Z::new(i128::MAX / 2, 0, 0, 0, 0);
        assert_eq!(big.try_mul(&big), Err(Error::ArithmeticCapacity));
        assert_eq!(big.try_add(&big).map(|_| ()), Ok(()));
        let bigger = Z::new(i128::MAX, 0, 0, 0, 0);
        assert_eq!(bigger.try_add(&bigger), Err(Error::ArithmeticCapacity));
    }

    #[test]
    fn json_form_is_five_integers() {
        let z: Z = serde_json::from_str("[0,1,0,0,1]").unwrap();
        assert_eq!(z, Z::INV_SQRT2);
        assert_eq!(serde_json::to_string(&Z::new(2, 0, 0, 0, 1)).unwrap(), "[1,0,0,0,0]");
        assert!(serde_json::from_str::<Z>("[0,0,0,0,-1]").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn amp() -> impl Strategy<Value = Z> {
            (-50i128..50, -50i128..50, -50i128..50, -50i128..50, 0u32..6).prop_map(|(a, b, c, d, k)| Z::new(a, b, c, d, k))
        }

        fn close(x: Complex64, y: Complex64) -> bool {
            let scale = 1.0f64.max(x.norm()).max(y.norm());
            (x - y).norm() <= 1e-9 * scale
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]

            #[test]
            fn float_rendering_tracks_ring_ops(x in amp(), y in amp()) {
                prop_assert!(close((x * y).to_c64(), x.to_c64() * y.to_c64()));
                prop_assert!(close((x + y).to_c64(), x.to_c64() + y.to_c64()));
                prop_assert!(close((x - y).to_c64(), x.to_c64() - y.to_c64()));
                prop_assert!(close(x.conj().to_c64(), x.to_c64().conj()));
                let n = (x * y).try_norm_sqr().unwrap();
                prop_assert!(n.is_real());
                prop_assert_eq!(n, x.try_norm_sqr().unwrap() * y.try_norm_sqr().unwrap());
            }

            #[test]
            fn product_matches_rational_model(x in amp(), y in amp()) {
                prop_assert_eq!(model_of(&(x * y)), model_mul(&model_of(&x), &model_of(&y)));
            }
        }
    }
}
