use core::cmp::Ordering;
use core::fmt::Debug;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{ExactAmplitude, Mass, C64};

/// Amplitude as written in a machine file: five integers `[a, b, c, d, k]`
/// for an exact ring element, or two doubles `[re, im]`.
#[derive(Clone, Copy, Debug)]
pub enum Amplitude {
    Exact(ExactAmplitude),
    Float(C64),
}

impl Amplitude {
    pub fn to_c64(&self) -> C64 {
        match self {
            Amplitude::Exact(e) => e.to_c64(),
            Amplitude::Float(z) => *z,
        }
    }

    fn key(&self) -> (u8, [i128; 5], [u64; 2]) {
        match self {
            Amplitude::Exact(e) => (0, (*e).into(), [0; 2]),
            Amplitude::Float(z) => (1, [0; 5], [z.re.to_bits(), z.im.to_bits()]),
        }
    }
}

// Floats compare by bit pattern so specs can be sorted into canonical order.
impl PartialEq for Amplitude {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Amplitude {}
impl PartialOrd for Amplitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Amplitude {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Serialize for Amplitude {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            Amplitude::Exact(e) => e.serialize(s),
            Amplitude::Float(z) => [z.re, z.im].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Amplitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let nums = alloc::vec::Vec::<serde_json::Number>::deserialize(d)?;
        match nums.len() {
            5 => {
                let mut v = [0i128; 5];
                for (slot, n) in v.iter_mut().zip(&nums) {
                    *slot = n.as_i64().map(i128::from).ok_or_else(|| D::Error::custom("exact amplitude coefficients must be integers"))?;
                }
                ExactAmplitude::try_from(v).map(Amplitude::Exact).map_err(D::Error::custom)
            }
            2 => {
                let re = nums[0].as_f64().ok_or_else(|| D::Error::custom("bad real part"))?;
                let im = nums[1].as_f64().ok_or_else(|| D::Error::custom("bad imaginary part"))?;
                if !(re.is_finite() && im.is_finite()) {
                    return Err(D::Error::custom("amplitude must be finite"));
                }
                Ok(Amplitude::Float(C64::new(re, im)))
            }
            n => Err(D::Error::custom(alloc::format!("amplitude must be [a, b, c, d, k] or [re, im], got {n} numbers"))),
        }
    }
}

/// Scalar type a machine can be simulated with.
pub trait Amp: Clone + Debug + PartialEq {
    /// Type of `|a|^2`.
    type Prob: Mass;
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, rhs: &Self) -> Result<Self>;
    fn times(&self, rhs: &Self) -> Result<Self>;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn norm_sqr(&self) -> Result<Self::Prob>;
    /// Real part of an amplitude that is known to be real, as a probability.
    fn real_as_prob(&self) -> Result<Self::Prob>;
    fn from_amplitude(a: &Amplitude) -> Result<Self>;
    fn to_c64(&self) -> C64;
    /// `1/sqrt(m)`.
    fn uniform_amplitude(m: usize) -> Result<Self>;
    /// `1/sqrt(p)` when representable; used to renormalize collapsed states.
    fn inv_sqrt(p: &Self::Prob) -> Option<Self>;
}

impl Amp for ExactAmplitude {
    type Prob = ExactAmplitude;
    const EXACT: bool = true;
    fn zero() -> Self {
        ExactAmplitude::ZERO
    }
    fn one() -> Self {
        ExactAmplitude::ONE
    }
    fn plus(&self, rhs: &Self) -> Result<Self> {
        self.try_add(rhs)
    }
    fn times(&self, rhs: &Self) -> Result<Self> {
        self.try_mul(rhs)
    }
    fn conj(&self) -> Self {
        ExactAmplitude::conj(self)
    }
    fn is_zero(&self) -> bool {
        ExactAmplitude::is_zero(self)
    }
    fn norm_sqr(&self) -> Result<Self> {
        self.try_norm_sqr()
    }
    fn real_as_prob(&self) -> Result<Self> {
        let (a, b, _, _, k) = self.parts();
        Ok(ExactAmplitude::new(a, b, 0, 0, k))
    }
    fn from_amplitude(a: &Amplitude) -> Result<Self> {
        match a {
            Amplitude::Exact(e) => Ok(*e),
            Amplitude::Float(z) => Err(Error::UnsupportedAmplitude(alloc::format!("{} + {}i is not an exact ring element", z.re, z.im))),
        }
    }
    fn to_c64(&self) -> C64 {
        ExactAmplitude::to_c64(self)
    }
    fn uniform_amplitude(m: usize) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::UnsupportedAmplitude(alloc::format!(
                "1/sqrt({m}) is not in the exact ring; use a power-of-two number of branches or float mode"
            )));
        }
        let mut a = ExactAmplitude::ONE;
        for _ in 0..m.trailing_zeros() {
            a = a.try_mul_inv_sqrt2()?;
        }
        Ok(a)
    }
    fn inv_sqrt(p: &Self) -> Option<Self> {
        // Only p = 2^-j has a representable inverse square root.
        let (a, b, c, d, k) = p.parts();
        if a != 1 || b != 0 || c != 0 || d != 0 {
            return None;
        }
        let mut r = ExactAmplitude::ONE;
        for _ in 0..k {
            r = r.try_mul(&ExactAmplitude::new(0, 1, 0, 0, 0)).ok()?;
        }
        Some(r)
    }
}

impl Amp for C64 {
    type Prob = f64;
    const EXACT: bool = false;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn plus(&self, rhs: &Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn times(&self, rhs: &Self) -> Result<Self> {
        Ok(self * rhs)
    }
    fn conj(&self) -> Self {
        C64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn norm_sqr(&self) -> Result<f64> {
        Ok(C64::norm_sqr(self))
    }
    fn real_as_prob(&self) -> Result<f64> {
        Ok(self.re)
    }
    fn from_amplitude(a: &Amplitude) -> Result<Self> {
        Ok(a.to_c64())
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn uniform_amplitude(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Validation("empty superposition".into()));
        }
        Ok(C64::new(1.0 / libm::sqrt(m as f64), 0.0))
    }
    fn inv_sqrt(p: &f64) -> Option<Self> {
        (*p > 0.0).then(|| C64::new(1.0 / libm::sqrt(*p), 0.0))
    }
}
