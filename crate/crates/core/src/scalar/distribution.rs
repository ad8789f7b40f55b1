//! Probability masses and output distributions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::exact::ExactAmplitude;
use super::matrix::PROBABILITY_TOL;
use crate::error::{validation, Result};

/// A probability value: an exact rational, an exact real of Z[1/sqrt(2)], or
/// a double.
pub trait Mass: Clone + Debug + PartialEq {
    /// Whether completeness is decided by exact equality.
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, rhs: &Self) -> Result<Self>;
    fn minus(&self, rhs: &Self) -> Result<Self>;
    fn halve(&self) -> Result<Self>;
    fn sign(&self) -> Result<Ordering>;
    fn to_f64(&self) -> f64;

    fn abs_value(&self) -> Result<Self> {
        match self.sign()? {
            Ordering::Less => Self::zero().minus(self),
            _ => Ok(self.clone()),
        }
    }
}

impl Mass for BigRational {
    const EXACT: bool = true;
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn plus(&self, rhs: &Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn minus(&self, rhs: &Self) -> Result<Self> {
        Ok(self - rhs)
    }
    fn halve(&self) -> Result<Self> {
        Ok(self / BigInt::from(2))
    }
    fn sign(&self) -> Result<Ordering> {
        Ok(if self.is_negative() {
            Ordering::Less
        } else if self.is_zero() {
            Ordering::Equal
        } else {
            Ordering::Greater
        })
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Mass for ExactAmplitude {
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
    fn minus(&self, rhs: &Self) -> Result<Self> {
        self.try_sub(rhs)
    }
    fn halve(&self) -> Result<Self> {
        self.try_half()
    }
    fn sign(&self) -> Result<Ordering> {
        self.real_sign()
    }
    fn to_f64(&self) -> f64 {
        self.to_f64_real()
    }
}

impl Mass for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn plus(&self, rhs: &Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn minus(&self, rhs: &Self) -> Result<Self> {
        Ok(self - rhs)
    }
    fn halve(&self) -> Result<Self> {
        Ok(self / 2.0)
    }
    fn sign(&self) -> Result<Ordering> {
        Ok(self.partial_cmp(&0.0).unwrap_or(Ordering::Equal))
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Map from outcome label to probability.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution<P> {
    support: BTreeMap<String, P>,
}

impl<P: Mass> Default for OutputDistribution<P> {
    fn default() -> Self {
        Self { support: BTreeMap::new() }
    }
}

impl<P: Mass> OutputDistribution<P> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Point mass on `label`.
    pub fn point(label: impl Into<String>) -> Self {
        let mut d = Self::new();
        d.support.insert(label.into(), P::one());
        d
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, P)>,
        S: Into<String>,
    {
        let mut d = Self::new();
        for (label, p) in pairs {
            d.add_mass(label, &p)?;
        }
        Ok(d)
    }

    /// Adds `p` to the mass of `label`. Zero entries are dropped.
    pub fn add_mass(&mut self, label: impl Into<String>, p: &P) -> Result<()> {
        let label = label.into();
        let next = match self.support.get(&label) {
            Some(cur) => cur.plus(p)?,
            None => p.clone(),
        };
        if next.sign()? == Ordering::Equal {
            self.support.remove(&label);
        } else {
            self.support.insert(label, next);
        }
        Ok(())
    }

    pub fn get(&self, label: &str) -> P {
        self.support.get(label).cloned().unwrap_or_else(P::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &P)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> Result<P> {
        self.support.values().try_fold(P::zero(), |acc, p| acc.plus(p))
    }

    /// Every probability is non-negative.
    pub fn validate(&self) -> Result<()> {
        for (label, p) in &self.support {
            if p.sign()? == Ordering::Less && (P::EXACT || p.to_f64() < -PROBABILITY_TOL) {
                return Err(validation(alloc::format!("negative probability for outcome {label:?}")));
            }
        }
        Ok(())
    }

    /// Total mass is one: exactly for exact masses, within 1e-12 otherwise.
    pub fn is_complete(&self) -> Result<bool> {
        let total = self.total()?;
        Ok(if P::EXACT { total == P::one() } else { (total.to_f64() - 1.0).abs() <= PROBABILITY_TOL })
    }

    pub fn to_float(&self) -> OutputDistribution<f64> {
        OutputDistribution { support: self.support.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect() }
    }
}

/// Total-variation distance `1/2 sum |P(x) - Q(x)|` between complete
/// distributions.
pub fn tvd<P: Mass>(p: &OutputDistribution<P>, q: &OutputDistribution<P>) -> Result<P> {
    for (name, d) in [("first", p), ("second", q)] {
        d.validate()?;
        if !d.is_complete()? {
            return Err(validation(alloc::format!("{name} distribution is incomplete (mass != 1)")));
        }
    }
    tvd_unchecked(p, q)
}

/// `1/2 sum |P(x) - Q(x)|` without completeness checks, used for sub-normalized
/// halted masses.
pub fn tvd_unchecked<P: Mass>(p: &OutputDistribution<P>, q: &OutputDistribution<P>) -> Result<P> {
    let mut acc = P::zero();
    for (label, pv) in p.iter() {
        acc = acc.plus(&pv.minus(&q.get(label))?.abs_value()?)?;
    }
    for (label, qv) in q.iter() {
        if !p.support.contains_key(label) {
            acc = acc.plus(&qv.abs_value()?)?;
        }
    }
    acc.halve()
}
