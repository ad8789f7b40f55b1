//! The Cantor pairing bijection N x N -> N and the bijective binary
//! correspondence between naturals and finite bit strings.

// Float supplies sqrt when std is not linked.
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Cantor pairing `(n + m)(n + m + 1)/2 + m`.
pub fn pair(n: &BigUint, m: &BigUint) -> BigUint {
    let s = n + m;
    (&s * (&s + 1u32)) / 2u32 + m
}

/// Inverse of [`pair`].
pub fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z + 1) - 1) / 2)
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let m = z - &t;
    let n = &w - &m;
    (n, m)
}

pub fn pair_u64(n: u64, m: u64) -> u128 {
    let s = n as u128 + m as u128;
    s * (s + 1) / 2 + m as u128
}

pub fn unpair_u64(z: u128) -> (u128, u128) {
    let mut w = ((8.0 * z as f64 + 1.0).sqrt() as u128).saturating_sub(1) / 2;
    // Float square root may be off by one for large z.
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let m = z - w * (w + 1) / 2;
    (w - m, m)
}

/// Bijective base-2 numeral: 0 -> "", 1 -> "0", 2 -> "1", 3 -> "00", ...
///
/// Computed as the binary expansion of `n + 1` without its leading one.
pub fn nat_to_bits(n: &BigUint) -> String {
    let s = (n + 1u32).to_str_radix(2);
    String::from(&s[1..])
}

/// Inverse of [`nat_to_bits`]. Returns `None` on characters other than 0/1.
pub fn bits_to_nat(bits: &str) -> Option<BigUint> {
    let mut v = BigUint::one();
    for ch in bits.chars() {
        v <<= 1u32;
        match ch {
            '0' => {}
            '1' => v += 1u32,
            _ => return None,
        }
    }
    Some(v - 1u32)
}

/// Big-endian base-256 value of `bytes` (the empty string maps to zero).
pub fn bytes_to_nat(bytes: &[u8]) -> BigUint {
    if bytes.is_empty() {
        BigUint::zero()
    } else {
        BigUint::from_bytes_be(bytes)
    }
}

pub fn nat_to_bytes(n: &BigUint) -> Vec<u8> {
    if n.is_zero() {
        Vec::new()
    } else {
        n.to_bytes_be()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(&b(0), &b(0)), b(0));
        assert_eq!(pair(&b(1), &b(0)), b(1));
        assert_eq!(pair(&b(2), &b(3)), b(18));
        assert_eq!(unpair(&b(0)), (b(0), b(0)));
        assert_eq!(unpair(&b(2)), (b(0), b(1)));
        assert_eq!(unpair(&b(18)), (b(2), b(3)));
    }

    #[test]
    fn pairing_is_bijective_below_a_million() {
        let mut seen = alloc::vec![false; 1_000_000];
        for z in 0..1_000_000u128 {
            let (n, m) = unpair_u64(z);
            assert_eq!(pair_u64(n as u64, m as u64), z);
            let s = (n + m) as usize;
            // Within diagonal s the index m is unique; mark (s, m) once.
            if s < 1414 {
                let idx = s * (s + 1) / 2 + m as usize;
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn big_and_small_agree() {
        for z in (0..5000u64).chain([u32::MAX as u64, 1 << 40]) {
            let (n, m) = unpair(&b(z));
            let (n2, m2) = unpair_u64(z as u128);
            assert_eq!((n, m), (BigUint::from(n2), BigUint::from(m2)));
        }
        let huge = BigUint::from(7u32).pow(200);
        let (n, m) = unpair(&huge);
        assert_eq!(pair(&n, &m), huge);
    }

    #[test]
    fn bit_strings_biject_with_naturals() {
        assert_eq!(nat_to_bits(&b(0)), "");
        assert_eq!(nat_to_bits(&b(1)), "0");
        assert_eq!(nat_to_bits(&b(2)), "1");
        assert_eq!(nat_to_bits(&b(3)), "00");
        for n in 0..2000u64 {
            assert_eq!(bits_to_nat(&nat_to_bits(&b(n))), Some(b(n)));
        }
        assert_eq!(bits_to_nat("01x"), None);
    }
}
