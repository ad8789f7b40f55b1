//! SU(2) as unit quaternions: `(w, x, y, z)` is `w I - i (x X + y Y + z Z)`.

use core::ops::Mul;

use rand::Rng;

use crate::scalar::matrix::complex_normal;
use crate::scalar::{DenseMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2 {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Su2 {
    pub const IDENTITY: Self = Self { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = libm::sqrt(w * w + x * x + y * y + z * z);
        Self { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    /// Rotation by `angle` about the unit `axis`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
        Self::new(c, s * axis[0], s * axis[1], s * axis[2])
    }

    pub fn inverse(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Representative with `w >= 0` (and a fixed sign convention on the
    /// boundary), i.e. the element of SU(2)/{+-I}.
    pub fn canonical(&self) -> Self {
        let v = [self.w, self.x, self.y, self.z];
        let lead = v.iter().copied().find(|c| libm::fabs(*c) > 1e-12).unwrap_or(1.0);
        if lead < 0.0 {
            Self { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
        } else {
            *self
        }
    }

    /// `min(||U - V||, ||U + V||)`, the operator-norm distance up to the
    /// centre of SU(2).
    pub fn distance(&self, o: &Self) -> f64 {
        // |q - s p| rather than sqrt(2 (1 - |dot|)), which loses half the
        // digits near zero.
        let s = if self.dot(o) < 0.0 { -1.0 } else { 1.0 };
        let (a, b) = (self.as_array(), o.as_array());
        libm::sqrt((0..4).map(|i| (a[i] - s * b[i]) * (a[i] - s * b[i])).sum())
    }

    /// Rotation angle in `[0, pi]` and axis of the representative with
    /// `w >= 0`.
    pub fn axis_angle(&self) -> ([f64; 3], f64) {
        let q = if self.w < 0.0 { Self { w: -self.w, x: -self.x, y: -self.y, z: -self.z } } else { *self };
        let s = libm::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
        let angle = 2.0 * libm::atan2(s, q.w);
        if s < 1e-300 {
            return ([0.0, 0.0, 1.0], 0.0);
        }
        ([q.x / s, q.y / s, q.z / s], angle)
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        let c = |re, im| C64::new(re, im);
        DenseMatrix::from_rows(2, alloc::vec![c(self.w, -self.z), c(-self.y, -self.x), c(self.y, -self.x), c(self.w, self.z)])
            .expect("finite quaternion")
    }

    /// Nearest quaternion to a 2x2 unitary after removing its global phase.
    pub fn from_matrix(m: &DenseMatrix) -> Option<Self> {
        if m.dim() != 2 {
            return None;
        }
        let su = m.special_unitarized();
        let (a, b, c, d) = (su[(0, 0)], su[(0, 1)], su[(1, 0)], su[(1, 1)]);
        let w = (a.re + d.re) / 2.0;
        let z = (d.im - a.im) / 2.0;
        let y = (c.re - b.re) / 2.0;
        let x = -(b.im + c.im) / 2.0;
        let n = libm::sqrt(w * w + x * x + y * y + z * z);
        (n > 1e-12).then(|| Self::new(w, x, y, z))
    }

    /// Haar-random element.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a = complex_normal(rng);
        let b = complex_normal(rng);
        Self::new(a.re, a.im, b.re, b.im)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }
}

impl Mul for Su2 {
    type Output = Su2;
    fn mul(self, o: Su2) -> Su2 {
        Su2 {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + o.w * self.x + (self.y * o.z - self.z * o.y),
            y: self.w * o.y + o.w * self.y + (self.z * o.x - self.x * o.z),
            z: self.w * o.z + o.w * self.z + (self.x * o.y - self.y * o.x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::distance_mod_center;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_matches_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = Su2::random(&mut rng);
            let b = Su2::random(&mut rng);
            let lhs = (a * b).to_matrix();
            let rhs = a.to_matrix().mul(&b.to_matrix());
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            assert!((a.to_matrix().determinant() - C64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(a.to_matrix().is_unitary());
        }
    }

    #[test]
    fn distance_is_the_phase_invariant_operator_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = Su2::random(&mut rng);
            let b = Su2::random(&mut rng);
            let reference = distance_mod_center(&a.to_matrix(), &b.to_matrix()).unwrap();
            assert!((a.distance(&b) - reference).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = Su2::random(&mut rng);
            let phase = C64::from_polar(1.0, 0.7);
            let back = Su2::from_matrix(&a.to_matrix().scale(phase)).unwrap();
            assert!(a.distance(&back) < 1e-7);
        }
    }

    #[test]
    fn axis_angle_round_trip() {
        let q = Su2::rotation([0.0, 0.6, 0.8], 1.2);
        let (axis, angle) = q.axis_angle();
        assert!((angle - 1.2).abs() < 1e-12);
        assert!((axis[1] - 0.6).abs() < 1e-12 && (axis[2] - 0.8).abs() < 1e-12);
        assert_eq!(Su2::IDENTITY.axis_angle().1, 0.0);
    }
}
