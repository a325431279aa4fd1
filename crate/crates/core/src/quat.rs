//! Real quaternions `q = q0 + q1 i + q2 j + q3 k` with Hamilton multiplication.
//!
//! Everything here is plain value arithmetic in `f64`. The one non-obvious
//! piece is [`Quaternion::binomial_expand`], which splits `qⁿ` into a scalar
//! and a multiple of the imaginary part without ever dividing by `q − q̄`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// `qⁿ = scalar + vector_coeff · (q1 i + q2 j + q3 k)`.
///
/// `vector_coeff` is the real number `(qⁿ − q̄ⁿ)/(q − q̄)`, evaluated as a
/// polynomial in `q0` and `Δ² = q1² + q2² + q3²` so it stays finite on the
/// real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialParts {
    pub scalar: f64,
    pub vector_coeff: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Quaternion { q0, q1, q2, q3 }
    }

    pub const fn real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }

    pub const fn from_array(v: [f64; 4]) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    /// Imaginary part `q1 i + q2 j + q3 k` as a quaternion.
    pub fn imag(self) -> Self {
        Quaternion::new(0.0, self.q1, self.q2, self.q3)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    /// `q q̄ = q0² + q1² + q2² + q3²`.
    pub fn norm_sq(self) -> f64 {
        self.q0 * self.q0 + self.imag_norm_sq()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `Δ² = q1² + q2² + q3²`, so that `(q − q0)² = −Δ²`.
    pub fn imag_norm_sq(self) -> f64 {
        self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    pub fn dot(self, other: Quaternion) -> f64 {
        self.q0 * other.q0 + self.q1 * other.q1 + self.q2 * other.q2 + self.q3 * other.q3
    }

    pub fn is_finite(self) -> bool {
        self.q0.is_finite() && self.q1.is_finite() && self.q2.is_finite() && self.q3.is_finite()
    }

    pub fn inverse(self) -> Result<Self> {
        let n = self.norm_sq();
        if n == 0.0 {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        Ok(self.conj() / n)
    }

    /// Repeated Hamilton product; `pow(0)` is one.
    pub fn pow(self, n: u32) -> Self {
        let mut acc = Quaternion::ONE;
        let mut base = self;
        let mut e = n;
        // All powers of q commute with each other, so square-and-multiply is exact
        // in the algebra.
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Split `qⁿ` into `(½(qⁿ + q̄ⁿ), (qⁿ − q̄ⁿ)/(q − q̄))` using the two
    /// binomial sums over `q0` and `−Δ²`.
    pub fn binomial_expand(self, n: u32) -> BinomialParts {
        let q0 = self.q0;
        let minus_delta_sq = -self.imag_norm_sq();
        let n_us = n as usize;
        let mut scalar = 0.0;
        let mut vector_coeff = 0.0;
        // k runs over the exponent of the imaginary part: even k feeds the scalar,
        // odd k feeds the vector coefficient.
        for k in 0..=n_us {
            let term = binomial(n, k as u32) * q0.powi((n_us - k) as i32);
            if k % 2 == 0 {
                scalar += term * minus_delta_sq.powi((k / 2) as i32);
            } else {
                vector_coeff += term * minus_delta_sq.powi(((k - 1) / 2) as i32);
            }
        }
        BinomialParts { scalar, vector_coeff }
    }

    /// Find a unit `c` with `c a c⁻¹ = a0 + |Im a| i`.
    ///
    /// Returns `(c, a_normal)`. When `Im a` points along `−i` the rotation
    /// is ambiguous and `c = j` is used.
    pub fn similarity_normalize(self) -> Result<(Quaternion, Quaternion)> {
        if self.norm_sq() == 0.0 {
            return Err(Error::Domain("cannot normalize the zero quaternion".into()));
        }
        let v_norm = self.imag_norm_sq().sqrt();
        let a_normal = Quaternion::new(self.q0, v_norm, 0.0, 0.0);
        if v_norm == 0.0 {
            return Ok((Quaternion::ONE, a_normal));
        }
        let u = self.imag() / v_norm;
        // c = normalize(1 − i·u) rotates u onto i under v ↦ c v c̄.
        let raw = Quaternion::ONE - Quaternion::I * u;
        let c = if raw.norm_sq() < 1e-24 {
            Quaternion::J
        } else {
            raw / raw.norm()
        };
        Ok((c, a_normal))
    }

    /// `c q c̄` for a unit `c`.
    pub fn rotate_by(self, c: Quaternion) -> Quaternion {
        c * self * c.conj()
    }

    /// `ab = ba` up to a relative tolerance; holds exactly when the imaginary
    /// parts are parallel.
    pub fn commutes_with(self, other: Quaternion, tol: f64) -> bool {
        let d = self * other - other * self;
        d.norm() <= tol * (1.0 + self.norm() * other.norm())
    }
}

/// `C(n, k)` as a float; exact while the value fits in 53 bits.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc as f64
}

impl From<[f64; 4]> for Quaternion {
    fn from(v: [f64; 4]) -> Self {
        Quaternion::from_array(v)
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::real(x)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.q0, self.q1, self.q2, self.q3)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 + r.q0, self.q1 + r.q1, self.q2 + r.q2, self.q3 + r.q3)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Quaternion) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 - r.q0, self.q1 - r.q1, self.q2 - r.q2, self.q3 - r.q3)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, r: Quaternion) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.q0, -self.q1, -self.q2, -self.q3)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.q0 * b.q0 - a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3,
            a.q1 * b.q0 + a.q0 * b.q1 - a.q3 * b.q2 + a.q2 * b.q3,
            a.q2 * b.q0 + a.q3 * b.q1 + a.q0 * b.q2 - a.q1 * b.q3,
            a.q3 * b.q0 - a.q2 * b.q1 + a.q1 * b.q2 + a.q0 * b.q3,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.q0 * s, self.q1 * s, self.q2 * s, self.q3 * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.q0 / s, self.q1 / s, self.q2 / s, self.q3 / s)
    }
}
