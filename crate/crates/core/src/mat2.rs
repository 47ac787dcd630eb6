//! Dense 2×2 complex matrices and 2-vectors.
//!
//! The linearized per-frequency system has exactly two Schrödinger channels
//! (the mode and its conjugate partner), so every operator that appears in
//! the kernel calculus is a 2×2 complex matrix. A hand-rolled value type is
//! simpler and faster here than a general linear-algebra crate: all the
//! algebra we need is closed-form (the system matrix squares to a scalar
//! multiple of the identity), and the hot loops evaluate millions of these.

use crate::{cr, C64};
use std::ops::{Add, Mul, Neg, Sub};

/// Row-major 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// Column 2-vector.
pub type Vec2 = [C64; 2];

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn zero() -> Self {
        let z = cr(0.0);
        Self::new(z, z, z, z)
    }

    pub fn eye() -> Self {
        let z = cr(0.0);
        let o = cr(1.0);
        Self::new(o, z, z, o)
    }

    /// Diagonal matrix `diag(p, q)`.
    pub fn diag(p: C64, q: C64) -> Self {
        Self::new(p, cr(0.0), cr(0.0), q)
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Entry of largest modulus; the norm used for convergence tests.
    pub fn norm_max(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// Determinant.
    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    /// Left application of the row covector `(1, 1)`: returns `u + v` weights
    /// as the row vector `(a+c, b+d)`. This contraction extracts the density
    /// response, which couples to the *sum* of the two Schrödinger channels.
    pub fn row_sum(&self) -> Vec2 {
        [self.a + self.c, self.b + self.d]
    }

    /// First column (action on the unit vector `(1, 0)ᵀ`).
    pub fn col0(&self) -> Vec2 {
        [self.a, self.c]
    }

    /// Action on the fixed vector `(-1, 1)ᵀ`, which carries the density
    /// forcing into the two Schrödinger channels with opposite signs.
    pub fn mul_pm(&self) -> Vec2 {
        [self.b - self.a, self.d - self.c]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(cr(-1.0))
    }
}
