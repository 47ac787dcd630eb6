//! Shared oracle machinery for the integration tests.
//!
//! Everything in this module recomputes quantities produced by the library
//! through *different algorithms* — series algebra and elementary recurrences
//! instead of contour quadrature, scaling-and-squaring instead of closed-form
//! propagators — so agreement between the two is genuine evidence, not a
//! tautology.
#![allow(dead_code)]

use zgoursat_core::mat2::Mat2;
use zgoursat_core::{cr, C64, I};

/// Matrix exponential `e^X` by scaling-and-squaring with a Taylor core.
/// Deliberately ignorant of the special structure `A² ∝ Id` that the library
/// exploits.
pub fn expm(x: Mat2) -> Mat2 {
    let norm = x.norm_max();
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let xs = x.scale(cr(0.5f64.powi(s)));
    let mut term = Mat2::eye();
    let mut sum = Mat2::eye();
    for n in 1..=24 {
        term = (term * xs).scale(cr(1.0 / n as f64));
        sum = sum + term;
    }
    let mut r = sum;
    for _ in 0..s {
        r = r * r;
    }
    r
}

fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Truncation orders for [`laurent_kernel`]; exposed so tests can verify the
/// oracle's own convergence by comparing two truncation levels.
#[derive(Clone, Copy)]
pub struct LaurentOrders {
    pub m_max: usize,
    pub j_max: usize,
}

impl Default for LaurentOrders {
    fn default() -> Self {
        Self { m_max: 110, j_max: 40 }
    }
}

/// Laurent-series evaluation of the contour kernels.
///
/// Writing `ζ = k + w`, the coupling becomes `g(w) = k²Ē²/(w(w+2k))`, a
/// convergent Laurent series at `w = 0`. The symbol matrix splits as
/// `A = A∞ + g·B` with `A∞ = diag(−k², k²)` and the nilpotent
/// `B = [[−1,−1],[1,1]]`, so powers of `A` expand in powers of `g` through
/// the recurrence `M_{m,j} = A∞·M_{m−1,j} + B·M_{m−1,j−1}`, giving
/// `e^{izA} = Σ_j Q_j(z)·g(w)^j` with `Q_j = Σ_m (iz)^m M_{m,j}/m!`.
///
/// Each closed contour integral is then `2πi` times a residue, i.e. a single
/// Laurent coefficient, and the circle at `−k` follows from the one at `+k`
/// by the parity `A(−ζ) = A(ζ)`:
///
/// `𝓔 = i·(C(t) − C(−t))`, `C(t) = e^{ikt}·Res_{w=0}[e^{itw}·Σ_j Q_j g^{j+extra}]·(normalizers)`
///
/// with `extra = 0, 1, 2` attaching the weights `1`, `k²/(ζ²−k²) = g/Ē²`,
/// `k⁴/(ζ²−k²)² = g²/Ē⁴`. No contours, no quadrature, no library calls.
pub fn laurent_kernel(k: f64, ebar: f64, t: f64, z: f64, extra: usize, ord: LaurentOrders) -> Mat2 {
    let (m_max, j_max) = (ord.m_max, ord.j_max);
    let a_inf = Mat2::diag(cr(-k * k), cr(k * k));
    let b = Mat2::new(cr(-1.0), cr(-1.0), cr(1.0), cr(1.0));

    // Q_j = Σ_m (iz)^m/m! · M_{m,j}, rising rows of the recurrence.
    let mut q = vec![Mat2::zero(); j_max + 1];
    let mut prev = vec![Mat2::zero(); j_max + 1];
    prev[0] = Mat2::eye();
    let mut fac = cr(1.0); // (iz)^m / m!
    q[0] = q[0] + prev[0].scale(fac);
    for m in 1..=m_max {
        let mut cur = vec![Mat2::zero(); j_max + 1];
        for j in 0..=j_max.min(m) {
            cur[j] = a_inf * prev[j];
            if j > 0 {
                cur[j] = cur[j] + b * prev[j - 1];
            }
        }
        fac = fac * I * cr(z) / cr(m as f64);
        for j in 0..=j_max {
            q[j] = q[j] + cur[j].scale(fac);
        }
        prev = cur;
    }

    // g(w)^p = (kĒ²/2)^p · w^{−p} · σ(w)^p with σ = (1 + w/2k)^{−1}, whose
    // p-th power has the closed-form coefficients below. The `extra` weight
    // divides by Ē^{2·extra}, leaving Ē^{2j} net on the Q_j term.
    let c_of = |t: f64| -> Mat2 {
        let mut acc = Mat2::zero();
        for (j, qj) in q.iter().enumerate() {
            let jp = j + extra;
            if jp == 0 {
                continue; // analytic term: no residue
            }
            // S_{jp}(t) = Σ_{q<jp} (it)^q/q! · [σ^{jp}]_{jp−1−q}
            let mut s = cr(0.0);
            let mut itq = cr(1.0); // (it)^q / q!
            for qq in 0..jp {
                let p = jp - 1 - qq;
                let sig = binom(jp + p - 1, p) * (-1.0 / (2.0 * k)).powi(p as i32);
                s += itq * cr(sig);
                itq = itq * I * cr(t) / cr(qq as f64 + 1.0);
            }
            let coef = (k / 2.0).powi(jp as i32) * ebar.powi(2 * j as i32);
            acc = acc + qj.scale(s * cr(coef));
        }
        let (st, ct) = (k * t).sin_cos();
        acc.scale(C64::new(ct, st)) // e^{ikt}
    };

    (c_of(t) - c_of(-t)).scale(I)
}
