//! Shared numerical building blocks: oscillatory (Filon-type) quadrature,
//! causal space–time convolution via FFT, and small least-squares fits.
//!
//! Every integral in the solver pipeline is of Volterra type with a known
//! oscillatory phase `e^{iωs}` multiplying a smooth, grid-sampled source.
//! The workhorse here integrates the phase **exactly** against the piecewise
//! linear interpolant of the source ("Filon-trapezoid"): the result is
//! second-order accurate in the grid spacing with an error constant that
//! does not degrade as `ω·Δ` grows — unlike plain trapezoid, which becomes
//! useless once the phase turns over within a cell. All stiff phases in the
//! model (`e^{±ik²z}`, `e^{±ikt}`, `e^{±iξ²z}`) go through this path.

use crate::mat2::Mat2;
use crate::{cr, C64, I};
use ndarray::Array2;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// `e^{ix}` for real `x`, via simultaneous sin/cos.
#[inline]
pub fn expi(x: f64) -> C64 {
    let (s, c) = x.sin_cos();
    C64::new(c, s)
}

// ---------------------------------------------------------------------------
// Filon-trapezoid segment weights
// ---------------------------------------------------------------------------

/// Weights `(w0, w1)` such that
/// `∫₀^Δ e^{iωs} · (f0·(1−s/Δ) + f1·(s/Δ)) ds = w0·f0 + w1·f1`.
///
/// The phase is integrated exactly; only the source is interpolated. For
/// `|ωΔ| → 0` the weights reduce to plain trapezoid `(Δ/2, Δ/2)`; the
/// crossover to a Taylor series below `|ωΔ| = 1e-4` avoids the cancellation
/// in the closed form, whose relative error is ~`1e-16/|ωΔ|`.
pub fn filon_weights(omega: f64, delta: f64) -> (C64, C64) {
    let phi = omega * delta;
    let (i1, iu) = if phi.abs() < 0.05 {
        // I1 = Σ (iφ)^n/(n+1)!,  Iu = Σ (iφ)^n/(n!·(n+2)).  The closed form
        // below cancels at second order (absolute error ~ε/φ²), so it only
        // takes over where that error is ≤ 4e-14; twelve series terms leave
        // a truncation error < 1e-17 at the crossover.
        let ip = C64::new(0.0, phi);
        let mut i1 = cr(0.0);
        let mut iu = cr(0.0);
        let mut pw = cr(1.0); // (iφ)^n / n!
        for n in 0..12 {
            i1 += pw / (n as f64 + 1.0);
            iu += pw / (n as f64 + 2.0);
            pw = pw * ip / cr(n as f64 + 1.0);
        }
        (i1, iu)
    } else {
        let e = expi(phi);
        let ip = C64::new(0.0, phi);
        let i1 = (e - cr(1.0)) / ip;
        let iu = (e * (ip - cr(1.0)) + cr(1.0)) / (ip * ip);
        (i1, iu)
    };
    let w1 = cr(delta) * iu;
    let w0 = cr(delta) * (i1 - iu);
    (w0, w1)
}

// ---------------------------------------------------------------------------
// Prefix (running) Filon integrals
// ---------------------------------------------------------------------------

/// Running integrals `P[m] = ∫₀^{tₘ} e^{iωs} f(s) ds` on the uniform grid
/// `tₘ = m·Δ`, with `f` piecewise linear through the samples. `P[0] = 0`.
pub fn prefix_filon(omega: f64, delta: f64, f: &[C64]) -> Vec<C64> {
    let n = f.len();
    let mut p = vec![cr(0.0); n];
    if n < 2 {
        return p;
    }
    let (w0, w1) = filon_weights(omega, delta);
    for m in 0..n - 1 {
        // Segment [tₘ, tₘ₊₁]: shift the phase origin to tₘ.
        let phase = expi(omega * delta * m as f64);
        p[m + 1] = p[m] + phase * (w0 * f[m] + w1 * f[m + 1]);
    }
    p
}

/// Duhamel solution of the oscillator `n'' + k²n = q(t)`, `n(0) = n'(0) = 0`:
/// `n(t) = (1/k) ∫₀^t sin(k(t−s)) q(s) ds`, evaluated at every grid node.
///
/// The sine kernel is split into `e^{±ik(t−s)}` halves so each half is a
/// prefix Filon integral; the split keeps full accuracy for `kΔ ≫ 1`.
pub fn wave_duhamel(k: f64, delta: f64, q: &[C64]) -> Vec<C64> {
    assert!(k > 0.0, "oscillator frequency must be positive");
    let pm = prefix_filon(-k, delta, q);
    let pp = prefix_filon(k, delta, q);
    let mut out = vec![cr(0.0); q.len()];
    let half_ik = C64::new(0.0, 2.0 * k);
    for m in 0..q.len() {
        let t = delta * m as f64;
        out[m] = (expi(k * t) * pm[m] - expi(-k * t) * pp[m]) / half_ik;
    }
    out
}

/// Exact-phase Duhamel solution of the scalar ODE `i·u' = ω·u + s(z)`,
/// `u(0) = u0`, on the uniform grid: `u(z) = e^{−iωz}(u0 − i∫₀^z e^{iωz'}s dz')`.
pub fn phase_duhamel(omega: f64, delta: f64, u0: C64, s: &[C64]) -> Vec<C64> {
    let p = prefix_filon(omega, delta, s);
    (0..s.len())
        .map(|l| expi(-omega * delta * l as f64) * (u0 - I * p[l]))
        .collect()
}

// ---------------------------------------------------------------------------
// Causal convolutions with trapezoid end corrections
// ---------------------------------------------------------------------------

/// 1-D causal convolution `out[m] = Δ·Σ'_{i≤m} k[m−i]·f[i]` where `Σ'` is the
/// trapezoid sum (half weights at `i = 0` and `i = m`); `out[0] = 0`, matching
/// `∫₀^{tₘ} k(tₘ−s)f(s) ds`.
pub fn conv1_causal(kern: &[C64], f: &[C64], delta: f64) -> Vec<C64> {
    let n = kern.len().min(f.len());
    let mut out = vec![cr(0.0); n];
    for m in 1..n {
        let mut acc = cr(0.5) * (kern[m] * f[0] + kern[0] * f[m]);
        for i in 1..m {
            acc += kern[m - i] * f[i];
        }
        out[m] = acc * cr(delta);
    }
    out
}

/// Forward/inverse FFT pair of a fixed length.
pub struct Cfft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Cfft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.len);
        self.fwd.process(data);
    }

    /// Inverse transform including the `1/len` normalization.
    pub fn inverse(&self, data: &mut [C64]) {
        debug_assert_eq!(data.len(), self.len);
        self.inv.process(data);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// 2-D causal (Volterra) convolution on the uniform grid `[nt × nz]`:
///
/// `out[m,l] ≈ ∫₀^{z_l} ∫₀^{tₘ} K(tₘ−s, z_l−z') F(s, z') ds dz'`
///
/// by trapezoid in both directions. The inner `t`-convolutions are done by
/// FFT (zero-padded to ≥ 2·nt); the trapezoid end corrections, which the
/// plain circular convolution does not see, are added back as rank-one
/// sweeps. Cost: `O(nz²·nt + nz·nt·log nt)` versus `O(nz²·nt²)` naive.
pub fn conv2_causal(kern: &Array2<C64>, src: &Array2<C64>, dt: f64, dz: f64) -> Array2<C64> {
    let (nt, nz) = kern.dim();
    assert_eq!(src.dim(), (nt, nz), "kernel/source grids must agree");
    let mut out = Array2::from_elem((nt, nz), cr(0.0));
    if nt < 2 || nz < 2 {
        return out;
    }
    let pad = (2 * nt).next_power_of_two();
    let fft = Cfft::new(pad);

    // Hats of every t-column of K and F.
    let mut khat = Vec::with_capacity(nz);
    let mut fhat = Vec::with_capacity(nz);
    for j in 0..nz {
        let mut col = vec![cr(0.0); pad];
        for m in 0..nt {
            col[m] = kern[[m, j]];
        }
        fft.forward(&mut col);
        khat.push(col);
        let mut col = vec![cr(0.0); pad];
        for m in 0..nt {
            col[m] = src[[m, j]];
        }
        fft.forward(&mut col);
        fhat.push(col);
    }

    let wz = |j: usize, l: usize| -> f64 {
        if j == 0 || j == l {
            0.5
        } else {
            1.0
        }
    };

    let scale = cr(dt * dz);
    let mut acc = vec![cr(0.0); pad];
    for l in 1..nz {
        for v in acc.iter_mut() {
            *v = cr(0.0);
        }
        for j in 0..=l {
            let w = cr(wz(j, l));
            let (kh, fh) = (&khat[j], &fhat[l - j]);
            for p in 0..pad {
                acc[p] += w * kh[p] * fh[p];
            }
        }
        fft.inverse(&mut acc);
        // Trapezoid end corrections in t: the FFT computed the full sum
        // Σ_{i=0..m} K[m−i]F[i]; subtract half of the two end terms. Row
        // m = 0 is an empty integral — exactly zero, skip it rather than
        // leave FFT roundoff behind.
        for m in 1..nt {
            let mut corr = cr(0.0);
            for j in 0..=l {
                let w = cr(wz(j, l));
                corr += w * (kern[[0, j]] * src[[m, l - j]] + kern[[m, j]] * src[[0, l - j]]);
            }
            out[[m, l]] = scale * (acc[m] - cr(0.5) * corr);
        }
    }
    out
}

/// Componentwise [`conv2_causal`] of a matrix-valued kernel against a
/// two-channel source: `out_i = Σ_j (K_{ij} ∗ F_j)`.
pub fn conv2_mat_vec(
    kern: &Array2<Mat2>,
    src0: &Array2<C64>,
    src1: &Array2<C64>,
    dt: f64,
    dz: f64,
) -> (Array2<C64>, Array2<C64>) {
    let (nt, nz) = kern.dim();
    let comp = |pick: &dyn Fn(&Mat2) -> C64| -> Array2<C64> {
        Array2::from_shape_fn((nt, nz), |(m, l)| pick(&kern[[m, l]]))
    };
    let kaa = comp(&|k| k.a);
    let kab = comp(&|k| k.b);
    let kba = comp(&|k| k.c);
    let kbb = comp(&|k| k.d);
    let mut o0 = conv2_causal(&kaa, src0, dt, dz);
    o0 += &conv2_causal(&kab, src1, dt, dz);
    let mut o1 = conv2_causal(&kba, src0, dt, dz);
    o1 += &conv2_causal(&kbb, src1, dt, dz);
    (o0, o1)
}

// ---------------------------------------------------------------------------
// Small least-squares fits
// ---------------------------------------------------------------------------

/// Least squares `y ≈ a·x + b`; returns `(a, b, rms_residual)`.
pub fn fit_affine(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (a, b, _, r) = fit_two_regressors(x, &vec![0.0; x.len()], y);
    (a, b, r)
}

/// Least squares `y ≈ a·x1 + b·x2 + c`; returns `(a, b, c, rms_residual)`.
/// Solved through the 3×3 normal equations with partial pivoting — adequate
/// for the well-separated regressors used here (e.g. `ρ` vs `ln ρ`).
pub fn fit_two_regressors(x1: &[f64], x2: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = y.len();
    assert!(n >= 3, "need at least 3 samples for a 3-parameter fit");
    assert!(x1.len() == n && x2.len() == n);
    let mut g = [[0.0f64; 4]; 3];
    for i in 0..n {
        let row = [x1[i], x2[i], 1.0];
        for r in 0..3 {
            for c in 0..3 {
                g[r][c] += row[r] * row[c];
            }
            g[r][3] += row[r] * y[i];
        }
    }
    // Gaussian elimination, partial pivoting.
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))
            .unwrap();
        g.swap(col, piv);
        let d = g[col][col];
        assert!(
            d.abs() > 1e-300,
            "degenerate normal equations (constant regressor?)"
        );
        for r in 0..3 {
            if r != col {
                let f = g[r][col] / d;
                for c in col..4 {
                    g[r][c] -= f * g[col][c];
                }
            }
        }
    }
    let a = g[0][3] / g[0][0];
    let b = g[1][3] / g[1][1];
    let c = g[2][3] / g[2][2];
    let mut ss = 0.0;
    for i in 0..n {
        let e = y[i] - (a * x1[i] + b * x2[i] + c);
        ss += e * e;
    }
    (a, b, c, (ss / n as f64).sqrt())
}
