//! Fundamental-solution kernels of the linearized per-frequency system,
//! evaluated by adaptive contour quadrature.
//!
//! # The symbol algebra
//!
//! Linearizing the coupled system about the plane-wave background `Ē` and
//! taking a Laplace transform in `t` (dual variable `ζ`, convention
//! `φ̂(ζ) = ∫₀^∞ e^{−iζt} φ(t) dt`, so `∂_t ↔ iζ`) reduces the problem at
//! transverse frequency `k` to the 2×2 ODE system `Û_z = iA(ζ)Û + Ĝ` with
//!
//! ```text
//!     A(ζ) = [ −k² − a,   −a ]          a(ζ) = k²Ē² / (ζ² − k²).
//!            [    a,   a + k² ],
//! ```
//!
//! The key identity is `A² = k²(k² + 2a)·Id`, so with `λ(ζ) = √(1 + 2a/k²)`
//! (principal branch) the propagator is elementary:
//!
//! ```text
//!     e^{izA} = cos(k²λz)·Id + i·sin(k²λz)/(k²λ)·A.
//! ```
//!
//! # The kernels
//!
//! Undoing the transform along a contour `Γ` that encircles the four branch
//! points `ζ = ±k ± Ē·k/√(ζ…)`-cluster (in practice: two circles of radius
//! `r` centered at `±k`, counterclockwise) produces the three kernels this
//! module evaluates, distinguished by the rational weight they carry:
//!
//! ```text
//!     𝓔₀(t,z) = (1/2π) ∮_Γ e^{i(tζ + zA(ζ))} dζ                (weight 1)
//!     𝓔₁(t,z) = (1/2π) ∮_Γ e^{i(tζ + zA)} · k²/(ζ²−k²) dζ      (density → field)
//!     𝓔₂(t,z) = (1/2π) ∮_Γ e^{i(tζ + zA)} · k⁴/(ζ²−k²)² dζ     (density → density)
//! ```
//!
//! All three are entire in `t, z` and — by Cauchy's theorem — independent of
//! the admissible contour radius; that independence is exploited throughout
//! the tests as a free consistency check.
//!
//! # Radius selection and conditioning
//!
//! The integrand's modulus on the circle behaves like
//! `exp(t·r·sinθ + z·kĒ²/(2r)·sinθ)`, so the quadrature's cancellation error
//! is minimized at the balance point `r = √(kĒ²z/(2t))`, where the maximum
//! modulus matches the answer's actual size `~e^ρ`, with
//! `ρ = √(2kĒ²zt)` the amplification exponent. Away from that radius the
//! quadrature loses `log₁₀ e^{Δ}` digits to cancellation; [`select_radius`]
//! implements the balance point with the clamps that keep the contour inside
//! the symbol's annulus of analyticity, `1 ≤ r ≤ k/2`.

use crate::mat2::{Mat2, Vec2};
use crate::quad::expi;
use crate::{cr, Error, Result, C64, I};

// ---------------------------------------------------------------------------
// Symbol
// ---------------------------------------------------------------------------

/// Plane-wave linearization data: transverse frequency `k > 0` and background
/// amplitude `Ē ≥ 0` (real without loss of generality — a constant phase of
/// the background can be gauged away).
#[derive(Clone, Copy, Debug)]
pub struct LinearizedSymbol {
    pub k: f64,
    pub ebar: f64,
}

impl LinearizedSymbol {
    pub fn new(k: f64, ebar: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidInput(format!(
                "transverse frequency k must be positive and finite, got {k}"
            )));
        }
        if !(ebar >= 0.0) || !ebar.is_finite() {
            return Err(Error::InvalidInput(format!(
                "background amplitude must be nonnegative and finite, got {ebar}"
            )));
        }
        Ok(Self { k, ebar })
    }

    /// Amplification exponent `ρ(t, z) = √(2kĒ²zt)`.
    pub fn rho(&self, t: f64, z: f64) -> f64 {
        (2.0 * self.k * self.ebar * self.ebar * z * t).max(0.0).sqrt()
    }

    /// Whether `(t, z)` lies in the calibrated validity regime of the
    /// envelope bounds: `Ē ≤ 1`, `k ≥ max(1, 4Ē²)`, `t ∈ [0,1]`, `z ∈ [0,½]`.
    pub fn in_envelope_regime(&self, t: f64, z: f64) -> bool {
        self.ebar <= 1.0
            && self.k >= 1.0_f64.max(4.0 * self.ebar * self.ebar)
            && (0.0..=1.0).contains(&t)
            && (0.0..=0.5).contains(&z)
    }
}

/// Relative pole-guard width: evaluation of the symbol is refused within
/// `POLE_GUARD · k²` of the acoustic poles `ζ = ±k`, where `ζ² − k²` loses
/// all significance.
pub const POLE_GUARD: f64 = 1e-14;

/// The coupling scalar `a(ζ) = k²Ē²/(ζ² − k²)`.
pub fn coupling_a(sym: &LinearizedSymbol, zeta: C64) -> Result<C64> {
    let k2 = cr(sym.k * sym.k);
    let denom = zeta * zeta - k2;
    if denom.norm() <= POLE_GUARD * sym.k * sym.k {
        return Err(Error::NearPole(format!(
            "|ζ²−k²| = {:.3e} at ζ = {zeta}",
            denom.norm()
        )));
    }
    Ok(k2 * cr(sym.ebar * sym.ebar) / denom)
}

/// The 2×2 symbol matrix `A(ζ)`.
pub fn matrix_a(sym: &LinearizedSymbol, zeta: C64) -> Result<Mat2> {
    let a = coupling_a(sym, zeta)?;
    let k2 = cr(sym.k * sym.k);
    Ok(Mat2::new(-k2 - a, -a, a, a + k2))
}

/// Principal-branch `λ(ζ) = √(1 + 2a/k²)`, normalized so the propagator
/// phase is `k²λz`. On the admissible annulus `1 ≤ |ζ ∓ k| ≤ k/2` (with
/// `k ≥ max(1, 4Ē²)`) the argument stays in the right half-plane, so the
/// principal branch is holomorphic there.
pub fn lambda_principal(sym: &LinearizedSymbol, zeta: C64) -> Result<C64> {
    let a = coupling_a(sym, zeta)?;
    Ok((cr(1.0) + cr(2.0 / (sym.k * sym.k)) * a).sqrt())
}

/// The propagator `e^{izA(ζ)} = cos(k²λz)·Id + i·sin(k²λz)/(k²λ)·A`.
///
/// Both `cos` and `sin/·` are even in `k²λ`, so the square-root branch drops
/// out: the result is a single-valued function of `a`.
pub fn exp_iza(sym: &LinearizedSymbol, zeta: C64, z: f64) -> Result<Mat2> {
    let a = matrix_a(sym, zeta)?;
    let lam = lambda_principal(sym, zeta)?;
    let mu = cr(sym.k * sym.k) * lam; // k²λ
    Ok(propagator_from_mu(&a, mu, z))
}

/// Assemble `cos(μz)·Id + i·sin(μz)/μ·A` with a series fallback for the
/// removable singularity of `sin(μz)/μ` at `μ → 0`.
fn propagator_from_mu(a: &Mat2, mu: C64, z: f64) -> Mat2 {
    let w = mu * cr(z);
    let (c, sinc_z) = if w.norm() < 1e-6 {
        // cos w ≈ 1 − w²/2, sin(w)/μ = z·(1 − w²/6)
        let w2 = w * w;
        (cr(1.0) - w2 * cr(0.5), cr(z) * (cr(1.0) - w2 / cr(6.0)))
    } else {
        (w.cos(), w.sin() / mu)
    };
    Mat2::eye().scale(c) + a.scale(I * sinc_z)
}

/// Free (decoupled) propagator `Φ_z = e^{izA(∞)} = diag(e^{−ik²z}, e^{ik²z})`.
pub fn free_propagator(sym: &LinearizedSymbol, z: f64) -> Mat2 {
    let k2 = sym.k * sym.k;
    Mat2::diag(expi(-k2 * z), expi(k2 * z))
}

// ---------------------------------------------------------------------------
// Radius selection
// ---------------------------------------------------------------------------

/// Which kernel a contour evaluation targets; the small-`ρ` fallback radius
/// differs for the doubly-weighted kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelFamily {
    /// Weight `1`.
    E0,
    /// Weight `k²/(ζ²−k²)`.
    E1,
    /// Weight `k⁴/(ζ²−k²)²`.
    E2,
}

/// Which branch of the radius rule fired (recorded for diagnostics).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusBranch {
    /// Balance point `r = √(kĒ²z/(2t))`, active when `kĒ²zt ≥ 2`.
    Balanced,
    /// Small-`ρ` rule for `𝓔₀`/`𝓔₁`: `r = max(1, kĒ²z)`.
    SmallRho,
    /// Small-`ρ` rule for `𝓔₂`: `r = min(1/t, k/2)`, kept small so the
    /// double pole weight `k⁴/(ζ²−k²)²` is not sampled at its largest.
    SmallRhoDoublePole,
}

/// Radius selection for the contour `|ζ ∓ k| = r`, with the analyticity
/// clamps `1 ≤ r ≤ k/2`. Returns the radius and the branch that produced it.
pub fn select_radius(
    sym: &LinearizedSymbol,
    t: f64,
    z: f64,
    family: KernelFamily,
) -> (f64, RadiusBranch) {
    let ke2 = sym.k * sym.ebar * sym.ebar;
    let clamp = |r: f64| r.clamp(1.0, (sym.k / 2.0).max(1.0));
    if ke2 * z * t >= 2.0 && t > 0.0 {
        // ρ/2t: the stationary-phase balance point.
        return (clamp((ke2 * z / (2.0 * t)).sqrt()), RadiusBranch::Balanced);
    }
    match family {
        KernelFamily::E0 | KernelFamily::E1 => (clamp(1.0_f64.max(ke2 * z)), RadiusBranch::SmallRho),
        KernelFamily::E2 => {
            let r = if t > 0.0 { (1.0 / t).min(sym.k / 2.0) } else { sym.k / 2.0 };
            (clamp(r), RadiusBranch::SmallRhoDoublePole)
        }
    }
}

// ---------------------------------------------------------------------------
// Contour quadrature
// ---------------------------------------------------------------------------

/// Controls for the adaptive trapezoid quadrature on the two contour circles.
#[derive(Clone, Copy, Debug)]
pub struct ContourSpec {
    /// Override the automatic radius rule with a fixed radius (still used
    /// un-clamped — callers doing contour-independence checks want that).
    pub fixed_radius: Option<f64>,
    /// Nodes per circle to start with; doubled until converged.
    pub n_start: usize,
    /// Convergence target: relative change between successive doublings.
    pub tol: f64,
    /// Hard cap on nodes per circle.
    pub n_max: usize,
    /// Accept without error as long as the final relative change is below
    /// this looser bound; otherwise evaluation fails.
    pub tol_accept: f64,
    /// Absolute convergence slack, in units of the kernel's envelope bound:
    /// at points where the kernel vanishes identically (e.g. 𝓔₀ on the data
    /// line) successive doublings differ only by roundoff noise, which a
    /// purely relative criterion would chase forever.
    pub atol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            fixed_radius: None,
            n_start: 64,
            tol: 1e-10,
            n_max: 1 << 16,
            tol_accept: 1e-6,
            atol: 1e-12,
        }
    }
}

/// One evaluated kernel sample with its quadrature audit trail.
#[derive(Clone, Copy, Debug)]
pub struct KernelSample {
    /// The 2×2 kernel value.
    pub value: Mat2,
    /// Amplification exponent `ρ(t,z)` at the sample point.
    pub rho: f64,
    /// Contour radius actually used.
    pub radius: f64,
    /// Nodes per circle at convergence.
    pub n_nodes: usize,
    /// Final relative change between node doublings (a posteriori error).
    pub quad_error: f64,
}

/// Rational weight carried by each kernel family.
#[inline]
fn family_weight(family: KernelFamily, k: f64, zeta: C64) -> C64 {
    match family {
        KernelFamily::E0 => cr(1.0),
        KernelFamily::E1 => {
            let k2 = cr(k * k);
            k2 / (zeta * zeta - k2)
        }
        KernelFamily::E2 => {
            let k2 = cr(k * k);
            let d = zeta * zeta - k2;
            k2 * k2 / (d * d)
        }
    }
}

/// Trapezoid sum over the two circles `|ζ ∓ k| = r` with `n` nodes per
/// circle, of `f(ζ) · dζ/(2π)`. The trapezoid rule on a circle converges
/// geometrically for integrands analytic in a neighboring annulus, which is
/// exactly our situation.
fn two_circle_sum<T, FAdd, FZero>(
    k: f64,
    r: f64,
    n: usize,
    mut f: impl FnMut(C64) -> T,
    zero: FZero,
    add: FAdd,
) -> T
where
    FAdd: Fn(T, T, C64) -> T, // acc, value, dζ-weight/(2π)
    FZero: Fn() -> T,
{
    let mut acc = zero();
    for center in [k, -k] {
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let e = expi(theta);
            let zeta = cr(center) + cr(r) * e;
            // dζ = i·r·e^{iθ} dθ, trapezoid weight dθ = 2π/n, and the
            // overall 1/(2π) of the inverse transform cancels the 2π.
            let w = I * cr(r) * e / cr(n as f64);
            acc = add(acc, f(zeta), w);
        }
    }
    acc
}

/// Evaluate one kernel at a single `(t, z)` point.
pub fn kernel_point(
    sym: &LinearizedSymbol,
    family: KernelFamily,
    t: f64,
    z: f64,
    spec: &ContourSpec,
) -> Result<KernelSample> {
    let (auto_r, _) = select_radius(sym, t, z, family);
    let r = spec.fixed_radius.unwrap_or(auto_r);
    if !(r > 0.0 && r < 1.95 * sym.k) {
        return Err(Error::InvalidInput(format!(
            "contour radius must lie in (0, 2k) with margin; got r = {r}, k = {}",
            sym.k
        )));
    }
    let eval = |n: usize| -> Mat2 {
        two_circle_sum(
            sym.k,
            r,
            n,
            |zeta| {
                let p = family_weight(family, sym.k, zeta);
                // The contour keeps |ζ²−k²| ≥ r·(2k−r), bounded well away
                // from the pole guard for any radius admitted above.
                let e = exp_iza(sym, zeta, z).expect("contour avoids poles");
                e.scale(expi_c(zeta * cr(t)) * p)
            },
            Mat2::zero,
            |acc, v: Mat2, w| acc + v.scale(w),
        )
    };
    let env = bound_envelopes(sym, t, z);
    let floor = spec.atol
        * (1.0
            + match family {
                KernelFamily::E0 => env.e0,
                KernelFamily::E1 => env.e1,
                KernelFamily::E2 => env.e2,
            });
    adaptive_double(spec, eval, |m: &Mat2| m.norm_max(), floor).map(
        |(value, n_nodes, quad_error)| KernelSample {
            value,
            rho: sym.rho(t, z),
            radius: r,
            n_nodes,
            quad_error,
        },
    )
}

/// `e^{iw}` for complex `w`.
#[inline]
pub fn expi_c(w: C64) -> C64 {
    (I * w).exp()
}

/// Node-doubling driver: evaluates at `n, 2n, 4n, …` until the change
/// between doublings drops below `tol` relative to the value's size (with
/// `abs_floor` as the size floor); returns `(value, nodes, rel_change)`.
fn adaptive_double<T>(
    spec: &ContourSpec,
    mut eval: impl FnMut(usize) -> T,
    norm: impl Fn(&T) -> f64,
    abs_floor: f64,
) -> Result<(T, usize, f64)>
where
    T: Clone + std::ops::Sub<Output = T>,
{
    let mut n = spec.n_start.max(8);
    let mut prev = eval(n);
    loop {
        let n2 = n * 2;
        let cur = eval(n2);
        let scale = norm(&cur).max(1e-300);
        let diff = norm(&(cur.clone() - prev));
        let rel = diff / scale.max(abs_floor);
        if diff <= spec.tol * scale || diff <= abs_floor {
            return Ok((cur, n2, rel));
        }
        if n2 >= spec.n_max {
            if rel <= spec.tol_accept {
                return Ok((cur, n2, rel));
            }
            return Err(Error::NonConvergence {
                what: "contour quadrature",
                detail: format!("relative change {rel:.3e} after {n2} nodes/circle"),
            });
        }
        prev = cur;
        n = n2;
    }
}

// ---------------------------------------------------------------------------
// Grid evaluation for the convolution solver
// ---------------------------------------------------------------------------

/// All kernel contractions the linearized solver consumes, tabulated on a
/// uniform `(t, z)` grid in one contour pass per `z`-slice.
///
/// Stored contractions (`ℓ = (1,1)` row, `ν = (−1,1)ᵀ` column, `e₁ = (1,0)ᵀ`):
///
/// * `e0[m][l]`      — the full matrix `𝓔₀(tₘ, z_l)`,
/// * `e1_nu[m][l]`   — `𝓔₁·ν` (density forcing entering the two channels),
/// * `row_e1[m][l]`  — `ℓ·𝓔₁` (channels driving the density),
/// * `row_e2_nu[m][l]` — `ℓ·𝓔₂·ν` (density forcing driving the density).
pub struct KernelGrids {
    pub dt: f64,
    pub dz: f64,
    pub e0: ndarray::Array2<Mat2>,
    pub e1_nu: ndarray::Array2<Vec2>,
    pub row_e1: ndarray::Array2<Vec2>,
    pub row_e2_nu: ndarray::Array2<C64>,
    /// Per-`z` node counts at convergence (audit trail).
    pub nodes_per_slice: Vec<usize>,
}

/// Accumulator for one `z`-slice of all four contractions.
#[derive(Clone)]
struct SliceAcc {
    e0: Vec<Mat2>,
    e1_nu: Vec<Vec2>,
    row_e1: Vec<Vec2>,
    row_e2_nu: Vec<C64>,
}

impl SliceAcc {
    fn zero(nt: usize) -> Self {
        Self {
            e0: vec![Mat2::zero(); nt],
            e1_nu: vec![[cr(0.0); 2]; nt],
            row_e1: vec![[cr(0.0); 2]; nt],
            row_e2_nu: vec![cr(0.0); nt],
        }
    }

    fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for v in &self.e0 {
            m = m.max(v.norm_max());
        }
        for v in &self.e1_nu {
            m = m.max(v[0].norm()).max(v[1].norm());
        }
        for v in &self.row_e1 {
            m = m.max(v[0].norm()).max(v[1].norm());
        }
        for v in &self.row_e2_nu {
            m = m.max(v.norm());
        }
        m
    }

    fn diff_norm(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for (a, b) in self.e0.iter().zip(&other.e0) {
            m = m.max((*a - *b).norm_max());
        }
        for (a, b) in self.e1_nu.iter().zip(&other.e1_nu) {
            m = m.max((a[0] - b[0]).norm()).max((a[1] - b[1]).norm());
        }
        for (a, b) in self.row_e1.iter().zip(&other.row_e1) {
            m = m.max((a[0] - b[0]).norm()).max((a[1] - b[1]).norm());
        }
        for (a, b) in self.row_e2_nu.iter().zip(&other.row_e2_nu) {
            m = m.max((a - b).norm());
        }
        m
    }
}

/// Evaluate one `z`-slice of all contractions with `n` nodes per circle.
///
/// The `t`-dependence enters only through `e^{itζ}`, which on a uniform grid
/// is a geometric sequence in `t` — one complex multiply per grid node per
/// contour node, so a whole slice costs barely more than a single point.
fn eval_slice(sym: &LinearizedSymbol, ts: &[f64], z: f64, r: f64, n: usize) -> SliceAcc {
    let mut acc = SliceAcc::zero(ts.len());
    let dt = if ts.len() > 1 { ts[1] - ts[0] } else { 0.0 };
    let k2 = cr(sym.k * sym.k);
    for center in [sym.k, -sym.k] {
        for j in 0..n {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let e = expi(theta);
            let zeta = cr(center) + cr(r) * e;
            let w = I * cr(r) * e / cr(n as f64);
            let prop = exp_iza(sym, zeta, z).expect("contour avoids poles");
            let d = zeta * zeta - k2;
            let p1 = k2 / d;
            let p2 = p1 * p1;
            // Contractions of the propagator, weighted for each family.
            let g0 = prop.scale(w);
            let g1_nu = {
                let v = prop.mul_pm();
                [v[0] * p1 * w, v[1] * p1 * w]
            };
            let r1 = {
                let v = prop.row_sum();
                [v[0] * p1 * w, v[1] * p1 * w]
            };
            let r2 = {
                let v = prop.mul_pm();
                (v[0] + v[1]) * p2 * w
            };
            // March e^{itζ} along the t-grid geometrically.
            let step = expi_c(cr(dt) * zeta);
            let mut ph = expi_c(cr(ts[0]) * zeta);
            for (m, _) in ts.iter().enumerate() {
                acc.e0[m] = acc.e0[m] + g0.scale(ph);
                acc.e1_nu[m][0] += g1_nu[0] * ph;
                acc.e1_nu[m][1] += g1_nu[1] * ph;
                acc.row_e1[m][0] += r1[0] * ph;
                acc.row_e1[m][1] += r1[1] * ph;
                acc.row_e2_nu[m] += r2 * ph;
                ph *= step;
            }
        }
    }
    acc
}

/// Tabulate all solver contractions on the grid `tₘ = m·dt` (`m < nt`),
/// `z_l = l·dz` (`l < nz`). Radius per slice: the rule evaluated at the
/// largest time `T = (nt−1)·dt`, which dominates the conditioning demand.
pub fn kernel_grids(
    sym: &LinearizedSymbol,
    nt: usize,
    dt: f64,
    nz: usize,
    dz: f64,
    spec: &ContourSpec,
) -> Result<KernelGrids> {
    let ts: Vec<f64> = (0..nt).map(|m| m as f64 * dt).collect();
    let t_big = dt * (nt.saturating_sub(1)) as f64;
    let mut grids = KernelGrids {
        dt,
        dz,
        e0: ndarray::Array2::from_elem((nt, nz), Mat2::zero()),
        e1_nu: ndarray::Array2::from_elem((nt, nz), [cr(0.0); 2]),
        row_e1: ndarray::Array2::from_elem((nt, nz), [cr(0.0); 2]),
        row_e2_nu: ndarray::Array2::from_elem((nt, nz), cr(0.0)),
        nodes_per_slice: vec![0; nz],
    };
    for l in 0..nz {
        let z = l as f64 * dz;
        let (auto_r, _) = select_radius(sym, t_big.max(1e-12), z, KernelFamily::E1);
        let r = spec.fixed_radius.unwrap_or(auto_r);
        // Adaptive doubling on the whole slice at once.
        let mut n = spec.n_start.max(8);
        let mut prev = eval_slice(sym, &ts, z, r, n);
        let (slice, used, _err) = loop {
            let n2 = n * 2;
            let cur = eval_slice(sym, &ts, z, r, n2);
            let rel = cur.diff_norm(&prev) / cur.max_norm().max(1e-300);
            if rel <= spec.tol {
                break (cur, n2, rel);
            }
            if n2 >= spec.n_max {
                if rel <= spec.tol_accept {
                    break (cur, n2, rel);
                }
                return Err(Error::NonConvergence {
                    what: "kernel grid quadrature",
                    detail: format!("slice z={z}: relative change {rel:.3e} at {n2} nodes"),
                });
            }
            prev = cur;
            n = n2;
        };
        for m in 0..nt {
            grids.e0[[m, l]] = slice.e0[m];
            grids.e1_nu[[m, l]] = slice.e1_nu[m];
            grids.row_e1[[m, l]] = slice.row_e1[m];
            grids.row_e2_nu[[m, l]] = slice.row_e2_nu[m];
        }
        grids.nodes_per_slice[l] = used;
    }
    Ok(grids)
}

// ---------------------------------------------------------------------------
// Growth-law special function and envelope bounds
// ---------------------------------------------------------------------------

/// The entire series `J(ρ) = Σ_{n≥0} ρⁿ/(n!)²`, the growth law's organizing
/// special function; equivalently `I₀(2√ρ)` in terms of the modified Bessel
/// function. Accurate over the supported range `0 ≤ ρ ≤ 900` (terms peak
/// near `n = √ρ` at `~e^{2√ρ}`, far below overflow).
pub fn bessel_j(rho: f64) -> Result<f64> {
    if !(0.0..=900.0).contains(&rho) {
        return Err(Error::InvalidInput(format!(
            "series argument must lie in [0, 900], got {rho}"
        )));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for n in 1..1000 {
        term *= rho / ((n * n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "growth-law series",
        detail: format!("no convergence at ρ = {rho}"),
    })
}

/// Modified Bessel `I₀(x)` by power series (adequate for `x ≤ 60`: ~90 terms).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for n in 1..500 {
        term *= q / ((n * n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel `I₁(x)` by power series.
pub fn bessel_i1(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = x / 2.0;
    let mut sum = term;
    for n in 1..500 {
        term *= q / ((n * (n + 1)) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// The same object as [`bessel_j`] computed from its contour representation
/// `(1/2πi)∮ e^{(x/2)(w + 1/w)} dw/w = I₀(x)` on the unit circle — used to
/// cross-audit the series and to document how the three textbook-style
/// representations of the growth function actually relate (they differ by
/// normalization and argument convention; see the validation experiment).
pub fn bessel_contour_i0(x: f64, n: usize) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let w = expi(theta);
        // dw/(iw) = dθ ⇒ (1/2πi)∮ f dw/w = (1/2π)∫ f dθ
        acc += ((w + cr(1.0) / w) * cr(x / 2.0)).exp() / cr(n as f64);
    }
    acc.re
}

/// Angular form `∫₀^{2π} e^{x sinθ} dθ` (= `2π·I₀(x)`), the second
/// representation that appears in growth-law bookkeeping.
pub fn bessel_angular(x: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..n {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        acc += (x * theta.sin()).exp();
    }
    acc * 2.0 * std::f64::consts::PI / n as f64
}

/// Closed-form envelope bounds for the three kernels, calibrated with
/// constant 1 in the validity regime (`Ē ≤ 1`, `k ≥ max(1, 4Ē²)`,
/// `t ∈ [0,1]`, `z ∈ [0,½]`):
///
/// ```text
///     |𝓔₀| ≤ r_eff · e^ρ/√(1+ρ),       r_eff = 1 + kĒ²z/(1+ρ)
///     |𝓔₁| ≤ k · e^ρ/√(1+ρ)
///     |𝓔₂| ≤ k² · e^ρ/(r̃·√(1+ρ)),     1/r̃ = 1/k + t/(1+ρ)
/// ```
#[derive(Clone, Copy, Debug)]
pub struct Envelopes {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub rho: f64,
    /// Whether `(t,z)` lies in the regime where the constants are calibrated.
    pub in_regime: bool,
}

pub fn bound_envelopes(sym: &LinearizedSymbol, t: f64, z: f64) -> Envelopes {
    let rho = sym.rho(t, z);
    let amp = rho.exp() / (1.0 + rho).sqrt();
    let ke2z = sym.k * sym.ebar * sym.ebar * z;
    let r_eff = 1.0 + ke2z / (1.0 + rho);
    let inv_rt = 1.0 / sym.k + t / (1.0 + rho);
    Envelopes {
        e0: r_eff * amp,
        e1: sym.k * amp,
        e2: sym.k * sym.k * amp * inv_rt,
        rho,
        in_regime: sym.in_envelope_regime(t, z),
    }
}
