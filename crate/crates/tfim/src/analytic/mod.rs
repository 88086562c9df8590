//! Closed-form solution path: quasi-momentum branches, the dispersion
//! relation, and the shared root-scanning machinery used by the impurity
//! and junction quantization conditions.
//!
//! Branch bookkeeping is the delicate part. Deep in the ordered phase the
//! lowest mode sits on the `iu` branch within ~1e-20 of the band edge
//! `u* = |ln j|`, far below what an f64 stored as `u` can resolve. All
//! `iu`-branch momenta therefore carry the distance to the edge
//! (`delta = u* - u`) explicitly, and every expression that would cancel
//! at the edge is evaluated through `expm1` in terms of `delta`.

pub mod impurity;
pub mod junction;

pub use impurity::{
    build_solution_impurity, find_modes_impurity, residual_impurity, solve_impurity,
    ImpurityParams,
};
pub use junction::{
    build_solution_junction, find_modes_junction, pair_k2, residual_junction, solve_junction,
    JunctionParams, ModePair,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A quasi-momentum on one of the three branches the quantization
/// conditions admit: real k in (0, pi), k = iu, or k = pi - iv.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuasiMomentum {
    Real(f64),
    /// k = iu with u = u_star - delta, where u_star = |ln j| is the band
    /// edge of the coupling this mode hybridizes with. Storing delta
    /// keeps edge distances far below f64 resolution of u itself.
    Imag { u_star: f64, delta: f64 },
    /// k = pi - iv.
    PiImag(f64),
}

impl QuasiMomentum {
    /// `iu` momentum from a plain u value relative to coupling `j`.
    pub fn imag_u(u: f64, j: f64) -> Self {
        let u_star = band_edge_u(j);
        QuasiMomentum::Imag {
            u_star,
            delta: u_star - u,
        }
    }

    pub fn branch_name(&self) -> &'static str {
        match self {
            QuasiMomentum::Real(_) => "real",
            QuasiMomentum::Imag { .. } => "imag",
            QuasiMomentum::PiImag(_) => "pi_imag",
        }
    }

    /// The real branch parameter: k, u, or v.
    pub fn parameter(&self) -> f64 {
        match *self {
            QuasiMomentum::Real(k) => k,
            QuasiMomentum::Imag { u_star, delta } => u_star - delta,
            QuasiMomentum::PiImag(v) => v,
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        match *self {
            QuasiMomentum::Real(k) => Complex64::new(k, 0.0),
            QuasiMomentum::Imag { u_star, delta } => Complex64::new(0.0, u_star - delta),
            QuasiMomentum::PiImag(v) => Complex64::new(std::f64::consts::PI, -v),
        }
    }
}

/// Band edge `u* = |ln j|` where the `iu`-branch dispersion for coupling
/// `j` reaches zero.
pub fn band_edge_u(j: f64) -> f64 {
    j.ln().abs()
}

/// Squared quasiparticle energy `Lambda^2 = j^2 + 1 - 2 j cos k` with the
/// branch-appropriate cosine (cos(iu) = cosh u, cos(pi - iv) = -cosh v).
///
/// Slightly negative results from roundoff are clamped to zero; anything
/// below -1e-12 is rejected as unphysical.
pub fn dispersion(k: &QuasiMomentum, j: f64) -> Result<f64> {
    let lambda2 = match *k {
        QuasiMomentum::Real(kr) => j * j + 1.0 - 2.0 * j * kr.cos(),
        QuasiMomentum::Imag { u_star, delta } => {
            let edge = band_edge_u(j);
            if (u_star - edge).abs() <= 1e-9 * edge.max(1.0) {
                // 2j (cosh u* - cosh u) in product form: exact through
                // delta ~ 1e-300.
                let u = u_star - delta;
                4.0 * j * (0.5 * (u_star + u)).sinh() * (0.5 * delta).sinh()
            } else {
                j * j + 1.0 - 2.0 * j * (u_star - delta).cosh()
            }
        }
        QuasiMomentum::PiImag(v) => j * j + 1.0 + 2.0 * j * v.cosh(),
    };
    if lambda2 < -1e-12 {
        return Err(Error::InvalidRoot { lambda2 });
    }
    Ok(lambda2.max(0.0))
}

/// Per-momentum evaluation of the sinusoids the closed forms are built
/// from. On the complex branches `sin(k m) = i S(m)` for a real `S`
/// carrying an overall damping `e^{-w}` so that products never overflow;
/// all quantization conditions and ansatz rows are homogeneous in these
/// factors, so the damping and the common `i` powers drop out.
#[derive(Debug, Clone)]
pub(crate) enum Waves {
    Real { k: f64 },
    Imag { u_star: f64, delta: f64, w: f64 },
    PiImag { v: f64, w: f64 },
}

impl Waves {
    /// `max_m` is the largest integer multiple of the momentum that will
    /// be requested; it sets the damping exponent.
    pub fn new(k: &QuasiMomentum, max_m: usize) -> Waves {
        match *k {
            QuasiMomentum::Real(k) => Waves::Real { k },
            QuasiMomentum::Imag { u_star, delta } => Waves::Imag {
                u_star,
                delta,
                w: (u_star - delta).max(0.0) * max_m as f64,
            },
            QuasiMomentum::PiImag(v) => Waves::PiImag {
                v,
                w: v.max(0.0) * max_m as f64,
            },
        }
    }

    /// The real sinusoid factor: sin(km), sinh(um) e^{-w}, or
    /// (-1)^{m+1} sinh(vm) e^{-w}.
    pub fn s(&self, m: i64) -> f64 {
        let mf = m as f64;
        match *self {
            Waves::Real { k } => (k * mf).sin(),
            Waves::Imag { u_star, delta, w } => {
                let u = u_star - delta;
                0.5 * ((u * mf - w).exp() - (-u * mf - w).exp())
            }
            Waves::PiImag { v, w } => {
                let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
                sign * 0.5 * ((v * mf - w).exp() - (-v * mf - w).exp())
            }
        }
    }

    /// The recurring bracket `j s(a) - s(a+1)`.
    ///
    /// On the `iu` branch this is the expression that cancels
    /// catastrophically at the band edge of `j`; when `j` matches the
    /// stored edge it is rewritten as
    /// `(e^{au}(j - q) - e^{-au}(j - 1/q)) / 2` with `q = e^u` and the
    /// parenthesized differences expanded through expm1 in delta.
    pub fn bracket(&self, j: f64, a: i64) -> f64 {
        if let Waves::Imag { u_star, delta, w } = *self {
            let edge = band_edge_u(j);
            if (u_star - edge).abs() <= 1e-9 * edge.max(1.0) {
                let u = u_star - delta;
                let (j_minus_q, j_minus_qinv) = if j >= 1.0 {
                    (-j * (-delta).exp_m1(), (j * j - 1.0 - delta.exp_m1()) / j)
                } else {
                    ((j * j - 1.0 - (-delta).exp_m1()) / j, -j * delta.exp_m1())
                };
                let af = a as f64;
                return 0.5 * ((af * u - w).exp() * j_minus_q - (-af * u - w).exp() * j_minus_qinv);
            }
        }
        j * self.s(a) - self.s(a + 1)
    }
}

/// `arccosh(1 + x)` accurate for small x.
pub(crate) fn acosh1p(x: f64) -> f64 {
    (x + (x * (2.0 + x)).sqrt()).ln_1p()
}

/// Bisection to machine precision inside a bracketing interval.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign-change scan over an ordered grid; each bracketed change is
/// refined by bisection. Non-finite samples break the chain.
pub(crate) fn scan_sign_changes<F: Fn(f64) -> f64>(f: &F, grid: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if fx == 0.0 {
            roots.push(x);
            prev = Some((x, fx));
            continue;
        }
        if let Some((px, pfx)) = prev {
            if pfx != 0.0 && (fx > 0.0) != (pfx > 0.0) {
                roots.push(bisect(f, px, x, pfx));
            }
        }
        prev = Some((x, fx));
    }
    roots
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}

pub(crate) fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && a > 0.0 && b > a);
    let step = (b / a).ln() / (n - 1) as f64;
    (0..n).map(|i| a * (step * i as f64).exp()).collect()
}

/// Upper cutoff for the pi-iv scan: a fixed margin plus the dynamic
/// bound from Lambda^2 <= (max j + 1)^2.
pub(crate) fn v_scan_limit(j_ansatz: f64, j_max: f64) -> f64 {
    let fixed = 5.0 + (j_max + 2.0).ln();
    let cosh_bound = ((j_max + 1.0).powi(2) - j_ansatz * j_ansatz - 1.0) / (2.0 * j_ansatz);
    let dynamic = if cosh_bound > 1.0 {
        acosh1p(cosh_bound - 1.0) + 0.5
    } else {
        0.0
    };
    fixed.max(dynamic)
}

/// Distance-to-edge for the `iu` branch at a prescribed squared energy:
/// solves `2 sinh(u* - d/2) sinh(d/2) = lambda2 / (2j)` by Newton.
pub(crate) fn imag_delta_from_lambda2(lambda2: f64, j: f64) -> Option<f64> {
    let u_star = band_edge_u(j);
    if !(u_star > 1e-12) {
        return None;
    }
    let t = lambda2 / (2.0 * j);
    // reachable range of the branch is (0, cosh u* - 1)
    let t_max = 2.0 * (0.5 * u_star).sinh().powi(2);
    if !(t > 0.0) || t >= t_max {
        return None;
    }
    let mut delta = (t / u_star.sinh()).min(0.5 * u_star);
    for _ in 0..60 {
        let g = 2.0 * (u_star - 0.5 * delta).sinh() * (0.5 * delta).sinh() - t;
        let gp = (u_star - delta).sinh();
        if !(gp > 0.0) {
            break;
        }
        let step = g / gp;
        let next = (delta - step).clamp(delta * 0.1, u_star * (1.0 - 1e-16));
        if (next - delta).abs() <= 1e-16 * delta {
            delta = next;
            break;
        }
        delta = next;
    }
    Some(delta)
}
