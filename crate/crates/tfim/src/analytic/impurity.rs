//! Closed-form solution of the single-impurity chain: one modified bond
//! j2 at the center of an otherwise uniform even chain.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_quadratic_form, ChainSpec, ModelKind, QuadraticForm};
use crate::solver::{FermionSolution, ZERO_MODE_FLOOR};

use super::{
    band_edge_u, dispersion, geomspace, linspace, scan_sign_changes, v_scan_limit, QuasiMomentum,
    Waves,
};

/// Dimensionless impurity-chain parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityParams {
    pub n: usize,
    pub j1: f64,
    pub j2: f64,
}

impl ImpurityParams {
    pub fn new(n: usize, j1: f64, j2: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidModelSize(format!(
                "impurity closed form needs even n >= 4, got {n}"
            )));
        }
        if !(j1 > 0.0) || !(j2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "couplings must be positive, got j1 = {j1}, j2 = {j2}"
            )));
        }
        Ok(ImpurityParams { n, j1, j2 })
    }

    pub fn from_spec(spec: &ChainSpec) -> Result<Self> {
        if spec.kind != ModelKind::Impurity {
            return Err(Error::InvalidParameter(
                "chain is not an impurity model".into(),
            ));
        }
        let m = spec.n_sites / 2;
        ImpurityParams::new(spec.n_sites, spec.couplings[0], spec.couplings[m - 1])
    }
}

/// One factor of the quantization condition. The pole-free cleared form
/// factors exactly: the recurrence Br(m-1) = j1 Br(m) - Lambda^2 s(m)
/// collapses it to Br(j1,m)^2 = (j2/j1)^2 Lambda^2 s(m)^2, the impurity
/// chain being mirror symmetric, so every root solves
/// Br(j1,m) = sign * (j2/j1) Lambda s(m) for one of the two signs. Each
/// factor balances two comparable terms, which keeps near-band-edge
/// roots resolvable at machine precision where the unfactored form
/// drowns them in the roundoff of its much larger terms. Homogeneous of
/// degree one in the damped sinusoids, so branch phases and damping
/// cancel.
fn factor(k: &QuasiMomentum, p: &ImpurityParams, sign: f64) -> f64 {
    let m = (p.n / 2) as i64;
    let wv = Waves::new(k, p.n / 2 + 1);
    let lambda = match dispersion(k, p.j1) {
        Ok(l2) => l2.sqrt(),
        Err(_) => return f64::NAN,
    };
    wv.bracket(p.j1, m) - sign * (p.j2 / p.j1) * lambda * wv.s(m)
}

/// The transcendental quantization condition in its ratio form.
///
/// Real branch: the value is real (imaginary part asserted below 1e-9
/// relative) and the real part is returned. On the iu and pi-iv branches
/// every term is purely imaginary, so there the imaginary part is
/// returned and the real part asserted small.
pub fn residual_impurity(k: &QuasiMomentum, p: &ImpurityParams) -> Result<f64> {
    let m = (p.n / 2) as f64;
    let kc = k.as_complex();
    let s = |x: f64| (kc * x).sin();
    let r = p.j2 / p.j1;
    let c = Complex64::from((p.j2 * p.j2 - p.j1 * p.j1) / p.j1);
    let den = p.j1 * s(m) - s(m + 1.0);
    if den.norm() < 1e-13 {
        return Err(Error::PoleAtK);
    }
    let num = r * r * s(m) * (p.j1 * s(m - 1.0) - s(m));
    let t1 = num / den;
    let t2 = s(m + 1.0);
    let t3 = c * s(m);
    let res = t1 - t2 - t3;
    // realness is asserted against the term scale: the residual itself
    // vanishes at roots
    let mag = (t1.norm() + t2.norm() + t3.norm()).max(1e-300);
    match k {
        QuasiMomentum::Real(_) => {
            if res.im.abs() > 1e-9 * mag {
                return Err(Error::BranchError { imag: res.im });
            }
            Ok(res.re)
        }
        _ => {
            if res.re.abs() > 1e-9 * mag {
                return Err(Error::BranchError { imag: res.re });
            }
            Ok(res.im)
        }
    }
}

/// Unnormalized closed-form row for one mode. Left of the impurity bond
/// the amplitude carries the j2/j1-weighted center sinusoid; to the right
/// it is a reflected sinusoid weighted by the left-edge bracket.
fn phi_row_raw(k: &QuasiMomentum, p: &ImpurityParams) -> Vec<f64> {
    let n = p.n;
    let m = (n / 2) as i64;
    let wv = Waves::new(k, n / 2 + 1);
    let r = p.j2 / p.j1;
    let center = wv.s(m);
    let edge = wv.bracket(p.j1, m);
    (1..=n as i64)
        .map(|i| {
            if i <= m {
                r * center * wv.bracket(p.j1, i - 1)
            } else {
                edge * wv.s(n as i64 + 1 - i)
            }
        })
        .collect()
}

/// Matching psi row with the same overall scale as `phi_row_raw`, derived
/// from psi = -D phi / Lambda analytically so that near-zero modes never
/// divide noise by a tiny energy.
fn psi_row_raw(k: &QuasiMomentum, p: &ImpurityParams, lambda: f64) -> Vec<f64> {
    let n = p.n;
    let m = (n / 2) as i64;
    let wv = Waves::new(k, n / 2 + 1);
    let r = p.j2 / p.j1;
    let center = wv.s(m);
    let edge = wv.bracket(p.j1, m);
    (1..=n as i64)
        .map(|i| {
            if i <= m {
                -lambda * r * center * wv.s(i)
            } else {
                -edge * wv.bracket(p.j1, n as i64 - i) / lambda
            }
        })
        .collect()
}

/// Infinity-norm eigen-residual of the normalized closed-form row,
/// used to screen root candidates.
fn row_residual(m: &QuadraticForm, k: &QuasiMomentum, p: &ImpurityParams, lambda2: f64) -> f64 {
    let mut row = phi_row_raw(k, p);
    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return f64::INFINITY;
    }
    for v in row.iter_mut() {
        *v /= norm;
    }
    let mv = m.apply(&row);
    mv.iter()
        .zip(&row)
        .map(|(a, b)| (a - lambda2 * b).abs())
        .fold(0.0, f64::max)
}

const ENDPOINT_EPS: f64 = 1e-9;
const DISTINCT_TOL: f64 = 1e-10;

/// All N quasi-momenta of the impurity chain, sorted by energy.
///
/// Real roots are located by a dense sign-change scan; any deficit is
/// searched on the iu branch (parameterized by the distance to the band
/// edge, scanned both linearly and logarithmically so that bound modes
/// within 1e-20 of the edge are resolved) and the pi-iv branch.
pub fn find_modes_impurity(p: &ImpurityParams) -> Result<Vec<QuasiMomentum>> {
    let m = build_quadratic_form(&impurity_couplings(p))?;
    let m_scale = m
        .diag
        .iter()
        .chain(m.off.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    let row_tol = 1e-7 * m_scale;

    for mult in [1usize, 4] {
        let modes = collect_modes(p, &m, row_tol, mult);
        if modes.len() == p.n {
            return Ok(modes.into_iter().map(|(k, _)| k).collect());
        }
        if mult == 4 {
            let (mut real, mut imag, mut pi_imag) = (0, 0, 0);
            for (k, _) in &modes {
                match k {
                    QuasiMomentum::Real(_) => real += 1,
                    QuasiMomentum::Imag { .. } => imag += 1,
                    QuasiMomentum::PiImag(_) => pi_imag += 1,
                }
            }
            return Err(Error::IncompleteSpectrum {
                expected: p.n,
                real,
                imag,
                pi_imag,
            });
        }
    }
    unreachable!()
}

fn impurity_couplings(p: &ImpurityParams) -> Vec<f64> {
    let mut j = vec![p.j1; p.n - 1];
    j[p.n / 2 - 1] = p.j2;
    j
}

type ScoredMode = (QuasiMomentum, f64);

fn collect_modes(
    p: &ImpurityParams,
    m: &QuadraticForm,
    row_tol: f64,
    mult: usize,
) -> Vec<ScoredMode> {
    let points = 40 * p.n * mult;
    let mut found: Vec<ScoredMode> = Vec::new();

    let accept = |k: QuasiMomentum, found: &mut Vec<ScoredMode>| {
        let lambda2 = match dispersion(&k, p.j1) {
            Ok(l2) => l2,
            Err(_) => return,
        };
        if row_residual(m, &k, p, lambda2) > row_tol {
            return;
        }
        // relative spacing: near-edge deltas can sit many orders below 1
        let dup = found.iter().any(|(other, _)| {
            std::mem::discriminant(other) == std::mem::discriminant(&k)
                && (other.parameter() - k.parameter()).abs()
                    <= DISTINCT_TOL * k.parameter().abs().max(1.0)
        });
        if !dup {
            found.push((k, lambda2.sqrt()));
        }
    };

    // each mirror-parity family is one factor; scan both over every branch
    for sign in [-1.0, 1.0] {
        // real branch
        let grid = linspace(ENDPOINT_EPS, std::f64::consts::PI - ENDPOINT_EPS, points);
        let f_real = |x: f64| factor(&QuasiMomentum::Real(x), p, sign);
        for root in scan_sign_changes(&f_real, &grid) {
            accept(QuasiMomentum::Real(root), &mut found);
        }

        // iu branch, scanned in delta = u* - u
        let u_star = band_edge_u(p.j1);
        if found.len() < p.n && u_star > ENDPOINT_EPS {
            let delta_hi = u_star - ENDPOINT_EPS;
            let delta_knee = (u_star / points as f64).min(delta_hi * 0.5);
            // boundary modes deep in the ordered phase sit at
            // delta ~ lambda^2, which shrinks like j^(-2(n-1)); start
            // the geometric sweep just above the underflow floor
            let mut grid = geomspace(1e-300, delta_knee, 2000 * mult);
            grid.extend(linspace(delta_knee, delta_hi, points));
            let f_imag = |d: f64| factor(&QuasiMomentum::Imag { u_star, delta: d }, p, sign);
            for root in scan_sign_changes(&f_imag, &grid) {
                accept(
                    QuasiMomentum::Imag {
                        u_star,
                        delta: root,
                    },
                    &mut found,
                );
            }
        }

        // pi - iv branch
        if found.len() < p.n {
            let v_max = v_scan_limit(p.j1, p.j1.max(p.j2));
            let grid = linspace(ENDPOINT_EPS, v_max, points);
            let f_pi = |v: f64| factor(&QuasiMomentum::PiImag(v), p, sign);
            for root in scan_sign_changes(&f_pi, &grid) {
                accept(QuasiMomentum::PiImag(root), &mut found);
            }
        }
    }

    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    found
}

/// Assembles the full free-fermion solution from the quantization roots.
pub fn build_solution_impurity(
    spec: &ChainSpec,
    modes: &[QuasiMomentum],
) -> Result<FermionSolution> {
    let p = ImpurityParams::from_spec(spec)?;
    if modes.len() != p.n {
        return Err(Error::IncompleteSpectrum {
            expected: p.n,
            real: modes.len(),
            imag: 0,
            pi_imag: 0,
        });
    }
    let n = p.n;
    let mut scored: Vec<(f64, &QuasiMomentum)> = modes
        .iter()
        .map(|k| Ok((dispersion(k, p.j1)?.sqrt(), k)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut lambdas = Vec::with_capacity(n);
    let mut phi = nalgebra::DMatrix::zeros(n, n);
    let mut psi = nalgebra::DMatrix::zeros(n, n);
    let mut zero_modes = Vec::new();

    for (q, (lambda, k)) in scored.into_iter().enumerate() {
        lambdas.push(lambda);
        let mut phi_row = phi_row_raw(k, &p);
        let norm = phi_row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::AnsatzSingular);
        }
        let mut psi_row = if lambda <= ZERO_MODE_FLOOR {
            zero_modes.push(q);
            vec![0.0; n]
        } else {
            let row = psi_row_raw(k, &p, lambda);
            if row.iter().any(|x| !x.is_finite()) {
                zero_modes.push(q);
                vec![0.0; n]
            } else {
                row
            }
        };
        let flip = row_sign(&phi_row, norm);
        for i in 0..n {
            phi[(q, i)] = flip * phi_row[i] / norm;
            psi[(q, i)] = flip * psi_row[i] / norm;
        }
        phi_row.clear();
        psi_row.clear();
    }

    Ok(FermionSolution {
        lambdas,
        phi,
        psi,
        spec: spec.clone(),
        zero_modes,
    })
}

/// Same convention as the numeric eigensolver: first component of
/// significant magnitude made positive.
fn row_sign(row: &[f64], norm: f64) -> f64 {
    match row.iter().find(|x| x.abs() > 1e-8 * norm) {
        Some(v) if *v < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Convenience wrapper: roots plus assembly in one call.
pub fn solve_impurity(spec: &ChainSpec) -> Result<FermionSolution> {
    let p = ImpurityParams::from_spec(spec)?;
    let modes = find_modes_impurity(&p)?;
    build_solution_impurity(spec, &modes)
}
