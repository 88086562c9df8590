//! Closed-form solution of the junction chain: two uniform half-chains
//! with couplings j1 and j2 fused at the center site of an odd chain.
//! Each mode is a pair of quasi-momenta, one per half-chain, locked to a
//! common energy.

use crate::error::{Error, Result};
use crate::model::{build_quadratic_form, ChainSpec, ModelKind, QuadraticForm};
use crate::solver::{FermionSolution, ZERO_MODE_FLOOR};

use super::{
    acosh1p, band_edge_u, dispersion, geomspace, imag_delta_from_lambda2, linspace,
    scan_sign_changes, v_scan_limit, QuasiMomentum, Waves,
};

/// Dimensionless junction-chain parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    pub n: usize,
    pub j1: f64,
    pub j2: f64,
}

impl JunctionParams {
    pub fn new(n: usize, j1: f64, j2: f64) -> Result<Self> {
        if n < 5 || n % 2 != 1 {
            return Err(Error::InvalidModelSize(format!(
                "junction closed form needs odd n >= 5, got {n}"
            )));
        }
        if !(j1 > 0.0) || !(j2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "couplings must be positive, got j1 = {j1}, j2 = {j2}"
            )));
        }
        Ok(JunctionParams { n, j1, j2 })
    }

    pub fn from_spec(spec: &ChainSpec) -> Result<Self> {
        if spec.kind != ModelKind::Junction {
            return Err(Error::InvalidParameter(
                "chain is not a junction model".into(),
            ));
        }
        JunctionParams::new(
            spec.n_sites,
            spec.couplings[0],
            spec.couplings[spec.n_sites - 2],
        )
    }
}

/// One junction mode: left and right quasi-momenta at a shared energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub k1: QuasiMomentum,
    pub k2: QuasiMomentum,
    pub lambda: f64,
}

/// Right-half momentum locked to `k1` by energy conservation:
/// cos k2 = (j2^2 - j1^2 + 2 j1 cos k1) / (2 j2), with the branch chosen
/// by whether that cosine leaves [-1, 1].
pub fn pair_k2(k1: &QuasiMomentum, p: &JunctionParams) -> Result<QuasiMomentum> {
    let lambda2 = dispersion(k1, p.j1)?;
    let cos_k2 = (p.j2 * p.j2 + 1.0 - lambda2) / (2.0 * p.j2);
    if cos_k2.abs() <= 1.0 {
        return Ok(QuasiMomentum::Real(cos_k2.acos()));
    }
    if cos_k2 > 1.0 {
        let u_star = band_edge_u(p.j2);
        if lambda2 == 0.0 {
            return Ok(QuasiMomentum::Imag { u_star, delta: 0.0 });
        }
        return imag_delta_from_lambda2(lambda2, p.j2)
            .map(|delta| QuasiMomentum::Imag { u_star, delta })
            .ok_or(Error::InvalidRoot { lambda2 });
    }
    // cos k2 < -1: evaluate cosh v - 1 straight from lambda2 to keep
    // accuracy near the top band edge
    let x = (lambda2 - (p.j2 + 1.0).powi(2)) / (2.0 * p.j2);
    Ok(QuasiMomentum::PiImag(acosh1p(x)))
}

/// Quantization condition in cleared form: (value, magnitude scale).
/// The raw cleared form subtracts products that dwarf the residual near
/// the band edge; the recurrence Br1(a) = j1 Br1(b) - Lambda^2 s1(b)
/// rearranges it exactly into a balance of two comparable terms,
/// (j2/j1) Lambda^2 s1(b) s2(a) - Br1(b) Br2(a), so roots stay resolvable
/// at machine precision even for energies ~1e-10. Degree one in each
/// half-chain's damped sinusoids, so damping and branch phases drop out
/// of the sign structure.
fn cleared(k1: &QuasiMomentum, p: &JunctionParams) -> (f64, f64) {
    let k2 = match pair_k2(k1, p) {
        Ok(k2) => k2,
        Err(_) => return (f64::NAN, f64::NAN),
    };
    let lambda2 = match dispersion(k1, p.j1) {
        Ok(l2) => l2,
        Err(_) => return (f64::NAN, f64::NAN),
    };
    let a = ((p.n - 1) / 2) as i64;
    let b = a + 1;
    let w1 = Waves::new(k1, (p.n + 3) / 2);
    let w2 = Waves::new(&k2, (p.n + 1) / 2);
    let t1 = (p.j2 / p.j1) * lambda2 * w1.s(b) * w2.s(a);
    let t2 = w1.bracket(p.j1, b) * w2.bracket(p.j2, a);
    (t1 - t2, t1.abs() + t2.abs())
}

/// The coupled transcendental condition in ratio form, with k2 derived
/// from k1. Real part returned for real k1, imaginary part on the
/// complex branches where every term is purely imaginary.
pub fn residual_junction(k1: &QuasiMomentum, p: &JunctionParams) -> Result<f64> {
    let k2 = pair_k2(k1, p)?;
    let a = ((p.n - 1) / 2) as f64;
    let b = a + 1.0;
    let k1c = k1.as_complex();
    let k2c = k2.as_complex();
    let s1 = |x: f64| (k1c * x).sin();
    let s2 = |x: f64| (k2c * x).sin();
    let den = s2(b);
    if den.norm() < 1e-13 {
        return Err(Error::PoleAtK);
    }
    let b1 = s1(b) - p.j1 * s1(a);
    let b1p = s1(b + 1.0) - p.j1 * s1(b);
    let t1 = (p.j2 / p.j1) * (s2(a) / den) * b1;
    let res = t1 - b1p;
    // realness is asserted against the term scale: the residual itself
    // vanishes at roots
    let mag = (t1.norm() + b1p.norm()).max(1e-300);
    match k1 {
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

/// Unnormalized closed-form row: left half from the k1 sinusoid weighted
/// by the center k2 amplitude, right half the mirrored k2 sinusoid
/// weighted by the left-edge bracket.
fn phi_row_raw(pair: &ModePair, p: &JunctionParams) -> Vec<f64> {
    let n = p.n as i64;
    let a = (n - 1) / 2;
    let b = a + 1;
    let w1 = Waves::new(&pair.k1, (p.n + 1) / 2);
    let w2 = Waves::new(&pair.k2, (p.n + 1) / 2);
    let center = w2.s(b);
    let edge = w1.bracket(p.j1, a);
    (1..=n)
        .map(|i| {
            if i <= a {
                center * w1.bracket(p.j1, i - 1)
            } else {
                edge * w2.s(n + 1 - i)
            }
        })
        .collect()
}

/// Matching psi row at the same scale, from psi = -D phi / Lambda in
/// closed form.
fn psi_row_raw(pair: &ModePair, p: &JunctionParams) -> Vec<f64> {
    let n = p.n as i64;
    let a = (n - 1) / 2;
    let b = a + 1;
    let w1 = Waves::new(&pair.k1, (p.n + 1) / 2);
    let w2 = Waves::new(&pair.k2, (p.n + 1) / 2);
    let center = w2.s(b);
    let edge = w1.bracket(p.j1, a);
    let lambda = pair.lambda;
    (1..=n)
        .map(|i| {
            if i <= a {
                -lambda * center * w1.s(i)
            } else {
                -edge * w2.bracket(p.j2, n - i) / lambda
            }
        })
        .collect()
}

fn row_residual(m: &QuadraticForm, pair: &ModePair, p: &JunctionParams) -> f64 {
    let mut row = phi_row_raw(pair, p);
    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return f64::INFINITY;
    }
    for v in row.iter_mut() {
        *v /= norm;
    }
    let lambda2 = pair.lambda * pair.lambda;
    let mv = m.apply(&row);
    mv.iter()
        .zip(&row)
        .map(|(x, y)| (x - lambda2 * y).abs())
        .fold(0.0, f64::max)
}

const ENDPOINT_EPS: f64 = 1e-9;
const DISTINCT_TOL: f64 = 1e-10;

/// All N mode pairs of the junction chain, sorted by energy. Search runs
/// over k1 only; k2 follows from the energy constraint.
pub fn find_modes_junction(p: &JunctionParams) -> Result<Vec<ModePair>> {
    let m = build_quadratic_form(&junction_couplings(p))?;
    let m_scale = m
        .diag
        .iter()
        .chain(m.off.iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    let row_tol = 1e-7 * m_scale;

    for mult in [1usize, 4] {
        let pairs = collect_pairs(p, &m, row_tol, mult);
        if pairs.len() == p.n {
            return Ok(pairs);
        }
        if mult == 4 {
            let (mut real, mut imag, mut pi_imag) = (0, 0, 0);
            for pair in &pairs {
                match pair.k1 {
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

fn junction_couplings(p: &JunctionParams) -> Vec<f64> {
    let mut j = vec![p.j1; p.n - 1];
    for jb in j.iter_mut().skip((p.n - 1) / 2) {
        *jb = p.j2;
    }
    j
}

fn collect_pairs(
    p: &JunctionParams,
    m: &QuadraticForm,
    row_tol: f64,
    mult: usize,
) -> Vec<ModePair> {
    let points = 40 * p.n * mult;
    let mut found: Vec<ModePair> = Vec::new();

    let accept = |k1: QuasiMomentum, found: &mut Vec<ModePair>| {
        let lambda2 = match dispersion(&k1, p.j1) {
            Ok(l2) => l2,
            Err(_) => return,
        };
        let k2 = match pair_k2(&k1, p) {
            Ok(k2) => k2,
            Err(_) => return,
        };
        let pair = ModePair {
            k1,
            k2,
            lambda: lambda2.sqrt(),
        };
        if row_residual(m, &pair, p) > row_tol {
            return;
        }
        // relative spacing: near-edge deltas can sit many orders below 1
        let dup = found.iter().any(|other| {
            std::mem::discriminant(&other.k1) == std::mem::discriminant(&k1)
                && (other.k1.parameter() - k1.parameter()).abs()
                    <= DISTINCT_TOL * k1.parameter().abs().max(1.0)
        });
        if !dup {
            found.push(pair);
        }
    };

    // real k1
    let grid = linspace(ENDPOINT_EPS, std::f64::consts::PI - ENDPOINT_EPS, points);
    let f_real = |x: f64| cleared(&QuasiMomentum::Real(x), p).0;
    for root in scan_sign_changes(&f_real, &grid) {
        accept(QuasiMomentum::Real(root), &mut found);
    }

    // iu branch of k1, scanned in the edge distance
    let u_star = band_edge_u(p.j1);
    if found.len() < p.n && u_star > ENDPOINT_EPS {
        let delta_hi = u_star - ENDPOINT_EPS;
        let delta_knee = (u_star / points as f64).min(delta_hi * 0.5);
        // see the impurity scan: delta ~ lambda^2 for edge-bound modes,
        // so the geometric sweep must reach the underflow floor
        let mut grid = geomspace(1e-300, delta_knee, 2000 * mult);
        grid.extend(linspace(delta_knee, delta_hi, points));
        let f_imag = |d: f64| cleared(&QuasiMomentum::Imag { u_star, delta: d }, p).0;
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

    // pi - iv branch of k1
    if found.len() < p.n {
        let v_max = v_scan_limit(p.j1, p.j1.max(p.j2));
        let grid = linspace(ENDPOINT_EPS, v_max, points);
        let f_pi = |v: f64| cleared(&QuasiMomentum::PiImag(v), p).0;
        for root in scan_sign_changes(&f_pi, &grid) {
            accept(QuasiMomentum::PiImag(root), &mut found);
        }
    }

    // when the bands are far apart (j2 >> j1) the right-band modes
    // compress into a sliver of the k1 pi-iv branch that a uniform grid
    // cannot resolve; rescan with k2 as the search variable, mapping back
    // to k1 through the same energy lock with the coupling roles swapped
    if found.len() < p.n {
        let swapped = JunctionParams {
            n: p.n,
            j1: p.j2,
            j2: p.j1,
        };
        let via_k2 = |k2: QuasiMomentum, found: &mut Vec<ModePair>| {
            if let Ok(k1) = pair_k2(&k2, &swapped) {
                accept(k1, found);
            }
        };
        let f_k2 = |k2: QuasiMomentum| match pair_k2(&k2, &swapped) {
            Ok(k1) => cleared(&k1, p).0,
            Err(_) => f64::NAN,
        };

        let grid = linspace(ENDPOINT_EPS, std::f64::consts::PI - ENDPOINT_EPS, points);
        let f_real = |x: f64| f_k2(QuasiMomentum::Real(x));
        for root in scan_sign_changes(&f_real, &grid) {
            via_k2(QuasiMomentum::Real(root), &mut found);
        }

        let u_star2 = band_edge_u(p.j2);
        if found.len() < p.n && u_star2 > ENDPOINT_EPS {
            let delta_hi = u_star2 - ENDPOINT_EPS;
            let delta_knee = (u_star2 / points as f64).min(delta_hi * 0.5);
            let mut grid = geomspace(1e-300, delta_knee, 2000 * mult);
            grid.extend(linspace(delta_knee, delta_hi, points));
            let f_imag = |d: f64| {
                f_k2(QuasiMomentum::Imag {
                    u_star: u_star2,
                    delta: d,
                })
            };
            for root in scan_sign_changes(&f_imag, &grid) {
                via_k2(
                    QuasiMomentum::Imag {
                        u_star: u_star2,
                        delta: root,
                    },
                    &mut found,
                );
            }
        }

        if found.len() < p.n {
            let v_max = v_scan_limit(p.j2, p.j1.max(p.j2));
            let grid = linspace(ENDPOINT_EPS, v_max, points);
            let f_pi = |v: f64| f_k2(QuasiMomentum::PiImag(v));
            for root in scan_sign_changes(&f_pi, &grid) {
                via_k2(QuasiMomentum::PiImag(root), &mut found);
            }
        }
    }

    found.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    found
}

/// Assembles the free-fermion solution from the mode pairs.
pub fn build_solution_junction(spec: &ChainSpec, pairs: &[ModePair]) -> Result<FermionSolution> {
    let p = JunctionParams::from_spec(spec)?;
    if pairs.len() != p.n {
        return Err(Error::IncompleteSpectrum {
            expected: p.n,
            real: pairs.len(),
            imag: 0,
            pi_imag: 0,
        });
    }
    let n = p.n;
    let mut sorted: Vec<&ModePair> = pairs.iter().collect();
    sorted.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));

    let mut lambdas = Vec::with_capacity(n);
    let mut phi = nalgebra::DMatrix::zeros(n, n);
    let mut psi = nalgebra::DMatrix::zeros(n, n);
    let mut zero_modes = Vec::new();

    for (q, pair) in sorted.into_iter().enumerate() {
        lambdas.push(pair.lambda);
        let phi_row = phi_row_raw(pair, &p);
        let norm = phi_row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::AnsatzSingular);
        }
        let psi_row = if pair.lambda <= ZERO_MODE_FLOOR {
            zero_modes.push(q);
            vec![0.0; n]
        } else {
            let row = psi_row_raw(pair, &p);
            if row.iter().any(|x| !x.is_finite()) {
                zero_modes.push(q);
                vec![0.0; n]
            } else {
                row
            }
        };
        let flip = match phi_row.iter().find(|x| x.abs() > 1e-8 * norm) {
            Some(v) if *v < 0.0 => -1.0,
            _ => 1.0,
        };
        for i in 0..n {
            phi[(q, i)] = flip * phi_row[i] / norm;
            psi[(q, i)] = flip * psi_row[i] / norm;
        }
    }

    Ok(FermionSolution {
        lambdas,
        phi,
        psi,
        spec: spec.clone(),
        zero_modes,
    })
}

/// Convenience wrapper: roots plus assembly in one call.
pub fn solve_junction(spec: &ChainSpec) -> Result<FermionSolution> {
    let p = JunctionParams::from_spec(spec)?;
    let pairs = find_modes_junction(&p)?;
    build_solution_junction(spec, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_numeric;
    use std::f64::consts::PI;

    fn lambda_multiset_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn pair_rule_examples() {
        let p = JunctionParams::new(9, 1.0, 1.0).unwrap();
        let k2 = pair_k2(&QuasiMomentum::Real(0.7), &p).unwrap();
        assert!((k2.parameter() - 0.7).abs() < 1e-12);

        let p = JunctionParams::new(9, 1.0, 2.0).unwrap();
        let k2 = pair_k2(&QuasiMomentum::Real(PI / 2.0), &p).unwrap();
        assert!(matches!(k2, QuasiMomentum::Real(_)));
        assert!((k2.parameter().cos() - 0.75).abs() < 1e-12);

        let p = JunctionParams::new(9, 1.0, 0.25).unwrap();
        let k2 = pair_k2(&QuasiMomentum::Real(PI / 2.0), &p).unwrap();
        match k2 {
            QuasiMomentum::PiImag(v) => assert!((v.cosh() - 1.875).abs() < 1e-12),
            other => panic!("expected pi-iv branch, got {other:?}"),
        }
    }

    #[test]
    fn pair_energy_consistency() {
        for &(j1, j2) in &[(1.0, 2.0), (1.0, 0.3), (4.0, 0.5), (10.0, 2.5)] {
            let p = JunctionParams::new(9, j1, j2).unwrap();
            for k in [
                QuasiMomentum::Real(0.3),
                QuasiMomentum::Real(2.8),
                QuasiMomentum::imag_u(0.5 * band_edge_u(j1).max(0.2), j1),
                QuasiMomentum::PiImag(0.4),
            ] {
                let Ok(l1) = dispersion(&k, j1) else { continue };
                let k2 = pair_k2(&k, &p).unwrap();
                let l2 = dispersion(&k2, j2).unwrap();
                assert!((l1 - l2).abs() < 1e-10, "j1 {j1} j2 {j2}: {l1} vs {l2}");
            }
        }
    }

    #[test]
    fn uniform_junction_reduces_to_open_chain() {
        let spec = ChainSpec::junction(9, 1.0, 1.0, 1.0).unwrap();
        let p = JunctionParams::from_spec(&spec).unwrap();
        let pairs = find_modes_junction(&p).unwrap();
        assert_eq!(pairs.len(), 9);
        for pair in &pairs {
            assert!(matches!(pair.k1, QuasiMomentum::Real(_)));
            assert!((pair.k1.parameter() - pair.k2.parameter()).abs() < 1e-9);
        }
        let sol = build_solution_junction(&spec, &pairs).unwrap();
        let num = solve_numeric(&spec).unwrap();
        lambda_multiset_close(&sol.lambdas, &num.lambdas, 1e-10);
    }

    #[test]
    fn strong_junction_spectrum_and_rows() {
        let spec = ChainSpec::junction(9, 1.0, 2.0, 1.0).unwrap();
        let p = JunctionParams::from_spec(&spec).unwrap();
        let pairs = find_modes_junction(&p).unwrap();
        let num = solve_numeric(&spec).unwrap();
        let sol = build_solution_junction(&spec, &pairs).unwrap();
        lambda_multiset_close(&sol.lambdas, &num.lambdas, 1e-8);
        // modes above the left band must leave the real branch
        for pair in &pairs {
            if pair.lambda * pair.lambda > 4.0 + 1e-9 {
                assert!(!matches!(pair.k1, QuasiMomentum::Real(_)));
            }
            let r = residual_junction(&pair.k1, &p).unwrap();
            assert!(r.abs() < 1e-9, "residual {r}");
        }
        for q in 0..9 {
            for i in 0..9 {
                assert!((sol.phi[(q, i)] - num.phi[(q, i)]).abs() < 1e-8);
                assert!((sol.psi[(q, i)] - num.psi[(q, i)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn weak_junction_full_count() {
        let spec = ChainSpec::junction(9, 1.0, 0.5, 1.0).unwrap();
        let sol = solve_junction(&spec).unwrap();
        let num = solve_numeric(&spec).unwrap();
        lambda_multiset_close(&sol.lambdas, &num.lambdas, 1e-8);
    }

    #[test]
    fn deep_ferro_junction_edge_modes() {
        // h = 0.1: j1 = 10, j2 = 2.5; the lowest modes hug the band edges
        let spec = ChainSpec::junction(9, 1.0, 0.25, 0.1).unwrap();
        let sol = solve_junction(&spec).unwrap();
        let num = solve_numeric(&spec).unwrap();
        lambda_multiset_close(&sol.lambdas, &num.lambdas, 1e-8);
        assert!(
            (sol.lambda_min() - num.lambda_min()).abs()
                < 1e-10 * num.lambda_min().max(1e-300).max(1e-12)
                || (sol.lambda_min() - num.lambda_min()).abs() < 1e-12
        );
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(JunctionParams::new(8, 1.0, 1.0).is_err());
        assert!(JunctionParams::new(3, 1.0, 1.0).is_err());
        assert!(JunctionParams::new(9, 1.0, -1.0).is_err());
    }
}
