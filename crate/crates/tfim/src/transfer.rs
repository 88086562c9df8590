//! Transfer-matrix view of the mode recurrence, used to verify that the
//! closed-form rows really are sinusoids within each homogeneous
//! coupling segment: phi_{i+1} = e phi_i - phi_{i-1} with e = 2 cos k.

use nalgebra::Matrix2;

/// Adjacent pair of row values (phi_i, phi_{i-1}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferState {
    pub current: f64,
    pub previous: f64,
}

impl TransferState {
    pub fn new(current: f64, previous: f64) -> Self {
        TransferState { current, previous }
    }
}

/// One step of the homogeneous recurrence: [[e, -1], [1, 0]].
/// Unit determinant; eigenvalues e^{+-ik} when e = 2 cos k.
pub fn transfer_step(e: f64) -> Matrix2<f64> {
    Matrix2::new(e, -1.0, 1.0, 0.0)
}

/// Propagates the site-2 state to site p (p >= 2) by applying the step
/// matrix p - 2 times. |e| > 2 grows hyperbolically, which is the
/// expected behavior for complex-branch modes.
pub fn propagate(state2: TransferState, e: f64, p: usize) -> TransferState {
    assert!(p >= 2, "propagation starts from site 2");
    let t = transfer_step(e);
    let mut v = nalgebra::Vector2::new(state2.current, state2.previous);
    for _ in 2..p {
        v = t * v;
    }
    TransferState {
        current: v[0],
        previous: v[1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn step_has_unit_determinant() {
        for e in [-3.0, 0.0, 1.3, 2.0] {
            assert_eq!(transfer_step(e).determinant(), 1.0);
        }
    }

    #[test]
    fn constant_solution_is_fixed_point() {
        let t = transfer_step(2.0);
        let v = nalgebra::Vector2::new(1.0, 1.0);
        assert_eq!(t * v, v);
    }

    #[test]
    fn quarter_turn_at_e_zero() {
        let t = transfer_step(0.0);
        let t4 = t * t * t * t;
        assert_eq!(t4, Matrix2::identity());
    }

    #[test]
    fn propagation_reproduces_cosine_lattice() {
        let k = PI / 3.0;
        let e = 2.0 * k.cos();
        let site = |p: f64| (k * (2.0 * p - 1.0) / 2.0).cos();
        let s2 = TransferState::new(site(2.0), site(1.0));
        for p in 2..=12 {
            let got = propagate(s2, e, p);
            assert!((got.current - site(p as f64)).abs() < 1e-12, "site {p}");
        }
    }

    #[test]
    fn hyperbolic_growth_rate() {
        // e = 3: growth per step tends to the larger root of x^2 - 3x + 1
        let rate = (3.0 + 5.0_f64.sqrt()) / 2.0;
        let s2 = TransferState::new(1.0, 0.0);
        let a = propagate(s2, 3.0, 30).current;
        let b = propagate(s2, 3.0, 31).current;
        assert!((b / a - rate).abs() < 1e-9);
    }
}
