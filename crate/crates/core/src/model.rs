//! The generalized Lorenz family, its equilibria, and the delayed-feedback
//! controlled vector field.
//!
//! One parameter `alpha` in [0, 1] selects the family member: the classic
//! Lorenz system at `alpha = 0`, the Lu system at `alpha = 0.8` and the Chen
//! system at `alpha = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Derived coefficients of one family member plus the selecting `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    pub alpha: f64,
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
    pub gamma: f64,
}

impl AlphaParams {
    /// sigma = 25 alpha + 10, r = 28 - 35 alpha, b = (alpha + 8)/3,
    /// gamma = 29 alpha - 1.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(Self {
            alpha,
            sigma: 25.0 * alpha + 10.0,
            r: 28.0 - 35.0 * alpha,
            b: (alpha + 8.0) / 3.0,
            gamma: 29.0 * alpha - 1.0,
        })
    }
}

/// A point of the three-dimensional state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add_scaled(&self, other: &State, s: f64) -> State {
        State::new(self.x + s * other.x, self.y + s * other.y, self.z + s * other.z)
    }

    pub fn sub(&self, other: &State) -> State {
        State::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

/// The point the controller steers the system to: (x_r, x_r, z_star) with
/// z_star = x_r^2 / b, the unique z making it a fixed point of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulationTarget {
    pub x_r: f64,
    pub z_star: f64,
}

impl RegulationTarget {
    /// Target with a caller-chosen x_r.
    pub fn with_x_r(params: &AlphaParams, x_r: f64) -> Self {
        Self { x_r, z_star: x_r * x_r / params.b }
    }

    /// The default target: the nontrivial equilibrium E+ of the open-loop
    /// system, x_r = sqrt((8 + alpha)(9 - 2 alpha)), z_star = 27 - 6 alpha.
    pub fn e_plus(params: &AlphaParams) -> Self {
        let x_r = ((8.0 + params.alpha) * (9.0 - 2.0 * params.alpha)).sqrt();
        Self::with_x_r(params, x_r)
    }

    pub fn as_state(&self) -> State {
        State::new(self.x_r, self.x_r, self.z_star)
    }
}

/// The three fixed points of the open-loop system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub e0: State,
    pub e_plus: State,
    pub e_minus: State,
}

/// E0 = origin, E+- = (+-x_r, +-x_r, 27 - 6 alpha).
pub fn equilibria(params: &AlphaParams) -> EquilibriumSet {
    let q = ((8.0 + params.alpha) * (9.0 - 2.0 * params.alpha)).sqrt();
    let z = 27.0 - 6.0 * params.alpha;
    EquilibriumSet {
        e0: State::new(0.0, 0.0, 0.0),
        e_plus: State::new(q, q, z),
        e_minus: State::new(-q, -q, z),
    }
}

/// Right-hand side of the open-loop (uncontrolled) system.
pub fn uncontrolled_rhs(params: &AlphaParams, s: &State) -> State {
    State::new(
        params.sigma * (s.y - s.x),
        params.r * s.x - s.x * s.z + params.gamma * s.y,
        s.x * s.y - params.b * s.z,
    )
}

/// Right-hand side of the delayed-feedback controlled system; `delayed` is
/// the state at time t - tau. With `delayed == now` this is the tau = 0
/// closed loop.
pub fn controlled_rhs(
    params: &AlphaParams,
    target: &RegulationTarget,
    now: &State,
    delayed: &State,
) -> State {
    State::new(
        params.sigma * (now.y - now.x),
        params.r * (now.x - delayed.x) - (now.x * now.z - delayed.x * delayed.z)
            + params.gamma * (now.y - delayed.y)
            - params.sigma * (delayed.y - target.x_r),
        now.x * now.y - params.b * now.z,
    )
}

/// The scalar control added to the y-equation:
/// u = -r x_d + x_d z_d - gamma y_d - sigma (y_d - x_r).
pub fn control_signal(params: &AlphaParams, target: &RegulationTarget, delayed: &State) -> f64 {
    -params.r * delayed.x + delayed.x * delayed.z - params.gamma * delayed.y
        - params.sigma * (delayed.y - target.x_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn params_at_grid_points() {
        let p = AlphaParams::from_alpha(0.0).unwrap();
        assert_eq!((p.sigma, p.r, p.b, p.gamma), (10.0, 28.0, 8.0 / 3.0, -1.0));
        let p = AlphaParams::from_alpha(1.0).unwrap();
        assert_eq!((p.sigma, p.r, p.b, p.gamma), (35.0, -7.0, 3.0, 28.0));
        let p = AlphaParams::from_alpha(0.8).unwrap();
        assert_relative_eq!(p.sigma, 30.0);
        assert_relative_eq!(p.r, 0.0);
        assert_relative_eq!(p.b, 8.8 / 3.0);
        assert_relative_eq!(p.gamma, 22.2);
    }

    #[test]
    fn params_rejects_out_of_range() {
        assert!(AlphaParams::from_alpha(-0.01).is_err());
        assert!(AlphaParams::from_alpha(1.01).is_err());
        assert!(AlphaParams::from_alpha(f64::NAN).is_err());
    }

    #[test]
    fn equilibria_are_fixed_points_over_grid() {
        for k in 0..=100 {
            let alpha = k as f64 / 100.0;
            let p = AlphaParams::from_alpha(alpha).unwrap();
            let eq = equilibria(&p);
            for e in [eq.e0, eq.e_plus, eq.e_minus] {
                assert!(uncontrolled_rhs(&p, &e).norm() < 1e-10, "alpha = {alpha}");
            }
            assert_relative_eq!(eq.e_plus.x, -eq.e_minus.x);
            assert_relative_eq!(eq.e_plus.z, eq.e_minus.z);
        }
    }

    #[test]
    fn e_plus_values() {
        let p = AlphaParams::from_alpha(0.0).unwrap();
        let eq = equilibria(&p);
        assert_relative_eq!(eq.e_plus.x, 72f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(eq.e_plus.z, 27.0);
        let p = AlphaParams::from_alpha(1.0).unwrap();
        let eq = equilibria(&p);
        assert_relative_eq!(eq.e_plus.x, 63f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(eq.e_plus.z, 21.0);
    }

    #[test]
    fn target_z_matches_e_plus() {
        for k in 0..=10 {
            let p = AlphaParams::from_alpha(k as f64 / 10.0).unwrap();
            let t = RegulationTarget::e_plus(&p);
            assert_relative_eq!(t.z_star, 27.0 - 6.0 * p.alpha, max_relative = 1e-13);
        }
    }

    #[test]
    fn uncontrolled_rhs_spot_values() {
        let p = AlphaParams::from_alpha(0.0).unwrap();
        let f = uncontrolled_rhs(&p, &State::new(1.0, 0.0, 0.0));
        assert_eq!((f.x, f.y, f.z), (-10.0, 28.0, 0.0));
        let p = AlphaParams::from_alpha(1.0).unwrap();
        let f = uncontrolled_rhs(&p, &State::new(0.0, 1.0, 0.0));
        assert_eq!((f.x, f.y, f.z), (35.0, 28.0, 0.0));
    }

    #[test]
    fn controlled_fixed_point() {
        for alpha in [0.0, 0.37, 0.8, 1.0] {
            let p = AlphaParams::from_alpha(alpha).unwrap();
            let t = RegulationTarget::e_plus(&p);
            let s = t.as_state();
            assert!(controlled_rhs(&p, &t, &s, &s).norm() < 1e-12);
        }
    }

    #[test]
    fn controlled_rhs_spot_value() {
        // alpha = 0, now = (1,2,3), delayed = (0,0,0), x_r = sqrt(72)
        let p = AlphaParams::from_alpha(0.0).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let f = controlled_rhs(&p, &t, &State::new(1.0, 2.0, 3.0), &State::new(0.0, 0.0, 0.0));
        assert_relative_eq!(f.x, 10.0);
        assert_relative_eq!(f.y, 23.0 + 10.0 * 72f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(f.z, -6.0);
    }

    #[test]
    fn no_delay_reduces_to_closed_loop() {
        // delayed == now: (sigma(y - x), sigma(x_r - y), xy - bz), and the
        // first two components are linear in (x - x_r, y - x_r) with matrix
        // [[-sigma, sigma], [0, -sigma]].
        let p = AlphaParams::from_alpha(0.6).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let s = State::new(2.5, -1.0, 7.0);
        let f = controlled_rhs(&p, &t, &s, &s);
        assert_relative_eq!(f.x, p.sigma * (s.y - s.x), max_relative = 1e-13);
        assert_relative_eq!(f.y, p.sigma * (t.x_r - s.y), max_relative = 1e-13);
        assert_relative_eq!(f.z, s.x * s.y - p.b * s.z, max_relative = 1e-13);
        let dx = s.x - t.x_r;
        let dy = s.y - t.x_r;
        assert_relative_eq!(f.x, -p.sigma * dx + p.sigma * dy, max_relative = 1e-12);
        assert_relative_eq!(f.y, -p.sigma * dy, max_relative = 1e-12);
    }

    #[test]
    fn control_signal_spot_values() {
        let p = AlphaParams::from_alpha(0.0).unwrap();
        let t = RegulationTarget::e_plus(&p);
        // at the target the control exactly holds the equilibrium
        let u = control_signal(&p, &t, &t.as_state());
        assert!(u.abs() < 1e-12);
        // all delayed terms vanish
        let u = control_signal(&p, &t, &State::new(0.0, 0.0, 0.0));
        assert_relative_eq!(u, p.sigma * t.x_r, max_relative = 1e-14);
        let p = AlphaParams::from_alpha(1.0).unwrap();
        let t = RegulationTarget::e_plus(&p);
        let u = control_signal(&p, &t, &State::new(1.0, 1.0, 1.0));
        assert_relative_eq!(u, 7.0 + 1.0 - 28.0 - 35.0 * (1.0 - 63f64.sqrt()), max_relative = 1e-13);
    }

    #[test]
    fn control_signal_reproduces_controlled_rhs() {
        // uncontrolled + (0, u, 0) == controlled, componentwise
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let alpha: f64 = rng.gen_range(0.0..=1.0);
            let p = AlphaParams::from_alpha(alpha).unwrap();
            let t = RegulationTarget::e_plus(&p);
            let s = State::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..45.0));
            let d = State::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..45.0));
            let open = uncontrolled_rhs(&p, &s);
            let u = control_signal(&p, &t, &d);
            let closed = controlled_rhs(&p, &t, &s, &d);
            let scale = 1.0 + closed.norm();
            assert!((open.x - closed.x).abs() / scale < 1e-12);
            assert!((open.y + u - closed.y).abs() / scale < 1e-12);
            assert!((open.z - closed.z).abs() / scale < 1e-12);
        }
    }
}
