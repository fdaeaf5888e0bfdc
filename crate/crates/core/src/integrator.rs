//! Method-of-steps integration of the controlled delay system with a
//! fixed-step classical Runge-Kutta scheme.
//!
//! The step h must divide the delay exactly, so delayed node values fall on
//! grid points and only the RK half-stages need interpolation; those use
//! cubic Hermite interpolation of the stored (state, derivative) pairs.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{controlled_rhs, uncontrolled_rhs, AlphaParams, RegulationTarget, State};

/// Blow-up guard on the state norm.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Default convergence tolerance for [`oscillation_metrics`].
pub const CONVERGENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryMeta {
    pub alpha: f64,
    pub tau: f64,
    pub h: f64,
    pub x_r: f64,
}

/// Uniformly sampled solution, `times[0] = 0`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    /// CSV export: header `t,x,y,z`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,y,z")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", t, s.x, s.y, s.z)?;
        }
        Ok(())
    }
}

/// Which vector field [`integrate_ode`] advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeField {
    /// The tau = 0 closed loop (delayed argument equals the current state).
    Controlled,
    /// The uncontrolled chaotic system.
    OpenLoop,
}

/// Convergence and oscillation summary of a trajectory tail.
#[derive(Debug, Clone, Serialize)]
pub struct OscillationMetrics {
    pub converged: bool,
    pub final_distance_to_target: f64,
    /// Half peak-to-trough of x over the tail window.
    pub amplitude: f64,
    /// Mean peak spacing over the tail window; `None` with fewer than 3 peaks.
    pub period: Option<f64>,
    pub peak_count: usize,
}

fn check_step(tau: f64, h: f64) -> Result<usize> {
    if !(tau > 0.0) || !(h > 0.0) {
        return Err(Error::Config(format!("need tau > 0 and h > 0, got tau = {tau}, h = {h}")));
    }
    let ratio = tau / h;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::StepNotDivisor { h, tau });
    }
    Ok(n as usize)
}

/// Integrate the controlled delay system from a constant history equal to
/// `initial` on [-tau, 0].
pub fn integrate_dde(
    params: &AlphaParams,
    target: &RegulationTarget,
    tau: f64,
    initial: State,
    h: f64,
    t_end: f64,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
    }
    if !initial.is_finite() {
        return Err(Error::Config("initial state must be finite".into()));
    }
    let lag = check_step(tau, h)?;
    let n_steps = (t_end / h).round().max(1.0) as usize;

    // Index i holds t = (i - lag) * h; indices 0..=lag are the history.
    let mut states = Vec::with_capacity(n_steps + lag + 1);
    let mut derivs = Vec::with_capacity(n_steps + lag + 1);
    for _ in 0..=lag {
        states.push(initial);
        derivs.push(State::new(0.0, 0.0, 0.0)); // constant history
    }
    // Right-derivative at t = 0, used by the Hermite patch on [0, h].
    derivs[lag] = controlled_rhs(params, target, &initial, &initial);

    let hermite_mid = |states: &[State], derivs: &[State], i: usize, lag: usize| -> State {
        if i + 1 <= lag {
            // entirely inside the constant history
            return states[0];
        }
        // midpoint of [i, i+1]: h00 = 1/2, h10 = 1/8, h01 = 1/2, h11 = -1/8
        let p0 = &states[i];
        let p1 = &states[i + 1];
        let m0 = &derivs[i];
        let m1 = &derivs[i + 1];
        State::new(
            0.5 * (p0.x + p1.x) + 0.125 * h * (m0.x - m1.x),
            0.5 * (p0.y + p1.y) + 0.125 * h * (m0.y - m1.y),
            0.5 * (p0.z + p1.z) + 0.125 * h * (m0.z - m1.z),
        )
    };

    for k in 0..n_steps {
        let i = lag + k;
        let now = states[i];
        let d0 = states[i - lag];
        let d1 = states[i - lag + 1];
        let dh = hermite_mid(&states, &derivs, i - lag, lag);

        let k1 = controlled_rhs(params, target, &now, &d0);
        let k2 = controlled_rhs(params, target, &now.add_scaled(&k1, 0.5 * h), &dh);
        let k3 = controlled_rhs(params, target, &now.add_scaled(&k2, 0.5 * h), &dh);
        let k4 = controlled_rhs(params, target, &now.add_scaled(&k3, h), &d1);

        let next = State::new(
            now.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            now.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            now.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        );
        if !next.is_finite() || next.norm() > DIVERGENCE_GUARD {
            return Err(Error::Diverged { time: (k + 1) as f64 * h, guard: DIVERGENCE_GUARD });
        }
        derivs.push(controlled_rhs(params, target, &next, &d1));
        states.push(next);
    }

    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * h).collect();
    let states = states.split_off(lag);
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta { alpha: params.alpha, tau, h, x_r: target.x_r },
    })
}

/// RK4 trajectory of an undelayed field: the tau = 0 closed loop, or the
/// open-loop chaotic system.
pub fn integrate_ode(
    params: &AlphaParams,
    target: &RegulationTarget,
    initial: State,
    h: f64,
    t_end: f64,
    field: OdeField,
) -> Result<Trajectory> {
    if !(t_end > 0.0) || !(h > 0.0) {
        return Err(Error::Config(format!("need t_end > 0 and h > 0, got {t_end}, {h}")));
    }
    let rhs = |s: &State| -> State {
        match field {
            OdeField::Controlled => controlled_rhs(params, target, s, s),
            OdeField::OpenLoop => uncontrolled_rhs(params, s),
        }
    };
    let n_steps = (t_end / h).round().max(1.0) as usize;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial);
    let mut now = initial;
    for k in 0..n_steps {
        let k1 = rhs(&now);
        let k2 = rhs(&now.add_scaled(&k1, 0.5 * h));
        let k3 = rhs(&now.add_scaled(&k2, 0.5 * h));
        let k4 = rhs(&now.add_scaled(&k3, h));
        now = State::new(
            now.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            now.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            now.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        );
        if !now.is_finite() || now.norm() > DIVERGENCE_GUARD {
            return Err(Error::Diverged { time: (k + 1) as f64 * h, guard: DIVERGENCE_GUARD });
        }
        states.push(now);
    }
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * h).collect();
    Ok(Trajectory {
        times,
        states,
        meta: TrajectoryMeta { alpha: params.alpha, tau: 0.0, h, x_r: target.x_r },
    })
}

/// Parabolic refinement of a discrete local maximum at index `i`.
fn refine_peak(t: &[f64], x: &[f64], i: usize) -> f64 {
    let (y0, y1, y2) = (x[i - 1], x[i], x[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < 1e-300 {
        return t[i];
    }
    let delta = 0.5 * (y0 - y2) / denom;
    t[i] + delta.clamp(-0.5, 0.5) * (t[i] - t[i - 1])
}

/// Peak detection on x(t) over the trailing `tail_fraction` of the trajectory.
pub fn oscillation_metrics(
    traj: &Trajectory,
    target: &RegulationTarget,
    tail_fraction: f64,
) -> Result<OscillationMetrics> {
    oscillation_metrics_with_tol(traj, target, tail_fraction, CONVERGENCE_TOL)
}

pub fn oscillation_metrics_with_tol(
    traj: &Trajectory,
    target: &RegulationTarget,
    tail_fraction: f64,
    tol: f64,
) -> Result<OscillationMetrics> {
    if !(0.0 < tail_fraction && tail_fraction <= 1.0) {
        return Err(Error::Config(format!("tail_fraction must be in (0, 1], got {tail_fraction}")));
    }
    let n = traj.len();
    if n < 100 {
        return Err(Error::InsufficientData { len: n, need: 100 });
    }
    let start = ((n as f64) * (1.0 - tail_fraction)).floor() as usize;
    let start = start.min(n - 3);
    let t = &traj.times[start..];
    let x: Vec<f64> = traj.states[start..].iter().map(|s| s.x).collect();

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let amplitude = 0.5 * (hi - lo);

    let mut peaks = Vec::new();
    for i in 1..x.len() - 1 {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] {
            peaks.push(refine_peak(t, &x, i));
        }
    }
    let period = if peaks.len() >= 3 {
        let spans = peaks.last().unwrap() - peaks.first().unwrap();
        Some(spans / (peaks.len() - 1) as f64)
    } else {
        None
    };

    let final_distance_to_target = traj.last_state().sub(&target.as_state()).norm();
    Ok(OscillationMetrics {
        converged: final_distance_to_target < tol && amplitude < tol,
        final_distance_to_target,
        amplitude,
        period,
        peak_count: peaks.len(),
    })
}
