//! Family-wide survey: critical delay, crossing data and normal-form
//! classification on an evenly spaced alpha grid, plus time-domain regime
//! checks around the critical delay.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{integrate_dde, oscillation_metrics, OscillationMetrics};
use crate::model::{AlphaParams, RegulationTarget, State};
use crate::normal_form::{hopf_normal_form, Direction, OrbitStability};
use crate::spectral::{build_aux_cubic, critical_delay, transversality};

/// One grid point of the survey.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub tau_c: f64,
    pub nu0: f64,
    /// Discriminant c2^2 - 3 c1 of the auxiliary cubic.
    pub delta: f64,
    /// F'(nu0^2), the transversality value.
    pub fprime: f64,
    pub beta2: f64,
    pub mu2: f64,
    pub t2: f64,
    pub direction: Direction,
    pub stability: OrbitStability,
}

/// Survey outcome at one alpha; analysis failures are carried, not fatal.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub alpha: f64,
    pub row: Option<SweepRow>,
    pub error: Option<String>,
}

/// Full analysis chain at a single alpha.
pub fn sweep_point(alpha: f64) -> Result<SweepRow> {
    let params = AlphaParams::from_alpha(alpha)?;
    let target = RegulationTarget::e_plus(&params);
    let sw = critical_delay(&params, &target)?;
    let tau_c = sw
        .tau_c
        .ok_or_else(|| Error::Config(format!("no stability switch at alpha = {alpha}")))?;
    let nu0 = sw.nu0.ok_or_else(|| Error::Config("switch without frequency".into()))?;
    let aux = build_aux_cubic(&params, &target);
    let fprime = transversality(&aux, nu0)?;
    let nf = hopf_normal_form(&params, &target, tau_c, nu0)?;
    Ok(SweepRow {
        alpha,
        tau_c,
        nu0,
        delta: aux.delta,
        fprime,
        beta2: nf.beta2,
        mu2: nf.mu2,
        t2: nf.t2,
        direction: nf.direction,
        stability: nf.orbit_stability,
    })
}

fn entry_at(alpha: f64) -> SweepEntry {
    match sweep_point(alpha) {
        Ok(row) => SweepEntry { alpha, row: Some(row), error: None },
        Err(e) => SweepEntry { alpha, row: None, error: Some(e.to_string()) },
    }
}

fn grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Survey over `n` evenly spaced alpha values in [0, 1], ordered by alpha.
/// Runs on the rayon pool when the `parallel` feature is active.
pub fn alpha_sweep(n: usize) -> Result<Vec<SweepEntry>> {
    if n == 0 {
        return Err(Error::Config("sweep needs at least one grid point".into()));
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok(grid(n).into_par_iter().map(entry_at).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        alpha_sweep_seq(n)
    }
}

/// Sequential survey, always available; bit-identical to [`alpha_sweep`].
pub fn alpha_sweep_seq(n: usize) -> Result<Vec<SweepEntry>> {
    if n == 0 {
        return Err(Error::Config("sweep needs at least one grid point".into()));
    }
    Ok(grid(n).into_iter().map(entry_at).collect())
}

/// CSV export of the successful rows, 17 significant digits per number.
pub fn write_sweep_csv<W: Write>(entries: &[SweepEntry], mut w: W) -> Result<()> {
    writeln!(w, "alpha,tau_c,nu0,delta,fprime,beta2,mu2,t2,direction,stability")?;
    for entry in entries {
        if let Some(row) = &entry.row {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                row.alpha,
                row.tau_c,
                row.nu0,
                row.delta,
                row.fprime,
                row.beta2,
                row.mu2,
                row.t2,
                match row.direction {
                    Direction::Supercritical => "supercritical",
                    Direction::Subcritical => "subcritical",
                },
                match row.stability {
                    OrbitStability::Stable => "stable",
                    OrbitStability::Unstable => "unstable",
                },
            )?;
        }
    }
    Ok(())
}

/// Time-domain classification of one simulated regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeVerdict {
    /// Settled onto the regulation target.
    Converged,
    /// Bounded, with a sustained periodic oscillation.
    Oscillating,
    /// Bounded but neither settled nor cleanly periodic.
    Indeterminate,
    /// Hit the blow-up guard.
    Diverged,
}

/// Verdict plus the evidence it rests on.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub alpha: f64,
    pub tau: f64,
    pub tau_over_tau_c: f64,
    pub verdict: RegimeVerdict,
    pub metrics: Option<OscillationMetrics>,
    pub diverged_at: Option<f64>,
}

/// Minimum tail amplitude that counts as a sustained oscillation.
pub const OSCILLATION_AMPLITUDE_FLOOR: f64 = 0.1;

/// Simulate the controlled system at the given delays and classify each run.
/// Every trajectory starts from the target shifted by (0.5, 0.5, 0.5), with
/// step tau / steps_per_delay.
pub fn verify_regimes(
    alpha: f64,
    taus: &[f64],
    steps_per_delay: usize,
    t_end: f64,
) -> Result<Vec<RegimeReport>> {
    let params = AlphaParams::from_alpha(alpha)?;
    let target = RegulationTarget::e_plus(&params);
    let sw = critical_delay(&params, &target)?;
    let tau_c = sw
        .tau_c
        .ok_or_else(|| Error::Config(format!("no stability switch at alpha = {alpha}")))?;
    let initial = target.as_state().add_scaled(&State::new(1.0, 1.0, 1.0), 0.5);

    let mut reports = Vec::with_capacity(taus.len());
    for &tau in taus {
        let h = tau / steps_per_delay as f64;
        let report = match integrate_dde(&params, &target, tau, initial, h, t_end) {
            Ok(traj) => {
                let metrics = oscillation_metrics(&traj, &target, 0.25)?;
                let verdict = if metrics.converged {
                    RegimeVerdict::Converged
                } else if metrics.amplitude > OSCILLATION_AMPLITUDE_FLOOR
                    && metrics.period.is_some()
                {
                    RegimeVerdict::Oscillating
                } else {
                    RegimeVerdict::Indeterminate
                };
                RegimeReport {
                    alpha,
                    tau,
                    tau_over_tau_c: tau / tau_c,
                    verdict,
                    metrics: Some(metrics),
                    diverged_at: None,
                }
            }
            Err(Error::Diverged { time, .. }) => RegimeReport {
                alpha,
                tau,
                tau_over_tau_c: tau / tau_c,
                verdict: RegimeVerdict::Diverged,
                metrics: None,
                diverged_at: Some(time),
            },
            Err(e) => return Err(e),
        };
        reports.push(report);
    }
    Ok(reports)
}
