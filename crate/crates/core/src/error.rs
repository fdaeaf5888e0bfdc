//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),

    #[error("step h = {h} is not an exact divisor of the delay tau = {tau}")]
    StepNotDivisor { h: f64, tau: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("state norm exceeded {guard:e} at t = {time}")]
    Diverged { time: f64, guard: f64 },

    #[error("trajectory too short: {len} samples, need at least {need}")]
    InsufficientData { len: usize, need: usize },

    #[error("Q(i nu) vanishes at nu = {nu}; delay sequence is degenerate")]
    DegenerateQ { nu: f64 },

    #[error("degenerate crossing: |F'(nu0^2)| = {value:e} below scale {scale:e}")]
    DegenerateCrossing { value: f64, scale: f64 },

    #[error("Newton iteration on W did not converge within {iters} iterations (last |W| = {residual:e})")]
    RootTracking { iters: usize, residual: f64 },

    #[error("(tau, nu) = ({tau}, {nu}) is not a critical pair: |W(i nu, tau)| = {residual:e}")]
    NotCritical { tau: f64, nu: f64, residual: f64 },

    #[error("vanishing denominator in eigenvector closed form")]
    DegenerateEigenvector,

    #[error("near-singular linear system (condition estimate {cond:e}); 2 i nu0 may resonate with the spectrum")]
    Resonance { cond: f64 },

    #[error("origin-crossing flag does not differ over the bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("transversality contradiction: Re lambda'(tau_c) = {0} is not positive")]
    NonpositiveCrossingSpeed(f64),

    #[error("equilibrium is not stable at tau = 0; delay analysis does not apply")]
    UnstableAtZeroDelay,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
