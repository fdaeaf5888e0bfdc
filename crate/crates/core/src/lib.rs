//! Delayed-feedback stabilization toolkit for the generalized Lorenz family.
//!
//! One parameter `alpha` in [0, 1] interpolates between the Lorenz
//! (`alpha = 0`), Lu (`alpha = 0.8`) and Chen (`alpha = 1`) systems. A
//! nonlinear feedback built from the state one delay in the past steers each
//! member to a chosen equilibrium. The crate computes where that loop loses
//! stability as the delay grows (the critical delay and the full switch
//! schedule), classifies the Hopf bifurcation at the first switch through a
//! center-manifold reduction, maps the characteristic function along the
//! imaginary axis, simulates the closed loop directly, and surveys all of it
//! over an alpha grid.

pub mod cjson;
pub mod error;
pub mod integrator;
pub mod model;
pub mod normal_form;
pub mod omega;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{AlphaParams, RegulationTarget, State};
