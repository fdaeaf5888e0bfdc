//! Characteristic quasi-polynomial of the linearization at the regulation
//! target, the auxiliary cubic locating purely imaginary eigenvalues, delay
//! sequences, stability switches, and the critical delay.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AlphaParams, RegulationTarget};

/// W(lambda) = P(lambda) + Q(lambda) e^{-lambda tau} with
/// P = lambda^3 + a2 lambda^2 + a1 lambda + a0 and
/// Q = b2 lambda^2 + b1 lambda + b0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CharQuasiPoly {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub k1: f64,
    pub k2: f64,
}

impl CharQuasiPoly {
    pub fn p(&self, lambda: Complex64) -> Complex64 {
        ((lambda + self.a2) * lambda + self.a1) * lambda + self.a0
    }

    pub fn q(&self, lambda: Complex64) -> Complex64 {
        (self.b2 * lambda + self.b1) * lambda + self.b0
    }

    pub fn p_prime(&self, lambda: Complex64) -> Complex64 {
        (3.0 * lambda + 2.0 * self.a2) * lambda + self.a1
    }

    pub fn q_prime(&self, lambda: Complex64) -> Complex64 {
        2.0 * self.b2 * lambda + self.b1
    }

    /// Residual scale: 1 + max coefficient magnitude.
    pub fn scale(&self) -> f64 {
        1.0 + [self.a0, self.a1, self.a2, self.b0, self.b1, self.b2]
            .iter()
            .map(|c| c.abs())
            .fold(0.0f64, f64::max)
    }
}

/// F(x) = x^3 + c2 x^2 + c1 x + c0 with x = nu^2; positive simple roots of F
/// locate the purely imaginary characteristic roots +- i nu.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuxCubic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Delta = c2^2 - 3 c1; critical points exist iff Delta > 0.
    pub delta: f64,
    pub x_star: Option<f64>,
    pub x_star2: Option<f64>,
}

impl AuxCubic {
    pub fn eval(&self, x: f64) -> f64 {
        ((x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn eval_prime(&self, x: f64) -> f64 {
        (3.0 * x + 2.0 * self.c2) * x + self.c1
    }

    pub fn scale(&self) -> f64 {
        1.0 + self.c0.abs().max(self.c1.abs()).max(self.c2.abs())
    }
}

/// A positive root of the auxiliary cubic with its crossing data.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingRoot {
    /// Root of F.
    pub x: f64,
    /// nu = sqrt(x).
    pub nu: f64,
    /// Sign of F'(x): +1 crossings go left-to-right, -1 right-to-left.
    pub fprime_sign: i8,
    pub fprime: f64,
    /// Root simplicity flag (false when a near-multiple root was detected).
    pub simple: bool,
    /// Ascending delays at which +- i nu are characteristic roots.
    pub tau_seq: Vec<f64>,
}

/// Direction of an eigenvalue pair crossing the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    LeftToRight,
    RightToLeft,
}

/// Full delay-induced stability picture at the target equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct SwitchAnalysis {
    pub roots: Vec<CrossingRoot>,
    /// Merged, ascending switch schedule.
    pub schedule: Vec<(f64, Crossing)>,
    /// Smallest switching delay; `None` when no switches exist (stable for
    /// every delay).
    pub tau_c: Option<f64>,
    /// Crossing frequency at tau_c.
    pub nu0: Option<f64>,
    pub eventually_unstable: bool,
}

/// Number of delays per root kept in the schedule.
pub const DEFAULT_SEQ_LEN: usize = 5;

/// Coefficients of P, Q from the closed forms in terms of K1, K2.
pub fn build_char_poly(params: &AlphaParams, target: &RegulationTarget) -> CharQuasiPoly {
    let (s, r, b, g) = (params.sigma, params.r, params.b, params.gamma);
    let xr2 = target.x_r * target.x_r;
    let k1 = xr2 + s * xr2 / b - s * r - g * (s + b);
    let k2 = 3.0 * xr2 - b * g - b * r;
    CharQuasiPoly {
        a2: b + s - g,
        a1: s * b + k1,
        a0: s * k2,
        b2: s + g,
        b1: s * b + s * s - k1,
        b0: s * s * b - s * k2,
        k1,
        k2,
    }
}

/// W(lambda, tau) = P(lambda) + Q(lambda) e^{-lambda tau}.
pub fn eval_w(poly: &CharQuasiPoly, lambda: Complex64, tau: f64) -> Complex64 {
    poly.p(lambda) + poly.q(lambda) * (-lambda * tau).exp()
}

/// d W / d lambda at fixed tau.
pub fn eval_w_prime(poly: &CharQuasiPoly, lambda: Complex64, tau: f64) -> Complex64 {
    poly.p_prime(lambda) + (poly.q_prime(lambda) - tau * poly.q(lambda)) * (-lambda * tau).exp()
}

/// Routh-Hurwitz check of the tau = 0 cubic
/// lambda^3 + (b + 2 sigma) lambda^2 + (2 sigma b + sigma^2) lambda + sigma^2 b.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RouthHurwitz {
    pub stable: bool,
    pub margin: f64,
    /// (b + 2s)(2sb + s^2) - s^2 b - 2s(s + b)^2, zero analytically.
    pub identity_residual: f64,
}

pub fn routh_hurwitz_tau0(params: &AlphaParams) -> RouthHurwitz {
    let (s, b) = (params.sigma, params.b);
    let c2 = b + 2.0 * s;
    let c1 = 2.0 * s * b + s * s;
    let c0 = s * s * b;
    let margin = c2 * c1 - c0;
    let identity_residual = margin - 2.0 * s * (s + b) * (s + b);
    RouthHurwitz { stable: c2 > 0.0 && c0 > 0.0 && margin > 0.0, margin, identity_residual }
}

/// The auxiliary cubic F(x) = |P(i nu)|^2 - |Q(i nu)|^2 with x = nu^2.
pub fn build_aux_cubic(params: &AlphaParams, target: &RegulationTarget) -> AuxCubic {
    let (s, b, g) = (params.sigma, params.b, params.gamma);
    let poly = build_char_poly(params, target);
    let (k1, k2) = (poly.k1, poly.k2);
    let c2 = b * b - 2.0 * b * g - 4.0 * s * g - 2.0 * k1;
    let c1 = 2.0 * s * b * (2.0 * k1 - k2) + s * s * (2.0 * b * g + 2.0 * k1 - 4.0 * k2 - s * s);
    let c0 = b * s * s * s * (2.0 * k2 - b * s);
    let delta = c2 * c2 - 3.0 * c1;
    let (x_star, x_star2) = if delta > 0.0 {
        let sq = delta.sqrt();
        (Some((-c2 + sq) / 3.0), Some((-c2 - sq) / 3.0))
    } else {
        (None, None)
    };
    AuxCubic { c0, c1, c2, delta, x_star, x_star2 }
}

/// Real positive roots of the cubic, ascending; companion-matrix eigenvalues
/// polished by Newton. Near-multiple roots are reported with `simple: false`.
pub fn cubic_positive_roots(aux: &AuxCubic) -> Vec<(f64, bool)> {
    let companion = Matrix3::new(
        0.0, 0.0, -aux.c0, //
        1.0, 0.0, -aux.c1, //
        0.0, 1.0, -aux.c2,
    );
    let eigs = companion.complex_eigenvalues();
    let coeff_scale = aux.scale();
    let mut reals: Vec<f64> = Vec::new();
    for e in eigs.iter() {
        if e.im.abs() < 1e-7 * (1.0 + e.re.abs()) {
            // Newton polish on F
            let mut x = e.re;
            for _ in 0..50 {
                let f = aux.eval(x);
                let fp = aux.eval_prime(x);
                if fp.abs() < 1e-300 {
                    break;
                }
                let dx = f / fp;
                x -= dx;
                if dx.abs() < 1e-14 * (1.0 + x.abs()) {
                    break;
                }
            }
            if aux.eval(x).abs() < 1e-9 * 1f64.max(aux.c0.abs()).max(coeff_scale) {
                reals.push(x);
            } else {
                reals.push(e.re); // unpolishable (e.g. complex pair misflagged); keep raw
            }
        }
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::new();
    for (i, &x) in reals.iter().enumerate() {
        if x <= 0.0 {
            continue;
        }
        let mut simple = true;
        for (j, &y) in reals.iter().enumerate() {
            if i != j && (x - y).abs() < 1e-6 * (1.0 + x.abs()) {
                simple = false;
            }
        }
        out.push((x, simple));
    }
    // drop duplicates from near-multiple clusters, keep one flagged entry
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6 * (1.0 + b.0.abs()));
    out
}

/// Delays tau_n = (theta + 2 n pi) / nu, n = 0..n_max, at which +- i nu are
/// characteristic roots; theta recovers the quadrant from the sin/cos pair.
pub fn delay_sequence(poly: &CharQuasiPoly, nu: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(nu > 0.0) {
        return Err(Error::Config(format!("nu must be positive, got {nu}")));
    }
    let i_nu = Complex64::new(0.0, nu);
    let p = poly.p(i_nu);
    let q = poly.q(i_nu);
    let denom = q.norm_sqr();
    if denom < 1e-300 {
        return Err(Error::DegenerateQ { nu });
    }
    let sin_t = (-p.re * q.im + q.re * p.im) / denom;
    let cos_t = -(p.re * q.re + p.im * q.im) / denom;
    let theta = sin_t.atan2(cos_t).rem_euclid(2.0 * std::f64::consts::PI);
    Ok((0..=n_max)
        .map(|n| (theta + 2.0 * std::f64::consts::PI * n as f64) / nu)
        .collect())
}

/// Full switch analysis: all crossing roots, their delay sequences, crossing
/// directions, the schedule, and the critical delay.
pub fn critical_delay(params: &AlphaParams, target: &RegulationTarget) -> Result<SwitchAnalysis> {
    let rh = routh_hurwitz_tau0(params);
    if !rh.stable {
        return Err(Error::UnstableAtZeroDelay);
    }
    let poly = build_char_poly(params, target);
    let aux = build_aux_cubic(params, target);
    let mut roots = Vec::new();
    for (x, simple) in cubic_positive_roots(&aux) {
        let nu = x.sqrt();
        let fprime = aux.eval_prime(x);
        let tau_seq = delay_sequence(&poly, nu, DEFAULT_SEQ_LEN - 1)?;
        roots.push(CrossingRoot {
            x,
            nu,
            fprime_sign: if fprime >= 0.0 { 1 } else { -1 },
            fprime,
            simple,
            tau_seq,
        });
    }

    let mut schedule: Vec<(f64, Crossing)> = Vec::new();
    for root in &roots {
        let dir = if root.fprime_sign > 0 { Crossing::LeftToRight } else { Crossing::RightToLeft };
        for &tau in &root.tau_seq {
            schedule.push((tau, dir));
        }
    }
    schedule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let (tau_c, nu0) = match schedule.first() {
        Some(&(tau, dir)) => {
            // tau = 0 is stable, so the first crossing must destabilize
            debug_assert_eq!(dir, Crossing::LeftToRight);
            let nu0 = roots
                .iter()
                .filter(|r| r.tau_seq.first().map(|t| (t - tau).abs() < 1e-12).unwrap_or(false))
                .map(|r| r.nu)
                .next();
            (Some(tau), nu0)
        }
        None => (None, None),
    };

    // Finitely many switches when the destabilizing sequence is the denser
    // one (smaller gap 2 pi / nu).
    let max_nu_l2r = roots
        .iter()
        .filter(|r| r.fprime_sign > 0)
        .map(|r| r.nu)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_nu = roots.iter().map(|r| r.nu).fold(f64::NEG_INFINITY, f64::max);
    let eventually_unstable = !roots.is_empty() && max_nu_l2r == max_nu;

    Ok(SwitchAnalysis { roots, schedule, tau_c, nu0, eventually_unstable })
}

/// F'(nu0^2): its sign is the sign of d Re(lambda)/d tau at the crossing.
pub fn transversality(aux: &AuxCubic, nu0: f64) -> Result<f64> {
    let value = aux.eval_prime(nu0 * nu0);
    let scale = aux.scale();
    if value.abs() < 1e-8 * scale {
        return Err(Error::DegenerateCrossing { value: value.abs(), scale });
    }
    Ok(value)
}

/// Newton iteration on W(., tau) from `guess`; the independent oracle for
/// eigenvalue motion across the critical delay.
pub fn newton_root(poly: &CharQuasiPoly, tau: f64, guess: Complex64) -> Result<Complex64> {
    let scale = poly.scale();
    let mut lambda = guess;
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let w = eval_w(poly, lambda, tau);
        residual = w.norm();
        if residual < 1e-12 * scale {
            return Ok(lambda);
        }
        let wp = eval_w_prime(poly, lambda, tau);
        if wp.norm() < 1e-12 {
            break;
        }
        lambda -= w / wp;
    }
    if residual < 1e-10 * scale {
        Ok(lambda)
    } else {
        Err(Error::RootTracking { iters: 50, residual })
    }
}
