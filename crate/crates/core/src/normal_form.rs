//! Hopf normal form at the first stability switch: center-manifold reduction
//! of the delay system, the cubic coefficient c1(0), and the classification
//! numbers mu2 (direction), beta2 (orbital stability) and T2 (period drift).

use num_complex::Complex64;
use serde::Serialize;

use crate::cjson;
use crate::error::{Error, Result};
use crate::model::{AlphaParams, RegulationTarget};
use crate::spectral::{build_char_poly, eval_w, CharQuasiPoly};

type C = Complex64;
type Vec3 = [C; 3];
type Mat3 = [[C; 3]; 3];

/// Which side of tau_c the periodic orbit exists on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// mu2 > 0: orbits exist for tau > tau_c.
    Supercritical,
    /// mu2 < 0: orbits exist for tau < tau_c.
    Subcritical,
}

/// Orbital stability of the bifurcating periodic solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStability {
    /// beta2 < 0.
    Stable,
    /// beta2 > 0.
    Unstable,
}

/// Everything the reduction produces at (tau_c, nu0).
#[derive(Debug, Clone, Serialize)]
pub struct NormalForm {
    pub tau_c: f64,
    pub nu0: f64,
    /// omega = nu0 tau_c, the frequency in delay-rescaled time.
    pub omega: f64,
    #[serde(with = "cjson::vec3")]
    pub q: Vec3,
    #[serde(with = "cjson::vec3")]
    pub q_star: Vec3,
    #[serde(with = "cjson")]
    pub d_norm: C,
    #[serde(with = "cjson")]
    pub g20: C,
    #[serde(with = "cjson")]
    pub g11: C,
    #[serde(with = "cjson")]
    pub g02: C,
    #[serde(with = "cjson")]
    pub g21: C,
    #[serde(with = "cjson")]
    pub c1: C,
    #[serde(with = "cjson")]
    pub lambda_prime: C,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub direction: Direction,
    pub orbit_stability: OrbitStability,
}

/// Jacobians of the controlled field with respect to the current state (B1)
/// and the delayed state (B2), at the regulation target.
pub fn delay_matrices(params: &AlphaParams, target: &RegulationTarget) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let (s, r, b, g) = (params.sigma, params.r, params.b, params.gamma);
    let x_r = target.x_r;
    let a = r - x_r * x_r / b;
    let b1 = [[-s, s, 0.0], [a, g, -x_r], [x_r, x_r, -b]];
    let b2 = [[0.0, 0.0, 0.0], [-a, -(g + s), x_r], [0.0, 0.0, 0.0]];
    (b1, b2)
}

fn matvec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [C::new(0.0, 0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

fn dot_conj(a: &Vec3, b: &Vec3) -> C {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

fn conj3(v: &Vec3) -> Vec3 {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

fn scale3(v: &Vec3, s: C) -> Vec3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

fn real_to_complex(m: &[[f64; 3]; 3]) -> Mat3 {
    let mut out = [[C::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = C::new(m[i][j], 0.0);
        }
    }
    out
}

/// Partial-pivot solve of a complex 3x3 system; rejects near-singular systems
/// (a pivot-ratio condition estimate above 1e10 signals that 2 i nu0 or 0
/// resonates with the spectrum of the delayed linearization).
fn solve3(m: &Mat3, rhs: &Vec3) -> Result<Vec3> {
    let mut a = *m;
    let mut b = *rhs;
    let mut pivots = [0.0f64; 3];
    for col in 0..3 {
        let mut best = col;
        for row in col + 1..3 {
            if a[row][col].norm() > a[best][col].norm() {
                best = row;
            }
        }
        a.swap(col, best);
        b.swap(col, best);
        let pivot = a[col][col];
        pivots[col] = pivot.norm();
        if pivot.norm() < 1e-300 {
            return Err(Error::Resonance { cond: f64::INFINITY });
        }
        for row in col + 1..3 {
            let factor = a[row][col] / pivot;
            for k in col..3 {
                let sub = factor * a[col][k];
                a[row][k] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    let cond = pivots.iter().fold(0.0f64, |m, &p| m.max(p))
        / pivots.iter().fold(f64::INFINITY, |m, &p| m.min(p));
    if cond > 1e10 {
        return Err(Error::Resonance { cond });
    }
    let mut x = [C::new(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Right eigenvector q of the delayed linearization at lambda = i nu0,
/// normalized to q1 = 1.
pub fn right_eigenvector(params: &AlphaParams, target: &RegulationTarget, nu0: f64) -> Result<Vec3> {
    let (s, b) = (params.sigma, params.b);
    let x_r = target.x_r;
    let i_nu = C::new(0.0, nu0);
    let d = s * (i_nu + b);
    if d.norm() < 1e-12 {
        return Err(Error::DegenerateEigenvector);
    }
    Ok([
        C::new(1.0, 0.0),
        (i_nu + s) / s,
        x_r * (2.0 * s + i_nu) / d,
    ])
}

/// Unnormalized left eigenvector (adjoint direction) at lambda = i nu0, first
/// component 1; scaling to biorthonormality happens via [`NormalForm::d_norm`].
pub fn left_eigenvector(
    params: &AlphaParams,
    target: &RegulationTarget,
    tau_c: f64,
    nu0: f64,
) -> Result<Vec3> {
    let (s, r, b) = (params.sigma, params.r, params.b);
    let x_r = target.x_r;
    let i_nu = C::new(0.0, nu0);
    let omega = nu0 * tau_c;
    let den = C::new(2.0 * b * x_r * x_r - r * b * b, nu0 * (r * b - x_r * x_r));
    let one_minus_e = C::new(1.0, 0.0) - C::new(0.0, omega).exp();
    if den.norm() < 1e-12 || one_minus_e.norm() < 1e-12 {
        return Err(Error::DegenerateEigenvector);
    }
    Ok([
        C::new(1.0, 0.0),
        b * (i_nu - s) * (b - i_nu) / (one_minus_e * den),
        -x_r * b * (i_nu - s) / den,
    ])
}

/// The polarized quadratic part of the delay functional. Arguments are
/// (value at theta = 0, value at theta = -1) pairs; the result is
/// tau_c * (0, -[u1 v3 + v1 u3](0) + [u1 v3 + v1 u3](-1), [u1 v2 + v1 u2](0)),
/// twice the symmetric bilinear form of the quadratic terms.
fn f_quad(tau_c: f64, u: (&Vec3, &Vec3), v: (&Vec3, &Vec3)) -> Vec3 {
    let (u0, um1) = u;
    let (v0, vm1) = v;
    [
        C::new(0.0, 0.0),
        (-(u0[0] * v0[2] + v0[0] * u0[2]) + (um1[0] * vm1[2] + vm1[0] * um1[2])) * tau_c,
        (u0[0] * v0[1] + v0[0] * u0[1]) * tau_c,
    ]
}

/// d lambda / d tau at a characteristic root, by implicit differentiation of
/// P(lambda) + Q(lambda) e^{-lambda tau} = 0.
pub fn lambda_prime(poly: &CharQuasiPoly, lambda: C, tau: f64) -> C {
    let e = (-lambda * tau).exp();
    let q = poly.q(lambda);
    lambda * q * e / (poly.p_prime(lambda) + (poly.q_prime(lambda) - tau * q) * e)
}

/// Full center-manifold reduction at the critical pair (tau_c, nu0).
pub fn hopf_normal_form(
    params: &AlphaParams,
    target: &RegulationTarget,
    tau_c: f64,
    nu0: f64,
) -> Result<NormalForm> {
    hopf_normal_form_with_phase(params, target, tau_c, nu0, 0.0)
}

/// Same reduction with the eigenvector gauge q -> q e^{i phase}; mu2, beta2
/// and T2 are invariant under the phase.
pub fn hopf_normal_form_with_phase(
    params: &AlphaParams,
    target: &RegulationTarget,
    tau_c: f64,
    nu0: f64,
    phase: f64,
) -> Result<NormalForm> {
    let poly = build_char_poly(params, target);
    let scale = poly.scale();
    let residual = eval_w(&poly, C::new(0.0, nu0), tau_c).norm();
    if residual > 1e-6 * scale {
        return Err(Error::NotCritical { tau: tau_c, nu: nu0, residual });
    }

    let omega = nu0 * tau_c;
    let e = C::new(0.0, -omega).exp();
    let gauge = C::new(0.0, phase).exp();
    let q = scale3(&right_eigenvector(params, target, nu0)?, gauge);
    let q_hat_star = left_eigenvector(params, target, tau_c, nu0)?;

    let (b1r, b2r) = delay_matrices(params, target);
    let b1 = real_to_complex(&b1r);
    let b2 = real_to_complex(&b2r);

    // biorthonormal scaling: <q*, q> = Dbar [qhat*^H q + tau e^{-i omega} qhat*^H B2 q] = 1
    let b2q = matvec(&b2, &q);
    let raw = dot_conj(&q_hat_star, &q) + tau_c * e * dot_conj(&q_hat_star, &b2q);
    if raw.norm() < 1e-12 {
        return Err(Error::DegenerateEigenvector);
    }
    let d_bar = C::new(1.0, 0.0) / raw;
    let d_norm = d_bar.conj();
    let q_star = scale3(&q_hat_star, d_norm);
    // bar{q*}(0), the row vector every g-coefficient starts with
    let qs0 = conj3(&q_star);
    let row = |v: &Vec3| qs0[0] * v[0] + qs0[1] * v[1] + qs0[2] * v[2];

    let qm1 = scale3(&q, e);
    let qb = conj3(&q);
    let qbm1 = conj3(&qm1);
    let qf = (&q, &qm1);
    let qbf = (&qb, &qbm1);

    let g20 = row(&f_quad(tau_c, qf, qf));
    let g11 = row(&f_quad(tau_c, qf, qbf));
    let g02 = row(&f_quad(tau_c, qbf, qbf));

    // particular solutions of the center-manifold equations at e^{2 i omega}
    // and constant forcing
    let e2 = e * e;
    let two_i_nu = C::new(0.0, 2.0 * nu0);
    let mut g_mat = [[C::new(0.0, 0.0); 3]; 3];
    let mut gp_mat = [[C::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let diag = if i == j { two_i_nu } else { C::new(0.0, 0.0) };
            g_mat[i][j] = diag - b1[i][j] - b2[i][j] * e2;
            gp_mat[i][j] = -(b1[i][j] + b2[i][j]);
        }
    }
    let rhs1 = f_quad(1.0, qf, qf);
    let rhs2 = f_quad(1.0, qf, qbf);
    let e1 = solve3(&g_mat, &rhs1)?;
    let e2_vec = solve3(&gp_mat, &rhs2)?;

    let i_over = C::new(0.0, 1.0 / omega);
    let w20_at = |theta: f64| -> Vec3 {
        let ph = C::new(0.0, theta * omega).exp();
        let mut out = [C::new(0.0, 0.0); 3];
        for i in 0..3 {
            out[i] = i_over * g20 * q[i] * ph
                + i_over / 3.0 * g02.conj() * qb[i] / ph
                + e1[i] * ph * ph;
        }
        out
    };
    let w11_at = |theta: f64| -> Vec3 {
        let ph = C::new(0.0, theta * omega).exp();
        let mut out = [C::new(0.0, 0.0); 3];
        for i in 0..3 {
            out[i] = -i_over * g11 * q[i] * ph + i_over * g11.conj() * qb[i] / ph + e2_vec[i];
        }
        out
    };

    let w20_0 = w20_at(0.0);
    let w20_m1 = w20_at(-1.0);
    let w11_0 = w11_at(0.0);
    let w11_m1 = w11_at(-1.0);
    let t1 = f_quad(tau_c, qf, (&w11_0, &w11_m1));
    let t2v = f_quad(tau_c, qbf, (&w20_0, &w20_m1));
    let g21 = 2.0 * (row(&t1) + 0.5 * row(&t2v));

    let c1 = C::new(0.0, 1.0) / (2.0 * nu0)
        * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0)
        + g21 / 2.0;

    let lp = lambda_prime(&poly, C::new(0.0, nu0), tau_c);
    if lp.re <= 0.0 {
        return Err(Error::NonpositiveCrossingSpeed(lp.re));
    }
    let mu2 = -c1.re / lp.re;
    let beta2 = 2.0 * c1.re;
    let t2 = -(c1.im + mu2 * lp.im) / (tau_c * nu0);

    Ok(NormalForm {
        tau_c,
        nu0,
        omega,
        q,
        q_star,
        d_norm,
        g20,
        g11,
        g02,
        g21,
        c1,
        lambda_prime: lp,
        mu2,
        beta2,
        t2,
        direction: if mu2 > 0.0 { Direction::Supercritical } else { Direction::Subcritical },
        orbit_stability: if beta2 < 0.0 { OrbitStability::Stable } else { OrbitStability::Unstable },
    })
}
