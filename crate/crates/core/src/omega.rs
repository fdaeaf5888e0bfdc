//! Image of the imaginary axis under the characteristic function: the curve
//! nu -> W(i nu, tau). The curve passes through the origin exactly at the
//! switching delays, giving an independent check on the critical delay.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AlphaParams, RegulationTarget};
use crate::spectral::{build_char_poly, eval_w, CharQuasiPoly};

/// Sampled curve nu -> W(i nu, tau) for nu in [-nu_max, nu_max].
#[derive(Debug, Clone, Serialize)]
pub struct OmegaContour {
    pub tau: f64,
    pub nu: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl OmegaContour {
    /// Smallest |W(i nu, tau)| over the sample.
    pub fn min_distance_to_origin(&self) -> f64 {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r.hypot(*i))
            .fold(f64::INFINITY, f64::min)
    }

    /// The nu of the sample point closest to the origin.
    pub fn closest_nu(&self) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for ((r, i), &nu) in self.re.iter().zip(&self.im).zip(&self.nu) {
            let d = r.hypot(*i);
            if d < best.0 {
                best = (d, nu);
            }
        }
        best.1
    }

    /// CSV export: header `nu,re_omega,im_omega`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nu,re_omega,im_omega")?;
        for ((r, i), nu) in self.re.iter().zip(&self.im).zip(&self.nu) {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", nu, r, i)?;
        }
        Ok(())
    }

    /// Minimal standalone SVG of the curve as one polyline, with axes.
    pub fn write_svg<W: Write>(&self, mut w: W) -> Result<()> {
        let (width, height) = (640.0f64, 640.0f64);
        let margin = 20.0f64;
        let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for (r, i) in self.re.iter().zip(&self.im) {
            lo_x = lo_x.min(*r);
            hi_x = hi_x.max(*r);
            lo_y = lo_y.min(*i);
            hi_y = hi_y.max(*i);
        }
        // keep the origin in frame; it is the feature of interest
        lo_x = lo_x.min(0.0);
        hi_x = hi_x.max(0.0);
        lo_y = lo_y.min(0.0);
        hi_y = hi_y.max(0.0);
        let span_x = (hi_x - lo_x).max(1e-12);
        let span_y = (hi_y - lo_y).max(1e-12);
        let sx = |x: f64| margin + (x - lo_x) / span_x * (width - 2.0 * margin);
        let sy = |y: f64| height - margin - (y - lo_y) / span_y * (height - 2.0 * margin);

        writeln!(
            w,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
        )?;
        writeln!(
            w,
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-width=\"1\"/>",
            sx(lo_x), sy(0.0), sx(hi_x), sy(0.0)
        )?;
        writeln!(
            w,
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-width=\"1\"/>",
            sx(0.0), sy(lo_y), sx(0.0), sy(hi_y)
        )?;
        write!(w, "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"")?;
        for (r, i) in self.re.iter().zip(&self.im) {
            write!(w, "{:.2},{:.2} ", sx(*r), sy(*i))?;
        }
        writeln!(w, "\"/>")?;
        writeln!(
            w,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#d62728\"/>",
            sx(0.0), sy(0.0)
        )?;
        writeln!(w, "</svg>")?;
        Ok(())
    }
}

/// Sample W(i nu, tau) at 2n + 1 points symmetric about nu = 0.
pub fn map_contour(poly: &CharQuasiPoly, tau: f64, nu_max: f64, n: usize) -> Result<OmegaContour> {
    if !(nu_max > 0.0) || n == 0 {
        return Err(Error::Config(format!("need nu_max > 0 and n > 0, got {nu_max}, {n}")));
    }
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("tau must be nonnegative, got {tau}")));
    }
    let total = 2 * n + 1;
    let mut nu = Vec::with_capacity(total);
    let mut re = Vec::with_capacity(total);
    let mut im = Vec::with_capacity(total);
    for k in 0..total {
        let v = -nu_max + 2.0 * nu_max * k as f64 / (total - 1) as f64;
        let w = eval_w(poly, Complex64::new(0.0, v), tau);
        nu.push(v);
        re.push(w.re);
        im.push(w.im);
    }
    Ok(OmegaContour { tau, nu, re, im })
}

/// True minimum of |W(i nu, tau)| over [0, nu_max]: a coarse scan at the
/// sample resolution, then golden-section refinement around the best sample.
/// The refinement matters because |dW/dnu| is large, so the sampled minimum
/// overestimates a genuine origin passage by orders of magnitude.
pub fn refined_min_distance(
    poly: &CharQuasiPoly,
    tau: f64,
    nu_max: f64,
    n: usize,
) -> Result<f64> {
    closest_approach(poly, tau, nu_max, n).map(|(_, d)| d)
}

/// (nu*, |W(i nu*, tau)|) at the closest approach to the origin.
fn closest_approach(
    poly: &CharQuasiPoly,
    tau: f64,
    nu_max: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if !(nu_max > 0.0) || n < 2 {
        return Err(Error::Config(format!("need nu_max > 0 and n >= 2, got {nu_max}, {n}")));
    }
    let dist = |nu: f64| eval_w(poly, Complex64::new(0.0, nu), tau).norm();
    let mut best_k = 0usize;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let d = dist(nu_max * k as f64 / n as f64);
        if d < best {
            best = d;
            best_k = k;
        }
    }
    let mut a = nu_max * best_k.saturating_sub(1) as f64 / n as f64;
    let mut b = nu_max * (best_k + 1).min(n) as f64 / n as f64;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = dist(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = dist(x2);
        }
    }
    let mid = 0.5 * (a + b);
    let d_mid = dist(mid);
    if d_mid < best {
        Ok((mid, d_mid))
    } else {
        Ok((nu_max * best_k as f64 / n as f64, best))
    }
}

/// Unwrapped change of arg W(i nu, tau) over nu in [-nu_max, nu_max], in
/// units of pi. Each origin passage (a root pair crossing the axis) drops
/// this by 4, so it jumps discontinuously at the switching delays and is the
/// robust quantity to bisect on.
pub fn axis_arg_change(poly: &CharQuasiPoly, tau: f64, nu_max: f64, n: usize) -> Result<f64> {
    if !(nu_max > 0.0) || n < 2 {
        return Err(Error::Config(format!("need nu_max > 0 and n >= 2, got {nu_max}, {n}")));
    }
    let total = 2 * n;
    let mut prev = eval_w(poly, Complex64::new(0.0, -nu_max), tau).arg();
    let mut acc = 0.0f64;
    for k in 1..=total {
        let nu = -nu_max + 2.0 * nu_max * k as f64 / total as f64;
        let arg = eval_w(poly, Complex64::new(0.0, nu), tau).arg();
        let mut d = arg - prev;
        // wrap into (-pi, pi]
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d <= -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        acc += d;
        prev = arg;
    }
    Ok(acc / std::f64::consts::PI)
}

/// Whether the curve passes through the origin, with the pass distance
/// measured against the fixed anchor W(0) = sigma^2 b.
pub fn origin_crossed(
    params: &AlphaParams,
    target: &RegulationTarget,
    tau: f64,
    nu_max: f64,
    n: usize,
) -> Result<bool> {
    let poly = build_char_poly(params, target);
    let anchor = params.sigma * params.sigma * params.b;
    Ok(refined_min_distance(&poly, tau, nu_max, n)? < 1e-3 * anchor)
}

/// Bisection on tau for the origin passage inside [lo, hi]; the bisection
/// quantity is the winding count [`axis_arg_change`], which must differ by at
/// least 2 (one root pair) between the ends. Refines to an interval of width
/// 1e-5 * (hi - lo).
pub fn crossing_scan(
    params: &AlphaParams,
    target: &RegulationTarget,
    lo: f64,
    hi: f64,
    nu_max: f64,
    n: usize,
) -> Result<f64> {
    if !(0.0 <= lo && lo < hi) {
        return Err(Error::Config(format!("need 0 <= lo < hi, got {lo}, {hi}")));
    }
    let poly = build_char_poly(params, target);
    let winding = |tau: f64| -> Result<i64> {
        Ok(axis_arg_change(&poly, tau, nu_max, n)?.round() as i64)
    };
    let w_lo = winding(lo)?;
    let w_hi = winding(hi)?;
    if (w_lo - w_hi).abs() < 2 {
        return Err(Error::NoBracket { lo, hi });
    }
    let tol = 1e-5 * (hi - lo);
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if winding(mid)? == w_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::critical_delay;

    fn setup(alpha: f64) -> (AlphaParams, RegulationTarget) {
        let p = AlphaParams::from_alpha(alpha).unwrap();
        let t = RegulationTarget::e_plus(&p);
        (p, t)
    }

    #[test]
    fn contour_is_conjugate_symmetric() {
        let (p, t) = setup(0.3);
        let poly = build_char_poly(&p, &t);
        let c = map_contour(&poly, 0.05, 30.0, 200).unwrap();
        let n = c.nu.len();
        for k in 0..n {
            let mirror = n - 1 - k;
            assert!((c.nu[k] + c.nu[mirror]).abs() < 1e-12);
            assert!((c.re[k] - c.re[mirror]).abs() < 1e-9 * (1.0 + c.re[k].abs()));
            assert!((c.im[k] + c.im[mirror]).abs() < 1e-9 * (1.0 + c.im[k].abs()));
        }
    }

    #[test]
    fn center_sample_is_w_at_zero() {
        let (p, t) = setup(0.7);
        let poly = build_char_poly(&p, &t);
        let c = map_contour(&poly, 0.02, 50.0, 100).unwrap();
        let mid = c.nu.len() / 2;
        assert!(c.nu[mid].abs() < 1e-12);
        let anchor = p.sigma * p.sigma * p.b;
        assert!((c.re[mid] - anchor).abs() < 1e-9 * anchor);
        assert!(c.im[mid].abs() < 1e-9 * anchor);
    }

    #[test]
    fn origin_passage_flips_across_tau_c() {
        for alpha in [0.0, 0.8, 1.0] {
            let (p, t) = setup(alpha);
            let sw = critical_delay(&p, &t).unwrap();
            let tau_c = sw.tau_c.unwrap();
            let nu_max = 2.0 * sw.nu0.unwrap();
            // need a dense sample so the minimum approximates the true pass
            assert!(!origin_crossed(&p, &t, 0.2 * tau_c, nu_max, 4000).unwrap());
            assert!(origin_crossed(&p, &t, tau_c, nu_max, 4000).unwrap());
        }
    }

    #[test]
    fn crossing_scan_recovers_critical_delay() {
        let (p, t) = setup(0.0);
        let sw = critical_delay(&p, &t).unwrap();
        let tau_c = sw.tau_c.unwrap();
        let nu_max = 2.0 * sw.nu0.unwrap();
        let found = crossing_scan(&p, &t, 0.5 * tau_c, 1.2 * tau_c, nu_max, 4000).unwrap();
        assert!(
            (found - tau_c).abs() < 5e-3 * tau_c,
            "scan found {found}, analytic {tau_c}"
        );
    }

    #[test]
    fn winding_drops_by_four_pi_at_tau_c() {
        let (p, t) = setup(0.0);
        let poly = build_char_poly(&p, &t);
        let sw = critical_delay(&p, &t).unwrap();
        let tau_c = sw.tau_c.unwrap();
        let nu_max = 2.0 * sw.nu0.unwrap();
        let below = axis_arg_change(&poly, 0.99 * tau_c, nu_max, 4000).unwrap();
        let above = axis_arg_change(&poly, 1.01 * tau_c, nu_max, 4000).unwrap();
        assert!((below - 3.0).abs() < 0.5, "below: {below} pi");
        assert!((above + 1.0).abs() < 0.5, "above: {above} pi");
    }

    #[test]
    fn crossing_scan_requires_bracket() {
        let (p, t) = setup(0.0);
        let sw = critical_delay(&p, &t).unwrap();
        let tau_c = sw.tau_c.unwrap();
        let nu_max = 2.0 * sw.nu0.unwrap();
        let err = crossing_scan(&p, &t, 0.1 * tau_c, 0.5 * tau_c, nu_max, 4000);
        assert!(matches!(err, Err(Error::NoBracket { .. })));
    }

    #[test]
    fn csv_header_and_columns() {
        let (p, t) = setup(0.0);
        let poly = build_char_poly(&p, &t);
        let c = map_contour(&poly, 0.05, 10.0, 4).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "nu,re_omega,im_omega");
        assert_eq!(lines.count(), 9);
    }

    #[test]
    fn svg_is_well_formed_polyline() {
        let (p, t) = setup(0.0);
        let poly = build_char_poly(&p, &t);
        let c = map_contour(&poly, 0.05, 10.0, 50).unwrap();
        let mut buf = Vec::new();
        c.write_svg(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert!(text.contains("<polyline"));
    }

    #[test]
    fn rejects_bad_arguments() {
        let (p, t) = setup(0.0);
        let poly = build_char_poly(&p, &t);
        assert!(map_contour(&poly, 0.05, -1.0, 10).is_err());
        assert!(map_contour(&poly, 0.05, 10.0, 0).is_err());
        assert!(map_contour(&poly, -0.1, 10.0, 10).is_err());
        assert!(crossing_scan(&p, &t, 0.2, 0.1, 10.0, 10).is_err());
    }
}
