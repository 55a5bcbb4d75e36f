//! Parabolic cylinder function `D_nu(z)` for real `nu <= 0`.
//!
//! Uses the integral representation
//! `D_nu(z) = exp(-z^2/4) / Gamma(-nu) * int_0^inf t^(-nu-1) exp(-z t - t^2/2) dt`,
//! evaluated in log space around the peak of the integrand. The integrand
//! is positive, so the result is positive and no cancellation occurs for
//! either sign of `z`.

use libm::lgamma as ln_gamma;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// `ln D_nu(z)` for `nu <= 0`.
pub fn ln_parabolic_cylinder_d(order: f64, z: f64) -> Result<f64> {
    if !(order <= 0.0) || !order.is_finite() {
        return Err(Error::Domain(format!(
            "parabolic cylinder order must be finite and <= 0, got {order}"
        )));
    }
    if !z.is_finite() {
        return Err(Error::Domain(format!("argument must be finite, got {z}")));
    }
    let a = -order;
    if a == 0.0 {
        return Ok(-0.25 * z * z);
    }
    let ln_i = if a >= 1.0 {
        ln_integral_regular(a, z)
    } else {
        ln_integral_substituted(a, z)
    };
    let v = -0.25 * z * z - ln_gamma(a) + ln_i;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("D_{order}({z}) is not representable")))
    }
}

/// `D_nu(z)` for `nu <= 0`; overflow is a [`Error::Range`].
pub fn parabolic_cylinder_d(order: f64, z: f64) -> Result<f64> {
    let ln = ln_parabolic_cylinder_d(order, z)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Range(format!("D_{order}({z}) overflows")));
    }
    Ok(ln.exp())
}

const TOL: f64 = 1e-14;
// exp(-x^2/2) below 1e-31 past this distance from the peak
const REACH: f64 = 12.0;

/// `ln int_0^inf t^(a-1) exp(-z t - t^2/2) dt` for `a >= 1`. The log
/// integrand has second derivative <= -1, so it is bounded by a Gaussian
/// of unit width about its peak.
fn ln_integral_regular(a: f64, z: f64) -> f64 {
    let am1 = a - 1.0;
    let peak = 0.5 * (-z + (z * z + 4.0 * am1).sqrt());
    let g = |t: f64| {
        let lt = if am1 == 0.0 { 0.0 } else { am1 * t.ln() };
        lt - z * t - 0.5 * t * t
    };
    let g_peak = if peak > 0.0 { g(peak) } else { 0.0 };
    let lo = (peak - REACH).max(0.0);
    let hi = peak + REACH;
    let f = |t: f64| {
        if t <= 0.0 {
            if am1 == 0.0 {
                (-g_peak).exp()
            } else {
                0.0
            }
        } else {
            (g(t) - g_peak).exp()
        }
    };
    let tol = Tolerance::relative(TOL);
    let mut total = 0.0;
    if peak > lo {
        total += quad::integrate(f, lo, peak, tol).value;
    }
    total += quad::integrate(f, peak.max(lo), hi, tol).value;
    g_peak + total.ln()
}

/// Same integral for `0 < a < 1` after `t = u^(1/a)`, which removes the
/// endpoint singularity: `(1/a) int_0^inf exp(-z t(u) - t(u)^2/2) du`.
fn ln_integral_substituted(a: f64, z: f64) -> f64 {
    let peak = (-z).max(0.0);
    let h = |t: f64| -z * t - 0.5 * t * t;
    let h_peak = h(peak);
    let inv_a = 1.0 / a;
    let f = |u: f64| {
        let t = u.powf(inv_a);
        (h(t) - h_peak).exp()
    };
    let tol = Tolerance::relative(TOL);
    let u_lo = (peak - REACH).max(0.0).powf(a);
    let u_peak = peak.powf(a);
    let u_hi = (peak + REACH).powf(a);
    let mut total = 0.0;
    if u_peak > u_lo {
        total += quad::integrate(f, u_lo, u_peak, tol).value;
    }
    total += quad::integrate(f, u_peak, u_hi, tol).value;
    h_peak - a.ln() + total.ln()
}
