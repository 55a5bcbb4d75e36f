//! Closed forms for two-regime diffusions switching at `alpha`.
//!
//! These are written out independently of the general pipeline so that each
//! can be checked against the other.

use crate::error::{domain, Result};

fn check_rate(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        domain(format!("q must be positive and finite, got {q}"))
    }
}

fn check_bm(mu_a: f64, mu_b: f64) -> Result<()> {
    if mu_a < 0.0 && mu_b < 0.0 && mu_a.is_finite() && mu_b.is_finite() {
        Ok(())
    } else {
        domain(format!(
            "switching Brownian closed form needs mu_A < 0 and mu_B < 0, got {mu_a}, {mu_b}"
        ))
    }
}

fn bm_denominator(mu_a: f64, mu_b: f64, q: f64) -> f64 {
    mu_a - mu_b + (mu_a * mu_a + 2.0 * q).sqrt() + (mu_b * mu_b + 2.0 * q).sqrt()
}

/// `E^0[exp(-q lambda_0)]` for unit-volatility Brownian motion with drift
/// `mu_a` on `[0, inf)` and `mu_b` below 0.
pub fn switching_bm_laplace(mu_a: f64, mu_b: f64, q: f64) -> Result<f64> {
    check_bm(mu_a, mu_b)?;
    check_rate(q)?;
    Ok(-2.0 * mu_b / bm_denominator(mu_a, mu_b, q))
}

/// `G_q(0, 0)` for the same process.
pub fn switching_bm_green(mu_a: f64, mu_b: f64, q: f64) -> Result<f64> {
    check_bm(mu_a, mu_b)?;
    check_rate(q)?;
    Ok(1.0 / bm_denominator(mu_a, mu_b, q))
}

/// `(G_q^A(0, 0), G_q^B(0, 0))` for the same process.
pub fn switching_bm_reflected(mu_a: f64, mu_b: f64, q: f64) -> Result<(f64, f64)> {
    check_bm(mu_a, mu_b)?;
    check_rate(q)?;
    Ok((
        1.0 / ((mu_a * mu_a + 2.0 * q).sqrt() + mu_a),
        1.0 / ((mu_b * mu_b + 2.0 * q).sqrt() - mu_b),
    ))
}

/// `nu = mu / sigma^2 - 1/2`, the drift of `ln X / sigma` per unit variance.
pub fn gbm_nu(mu: f64, sigma: f64) -> f64 {
    mu / (sigma * sigma) - 0.5
}

/// `E^alpha[exp(-q lambda_alpha)]` for a geometric Brownian motion with
/// parameters `(mu_a, sigma_a)` on `[alpha, inf)` and `(mu_b, sigma_b)`
/// below `alpha`.
///
/// With `gamma_i = sqrt(nu_i^2 + 2q / sigma_i^2)` the transform is
/// `-2 nu_B / (nu_A + gamma_A - nu_B + gamma_B)`. It does not depend on
/// `alpha`: the process started at `alpha` is invariant under `X -> X / alpha`.
pub fn switching_gbm_laplace(
    mu_a: f64,
    sigma_a: f64,
    mu_b: f64,
    sigma_b: f64,
    alpha: f64,
    q: f64,
) -> Result<f64> {
    if !(sigma_a > 0.0 && sigma_b > 0.0 && sigma_a.is_finite() && sigma_b.is_finite()) {
        return domain(format!("volatilities must be positive, got {sigma_a}, {sigma_b}"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    check_rate(q)?;
    let nu_a = gbm_nu(mu_a, sigma_a);
    let nu_b = gbm_nu(mu_b, sigma_b);
    if !(nu_a < 0.0 && nu_b < 0.0) {
        return domain(format!(
            "switching GBM closed form needs nu_A < 0 and nu_B < 0, got {nu_a}, {nu_b}"
        ));
    }
    let gamma_a = (nu_a * nu_a + 2.0 * q / (sigma_a * sigma_a)).sqrt();
    let gamma_b = (nu_b * nu_b + 2.0 * q / (sigma_b * sigma_b)).sqrt();
    Ok(-2.0 * nu_b / (nu_a + gamma_a - nu_b + gamma_b))
}
