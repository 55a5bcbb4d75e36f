//! Real-axis numerical Laplace inversion.
//!
//! Both methods sample `F` at `k ln 2 / t` for integer `k` only, so they need
//! nothing beyond real positive `q`. In double precision they are limited
//! to roughly seven or eight significant digits on smooth functions; the
//! weights grow like `10^(0.5 N)` and amplify rounding in `F`.

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GaverStehfest,
    /// Gaver functionals accelerated with Wynn's rho algorithm.
    GaverWynnRho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    pub method: Method,
    /// Number of transform evaluations; even, between 4 and 20.
    pub terms: usize,
    /// Times at which batch evaluations are requested.
    pub t_grid: Vec<f64>,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            method: Method::GaverStehfest,
            terms: 16,
            t_grid: Vec::new(),
        }
    }
}

impl InversionConfig {
    pub fn new(method: Method, terms: usize) -> Result<Self> {
        let cfg = Self {
            method,
            terms,
            t_grid: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_grid(mut self, t_grid: Vec<f64>) -> Result<Self> {
        self.t_grid = t_grid;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.terms.is_multiple_of(2) || !(4..=20).contains(&self.terms) {
            return domain(format!(
                "inversion terms must be even and in 4..=20, got {}",
                self.terms
            ));
        }
        if self.t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return domain("t grid must hold positive finite times");
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return domain("t grid must be strictly increasing");
        }
        Ok(())
    }
}

/// Stehfest weights `V_1..V_N`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact: Vec<f64> = (0..=2 * n)
        .scan(1.0f64, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();
    (1..=n)
        .map(|k| {
            let mut sum = 0.0;
            for j in k.div_ceil(2)..=k.min(half) {
                sum += (j as f64).powi(half as i32) * fact[2 * j]
                    / (fact[half - j] * fact[j] * fact[j - 1] * fact[k - j] * fact[2 * j - k]);
            }
            if (k + half).is_multiple_of(2) {
                sum
            } else {
                -sum
            }
        })
        .collect()
}

fn sample<F>(f: &mut F, q: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(q)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Inversion { q, value: v })
    }
}

/// Inverts a fallible transform at `t > 0`.
pub fn try_invert<F>(mut f: F, t: f64, cfg: &InversionConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("inversion time must be positive, got {t}"));
    }
    let l = std::f64::consts::LN_2 / t;
    match cfg.method {
        Method::GaverStehfest => {
            let v = stehfest_weights(cfg.terms);
            let mut acc = 0.0;
            for (k, vk) in v.iter().enumerate() {
                acc += vk * sample(&mut f, (k + 1) as f64 * l)?;
            }
            Ok(l * acc)
        }
        Method::GaverWynnRho => {
            let m = cfg.terms / 2;
            let values: Vec<f64> = (1..=2 * m)
                .map(|k| sample(&mut f, k as f64 * l))
                .collect::<Result<_>>()?;
            let functionals: Vec<f64> = (1..=m)
                .map(|n| gaver_functional(&values, n, l))
                .collect();
            Ok(wynn_rho(&functionals))
        }
    }
}

/// Inverts an infallible transform; non-finite samples become
/// [`Error::Inversion`].
pub fn invert<F>(f: F, t: f64, cfg: &InversionConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_invert(|q| Ok(f(q)), t, cfg)
}

/// `n (2n choose n) l sum_k (-1)^k (n choose k) F((n + k) l)`; `values[j]`
/// holds `F((j + 1) l)`.
fn gaver_functional(values: &[f64], n: usize, l: f64) -> f64 {
    let mut c = n as f64;
    for i in 1..=n {
        c *= (n + i) as f64 / i as f64;
    }
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=n {
        let term = binom * values[n + k - 1];
        sum += if k % 2 == 0 { term } else { -term };
        binom *= (n - k) as f64 / (k + 1) as f64;
    }
    c * l * sum
}

fn wynn_rho(seq: &[f64]) -> f64 {
    let m = seq.len();
    let mut prev = vec![0.0; m + 1];
    let mut cur = seq.to_vec();
    let mut best = *seq.last().unwrap_or(&f64::NAN);
    for k in 1..m {
        let mut next = Vec::with_capacity(m - k);
        for n in 0..m - k {
            let d = cur[n + 1] - cur[n];
            if d == 0.0 {
                return cur[n + 1];
            }
            next.push(prev[n + 1] + k as f64 / d);
        }
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}
