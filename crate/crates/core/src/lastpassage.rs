//! Law of the last passage time `lambda_alpha = sup{t : X_t = alpha}`.
//!
//! Starting from `x`, the transform splits into the probability of never
//! reaching `alpha` (an atom at 0) and a part built from the reflected Green
//! functions at `alpha`. Densities and distribution functions come from
//! numerically inverting the continuous part.

use rayon::prelude::*;

use crate::diffusion::DiffusionSpec;
use crate::green::{GreenKit, GreenQ};
use crate::error::{domain, Result};
use crate::inversion::{try_invert, InversionConfig};
use crate::quad::{self, Tolerance};

/// Tail mass beyond the support returned by [`LastPassageAnalyzer::support`].
pub const SUPPORT_TAIL: f64 = 1e-3;
/// Raw inverted densities below this are reported as ringing.
pub const RINGING_FLOOR: f64 = -1e-6;

/// Components of the transform at `alpha` for one `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factors {
    pub q: f64,
    pub laplace: f64,
    /// `G^A(alpha, alpha) / (G^A(alpha, alpha) + G^B(alpha, alpha))`
    pub factor_a: f64,
    /// `G^B(alpha, alpha) / G_0(alpha, alpha)`
    pub factor_b: f64,
    /// Killing rate `1 / G^B(alpha, alpha)`.
    pub gamma: f64,
    /// `gamma G^A / (1 + gamma G^A)`, algebraically equal to `factor_a`.
    pub factor_a_via_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub t: f64,
    /// Inverted density clamped at zero.
    pub density: f64,
    /// Inverted density as computed.
    pub raw: f64,
    pub cdf: f64,
    /// `raw` fell below [`RINGING_FLOOR`].
    pub ringing: bool,
}

/// Normalization check of an inverted density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassReport {
    /// Support end `T` with `1 - cdf(T) <` [`SUPPORT_TAIL`].
    pub support: f64,
    /// `int_0^T density`.
    pub integral: f64,
    /// `1 - cdf(T)`.
    pub tail: f64,
    /// Atom at zero, the escape probability.
    pub atom: f64,
}

impl MassReport {
    /// Deviation of `atom + int_0^T density` from one.
    pub fn defect(&self) -> f64 {
        (self.atom + self.integral - 1.0).abs()
    }
}

/// Distribution function tabulated on a grid uniform in `sqrt(t)`, for
/// cheap repeated evaluation (for example against many Monte Carlo samples).
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    du: f64,
    values: Vec<f64>,
}

impl CdfTable {
    /// Linear interpolation in `sqrt(t)`; zero below the origin and the last
    /// tabulated value past the end.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let pos = t.sqrt() / self.du;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let w = pos - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Largest tabulated time.
    pub fn end(&self) -> f64 {
        let u = self.du * (self.values.len() - 1) as f64;
        u * u
    }
}

#[derive(Debug, Clone)]
pub struct LastPassageAnalyzer {
    kit: GreenKit,
    inversion: InversionConfig,
    g0_alpha: f64,
}

impl LastPassageAnalyzer {
    pub fn new(spec: &DiffusionSpec) -> Result<Self> {
        Self::from_kit(GreenKit::new(spec))
    }

    pub fn from_kit(kit: GreenKit) -> Result<Self> {
        let alpha = kit.alpha();
        let g0_alpha = kit.zero()?.green(alpha, alpha)?;
        Ok(Self {
            kit,
            inversion: InversionConfig::default(),
            g0_alpha,
        })
    }

    pub fn with_inversion(mut self, inversion: InversionConfig) -> Result<Self> {
        inversion.validate()?;
        self.inversion = inversion;
        Ok(self)
    }

    pub fn kit(&self) -> &GreenKit {
        &self.kit
    }

    pub fn spec(&self) -> &DiffusionSpec {
        self.kit.spec()
    }

    pub fn alpha(&self) -> f64 {
        self.kit.alpha()
    }

    pub fn inversion(&self) -> &InversionConfig {
        &self.inversion
    }

    /// `G_0(alpha, alpha)`.
    pub fn green_zero_alpha(&self) -> f64 {
        self.g0_alpha
    }

    fn factors_from(&self, g: &GreenQ) -> Factors {
        let ga = g.green_a_alpha();
        let gb = g.green_b_alpha();
        let factor_a = ga / (ga + gb);
        let factor_b = gb / self.g0_alpha;
        let gamma = 1.0 / gb;
        Factors {
            q: g.q(),
            laplace: factor_a * factor_b,
            factor_a,
            factor_b,
            gamma,
            factor_a_via_rate: gamma * ga / (1.0 + gamma * ga),
        }
    }

    pub fn factors(&self, q: f64) -> Result<Factors> {
        Ok(self.factors_from(&self.kit.at(q)?))
    }

    /// `E^alpha[exp(-q lambda_alpha)]`.
    pub fn laplace_at_alpha(&self, q: f64) -> Result<f64> {
        Ok(self.factors(q)?.laplace)
    }

    /// `E^x[exp(-q lambda_alpha)]` through the reflected Green functions.
    pub fn laplace_from(&self, q: f64, x: f64) -> Result<f64> {
        let g = self.kit.at(q)?;
        let escape = self.escape_probability(x)?;
        let alpha = self.alpha();
        let ga = g.green_a_alpha();
        let gb = g.green_b_alpha();
        let part = if x >= alpha {
            g.green_a(x, alpha)? / (ga + gb) * gb / self.g0_alpha
        } else {
            g.green_b(x, alpha)? / (ga + gb) * ga / self.g0_alpha
        };
        Ok(escape + part)
    }

    /// `P^x(H_alpha = inf) + G_q(x, alpha) / G_0(alpha, alpha)`, using the
    /// original Green function only.
    pub fn laplace_direct(&self, q: f64, x: f64) -> Result<f64> {
        let g = self.kit.at(q)?;
        Ok(self.escape_probability(x)? + g.green(x, self.alpha())? / self.g0_alpha)
    }

    /// `P^x(H_alpha = inf)`, the atom of `lambda_alpha` at zero.
    pub fn escape_probability(&self, x: f64) -> Result<f64> {
        let spec = self.spec();
        let alpha = self.alpha();
        let case = spec.case();
        if x == alpha {
            spec.scale(x)?;
            return Ok(0.0);
        }
        if x > alpha {
            if !case.right_attracting() {
                spec.scale(x)?;
                return Ok(0.0);
            }
            Ok(spec.scale_difference(alpha, x)? / spec.scale_to_right(alpha)?)
        } else {
            if !case.left_attracting() {
                spec.scale(x)?;
                return Ok(0.0);
            }
            Ok(spec.scale_difference(x, alpha)? / spec.scale_from_left(alpha)?)
        }
    }

    /// `gamma_q = 1 / G_q^B(alpha, alpha)`.
    pub fn killing_rate(&self, q: f64) -> Result<f64> {
        Ok(self.factors(q)?.gamma)
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            domain(format!("t must be positive and finite, got {t}"))
        }
    }

    /// Inverted density of the continuous part, before clamping.
    pub fn density_raw(&self, t: f64, x: f64) -> Result<f64> {
        Self::check_time(t)?;
        let atom = self.escape_probability(x)?;
        try_invert(|q| Ok(self.laplace_from(q, x)? - atom), t, &self.inversion)
    }

    /// Density of the continuous part of `lambda_alpha` under `P^x`,
    /// clamped at zero.
    pub fn density(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.density_raw(t, x)?.max(0.0))
    }

    /// `P^x(lambda_alpha <= t)`, including the atom at zero.
    pub fn cdf(&self, t: f64, x: f64) -> Result<f64> {
        Self::check_time(t)?;
        let atom = self.escape_probability(x)?;
        let cont = try_invert(
            |q| Ok((self.laplace_from(q, x)? - atom) / q),
            t,
            &self.inversion,
        )?;
        Ok((atom + cont).clamp(0.0, 1.0))
    }

    pub fn point(&self, t: f64, x: f64) -> Result<DensityPoint> {
        let raw = self.density_raw(t, x)?;
        Ok(DensityPoint {
            t,
            density: raw.max(0.0),
            raw,
            cdf: self.cdf(t, x)?,
            ringing: raw < RINGING_FLOOR,
        })
    }

    /// Density and distribution on a time grid, evaluated in parallel.
    pub fn distribution(&self, ts: &[f64], x: f64) -> Result<Vec<DensityPoint>> {
        ts.par_iter().map(|&t| self.point(t, x)).collect()
    }

    /// Same as [`Self::distribution`] on the configured grid.
    pub fn distribution_on_grid(&self, x: f64) -> Result<Vec<DensityPoint>> {
        self.distribution(&self.inversion.t_grid, x)
    }

    /// Smallest `T = 2^k` with `1 - cdf(T) < 1e-3`, confirmed at `2T`.
    pub fn support(&self, x: f64) -> Result<f64> {
        let mut t = 1.0f64 / 64.0;
        for _ in 0..80 {
            let tail = 1.0 - self.cdf(t, x)?;
            if tail < SUPPORT_TAIL {
                let tail2 = 1.0 - self.cdf(2.0 * t, x)?;
                if tail2 < SUPPORT_TAIL {
                    return Ok(t);
                }
            }
            t *= 2.0;
        }
        domain(format!("no support found for the last passage time from x = {x}"))
    }

    /// Tabulates `cdf(., x)` on `[0, 2T]` with `T` the support, at `points`
    /// nodes beyond the origin.
    pub fn cdf_table(&self, x: f64, points: usize) -> Result<CdfTable> {
        if points == 0 {
            return domain("a distribution table needs at least one node");
        }
        let end = 2.0 * self.support(x)?;
        let du = end.sqrt() / points as f64;
        let atom = self.escape_probability(x)?;
        let mut values = vec![atom];
        let rest: Vec<f64> = (1..=points)
            .into_par_iter()
            .map(|i| {
                let u = du * i as f64;
                self.cdf(u * u, x)
            })
            .collect::<Result<_>>()?;
        values.extend(rest);
        Ok(CdfTable { du, values })
    }

    /// Integrates the density over its support, in `u = sqrt(t)` to absorb
    /// the `t^(-1/2)` behaviour near zero.
    pub fn mass(&self, x: f64) -> Result<MassReport> {
        let support = self.support(x)?;
        let atom = self.escape_probability(x)?;
        let tail = 1.0 - self.cdf(support, x)?;
        let mut failure = None;
        let r = quad::integrate(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                match self.density(u * u, x) {
                    Ok(v) => 2.0 * u * v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            support.sqrt(),
            Tolerance {
                abs: 1e-6,
                rel: 1e-6,
                max_segments: 200,
            },
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(MassReport {
            support,
            integral: r.value,
            tail,
            atom,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn bm() -> LastPassageAnalyzer {
        LastPassageAnalyzer::new(&DiffusionSpec::brownian_drift(1.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn brownian_transform() {
        let a = bm();
        assert!(rel(a.laplace_at_alpha(1.5).unwrap(), 0.5) < 1e-15);
        assert!(rel(a.laplace_from(1.5, 0.5).unwrap(), 0.5 * (-0.5f64).exp()) < 1e-14);
        assert_eq!(a.laplace_from(1.5, 0.0).unwrap(), a.laplace_at_alpha(1.5).unwrap());
        assert!((a.killing_rate(1.5).unwrap() - 3.0).abs() < 1e-14);
        assert!((a.laplace_at_alpha(1e-8).unwrap() - 1.0).abs() < 1e-6);
        let f = a.factors(1.5).unwrap();
        assert!(rel(f.factor_a, 0.75) < 1e-15);
        assert!(rel(f.factor_b, 2.0 / 3.0) < 1e-15);
    }

    #[test]
    fn escape_probabilities() {
        let a = bm();
        assert_eq!(a.escape_probability(2.0).unwrap(), 0.0);
        assert_eq!(a.escape_probability(0.0).unwrap(), 0.0);
        // below alpha in Case 1 the path may drift to -inf first
        let below = a.escape_probability(-1.0).unwrap();
        assert!(rel(below, 1.0 - (-2f64).exp()) < 1e-14);
        let ou = LastPassageAnalyzer::new(&DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap()).unwrap();
        let e = ou.escape_probability(1.0).unwrap();
        assert!(rel(e, libm::erf(1.0)) < 1e-14);
        assert!((e - 0.842_700_792_949_714_9).abs() < 1e-12);
    }

    #[test]
    fn ou_decomposition_matches_direct() {
        let a = LastPassageAnalyzer::new(&DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.5).unwrap()).unwrap();
        let d = a.laplace_at_alpha(1.0).unwrap();
        let direct = a.laplace_direct(1.0, 0.5).unwrap();
        assert!(rel(d, direct) < 1e-12);
        let from = a.laplace_from(1.0, 1.0).unwrap();
        assert!(from > a.escape_probability(1.0).unwrap() && from < 1.0);
    }

    #[test]
    fn rate_representation_matches_factor() {
        for spec in [
            DiffusionSpec::brownian_drift(0.7, 0.2).unwrap(),
            DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap(),
            DiffusionSpec::switching_gbm(-0.1, 0.75, -0.1, 1.5, 100.0).unwrap(),
        ] {
            let a = LastPassageAnalyzer::new(&spec).unwrap();
            for q in [0.1, 1.0, 10.0] {
                let f = a.factors(q).unwrap();
                assert!((f.factor_a - f.factor_a_via_rate).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn brownian_density_and_cdf() {
        // lambda_0 ~ Gamma(1/2, rate 1/2) for nu = 1
        let a = bm();
        for t in [0.25, 1.0, 3.0] {
            let exact = (-t / 2.0f64).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
            assert!((a.density(t, 0.0).unwrap() - exact).abs() < 1e-4, "{t}");
            let cdf = libm::erf((t / 2.0f64).sqrt());
            assert!((a.cdf(t, 0.0).unwrap() - cdf).abs() < 1e-4, "{t}");
        }
        let m = a.mass(0.0).unwrap();
        assert!(m.tail < SUPPORT_TAIL);
        assert!(m.defect() < 2e-3, "{m:?}");
    }

    #[test]
    fn tabulated_distribution() {
        let a = bm();
        let table = a.cdf_table(0.0, 200).unwrap();
        assert_eq!(table.eval(-1.0), 0.0);
        assert_eq!(table.eval(0.0), 0.0);
        for t in [0.01, 0.5, 2.0, 7.0] {
            let exact = libm::erf((t / 2.0f64).sqrt());
            assert!((table.eval(t) - exact).abs() < 1e-4, "{t}");
        }
        assert!(table.eval(1e6) > 0.999);
        assert!(table.end() >= a.support(0.0).unwrap());
    }

    #[test]
    fn bad_times_are_rejected() {
        let a = bm();
        assert!(matches!(a.density(0.0, 0.0), Err(Error::Domain(_))));
        assert!(a.cdf(-1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn transform_is_decreasing_in_q(q in 0.01f64..10.0, dq in 0.01f64..5.0, x in -2.0f64..2.0) {
            let a = LastPassageAnalyzer::new(&DiffusionSpec::switching_brownian(-1.0, -2.0, 0.0).unwrap()).unwrap();
            let l1 = a.laplace_from(q, x).unwrap();
            let l2 = a.laplace_from(q + dq, x).unwrap();
            prop_assert!(l1 > l2);
            prop_assert!(l1 > 0.0 && l1 <= 1.0);
            let f = a.factors(q).unwrap();
            prop_assert!(f.factor_a > 0.0 && f.factor_a < 1.0);
            prop_assert!(f.factor_b > 0.0 && f.factor_b < 1.0);
        }
    }
}
