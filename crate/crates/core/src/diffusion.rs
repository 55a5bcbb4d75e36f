//! Diffusion declarations, scale function, speed density and boundary
//! classification.
//!
//! The scale function is fixed up to an affine map; each family pins the
//! additive constant at a base point (0 on the real line, 1 for the
//! geometric families, `alpha` for generic coefficients). Every formula
//! downstream uses only scale differences or the boundary limits, so the
//! constant never leaks into results.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use libm::{erf, erfc};

use crate::error::{domain, Error, Result};
use crate::quad::{self, Tolerance};

/// State-dependent coefficient, e.g. `x -> -0.5 * x`.
pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift and volatility supplied as closures, solved numerically.
#[derive(Clone)]
pub struct GenericCoefficients {
    pub drift: Coefficient,
    pub volatility: Coefficient,
    /// Region on which the numerical eigenfunctions are guaranteed accurate.
    /// `None` picks a window around `alpha`.
    pub window: Option<(f64, f64)>,
}

impl GenericCoefficients {
    pub fn new(
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        volatility: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            drift: Arc::new(drift),
            volatility: Arc::new(volatility),
            window: None,
        }
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some((lo, hi));
        self
    }
}

impl fmt::Debug for GenericCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericCoefficients")
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

/// Coefficient family of a diffusion.
///
/// `BrownianDrift { nu }` has drift `-nu` and unit volatility. The
/// Ornstein–Uhlenbeck family follows `dX = -kappa X dt + dW`, so it is
/// transient only for `kappa < 0`. Switching families use the `A`
/// parameters on `[alpha, r)` and the `B` parameters on `(l, alpha)`.
#[derive(Debug, Clone)]
pub enum Family {
    BrownianDrift {
        nu: f64,
    },
    OrnsteinUhlenbeck {
        kappa: f64,
    },
    GeometricBm {
        mu: f64,
        sigma: f64,
    },
    SwitchingBrownian {
        mu_a: f64,
        mu_b: f64,
    },
    SwitchingGbm {
        mu_a: f64,
        sigma_a: f64,
        mu_b: f64,
        sigma_b: f64,
    },
    Generic(GenericCoefficients),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::BrownianDrift { .. } => "brownian_drift",
            Family::OrnsteinUhlenbeck { .. } => "ornstein_uhlenbeck",
            Family::GeometricBm { .. } => "geometric_bm",
            Family::SwitchingBrownian { .. } => "switching_brownian",
            Family::SwitchingGbm { .. } => "switching_gbm",
            Family::Generic(_) => "generic",
        }
    }

    /// The state space the closed-form catalog assumes; `None` for generic.
    pub fn natural_interval(&self) -> Option<Interval> {
        match self {
            Family::BrownianDrift { .. }
            | Family::OrnsteinUhlenbeck { .. }
            | Family::SwitchingBrownian { .. } => Some(Interval::real_line()),
            Family::GeometricBm { .. } | Family::SwitchingGbm { .. } => {
                Some(Interval::new(0.0, f64::INFINITY))
            }
            Family::Generic(_) => None,
        }
    }
}

/// Open state interval `(left, right)`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// `s(l+)` finite, `s(r-) = +inf`: paths end at the left boundary.
    Case1,
    /// `s(l+) = -inf`, `s(r-)` finite: paths end at the right boundary.
    Case2,
    /// Both scale limits finite.
    Case3,
}

/// Boundary classification with the scale limits it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseClass {
    pub tag: Case,
    pub s_ell: f64,
    pub s_r: f64,
}

impl CaseClass {
    fn from_limits(s_ell: f64, s_r: f64) -> Result<Self> {
        let tag = match (s_ell.is_finite(), s_r.is_finite()) {
            (true, false) => Case::Case1,
            (false, true) => Case::Case2,
            (true, true) => Case::Case3,
            (false, false) => return Err(Error::NotTransient { s_ell, s_r }),
        };
        Ok(Self { tag, s_ell, s_r })
    }

    pub fn left_attracting(&self) -> bool {
        self.s_ell.is_finite()
    }

    pub fn right_attracting(&self) -> bool {
        self.s_r.is_finite()
    }
}

/// Which coefficient regime applies at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Above,
    Below,
}

/// A validated transient diffusion together with its reference level.
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    family: Family,
    interval: Interval,
    alpha: f64,
    case: CaseClass,
}

impl DiffusionSpec {
    /// Validates the declaration and classifies its boundaries. Rejects
    /// recurrent diffusions with [`Error::NotTransient`].
    pub fn new(family: Family, interval: Interval, alpha: f64) -> Result<Self> {
        if !(interval.left < interval.right) || interval.left.is_nan() || interval.right.is_nan() {
            return domain(format!("invalid interval ({}, {})", interval.left, interval.right));
        }
        if !alpha.is_finite() || !interval.contains(alpha) {
            return domain(format!(
                "alpha = {alpha} must lie inside ({}, {})",
                interval.left, interval.right
            ));
        }
        if let Some(natural) = family.natural_interval() {
            if natural != interval {
                return domain(format!(
                    "family {} is defined on ({}, {}), got ({}, {})",
                    family.name(),
                    natural.left,
                    natural.right,
                    interval.left,
                    interval.right
                ));
            }
        }
        validate_parameters(&family)?;
        let mut spec = Self {
            family,
            interval,
            alpha,
            // placeholder until classified below
            case: CaseClass {
                tag: Case::Case3,
                s_ell: 0.0,
                s_r: 0.0,
            },
        };
        if let Family::Generic(g) = &spec.family {
            check_generic_samples(g, &spec.interval, alpha)?;
        }
        spec.case = spec.classify()?;
        Ok(spec)
    }

    pub fn brownian_drift(nu: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::BrownianDrift { nu }, Interval::real_line(), alpha)
    }

    pub fn ornstein_uhlenbeck(kappa: f64, alpha: f64) -> Result<Self> {
        Self::new(
            Family::OrnsteinUhlenbeck { kappa },
            Interval::real_line(),
            alpha,
        )
    }

    pub fn geometric_bm(mu: f64, sigma: f64, alpha: f64) -> Result<Self> {
        Self::new(
            Family::GeometricBm { mu, sigma },
            Interval::new(0.0, f64::INFINITY),
            alpha,
        )
    }

    pub fn switching_brownian(mu_a: f64, mu_b: f64, alpha: f64) -> Result<Self> {
        Self::new(
            Family::SwitchingBrownian { mu_a, mu_b },
            Interval::real_line(),
            alpha,
        )
    }

    pub fn switching_gbm(mu_a: f64, sigma_a: f64, mu_b: f64, sigma_b: f64, alpha: f64) -> Result<Self> {
        Self::new(
            Family::SwitchingGbm {
                mu_a,
                sigma_a,
                mu_b,
                sigma_b,
            },
            Interval::new(0.0, f64::INFINITY),
            alpha,
        )
    }

    pub fn generic(coefficients: GenericCoefficients, interval: Interval, alpha: f64) -> Result<Self> {
        Self::new(Family::Generic(coefficients), interval, alpha)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Boundary case computed at construction.
    pub fn case(&self) -> CaseClass {
        self.case
    }

    /// Same diffusion, different reference level. Switching families move
    /// their switching level with it.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.family.clone(), self.interval, alpha)
    }

    /// Point at which the scale constant and eigenfunction normalization
    /// are anchored.
    pub fn base_point(&self) -> f64 {
        match &self.family {
            Family::GeometricBm { .. } | Family::SwitchingGbm { .. } => 1.0,
            Family::Generic(_) => self.alpha,
            _ => 0.0,
        }
    }

    pub fn regime(&self, x: f64) -> Regime {
        if x >= self.alpha {
            Regime::Above
        } else {
            Regime::Below
        }
    }

    /// Infinitesimal drift `mu(x)`.
    pub fn drift(&self, x: f64) -> f64 {
        match &self.family {
            Family::BrownianDrift { nu } => -nu,
            Family::OrnsteinUhlenbeck { kappa } => -kappa * x,
            Family::GeometricBm { mu, .. } => mu * x,
            Family::SwitchingBrownian { mu_a, mu_b } => match self.regime(x) {
                Regime::Above => *mu_a,
                Regime::Below => *mu_b,
            },
            Family::SwitchingGbm { mu_a, mu_b, .. } => match self.regime(x) {
                Regime::Above => mu_a * x,
                Regime::Below => mu_b * x,
            },
            Family::Generic(g) => (g.drift)(x),
        }
    }

    /// Infinitesimal volatility `sigma(x) > 0`.
    pub fn volatility(&self, x: f64) -> f64 {
        match &self.family {
            Family::BrownianDrift { .. }
            | Family::OrnsteinUhlenbeck { .. }
            | Family::SwitchingBrownian { .. } => 1.0,
            Family::GeometricBm { sigma, .. } => sigma * x,
            Family::SwitchingGbm {
                sigma_a, sigma_b, ..
            } => match self.regime(x) {
                Regime::Above => sigma_a * x,
                Regime::Below => sigma_b * x,
            },
            Family::Generic(g) => (g.volatility)(x),
        }
    }

    fn check_inside(&self, x: f64) -> Result<()> {
        if self.interval.contains(x) {
            Ok(())
        } else {
            domain(format!(
                "x = {x} outside ({}, {})",
                self.interval.left, self.interval.right
            ))
        }
    }

    fn scale_kind(&self) -> ScaleKind {
        match &self.family {
            Family::BrownianDrift { nu } => ScaleKind::Piecewise(PiecewiseScale::uniform(
                Coordinate::Linear,
                -2.0 * nu,
                0.0,
            )),
            Family::SwitchingBrownian { mu_a, mu_b } => ScaleKind::Piecewise(PiecewiseScale {
                coordinate: Coordinate::Linear,
                breakpoint: self.alpha,
                slope_below: 2.0 * mu_b,
                slope_above: 2.0 * mu_a,
                offset: 0.0,
            }),
            Family::GeometricBm { mu, sigma } => {
                let nu = mu / (sigma * sigma) - 0.5;
                ScaleKind::Piecewise(PiecewiseScale::uniform(
                    Coordinate::Log,
                    2.0 * nu,
                    -1.0 / (2.0 * nu),
                ))
            }
            Family::SwitchingGbm {
                mu_a,
                sigma_a,
                mu_b,
                sigma_b,
            } => ScaleKind::Piecewise(PiecewiseScale {
                coordinate: Coordinate::Log,
                breakpoint: self.alpha.ln(),
                slope_below: 2.0 * (mu_b / (sigma_b * sigma_b) - 0.5),
                slope_above: 2.0 * (mu_a / (sigma_a * sigma_a) - 0.5),
                offset: 0.0,
            }),
            Family::OrnsteinUhlenbeck { kappa } => ScaleKind::Ou { kappa: *kappa },
            Family::Generic(_) => ScaleKind::Numeric,
        }
    }

    /// `ln s'(x)`.
    pub fn ln_scale_slope(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        match self.scale_kind() {
            ScaleKind::Piecewise(p) => Ok(p.ln_slope(x)),
            ScaleKind::Ou { kappa } => Ok(kappa * x * x),
            ScaleKind::Numeric => {
                let x0 = self.base_point();
                self.exponent_integral(x0, x).map(|v| -v)
            }
        }
    }

    /// `s'(x) = exp(-int 2 mu / sigma^2)`.
    pub fn scale_slope(&self, x: f64) -> Result<f64> {
        self.ln_scale_slope(x).map(f64::exp)
    }

    /// Scale function `s(x)`.
    pub fn scale(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        match self.scale_kind() {
            ScaleKind::Piecewise(p) => Ok(p.value(x)),
            ScaleKind::Ou { kappa } => Ok(ou_scale(kappa, x)),
            ScaleKind::Numeric => {
                let x0 = self.base_point();
                self.scale_increment(x0, 0.0, x)
            }
        }
    }

    /// `s(x) - s(l+)`, free of cancellation for the closed-form families;
    /// `+inf` when the left boundary is not attracting.
    pub fn scale_from_left(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        match self.scale_kind() {
            ScaleKind::Piecewise(p) => Ok(p.left_tail(x)),
            ScaleKind::Ou { kappa } => {
                let k = -kappa;
                Ok(0.5 * (std::f64::consts::PI / k).sqrt() * erfc(-k.sqrt() * x))
            }
            ScaleKind::Numeric => Ok(self.scale(x)? - self.case.s_ell),
        }
    }

    /// `s(r-) - s(x)`; `+inf` when the right boundary is not attracting.
    pub fn scale_to_right(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        match self.scale_kind() {
            ScaleKind::Piecewise(p) => Ok(p.right_tail(x)),
            ScaleKind::Ou { kappa } => {
                let k = -kappa;
                Ok(0.5 * (std::f64::consts::PI / k).sqrt() * erfc(k.sqrt() * x))
            }
            ScaleKind::Numeric => Ok(self.case.s_r - self.scale(x)?),
        }
    }

    /// Speed density `m'(x) = 2 / (sigma^2(x) s'(x))`.
    pub fn speed_density(&self, x: f64) -> Result<f64> {
        let ln_slope = self.ln_scale_slope(x)?;
        let sig = self.volatility(x);
        if !(sig.is_finite() && sig > 0.0) {
            return Err(Error::Coefficient {
                x,
                reason: format!("volatility {sig} is not positive"),
            });
        }
        Ok(2.0 * (-ln_slope).exp() / (sig * sig))
    }

    /// Computes the scale limits at both boundaries and the boundary case.
    pub fn classify(&self) -> Result<CaseClass> {
        let (s_ell, s_r) = match self.scale_kind() {
            ScaleKind::Piecewise(p) => (p.limit_left(), p.limit_right()),
            ScaleKind::Ou { kappa } => {
                if kappa < 0.0 {
                    let lim = 0.5 * (std::f64::consts::PI / -kappa).sqrt();
                    (-lim, lim)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            ScaleKind::Numeric => (self.probe_limit(false)?, self.probe_limit(true)?),
        };
        CaseClass::from_limits(s_ell, s_r)
    }

    /// `P^x(H_a < H_b)` for `l < a <= x <= b < r`.
    pub fn hitting_probability(&self, x: f64, a: f64, b: f64) -> Result<f64> {
        if !(a <= x && x <= b) || !(a < b) {
            return domain(format!("need a <= x <= b with a < b, got a={a}, x={x}, b={b}"));
        }
        self.check_inside(a)?;
        self.check_inside(b)?;
        let sa = self.scale(a)?;
        let sb = self.scale(b)?;
        let sx = self.scale(x)?;
        Ok(((sb - sx) / (sb - sa)).clamp(0.0, 1.0))
    }

    /// `s(y) - s(x)` without going through the base point when both points
    /// are far from it.
    pub fn scale_difference(&self, x: f64, y: f64) -> Result<f64> {
        match self.scale_kind() {
            ScaleKind::Numeric => {
                self.check_inside(x)?;
                self.check_inside(y)?;
                let lx = self.ln_scale_slope(x)?;
                self.scale_increment(x, lx, y)
            }
            _ => Ok(self.scale(y)? - self.scale(x)?),
        }
    }

    fn coefficient_ratio(&self, x: f64) -> Result<f64> {
        let m = self.drift(x);
        let s = self.volatility(x);
        if !m.is_finite() || !s.is_finite() {
            return Err(Error::Coefficient {
                x,
                reason: format!("non-finite coefficients (drift {m}, volatility {s})"),
            });
        }
        if s <= 0.0 {
            return Err(Error::Coefficient {
                x,
                reason: format!("volatility {s} is not positive"),
            });
        }
        Ok(2.0 * m / (s * s))
    }

    /// `int_a^b 2 mu / sigma^2 du` by adaptive quadrature.
    fn exponent_integral(&self, a: f64, b: f64) -> Result<f64> {
        let failure = RefCell::new(None);
        let r = quad::integrate(
            |u| match self.coefficient_ratio(u) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            Tolerance::relative(1e-12).with_abs(1e-14),
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !r.value.is_finite() {
            return Err(Error::Coefficient {
                x: b,
                reason: "drift/volatility ratio is not integrable".into(),
            });
        }
        Ok(r.value)
    }

    /// `int_a^b exp(ln_slope_a - int_a^u 2 mu / sigma^2) du`.
    fn scale_increment(&self, a: f64, ln_slope_a: f64, b: f64) -> Result<f64> {
        let failure = RefCell::new(None);
        let r = quad::integrate(
            |u| match self.exponent_integral(a, u) {
                Ok(e) => (ln_slope_a - e).exp(),
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    f64::NAN
                }
            },
            a,
            b,
            Tolerance::relative(1e-10).with_abs(1e-300),
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(r.value)
    }

    /// Limit of `s` toward one endpoint by geometric probing; `+-inf` once
    /// partial integrals pass 1e12 without settling.
    fn probe_limit(&self, right: bool) -> Result<f64> {
        const DIVERGED: f64 = 1e12;
        let x0 = self.base_point();
        let end = if right {
            self.interval.right
        } else {
            self.interval.left
        };
        let sign = if right { 1.0 } else { -1.0 };
        let mut x = x0;
        let mut ln_slope = 0.0;
        let mut total = 0.0f64;
        let mut settled = 0;
        for k in 0..200 {
            let next = if end.is_finite() {
                end - (end - x) * 0.5
            } else {
                x + sign * (2f64.powi(k.min(60)))
            };
            if next == x || (end.is_finite() && next == end) {
                break;
            }
            let inc = self.scale_increment(x, ln_slope, next)?;
            let dexp = self.exponent_integral(x, next)?;
            ln_slope -= dexp;
            total += inc;
            x = next;
            if total.abs() > DIVERGED {
                return Ok(sign * f64::INFINITY);
            }
            if inc.abs() <= 1e-13 * total.abs().max(1e-300) {
                settled += 1;
                if settled >= 3 {
                    break;
                }
            } else {
                settled = 0;
            }
        }
        if total.is_finite() && settled > 0 || end.is_finite() {
            Ok(total)
        } else {
            Ok(sign * f64::INFINITY)
        }
    }
}

fn validate_parameters(family: &Family) -> Result<()> {
    let all_finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            domain(format!("{name} must be positive, got {v}"))
        }
    };
    match family {
        Family::BrownianDrift { nu } if !nu.is_finite() => domain("nu must be finite"),
        Family::OrnsteinUhlenbeck { kappa } if !kappa.is_finite() => domain("kappa must be finite"),
        Family::GeometricBm { mu, sigma } => {
            positive("sigma", *sigma)?;
            if !mu.is_finite() {
                return domain("mu must be finite");
            }
            Ok(())
        }
        Family::SwitchingBrownian { mu_a, mu_b } if !all_finite(&[*mu_a, *mu_b]) => {
            domain("switching drifts must be finite")
        }
        Family::SwitchingGbm {
            mu_a,
            sigma_a,
            mu_b,
            sigma_b,
        } => {
            positive("sigma_a", *sigma_a)?;
            positive("sigma_b", *sigma_b)?;
            if !all_finite(&[*mu_a, *mu_b]) {
                return domain("switching drifts must be finite");
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Positivity and finiteness at sampled points only; local integrability is
/// assumed.
fn check_generic_samples(g: &GenericCoefficients, interval: &Interval, alpha: f64) -> Result<()> {
    let lo = if interval.left.is_finite() {
        interval.left
    } else {
        alpha - 10.0 * alpha.abs().max(1.0)
    };
    let hi = if interval.right.is_finite() {
        interval.right
    } else {
        alpha + 10.0 * alpha.abs().max(1.0)
    };
    for i in 1..64 {
        let x = lo + (hi - lo) * i as f64 / 64.0;
        let m = (g.drift)(x);
        let s = (g.volatility)(x);
        if !m.is_finite() || !s.is_finite() || s <= 0.0 {
            return Err(Error::Coefficient {
                x,
                reason: format!("drift {m}, volatility {s}"),
            });
        }
    }
    Ok(())
}

fn ou_scale(kappa: f64, x: f64) -> f64 {
    let k = -kappa;
    0.5 * (std::f64::consts::PI / k).sqrt() * erf(k.sqrt() * x)
}

enum ScaleKind {
    Piecewise(PiecewiseScale),
    Ou { kappa: f64 },
    Numeric,
}

#[derive(Debug, Clone, Copy)]
enum Coordinate {
    /// y = x
    Linear,
    /// y = ln x
    Log,
}

/// Scale function whose density in the coordinate `y` is `exp(-E(y))` with
/// `E` piecewise linear, `E(0) = 0`, slopes switching at `breakpoint`.
#[derive(Debug, Clone, Copy)]
struct PiecewiseScale {
    coordinate: Coordinate,
    breakpoint: f64,
    slope_below: f64,
    slope_above: f64,
    offset: f64,
}

impl PiecewiseScale {
    fn uniform(coordinate: Coordinate, slope: f64, offset: f64) -> Self {
        Self {
            coordinate,
            breakpoint: 0.0,
            slope_below: slope,
            slope_above: slope,
            offset,
        }
    }

    fn coord(&self, x: f64) -> f64 {
        match self.coordinate {
            Coordinate::Linear => x,
            Coordinate::Log => x.ln(),
        }
    }

    fn slope_at(&self, y: f64) -> f64 {
        if y >= self.breakpoint {
            self.slope_above
        } else {
            self.slope_below
        }
    }

    fn exponent(&self, y: f64) -> f64 {
        let b = self.breakpoint;
        match (0.0 >= b, y >= b) {
            (true, true) => self.slope_above * y,
            (false, false) => self.slope_below * y,
            (true, false) => self.slope_above * b + self.slope_below * (y - b),
            (false, true) => self.slope_below * b + self.slope_above * (y - b),
        }
    }

    fn ln_slope(&self, x: f64) -> f64 {
        let y = self.coord(x);
        match self.coordinate {
            Coordinate::Linear => -self.exponent(y),
            Coordinate::Log => -self.exponent(y) - y,
        }
    }

    /// `int_{y0}^{y} exp(-E)` where the segment `[y0, y]` carries slope `c`
    /// and `E(y0) = e0`. Infinite `y` yields the limit.
    fn segment(y0: f64, e0: f64, c: f64, y: f64) -> f64 {
        if y.is_infinite() {
            let dir = y.signum();
            // converges iff exp(-c (u - y0)) decays in the direction of travel
            if c * dir > 0.0 {
                return (-e0).exp() / c;
            }
            return dir * f64::INFINITY;
        }
        let d = y - y0;
        let z = -c * d;
        let phi1 = if z.abs() < 1e-12 { 1.0 + 0.5 * z } else { z.exp_m1() / z };
        (-e0).exp() * d * phi1
    }

    fn integral_to(&self, y: f64) -> f64 {
        let b = self.breakpoint;
        let start_above = 0.0 >= b;
        let end_above = y >= b;
        if start_above == end_above {
            Self::segment(0.0, 0.0, self.slope_at(0.0), y)
        } else {
            let first = Self::segment(0.0, 0.0, self.slope_at(0.0), b);
            let c = if end_above {
                self.slope_above
            } else {
                self.slope_below
            };
            first + Self::segment(b, self.exponent(b), c, y)
        }
    }

    fn value(&self, x: f64) -> f64 {
        self.offset + self.integral_to(self.coord(x))
    }

    fn limit_left(&self) -> f64 {
        self.offset + self.integral_to(f64::NEG_INFINITY)
    }

    /// `s(x) - s(l+)` integrated directly from the left boundary.
    fn left_tail(&self, x: f64) -> f64 {
        let y = self.coord(x);
        let b = self.breakpoint;
        if self.slope_below >= 0.0 {
            return f64::INFINITY;
        }
        if y < b {
            return (-self.exponent(y)).exp() / -self.slope_below;
        }
        let eb = self.exponent(b);
        (-eb).exp() / -self.slope_below + Self::segment(b, eb, self.slope_above, y)
    }

    /// `s(r-) - s(x)` integrated directly to the right boundary.
    fn right_tail(&self, x: f64) -> f64 {
        let y = self.coord(x);
        let b = self.breakpoint;
        if self.slope_above <= 0.0 {
            return f64::INFINITY;
        }
        if y >= b {
            return (-self.exponent(y)).exp() / self.slope_above;
        }
        let ey = self.exponent(y);
        Self::segment(y, ey, self.slope_below, b) + (-self.exponent(b)).exp() / self.slope_above
    }

    fn limit_right(&self) -> f64 {
        self.offset + self.integral_to(f64::INFINITY)
    }
}
