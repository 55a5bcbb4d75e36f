//! Increasing and decreasing solutions of `G f = q f`.
//!
//! Every evaluator returns a [`LogPoint`]: the logarithm of the solution and
//! its logarithmic derivative. Values far from the reference level overflow
//! quickly (for Brownian motion with drift they are exponentials), so the
//! Green-function layer combines logarithms and only exponentiates ratios.

use crate::diffusion::{Case, CaseClass, DiffusionSpec, Family, GenericCoefficients, Interval};
use crate::error::{domain, Error, Result};
use crate::ode::Dopri;
use crate::special::ln_parabolic_cylinder_d;

/// `ln f(x)` and `f'(x) / f(x)` for a positive solution `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPoint {
    pub ln: f64,
    pub slope: f64,
}

impl LogPoint {
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }
}

/// Closed-form solutions of a single constant-parameter regime.
#[derive(Debug, Clone, Copy)]
enum Basis {
    /// Drift `-nu`, unit volatility; `gamma = sqrt(nu^2 + 2q)`.
    Brownian { nu: f64, gamma: f64 },
    /// `x^up` and `x^down`.
    Gbm { up: f64, down: f64 },
    /// `k = |kappa|`, `p = q/k + 1`, `c = sqrt(2k)`.
    Ou { k: f64, p: f64, c: f64 },
}

impl Basis {
    fn brownian(nu: f64, q: f64) -> Self {
        Basis::Brownian {
            nu,
            gamma: (nu * nu + 2.0 * q).sqrt(),
        }
    }

    fn gbm(mu: f64, sigma: f64, q: f64) -> Self {
        let s2 = sigma * sigma;
        let nu = mu / s2 - 0.5;
        let root = (nu * nu + 2.0 * q / s2).sqrt();
        Basis::Gbm {
            up: -nu + root,
            down: -nu - root,
        }
    }

    fn psi(&self, x: f64) -> Result<LogPoint> {
        Ok(match *self {
            Basis::Brownian { nu, gamma } => LogPoint {
                ln: (gamma + nu) * x,
                slope: gamma + nu,
            },
            Basis::Gbm { up, .. } => LogPoint {
                ln: up * x.ln(),
                slope: up / x,
            },
            Basis::Ou { k, p, c } => {
                let z = -c * x;
                let d0 = ln_parabolic_cylinder_d(-p, z)?;
                let d1 = ln_parabolic_cylinder_d(1.0 - p, z)?;
                LogPoint {
                    ln: -0.5 * k * x * x + d0,
                    slope: c * (d1 - d0).exp(),
                }
            }
        })
    }

    fn phi(&self, x: f64) -> Result<LogPoint> {
        Ok(match *self {
            Basis::Brownian { nu, gamma } => LogPoint {
                ln: -(gamma - nu) * x,
                slope: -(gamma - nu),
            },
            Basis::Gbm { down, .. } => LogPoint {
                ln: down * x.ln(),
                slope: down / x,
            },
            Basis::Ou { k, p, c } => {
                let z = c * x;
                let d0 = ln_parabolic_cylinder_d(-p, z)?;
                let d1 = ln_parabolic_cylinder_d(1.0 - p, z)?;
                LogPoint {
                    ln: -0.5 * k * x * x + d0,
                    slope: -c * (d1 - d0).exp(),
                }
            }
        })
    }

    /// Wronskian against the family's own scale normalization.
    fn ln_wronskian(&self) -> f64 {
        match *self {
            Basis::Brownian { gamma, .. } => (2.0 * gamma).ln(),
            Basis::Gbm { up, down } => (up - down).ln(),
            Basis::Ou { k, p, .. } => {
                (2.0 * (std::f64::consts::PI * k).sqrt()).ln() - libm::lgamma(p)
            }
        }
    }
}

/// Two regime bases joined at `alpha` so that values and first derivatives
/// agree there. `psi` follows the lower regime's increasing solution up to
/// `alpha`, `phi` the upper regime's decreasing solution down to it.
#[derive(Debug, Clone, Copy)]
struct Glued {
    alpha: f64,
    below: Basis,
    above: Basis,
    psi_alpha: LogPoint,
    phi_alpha: LogPoint,
    // psi on [alpha, r): psi(alpha) * (c1 U + c2 V) with U, V the upper
    // regime's solutions scaled to 1 at alpha
    c1: f64,
    c2: f64,
    // phi on (l, alpha): phi(alpha) * (d1 U + d2 V) with the lower regime
    d1: f64,
    d2: f64,
    up_psi_alpha: LogPoint,
    up_phi_alpha: LogPoint,
    low_psi_alpha: LogPoint,
    low_phi_alpha: LogPoint,
}

impl Glued {
    fn new(alpha: f64, below: Basis, above: Basis) -> Result<Self> {
        let psi_alpha = below.psi(alpha)?;
        let phi_alpha = above.phi(alpha)?;
        let up_psi_alpha = above.psi(alpha)?;
        let up_phi_alpha = above.phi(alpha)?;
        let low_psi_alpha = below.psi(alpha)?;
        let low_phi_alpha = below.phi(alpha)?;
        let (su, sv, t) = (up_psi_alpha.slope, up_phi_alpha.slope, psi_alpha.slope);
        let c1 = (t - sv) / (su - sv);
        let c2 = (su - t) / (su - sv);
        let (su, sv, t) = (low_psi_alpha.slope, low_phi_alpha.slope, phi_alpha.slope);
        let d1 = (t - sv) / (su - sv);
        let d2 = (su - t) / (su - sv);
        Ok(Self {
            alpha,
            below,
            above,
            psi_alpha,
            phi_alpha,
            c1,
            c2,
            d1,
            d2,
            up_psi_alpha,
            up_phi_alpha,
            low_psi_alpha,
            low_phi_alpha,
        })
    }

    fn psi(&self, x: f64) -> Result<LogPoint> {
        if x < self.alpha {
            return self.below.psi(x);
        }
        let u = self.above.psi(x)?;
        let v = self.above.phi(x)?;
        let lu = u.ln - self.up_psi_alpha.ln;
        let lv = v.ln - self.up_phi_alpha.ln;
        let r = (lv - lu).exp();
        let m = self.c1 + self.c2 * r;
        Ok(LogPoint {
            ln: self.psi_alpha.ln + lu + m.ln(),
            slope: (self.c1 * u.slope + self.c2 * r * v.slope) / m,
        })
    }

    fn phi(&self, x: f64) -> Result<LogPoint> {
        if x >= self.alpha {
            return self.above.phi(x);
        }
        let u = self.below.psi(x)?;
        let v = self.below.phi(x)?;
        let lu = u.ln - self.low_psi_alpha.ln;
        let lv = v.ln - self.low_phi_alpha.ln;
        let r = (lu - lv).exp();
        let m = self.d2 + self.d1 * r;
        Ok(LogPoint {
            ln: self.phi_alpha.ln + lv + m.ln(),
            slope: (self.d2 * v.slope + self.d1 * r * u.slope) / m,
        })
    }
}

/// Numerical solver settings for generic coefficients.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Required `int 2 sqrt(mu^2 + 2 q sigma^2) / sigma^2` between a
    /// truncation point and the accuracy window; `exp(-damping)` bounds the
    /// relative influence of the artificial initial slope.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            damping: 36.0,
        }
    }
}

/// One numerically integrated solution: Riccati state `(f'/f, ln f)`
/// recorded at accepted steps of a sweep in the stable direction.
#[derive(Debug, Clone)]
struct Sweep {
    xs: Vec<f64>,
    ys: Vec<[f64; 2]>,
    forward: bool,
    shift: f64,
}

#[derive(Clone)]
struct Numeric {
    spec: DiffusionSpec,
    q: f64,
    cfg: SolverConfig,
    psi: Sweep,
    phi: Sweep,
}

impl std::fmt::Debug for Numeric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Numeric")
            .field("q", &self.q)
            .field("psi_nodes", &self.psi.xs.len())
            .field("phi_nodes", &self.phi.xs.len())
            .finish()
    }
}

/// Riccati right-hand side `y' = 2 (q - mu y) / sigma^2 - y^2`, `(ln f)' = y`.
fn riccati(spec: &DiffusionSpec, q: f64, x: f64, y: &[f64; 2]) -> [f64; 2] {
    let m = spec.drift(x);
    let s = spec.volatility(x);
    let s2 = s * s;
    [2.0 * (q - m * y[0]) / s2 - y[0] * y[0], y[0]]
}

fn check_coefficients(spec: &DiffusionSpec, x: f64) -> Result<(f64, f64)> {
    let m = spec.drift(x);
    let s = spec.volatility(x);
    if !m.is_finite() || !s.is_finite() || s <= 0.0 {
        return Err(Error::Coefficient {
            x,
            reason: format!("drift {m}, volatility {s}"),
        });
    }
    Ok((m, s))
}

/// Local decay-rate gap between the two WKB branches.
fn damping_rate(spec: &DiffusionSpec, q: f64, x: f64) -> Result<f64> {
    let (m, s) = check_coefficients(spec, x)?;
    Ok(2.0 * (m * m + 2.0 * q * s * s).sqrt() / (s * s))
}

/// WKB root of the frozen-coefficient Riccati equation.
fn wkb_slope(spec: &DiffusionSpec, q: f64, x: f64, increasing: bool) -> Result<f64> {
    let (m, s) = check_coefficients(spec, x)?;
    let s2 = s * s;
    let root = (m * m + 2.0 * q * s2).sqrt();
    Ok(if increasing {
        (-m + root) / s2
    } else {
        (-m - root) / s2
    })
}

/// Accuracy window for generic coefficients.
pub fn default_window(interval: Interval, alpha: f64) -> (f64, f64) {
    let reach = 5.0 * alpha.abs().max(1.0);
    let lo = if interval.left.is_finite() {
        interval.left + 0.01 * (alpha - interval.left)
    } else {
        alpha - reach
    };
    let hi = if interval.right.is_finite() {
        interval.right - 0.01 * (interval.right - alpha)
    } else {
        alpha + reach
    };
    (lo, hi)
}

/// Walks from `start` toward `end` until the accumulated damping reaches
/// `target` or the boundary is effectively reached.
fn truncation_point(
    spec: &DiffusionSpec,
    q: f64,
    start: f64,
    end: f64,
    target: f64,
) -> Result<f64> {
    let alpha = spec.alpha();
    let mut x = start;
    let mut rate = damping_rate(spec, q, x)?;
    let mut total = 0.0;
    if end.is_finite() {
        let gap0 = (end - start).abs();
        let mut gap = gap0;
        while total < target && gap > 1e-9 * (alpha - end).abs() {
            gap *= 0.5;
            let next = end + (start - end).signum() * gap;
            let r = damping_rate(spec, q, next)?;
            total += 0.5 * (rate + r) * (x - next).abs();
            x = next;
            rate = r;
        }
    } else {
        let dir = end.signum();
        for _ in 0..20_000 {
            if total >= target || x.abs() > 1e8 {
                break;
            }
            let step = 0.05 * (x - alpha).abs().max(1.0);
            let next = x + dir * step;
            let r = damping_rate(spec, q, next)?;
            total += 0.5 * (rate + r) * step;
            x = next;
            rate = r;
        }
    }
    Ok(x)
}

impl Numeric {
    fn solve(spec: &DiffusionSpec, g: &GenericCoefficients, q: f64, cfg: SolverConfig) -> Result<Self> {
        let interval = spec.interval();
        let alpha = spec.alpha();
        let (lo, hi) = g.window.unwrap_or_else(|| default_window(interval, alpha));
        if !(interval.contains(lo) && interval.contains(hi) && lo < hi) {
            return domain(format!("solver window ({lo}, {hi}) must lie inside the interval"));
        }
        let lo = lo.min(alpha);
        let hi = hi.max(alpha);
        let case = spec.case();
        let x_left = truncation_point(spec, q, lo, interval.left, cfg.damping)?;
        let x_right = truncation_point(spec, q, hi, interval.right, cfg.damping)?;

        let mut y_left = wkb_slope(spec, q, x_left, true)?;
        if interval.left.is_finite() && case.left_attracting() {
            y_left = y_left.max(1.0 / (x_left - interval.left));
        }
        let mut y_right = wkb_slope(spec, q, x_right, false)?;
        if interval.right.is_finite() && case.right_attracting() {
            y_right = y_right.min(-1.0 / (interval.right - x_right));
        }

        let psi = sweep(spec, q, cfg, x_left, y_left, hi, true)?;
        let phi = sweep(spec, q, cfg, x_right, y_right, lo, false)?;
        let mut out = Self {
            spec: spec.clone(),
            q,
            cfg,
            psi,
            phi,
        };
        if out.psi.ys.iter().any(|y| !(y[0] > 0.0)) {
            return Err(Error::Solver(format!(
                "increasing solution lost monotonicity (q = {q}, start {x_left})"
            )));
        }
        if out.phi.ys.iter().any(|y| !(y[0] < 0.0)) {
            return Err(Error::Solver(format!(
                "decreasing solution lost monotonicity (q = {q}, start {x_right})"
            )));
        }
        out.psi.shift = out.eval(&out.psi, alpha)?.ln;
        out.phi.shift = out.eval(&out.phi, alpha)?.ln;
        Ok(out)
    }

    fn integrator(&self) -> Dopri<2> {
        Dopri::new([self.cfg.atol; 2], [self.cfg.rtol; 2])
    }

    fn eval(&self, sw: &Sweep, x: f64) -> Result<LogPoint> {
        // nearest recorded node on the upstream side of x
        let idx = sw.xs.partition_point(|&v| v <= x);
        let i = if sw.forward {
            idx.saturating_sub(1)
        } else if idx > 0 && sw.xs[idx - 1] == x {
            idx - 1
        } else {
            idx.min(sw.xs.len() - 1)
        };
        let (x0, y0) = (sw.xs[i], sw.ys[i]);
        let y = self.integrator().integrate(
            |t, y| riccati(&self.spec, self.q, t, y),
            x0,
            y0,
            x,
            None,
            |_, _| {},
        )?;
        Ok(LogPoint {
            ln: y[1] - sw.shift,
            slope: y[0],
        })
    }
}

fn sweep(
    spec: &DiffusionSpec,
    q: f64,
    cfg: SolverConfig,
    x0: f64,
    slope0: f64,
    x1: f64,
    forward: bool,
) -> Result<Sweep> {
    let solver = Dopri::new([cfg.atol; 2], [cfg.rtol; 2]);
    let mut xs = vec![x0];
    let mut ys = vec![[slope0, 0.0]];
    let h0 = (x1 - x0).abs().min(1.0 / slope0.abs().max(1e-300)) * 1e-3;
    solver.integrate(
        |t, y| riccati(spec, q, t, y),
        x0,
        [slope0, 0.0],
        x1,
        Some(h0),
        |t, y| {
            xs.push(t);
            ys.push(*y);
        },
    )?;
    if !forward {
        xs.reverse();
        ys.reverse();
    }
    Ok(Sweep {
        xs,
        ys,
        forward,
        shift: 0.0,
    })
}

#[derive(Debug, Clone)]
enum Kind {
    Single(Basis),
    Glued(Glued),
    Numeric(Box<Numeric>),
}

/// Fundamental solutions `psi_q` (increasing) and `phi_q` (decreasing) of
/// `G f = q f` for a fixed `q > 0`, with their Wronskian
/// `w = psi^+ phi - psi phi^+` where `f^+ = f' / s'`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    spec: DiffusionSpec,
    q: f64,
    kind: Kind,
    ln_w: f64,
}

impl EigenSystem {
    /// Closed forms for the catalog families; numerical integration for
    /// generic coefficients.
    pub fn solve(spec: &DiffusionSpec, q: f64) -> Result<Self> {
        Self::solve_with(spec, q, SolverConfig::default())
    }

    pub fn solve_with(spec: &DiffusionSpec, q: f64, cfg: SolverConfig) -> Result<Self> {
        if !(q > 0.0) || !q.is_finite() {
            return domain(format!("q must be positive and finite, got {q}"));
        }
        let alpha = spec.alpha();
        let kind = match spec.family() {
            Family::BrownianDrift { nu } => Kind::Single(Basis::brownian(*nu, q)),
            Family::GeometricBm { mu, sigma } => Kind::Single(Basis::gbm(*mu, *sigma, q)),
            Family::OrnsteinUhlenbeck { kappa } => {
                let k = -kappa;
                Kind::Single(Basis::Ou {
                    k,
                    p: q / k + 1.0,
                    c: (2.0 * k).sqrt(),
                })
            }
            Family::SwitchingBrownian { mu_a, mu_b } => Kind::Glued(Glued::new(
                alpha,
                Basis::brownian(-mu_b, q),
                Basis::brownian(-mu_a, q),
            )?),
            Family::SwitchingGbm {
                mu_a,
                sigma_a,
                mu_b,
                sigma_b,
            } => Kind::Glued(Glued::new(
                alpha,
                Basis::gbm(*mu_b, *sigma_b, q),
                Basis::gbm(*mu_a, *sigma_a, q),
            )?),
            Family::Generic(g) => Kind::Numeric(Box::new(Numeric::solve(spec, g, q, cfg)?)),
        };
        let mut sys = Self {
            spec: spec.clone(),
            q,
            kind,
            ln_w: f64::NAN,
        };
        sys.ln_w = match &sys.kind {
            Kind::Single(b) => b.ln_wronskian(),
            Kind::Glued(_) => {
                let x_ref = match spec.family() {
                    Family::SwitchingGbm { .. } => 1.5 * alpha,
                    _ => alpha + 0.5,
                };
                sys.ln_wronskian_at(x_ref)?
            }
            Kind::Numeric(_) => {
                let (lo, hi) = match spec.family() {
                    Family::Generic(g) => g
                        .window
                        .unwrap_or_else(|| default_window(spec.interval(), alpha)),
                    _ => unreachable!(),
                };
                let x_ref = alpha + 0.3 * (hi.max(alpha) - alpha).max(alpha - lo.min(alpha));
                let x_ref = if spec.interval().contains(x_ref) {
                    x_ref
                } else {
                    alpha
                };
                sys.ln_wronskian_at(x_ref)?
            }
        };
        if !sys.ln_w.is_finite() {
            return Err(Error::Solver(format!("Wronskian is not finite at q = {q}")));
        }
        Ok(sys)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn spec(&self) -> &DiffusionSpec {
        &self.spec
    }

    fn check_inside(&self, x: f64) -> Result<()> {
        let iv = self.spec.interval();
        if iv.contains(x) {
            Ok(())
        } else {
            domain(format!("x = {x} outside ({}, {})", iv.left, iv.right))
        }
    }

    pub fn ln_psi(&self, x: f64) -> Result<LogPoint> {
        self.check_inside(x)?;
        match &self.kind {
            Kind::Single(b) => b.psi(x),
            Kind::Glued(g) => g.psi(x),
            Kind::Numeric(n) => n.eval(&n.psi, x),
        }
    }

    pub fn ln_phi(&self, x: f64) -> Result<LogPoint> {
        self.check_inside(x)?;
        match &self.kind {
            Kind::Single(b) => b.phi(x),
            Kind::Glued(g) => g.phi(x),
            Kind::Numeric(n) => n.eval(&n.phi, x),
        }
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        Ok(self.ln_psi(x)?.value())
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(self.ln_phi(x)?.value())
    }

    /// `psi^+(x) = psi'(x) / s'(x)`.
    pub fn dpsi_ds(&self, x: f64) -> Result<f64> {
        let p = self.ln_psi(x)?;
        Ok(p.slope * (p.ln - self.spec.ln_scale_slope(x)?).exp())
    }

    /// `phi^+(x) = phi'(x) / s'(x)`.
    pub fn dphi_ds(&self, x: f64) -> Result<f64> {
        let p = self.ln_phi(x)?;
        Ok(p.slope * (p.ln - self.spec.ln_scale_slope(x)?).exp())
    }

    pub fn wronskian(&self) -> f64 {
        self.ln_w.exp()
    }

    pub fn ln_wronskian(&self) -> f64 {
        self.ln_w
    }

    /// `ln(psi^+ phi - psi phi^+)` evaluated at `x`; constant in `x` for an
    /// exact pair.
    pub fn ln_wronskian_at(&self, x: f64) -> Result<f64> {
        let p = self.ln_psi(x)?;
        let f = self.ln_phi(x)?;
        let gap = p.slope - f.slope;
        if !(gap > 0.0) {
            return Err(Error::Solver(format!(
                "solutions are not independent at x = {x} (slopes {} and {})",
                p.slope, f.slope
            )));
        }
        Ok(p.ln + f.ln + gap.ln() - self.spec.ln_scale_slope(x)?)
    }

    pub fn wronskian_at(&self, x: f64) -> Result<f64> {
        self.ln_wronskian_at(x).map(f64::exp)
    }

    /// Debug dump of the integration mesh of a numerically solved system as
    /// CSV (`solution,x,ln_value,log_slope`). Closed forms have no mesh and
    /// write nothing; the return value says whether anything was written.
    pub fn write_mesh_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<bool> {
        let Kind::Numeric(n) = &self.kind else {
            return Ok(false);
        };
        writeln!(out, "solution,x,ln_value,log_slope")?;
        for (name, sw) in [("psi", &n.psi), ("phi", &n.phi)] {
            for (x, y) in sw.xs.iter().zip(&sw.ys) {
                writeln!(out, "{name},{x:.16e},{:.16e},{:.16e}", y[1] - sw.shift, y[0])?;
            }
        }
        Ok(true)
    }
}

/// The `q = 0` pair: `psi_0`, `phi_0`, `w_0` in the boundary-case
/// normalization (Case 1: `phi_0 = 1`; Case 2: `psi_0 = 1`; Case 3:
/// `psi_0 = s - s(l)`, `phi_0 = s(r) - s`).
#[derive(Debug, Clone)]
pub struct ZeroEigenSystem {
    spec: DiffusionSpec,
    case: CaseClass,
    w0: f64,
}

impl ZeroEigenSystem {
    pub fn solve(spec: &DiffusionSpec) -> Result<Self> {
        let case = spec.case();
        let x0 = spec.base_point();
        let w0 = match case.tag {
            Case::Case1 => 1.0 / spec.scale_from_left(x0)?,
            Case::Case2 => 1.0 / spec.scale_to_right(x0)?,
            Case::Case3 => case.s_r - case.s_ell,
        };
        Ok(Self {
            spec: spec.clone(),
            case,
            w0,
        })
    }

    pub fn case(&self) -> CaseClass {
        self.case
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn psi0(&self, x: f64) -> Result<f64> {
        Ok(match self.case.tag {
            Case::Case1 => self.w0 * self.spec.scale_from_left(x)?,
            Case::Case2 => {
                self.spec.scale(x)?;
                1.0
            }
            Case::Case3 => self.spec.scale_from_left(x)?,
        })
    }

    pub fn phi0(&self, x: f64) -> Result<f64> {
        Ok(match self.case.tag {
            Case::Case1 => {
                self.spec.scale(x)?;
                1.0
            }
            Case::Case2 => self.w0 * self.spec.scale_to_right(x)?,
            Case::Case3 => self.spec.scale_to_right(x)?,
        })
    }

    pub fn dpsi0_ds(&self, x: f64) -> Result<f64> {
        self.spec.scale(x)?;
        Ok(match self.case.tag {
            Case::Case1 => self.w0,
            Case::Case2 => 0.0,
            Case::Case3 => 1.0,
        })
    }

    pub fn dphi0_ds(&self, x: f64) -> Result<f64> {
        self.spec.scale(x)?;
        Ok(match self.case.tag {
            Case::Case1 => 0.0,
            Case::Case2 => -self.w0,
            Case::Case3 => -1.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{GenericCoefficients, Interval};
    use proptest::prelude::*;

    fn bm(nu: f64, alpha: f64) -> DiffusionSpec {
        DiffusionSpec::brownian_drift(nu, alpha).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn brownian_closed_form() {
        let sys = EigenSystem::solve(&bm(1.0, 0.0), 1.5).unwrap();
        assert!((sys.wronskian() - 4.0).abs() < 1e-15);
        assert_eq!(sys.psi(0.0).unwrap(), 1.0);
        assert_eq!(sys.phi(0.0).unwrap(), 1.0);
        assert!(rel(sys.psi(0.7).unwrap(), (3.0f64 * 0.7).exp()) < 1e-15);
        assert!(rel(sys.phi(0.7).unwrap(), (-0.7f64).exp()) < 1e-15);
    }

    #[test]
    fn non_positive_q_is_rejected() {
        assert!(matches!(
            EigenSystem::solve(&bm(1.0, 0.0), 0.0),
            Err(Error::Domain(_))
        ));
        assert!(EigenSystem::solve(&bm(1.0, 0.0), -1.0).is_err());
    }

    fn catalog() -> Vec<DiffusionSpec> {
        vec![
            bm(1.0, 0.0),
            bm(-0.5, 0.3),
            DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap(),
            DiffusionSpec::ornstein_uhlenbeck(-0.4, 0.5).unwrap(),
            DiffusionSpec::geometric_bm(-0.1, 0.75, 1.0).unwrap(),
            DiffusionSpec::switching_brownian(-1.0, -2.0, 0.0).unwrap(),
            DiffusionSpec::switching_brownian(0.5, -1.0, 0.4).unwrap(),
            DiffusionSpec::switching_gbm(-0.1, 0.75, -0.1, 1.5, 2.0).unwrap(),
        ]
    }

    fn grid(spec: &DiffusionSpec, n: usize) -> Vec<f64> {
        let a = spec.alpha();
        let (lo, hi) = if spec.interval().left == 0.0 {
            (0.3 * a, 3.0 * a)
        } else {
            (a - 2.5, a + 2.5)
        };
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn wronskian_is_constant_for_closed_forms() {
        for spec in catalog() {
            for q in [0.1, 1.0, 7.0] {
                let sys = EigenSystem::solve(&spec, q).unwrap();
                let w = sys.wronskian();
                for x in grid(&spec, 50) {
                    let direct = sys.dpsi_ds(x).unwrap() * sys.phi(x).unwrap()
                        - sys.psi(x).unwrap() * sys.dphi_ds(x).unwrap();
                    assert!(rel(direct, w) < 1e-8, "{:?} q={q} x={x}: {direct} vs {w}", spec.family());
                }
            }
        }
    }

    #[test]
    fn ode_residual_for_closed_forms() {
        for spec in catalog() {
            let q = 0.8;
            let sys = EigenSystem::solve(&spec, q).unwrap();
            for x in grid(&spec, 11) {
                // stay off the switching kink, where psi'' jumps
                if (x - spec.alpha()).abs() < 0.05 * spec.alpha().abs().max(1.0) {
                    continue;
                }
                let h = 1e-3 * x.abs().max(1.0);
                for f in [EigenSystem::ln_psi, EigenSystem::ln_phi] {
                    // f''/f = y' + y^2 with y = f'/f; y' by a fourth-order difference
                    let y = |t: f64| f(&sys, t).unwrap().slope;
                    let dy = (8.0 * (y(x + h) - y(x - h)) - (y(x + 2.0 * h) - y(x - 2.0 * h)))
                        / (12.0 * h);
                    let s2 = spec.volatility(x).powi(2);
                    let terms = [0.5 * s2 * (dy + y(x) * y(x)), spec.drift(x) * y(x), -q];
                    let res: f64 = terms.iter().sum();
                    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                    assert!(res.abs() < 1e-8 * scale, "{:?} x={x}: {res}", spec.family());
                }
            }
        }
    }

    #[test]
    fn glued_solutions_are_c1_at_alpha() {
        let spec = DiffusionSpec::switching_brownian(-1.0, -2.0, 0.3).unwrap();
        let sys = EigenSystem::solve(&spec, 1.5).unwrap();
        let e = 1e-7;
        for f in [EigenSystem::ln_psi, EigenSystem::ln_phi] {
            let below = f(&sys, 0.3 - e).unwrap();
            let above = f(&sys, 0.3).unwrap();
            assert!((below.ln - above.ln).abs() < 1e-6);
            assert!((below.slope - above.slope).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_system_brownian() {
        let z = ZeroEigenSystem::solve(&bm(1.0, 0.0)).unwrap();
        assert_eq!(z.case().tag, Case::Case1);
        assert!((z.w0() - 2.0).abs() < 1e-15);
        for x in [-2.0, 0.0, 1.3] {
            assert!(rel(z.psi0(x).unwrap(), (2.0 * x).exp()) < 1e-14);
            assert_eq!(z.phi0(x).unwrap(), 1.0);
        }
        let mirror = ZeroEigenSystem::solve(&bm(-1.0, 0.0)).unwrap();
        assert_eq!(mirror.case().tag, Case::Case2);
        assert_eq!(mirror.psi0(0.4).unwrap(), 1.0);
        assert!((mirror.w0() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_system_case3_sums_to_w0() {
        let z = ZeroEigenSystem::solve(&DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap()).unwrap();
        for x in [-3.0, -0.2, 0.0, 1.1, 4.0] {
            let sum = z.psi0(x).unwrap() + z.phi0(x).unwrap();
            assert!(rel(sum, z.w0()) < 1e-14);
            let w = z.dpsi0_ds(x).unwrap() * z.phi0(x).unwrap() - z.psi0(x).unwrap() * z.dphi0_ds(x).unwrap();
            assert!(rel(w, z.w0()) < 1e-14);
        }
    }

    #[test]
    fn small_q_approaches_zero_system() {
        let spec = bm(1.0, 0.0);
        let z = ZeroEigenSystem::solve(&spec).unwrap();
        let mut last = f64::INFINITY;
        for q in [1e-2, 1e-4, 1e-6, 1e-8] {
            let sys = EigenSystem::solve(&spec, q).unwrap();
            let err = (sys.wronskian() - z.w0()).abs();
            assert!(err < last);
            last = err;
            for x in [-1.0, 0.5] {
                let e = rel(sys.psi(x).unwrap(), z.psi0(x).unwrap());
                if q == 1e-8 {
                    assert!(e < 1e-6);
                }
            }
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn generic_solver_reproduces_brownian() {
        let g = GenericCoefficients::new(|_| -1.0, |_| 1.0);
        let spec = DiffusionSpec::generic(g, Interval::real_line(), 0.0).unwrap();
        let reference = EigenSystem::solve(&bm(1.0, 0.0), 1.5).unwrap();
        let sys = EigenSystem::solve(&spec, 1.5).unwrap();
        for i in 0..=30 {
            let x = -3.0 + 0.2 * i as f64;
            assert!(rel(sys.psi(x).unwrap(), reference.psi(x).unwrap()) < 1e-6, "psi {x}");
            assert!(rel(sys.phi(x).unwrap(), reference.phi(x).unwrap()) < 1e-6, "phi {x}");
        }
        assert!(rel(sys.wronskian(), 4.0) < 1e-6);
        for i in 0..50 {
            let x = -3.0 + 6.0 * i as f64 / 49.0;
            assert!(rel(sys.wronskian_at(x).unwrap(), sys.wronskian()) < 1e-5);
        }
        let mut mesh = Vec::new();
        assert!(sys.write_mesh_csv(&mut mesh).unwrap());
        let mesh = String::from_utf8(mesh).unwrap();
        assert!(mesh.lines().filter(|l| l.starts_with("psi,")).count() > 2);
        assert!(!reference.write_mesh_csv(std::io::sink()).unwrap());
    }

    #[test]
    fn generic_solver_on_finite_interval() {
        // Brownian motion killed at 0 and 1: psi = sinh(c x), phi = sinh(c (1 - x))
        let g = GenericCoefficients::new(|_| 0.0, |_| 1.0);
        let spec = DiffusionSpec::generic(g, Interval::new(0.0, 1.0), 0.5).unwrap();
        assert_eq!(spec.case().tag, Case::Case3);
        let q = 2.0f64;
        let c = (2.0 * q).sqrt();
        let sys = EigenSystem::solve(&spec, q).unwrap();
        let ratio = |x: f64| sys.psi(x).unwrap() / sys.psi(0.5).unwrap();
        for x in [0.05, 0.2, 0.5, 0.8, 0.95] {
            let exact = (c * x).sinh() / (c * 0.5).sinh();
            assert!(rel(ratio(x), exact) < 1e-6, "{x}: {} vs {exact}", ratio(x));
        }
    }

    #[test]
    fn hitting_time_transform_ratio() {
        for spec in catalog() {
            let a = spec.alpha();
            let (x, z) = if spec.interval().left == 0.0 {
                (1.7 * a, 1.2 * a)
            } else {
                (a + 1.0, a + 0.2)
            };
            let mut last = 1.0;
            for q in [0.1, 0.5, 2.0, 8.0] {
                let sys = EigenSystem::solve(&spec, q).unwrap();
                let r = (sys.ln_phi(x).unwrap().ln - sys.ln_phi(z).unwrap().ln).exp();
                assert!(r > 0.0 && r < 1.0);
                assert!(r < last);
                last = r;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn solutions_are_positive_and_monotone(nu in 0.2f64..2.0, q in 0.05f64..5.0, x in -3.0f64..3.0, dx in 0.01f64..1.0) {
            for spec in [
                bm(nu, 0.0),
                DiffusionSpec::ornstein_uhlenbeck(-nu, 0.0).unwrap(),
                DiffusionSpec::switching_brownian(-nu, -1.0, 0.1).unwrap(),
            ] {
                let sys = EigenSystem::solve(&spec, q).unwrap();
                let (p1, p2) = (sys.ln_psi(x).unwrap(), sys.ln_psi(x + dx).unwrap());
                let (f1, f2) = (sys.ln_phi(x).unwrap(), sys.ln_phi(x + dx).unwrap());
                prop_assert!(p1.ln < p2.ln && p1.slope > 0.0);
                prop_assert!(f1.ln > f2.ln && f1.slope < 0.0);
            }
        }
    }
}
