//! Green functions of the diffusion and of its two reflected pieces.
//!
//! `X^A` lives on `[alpha, r)` and `X^B` on `(l, alpha]`, each reflecting at
//! `alpha`. Their Green functions are built from the original pair
//! `psi_q`, `phi_q` by the reflecting boundary condition at `alpha`:
//! `psi^A = a1 psi + a2 phi` with `a1 = -phi^+(alpha)/w`, `a2 = psi^+(alpha)/w`,
//! and `phi^B = b1 psi + b2 phi` with `b1 = -phi^-(alpha)/w`, `b2 = psi^-(alpha)/w`.
//! All densities are with respect to the speed measure.

use std::fmt;

use crate::diffusion::{Case, CaseClass, DiffusionSpec};
use crate::eigen::{EigenSystem, SolverConfig, ZeroEigenSystem};
use crate::error::{domain, Error, Result};

/// A Green value that may be `+inf` (reflected `q = 0` Green functions on a
/// non-attracting side). Arithmetic has to go through [`GreenValue::finite`]
/// or [`GreenValue::value`], so an infinite value cannot slip into a formula
/// unnoticed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreenValue {
    Finite(f64),
    Infinite,
}

impl GreenValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GreenValue::Finite(v) => Some(v),
            GreenValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, GreenValue::Infinite)
    }

    /// The finite value, or a domain error naming the quantity.
    pub fn value(self, what: &str) -> Result<f64> {
        self.finite()
            .ok_or_else(|| Error::Domain(format!("{what} is infinite")))
    }

    /// `1 / G`, with `1 / inf = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            GreenValue::Finite(v) => 1.0 / v,
            GreenValue::Infinite => 0.0,
        }
    }

    fn from_f64(v: f64) -> Self {
        if v.is_infinite() {
            GreenValue::Infinite
        } else {
            GreenValue::Finite(v)
        }
    }
}

impl fmt::Display for GreenValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GreenValue::Finite(v) => write!(f, "{v}"),
            GreenValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Green-function toolkit bound to a spec and its reference level.
#[derive(Debug, Clone)]
pub struct GreenKit {
    spec: DiffusionSpec,
    solver: SolverConfig,
}

impl GreenKit {
    pub fn new(spec: &DiffusionSpec) -> Self {
        Self {
            spec: spec.clone(),
            solver: SolverConfig::default(),
        }
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    pub fn spec(&self) -> &DiffusionSpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    pub fn case(&self) -> CaseClass {
        self.spec.case()
    }

    /// Green functions at a fixed `q > 0`.
    pub fn at(&self, q: f64) -> Result<GreenQ> {
        let sys = EigenSystem::solve_with(&self.spec, q, self.solver)?;
        GreenQ::new(sys)
    }

    /// Green functions at `q = 0`.
    pub fn zero(&self) -> Result<GreenZero> {
        Ok(GreenZero {
            zero: ZeroEigenSystem::solve(&self.spec)?,
            spec: self.spec.clone(),
        })
    }
}

/// Coefficients of the reflected solutions at `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedConstants {
    pub a1: f64,
    pub a2: f64,
    /// `w^A = -phi^+(alpha)`
    pub w_a: f64,
    pub b1: f64,
    pub b2: f64,
    /// `w^B = psi^-(alpha)`
    pub w_b: f64,
}

/// Green functions of the original and reflected processes at one `q`.
#[derive(Debug, Clone)]
pub struct GreenQ {
    sys: EigenSystem,
    alpha: f64,
    ln_psi_alpha: f64,
    ln_phi_alpha: f64,
    slope_psi_alpha: f64,
    slope_phi_alpha: f64,
    ln_scale_slope_alpha: f64,
}

impl GreenQ {
    fn new(sys: EigenSystem) -> Result<Self> {
        let alpha = sys.spec().alpha();
        let p = sys.ln_psi(alpha)?;
        let f = sys.ln_phi(alpha)?;
        let ln_s = sys.spec().ln_scale_slope(alpha)?;
        Ok(Self {
            alpha,
            ln_psi_alpha: p.ln,
            ln_phi_alpha: f.ln,
            slope_psi_alpha: p.slope,
            slope_phi_alpha: f.slope,
            ln_scale_slope_alpha: ln_s,
            sys,
        })
    }

    pub fn q(&self) -> f64 {
        self.sys.q()
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.sys
    }

    /// `ln G_q(x, y)`.
    pub fn ln_green(&self, x: f64, y: f64) -> Result<f64> {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        Ok(self.sys.ln_psi(lo)?.ln + self.sys.ln_phi(hi)?.ln - self.sys.ln_wronskian())
    }

    /// `G_q(x, y) = psi(x ^ y) phi(x v y) / w`.
    pub fn green(&self, x: f64, y: f64) -> Result<f64> {
        self.ln_green(x, y).map(f64::exp)
    }

    /// `G_q^A(alpha, alpha) = phi(alpha) / (-phi^+(alpha))`.
    pub fn green_a_alpha(&self) -> f64 {
        self.ln_scale_slope_alpha.exp() / -self.slope_phi_alpha
    }

    /// `G_q^B(alpha, alpha) = psi(alpha) / psi^-(alpha)`.
    pub fn green_b_alpha(&self) -> f64 {
        self.ln_scale_slope_alpha.exp() / self.slope_psi_alpha
    }

    /// `G_q^A(x, y)` for `x, y >= alpha`.
    pub fn green_a(&self, x: f64, y: f64) -> Result<f64> {
        if x < self.alpha || y < self.alpha {
            return domain(format!(
                "G^A needs both arguments >= alpha = {}, got ({x}, {y})",
                self.alpha
            ));
        }
        if x == self.alpha && y == self.alpha {
            return Ok(self.green_a_alpha());
        }
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let ln_w = self.sys.ln_wronskian();
        let phi_hi = self.sys.ln_phi(hi)?.ln;
        let psi_lo = self.sys.ln_psi(lo)?.ln;
        let phi_lo = self.sys.ln_phi(lo)?.ln;
        let ratio = self.slope_psi_alpha / -self.slope_phi_alpha;
        Ok((phi_hi + psi_lo - ln_w).exp()
            + ratio * (phi_hi + self.ln_psi_alpha + phi_lo - self.ln_phi_alpha - ln_w).exp())
    }

    /// `G_q^B(x, y)` for `x, y <= alpha`.
    pub fn green_b(&self, x: f64, y: f64) -> Result<f64> {
        if x > self.alpha || y > self.alpha {
            return domain(format!(
                "G^B needs both arguments <= alpha = {}, got ({x}, {y})",
                self.alpha
            ));
        }
        if x == self.alpha && y == self.alpha {
            return Ok(self.green_b_alpha());
        }
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let ln_w = self.sys.ln_wronskian();
        let psi_lo = self.sys.ln_psi(lo)?.ln;
        let phi_hi = self.sys.ln_phi(hi)?.ln;
        let psi_hi = self.sys.ln_psi(hi)?.ln;
        let ratio = -self.slope_phi_alpha / self.slope_psi_alpha;
        Ok((psi_lo + phi_hi - ln_w).exp()
            + ratio * (psi_lo + self.ln_phi_alpha + psi_hi - self.ln_psi_alpha - ln_w).exp())
    }

    /// `G_q(x, alpha)` rebuilt from the reflected Green functions:
    /// `G^A(x, alpha) G^B(alpha, alpha) / (G^A(alpha, alpha) + G^B(alpha, alpha))`
    /// above `alpha`, with the roles of `A` and `B` swapped below.
    pub fn decomposed(&self, x: f64) -> Result<f64> {
        let ga = self.green_a_alpha();
        let gb = self.green_b_alpha();
        if x >= self.alpha {
            Ok(self.green_a(x, self.alpha)? * gb / (ga + gb))
        } else {
            Ok(self.green_b(x, self.alpha)? * ga / (ga + gb))
        }
    }

    pub fn reflected_constants(&self) -> ReflectedConstants {
        let w = self.sys.wronskian();
        let ln_s = self.ln_scale_slope_alpha;
        let dpsi = self.slope_psi_alpha * (self.ln_psi_alpha - ln_s).exp();
        let dphi = self.slope_phi_alpha * (self.ln_phi_alpha - ln_s).exp();
        ReflectedConstants {
            a1: -dphi / w,
            a2: dpsi / w,
            w_a: -dphi,
            b1: -dphi / w,
            b2: dpsi / w,
            w_b: dpsi,
        }
    }

    /// `psi^A(x) = a1 psi(x) + a2 phi(x)` and its scale derivative.
    pub fn psi_a(&self, x: f64) -> Result<(f64, f64)> {
        let c = self.reflected_constants();
        let v = c.a1 * self.sys.psi(x)? + c.a2 * self.sys.phi(x)?;
        let d = c.a1 * self.sys.dpsi_ds(x)? + c.a2 * self.sys.dphi_ds(x)?;
        Ok((v, d))
    }

    /// `phi^B(x) = b1 psi(x) + b2 phi(x)` and its scale derivative.
    pub fn phi_b(&self, x: f64) -> Result<(f64, f64)> {
        let c = self.reflected_constants();
        let v = c.b1 * self.sys.psi(x)? + c.b2 * self.sys.phi(x)?;
        let d = c.b1 * self.sys.dpsi_ds(x)? + c.b2 * self.sys.dphi_ds(x)?;
        Ok((v, d))
    }
}

/// Green functions at `q = 0`.
#[derive(Debug, Clone)]
pub struct GreenZero {
    spec: DiffusionSpec,
    zero: ZeroEigenSystem,
}

impl GreenZero {
    pub fn eigen(&self) -> &ZeroEigenSystem {
        &self.zero
    }

    /// `G_0(x, y)`; always finite for a transient diffusion.
    pub fn green(&self, x: f64, y: f64) -> Result<f64> {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let case = self.zero.case();
        Ok(match case.tag {
            Case::Case1 => self.spec.scale_from_left(lo)?,
            Case::Case2 => self.spec.scale_to_right(hi)?,
            Case::Case3 => {
                self.spec.scale_from_left(lo)? * self.spec.scale_to_right(hi)? / (case.s_r - case.s_ell)
            }
        })
    }

    /// `G_0^A(x, y) = s(r) - s(x v y)` for `x, y >= alpha`; infinite in Case 1.
    pub fn green_a(&self, x: f64, y: f64) -> Result<GreenValue> {
        let alpha = self.spec.alpha();
        if x < alpha || y < alpha {
            return domain(format!("G_0^A needs both arguments >= alpha = {alpha}"));
        }
        Ok(GreenValue::from_f64(self.spec.scale_to_right(x.max(y))?))
    }

    /// `G_0^B(x, y) = s(x ^ y) - s(l)` for `x, y <= alpha`; infinite in Case 2.
    pub fn green_b(&self, x: f64, y: f64) -> Result<GreenValue> {
        let alpha = self.spec.alpha();
        if x > alpha || y > alpha {
            return domain(format!("G_0^B needs both arguments <= alpha = {alpha}"));
        }
        Ok(GreenValue::from_f64(self.spec.scale_from_left(x.min(y))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::parabolic_cylinder_d;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn bm_kit() -> GreenKit {
        GreenKit::new(&DiffusionSpec::brownian_drift(1.0, 0.0).unwrap())
    }

    #[test]
    fn brownian_values_at_origin() {
        let g = bm_kit().at(1.5).unwrap();
        assert!(rel(g.green(0.0, 0.0).unwrap(), 0.25) < 1e-15);
        assert!(rel(g.green_a_alpha(), 1.0) < 1e-15);
        assert!(rel(g.green_b_alpha(), 1.0 / 3.0) < 1e-15);
        assert!(rel(g.green_a(0.0, 0.0).unwrap(), 1.0) < 1e-15);
        let c = g.reflected_constants();
        assert!(rel(c.w_a, 1.0) < 1e-15);
        assert!(rel(c.w_b, 3.0) < 1e-15);
        let z = bm_kit().zero().unwrap();
        assert!(rel(z.green(0.0, 0.0).unwrap(), 0.5) < 1e-15);
        assert_eq!(z.green_b(0.0, 0.0).unwrap(), GreenValue::Finite(0.5));
        assert!(z.green_a(0.0, 0.3).unwrap().is_infinite());
    }

    #[test]
    fn infinite_values_refuse_arithmetic() {
        let z = bm_kit().zero().unwrap();
        let ga = z.green_a(0.0, 0.0).unwrap();
        assert!(matches!(ga.value("G_0^A"), Err(Error::Domain(_))));
        assert_eq!(ga.reciprocal(), 0.0);
        assert_eq!(ga.to_string(), "inf");
    }

    #[test]
    fn reflected_arguments_are_checked() {
        let g = bm_kit().at(1.0).unwrap();
        assert!(matches!(g.green_a(-0.1, 0.5), Err(Error::Domain(_))));
        assert!(matches!(g.green_b(0.1, -0.5), Err(Error::Domain(_))));
        let z = bm_kit().zero().unwrap();
        assert!(z.green_a(-0.1, 0.0).is_err());
        assert!(z.green_b(0.1, 0.0).is_err());
    }

    #[test]
    fn coincident_and_general_paths_agree_near_alpha() {
        let g = GreenKit::new(&DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.4).unwrap())
            .at(0.7)
            .unwrap();
        let e = 1e-9;
        assert!(rel(g.green_a(0.4 + e, 0.4 + e).unwrap(), g.green_a_alpha()) < 1e-7);
        assert!(rel(g.green_b(0.4 - e, 0.4 - e).unwrap(), g.green_b_alpha()) < 1e-7);
    }

    #[test]
    fn case_identities_at_zero() {
        let c1 = GreenKit::new(&DiffusionSpec::brownian_drift(0.8, 0.3).unwrap()).zero().unwrap();
        assert_eq!(
            c1.green_b(0.3, 0.3).unwrap().finite().unwrap(),
            c1.green(0.3, 0.3).unwrap()
        );
        let c2 = GreenKit::new(&DiffusionSpec::brownian_drift(-0.8, 0.3).unwrap()).zero().unwrap();
        assert_eq!(
            c2.green_a(0.3, 0.3).unwrap().finite().unwrap(),
            c2.green(0.3, 0.3).unwrap()
        );
        assert!(c2.green_b(0.3, 0.3).unwrap().is_infinite());
        let ou = GreenKit::new(&DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap()).zero().unwrap();
        let lhs = ou.green_a(0.0, 0.0).unwrap().reciprocal() + ou.green_b(0.0, 0.0).unwrap().reciprocal();
        assert!(rel(lhs, 1.0 / ou.green(0.0, 0.0).unwrap()) < 1e-14);
        assert!(ou.green(-30.0, 0.0).unwrap() < 1e-300);
    }

    #[test]
    fn small_q_limit_brownian() {
        let kit = bm_kit();
        let g0 = kit.zero().unwrap().green(0.3, -0.2).unwrap();
        let gq = kit.at(1e-8).unwrap().green(0.3, -0.2).unwrap();
        assert!((gq - g0).abs() < 1e-6);
    }

    #[test]
    fn reflecting_condition_at_alpha() {
        for spec in [
            DiffusionSpec::brownian_drift(1.0, 0.0).unwrap(),
            DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.3).unwrap(),
            DiffusionSpec::switching_gbm(-0.1, 0.75, -0.1, 1.5, 2.0).unwrap(),
        ] {
            let g = GreenKit::new(&spec).at(1.3).unwrap();
            let a = spec.alpha();
            assert!(g.psi_a(a).unwrap().1.abs() < 1e-8);
            assert!(g.phi_b(a).unwrap().1.abs() < 1e-8);
            // reflected Wronskians
            let c = g.reflected_constants();
            let (pa, dpa) = g.psi_a(a + 0.2).unwrap();
            let sys = g.eigen();
            let wa = dpa * sys.phi(a + 0.2).unwrap() - pa * sys.dphi_ds(a + 0.2).unwrap();
            assert!(rel(wa, c.w_a) < 1e-10);
        }
    }

    #[test]
    fn ou_green_matches_parabolic_cylinder_closed_form() {
        // G_q(x, 0) for dX = X dt + dW
        let kit = GreenKit::new(&DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap());
        for q in [0.5f64, 1.0, 2.0] {
            let g = kit.at(q).unwrap();
            let p = q + 1.0;
            let c = 2f64.sqrt();
            let w = 2.0 * std::f64::consts::PI.sqrt() / libm::tgamma(p);
            for i in 0..=8 {
                let x = -2.0 + 0.5 * i as f64;
                let (lo, hi) = if x <= 0.0 { (x, 0.0) } else { (0.0, x) };
                let psi = (-lo * lo / 2.0).exp() * parabolic_cylinder_d(-p, -c * lo).unwrap();
                let phi = (-hi * hi / 2.0).exp() * parabolic_cylinder_d(-p, c * hi).unwrap();
                let expected = psi * phi / w;
                assert!(rel(g.green(x, 0.0).unwrap(), expected) < 1e-12);
                assert!(rel(g.decomposed(x).unwrap(), expected) < 1e-10, "q={q} x={x}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn symmetry_and_positivity(x in -3.0f64..3.0, y in -3.0f64..3.0, q in 0.05f64..6.0) {
            let kit = GreenKit::new(&DiffusionSpec::switching_brownian(-1.0, -2.0, 0.2).unwrap());
            let g = kit.at(q).unwrap();
            let a = g.green(x, y).unwrap();
            prop_assert!(a > 0.0);
            prop_assert_eq!(a, g.green(y, x).unwrap());
            let (u, v) = (x.abs() + 0.2, y.abs() + 0.2);
            let ga = g.green_a(u, v).unwrap();
            prop_assert!(ga > 0.0 && (ga - g.green_a(v, u).unwrap()).abs() <= 1e-15 * ga);
            let (u, v) = (0.2 - x.abs(), 0.2 - y.abs());
            let gb = g.green_b(u, v).unwrap();
            prop_assert!(gb > 0.0 && (gb - g.green_b(v, u).unwrap()).abs() <= 1e-15 * gb);
            let z = kit.zero().unwrap().green(x, y).unwrap();
            prop_assert!(z > 0.0);
        }

        #[test]
        fn harmonic_sum_at_alpha(q in 0.01f64..20.0, nu in 0.1f64..3.0) {
            for spec in [
                DiffusionSpec::brownian_drift(nu, 0.4).unwrap(),
                DiffusionSpec::switching_brownian(-nu, -1.0, -0.3).unwrap(),
                DiffusionSpec::geometric_bm(-nu, 0.75, 1.3).unwrap(),
            ] {
                let g = GreenKit::new(&spec).at(q).unwrap();
                let a = spec.alpha();
                let lhs = 1.0 / g.green_a_alpha() + 1.0 / g.green_b_alpha();
                prop_assert!(rel(lhs, 1.0 / g.green(a, a).unwrap()) < 1e-10);
            }
        }
    }
}
