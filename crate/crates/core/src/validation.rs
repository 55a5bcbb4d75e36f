//! Identity checks that a spec's Green functions and transforms must
//! satisfy. Each check reports its worst error against a tolerance.

use crate::diffusion::{Case, DiffusionSpec, Family};
use crate::eigen::ZeroEigenSystem;
use crate::error::Result;
use crate::green::GreenKit;
use crate::lastpassage::LastPassageAnalyzer;
use crate::switching;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst error seen, or NaN when the check is qualitative.
    pub error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &'static str, error: f64, tolerance: f64) -> Self {
        Self {
            name,
            passed: error <= tolerance,
            error,
            tolerance,
            detail: String::new(),
        }
    }

    fn flag(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            error: f64::NAN,
            tolerance: f64::NAN,
            detail: detail.into(),
        }
    }

    fn failed(name: &'static str, err: crate::Error) -> Self {
        Self::flag(name, false, err.to_string())
    }
}

const RATES: [f64; 3] = [0.1, 1.0, 10.0];

fn is_generic(spec: &DiffusionSpec) -> bool {
    matches!(spec.family(), Family::Generic(_))
}

fn is_geometric(spec: &DiffusionSpec) -> bool {
    matches!(spec.family(), Family::GeometricBm { .. } | Family::SwitchingGbm { .. })
}

/// `n` points on each side of `alpha`, geometric for the geometric
/// families and kept away from finite endpoints otherwise.
pub fn sample_points(spec: &DiffusionSpec, n: usize) -> Vec<f64> {
    let alpha = spec.alpha();
    let iv = spec.interval();
    let mut xs = Vec::with_capacity(2 * n + 1);
    for k in 1..=n {
        let d = 1.5 * k as f64 / n as f64;
        if is_geometric(spec) {
            xs.push(alpha * (-d).exp());
            xs.push(alpha * d.exp());
        } else {
            let down = if iv.left.is_finite() { d.min(0.9 * (alpha - iv.left) * k as f64 / n as f64) } else { d };
            let up = if iv.right.is_finite() { d.min(0.9 * (iv.right - alpha) * k as f64 / n as f64) } else { d };
            xs.push(alpha - down);
            xs.push(alpha + up);
        }
    }
    xs.push(alpha);
    xs.sort_by(f64::total_cmp);
    xs
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn run<F: FnOnce() -> Result<CheckResult>>(name: &'static str, f: F) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::failed(name, e))
}

/// Scale, speed and case classification.
pub fn check_diffusion(spec: &DiffusionSpec) -> Vec<CheckResult> {
    let xs = sample_points(spec, 10);
    vec![
        run("scale increasing", || {
            let s: Vec<f64> = xs.iter().map(|&x| spec.scale(x)).collect::<Result<_>>()?;
            let ok = s.windows(2).all(|w| w[0] < w[1]);
            Ok(CheckResult::flag("scale increasing", ok, format!("{} points", xs.len())))
        }),
        run("scale slope and speed positive", || {
            let mut ok = true;
            for &x in &xs {
                ok &= spec.scale_slope(x)? > 0.0 && spec.speed_density(x)? > 0.0;
            }
            Ok(CheckResult::flag("scale slope and speed positive", ok, ""))
        }),
    ]
}

/// Wronskian constancy and monotonicity of the fundamental solutions.
pub fn check_eigen(spec: &DiffusionSpec) -> Vec<CheckResult> {
    let xs = sample_points(spec, 25);
    let tol = if is_generic(spec) { 1e-5 } else { 1e-8 };
    let kit = GreenKit::new(spec);
    let mut out = vec![run("wronskian constant", || {
        let mut worst = 0.0f64;
        for q in RATES {
            let g = kit.at(q)?;
            let sys = g.eigen();
            let w = sys.wronskian();
            for &x in &xs {
                worst = worst.max(rel(sys.wronskian_at(x)?, w));
            }
        }
        Ok(CheckResult::measured("wronskian constant", worst, tol))
    })];
    out.push(run("psi increasing, phi decreasing", || {
        let sys = kit.at(1.0)?;
        let sys = sys.eigen();
        let psi: Vec<f64> = xs.iter().map(|&x| sys.ln_psi(x).map(|p| p.ln)).collect::<Result<_>>()?;
        let phi: Vec<f64> = xs.iter().map(|&x| sys.ln_phi(x).map(|p| p.ln)).collect::<Result<_>>()?;
        let ok = psi.windows(2).all(|w| w[0] < w[1]) && phi.windows(2).all(|w| w[0] > w[1]);
        Ok(CheckResult::flag("psi increasing, phi decreasing", ok, ""))
    }));
    out
}

/// Identities of the reflected Green functions.
pub fn check_green(spec: &DiffusionSpec) -> Vec<CheckResult> {
    let generic = is_generic(spec);
    let kit = GreenKit::new(spec);
    let alpha = spec.alpha();
    let xs = sample_points(spec, 5);
    let mut out = Vec::new();
    out.push(run("harmonic sum at alpha", || {
        let mut worst = 0.0f64;
        for q in [0.5, 1.0, 2.0] {
            let g = kit.at(q)?;
            let lhs = 1.0 / g.green_a_alpha() + 1.0 / g.green_b_alpha();
            worst = worst.max(rel(lhs, 1.0 / g.green(alpha, alpha)?));
        }
        Ok(CheckResult::measured("harmonic sum at alpha", worst, if generic { 1e-5 } else { 1e-8 }))
    }));
    out.push(run("green decomposition", || {
        let mut worst = 0.0f64;
        for q in RATES {
            let g = kit.at(q)?;
            for &x in &xs {
                worst = worst.max(rel(g.decomposed(x)?, g.green(x, alpha)?));
            }
        }
        Ok(CheckResult::measured("green decomposition", worst, if generic { 1e-4 } else { 1e-8 }))
    }));
    out.push(run("reflecting condition at alpha", || {
        let mut worst = 0.0f64;
        for q in RATES {
            // relative to the two terms that cancel in a1 psi^+ + a2 phi^+
            let g = kit.at(q)?;
            let c = g.reflected_constants();
            let sys = g.eigen();
            let scale = (c.a1 * sys.dpsi_ds(alpha)?).abs() + (c.a2 * sys.dphi_ds(alpha)?).abs();
            worst = worst.max((g.psi_a(alpha)?.1 / scale).abs());
            let scale = (c.b1 * sys.dpsi_ds(alpha)?).abs() + (c.b2 * sys.dphi_ds(alpha)?).abs();
            worst = worst.max((g.phi_b(alpha)?.1 / scale).abs());
        }
        Ok(CheckResult::measured("reflecting condition at alpha", worst, 1e-8))
    }));
    out.push(run("reflected solutions monotone", || {
        let g = kit.at(1.0)?;
        let above: Vec<f64> = xs.iter().copied().filter(|&x| x >= alpha).collect();
        let below: Vec<f64> = xs.iter().copied().filter(|&x| x <= alpha).collect();
        let pa: Vec<f64> = above.iter().map(|&x| g.psi_a(x).map(|v| v.0)).collect::<Result<_>>()?;
        let pb: Vec<f64> = below.iter().map(|&x| g.phi_b(x).map(|v| v.0)).collect::<Result<_>>()?;
        let ok = pa.windows(2).all(|w| w[0] < w[1]) && pb.windows(2).all(|w| w[0] > w[1]);
        Ok(CheckResult::flag("reflected solutions monotone", ok, ""))
    }));
    out.push(run("q = 0 reflected identity", || {
        let z = kit.zero()?;
        let g0 = z.green(alpha, alpha)?;
        let ga = z.green_a(alpha, alpha)?;
        let gb = z.green_b(alpha, alpha)?;
        let err = match spec.case().tag {
            Case::Case1 => rel(gb.value("G_0^B")?, g0) + if ga.is_infinite() { 0.0 } else { 1.0 },
            Case::Case2 => rel(ga.value("G_0^A")?, g0) + if gb.is_infinite() { 0.0 } else { 1.0 },
            Case::Case3 => rel(ga.reciprocal() + gb.reciprocal(), 1.0 / g0),
        };
        Ok(CheckResult::measured("q = 0 reflected identity", err, 1e-8))
    }));
    out.push(run("zero-rate boundary value", || {
        let z = ZeroEigenSystem::solve(spec)?;
        let case = spec.case();
        if !case.left_attracting() {
            return Ok(CheckResult::flag("zero-rate boundary value", true, "left boundary not attracting"));
        }
        let iv = spec.interval();
        let at_alpha = z.psi0(alpha)?;
        let mut last = at_alpha;
        let mut ok = true;
        let mut x = alpha;
        for k in 1..=400 {
            x = if iv.left.is_finite() {
                iv.left + (alpha - iv.left) * 0.5f64.powi(k)
            } else {
                alpha - alpha.abs().max(1.0) * 2f64.powi(k - 1)
            };
            let v = z.psi0(x)?;
            ok &= v <= last;
            last = v;
            if v < 1e-6 * at_alpha {
                break;
            }
        }
        let ok = ok && last < 1e-6 * at_alpha;
        Ok(CheckResult::flag("zero-rate boundary value", ok, format!("psi_0({x}) = {last}")))
    }));
    out
}

/// Transform identities of the last passage time.
pub fn check_lastpassage(spec: &DiffusionSpec) -> Vec<CheckResult> {
    let generic = is_generic(spec);
    let alpha = spec.alpha();
    let xs = sample_points(spec, 5);
    let analyzer = match LastPassageAnalyzer::new(spec) {
        Ok(a) => a,
        Err(e) => return vec![CheckResult::failed("last passage analyzer", e)],
    };
    let a = &analyzer;
    let mut out = Vec::new();
    out.push(run("decomposition matches direct transform", || {
        let mut worst = 0.0f64;
        for q in RATES {
            for &x in &xs {
                worst = worst.max((a.laplace_from(q, x)? - a.laplace_direct(q, x)?).abs());
            }
        }
        Ok(CheckResult::measured(
            "decomposition matches direct transform",
            worst,
            if generic { 1e-5 } else { 1e-10 },
        ))
    }));
    out.push(run("killing rate representation", || {
        let mut worst = 0.0f64;
        for q in RATES {
            let f = a.factors(q)?;
            worst = worst.max((f.factor_a - f.factor_a_via_rate).abs());
        }
        Ok(CheckResult::measured("killing rate representation", worst, 1e-14))
    }));
    out.push(run("transform decreasing in q", || {
        let mut ok = true;
        for &x in &xs {
            let mut prev = 1.0f64;
            for q in [0.01, 0.1, 0.5, 1.0, 5.0, 20.0] {
                let v = a.laplace_from(q, x)?;
                ok &= v > 0.0 && v <= 1.0 && v < prev;
                prev = v;
            }
        }
        Ok(CheckResult::flag("transform decreasing in q", ok, ""))
    }));
    out.push(run("transform tends to one", || {
        let err = (a.laplace_at_alpha(1e-8)? - 1.0).abs();
        Ok(CheckResult::measured("transform tends to one", err, 1e-6))
    }));
    out.push(run("decomposition factors", || {
        let mut ok = true;
        for q in RATES {
            let f = a.factors(q)?;
            ok &= f.factor_a > 0.0 && f.factor_a < 1.0 && f.factor_b > 0.0;
            if spec.case().tag == Case::Case1 {
                ok &= f.factor_b < 1.0;
            }
        }
        Ok(CheckResult::flag("decomposition factors", ok, ""))
    }));
    out.push(run("escape probability in range", || {
        let mut ok = a.escape_probability(alpha)? == 0.0;
        for &x in &xs {
            let p = a.escape_probability(x)?;
            ok &= (0.0..1.0).contains(&p);
        }
        Ok(CheckResult::flag("escape probability in range", ok, ""))
    }));
    if let Some(check) = check_switching(spec, a) {
        out.push(check);
    }
    out
}

fn check_switching(spec: &DiffusionSpec, a: &LastPassageAnalyzer) -> Option<CheckResult> {
    const NAME: &str = "switching closed form";
    match *spec.family() {
        Family::SwitchingBrownian { mu_a, mu_b } if mu_a < 0.0 && mu_b < 0.0 && spec.alpha() == 0.0 => {
            Some(run(NAME, || {
                let mut worst = 0.0f64;
                for q in RATES {
                    worst = worst.max(rel(a.laplace_at_alpha(q)?, switching::switching_bm_laplace(mu_a, mu_b, q)?));
                    let g = a.kit().at(q)?.green(0.0, 0.0)?;
                    worst = worst.max(rel(g, switching::switching_bm_green(mu_a, mu_b, q)?));
                }
                Ok(CheckResult::measured(NAME, worst, 1e-10))
            }))
        }
        Family::SwitchingGbm { mu_a, sigma_a, mu_b, sigma_b }
            if switching::gbm_nu(mu_a, sigma_a) < 0.0 && switching::gbm_nu(mu_b, sigma_b) < 0.0 =>
        {
            Some(run(NAME, || {
                let mut worst = 0.0f64;
                for q in RATES {
                    let closed = switching::switching_gbm_laplace(mu_a, sigma_a, mu_b, sigma_b, spec.alpha(), q)?;
                    worst = worst.max(rel(a.laplace_at_alpha(q)?, closed));
                }
                Ok(CheckResult::measured(NAME, worst, 1e-10))
            }))
        }
        _ => None,
    }
}

/// Every suite above, in order.
pub fn validate(spec: &DiffusionSpec) -> Vec<CheckResult> {
    let mut out = check_diffusion(spec);
    out.extend(check_eigen(spec));
    out.extend(check_green(spec));
    out.extend(check_lastpassage(spec));
    out
}
