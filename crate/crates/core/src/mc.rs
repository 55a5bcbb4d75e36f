//! Monte Carlo estimates of the last passage time.
//!
//! Paths are advanced with Euler–Maruyama in a working coordinate (the
//! logarithm for geometric families, the state otherwise) until their
//! probability of ever returning to `alpha` drops below `kill_band`. Each
//! path records its last visit to `alpha` and the time it spent above and
//! below the level up to then.
//!
//! Between grid points the path is taken to be the Brownian bridge of the
//! frozen Euler step. Visits to `alpha` inside a step are detected with the
//! bridge crossing probability, and the last one is located by bisecting
//! the bridge. For coefficients that are constant on each side of the level
//! (in the working coordinate) this is the exact conditional law.
//!
//! Every path (or antithetic pair) draws from its own ChaCha stream keyed
//! by `(seed, index)`, so a run is reproducible independently of how rayon
//! schedules the work.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::diffusion::{DiffusionSpec, Family};
use crate::error::{domain, Error, Result};

/// Active fraction below which the horizon stops doubling.
pub const ACTIVE_TARGET: f64 = 1e-3;
/// Truncated fraction above which a run carries a [`TruncationWarning`].
pub const TRUNCATION_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub dt: f64,
    /// Initial horizon; doubled up to `max_doublings` times while more than
    /// 0.1% of paths are still active.
    pub horizon: f64,
    pub max_doublings: u32,
    pub paths: usize,
    pub seed: u64,
    /// A path is retired once its probability of returning to `alpha`,
    /// a normalized scale distance to the attracting boundary, falls below
    /// this.
    pub kill_band: f64,
    /// Pair path `2k + 1` with the mirrored increments of path `2k`.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 16.0,
            max_doublings: 8,
            paths: 100_000,
            seed: 0,
            kill_band: 1e-6,
            antithetic: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return domain(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.paths == 0 {
            return domain("at least one path is required");
        }
        if !(self.kill_band > 0.0 && self.kill_band < 1.0) {
            return domain(format!("kill band must lie in (0, 1), got {}", self.kill_band));
        }
        Ok(())
    }
}

/// One simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    /// `lambda_a + lambda_b`.
    pub lambda: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// The path never reached `alpha`.
    pub escaped: bool,
    /// The path was still active at the final horizon.
    pub truncated: bool,
}

/// More than 1% of paths were still active at the final horizon; their
/// samples are lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub fraction: f64,
    pub horizon: f64,
}

impl std::fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:.3}% of paths still active at horizon {}",
            100.0 * self.fraction,
            self.horizon
        )
    }
}

#[derive(Debug, Clone)]
pub struct McRun {
    pub samples: Vec<PathSample>,
    pub escapes: usize,
    pub truncated: usize,
    pub horizon: f64,
    pub dt: f64,
    pub antithetic: bool,
    pub warning: Option<TruncationWarning>,
}

impl McRun {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn truncated_fraction(&self) -> f64 {
        self.truncated as f64 / self.samples.len().max(1) as f64
    }

    /// Fraction of paths that never reached `alpha`, with its binomial
    /// standard error.
    pub fn escape_frequency(&self) -> Result<Estimate> {
        let n = non_empty(self)? as f64;
        let p = self.escapes as f64 / n;
        Ok(Estimate {
            mean: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        })
    }

    /// Writes `t_lambda,lambda_A,lambda_B,escaped` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t_lambda,lambda_A,lambda_B,escaped")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{}",
                s.lambda, s.lambda_a, s.lambda_b, s.escaped as u8
            )?;
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

fn non_empty(run: &McRun) -> Result<usize> {
    if run.samples.is_empty() {
        domain("empty Monte Carlo run")
    } else {
        Ok(run.samples.len())
    }
}

fn mean_and_error(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Mean of `exp(-q lambda)`. Antithetic pairs are averaged before the
/// standard error is taken.
pub fn empirical_laplace(run: &McRun, q: f64) -> Result<Estimate> {
    non_empty(run)?;
    if !(q >= 0.0 && q.is_finite()) {
        return domain(format!("q must be nonnegative, got {q}"));
    }
    let values: Vec<f64> = run.samples.iter().map(|s| (-q * s.lambda).exp()).collect();
    if run.antithetic && values.len() >= 2 {
        let pairs: Vec<f64> = values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let mut est = mean_and_error(&pairs);
        if values.len() % 2 == 1 {
            // an odd trailing path is folded into the mean only
            let n = values.len() as f64;
            est.mean = (est.mean * (n - 1.0) + values[values.len() - 1]) / n;
        }
        return Ok(est);
    }
    Ok(mean_and_error(&values))
}

/// Right-continuous empirical distribution function of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= t);
        k as f64 / self.sorted.len() as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn empirical_cdf(run: &McRun) -> Result<EmpiricalCdf> {
    non_empty(run)?;
    let mut sorted: Vec<f64> = run.samples.iter().map(|s| s.lambda).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

/// Kolmogorov–Smirnov distance between the run and a distribution function
/// on `[0, inf)`. Its left limits are taken one ulp below each sample, and
/// it is treated as zero below the origin so that an atom at zero counts.
pub fn ks_distance<F: Fn(f64) -> f64>(run: &McRun, cdf: F) -> Result<f64> {
    let emp = empirical_cdf(run)?;
    let s = emp.samples();
    let n = s.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let mut j = i;
        while j < s.len() && s[j] == v {
            j += 1;
        }
        let f = cdf(v);
        let f_left = if v > 0.0 { cdf(v.next_down()) } else { 0.0 };
        worst = worst.max((f_left - i as f64 / n).abs());
        worst = worst.max((f - j as f64 / n).abs());
        i = j;
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy)]
enum Law {
    /// Constant drift and volatility on each side of the level.
    Piecewise {
        above: (f64, f64),
        below: (f64, f64),
    },
    Ou {
        kappa: f64,
    },
}

/// Dynamics in the working coordinate `y`.
struct Dynamics<'a> {
    spec: &'a DiffusionSpec,
    law: Option<Law>,
    log: bool,
    level: f64,
    low: f64,
    high: f64,
    /// Kill thresholds in `y`.
    kill_low: f64,
    kill_high: f64,
}

impl<'a> Dynamics<'a> {
    fn new(spec: &'a DiffusionSpec, kill_band: f64) -> Result<Self> {
        let (law, log) = match *spec.family() {
            Family::BrownianDrift { nu } => (
                Some(Law::Piecewise {
                    above: (-nu, 1.0),
                    below: (-nu, 1.0),
                }),
                false,
            ),
            Family::SwitchingBrownian { mu_a, mu_b } => (
                Some(Law::Piecewise {
                    above: (mu_a, 1.0),
                    below: (mu_b, 1.0),
                }),
                false,
            ),
            Family::GeometricBm { mu, sigma } => {
                let p = (mu - 0.5 * sigma * sigma, sigma);
                (Some(Law::Piecewise { above: p, below: p }), true)
            }
            Family::SwitchingGbm {
                mu_a,
                sigma_a,
                mu_b,
                sigma_b,
            } => (
                Some(Law::Piecewise {
                    above: (mu_a - 0.5 * sigma_a * sigma_a, sigma_a),
                    below: (mu_b - 0.5 * sigma_b * sigma_b, sigma_b),
                }),
                true,
            ),
            Family::OrnsteinUhlenbeck { kappa } => (Some(Law::Ou { kappa }), false),
            Family::Generic(_) => (None, false),
        };
        let interval = spec.interval();
        let to_y = |x: f64| if log { x.ln() } else { x };
        let mut d = Self {
            spec,
            law,
            log,
            level: to_y(spec.alpha()),
            low: to_y(interval.left),
            high: to_y(interval.right),
            kill_low: f64::NEG_INFINITY,
            kill_high: f64::INFINITY,
        };
        d.kill_low = d.kill_level(kill_band, true)?;
        d.kill_high = d.kill_level(kill_band, false)?;
        Ok(d)
    }

    fn to_x(&self, y: f64) -> f64 {
        if self.log {
            y.exp()
        } else {
            y
        }
    }

    /// Probability of returning to the level from `y`.
    fn return_probability(&self, y: f64, below: bool) -> Result<f64> {
        let x = self.to_x(y);
        let alpha = self.spec.alpha();
        if below {
            Ok(self.spec.scale_from_left(x)? / self.spec.scale_from_left(alpha)?)
        } else {
            Ok(self.spec.scale_to_right(x)? / self.spec.scale_to_right(alpha)?)
        }
    }

    fn kill_level(&self, band: f64, below: bool) -> Result<f64> {
        let case = self.spec.case();
        let attracting = if below {
            case.left_attracting()
        } else {
            case.right_attracting()
        };
        let infinite = if below { f64::NEG_INFINITY } else { f64::INFINITY };
        if !attracting {
            return Ok(infinite);
        }
        let end = if below { self.low } else { self.high };
        let dir = if below { -1.0 } else { 1.0 };
        let unit = self.level.abs().max(1.0);
        let inside = self.level;
        let mut outside = None;
        for k in 0..200 {
            let y = if end.is_finite() {
                end + (self.level - end) * 0.5f64.powi(k + 1)
            } else {
                self.level + dir * unit * 2f64.powi(k)
            };
            let p = self.return_probability(y, below)?;
            if p < band {
                outside = Some(y);
                break;
            }
        }
        let Some(mut out) = outside else {
            return Ok(infinite);
        };
        let mut inn = inside;
        for _ in 0..100 {
            let mid = 0.5 * (inn + out);
            if mid == inn || mid == out {
                break;
            }
            if self.return_probability(mid, below)? < band {
                out = mid;
            } else {
                inn = mid;
            }
        }
        Ok(out)
    }

    #[inline]
    fn coefficients(&self, y: f64) -> (f64, f64) {
        match self.law {
            Some(Law::Piecewise { above, below }) => {
                if y >= self.level {
                    above
                } else {
                    below
                }
            }
            Some(Law::Ou { kappa }) => (-kappa * y, 1.0),
            None => (self.spec.drift(y), self.spec.volatility(y)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Active,
    Escaped,
}

struct PathState {
    rng: ChaCha8Rng,
    mirror: bool,
    y: f64,
    step: u64,
    above_steps: u64,
    below_steps: u64,
    hit: bool,
    lambda_a: f64,
    lambda_b: f64,
    /// Step holding the latest crossing, located only once no later one
    /// can occur.
    pending: Option<Crossing>,
    status: Status,
}

#[derive(Debug, Clone, Copy)]
struct Crossing {
    a: f64,
    b: f64,
    var: f64,
    above: bool,
    above_steps: u64,
    below_steps: u64,
}

impl PathState {
    fn new(seed: u64, stream: u64, mirror: bool, y0: f64, level: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            mirror,
            y: y0,
            step: 0,
            above_steps: 0,
            below_steps: 0,
            hit: y0 == level,
            pending: None,
            lambda_a: 0.0,
            lambda_b: 0.0,
            status: Status::Active,
        }
    }

    /// Fixes the last passage inside the pending crossing step.
    fn settle(&mut self, dt: f64) {
        if let Some(c) = self.pending.take() {
            let part = self.last_crossing(c.a, c.b, c.var) * dt;
            self.lambda_a = c.above_steps as f64 * dt + if c.above { part } else { 0.0 };
            self.lambda_b = c.below_steps as f64 * dt + if c.above { 0.0 } else { part };
        }
    }

    fn advance(&mut self, dyns: &Dynamics<'_>, dt: f64, last_step: u64) {
        let sqrt_dt = dt.sqrt();
        let level = dyns.level;
        while self.status == Status::Active && self.step < last_step {
            let y0 = self.y;
            let (mu, sigma) = dyns.coefficients(y0);
            let z = self.normal();
            let mut y1 = y0 + mu * dt + sigma * sqrt_dt * z;
            if !(y1 > dyns.low) {
                if dyns.kill_low > f64::NEG_INFINITY {
                    y1 = dyns.low;
                } else {
                    y1 = 0.5 * (y0 + dyns.low);
                }
            } else if !(y1 < dyns.high) {
                if dyns.kill_high < f64::INFINITY {
                    y1 = dyns.high;
                } else {
                    y1 = 0.5 * (y0 + dyns.high);
                }
            }
            let above = y0 >= level;
            let (a, b) = (y0 - level, y1 - level);
            let crossed = if above != (b >= 0.0) {
                true
            } else {
                let p = crossing_probability(a, b, sigma * sigma * dt);
                p > 0.0 && self.uniform() < p
            };
            if crossed {
                self.hit = true;
                self.pending = Some(Crossing {
                    a,
                    b,
                    var: sigma * sigma * dt,
                    above,
                    above_steps: self.above_steps,
                    below_steps: self.below_steps,
                });
            }
            if above {
                self.above_steps += 1;
            } else {
                self.below_steps += 1;
            }
            self.step += 1;
            self.y = y1;
            if y1 < dyns.kill_low || y1 > dyns.kill_high {
                self.status = Status::Escaped;
                self.settle(dt);
            }
        }
    }

    fn uniform(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        if self.mirror {
            1.0 - u
        } else {
            u
        }
    }

    fn normal(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        if self.mirror {
            -z
        } else {
            z
        }
    }

    /// Position, as a fraction of the step, of the last zero of a Brownian
    /// bridge from `a` to `b` with variance `var` over the step, given that
    /// it has one. Bisects with conditioned midpoints down to 2^-16 of the
    /// step and returns the centre of the final piece.
    fn last_crossing(&mut self, mut a: f64, b_end: f64, var: f64) -> f64 {
        let mut b = b_end;
        let mut start = 0.0;
        let mut width = 1.0;
        let mut v = var;
        for _ in 0..16 {
            let half = 0.5 * v;
            loop {
                let m = 0.5 * (a + b) + (0.5 * half).sqrt() * self.normal();
                let right = crossing_probability(m, b, half);
                if right >= 1.0 || (right > 0.0 && self.uniform() < right) {
                    a = m;
                    start += 0.5 * width;
                    break;
                }
                let left = crossing_probability(a, m, half);
                if left >= 1.0 || (left > 0.0 && self.uniform() < left) {
                    b = m;
                    break;
                }
            }
            width *= 0.5;
            v = half;
        }
        start + 0.5 * width
    }

    fn sample(&self) -> PathSample {
        PathSample {
            lambda: self.lambda_a + self.lambda_b,
            lambda_a: self.lambda_a,
            lambda_b: self.lambda_b,
            escaped: !self.hit,
            truncated: self.status == Status::Active,
        }
    }
}

/// Probability that a Brownian bridge from `a` to `b` with total variance
/// `var` visits zero.
#[inline]
fn crossing_probability(a: f64, b: f64, var: f64) -> f64 {
    if (a >= 0.0) != (b >= 0.0) {
        return 1.0;
    }
    let exponent = 2.0 * a * b / var;
    if exponent > 40.0 {
        0.0
    } else {
        (-exponent).exp()
    }
}

fn steps_for(horizon: f64, dt: f64) -> u64 {
    (horizon / dt * (1.0 + 1e-12)).floor() as u64
}

/// Simulates `cfg.paths` paths from `x0` and records their last passage
/// times at the spec's level.
pub fn simulate(spec: &DiffusionSpec, x0: f64, cfg: &McConfig) -> Result<McRun> {
    cfg.validate()?;
    if !spec.interval().contains(x0) {
        return domain(format!("x0 = {x0} outside the state interval"));
    }
    let dyns = Dynamics::new(spec, cfg.kill_band)?;
    let y0 = if dyns.log { x0.ln() } else { x0 };
    if !y0.is_finite() {
        return Err(Error::Domain(format!("x0 = {x0} has no finite coordinate")));
    }
    let mut paths: Vec<PathState> = (0..cfg.paths)
        .map(|i| {
            let (stream, mirror) = if cfg.antithetic {
                ((i / 2) as u64, i % 2 == 1)
            } else {
                (i as u64, false)
            };
            PathState::new(cfg.seed, stream, mirror, y0, dyns.level)
        })
        .collect();
    let mut horizon = cfg.horizon;
    let mut doublings = 0;
    loop {
        let last = steps_for(horizon, cfg.dt);
        paths
            .par_iter_mut()
            .for_each(|p| p.advance(&dyns, cfg.dt, last));
        let active = paths.iter().filter(|p| p.status == Status::Active).count();
        if (active as f64) < ACTIVE_TARGET * cfg.paths as f64 || doublings >= cfg.max_doublings {
            break;
        }
        horizon *= 2.0;
        doublings += 1;
    }
    paths.par_iter_mut().for_each(|p| p.settle(cfg.dt));
    let samples: Vec<PathSample> = paths.iter().map(PathState::sample).collect();
    let escapes = samples.iter().filter(|s| s.escaped && !s.truncated).count();
    let truncated = samples.iter().filter(|s| s.truncated).count();
    let fraction = truncated as f64 / samples.len() as f64;
    Ok(McRun {
        samples,
        escapes,
        truncated,
        horizon,
        dt: cfg.dt,
        antithetic: cfg.antithetic,
        warning: (fraction > TRUNCATION_LIMIT).then_some(TruncationWarning { fraction, horizon }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(paths: usize) -> McConfig {
        McConfig {
            paths,
            dt: 1e-2,
            ..McConfig::default()
        }
    }

    #[test]
    fn occupation_split_adds_up() {
        let spec = DiffusionSpec::switching_brownian(-1.0, -2.0, 0.0).unwrap();
        let run = simulate(&spec, 0.3, &small(500)).unwrap();
        for s in &run.samples {
            assert_eq!(s.lambda, s.lambda_a + s.lambda_b);
            assert!(s.lambda_a >= 0.0 && s.lambda_b >= 0.0);
        }
        assert!(run.warning.is_none());
    }

    #[test]
    fn tiny_horizon_is_degenerate() {
        let spec = DiffusionSpec::brownian_drift(1.0, 0.0).unwrap();
        let cfg = McConfig {
            horizon: 1e-6,
            max_doublings: 0,
            ..small(200)
        };
        let run = simulate(&spec, 0.0, &cfg).unwrap();
        assert!(run.samples.iter().all(|s| s.lambda == 0.0));
        assert_eq!(run.escapes, 0);
        assert_eq!(run.truncated, 200);
        assert!(run.warning.is_some());
    }

    #[test]
    fn reproducible_for_a_seed() {
        let spec = DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.0).unwrap();
        let a = simulate(&spec, 0.5, &small(300)).unwrap();
        let b = simulate(&spec, 0.5, &small(300)).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = simulate(&spec, 0.5, &McConfig { seed: 9, ..small(300) }).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn antithetic_pairs_mirror() {
        let spec = DiffusionSpec::brownian_drift(1.0, 0.0).unwrap();
        let cfg = McConfig {
            antithetic: true,
            ..small(400)
        };
        let run = simulate(&spec, 0.0, &cfg).unwrap();
        let est = empirical_laplace(&run, 1.5).unwrap();
        assert!((est.mean - 0.5).abs() < 4.0 * est.std_error + 0.02, "{est:?}");
    }

    #[test]
    fn estimators() {
        let spec = DiffusionSpec::brownian_drift(1.0, 0.0).unwrap();
        let run = simulate(&spec, 0.0, &small(200)).unwrap();
        assert_eq!(empirical_laplace(&run, 0.0).unwrap().mean, 1.0);
        let emp = empirical_cdf(&run).unwrap();
        assert_eq!(ks_distance(&run, |t| emp.eval(t)).unwrap(), 0.0);
        assert!(empirical_laplace(&run, -1.0).is_err());
        let empty = McRun {
            samples: Vec::new(),
            escapes: 0,
            truncated: 0,
            horizon: 1.0,
            dt: 0.1,
            antithetic: false,
            warning: None,
        };
        assert!(matches!(empirical_laplace(&empty, 1.0), Err(Error::Domain(_))));
        assert!(empirical_cdf(&empty).is_err());
    }

    #[test]
    fn ks_handles_atom() {
        let run = McRun {
            samples: [0.0, 0.0, 1.0, 2.0]
                .iter()
                .map(|&l| PathSample {
                    lambda: l,
                    lambda_a: l,
                    lambda_b: 0.0,
                    escaped: l == 0.0,
                    truncated: false,
                })
                .collect(),
            escapes: 2,
            truncated: 0,
            horizon: 1.0,
            dt: 0.1,
            antithetic: false,
            warning: None,
        };
        // atom 1/2 at zero, then uniform on (0, 2]
        let d = ks_distance(&run, |t| if t < 0.0 { 0.0 } else { 0.5 + 0.25 * t.min(2.0) }).unwrap();
        assert!((d - 0.25).abs() < 1e-15, "{d}");
    }

    #[test]
    fn csv_dump() {
        let spec = DiffusionSpec::brownian_drift(1.0, 0.0).unwrap();
        let run = simulate(&spec, 0.0, &small(3)).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_lambda,lambda_A,lambda_B,escaped\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(McConfig { dt: 0.0, ..McConfig::default() }.validate().is_err());
        assert!(McConfig { paths: 0, ..McConfig::default() }.validate().is_err());
        assert!(McConfig { kill_band: 1.0, ..McConfig::default() }.validate().is_err());
        let spec = DiffusionSpec::geometric_bm(-0.1, 0.75, 1.0).unwrap();
        assert!(simulate(&spec, -1.0, &small(1)).is_err());
    }
}
