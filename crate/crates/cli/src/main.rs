use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lastpass::document::parse_spec;
use lastpass::green::GreenKit;
use lastpass::inversion::{InversionConfig, Method};
use lastpass::lastpassage::LastPassageAnalyzer;
use lastpass::mc::{empirical_laplace, simulate, McConfig};
use lastpass::validation::{sample_points, validate};
use lastpass::{DiffusionSpec, Error};

/// Last passage times of one-dimensional transient diffusions.
#[derive(Parser, Debug)]
#[command(name = "lastpass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Spec file (TOML with keys family, params, interval, alpha).
    #[arg(long, short)]
    spec: PathBuf,
    /// Output CSV. Defaults to <verb>.csv in $LPT_OUTPUT_DIR when that is
    /// set, and to standard output otherwise.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Starting point; defaults to alpha.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Laplace transform of the last passage time with its decomposition factors.
    Transform {
        #[command(flatten)]
        common: Common,
        /// Transform rates, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        q: Vec<f64>,
    },
    /// Density and distribution function by numerical inversion.
    Density {
        #[command(flatten)]
        common: Common,
        /// Largest time on the grid; defaults to the support where 1 - cdf < 1e-3.
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, value_enum, default_value_t = InversionMethod::GaverStehfest)]
        method: InversionMethod,
        /// Number of transform evaluations per inversion (even, 4 to 20).
        #[arg(long, default_value_t = 16)]
        terms: usize,
    },
    /// Green function at alpha against its reflected decomposition.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// States to evaluate, comma separated; defaults to --x, or to 31 points spread around alpha.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        states: Vec<f64>,
    },
    /// Monte Carlo estimate of the last passage time.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Rates at which to estimate the transform, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        q: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial horizon, doubled while more than 0.1% of paths are active.
        #[arg(long, default_value_t = 16.0)]
        horizon: f64,
        #[arg(long)]
        antithetic: bool,
        /// Also write per-path samples to this CSV.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Check the identities the spec's Green functions must satisfy.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InversionMethod {
    GaverStehfest,
    GaverWynnRho,
}

enum Failure {
    Input(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::Range(_) | Error::Inversion { .. } => Failure::Compute(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn load(common: &Common) -> Result<(DiffusionSpec, f64), Failure> {
    let text = fs::read_to_string(&common.spec)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", common.spec.display())))?;
    let spec = parse_spec(&text)?;
    let x = common.x.unwrap_or(spec.alpha());
    if !spec.interval().contains(x) {
        return Err(Failure::Input(format!("x = {x} is outside the state interval")));
    }
    Ok((spec, x))
}

fn check_rates(q: &[f64]) -> Result<(), Failure> {
    if q.is_empty() {
        return Err(Failure::Input("at least one q is required".into()));
    }
    match q.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        Some(v) => Err(Failure::Input(format!("q must be positive, got {v}"))),
        None => Ok(()),
    }
}

fn output_path(common: &Common, verb: &str) -> Option<PathBuf> {
    common.output.clone().or_else(|| {
        std::env::var_os("LPT_OUTPUT_DIR").map(|dir| Path::new(&dir).join(format!("{verb}.csv")))
    })
}

/// Writes the whole document at once, via a temporary file and a rename, so
/// that a failure never leaves a partial file.
fn emit(path: Option<&Path>, body: &str) -> Result<(), Failure> {
    match path {
        None => io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Compute(e.to_string())),
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = PathBuf::from(tmp);
            fs::write(&tmp, body)
                .and_then(|_| fs::rename(&tmp, path))
                .map_err(|e| {
                    let _ = fs::remove_file(&tmp);
                    Failure::Input(format!("cannot write {}: {e}", path.display()))
                })
        }
    }
}

fn transform(common: &Common, q: &[f64]) -> Result<String, Failure> {
    check_rates(q)?;
    let (spec, x) = load(common)?;
    let a = LastPassageAnalyzer::new(&spec)?;
    let mut out = String::from("q,laplace,factor_A,factor_B,gamma_q\n");
    for &q in q {
        let f = a.factors(q)?;
        let laplace = if x == spec.alpha() { f.laplace } else { a.laplace_from(q, x)? };
        writeln!(out, "{},{},{},{},{}", num(q), num(laplace), num(f.factor_a), num(f.factor_b), num(f.gamma)).unwrap();
    }
    Ok(out)
}

fn density(
    common: &Common,
    t_max: Option<f64>,
    points: usize,
    method: InversionMethod,
    terms: usize,
) -> Result<String, Failure> {
    if points == 0 {
        return Err(Failure::Input("points must be positive".into()));
    }
    if let Some(t) = t_max {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::Input(format!("t-max must be positive, got {t}")));
        }
    }
    let method = match method {
        InversionMethod::GaverStehfest => Method::GaverStehfest,
        InversionMethod::GaverWynnRho => Method::GaverWynnRho,
    };
    let cfg = InversionConfig::new(method, terms)?;
    let (spec, x) = load(common)?;
    let a = LastPassageAnalyzer::new(&spec)?.with_inversion(cfg)?;
    let t_max = match t_max {
        Some(t) => t,
        None => a.support(x)?,
    };
    let grid: Vec<f64> = (1..=points).map(|i| t_max * i as f64 / points as f64).collect();
    let rows = a.distribution(&grid, x)?;
    let ringing = rows.iter().filter(|r| r.ringing).count();
    if ringing > 0 {
        eprintln!("warning: {ringing} grid points had negative inverted density and were clamped");
    }
    let mut out = format!("# atom_at_zero={}\nt,density,cdf\n", num(a.escape_probability(x)?));
    for r in rows {
        writeln!(out, "{},{},{}", num(r.t), num(r.density), num(r.cdf)).unwrap();
    }
    Ok(out)
}

fn decompose(common: &Common, q: f64, states: &[f64]) -> Result<String, Failure> {
    check_rates(&[q])?;
    let (spec, x) = load(common)?;
    let states = match (states.is_empty(), common.x) {
        (false, _) => states.to_vec(),
        (true, Some(_)) => vec![x],
        (true, None) => sample_points(&spec, 15),
    };
    if let Some(x) = states.iter().find(|x| !spec.interval().contains(**x)) {
        return Err(Failure::Input(format!("state {x} is outside the state interval")));
    }
    let g = GreenKit::new(&spec).at(q)?;
    let mut out = String::from("x,G_q,G_q_via_decomposition,abs_err\n");
    for x in states {
        let direct = g.green(x, spec.alpha())?;
        let via = g.decomposed(x)?;
        writeln!(out, "{},{},{},{}", num(x), num(direct), num(via), num((direct - via).abs())).unwrap();
    }
    Ok(out)
}

fn validate_verb(common: &Common) -> Result<(String, bool), Failure> {
    let (spec, _) = load(common)?;
    let checks = validate(&spec);
    let mut out = String::from("check,passed,error,tolerance\n");
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        let mark = if c.passed { "pass" } else { "FAIL" };
        if c.error.is_nan() {
            eprintln!("{mark}  {} {}", c.name, c.detail);
        } else {
            eprintln!("{mark}  {} (error {:.3e}, tolerance {:.0e}) {}", c.name, c.error, c.tolerance, c.detail);
        }
        writeln!(out, "\"{}\",{},{},{}", c.name, c.passed, num(c.error), num(c.tolerance)).unwrap();
    }
    Ok((out, all))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let (common, verb) = match &cli.command {
        Command::Transform { common, .. } => (common, "transform"),
        Command::Density { common, .. } => (common, "density"),
        Command::Decompose { common, .. } => (common, "decompose"),
        Command::Simulate { common, .. } => (common, "simulate"),
        Command::Validate { common } => (common, "validate"),
    };
    let path = output_path(common, verb);
    let mut status = ExitCode::SUCCESS;
    let body = match &cli.command {
        Command::Transform { q, .. } => transform(common, q)?,
        Command::Density { t_max, points, method, terms, .. } => density(common, *t_max, *points, *method, *terms)?,
        Command::Decompose { q, states, .. } => decompose(common, *q, states)?,
        Command::Validate { .. } => {
            let (body, ok) = validate_verb(common)?;
            if !ok {
                status = ExitCode::from(1);
            }
            body
        }
        Command::Simulate { q, paths, dt, seed, horizon, antithetic, samples, .. } => {
            check_rates(q)?;
            let (spec, x) = load(common)?;
            let cfg = McConfig {
                paths: *paths,
                dt: *dt,
                seed: *seed,
                horizon: *horizon,
                antithetic: *antithetic,
                ..McConfig::default()
            };
            let analyzer = LastPassageAnalyzer::new(&spec)?;
            let run = simulate(&spec, x, &cfg)?;
            eprintln!(
                "{} paths, {} never reached alpha, {} still active at horizon {}",
                run.len(),
                run.escapes,
                run.truncated,
                run.horizon
            );
            if let Some(w) = run.warning {
                eprintln!("warning: {w}");
            }
            let mut out = String::from("q,empirical_laplace,std_error,analytic_laplace\n");
            for &q in q {
                let est = empirical_laplace(&run, q)?;
                let exact = analyzer.laplace_from(q, x)?;
                writeln!(out, "{},{},{},{}", num(q), num(est.mean), num(est.std_error), num(exact)).unwrap();
            }
            if let Some(p) = samples {
                let mut buf = Vec::new();
                run.write_csv(&mut buf).map_err(|e| Failure::Compute(e.to_string()))?;
                emit(Some(p), std::str::from_utf8(&buf).expect("ascii"))?;
            }
            out
        }
    };
    emit(path.as_deref(), &body)?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
