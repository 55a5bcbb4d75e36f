use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lastpass-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn lastpass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lastpass"))
        .args(args)
        .env_remove("LPT_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn write_spec(dir: &Path, text: &str) -> String {
    let path = dir.join("spec.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const BM: &str = "family = \"brownian_drift\"\nalpha = 0.0\n[params]\nnu = 1.0\n";
const OU: &str = "family = \"ornstein_uhlenbeck\"\nalpha = 0.5\n[params]\nkappa = -1.0\n";

#[test]
fn transform_of_brownian_motion_with_drift() {
    let dir = workdir("transform");
    let spec = write_spec(&dir, BM);
    let out = dir.join("t.csv");
    let o = lastpass(&["transform", "--spec", &spec, "--q", "1.5", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("q,laplace,factor_A,factor_B,gamma_q\n"));
    let r = &rows(&text)[0];
    assert!((r[1] - 0.5).abs() < 1e-12, "{text}");
    assert!((r[1] - r[2] * r[3]).abs() < 1e-15);
    // 17 significant digits
    assert!(text.lines().nth(1).unwrap().contains("5.0000000000000000e-1"));
}

#[test]
fn validate_passes_for_ornstein_uhlenbeck() {
    let dir = workdir("validate");
    let spec = write_spec(&dir, OU);
    let o = lastpass(&["validate", "--spec", &spec]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")), "{text}");
    assert!(text.lines().count() > 10);
}

#[test]
fn malformed_spec_exits_with_input_error_and_no_file() {
    let dir = workdir("malformed");
    let out = dir.join("out.csv");
    for text in [
        "family = \n",
        "family = \"brownian_drift\"\nalpha = 0.0\n",
        "family = \"brownian_drift\"\nalpha = 0.0\n[params]\nnu = 0.0\n",
    ] {
        let spec = write_spec(&dir, text);
        let o = lastpass(&["transform", "--spec", &spec, "--output", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists());
        assert!(fs::read_dir(&dir).unwrap().count() == 1, "stray files left behind");
    }
    let spec = write_spec(&dir, BM);
    let o = lastpass(&["transform", "--spec", &spec, "--q", "-1", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = lastpass(&["transform", "--spec", dir.join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = workdir("envdir");
    let spec = write_spec(&dir, BM);
    let o = Command::new(env!("CARGO_BIN_EXE_lastpass"))
        .args(["decompose", "--spec", &spec, "--states=-1,0,2", "--q", "0.5"])
        .env("LPT_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let rows = rows(&fs::read_to_string(dir.join("decompose.csv")).unwrap());
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r[3] < 1e-14, "{r:?}");
    }
}

#[test]
fn density_reports_atom_and_distribution() {
    let dir = workdir("density");
    let spec = write_spec(&dir, BM);
    let o = lastpass(&["density", "--spec", &spec, "--x=-1.0", "--t-max", "4", "--points", "8"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let atom: f64 = text.lines().next().unwrap().strip_prefix("# atom_at_zero=").unwrap().parse().unwrap();
    // drift is -nu, so from below alpha the escape probability is 1 - exp(-2 nu |x|)
    assert!((atom - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
    let rows = rows(&text);
    assert_eq!(rows.len(), 8);
    assert!(rows.windows(2).all(|w| w[1][2] >= w[0][2] - 1e-9));
    assert!(rows.iter().all(|r| r[2] >= atom - 1e-9 && r[2] <= 1.0 + 1e-9));
}

#[test]
fn simulate_is_reproducible() {
    let dir = workdir("simulate");
    let spec = write_spec(&dir, BM);
    let samples = dir.join("samples.csv");
    let args = ["simulate", "--spec", &spec, "--paths", "2000", "--dt", "0.01", "--seed", "7", "--q", "1.5"];
    let a = lastpass(&[&args[..], &["--samples", samples.to_str().unwrap()]].concat());
    let b = lastpass(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = &rows(&String::from_utf8(a.stdout).unwrap())[0];
    assert!((r[1] - r[3]).abs() < 4.0 * r[2], "{r:?}");
    let dump = fs::read_to_string(samples).unwrap();
    assert!(dump.starts_with("t_lambda,lambda_A,lambda_B,escaped\n"));
    assert_eq!(dump.lines().count(), 2001);
}
