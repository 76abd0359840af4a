use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn run(cmd: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_wavecli"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn rows(dir: &Path, name: &str) -> Vec<Vec<String>> {
    read(dir, name).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn value(dir: &Path, name: &str, key: &str) -> Option<String> {
    let mut r = csv::Reader::from_path(dir.join("out").join(name)).unwrap();
    r.records().map(Result::unwrap).find(|rec| &rec[0] == key).map(|rec| rec[1].to_string())
}

const PROPAGATE: &str = r#"
[propagate]
engine = "integral"
t_max = 1.0
r_max = 2.0
dt = 0.25
dr = 0.5
"#;

const SOLVE: &str = r#"
[data]
u1 = "theta"

[nonlinearity]
kind = "canonical"
p = 3.5

[solver]
h = 1.2
epsilon = EPS
t_max = 2.0
r_max = 2.0
dt = 0.1
dr = 0.1
"#;

const BLOWUP: &str = r#"
[nonlinearity]
kind = "generic"
p = P
q = 2.0
delta0 = 0.05

[blowup]
tau0 = 1.0
epsilon = 0.5
"#;

const CERTIFY_FD: &str = r#"
[certify]
field_scale = SCALE
tune_to_simulation = true

[fd]
dr = 0.04
dt = 0.032
r_max = 11.52
t_max = 8.0
save_every = 5
"#;

#[test]
fn zero_data_propagates_to_zero() {
    let d = TempDir::new().unwrap();
    let o = run("propagate", &format!("[data]\n{PROPAGATE}"), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(d.path(), "field.csv");
    assert_eq!(r.len(), 5 * 5);
    assert!(r.iter().all(|row| row[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn constant_velocity_gives_two_sinh_half_t() {
    let d = TempDir::new().unwrap();
    let o = run("propagate", &format!("[data]\nu1 = \"constant\"\n{PROPAGATE}"), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for row in rows(d.path(), "field.csv") {
        let t: f64 = row[0].parse().unwrap();
        let u: f64 = row[2].parse().unwrap();
        assert!((u - 2.0 * (0.5 * t).sinh()).abs() < 1e-7, "t = {t}: {u}");
    }
}

#[test]
fn csv_format_contract() {
    let d = TempDir::new().unwrap();
    let o = run("propagate", &format!("[data]\nu1 = \"constant\"\n{PROPAGATE}"), d.path(), &[]);
    assert_eq!(code(&o), 0);
    let text = read(d.path(), "field.csv");
    assert!(text.starts_with("t,r,u\n"));
    assert!(!text.contains('\r'));
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
    }
}

#[test]
fn integral_and_fd_engines_agree() {
    let d = TempDir::new().unwrap();
    let cfg = r#"
[data]
u1 = "bump"

[propagate]
engine = "both"
t_max = 2.0
r_max = 4.0
dt = 0.5
dr = 0.5

[fd]
dr = 0.01
dt = 0.005
r_max = 8.0
t_max = 2.0
save_every = 10
r_stride = 5
"#;
    let o = run("propagate", cfg, d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(d.path(), "diff.csv");
    assert_eq!(r.len(), 5 * 9);
    let worst = r.iter().map(|row| row[4].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "max |u_integral - u_fd| = {worst}");
}

#[test]
fn h_outside_window_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let cfg = format!("{}\n[propagate]\nt_max = 1.0\nr_max = 1.0\ndt = 0.5\ndr = 0.5\n", SOLVE.replace("EPS", "0.1").replace("h = 1.2", "h = 1.5"));
    let o = run("propagate", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("(1, p - 2)"), "{}", stderr(&o));
    assert!(!d.path().join("out").join("field.csv").exists());
}

#[test]
fn unknown_key_and_bad_kind_are_config_errors() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&run("propagate", &format!("[data]\nspeed = 2\n{PROPAGATE}"), d.path(), &[])), 2);
    assert_eq!(code(&run("propagate", &format!("[data]\nu0 = \"wave\"\n{PROPAGATE}"), d.path(), &[])), 2);
    assert_eq!(code(&run("propagate", "[data]\n", d.path(), &[])), 2);
}

#[test]
fn zero_epsilon_converges_in_one_iteration() {
    let d = TempDir::new().unwrap();
    let o = run("solve", &SOLVE.replace("EPS", "0.0"), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let h = rows(d.path(), "history.csv");
    assert_eq!(h.len(), 1);
    assert_eq!(h[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows(d.path(), "report.csv")[0][1], "true");
}

#[test]
fn small_epsilon_history_decays_geometrically() {
    let d = TempDir::new().unwrap();
    let o = run("solve", &SOLVE.replace("EPS", "0.02"), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let h: Vec<f64> = rows(d.path(), "history.csv").iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(h.len() >= 3);
    for w in h.windows(2).filter(|w| w[1] > 1e-13) {
        assert!(w[1] < 0.1 * w[0], "{h:?}");
    }
}

#[test]
fn huge_epsilon_is_a_numeric_error() {
    let d = TempDir::new().unwrap();
    let o = run("solve", &SOLVE.replace("EPS", "10.0"), d.path(), &[]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("picard_solve"), "{}", stderr(&o));
    assert_eq!(rows(d.path(), "report.csv")[0][1], "false");
}

#[test]
fn contraction_requires_p_above_three() {
    let d = TempDir::new().unwrap();
    let cfg = SOLVE.replace("EPS", "0.01").replace("p = 3.5", "p = 3.0").replace("h = 1.2", "h = 0.9")
        + "\n[contraction]\npairs = 2\n";
    let o = run("contraction", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("p must exceed 3"));
}

#[test]
fn contraction_is_deterministic_per_seed() {
    let cfg = SOLVE.replace("EPS", "0.01") + "\n[contraction]\npairs = 4\n";
    let outputs: Vec<(String, String)> = ["11", "11", "12"]
        .iter()
        .map(|seed| {
            let d = TempDir::new().unwrap();
            let o = run("contraction", &cfg, d.path(), &["--seed", seed]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            (read(d.path(), "contraction.csv"), read(d.path(), "threshold.csv"))
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0].0, outputs[2].0);
}

#[test]
fn blowup_sequences_for_p_two() {
    let d = TempDir::new().unwrap();
    let o = run("blowup", &BLOWUP.replace("P", "2.0"), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(value(d.path(), "sequences.csv", "l0").as_deref(), Some("3"));
    let a0: f64 = value(d.path(), "sequences.csv", "A0").unwrap().parse().unwrap();
    assert_eq!(a0, 1.0);
    assert_eq!(rows(d.path(), "boost.csv").len(), 3);
    assert!(!d.path().join("out").join("escape.csv").exists());
}

#[test]
fn blowup_at_p_three_is_labelled_critical() {
    let d = TempDir::new().unwrap();
    let o = run("blowup", &BLOWUP.replace("P", "3.0"), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(value(d.path(), "sequences.csv", "regime").as_deref(), Some("critical, no theory"));
    assert!(!d.path().join("out").join("boost.csv").exists());
}

#[test]
fn certify_passes_on_simulation_and_fails_on_halved_field() {
    let d = TempDir::new().unwrap();
    let full = BLOWUP.replace("P", "2.0") + &CERTIFY_FD.replace("SCALE", "1.0");
    let o = run("certify", &full, d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(rows(d.path(), "violations.csv").is_empty());

    let d = TempDir::new().unwrap();
    let half = BLOWUP.replace("P", "2.0") + &CERTIFY_FD.replace("SCALE", "0.5");
    let o = run("certify", &half, d.path(), &[]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(!rows(d.path(), "violations.csv").is_empty());
}

#[test]
fn decay_report_has_one_row() {
    let d = TempDir::new().unwrap();
    let cfg = "[data]\nu1 = \"bump\"\n\n[decay]\nt_max = 8.0\nr_max = 8.0\nstep = 0.25\n";
    let o = run("decay", cfg, d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(d.path(), "decay.csv");
    assert_eq!(r.len(), 1);
    let slope_r: f64 = r[0][1].parse().unwrap();
    assert!((slope_r + 0.5).abs() < 0.05, "{slope_r}");
}

#[test]
fn output_dir_from_config_and_thread_cap() {
    let d = TempDir::new().unwrap();
    let out: PathBuf = d.path().join("from_config");
    let cfg = format!("output_dir = {:?}\n[data]\n{PROPAGATE}", out.to_str().unwrap());
    let path = d.path().join("run.toml");
    fs::write(&path, cfg).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wavecli"))
        .args(["propagate", "--config"])
        .arg(&path)
        .env("WAVECLI_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("field.csv").exists());
    let o = Command::new(env!("CARGO_BIN_EXE_wavecli"))
        .args(["propagate", "--config"])
        .arg(&path)
        .env("WAVECLI_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
