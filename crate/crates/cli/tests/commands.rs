use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
[grid]
modes = 8
length = 6.283185307179586

[cutoff]
r1 = 1.5
r_inf = 2.5

[stepper]
dt = 0.05
t_end = 0.5
sample_interval = 0.1

[picard]
horizon = 1.0

[validate]
tuples = 2
projection_fields = 5
energy_runs = 2
"#;

fn nsk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsk")).current_dir(dir).args(args).output().expect("binary runs")
}

fn with_config(extra: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), format!("{SMALL}\n{extra}")).unwrap();
    dir
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn inverted_cutoff_is_rejected_before_any_output() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "[cutoff]\nr1 = 2.0\nr_inf = 2.0\n").unwrap();
    let out = nsk(dir.path(), &["simulate", "--config", "cfg.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r1"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = with_config("[stepper.extra]\nfoo = 1\n");
    let out = nsk(dir.path(), &["simulate", "--config", "cfg.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_data_gives_zero_series() {
    let dir = with_config("[initial]\namplitude = 0.0\n");
    let out = nsk(dir.path(), &["simulate", "--config", "cfg.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("o"), "simulate.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,l2_u,h1_u,l2_phi_low,l2_m_low,e_high,d_high,f_norm,znorm_partial");
    let mut rows = 0;
    for line in lines {
        let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 9);
        assert!(vals[1..].iter().all(|&v| v == 0.0), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 6);
    let summary = json(&dir.path().join("o"), "simulate.json");
    assert_eq!(summary["termination"]["kind"], "completed");
}

#[test]
fn simulate_is_deterministic_in_the_seed() {
    let dir = with_config("[initial]\nprofile = \"random\"\n");
    for (seed, out) in [("3", "a"), ("3", "b"), ("4", "c")] {
        let o = nsk(dir.path(), &["simulate", "--config", "cfg.toml", "--out", out, "--seed", seed]);
        assert_eq!(o.status.code(), Some(0));
    }
    let p = dir.path();
    assert_eq!(read(&p.join("a"), "simulate.csv"), read(&p.join("b"), "simulate.csv"));
    assert_ne!(read(&p.join("a"), "simulate.csv"), read(&p.join("c"), "simulate.csv"));
}

#[test]
fn linear_decay_reports_target_exponents() {
    let dir = with_config("[analysis]\nsamples = 20\n");
    let out = nsk(dir.path(), &["linear-decay", "--config", "cfg.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let o = dir.path().join("o");
    assert!(read(&o, "linear_decay.csv").starts_with("t,norm_k0,norm_k1\n"));
    let s = json(&o, "linear_decay.json");
    assert!((s["exponent_k0"].as_f64().unwrap() + 0.75).abs() < 0.03);
    assert!((s["exponent_k1"].as_f64().unwrap() + 1.25).abs() < 0.03);
    assert_eq!(s["pass"], true);
}

#[test]
fn picard_distances_contract() {
    let dir = with_config("");
    let out = nsk(dir.path(), &["picard", "--config", "cfg.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("o"), "picard.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "k,d_k,ratio");
    let d: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(!d.is_empty());
    assert!(d.windows(2).all(|w| w[1] <= 0.5 * w[0]), "{d:?}");
}

#[test]
fn zero_tolerance_fails_validation() {
    let dir = with_config("");
    std::fs::write(dir.path().join("strict.toml"), SMALL.replace("tuples = 2", "tuples = 2\nrk4_tol = 0.0")).unwrap();
    let out = nsk(dir.path(), &["validate", "--config", "strict.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    let s = json(&dir.path().join("o"), "validate.json");
    let suites = s["suites"].as_array().unwrap();
    let rk4 = suites.iter().find(|x| x["name"] == "semigroup_vs_rk4").unwrap();
    assert_eq!(rk4["pass"], false);
    assert!(suites.iter().filter(|x| x["name"] != "semigroup_vs_rk4").all(|x| x["pass"] == true));
}

#[test]
fn report_merges_summaries() {
    let dir = with_config("[analysis]\nsamples = 12\n");
    let empty = nsk(dir.path(), &["report", "--out", "o"]);
    assert_eq!(empty.status.code(), Some(2));
    for cmd in ["linear-decay", "picard"] {
        assert_eq!(nsk(dir.path(), &[cmd, "--config", "cfg.toml", "--out", "o"]).status.code(), Some(0));
    }
    let out = nsk(dir.path(), &["report", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("o"), "report.json");
    assert_eq!(r["pass"], true);
    let runs = r["runs"].as_object().unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs.values().all(|v| v.get("config").is_none()));
}

#[test]
fn low_dimension_runs_are_labelled() {
    let dir = TempDir::new().unwrap();
    let cfg = SMALL.replace("[grid]\n", "[grid]\ndim = 2\n") + "[initial]\nmode = [1, 0]\nprofile = \"mode\"\n";
    std::fs::write(dir.path().join("cfg.toml"), cfg).unwrap();
    let out = nsk(dir.path(), &["simulate", "--config", "cfg.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the hypotheses"));
    let s = json(&dir.path().join("o"), "simulate.json");
    assert_eq!(s["labels"]["outside_hypotheses"], true);
    assert_eq!(s["znorm"]["c2_sensitivity"].as_array().unwrap().len(), 2);
}
