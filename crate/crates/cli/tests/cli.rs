//! End-to-end runs of the `paoi-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn paoi_lab(args: &[&str], dir: &Path, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_paoi-lab"));
    cmd.args(args).current_dir(dir).env_remove("PAOI_THREADS");
    if let Some(threads) = threads {
        cmd.env("PAOI_THREADS", threads);
    }
    cmd.output().expect("failed to launch paoi-lab")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .next()
        .unwrap()
        .to_owned()
}

const ERLANG: &str = r#"
[distribution]
kind = "erlang"
params = { shape = 2, rate = 1.0 }

[[policies]]
kind = "zero-wait"

[[policies]]
kind = "fixed"
theta = 1.5

[sweep]
min = 0.5
max = 5.0
count = 20

[simulation]
peaks = 2000
replications = 4
export_peaks = true
"#;

#[test]
fn commands_write_their_csv_schemas() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), ERLANG);
    let config = config.to_str().unwrap();
    let expected = [
        (
            "eval",
            "eval.csv",
            "policy,theta,zeta,e_x_check,e_y,truncation_bound",
        ),
        ("sweep", "sweep.csv", "theta,zeta,e_x_check,e_y,is_minimum"),
        ("optimize", "optimize.csv", "quantity,value"),
        (
            "simulate",
            "simulate-zero-wait.csv",
            "replication,seed,peaks,mean,stderr,ci_low,ci_high",
        ),
        (
            "check",
            "check.csv",
            "condition,beneficial,witness_theta,margin",
        ),
    ];
    for (command, file, columns) in expected {
        let out = paoi_lab(
            &[command, "--config", config, "--out", "run"],
            tmp.path(),
            None,
        );
        assert!(
            out.status.success(),
            "{command}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(
            header(&tmp.path().join("run").join(file)),
            columns,
            "{command}"
        );
    }
    let peaks = tmp.path().join("run/peaks-fixed-1.5.csv");
    assert_eq!(
        header(&peaks),
        "k,peak,received_service,interreception,preemption_count,receive_time"
    );
    assert_eq!(fs::read_to_string(peaks).unwrap().lines().count(), 2001);
}

#[test]
fn reruns_are_byte_identical_and_seed_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), ERLANG);
    let config = config.to_str().unwrap();
    let run = |out: &str, seed: Option<&str>, threads: Option<&str>| {
        let mut args = vec!["simulate", "--config", config, "--out", out];
        if let Some(seed) = seed {
            args.extend(["--seed", seed]);
        }
        let status = paoi_lab(&args, tmp.path(), threads).status;
        assert!(status.success());
        fs::read(tmp.path().join(out).join("simulate-fixed-1.5.csv")).unwrap()
    };
    let first = run("a", None, None);
    assert_eq!(first, run("b", None, None));
    assert_eq!(
        first,
        run("c", None, Some("1")),
        "single worker changed the output"
    );
    assert_eq!(
        first,
        run("d", None, Some("3")),
        "three workers changed the output"
    );
    let reseeded = run("e", Some("99"), None);
    assert_ne!(first, reseeded);
    let text = String::from_utf8(reseeded).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0,99,"), "{text}");
}

#[test]
fn missing_config_uses_defaults() {
    let tmp = TempDir::new().unwrap();
    let out = paoi_lab(&["eval", "--out", "."], tmp.path(), None);
    assert!(out.status.success());
    let table = fs::read_to_string(tmp.path().join("eval.csv")).unwrap();
    // Default law is Exponential(1): zero-wait PAoI is 2E[X] with θ = ∞.
    assert!(
        table.lines().any(|l| l.starts_with("zero-wait,inf,2,")),
        "{table}"
    );
}

#[test]
fn configuration_errors_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        "[distribution]\nkind = \"erlang\"\nparams = { shape = 0, rate = 1.0 }\n",
        "[simulation]\npeeks = 10\n",
        "[optimizer]\ntheta_min = 5.0\ntheta_max = 1.0\n",
        "not toml at all = = \n",
    ];
    for body in cases {
        let config = write_config(tmp.path(), body);
        let out = paoi_lab(
            &["optimize", "--config", config.to_str().unwrap()],
            tmp.path(),
            None,
        );
        assert_eq!(
            out.status.code(),
            Some(2),
            "{body}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
    let missing = paoi_lab(&["eval", "--config", "nope.toml"], tmp.path(), None);
    assert_eq!(missing.status.code(), Some(2));
    let threads = paoi_lab(&["eval", "--out", "."], tmp.path(), Some("many"));
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn stalled_simulation_exits_with_3() {
    let tmp = TempDir::new().unwrap();
    // No exponential service time is ever at most x_min = 0.
    let config = write_config(tmp.path(), "[[policies]]\nkind = \"xmin\"\n");
    let out = paoi_lab(
        &[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            ".",
        ],
        tmp.path(),
        None,
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn infinite_values_use_the_inf_token() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "[distribution]\nkind = \"pareto\"\nparams = { xm = 1.0, alpha = 0.5 }\n\n[[policies]]\nkind = \"zero-wait\"\n",
    );
    let out = paoi_lab(
        &["eval", "--config", config.to_str().unwrap(), "--out", "."],
        tmp.path(),
        None,
    );
    assert!(out.status.success());
    let table = fs::read_to_string(tmp.path().join("eval.csv")).unwrap();
    assert_eq!(table.lines().nth(1).unwrap(), "zero-wait,inf,inf,inf,inf,0");
}

#[test]
fn shipped_example_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            paoi_lab::config::ExperimentConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
