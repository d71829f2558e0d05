use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ipmala(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipmala"));
    cmd.args(args).env_remove("IPMALA_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn ipmala")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

const SMALL_RUN: &str = r#"
n = 6
gamma = 0.1667
alpha = 4
matrix = "s1"
ell = { min = 0.6, max = 1.4, points = 3 }
steps = 400
replications = 5
master_seed = 3
"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn theory_table_reproduces_reference_values() {
    let text = stdout(&ipmala(&["theory-table"], &[]));
    assert!(text.starts_with("alpha,ell_star,h_star\n"));
    let expected = [0.234, 0.574, 0.702, 0.767, 0.803, 0.848, 0.884];
    let rows = csv_records(&text);
    assert_eq!(rows.len(), expected.len());
    for (row, want) in rows.iter().zip(expected) {
        let h: f64 = row[2].parse().unwrap();
        assert!((h - want).abs() <= 0.002, "{row:?}");
    }
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = ipmala(&["run", "--config", "/nonexistent/ipmala.toml"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(
        ipmala(&["theory-table", "--bogus"], &[]).status.code(),
        Some(1)
    );
}

#[test]
fn invalid_config_value_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        &SMALL_RUN.replace("steps = 400", "steps = 10"),
    );
    assert_eq!(
        ipmala(&["run", "--config", &cfg], &[]).status.code(),
        Some(1)
    );
}

#[test]
fn probe_for_split_jordan_is_small_and_matches_finite_n() {
    let text = stdout(&ipmala(
        &[
            "probe-constants",
            "--matrix",
            "s2",
            "--alpha",
            "2",
            "--gamma",
            "0.1667",
            "--n",
            "2000",
            "--seed",
            "5",
        ],
        &[],
    ));
    assert!(text.starts_with("constant,estimate,se,analytic,exact_finite_n\n"));
    let c1 = &csv_records(&text)[0];
    let (est, se, exact): (f64, f64, f64) = (
        c1[1].parse().unwrap(),
        c1[2].parse().unwrap(),
        c1[4].parse().unwrap(),
    );
    assert!(est < 0.05, "{c1:?}");
    assert!((est - exact).abs() <= 4.0 * se, "{c1:?}");
}

#[test]
fn run_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_RUN);
    let one = stdout(&ipmala(&["run", "--config", &cfg, "--threads", "1"], &[]));
    let four = stdout(&ipmala(&["run", "--config", &cfg, "--threads", "4"], &[]));
    let env = stdout(&ipmala(
        &["run", "--config", &cfg, "--threads", "1"],
        &[("IPMALA_THREADS", "3")],
    ));
    assert_eq!(one, four);
    assert_eq!(one, env);
    assert_eq!(csv_records(&one).len(), 3);
    assert_eq!(
        csv_records(&one).iter().filter(|r| r[19] == "true").count(),
        1
    );

    let reseeded = stdout(&ipmala(&["run", "--config", &cfg, "--seed", "99"], &[]));
    assert_ne!(one, reseeded);
}

#[test]
fn run_writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SMALL_RUN);
    let out = dir.path().join("rows.csv");
    let printed = stdout(&ipmala(
        &["run", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    ));
    assert!(printed.is_empty());
    let rows = ipmala_core::harness::read_rows(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
}

#[test]
fn sweep_concatenates_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "[[experiment]]\n{SMALL_RUN}\n[[experiment]]\nn = 6\ngamma = 0.1667\nalpha = \"mala\"\nell = 1.5\nsteps = 300\nreplications = 3\nmaster_seed = 4\n"
    );
    let cfg = write(dir.path(), "sweep.toml", &body);
    let rows = csv_records(&stdout(&ipmala(&["sweep", "--config", &cfg], &[])));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3][2], "mala");
    assert_eq!(rows[3][3], "zero");
}

#[test]
fn fluid_check_at_zero_horizon_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "fluid.toml",
        "mode = \"fluid\"\nns = [20, 40]\ngamma = 0.5\nalpha = 1.5\nmatrix = \"s2\"\nell = 1.0\nhorizon = 0.0\nreplications = 40\nmaster_seed = 1\n",
    );
    let text = stdout(&ipmala(&["limit-check", "--config", &cfg], &[]));
    assert!(text.starts_with("t_or_N,empirical,theoretical,se,deviation\n"));
    let rows = csv_records(&text);
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    }
}
