//! End-to-end tests of the binary: worked output values, determinism of
//! emitted files, format mirrors, and exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_icofridge"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Data rows of a CSV table: comment lines stripped, header split off.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn meta_value(text: &str, key: &str) -> String {
    let prefix = format!("# {key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("missing meta line {key}"))
        .to_string()
}

const SWEEP: &str = r#"
kind = "sweep"
beta_grid = [0.0, 0.6931471805599453, inf]
"#;

#[test]
fn sweep_reports_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SWEEP);
    let out = run_ok(&["sweep", "--config", config.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        ["beta_in", "beta_out_plus", "beta_out_minus", "beta_out_classical", "p_plus"]
    );
    assert_eq!(rows.len(), 3);

    // infinite-temperature input: no change in either branch
    assert_eq!(rows[0][1], "0");
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[0][4], "0.625");

    // worked point ln 2
    let plus: f64 = rows[1][1].parse().unwrap();
    let minus: f64 = rows[1][2].parse().unwrap();
    let p_plus: f64 = rows[1][4].parse().unwrap();
    assert!((plus - (13.0f64 / 5.0).ln()).abs() < 1e-12);
    assert!((minus - (5.0f64 / 4.0).ln()).abs() < 1e-12);
    assert!((p_plus - 2.0 / 3.0).abs() < 1e-12);

    // zero-temperature input: plus branch stays at zero temperature, the
    // minus branch never occurs
    assert_eq!(rows[2][0], "inf");
    assert_eq!(rows[2][1], "inf");
    assert_eq!(rows[2][2], "nan");
    assert_eq!(rows[2][4], "1");
}

#[test]
fn classical_column_tracks_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SWEEP);
    let out = run_ok(&["sweep", "--config", config.to_str().unwrap()]);
    let (_, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    for row in rows {
        assert_eq!(row[0], row[3]);
    }
}

#[test]
fn reruns_emit_byte_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let hist = write_config(
        dir.path(),
        "hist.toml",
        r#"
kind = "histogram"
work = 1
res_a = 0
res_b = 0
shots = 5000
seed = 9

[noise]
pauli_after_1q = [0.002, 0.002, 0.002]
pauli_after_2q = [0.008, 0.008, 0.008]
readout_flip = [0.02, 0.03]
"#,
    );
    for format in ["csv", "json"] {
        let a = dir.path().join(format!("a.{format}"));
        let b = dir.path().join(format!("b.{format}"));
        for target in [&a, &b] {
            run_ok(&[
                "histogram",
                "--config",
                hist.to_str().unwrap(),
                "--format",
                format,
                "--out",
                target.to_str().unwrap(),
            ]);
        }
        assert_eq!(
            fs::read(&a).unwrap(),
            fs::read(&b).unwrap(),
            "{format} rerun differs"
        );
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let hist = write_config(
        dir.path(),
        "hist.toml",
        "kind = \"histogram\"\nwork = 1\nres_a = 0\nres_b = 0\nshots = 4000\nseed = 1\n",
    );
    let base = run_ok(&["histogram", "--config", hist.to_str().unwrap()]);
    let overridden = run_ok(&[
        "histogram",
        "--config",
        hist.to_str().unwrap(),
        "--seed",
        "2",
    ]);
    let same_seed = run_ok(&[
        "histogram",
        "--config",
        hist.to_str().unwrap(),
        "--seed",
        "2",
    ]);
    assert_ne!(base.stdout, overridden.stdout);
    assert_eq!(overridden.stdout, same_seed.stdout);
    let echoed = String::from_utf8(overridden.stdout).unwrap();
    assert!(echoed.contains("#   seed = 2"));
}

#[test]
fn identity_circuit_concentrates_all_shots() {
    let dir = tempfile::tempdir().unwrap();
    let hist = write_config(
        dir.path(),
        "hist.toml",
        "kind = \"histogram\"\nwork = 1\nres_a = 0\nres_b = 0\nshots = 1000\nidentity_circuit = true\n",
    );
    let out = run_ok(&["histogram", "--config", hist.to_str().unwrap()]);
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["outcome", "prob_noiseless", "count_noiseless"]);
    assert_eq!(rows.len(), 16);
    for row in rows {
        let expected = if row[0] == "0100" { "1000" } else { "0" };
        assert_eq!(row[2], expected, "outcome {}", row[0]);
    }
}

#[test]
fn noise_compare_shows_the_splitting_dichotomy() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "nc.toml",
        r#"
kind = "noise_compare"
[simple]
p_suc = 0.8
rho_fail_excited_pop = 0.3
[init]
p_init_suc = 0.9
beta_fail = 1.0
"#,
    );
    let out = run_ok(&["noise-compare", "--config", config.to_str().unwrap()]);
    let (_, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0][0], "simple");
    assert_eq!(rows[0][3], "0");
    assert_eq!(rows[1][0], "with_init");
    let split: f64 = rows[1][3].parse().unwrap();
    assert!((split - 0.0493).abs() < 1e-3, "splitting {split}");
}

#[test]
fn trajectory_reports_fixed_point_when_finite() {
    let dir = tempfile::tempdir().unwrap();
    let noiseless = write_config(
        dir.path(),
        "t0.toml",
        "kind = \"trajectory\"\nbeta_start = 0.0\nn_steps = 4\n",
    );
    let out = run_ok(&["trajectory", "--config", noiseless.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(meta_value(&text, "fixed_point"), "none");
    let (_, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert_eq!(row[1], "0");
    }

    let mixing = write_config(
        dir.path(),
        "t1.toml",
        r#"
kind = "trajectory"
beta_start = 0.1
n_steps = 50
[noise]
kind = "simple"
p_suc = 0.8
rho_fail_excited_pop = 0.3
"#,
    );
    let out = run_ok(&["trajectory", "--config", mixing.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let fp: f64 = meta_value(&text, "fixed_point").parse().unwrap();
    assert!((fp - 2.04).abs() < 0.01, "fixed point {fp}");
}

#[test]
fn cycle_mc_rows_match_their_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mc.toml",
        "kind = \"cycle_mc\"\nbeta_cold = 1.0\nbeta_hot = 0.7\nn_cycles = 500\nseed = 11\n",
    );
    let out = run_ok(&["cycle-mc", "--config", config.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 500);
    let hfc_idx = header.iter().position(|c| c == "heat_from_cold").unwrap();
    let mean: f64 = rows
        .iter()
        .map(|r| r[hfc_idx].parse::<f64>().unwrap())
        .sum::<f64>()
        / rows.len() as f64;
    let reported: f64 = meta_value(&text, "mean_heat_from_cold").parse().unwrap();
    assert!((mean - reported).abs() < 1e-12);
    let n_plus: u64 = meta_value(&text, "n_plus").parse().unwrap();
    let n_minus: u64 = meta_value(&text, "n_minus").parse().unwrap();
    assert_eq!(n_plus + n_minus, 500);
}

#[test]
fn json_mirror_parses_and_flags_non_finite_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SWEEP);
    let out = run_ok(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["command"], "sweep");
    assert_eq!(parsed["config"]["kind"], "sweep");
    assert_eq!(parsed["rows"][2][0], "inf");
    assert_eq!(parsed["rows"][2][2], "nan");
    assert_eq!(parsed["rows"][0][4], 0.625);
}

#[test]
fn verify_passes_on_a_clean_build() {
    let out = run_ok(&["verify"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(meta_value(&text, "status"), "pass");
    let (_, rows) = parse_csv(&text);
    assert!(rows.len() >= 5);
    for row in rows {
        assert_eq!(row[1], "pass", "check {}", row[0]);
    }
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty_grid = write_config(dir.path(), "bad.toml", "kind = \"sweep\"\nbeta_grid = []\n");
    let out = bin()
        .args(["sweep", "--config", empty_grid.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta_grid"));

    // config kind does not match the subcommand
    let sweep = write_config(dir.path(), "sweep.toml", SWEEP);
    let out = bin()
        .args(["trajectory", "--config", sweep.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // missing config file
    let out = bin()
        .args(["sweep", "--config", dir.path().join("nope.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // seed beyond the representable config range
    let out = bin()
        .args([
            "sweep",
            "--config",
            sweep.to_str().unwrap(),
            "--seed",
            "9223372036854775808",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_path_from_config_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("written.csv");
    let config = write_config(
        dir.path(),
        "sweep.toml",
        &format!(
            "kind = \"sweep\"\nbeta_grid = [0.0]\nout = {:?}\n",
            target.to_str().unwrap()
        ),
    );
    let out = run_ok(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("# command: sweep"));
    // the echoed config never repeats the output path, so moving a file
    // elsewhere cannot change its bytes
    assert!(!text.contains("out ="));
}

#[test]
fn bundled_scenarios_parse_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for (file, subcommand) in [
        ("sweep_reference.toml", "sweep"),
        ("noise_compare_splitting.toml", "noise-compare"),
        ("verify.toml", "verify"),
    ] {
        let path = root.join(file);
        run_ok(&[subcommand, "--config", path.to_str().unwrap()]);
    }
    // keep the long-running bundled scenarios cheap in tests by
    // validating them through a trimmed run
    for file in [
        "trajectory_mixing.toml",
        "trajectory_tuned_asymptote.toml",
        "histogram_excited_work.toml",
        "cycle_mc_refrigeration.toml",
    ] {
        let text = fs::read_to_string(root.join(file)).unwrap();
        icofridge::scenario::parse_scenario(&text).unwrap();
    }
}
