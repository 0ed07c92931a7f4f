//! End-to-end checks of the `universim` binary: determinism, exit codes,
//! and output format.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_universim"))
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("universim-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn sawtooth_sweep_is_byte_identical_across_reruns() {
    let cfg = write_config(
        "sweep.json",
        r#"{
            "experiment": "sawtooth_sweep",
            "seed_distribution": {"kind": "exp", "lambda": 1},
            "delta_grid": [0.1, 0.05],
            "rng_seed": 99
        }"#,
    );
    let run = || {
        let out = bin()
            .args(["sawtooth_sweep", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("seed,delta,ks_exact,tv_upper_bound,renyi_alpha,renyi_value\n"));
    assert!(!text.contains('\r'), "LF line endings only");
}

#[test]
fn histogram_is_deterministic_for_fixed_rng_seed() {
    let cfg = write_config(
        "hist.json",
        r#"{
            "experiment": "sawtooth_sweep",
            "seed_distribution": {"kind": "normal", "mu": 0, "sigma": 1},
            "delta_grid": [0.1],
            "rng_seed": 4242
        }"#,
    );
    let out_path = std::env::temp_dir().join("universim-cli-tests/hist.csv");
    let run = || {
        let out = bin()
            .args(["sawtooth_sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_path)
            .args(["--samples", "2000"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(std::env::temp_dir().join("universim-cli-tests/hist.csv.hist.csv")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn unknown_config_key_is_exit_2() {
    let cfg = write_config(
        "bad_key.json",
        r#"{"experiment": "sawtooth_sweep", "delta_grid": [0.1], "surprise": 1}"#,
    );
    let out = bin()
        .args(["sawtooth_sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_distribution_key_is_exit_2() {
    let cfg = write_config(
        "bad_dist.json",
        r#"{
            "experiment": "sawtooth_sweep",
            "seed_distribution": {"kind": "normal", "mu": 0, "sigma": 1, "nu": 1},
            "delta_grid": [0.1]
        }"#,
    );
    let out = bin()
        .args(["sawtooth_sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed_distribution"), "{err}");
}

#[test]
fn experiment_mismatch_is_exit_2() {
    let cfg = write_config(
        "mismatch.json",
        r#"{"experiment": "squeeze_sweep", "delta_grid": [0.1]}"#,
    );
    let out = bin()
        .args(["sawtooth_sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumeration_cap_is_exit_4() {
    let cfg = write_config(
        "cap.json",
        r#"{
            "experiment": "type_decay",
            "seed_distribution": {"kind": "pmf", "support": [0, 1], "probs": [0.5, 0.5]},
            "n_grid": [40]
        }"#,
    );
    let out = bin()
        .args(["type_decay", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn violated_invariant_is_exit_3_with_context() {
    // a pre-asymptotic grid genuinely violates the 15% slope invariant
    let cfg = write_config(
        "slope.json",
        r#"{
            "experiment": "type_decay",
            "seed_distribution": {"kind": "pmf", "support": [0, 1], "probs": [0.5, 0.5]},
            "n_grid": [1, 2, 3, 4, 5, 6]
        }"#,
    );
    let out = bin()
        .args(["type_decay", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invariant violated"), "{err}");
    assert!(err.contains("log-slope"), "{err}");
}

#[test]
fn bound_columns_dominate_achieved_columns() {
    let cfg = write_config(
        "decay.json",
        r#"{
            "experiment": "type_decay",
            "seed_distribution": {"kind": "pmf", "support": [0, 1], "probs": [0.3, 0.7]},
            "target_distribution": {"kind": "pmf", "support": [0, 1], "probs": [0.5, 0.5]},
            "n_grid": [5, 6, 7, 8, 9, 10]
        }"#,
    );
    let out = bin()
        .args(["type_decay", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| if f.is_empty() { f64::NAN } else { f.parse().unwrap() })
            .collect();
        let (ks_u, ks_nu, bound) = (fields[1], fields[2], fields[3]);
        assert!(ks_u <= bound + 1e-12, "{line}");
        assert!(ks_nu <= ks_u + 1e-12, "{line}");
        if !fields[4].is_nan() {
            assert!(fields[4] <= fields[5] + 1e-12, "greedy row {line}");
        }
    }
}

#[test]
fn markov_decay_emits_constant_loop_column() {
    let cfg = write_config(
        "markov.json",
        r#"{
            "experiment": "markov_decay",
            "markov": {
                "states": 2, "order": 1, "initial": [0],
                "transitions": [[0.9, 0.1], [0.5, 0.5]]
            },
            "n_grid": [2, 4, 6]
        }"#,
    );
    let out = bin()
        .args(["markov_decay", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let loops: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert!(loops.windows(2).all(|w| w[0] == w[1]));
    let h: f64 = loops[0].parse().unwrap();
    assert!((h - (1.0f64 / 0.9).ln()).abs() < 1e-12);
}
