use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gridshift_core::ingest::{load_dataset, write_hourly_profile, LoadOptions};
use gridshift_core::synth::synthetic_day;
use serde_json::Value;
use tempfile::TempDir;

fn gridshift(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridshift"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn gridshift")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gridshift(dir, args);
    assert!(
        out.status.success(),
        "gridshift {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes `predicted.csv` and `prices.csv` for a synthetic day into `dir`.
fn day_files(dir: &Path) {
    let (load, price) = synthetic_day(1).unwrap();
    write_hourly_profile(
        &load,
        "predicted_kwh",
        fs::File::create(dir.join("predicted.csv")).unwrap(),
    )
    .unwrap();
    write_hourly_profile(
        &price,
        "price_c_per_kwh",
        fs::File::create(dir.join("prices.csv")).unwrap(),
    )
    .unwrap();
}

const DAY: [&str; 4] = ["--predicted", "predicted.csv", "--prices", "prices.csv"];

fn with_day<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(DAY.iter()).chain(tail).copied().collect()
}

#[test]
fn synth_is_reproducible_and_loadable() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["--seed", "9", "--out", "a", "synth", "--days", "10"]);
    ok(dir, &["--seed", "9", "--out", "b", "synth", "--days", "10"]);
    let a = fs::read(dir.join("a/synthetic.csv")).unwrap();
    assert_eq!(a, fs::read(dir.join("b/synthetic.csv")).unwrap());
    let ds = load_dataset(dir.join("a/synthetic.csv"), &LoadOptions::default()).unwrap();
    assert_eq!(ds.len(), 240);

    let manifest = json(dir.join("a/synth.manifest.json"));
    assert_eq!(manifest["master_seed"], 9);
    assert!(manifest["created_at"].is_string());
    assert!(manifest["derived_seeds"]["synth[0]"].is_u64());
    assert_eq!(manifest["params"]["days"], 10);
}

#[test]
fn synth_rejects_short_series() {
    let tmp = TempDir::new().unwrap();
    let out = gridshift(tmp.path(), &["synth", "--days", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_predict_optimize_pipeline() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["--seed", "4", "--out", "d", "synth", "--days", "12"]);
    for out in ["t1", "t2"] {
        ok(
            dir,
            &[
                "--seed",
                "4",
                "--out",
                out,
                "train",
                "--data",
                "d/synthetic.csv",
                "--epochs",
                "15",
                "--hidden",
                "8,6",
            ],
        );
    }
    let report = fs::read(dir.join("t1/fit_report.json")).unwrap();
    assert_eq!(report, fs::read(dir.join("t2/fit_report.json")).unwrap());
    assert_eq!(
        fs::read(dir.join("t1/model.txt")).unwrap(),
        fs::read(dir.join("t2/model.txt")).unwrap()
    );
    let curve = fs::read_to_string(dir.join("t1/training_curve.csv")).unwrap();
    assert!(curve.starts_with("epoch,train_mse\n"));
    assert_eq!(curve.lines().count(), 16);

    let day = [
        "--model",
        "t1/model.txt",
        "--data",
        "d/synthetic.csv",
        "--day",
        "2010-01-12",
    ];
    ok(dir, &[&["--out", "p", "predict"][..], &day[..]].concat());
    let forecast = fs::read_to_string(dir.join("p/forecast.csv")).unwrap();
    assert!(forecast.starts_with("hour,real,predicted\n"));
    assert_eq!(forecast.lines().count(), 25);

    // the model and the written prediction give the same problem
    let via_model = [&["--out", "m", "optimize"][..], &day[..]].concat();
    ok(dir, &via_model);
    ok(
        dir,
        &[
            "--out",
            "f",
            "optimize",
            "--predicted",
            "p/prediction.csv",
            "--data",
            "d/synthetic.csv",
            "--day",
            "2010-01-12",
        ],
    );
    assert_eq!(
        fs::read(dir.join("m/result.json")).unwrap(),
        fs::read(dir.join("f/result.json")).unwrap()
    );
}

#[test]
fn train_missing_file_names_path() {
    let tmp = TempDir::new().unwrap();
    let out = gridshift(tmp.path(), &["train", "--data", "nowhere.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.csv"));
}

#[test]
fn optimize_writes_results_without_violation() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    ok(
        dir,
        &with_day(&["--out", "o", "optimize"], &["--w1", "0.4", "--w2", "0.6"]),
    );
    for f in [
        "result.json",
        "trace.csv",
        "load_comparison.csv",
        "cost_comparison.csv",
        "optimize.manifest.json",
    ] {
        assert!(dir.join("o").join(f).exists(), "{f}");
    }
    let result = json(dir.join("o/result.json"));
    assert_eq!(result["violation"], 0.0);
    assert_eq!(result["violation_flagged"], false);
    let trace = fs::read_to_string(dir.join("o/trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,best_objective,best_cost,best_shift,violation\n"));
    assert_eq!(trace.lines().count(), 102);
    let loads = fs::read_to_string(dir.join("o/load_comparison.csv")).unwrap();
    assert!(loads.starts_with("hour,predicted_kwh,optimized_kwh\n1,"));
    let costs = fs::read_to_string(dir.join("o/cost_comparison.csv")).unwrap();
    assert!(costs.starts_with("hour,predicted_cost,optimized_cost\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    let runs: [(&[&str], &str); 3] = [
        (
            &[
                "optimize",
                "--algorithm",
                "de",
                "--w1",
                "0.8",
                "--w2",
                "0.2",
            ],
            "result.json",
        ),
        (
            &[
                "optimize",
                "--algorithm",
                "pso",
                "--w1",
                "0.9",
                "--w2",
                "0.1",
            ],
            "result.json",
        ),
        (
            &["sweep", "--iterations", "20", "--peak-cap", "85%"],
            "sweep.json",
        ),
    ];
    for (args, file) in runs {
        let mut outputs = Vec::new();
        for out in ["x", "y"] {
            ok(
                dir,
                &with_day(&[&["--seed", "21", "--out", out][..], args].concat(), &[]),
            );
            outputs.push(fs::read(dir.join(out).join(file)).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
    let other = with_day(
        &[
            "--seed",
            "22",
            "--out",
            "z",
            "sweep",
            "--iterations",
            "20",
            "--peak-cap",
            "85%",
        ],
        &[],
    );
    ok(dir, &other);
    assert_ne!(
        fs::read(dir.join("x/sweep.json")).unwrap(),
        fs::read(dir.join("z/sweep.json")).unwrap()
    );
}

#[test]
fn short_profiles_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    let drop_last = |name: &str| {
        let text = fs::read_to_string(dir.join(name)).unwrap();
        let kept: Vec<&str> = text.lines().take(24).collect();
        fs::write(dir.join(name), kept.join("\n") + "\n").unwrap();
    };

    drop_last("prices.csv");
    let out = gridshift(dir, &with_day(&["optimize"], &[]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing prices"));

    day_files(dir);
    drop_last("predicted.csv");
    let out = gridshift(dir, &with_day(&["optimize"], &[]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expected 24 hourly rows, found 23"));
}

#[test]
fn missing_prices_without_sources() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    let out = gridshift(dir, &["optimize", "--predicted", "predicted.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing prices"));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    for args in [
        &["optimize", "--bogus"][..],
        &["optimize", "--model", "m.txt"][..],
        &["optimize", "--algorithm", "ga"][..],
        &["frobnicate"][..],
        &[][..],
    ] {
        assert_eq!(gridshift(dir, args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(gridshift(dir, &["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_has_eleven_rows() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    let stdout = ok(
        dir,
        &with_day(
            &["--out", "s", "sweep"],
            &["--peak-cap", "85%", "--iterations", "30"],
        ),
    );
    assert_eq!(stdout.lines().count(), 12);
    let rows = json(dir.join("s/sweep.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(
        (rows[0]["w1"].as_f64(), rows[10]["w1"].as_f64()),
        (Some(0.0), Some(1.0))
    );
    let csv = fs::read_to_string(dir.join("s/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    let manifest = json(dir.join("s/sweep.manifest.json"));
    assert_eq!(manifest["derived_seeds"].as_object().unwrap().len(), 11);
    assert_eq!(rows[3]["seed"], manifest["derived_seeds"]["sweep[3]"]);
}

#[test]
fn compare_tags_budget_parity() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    let stdout = ok(
        dir,
        &with_day(&["--out", "c", "compare"], &["--iterations", "30"]),
    );
    assert!(stdout.contains("budgets matched"));
    let cmp = json(dir.join("c/comparison.json"));
    let rows = cmp["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["algorithm"], "pso");
    assert_eq!(rows[1]["algorithm"], "de");
    assert!(rows.iter().all(|r| r["budget_matched"] == true));
}

#[test]
fn verify_reports_gap() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    let stdout = ok(
        dir,
        &with_day(&["--out", "v", "verify"], &["--w1", "0.9", "--w2", "0.1"]),
    );
    let pass_lines: Vec<&str> = stdout.lines().filter(|l| l.starts_with("PASS")).collect();
    assert_eq!(pass_lines.len(), 2, "{stdout}");
    assert!(pass_lines[0].contains("relative gap"));
    let v = json(dir.join("v/verify.json"));
    assert_eq!(v["grid_points"], 10201);
    assert_eq!(v["free_hours"].as_array().unwrap().len(), 2);

    ok(
        dir,
        &with_day(
            &["--out", "v3", "verify"],
            &["--hours", "18,19,20", "--resolution", "21"],
        ),
    );
    assert_eq!(
        json(dir.join("v3/verify.json"))["free_hours"],
        serde_json::json!([18, 19, 20])
    );

    let out = gridshift(dir, &with_day(&["verify"], &["--free-hours", "5"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_sets_problem_and_flags_override() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    day_files(dir);
    fs::write(
        dir.join("dr.toml"),
        "w1 = 0.8\nw2 = 0.2\npeak_cap = \"85%\"\nalpha = 50.0\n",
    )
    .unwrap();
    ok(
        dir,
        &with_day(
            &["--config", "dr.toml", "--out", "k", "optimize"],
            &["--w2", "0.3"],
        ),
    );
    let params = &json(dir.join("k/optimize.manifest.json"))["params"]["problem"];
    assert_eq!(params["w1"], 0.8);
    assert_eq!(params["w2"], 0.3);
    assert_eq!(params["options"]["alpha"], 50.0);
    assert_eq!(params["options"]["peak_cap"]["fraction_of_peak"], 0.85);
    let result = json(dir.join("k/result.json"));
    let peak_after = result["peak_after"].as_f64().unwrap();
    let peak_before = result["peak_before"].as_f64().unwrap();
    assert!(peak_after <= 0.85 * peak_before + 1e-9);

    fs::write(dir.join("bad.toml"), "w3 = 1\n").unwrap();
    let out = gridshift(dir, &with_day(&["--config", "bad.toml", "optimize"], &[]));
    assert_eq!(out.status.code(), Some(1));
}
