use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flexhull"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn demo_fleet_square_vs_hexagon() {
    let tmp = TempDir::new().unwrap();
    let (sq, hex) = (tmp.path().join("sq"), tmp.path().join("hex"));
    let o = run(&["aggregate"], &config("demo_fleet.json"), &sq);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["aggregate"], &config("demo_fleet_hexagon.json"), &hex);
    assert!(o.status.success(), "{}", stderr(&o));

    let names = json_files(&sq);
    assert_eq!(names.len(), 6, "{names:?}");
    assert!(names.contains(&"aggregate.json".to_string()));

    let a_sq = read_json(&sq.join("aggregate.json"));
    let a_hex = read_json(&hex.join("aggregate.json"));
    let pa = |v: &Value| v["pi_a"].as_f64().unwrap();
    assert!(
        pa(&a_hex) > pa(&a_sq),
        "hexagon {} vs square {}",
        pa(&a_hex),
        pa(&a_sq)
    );
    assert!(a_sq["pi_d"].as_f64().unwrap() > 0.0);

    let d0 = read_json(&sq.join("der_0.json"));
    assert_eq!(d0["type"], "battery");
    assert!(d0["inner"]["alpha"].as_f64().unwrap() < d0["outer"]["alpha"].as_f64().unwrap());

    for csv in [
        "der_0_boundary.csv",
        "der_3_inner.csv",
        "aggregate_outer.csv",
        "minkowski_samples.csv",
    ] {
        let text = fs::read_to_string(sq.join(csv)).unwrap();
        assert!(text.starts_with("p,q\n"), "{csv}");
        assert!(text.lines().count() > 4, "{csv}");
    }
    let outer_loop = fs::read_to_string(sq.join("aggregate_outer.csv")).unwrap();
    let rows: Vec<&str> = outer_loop.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], rows[4]);
}

#[test]
fn output_is_deterministic_across_jobs() {
    let tmp = TempDir::new().unwrap();
    let dirs: Vec<PathBuf> = ["a", "b"].iter().map(|n| tmp.path().join(n)).collect();
    for (dir, jobs) in dirs.iter().zip(["1", "3"]) {
        let o = run(
            &["aggregate", "--jobs", jobs],
            &config("demo_fleet.json"),
            dir,
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let files: Vec<String> = fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(files.len() > 6);
    for f in files {
        let a = fs::read(dirs[0].join(&f)).unwrap();
        let b = fs::read(dirs[1].join(&f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
}

#[test]
fn json_is_sorted_and_indented() {
    let tmp = TempDir::new().unwrap();
    let o = run(
        &["fit", "--der", "1"],
        &config("demo_fleet.json"),
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json_files(tmp.path()), vec!["der_1.json"]);
    let text = fs::read_to_string(tmp.path().join("der_1.json")).unwrap();
    assert!(text.ends_with("}\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("  \""));
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim_start().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
}

#[test]
fn ac_fleet_is_outer_only() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["aggregate"], &config("demo_ac10.json"), tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let names = json_files(tmp.path());
    assert_eq!(names.len(), 11, "{names:?}");
    for i in 0..10 {
        let d = read_json(&tmp.path().join(format!("der_{i}.json")));
        assert!(d["inner"].is_null());
        assert_eq!(d["discrete"], true);
    }
    let agg = read_json(&tmp.path().join("aggregate.json"));
    assert!(agg["aggregate_inner"].is_null());
    assert!(agg["pi_a"].is_null() && agg["pi_d"].is_null());
    assert!(!tmp.path().join("aggregate_inner.csv").exists());
}

#[test]
fn emit_plots_writes_csv_only() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["emit-plots"], &config("demo_ac10.json"), tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(json_files(tmp.path()).is_empty());
    assert!(tmp.path().join("der_9_boundary.csv").exists());
}

#[test]
fn oracle_report() {
    let tmp = TempDir::new().unwrap();
    let o = run(
        &["oracle", "--seed", "5"],
        &config("demo_ac10.json"),
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&tmp.path().join("oracle.json"));
    assert_eq!(r["seed"], 5);
    assert_eq!(r["minkowski_outside_outer"], 0);
    assert_eq!(r["sums_consistent"], true);
    let per = r["per_der"].as_array().unwrap();
    assert_eq!(per.len(), 10);
    for d in per {
        assert!(d["outer_alpha_rel_gap"].as_f64().unwrap() < 1e-2);
        assert_eq!(d["boundary_outside_outer"], 0);
        assert!(d["inner_sos"].is_null());
    }
}

fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let path = dir.join("fleet.json");
    fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

#[test]
fn missing_fields_exit_1_and_are_named() {
    let tmp = TempDir::new().unwrap();
    let base = read_json(&config("demo_ac10.json"));
    let top = ["ders", "prototype", "fit", "outputs"];
    let fit = [
        "degree",
        "bisection_tol",
        "epsilon_step",
        "max_outer_iters",
        "seed",
    ];
    let cases = top
        .iter()
        .map(|f| (None, *f))
        .chain(fit.iter().map(|f| (Some("fit"), *f)));
    for (parent, field) in cases {
        let mut v = base.clone();
        let obj = match parent {
            Some(p) => v[p].as_object_mut().unwrap(),
            None => v.as_object_mut().unwrap(),
        };
        obj.remove(field);
        let path = write_config(tmp.path(), &v);
        let o = run(&["aggregate"], &path, &tmp.path().join("out"));
        assert_eq!(o.status.code(), Some(1), "{field}");
        assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    }
}

#[test]
fn invalid_values_exit_1() {
    let tmp = TempDir::new().unwrap();
    let base = read_json(&config("demo_ac10.json"));
    let mut v = base.clone();
    v["fit"]["bisection_tol"] = (-1.0).into();
    let o = run(
        &["fit"],
        &write_config(tmp.path(), &v),
        &tmp.path().join("o"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bisection_tol"));

    let mut v = base.clone();
    v["ders"] = Value::Array(vec![]);
    let o = run(
        &["fit"],
        &write_config(tmp.path(), &v),
        &tmp.path().join("o"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ders"));

    let mut v = base;
    v["ders"][3]["params"]["p_max"] = (-2.0).into();
    let o = run(
        &["fit"],
        &write_config(tmp.path(), &v),
        &tmp.path().join("o"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ders[3]"), "{}", stderr(&o));

    let o = bin().args(["fit", "--config"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solver_failure_exit_2_names_der() {
    let tmp = TempDir::new().unwrap();
    let mut v = read_json(&config("demo_ac10.json"));
    v["ders"] = serde_json::json!([
        {"type": "ac", "params": {"p_max": 1.0, "gamma": 0.5}},
        {"type": "custom", "params": {"pieces": [
            {"constraints": [{"terms": [[0, 0, 1.0], [4, 0, -1.0], [0, 4, -1.0]]}]}
        ]}}
    ]);
    v["fit"]["degree"] = 2.into();
    let o = run(
        &["aggregate"],
        &write_config(tmp.path(), &v),
        &tmp.path().join("o"),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("DER 1"), "{err}");
    assert!(!err.contains("DER 0"), "{err}");
}
