use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_statamoeba"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn presets_are_listed() {
    let o = run(&["presets"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["triangle", "fig1b", "symmetric6", "degenerate6", "fig4", "fig5_3d", "bump10"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn strata_writes_one_file_per_visible_locus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig4");
    let o = run(&["strata", "--preset", "fig4", "--k", "1", "--bbox", "-6:6,-6:6", "--res", "401", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        ["locus_k1_1.json", "locus_k1_2.json", "locus_k1_3.json", "locus_k1_5.json", "locus_k1_6.json", "strata_k1_summary.json"]
    );
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("strata_k1_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["empty"], serde_json::json!([[4]]));
    assert_eq!(summary["intersections"], serde_json::json!([]));
}

fn origin_row(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
        .min_by(|a, b| {
            let d = |r: &Vec<String>| r[0].parse::<f64>().unwrap().abs() + r[1].parse::<f64>().unwrap().abs();
            d(a).total_cmp(&d(b))
        })
        .unwrap()
}

#[test]
fn classify_triangle_origin_is_pos() {
    let o = run(&["classify", "--preset", "triangle", "--k", "1", "--bbox", "-6:6", "--res", "401"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("x,y,class,delta,neg_count,mean_spin\n"));
    let row = origin_row(&csv);
    assert_eq!(row[2], "POS");
    assert_eq!(row[4], "0");
}

#[test]
fn model_file_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("triangle.json");
    fs::write(
        &path,
        r#"{"n":2,"functions":[{"kind":"linear","b":0,"a":[0,0]},{"kind":"linear","b":0,"a":[1,0]},{"kind":"linear","b":0,"a":[0,1]}]}"#,
    )
    .unwrap();
    let common = ["--k", "1", "--bbox", "-4:4", "--res", "81", "--format", "json"];
    let a = run(&[&["classify", "--preset", "triangle"][..], &common].concat());
    let b = run(&[&["classify", "--model", path.to_str().unwrap()][..], &common].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_bump10_records_expected_chain_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify", "--preset", "bump10", "--bbox", "-5:5", "--samples", "4000", "--expect-violation", "chains", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let chain = report["sections"].as_array().unwrap().iter().find(|s| s["name"] == "chain_neg").unwrap();
    assert!(chain["violations"].as_u64().unwrap() > 0);
    assert!(!chain["witnesses"].as_array().unwrap().is_empty());
    for s in report["sections"].as_array().unwrap() {
        if s["name"] != "chain_neg" {
            assert_eq!(s["violations"], 0, "{}", s["name"]);
        }
    }
}

#[test]
fn verify_without_expectation_fails_on_bump10() {
    let o = run(&["verify", "--preset", "bump10", "--bbox", "-5:5", "--samples", "2000", "--neg-rule", "observed-max"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_fig4_passes() {
    let o = run(&["verify", "--preset", "fig4", "--samples", "3000", "--rays", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_arguments_exit_with_usage() {
    for args in [
        &["classify", "--k", "1"][..],
        &["classify", "--preset", "fig4", "--model", "m.json", "--k", "1"],
        &["classify", "--preset", "fig4", "--k", "4"],
        &["classify", "--preset", "fig4", "--k", "1", "--bbox", "a:b"],
        &["polygon", "--lengths", "1,1,5"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn tropical_and_polygon_outputs() {
    let o = run(&["tropical", "--preset", "triangle", "--bbox", "-5:5", "--check-unbounded"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["skeleton"]["pieces"].as_array().unwrap().len(), 3);
    assert_eq!(v["unbounded"]["components_unbounded"], true);

    let o = run(&["polygon", "--lengths", "3,4,5", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("<svg"));
}

fn artifacts(dir: &Path, threads: &str) -> Vec<Vec<u8>> {
    let cases: [&[&str]; 3] = [
        &["classify", "--preset", "fig4", "--k", "2", "--res", "201", "--format", "csv"],
        &["classify", "--preset", "fig4", "--k", "2", "--res", "201", "--format", "json"],
        &["verify", "--preset", "fig4", "--samples", "2000", "--rays", "40", "--seed", "9"],
    ];
    cases
        .iter()
        .enumerate()
        .map(|(i, args)| {
            let path = dir.join(format!("{threads}_{i}"));
            let o = bin().args(*args).args(["--out", path.to_str().unwrap()]).env("STATAMOEBA_THREADS", threads).output().unwrap();
            assert_eq!(o.status.code(), Some(0));
            fs::read(path).unwrap()
        })
        .collect()
}

#[test]
fn artifacts_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(artifacts(dir.path(), "1"), artifacts(dir.path(), "0"));
}
