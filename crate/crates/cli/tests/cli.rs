use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gradproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradproj")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn body_lines(tsv: &str) -> Vec<&str> {
    tsv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn refine_corner_keeps_limited_grading() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = gradproj(&["refine", "--dim", "2", "--alpha", "1", "--policy", "corner", "--rounds", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json_file(&dir.path().join("m.json.report.json"));
    let r = &report["report"];
    assert_eq!(r["limited_grading"], true);
    assert!(r["h_grading"].as_f64().unwrap() <= 2f64.sqrt() * (1.0 + 1e-12));
    assert_eq!(report["meta"]["version"], gradproj::VERSION);
    assert_eq!(report["meta"]["config_sha256"].as_str().unwrap().len(), 64);
    let mesh = gradproj::mesh::io::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(mesh.num_active(), r["elements"].as_u64().unwrap() as usize);
}

#[test]
fn refine_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.json");
    let o = gradproj(&["refine", "--dim", "3", "--policy", "uniform", "--rounds", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_file(&out)["simplices"].as_array().unwrap().len(), 48);

    let out = dir.path().join("z.json");
    let o = gradproj(&["refine", "--rounds", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_file(&out)["simplices"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let args = ["refine", "--dim", "2", "--policy", "random(0.3)", "--rounds", "5", "--seed", "7", "--out", out.to_str().unwrap()];
    gradproj(&args);
    let first = (std::fs::read(&out).unwrap(), std::fs::read(dir.path().join("a.json.report.json")).unwrap());
    gradproj(&args);
    let second = (std::fs::read(&out).unwrap(), std::fs::read(dir.path().join("a.json.report.json")).unwrap());
    assert_eq!(first, second);

    let decay = ["decay", "--dim", "2", "--cells", "2", "--degree", "2", "--max-delta", "3"];
    assert_eq!(stdout(&gradproj(&decay)), stdout(&gradproj(&decay)));
}

#[test]
fn certify_single_triangle_and_cr() {
    let o = gradproj(&["certify", "--single", "--dim", "2", "--degree", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["certificate"]["kappa"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert_eq!(v["meta"]["tolerances"]["kappa"], 1e-8);

    let o = gradproj(&["certify", "--dim", "2", "--cells", "2", "--degree", "CR"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["certificate"]["kappa"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["certificate"]["K"], "CR");
}

#[test]
fn certify_refined_3d_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    gradproj(&["refine", "--dim", "3", "--policy", "corner", "--rounds", "3", "--out", mesh.to_str().unwrap()]);
    let out = dir.path().join("c.json");
    let o = gradproj(&["certify", "--mesh", mesh.to_str().unwrap(), "--degree", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_file(&out);
    assert!(v["certificate"]["kappa"].as_f64().unwrap() <= 3.5 + 1e-8);
}

#[test]
fn impossible_tolerance_is_a_violation() {
    // The single-simplex bound is attained, so a negative slack must fail.
    let o = gradproj(&["certify", "--single", "--dim", "2", "--degree", "1", "--tol-kappa=-1e-3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tables_reproduce_published_entries() {
    let dir = tempfile::tempdir().unwrap();
    let o = gradproj(&["tables", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let read = |n: &str| std::fs::read_to_string(dir.path().join(n)).unwrap();
    let t2 = read("stability_2d.tsv");
    assert!(t2.starts_with("# gradproj "));
    assert!(body_lines(&t2).contains(&"2\t1\t[1,∞]\t[1.2619,4.8188]"));
    assert!(body_lines(&t2).contains(&"4\t1\t[1.1158,9.6376]\t∅"));
    assert!(body_lines(&read("stability_3d.tsv")).contains(&"2^(1/3)\t1\t[1,∞]\t[1,∞]"));
    assert!(body_lines(&read("q_new.tsv")).contains(&"4\t0.2000\t0.2251\t0.2476"));
    let cr = read("cr_thresholds.tsv");
    assert!(cr.contains("lp_all_p_max_d\t35") && cr.contains("w1p_all_p_max_d\t32"));
}

#[test]
fn decay_is_bounded_and_monotone() {
    let o = gradproj(&["decay", "--dim", "2", "--cells", "4", "--degree", "1", "--max-delta", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# within_bound true") && text.contains("# monotone true"));
    let rows = body_lines(&text);
    assert_eq!(rows[0], "delta\tmeasured\tbound");
    assert!(rows.len() >= 4);
}

#[test]
fn stability_with_preset() {
    let o = gradproj(&["stability", "--dim", "2", "--preset", "2D-RG", "--degree", "1", "--norm", "W1p"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["p_interval_text"], "∅");
    let o = gradproj(&["stability", "--dim", "2", "--gamma-h", "2", "--degree", "1", "--norm", "W1p", "--p", "2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["verdict"]["admissible"], true);
}

#[test]
fn cr_check_closure_bench_and_grading_run() {
    let o = gradproj(&["cr-check", "--probe-limit", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["thresholds"]["lp_all_p_max_d"], 35);

    let o = gradproj(&["closure-bench", "--dim", "3", "--policy", "uniform", "--rounds", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# closure_ratio 1.000000"));

    let o = gradproj(&["grading", "--dim", "2", "--cells", "2", "--adjacency", "face"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# level_gap 0"));
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(gradproj(&["certify", "--degree", "0"]).status.code(), Some(3));
    assert_eq!(gradproj(&["certify", "--mesh", "/nonexistent/mesh.json"]).status.code(), Some(3));
    assert_eq!(gradproj(&["refine", "--policy", "sideways", "--out", "/dev/null"]).status.code(), Some(3));
    assert_eq!(gradproj(&["stability", "--dim", "2"]).status.code(), Some(3));
    assert_eq!(gradproj(&["no-such-command"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": 1, \"dim\": 2}").unwrap();
    assert_eq!(gradproj(&["grading", "--mesh", bad.to_str().unwrap()]).status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_gradproj"))
        .args(["tables", "--out-dir", dir.path().to_str().unwrap()])
        .env("GP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |t: &str| {
        Command::new(env!("CARGO_BIN_EXE_gradproj"))
            .args(["certify", "--dim", "2", "--cells", "2", "--degree", "2"])
            .env("GP_THREADS", t)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}
