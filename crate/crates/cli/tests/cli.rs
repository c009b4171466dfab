use std::path::Path;
use std::process::{Command, Output};

fn vpb(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpb"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let o = vpb(args, cwd);
    assert!(
        o.status.success(),
        "vpb {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn values(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect()
}

fn single_point(dir: &Path) {
    std::fs::write(dir.join("diag.csv"), "dim,birth,persistence\n1,1,0.5\n").unwrap();
}

#[test]
fn vpb_single_cell_holds_the_whole_block() {
    let t = tempfile::tempdir().unwrap();
    single_point(t.path());
    let out = ok(
        &["vpb", "--in", "diag.csv", "--tau", "0.5", "--domain", "2,1", "--region", "0,2,0,1", "--grid", "1x1"],
        t.path(),
    );
    assert_eq!(values(&out), vec![vec![0.375]]);
}

#[test]
fn vpb_6x6_cells_sum_to_the_block_integral() {
    let t = tempfile::tempdir().unwrap();
    single_point(t.path());
    let out = ok(&["vpb", "--in", "diag.csv", "--tau", "0.5", "--domain", "2,1", "--grid", "6x6"], t.path());
    let v = &values(&out)[0];
    assert_eq!(v.len(), 36);
    let sum: f64 = v.iter().sum();
    assert!((sum - 0.375).abs() < 1e-12, "sum {sum}");
    assert!(v.iter().all(|&x| (0.0..=0.375).contains(&x)));
}

#[test]
fn birth_death_and_birth_persistence_inputs_agree() {
    let t = tempfile::tempdir().unwrap();
    single_point(t.path());
    std::fs::write(t.path().join("bd.csv"), "1,1,1.5\n").unwrap();
    let a = ok(&["vpb", "--in", "diag.csv", "--domain", "2,1", "--grid", "3x3"], t.path());
    let b = ok(&["vpb", "--in", "bd.csv", "--format", "birth-death", "--domain", "2,1", "--grid", "3x3"], t.path());
    assert_eq!(a, b);
}

#[test]
fn pipeline_stages_chain() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let mut diagrams = Vec::new();
    let mut labels = String::from("label\n");
    for (kind, tag) in [("circle", "c"), ("clusters3", "k")] {
        for s in 0..4 {
            let cloud = format!("{tag}{s}.csv");
            let diag = format!("{tag}{s}_pd.csv");
            ok(&["gen", "shape", "--kind", kind, "--points", "40", "--seed", &s.to_string(), "--out", &cloud], d);
            ok(&["ph", "--in", &cloud, "--dims", "1", "--out", &diag], d);
            diagrams.push(diag);
            labels.push_str(kind);
            labels.push('\n');
        }
    }
    std::fs::write(d.join("labels.csv"), labels).unwrap();
    let mut args: Vec<&str> = vec!["vpb", "--tau", "0.5", "--grid", "5x5", "--out", "f.csv"];
    for p in &diagrams {
        args.extend(["--in", p.as_str()]);
    }
    ok(&args, d);
    let feats = values(&std::fs::read_to_string(d.join("f.csv")).unwrap());
    assert_eq!(feats.len(), 8);
    assert!(feats.iter().all(|r| r.len() == 25));

    ok(&["dist", "--features", "f.csv", "--norm", "l1", "--out", "m.csv"], d);
    let m = std::fs::read_to_string(d.join("m.csv")).unwrap();
    let rows = values(m.split_once('\n').unwrap().1);
    assert_eq!(rows.len(), 8);
    for i in 0..8 {
        assert_eq!(rows[i][i], 0.0);
        for j in 0..8 {
            assert_eq!(rows[i][j], rows[j][i]);
        }
    }

    let c: serde_json::Value = serde_json::from_str(&ok(&["cluster", "--matrix", "m.csv", "--k", "2", "--labels", "labels.csv"], d)).unwrap();
    assert_eq!(c["assignment"].as_array().unwrap().len(), 8);
    let acc = c["accuracy"].as_f64().unwrap();
    assert!((0.5..=1.0).contains(&acc));

    let r: serde_json::Value = serde_json::from_str(&ok(&["retrieve", "--matrix", "m.csv", "--labels", "labels.csv"], d)).unwrap();
    for k in ["nn", "ft", "st", "e", "dcg"] {
        let x = r[k].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&x), "{k} = {x}");
    }

    let cl: serde_json::Value =
        serde_json::from_str(&ok(&["classify", "--matrix", "m.csv", "--labels", "labels.csv", "--folds", "4"], d)).unwrap();
    assert!((0.0..=1.0).contains(&cl["cv_accuracy"].as_f64().unwrap()));

    ok(&["pi", "--grid", "4x4", "--sigma", "0.05", "--in", &diagrams[0], "--in", &diagrams[1], "--out", "p.csv"], d);
    let p = values(&std::fs::read_to_string(d.join("p.csv")).unwrap());
    assert_eq!((p.len(), p[0].len()), (2, 16));
}

#[test]
fn wasserstein_matrix_and_matching() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    std::fs::write(d.join("a.csv"), "dim,birth,persistence\n1,0,1\n").unwrap();
    std::fs::write(d.join("b.csv"), "dim,birth,persistence\n1,0.5,1\n").unwrap();
    std::fs::write(d.join("e.csv"), "dim,birth,persistence\n").unwrap();
    let m = ok(&["dist", "--in", "a.csv", "--in", "b.csv", "--in", "e.csv", "--dim", "1", "--p", "1"], d);
    let (header, body) = m.split_once('\n').unwrap();
    assert_eq!(header, "a,b,e");
    let rows = values(body);
    // shift of 0.5 in birth; both single points to the axis cost their persistence
    assert_eq!(rows[0][1], 0.5);
    assert_eq!(rows[0][2], 1.0);
    assert_eq!(rows[1][2], 1.0);
    let j: serde_json::Value = serde_json::from_str(&ok(&["dist", "--in", "a.csv", "--in", "b.csv", "--dim", "1", "--matching"], d)).unwrap();
    assert_eq!(j["cost"].as_f64().unwrap(), 0.5);
    assert_eq!(j["pairs"].as_array().unwrap().len(), 1);
}

#[test]
fn cpd_finds_a_mean_shift() {
    let t = tempfile::tempdir().unwrap();
    let mut csv = String::new();
    for i in 0..40 {
        let base = if i < 20 { 0.0 } else { 5.0 };
        let jitter = ((i * 7) % 5) as f64 * 0.01;
        csv.push_str(&format!("{},{}\n", base + jitter, base - jitter));
    }
    std::fs::write(t.path().join("seq.csv"), csv).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&ok(&["cpd", "--features", "seq.csv", "--truth", "21", "--permutations", "99"], t.path())).unwrap();
    assert_eq!(v["change_points"], serde_json::json!([21]));
    assert_eq!(v["errors"], serde_json::json!([0.0]));
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| {
            let n = n.as_str().unwrap().to_string();
            let bytes = std::fs::read(dir.join(&n)).unwrap();
            (n, bytes)
        })
        .collect()
}

#[test]
fn run_six_shapes_twice_is_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(&["run", "six-shapes", "--scale", "desk", "--seed", "7", "--out", "a"], d);
    ok(&["run", "six-shapes", "--scale", "desk", "--seed", "7", "--out", "b"], d);
    let (a, b) = (data_files(&d.join("a")), data_files(&d.join("b")));
    assert!(a.iter().any(|(n, _)| n == "six_shapes.csv"));
    assert!(!a.iter().any(|(n, _)| n.contains("timing")));
    assert_eq!(a, b);
    let table = String::from_utf8(a[0].1.clone()).unwrap();
    // 2 noise levels x 2 dims x 3 norms x 2 methods
    assert_eq!(table.lines().count(), 1 + 24);
}

#[test]
fn run_from_manifest_reproduces_outputs() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(&["run", "ltm-classify", "--seed", "3", "--items-per-class", "8", "--orbit-length", "120", "--out", "a"], d);
    ok(&["run", "--config", "a/manifest.json", "--out", "b"], d);
    assert_eq!(data_files(&d.join("a")), data_files(&d.join("b")));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("b/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["seed"], 3);
    assert_eq!(m["config"]["overrides"]["orbit_length"], 120);
}

#[test]
fn run_cost_bench_has_one_row_per_size_and_method() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(&["run", "cost-bench", "--sizes", "1000,2000", "--out", "r"], d);
    let csv = std::fs::read_to_string(d.join("r/bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,method,seconds"));
    let mut keys: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 3);
            assert!(f[2].parse::<f64>().unwrap() >= 0.0);
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    keys.sort();
    let want: Vec<(String, String)> = ["1000", "2000"]
        .iter()
        .flat_map(|n| ["pi", "vpb"].map(|m| (n.to_string(), m.to_string())))
        .collect();
    assert_eq!(keys, want);
}

#[test]
fn out_without_stdout_keeps_stdout_empty() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(ok(&["gen", "beta", "--n", "5", "--out", "b.csv"], d), "");
    let with = ok(&["gen", "beta", "--n", "5", "--out", "c.csv", "--stdout"], d);
    assert_eq!(with, std::fs::read_to_string(d.join("b.csv")).unwrap());
    assert_eq!(with, std::fs::read_to_string(d.join("c.csv")).unwrap());
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    std::fs::write(d.join("bad.csv"), "1,2,1\n").unwrap();
    let cases: &[&[&str]] = &[
        &["vpb", "--in", "missing.csv"],
        &["vpb", "--in", "bad.csv"],
        &["run", "cost-bench", "--folds", "3"],
        &["run", "unknown-experiment"],
        &["run"],
        &["vpb", "--in", "bad.csv", "--grid", "0x3"],
        &["ph", "--in", "bad.csv", "--essential", "cap"],
    ];
    for args in cases {
        let o = vpb(args, d);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(!o.stderr.is_empty(), "{args:?} printed no diagnostic");
        assert!(o.stdout.is_empty(), "{args:?} wrote to stdout");
    }
    let o = vpb(&["run", "cost-bench", "--folds", "3"], d);
    assert!(String::from_utf8_lossy(&o.stderr).contains("overrides.folds"));
}

#[test]
fn threads_flag_does_not_change_results() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let args = ["run", "six-shapes", "--items-per-class", "3", "--points", "40", "--seed", "1"];
    let mut one: Vec<&str> = args.to_vec();
    one.extend(["--threads", "1", "--out", "one"]);
    let mut two: Vec<&str> = args.to_vec();
    two.extend(["--threads", "2", "--out", "two"]);
    ok(&one, d);
    ok(&two, d);
    assert_eq!(data_files(&d.join("one")), data_files(&d.join("two")));
}
