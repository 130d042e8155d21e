//! End-to-end runs of the `atomembed` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atomembed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_graph(dir: &TempDir, name: &str, n: usize, edges: &[(usize, usize)]) -> PathBuf {
    let edges: Vec<String> = edges.iter().map(|(u, v)| format!("[{u},{v}]")).collect();
    let path = dir.path().join(name);
    fs::write(&path, format!("{{\"n\": {n}, \"edges\": [{}]}}", edges.join(","))).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn embed_to(graph: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["embed", "--graph", s(graph), "--out", s(out)];
    args.extend_from_slice(extra);
    run(&args)
}

fn k4() -> Vec<(usize, usize)> {
    vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

#[test]
fn embeds_and_certifies_k4() {
    let dir = TempDir::new().unwrap();
    let graph = write_graph(&dir, "k4.json", 4, &k4());
    let reg = dir.path().join("k4.reg.json");
    let xyz = dir.path().join("k4.xyz");
    let o = embed_to(&graph, &reg, &["--xyz", s(&xyz)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let stats: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(stats["n"], 4);
    assert_eq!(stats["edges"], 6);
    let n_plus = stats["n_plus"].as_u64().unwrap();
    assert_eq!(n_plus, 4 + stats["total_ancillas"].as_u64().unwrap());
    let xyz = fs::read_to_string(&xyz).unwrap();
    assert_eq!(xyz.lines().count() as u64, n_plus + 2);
    assert_eq!(xyz.lines().filter(|l| l.starts_with("original ")).count(), 4);

    let report = dir.path().join("report.json");
    let o = run(&["verify", "--graph", s(&graph), "--register", s(&reg), "--limit", "200", "--report", s(&report)]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("certified: true"));
    assert!(stdout(&o).contains("MIS(G): 1"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["certified"], true);
    for set in report["restricted_sets"].as_array().unwrap() {
        assert_eq!(set.as_array().unwrap().len(), 1);
    }
}

#[test]
fn path_of_three_keeps_its_endpoints() {
    let dir = TempDir::new().unwrap();
    let graph = write_graph(&dir, "p3.json", 3, &[(0, 1), (1, 2)]);
    let reg = dir.path().join("p3.reg.json");
    assert!(embed_to(&graph, &reg, &[]).status.success());
    let report = dir.path().join("report.json");
    let o = run(&["verify", "--graph", s(&graph), "--register", s(&reg), "--report", s(&report)]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    let sets: Vec<&serde_json::Value> = report["restricted_sets"].as_array().unwrap().iter().collect();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0], &serde_json::json!([0, 2]));
}

#[test]
fn rejects_degree_above_six() {
    let dir = TempDir::new().unwrap();
    let edges: Vec<(usize, usize)> = (0..8).flat_map(|u| (u + 1..8).map(move |v| (u, v))).collect();
    let graph = write_graph(&dir, "k8.json", 8, &edges);
    let o = embed_to(&graph, &dir.path().join("k8.reg.json"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degree 7"), "{}", stderr(&o));
    assert!(!dir.path().join("k8.reg.json").exists());
}

#[test]
fn zeroed_ancilla_detunings_are_not_certified() {
    let dir = TempDir::new().unwrap();
    let graph = write_graph(&dir, "k2.json", 2, &[(0, 1)]);
    let reg = dir.path().join("k2.reg.json");
    assert!(embed_to(&graph, &reg, &[]).status.success());
    let o = run(&["verify", "--graph", s(&graph), "--register", s(&reg)]);
    assert!(o.status.success());

    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&reg).unwrap()).unwrap();
    for atom in value["atoms"].as_array_mut().unwrap() {
        atom["local_detuning"] = serde_json::json!(0.0);
    }
    let broken = dir.path().join("broken.reg.json");
    fs::write(&broken, value.to_string()).unwrap();
    let o = run(&["verify", "--graph", s(&graph), "--register", s(&broken)]);
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("certified: false"));
    assert!(stdout(&o).contains("counterexample: "));
}

#[test]
fn register_of_another_graph_is_refused() {
    let dir = TempDir::new().unwrap();
    let k2 = write_graph(&dir, "k2.json", 2, &[(0, 1)]);
    let p3 = write_graph(&dir, "p3.json", 3, &[(0, 1), (1, 2)]);
    let reg = dir.path().join("k2.reg.json");
    assert!(embed_to(&k2, &reg, &[]).status.success());
    let o = run(&["verify", "--graph", s(&p3), "--register", s(&reg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
}

#[test]
fn oracle_limit_is_reported() {
    let dir = TempDir::new().unwrap();
    let graph = write_graph(&dir, "k4.json", 4, &k4());
    let reg = dir.path().join("k4.reg.json");
    assert!(embed_to(&graph, &reg, &[]).status.success());
    let o = run(&["verify", "--graph", s(&graph), "--register", s(&reg), "--limit", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("raise --limit"), "{}", stderr(&o));
}

#[test]
fn embedding_is_byte_for_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)];
    let graph = write_graph(&dir, "g.json", 5, &edges);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert!(embed_to(&graph, &a, &["--seed", "11"]).status.success());
    assert!(embed_to(&graph, &b, &["--seed", "11"]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn invalid_parameters_are_rejected() {
    let dir = TempDir::new().unwrap();
    let graph = write_graph(&dir, "k2.json", 2, &[(0, 1)]);
    let out = dir.path().join("r.json");
    assert_eq!(embed_to(&graph, &out, &["--rb", "1.5"]).status.code(), Some(2));
    assert_eq!(embed_to(&graph, &out, &["--scale", "2"]).status.code(), Some(2));
    assert_eq!(embed_to(&graph, &out, &["--delta", "1.2"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let o = embed_to(&missing, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));
}

#[test]
fn gadget_reports_both_thresholds() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("gadget.csv");
    let o = run(&["gadget", "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 2, "{lines:?}");
    assert!(lines[0].starts_with("1001 -> "));
    assert!(lines[1].ends_with("between 0.984 and 0.985"), "{lines:?}");
    let table = fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("delta_i,E_0000,"));
    assert_eq!(table.lines().count(), 1 + 1101);

    let o = run(&["gadget", "--sweep", "1:0:0.1", "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_writes_one_row_per_size() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = run(&["bench", "--sizes", "4,6,8", "--samples", "3", "--p", "0.3", "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("slope="));
    let table = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,p,samples,mean_n_plus,std_n_plus,mean_runtime");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("4,0.3,3,"));
}

#[test]
fn bench_without_edges_adds_no_ancillas() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = run(&["bench", "--sizes", "5,10", "--samples", "2", "--p", "0", "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(&csv).unwrap();
    for row in table.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], cols[3], "{row}");
        assert_eq!(cols[4], "0");
    }
}
