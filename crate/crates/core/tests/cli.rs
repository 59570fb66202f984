use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn copy_two_triangles(dir: &Path) {
    for f in ["graph.json", "graph_edges.csv"] {
        fs::copy(fixture("two_triangles").join(f), dir.join(f)).unwrap();
    }
}

fn scan_two_triangles(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["scan", "--t-min", "0.1", "--t-max", "10", "--n-points", "5", "--n-repeats", "10", "--out-dir", s(dir)];
    args.extend_from_slice(extra);
    mstab(&args)
}

#[test]
fn graph_records_k_and_connectivity() {
    let out = TempDir::new().unwrap();
    let vectors = fixture("vectors_20.csv");
    let r = mstab(&["graph", "--vectors", s(&vectors), "--k", "3", "--out-dir", s(out.path())]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let meta = json(&out.path().join("graph.json"));
    assert_eq!(meta["k"], 3);
    assert_eq!(meta["n_nodes"], 20);
    assert_eq!(meta["connected"], true);
    let edges = fs::read_to_string(out.path().join("graph_edges.csv")).unwrap();
    assert_eq!(edges.lines().next(), Some("i,j,weight"));
    assert_eq!(edges.lines().count() - 1, meta["n_edges"].as_u64().unwrap() as usize);
}

#[test]
fn default_k_is_thirteen() {
    let out = TempDir::new().unwrap();
    let r = mstab(&["graph", "--vectors", s(&fixture("vectors_20.csv")), "--out-dir", s(out.path())]);
    assert!(r.status.success());
    assert_eq!(json(&out.path().join("graph.json"))["k"], 13);
    assert_eq!(json(&out.path().join("config.json"))["k"], 13);
}

#[test]
fn invalid_k_exits_two() {
    let out = TempDir::new().unwrap();
    let vectors = fixture("vectors_20.csv");
    let r = mstab(&["graph", "--vectors", s(&vectors), "--k", "0", "--out-dir", s(out.path())]);
    assert_eq!(r.status.code(), Some(2));
    let r = mstab(&["graph", "--vectors", s(&vectors), "--k", "20", "--out-dir", s(out.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn malformed_vectors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("v.csv");
    fs::write(&bad, "id,v0,v1\na,1,0\nb,0\n").unwrap();
    let r = mstab(&["graph", "--vectors", s(&bad), "--out-dir", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"));
}

#[test]
fn disconnected_graph_exits_three() {
    let dir = TempDir::new().unwrap();
    copy_two_triangles(dir.path());
    let edges = fs::read_to_string(dir.path().join("graph_edges.csv")).unwrap();
    let without_bridge: String = edges.lines().filter(|l| *l != "2,3,1").map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("graph_edges.csv"), without_bridge).unwrap();
    let r = scan_two_triangles(dir.path(), &[]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn two_triangle_scan_writes_curves() {
    let dir = TempDir::new().unwrap();
    copy_two_triangles(dir.path());
    let r = scan_two_triangles(dir.path(), &[]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let curves = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    let rows: Vec<Vec<&str>> = curves.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["t", "C", "r", "vi"]);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[3][1], "2");
    assert_eq!(fs::read_to_string(dir.path().join("partitions/t_002.csv")).unwrap(), "doc_id,community\nn0,0\nn1,0\nn2,0\nn3,1\nn4,1\nn5,1\n");
    let cross = fs::read_to_string(dir.path().join("cross_vi.csv")).unwrap();
    assert_eq!(cross.lines().count(), 5);
    assert!(cross.lines().all(|l| l.split(',').count() == 5));
    let scan = json(&dir.path().join("scan.json"));
    assert_eq!(scan["points"][2]["C"], 2);
}

#[test]
fn rerun_with_same_seed_is_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        copy_two_triangles(d.path());
    }
    assert!(scan_two_triangles(a.path(), &["--workers", "1"]).status.success());
    assert!(scan_two_triangles(b.path(), &["--workers", "3"]).status.success());
    for f in ["scan.json", "curves.csv", "cross_vi.csv", "partitions/t_004.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn resumed_scan_matches_uninterrupted_scan() {
    let (full, resumed) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&full, &resumed] {
        copy_two_triangles(d.path());
        assert!(scan_two_triangles(d.path(), &[]).status.success());
    }
    // Keep the header and two finished times, plus half of the third line.
    let cp = resumed.path().join("scan_checkpoint.jsonl");
    let text = fs::read_to_string(&cp).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut cut = lines[..3].join("\n");
    cut.push('\n');
    cut.push_str(&lines[3][..lines[3].len() / 2]);
    fs::write(&cp, cut).unwrap();
    fs::remove_file(resumed.path().join("scan.json")).unwrap();

    let r = scan_two_triangles(resumed.path(), &[]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).contains("resuming after 2 of 5"));
    for f in ["scan.json", "curves.csv", "cross_vi.csv", "scan_checkpoint.jsonl"] {
        assert_eq!(fs::read(full.path().join(f)).unwrap(), fs::read(resumed.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn changed_parameters_discard_the_checkpoint() {
    let dir = TempDir::new().unwrap();
    copy_two_triangles(dir.path());
    assert!(scan_two_triangles(dir.path(), &[]).status.success());
    let r = scan_two_triangles(dir.path(), &["--master-seed", "9"]);
    assert!(r.status.success());
    assert!(!String::from_utf8_lossy(&r.stdout).contains("resuming"));
}

#[test]
fn select_then_eval_without_labels() {
    let dir = TempDir::new().unwrap();
    copy_two_triangles(dir.path());
    assert!(scan_two_triangles(dir.path(), &[]).status.success());
    let r = mstab(&["select", "--out-dir", s(dir.path())]);
    assert!(r.status.success());
    let selected = json(&dir.path().join("selected_scales.json"));
    let scales = selected.as_array().unwrap();
    assert!(!scales.is_empty());
    assert_eq!(scales[0]["C"], 2);
    for field in ["rank", "t", "plateau_span", "vi_dip_depth", "score", "partition_file"] {
        assert!(scales[0].get(field).is_some(), "{field}");
    }

    let tokens = dir.path().join("tokens.jsonl");
    fs::write(
        &tokens,
        ["a b c", "a b c", "a b d", "x y z", "x y z", "x y w"]
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{{\"id\":\"n{i}\",\"tokens\":{:?}}}\n", t.split(' ').collect::<Vec<_>>()))
            .collect::<String>(),
    )
    .unwrap();
    let r = mstab(&["eval", "--tokens", s(&tokens), "--out-dir", s(dir.path())]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("nmi skipped"));
    assert!(stdout.contains("summaries skipped"));
    assert!(!dir.path().join("nmi.json").exists());
    let coherence = json(&dir.path().join("coherence.json"));
    assert_eq!(coherence["scales"][0]["C"], 2);
    assert!(coherence["scales"][0]["report"]["aggregate"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("sankey.json").exists());
}

#[test]
fn eval_with_unreadable_labels_exits_two() {
    let dir = TempDir::new().unwrap();
    copy_two_triangles(dir.path());
    assert!(scan_two_triangles(dir.path(), &[]).status.success());
    assert!(mstab(&["select", "--out-dir", s(dir.path())]).status.success());
    let missing = dir.path().join("missing.csv");
    let r = mstab(&["eval", "--labels", s(&missing), "--out-dir", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn full_run_on_fixture_corpus() {
    let out = TempDir::new().unwrap();
    let r = mstab(&[
        "run",
        "--vectors",
        s(&fixture("vectors_20.csv")),
        "--tokens",
        s(&fixture("tokens_20.jsonl")),
        "--labels",
        s(&fixture("labels_20.csv")),
        "--k",
        "3",
        "--n-points",
        "20",
        "--n-repeats",
        "20",
        "--out-dir",
        s(out.path()),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["config.json", "scan.json", "selected_scales.json", "coherence.json", "nmi.json", "sankey.json", "summaries.json"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    let nmi = json(&out.path().join("nmi.json"));
    for row in nmi.as_array().unwrap() {
        match row["nmi"].as_f64() {
            Some(v) => assert!((0.0..=1.0 + 1e-12).contains(&v)),
            None => assert!(row["note"].is_string()),
        }
    }
    // Each sankey link conserves documents: links out of a scale sum to N.
    let sankey = json(&out.path().join("sankey.json"));
    let links = sankey["links"].as_array().unwrap();
    let total: u64 = links.iter().map(|l| l["value"].as_u64().unwrap()).sum();
    let n_scales = json(&out.path().join("selected_scales.json")).as_array().unwrap().len() as u64;
    assert_eq!(total, 20 * n_scales.saturating_sub(1));

    let config = json(&out.path().join("config.json"));
    let again = TempDir::new().unwrap();
    let saved = again.path().join("config.json");
    let mut c = config.clone();
    c["out_dir"] = Value::String(s(again.path()).into());
    fs::write(&saved, serde_json::to_string(&c).unwrap()).unwrap();
    let r = mstab(&["run", "--config", s(&saved)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["scan.json", "curves.csv", "selected_scales.json"] {
        assert_eq!(fs::read(out.path().join(f)).unwrap(), fs::read(again.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_config_field_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"k": 5, "kk": 1}"#).unwrap();
    assert_eq!(mstab(&["graph", "--config", s(&cfg)]).status.code(), Some(2));
}
