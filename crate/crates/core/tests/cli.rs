use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::io::Write;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn textland(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textland"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// simulate → build → distill in `dir`; returns the map path.
fn built_map(dir: &Path) -> PathBuf {
    let o = textland(&[&"simulate", &"--scenario", &data("mall_scenario.json"), &"--out-dir", &dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let map = dir.join("map.json");
    let o = textland(&[
        &"build",
        &"--poses",
        &dir.join("poses.txt"),
        &"--detections",
        &dir.join("detections.jsonl"),
        &"--config",
        &data("config.json"),
        &"--out",
        &map,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("6 long-term"));
    map
}

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let map = built_map(dir.path());
    for f in ["poses.txt", "detections.jsonl", "ground_truth.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }

    let o = textland(&[&"query", &"--map", &map, &"--backend", &data("backend_mock.json"), &"pizza"]);
    assert_eq!(o.status.code(), Some(5));

    let o = textland(&[&"distill", &"--map", &map, &"--backend", &data("backend_mock.json")]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("Landmark\tIs this a shop?\n"));
    assert!(out.contains("KFC\t1\n"));
    assert!(out.contains("DANGER\t0\n"));

    let o = textland(&[&"query", &"--map", &map, &"--backend", &data("backend_mock.json"), &"I want a burger"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("KFC\t"));

    let svg = dir.path().join("map.svg");
    let o = textland(&[&"inspect", &"--map", &map, &"--plot", &svg]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.starts_with("class_id\tname\tverdict\tposition\tn_observations\n"));
    assert_eq!(table.lines().count(), 7);
    assert!(table.contains("\tHIGHTEMPERATURE\tNOT_LANDMARK\t"));

    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
    assert_eq!(circles, 6);
    let blue = doc
        .descendants()
        .filter(|n| n.has_tag_name("circle") && n.attribute("fill") == Some(textland::svg::LANDMARK_COLOR))
        .count();
    assert_eq!(blue, 4);
}

#[test]
fn query_prints_stored_position() {
    let o = textland(&[
        &"query",
        &"--map",
        &data("fixture_map.json"),
        &"--backend",
        &data("backend_mock.json"),
        &"Where can I eat pizza?",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "必胜客欢乐餐厅\t2.5 -0.086 0.78\n");
}

#[test]
fn interactive_query_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_textland"))
        .args(["query", "--interactive", "--map"])
        .arg(data("fixture_map.json"))
        .arg("--backend")
        .arg(data("backend_mock.json"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all("pizza please\n\nfried chicken\nwashroom\n".as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o), "必胜客欢乐餐厅\t2.5 -0.086 0.78\nKFC\t1.2 -0.064 0.7\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn no_selection_exit_code() {
    let o = textland(&[&"query", &"--map", &data("fixture_map.json"), &"--backend", &data("backend_mock.json"), &"washroom"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn no_landmarks_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("fixture_map.json")).unwrap();
    let text = text.replace("\"LANDMARK\"", "\"NOT_LANDMARK\"");
    let map = dir.path().join("map.json");
    std::fs::write(&map, text).unwrap();
    let o = textland(&[&"query", &"--map", &map, &"--backend", &data("backend_mock.json"), &"pizza"]);
    assert_eq!(o.status.code(), Some(7));
}

#[test]
fn empty_association_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let poses = dir.path().join("poses.txt");
    let dets = dir.path().join("det.jsonl");
    std::fs::write(&poses, "# ts tx ty tz qx qy qz qw\n0.0 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 1\n").unwrap();
    std::fs::write(
        &dets,
        "{\"ts\": 5.0, \"text\": \"KFC\", \"quad\": [[300,200],[340,200],[340,220],[300,220]], \"depth_m\": 2.0, \"conf\": 0.9}\n",
    )
    .unwrap();
    let o = textland(&[
        &"build",
        &"--poses",
        &poses,
        &"--detections",
        &dets,
        &"--config",
        &data("config.json"),
        &"--out",
        &dir.path().join("map.json"),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn nothing_promoted_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let poses = dir.path().join("poses.txt");
    let dets = dir.path().join("det.jsonl");
    std::fs::write(&poses, "0.0 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 1\n").unwrap();
    std::fs::write(
        &dets,
        "{\"ts\": 0.0, \"text\": \"KFC\", \"quad\": [[300,200],[340,200],[340,220],[300,220]], \"depth_m\": 2.0, \"conf\": 0.9}\n",
    )
    .unwrap();
    let map = dir.path().join("map.json");
    let o = textland(&[&"build", &"--poses", &poses, &"--detections", &dets, &"--config", &data("config.json"), &"--out", &map]);
    assert!(o.status.success());
    let o = textland(&[&"distill", &"--map", &map, &"--backend", &data("backend_mock.json")]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn parse_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let poses = dir.path().join("poses.txt");
    std::fs::write(&poses, "0.0 0 0 0 0 0 0 1\n0.1 0 0 zero 0 0 0 1\n").unwrap();
    let o = textland(&[
        &"build",
        &"--poses",
        &poses,
        &"--detections",
        &data("mock_rules.json"),
        &"--config",
        &data("config.json"),
        &"--out",
        &dir.path().join("map.json"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unreachable_backend_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let map = built_map(dir.path());
    let backend = dir.path().join("wire.json");
    std::fs::write(
        &backend,
        r#"{"backend": "wire", "url": "http://127.0.0.1:9/v1/chat/completions", "timeout_s": 2, "retries": 0}"#,
    )
    .unwrap();
    let o = textland(&[&"distill", &"--map", &map, &"--backend", &backend]);
    assert_eq!(o.status.code(), Some(8));
}

#[test]
fn inspect_empty_map() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("empty.json");
    let text = std::fs::read_to_string(data("fixture_map.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["landmarks"] = serde_json::json!([]);
    std::fs::write(&map, v.to_string()).unwrap();
    let svg = dir.path().join("empty.svg");
    let o = textland(&[&"inspect", &"--map", &map, &"--plot", &svg]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "class_id\tname\tverdict\tposition\tn_observations\n");
    roxmltree::Document::parse(&std::fs::read_to_string(&svg).unwrap()).unwrap();
}

#[test]
fn distilled_table_map_has_five_landmarks() {
    let names = [
        "Donotbeat", "请切拍打", "NoSmoking", "KFC", "Don't Touch", "DANGER",
        "HIGHTEMPERATURE", "必胜客欢乐餐厅", "WASHROOM", "ALIENWARE", "HUAWEI", "GUCCI",
    ];
    let landmarks: Vec<serde_json::Value> = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            serde_json::json!({
                "class_id": i, "canonical_name": null, "verdict": "UNKNOWN",
                "member_counts": { *n: 6 }, "position": null, "n_observations": 2, "memory_score": 5.0,
                "observations": [[i as f64, 0.0, 1.0], [i as f64, 0.0, 1.5]]
            })
        })
        .collect();
    let map_json = serde_json::json!({
        "version": 1,
        "intrinsics": { "alpha_x": 500.0, "alpha_y": 500.0, "u0": 320.0, "v0": 240.0, "width": 640, "height": 480 },
        "config": {}, "distilled": false, "last_frame_id": 40, "landmarks": landmarks
    });
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("table.json");
    std::fs::write(&map, map_json.to_string()).unwrap();

    let o = textland(&[&"distill", &"--map", &map, &"--backend", &data("backend_mock.json")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 13);

    let svg = dir.path().join("table.svg");
    let o = textland(&[&"inspect", &"--map", &map, &"--plot", &svg]);
    let table = stdout(&o);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows.iter().filter(|r| r.contains("\tLANDMARK\t")).count(), 5);
    assert!(rows[3].starts_with("3\tKFC\tLANDMARK\t3 0 1\t2"), "{}", rows[3]);
    let doc_text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&doc_text).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 12);
}
