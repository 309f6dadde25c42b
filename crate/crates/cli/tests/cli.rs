use std::path::PathBuf;
use std::process::{Command, Output};

fn hypervol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypervol"))
        .args(args)
        .env_remove("HYPERVOL_CATALOG_DIR")
        .output()
        .expect("run hypervol")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("JSON output")
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("hypervol-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn tet_volume_prism_tetrahedron() {
    let o = hypervol(&[
        "tet-volume",
        "a:2pi/5",
        "a:pi/2",
        "a:pi/2",
        "p:0.5067207574113386",
        "a:pi/3",
        "a:pi/3",
        "--json",
    ]);
    let v = json(&o);
    assert_eq!(v["type"], "P4");
    assert!((v["volume_raw"].as_f64().unwrap() - 0.52639).abs() < 1e-5);
    assert_eq!(v["volume"], "0.526399");
}

#[test]
fn tet_volume_regular_and_flat() {
    let o = hypervol(&[
        "tet-volume",
        "a:pi/3",
        "a:pi/3",
        "a:pi/3",
        "a:pi/3",
        "a:pi/3",
        "a:pi/3",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("volume:    1.01494"), "{}", stdout(&o));
    let flat = ["a:acos(1/3)"; 6];
    let mut args = vec!["tet-volume"];
    args.extend(flat);
    let o = hypervol(&args);
    assert!(
        stdout(&o).contains("Euclidean degenerate"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn tet_volume_errors() {
    // Three lengths around one vertex are not a supported pattern.
    let o = hypervol(&["tet-volume", "p:1", "p:1", "p:1", "a:1", "a:1", "a:1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = hypervol(&["tet-volume", "a:4", "a:1", "a:1", "a:1", "a:1", "a:1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hypervol(&[
        "tet-volume",
        "a:2.5",
        "a:2.5",
        "a:2.5",
        "a:2.5",
        "a:2.5",
        "a:2.5",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = hypervol(&["tet-volume", "a:1", "a:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn volume_of_catalog_prism() {
    let v = json(&hypervol(&["volume", "prism-235", "--json"]));
    assert_eq!(v["volume"], "2.63199");
    assert!((v["volume_raw"].as_f64().unwrap() - 2.63200).abs() < 1e-4);
    assert_eq!(v["tetrahedron_types"]["P4"], 5);
    assert!(v["potential_gradient"][0].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(v["certificate"]["clean"], true);
}

#[test]
fn volume_output_is_deterministic() {
    let a = hypervol(&[
        "volume",
        "dodecahedron-right-angled",
        "--json",
        "--seed",
        "3",
    ]);
    let b = hypervol(&[
        "volume",
        "dodecahedron-right-angled",
        "--json",
        "--seed",
        "3",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["volume"], "4.30621");
}

#[test]
fn volume_with_a_trace_file() {
    let dir = scratch_dir("trace");
    let script = dir.join("moves.json");
    std::fs::write(
        &script,
        r#"[{"ih": 5}, {"cap": 1}, {"cap": 2}, {"cap": 3}]"#,
    )
    .unwrap();
    let o = hypervol(&[
        "volume",
        "prism-235",
        "--json",
        "--trace",
        script.to_str().unwrap(),
    ]);
    if o.status.success() {
        let v = json(&o);
        assert!((v["volume_raw"].as_f64().unwrap() - 2.63200).abs() < 1e-4);
    } else {
        assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    }
    std::fs::write(&script, "not json").unwrap();
    let o = hypervol(&["volume", "prism-235", "--trace", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pleated_template_needs_angles() {
    let o = hypervol(&["volume", "pleated-prism-template"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("angles required"), "{}", stderr(&o));
}

#[test]
fn unknown_polyhedron() {
    let o = hypervol(&["volume", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown catalog entry"));
}

#[test]
fn kr_table_and_csv() {
    let dir = scratch_dir("kr");
    let csv = dir.join("kr.csv");
    let o = hypervol(&[
        "kr",
        "prism-235",
        "--levels",
        "483,963",
        "--json",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let v = json(&o);
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels[0]["value"], "2.27094");
    assert_eq!(levels[1]["value"], "2.42388");
    assert!((v["geometric_volume"].as_f64().unwrap() - 2.632).abs() < 1e-3);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,value"));
    assert!(lines.next().unwrap().starts_with("483,2.2709"));
}

#[test]
fn kr_network_method_agrees() {
    let a = json(&hypervol(&[
        "kr",
        "prism-235",
        "--levels",
        "63",
        "--json",
        "--no-volume",
    ]));
    let b = json(&hypervol(&[
        "kr",
        "prism-235",
        "--levels",
        "63",
        "--json",
        "--no-volume",
        "--network",
    ]));
    assert_eq!(b["method"], "network recoupling");
    let x = a["levels"][0]["raw"]["growth"].as_f64().unwrap();
    let y = b["levels"][0]["raw"]["growth"].as_f64().unwrap();
    assert!((x - y).abs() < 1e-9);
}

#[test]
fn kr_level_errors() {
    let o = hypervol(&["kr", "prism-235", "--levels", "484"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r must be odd"));
    let o = hypervol(&["kr", "prism-235", "--levels", "485"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(r−3) not divisible by 60"));
    assert!(stderr(&o).contains("r = 63"));
    let o = hypervol(&["kr", "dodecahedron-pi3", "--levels", "485", "--network"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("smallest valid level"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn scan_sixj_csv() {
    let dir = scratch_dir("scan");
    let csv = dir.join("scan.csv");
    let o = hypervol(&[
        "scan",
        "--r",
        "101",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
    ]);
    let v = json(&o);
    assert_eq!(v["mode"], "sixj");
    assert!(v["max_deviation"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(
        text.starts_with("k,angle,value,reference\n0,0.0,0.0,\n"),
        "{text}"
    );
}

#[test]
fn scan_doubly_truncated() {
    let v = json(&hypervol(&[
        "scan",
        "--mode",
        "doubly-truncated",
        "--r",
        "195",
        "--to",
        "20",
        "--step",
        "10",
        "--json",
    ]));
    assert_eq!(v["k"], 64);
    assert_eq!(v["j_range"], "all");
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    // The l = 0 sum vanishes exactly.
    assert!(pts[0]["value"].is_null());
    let o = hypervol(&["scan", "--mode", "doubly-truncated", "--r", "101"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_rejects_even_level() {
    let o = hypervol(&["scan", "--r", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r must be odd"));
}

#[test]
fn catalog_listing_and_override() {
    let o = hypervol(&["catalog"]);
    assert!(o.status.success());
    for name in [
        "prism-235",
        "dodecahedron-right-angled",
        "dodecahedron-pi3",
        "pleated-prism-template",
    ] {
        assert!(stdout(&o).contains(name));
    }
    // A polyhedron file in the override directory shadows the bundled entry.
    let dir = scratch_dir("catalog");
    let entry = json(&hypervol(&["catalog", "dodecahedron-right-angled"]));
    let mut poly = entry["polyhedron"].clone();
    for e in poly["edges"].as_array_mut().unwrap() {
        e["angle"] = serde_json::json!({"p": 1, "q": 3});
    }
    std::fs::write(dir.join("prism-235.json"), poly.to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hypervol"))
        .args(["volume", "prism-235", "--json"])
        .env("HYPERVOL_CATALOG_DIR", &dir)
        .output()
        .unwrap();
    let v = json(&o);
    assert!((v["volume_raw"].as_f64().unwrap() - 20.5802).abs() < 1e-3);
    let o = Command::new(env!("CARGO_BIN_EXE_hypervol"))
        .args(["catalog", "--json"])
        .env("HYPERVOL_CATALOG_DIR", &dir)
        .output()
        .unwrap();
    let list = json(&o);
    let prism = list
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "prism-235")
        .unwrap();
    assert_eq!(prism["faces"], 12);
}

#[test]
fn polyhedron_from_file_round_trip() {
    let dir = scratch_dir("file");
    let entry = json(&hypervol(&["catalog", "prism-235"]));
    let path = dir.join("p.json");
    std::fs::write(&path, entry["polyhedron"].to_string()).unwrap();
    let v = json(&hypervol(&["volume", path.to_str().unwrap(), "--json"]));
    assert_eq!(v["volume"], "2.63199");
}
