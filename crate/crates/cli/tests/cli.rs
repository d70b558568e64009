use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn netdecomp(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_netdecomp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: &[u8]) -> Vec<u8> {
    let out = netdecomp(args, stdin);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_decompose_verify_pipeline() {
    let g = ok(&["gen", "path", "4"], b"");
    let dec = ok(&["decompose", "weak"], &g);
    let out = netdecomp(&["verify", "--kind", "weak"], &dec);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"] == true && c["witness"].is_null()));
}

#[test]
fn zero_hop_power_is_a_usage_error() {
    let g = ok(&["gen", "path", "4"], b"");
    let out = netdecomp(&["decompose", "power", "--k", "0"], &g);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn budget_without_congest_is_rejected() {
    let g = ok(&["gen", "path", "4"], b"");
    let out = netdecomp(&["decompose", "weak", "--budget", "64"], &g);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let out = netdecomp(&["decompose", "weak"], b"{\"n\": 3, \"edges\": [[0, 7]]}");
    assert_eq!(out.status.code(), Some(2));
    let out = netdecomp(&["mis"], b"{not json");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_output_fails_verification() {
    // Both nodes of P2 in one color as separate clusters: adjacent same-color clusters.
    let doc = r#"{"kind":"weak","k":1,"colors":1,"color_of":[1,1],
        "clusters":[
          {"color":1,"label":"0","members":[0],"tree":{"root":0,"parent":{},"terminals":[0]}},
          {"color":1,"label":"1","members":[1],"tree":{"root":1,"parent":{},"terminals":[1]}}],
        "ledger":{"mode":"LOCAL","budget_bits":null,"rounds":0,"max_message_bits":0,"violations":0},
        "graph":{"n":2,"edges":[[0,1]]}}"#;
    let out = netdecomp(&["verify", "--kind", "weak"], doc.as_bytes());
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sep = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "separation").unwrap();
    assert_eq!(sep["pass"], false);
    assert!(!sep["witness"].is_null());
}

#[test]
fn every_output_kind_verifies() {
    let g = ok(&["gen", "random", "80", "0.08", "--seed", "5"], b"");
    let cases: [(&[&str], &str); 8] = [
        (&["decompose", "weak"], "weak"),
        (&["decompose", "power", "--k", "2"], "weak"),
        (&["decompose", "alt"], "weak"),
        (&["decompose", "alt", "--t", "3", "--eps", "1/3"], "weak"),
        (&["decompose", "strong"], "strong"),
        (&["mis"], "mis"),
        (&["color"], "coloring"),
        (&["ruling"], "ruling"),
    ];
    for (args, kind) in cases {
        let out = ok(args, &g);
        let report = netdecomp(&["verify", "--kind", kind], &out);
        assert_eq!(report.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&report.stdout));
    }
}

#[test]
fn congest_mode_runs_and_verifies() {
    let g = ok(&["gen", "torus", "2", "6"], b"");
    let dec = ok(&["decompose", "weak", "--mode", "congest", "--budget", "64"], &g);
    let v: serde_json::Value = serde_json::from_slice(&dec).unwrap();
    assert_eq!(v["ledger"]["mode"], "CONGEST");
    assert_eq!(netdecomp(&["verify", "--kind", "weak"], &dec).status.code(), Some(0));
}

#[test]
fn list_coloring_with_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    let lists = dir.path().join("lists.json");
    let colored = dir.path().join("c.json");
    ok(&["gen", "complete", "3", "-o", path_str(&graph)], b"");
    std::fs::write(&lists, "[[7, 8, 9], [7, 8, 9], [9, 8, 7]]").unwrap();
    ok(&["color", "-i", path_str(&graph), "--lists", path_str(&lists), "-o", path_str(&colored)], b"");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&colored).unwrap()).unwrap();
    let mut colors: Vec<u64> = serde_json::from_value(v["colors"].clone()).unwrap();
    colors.sort_unstable();
    assert_eq!(colors, vec![7, 8, 9]);
    let out = netdecomp(&["verify", "--kind", "coloring", "-g", path_str(&graph), "-d", path_str(&colored)], b"");
    assert_eq!(out.status.code(), Some(0));

    std::fs::write(&lists, "[[7], [7, 8, 9], [9, 8, 7]]").unwrap();
    let out = netdecomp(&["color", "-i", path_str(&graph), "--lists", path_str(&lists)], b"");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn derand_cut_split_on_triangle() {
    let g = ok(&["gen", "complete", "3"], b"");
    let out = ok(&["derand", "--problem", "cut-split"], &g);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["initial_expectation"], "3/2");
    // Exhaustive oracle: the best 2-coloring of a triangle leaves one monochromatic edge.
    assert_eq!(v["final_cost"], "1");
}

#[test]
fn bench_table_has_monotone_sizes_and_rounds() {
    let out = ok(&["bench", "--family", "path", "--sizes", "256,64,1024"], b"");
    let mut rdr = csv::Reader::from_reader(out.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["family", "n", "edges", "colors", "rounds", "max_tree_radius", "max_weak_diameter"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let ns: Vec<usize> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(ns, vec![64, 256, 1024]);
    for r in &rows {
        let rounds: u64 = r[4].parse().unwrap();
        assert!(rounds > 0);
    }
}

#[test]
fn identical_invocations_are_byte_identical() {
    let g = ok(&["gen", "random", "150", "0.04", "--seed", "11"], b"");
    assert_eq!(g, ok(&["gen", "random", "150", "0.04", "--seed", "11"], b""));
    for args in [&["decompose", "weak"][..], &["decompose", "strong"], &["decompose", "alt"], &["derand", "--problem", "cut-split"]] {
        assert_eq!(ok(args, &g), ok(args, &g), "{args:?}");
    }
    let b = ["bench", "--family", "random", "--sizes", "64,128"];
    assert_eq!(ok(&b, b""), ok(&b, b""));
}

#[test]
fn text_edge_lists_are_accepted() {
    let out = ok(&["mis"], b"# square\n0 1\n1 2\n2 3\n3 0\n");
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["graph"]["n"], 4);
    assert_eq!(netdecomp(&["verify", "--kind", "mis"], &out).status.code(), Some(0));
}
