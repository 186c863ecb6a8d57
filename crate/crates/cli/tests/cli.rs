//! End-to-end tests of the `mf` binary: exit codes, report schemas, golden
//! values, and byte-level determinism across repeated runs.

use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

/// Run `mf` with the given working directory; return (stdout, stderr, code).
fn mf(dir: &Path, args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_mf"))
        .args(args)
        .current_dir(dir)
        .env_remove("MF_CELL_BUDGET")
        .output()
        .expect("mf runs");
    (
        String::from_utf8(out.stdout).expect("stdout is utf-8"),
        String::from_utf8(out.stderr).expect("stderr is utf-8"),
        out.status.code().unwrap_or(-1),
    )
}

fn parse(stdout: &str) -> Value {
    serde_json::from_str(stdout).expect("report is JSON")
}

fn gen(dir: &Path, name: &str, out: &str) {
    let (_, err, code) = mf(dir, &["fixture", name, "--out", out]);
    assert_eq!(code, 0, "fixture {name}: {err}");
}

#[test]
fn validate_and_special_verdicts() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "grid", ".");
    gen(dir, "torus", ".");
    gen(dir, "klein", ".");

    let (out, _, code) = mf(dir, &["validate", "grid22.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["command"], "validate");
    assert_eq!(rep["results"]["cells"]["vertices"], 9);
    assert_eq!(rep["results"]["cells"]["squares"], 4);
    assert_eq!(rep["results"]["npc"]["ok"], true);
    assert_eq!(rep["results"]["cat0"]["ok"], true);
    assert!(rep["inputs"]["grid22.json"]
        .as_str()
        .unwrap()
        .starts_with("sha256:"));

    // The torus is nonpositively curved but not simply connected: validate
    // passes while the CAT(0) witness is reported informationally.
    let (out, _, code) = mf(dir, &["validate", "torus.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["npc"]["ok"], true);
    assert_eq!(rep["results"]["cat0"]["ok"], false);

    // Specialness: torus passes, the Klein bottle fails with a one-sided
    // hyperplane witness.
    let (_, _, code) = mf(dir, &["special", "torus.json"]);
    assert_eq!(code, 0);
    let (out, _, code) = mf(dir, &["special", "klein.json"]);
    assert_eq!(code, 2);
    let rep = parse(&out);
    assert_eq!(rep["results"]["special"], false);
    assert_eq!(rep["results"]["one_sided"].as_array().unwrap().len(), 1);

    // A complex that builds but violates the link condition exits 2.
    let mut cube = mf_core::fixtures::cube3().emit();
    cube.cubes3.clear();
    std::fs::write(
        dir.join("hollow.json"),
        serde_json::to_string_pretty(&cube).unwrap(),
    )
    .unwrap();
    let (out, _, code) = mf(dir, &["validate", "hollow.json"]);
    assert_eq!(code, 2);
    let rep = parse(&out);
    assert_eq!(rep["results"]["npc"]["ok"], false);
    assert!(!rep["results"]["npc"]["issues"].as_array().unwrap().is_empty());
}

#[test]
fn cat0_geometry_verbs() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "grid", ".");

    let (out, _, code) =
        mf(dir, &["distance", "--from", "v0_0", "--to", "v2_2", "grid22.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["distance"], 4);
    assert_eq!(rep["results"]["geodesic"].as_array().unwrap().len(), 5);
    assert_eq!(rep["results"]["separating_hyperplanes"], 4);

    let (out, _, code) = mf(dir, &["hull", "--set", "v0_0,v2_2", "grid22.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["size"], 9);
    assert_eq!(rep["results"]["already_convex"], false);

    let (out, _, code) = mf(
        dir,
        &["gate", "--set-a", "v0_0", "--set-b", "v2_2,v2_1", "grid22.json"],
    );
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["projection_in_a"], serde_json::json!(["v0_0"]));
    assert_eq!(rep["results"]["projection_in_b"], serde_json::json!(["v2_1"]));

    let (out, _, code) = mf(
        dir,
        &["bridge", "--set-a", "v0_0,v0_1", "--set-b", "v2_0", "grid22.json"],
    );
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["corridor"]["size"], 3);
    assert_eq!(rep["results"]["corridor"]["diam"], 2);
    assert_eq!(rep["results"]["span"]["size"], 3);

    // The torus is not CAT(0): geometry verbs report the witness, exit 2.
    gen(dir, "torus", ".");
    let (out, _, code) = mf(dir, &["distance", "--from", "v", "--to", "v", "torus.json"]);
    assert_eq!(code, 2);
    let rep = parse(&out);
    assert_eq!(rep["results"]["cat0"], false);
    assert!(rep["results"]["witness"].as_str().unwrap().contains("hyperplane"));
}

#[test]
fn develop_reports_window_shape() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "torus", ".");
    let (out, _, code) = mf(dir, &["develop", "--radius", "2", "torus.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["cells"]["vertices"], 13);
    assert_eq!(rep["results"]["boundary_vertices"], 8);
    assert_eq!(rep["results"]["interior_vertices"], 1);
    assert_eq!(rep["results"]["basepoint"], "v");
    assert_eq!(
        rep["results"]["ball"]["vertices"].as_array().unwrap().len(),
        13
    );
}

#[test]
fn quasiline_suite_on_torus_and_line() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "torus", ".");

    let (out, _, code) =
        mf(dir, &["ql", "classify", "--word", "1", "--radius", "8", "torus.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["ok"], true);
    assert_eq!(rep["results"]["shift"], 1);
    assert_eq!(rep["results"]["counts"]["essential"], 16);
    assert_eq!(rep["results"]["counts"]["half_essential"], 2);
    assert_eq!(rep["results"]["counts"]["trivial"], 14);

    let (out, _, code) =
        mf(dir, &["ql", "constants", "--word", "1", "--radius", "8", "torus.json"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["constants"]["step"], 45);
    assert_eq!(rep["results"]["constants"]["shallow_bound"], 1);

    let (out, _, code) = mf(
        dir,
        &[
            "ql",
            "commensurate",
            "--word",
            "1",
            "--word2",
            "1,1",
            "--radius",
            "8",
            "torus.json",
        ],
    );
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["related"], true);
    assert_eq!(rep["results"]["d1"], 2);
    assert_eq!(rep["results"]["d2"], 1);

    // Fellow traveling on a long line window: the unit shift on a circle's
    // development, with a geodesic spanning 360 steps.
    std::fs::write(
        dir.join("circle.json"),
        r#"{"name":"circle","vertices":["v"],"edges":[["v","v"]]}"#,
    )
    .unwrap();
    let half: Vec<&str> = std::iter::repeat("-1").take(180).collect();
    let from_word = half.join(",");
    let to_word = from_word.replace("-1", "1");
    std::fs::write(
        dir.join("geo.json"),
        serde_json::to_string(&serde_json::json!({
            "from_word": from_word,
            "to_word": to_word,
        }))
        .unwrap(),
    )
    .unwrap();
    let (out, _, code) = mf(
        dir,
        &[
            "ql",
            "fellow",
            "--word",
            "1",
            "--radius",
            "400",
            "--geodesic",
            "geo.json",
            "--B",
            "120",
            "circle.json",
        ],
    );
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["ok"], true);
    assert_eq!(rep["results"]["power"], 6);
    assert_eq!(rep["results"]["q"], -29);
    assert_eq!(rep["results"]["p"], 30);
    assert_eq!(rep["results"]["count"], 56);

    // Below the threshold the certificate is refused.
    let (out, _, code) = mf(
        dir,
        &[
            "ql",
            "fellow",
            "--word",
            "1",
            "--radius",
            "400",
            "--geodesic",
            "geo.json",
            "--B",
            "119",
            "circle.json",
        ],
    );
    assert_eq!(code, 2);
    let rep = parse(&out);
    assert_eq!(rep["results"]["ok"], false);
    assert!(rep["results"]["error"].as_str().unwrap().contains("threshold"));
}

#[test]
fn gog_suite_on_tori() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "tori_gog", "tori_gog");

    let (_, _, code) = mf(dir, &["gog", "validate", "tori_gog"]);
    assert_eq!(code, 0);

    let (out, _, code) = mf(dir, &["gog", "total", "tori_gog"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["npc"], true);

    let (out, _, code) = mf(
        dir,
        &["gog", "cyclonormal", "--radius", "6", "--cap", "4", "tori_gog"],
    );
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["pass"], true);
    assert_eq!(rep["results"]["higher"], 0);
    assert_eq!(rep["results"]["undecided"], 0);

    // The spec's flagship example: stature stabilizes at one class by L=1.
    let (out1, _, code) = mf(dir, &["gog", "stature", "tori_gog", "--Lmax", "4"]);
    assert_eq!(code, 0);
    let rep = parse(&out1);
    assert_eq!(rep["results"]["tallies"], serde_json::json!([1, 1, 1, 1]));
    assert_eq!(rep["results"]["stabilized"], true);
    assert_eq!(rep["results"]["stabilization_length"], 1);
    assert_eq!(rep["results"]["undecided_paths"], 0);

    // Byte-identical reports across runs.
    let (out2, _, _) = mf(dir, &["gog", "stature", "tori_gog", "--Lmax", "4"]);
    assert_eq!(out1, out2);
}

#[test]
fn gog_suite_on_wise_tower() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "wise_gog", "wise_gog");

    let (_, _, code) = mf(dir, &["gog", "validate", "wise_gog"]);
    assert_eq!(code, 0);

    let (out, _, code) = mf(dir, &["gog", "stature", "wise_gog", "--Lmax", "2"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["tallies"], serde_json::json!([1, 2]));
    assert_eq!(rep["results"]["stabilized"], false);
    assert!(rep["caveats"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c.as_str().unwrap().contains("still growing")));
}

#[test]
fn tree_window_and_stabilizer_verbs() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "tori_gog", "tori_gog");

    let (out, _, code) = mf(dir, &["bs", "window", "--depth", "2", "tori_gog"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(
        rep["results"]["paths_per_length"],
        serde_json::json!([
            { "length": 1, "paths": 4 },
            { "length": 2, "paths": 12 }
        ])
    );
    assert!(!rep["results"]["chambers"].as_array().unwrap().is_empty());

    let (out, _, code) = mf(dir, &["bs", "stab", "--path", "0,0", "tori_gog"]);
    assert_eq!(code, 0);
    let rep = parse(&out);
    assert_eq!(rep["results"]["verdict"], "cyclic");
    assert_eq!(rep["results"]["primitive"], 0);
    assert!(rep["results"]["generators"].as_u64().unwrap() >= 1);
}

#[test]
fn fixture_files_are_deterministic_and_roundtrip() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "tori_gog", "a");
    gen(dir, "tori_gog", "b");
    for f in ["gog.json", "u.json", "w.json", "c.json", "e0_minus.json", "e0_plus.json"] {
        let x = std::fs::read(dir.join("a").join(f)).unwrap();
        let y = std::fs::read(dir.join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between generations");
    }

    // Spec round-trip: parse, rebuild, emit, compare.
    gen(dir, "grid", ".");
    let bytes = std::fs::read_to_string(dir.join("grid22.json")).unwrap();
    let spec: mf_core::ComplexSpec = serde_json::from_str(&bytes).unwrap();
    let rebuilt = mf_core::complex::CubeComplex::build(&spec).unwrap().emit();
    let mut re = serde_json::to_string_pretty(&rebuilt).unwrap();
    re.push('\n');
    assert_eq!(bytes, re);
}

#[test]
fn error_exit_codes_and_formats() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    gen(dir, "grid", ".");

    // Input errors: message on stderr, no report, exit 1.
    let (out, err, code) = mf(dir, &["validate", "missing.json"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("cannot read"));

    let (_, err, code) = mf(dir, &["fixture", "dodecahedron", "--out", "."]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown fixture"));

    let (_, err, code) = mf(dir, &["hull", "--set", "nope", "grid22.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown vertex"));

    let (_, err, code) = mf(dir, &["gog", "cyclonormal", "--mode", "webs", "grid22.json"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());

    // Cell budget cap from the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_mf"))
        .args(["develop", "--radius", "3", "grid22.json"])
        .current_dir(dir)
        .env("MF_CELL_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    // Text format: deterministic, headed by the command line.
    let (t1, _, code) =
        mf(dir, &["--format", "text", "distance", "--from", "v0_0", "--to", "v1_1", "grid22.json"]);
    assert_eq!(code, 0);
    assert!(t1.starts_with("# mf distance\n"));
    assert!(t1.contains("input grid22.json sha256:"));
    let (t2, _, _) =
        mf(dir, &["--format", "text", "distance", "--from", "v0_0", "--to", "v1_1", "grid22.json"]);
    assert_eq!(t1, t2);

    // Trace appears only when asked for.
    let (out, _, _) = mf(dir, &["develop", "--radius", "1", "grid22.json"]);
    assert!(parse(&out).get("trace").is_none());
    let (out, _, _) = mf(dir, &["--trace", "develop", "--radius", "1", "grid22.json"]);
    let rep = parse(&out);
    assert!(rep["trace"].as_array().unwrap().iter().any(|l| l
        .as_str()
        .unwrap()
        .contains("layer 1")));
}
