//! End-to-end checks of the command-line interface: exit codes, output
//! files, determinism and help text.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphereline"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sphereline-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Pull the float out of a `label: 1.23e-8`-style summary line.
fn summary_value(text: &str, label: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.contains(label))
        .unwrap_or_else(|| panic!("no '{label}' line in:\n{text}"));
    let tail = line.split(':').nth(1).expect("value after colon");
    tail.split_whitespace()
        .next()
        .expect("value token")
        .parse()
        .expect("parseable float")
}

#[test]
fn equilibria_table_lists_the_spirals() {
    let out = run(&["equilibria", "--system", "s12"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("stable-spiral"));
    assert!(text.contains("unstable-spiral"));
    assert!(text.contains("0.866025403784"), "eigenvalue imaginary part missing");

    let out = run(&["equilibria", "--system", "s22"]);
    let text = stdout(&out);
    assert!(text.contains("saddle"));
    assert!(text.contains("[non-surface]"));
}

#[test]
fn empty_window_is_still_success() {
    let out = run(&["equilibria", "--system", "s12", "--window", "0,1,0,1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("(none)"));
}

#[test]
fn bad_initial_latitude_is_a_usage_error() {
    let out = run(&["soliton", "--system", "s11", "--ic", "1.6,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = temp_dir("io");
    let blocker = dir.join("blocker");
    fs::write(&blocker, b"file, not a directory").unwrap();
    let target = blocker.join("x.csv");
    let out = run(&[
        "soliton",
        "--system",
        "s11",
        "--ic",
        "0,0,0",
        "--span",
        "5",
        "--csv",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn soliton_pipeline_writes_files_and_reports_residual() {
    let dir = temp_dir("pipeline");
    let arg = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let out = run(&[
        "soliton",
        "--system",
        "s21",
        "--ic",
        "0,0,0",
        "--span",
        "40",
        "--no-eq-stop",
        "--csv",
        &arg("t.csv"),
        "--analysis",
        &arg("a.json"),
        "--residual",
        &arg("r.csv"),
        "--mesh",
        &arg("m.obj"),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let max_fd = summary_value(&text, "max residual (finite-difference)");
    assert!(max_fd < 1e-6, "summary residual {max_fd}");
    let mesh_max = summary_value(&text, "mesh residual max");
    assert!(mesh_max < 1e-5, "per-vertex mesh residual {mesh_max}");

    let csv = fs::read_to_string(dir.join("t.csv")).unwrap();
    assert!(csv.starts_with("s,u,v,theta\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("a.json")).unwrap()).unwrap();
    assert_eq!(json["system"], "s21");
    assert!(json["analysis"]["self_intersections"]["count"].as_u64().unwrap() >= 2);
    assert_eq!(json["analysis"]["asymptote"]["verdict"], "true");
    let obj = fs::read_to_string(dir.join("m.obj")).unwrap();
    assert!(obj.starts_with("v "));
    assert!(obj.contains("\nf "));
    let residual = fs::read_to_string(dir.join("r.csv")).unwrap();
    assert!(residual.starts_with("s,w,H_closed,H_fd,NX,residual\n"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_seeds_give_byte_identical_outputs() {
    let dir = temp_dir("determinism");
    let mut files = Vec::new();
    for tag in ["x", "y"] {
        let csv = dir.join(format!("{tag}.csv"));
        let res = dir.join(format!("{tag}-r.csv"));
        let out = run(&[
            "soliton",
            "--system",
            "s11",
            "--ic",
            "0.1,0,0.2",
            "--span",
            "25",
            "--seed",
            "42",
            "--csv",
            csv.to_str().unwrap(),
            "--residual",
            res.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        files.push((fs::read(&csv).unwrap(), fs::read(&res).unwrap()));
    }
    assert_eq!(files[0].0, files[1].0, "trajectory csv differs between runs");
    assert_eq!(files[0].1, files[1].1, "residual csv differs between runs");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_exact_slice_for_a_tilted_axis() {
    // Frame angles with n2 = n1 + pi/2 keep E1 and E2 orthonormal while
    // tilting the rotation axis away from (0, 0, 1).
    let out = run(&[
        "verify",
        "--exact",
        "slice",
        "--t0",
        "0.5",
        "--killing",
        "r-general",
        "--frame",
        "0.4,0.7,0.0,2.2707963267948966",
        "--samples",
        "60",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let closed = summary_value(&text, "max residual (closed-form)");
    assert!(closed < 1e-8, "slice closed residual {closed}");
    assert!(text.contains("phi-dependent: no"));
}

#[test]
fn verify_cylinder_for_both_fields() {
    for killing in ["v", "r-z"] {
        let out = run(&["verify", "--exact", "cylinder-c", "--killing", killing]);
        assert!(out.status.success());
        let closed = summary_value(&stdout(&out), "max residual (closed-form)");
        assert!(closed < 1e-8, "cylinder residual {closed} for {killing}");
    }
}

#[test]
fn verify_loaded_chart_detects_phi_dependence() {
    let dir = temp_dir("verify-chart");
    let csv = dir.join("curve.csv");
    let out = run(&[
        "soliton",
        "--system",
        "s11",
        "--ic",
        "0,0,0",
        "--span",
        "20",
        "--no-eq-stop",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = run(&[
        "verify",
        "--chart",
        csv.to_str().unwrap(),
        "--kind",
        "rotational",
        "--killing",
        "r-general",
        "--frame",
        "0.4,0.7,0.0,2.2707963267948966",
        "--samples",
        "40",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let variance = summary_value(&text, "phi-variance of <N, R>");
    assert!(variance > 1e-6, "phi variance {variance}");
    assert!(text.contains("phi-dependent: yes"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn portrait_json_has_the_documented_shape() {
    let dir = temp_dir("portrait");
    let path = dir.join("p.json");
    let out = run(&[
        "portrait",
        "--system",
        "s12",
        "--grid",
        "-1,1,3,-2,2,3",
        "--span",
        "30",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["equilibria"].as_array().unwrap().len(), 2);
    let eq = &json["equilibria"][0];
    assert!(eq["linearization"]["eigenvalues"][0]["re"].is_number());
    assert!(eq["linearization"]["eigenvalues"][0]["im"].is_number());
    assert_eq!(json["trajectories"].as_array().unwrap().len(), 9);
    let row = &json["trajectories"][0]["samples"][0];
    assert_eq!(row.as_array().unwrap().len(), 3, "rows are [s, u, theta]");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_enumerates_the_defaults()  {
    let out = run(&["soliton", "--help"]);
    let text = stdout(&out);
    for needle in [
        "default: 60",
        "default: 0.0000000001",
        "default: 0.000000000001",
        "default: 0.000000001",
        "default: 0.0001",
        "default: 200",
    ] {
        assert!(text.contains(needle), "soliton --help missing '{needle}'");
    }
    let out = run(&["verify", "--help"]);
    let text = stdout(&out);
    assert!(text.contains("default: 100"));
    assert!(text.contains("default: 0.0001"));
}

#[test]
fn domain_boundary_is_reported_with_success_status() {
    // A seed hugging the pole runs into the latitude margin; the condition
    // is reported in the summary but is not an error.
    let out = run(&[
        "soliton",
        "--system",
        "s11",
        "--ic",
        "1.5706,0,0",
        "--span",
        "30",
        "--no-eq-stop",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("domain-boundary"), "summary:\n{text}");
    assert!(text.contains("latitude margin"), "summary:\n{text}");
}

#[test]
fn degrees_flag_converts_angles() {
    let out = run(&["soliton", "--system", "s11", "--ic", "95,0,0", "--degrees", "--span", "5"]);
    // 95 degrees exceeds pi/2: rejected as out of domain.
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["soliton", "--system", "s11", "--ic", "10,0,0", "--degrees", "--span", "5"]);
    assert!(out.status.success());
}
