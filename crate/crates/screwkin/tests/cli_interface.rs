//! End-to-end runs of the CLI against temporary model files: exit codes,
//! byte-stable output, and the twists -> ikrates pipeline.

use screwkin::interface::cli::{run, RCM_MODEL_TEXT};
use screwkin::interface::result_doc::from_json_str;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["screwkin"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_rcm(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("rcm.model");
    std::fs::write(&path, RCM_MODEL_TEXT).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn fk_at_zero_returns_reference_poses() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let (code, out, _) = cli(&["fk", "--model", &model, "--q", "0,0,0,0,0"]);
    assert_eq!(code, 0);
    let doc = from_json_str(&out).unwrap();
    let bodies = doc.bodies.unwrap();
    assert_eq!(bodies.len(), 5);
    // Body 1 reference position is (-x1, 0, z1) = (-0.12, 0, 0.5).
    assert!((bodies[0].pos[0] + 0.12).abs() < 1e-15);
    assert!((bodies[0].pos[2] - 0.5).abs() < 1e-15);
}

#[test]
fn broken_model_gives_exit_2_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.model");
    std::fs::write(&path, RCM_MODEL_TEXT.replace("axis: 0 0 1", "axis: 0 0 2")).unwrap();
    let (code, _, err) = cli(&["fk", "--model", &path.to_string_lossy()]);
    assert_eq!(code, 2);
    assert!(err.contains("non-unit axis"));
    assert!(err.contains(":"), "diagnostics carry positions: {err}");
}

#[test]
fn usage_errors_give_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let (code, _, _) = cli(&["jacobian", "--model", &model, "--rep", "sideways"]);
    assert_eq!(code, 3);
    let (code, _, _) = cli(&["fk", "--model", &model, "--q", "1,2"]);
    assert_eq!(code, 3);
    let (code, _, _) = cli(&["no-such-command"]);
    assert_eq!(code, 3);
    let (code, _, _) = cli(&[
        "jacobian", "--model", &model, "--rep", "body", "--body", "9",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn verify_random_model_passes() {
    let (code, out, _) = cli(&["verify", "--model", "random", "--n", "8", "--seed", "42"]);
    assert_eq!(code, 0, "verify output:\n{out}");
    assert!(out.contains("all checks passed"));
    assert!(out.lines().filter(|l| l.starts_with("ok")).count() >= 7);
}

#[test]
fn verify_rcm_model_passes() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let (code, out, _) = cli(&["verify", "--model", &model, "--seed", "3"]);
    assert_eq!(code, 0, "verify output:\n{out}");
}

#[test]
fn output_is_byte_stable_excluding_timing() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let args = [
        "twists",
        "--model",
        &model,
        "--q",
        "0.1,0.2,0.3,0.4,0.5",
        "--qdot",
        "1,0,-1,0.5,0.25",
        "--rep",
        "hybrid",
    ];
    let (c1, out1, _) = cli(&args);
    let (c2, out2, _) = cli(&args);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    let strip = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.contains("timing_s"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&out1), strip(&out2));
}

#[test]
fn twists_feed_ikrates_and_recover_rates() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let twists_path = dir.path().join("twists.json");
    let q = "0.3,-0.2,0.7,0.1,-0.4";
    let qdot = [0.5, -0.25, 1.0, 0.75, -0.5];
    let (code, _, _) = cli(&[
        "twists",
        "--model",
        &model,
        "--q",
        q,
        "--qdot",
        "0.5,-0.25,1,0.75,-0.5",
        "--rep",
        "spatial",
        "--out",
        &twists_path.to_string_lossy(),
    ]);
    assert_eq!(code, 0);

    let out_path = dir.path().join("rates.json");
    let (code, _, _) = cli(&[
        "ikrates",
        "--model",
        &model,
        "--q",
        q,
        "--twists",
        &twists_path.to_string_lossy(),
        "--out",
        &out_path.to_string_lossy(),
    ]);
    assert_eq!(code, 0);
    let doc = from_json_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let rates = doc.rates.unwrap();
    assert!(rates.consistent);
    for (a, b) in rates.qdot.iter().zip(qdot.iter()) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(rates.lsq_discrepancy < 1e-8);
}

#[test]
fn sysjac_csv_has_6n_rows() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let (code, out, _) = cli(&[
        "sysjac",
        "--model",
        &model,
        "--q",
        "0.1,0.2,0.3,0.4,0.5",
        "--rep",
        "body",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.trim_end().lines().collect();
    assert_eq!(rows.len(), 30);
    assert_eq!(rows[0].split(',').count(), 5);
}

#[test]
fn bench_emits_csv_with_op_counts() {
    let (code, out, _) = cli(&["bench", "--n", "4,8", "--seed", "1", "--iters", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.trim_end().lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 4); // header + 2 lengths x 4 representations
    assert!(lines[0].starts_with("n,rep,wall_ns"));
    // Spatial sweep never applies a frame transformation; body-fixed does n.
    let spatial8: Vec<&str> = lines
        .iter()
        .find(|l| l.starts_with("8,spatial"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(spatial8[5], "0"); // sweep_adjoint column
    let body8: Vec<&str> = lines
        .iter()
        .find(|l| l.starts_with("8,body"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(body8[5], "8");
}

#[test]
fn example_rcm_writes_valid_documents() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = cli(&["example-rcm", "--dir", &dir.path().to_string_lossy()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
    let model_text = std::fs::read_to_string(dir.path().join("rcm.model")).unwrap();
    assert!(screwkin::interface::parse_model(&model_text).is_ok());
    for name in ["rcm_fk.json", "rcm_jacobians.json", "rcm_twists.json"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(from_json_str(&text).is_ok(), "{name} round-trips");
    }
}

#[test]
fn parameter_overrides_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let (code, out, _) = cli(&["fk", "--model", &model, "--params", "x1=1.0,z1=0"]);
    assert_eq!(code, 0);
    let doc = from_json_str(&out).unwrap();
    let bodies = doc.bodies.unwrap();
    assert!((bodies[0].pos[0] + 1.0).abs() < 1e-15);
    assert!(bodies[0].pos[2].abs() < 1e-15);

    let (code, _, err) = cli(&["fk", "--model", &model, "--params", "nosuch=1"]);
    assert_eq!(code, 2);
    assert!(err.contains("undeclared parameter"));
}

#[test]
fn spatial_jacobian_values_through_cli() {
    // Column of joint 2 at configuration q: the joint axis stays world-z
    // through the moved point (-d2 cos q1, -d2 sin q1, 0), so the linear
    // part is (-d2 sin q1, d2 cos q1, 0).
    let dir = tempfile::tempdir().unwrap();
    let model = write_rcm(&dir);
    let q1 = 0.3f64;
    let (code, out, _) = cli(&[
        "jacobian",
        "--model",
        &model,
        "--rep",
        "spatial",
        "--body",
        "3",
        "--q",
        "0.3,0.5,-0.2,0,0",
    ]);
    assert_eq!(code, 0);
    let doc = from_json_str(&out).unwrap();
    let j = &doc.jacobians.unwrap()[0];
    assert_eq!(j.support, vec![1, 2, 3]);
    let d2 = 0.4;
    let expected = [0.0, 0.0, 1.0, -d2 * q1.sin(), d2 * q1.cos(), 0.0];
    for (row, want) in expected.iter().enumerate() {
        assert!((j.matrix[row][1] - want).abs() < 1e-12, "row {row}");
    }
}

#[test]
fn verify_exits_1_when_tolerance_is_unreachable() {
    // Run the real binary with an absurdly tight tolerance injected only
    // into the child environment; rounding at ~1e-15 must then fail.
    let exe = env!("CARGO_BIN_EXE_screwkin");
    let output = std::process::Command::new(exe)
        .args(["verify", "--model", "random", "--n", "5", "--seed", "7"])
        .env("SCREWKIN_TOL", "1e-18")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("FAIL"));
}

#[test]
fn tolerance_env_override_is_honored() {
    // Use a looser tolerance so a concurrently running verify cannot be
    // affected adversely during the brief override window.
    std::env::set_var("SCREWKIN_TOL", "1e-6");
    let tol = screwkin::interface::cli::verify_tolerance();
    std::env::remove_var("SCREWKIN_TOL");
    assert_eq!(tol, 1e-6);
    assert_eq!(screwkin::interface::cli::verify_tolerance(), 1e-10);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("fk"));
    assert!(out.contains("ikrates"));
    let (code, out, _) = cli(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.contains("screwkin"));
}
