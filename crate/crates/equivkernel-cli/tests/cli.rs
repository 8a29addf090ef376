//! End-to-end tests of the binary and the I/O helpers.

use equivkernel_cli::cloud_io::{load_cloud, save_cloud, CloudFormat};
use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_equivkernel"))
}

fn zero_wall_times(mut report: serde_json::Value) -> serde_json::Value {
    for check in report["checks"].as_array_mut().unwrap() {
        check["wall_ms"] = serde_json::json!(0);
    }
    report
}

#[test]
fn so3_suite_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args(["--suite", "so3", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["schema"], "report-v1");
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["suite"], "so3");
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for check in checks {
        assert_eq!(check["pass"], true, "{}", check["name"]);
        assert!(check["anchor"].as_str().unwrap().len() > 4);
    }
    // Sorted by name.
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn identical_configs_give_identical_reports_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let status = bin()
            .args(["--suite", "tensor", "--seed", "11", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let ra: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    let rb: serde_json::Value = serde_json::from_str(&fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(zero_wall_times(ra), zero_wall_times(rb));
}

#[test]
fn invalid_degree_is_a_usage_error_without_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args(["--suite", "so3", "--degree", "9", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!out.exists(), "no partial report on usage errors");
}

#[test]
fn check_failure_exits_one_but_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args(["--suite", "so3", "--tol", "so3.wigner-homomorphism=1e-30", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn environment_seed_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .env("EQUIVKERNEL_SEED", "4242")
        .args(["--suite", "tensor", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 4242);
}

#[test]
fn csv_clouds_load_and_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.csv");
    fs::write(&path, "1,0,0\n3,0,0\n").unwrap();
    let cloud = load_cloud(&path, CloudFormat::Csv).unwrap();
    assert_eq!(cloud.n(), 2);
    assert_eq!(cloud.point(0), nalgebra::Vector3::new(1.0, 0.0, 0.0));
    assert_eq!(cloud.point(1), nalgebra::Vector3::new(3.0, 0.0, 0.0));

    // Awkward doubles survive save/load bit for bit, in both formats.
    let pts = [
        nalgebra::Vector3::new(0.1, -1.0 / 3.0, 2.0f64.sqrt()),
        nalgebra::Vector3::new(1e-300, std::f64::consts::PI, -0.0),
        nalgebra::Vector3::new(f64::MIN_POSITIVE, 1e300, -7.25),
    ];
    let cloud = equivkernel::tensor::PointCloud::from_points(&pts).unwrap();
    for format in [CloudFormat::Csv, CloudFormat::Json] {
        let p = dir.path().join(match format {
            CloudFormat::Csv => "rt.csv",
            CloudFormat::Json => "rt.json",
        });
        save_cloud(&p, format, &cloud).unwrap();
        let back = load_cloud(&p, format).unwrap();
        for j in 0..3 {
            for i in 0..3 {
                assert_eq!(cloud.point(j)[i].to_bits(), back.point(j)[i].to_bits());
            }
        }
    }
}

#[test]
fn malformed_csv_reports_the_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "1,0,0\n2,oops,0\n").unwrap();
    let err = load_cloud(&path, CloudFormat::Csv).unwrap_err().to_string();
    assert!(err.contains(":2:"), "line number in {err:?}");
}

#[test]
fn single_point_clouds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.json");
    fs::write(&path, "[[0,0,1]]").unwrap();
    let err = load_cloud(&path, CloudFormat::Json).unwrap_err().to_string();
    assert!(err.contains("at least 2"), "{err:?}");
}

fn centralizer_spec_json(n: usize) -> String {
    format!(
        r#"{{
  "schema": "network-spec-v1",
  "depth_degree": 1,
  "target": [1],
  "channels": [
    {{
      "convolutions": [
        {{"kind": "standard", "theta0": 0.0, "filter": {{"max_degree": 1, "radial": [[], [0.0, 1.0]]}}}},
        {{"kind": "standard", "theta0": 1.0, "filter": {{"max_degree": 0, "radial": [[]]}}}}
      ],
      "self_interaction": {{
        "input": [0, 1],
        "output": [1],
        "entries": [{{"row": 1, "col": 0, "value": {}}}]
      }}
    }}
  ]
}}"#,
        1.0 / n as f64
    )
}

fn write_cloud_csv(path: &Path, pts: &[[f64; 3]]) {
    let mut s = String::new();
    for p in pts {
        s.push_str(&format!("{},{},{}\n", p[0], p[1], p[2]));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn evaluation_mode_reproduces_the_centralized_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("net.json");
    fs::write(&spec, centralizer_spec_json(4)).unwrap();
    let cloud = dir.path().join("cloud.csv");
    let pts = [[1.0, 0.0, 0.5], [3.0, -1.0, 0.25], [0.0, 2.0, -1.0], [-2.0, 0.4, 0.25]];
    write_cloud_csv(&cloud, &pts);
    let out = dir.path().join("out.json");
    let status = bin()
        .args(["--spec"])
        .arg(&spec)
        .args(["--cloud"])
        .arg(&cloud)
        .args(["--format", "csv", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let output: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(output["schema"], "network-output-v1");
    assert_eq!(output["signature"], serde_json::json!([1]));
    let mean = [0.5, 0.35, 0.0];
    for (j, p) in pts.iter().enumerate() {
        let block = output["points"][j][0].as_array().unwrap();
        for i in 0..3 {
            let expect = p[i] - mean[i];
            let got = block[i].as_f64().unwrap();
            assert!((got - expect).abs() < 1e-8, "point {j} coord {i}: {got} vs {expect}");
        }
    }
}

#[test]
fn evaluation_output_rotates_with_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("net.json");
    fs::write(&spec, centralizer_spec_json(3)).unwrap();

    let pts = [[1.0, 0.2, -0.3], [0.5, -1.0, 0.8], [-0.25, 0.75, 1.5]];
    // Quarter turn about z: (x, y, z) -> (-y, x, z).
    let rotated: Vec<[f64; 3]> = pts.iter().map(|p| [-p[1], p[0], p[2]]).collect();

    let run = |pts: &[[f64; 3]], name: &str| -> serde_json::Value {
        let cloud = dir.path().join(name);
        write_cloud_csv(&cloud, pts);
        let out = dir.path().join(format!("{name}.out.json"));
        let status = bin()
            .args(["--spec"])
            .arg(&spec)
            .args(["--cloud"])
            .arg(&cloud)
            .args(["--format", "csv", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap()
    };

    let base = run(&pts, "base.csv");
    let moved = run(&rotated, "rot.csv");
    for j in 0..3 {
        let b = base["points"][j][0].as_array().unwrap();
        let m = moved["points"][j][0].as_array().unwrap();
        let expect = [
            -b[1].as_f64().unwrap(),
            b[0].as_f64().unwrap(),
            b[2].as_f64().unwrap(),
        ];
        for i in 0..3 {
            assert!((m[i].as_f64().unwrap() - expect[i]).abs() < 1e-9);
        }
    }
}
