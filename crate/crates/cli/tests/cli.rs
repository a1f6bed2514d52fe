/*
  Copyright 2026 The a3kit Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/
use std::path::PathBuf;
use std::process::{Command, Output};

fn a3kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_a3kit"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn out_dir(dir: &tempfile::TempDir) -> &str {
    dir.path().to_str().unwrap()
}

#[test]
fn no_subcommand_is_usage_error() {
    let out = a3kit(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = a3kit(&["annotate", "--urdf", "fixtures/door.urdf", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_error_has_structured_line() {
    let out = a3kit(&["annotate", "--urdf", "fixtures/missing.urdf", "-o", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn invalid_config_rejected_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = a3kit(&["build-dataset", "--urdf", "fixtures/door.urdf", "--views", "0", "-o", out_dir(&dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: config:"));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn annotate_writes_one_record_and_manifest_per_view() {
    let dir = tempfile::tempdir().unwrap();
    let out = a3kit(&["annotate", "--urdf", "fixtures/door.urdf", "--views", "5", "--seed", "7", "-o", out_dir(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("annotations.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 5);
    let manifests = std::fs::read_dir(dir.path().join("manifests/door")).unwrap().count();
    assert_eq!(manifests, 5);
}

#[test]
fn build_dataset_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = a3kit(&["build-dataset", "--urdf", "fixtures/drawer_cabinet.urdf", "--views", "3", "--seed", "11", "-o", out_dir(d)]);
        assert!(out.status.success());
    }
    for file in ["annotations.jsonl", "samples.jsonl", "summary.json", "manifests/drawer_cabinet/view_002.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn eval_ground_truth_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = a3kit(&["eval", "--corpus", "fixtures", "--predictor", "ground-truth", "--seed", "1", "-o", out_dir(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["average"].as_f64(), Some(1.0));
    let csv = std::fs::read_to_string(dir.path().join("episodes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9 * 8);
}

#[test]
fn remote_predictor_needs_endpoint() {
    let out = a3kit(&["eval", "--urdf", "fixtures/door.urdf", "--predictor", "remote"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plan_writes_both_directions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let out = a3kit(&["plan", "--urdf", "fixtures/door.urdf", "--link", "door", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(plan["primitive"], "rotate");
    let trajs = plan["trajectories"].as_array().unwrap();
    assert_eq!(trajs.len(), 2);
    assert_eq!(trajs[0]["waypoints"].as_array().unwrap().len(), 16);
}

#[test]
fn plan_rejects_fixed_link() {
    let out = a3kit(&["plan", "--urdf", "fixtures/door.urdf", "--link", "base"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: not_movable:"));
}

#[test]
fn render_debug_writes_svg_and_ply() {
    let dir = tempfile::tempdir().unwrap();
    let out = a3kit(&["render-debug", "--urdf", "fixtures/door.urdf", "--views", "1", "-o", out_dir(&dir)]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("debug/door/view_000.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<line"));
    let ply = std::fs::read_to_string(dir.path().join("debug/door/view_000.ply")).unwrap();
    assert!(ply.starts_with("ply\nformat ascii 1.0"));
}

#[test]
fn thread_cap_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_a3kit"))
        .args(["annotate", "--urdf", "fixtures/door.urdf", "--views", "1", "-o", "/tmp/unused"])
        .current_dir(workspace_root())
        .env("A3KIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
