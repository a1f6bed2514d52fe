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
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use a3kit::annotation::{fit_link, ArticulatedObject};
use a3kit::fixtures::{fixture_corpus, fixture_object};
use a3kit::model_io::{PredictionSource, RemoteVlmClient};
use a3kit::primitives::{plan_trajectory, Direction, PlanParams, PrimitiveKind};
use a3kit::sim::{attach, evaluate, is_success, step, EvalConfig, FailureKind, Simulator};
use a3kit::urdf::{middle_joint_values, JointConfig};
use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;

/// A surface sample of `link` at the simulator's pose that is extreme along `dir`.
fn extreme_sample(sim: &Simulator<'_>, link: &str, dir: Vector3<f64>) -> Point3<f64> {
    let pose = sim.poses()[link];
    sim.object
        .geometry
        .link(link)
        .unwrap()
        .samples
        .iter()
        .map(|p| pose * p)
        .max_by(|a, b| a.coords.dot(&dir).total_cmp(&b.coords.dot(&dir)))
        .unwrap()
}

fn cabinet() -> ArticulatedObject {
    fixture_object("drawer_cabinet", 0).unwrap()
}

#[test]
fn attach_round_trips_through_the_link_frame() {
    let object = cabinet();
    let sim = Simulator::new(&object, middle_joint_values(&object.tree)).unwrap();
    let model = sim.joint_model("drawer_1").unwrap();
    let mesh = &object.geometry.link("drawer_1").unwrap().mesh;
    let contact = extreme_sample(&sim, "drawer_1", Vector3::x());
    let q = sim.initial_value(&model);
    let state = attach(&model, mesh, q, &contact, &UnitQuaternion::identity(), 0.005).unwrap();
    assert!((state.anchor_world(&model) - contact).norm() < 1e-9);

    let off = contact + Vector3::new(0.1, 0.0, 0.0);
    assert_eq!(attach(&model, mesh, q, &off, &UnitQuaternion::identity(), 0.005), Err(FailureKind::NoContact));

    // A point on the door is not on the drawer.
    let on_door = extreme_sample(&sim, "door", Vector3::x());
    assert_eq!(attach(&model, mesh, q, &on_door, &UnitQuaternion::identity(), 0.005), Err(FailureKind::NoContact));
}

#[test]
fn step_examples() {
    let object = cabinet();
    let sim = Simulator::new(&object, middle_joint_values(&object.tree)).unwrap();
    let cfg = EvalConfig::default();

    let drawer = sim.joint_model("drawer_1").unwrap();
    let mesh = &object.geometry.link("drawer_1").unwrap().mesh;
    let q0 = sim.initial_value(&drawer);
    let contact = extreme_sample(&sim, "drawer_1", Vector3::x());
    let state = attach(&drawer, mesh, q0, &contact, &UnitQuaternion::identity(), 0.005).unwrap();
    let pull = Isometry3::from_parts(
        Translation3::from(contact.coords + drawer.axis_world().into_inner() * 0.05),
        UnitQuaternion::identity(),
    );
    let out = step(&drawer, &state, &pull, &cfg);
    assert!((out.q - (q0 + 0.05)).abs() < 1e-12 && out.residual < 1e-12 && !out.detached);

    // Orthogonal to the slide, 5 cm away: the grip is lost and q stays.
    let ortho = drawer.axis_world().cross(&Vector3::z()).normalize();
    let away = Isometry3::from_parts(Translation3::from(contact.coords + ortho * 0.05), UnitQuaternion::identity());
    let out = step(&drawer, &state, &away, &cfg);
    assert!(out.detached && out.q == q0);

    // Door: a waypoint 10 degrees ahead on the anchor's circle.
    let door = sim.joint_model("door").unwrap();
    let door_mesh = &object.geometry.link("door").unwrap().mesh;
    let q0 = sim.initial_value(&door);
    let contact = extreme_sample(&sim, "door", Vector3::x());
    let state = attach(&door, door_mesh, q0, &contact, &UnitQuaternion::identity(), 0.005).unwrap();
    let ahead = door.link_pose(q0 + 10f64.to_radians()) * state.anchor_local;
    let out = step(&door, &state, &Isometry3::from_parts(Translation3::from(ahead.coords), UnitQuaternion::identity()), &cfg);
    assert!((out.q - q0 - 10f64.to_radians()).abs() < 1e-9 && out.residual < 1e-9);
}

#[test]
fn drawer_pull_of_ten_centimetres_succeeds() {
    let object = cabinet();
    let joints = JointConfig::default()
        .with("drawer_1_slide", 0.1)
        .with("drawer_2_slide", 0.0)
        .with("door_hinge", 0.0);
    let sim = Simulator::new(&object, joints).unwrap();
    let (_, axis) = fit_link(&object, sim.poses(), "drawer_1").unwrap();
    let contact = extreme_sample(&sim, "drawer_1", Vector3::x());
    let params = PlanParams { slide_m: 0.1, ..PlanParams::default() };
    let forward = plan_trajectory(PrimitiveKind::Slide, &contact, &axis, &params, Direction::Forward).unwrap();
    let result = sim.run_episode("drawer_1", &[forward], &EvalConfig::default()).unwrap();
    assert!((result.d - 0.1).abs() < 1e-9 && result.success, "{result:?}");
}

#[test]
fn door_at_upper_limit_opens_backwards() {
    let object = fixture_object("door", 0).unwrap();
    let upper = object.tree.joint("door_hinge").unwrap().limits.unwrap().upper;
    let sim = Simulator::new(&object, JointConfig::default().with("door_hinge", upper)).unwrap();
    let (bbox, axis) = fit_link(&object, sim.poses(), "door").unwrap();
    // Far edge of the door from the hinge.
    let contact = extreme_sample(&sim, "door", bbox.center - axis.project_onto_line(&bbox.center));
    let plans: Vec<_> = [Direction::Forward, Direction::Backward]
        .iter()
        .map(|d| plan_trajectory(PrimitiveKind::Rotate, &contact, &axis, &PlanParams::default(), *d).unwrap())
        .collect();
    let result = sim.run_episode("door", &plans, &EvalConfig::default()).unwrap();
    let forward = &result.attempt_results[0];
    let backward = &result.attempt_results[1];
    assert!(!is_success(forward.d, 0.01), "{forward:?}");
    assert!(backward.failure.is_none() && result.success && result.failure.is_none());
}

#[test]
fn no_trajectories_is_a_failure() {
    let object = cabinet();
    let sim = Simulator::new(&object, middle_joint_values(&object.tree)).unwrap();
    let result = sim.run_episode("drawer_1", &[], &EvalConfig::default()).unwrap();
    assert_eq!((result.d, result.success), (0.0, false));
    assert!(result.failure.is_some());
}

/// Minimal inference server that answers every request with `text`.
fn serve(text: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
            }
            let mut body = vec![0; length];
            let _ = reader.read_exact(&mut body);
            let payload = serde_json::json!({ "text": text }).to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    format!("http://{addr}/infer")
}

#[test]
fn all_zero_predictions_score_zero() {
    let zeros = "(0.00,0.00,0.00)";
    let answer: &'static str = Box::leak(
        format!(
            "Link: part. Joint type: revolute. BBox: [{}]. Axis: [{zeros}, {zeros}]",
            [zeros; 8].join(", ")
        )
        .into_boxed_str(),
    );
    let source = PredictionSource::Remote(RemoteVlmClient::new(serve(answer), Duration::from_secs(10), 3));
    let corpus = fixture_corpus(0).unwrap();
    let report = evaluate(&corpus, &source, &EvalConfig::default(), &[0, 1]).unwrap();
    assert_eq!(report.average, 0.0);
    assert!(report.episodes.iter().all(|e| !e.success));
}

#[test]
fn ground_truth_report_is_deterministic() {
    let corpus = fixture_corpus(0).unwrap();
    let run = || evaluate(&corpus, &PredictionSource::GroundTruth, &EvalConfig::default(), &[3, 4]).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.episodes, b.episodes);
    assert_eq!(a.average, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn success_flips_strictly_above_sigma(sigma in 1e-4..1.0f64) {
        prop_assert!(!is_success(sigma, sigma));
        prop_assert!(is_success(sigma + 1e-6, sigma));
        prop_assert!(!is_success(sigma - 1e-6, sigma));
    }

    #[test]
    fn spin_is_direction_symmetric_on_continuous_joints(arc in 5.0..60.0f64) {
        let object = fixture_object("bottle_cap", 0).unwrap();
        let sim = Simulator::new(&object, middle_joint_values(&object.tree)).unwrap();
        let link = object.tree.movable_links().next().unwrap().0.name.clone();
        let (_, axis) = fit_link(&object, sim.poses(), &link).unwrap();
        let contact = extreme_sample(&sim, &link, axis.direction().into_inner());
        let params = PlanParams { arc_deg: arc, ..PlanParams::default() };
        let d = |dir| {
            let t = plan_trajectory(PrimitiveKind::Scroll, &contact, &axis, &params, dir).unwrap();
            sim.run_episode(&link, &[t], &EvalConfig::default()).unwrap().d
        };
        let (f, b) = (d(Direction::Forward), d(Direction::Backward));
        prop_assert!((f - b).abs() < 1e-9 && (f - arc.to_radians()).abs() < 1e-6, "forward {f}, backward {b}");
    }

    #[test]
    fn pull_distance_grows_with_trajectory_length(a in 0.0..0.3f64, b in 0.0..0.3f64) {
        let object = cabinet();
        let joints = JointConfig::default()
            .with("drawer_1_slide", 0.05)
            .with("drawer_2_slide", 0.0)
            .with("door_hinge", 0.0);
        let sim = Simulator::new(&object, joints).unwrap();
        let (_, axis) = fit_link(&object, sim.poses(), "drawer_1").unwrap();
        let contact = extreme_sample(&sim, "drawer_1", Vector3::x());
        let d = |len: f64| {
            let params = PlanParams { slide_m: len, n_waypoints: 64, ..PlanParams::default() };
            let t = plan_trajectory(PrimitiveKind::Slide, &contact, &axis, &params, Direction::Forward).unwrap();
            sim.run_episode("drawer_1", &[t], &EvalConfig::default()).unwrap().d
        };
        let (short, long) = (a.min(b), a.max(b));
        prop_assert!(d(short) <= d(long) + 1e-12);
    }
}
