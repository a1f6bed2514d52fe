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
//! Closed-loop benchmark: predict a triad for a random visible part, turn it
//! into primitive trajectories and score the simulated joint displacement.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Isometry3, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EpisodeResult, EvalConfig, FailureKind, Simulator};
use crate::annotation::{
    annotate_view_at, compute_box_about, AnnotatedView, AnnotationOptions, ArticulatedObject, AxisSegment, OrientedBox3D,
    SemanticLabel, ViewCamera,
};
use crate::camera::{unproject_normalized, CameraIntrinsics, DepthRange};
use crate::dataset::{place_camera, ViewSampling, ViewSpec};
use crate::error::{Error, Result};
use crate::model_io::{parse_triad_answer, AnswerGrammar, AnswerShape, ParsedAnswer, PredictionContext, PredictionSource};
use crate::primitives::{choose_contact_within, plan_trajectory, select_primitive, slide_distance, Direction, PlanParams, PrimitiveKind};
use crate::seeds::{derive_seed, derive_seed_str};
use crate::skills::SkillRuleTable;
use crate::urdf::middle_joint_values;

pub const EVAL_PROMPT_PREFIX: &str = "Please provide the 3D bounding box, joint type and 3D axis of the part:";

pub fn eval_prompt(link_name: &str) -> String {
    format!("{EVAL_PROMPT_PREFIX} {link_name}.")
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub object_id: String,
    pub category: String,
    pub seed: u64,
    pub link: String,
    pub primitive: String,
    pub success: bool,
    pub d: f64,
    pub failure: String,
    pub d_forward: f64,
    pub d_backward: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub n: usize,
    pub successes: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub predictor: String,
    pub config: EvalConfig,
    pub seeds: Vec<u64>,
    pub per_category: BTreeMap<String, CategoryStats>,
    /// Mean of the per-category rates.
    pub average: f64,
    /// Successes over all episodes.
    pub episode_rate: f64,
    #[serde(skip)]
    pub episodes: Vec<EpisodeRecord>,
}

struct Setup<'a> {
    object: &'a ArticulatedObject,
    episode_seed: u64,
    camera: ViewCamera,
    view: AnnotatedView,
    target: usize,
    image: String,
    prompt: String,
}

/// Middle joint values, then camera draws until some movable part is annotated.
fn setup_episode<'a>(object: &'a ArticulatedObject, seed: u64, cfg: &EvalConfig) -> Result<Option<Setup<'a>>> {
    let episode_seed = derive_seed_str(seed, &object.id);
    let joints = middle_joint_values(&object.tree);
    let intrinsics = CameraIntrinsics::default();
    let rules = SkillRuleTable::default();
    for retry in 0..cfg.view_retries {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(episode_seed, retry as u64));
        let (camera, _) = place_camera(object, &joints, &mut rng, &intrinsics, &ViewSampling::default())?;
        let view = annotate_view_at(
            object,
            &Isometry3::identity(),
            &joints,
            &camera,
            &rules,
            &AnnotationOptions::default(),
        )?;
        if view.annotations.is_empty() {
            continue;
        }
        let target = rng.gen_range(0..view.annotations.len());
        let prompt = eval_prompt(&view.annotations[target].triad.label.link_name);
        return Ok(Some(Setup {
            object,
            episode_seed,
            camera,
            view,
            target,
            image: format!("eval/{}", ViewSpec::default_image_ref(&object.id, retry)),
            prompt,
        }));
    }
    Ok(None)
}

struct Executed {
    primitive: Option<PrimitiveKind>,
    result: EpisodeResult,
}

fn execute(setup: &Setup<'_>, answer: Option<&str>, cfg: &EvalConfig) -> Result<Executed> {
    let degenerate = || Executed {
        primitive: None,
        result: EpisodeResult::failed(FailureKind::Degenerate),
    };
    let Some(answer) = answer else { return Ok(degenerate()) };
    let Ok(ParsedAnswer::Triad { link_name, joint, bbox, axis }) = parse_triad_answer(answer, AnswerShape::Triad) else {
        return Ok(degenerate());
    };

    let cam = &setup.camera;
    let range = &setup.view.depth_range;
    let unproject = |p: &crate::camera::NormalizedPoint3<f64>| {
        unproject_normalized(&cam.intrinsics, &cam.pose, range, &p.clamped())
    };
    let Ok(vertices) = bbox.iter().map(unproject).collect::<std::result::Result<Vec<_>, _>>() else {
        return Ok(degenerate());
    };
    let vertices: [Point3<f64>; 8] = std::array::from_fn(|i| vertices[i]);
    let (Ok(a0), Ok(a1)) = (unproject(&axis[0]), unproject(&axis[1])) else {
        return Ok(degenerate());
    };
    let Ok(pred_axis) = AxisSegment::new(a0, a1, joint) else {
        return Ok(degenerate());
    };
    let tol = quantization_tolerance(cam, range);
    let Ok(pred_box) = reconstruct_box(&vertices, &pred_axis, tol) else {
        return Ok(degenerate());
    };

    let truth = &setup.view.annotations[setup.target];
    let label = SemanticLabel {
        joint_kind: joint,
        link_name: link_name.unwrap_or_else(|| truth.triad.label.link_name.clone()),
        actions: Vec::new(),
    };
    let kind = select_primitive(&label);

    let sim = Simulator::new(setup.object, middle_joint_values(&setup.object.tree))?;
    let surface = visible_surface(setup, sim.poses());
    let contact = match choose_contact_within(&pred_box, &surface, kind, &pred_axis, derive_seed(setup.episode_seed, 0xc0), tol) {
        Ok(c) => c,
        Err(_) => {
            return Ok(Executed {
                primitive: Some(kind),
                result: EpisodeResult::failed(FailureKind::NoContact),
            })
        }
    };

    // The slide length uses the targeted joint's travel.
    let model = sim.joint_model(&truth.triad.link)?;
    let q_init = sim.initial_value(&model);
    let slide_m = match model.limits {
        Some(l) => slide_distance(q_init, l.lower, l.upper, cfg.max_slide),
        None => cfg.max_slide,
    };
    let params = PlanParams { slide_m, ..cfg.plan };
    let plans: std::result::Result<Vec<_>, _> = [Direction::Forward, Direction::Backward]
        .iter()
        .map(|d| plan_trajectory(kind, &contact, &pred_axis, &params, *d))
        .collect();
    let Ok(trajectories) = plans else {
        return Ok(Executed {
            primitive: Some(kind),
            result: EpisodeResult::failed(FailureKind::Degenerate),
        });
    };
    Ok(Executed {
        primitive: Some(kind),
        result: sim.run_episode(&truth.triad.link, &trajectories, cfg)?,
    })
}

/// World-space size (m) of half a text quantization step in this view:
/// the larger of the pixel step at the far depth and the depth step.
fn quantization_tolerance(cam: &ViewCamera, range: &DepthRange<f64>) -> f64 {
    let half_step = AnswerGrammar::V1.max_round_trip_error();
    let intr = &cam.intrinsics;
    let image = half_step * f64::from(intr.width.max(intr.height)) * range.z_max / intr.fx.min(intr.fy);
    image.max(half_step * range.span())
}

/// Box from eight read-back vertices. Parts that are flat along the axis
/// lose their z edges to quantization; those are refitted about the
/// predicted axis instead.
fn reconstruct_box(
    vertices: &[Point3<f64>; 8],
    axis: &AxisSegment<f64>,
    tol: f64,
) -> std::result::Result<OrientedBox3D<f64>, crate::error::GeometryError> {
    match OrientedBox3D::from_vertices(vertices) {
        Ok(b) if b.half_extents.z > 2.0 * tol => Ok(b),
        _ => {
            let center = Point3::from(vertices.iter().map(|v| v.coords).sum::<nalgebra::Vector3<f64>>() / 8.0);
            compute_box_about(vertices, &axis.direction(), &center)
        }
    }
}

/// World positions of every sample that passed the visibility test.
fn visible_surface(setup: &Setup<'_>, poses: &crate::urdf::LinkPoses) -> Vec<Point3<f64>> {
    let mut out = Vec::new();
    for vis in &setup.view.visibility {
        let (Some(lg), Some(pose)) = (setup.object.geometry.link(&vis.link), poses.get(&vis.link)) else {
            continue;
        };
        out.extend(
            lg.samples
                .iter()
                .zip(&vis.visible)
                .filter(|(_, v)| **v)
                .map(|(p, _)| pose * p),
        );
    }
    out
}

/// Runs one episode per (object, seed) and aggregates success by category.
pub fn evaluate(
    objects: &[ArticulatedObject],
    source: &PredictionSource,
    cfg: &EvalConfig,
    seeds: &[u64],
) -> Result<EvalReport> {
    cfg.validate()?;
    if objects.is_empty() || seeds.is_empty() {
        return Err(Error::Config("evaluation needs at least one object and one seed".into()));
    }
    let jobs: Vec<(usize, u64)> = objects
        .iter()
        .enumerate()
        .flat_map(|(i, _)| seeds.iter().map(move |s| (i, *s)))
        .collect();
    let setups: Vec<(usize, u64, Option<Setup<'_>>)> = jobs
        .par_iter()
        .map(|&(i, s)| setup_episode(&objects[i], s, cfg).map(|setup| (i, s, setup)))
        .collect::<Result<_>>()?;

    let ready: Vec<&Setup<'_>> = setups.iter().filter_map(|(_, _, s)| s.as_ref()).collect();
    let contexts: Vec<PredictionContext<'_>> = ready
        .iter()
        .map(|s| PredictionContext {
            image: &s.image,
            prompt: &s.prompt,
            truth: &s.view.annotations[s.target].triad,
        })
        .collect();
    let answers = source.predict_batch(&contexts);

    let executed: Vec<Executed> = ready
        .par_iter()
        .zip(answers.par_iter())
        .map(|(setup, answer)| execute(setup, answer.as_ref().ok().map(String::as_str), cfg))
        .collect::<Result<_>>()?;

    let mut executed = executed.into_iter();
    let mut episodes = Vec::with_capacity(setups.len());
    for (i, seed, setup) in &setups {
        let object = &objects[*i];
        let (link, primitive, result) = match setup {
            Some(s) => {
                let ex = executed.next().expect("one execution per ready setup");
                (
                    s.view.annotations[s.target].triad.link.clone(),
                    ex.primitive,
                    ex.result,
                )
            }
            None => (String::new(), None, EpisodeResult::failed(FailureKind::Degenerate)),
        };
        let attempt_d = |dir: Direction| {
            result
                .attempt_results
                .iter()
                .find(|a| a.direction == dir)
                .map_or(0.0, |a| a.d)
        };
        episodes.push(EpisodeRecord {
            object_id: object.id.clone(),
            category: object.category.clone(),
            seed: *seed,
            link,
            primitive: primitive.map_or("", |p| p.as_str()).to_owned(),
            success: result.success,
            d: result.d,
            failure: result.failure.map_or("", |f| f.as_str()).to_owned(),
            d_forward: attempt_d(Direction::Forward),
            d_backward: attempt_d(Direction::Backward),
        });
    }

    let mut per_category: BTreeMap<String, CategoryStats> = BTreeMap::new();
    for e in &episodes {
        let stats = per_category.entry(e.category.clone()).or_default();
        stats.n += 1;
        stats.successes += usize::from(e.success);
    }
    for stats in per_category.values_mut() {
        stats.rate = stats.successes as f64 / stats.n as f64;
    }
    let average = per_category.values().map(|s| s.rate).sum::<f64>() / per_category.len() as f64;
    let episode_rate = episodes.iter().filter(|e| e.success).count() as f64 / episodes.len() as f64;

    Ok(EvalReport {
        predictor: source.name(),
        config: *cfg,
        seeds: seeds.to_vec(),
        per_category,
        average,
        episode_rate,
        episodes,
    })
}

pub fn write_episodes_csv(path: &Path, episodes: &[EpisodeRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for e in episodes {
        w.serialize(e).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
