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
//! Dataset construction: views, per-view annotation records, scene
//! manifests for an external renderer and instruction samples.

mod samples;
mod views;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use samples::{
    build_samples, expected_sample_count, rec_action_prompt, rec_link_prompt, reg_joint_prompt, InstructionSample,
    TaskKind, TaskMultipliers, DETECTION_PROMPT,
};
pub use views::{
    place_camera, random_joint_config, sample_view, sample_views, view_seed, Lighting, ViewSampling, ViewSpec,
    DEFAULT_VIEWS_PER_OBJECT,
};

pub use crate::model_io::{format_triad_text, TriadText};

use crate::annotation::{annotate_view_at, AnnotatedView, AnnotationOptions, ArticulatedObject, Triad};
use crate::camera::{CameraIntrinsics, DepthRange};
use crate::error::{Error, Result};
use crate::seeds::derive_seed;
use crate::skills::SkillRuleTable;
use crate::urdf::JointConfig;

/// Everything an external renderer needs to produce the view's image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub object_id: String,
    pub category: String,
    pub view_index: usize,
    pub seed: u64,
    pub image: Option<String>,
    pub intrinsics: CameraIntrinsics<f64>,
    /// World-to-camera transform, row-major; camera looks along +z, +v down.
    pub world_to_camera: [[f64; 4]; 4],
    pub joints: JointConfig,
    pub lighting: Lighting,
    pub depth_range: Option<DepthRange<f64>>,
}

impl SceneManifest {
    pub fn new(object: &ArticulatedObject, spec: &ViewSpec, depth_range: Option<DepthRange<f64>>) -> Self {
        Self {
            object_id: spec.object_id.clone(),
            category: object.category.clone(),
            view_index: spec.index,
            seed: spec.seed,
            image: spec.image_ref.clone(),
            intrinsics: spec.camera.intrinsics,
            world_to_camera: spec.camera.pose.matrix_row_major(),
            joints: spec.joints.clone(),
            lighting: spec.lighting,
            depth_range,
        }
    }
}

/// One JSON-lines record of the annotation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub object_id: String,
    pub category: String,
    pub view_index: usize,
    pub image: Option<String>,
    pub depth_range: DepthRange<f64>,
    pub triads: Vec<Triad>,
}

#[derive(Debug, Clone)]
pub struct ViewOutput {
    pub spec: ViewSpec,
    pub view: AnnotatedView,
    pub manifest: SceneManifest,
    pub record: AnnotationRecord,
    pub samples: Vec<InstructionSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub views_per_object: usize,
    pub master_seed: u64,
    pub intrinsics: CameraIntrinsics<f64>,
    pub sampling: ViewSampling,
    pub multipliers: TaskMultipliers,
    pub annotation: AnnotationOptions,
    pub rules: SkillRuleTable,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            views_per_object: DEFAULT_VIEWS_PER_OBJECT,
            master_seed: 0,
            intrinsics: CameraIntrinsics::default(),
            sampling: ViewSampling::default(),
            multipliers: TaskMultipliers::default(),
            annotation: AnnotationOptions::default(),
            rules: SkillRuleTable::default(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.views_per_object == 0 {
            return Err(Error::Config("views per object must be at least 1".into()));
        }
        self.multipliers.validate().map_err(Error::Config)
    }
}

/// Samples, annotates and converts one view.
pub fn process_view(object: &ArticulatedObject, index: usize, config: &DatasetConfig) -> Result<ViewOutput> {
    let spec = sample_view(object, index, config.master_seed, &config.intrinsics, &config.sampling)?;
    let view = annotate_view_at(
        object,
        &nalgebra::Isometry3::identity(),
        &spec.joints,
        &spec.camera,
        &config.rules,
        &config.annotation,
    )?;
    let triads = view.triads();
    let image = spec
        .image_ref
        .clone()
        .unwrap_or_else(|| ViewSpec::default_image_ref(&object.id, index));
    let mut samples = build_samples(&triads, &image, spec.seed);
    for s in &mut samples {
        s.augmented_image_ref = spec.augmented_image_ref.clone();
    }
    let samples = config.multipliers.apply(samples, derive_seed(spec.seed, 0x5a17));
    Ok(ViewOutput {
        manifest: SceneManifest::new(object, &spec, Some(view.depth_range)),
        record: AnnotationRecord {
            object_id: object.id.clone(),
            category: object.category.clone(),
            view_index: index,
            image: spec.image_ref.clone(),
            depth_range: view.depth_range,
            triads,
        },
        samples,
        spec,
        view,
    })
}

/// All views of all objects, in (object, view) order regardless of threading.
pub fn build_dataset(objects: &[ArticulatedObject], config: &DatasetConfig) -> Result<Vec<ViewOutput>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..objects.len())
        .flat_map(|o| (0..config.views_per_object).map(move |v| (o, v)))
        .collect();
    jobs.par_iter()
        .map(|&(o, v)| process_view(&objects[o], v, config))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub objects: usize,
    pub views: usize,
    pub annotated_links: usize,
    pub samples_per_task: BTreeMap<String, usize>,
}

impl DatasetSummary {
    pub fn of(outputs: &[ViewOutput]) -> Self {
        let mut summary = DatasetSummary {
            objects: outputs
                .iter()
                .map(|o| o.spec.object_id.as_str())
                .collect::<std::collections::BTreeSet<_>>()
                .len(),
            views: outputs.len(),
            ..Default::default()
        };
        for out in outputs {
            summary.annotated_links += out.record.triads.len();
            for s in &out.samples {
                *summary.samples_per_task.entry(s.task.as_str().to_owned()).or_default() += 1;
            }
        }
        summary
    }
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Relative path of a view's scene manifest.
pub fn manifest_path(object_id: &str, index: usize) -> String {
    format!("manifests/{object_id}/view_{index:03}.json")
}

/// Writes `annotations.jsonl` plus one manifest per view.
pub fn write_annotations(out_dir: &Path, outputs: &[ViewOutput]) -> Result<()> {
    write_jsonl(&out_dir.join("annotations.jsonl"), outputs.iter().map(|o| &o.record))?;
    for o in outputs {
        write_json(&out_dir.join(manifest_path(&o.spec.object_id, o.spec.index)), &o.manifest)?;
    }
    Ok(())
}

/// Writes annotations, manifests, `samples.jsonl` and `summary.json`.
pub fn write_dataset(out_dir: &Path, outputs: &[ViewOutput]) -> Result<DatasetSummary> {
    write_annotations(out_dir, outputs)?;
    write_jsonl(&out_dir.join("samples.jsonl"), outputs.iter().flat_map(|o| o.samples.iter()))?;
    let summary = DatasetSummary::of(outputs);
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}
