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
//! Instruction-following samples built from the triads of one view.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::Triad;
use crate::model_io::{
    format_action_answer, format_detection_answer, format_joint_answer, format_triad_text, AnswerShape,
};
use crate::seeds::derive_seed_str;

pub const DETECTION_PROMPT: &str = "Detect all manipulable object parts and provide their 3D bounding boxes.";

pub fn rec_link_prompt(link_name: &str) -> String {
    format!("Please provide the 3D bounding box of the region this sentence describes: {link_name}.")
}

pub fn reg_joint_prompt(reference: &str) -> String {
    format!("Please provide the joint's type and its 3D axis linked to the object part: {reference}.")
}

pub fn rec_action_prompt(instruction: &str) -> String {
    format!(
        "Please execute the task described with 3D rotated bounding box representations by the following instruction: {instruction}"
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    Detection,
    #[serde(rename = "REC-Link")]
    RecLink,
    #[serde(rename = "REG-Joint")]
    RegJoint,
    #[serde(rename = "REC-Action")]
    RecAction,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Detection, TaskKind::RecLink, TaskKind::RegJoint, TaskKind::RecAction];

    pub fn answer_shape(self) -> AnswerShape {
        match self {
            TaskKind::Detection => AnswerShape::Detection,
            TaskKind::RecLink => AnswerShape::RecLink,
            TaskKind::RegJoint => AnswerShape::RegJoint,
            TaskKind::RecAction => AnswerShape::RecAction,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Detection => "Detection",
            TaskKind::RecLink => "REC-Link",
            TaskKind::RegJoint => "REG-Joint",
            TaskKind::RecAction => "REC-Action",
        }
    }
}

/// One line of the instruction dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionSample {
    pub task: TaskKind,
    #[serde(rename = "image")]
    pub image_ref: String,
    pub prompt: String,
    pub answer: String,
    /// Link identifiers whose triads the answer encodes.
    #[serde(rename = "links")]
    pub source_triads: Vec<String>,
    #[serde(rename = "augmented_image", default, skip_serializing_if = "Option::is_none")]
    pub augmented_image_ref: Option<String>,
}

/// Number of samples `build_samples` emits for these triads.
pub fn expected_sample_count(triads: &[Triad]) -> usize {
    if triads.is_empty() {
        return 0;
    }
    1 + 2 * triads.len() + triads.iter().map(|t| t.label.actions.len()).sum::<usize>()
}

/// Detection, then per link REC-Link, REG-Joint and one REC-Action per action.
pub fn build_samples(triads: &[Triad], image_ref: &str, seed: u64) -> Vec<InstructionSample> {
    if triads.is_empty() {
        return Vec::new();
    }
    let sample = |task, prompt: String, answer: String, links: Vec<String>| InstructionSample {
        task,
        image_ref: image_ref.to_owned(),
        prompt,
        answer,
        source_triads: links,
        augmented_image_ref: None,
    };

    let parts: Vec<(&str, &[_; 8])> = triads
        .iter()
        .map(|t| (t.label.link_name.as_str(), &t.box_norm))
        .collect();
    let mut out = vec![sample(
        TaskKind::Detection,
        DETECTION_PROMPT.to_owned(),
        format_detection_answer(&parts),
        triads.iter().map(|t| t.link.clone()).collect(),
    )];

    for triad in triads {
        let text = format_triad_text(triad);
        let name = &triad.label.link_name;
        let links = vec![triad.link.clone()];
        out.push(sample(TaskKind::RecLink, rec_link_prompt(name), text.bbox.clone(), links.clone()));

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_str(seed, &triad.link));
        let reference = if rng.gen_bool(0.5) { &text.bbox } else { name };
        out.push(sample(
            TaskKind::RegJoint,
            reg_joint_prompt(reference),
            format_joint_answer(triad.label.joint_kind, &triad.axis_norm),
            links.clone(),
        ));

        for action in &triad.label.actions {
            out.push(sample(
                TaskKind::RecAction,
                rec_action_prompt(&action.instruction(name)),
                format_action_answer(*action, &triad.box_norm),
                links.clone(),
            ));
        }
    }
    out
}

/// Per-task sampling weights. A weight `w` keeps `floor(w)` copies of each
/// sample plus one more with probability `w - floor(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskMultipliers {
    pub detection: f64,
    pub rec_link: f64,
    pub reg_joint: f64,
    pub rec_action: f64,
}

impl Default for TaskMultipliers {
    fn default() -> Self {
        Self {
            detection: 1.0,
            rec_link: 1.0,
            reg_joint: 1.0,
            rec_action: 1.0,
        }
    }
}

impl TaskMultipliers {
    pub fn get(&self, task: TaskKind) -> f64 {
        match task {
            TaskKind::Detection => self.detection,
            TaskKind::RecLink => self.rec_link,
            TaskKind::RegJoint => self.reg_joint,
            TaskKind::RecAction => self.rec_action,
        }
    }

    pub fn is_identity(&self) -> bool {
        TaskKind::ALL.iter().all(|t| self.get(*t) == 1.0)
    }

    pub fn validate(&self) -> Result<(), String> {
        for task in TaskKind::ALL {
            let w = self.get(task);
            if !w.is_finite() || w < 0.0 {
                return Err(format!("multiplier for {} must be a finite non-negative number, got {w}", task.as_str()));
            }
        }
        Ok(())
    }

    pub fn apply(&self, samples: Vec<InstructionSample>, seed: u64) -> Vec<InstructionSample> {
        if self.is_identity() {
            return samples;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for s in samples {
            let w = self.get(s.task);
            let mut copies = w.floor() as usize;
            if rng.gen::<f64>() < w - w.floor() {
                copies += 1;
            }
            out.extend(std::iter::repeat_n(s, copies));
        }
        out
    }
}
