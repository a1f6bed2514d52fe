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
//! Answer grammar v1: how triad coordinates are written in prompts and
//! answers, and the tolerant parser that reads them back.
//!
//! ```text
//! coord  := two-decimal number, rounded half away from zero
//! tuple  := "(" coord "," coord "," coord ")"        no inner whitespace
//! list   := "[" tuple { ", " tuple } "]"
//! bbox   := list of 8 tuples, vertex sign order (---),(+--),(++-),(-+-),(--+),(+-+),(+++),(-++)
//! axis   := list of 2 tuples
//! ```
//!
//! Answer templates per task:
//!
//! ```text
//! Detection   There is 1 manipulable object part with its 3D bounding box: <name> <bbox>.
//!             There are N manipulable object parts with their 3D bounding boxes: <name> <bbox>; <name> <bbox>.
//! REC-Link    <bbox>
//! REG-Joint   Joint type: <revolute|prismatic>. Axis: <axis>
//! REC-Action  Action type: <skill>. BBox: <bbox>
//! Triad       Link: <name>. Joint type: <kind>. BBox: <bbox>. Axis: <axis>
//! ```

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::AnswerError;
use crate::annotation::Triad;
use crate::camera::NormalizedPoint3;
use crate::skills::Skill;
use crate::urdf::Articulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerGrammar {
    pub version: &'static str,
    pub tuple_separator: &'static str,
    pub coordinate_separator: &'static str,
    pub decimals: usize,
}

impl AnswerGrammar {
    pub const V1: AnswerGrammar = AnswerGrammar {
        version: "a3-answer/v1",
        tuple_separator: ", ",
        coordinate_separator: ",",
        decimals: 2,
    };

    /// Half of one quantization step.
    pub fn max_round_trip_error(&self) -> f64 {
        0.5 * 10f64.powi(-(self.decimals as i32))
    }

    pub fn format_coord(&self, x: f64) -> String {
        let scale = 10f64.powi(self.decimals as i32);
        let rounded = (x * scale).round() / scale;
        // Avoid "-0.00".
        let rounded = if rounded == 0.0 { 0.0 } else { rounded };
        format!("{rounded:.prec$}", prec = self.decimals)
    }

    pub fn format_tuple(&self, p: &NormalizedPoint3<f64>) -> String {
        let sep = self.coordinate_separator;
        format!(
            "({}{sep}{}{sep}{})",
            self.format_coord(p.u),
            self.format_coord(p.v),
            self.format_coord(p.z)
        )
    }

    pub fn format_list(&self, points: &[NormalizedPoint3<f64>]) -> String {
        let tuples: Vec<String> = points.iter().map(|p| self.format_tuple(p)).collect();
        format!("[{}]", tuples.join(self.tuple_separator))
    }
}

/// Text pieces of one triad.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriadText {
    pub bbox: String,
    pub axis: String,
    /// `<link name> (<joint kind>): <action>, <action>`
    pub label: String,
}

pub fn format_triad_text(triad: &Triad) -> TriadText {
    let g = AnswerGrammar::V1;
    let actions: Vec<&str> = triad.label.actions.iter().map(|a| a.as_str()).collect();
    TriadText {
        bbox: g.format_list(&triad.box_norm),
        axis: g.format_list(&triad.axis_norm),
        label: format!("{} ({}): {}", triad.label.link_name, triad.label.joint_kind, actions.join(", ")),
    }
}

/// Full-triad answer used by the evaluation harness.
pub fn format_triad_answer(triad: &Triad) -> String {
    let text = format_triad_text(triad);
    format!(
        "Link: {}. Joint type: {}. BBox: {}. Axis: {}",
        triad.label.link_name, triad.label.joint_kind, text.bbox, text.axis
    )
}

pub fn format_detection_answer(parts: &[(&str, &[NormalizedPoint3<f64>; 8])]) -> String {
    let g = AnswerGrammar::V1;
    let body: Vec<String> = parts
        .iter()
        .map(|(name, bbox)| format!("{name} {}", g.format_list(&bbox[..])))
        .collect();
    if parts.len() == 1 {
        format!("There is 1 manipulable object part with its 3D bounding box: {}.", body[0])
    } else {
        format!(
            "There are {} manipulable object parts with their 3D bounding boxes: {}.",
            parts.len(),
            body.join("; ")
        )
    }
}

pub fn format_joint_answer(joint: Articulation, axis: &[NormalizedPoint3<f64>; 2]) -> String {
    format!("Joint type: {joint}. Axis: {}", AnswerGrammar::V1.format_list(&axis[..]))
}

pub fn format_action_answer(action: Skill, bbox: &[NormalizedPoint3<f64>; 8]) -> String {
    format!("Action type: {action}. BBox: {}", AnswerGrammar::V1.format_list(&bbox[..]))
}

/// Which answer template to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnswerShape {
    Detection,
    RecLink,
    RegJoint,
    RecAction,
    Triad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedPart {
    pub name: Option<String>,
    pub bbox: [NormalizedPoint3<f64>; 8],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParsedAnswer {
    Detection(Vec<DetectedPart>),
    Box([NormalizedPoint3<f64>; 8]),
    JointAxis {
        joint: Articulation,
        axis: [NormalizedPoint3<f64>; 2],
    },
    ActionBox {
        action: Skill,
        bbox: [NormalizedPoint3<f64>; 8],
    },
    Triad {
        link_name: Option<String>,
        joint: Articulation,
        bbox: [NormalizedPoint3<f64>; 8],
        axis: [NormalizedPoint3<f64>; 2],
    },
}

const NUMBER: &str = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?";

fn list_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let tuple = format!(r"\(\s*{NUMBER}\s*,\s*{NUMBER}\s*,\s*{NUMBER}\s*\)");
        Regex::new(&format!(r"\[\s*{tuple}(?:\s*,\s*{tuple})*\s*\]")).expect("valid list regex")
    })
}

fn tuple_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(&format!(r"\(\s*({NUMBER})\s*,\s*({NUMBER})\s*,\s*({NUMBER})\s*\)")).expect("valid tuple regex")
    })
}

struct CoordList {
    start: usize,
    end: usize,
    points: Vec<NormalizedPoint3<f64>>,
}

fn coordinate_lists(text: &str) -> Vec<CoordList> {
    list_regex()
        .find_iter(text)
        .map(|m| CoordList {
            start: m.start(),
            end: m.end(),
            points: tuple_regex()
                .captures_iter(m.as_str())
                .map(|c| {
                    let num = |i: usize| c[i].parse::<f64>().unwrap_or(f64::NAN);
                    NormalizedPoint3::new(num(1), num(2), num(3))
                })
                .collect(),
        })
        .collect()
}

fn first_with_arity<const N: usize>(lists: &[CoordList]) -> Result<[NormalizedPoint3<f64>; N], AnswerError> {
    if lists.is_empty() {
        return Err(AnswerError::NoCoordinates);
    }
    lists
        .iter()
        .find(|l| l.points.len() == N)
        .map(|l| std::array::from_fn(|i| l.points[i]))
        .ok_or(AnswerError::Arity {
            expected: N,
            found: lists[0].points.len(),
        })
}

fn find_joint(text: &str) -> Result<Articulation, AnswerError> {
    let lower = text.to_lowercase();
    let hit = |word: &str| lower.find(word);
    let candidates = [
        (hit("prismatic"), Articulation::Prismatic),
        (hit("revolute"), Articulation::Revolute),
        (hit("continuous"), Articulation::Revolute),
    ];
    candidates
        .into_iter()
        .filter_map(|(pos, kind)| pos.map(|p| (p, kind)))
        .min_by_key(|(p, _)| *p)
        .map(|(_, kind)| kind)
        .ok_or_else(|| AnswerError::MissingKeyword("joint type".into()))
}

fn find_action(text: &str) -> Result<Skill, AnswerError> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .find_map(|token| token.parse::<Skill>().ok())
        .ok_or_else(|| AnswerError::MissingKeyword("action type".into()))
}

fn find_link_name(text: &str) -> Option<String> {
    let lower = text.to_lowercase();
    let start = lower.find("link:")? + "link:".len();
    let rest = &text[start..];
    let end = rest.find(['.', '[', ';', '\n']).unwrap_or(rest.len());
    let name = rest[..end].trim();
    (!name.is_empty()).then(|| name.to_owned())
}

fn part_name(prefix: &str) -> Option<String> {
    let tail = prefix.rsplit([':', ';']).next().unwrap_or(prefix);
    let name = tail.trim().trim_end_matches(',').trim();
    (!name.is_empty()).then(|| name.to_owned())
}

/// Reads an answer of the given shape, ignoring surrounding prose.
pub fn parse_triad_answer(text: &str, shape: AnswerShape) -> Result<ParsedAnswer, AnswerError> {
    let lists = coordinate_lists(text);
    match shape {
        AnswerShape::RecLink => Ok(ParsedAnswer::Box(first_with_arity::<8>(&lists)?)),
        AnswerShape::RegJoint => {
            let axis = first_with_arity::<2>(&lists)?;
            Ok(ParsedAnswer::JointAxis {
                joint: find_joint(text)?,
                axis,
            })
        }
        AnswerShape::RecAction => {
            let bbox = first_with_arity::<8>(&lists)?;
            let before_box = &text[..lists.iter().find(|l| l.points.len() == 8).map_or(text.len(), |l| l.start)];
            let action = find_action(before_box).or_else(|_| find_action(text))?;
            Ok(ParsedAnswer::ActionBox { action, bbox })
        }
        AnswerShape::Triad => {
            let bbox = first_with_arity::<8>(&lists)?;
            let axis = first_with_arity::<2>(&lists)?;
            Ok(ParsedAnswer::Triad {
                link_name: find_link_name(text),
                joint: find_joint(text)?,
                bbox,
                axis,
            })
        }
        AnswerShape::Detection => {
            if lists.is_empty() {
                return Err(AnswerError::NoCoordinates);
            }
            let mut parts = Vec::with_capacity(lists.len());
            let mut cursor = 0;
            for list in &lists {
                if list.points.len() != 8 {
                    return Err(AnswerError::Arity {
                        expected: 8,
                        found: list.points.len(),
                    });
                }
                parts.push(DetectedPart {
                    name: part_name(&text[cursor..list.start]),
                    bbox: std::array::from_fn(|i| list.points[i]),
                });
                cursor = list.end;
            }
            Ok(ParsedAnswer::Detection(parts))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(u: f64, v: f64, z: f64) -> NormalizedPoint3<f64> {
        NormalizedPoint3::new(u, v, z)
    }

    #[test]
    fn rounding_is_half_away_from_zero_to_two_places() {
        let g = AnswerGrammar::V1;
        assert_eq!(g.format_coord(0.4999), "0.50");
        assert_eq!(g.format_coord(1.0), "1.00");
        assert_eq!(g.format_coord(0.0), "0.00");
        assert_eq!(g.format_coord(0.125), "0.13");
        assert_eq!(g.format_coord(0.004), "0.00");
        assert_eq!(g.format_coord(-0.001), "0.00");
        assert_eq!(g.format_tuple(&np(1.0, 1.0, 1.0)), "(1.00,1.00,1.00)");
    }

    #[test]
    fn list_layout() {
        let g = AnswerGrammar::V1;
        assert_eq!(
            g.format_list(&[np(0.1, 0.1, 0.5), np(0.9, 0.1, 0.5)]),
            "[(0.10,0.10,0.50), (0.90,0.10,0.50)]"
        );
    }

    #[test]
    fn box_answer_values_are_exact() {
        let text = "[(0.10,0.20,0.30), (0.11,0.21,0.31), (0.12,0.22,0.32), (0.13,0.23,0.33), \
                    (0.14,0.24,0.34), (0.15,0.25,0.35), (0.16,0.26,0.36), (0.17,0.27,0.37)]";
        let ParsedAnswer::Box(b) = parse_triad_answer(text, AnswerShape::RecLink).unwrap() else {
            panic!("wrong shape");
        };
        assert_eq!(b[0], np(0.10, 0.20, 0.30));
        assert_eq!(b[7], np(0.17, 0.27, 0.37));
    }

    #[test]
    fn joint_answer_inside_prose() {
        let text = "Sure! The part slides: it is a Prismatic joint whose axis is [(0.10,0.10,0.50),(0.90,0.10,0.50)] in the image.";
        let parsed = parse_triad_answer(text, AnswerShape::RegJoint).unwrap();
        assert_eq!(
            parsed,
            ParsedAnswer::JointAxis {
                joint: Articulation::Prismatic,
                axis: [np(0.1, 0.1, 0.5), np(0.9, 0.1, 0.5)],
            }
        );
    }

    #[test]
    fn refusals_and_wrong_arity() {
        assert_eq!(
            parse_triad_answer("I cannot help with that", AnswerShape::RecLink),
            Err(AnswerError::NoCoordinates)
        );
        assert_eq!(
            parse_triad_answer("[(0.1,0.2,0.3), (0.4,0.5,0.6)]", AnswerShape::RecLink),
            Err(AnswerError::Arity { expected: 8, found: 2 })
        );
        assert!(matches!(
            parse_triad_answer("axis [(0.1,0.2,0.3), (0.4,0.5,0.6)]", AnswerShape::RegJoint),
            Err(AnswerError::MissingKeyword(_))
        ));
    }

    #[test]
    fn detection_names_and_boxes() {
        let b1 = [np(0.1, 0.1, 0.1); 8];
        let b2 = [np(0.2, 0.3, 0.4); 8];
        let text = format_detection_answer(&[("door", &b1), ("left drawer", &b2)]);
        let ParsedAnswer::Detection(parts) = parse_triad_answer(&text, AnswerShape::Detection).unwrap() else {
            panic!("wrong shape");
        };
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].name.as_deref(), Some("door"));
        assert_eq!(parts[1].name.as_deref(), Some("left drawer"));
        assert_eq!(parts[1].bbox, b2);
    }

    #[test]
    fn action_answer() {
        let b = [np(0.5, 0.5, 0.5); 8];
        let text = format_action_answer(Skill::SlideOut, &b);
        assert_eq!(
            parse_triad_answer(&text, AnswerShape::RecAction).unwrap(),
            ParsedAnswer::ActionBox {
                action: Skill::SlideOut,
                bbox: b
            }
        );
    }

    fn arb_point() -> impl proptest::strategy::Strategy<Value = NormalizedPoint3<f64>> {
        use proptest::prelude::*;
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(u, v, z)| np(u, v, z))
    }

    fn gap(a: &[NormalizedPoint3<f64>], b: &[NormalizedPoint3<f64>]) -> f64 {
        a.iter()
            .zip(b)
            .flat_map(|(p, q)| [(p.u - q.u).abs(), (p.v - q.v).abs(), (p.z - q.z).abs()])
            .fold(0.0, f64::max)
    }

    proptest::proptest! {
        #[test]
        fn every_shape_round_trips(
            bbox in proptest::array::uniform8(arb_point()),
            axis in proptest::array::uniform2(arb_point()),
            skill in 0..Skill::ALL.len(),
            prismatic in proptest::bool::ANY,
        ) {
            let bound = AnswerGrammar::V1.max_round_trip_error() + 1e-12;
            let joint = if prismatic { Articulation::Prismatic } else { Articulation::Revolute };
            let action = Skill::ALL[skill];

            let parsed = parse_triad_answer(&format_detection_answer(&[("lid", &bbox)]), AnswerShape::Detection);
            let Ok(ParsedAnswer::Detection(parts)) = parsed else { panic!("detection") };
            proptest::prop_assert!(gap(&parts[0].bbox, &bbox) <= bound);

            let Ok(ParsedAnswer::Box(b)) = parse_triad_answer(&AnswerGrammar::V1.format_list(&bbox), AnswerShape::RecLink) else { panic!("box") };
            proptest::prop_assert!(gap(&b, &bbox) <= bound);

            let parsed = parse_triad_answer(&format_joint_answer(joint, &axis), AnswerShape::RegJoint);
            let Ok(ParsedAnswer::JointAxis { joint: j, axis: a }) = parsed else { panic!("joint") };
            proptest::prop_assert!(j == joint && gap(&a, &axis) <= bound);

            let parsed = parse_triad_answer(&format_action_answer(action, &bbox), AnswerShape::RecAction);
            let Ok(ParsedAnswer::ActionBox { action: s, bbox: b }) = parsed else { panic!("action") };
            proptest::prop_assert!(s == action && gap(&b, &bbox) <= bound);
        }
    }
}
