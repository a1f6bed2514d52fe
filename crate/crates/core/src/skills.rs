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
//! Robot skill library and affordance selection.
//!
//! Affordances come from a deterministic rule table by default. A remote
//! client speaking the JSON skill-selection contract can be used instead.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model_io::TransportError;
use crate::urdf::Articulation;

/// The fourteen skills an affordance may name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Skill {
    #[serde(rename = "slide_open")]
    SlideOpen,
    #[serde(rename = "slide_close")]
    SlideClose,
    #[serde(rename = "flap_open")]
    FlapOpen,
    #[serde(rename = "flap_close")]
    FlapClose,
    #[serde(rename = "cap")]
    Cap,
    #[serde(rename = "uncap")]
    Uncap,
    #[serde(rename = "pick")]
    Pick,
    #[serde(rename = "place")]
    Place,
    #[serde(rename = "slide_in")]
    SlideIn,
    #[serde(rename = "slide_out")]
    SlideOut,
    #[serde(rename = "wipe")]
    Wipe,
    #[serde(rename = "press")]
    Press,
    #[serde(rename = "rotate")]
    Rotate,
    #[serde(rename = "StatusComplete")]
    StatusComplete,
}

impl Skill {
    pub const ALL: [Skill; 14] = [
        Skill::SlideOpen,
        Skill::SlideClose,
        Skill::FlapOpen,
        Skill::FlapClose,
        Skill::Cap,
        Skill::Uncap,
        Skill::Pick,
        Skill::Place,
        Skill::SlideIn,
        Skill::SlideOut,
        Skill::Wipe,
        Skill::Press,
        Skill::Rotate,
        Skill::StatusComplete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Skill::SlideOpen => "slide_open",
            Skill::SlideClose => "slide_close",
            Skill::FlapOpen => "flap_open",
            Skill::FlapClose => "flap_close",
            Skill::Cap => "cap",
            Skill::Uncap => "uncap",
            Skill::Pick => "pick",
            Skill::Place => "place",
            Skill::SlideIn => "slide_in",
            Skill::SlideOut => "slide_out",
            Skill::Wipe => "wipe",
            Skill::Press => "press",
            Skill::Rotate => "rotate",
            Skill::StatusComplete => "StatusComplete",
        }
    }

    /// Imperative sentence for an action instruction prompt.
    pub fn instruction(self, link_name: &str) -> String {
        match self {
            Skill::SlideOpen => format!("Slide the {link_name} open."),
            Skill::SlideClose => format!("Slide the {link_name} closed."),
            Skill::FlapOpen => format!("Open the {link_name}."),
            Skill::FlapClose => format!("Close the {link_name}."),
            Skill::Cap => format!("Put the {link_name} back on."),
            Skill::Uncap => format!("Take off the {link_name}."),
            Skill::Pick => format!("Pick up the {link_name}."),
            Skill::Place => format!("Place the {link_name} down."),
            Skill::SlideIn => format!("Push the {link_name} in."),
            Skill::SlideOut => format!("Pull the {link_name} out."),
            Skill::Wipe => format!("Wipe the {link_name}."),
            Skill::Press => format!("Press the {link_name}."),
            Skill::Rotate => format!("Turn the {link_name}."),
            Skill::StatusComplete => format!("Leave the {link_name} as it is."),
        }
    }
}

impl fmt::Display for Skill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSkill(pub String);

impl fmt::Display for UnknownSkill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` is not in the skill library", self.0)
    }
}

impl std::error::Error for UnknownSkill {}

impl FromStr for Skill {
    type Err = UnknownSkill;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        Skill::ALL
            .into_iter()
            .find(|skill| skill.as_str().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| UnknownSkill(trimmed.to_owned()))
    }
}

/// Coarse articulation state. Caps read `on` as closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    #[serde(alias = "on")]
    Closed,
    #[serde(alias = "off")]
    Open,
}

impl LinkState {
    /// Closed in the lower half of the travel range (inclusive of the middle).
    pub fn from_travel(value: f64, lower: f64, upper: f64) -> Self {
        if upper <= lower || value - lower <= 0.5 * (upper - lower) {
            LinkState::Closed
        } else {
            LinkState::Open
        }
    }
}

/// Readable part name from a link identifier: `left_drawer_1` -> `left drawer`.
pub fn semantic_name(link_id: &str) -> String {
    let words: Vec<&str> = link_id
        .split(|c: char| c == '_' || c == '-' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .collect();
    let keep = match words.split_last() {
        Some((last, rest)) if !rest.is_empty() && last.chars().all(|c| c.is_ascii_digit()) => rest,
        _ => &words[..],
    };
    keep.join(" ").to_lowercase()
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True when `phrase` occurs in `text` as a run of whole words.
pub(crate) fn contains_phrase(text: &str, phrase: &str) -> bool {
    let hay = words(text);
    let needle = words(phrase);
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle.as_slice())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillRule {
    /// Object category, compared case-insensitively. `None` matches any.
    #[serde(default)]
    pub category: Option<String>,
    /// Whole-word phrase that must occur in the link name. `None` matches any.
    #[serde(default)]
    pub link_keyword: Option<String>,
    #[serde(default)]
    pub joint: Option<Articulation>,
    #[serde(default)]
    pub state: Option<LinkState>,
    pub actions: Vec<Skill>,
}

impl SkillRule {
    fn matches(&self, category: &str, link_name: &str, joint: Articulation, state: LinkState) -> bool {
        self.category.as_deref().is_none_or(|c| c.eq_ignore_ascii_case(category))
            && self.link_keyword.as_deref().is_none_or(|k| contains_phrase(link_name, k))
            && self.joint.is_none_or(|j| j == joint)
            && self.state.is_none_or(|s| s == state)
    }
}

/// Ordered rules; the first match wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillRuleTable {
    pub rules: Vec<SkillRule>,
}

fn rule(keyword: &str, joint: Articulation, state: Option<LinkState>, actions: &[Skill]) -> SkillRule {
    SkillRule {
        category: None,
        link_keyword: Some(keyword.to_owned()),
        joint: Some(joint),
        state,
        actions: actions.to_vec(),
    }
}

impl Default for SkillRuleTable {
    fn default() -> Self {
        use Articulation::{Prismatic, Revolute};
        use LinkState::{Closed, Open};
        let mut rules = vec![
            rule("cap", Revolute, Some(Closed), &[Skill::Uncap, Skill::Rotate]),
            rule("cap", Revolute, Some(Open), &[Skill::Cap, Skill::Rotate]),
            rule("lid", Revolute, Some(Closed), &[Skill::FlapOpen]),
            rule("lid", Revolute, Some(Open), &[Skill::FlapClose]),
        ];
        for keyword in ["knob", "handle", "lever", "wheel", "blade", "switch"] {
            rules.push(rule(keyword, Revolute, None, &[Skill::Rotate]));
        }
        for keyword in ["door", "screen", "flap", "cover", "window"] {
            rules.push(rule(keyword, Revolute, Some(Closed), &[Skill::FlapOpen]));
            rules.push(rule(keyword, Revolute, Some(Open), &[Skill::FlapClose]));
        }
        rules.extend([
            rule("drawer", Prismatic, Some(Closed), &[Skill::SlideOut]),
            rule("drawer", Prismatic, Some(Open), &[Skill::SlideIn]),
            rule("button", Prismatic, None, &[Skill::Press]),
            rule("key", Prismatic, None, &[Skill::Press]),
            rule("door", Prismatic, Some(Closed), &[Skill::SlideOpen]),
            rule("door", Prismatic, Some(Open), &[Skill::SlideClose]),
        ]);
        Self { rules }
    }
}

impl SkillRuleTable {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Fallback when no rule matches.
pub fn default_actions(joint: Articulation) -> Vec<Skill> {
    match joint {
        Articulation::Prismatic => vec![Skill::SlideIn, Skill::SlideOut],
        Articulation::Revolute => vec![Skill::FlapOpen, Skill::FlapClose],
    }
}

pub fn select_actions(
    rules: &SkillRuleTable,
    category: &str,
    link_name: &str,
    joint: Articulation,
    state: LinkState,
) -> Vec<Skill> {
    rules
        .rules
        .iter()
        .find(|r| !r.actions.is_empty() && r.matches(category, link_name, joint, state))
        .map(|r| r.actions.clone())
        .unwrap_or_else(|| default_actions(joint))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillLinkInfo {
    pub name: String,
    pub joint: Articulation,
    pub state: LinkState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillTask {
    pub task: String,
    pub actions: Vec<Skill>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillRequest {
    pub category: String,
    pub links: Vec<SkillLinkInfo>,
    pub history: Vec<SkillTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillResponse {
    pub tasks: Vec<SkillTask>,
}

/// HTTP client for a remote skill-selection service.
///
/// Responses naming skills outside the library are rejected as protocol
/// violations.
#[derive(Debug, Clone)]
pub struct RemoteSkillClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteSkillClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn select(&self, request: &SkillRequest) -> Result<SkillResponse, TransportError> {
        let response = self
            .agent
            .post(&self.endpoint)
            .send_json(request)
            .map_err(TransportError::from_ureq)?;
        let body = response
            .into_string()
            .map_err(|e| TransportError::Protocol(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| TransportError::Protocol(format!("bad skill response: {e}")))
    }
}
