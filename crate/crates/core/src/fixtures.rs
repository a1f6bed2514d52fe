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
//! Bundled fixture corpus with analytic ground truth, and corpus loading.
//!
//! Each fixture is `<name>.urdf` plus a `<name>.expected.json` sidecar whose
//! triads are computed from the part geometry by `fixtures/generate.py`,
//! independently of this crate.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotation::ArticulatedObject;
use crate::error::{Error, Result};
use crate::primitives::PrimitiveKind;
use crate::urdf::{parse_urdf_file, Articulation, JointConfig, KinematicTree, DEFAULT_SAMPLES_PER_LINK};

pub const FIXTURE_NAMES: [&str; 9] = [
    "door",
    "drawer_cabinet",
    "bottle_cap",
    "laptop",
    "microwave",
    "faucet",
    "scissors",
    "hidden_drawer",
    "knob_panel",
];

/// Category used when a corpus entry carries none.
pub const UNKNOWN_CATEGORY: &str = "Unknown";

/// `$A3KIT_FIXTURES`, else the `fixtures/` directory of the source tree.
pub fn fixtures_dir() -> PathBuf {
    std::env::var_os("A3KIT_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedLink {
    pub joint: String,
    pub kind: Articulation,
    pub link_name: String,
    pub primitive: PrimitiveKind,
    /// Enclosed by the body; never visible from outside.
    pub hidden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTriad {
    pub link: String,
    pub center: [f64; 3],
    /// `None` when the footprint is square and the x axis is arbitrary.
    pub axis_x: Option<[f64; 3]>,
    pub axis_z: [f64; 3],
    pub half_extents: [f64; 3],
    pub axis_p0: [f64; 3],
    pub axis_p1: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedConfiguration {
    pub fraction: f64,
    pub joints: JointConfig,
    pub triads: Vec<ExpectedTriad>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureExpected {
    pub name: String,
    pub category: String,
    pub urdf: String,
    /// Rough direction from the object towards a frontal viewer.
    pub front: [f64; 3],
    pub links: BTreeMap<String, ExpectedLink>,
    pub configurations: Vec<ExpectedConfiguration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureObject {
    pub name: String,
    pub category: String,
    pub urdf_path: PathBuf,
    pub expected: FixtureExpected,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_fixture(name: &str) -> Result<(KinematicTree, FixtureObject)> {
    load_fixture_from(&fixtures_dir(), name)
}

pub fn load_fixture_from(dir: &Path, name: &str) -> Result<(KinematicTree, FixtureObject)> {
    if !FIXTURE_NAMES.contains(&name) {
        return Err(Error::Lookup(format!(
            "unknown fixture `{name}`; available: {}",
            FIXTURE_NAMES.join(", ")
        )));
    }
    let urdf_path = dir.join(format!("{name}.urdf"));
    let expected: FixtureExpected = read_json(&dir.join(format!("{name}.expected.json")))?;
    let tree = parse_urdf_file(&urdf_path)?;
    Ok((
        tree,
        FixtureObject {
            name: name.to_owned(),
            category: expected.category.clone(),
            urdf_path,
            expected,
        },
    ))
}

/// A fixture ready for annotation, sampled with `seed`.
pub fn fixture_object(name: &str, seed: u64) -> Result<ArticulatedObject> {
    let (tree, fixture) = load_fixture(name)?;
    Ok(ArticulatedObject::new(name, fixture.category, tree, DEFAULT_SAMPLES_PER_LINK, seed)?)
}

/// Every bundled fixture, in registry order.
pub fn fixture_corpus(seed: u64) -> Result<Vec<ArticulatedObject>> {
    FIXTURE_NAMES.iter().map(|n| fixture_object(n, seed)).collect()
}

#[derive(Deserialize)]
struct CategoryOnly {
    category: String,
}

#[derive(Deserialize)]
struct PartNetMeta {
    model_cat: String,
}

fn load_urdf_object(path: &Path, seed: u64) -> Result<ArticulatedObject> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("object").to_owned();
    let sidecar = path.with_file_name(format!("{stem}.expected.json"));
    let category = if sidecar.is_file() {
        read_json::<CategoryOnly>(&sidecar)?.category
    } else {
        UNKNOWN_CATEGORY.to_owned()
    };
    let tree = parse_urdf_file(path)?;
    Ok(ArticulatedObject::new(stem, category, tree, DEFAULT_SAMPLES_PER_LINK, seed)?)
}

/// A PartNet-Mobility style entry: `<id>/mobility.urdf` with `meta.json`.
fn load_partnet_object(dir: &Path, seed: u64) -> Result<ArticulatedObject> {
    let id = dir.file_name().and_then(|s| s.to_str()).unwrap_or("object").to_owned();
    let meta = dir.join("meta.json");
    let category = if meta.is_file() {
        read_json::<PartNetMeta>(&meta)?.model_cat
    } else {
        UNKNOWN_CATEGORY.to_owned()
    };
    let tree = parse_urdf_file(dir.join("mobility.urdf"))?;
    Ok(ArticulatedObject::new(id, category, tree, DEFAULT_SAMPLES_PER_LINK, seed)?)
}

/// Loads a single URDF, a directory of URDFs (categories from sidecars), or
/// a PartNet-Mobility checkout (one sub-directory per object), sorted by name.
pub fn load_corpus(path: &Path, seed: u64) -> Result<Vec<ArticulatedObject>> {
    if path.is_file() {
        return Ok(vec![load_urdf_object(path, seed)?]);
    }
    if path.join("mobility.urdf").is_file() {
        return Ok(vec![load_partnet_object(path, seed)?]);
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    let mut objects = Vec::new();
    for entry in entries {
        if entry.is_file() && entry.extension().is_some_and(|e| e.eq_ignore_ascii_case("urdf")) {
            objects.push(load_urdf_object(&entry, seed)?);
        } else if entry.join("mobility.urdf").is_file() {
            objects.push(load_partnet_object(&entry, seed)?);
        }
    }
    if objects.is_empty() {
        return Err(Error::Lookup(format!("no URDF objects under {}", path.display())));
    }
    Ok(objects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::JointKind;

    #[test]
    fn door_is_two_links_with_vertical_hinge() {
        let (tree, fx) = load_fixture("door").unwrap();
        assert_eq!(tree.links.len(), 2);
        assert_eq!(tree.joints.len(), 1);
        let hinge = &tree.joints[0];
        assert_eq!(hinge.kind, JointKind::Revolute);
        assert!((hinge.axis_local.into_inner() - nalgebra::Vector3::z()).norm() < 1e-12);
        assert_eq!(fx.category, "Door");
    }

    #[test]
    fn drawer_cabinet_joint_mix() {
        let (tree, _) = load_fixture("drawer_cabinet").unwrap();
        assert_eq!(tree.links.len(), 4);
        let count = |k| tree.joints.iter().filter(|j| j.kind == k).count();
        assert_eq!(count(JointKind::Prismatic), 2);
        assert_eq!(count(JointKind::Revolute), 1);
    }

    #[test]
    fn bottle_cap_scrolls() {
        let (_, fx) = load_fixture("bottle_cap").unwrap();
        assert_eq!(fx.expected.links["cap"].primitive, PrimitiveKind::Scroll);
        assert_eq!(fx.expected.links["cap"].kind, Articulation::Revolute);
    }

    #[test]
    fn unknown_name_is_lookup_error() {
        assert!(matches!(load_fixture("teapot"), Err(Error::Lookup(_))));
    }

    #[test]
    fn every_fixture_loads_with_five_configurations() {
        for name in FIXTURE_NAMES {
            let (tree, fx) = load_fixture(name).unwrap();
            assert_eq!(fx.expected.configurations.len(), 5, "{name}");
            assert!(tree.movable_links().count() >= 1, "{name}");
            for config in &fx.expected.configurations {
                config.joints.validate(&tree).unwrap();
            }
        }
    }

    #[test]
    fn corpus_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let src = fixtures_dir();
        fs::copy(src.join("door.urdf"), dir.path().join("door.urdf")).unwrap();
        fs::copy(src.join("door.expected.json"), dir.path().join("door.expected.json")).unwrap();
        let partnet = dir.path().join("7128");
        fs::create_dir(&partnet).unwrap();
        fs::copy(src.join("faucet.urdf"), partnet.join("mobility.urdf")).unwrap();
        fs::write(partnet.join("meta.json"), r#"{"model_cat": "Faucet", "anno_id": "x"}"#).unwrap();

        let objects = load_corpus(dir.path(), 0).unwrap();
        let ids: Vec<(&str, &str)> = objects.iter().map(|o| (o.id.as_str(), o.category.as_str())).collect();
        assert_eq!(ids, [("7128", "Faucet"), ("door", "Door")]);
        assert!(matches!(load_corpus(&dir.path().join("7128/meta.json").with_file_name("none"), 0), Err(Error::Io { .. })));
    }
}
