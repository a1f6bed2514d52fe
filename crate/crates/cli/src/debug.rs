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
//! Renderer-free debug output: an SVG overlay and a PLY point cloud per view.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use a3kit::annotation::ArticulatedObject;
use a3kit::camera::project_camera_point;
use a3kit::dataset::ViewOutput;
use a3kit::urdf::forward_kinematics;
use a3kit::{Error, Result};

const PALETTE: [(u8, u8, u8); 8] = [
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (23, 190, 207),
];

const BOX_EDGES: [(usize, usize); 12] = [
    (0, 1), (1, 2), (2, 3), (3, 0),
    (4, 5), (5, 6), (6, 7), (7, 4),
    (0, 4), (1, 5), (2, 6), (3, 7),
];

fn color(i: usize) -> (u8, u8, u8) {
    PALETTE[i % PALETTE.len()]
}

/// Writes `debug/<object>/view_NNN.{svg,ply}` under `out_dir`.
pub fn write_view(out_dir: &Path, object: &ArticulatedObject, output: &ViewOutput) -> Result<()> {
    let dir = out_dir.join("debug").join(&output.spec.object_id);
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let stem = format!("view_{:03}", output.spec.index);
    let poses = forward_kinematics(&object.tree, &output.spec.joints)?;
    let points: Vec<(usize, bool, nalgebra::Point3<f64>)> = object
        .geometry
        .links
        .iter()
        .enumerate()
        .flat_map(|(i, lg)| {
            let pose = poses[&lg.link];
            let visible = output.view.visibility.iter().find(|v| v.link == lg.link).map(|v| &v.visible);
            lg.samples
                .iter()
                .enumerate()
                .map(move |(k, p)| (i, visible.is_some_and(|v| v.get(k).copied().unwrap_or(false)), pose * p))
        })
        .collect();

    let svg = render_svg(output, &points);
    let path = dir.join(format!("{stem}.svg"));
    fs::write(&path, svg).map_err(|e| io_err(&path, e))?;

    let ply = render_ply(&points);
    let path = dir.join(format!("{stem}.ply"));
    fs::write(&path, ply).map_err(|e| io_err(&path, e))
}

fn render_svg(output: &ViewOutput, points: &[(usize, bool, nalgebra::Point3<f64>)]) -> String {
    let cam = &output.spec.camera;
    let (w, h) = (f64::from(cam.intrinsics.width), f64::from(cam.intrinsics.height));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for (link, visible, p) in points {
        let proj = project_camera_point(&cam.intrinsics, &cam.pose.world_to_camera(p));
        if !proj.in_front {
            continue;
        }
        let (r, g, b) = if *visible { color(*link) } else { (200, 200, 200) };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="1.2" fill="rgb({r},{g},{b})"/>"#,
            proj.u_px, proj.v_px
        );
    }
    for (k, triad) in output.view.annotations.iter().map(|a| &a.triad).enumerate() {
        let px = |n: &a3kit::NormalizedPoint3| (n.u * w, n.v * h);
        let (r, g, b) = color(k + 3);
        for (a, c) in BOX_EDGES {
            let (p, q) = (px(&triad.box_norm[a]), px(&triad.box_norm[c]));
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="rgb({r},{g},{b})" stroke-width="1.5"/>"#,
                p.0, p.1, q.0, q.1
            );
        }
        let (p, q) = (px(&triad.axis_norm[0]), px(&triad.axis_norm[1]));
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="3"/><circle cx="{:.1}" cy="{:.1}" r="4" fill="black"/>"#,
            p.0, p.1, q.0, q.1, q.0, q.1
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" fill="rgb({r},{g},{b})">{} ({})</text>"#,
            q.0 + 6.0,
            q.1,
            xml_escape(&triad.label.link_name),
            triad.label.joint_kind.as_str()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn render_ply(points: &[(usize, bool, nalgebra::Point3<f64>)]) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        points.len()
    );
    for (link, _, p) in points {
        let (r, g, b) = color(*link);
        let _ = writeln!(s, "{:.6} {:.6} {:.6} {r} {g} {b}", p.x, p.y, p.z);
    }
    s
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
