#!/usr/bin/env python3
# Copyright 2026 The a3kit Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the bundled fixture corpus and its ground-truth sidecars.

Every object is a fixed body plus movable parts built from boxes, cylinders
and two small mesh files. Expected triads are computed here from the part
geometry alone (shapely supplies the minimum rotated rectangle), so they act
as an independent check on the Rust annotation code.

Run from this directory:  python3 generate.py
"""

import json
import math
from pathlib import Path

import numpy as np
from shapely.geometry import MultiPoint

HERE = Path(__file__).resolve().parent
CYLINDER_SEGMENTS = 32
MIN_HALF_EXTENT = 1e-4
FLAT_AXIS_EXTENT = 1e-3
FRACTIONS = [0.0, 0.25, 0.5, 0.75, 1.0]


# ---------------------------------------------------------------- geometry

def rpy_matrix(r, p, y):
    cr, sr, cp, sp, cy, sy = math.cos(r), math.sin(r), math.cos(p), math.sin(p), math.cos(y), math.sin(y)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


def axis_angle(axis, angle):
    k = np.asarray(axis, float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * kx @ kx


def box_tris(size):
    hx, hy, hz = (s / 2 for s in size)
    v = np.array([[sx * hx, sy * hy, sz * hz] for sz in (-1, 1) for sy in (-1, 1) for sx in (-1, 1)])
    faces = [(0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4), (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5)]
    tris = []
    for a, b, c, d in faces:
        tris += [(a, b, c), (a, c, d)]
    return v, tris


def cylinder_tris(radius, length):
    n = CYLINDER_SEGMENTS
    h = length / 2
    v = [[radius * math.cos(2 * math.pi * k / n), radius * math.sin(2 * math.pi * k / n), z] for z in (-h, h) for k in range(n)]
    v += [[0, 0, -h], [0, 0, h]]
    bc, tc = 2 * n, 2 * n + 1
    tris = []
    for k in range(n):
        nx = (k + 1) % n
        tris += [(k, nx, n + nx), (k, n + nx, n + k), (bc, nx, k), (tc, n + k, n + nx)]
    return np.array(v, float), tris


class Visual:
    def __init__(self, kind, xyz=(0, 0, 0), rpy=(0, 0, 0), **params):
        self.kind, self.xyz, self.rpy, self.params = kind, xyz, rpy, params

    def triangles(self):
        if self.kind == "box":
            v, t = box_tris(self.params["size"])
        elif self.kind == "cylinder":
            v, t = cylinder_tris(self.params["radius"], self.params["length"])
        else:
            v, t = np.array(self.params["vertices"], float), self.params["faces"]
        v = v @ rpy_matrix(*self.rpy).T + np.asarray(self.xyz, float)
        return v, t

    def xml(self):
        origin = f'<origin xyz="{fmt(self.xyz)}" rpy="{fmt(self.rpy)}"/>'
        if self.kind == "box":
            geom = f'<box size="{fmt(self.params["size"])}"/>'
        elif self.kind == "cylinder":
            geom = f'<cylinder radius="{self.params["radius"]}" length="{self.params["length"]}"/>'
        else:
            geom = f'<mesh filename="package://fixtures/meshes/{self.params["file"]}"/>'
        return f"    <visual>\n      {origin}\n      <geometry>{geom}</geometry>\n    </visual>"


def fmt(values):
    return " ".join(repr(float(x)) for x in values)


def link_mesh(visuals):
    verts, tris = [], []
    for vis in visuals:
        v, t = vis.triangles()
        off = sum(len(x) for x in verts)
        verts.append(v)
        tris += [(a + off, b + off, c + off) for a, b, c in t]
    return np.vstack(verts), tris


def area_centroid(v, tris):
    total, acc = 0.0, np.zeros(3)
    for a, b, c in tris:
        area = 0.5 * np.linalg.norm(np.cross(v[b] - v[a], v[c] - v[a]))
        total += area
        acc += area * (v[a] + v[b] + v[c]) / 3
    return acc / total


def plane_basis(z):
    helper = np.array([1.0, 0, 0]) if abs(z[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(helper, z)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(z, e1)


def fit_box(v, tris, axis):
    """Box frame and half extents in the link frame."""
    z = np.asarray(axis, float)
    z = z / np.linalg.norm(z)
    c = area_centroid(v, tris)
    e1, e2 = plane_basis(z)
    rect = MultiPoint([(p @ e1, p @ e2) for p in v]).minimum_rotated_rectangle
    pts = np.array(rect.exterior.coords)[:4]
    edges = [pts[1] - pts[0], pts[2] - pts[1]]
    long = max(edges, key=np.linalg.norm)
    x = long[0] * e1 + long[1] * e2
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    half = [max(MIN_HALF_EXTENT, float(np.max(np.abs((v - c) @ a)))) for a in (x, y, z)]
    return c, x, y, z, half


# ---------------------------------------------------------------- fixtures

class Joint:
    def __init__(self, name, kind, child, xyz, axis, limits=None, rpy=(0, 0, 0)):
        self.name, self.kind, self.child = name, kind, child
        self.xyz, self.rpy, self.axis, self.limits = xyz, rpy, axis, limits

    def travel(self):
        return (-math.pi, math.pi) if self.kind == "continuous" else self.limits

    def xml(self):
        lim = ""
        if self.limits is not None:
            lim = f'\n    <limit lower="{self.limits[0]!r}" upper="{self.limits[1]!r}" effort="10" velocity="1"/>'
        return (
            f'  <joint name="{self.name}" type="{self.kind}">\n'
            f'    <parent link="base"/>\n    <child link="{self.child}"/>\n'
            f'    <origin xyz="{fmt(self.xyz)}" rpy="{fmt(self.rpy)}"/>\n'
            f'    <axis xyz="{fmt(self.axis)}"/>{lim}\n  </joint>'
        )


def box(size, xyz=(0, 0, 0), rpy=(0, 0, 0)):
    return Visual("box", xyz, rpy, size=size)


def cyl(radius, length, xyz=(0, 0, 0), rpy=(0, 0, 0)):
    return Visual("cylinder", xyz, rpy, radius=radius, length=length)


MICROWAVE_BODY = box_tris((0.35, 0.5, 0.3))
BLADE = (
    [[0.02, -0.01, 0.0], [0.15, -0.005, 0.0], [0.15, 0.005, 0.0], [0.02, 0.01, 0.0]],
    [(0, 1, 2), (0, 2, 3)],
)


def fixtures():
    half_pi = 1.5707963267948966
    yield dict(
        name="door", category="Door", front=[1, 0, 0],
        links={"base": [box((0.1, 0.1, 1.0), (0, -0.36, 0))], "door": [box((0.03, 0.6, 0.9), (0, 0.31, 0))]},
        joints=[Joint("door_hinge", "revolute", "door", (0, -0.28, 0), (0, 0, 1), (0.0, half_pi))],
    )
    yield dict(
        name="drawer_cabinet", category="StorageFurniture", front=[1, 0, 0.3],
        links={
            "base": [box((0.5, 0.6, 0.8), (0, 0, 0.4))],
            "drawer_1": [box((0.2, 0.45, 0.15))],
            "drawer_2": [box((0.2, 0.45, 0.15))],
            "door": [box((0.02, 0.55, 0.35), (0, 0.285, 0))],
        },
        joints=[
            Joint("drawer_1_slide", "prismatic", "drawer_1", (0.38, 0, 0.7), (1, 0, 0), (0.0, 0.3)),
            Joint("drawer_2_slide", "prismatic", "drawer_2", (0.38, 0, 0.5), (1, 0, 0), (0.0, 0.3)),
            Joint("door_hinge", "revolute", "door", (0.29, -0.285, 0.205), (0, 0, -1), (0.0, half_pi)),
        ],
    )
    yield dict(
        name="bottle_cap", category="Bottle", front=[1, 0, 0.6],
        links={"base": [cyl(0.04, 0.2, (0, 0, 0.1))], "cap": [cyl(0.02, 0.025)]},
        joints=[Joint("cap_twist", "continuous", "cap", (0, 0, 0.2425), (0, 0, 1))],
    )
    yield dict(
        name="laptop", category="Laptop", front=[0, -1, 0.5],
        links={"base": [box((0.3, 0.22, 0.02), (0, 0, 0.01))], "screen": [box((0.3, 0.01, 0.2), (0, 0.005, 0.115))]},
        joints=[Joint("screen_hinge", "revolute", "screen", (0, 0.14, 0.05), (-1, 0, 0), (0.0, 1.2))],
    )
    yield dict(
        name="microwave", category="Microwave", front=[1, 0, 0.2],
        links={
            "base": [Visual("mesh", (0, 0, 0.15), file="microwave_body.stl",
                            vertices=MICROWAVE_BODY[0], faces=MICROWAVE_BODY[1])],
            "door": [box((0.02, 0.45, 0.26), (0, 0.235, 0))],
        },
        joints=[Joint("door_hinge", "revolute", "door", (0.215, -0.24, 0.15), (0, 0, -1), (0.0, half_pi))],
    )
    yield dict(
        name="faucet", category="Faucet", front=[1, 0.3, 0.6],
        links={"base": [box((0.06, 0.06, 0.25), (0, 0, 0.125))], "handle": [box((0.15, 0.03, 0.02), (0.085, 0, 0))]},
        joints=[Joint("handle_turn", "revolute", "handle", (0, 0, 0.29), (0, 0, 1), (-0.8, 0.8))],
    )
    yield dict(
        name="scissors", category="Scissors", front=[0, 0, 1],
        links={
            "base": [box((0.08, 0.04, 0.01), (-0.06, 0, 0))],
            "blade": [Visual("mesh", file="scissor_blade.obj", vertices=BLADE[0], faces=BLADE[1])],
        },
        joints=[Joint("blade_pivot", "revolute", "blade", (0, 0, 0.03), (0, 0, 1), (-0.5, 0.5))],
    )
    wall = 0.02
    yield dict(
        name="hidden_drawer", category="StorageFurniture", front=[1, 0, 0.3], hidden=["drawer"],
        links={
            "base": [
                box((0.4, 0.4, wall), (0, 0, wall / 2)),
                box((0.4, 0.4, wall), (0, 0, 0.4 - wall / 2)),
                box((wall, 0.4, 0.4 - 2 * wall), (0.2 - wall / 2, 0, 0.2)),
                box((wall, 0.4, 0.4 - 2 * wall), (-0.2 + wall / 2, 0, 0.2)),
                box((0.4 - 2 * wall, wall, 0.4 - 2 * wall), (0, 0.2 - wall / 2, 0.2)),
                box((0.4 - 2 * wall, wall, 0.4 - 2 * wall), (0, -0.2 + wall / 2, 0.2)),
            ],
            "drawer": [box((0.25, 0.25, 0.1))],
            "lid": [box((0.38, 0.4, 0.02), (0.2, 0, 0))],
        },
        joints=[
            Joint("drawer_slide", "prismatic", "drawer", (0, 0, 0.15), (1, 0, 0), (0.0, 0.02)),
            Joint("lid_hinge", "revolute", "lid", (-0.19, 0, 0.44), (0, -1, 0), (0.0, 1.2)),
        ],
    )
    yield dict(
        name="knob_panel", category="Stove", front=[1, 0, 0.2],
        links={"base": [box((0.05, 0.4, 0.2), (0, 0, 0.1))], "knob": [cyl(0.025, 0.03, rpy=(0, half_pi, 0))]},
        joints=[Joint("knob_turn", "continuous", "knob", (0.07, 0, 0.1), (1, 0, 0))],
    )


# ---------------------------------------------------------------- writers

def urdf_text(fx):
    parts = [f'<?xml version="1.0"?>\n<robot name="{fx["name"]}">']
    for name, visuals in fx["links"].items():
        parts.append(f'  <link name="{name}">\n' + "\n".join(v.xml() for v in visuals) + "\n  </link>")
    parts += [j.xml() for j in fx["joints"]]
    parts.append("</robot>\n")
    return "\n".join(parts)


def semantic_name(link):
    tokens = link.replace("-", "_").split("_")
    if len(tokens) > 1 and tokens[-1].isdigit():
        tokens = tokens[:-1]
    return " ".join(tokens).lower()


def primitive(kind, name):
    if kind == "prismatic":
        return "slide"
    words = name.split()
    if "cap" in words or "knob" in words or "scroll button" in name:
        return "scroll"
    return "rotate"


def expected(fx):
    links, configs = {}, []
    for j in fx["joints"]:
        kind = "prismatic" if j.kind == "prismatic" else "revolute"
        name = semantic_name(j.child)
        links[j.child] = dict(joint=j.name, kind=kind, link_name=name, primitive=primitive(kind, name),
                              hidden=j.child in fx.get("hidden", []))
    for f in FRACTIONS:
        values, triads = {}, []
        for j in fx["joints"]:
            lo, hi = j.travel()
            q = lo + f * (hi - lo)
            values[j.name] = q
            v, t = link_mesh(fx["links"][j.child])
            c, x, y, z, half = fit_box(v, t, j.axis)
            r0 = rpy_matrix(*j.rpy)
            o = np.asarray(j.xyz, float)
            if j.kind == "prismatic":
                rot, trans = r0, o + r0 @ (z * q)
            else:
                rot, trans = r0 @ axis_angle(j.axis, q), o
            c_w = rot @ c + trans
            d = r0 @ z
            foot = c_w if j.kind == "prismatic" else o + d * ((c_w - o) @ d)
            hl = max(half[0], half[2]) if half[2] < FLAT_AXIS_EXTENT else half[2]
            symmetric = abs(half[0] - half[1]) < 1e-6
            triads.append(dict(
                link=j.child,
                center=(c_w).tolist(),
                axis_x=None if symmetric else (rot @ x).tolist(),
                axis_z=(rot @ z).tolist(),
                half_extents=half,
                axis_p0=(foot - d * hl).tolist(),
                axis_p1=(foot + d * hl).tolist(),
            ))
        configs.append(dict(fraction=f, joints=values, triads=triads))
    return dict(name=fx["name"], category=fx["category"], urdf=f'{fx["name"]}.urdf', front=fx["front"],
                links=links, configurations=configs)


def write_meshes():
    v, t = MICROWAVE_BODY
    lines = ["solid microwave_body"]
    for a, b, c in t:
        n = np.cross(v[b] - v[a], v[c] - v[a])
        n /= np.linalg.norm(n)
        lines.append(f"  facet normal {n[0]:.6f} {n[1]:.6f} {n[2]:.6f}\n    outer loop")
        lines += [f"      vertex {p[0]:.6f} {p[1]:.6f} {p[2]:.6f}" for p in (v[a], v[b], v[c])]
        lines.append("    endloop\n  endfacet")
    lines.append("endsolid microwave_body\n")
    (HERE / "meshes" / "microwave_body.stl").write_text("\n".join(lines))

    verts, faces = BLADE
    obj = ["# thin scissor blade, zero thickness"]
    obj += [f"v {x} {y} {z}" for x, y, z in verts]
    obj += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    (HERE / "meshes" / "scissor_blade.obj").write_text("\n".join(obj) + "\n")


def main():
    (HERE / "meshes").mkdir(exist_ok=True)
    write_meshes()
    for fx in fixtures():
        (HERE / f'{fx["name"]}.urdf').write_text(urdf_text(fx))
        text = json.dumps(expected(fx), indent=2) + "\n"
        (HERE / f'{fx["name"]}.expected.json').write_text(text)
        print("wrote", fx["name"])


if __name__ == "__main__":
    main()
