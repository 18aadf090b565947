//! Procedural test scenes: closed solids, open tubes, flat sheets and two
//! self-penetrating surfaces (a torus pushed through itself and a sheet with a
//! curled pleat that folds back through itself).
//!
//! Parametric grids use fractional sample offsets so that no vertex lands on a
//! symmetry plane of the shape; mirrored samples would otherwise create exact
//! edge-edge contacts along the intersection curve.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::mesh::TriMesh;
use crate::Vec3;

fn build(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> TriMesh {
    TriMesh::new(vertices, faces).expect("fixture topology is valid")
}

pub fn single_triangle() -> TriMesh {
    build(
        vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
        vec![[0, 1, 2]],
    )
}

/// Unit cube `[0,1]^3`, 8 vertices, 12 outward triangles.
pub fn unit_cube() -> TriMesh {
    let v = [
        (0., 0., 0.),
        (1., 0., 0.),
        (1., 1., 0.),
        (0., 1., 0.),
        (0., 0., 1.),
        (1., 0., 1.),
        (1., 1., 1.),
        (0., 1., 1.),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 7, 6],
        [3, 6, 2],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    build(
        v.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect(),
        faces,
    )
}

/// Unit cube `[0,1]^3` with an `n` by `n` grid of quads on every side,
/// outward winding.
pub fn subdivided_cube(n: usize) -> TriMesh {
    assert!(n >= 1);
    let mut v: Vec<Vec3> = Vec::new();
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut faces = Vec::with_capacity(12 * n * n);
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for high in [false, true] {
            for i in 0..n {
                for j in 0..n {
                    let q = [(0, 0), (1, 0), (1, 1), (0, 1)].map(|(di, dj)| {
                        let mut p = [0; 3];
                        p[axis] = if high { n } else { 0 };
                        p[u] = i + di;
                        p[w] = j + dj;
                        *index.entry(p).or_insert_with(|| {
                            v.push(Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) / n as f64);
                            v.len() - 1
                        })
                    });
                    if high {
                        faces.extend([[q[0], q[1], q[2]], [q[0], q[2], q[3]]]);
                    } else {
                        faces.extend([[q[0], q[2], q[1]], [q[0], q[3], q[2]]]);
                    }
                }
            }
        }
    }
    build(v, faces)
}

/// Regular tetrahedron with the given edge length, outward winding.
pub fn regular_tetrahedron(edge: f64) -> TriMesh {
    let s = edge / (2.0 * 2f64.sqrt());
    let v: Vec<Vec3> = [(1., 1., 1.), (1., -1., -1.), (-1., 1., -1.), (-1., -1., 1.)]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z) * s)
        .collect();
    let mut faces = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    for f in &mut faces {
        let n = (v[f[1]] - v[f[0]]).cross(&(v[f[2]] - v[f[0]]));
        let centroid = (v[f[0]] + v[f[1]] + v[f[2]]) / 3.0;
        if n.dot(&centroid) < 0.0 {
            f.swap(1, 2);
        }
    }
    build(v, faces)
}

fn grid_faces(nu: usize, nv: usize, wrap_u: bool, wrap_v: bool) -> Vec<[usize; 3]> {
    let cols = if wrap_u { nu } else { nu + 1 };
    let rows = if wrap_v { nv } else { nv + 1 };
    let id = |i: usize, j: usize| (j % rows) * cols + (i % cols);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let a = id(i, j);
            let b = id(i + 1, j);
            let c = id(i + 1, j + 1);
            let d = id(i, j + 1);
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    faces
}

/// Flat sheet in the `z = 0` plane with `+z` normals; `nx * ny` quads.
pub fn grid_sheet(nx: usize, ny: usize, width: f64, height: f64) -> TriMesh {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            v.push(Vec3::new(
                width * i as f64 / nx as f64,
                height * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    build(v, grid_faces(nx, ny, false, false))
}

/// Open cylinder along `z` with `rings` vertex rings of `around` vertices.
pub fn open_tube(around: usize, rings: usize, radius: f64, length: f64) -> TriMesh {
    assert!(around >= 3 && rings >= 2);
    let mut v = Vec::with_capacity(around * rings);
    for j in 0..rings {
        let z = length * j as f64 / (rings - 1) as f64;
        for i in 0..around {
            let a = 2.0 * PI * i as f64 / around as f64;
            v.push(Vec3::new(radius * a.cos(), radius * a.sin(), z));
        }
    }
    build(v, grid_faces(around, rings - 1, true, false))
}

/// Two triangles crossing at right angles through each other's interiors.
/// Both edges of the vertical triangle pierce the horizontal one.
pub fn crossing_triangles() -> TriMesh {
    build(
        vec![
            Vec3::new(-0.5, -0.3, 0.0),
            Vec3::new(0.6, -0.3, 0.0),
            Vec3::new(0.0, 0.7, 0.0),
            Vec3::new(-0.2, 0.1, -0.5),
            Vec3::new(0.3, 0.1, -0.5),
            Vec3::new(0.05, 0.1, 0.6),
        ],
        vec![[0, 1, 2], [3, 4, 5]],
    )
}

/// Two triangles sharing vertex 0 whose intersection segment ends at it.
pub fn loop_vertex_pair() -> TriMesh {
    build(
        vec![
            Vec3::zeros(),
            Vec3::new(1.0, -0.4, 0.0),
            Vec3::new(1.0, 0.5, 0.0),
            Vec3::new(0.7, 0.1, 0.3),
            Vec3::new(0.6, -0.05, -0.35),
        ],
        vec![[0, 1, 2], [0, 3, 4]],
    )
}

/// A planar ring whose inner hole is a regular hexagon on the unit circle.
pub fn hexagon_hole() -> TriMesh {
    let mut v = Vec::new();
    for k in 0..6 {
        let a = PI / 3.0 * k as f64;
        v.push(Vec3::new(a.cos(), a.sin(), 0.0));
    }
    for k in 0..6 {
        let a = PI / 3.0 * k as f64;
        v.push(Vec3::new(2.0 * a.cos(), 2.0 * a.sin(), 0.0));
    }
    let mut faces = Vec::new();
    for k in 0..6 {
        let (i0, i1) = (k, (k + 1) % 6);
        let (o0, o1) = (6 + k, 6 + (k + 1) % 6);
        faces.push([i0, o0, o1]);
        faces.push([i0, o1, i1]);
    }
    build(v, faces)
}

#[derive(Debug, Clone, Copy)]
pub struct TorusParams {
    pub around: usize,
    pub tube: usize,
    /// Semi-axes of the elliptical centre curve.
    pub center_x: f64,
    pub center_y: f64,
    /// In-plane tube radius at the narrow ends and its extra width at the
    /// long sides (`rr = base + extra * cos^2 phi`).
    pub radial_base: f64,
    pub radial_extra: f64,
    pub vertical: f64,
}

impl Default for TorusParams {
    fn default() -> Self {
        Self {
            around: 96,
            tube: 12,
            center_x: 0.3,
            center_y: 1.0,
            radial_base: 0.04,
            radial_extra: 0.31,
            vertical: 0.25,
        }
    }
}

/// A closed torus whose two long sides bulge into each other: one closed
/// intersection curve in space, seen once on each side of the tube.
pub fn torus_through_itself(p: TorusParams) -> TriMesh {
    let mut v = Vec::with_capacity(p.around * p.tube);
    for j in 0..p.tube {
        let theta = 2.0 * PI * (j as f64 + 0.21) / p.tube as f64;
        for i in 0..p.around {
            let phi = 2.0 * PI * (i as f64 + 0.37) / p.around as f64;
            let c = Vec3::new(p.center_x * phi.cos(), p.center_y * phi.sin(), 0.0);
            let n = Vec3::new(p.center_y * phi.cos(), p.center_x * phi.sin(), 0.0).normalize();
            let rr = p.radial_base + p.radial_extra * phi.cos().powi(2);
            // the tilt keeps rings on opposite sides of the crossing out of a shared plane
            let z = p.vertical * theta.sin() + 0.03 * (phi + 0.4).sin();
            v.push(c + n * (rr * theta.cos()) + Vec3::z() * z);
        }
    }
    build(v, grid_faces(p.around, p.tube, true, true))
}

#[derive(Debug, Clone, Copy)]
pub struct FoldParams {
    pub nx: usize,
    pub ny: usize,
    /// Curl amplitude at the middle of the sheet; values above 1 make the
    /// cross-section loop back through itself.
    pub curl: f64,
    pub scale: f64,
}

impl Default for FoldParams {
    fn default() -> Self {
        Self {
            nx: 20,
            ny: 20,
            curl: 2.0,
            scale: 0.1,
        }
    }
}

/// Parameter range of the pleated sheet along the curl direction.
const FOLD_S: (f64, f64) = (-4.3, 4.7);
const FOLD_V: f64 = 2.0;

fn fold_point(s: f64, v: f64, curl: f64) -> Vec3 {
    let r = curl * (1.0 - (v / FOLD_V).powi(2));
    if s.abs() <= PI {
        // the sideways sway keeps grid rows from lying in a shared plane
        Vec3::new(s - r * s.sin(), v + 0.1 * r * s.sin(), 0.5 * r * (1.0 + s.cos()))
    } else {
        Vec3::new(s, v, 0.0)
    }
}

/// Sheet with a curled pleat whose cross-section is a prolate cycloid arch:
/// where the curl amplitude exceeds one the sheet passes back through itself,
/// giving a single intersection path that closes through loop vertices. The
/// rest state is the flat sheet.
pub fn folded_sheet(p: FoldParams) -> TriMesh {
    let (s0, s1) = FOLD_S;
    let mut v = Vec::with_capacity((p.nx + 1) * (p.ny + 1));
    let mut rest = Vec::with_capacity(v.capacity());
    for j in 0..=p.ny {
        let t = -FOLD_V + 2.0 * FOLD_V * j as f64 / p.ny as f64;
        for i in 0..=p.nx {
            let s = s0 + (s1 - s0) * i as f64 / p.nx as f64;
            v.push(fold_point(s, t, p.curl) * p.scale);
            rest.push(fold_point(s, t, 0.0) * p.scale);
        }
    }
    build(v, grid_faces(p.nx, p.ny, false, false))
        .with_rest(rest)
        .expect("same length")
}

/// Indices of the vertices on the `s = s_min` edge of [`folded_sheet`].
pub fn folded_sheet_pinned_edge(p: FoldParams) -> Vec<usize> {
    (0..=p.ny).map(|j| j * (p.nx + 1)).collect()
}
