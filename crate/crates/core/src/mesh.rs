//! Indexed triangle meshes and the topology queries shared by the pipeline.
//!
//! Faces are wound counterclockwise when seen from outside, and that winding is
//! the only orientation information the rest of the crate relies on.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    rest_vertices: Option<Vec<Vec3>>,
}

impl TriMesh {
    /// Builds a mesh after checking index bounds, repeated indices and
    /// duplicated faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let n = vertices.len();
        let mut seen = HashSet::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::InvalidFace {
                    face: fi,
                    reason: format!("index out of range for {n} vertices"),
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidFace {
                    face: fi,
                    reason: "repeated vertex index".into(),
                });
            }
            if !seen.insert(canonical_face(*f)) {
                return Err(Error::InvalidFace {
                    face: fi,
                    reason: "duplicate of an earlier face".into(),
                });
            }
        }
        Ok(Self {
            vertices,
            faces,
            rest_vertices: None,
        })
    }

    pub fn with_rest(mut self, rest: Vec<Vec3>) -> Result<Self> {
        if rest.len() != self.vertices.len() {
            return Err(Error::RestLength {
                expected: self.vertices.len(),
                got: rest.len(),
            });
        }
        self.rest_vertices = Some(rest);
        Ok(self)
    }

    /// Uses the current positions as the rest state.
    pub fn rest_from_current(self) -> Self {
        let rest = self.vertices.clone();
        Self {
            rest_vertices: Some(rest),
            ..self
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn rest_vertices(&self) -> Option<&[Vec3]> {
        self.rest_vertices.as_deref()
    }

    /// Rest positions, falling back to the current ones.
    pub fn rest_or_current(&self) -> &[Vec3] {
        self.rest_vertices.as_deref().unwrap_or(&self.vertices)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Same topology and rest state, new current positions.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() != self.vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} positions, got {}",
                self.vertices.len(),
                positions.len()
            )));
        }
        Ok(Self {
            vertices: positions,
            faces: self.faces.clone(),
            rest_vertices: self.rest_vertices.clone(),
        })
    }

    pub fn map_positions(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(&f).collect(),
            faces: self.faces.clone(),
            rest_vertices: self
                .rest_vertices
                .as_ref()
                .map(|r| r.iter().map(&f).collect()),
        }
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        self.map_positions(|p| p + offset)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map_positions(|p| p * s)
    }

    /// Disjoint union; the other mesh's indices are shifted past ours.
    pub fn merged(&self, other: &TriMesh) -> Self {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        let rest_vertices = match (&self.rest_vertices, &other.rest_vertices) {
            (None, None) => None,
            _ => {
                let mut r = self.rest_or_current().to_vec();
                r.extend_from_slice(other.rest_or_current());
                Some(r)
            }
        };
        Self {
            vertices,
            faces,
            rest_vertices,
        }
    }

    pub fn face_positions(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.face_positions(f);
        triangle_area(&a, &b, &c)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn topology(&self) -> EdgeTopology {
        EdgeTopology::new(&self.faces)
    }

    /// Sorted list of undirected edges.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        self.topology().edges().collect()
    }
}

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

fn canonical_face(f: [usize; 3]) -> [usize; 3] {
    let k = (0..3).min_by_key(|&i| f[i]).unwrap();
    [f[k], f[(k + 1) % 3], f[(k + 2) % 3]]
}

pub fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Incidence between undirected edges and faces.
#[derive(Debug, Clone)]
pub struct EdgeTopology {
    incident: BTreeMap<[usize; 2], Vec<usize>>,
}

impl EdgeTopology {
    pub fn new(faces: &[[usize; 3]]) -> Self {
        let mut incident: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                incident
                    .entry(edge_key(f[k], f[(k + 1) % 3]))
                    .or_default()
                    .push(fi);
            }
        }
        Self { incident }
    }

    pub fn faces_of(&self, a: usize, b: usize) -> &[usize] {
        self.incident
            .get(&edge_key(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.incident.contains_key(&edge_key(a, b))
    }

    pub fn edges(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        self.incident.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize; 2], &Vec<usize>)> {
        self.incident.iter()
    }

    pub fn non_manifold_edges(&self) -> Vec<[usize; 2]> {
        self.incident
            .iter()
            .filter(|(_, f)| f.len() > 2)
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = ([usize; 2], usize)> + '_ {
        self.incident
            .iter()
            .filter(|(_, f)| f.len() == 1)
            .map(|(e, f)| (*e, f[0]))
    }

    pub fn is_closed(&self) -> bool {
        self.incident.values().all(|f| f.len() == 2)
    }
}

/// Ordered cycle of vertices along a hole. The single incident face of each
/// edge `(v[i], v[i+1])` lies to the left of the traversal direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub vertex_indices: Vec<usize>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.vertex_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_indices.is_empty()
    }

    /// Directed edges of the loop, closing back to the first vertex.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertex_indices.len();
        (0..n).map(move |i| (self.vertex_indices[i], self.vertex_indices[(i + 1) % n]))
    }
}

pub fn find_boundary_loops(mesh: &TriMesh) -> Result<Vec<BoundaryLoop>> {
    let topo = mesh.topology();
    let bad = topo.non_manifold_edges();
    if !bad.is_empty() {
        return Err(Error::NonManifoldEdges { edges: bad });
    }
    // Boundary half-edges keep the direction they have in their face.
    let mut outgoing: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut remaining = 0usize;
    for (e, f) in topo.boundary_edges() {
        let face = mesh.faces()[f];
        let (a, b) = (0..3)
            .map(|k| (face[k], face[(k + 1) % 3]))
            .find(|&(a, b)| edge_key(a, b) == e)
            .expect("edge belongs to its face");
        outgoing.entry(a).or_default().push(b);
        remaining += 1;
    }
    for targets in outgoing.values_mut() {
        targets.sort_unstable_by(|x, y| y.cmp(x));
    }

    let mut loops = Vec::new();
    while remaining > 0 {
        let start = *outgoing
            .iter()
            .find(|(_, t)| !t.is_empty())
            .map(|(s, _)| s)
            .expect("remaining half-edges");
        let mut cycle = vec![start];
        let mut current = start;
        loop {
            let next = match outgoing.get_mut(&current).and_then(|t| t.pop()) {
                Some(n) => n,
                None => return Err(Error::OpenBoundaryChain { start }),
            };
            remaining -= 1;
            if next == start {
                break;
            }
            cycle.push(next);
            current = next;
        }
        loops.push(BoundaryLoop {
            vertex_indices: cycle,
        });
    }
    Ok(loops)
}
