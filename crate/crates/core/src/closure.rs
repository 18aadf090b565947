//! Hole filling: each selected boundary loop gets a vertex at the mean of its
//! boundary vertices and a fan of triangles connecting it to the loop.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::mesh::{find_boundary_loops, triangle_area, BoundaryLoop, TriMesh};
use crate::provenance::ProvenanceMap;
use crate::Vec3;

/// Which boundary loops to close.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoopSelection {
    #[default]
    All,
    None,
    /// Indices into the list returned by [`find_boundary_loops`].
    Indices(Vec<usize>),
}

impl LoopSelection {
    /// Parses `all`, `none` or a comma-separated index list.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "all" => Ok(Self::All),
            "none" | "" => Ok(Self::None),
            list => list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::InvalidParameter(format!("loop index {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Self::Indices),
        }
    }

    pub fn select(&self, loops: &[BoundaryLoop]) -> Result<Vec<BoundaryLoop>> {
        match self {
            Self::All => Ok(loops.to_vec()),
            Self::None => Ok(Vec::new()),
            Self::Indices(idx) => idx
                .iter()
                .map(|&i| {
                    loops.get(i).cloned().ok_or_else(|| {
                        Error::LoopNotInMesh(format!("index {i} of {} loops", loops.len()))
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidProvenance {
    pub vertex: usize,
    pub boundary: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ClosureResult {
    pub closed_mesh: TriMesh,
    pub centroids: Vec<CentroidProvenance>,
    pub added_face_range: Range<usize>,
    pub warnings: Vec<Diagnostic>,
}

impl ClosureResult {
    /// Closed-mesh vertices in terms of the input mesh's vertices.
    pub fn provenance(&self) -> ProvenanceMap {
        let n = self.closed_mesh.num_vertices() - self.centroids.len();
        let mut p = ProvenanceMap::identity(n);
        for c in &self.centroids {
            let idx = p.push(c.boundary.iter().map(|&b| (b, c.weight)).collect());
            debug_assert_eq!(idx, c.vertex);
        }
        p
    }
}

pub fn close_garment(mesh: &TriMesh, loops_to_close: &[BoundaryLoop]) -> Result<ClosureResult> {
    let faces = mesh.faces();
    let topo = mesh.topology();
    for l in loops_to_close {
        if l.len() < 3 {
            return Err(Error::LoopNotInMesh(format!("loop of length {}", l.len())));
        }
        for (a, b) in l.directed_edges() {
            let inc = topo.faces_of(a, b);
            let ok = inc.len() == 1 && {
                let f = faces[inc[0]];
                (0..3).any(|k| f[k] == a && f[(k + 1) % 3] == b)
            };
            if !ok {
                return Err(Error::LoopNotInMesh(format!(
                    "({a}, {b}) is not a boundary half-edge"
                )));
            }
        }
    }

    let mut vertices = mesh.vertices().to_vec();
    let mut rest = mesh.rest_vertices().map(<[Vec3]>::to_vec);
    let mut new_faces = faces.to_vec();
    let mut centroids = Vec::with_capacity(loops_to_close.len());
    let mut warnings = Vec::new();
    let start = new_faces.len();

    for (li, l) in loops_to_close.iter().enumerate() {
        let n = l.len() as f64;
        let mean = |pts: &[Vec3]| l.vertex_indices.iter().map(|&i| pts[i]).sum::<Vec3>() / n;
        let center = vertices.len();
        vertices.push(mean(mesh.vertices()));
        if let Some(r) = rest.as_mut() {
            r.push(mean(mesh.rest_vertices().unwrap()));
        }
        let mut zero_area = 0;
        for (a, b) in l.directed_edges() {
            // the fan traverses the boundary edge opposite to its face
            let f = [b, a, center];
            if triangle_area(&vertices[b], &vertices[a], &vertices[center]) == 0.0 {
                zero_area += 1;
            }
            new_faces.push(f);
        }
        if zero_area > 0 {
            warnings.push(Diagnostic::new(
                DiagnosticKind::DegenerateFan,
                format!("loop {li}: {zero_area} zero-area fan triangle(s)"),
            ));
        }
        centroids.push(CentroidProvenance {
            vertex: center,
            boundary: l.vertex_indices.clone(),
            weight: 1.0 / n,
        });
    }
    let end = new_faces.len();
    let mut closed = TriMesh::new(vertices, new_faces)?;
    if let Some(r) = rest {
        closed = closed.with_rest(r)?;
    }
    Ok(ClosureResult {
        closed_mesh: closed,
        centroids,
        added_face_range: start..end,
        warnings,
    })
}

/// Convenience: find the loops and close the selected ones.
pub fn close_selected(mesh: &TriMesh, selection: &LoopSelection) -> Result<(ClosureResult, Vec<BoundaryLoop>)> {
    let loops = find_boundary_loops(mesh)?;
    let chosen = selection.select(&loops)?;
    Ok((close_garment(mesh, &chosen)?, loops))
}
