//! Serializable summary of a self-collision analysis.

use serde::{Deserialize, Serialize};

use crate::error::Diagnostic;
use crate::gia::RegionKind;
use crate::pipeline::PipelineResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    /// Vertex chain on the remeshed surface.
    pub vertices: Vec<usize>,
    pub segment_count: usize,
    pub contains_loop_vertex: bool,
    /// Input-mesh vertices at which the path changes sheet.
    pub loop_vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub kind: RegionKind,
    pub paths: Vec<usize>,
    pub face_counts: Vec<usize>,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input_vertices: usize,
    pub input_faces: usize,
    pub boundary_loops: usize,
    pub closed_loops: usize,
    pub remeshed_vertices: usize,
    pub remeshed_faces: usize,
    pub candidate_pairs: usize,
    pub intersection_records: usize,
    pub loop_vertex_count: usize,
    pub paths: Vec<PathSummary>,
    pub regions: Vec<RegionSummary>,
    pub self_collision_loss: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl AnalysisReport {
    pub fn new(input_faces: usize, input_vertices: usize, r: &PipelineResult) -> Self {
        let paths = r
            .gia
            .paths
            .iter()
            .map(|p| PathSummary {
                vertices: p.vertices.clone(),
                segment_count: p.segments.len(),
                contains_loop_vertex: p.contains_loop_vertex,
                loop_vertices: p.loop_vertices.clone(),
            })
            .collect();
        let regions = r
            .regions
            .iter()
            .zip(&r.loss.per_region)
            .map(|(g, &volume)| RegionSummary {
                kind: g.kind,
                paths: g.paths.clone(),
                face_counts: g.face_groups.iter().map(Vec::len).collect(),
                volume,
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            input_vertices,
            input_faces,
            boundary_loops: r.boundary_loops.len(),
            closed_loops: r.closure.centroids.len(),
            remeshed_vertices: r.remesh.mesh.num_vertices(),
            remeshed_faces: r.remesh.mesh.num_faces(),
            candidate_pairs: r.detection.candidate_pairs,
            intersection_records: r.remesh.records.len(),
            loop_vertex_count: r.loop_vertex_count(),
            paths,
            regions,
            self_collision_loss: r.loss.value,
            diagnostics: r.diagnostics.clone(),
        }
    }

    /// Per remeshed face: does it belong to a counted penetration region.
    pub fn penetration_mask(r: &PipelineResult) -> Vec<bool> {
        let mut mask = vec![false; r.remesh.mesh.num_faces()];
        for g in r.regions.iter().flat_map(|g| &g.face_groups) {
            for &f in g {
                mask[f] = true;
            }
        }
        mask
    }
}
