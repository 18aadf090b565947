//! End-to-end self-collision analysis: optional hole closing, intersection
//! detection, remeshing, global intersection analysis and volume loss.

use crate::closure::{close_selected, ClosureResult, LoopSelection};
use crate::error::{Diagnostic, DiagnosticKind, Result};
use crate::gia::{analyze, GiaResult, PenetrationRegion};
use crate::mesh::{find_boundary_loops, BoundaryLoop, TriMesh};
use crate::selfx::{detect_self_intersections, remesh_on_intersections, Detection, RemeshResult};
use crate::volume::{closed_regions, FrozenSelfCollision, SelfCollisionLoss};

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Boundary loops of the input mesh.
    pub boundary_loops: Vec<BoundaryLoop>,
    pub closure: ClosureResult,
    pub detection: Detection,
    pub remesh: RemeshResult,
    pub gia: GiaResult,
    /// Regions that contribute to the loss.
    pub regions: Vec<PenetrationRegion>,
    pub loss: SelfCollisionLoss,
    /// The loss with this configuration's combinatorics held fixed, as a
    /// function of the input mesh's vertices.
    pub frozen: FrozenSelfCollision,
    /// Everything reported along the way, in pipeline order.
    pub diagnostics: Vec<Diagnostic>,
}

impl PipelineResult {
    pub fn loop_vertex_count(&self) -> usize {
        self.remesh.loop_vertices.len()
    }

    /// True when something was skipped because of degenerate geometry.
    pub fn has_degeneracies(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_degeneracy)
    }
}

pub fn run_pipeline(mesh: &TriMesh, selection: &LoopSelection) -> Result<PipelineResult> {
    let (closure, boundary_loops) = close_selected(mesh, selection)?;
    let mut diagnostics = closure.warnings.clone();
    let remaining = find_boundary_loops(&closure.closed_mesh)?;
    if !remaining.is_empty() {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::UnclosedLoops,
            format!(
                "{} boundary loop(s) left open; regions touching them cannot enclose a volume",
                remaining.len()
            ),
        ));
    }

    let closed = &closure.closed_mesh;
    let detection = detect_self_intersections(closed);
    diagnostics.extend(detection.diagnostics.iter().cloned());
    let remesh = remesh_on_intersections(closed, &detection)?;
    diagnostics.extend(remesh.diagnostics.iter().cloned());
    let gia = analyze(&remesh);
    diagnostics.extend(gia.diagnostics.iter().cloned());
    let (regions, vol_diag) = closed_regions(&gia.regions, &remesh);
    diagnostics.extend(vol_diag);

    let provenance = remesh.provenance.compose(&closure.provenance())?;
    let frozen = FrozenSelfCollision::new(&regions, &remesh, provenance);
    let loss = frozen.evaluate(mesh.vertices())?;
    Ok(PipelineResult {
        boundary_loops,
        closure,
        detection,
        remesh,
        gia,
        regions,
        loss,
        frozen,
        diagnostics,
    })
}

/// Only the loss, for callers that do not need the intermediate results.
pub fn self_collision_loss(mesh: &TriMesh, selection: &LoopSelection) -> Result<(SelfCollisionLoss, FrozenSelfCollision)> {
    let r = run_pipeline(mesh, selection)?;
    Ok((r.loss, r.frozen))
}
