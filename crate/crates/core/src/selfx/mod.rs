//! Triangle-triangle self-intersection detection and remeshing so that every
//! intersection segment becomes a chain of mesh edges.

mod detect;
mod remesh;

pub use detect::{
    detect_self_intersections, Contact, Detection, IntersectionRecord, TrianglePairHit, COINCIDENCE_TOLERANCE,
};
pub use remesh::{remesh_on_intersections, CurvePoint, RemeshResult, SegmentEdge, TriplePoint};
