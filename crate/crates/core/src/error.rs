use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("face {face} is invalid: {reason}")]
    InvalidFace { face: usize, reason: String },
    #[error("{} non-manifold edge(s), first {:?}", .edges.len(), .edges.first())]
    NonManifoldEdges { edges: Vec<[usize; 2]> },
    #[error("rest positions have length {got}, expected {expected}")]
    RestLength { expected: usize, got: usize },
    #[error("boundary chain starting at vertex {start} does not close")]
    OpenBoundaryChain { start: usize },
    #[error("loop is not a boundary of this mesh: {0}")]
    LoopNotInMesh(String),
    #[error("inconsistent intersection record: {0}")]
    InconsistentRecord(String),
    #[error("provenance has no entry for vertex {0}")]
    MissingProvenance(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Category of a non-fatal condition reported alongside a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    SkippedFace,
    DuplicateFace,
    DegenerateFan,
    CoplanarOverlap,
    DegenerateContact,
    TriangulationFailure,
    OpenChain,
    UnpairedPath,
    FloodLeak,
    OpenRegion,
    OrientationMismatch,
    FillSides,
    UnclosedLoops,
    DegenerateElement,
    CoincidentPair,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub detail: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }

    /// Degeneracies that cause part of the penetration loss to be skipped.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self.kind,
            DiagnosticKind::CoplanarOverlap
                | DiagnosticKind::DegenerateContact
                | DiagnosticKind::TriangulationFailure
                | DiagnosticKind::OpenChain
                | DiagnosticKind::UnpairedPath
                | DiagnosticKind::FloodLeak
                | DiagnosticKind::OpenRegion
                | DiagnosticKind::OrientationMismatch
        )
    }
}
