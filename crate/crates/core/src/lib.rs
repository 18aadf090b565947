//! Self-intersection detection, resolution and simulation for garment meshes.

pub mod bvh;
pub mod closure;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod gradcheck;
pub mod gia;
pub mod mesh;
pub mod obj;
pub mod pipeline;
pub mod predicates;
pub mod provenance;
pub mod report;
pub mod proximity;
pub mod selfx;
pub mod sim;
pub mod volume;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use error::{Diagnostic, DiagnosticKind, Error, Result};
pub use mesh::TriMesh;
