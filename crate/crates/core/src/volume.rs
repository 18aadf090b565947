//! Penetration volume from signed origin tetrahedra, and its gradient with
//! respect to the original vertices through fixed provenance weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticKind, Result};
use crate::gia::PenetrationRegion;
use crate::provenance::ProvenanceMap;
use crate::selfx::{CurvePoint, RemeshResult};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCollisionLoss {
    pub value: f64,
    pub per_region: Vec<f64>,
    /// One entry per original vertex.
    pub gradient: Vec<Vec3>,
}

impl SelfCollisionLoss {
    pub fn zero(vertex_count: usize) -> Self {
        Self {
            value: 0.0,
            per_region: Vec::new(),
            gradient: vec![Vec3::zeros(); vertex_count],
        }
    }
}

/// Faces of a region as vertex triples with the group orientation applied.
pub fn oriented_faces(region: &PenetrationRegion, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    region
        .face_groups
        .iter()
        .zip(&region.orientation)
        .flat_map(|(g, &o)| {
            g.iter().map(move |&f| {
                let [a, b, c] = faces[f];
                if o < 0.0 {
                    [a, c, b]
                } else {
                    [a, b, c]
                }
            })
        })
        .collect()
}

/// Sum of `a . (b x c) / 6` over the faces.
pub fn signed_volume(faces: &[[usize; 3]], pos: &[Vec3]) -> f64 {
    faces
        .iter()
        .map(|&[a, b, c]| pos[a].dot(&pos[b].cross(&pos[c])))
        .fold(0.0, |acc, t| acc + t)
        / 6.0
}

/// Absolute enclosed volume of a region on the remeshed surface.
pub fn region_volume(region: &PenetrationRegion, remesh: &RemeshResult) -> f64 {
    signed_volume(&oriented_faces(region, remesh.mesh.faces()), remesh.mesh.vertices()).abs()
}

/// Checks that the region's boundary consists of intersection-curve edges
/// that cancel in pairs, so that the oriented faces bound a closed surface.
pub fn region_is_closed(region: &PenetrationRegion, remesh: &RemeshResult) -> bool {
    let faces = oriented_faces(region, remesh.mesh.faces());
    let mut half: BTreeMap<(usize, usize), i32> = BTreeMap::new();
    for f in &faces {
        for k in 0..3 {
            *half.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut curve_point: BTreeMap<usize, CurvePoint> = BTreeMap::new();
    for s in &remesh.segment_edges {
        for (&v, &p) in s.vertices.iter().zip(&s.ends) {
            curve_point.insert(v, p);
        }
    }
    let mut net: BTreeMap<(CurvePoint, CurvePoint), i32> = BTreeMap::new();
    for (&(a, b), &n) in &half {
        let back = half.get(&(b, a)).copied().unwrap_or(0);
        if n == back {
            continue;
        }
        let (Some(&pa), Some(&pb)) = (curve_point.get(&a), curve_point.get(&b)) else {
            return false;
        };
        let excess = n - back;
        if excess < 0 {
            continue;
        }
        *net.entry((pa, pb)).or_default() += excess;
        *net.entry((pb, pa)).or_default() -= excess;
    }
    net.values().all(|&c| c == 0)
}

/// Keeps the regions that bound closed surfaces, reporting the others.
pub fn closed_regions(regions: &[PenetrationRegion], remesh: &RemeshResult) -> (Vec<PenetrationRegion>, Vec<Diagnostic>) {
    let mut keep = Vec::new();
    let mut diag = Vec::new();
    for (i, r) in regions.iter().enumerate() {
        if r.face_groups.iter().all(Vec::is_empty) {
            diag.push(Diagnostic::new(DiagnosticKind::OpenRegion, format!("region {i} has no faces; excluded")));
        } else if region_is_closed(r, remesh) {
            keep.push(r.clone());
        } else {
            diag.push(Diagnostic::new(
                DiagnosticKind::OpenRegion,
                format!("region {i} does not bound a closed surface; excluded"),
            ));
        }
    }
    (keep, diag)
}

/// Volume loss and its gradient. `provenance` maps remeshed vertices to the
/// original vertices the gradient is reported on.
pub fn total_loss(regions: &[PenetrationRegion], remesh: &RemeshResult, provenance: &ProvenanceMap) -> Result<SelfCollisionLoss> {
    let frozen = FrozenSelfCollision::new(regions, remesh, provenance.clone());
    frozen.evaluate_remeshed(remesh.mesh.vertices())
}

/// Self-collision loss with its combinatorics fixed: which remeshed faces
/// belong to which region and how remeshed vertices depend on the original
/// ones. Only positions vary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenSelfCollision {
    pub provenance: ProvenanceMap,
    pub regions: Vec<Vec<[usize; 3]>>,
}

impl FrozenSelfCollision {
    pub fn new(regions: &[PenetrationRegion], remesh: &RemeshResult, provenance: ProvenanceMap) -> Self {
        Self {
            provenance,
            regions: regions.iter().map(|r| oriented_faces(r, remesh.mesh.faces())).collect(),
        }
    }

    pub fn empty(vertex_count: usize) -> Self {
        Self {
            provenance: ProvenanceMap::identity(vertex_count),
            regions: Vec::new(),
        }
    }

    pub fn source_count(&self) -> usize {
        self.provenance.source_count()
    }

    pub fn evaluate(&self, original: &[Vec3]) -> Result<SelfCollisionLoss> {
        self.evaluate_remeshed(&self.provenance.apply(original))
    }

    pub fn value(&self, original: &[Vec3]) -> f64 {
        let pos = self.provenance.apply(original);
        self.regions.iter().fold(0.0, |acc, f| acc + signed_volume(f, &pos).abs())
    }

    fn evaluate_remeshed(&self, pos: &[Vec3]) -> Result<SelfCollisionLoss> {
        let mut grad = vec![Vec3::zeros(); pos.len()];
        let mut per_region = Vec::with_capacity(self.regions.len());
        for faces in &self.regions {
            let v = signed_volume(faces, pos);
            per_region.push(v.abs());
            let s = if v < 0.0 { -1.0 } else { 1.0 } / 6.0;
            for &[a, b, c] in faces {
                grad[a] += pos[b].cross(&pos[c]) * s;
                grad[b] += pos[c].cross(&pos[a]) * s;
                grad[c] += pos[a].cross(&pos[b]) * s;
            }
        }
        Ok(SelfCollisionLoss {
            // an empty float sum is -0.0
            value: per_region.iter().fold(0.0, |a, b| a + b),
            per_region,
            gradient: self.provenance.pull_back(&grad)?,
        })
    }
}
