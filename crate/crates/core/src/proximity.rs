//! Fixed-radius vertex pairs that are not mesh edges, found with a uniform
//! grid whose cell size equals the radius.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCollisionEdgeSet {
    /// Sorted, `i < j`.
    pub pairs: Vec<[usize; 2]>,
    pub radius: f64,
}

impl SelfCollisionEdgeSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn cell_of(p: &Vec3, r: f64) -> [i64; 3] {
    [0, 1, 2].map(|k| (p[k] / r).floor() as i64)
}

/// Pairs `(i, j)` with `|p_i - p_j| < radius`, `i < j`, excluding the given
/// edges.
pub fn close_pairs(points: &[Vec3], radius: f64, excluded: &BTreeSet<[usize; 2]>) -> Result<Vec<[usize; 2]>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell_of(p, radius)).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let c = cell_of(p, radius);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else { continue };
                    for &j in bucket {
                        if j > i && (points[j] - p).norm() < radius && !excluded.contains(&[i, j]) {
                            pairs.push([i, j]);
                        }
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

pub fn build_self_collision_edges(mesh: &TriMesh, radius: f64) -> Result<SelfCollisionEdgeSet> {
    build_self_collision_edges_at(mesh, mesh.vertices(), radius)
}

/// Same as [`build_self_collision_edges`] with positions other than the
/// mesh's own.
pub fn build_self_collision_edges_at(mesh: &TriMesh, positions: &[Vec3], radius: f64) -> Result<SelfCollisionEdgeSet> {
    let edges: BTreeSet<[usize; 2]> = mesh.edges().into_iter().collect();
    Ok(SelfCollisionEdgeSet {
        pairs: close_pairs(positions, radius, &edges)?,
        radius,
    })
}
