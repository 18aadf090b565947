//! Fixed convex weights expressing derived vertices in terms of source vertices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceMap {
    source_count: usize,
    entries: Vec<Vec<(usize, f64)>>,
}

impl ProvenanceMap {
    pub fn identity(n: usize) -> Self {
        Self {
            source_count: n,
            entries: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    pub fn new(source_count: usize, entries: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.is_empty() {
                return Err(Error::MissingProvenance(i));
            }
            if let Some(&(s, _)) = e.iter().find(|(s, _)| *s >= source_count) {
                return Err(Error::InvalidParameter(format!(
                    "vertex {i} refers to source {s} of {source_count}"
                )));
            }
        }
        Ok(Self {
            source_count,
            entries,
        })
    }

    pub fn push(&mut self, weights: Vec<(usize, f64)>) -> usize {
        self.entries.push(weights);
        self.entries.len() - 1
    }

    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weights(&self, v: usize) -> Result<&[(usize, f64)]> {
        self.entries
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::MissingProvenance(v))
    }

    pub fn entries(&self) -> &[Vec<(usize, f64)>] {
        &self.entries
    }

    pub fn apply(&self, sources: &[Vec3]) -> Vec<Vec3> {
        assert_eq!(sources.len(), self.source_count);
        self.entries
            .iter()
            .map(|e| e.iter().map(|&(s, w)| sources[s] * w).sum())
            .collect()
    }

    /// Accumulates per-derived-vertex gradients onto the sources.
    pub fn pull_back(&self, grad: &[Vec3]) -> Result<Vec<Vec3>> {
        if grad.len() > self.entries.len() {
            return Err(Error::MissingProvenance(self.entries.len()));
        }
        let mut out = vec![Vec3::zeros(); self.source_count];
        for (g, e) in grad.iter().zip(&self.entries) {
            for &(s, w) in e {
                out[s] += g * w;
            }
        }
        Ok(out)
    }

    /// `self` maps onto the vertices of `inner`; the result maps straight to
    /// `inner`'s sources.
    pub fn compose(&self, inner: &ProvenanceMap) -> Result<ProvenanceMap> {
        if self.source_count != inner.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot compose: {} sources vs {} inner vertices",
                self.source_count,
                inner.len()
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut acc: Vec<(usize, f64)> = Vec::new();
                for &(mid, w) in e {
                    for &(s, w2) in &inner.entries[mid] {
                        match acc.iter_mut().find(|(k, _)| *k == s) {
                            Some(slot) => slot.1 += w * w2,
                            None => acc.push((s, w * w2)),
                        }
                    }
                }
                acc.sort_by_key(|&(k, _)| k);
                acc
            })
            .collect();
        Ok(ProvenanceMap {
            source_count: inner.source_count,
            entries,
        })
    }

    /// Largest deviation of any vertex's weight sum from one, and whether all
    /// weights are nonnegative.
    pub fn convexity(&self) -> (f64, bool) {
        let mut worst = 0.0f64;
        let mut nonneg = true;
        for e in &self.entries {
            let s: f64 = e.iter().map(|&(_, w)| w).sum();
            worst = worst.max((s - 1.0).abs());
            nonneg &= e.iter().all(|&(_, w)| w >= 0.0);
        }
        (worst, nonneg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_pull_back() {
        let inner = ProvenanceMap::new(2, vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(0, 0.5), (1, 0.5)]]).unwrap();
        let outer = ProvenanceMap::new(3, vec![vec![(0, 1.0)], vec![(1, 0.25), (2, 0.75)]]).unwrap();
        let c = outer.compose(&inner).unwrap();
        assert_eq!(c.weights(1).unwrap(), &[(0, 0.375), (1, 0.625)]);
        let src = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(8.0, 0.0, 0.0)];
        assert_eq!(c.apply(&src)[1].x, 5.0);
        let g = c.pull_back(&[Vec3::x(), Vec3::y()]).unwrap();
        assert_eq!(g[0], Vec3::new(1.0, 0.375, 0.0));
        assert_eq!(g[1], Vec3::new(0.0, 0.625, 0.0));
        assert_eq!(c.convexity(), (0.0, true));
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(ProvenanceMap::new(1, vec![vec![]]).is_err());
        assert!(ProvenanceMap::new(1, vec![vec![(3, 1.0)]]).is_err());
    }
}
