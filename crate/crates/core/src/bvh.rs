//! Axis-aligned bounding box hierarchy over mesh faces.

use rayon::prelude::*;

use crate::mesh::TriMesh;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    /// Closed-box overlap, so touching boxes count.
    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.max[k] && o.min[k] <= self.max[k])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    boxes: Vec<Aabb>,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let boxes: Vec<Aabb> = (0..mesh.num_faces())
            .map(|f| Aabb::from_points(mesh.face_positions(f).iter()))
            .collect();
        Self::from_boxes(boxes)
    }

    pub fn from_boxes(boxes: Vec<Aabb>) -> Self {
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        let mut nodes = Vec::with_capacity(2 * boxes.len() / LEAF_SIZE + 1);
        if !boxes.is_empty() {
            Self::split(&boxes, &mut order, 0, boxes.len(), &mut nodes);
        }
        Self { nodes, order, boxes }
    }

    fn split(boxes: &[Aabb], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
        let bounds = order[start..end]
            .iter()
            .fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i]));
        let me = nodes.len();
        if end - start <= LEAF_SIZE {
            nodes.push(Node::Leaf { bounds, start, end });
            return me;
        }
        let mut centers = Aabb::empty();
        for &i in &order[start..end] {
            centers.grow(&boxes[i].center());
        }
        let extent = centers.max - centers.min;
        let axis = (0..3).max_by(|&a, &b| extent[a].total_cmp(&extent[b])).unwrap();
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            boxes[a].center()[axis]
                .total_cmp(&boxes[b].center()[axis])
                .then(a.cmp(&b))
        });
        nodes.push(Node::Leaf { bounds, start, end });
        let left = Self::split(boxes, order, start, mid, nodes);
        let right = Self::split(boxes, order, mid, end, nodes);
        nodes[me] = Node::Inner { bounds, left, right };
        me
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn face_box(&self, f: usize) -> &Aabb {
        &self.boxes[f]
    }

    /// Faces whose boxes overlap `query`, sorted.
    pub fn query(&self, query: &Aabb) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bounds().overlaps(query) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => out.extend(
                    self.order[start..end]
                        .iter()
                        .copied()
                        .filter(|&f| self.boxes[f].overlaps(query)),
                ),
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All face pairs `(i, j)`, `i < j`, with overlapping boxes, sorted.
    pub fn self_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = (0..self.boxes.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                self.query(&self.boxes[i])
                    .into_iter()
                    .filter(move |&j| j > i)
                    .map(move |j| (i, j))
            })
            .collect();
        pairs.sort_unstable();
        pairs
    }
}
