//! Global intersection analysis on a remeshed surface: chains segment edges
//! into closed paths, separates folded (loop-vertex) paths from the paths of
//! two intersecting regions, and extracts the penetrating faces by a lockstep
//! two-sided flood fill.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticKind};
use crate::mesh::{edge_key, EdgeTopology};
use crate::selfx::{Contact, RemeshResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionPath {
    /// Segment `i` runs from `vertices[i]` to `vertices[i + 1]` (cyclically).
    pub segments: Vec<usize>,
    pub vertices: Vec<usize>,
    pub contains_loop_vertex: bool,
    pub loop_vertices: Vec<usize>,
}

impl IntersectionPath {
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn edge_set(&self) -> BTreeSet<[usize; 2]> {
        self.directed_edges().map(|(a, b)| edge_key(a, b)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// One region folded onto itself; one path through loop vertices.
    Folded,
    /// Two distinct regions passing through each other; two paths.
    TwoRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenetrationRegion {
    pub kind: RegionKind,
    /// Indices into the traced path list, one per face group.
    pub paths: Vec<usize>,
    /// Sorted post-remesh face indices, one group per path.
    pub face_groups: Vec<Vec<usize>>,
    /// +1 or -1 per group so the union is consistently oriented.
    pub orientation: Vec<f64>,
}

impl PenetrationRegion {
    pub fn smallest_face(&self) -> usize {
        self.face_groups.iter().filter_map(|g| g.first()).copied().min().unwrap_or(usize::MAX)
    }

    pub fn face_count(&self) -> usize {
        self.face_groups.iter().map(Vec::len).sum()
    }
}

/// Which side of a path's traversal direction a fill started from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillOutcome {
    pub side: Side,
    pub faces: Vec<usize>,
    /// Faces reached by the other front when the fill stopped.
    pub other_visited: usize,
    pub tie: bool,
}

#[derive(Debug, Clone, Default)]
pub struct GiaResult {
    pub paths: Vec<IntersectionPath>,
    pub pairs: Vec<[usize; 2]>,
    pub regions: Vec<PenetrationRegion>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Chains segment edges into closed paths. Open or branching chains are
/// reported and left out.
pub fn trace_paths(remesh: &RemeshResult) -> (Vec<IntersectionPath>, Vec<Diagnostic>) {
    let segs = &remesh.segment_edges;
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        for &v in &s.vertices {
            incident.entry(v).or_default().push(i);
        }
    }
    let is_loop_at = |s: usize, v: usize| {
        matches!(remesh.hits[segs[s].hit].contact, Contact::LoopVertex { vertex, .. } if vertex == v)
    };
    let next = |cur: usize, at: usize| -> Option<usize> {
        if is_loop_at(cur, at) {
            return remesh.segment_other_side(cur);
        }
        let others: Vec<usize> = incident[&at].iter().copied().filter(|&s| s != cur).collect();
        match others.as_slice() {
            [one] => Some(*one),
            // at a triple point two curves cross; stay on this one
            _ => match others.iter().filter(|&&s| segs[s].hit == segs[cur].hit).collect::<Vec<_>>().as_slice() {
                [one] => Some(**one),
                _ => None,
            },
        }
    };
    let far_end = |s: usize, from: usize| {
        let [a, b] = segs[s].vertices;
        if a == from {
            b
        } else {
            a
        }
    };

    let mut visited = vec![false; segs.len()];
    let mut paths = Vec::new();
    let mut diagnostics = Vec::new();
    for start in 0..segs.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let origin = segs[start].vertices[0];
        let mut vertices = vec![origin];
        let mut chain = vec![start];
        let mut loops = BTreeSet::new();
        let mut cur = start;
        let mut at = segs[start].vertices[1];
        let closed = loop {
            if is_loop_at(cur, at) {
                loops.insert(at);
            }
            match next(cur, at) {
                Some(n) if n == start && at == origin => break true,
                Some(n) if !visited[n] => {
                    visited[n] = true;
                    vertices.push(at);
                    chain.push(n);
                    at = far_end(n, at);
                    cur = n;
                }
                _ => break false,
            }
        };
        if closed {
            let loop_vertices: Vec<usize> = loops.into_iter().collect();
            paths.push(IntersectionPath {
                segments: chain,
                vertices,
                contains_loop_vertex: !loop_vertices.is_empty(),
                loop_vertices,
            });
        } else {
            // consume the rest of the chain backwards from the origin
            let mut cur = start;
            let mut at = origin;
            while let Some(n) = next(cur, at) {
                if visited[n] {
                    break;
                }
                visited[n] = true;
                chain.push(n);
                at = far_end(n, at);
                cur = n;
            }
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::OpenChain,
                format!("{} segment(s) starting at segment {start} do not close; excluded", chain.len()),
            ));
        }
    }
    (paths, diagnostics)
}

/// Groups loop-free paths that come from the same pair-contacts. Every
/// contact puts one segment on each of the two intersecting regions.
pub fn pair_two_region_paths(paths: &[IntersectionPath], remesh: &RemeshResult) -> (Vec<[usize; 2]>, Vec<Diagnostic>) {
    let mut path_of = HashMap::new();
    for (pi, p) in paths.iter().enumerate() {
        for &s in &p.segments {
            path_of.insert(s, pi);
        }
    }
    let mut parent: Vec<usize> = (0..paths.len()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (s, seg) in remesh.segment_edges.iter().enumerate() {
        if seg.side != 0 {
            continue;
        }
        let Some(o) = remesh.segment_other_side(s) else { continue };
        let (Some(&a), Some(&b)) = (path_of.get(&s), path_of.get(&o)) else { continue };
        if paths[a].contains_loop_vertex || paths[b].contains_loop_vertex {
            continue;
        }
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pi, p) in paths.iter().enumerate() {
        if !p.contains_loop_vertex {
            let r = root(&mut parent, pi);
            groups.entry(r).or_default().push(pi);
        }
    }
    let mut pairs = Vec::new();
    let mut diagnostics = Vec::new();
    for g in groups.into_values() {
        match g.as_slice() {
            [a, b] => pairs.push([*a, *b]),
            other => diagnostics.push(Diagnostic::new(
                DiagnosticKind::UnpairedPath,
                format!("loop-free path group {other:?} is not a pair; excluded"),
            )),
        }
    }
    (pairs, diagnostics)
}

/// Directed half-edge to face lookup for a manifold mesh.
pub fn half_edge_faces(faces: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::with_capacity(faces.len() * 3);
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            m.insert((f[k], f[(k + 1) % 3]), fi);
        }
    }
    m
}

/// Lockstep breadth-first fill from both sides of `path`, never crossing a
/// path edge. Each round expands one face per front; the front that runs out
/// first is the penetrating side. Equal sizes go to the side holding the
/// smallest face index.
pub fn flood_fill_penetration(
    path: &IntersectionPath,
    faces: &[[usize; 3]],
    topo: &EdgeTopology,
    half_edges: &HashMap<(usize, usize), usize>,
) -> Result<FillOutcome, Diagnostic> {
    let blocked: HashSet<[usize; 2]> = path.directed_edges().map(|(a, b)| edge_key(a, b)).collect();
    let mut seeds: [BTreeSet<usize>; 2] = Default::default();
    for (a, b) in path.directed_edges() {
        if let Some(&f) = half_edges.get(&(a, b)) {
            seeds[0].insert(f);
        }
        if let Some(&f) = half_edges.get(&(b, a)) {
            seeds[1].insert(f);
        }
    }
    let leak = |msg: &str| Diagnostic::new(DiagnosticKind::FloodLeak, format!("path through vertex {}: {msg}", path.vertices[0]));
    if seeds[0].is_empty() || seeds[1].is_empty() {
        return Err(leak("path lies on the mesh boundary"));
    }
    if seeds[0].intersection(&seeds[1]).next().is_some() {
        return Err(leak("a face lies on both sides"));
    }

    // 0 = unvisited, 1 = left, 2 = right
    let mut mark = vec![0u8; faces.len()];
    let mut queues: [VecDeque<usize>; 2] = Default::default();
    let mut visited: [Vec<usize>; 2] = Default::default();
    for side in 0..2 {
        for &f in &seeds[side] {
            mark[f] = side as u8 + 1;
            queues[side].push_back(f);
            visited[side].push(f);
        }
    }
    let winner = loop {
        for side in 0..2 {
            let Some(f) = queues[side].pop_front() else { continue };
            let fv = faces[f];
            for k in 0..3 {
                let (a, b) = (fv[k], fv[(k + 1) % 3]);
                if blocked.contains(&edge_key(a, b)) {
                    continue;
                }
                for &g in topo.faces_of(a, b) {
                    if g == f {
                        continue;
                    }
                    match mark[g] {
                        0 => {
                            mark[g] = side as u8 + 1;
                            queues[side].push_back(g);
                            visited[side].push(g);
                        }
                        m if m == side as u8 + 1 => {}
                        _ => return Err(leak("the two fronts met")),
                    }
                }
            }
        }
        match (queues[0].is_empty(), queues[1].is_empty()) {
            (true, true) => {
                let min0 = visited[0].iter().min();
                let min1 = visited[1].iter().min();
                break if min0 <= min1 { (0, true) } else { (1, true) };
            }
            (true, false) => break (0, false),
            (false, true) => break (1, false),
            _ => {}
        }
    };
    let (side, tie) = winner;
    let mut faces_out = std::mem::take(&mut visited[side]);
    faces_out.sort_unstable();
    Ok(FillOutcome {
        side: if side == 0 { Side::Left } else { Side::Right },
        faces: faces_out,
        other_visited: visited[1 - side].len(),
        tie,
    })
}

/// Edges with exactly one incident face inside `group`.
pub fn group_boundary(group: &[usize], faces: &[[usize; 3]]) -> BTreeSet<[usize; 2]> {
    let mut count: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for &f in group {
        let fv = faces[f];
        for k in 0..3 {
            *count.entry(edge_key(fv[k], fv[(k + 1) % 3])).or_default() += 1;
        }
    }
    count.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect()
}

/// Direction (+1 / -1) in which the group's face adjacent to segment `s`
/// traverses it, relative to `vertices[0] -> vertices[1]`.
fn traversal(remesh: &RemeshResult, group: &BTreeSet<usize>, half_edges: &HashMap<(usize, usize), usize>, s: usize) -> Option<i8> {
    let [a, b] = remesh.segment_edges[s].vertices;
    if half_edges.get(&(a, b)).is_some_and(|f| group.contains(f)) {
        Some(1)
    } else if half_edges.get(&(b, a)).is_some_and(|f| group.contains(f)) {
        Some(-1)
    } else {
        None
    }
}

/// Runs the whole analysis on a remeshed surface.
pub fn analyze(remesh: &RemeshResult) -> GiaResult {
    let (paths, mut diagnostics) = trace_paths(remesh);
    let (pairs, pair_diag) = pair_two_region_paths(&paths, remesh);
    diagnostics.extend(pair_diag);

    let faces = remesh.mesh.faces();
    let topo = remesh.mesh.topology();
    let half_edges = half_edge_faces(faces);
    let fill = |p: usize, diagnostics: &mut Vec<Diagnostic>| -> Option<Vec<usize>> {
        match flood_fill_penetration(&paths[p], faces, &topo, &half_edges) {
            Ok(out) => {
                diagnostics.push(Diagnostic::new(
                    DiagnosticKind::FillSides,
                    format!(
                        "path {p}: {} penetrating face(s) on the {:?} side; other front had {} when stopped{}",
                        out.faces.len(),
                        out.side,
                        out.other_visited,
                        if out.tie { " (tie)" } else { "" }
                    ),
                ));
                let boundary = group_boundary(&out.faces, faces);
                if boundary != paths[p].edge_set() {
                    diagnostics.push(Diagnostic::new(
                        DiagnosticKind::OpenRegion,
                        format!("path {p}: penetrating faces reach the open boundary; excluded"),
                    ));
                    return None;
                }
                Some(out.faces)
            }
            Err(d) => {
                diagnostics.push(d);
                None
            }
        }
    };

    let mut regions = Vec::new();
    for (p, path) in paths.iter().enumerate() {
        if !path.contains_loop_vertex {
            continue;
        }
        if let Some(g) = fill(p, &mut diagnostics) {
            regions.push(PenetrationRegion {
                kind: RegionKind::Folded,
                paths: vec![p],
                face_groups: vec![g],
                orientation: vec![1.0],
            });
        }
    }
    let mut path_of = HashMap::new();
    for (pi, p) in paths.iter().enumerate() {
        for &s in &p.segments {
            path_of.insert(s, pi);
        }
    }
    for &[p1, p2] in &pairs {
        let (Some(g1), Some(g2)) = (fill(p1, &mut diagnostics), fill(p2, &mut diagnostics)) else {
            continue;
        };
        let set1: BTreeSet<usize> = g1.iter().copied().collect();
        let set2: BTreeSet<usize> = g2.iter().copied().collect();
        // matching segments must be traversed in opposite directions
        let mut votes = BTreeSet::new();
        for &s in &paths[p1].segments {
            let Some(o) = remesh.segment_other_side(s) else { continue };
            if path_of.get(&o) != Some(&p2) {
                continue;
            }
            match (traversal(remesh, &set1, &half_edges, s), traversal(remesh, &set2, &half_edges, o)) {
                (Some(d1), Some(d2)) => {
                    votes.insert(d1 != d2);
                }
                _ => {
                    votes.insert(true);
                    votes.insert(false);
                }
            }
        }
        if votes.len() != 1 {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::OrientationMismatch,
                format!("paths {p1} and {p2}: face groups do not bound a consistently oriented surface; excluded"),
            ));
            continue;
        }
        let consistent = votes.into_iter().next().unwrap();
        regions.push(PenetrationRegion {
            kind: RegionKind::TwoRegion,
            paths: vec![p1, p2],
            face_groups: vec![g1, g2],
            orientation: vec![1.0, if consistent { 1.0 } else { -1.0 }],
        });
    }
    regions.sort_by_key(PenetrationRegion::smallest_face);
    GiaResult {
        paths,
        pairs,
        regions,
        diagnostics,
    }
}
