use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::detect::{Contact, Detection, IntersectionRecord, TrianglePairHit};
use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::mesh::{edge_key, TriMesh};
use crate::predicates::{orient2d, sign};
use crate::provenance::ProvenanceMap;

/// Identity of a point on an intersection curve, shared by every copy of
/// that point on the remeshed surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvePoint {
    Record(usize),
    /// Index into [`RemeshResult::triple_points`].
    Triple(usize),
    /// An input vertex, the end of a loop-vertex segment.
    Vertex(usize),
}

/// An edge of the remeshed surface that carries a piece of an intersection
/// curve. Each intersecting triangle pair produces the same pieces on both of
/// its triangles, stored side 0 then side 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentEdge {
    /// Post-remesh vertices; `vertices[i]` is the image of `ends[i]` on the
    /// host face.
    pub vertices: [usize; 2],
    /// Face of the input mesh that hosts the segment.
    pub host_face: usize,
    /// Index into [`RemeshResult::hits`].
    pub hit: usize,
    /// 0 for `hit.faces[0]`, 1 for `hit.faces[1]`.
    pub side: usize,
    pub ends: [CurvePoint; 2],
}

/// Point where three faces meet, which splits the three curves through it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriplePoint {
    /// Sorted input faces.
    pub faces: [usize; 3],
    /// Post-remesh vertex on each face, in `faces` order.
    pub vertices: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct RemeshResult {
    pub mesh: TriMesh,
    /// Post-remesh vertices in terms of input-mesh vertices.
    pub provenance: ProvenanceMap,
    /// Input face each output face came from.
    pub face_parent: Vec<usize>,
    pub segment_edges: Vec<SegmentEdge>,
    /// The pair contacts that were realized (degenerate ones dropped).
    pub hits: Vec<TrianglePairHit>,
    pub records: Vec<IntersectionRecord>,
    pub triple_points: Vec<TriplePoint>,
    /// Input vertices at which an intersection curve passes from one sheet to
    /// the other.
    pub loop_vertices: BTreeSet<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

impl RemeshResult {
    /// Largest relative difference between a parent face's area and the sum
    /// of its children's areas.
    pub fn area_partition_error(&self, input: &TriMesh) -> f64 {
        let mut child = vec![0.0; input.num_faces()];
        for (f, &p) in self.face_parent.iter().enumerate() {
            child[p] += self.mesh.face_area(f);
        }
        (0..input.num_faces())
            .map(|f| {
                let a = input.face_area(f);
                if a > 0.0 {
                    (child[f] - a).abs() / a
                } else {
                    child[f].abs()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn segment_other_side(&self, s: usize) -> Option<usize> {
        let seg = &self.segment_edges[s];
        let sibling = if seg.side == 0 { s + 1 } else { s.checked_sub(1)? };
        self.segment_edges
            .get(sibling)
            .filter(|o| o.hit == seg.hit && o.side != seg.side)
            .map(|_| sibling)
    }
}

pub fn remesh_on_intersections(mesh: &TriMesh, detection: &Detection) -> Result<RemeshResult> {
    for r in &detection.records {
        if r.face >= mesh.num_faces() || !mesh.topology().contains(r.edge[0], r.edge[1]) {
            return Err(Error::InconsistentRecord(format!("edge {:?} / face {}", r.edge, r.face)));
        }
    }
    for h in &detection.hits {
        if h.faces.iter().any(|&f| f >= mesh.num_faces()) || h.records().any(|r| r >= detection.records.len()) {
            return Err(Error::InconsistentRecord(format!("hit {:?}", h.faces)));
        }
    }

    let mut active: Vec<bool> = vec![true; detection.hits.len()];
    let mut diagnostics = Vec::new();
    loop {
        match attempt(mesh, detection, &active) {
            Ok(mut res) => {
                res.diagnostics.extend(diagnostics);
                return Ok(res);
            }
            Err(bad) => {
                for h in bad {
                    if active[h] {
                        active[h] = false;
                        let faces = detection.hits[h].faces;
                        diagnostics.push(Diagnostic::new(
                            DiagnosticKind::TriangulationFailure,
                            format!("faces {} and {}; contact dropped", faces[0], faces[1]),
                        ));
                    }
                }
            }
        }
    }
}

/// Vertex created for a record, one per surface side.
#[derive(Debug, Clone, Copy)]
struct RecordVertices {
    on_edge: usize,
    in_face: usize,
}

fn attempt(mesh: &TriMesh, det: &Detection, active: &[bool]) -> std::result::Result<RemeshResult, Vec<usize>> {
    let faces = mesh.faces();
    let hits: Vec<(usize, TrianglePairHit)> = det
        .hits
        .iter()
        .copied()
        .enumerate()
        .filter(|(i, _)| active[*i])
        .collect();
    let used: BTreeSet<usize> = hits.iter().flat_map(|(_, h)| h.records()).collect();

    let mut provenance = ProvenanceMap::identity(mesh.num_vertices());
    let mut rec_vertices: HashMap<usize, RecordVertices> = HashMap::new();
    let mut on_edges: BTreeMap<[usize; 2], Vec<(f64, usize, usize)>> = BTreeMap::new();
    let mut in_faces: BTreeMap<usize, Vec<([f64; 3], usize, usize)>> = BTreeMap::new();
    for &r in &used {
        let rec = &det.records[r];
        let t = rec.edge_param;
        let on_edge = provenance.push(vec![(rec.edge[0], 1.0 - t), (rec.edge[1], t)]);
        let f = faces[rec.face];
        let in_face = provenance.push((0..3).map(|k| (f[k], rec.bary[k])).collect());
        rec_vertices.insert(r, RecordVertices { on_edge, in_face });
        on_edges.entry(rec.edge).or_default().push((t, on_edge, r));
        in_faces.entry(rec.face).or_default().push((rec.bary, in_face, r));
    }
    let record_hits: BTreeMap<usize, Vec<usize>> = hits.iter().fold(BTreeMap::new(), |mut m, (hi, h)| {
        for r in h.records() {
            m.entry(r).or_insert_with(Vec::new).push(*hi);
        }
        m
    });

    // image of a record on the given triangle of its pair
    let image = |r: usize, tri: usize| {
        let v = rec_vertices[&r];
        if det.records[r].face == tri {
            v.in_face
        } else {
            v.on_edge
        }
    };

    // whole pair segments, side 0 then side 1 per hit
    let mut chords = Vec::with_capacity(2 * hits.len());
    let mut loop_vertices = BTreeSet::new();
    let mut hits_out = Vec::with_capacity(hits.len());
    for (new_index, (_, h)) in hits.iter().enumerate() {
        hits_out.push(*h);
        for (side, &tri) in h.faces.iter().enumerate() {
            let (vertices, ends) = match h.contact {
                Contact::Segment { records: [a, b] } => {
                    ([image(a, tri), image(b, tri)], [CurvePoint::Record(a), CurvePoint::Record(b)])
                }
                Contact::LoopVertex { record, vertex } => {
                    loop_vertices.insert(vertex);
                    ([image(record, tri), vertex], [CurvePoint::Record(record), CurvePoint::Vertex(vertex)])
                }
            };
            chords.push(SegmentEdge {
                vertices,
                host_face: tri,
                hit: new_index,
                side,
                ends,
            });
        }
    }
    let host_map = |segs: &[SegmentEdge]| {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, s) in segs.iter().enumerate() {
            m.entry(s.host_face).or_default().push(i);
        }
        m
    };
    let frame_points: BTreeMap<usize, Vec<FramePoint>> = faces
        .iter()
        .enumerate()
        .map(|(fi, &f)| (fi, frame_points(f, fi, &on_edges, &in_faces)))
        .filter(|(_, p)| !p.is_empty())
        .collect();

    let triples = match find_triple_points(&chords, &host_map(&chords), faces, &frame_points) {
        Ok(t) => t,
        Err(bad_chords) => return Err(bad_chords.into_iter().map(|c| hits[chords[c].hit].0).collect()),
    };
    let mut triple_points = Vec::with_capacity(triples.points.len());
    let mut triple_image: HashMap<(usize, usize), usize> = HashMap::new();
    let mut extra_points: BTreeMap<usize, Vec<FramePoint>> = BTreeMap::new();
    for (t, (key, at)) in triples.points.iter().enumerate() {
        let mut vertices = [0; 3];
        for &(fi, xy) in at {
            let f = faces[fi];
            let w = [1.0 - xy[0] - xy[1], xy[0], xy[1]];
            let v = provenance.push((0..3).map(|k| (f[k], w[k])).collect());
            vertices[key.iter().position(|&x| x == fi).expect("face of its own triple")] = v;
            triple_image.insert((t, fi), v);
            extra_points.entry(fi).or_default().push((v, xy, None));
        }
        triple_points.push(TriplePoint { faces: *key, vertices });
    }

    let mut segment_edges = Vec::with_capacity(chords.len() + 4 * triple_points.len());
    for h in 0..hits.len() {
        let pieces: [Vec<(usize, CurvePoint)>; 2] = [0, 1].map(|side| {
            let c = &chords[2 * h + side];
            let mut seq = vec![(c.vertices[0], c.ends[0])];
            seq.extend(triples.along[2 * h + side].iter().map(|&t| (triple_image[&(t, c.host_face)], CurvePoint::Triple(t))));
            seq.push((c.vertices[1], c.ends[1]));
            seq
        });
        for j in 0..pieces[0].len() - 1 {
            for (side, seq) in pieces.iter().enumerate() {
                segment_edges.push(SegmentEdge {
                    vertices: [seq[j].0, seq[j + 1].0],
                    host_face: chords[2 * h + side].host_face,
                    hit: h,
                    side,
                    ends: [seq[j].1, seq[j + 1].1],
                });
            }
        }
    }
    let hosted = host_map(&segment_edges);

    let mut out_faces = Vec::with_capacity(faces.len() + 4 * segment_edges.len());
    let mut face_parent = Vec::with_capacity(out_faces.capacity());
    let mut bad = BTreeSet::new();
    let none: Vec<FramePoint> = Vec::new();
    for (fi, &f) in faces.iter().enumerate() {
        let points: Vec<FramePoint> = frame_points
            .get(&fi)
            .unwrap_or(&none)
            .iter()
            .chain(extra_points.get(&fi).unwrap_or(&none))
            .copied()
            .collect();
        let segs = hosted.get(&fi).map(Vec::as_slice).unwrap_or(&[]);
        if points.is_empty() && segs.is_empty() {
            out_faces.push(f);
            face_parent.push(fi);
            continue;
        }
        let implicated = || -> Vec<usize> {
            let mut v: BTreeSet<usize> = segs.iter().map(|&s| hits[segment_edges[s].hit].0).collect();
            for (_, _, r) in &points {
                if let Some(r) = r {
                    v.extend(record_hits.get(r).into_iter().flatten().copied());
                }
            }
            v.into_iter().collect()
        };
        match triangulate_face(f, &points, segs.iter().map(|&s| segment_edges[s].vertices)) {
            Some(tris) => {
                face_parent.extend(std::iter::repeat_n(fi, tris.len()));
                out_faces.extend(tris);
            }
            None => bad.extend(implicated()),
        }
    }
    if !bad.is_empty() {
        return Err(bad.into_iter().collect());
    }

    let positions = provenance.apply(mesh.vertices());
    let mut out = TriMesh::new(positions, out_faces).map_err(|_| hits.iter().map(|(i, _)| *i).collect::<Vec<_>>())?;
    if mesh.rest_vertices().is_some() {
        let rest = provenance.apply(mesh.rest_or_current());
        out = out.with_rest(rest).expect("same length");
    }
    Ok(RemeshResult {
        mesh: out,
        provenance,
        face_parent,
        segment_edges,
        hits: hits_out,
        records: det.records.clone(),
        triple_points,
        loop_vertices,
        diagnostics: Vec::new(),
    })
}

/// Post-remesh vertex, its position in the host face's frame and the record
/// it realizes, if any.
type FramePoint = (usize, [f64; 2], Option<usize>);

/// Record images on a face, in its barycentric frame (corners at (0,0),
/// (1,0), (0,1)).
fn frame_points(
    f: [usize; 3],
    fi: usize,
    on_edges: &BTreeMap<[usize; 2], Vec<(f64, usize, usize)>>,
    in_faces: &BTreeMap<usize, Vec<([f64; 3], usize, usize)>>,
) -> Vec<FramePoint> {
    let mut points = Vec::new();
    for k in 0..3 {
        let (u, w) = (f[k], f[(k + 1) % 3]);
        let key = edge_key(u, w);
        for &(t, vid, r) in on_edges.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
            let s = if u == key[0] { t } else { 1.0 - t };
            let xy = match k {
                0 => [s, 0.0],
                1 => {
                    let x = 1.0 - s;
                    [x, 1.0 - x]
                }
                _ => [0.0, 1.0 - s],
            };
            points.push((vid, xy, Some(r)));
        }
    }
    for &(bary, vid, r) in in_faces.get(&fi).map(Vec::as_slice).unwrap_or(&[]) {
        points.push((vid, [bary[1], bary[2]], Some(r)));
    }
    points
}

struct Triples {
    /// Sorted face triple and, per face, the crossing in that face's frame.
    points: Vec<([usize; 3], Vec<(usize, [f64; 2])>)>,
    /// Per chord, the triple points along it in order from `vertices[0]`.
    along: Vec<Vec<usize>>,
}

/// Whether two segments on one line share more than nothing.
fn collinear_overlap(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let k = if (b[0] - a[0]).abs() >= (b[1] - a[1]).abs() { 0 } else { 1 };
    let (lo1, hi1) = (a[k].min(b[k]), a[k].max(b[k]));
    let (lo2, hi2) = (c[k].min(d[k]), c[k].max(d[k]));
    lo1 <= hi2 && lo2 <= hi1
}

/// Finds where two segments on the same face cross. Three faces meeting at a
/// point show it as a crossing on each of them; anything short of that
/// agreement, or a touching pair, returns the chords involved.
fn find_triple_points(
    chords: &[SegmentEdge],
    hosted: &BTreeMap<usize, Vec<usize>>,
    faces: &[[usize; 3]],
    frame_points: &BTreeMap<usize, Vec<FramePoint>>,
) -> std::result::Result<Triples, BTreeSet<usize>> {
    let frame = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let other_face = |c: usize| {
        let s = &chords[c];
        chords[if s.side == 0 { c + 1 } else { c - 1 }].host_face
    };
    let mut found: BTreeMap<[usize; 3], Vec<(usize, [f64; 2])>> = BTreeMap::new();
    let mut params: Vec<Vec<(f64, [usize; 3])>> = vec![Vec::new(); chords.len()];
    let mut bad = BTreeSet::new();
    for (&fi, list) in hosted {
        if list.len() < 2 {
            continue;
        }
        let mut xy: HashMap<usize, [f64; 2]> = HashMap::new();
        for k in 0..3 {
            xy.insert(faces[fi][k], frame[k]);
        }
        for &(v, p, _) in frame_points.get(&fi).map(Vec::as_slice).unwrap_or(&[]) {
            xy.insert(v, p);
        }
        for (i, &c1) in list.iter().enumerate() {
            for &c2 in &list[i + 1..] {
                let [a, b] = chords[c1].vertices;
                let [c, d] = chords[c2].vertices;
                if a == c || a == d || b == c || b == d {
                    continue;
                }
                let (Some(&pa), Some(&pb), Some(&pc), Some(&pd)) = (xy.get(&a), xy.get(&b), xy.get(&c), xy.get(&d)) else {
                    bad.extend([c1, c2]);
                    continue;
                };
                let (oc, od) = (orient2d(pa, pb, pc), orient2d(pa, pb, pd));
                let (oa, ob) = (orient2d(pc, pd, pa), orient2d(pc, pd, pb));
                if sign(oc) * sign(od) > 0 || sign(oa) * sign(ob) > 0 {
                    continue;
                }
                if [oa, ob, oc, od].iter().all(|&o| o == 0.0) && !collinear_overlap(pa, pb, pc, pd) {
                    // neighbouring pieces of one flat region of the other surface
                    continue;
                }
                if [oa, ob, oc, od].contains(&0.0) {
                    bad.extend([c1, c2]);
                    continue;
                }
                let t = oa / (oa - ob);
                let u = oc / (oc - od);
                let p = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let mut key = [fi, other_face(c1), other_face(c2)];
                key.sort_unstable();
                params[c1].push((t, key));
                params[c2].push((u, key));
                found.entry(key).or_default().push((fi, p));
            }
        }
    }
    let keys: Vec<[usize; 3]> = found.keys().copied().collect();
    let index: BTreeMap<[usize; 3], usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    for (key, at) in &found {
        let mut seen: Vec<usize> = at.iter().map(|&(f, _)| f).collect();
        seen.sort_unstable();
        if seen != key.to_vec() {
            for (c, ps) in params.iter().enumerate() {
                if ps.iter().any(|(_, k)| k == key) {
                    bad.insert(c);
                }
            }
        }
    }
    let along: Vec<Vec<usize>> = params
        .into_iter()
        .map(|mut ps| {
            ps.sort_by(|x, y| x.0.total_cmp(&y.0));
            ps.into_iter().map(|(_, k)| index[&k]).collect()
        })
        .collect();
    // both copies of a segment must be split at the same points in the same order
    for c in (0..chords.len()).step_by(2) {
        if along[c] != along[c + 1] {
            bad.extend([c, c + 1]);
        }
    }
    if !bad.is_empty() {
        return Err(bad);
    }
    Ok(Triples {
        points: found.into_iter().collect(),
        along,
    })
}

/// Constrained triangulation of one face in its barycentric frame
/// (corners at (0,0), (1,0), (0,1)). Returns `None` on any degeneracy.
fn triangulate_face(
    corners: [usize; 3],
    points: &[(usize, [f64; 2], Option<usize>)],
    constraints: impl Iterator<Item = [usize; 2]>,
) -> Option<Vec<[usize; 3]>> {
    let frame = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut ids: Vec<usize> = Vec::with_capacity(points.len() + 3);
    let mut handle_of: HashMap<usize, spade::handles::FixedVertexHandle> = HashMap::new();
    let mut insert = |id: usize, xy: [f64; 2], cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>| {
        let h = cdt.insert(Point2::new(xy[0], xy[1])).ok()?;
        if h.index() != ids.len() {
            return None;
        }
        ids.push(id);
        handle_of.insert(id, h);
        Some(())
    };
    for k in 0..3 {
        insert(corners[k], frame[k], &mut cdt)?;
    }
    for &(id, xy, _) in points {
        // strictly inside the frame, or strictly inside one of its edges
        let s = [
            sign(orient2d(frame[0], frame[1], xy)),
            sign(orient2d(frame[1], frame[2], xy)),
            sign(orient2d(frame[2], frame[0], xy)),
        ];
        if s.contains(&-1) || s.iter().filter(|&&x| x == 0).count() > 1 {
            return None;
        }
        insert(id, xy, &mut cdt)?;
    }
    for [a, b] in constraints {
        let (ha, hb) = (*handle_of.get(&a)?, *handle_of.get(&b)?);
        if !cdt.can_add_constraint(ha, hb) {
            return None;
        }
        cdt.add_constraint(ha, hb);
        if !cdt.exists_constraint(ha, hb) {
            return None;
        }
    }
    let tris: Vec<[usize; 3]> = cdt
        .inner_faces()
        .map(|f| f.vertices().map(|v| ids[v.fix().index()]))
        .collect();
    Some(tris)
}
