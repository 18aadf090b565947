use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvh::Bvh;
use crate::error::{Diagnostic, DiagnosticKind};
use crate::mesh::{edge_key, TriMesh};
use crate::predicates::{
    orient2d, orient3d, point_in_closed_triangle, project, projection_axis, segment_touches_triangle, sign,
    triangle_interiors_overlap,
};
use crate::Vec3;

/// Intersection points closer than this to a mesh vertex, or to an edge of
/// the pierced face, are treated as degenerate contacts.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-10;

/// Where an edge of one triangle passes through the interior of another.
/// Unique per `(edge, face)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRecord {
    /// Sorted vertex indices of the piercing edge.
    pub edge: [usize; 2],
    pub face: usize,
    /// Weights of `face`'s vertices, in face order.
    pub bary: [f64; 3],
    /// Position along `edge[0] -> edge[1]`.
    pub edge_param: f64,
    /// Records linked to this one by a triangle-pair test.
    pub partners: Vec<usize>,
    pub is_loop_vertex: bool,
    /// Shared vertices at which this record's segments end.
    pub loop_vertices: Vec<usize>,
}

impl IntersectionRecord {
    pub fn point_on_face(&self, mesh: &TriMesh) -> Vec3 {
        let [a, b, c] = mesh.face_positions(self.face);
        a * self.bary[0] + b * self.bary[1] + c * self.bary[2]
    }

    pub fn point_on_edge(&self, mesh: &TriMesh) -> Vec3 {
        let p = mesh.vertices()[self.edge[0]];
        let q = mesh.vertices()[self.edge[1]];
        p * (1.0 - self.edge_param) + q * self.edge_param
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    /// Generic crossing: the segment joins two records.
    Segment { records: [usize; 2] },
    /// The triangles share `vertex`; the segment runs from the record to it.
    LoopVertex { record: usize, vertex: usize },
}

/// One intersecting triangle pair, `faces[0] < faces[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrianglePairHit {
    pub faces: [usize; 2],
    pub contact: Contact,
}

impl TrianglePairHit {
    pub fn records(&self) -> impl Iterator<Item = usize> {
        match self.contact {
            Contact::Segment { records } => records.into_iter().take(2),
            Contact::LoopVertex { record, .. } => [record, record].into_iter().take(1),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Detection {
    /// Sorted by `(edge, face)`.
    pub records: Vec<IntersectionRecord>,
    /// Sorted by face pair.
    pub hits: Vec<TrianglePairHit>,
    pub diagnostics: Vec<Diagnostic>,
    pub candidate_pairs: usize,
    /// Face pairs skipped because of an exact degeneracy.
    pub degenerate_pairs: Vec<[usize; 2]>,
}

impl Detection {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct RawRecord {
    edge: [usize; 2],
    face: usize,
    bary: [f64; 3],
    t: f64,
}

enum EdgeTest {
    Miss,
    Cross(RawRecord),
    Degenerate,
}

#[derive(Debug)]
enum PairOutcome {
    Disjoint,
    Segment(RawRecord, RawRecord),
    Loop(RawRecord, usize),
    Degenerate(DiagnosticKind),
}

pub fn detect_self_intersections(mesh: &TriMesh) -> Detection {
    let bvh = Bvh::build(mesh);
    let pairs = bvh.self_pairs();
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(f, g)| classify_pair(mesh, f, g))
        .collect();

    let mut index: BTreeMap<([usize; 2], usize), usize> = BTreeMap::new();
    let mut records: Vec<IntersectionRecord> = Vec::new();
    let mut intern = |r: &RawRecord, records: &mut Vec<IntersectionRecord>| {
        *index.entry((r.edge, r.face)).or_insert_with(|| {
            records.push(IntersectionRecord {
                edge: r.edge,
                face: r.face,
                bary: r.bary,
                edge_param: r.t,
                partners: Vec::new(),
                is_loop_vertex: false,
                loop_vertices: Vec::new(),
            });
            records.len() - 1
        })
    };

    let mut hits = Vec::new();
    let mut diagnostics = Vec::new();
    let mut degenerate_pairs = Vec::new();
    for (&(f, g), outcome) in pairs.iter().zip(&outcomes) {
        match outcome {
            PairOutcome::Disjoint => {}
            PairOutcome::Segment(r1, r2) => {
                let a = intern(r1, &mut records);
                let b = intern(r2, &mut records);
                records[a].partners.push(b);
                records[b].partners.push(a);
                hits.push(TrianglePairHit {
                    faces: [f, g],
                    contact: Contact::Segment { records: [a, b] },
                });
            }
            PairOutcome::Loop(r, v) => {
                let a = intern(r, &mut records);
                records[a].is_loop_vertex = true;
                records[a].loop_vertices.push(*v);
                hits.push(TrianglePairHit {
                    faces: [f, g],
                    contact: Contact::LoopVertex { record: a, vertex: *v },
                });
            }
            PairOutcome::Degenerate(kind) => {
                degenerate_pairs.push([f, g]);
                diagnostics.push(Diagnostic::new(*kind, format!("faces {f} and {g}; pair skipped")));
            }
        }
    }

    // canonical record order
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| (records[i].edge, records[i].face));
    let mut remap = vec![0; records.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let mut sorted: Vec<IntersectionRecord> = order.iter().map(|&i| records[i].clone()).collect();
    for r in &mut sorted {
        for p in &mut r.partners {
            *p = remap[*p];
        }
        r.partners.sort_unstable();
        r.loop_vertices.sort_unstable();
    }
    for h in &mut hits {
        h.contact = match h.contact {
            Contact::Segment { records: [a, b] } => Contact::Segment {
                records: [remap[a], remap[b]],
            },
            Contact::LoopVertex { record, vertex } => Contact::LoopVertex {
                record: remap[record],
                vertex,
            },
        };
    }

    Detection {
        records: sorted,
        hits,
        diagnostics,
        candidate_pairs: pairs.len(),
        degenerate_pairs,
    }
}

fn classify_pair(mesh: &TriMesh, f: usize, g: usize) -> PairOutcome {
    let fv = mesh.faces()[f];
    let gv = mesh.faces()[g];
    let shared: Vec<usize> = fv.iter().copied().filter(|v| gv.contains(v)).collect();
    if shared.len() >= 2 {
        return PairOutcome::Disjoint;
    }
    let pos = mesh.vertices();
    let fp = fv.map(|i| pos[i]);
    let gp = gv.map(|i| pos[i]);

    // side of each vertex relative to the other triangle's plane
    let side_g: [i8; 3] = std::array::from_fn(|k| sign(orient3d(&fp[0], &fp[1], &fp[2], &gp[k])));
    let side_f: [i8; 3] = std::array::from_fn(|k| sign(orient3d(&gp[0], &gp[1], &gp[2], &fp[k])));
    let one_sided = |sides: [i8; 3], verts: [usize; 3]| {
        let s: Vec<i8> = (0..3).filter(|&k| !shared.contains(&verts[k])).map(|k| sides[k]).collect();
        s.iter().all(|&x| x > 0) || s.iter().all(|&x| x < 0)
    };
    if one_sided(side_g, gv) || one_sided(side_f, fv) {
        return PairOutcome::Disjoint;
    }
    if side_g.iter().all(|&s| s == 0) {
        let axis = projection_axis(&fp[0], &fp[1], &fp[2]);
        let a = fp.map(|p| project(&p, axis));
        let b = gp.map(|p| project(&p, axis));
        return if triangle_interiors_overlap(a, b) {
            PairOutcome::Degenerate(DiagnosticKind::CoplanarOverlap)
        } else {
            PairOutcome::Disjoint
        };
    }

    match shared.first() {
        None => {
            let mut crossings = Vec::with_capacity(2);
            for (verts, face) in [(fv, g), (gv, f)] {
                for k in 0..3 {
                    let (p, q) = (verts[k], verts[(k + 1) % 3]);
                    match edge_face(mesh, p, q, face) {
                        EdgeTest::Miss => {}
                        EdgeTest::Cross(r) => crossings.push(r),
                        EdgeTest::Degenerate => return PairOutcome::Degenerate(DiagnosticKind::DegenerateContact),
                    }
                }
            }
            match crossings.as_slice() {
                [] => PairOutcome::Disjoint,
                [a, b] => PairOutcome::Segment(*a, *b),
                _ => PairOutcome::Degenerate(DiagnosticKind::DegenerateContact),
            }
        }
        Some(&v) => {
            // edges through the shared vertex can only meet the other
            // triangle's plane at that vertex unless they lie in it
            for (verts, sides, other) in [(fv, side_f, gp), (gv, side_g, fp)] {
                for k in 0..3 {
                    if verts[k] != v && sides[k] == 0 && in_plane_edge_enters(&pos[v], &pos[verts[k]], &other) {
                        return PairOutcome::Degenerate(DiagnosticKind::DegenerateContact);
                    }
                }
            }
            let mut crossings = Vec::with_capacity(1);
            for (verts, face) in [(fv, g), (gv, f)] {
                let opp: Vec<usize> = verts.iter().copied().filter(|&x| x != v).collect();
                match edge_face(mesh, opp[0], opp[1], face) {
                    EdgeTest::Miss => {}
                    EdgeTest::Cross(r) => crossings.push(r),
                    EdgeTest::Degenerate => return PairOutcome::Degenerate(DiagnosticKind::DegenerateContact),
                }
            }
            match crossings.as_slice() {
                [] => PairOutcome::Disjoint,
                [r] => PairOutcome::Loop(*r, v),
                _ => PairOutcome::Degenerate(DiagnosticKind::DegenerateContact),
            }
        }
    }
}

/// For an edge `v -> a` lying in the plane of the other triangle, which has
/// `v` as a corner: does it point into that triangle's corner wedge?
fn in_plane_edge_enters(v: &Vec3, a: &Vec3, other: &[Vec3; 3]) -> bool {
    let axis = projection_axis(&other[0], &other[1], &other[2]);
    let corner = (0..3).find(|&k| other[k] == *v).expect("shared vertex is a corner");
    let b1 = project(&other[(corner + 1) % 3], axis);
    let b2 = project(&other[(corner + 2) % 3], axis);
    let pv = project(v, axis);
    let pa = project(a, axis);
    let o = sign(orient2d(pv, b1, b2));
    sign(orient2d(pv, b1, pa)) * o >= 0 && sign(orient2d(pv, pa, b2)) * o >= 0
}

fn edge_face(mesh: &TriMesh, p: usize, q: usize, face: usize) -> EdgeTest {
    let [p, q] = edge_key(p, q);
    let pos = mesh.vertices();
    let (pp, qq) = (pos[p], pos[q]);
    let [a, b, c] = mesh.face_positions(face);
    let sp = orient3d(&a, &b, &c, &pp);
    let sq = orient3d(&a, &b, &c, &qq);
    let (ssp, ssq) = (sign(sp), sign(sq));
    if ssp * ssq > 0 {
        return EdgeTest::Miss;
    }
    let axis = || projection_axis(&a, &b, &c);
    if ssp == 0 && ssq == 0 {
        let ax = axis();
        let t = [a, b, c].map(|x| project(&x, ax));
        return if segment_touches_triangle(project(&pp, ax), project(&qq, ax), t) {
            EdgeTest::Degenerate
        } else {
            EdgeTest::Miss
        };
    }
    if ssp == 0 || ssq == 0 {
        let on = if ssp == 0 { pp } else { qq };
        let ax = axis();
        let t = [a, b, c].map(|x| project(&x, ax));
        return if point_in_closed_triangle(project(&on, ax), t) {
            EdgeTest::Degenerate
        } else {
            EdgeTest::Miss
        };
    }
    let w_c = orient3d(&pp, &qq, &a, &b);
    let w_a = orient3d(&pp, &qq, &b, &c);
    let w_b = orient3d(&pp, &qq, &c, &a);
    let s = [sign(w_a), sign(w_b), sign(w_c)];
    if s.contains(&1) && s.contains(&-1) {
        return EdgeTest::Miss;
    }
    if s.contains(&0) {
        return EdgeTest::Degenerate;
    }
    let t = sp / (sp - sq);
    let sum = w_a + w_b + w_c;
    let bary = [w_a / sum, w_b / sum, w_c / sum];

    let len = (qq - pp).norm();
    if t * len < COINCIDENCE_TOLERANCE || (1.0 - t) * len < COINCIDENCE_TOLERANCE {
        return EdgeTest::Degenerate;
    }
    let twice_area = (b - a).cross(&(c - a)).norm();
    let opposite = [(c - b).norm(), (a - c).norm(), (b - a).norm()];
    for k in 0..3 {
        if bary[k] * twice_area / opposite[k] < COINCIDENCE_TOLERANCE {
            return EdgeTest::Degenerate;
        }
    }
    if !(t > 0.0 && t < 1.0) {
        return EdgeTest::Degenerate;
    }
    EdgeTest::Cross(RawRecord {
        edge: [p, q],
        face,
        bary,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn far_apart_components() {
        let m = fixtures::unit_cube().merged(&fixtures::unit_cube().translated(Vec3::new(5.0, 0.0, 0.0)));
        let d = detect_self_intersections(&m);
        assert!(d.records.is_empty() && d.hits.is_empty() && d.diagnostics.is_empty());
    }

    #[test]
    fn crossing_pair_gives_two_partnered_records() {
        let m = fixtures::crossing_triangles();
        let d = detect_self_intersections(&m);
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.hits.len(), 1);
        assert_eq!(d.records[0].partners, vec![1]);
        assert_eq!(d.records[1].partners, vec![0]);
        for r in &d.records {
            assert!(!r.is_loop_vertex);
            assert_eq!(r.face, 0);
            assert!((r.bary.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(r.bary.iter().all(|&w| (0.0..=1.0).contains(&w)));
            assert!((r.point_on_face(&m) - r.point_on_edge(&m)).norm() < 1e-12);
            assert!(r.point_on_face(&m).z.abs() < 1e-15);
        }
    }

    #[test]
    fn shared_vertex_pair_gives_one_loop_record() {
        let m = fixtures::loop_vertex_pair();
        let d = detect_self_intersections(&m);
        assert_eq!(d.records.len(), 1);
        let r = &d.records[0];
        assert!(r.is_loop_vertex);
        assert_eq!(r.loop_vertices, vec![0]);
        assert_eq!(r.edge, [3, 4]);
        assert_eq!(r.face, 0);
        assert!(matches!(d.hits[0].contact, Contact::LoopVertex { record: 0, vertex: 0 }));
    }

    #[test]
    fn flat_sheet_and_closed_solids_are_clean() {
        for m in [
            fixtures::grid_sheet(6, 5, 1.0, 1.0),
            fixtures::unit_cube(),
            fixtures::regular_tetrahedron(1.0),
            fixtures::open_tube(12, 6, 0.3, 1.0),
        ] {
            let d = detect_self_intersections(&m);
            assert!(d.hits.is_empty(), "{:?}", d.hits);
            assert!(d.diagnostics.is_empty(), "{:?}", d.diagnostics);
        }
    }

    #[test]
    fn coplanar_overlap_is_reported() {
        let v = vec![
            Vec3::zeros(),
            Vec3::x(),
            Vec3::y(),
            Vec3::new(0.2, 0.2, 0.0),
            Vec3::new(1.2, 0.2, 0.0),
            Vec3::new(0.2, 1.2, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let d = detect_self_intersections(&m);
        assert!(d.hits.is_empty());
        assert_eq!(d.diagnostics[0].kind, DiagnosticKind::CoplanarOverlap);
        assert_eq!(d.degenerate_pairs, vec![[0, 1]]);
    }

    #[test]
    fn edge_through_edge_is_degenerate() {
        // vertical triangle whose edge passes exactly through the other's edge
        let v = vec![
            Vec3::zeros(),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
            Vec3::new(1.0, 0.0, -1.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, -1.0, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let d = detect_self_intersections(&m);
        assert!(d.hits.is_empty());
        assert_eq!(d.diagnostics.len(), 1);
        assert_eq!(d.diagnostics[0].kind, DiagnosticKind::DegenerateContact);
    }
}
