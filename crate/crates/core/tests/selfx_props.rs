use std::collections::BTreeSet;

use proptest::prelude::*;

use senc_core::selfx::{detect_self_intersections, remesh_on_intersections};
use senc_core::{fixtures, TriMesh, Vec3};

fn orient(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a))
}

/// Does segment pq pass through the interior of triangle abc.
fn segment_hits_triangle(p: &Vec3, q: &Vec3, t: [&Vec3; 3]) -> bool {
    let [a, b, c] = t;
    let (sp, sq) = (orient(a, b, c, p), orient(a, b, c, q));
    if sp * sq >= 0.0 {
        return false;
    }
    let s = [orient(p, q, a, b), orient(p, q, b, c), orient(p, q, c, a)];
    s.iter().all(|&x| x > 0.0) || s.iter().all(|&x| x < 0.0)
}

/// Pairs of faces without a shared vertex whose interiors cross.
fn oracle_pairs(mesh: &TriMesh) -> BTreeSet<[usize; 2]> {
    let faces = mesh.faces();
    let p = mesh.vertices();
    let mut out = BTreeSet::new();
    for f in 0..faces.len() {
        for g in f + 1..faces.len() {
            let (a, b) = (faces[f], faces[g]);
            if a.iter().any(|v| b.contains(v)) {
                continue;
            }
            let ta = [&p[a[0]], &p[a[1]], &p[a[2]]];
            let tb = [&p[b[0]], &p[b[1]], &p[b[2]]];
            let crosses = (0..3).any(|k| segment_hits_triangle(&p[a[k]], &p[a[(k + 1) % 3]], tb))
                || (0..3).any(|k| segment_hits_triangle(&p[b[k]], &p[b[(k + 1) % 3]], ta));
            if crosses {
                out.insert([f, g]);
            }
        }
    }
    out
}

fn soup(points: &[[f64; 3]]) -> TriMesh {
    let v: Vec<Vec3> = points.iter().map(|&p| Vec3::from(p)).collect();
    let faces = (0..v.len() / 3).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    TriMesh::new(v, faces).unwrap()
}

fn soup_points() -> impl Strategy<Value = Vec<[f64; 3]>> {
    (4..80usize).prop_flat_map(|n| prop::collection::vec(prop::array::uniform3(0.0..1.0f64), 3 * n))
}

fn rotation(axis: [f64; 3], angle: f64) -> nalgebra::Rotation3<f64> {
    let axis = Vec3::from(axis);
    let axis = if axis.norm() < 1e-3 { Vec3::z() } else { axis };
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
}

fn two_cubes(axis: [f64; 3], angle: f64, offset: [f64; 3]) -> TriMesh {
    let cube = fixtures::unit_cube();
    let r = rotation(axis, angle);
    let moved = cube.map_positions(|p| r * p + Vec3::from(offset));
    cube.merged(&moved)
}

/// Remesh invariants shared by every input.
fn check_remesh(mesh: &TriMesh) -> Result<(), TestCaseError> {
    let det = detect_self_intersections(mesh);
    prop_assert!(det.degenerate_pairs.is_empty());
    let got: BTreeSet<[usize; 2]> = det
        .hits
        .iter()
        .map(|h| {
            let [f, g] = h.faces;
            [f.min(g), f.max(g)]
        })
        .collect();
    prop_assert_eq!(&got, &oracle_pairs(mesh));

    let r = remesh_on_intersections(mesh, &det).unwrap();
    let (dev, nonneg) = r.provenance.convexity();
    prop_assert!(nonneg && dev < 1e-12);
    for (a, b) in r.provenance.apply(mesh.vertices()).iter().zip(r.mesh.vertices()) {
        prop_assert!((a - b).norm() <= 1e-9);
    }
    let (before, after) = (mesh.surface_area(), r.mesh.surface_area());
    prop_assert!((before - after).abs() <= 1e-9 * before);
    prop_assert!(r.area_partition_error(mesh) <= 1e-9);

    let curve: BTreeSet<usize> = r.segment_edges.iter().flat_map(|s| s.vertices).collect();
    let again = detect_self_intersections(&r.mesh);
    prop_assert!(again.hits.is_empty() && again.records.is_empty());
    let on_curve = |f: usize| r.mesh.faces()[f].iter().any(|v| curve.contains(v));
    for &[f, g] in &again.degenerate_pairs {
        prop_assert!(on_curve(f) && on_curve(g));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_soup_matches_oracle(points in soup_points()) {
        check_remesh(&soup(&points))?;
    }

    #[test]
    fn overlapping_cubes_match_oracle(
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in 0.05..3.0f64,
        offset in prop::array::uniform3(-0.6..0.6f64),
    ) {
        let mesh = two_cubes(axis, angle, offset);
        check_remesh(&mesh)?;
    }
}
