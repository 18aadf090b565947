use std::collections::BTreeSet;

use proptest::prelude::*;

use senc_core::closure::LoopSelection;
use senc_core::gia::{group_boundary, RegionKind};
use senc_core::pipeline::run_pipeline;
use senc_core::report::AnalysisReport;
use senc_core::{fixtures, TriMesh, Vec3};

mod common;

fn offset_cube(d: Vec3) -> TriMesh {
    fixtures::unit_cube().translated(d)
}

fn overlap(d: Vec3) -> f64 {
    d.iter().map(|c| (1.0 - c.abs()).max(0.0)).product()
}

/// Component magnitudes in [0.15, 0.85] with random signs.
fn shift() -> impl Strategy<Value = Vec3> {
    (prop::array::uniform3(0.15..0.85f64), prop::array::uniform3(any::<bool>()))
        .prop_map(|(m, s)| Vec3::from([0, 1, 2].map(|k| if s[k] { m[k] } else { -m[k] })))
}

fn corner_overlap(d: &Vec3) -> bool {
    d.iter().all(|c| (0.15..=0.85).contains(&c.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_cubes_lose_their_overlap_volume(d in shift()) {
        let mesh = fixtures::unit_cube().merged(&offset_cube(d));
        let r = run_pipeline(&mesh, &LoopSelection::All).unwrap();
        prop_assert!(!r.has_degeneracies());
        prop_assert_eq!(r.gia.paths.len(), 2);
        prop_assert_eq!(r.regions.len(), 1);
        prop_assert_eq!(r.regions[0].kind, RegionKind::TwoRegion);
        let want = overlap(d);
        prop_assert!((r.loss.value - want).abs() <= 1e-12, "{} vs {}", r.loss.value, want);
    }

    #[test]
    fn subdivided_cube_is_closed_with_unit_volume(n in 1..8usize) {
        let c = fixtures::subdivided_cube(n);
        prop_assert!(c.topology().is_closed());
        let vol = senc_core::volume::signed_volume(c.faces(), c.vertices());
        prop_assert!((vol - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_cubes_add_pairwise_overlaps(d1 in shift(), d2 in shift()) {
        prop_assume!(corner_overlap(&(d2 - d1)));
        let cube = fixtures::subdivided_cube(6);
        let mesh = cube.merged(&cube.translated(d1)).merged(&cube.translated(d2));
        let r = run_pipeline(&mesh, &LoopSelection::All).unwrap();
        prop_assert!(!r.has_degeneracies());
        prop_assert_eq!(r.gia.paths.len(), 6);
        prop_assert_eq!(r.regions.len(), 3);
        let want = overlap(d1) + overlap(d2) + overlap(d2 - d1);
        prop_assert!((r.loss.value - want).abs() <= 1e-12, "{} vs {}", r.loss.value, want);
    }
}

fn jittered(mesh: &TriMesh, seed: u64, amount: f64) -> TriMesh {
    let x = common::jitter(mesh.vertices(), amount, &mut common::rng(seed));
    mesh.with_positions(x).unwrap()
}

fn check_groups(mesh: &TriMesh, loops: &LoopSelection) {
    let r = run_pipeline(mesh, loops).unwrap();
    assert!(!r.regions.is_empty());
    let faces = r.remesh.mesh.faces();
    for g in &r.regions {
        for (group, &p) in g.face_groups.iter().zip(&g.paths) {
            // the complement is everything else; the boundary between them is the path
            let inside: BTreeSet<usize> = group.iter().copied().collect();
            assert_eq!(inside.len(), group.len());
            let rest: Vec<usize> = (0..faces.len()).filter(|f| !inside.contains(f)).collect();
            assert_eq!(rest.len() + group.len(), faces.len());
            assert_eq!(group_boundary(group, faces), r.gia.paths[p].edge_set());
        }
    }
}

#[test]
fn face_groups_are_bounded_by_their_paths() {
    let torus = fixtures::torus_through_itself(Default::default());
    let fold = fixtures::folded_sheet(Default::default());
    for seed in 0..4 {
        check_groups(&jittered(&torus, seed, 1e-3), &LoopSelection::All);
        check_groups(&jittered(&fold, seed, 5e-4), &LoopSelection::None);
    }
}

#[test]
fn regions_do_not_depend_on_thread_count() {
    let torus = fixtures::torus_through_itself(Default::default());
    let run = || {
        let r = run_pipeline(&torus, &LoopSelection::All).unwrap();
        (r.regions.clone(), serde_json::to_string(&AnalysisReport::new(torus.num_faces(), torus.num_vertices(), &r)).unwrap())
    };
    let base = run();
    for n in [1, 2, 5] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        assert_eq!(pool.install(run), base);
    }
}
