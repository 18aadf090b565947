use proptest::prelude::*;

use senc_core::closure::LoopSelection;
use senc_core::pipeline::run_pipeline;
use senc_core::volume::signed_volume;
use senc_core::{fixtures, TriMesh, Vec3};

fn rotation(axis: [f64; 3], angle: f64) -> nalgebra::Rotation3<f64> {
    let axis = Vec3::from(axis);
    let axis = if axis.norm() < 1e-3 { Vec3::z() } else { axis };
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle)
}

/// Unit cube plus a rotated, shifted copy that overlaps it.
fn two_cubes(axis: [f64; 3], angle: f64, offset: [f64; 3]) -> TriMesh {
    let cube = fixtures::unit_cube();
    let r = rotation(axis, angle);
    cube.merged(&cube.map_positions(|p| r * p + Vec3::from(offset)))
}

fn cube_pair() -> impl Strategy<Value = TriMesh> {
    (
        prop::array::uniform3(-1.0..1.0f64),
        0.05..3.0f64,
        prop::array::uniform3(-0.5..0.5f64),
    )
        .prop_map(|(a, t, o)| two_cubes(a, t, o))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_volume_ignores_the_origin(n in 1..5usize, t in prop::array::uniform3(-50.0..50.0f64)) {
        let c = fixtures::subdivided_cube(n).translated(Vec3::from(t));
        let vol = signed_volume(c.faces(), c.vertices());
        prop_assert!((vol - 1.0).abs() <= 1e-10, "{vol}");
    }

    #[test]
    fn loss_is_a_nonnegative_sum_over_regions(mesh in cube_pair()) {
        let r = run_pipeline(&mesh, &LoopSelection::All).unwrap();
        let loss = &r.loss;
        prop_assert!(loss.value >= 0.0);
        prop_assert!(loss.per_region.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(loss.per_region.len(), r.regions.len());
        let sum: f64 = loss.per_region.iter().sum();
        prop_assert!((sum - loss.value).abs() <= 1e-14 * loss.value.max(1.0));
        prop_assert_eq!(loss.gradient.len(), mesh.num_vertices());
        prop_assert!(loss.gradient.iter().all(|g| g.iter().all(|c| c.is_finite())));
    }

    #[test]
    fn loss_ignores_translation(mesh in cube_pair(), t in prop::array::uniform3(-5.0..5.0f64)) {
        let base = run_pipeline(&mesh, &LoopSelection::All).unwrap().loss;
        let moved = run_pipeline(&mesh.translated(Vec3::from(t)), &LoopSelection::All).unwrap().loss;
        prop_assume!(base.value > 0.0);
        // rounding in the tetrahedron sum grows with the cube of the coordinates
        let reach = 2.0 + t.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-10 * base.value + 1e-14 * reach.powi(3);
        prop_assert!((base.value - moved.value).abs() <= tol, "{} vs {}", base.value, moved.value);
        // moving every vertex together leaves the loss alone, so the gradient has no net force
        for g in [&base.gradient, &moved.gradient] {
            let scale = g.iter().map(|v| v.amax()).fold(0.0, f64::max);
            let net: Vec3 = g.iter().sum();
            prop_assert!(net.amax() <= 1e-9 * scale * g.len() as f64, "{net:?}");
        }
    }

    #[test]
    fn loss_scales_with_the_cube_of_length(mesh in cube_pair(), s in 0.1..10.0f64) {
        let base = run_pipeline(&mesh, &LoopSelection::All).unwrap().loss.value;
        let scaled = run_pipeline(&mesh.scaled(s), &LoopSelection::All).unwrap().loss.value;
        prop_assert!(relative(scaled, base * s.powi(3)) <= 1e-9, "{scaled} vs {}", base * s.powi(3));
    }
}
