//! Central finite-difference checks of every analytic gradient, including
//! the self-collision volume with its combinatorics frozen.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closure::LoopSelection;
use crate::energy::{BodySdf, EnergyModel, EnergyParams, SimState};
use crate::error::Result;
use crate::mesh::TriMesh;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckOptions {
    pub seed: u64,
    /// Random displacement amplitude relative to the bounding-box diagonal.
    pub perturbation: f64,
    pub step: f64,
    pub tolerance: f64,
    /// Analytic gradients whose largest coordinate is below this are zero.
    pub zero_floor: f64,
    /// Differences below this count as truncation noise when the analytic
    /// gradient is zero.
    pub noise_floor: f64,
    /// Scales the named term's analytic gradient; exists to prove the check
    /// can fail.
    pub corrupt: Option<String>,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            perturbation: 1e-3,
            step: 1e-6,
            tolerance: 1e-4,
            zero_floor: 1e-10,
            noise_floor: 1e-6,
            corrupt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermCheck {
    pub term: String,
    pub max_relative_error: f64,
    pub passed: bool,
    pub notice: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub seed: u64,
    pub step: f64,
    pub tolerance: f64,
    pub terms: Vec<TermCheck>,
    pub passed: bool,
}

/// Central differences of `f` at `x` along every coordinate.
pub fn finite_difference(x: &[Vec3], step: f64, f: impl Fn(&[Vec3]) -> f64) -> Vec<Vec3> {
    let mut y = x.to_vec();
    let mut g = vec![Vec3::zeros(); x.len()];
    for i in 0..x.len() {
        for k in 0..3 {
            let orig = y[i][k];
            y[i][k] = orig + step;
            let fp = f(&y);
            y[i][k] = orig - step;
            let fm = f(&y);
            y[i][k] = orig;
            g[i][k] = (fp - fm) / (2.0 * step);
        }
    }
    g
}

/// Largest coordinate difference divided by the largest coordinate of
/// either gradient, or `None` when the analytic gradient is below `floor` and
/// the numeric one below `noise`.
pub fn relative_error(analytic: &[Vec3], numeric: &[Vec3], floor: f64, noise: f64) -> Option<f64> {
    let amax = |g: &[Vec3]| g.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let (a, n) = (amax(analytic), amax(numeric));
    if a < floor && n < noise {
        return None;
    }
    let scale = a.max(n);
    let diff = analytic.iter().zip(numeric).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
    Some(diff / scale)
}

fn bbox_diagonal(x: &[Vec3]) -> f64 {
    let b = crate::bvh::Aabb::from_points(x.iter());
    (b.max - b.min).norm()
}

fn random_offsets(rng: &mut ChaCha8Rng, n: usize, amount: f64) -> Vec<Vec3> {
    (0..n)
        .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amount)
        .collect()
}

/// Checks each term at a seeded random perturbation of the mesh's current
/// positions. With `perturbation == 0` the check runs at the positions as
/// given and a random previous state of zero velocity.
pub fn gradcheck(
    mesh: &TriMesh,
    params: &EnergyParams,
    body: &BodySdf,
    loops: &LoopSelection,
    options: &GradcheckOptions,
) -> Result<GradcheckReport> {
    let model = EnergyModel::new(mesh, params.clone(), body.clone())?.with_loops(loops.clone());
    let n = mesh.num_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let amount = options.perturbation * bbox_diagonal(mesh.vertices());
    let x: Vec<Vec3> = mesh
        .vertices()
        .iter()
        .zip(random_offsets(&mut rng, n, amount))
        .map(|(p, d)| p + d)
        .collect();
    let mut state = SimState::at_rest(mesh.vertices());
    if amount > 0.0 {
        state.x_prev = mesh.vertices().iter().zip(random_offsets(&mut rng, n, amount)).map(|(p, d)| p + d).collect();
        state.external_force = model.external_forces(&random_offsets(&mut rng, n, 1.0));
    }

    let mut terms = Vec::new();
    let mut record = |name: &str, analytic: Vec<Vec3>, numeric: Vec<Vec3>, skip: Option<String>| {
        let mut analytic = analytic;
        if options.corrupt.as_deref() == Some(name) {
            for g in &mut analytic {
                *g = *g * 1.01 + Vec3::repeat(1e-3 * g.amax().max(1.0));
            }
        }
        let check = match (skip, relative_error(&analytic, &numeric, options.zero_floor, options.noise_floor)) {
            (Some(notice), _) => TermCheck {
                term: name.into(),
                max_relative_error: 0.0,
                passed: true,
                notice: Some(notice),
            },
            (None, None) => TermCheck {
                term: name.into(),
                max_relative_error: 0.0,
                passed: true,
                notice: Some("gradient is zero here; check is vacuous".into()),
            },
            (None, Some(e)) => TermCheck {
                term: name.into(),
                max_relative_error: e,
                passed: e < options.tolerance,
                notice: None,
            },
        };
        terms.push(check);
    };
    let h = options.step;
    let fd = |f: &dyn Fn(&[Vec3]) -> f64| finite_difference(&x, h, f);

    let (frozen, _) = model.freeze_self_collision(&x)?;
    if frozen.regions.is_empty() {
        record("self_collision", vec![], vec![], Some("no penetration present; volume check skipped".into()));
    } else {
        let analytic = frozen.evaluate(&x)?.gradient;
        record("self_collision", analytic, fd(&|y| frozen.value(y)), None);
    }
    record("stretching", model.stretching(&x).gradient, fd(&|y| model.stretching(y).value), None);
    record("bending", model.bending(&x).gradient, fd(&|y| model.bending(y).value), None);
    if body.primitives.is_empty() {
        record("collision", vec![], vec![], Some("no body primitives; check skipped".into()));
    } else {
        record("collision", model.collision(&x).gradient, fd(&|y| model.collision(y).value), None);
    }
    record("inertia", model.inertia(&state, &x).gradient, fd(&|y| model.inertia(&state, y).value), None);
    record("external", model.external(&state, &x).gradient, fd(&|y| model.external(&state, y).value), None);
    let rep = model.repulsive(&x)?.0.gradient;
    record("repulsive", rep, fd(&|y| model.repulsive(y).map(|t| t.0.value).unwrap_or(f64::NAN)), None);

    let passed = terms.iter().all(|t| t.passed);
    Ok(GradcheckReport {
        seed: options.seed,
        step: h,
        tolerance: options.tolerance,
        terms,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rest_state_without_penetration_is_vacuous() {
        let m = fixtures::grid_sheet(3, 3, 1.0, 1.0).rest_from_current();
        let opts = GradcheckOptions {
            perturbation: 0.0,
            ..Default::default()
        };
        let params = EnergyParams {
            gravity: [0.0; 3],
            ..Default::default()
        };
        let r = gradcheck(&m, &params, &BodySdf::default(), &LoopSelection::None, &opts).unwrap();
        assert!(r.passed, "{:?}", r.terms);
        let sc = &r.terms[0];
        assert_eq!(sc.term, "self_collision");
        assert!(sc.notice.as_deref().unwrap().contains("skipped"));
        assert!(r.terms.iter().filter(|t| t.term == "stretching" || t.term == "bending").all(|t| t.notice.is_some()));
    }

    #[test]
    fn corrupted_gradient_fails() {
        let m = fixtures::grid_sheet(3, 3, 1.0, 1.0).rest_from_current();
        let opts = GradcheckOptions {
            perturbation: 0.01,
            corrupt: Some("stretching".into()),
            ..Default::default()
        };
        let r = gradcheck(&m, &EnergyParams::default(), &BodySdf::default(), &LoopSelection::None, &opts).unwrap();
        assert!(!r.passed);
        let bad: Vec<&str> = r.terms.iter().filter(|t| !t.passed).map(|t| t.term.as_str()).collect();
        assert_eq!(bad, vec!["stretching"]);
    }
}
