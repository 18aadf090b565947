//! Cloth energy terms with analytic gradients: St. Venant-Kirchhoff
//! stretching, hinge bending, body-collision penalty, inertia, external
//! forces, a log-barrier repulsion baseline and the self-collision volume.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3x2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closure::LoopSelection;
use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::mesh::TriMesh;
use crate::pipeline::run_pipeline;
use crate::proximity::build_self_collision_edges_at;
use crate::volume::FrozenSelfCollision;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub lame_mu: f64,
    pub lame_lambda: f64,
    pub bending_stiffness: f64,
    /// Areal density in kg/m^2; vertex masses are lumped from rest areas.
    pub density: f64,
    pub epsilon_col: f64,
    pub collision_exponent: f64,
    pub dt: f64,
    pub gravity: [f64; 3],
    pub repulsive_threshold: f64,
    pub stretching_weight: f64,
    pub bending_weight: f64,
    pub collision_weight: f64,
    pub inertia_weight: f64,
    pub external_weight: f64,
    pub selfcol_weight: f64,
    pub repulsive_weight: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            lame_mu: 2.36e4,
            lame_lambda: 4.44e4,
            bending_stiffness: 3.96e-5,
            density: 0.2,
            epsilon_col: 0.0,
            collision_exponent: 1.0,
            dt: 1.0 / 30.0,
            gravity: [0.0, 0.0, -9.81],
            repulsive_threshold: 0.05,
            stretching_weight: 1.0,
            bending_weight: 1.0,
            collision_weight: 1.0,
            inertia_weight: 1.0,
            external_weight: 1.0,
            selfcol_weight: 1.0,
            repulsive_weight: 0.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lame_mu", self.lame_mu),
            ("lame_lambda", self.lame_lambda),
            ("bending_stiffness", self.bending_stiffness),
            ("density", self.density),
            ("dt", self.dt),
            ("repulsive_threshold", self.repulsive_threshold),
            ("collision_exponent", self.collision_exponent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.epsilon_col >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon_col must be nonnegative, got {}", self.epsilon_col)));
        }
        if self.collision_exponent < 1.0 {
            return Err(Error::InvalidParameter("collision_exponent must be at least 1".into()));
        }
        Ok(())
    }

    pub fn gravity(&self) -> Vec3 {
        Vec3::from(self.gravity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Primitive {
    Sphere { center: [f64; 3], radius: f64 },
    Capsule { a: [f64; 3], b: [f64; 3], radius: f64 },
    /// Solid on the side opposite `normal`.
    HalfSpace { point: [f64; 3], normal: [f64; 3] },
}

impl Primitive {
    /// Signed distance and its gradient.
    pub fn eval(&self, x: &Vec3) -> (f64, Vec3) {
        match *self {
            Primitive::Sphere { center, radius } => radial(x - Vec3::from(center), radius),
            Primitive::Capsule { a, b, radius } => {
                let (a, b) = (Vec3::from(a), Vec3::from(b));
                let ab = b - a;
                let len2 = ab.norm_squared();
                let t = if len2 > 0.0 { ((x - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
                radial(x - (a + ab * t), radius)
            }
            Primitive::HalfSpace { point, normal } => {
                let n = Vec3::from(normal).normalize();
                ((x - Vec3::from(point)).dot(&n), n)
            }
        }
    }
}

fn radial(d: Vec3, radius: f64) -> (f64, Vec3) {
    let r = d.norm();
    let dir = if r > 0.0 { d / r } else { Vec3::z() };
    (r - radius, dir)
}

/// Union of primitives; the distance is the minimum over them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BodySdf {
    pub primitives: Vec<Primitive>,
}

impl BodySdf {
    pub fn eval(&self, x: &Vec3) -> Option<(f64, Vec3)> {
        self.primitives
            .iter()
            .map(|p| p.eval(x))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub x_prev: Vec<Vec3>,
    pub x_curr: Vec<Vec3>,
    pub x_next: Vec<Vec3>,
    pub external_force: Vec<Vec3>,
}

impl SimState {
    /// At rest in `positions` with no external force.
    pub fn at_rest(positions: &[Vec3]) -> Self {
        Self {
            x_prev: positions.to_vec(),
            x_curr: positions.to_vec(),
            x_next: positions.to_vec(),
            external_force: vec![Vec3::zeros(); positions.len()],
        }
    }

    pub fn extrapolated(&self) -> Vec<Vec3> {
        self.x_curr.iter().zip(&self.x_prev).map(|(c, p)| c * 2.0 - p).collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let lens = [self.x_prev.len(), self.x_curr.len(), self.x_next.len(), self.external_force.len()];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::InvalidParameter(format!("state lengths {lens:?} do not match {n} vertices")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub value: f64,
    pub gradient: Vec<Vec3>,
}

impl Term {
    fn zero(n: usize) -> Self {
        Self {
            value: 0.0,
            gradient: vec![Vec3::zeros(); n],
        }
    }
}

#[derive(Debug, Clone)]
struct StretchElement {
    face: [usize; 3],
    area: f64,
    dm_inv: Matrix2<f64>,
    /// Rest edge Gram matrix, computed the same way as the current one so
    /// the strain vanishes exactly at rest.
    rest_gram: Matrix2<f64>,
}

#[derive(Debug, Clone)]
struct Hinge {
    /// Edge endpoints, then the vertex opposite in the face traversing
    /// `v[0] -> v[1]`, then the vertex opposite in the other face.
    v: [usize; 4],
    rest_angle: f64,
    weight: f64,
}

/// Cross-product normals of the two hinge faces and their signed bend angle
/// about the edge; zero when flat.
fn bend_angle(x: [&Vec3; 4]) -> Option<(f64, Vec3, Vec3, Vec3)> {
    let e = x[1] - x[0];
    let na = e.cross(&(x[2] - x[0]));
    let nb = (x[3] - x[0]).cross(&e);
    let el = e.norm();
    if el == 0.0 || na.norm_squared() == 0.0 || nb.norm_squared() == 0.0 {
        return None;
    }
    let psi = na.cross(&nb).dot(&(e / el)).atan2(na.dot(&nb));
    Some((psi, e, na, nb))
}

fn gram(a: &Vec3, b: &Vec3) -> Matrix2<f64> {
    let ab = a.dot(b);
    Matrix2::new(a.dot(a), ab, ab, b.dot(b))
}

/// Precomputed rest quantities for the elastic terms.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub params: EnergyParams,
    pub body: BodySdf,
    pub masses: Vec<f64>,
    pub loops: LoopSelection,
    mesh: TriMesh,
    elements: Vec<StretchElement>,
    hinges: Vec<Hinge>,
    pub warnings: Vec<Diagnostic>,
}

/// Lumped masses: density times a third of the incident rest face areas.
pub fn lumped_masses(mesh: &TriMesh, density: f64) -> Vec<f64> {
    let rest = mesh.rest_or_current();
    let mut m = vec![0.0; mesh.num_vertices()];
    for f in mesh.faces() {
        let a = crate::mesh::triangle_area(&rest[f[0]], &rest[f[1]], &rest[f[2]]);
        for &v in f {
            m[v] += density * a / 3.0;
        }
    }
    m
}

impl EnergyModel {
    pub fn new(mesh: &TriMesh, params: EnergyParams, body: BodySdf) -> Result<Self> {
        params.validate()?;
        let rest = mesh.rest_or_current();
        let mut warnings = Vec::new();
        let mut elements = Vec::with_capacity(mesh.num_faces());
        for (fi, &f) in mesh.faces().iter().enumerate() {
            let e1 = rest[f[1]] - rest[f[0]];
            let e2 = rest[f[2]] - rest[f[0]];
            let n = e1.cross(&e2);
            let area = 0.5 * n.norm();
            if !(area > 0.0) || e1.norm() == 0.0 {
                warnings.push(Diagnostic::new(
                    DiagnosticKind::DegenerateElement,
                    format!("face {fi} has zero rest area; skipped by stretching"),
                ));
                continue;
            }
            let u = e1.normalize();
            let w = n.cross(&u).normalize();
            let dm = Matrix2::new(e1.dot(&u), e2.dot(&u), e1.dot(&w), e2.dot(&w));
            let dm_inv = dm.try_inverse().expect("nonzero area");
            let rest_gram = gram(&e1, &e2);
            elements.push(StretchElement {
                face: f,
                area,
                dm_inv,
                rest_gram,
            });
        }

        let mut hinges = Vec::new();
        let faces = mesh.faces();
        for (edge, inc) in mesh.topology().iter() {
            let [fa, fb] = inc.as_slice() else { continue };
            let opposite = |f: [usize; 3]| f.into_iter().find(|v| !edge.contains(v)).unwrap();
            let forward = |f: [usize; 3]| (0..3).any(|k| f[k] == edge[0] && f[(k + 1) % 3] == edge[1]);
            let (a, b) = if forward(faces[*fa]) { (faces[*fa], faces[*fb]) } else { (faces[*fb], faces[*fa]) };
            if forward(a) == forward(b) {
                warnings.push(Diagnostic::new(
                    DiagnosticKind::DegenerateElement,
                    format!("edge {edge:?} joins inconsistently wound faces; no bending"),
                ));
                continue;
            }
            let v = [edge[0], edge[1], opposite(a), opposite(b)];
            let Some((psi, e, na, nb)) = bend_angle(v.map(|i| &rest[i])) else {
                warnings.push(Diagnostic::new(
                    DiagnosticKind::DegenerateElement,
                    format!("edge {edge:?} has a collinear rest hinge; no bending"),
                ));
                continue;
            };
            let el = e.norm();
            let h = (na.norm() + nb.norm()) / el / 3.0;
            hinges.push(Hinge {
                v,
                rest_angle: PI - psi,
                weight: el / h,
            });
        }
        Ok(Self {
            masses: lumped_masses(mesh, params.density),
            params,
            body,
            loops: LoopSelection::All,
            mesh: mesh.clone(),
            elements,
            hinges,
            warnings,
        })
    }

    pub fn with_loops(mut self, loops: LoopSelection) -> Self {
        self.loops = loops;
        self
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn num_vertices(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// Per-vertex estimate of the membrane Hessian diagonal near rest.
    pub fn membrane_diagonal(&self) -> Vec<f64> {
        let k = 2.0 * self.params.lame_mu + self.params.lame_lambda;
        let mut d = vec![0.0; self.num_vertices()];
        for el in &self.elements {
            let b1 = el.dm_inv.row(0).into_owned();
            let b2 = el.dm_inv.row(1).into_owned();
            let b0 = -(b1 + b2);
            for (&v, b) in el.face.iter().zip([b0, b1, b2]) {
                d[v] += el.area * k * b.norm_squared();
            }
        }
        d
    }

    /// Unweighted StVK membrane energy.
    pub fn stretching(&self, x: &[Vec3]) -> Term {
        let (mu, lambda) = (self.params.lame_mu, self.params.lame_lambda);
        let parts: Vec<(f64, [Vec3; 3])> = self
            .elements
            .par_iter()
            .map(|el| {
                let [i, j, k] = el.face;
                let (d1, d2) = (x[j] - x[i], x[k] - x[i]);
                let f = Matrix3x2::from_columns(&[d1, d2]) * el.dm_inv;
                let e = el.dm_inv.transpose() * (gram(&d1, &d2) - el.rest_gram) * el.dm_inv * 0.5;
                let tr = e.trace();
                let w = 0.5 * lambda * tr * tr + mu * (e * e).trace();
                let p = f * (e * (2.0 * mu) + Matrix2::identity() * (lambda * tr));
                let h = p * el.dm_inv.transpose() * el.area;
                let (g1, g2) = (h.column(0).into_owned(), h.column(1).into_owned());
                (el.area * w, [-(g1 + g2), g1, g2])
            })
            .collect();
        let mut out = Term::zero(x.len());
        for (el, (v, g)) in self.elements.iter().zip(parts) {
            out.value += v;
            for (&vi, gi) in el.face.iter().zip(g) {
                out.gradient[vi] += gi;
            }
        }
        out
    }

    /// Unweighted hinge bending energy.
    pub fn bending(&self, x: &[Vec3]) -> Term {
        let k = self.params.bending_stiffness;
        let parts: Vec<Option<(f64, [Vec3; 4])>> = self
            .hinges
            .par_iter()
            .map(|h| {
                let (psi, e, na, nb) = bend_angle(h.v.map(|i| &x[i]))?;
                let theta = PI - psi;
                let d = theta - h.rest_angle;
                let value = k * d * d * h.weight;
                // d(psi)/dx, then d(theta) = -d(psi)
                let el = e.norm();
                let (qa, qb) = (na / na.norm_squared(), nb / nb.norm_squared());
                let g2 = -qa * el;
                let g3 = -qb * el;
                let g0 = -qa * ((x[h.v[2]] - x[h.v[1]]).dot(&e) / el) - qb * ((x[h.v[3]] - x[h.v[1]]).dot(&e) / el);
                let g1 = qa * ((x[h.v[2]] - x[h.v[0]]).dot(&e) / el) + qb * ((x[h.v[3]] - x[h.v[0]]).dot(&e) / el);
                let s = -2.0 * k * d * h.weight;
                Some((value, [g0 * s, g1 * s, g2 * s, g3 * s]))
            })
            .collect();
        let mut out = Term::zero(x.len());
        for (h, p) in self.hinges.iter().zip(parts) {
            let Some((v, g)) = p else { continue };
            out.value += v;
            for (&vi, gi) in h.v.iter().zip(g) {
                out.gradient[vi] += gi;
            }
        }
        out
    }

    /// Unweighted body penalty `sum max(eps - sdf, 0)^p`.
    pub fn collision(&self, x: &[Vec3]) -> Term {
        let mut out = Term::zero(x.len());
        if self.body.primitives.is_empty() {
            return out;
        }
        let (eps, p) = (self.params.epsilon_col, self.params.collision_exponent);
        for (i, xi) in x.iter().enumerate() {
            let (d, n) = self.body.eval(xi).expect("nonempty body");
            let gap = eps - d;
            if gap > 0.0 {
                out.value += gap.powf(p);
                out.gradient[i] = -n * (p * gap.powf(p - 1.0));
            }
        }
        out
    }

    /// Unweighted inertia term.
    pub fn inertia(&self, state: &SimState, x: &[Vec3]) -> Term {
        let c = 1.0 / (self.params.dt * self.params.dt);
        let mut out = Term::zero(x.len());
        for i in 0..x.len() {
            let d = x[i] - state.x_curr[i] * 2.0 + state.x_prev[i];
            out.value += 0.5 * self.masses[i] * c * d.norm_squared();
            out.gradient[i] = d * (self.masses[i] * c);
        }
        out
    }

    /// Unweighted external-force potential `-sum q . x`.
    pub fn external(&self, state: &SimState, x: &[Vec3]) -> Term {
        let mut out = Term::zero(x.len());
        for i in 0..x.len() {
            out.value -= state.external_force[i].dot(&x[i]);
            out.gradient[i] = -state.external_force[i];
        }
        out
    }

    /// Gravity on the lumped masses plus a per-vertex extra force.
    pub fn external_forces(&self, extra: &[Vec3]) -> Vec<Vec3> {
        let g = self.params.gravity();
        self.masses.iter().zip(extra).map(|(&m, f)| g * m + f).collect()
    }

    /// Unweighted log barrier over close non-edge pairs.
    pub fn repulsive(&self, x: &[Vec3]) -> Result<(Term, Vec<Diagnostic>)> {
        const FLOOR: f64 = 1e-8;
        let pairs = build_self_collision_edges_at(&self.mesh, x, self.params.repulsive_threshold)?;
        let mut out = Term::zero(x.len());
        let mut diag = Vec::new();
        for [i, j] in pairs.pairs {
            let d = x[i] - x[j];
            let r = d.norm();
            if r < FLOOR {
                out.value -= (FLOOR * FLOOR).ln();
                diag.push(Diagnostic::new(
                    DiagnosticKind::CoincidentPair,
                    format!("vertices {i} and {j} coincide; distance clamped"),
                ));
                continue;
            }
            out.value -= (r * r).ln();
            let g = d * (-2.0 / (r * r));
            out.gradient[i] += g;
            out.gradient[j] -= g;
        }
        Ok((out, diag))
    }

    /// Runs the self-collision pipeline at `x` and returns its frozen form.
    pub fn freeze_self_collision(&self, x: &[Vec3]) -> Result<(FrozenSelfCollision, Vec<Diagnostic>)> {
        let posed = self.mesh.with_positions(x.to_vec())?;
        let r = run_pipeline(&posed, &self.loops)?;
        Ok((r.frozen, r.diagnostics))
    }

    /// Weighted total. Without `frozen`, the self-collision combinatorics are
    /// recomputed at `x`.
    pub fn total(&self, state: &SimState, x: &[Vec3], frozen: Option<&FrozenSelfCollision>) -> Result<EnergyBreakdown> {
        state.validate(x.len())?;
        let p = &self.params;
        let mut diagnostics = Vec::new();
        let mut terms = Vec::with_capacity(7);
        let mut add = |name: &'static str, weight: f64, term: Option<Term>| terms.push((name, weight, term));
        let on = |w: f64| w != 0.0;
        add("stretching", p.stretching_weight, on(p.stretching_weight).then(|| self.stretching(x)));
        add("bending", p.bending_weight, on(p.bending_weight).then(|| self.bending(x)));
        add("collision", p.collision_weight, on(p.collision_weight).then(|| self.collision(x)));
        add("inertia", p.inertia_weight, on(p.inertia_weight).then(|| self.inertia(state, x)));
        add("external", p.external_weight, on(p.external_weight).then(|| self.external(state, x)));
        let rep = if on(p.repulsive_weight) {
            let (t, d) = self.repulsive(x)?;
            diagnostics.extend(d);
            Some(t)
        } else {
            None
        };
        add("repulsive", p.repulsive_weight, rep);
        let selfcol = if on(p.selfcol_weight) {
            let owned;
            let fr = match frozen {
                Some(f) => f,
                None => {
                    let (f, d) = self.freeze_self_collision(x)?;
                    diagnostics.extend(d);
                    owned = f;
                    &owned
                }
            };
            let loss = fr.evaluate(x)?;
            Some(Term {
                value: loss.value,
                gradient: loss.gradient,
            })
        } else {
            None
        };
        add("self_collision", p.selfcol_weight, selfcol);

        let mut total = 0.0;
        let mut gradient = vec![Vec3::zeros(); x.len()];
        let mut values = Vec::with_capacity(terms.len());
        for (name, w, t) in terms {
            let v = t.as_ref().map_or(0.0, |t| t.value);
            if let Some(t) = &t {
                total += w * t.value;
                for (g, tg) in gradient.iter_mut().zip(&t.gradient) {
                    *g += tg * w;
                }
            }
            values.push(TermValue { name, weight: w, value: v });
        }
        Ok(EnergyBreakdown {
            total,
            gradient,
            terms: values,
            diagnostics,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermValue {
    pub name: &'static str,
    pub weight: f64,
    /// Unweighted value.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub gradient: Vec<Vec3>,
    pub terms: Vec<TermValue>,
    pub diagnostics: Vec<Diagnostic>,
}

impl EnergyBreakdown {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

pub fn stretching_energy(mesh: &TriMesh, x: &[Vec3], params: &EnergyParams) -> Result<Term> {
    Ok(EnergyModel::new(mesh, params.clone(), BodySdf::default())?.stretching(x))
}

pub fn bending_energy(mesh: &TriMesh, x: &[Vec3], params: &EnergyParams) -> Result<Term> {
    Ok(EnergyModel::new(mesh, params.clone(), BodySdf::default())?.bending(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn two_triangles() -> TriMesh {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
        ];
        TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3]]).unwrap().rest_from_current()
    }

    #[test]
    fn rest_sheet_has_no_elastic_energy() {
        let m = fixtures::grid_sheet(4, 3, 1.0, 0.7).rest_from_current();
        let model = EnergyModel::new(&m, EnergyParams::default(), BodySdf::default()).unwrap();
        let s = model.stretching(m.vertices());
        let b = model.bending(m.vertices());
        assert_eq!(s.value, 0.0);
        assert_eq!(b.value, 0.0);
        assert!(s.gradient.iter().chain(&b.gradient).all(|g| g.norm() == 0.0));
    }

    #[test]
    fn hinge_folded_to_right_angle() {
        let m = two_triangles();
        let params = EnergyParams {
            bending_stiffness: 2.0,
            ..Default::default()
        };
        let model = EnergyModel::new(&m, params, BodySdf::default()).unwrap();
        // rotate vertex 3 about the shared edge by 90 degrees
        let mut x = m.vertices().to_vec();
        let e = Vec3::new(1.0, 0.0, 0.0).normalize();
        let r = x[3] - x[0];
        let along = e * r.dot(&e);
        let perp = r - along;
        x[3] = x[0] + along + e.cross(&perp);
        let b = model.bending(&x);
        // edge length 1; heights 1 and 1/sqrt(2)*... computed from areas
        let el = 1.0;
        let h = (1.0 + 1.0) / 3.0;
        let expected = 2.0 * (PI / 2.0).powi(2) * el / h;
        assert!((b.value - expected).abs() < 1e-12, "{} vs {}", b.value, expected);
    }

    #[test]
    fn sphere_gradient_points_outward() {
        let body = BodySdf {
            primitives: vec![Primitive::Sphere {
                center: [0.0; 3],
                radius: 1.0,
            }],
        };
        let m = TriMesh::new(
            vec![Vec3::new(0.3, 0.4, 0.0), Vec3::new(5.0, 0.0, 0.0), Vec3::new(5.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let model = EnergyModel::new(&m, EnergyParams::default(), body).unwrap();
        let t = model.collision(m.vertices());
        assert!((t.value - 0.5).abs() < 1e-15);
        let g = -t.gradient[0];
        assert!((g.normalize() - Vec3::new(0.6, 0.8, 0.0)).norm() < 1e-15);
        assert_eq!(t.gradient[1], Vec3::zeros());
    }

    #[test]
    fn params_roundtrip_and_reject() {
        let p: EnergyParams = serde_json::from_str(r#"{"dt": 0.01}"#).unwrap();
        assert_eq!(p.dt, 0.01);
        assert_eq!(p.lame_mu, EnergyParams::default().lame_mu);
        assert!(serde_json::from_str::<EnergyParams>(r#"{"bogus": 1}"#).is_err());
        assert!(EnergyParams { dt: 0.0, ..Default::default() }.validate().is_err());
    }
}
