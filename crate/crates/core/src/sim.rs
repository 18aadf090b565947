//! Quasi-dynamic stepping by direct minimization of the incremental
//! potential, with sequence metrics over the self-collision loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{EnergyModel, SimState};
use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSearch {
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindDirection {
    /// A fresh uniformly random unit direction each frame.
    Random,
    Fixed([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindConfig {
    /// Per-vertex force magnitude range in N.
    pub magnitude: [f64; 2],
    pub direction: WindDirection,
}

impl Default for WindConfig {
    fn default() -> Self {
        Self {
            magnitude: [0.0, 0.0],
            direction: WindDirection::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub steps: usize,
    pub inner_iterations: usize,
    pub line_search: LineSearch,
    pub pinned: Vec<usize>,
    /// Loss thresholds for the percentage-of-frames metrics.
    pub thresholds: Vec<f64>,
    pub wind: WindConfig,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps: 10,
            inner_iterations: 10,
            line_search: LineSearch::default(),
            pinned: Vec::new(),
            thresholds: vec![0.1, 0.01],
            wind: WindConfig::default(),
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, vertex_count: usize) -> Result<()> {
        if self.inner_iterations == 0 {
            return Err(Error::InvalidParameter("inner_iterations must be positive".into()));
        }
        if self.thresholds.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidParameter("thresholds must be positive".into()));
        }
        let ls = &self.line_search;
        if !(ls.armijo > 0.0 && ls.armijo < 1.0 && ls.shrink > 0.0 && ls.shrink < 1.0) {
            return Err(Error::InvalidParameter("line search constants must lie in (0, 1)".into()));
        }
        let [lo, hi] = self.wind.magnitude;
        if !(lo >= 0.0 && hi >= lo) {
            return Err(Error::InvalidParameter(format!("wind magnitude range [{lo}, {hi}] is invalid")));
        }
        if let Some(&p) = self.pinned.iter().find(|&&p| p >= vertex_count) {
            return Err(Error::InvalidParameter(format!("pinned vertex {p} out of range")));
        }
        Ok(())
    }
}

/// One uniform wind force per frame, applied to every vertex.
pub fn wind_schedule(wind: &WindConfig, seed: u64, frames: usize) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [lo, hi] = wind.magnitude;
    (0..frames)
        .map(|_| {
            let m = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let dir = match &wind.direction {
                WindDirection::Fixed(d) => Vec3::from(*d).try_normalize(0.0).unwrap_or_else(Vec3::zeros),
                WindDirection::Random => loop {
                    let v = Vec3::new(
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                    );
                    let n = v.norm();
                    if n > 1e-3 && n <= 1.0 {
                        break v / n;
                    }
                },
            };
            dir * m
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub energy_initial: f64,
    pub energy_final: f64,
    pub iterations: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Diagonal preconditioner: lumped inertia plus a membrane stiffness
/// estimate, so that one step is exact for the inertia/gravity quadratic.
fn preconditioner(model: &EnergyModel) -> Vec<f64> {
    let p = &model.params;
    let mut d: Vec<f64> = model.masses.iter().map(|m| p.inertia_weight * m / (p.dt * p.dt)).collect();
    for (v, k) in model.membrane_diagonal().into_iter().enumerate() {
        d[v] += p.stretching_weight * k;
    }
    d.into_iter().map(|x| if x > 0.0 { x } else { 1.0 }).collect()
}

/// Advances one frame: constant-velocity initialization, descent on the
/// total energy, then the shift `x_curr -> x_prev`, `x_next -> x_curr`.
pub fn step(model: &EnergyModel, state: &SimState, config: &SimConfig) -> Result<(SimState, StepReport)> {
    let n = model.num_vertices();
    state.validate(n)?;
    let mut pinned = vec![false; n];
    for &p in &config.pinned {
        pinned[p] = true;
    }
    let precond = preconditioner(model);
    let mut x = state.extrapolated();
    for i in 0..n {
        if pinned[i] {
            x[i] = state.x_curr[i];
        }
    }
    let mut diagnostics = Vec::new();
    let mut energy_initial = None;
    let mut energy = f64::NAN;
    let mut iterations = 0;
    for _ in 0..config.inner_iterations {
        let frozen = if model.params.selfcol_weight != 0.0 {
            let (f, d) = model.freeze_self_collision(&x)?;
            diagnostics.extend(d.into_iter().filter(Diagnostic::is_degeneracy));
            Some(f)
        } else {
            None
        };
        let here = model.total(state, &x, frozen.as_ref())?;
        energy = here.total;
        energy_initial.get_or_insert(energy);
        let dir: Vec<Vec3> = (0..n)
            .map(|i| if pinned[i] { Vec3::zeros() } else { -here.gradient[i] / precond[i] })
            .collect();
        let slope: f64 = dir.iter().zip(&here.gradient).map(|(d, g)| d.dot(g)).sum();
        if !(slope < 0.0) {
            break;
        }
        let ls = &config.line_search;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=ls.max_backtracks {
            let trial: Vec<Vec3> = x.iter().zip(&dir).map(|(p, d)| p + d * alpha).collect();
            let e = model.total(state, &trial, frozen.as_ref())?.total;
            if e <= energy + ls.armijo * alpha * slope {
                accepted = Some((trial, e));
                break;
            }
            alpha *= ls.shrink;
        }
        iterations += 1;
        match accepted {
            Some((trial, e)) => {
                x = trial;
                energy = e;
            }
            None => {
                diagnostics.push(Diagnostic::new(
                    DiagnosticKind::LineSearchFailure,
                    format!("no sufficient decrease after {} backtracks; zero step taken", ls.max_backtracks),
                ));
                break;
            }
        }
    }
    let next = SimState {
        x_prev: state.x_curr.clone(),
        x_curr: x.clone(),
        x_next: x,
        external_force: state.external_force.clone(),
    };
    Ok((
        next,
        StepReport {
            energy_initial: energy_initial.unwrap_or(energy),
            energy_final: energy,
            iterations,
            diagnostics,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdShare {
    pub threshold: f64,
    /// Percentage of frames whose loss is strictly above the threshold.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub frames: usize,
    pub mean: Option<f64>,
    pub above: Vec<ThresholdShare>,
}

pub fn metrics(losses: &[f64], thresholds: &[f64]) -> Metrics {
    let n = losses.len();
    Metrics {
        frames: n,
        mean: (n > 0).then(|| losses.iter().fold(0.0, |a, b| a + b) / n as f64),
        above: if n == 0 {
            Vec::new()
        } else {
            thresholds
                .iter()
                .map(|&t| ThresholdShare {
                    threshold: t,
                    percent: 100.0 * losses.iter().filter(|&&l| l > t).count() as f64 / n as f64,
                })
                .collect()
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub self_collision: f64,
    pub energy: f64,
    pub iterations: usize,
    pub wind: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub initial_self_collision: f64,
    pub frames: Vec<FrameRecord>,
    pub metrics: Metrics,
    pub diagnostics: Vec<Diagnostic>,
}

/// Runs `config.steps` frames from rest at `start`. `on_frame` sees each new
/// state after it is computed.
pub fn run_sequence(
    model: &EnergyModel,
    start: &[Vec3],
    config: &SimConfig,
    mut on_frame: impl FnMut(usize, &SimState) -> Result<()>,
) -> Result<SequenceReport> {
    config.validate(model.num_vertices())?;
    let wind = wind_schedule(&config.wind, config.seed, config.steps);
    let loss_at = |x: &[Vec3]| -> Result<f64> { Ok(model.freeze_self_collision(x)?.0.value(x)) };
    let mut state = SimState::at_rest(start);
    let initial = loss_at(start)?;
    let mut frames = Vec::with_capacity(config.steps);
    let mut diagnostics = Vec::new();
    for (frame, w) in wind.iter().enumerate() {
        state.external_force = model.external_forces(&vec![*w; model.num_vertices()]);
        let (next, report) = step(model, &state, config)?;
        state = next;
        diagnostics.extend(report.diagnostics);
        frames.push(FrameRecord {
            frame,
            self_collision: loss_at(&state.x_curr)?,
            energy: report.energy_final,
            iterations: report.iterations,
            wind: [w.x, w.y, w.z],
        });
        on_frame(frame, &state)?;
    }
    let losses: Vec<f64> = frames.iter().map(|f| f.self_collision).collect();
    Ok(SequenceReport {
        initial_self_collision: initial,
        metrics: metrics(&losses, &config.thresholds),
        frames,
        diagnostics,
    })
}
