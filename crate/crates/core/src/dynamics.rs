//! Langevin dynamics of the nuclear coordinates and ensemble statistics.
//!
//! `M·R̈ = F − γ·Ṙ + δF` is integrated with a velocity-Verlet splitting:
//!
//! ```text
//! δF  ~ N(0, (2/dt)·D(R))                      one draw per step
//! P½  = P + dt/2·(F(R) − γ(R)·P/M + δF)        explicit half-kick
//! R′  = R + dt·P½/M                            drift
//! (I + dt/2·γ(R′)/M)·P′ = P½ + dt/2·(F(R′) + δF)   implicit half-kick
//! ```
//!
//! With `γ = D = 0` this is plain velocity Verlet.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friction::{friction_data, random_force, FieldGrid, FrictionData, Lattice};
use crate::model::{potential_minimum, Rect, Vec2};
use crate::negf::EnergyGrid;
use crate::params::ModelParams;

/// Source of force, friction and noise along a trajectory.
pub trait ForceField: Sync {
    fn params(&self) -> &ModelParams;

    /// Region inside which the field is trustworthy.
    fn region(&self) -> Rect;

    fn sample(&self, r: Vec2) -> Result<FrictionData>;

    /// Node lattice the field is tabulated on, if any. Sampled positions are
    /// binned onto it by cloud-in-cell weights.
    fn lattice(&self) -> Option<Lattice> {
        None
    }
}

impl ForceField for FieldGrid {
    fn params(&self) -> &ModelParams {
        FieldGrid::params(self)
    }

    fn region(&self) -> Rect {
        self.bounds()
    }

    fn sample(&self, r: Vec2) -> Result<FrictionData> {
        Ok(self.interpolate(r))
    }

    fn lattice(&self) -> Option<Lattice> {
        Some(FieldGrid::lattice(self))
    }
}

/// Exact evaluation of the fields at every step. Only practical for short
/// validation runs.
#[derive(Debug, Clone)]
pub struct DirectField {
    pub params: ModelParams,
    pub grid: EnergyGrid,
    pub region: Rect,
}

impl ForceField for DirectField {
    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn region(&self) -> Rect {
        self.region
    }

    fn sample(&self, r: Vec2) -> Result<FrictionData> {
        friction_data(r, &self.params, &self.grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub r: Vec2,
    pub p: Vec2,
    pub t: f64,
}

impl PhaseState {
    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(&self.p).all(|v| v.is_finite()) && self.t.is_finite()
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        (self.p[0] * self.p[0] + self.p[1] * self.p[1]) / (2.0 * mass)
    }

    /// `x·p_y − y·p_x`.
    pub fn angular_momentum(&self) -> f64 {
        self.r[0] * self.p[1] - self.r[1] * self.p[0]
    }
}

fn mat_vec(m: &[[f64; 2]; 2], v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// One step starting from fields `here` already sampled at `s.r`. Returns the
/// new state and the fields at its position.
fn advance<F: ForceField + ?Sized, R: Rng + ?Sized>(
    s: &PhaseState,
    here: &FrictionData,
    field: &F,
    dt: f64,
    rng: &mut R,
) -> Result<(PhaseState, FrictionData)> {
    let m = field.params().mass;
    let h = 0.5 * dt;
    let noise = random_force(&here.d, dt, rng)?;
    let drag = mat_vec(&here.gamma, s.p);
    let p_half = [
        s.p[0] + h * (here.force[0] - drag[0] / m + noise[0]),
        s.p[1] + h * (here.force[1] - drag[1] / m + noise[1]),
    ];
    let r = [s.r[0] + dt * p_half[0] / m, s.r[1] + dt * p_half[1] / m];
    let there = field.sample(r)?;
    let rhs = [
        p_half[0] + h * (there.force[0] + noise[0]),
        p_half[1] + h * (there.force[1] + noise[1]),
    ];
    let k = h / m;
    let a = [
        [1.0 + k * there.gamma[0][0], k * there.gamma[0][1]],
        [k * there.gamma[1][0], 1.0 + k * there.gamma[1][1]],
    ];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let p = [
        (a[1][1] * rhs[0] - a[0][1] * rhs[1]) / det,
        (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det,
    ];
    let next = PhaseState { r, p, t: s.t + dt };
    if !next.is_finite() {
        return Err(Error::Numerical(format!("non-finite state at t = {}", next.t)));
    }
    Ok((next, there))
}

/// Advances `s` by one step of length `dt`.
pub fn step<F: ForceField + ?Sized, R: Rng + ?Sized>(
    s: &PhaseState,
    field: &F,
    dt: f64,
    rng: &mut R,
) -> Result<PhaseState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let here = field.sample(s.r)?;
    advance(s, &here, field, dt, rng).map(|(s, _)| s)
}

/// Initial conditions of every trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitPolicy {
    /// Start at the potential minimum with Maxwell–Boltzmann momenta at `kT`.
    #[default]
    Thermal,
    /// Every trajectory starts from the same phase point.
    Fixed { position: Vec2, momentum: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub t_burn: f64,
    pub t_sample: f64,
    /// Steps between recorded samples.
    pub sample_stride: usize,
    pub init: InitPolicy,
    pub master_seed: u64,
    /// Keep every sampled phase point (for the trajectory dump).
    pub record_samples: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            n_traj: 1000,
            dt: 0.01,
            t_burn: 300.0,
            t_sample: 700.0,
            sample_stride: 10,
            init: InitPolicy::Thermal,
            master_seed: 0,
            record_samples: false,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be >= 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        if !(self.t_burn >= 0.0) || !self.t_burn.is_finite() {
            return Err(Error::invalid("t_burn", "must be >= 0"));
        }
        if !(self.t_sample > 0.0) || !self.t_sample.is_finite() {
            return Err(Error::invalid("t_sample", "must be > 0"));
        }
        if self.sample_stride == 0 {
            return Err(Error::invalid("sample_stride", "must be >= 1"));
        }
        if self.samples_per_trajectory() == 0 {
            return Err(Error::invalid("t_sample", "shorter than one sample stride"));
        }
        Ok(())
    }

    fn burn_steps(&self) -> usize {
        (self.t_burn / self.dt).round() as usize
    }

    fn sample_steps(&self) -> usize {
        (self.t_sample / self.dt).round() as usize
    }

    pub fn samples_per_trajectory(&self) -> usize {
        self.sample_steps() / self.sample_stride.max(1)
    }
}

/// Independent random stream of trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

fn initial_state(p: &ModelParams, init: InitPolicy, rng: &mut ChaCha8Rng) -> PhaseState {
    match init {
        InitPolicy::Thermal => {
            let s = (p.mass * p.kt).sqrt();
            let px: f64 = rng.sample(StandardNormal);
            let py: f64 = rng.sample(StandardNormal);
            PhaseState {
                r: potential_minimum(p),
                p: [s * px, s * py],
                t: 0.0,
            }
        }
        InitPolicy::Fixed { position, momentum } => PhaseState {
            r: position,
            p: momentum,
            t: 0.0,
        },
    }
}

/// Per-trajectory sample means.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectorySummary {
    pub mean_r: Vec2,
    pub mean_p: Vec2,
    pub kinetic: f64,
    pub angular: f64,
    /// Samples taken outside the field region.
    pub outside: usize,
    /// Time-averaged cloud-in-cell density on the field lattice, as
    /// `(node, weight)` pairs summing to one.
    pub density: Vec<(u32, f64)>,
    pub final_state: PhaseState,
}

/// Mean and standard error over trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(v: impl ExactSizeIterator<Item = f64> + Clone) -> Self {
        let n = v.len();
        if n == 0 {
            return Self::default();
        }
        let mean = v.clone().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub config: DynamicsConfig,
    pub mass: f64,
    /// Surviving trajectories in index order.
    pub trajectories: Vec<TrajectorySummary>,
    /// Indices of trajectories terminated by a numerical failure.
    pub terminated: Vec<usize>,
    pub samples_per_trajectory: usize,
    /// Lattice the densities refer to.
    pub lattice: Option<Lattice>,
    /// Sampled phase points per surviving trajectory, if requested.
    pub samples: Option<Vec<Vec<PhaseState>>>,
}

impl EnsembleStats {
    pub fn n_traj(&self) -> usize {
        self.trajectories.len()
    }

    pub fn mean_position(&self) -> [Estimate; 2] {
        [0, 1].map(|k| Estimate::from_samples(self.trajectories.iter().map(|t| t.mean_r[k])))
    }

    pub fn mean_momentum(&self) -> [Estimate; 2] {
        [0, 1].map(|k| Estimate::from_samples(self.trajectories.iter().map(|t| t.mean_p[k])))
    }

    pub fn kinetic_energy(&self) -> Estimate {
        Estimate::from_samples(self.trajectories.iter().map(|t| t.kinetic))
    }

    /// `⟨x·p_y − y·p_x⟩` about the origin.
    pub fn angular_momentum(&self) -> Estimate {
        Estimate::from_samples(self.trajectories.iter().map(|t| t.angular))
    }

    /// Angular momentum about the ensemble mean position.
    pub fn angular_momentum_about_mean(&self) -> Estimate {
        let [x, y] = self.mean_position().map(|e| e.mean);
        Estimate::from_samples(
            self.trajectories
                .iter()
                .map(|t| t.angular - x * t.mean_p[1] + y * t.mean_p[0]),
        )
    }

    pub fn outside_fraction(&self) -> f64 {
        let total = self.trajectories.len() * self.samples_per_trajectory;
        if total == 0 {
            return 0.0;
        }
        self.trajectories.iter().map(|t| t.outside).sum::<usize>() as f64 / total as f64
    }

    /// Ensemble-averaged density on the field lattice.
    pub fn density(&self) -> Option<Vec<f64>> {
        let mut rho = vec![0.0; self.lattice?.len()];
        let w = 1.0 / self.trajectories.len().max(1) as f64;
        for t in &self.trajectories {
            for &(k, v) in &t.density {
                rho[k as usize] += w * v;
            }
        }
        Some(rho)
    }

    /// Writes the sampled phase points as `trajectory,t,x,y,p_x,p_y`.
    pub fn write_trajectory_dump(&self, path: &Path) -> Result<()> {
        let samples = self
            .samples
            .as_ref()
            .ok_or_else(|| Error::invalid("record_samples", "samples were not recorded"))?;
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        let io = |e| Error::io(path, e);
        writeln!(w, "trajectory,t,x,y,p_x,p_y").map_err(io)?;
        for (k, traj) in samples.iter().enumerate() {
            for s in traj {
                writeln!(w, "{k},{},{},{},{},{}", s.t, s.r[0], s.r[1], s.p[0], s.p[1]).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

struct TrajectoryRun {
    summary: TrajectorySummary,
    samples: Option<Vec<PhaseState>>,
}

fn run_trajectory<F: ForceField + ?Sized>(
    field: &F,
    cfg: &DynamicsConfig,
    index: usize,
) -> Result<TrajectoryRun> {
    let p = field.params();
    let region = field.region();
    let mut rng = trajectory_rng(cfg.master_seed, index);
    let mut s = initial_state(p, cfg.init, &mut rng);
    let mut here = field.sample(s.r)?;
    for _ in 0..cfg.burn_steps() {
        (s, here) = advance(&s, &here, field, cfg.dt, &mut rng)?;
    }
    let n = cfg.samples_per_trajectory();
    let mut acc = TrajectorySummary::default();
    let mut density: BTreeMap<u32, f64> = BTreeMap::new();
    let mut samples = cfg.record_samples.then(|| Vec::with_capacity(n));
    let lattice = field.lattice();
    for _ in 0..n {
        for _ in 0..cfg.sample_stride {
            (s, here) = advance(&s, &here, field, cfg.dt, &mut rng)?;
        }
        for k in 0..2 {
            acc.mean_r[k] += s.r[k];
            acc.mean_p[k] += s.p[k];
        }
        acc.kinetic += s.kinetic_energy(p.mass);
        acc.angular += s.angular_momentum();
        if !region.contains(s.r) {
            acc.outside += 1;
        }
        if let Some((ks, ws)) = lattice.map(|l| l.corner_weights(s.r)) {
            for (&k, &w) in ks.iter().zip(&ws) {
                if w != 0.0 {
                    *density.entry(k as u32).or_insert(0.0) += w;
                }
            }
        }
        if let Some(v) = samples.as_mut() {
            v.push(s);
        }
    }
    let inv = 1.0 / n as f64;
    for k in 0..2 {
        acc.mean_r[k] *= inv;
        acc.mean_p[k] *= inv;
    }
    acc.kinetic *= inv;
    acc.angular *= inv;
    acc.density = density.into_iter().map(|(k, w)| (k, w * inv)).collect();
    acc.final_state = s;
    Ok(TrajectoryRun { summary: acc, samples })
}

/// Integrates `cfg.n_traj` independent trajectories in parallel.
///
/// Trajectory `k` draws from stream `k` of the master seed and the reduction
/// runs in index order, so results do not depend on the number of workers.
/// Fails when more than 1% of trajectories terminate or more than 1% of the
/// samples fall outside the field region.
pub fn run_ensemble<F: ForceField + ?Sized>(field: &F, cfg: &DynamicsConfig) -> Result<EnsembleStats> {
    cfg.validate()?;
    field.params().validate()?;
    let runs: Vec<Result<TrajectoryRun>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|k| run_trajectory(field, cfg, k))
        .collect();
    let mut trajectories = Vec::with_capacity(cfg.n_traj);
    let mut samples = cfg.record_samples.then(Vec::new);
    let mut terminated = Vec::new();
    for (k, run) in runs.into_iter().enumerate() {
        match run {
            Ok(run) => {
                trajectories.push(run.summary);
                if let (Some(all), Some(s)) = (samples.as_mut(), run.samples) {
                    all.push(s);
                }
            }
            Err(Error::Numerical(_)) => terminated.push(k),
            Err(e) => return Err(e),
        }
    }
    if terminated.len() * 100 > cfg.n_traj {
        return Err(Error::TooManyLost {
            failed: terminated.len(),
            total: cfg.n_traj,
        });
    }
    let stats = EnsembleStats {
        config: *cfg,
        mass: field.params().mass,
        trajectories,
        terminated,
        samples_per_trajectory: cfg.samples_per_trajectory(),
        lattice: field.lattice(),
        samples,
    };
    let total = stats.n_traj() * stats.samples_per_trajectory;
    let outside: usize = stats.trajectories.iter().map(|t| t.outside).sum();
    if outside * 100 > total {
        return Err(Error::OutsideMap { outside, total });
    }
    Ok(stats)
}

/// Mean steady-state positions of both spin species and their separation.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub up: [Estimate; 2],
    pub down: [Estimate; 2],
    pub separation: Estimate,
    pub stats_up: EnsembleStats,
    pub stats_down: EnsembleStats,
}

/// Euclidean distance between two mean positions with its first-order
/// propagated standard error.
pub fn separation(a: &[Estimate; 2], b: &[Estimate; 2]) -> Estimate {
    let d = [a[0].mean - b[0].mean, a[1].mean - b[1].mean];
    let var = [0, 1].map(|k| a[k].stderr.powi(2) + b[k].stderr.powi(2));
    let dist = d[0].hypot(d[1]);
    let stderr = if dist > 0.0 {
        ((d[0] * d[0] * var[0] + d[1] * d[1] * var[1]) / (dist * dist)).sqrt()
    } else {
        (0.5 * (var[0] + var[1])).sqrt()
    };
    Estimate { mean: dist, stderr }
}

/// Runs both spin ensembles with the same configuration and seed.
pub fn steady_state_positions<F: ForceField + ?Sized>(
    field_up: &F,
    field_down: &F,
    cfg: &DynamicsConfig,
) -> Result<SteadyState> {
    let stats_up = run_ensemble(field_up, cfg)?;
    let stats_down = run_ensemble(field_down, cfg)?;
    let up = stats_up.mean_position();
    let down = stats_down.mean_position();
    Ok(SteadyState {
        up,
        down,
        separation: separation(&up, &down),
        stats_up,
        stats_down,
    })
}
