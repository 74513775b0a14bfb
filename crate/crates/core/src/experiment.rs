//! Experiment orchestration behind the `ciss` command line: cached field
//! builds, bias sweeps, steady-state reports and the validation suite.
//!
//! Everything lands in one output directory:
//!
//! ```text
//! out/
//!   fields/<hash>.bin          friction fields + local current of one spin species
//!   maps_up.csv, maps_down.csv heat maps of I_loc, F, γ, γ^S, γ^A, D
//!   sweep_c<C>_omega<Ω>.csv    one bias sweep per drive
//!   steady.json, steady.csv    steady-state positions and separation
//!   validate.json              property-suite report
//! ```
//!
//! Each data file has a `<file>.manifest.json` sidecar with the config hash,
//! seed, code version and wall time. Data files carry no timestamps, so equal
//! manifest keys mean byte-identical data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{field_hash, Drive, ExperimentConfig};
use crate::dynamics::{steady_state_positions, DynamicsConfig, Estimate, EnsembleStats};
use crate::error::{Error, Result};
use crate::friction::{build_field_grid, FieldGrid};
use crate::params::ModelParams;
use crate::transport::{spin_currents, TransportMap};
use crate::validate::{self, Check, ValidateOptions};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit status for an error: 2 for configuration and file problems,
/// 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidParameter { .. }
        | Error::Format { .. }
        | Error::Locked(_)
        | Error::Io { .. } => 2,
        _ => 3,
    }
}

/// With no drive the Floquet sectors decouple and every observable equals its
/// single-sector value, so fields are built with `n_floquet = 0`.
pub fn effective_params(p: &ModelParams) -> ModelParams {
    if p.c == 0.0 {
        ModelParams { n_floquet: 0, ..*p }
    } else {
        *p
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

/// Exclusive hold on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// Spin label used in file names and CSV rows.
fn spin_name(up: bool) -> &'static str {
    if up {
        "up"
    } else {
        "down"
    }
}

/// Fields for both spin species of one parameter set.
#[derive(Debug, Clone)]
pub struct FieldPair {
    pub up: FieldGrid,
    pub down: FieldGrid,
    /// Whether anything had to be computed.
    pub built: bool,
}

impl FieldPair {
    pub fn maps(&self) -> (TransportMap, TransportMap) {
        let m = |f: &FieldGrid| TransportMap::from_field(f).expect("fields are built with the current");
        (m(&self.up), m(&self.down))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldsReport {
    pub up_to_date: bool,
    pub nodes: usize,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mu_l: f64,
    pub mu_r: f64,
    pub kinetic_up: Estimate,
    pub kinetic_down: Estimate,
    pub current_up: Estimate,
    pub current_down: Estimate,
    /// `None` at zero total current.
    pub xi_percent: Option<Estimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub drive: Drive,
    pub rows: Vec<SweepRow>,
    pub file: PathBuf,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpinSteadyState {
    pub position: [Estimate; 2],
    pub momentum: [Estimate; 2],
    pub kinetic: Estimate,
    /// `⟨x·p_y − y·p_x⟩` about the origin.
    pub angular_momentum: Estimate,
    /// Angular momentum about the ensemble-mean position.
    pub angular_momentum_about_mean: Estimate,
    pub current: Estimate,
    /// Interpolated at the mean position.
    pub gamma_a_xy: f64,
    pub gamma_s_xy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyReport {
    pub up: SpinSteadyState,
    pub down: SpinSteadyState,
    pub separation: Estimate,
    pub n_traj: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// One experiment: a configuration bound to an output directory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub seed: u64,
    /// Rebuild fields even when cached files exist.
    pub force: bool,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            out: config.output.dir.clone(),
            seed: config.dynamics.master_seed,
            config,
            force: false,
        }
    }

    pub fn with_out(mut self, out: impl Into<PathBuf>) -> Self {
        self.out = out.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn forced(mut self, force: bool) -> Self {
        self.force = force;
        self
    }

    fn dynamics(&self) -> DynamicsConfig {
        DynamicsConfig {
            master_seed: self.seed,
            ..self.config.dynamics
        }
    }

    fn manifest(&self, started: Instant, nodes: Option<usize>) -> Manifest {
        Manifest {
            config_hash: self.config.hash(),
            seed: self.seed,
            code_version: CODE_VERSION.into(),
            wall_time_s: started.elapsed().as_secs_f64(),
            nodes,
        }
    }

    fn write_with_manifest(&self, path: &Path, data: &[u8], manifest: &Manifest) -> Result<()> {
        write_file(path, data)?;
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        write_file(&manifest_path(path), text.as_bytes())
    }

    pub fn field_path(&self, p: &ModelParams) -> PathBuf {
        let hash = field_hash(&effective_params(p), &self.config.grid, &self.config.quadrature);
        self.out.join("fields").join(format!("{}.bin", &hash[..16]))
    }

    fn field(&self, p: &ModelParams) -> Result<(FieldGrid, bool)> {
        let path = self.field_path(p);
        if !self.force && path.exists() {
            return Ok((FieldGrid::read(&path)?, false));
        }
        let started = Instant::now();
        let q = effective_params(p);
        let grid = self.config.energy_grid(&q)?;
        let g = &self.config.grid;
        let field = build_field_grid(&q, g.bounds, g.spacing, &grid, true)?;
        self.write_with_manifest(&path, &field.to_bytes(), &self.manifest(started, Some(field.len())))?;
        Ok((field, true))
    }

    /// Fields of both spin species for `p`, from the cache when possible.
    pub fn fields_for(&self, p: &ModelParams) -> Result<FieldPair> {
        let (up, a) = self.field(&ModelParams { b: p.b.abs(), ..*p })?;
        let (down, b) = self.field(&ModelParams { b: -p.b.abs(), ..*p })?;
        Ok(FieldPair { up, down, built: a || b })
    }

    fn write_maps(&self, fields: &FieldPair, started: Instant) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        for (up, f) in [(true, &fields.up), (false, &fields.down)] {
            let path = self.out.join(format!("maps_{}.csv", spin_name(up)));
            self.write_with_manifest(&path, map_csv(f).as_bytes(), &self.manifest(started, Some(f.len())))?;
            files.push(path);
        }
        Ok(files)
    }

    /// Builds (or finds up to date) the fields of the configured model and
    /// writes the heat-map CSVs.
    pub fn fields(&self) -> Result<FieldsReport> {
        let _lock = OutputLock::acquire(&self.out)?;
        let started = Instant::now();
        let fields = self.fields_for(&self.config.model)?;
        let maps_missing = ["maps_up.csv", "maps_down.csv"].iter().any(|f| !self.out.join(f).exists());
        let mut files = vec![self.field_path(fields.up.params()), self.field_path(fields.down.params())];
        if fields.built || maps_missing {
            files.extend(self.write_maps(&fields, started)?);
        }
        Ok(FieldsReport {
            up_to_date: !fields.built,
            nodes: fields.up.len(),
            files,
        })
    }

    /// The drives of the sweep; the model's own drive when none are listed.
    pub fn drives(&self) -> Vec<Drive> {
        if self.config.sweep.drives.is_empty() {
            vec![Drive {
                c: self.config.model.c,
                omega: self.config.model.omega,
            }]
        } else {
            self.config.sweep.drives.clone()
        }
    }

    /// One row of a bias sweep.
    pub fn sweep_point(&self, p: &ModelParams) -> Result<SweepRow> {
        let fields = self.fields_for(p)?;
        let cfg = self.dynamics();
        let s = steady_state_positions(&fields.up, &fields.down, &cfg)?;
        let (map_up, map_down) = fields.maps();
        let currents = spin_currents(&map_up, &map_down, &s.stats_up, &s.stats_down)?;
        let xi_percent = match currents.polarization() {
            Ok(x) => Some(x),
            Err(Error::UndefinedPolarization(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(SweepRow {
            mu_l: p.mu_l,
            mu_r: p.mu_r,
            kinetic_up: s.stats_up.kinetic_energy(),
            kinetic_down: s.stats_down.kinetic_energy(),
            current_up: currents.up,
            current_down: currents.down,
            xi_percent,
        })
    }

    /// Runs the bias sweep for every drive; one CSV per drive.
    pub fn sweep(&self) -> Result<Vec<SweepReport>> {
        let _lock = OutputLock::acquire(&self.out)?;
        let biases = self.config.sweep.biases();
        if biases.is_empty() {
            return Err(Error::Config {
                key: "sweep.mu_l".into(),
                reason: "no bias values to sweep".into(),
            });
        }
        let mut reports = Vec::new();
        for drive in self.drives() {
            let started = Instant::now();
            let mut rows = Vec::with_capacity(biases.len());
            for &(mu_l, mu_r) in &biases {
                let p = ModelParams {
                    mu_l,
                    mu_r,
                    ..self.config.model.with_drive(drive.c, drive.omega)
                };
                rows.push(self.sweep_point(&p)?);
            }
            let file = self.out.join(format!("sweep_c{}_omega{}.csv", drive.c, drive.omega));
            self.write_with_manifest(&file, sweep_csv(&rows).as_bytes(), &self.manifest(started, None))?;
            reports.push(SweepReport { drive, rows, file });
        }
        Ok(reports)
    }

    /// Steady-state positions of both spin species for the configured model,
    /// plus the heat maps.
    pub fn steady(&self) -> Result<SteadyReport> {
        let _lock = OutputLock::acquire(&self.out)?;
        let started = Instant::now();
        let fields = self.fields_for(&self.config.model)?;
        let cfg = self.dynamics();
        let s = steady_state_positions(&fields.up, &fields.down, &cfg)?;
        let (map_up, map_down) = fields.maps();
        let currents = spin_currents(&map_up, &map_down, &s.stats_up, &s.stats_down)?;
        let report = SteadyReport {
            up: spin_summary(&fields.up, &s.stats_up, currents.up),
            down: spin_summary(&fields.down, &s.stats_down, currents.down),
            separation: s.separation,
            n_traj: cfg.n_traj,
        };
        let manifest = self.manifest(started, Some(fields.up.len()));
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        self.write_with_manifest(&self.out.join("steady.json"), json.as_bytes(), &manifest)?;
        self.write_with_manifest(&self.out.join("steady.csv"), steady_csv(&report).as_bytes(), &manifest)?;
        self.write_maps(&fields, started)?;
        if cfg.record_samples {
            for (up, stats) in [(true, &s.stats_up), (false, &s.stats_down)] {
                let path = self.out.join(format!("trajectories_{}.csv", spin_name(up)));
                stats.write_trajectory_dump(&path)?;
            }
        }
        Ok(report)
    }

    /// Runs the property suite and writes `validate.json`.
    pub fn validate(&self) -> Result<ValidateReport> {
        let _lock = OutputLock::acquire(&self.out)?;
        let started = Instant::now();
        let checks = validate::run(ValidateOptions {
            n_nodes: self.config.quadrature.n_nodes,
            seed: self.seed,
            ..ValidateOptions::default()
        });
        let report = ValidateReport {
            passed: checks.iter().all(|c| c.passed),
            checks,
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        self.write_with_manifest(&self.out.join("validate.json"), json.as_bytes(), &self.manifest(started, None))?;
        Ok(report)
    }
}

fn spin_summary(field: &FieldGrid, stats: &EnsembleStats, current: Estimate) -> SpinSteadyState {
    let position = stats.mean_position();
    let at = field.interpolate([position[0].mean, position[1].mean]);
    SpinSteadyState {
        position,
        momentum: stats.mean_momentum(),
        kinetic: stats.kinetic_energy(),
        angular_momentum: stats.angular_momentum(),
        angular_momentum_about_mean: stats.angular_momentum_about_mean(),
        current,
        gamma_a_xy: at.gamma_a[0][1],
        gamma_s_xy: at.gamma_s[0][1],
    }
}

/// Heat-map CSV of one field grid.
pub fn map_csv(f: &FieldGrid) -> String {
    let mut s = String::from(
        "x,y,I_loc,F_x,F_y,gamma_xx,gamma_xy,gamma_yx,gamma_yy,gamma_s_xy,gamma_a_xy,D_xx,D_xy,D_yy\n",
    );
    let (nx, ny) = f.shape();
    for j in 0..ny {
        for i in 0..nx {
            let [x, y] = f.position(i, j);
            let d = f.node(i, j);
            let cur = f.node_current(i, j).unwrap_or(f64::NAN);
            let g = d.gamma;
            let _ = writeln!(
                s,
                "{x},{y},{cur},{},{},{},{},{},{},{},{},{},{},{}",
                d.force[0], d.force[1], g[0][0], g[0][1], g[1][0], g[1][1],
                d.gamma_s[0][1], d.gamma_a[0][1], d.d[0][0], d.d[0][1], d.d[1][1]
            );
        }
    }
    s
}

/// Sweep CSV; `xi_percent` reads `undefined` at zero current.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "mu_l,mu_r,kinetic_up,kinetic_up_se,kinetic_down,kinetic_down_se,\
         current_up,current_up_se,current_down,current_down_se,xi_percent,xi_se\n",
    );
    for r in rows {
        let xi = match r.xi_percent {
            Some(x) => format!("{},{}", x.mean, x.stderr),
            None => "undefined,".into(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{xi}",
            r.mu_l,
            r.mu_r,
            r.kinetic_up.mean,
            r.kinetic_up.stderr,
            r.kinetic_down.mean,
            r.kinetic_down.stderr,
            r.current_up.mean,
            r.current_up.stderr,
            r.current_down.mean,
            r.current_down.stderr,
        );
    }
    s
}

/// One row per spin; the separation repeats on both rows.
pub fn steady_csv(r: &SteadyReport) -> String {
    let mut s = String::from(
        "spin,x,x_se,y,y_se,angular_momentum,angular_momentum_se,kinetic,kinetic_se,\
         current,current_se,gamma_a_xy,gamma_s_xy,separation,separation_se\n",
    );
    for (up, st) in [(true, &r.up), (false, &r.down)] {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            spin_name(up),
            st.position[0].mean,
            st.position[0].stderr,
            st.position[1].mean,
            st.position[1].stderr,
            st.angular_momentum.mean,
            st.angular_momentum.stderr,
            st.kinetic.mean,
            st.kinetic.stderr,
            st.current.mean,
            st.current.stderr,
            st.gamma_a_xy,
            st.gamma_s_xy,
            r.separation.mean,
            r.separation.stderr,
        );
    }
    s
}
