//! Floquet transmission, local Landauer current, spin currents and spin
//! polarization.
//!
//! Orbital 0 of every sector couples to the left lead and orbital 1 to the
//! right lead: `Γ_L = Γ̃·diag(1, 0)` and `Γ_R = Γ̃·diag(0, 1)` per sector.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EnsembleStats, Estimate};
use crate::error::{Error, Result};
use crate::friction::{FieldGrid, Lattice};
use crate::linalg::{FloquetMatrix, C64};
use crate::model::{Rect, Vec2};
use crate::negf::{green_functions, EnergyGrid, Resolvent};
use crate::params::ModelParams;
use crate::response::{electronic_response, Wanted};

/// Lead coupling matrices `(Γ_L, Γ_R)` in Floquet space.
pub fn lead_couplings(p: &ModelParams) -> (FloquetMatrix, FloquetMatrix) {
    let n = p.dim();
    let g = C64::new(p.gamma, 0.0);
    let mut l = FloquetMatrix::zeros(n);
    let mut r = FloquetMatrix::zeros(n);
    for s in 0..p.sectors() {
        l[(2 * s, 2 * s)] = g;
        r[(2 * s + 1, 2 * s + 1)] = g;
    }
    (l, r)
}

/// `T^F(ε) = Γ_L·G_r·Γ_R·G_a`.
pub fn transmission(eps: f64, r: Vec2, p: &ModelParams) -> Result<FloquetMatrix> {
    if p.gamma == 0.0 {
        return Ok(FloquetMatrix::zeros(p.dim()));
    }
    let g = green_functions(eps, r, p)?;
    let (gl, gr) = lead_couplings(p);
    Ok(&(&(&gl * &g.retarded) * &gr) * &g.advanced)
}

/// `Tr T^F(ε) = Γ̃²·Σ |G_r[left orbital, right orbital]|²`, from a prepared
/// resolvent.
pub fn transmission_trace(resolvent: &Resolvent, eps: f64, p: &ModelParams) -> f64 {
    let g = resolvent.retarded(eps);
    let n = p.sectors();
    let mut t = 0.0;
    for s in 0..n {
        for s2 in 0..n {
            t += g[(2 * s, 2 * s2 + 1)].norm_sqr();
        }
    }
    p.gamma * p.gamma * t
}

/// Local Landauer current at a fixed nuclear position.
pub fn local_current(r: Vec2, p: &ModelParams, grid: &EnergyGrid) -> Result<f64> {
    Ok(electronic_response(r, p, grid, Wanted::CURRENT)?.current)
}

/// Local current tabulated on a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportMap {
    pub lattice: Lattice,
    pub i_loc: Vec<f64>,
}

impl TransportMap {
    pub fn build(p: &ModelParams, bounds: Rect, spacing: f64, grid: &EnergyGrid) -> Result<Self> {
        p.validate()?;
        let lattice = Lattice::new(bounds, spacing)?;
        let i_loc = lattice.evaluate(|r| local_current(r, p, grid))?;
        Ok(Self { lattice, i_loc })
    }

    /// The current stored alongside a field grid, if it was tabulated.
    pub fn from_field(field: &FieldGrid) -> Option<Self> {
        Some(Self {
            lattice: field.lattice(),
            i_loc: field.currents()?.to_vec(),
        })
    }

    pub fn interpolate(&self, r: Vec2) -> f64 {
        let (ks, ws) = self.lattice.corner_weights(r);
        ks.iter().zip(&ws).map(|(&k, &w)| w * self.i_loc[k]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.i_loc.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Columns `x,y,I_loc`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        let io = |e| Error::io(path, e);
        writeln!(w, "x,y,I_loc").map_err(io)?;
        for (k, v) in self.i_loc.iter().enumerate() {
            let [x, y] = self.lattice.position(k);
            writeln!(w, "{x},{y},{v}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Ensemble-averaged currents of both spin species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinCurrents {
    pub up: Estimate,
    pub down: Estimate,
}

impl SpinCurrents {
    /// Polarization in percent with its propagated standard error.
    pub fn polarization(&self) -> Result<Estimate> {
        let (u, d) = (self.up.mean, self.down.mean);
        let mean = spin_polarization(u, d)?;
        let s = u + d;
        let stderr = 200.0 / (s * s) * (u * u * self.down.stderr.powi(2) + d * d * self.up.stderr.powi(2)).sqrt();
        Ok(Estimate { mean, stderr })
    }
}

/// Per-trajectory currents `Σ_k ρ_k·I_loc,k` of one ensemble.
pub fn trajectory_currents(map: &TransportMap, stats: &EnsembleStats) -> Result<Vec<f64>> {
    if stats.lattice != Some(map.lattice) {
        return Err(Error::invalid(
            "current map",
            "ensemble was not sampled on the lattice of the current map",
        ));
    }
    let total = stats.n_traj() * stats.samples_per_trajectory;
    let outside: usize = stats.trajectories.iter().map(|t| t.outside).sum();
    if outside * 100 > total {
        return Err(Error::OutsideMap { outside, total });
    }
    Ok(stats
        .trajectories
        .iter()
        .map(|t| t.density.iter().map(|&(k, w)| w * map.i_loc[k as usize]).sum())
        .collect())
}

/// Spin currents: each ensemble averaged against its own current map.
///
/// With a static Hamiltonian both maps coincide; under driving they differ
/// slightly, so each spin species uses the map built from its own `B`.
pub fn spin_currents(
    map_up: &TransportMap,
    map_down: &TransportMap,
    stats_up: &EnsembleStats,
    stats_down: &EnsembleStats,
) -> Result<SpinCurrents> {
    let up = trajectory_currents(map_up, stats_up)?;
    let down = trajectory_currents(map_down, stats_down)?;
    Ok(SpinCurrents {
        up: Estimate::from_samples(up.iter().copied()),
        down: Estimate::from_samples(down.iter().copied()),
    })
}

/// Below this total current the polarization is undefined.
pub const ZERO_CURRENT: f64 = 1e-14;

/// `ξ = (I↓ − I↑)/(I↓ + I↑) × 100`.
pub fn spin_polarization(i_up: f64, i_down: f64) -> Result<f64> {
    let total = i_up + i_down;
    if total.abs() < ZERO_CURRENT {
        return Err(Error::UndefinedPolarization(total));
    }
    Ok((i_down - i_up) / total * 100.0)
}
