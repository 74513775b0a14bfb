//! Mean force, electronic friction and random-force correlation, the
//! tabulated fields used by the Langevin integrator, and Gaussian sampling of
//! the random force.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen2;
use crate::model::{scalar_potential, Rect, Vec2};
use crate::negf::EnergyGrid;
use crate::params::ModelParams;
use crate::response::{electronic_response, Response, Wanted};

pub type Mat2r = [[f64; 2]; 2];

/// Largest imaginary residue tolerated before the integrals are truncated to
/// real numbers.
pub const RESIDUE_TOLERANCE: f64 = 1e-9;

/// Eigenvalues of `D` between this and zero are clipped to zero; anything
/// more negative is an error.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Everything the Langevin integrator needs at one position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrictionData {
    /// Total mean force including `−∇U`.
    pub force: Vec2,
    pub gamma: Mat2r,
    pub gamma_s: Mat2r,
    pub gamma_a: Mat2r,
    pub d: Mat2r,
}

impl FrictionData {
    pub fn new(force: Vec2, gamma: Mat2r, d: Mat2r) -> Self {
        let (gamma_s, gamma_a) = decompose(gamma);
        Self {
            force,
            gamma,
            gamma_s,
            gamma_a,
            d,
        }
    }

    fn from_response(r: Vec2, p: &ModelParams, resp: &Response) -> Self {
        let (_, grad) = scalar_potential(r, p);
        let force = [resp.force[0] - grad[0], resp.force[1] - grad[1]];
        Self::new(force, resp.friction, resp.correlation)
    }
}

/// `(γ_S, γ_A)` with `γ = γ_S + γ_A`.
pub fn decompose(gamma: Mat2r) -> (Mat2r, Mat2r) {
    let off_s = 0.5 * (gamma[0][1] + gamma[1][0]);
    let off_a = 0.5 * (gamma[0][1] - gamma[1][0]);
    (
        [[gamma[0][0], off_s], [off_s, gamma[1][1]]],
        [[0.0, off_a], [-off_a, 0.0]],
    )
}

fn checked(r: Vec2, p: &ModelParams, grid: &EnergyGrid, wanted: Wanted) -> Result<Response> {
    let resp = electronic_response(r, p, grid, wanted)?;
    let worst = resp.residues.max();
    if worst > RESIDUE_TOLERANCE {
        return Err(Error::Numerical(format!(
            "imaginary residue {worst:.3e} at {r:?} exceeds {RESIDUE_TOLERANCE:e}"
        )));
    }
    Ok(resp)
}

/// Mean force including the potential gradient.
pub fn mean_force(r: Vec2, p: &ModelParams, grid: &EnergyGrid) -> Result<Vec2> {
    let resp = checked(r, p, grid, Wanted::FORCE)?;
    let (_, grad) = scalar_potential(r, p);
    Ok([resp.force[0] - grad[0], resp.force[1] - grad[1]])
}

pub fn friction_tensor(r: Vec2, p: &ModelParams, grid: &EnergyGrid) -> Result<Mat2r> {
    Ok(checked(r, p, grid, Wanted::FRICTION)?.friction)
}

/// Symmetrized random-force correlation `D`.
pub fn correlation_matrix(r: Vec2, p: &ModelParams, grid: &EnergyGrid) -> Result<Mat2r> {
    Ok(checked(r, p, grid, Wanted::CORRELATION)?.correlation)
}

/// Force, friction and correlation in one pass over the energy grid.
pub fn friction_data(r: Vec2, p: &ModelParams, grid: &EnergyGrid) -> Result<FrictionData> {
    let resp = checked(r, p, grid, Wanted::FRICTION_FIELDS)?;
    Ok(FrictionData::from_response(r, p, &resp))
}

/// Eigenvalues of a symmetric `D` with small negative values clipped to zero.
pub fn clipped_spectrum(d: &Mat2r) -> Result<([f64; 2], Mat2r)> {
    let (vals, q) = symmetric_eigen2(*d);
    if vals[0] < -PSD_TOLERANCE {
        return Err(Error::NotPositive(vals[0]));
    }
    Ok(([vals[0].max(0.0), vals[1].max(0.0)], q))
}

/// One draw of the random force for a step of length `dt`.
///
/// `D` is diagonalized as `Q·D̃·Qᵀ`; independent Gaussians with standard
/// deviations `sqrt(2·D̃/dt)` are rotated back with `Q`, so the covariance of
/// the result is `(2/dt)·D`.
pub fn random_force<R: Rng + ?Sized>(d: &Mat2r, dt: f64, rng: &mut R) -> Result<Vec2> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let (vals, q) = clipped_spectrum(d)?;
    let g0: f64 = rng.sample(StandardNormal);
    let g1: f64 = rng.sample(StandardNormal);
    let g = [g0 * (2.0 * vals[0] / dt).sqrt(), g1 * (2.0 * vals[1] / dt).sqrt()];
    Ok([q[0][0] * g[0] + q[0][1] * g[1], q[1][0] * g[0] + q[1][1] * g[1]])
}

/// Geometry of a uniform rectilinear node lattice; node `(i, j)` has index
/// `j·nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub bounds: Rect,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    /// Lattice covering `bounds`; the upper edges are snapped onto the last node.
    pub fn new(bounds: Rect, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid("spacing", format!("must be > 0, got {spacing}")));
        }
        let nx = axis_nodes(bounds.x[0], bounds.x[1], spacing, "bounds.x")?;
        let ny = axis_nodes(bounds.y[0], bounds.y[1], spacing, "bounds.y")?;
        Ok(Self {
            bounds: Rect {
                x: [bounds.x[0], bounds.x[0] + (nx - 1) as f64 * spacing],
                y: [bounds.y[0], bounds.y[0] + (ny - 1) as f64 * spacing],
            },
            spacing,
            nx,
            ny,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, k: usize) -> Vec2 {
        [
            self.bounds.x[0] + (k % self.nx) as f64 * self.spacing,
            self.bounds.y[0] + (k / self.nx) as f64 * self.spacing,
        ]
    }

    /// Bilinear weights of the corners `(i,j), (i+1,j), (i,j+1), (i+1,j+1)` of
    /// the cell holding `r` (clamped onto the lattice).
    pub fn corner_weights(&self, r: Vec2) -> ([usize; 4], [f64; 4]) {
        let (i, fx) = grid_coordinate(r[0], self.bounds.x[0], self.spacing, self.nx);
        let (j, fy) = grid_coordinate(r[1], self.bounds.y[0], self.spacing, self.ny);
        let k = j * self.nx + i;
        (
            [k, k + 1, k + self.nx, k + self.nx + 1],
            [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy],
        )
    }

    /// Parallel evaluation of `f` at every node; errors carry the coordinates.
    pub fn evaluate<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(Vec2) -> Result<T> + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let r = self.position(k);
                f(r).map_err(|e| e.at_node(r[0], r[1]))
            })
            .collect()
    }
}

/// Uniform rectilinear grid of [`FrictionData`], optionally with the local
/// current at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    params: ModelParams,
    bounds: Rect,
    spacing: f64,
    nx: usize,
    ny: usize,
    data: Vec<FrictionData>,
    current: Option<Vec<f64>>,
}

/// Number of nodes along one axis; the upper bound is snapped onto the grid.
fn axis_nodes(lo: f64, hi: f64, h: f64, key: &'static str) -> Result<usize> {
    if !(hi > lo) {
        return Err(Error::invalid(key, format!("degenerate interval [{lo}, {hi}]")));
    }
    let t = (hi - lo) / h;
    let n = if (t - t.round()).abs() < 1e-6 { t.round() } else { t.floor() };
    let n = n as usize + 1;
    if n < 2 {
        return Err(Error::invalid("spacing", format!("{h} leaves fewer than 2 nodes on {key}")));
    }
    Ok(n)
}

/// Snaps coordinates that sit on a node within rounding, so interpolation at
/// a node returns the node value exactly.
fn grid_coordinate(v: f64, lo: f64, h: f64, n: usize) -> (usize, f64) {
    let mut t = ((v - lo) / h).clamp(0.0, (n - 1) as f64);
    if (t - t.round()).abs() < 1e-9 {
        t = t.round();
    }
    let i = (t.floor() as usize).min(n - 2);
    (i, t - i as f64)
}

const MAGIC: &[u8; 8] = b"FCISSFLD";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    params: ModelParams,
    bounds: Rect,
    spacing: f64,
    nx: usize,
    ny: usize,
    has_current: bool,
}

impl FieldGrid {
    /// Tabulates `f` on the grid, in parallel over nodes. Errors carry the
    /// node coordinates.
    pub fn tabulate<F>(p: &ModelParams, bounds: Rect, spacing: f64, f: F) -> Result<Self>
    where
        F: Fn(Vec2) -> Result<(FrictionData, Option<f64>)> + Sync,
    {
        let lattice = Lattice::new(bounds, spacing)?;
        let Lattice { bounds, nx, ny, .. } = lattice;
        let node = |k: usize| lattice.position(k);
        let values = lattice.evaluate(f)?;
        let has_current = values.first().is_some_and(|v| v.1.is_some());
        let mut data = Vec::with_capacity(values.len());
        let mut current = has_current.then(|| Vec::with_capacity(values.len()));
        for (k, (d, i)) in values.into_iter().enumerate() {
            let all_finite = d.force.iter().chain(d.gamma.iter().flatten()).chain(d.d.iter().flatten()).all(|v| v.is_finite());
            if !all_finite || i.is_some_and(|i| !i.is_finite()) {
                let r = node(k);
                return Err(Error::Numerical("non-finite field value".into()).at_node(r[0], r[1]));
            }
            data.push(d);
            if let (Some(c), Some(i)) = (current.as_mut(), i) {
                c.push(i);
            }
        }
        Ok(Self {
            params: *p,
            bounds,
            spacing,
            nx,
            ny,
            data,
            current,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Bounds with the upper edges snapped onto the last node.
    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `(nx, ny)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn has_current(&self) -> bool {
        self.current.is_some()
    }

    pub fn position(&self, i: usize, j: usize) -> Vec2 {
        [
            self.bounds.x[0] + i as f64 * self.spacing,
            self.bounds.y[0] + j as f64 * self.spacing,
        ]
    }

    pub fn node(&self, i: usize, j: usize) -> &FrictionData {
        &self.data[j * self.nx + i]
    }

    pub fn node_current(&self, i: usize, j: usize) -> Option<f64> {
        self.current.as_ref().map(|c| c[j * self.nx + i])
    }

    /// Node values in row-major order (x fastest).
    pub fn nodes(&self) -> &[FrictionData] {
        &self.data
    }

    pub fn currents(&self) -> Option<&[f64]> {
        self.current.as_deref()
    }

    pub fn contains(&self, r: Vec2) -> bool {
        self.bounds.contains(r)
    }

    pub fn lattice(&self) -> Lattice {
        Lattice {
            bounds: self.bounds,
            spacing: self.spacing,
            nx: self.nx,
            ny: self.ny,
        }
    }

    pub fn corner_weights(&self, r: Vec2) -> ([usize; 4], [f64; 4]) {
        self.lattice().corner_weights(r)
    }

    /// Bilinear interpolation of every component. Positions outside the grid
    /// are clamped onto it; callers that care check [`FieldGrid::contains`].
    /// `D` is re-symmetrized and negative eigenvalues are clipped.
    pub fn interpolate(&self, r: Vec2) -> FrictionData {
        let (ks, ws) = self.corner_weights(r);
        let mut force = [0.0; 2];
        let mut gamma = [[0.0; 2]; 2];
        let mut d = [[0.0; 2]; 2];
        for (&k, &w) in ks.iter().zip(&ws) {
            let v = &self.data[k];
            for mu in 0..2 {
                force[mu] += w * v.force[mu];
                for nu in 0..2 {
                    gamma[mu][nu] += w * v.gamma[mu][nu];
                    d[mu][nu] += w * v.d[mu][nu];
                }
            }
        }
        FrictionData::new(force, gamma, project_psd(d))
    }

    /// Bilinear interpolation of the local current, if tabulated.
    pub fn interpolate_current(&self, r: Vec2) -> Option<f64> {
        let c = self.current.as_ref()?;
        let (ks, ws) = self.corner_weights(r);
        Some(ks.iter().zip(&ws).map(|(&k, &w)| w * c[k]).sum())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&Header {
            params: self.params,
            bounds: self.bounds,
            spacing: self.spacing,
            nx: self.nx,
            ny: self.ny,
            has_current: self.current.is_some(),
        })
        .expect("header serializes");
        let per = if self.current.is_some() { 10 } else { 9 };
        let mut out = Vec::with_capacity(16 + header.len() + 8 * per * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for (k, v) in self.data.iter().enumerate() {
            let mut rec = vec![
                v.force[0], v.force[1], v.gamma[0][0], v.gamma[0][1], v.gamma[1][0], v.gamma[1][1], v.d[0][0],
                v.d[0][1], v.d[1][1],
            ];
            if let Some(c) = &self.current {
                rec.push(c[k]);
            }
            for x in rec {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a field grid file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported format version {version}")));
        }
        let hlen = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = bytes.get(16 + hlen..).ok_or_else(|| bad("truncated header"))?;
        let h: Header = serde_json::from_slice(&bytes[16..16 + hlen]).map_err(|e| bad(&e.to_string()))?;
        let per = if h.has_current { 10 } else { 9 };
        let n = h.nx * h.ny;
        if h.nx < 2 || h.ny < 2 || body.len() != 8 * per * n {
            return Err(bad("record count does not match header"));
        }
        let vals: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut data = Vec::with_capacity(n);
        let mut current = h.has_current.then(|| Vec::with_capacity(n));
        for rec in vals.chunks_exact(per) {
            data.push(FrictionData::new(
                [rec[0], rec[1]],
                [[rec[2], rec[3]], [rec[4], rec[5]]],
                [[rec[6], rec[7]], [rec[7], rec[8]]],
            ));
            if let Some(c) = current.as_mut() {
                c.push(rec[9]);
            }
        }
        Ok(Self {
            params: h.params,
            bounds: h.bounds,
            spacing: h.spacing,
            nx: h.nx,
            ny: h.ny,
            data,
            current,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

/// Symmetrizes and clips negative eigenvalues to zero.
fn project_psd(d: Mat2r) -> Mat2r {
    let off = 0.5 * (d[0][1] + d[1][0]);
    let d = [[d[0][0], off], [off, d[1][1]]];
    let (vals, q) = symmetric_eigen2(d);
    if vals[0] >= 0.0 {
        return d;
    }
    let l = vals[1].max(0.0);
    // only the larger eigenpair survives
    let v = [q[0][1], q[1][1]];
    let o = l * v[0] * v[1];
    [[l * v[0] * v[0], o], [o, l * v[1] * v[1]]]
}

/// Friction fields on a grid, optionally with the local current from the same
/// Green's functions.
pub fn build_field_grid(
    p: &ModelParams,
    bounds: Rect,
    spacing: f64,
    grid: &EnergyGrid,
    with_current: bool,
) -> Result<FieldGrid> {
    p.validate()?;
    let wanted = if with_current { Wanted::ALL } else { Wanted::FRICTION_FIELDS };
    FieldGrid::tabulate(p, bounds, spacing, |r| {
        let resp = checked(r, p, grid, wanted)?;
        Ok((FrictionData::from_response(r, p, &resp), with_current.then_some(resp.current)))
    })
}
