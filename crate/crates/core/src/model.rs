//! Driven two-orbital Hamiltonian, its Floquet representation and the
//! nuclear scalar potential.
//!
//! ```text
//! h(R, t) = [A·x + C·cos(Ωt)]·σx + B·y·σy + (x + Δ)·σz
//! ```
//!
//! Floquet space is indexed by `(m, i)` with sector `m ∈ −N..=N` and orbital
//! `i`; block `(m, m′)` of the Floquet Hamiltonian is `h⁽ᵐ⁻ᵐ′⁾ + δ_{mm′}·m·Ω`.

use crate::linalg::{FloquetMatrix, Mat2, C64};
use crate::params::{ModelParams, PotentialReading};

/// Nuclear position or momentum `(x, y)`.
pub type Vec2 = [f64; 2];

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn square(half_width: f64) -> Self {
        Rect {
            x: [-half_width, half_width],
            y: [-half_width, half_width],
        }
    }

    pub fn contains(&self, r: Vec2) -> bool {
        (self.x[0]..=self.x[1]).contains(&r[0]) && (self.y[0]..=self.y[1]).contains(&r[1])
    }

    pub fn clamp(&self, r: Vec2) -> Vec2 {
        [r[0].clamp(self.x[0], self.x[1]), r[1].clamp(self.y[0], self.y[1])]
    }
}

impl Default for Rect {
    /// The `[−8, 8]²` window of the heat maps.
    fn default() -> Self {
        Rect::square(8.0)
    }
}

/// Upper bound on the spectral radius of `h(R, t)` over a region and all times.
pub fn spectral_reach(p: &ModelParams, region: &Rect) -> f64 {
    let ax = region.x[0].abs().max(region.x[1].abs());
    let ay = region.y[0].abs().max(region.y[1].abs());
    let az = (region.x[0] + p.delta).abs().max((region.x[1] + p.delta).abs());
    let cx = p.a.abs() * ax + p.c.abs();
    let cy = p.b.abs() * ay;
    (cx * cx + cy * cy + az * az).sqrt()
}

/// Nuclear degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Instantaneous electronic Hamiltonian at time `t`.
pub fn hamiltonian_t(r: Vec2, t: f64, p: &ModelParams) -> Mat2 {
    let [x, y] = r;
    Mat2::pauli(p.a * x + p.c * (p.omega * t).cos(), p.b * y, x + p.delta)
}

/// Fourier harmonics of the cosine-driven Hamiltonian. Only `n ∈ {−1, 0, 1}`
/// are non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierBlocks {
    pub static_part: Mat2,
    pub first: Mat2,
}

impl FourierBlocks {
    /// Harmonic `h⁽ⁿ⁾`; satisfies `h⁽⁻ⁿ⁾ = (h⁽ⁿ⁾)†`.
    pub fn get(&self, n: i64) -> Mat2 {
        match n {
            0 => self.static_part,
            1 => self.first,
            -1 => self.first.adjoint(),
            _ => Mat2::ZERO,
        }
    }

    /// `Σₙ h⁽ⁿ⁾ e^{inΩt}`.
    pub fn reconstruct(&self, t: f64, omega: f64) -> Mat2 {
        let phase = C64::from_polar(1.0, omega * t);
        self.static_part + self.first.scale(phase) + self.get(-1).scale(phase.conj())
    }
}

pub fn fourier_blocks(r: Vec2, p: &ModelParams) -> FourierBlocks {
    let [x, y] = r;
    FourierBlocks {
        static_part: Mat2::pauli(p.a * x, p.b * y, x + p.delta),
        first: Mat2::pauli(0.5 * p.c, 0.0, 0.0),
    }
}

/// Sector label of block row `s` (zero-based position in Floquet space).
pub fn sector_label(s: usize, n_floquet: usize) -> i64 {
    s as i64 - n_floquet as i64
}

pub fn floquet_hamiltonian(r: Vec2, p: &ModelParams) -> FloquetMatrix {
    let blocks = fourier_blocks(r, p);
    let sectors = p.sectors();
    let mut h = FloquetMatrix::zeros(p.dim());
    for s in 0..sectors {
        let m = sector_label(s, p.n_floquet);
        for t in 0..sectors {
            let n = m - sector_label(t, p.n_floquet);
            let mut b = blocks.get(n);
            if n == 0 {
                b = b + Mat2::IDENTITY.scale(C64::new(m as f64 * p.omega, 0.0));
            }
            if !b.is_zero() {
                h.set_block(s, t, b);
            }
        }
    }
    h
}

/// The 2×2 block repeated along the diagonal of `∂h^F/∂R_axis`.
pub fn d_hamiltonian_block(axis: Axis, p: &ModelParams) -> Mat2 {
    match axis {
        Axis::X => Mat2::pauli(p.a, 0.0, 1.0),
        Axis::Y => Mat2::pauli(0.0, p.b, 0.0),
    }
}

/// `∂h^F/∂R_axis`: block-diagonal and independent of position and time.
pub fn d_floquet_hamiltonian(axis: Axis, p: &ModelParams) -> FloquetMatrix {
    FloquetMatrix::block_diagonal(p.sectors(), d_hamiltonian_block(axis, p))
}

/// Nuclear potential and its analytic gradient.
pub fn scalar_potential(r: Vec2, p: &ModelParams) -> (f64, Vec2) {
    let [x, y] = r;
    match p.potential {
        PotentialReading::Shifted => {
            let (dx, dy) = (x - p.lambda_x, y - p.lambda_y);
            (0.5 * (dx * dx + dy * dy), [dx, dy])
        }
        PotentialReading::Literal => {
            let (kx, ky) = (1.0 - p.lambda_x, 1.0 - p.lambda_y);
            let (ux, uy) = (kx * x, ky * y);
            (0.5 * (ux * ux + uy * uy), [kx * ux, ky * uy])
        }
    }
}

/// Position of the potential minimum (origin for a flat literal direction).
pub fn potential_minimum(p: &ModelParams) -> Vec2 {
    match p.potential {
        PotentialReading::Shifted => [p.lambda_x, p.lambda_y],
        PotentialReading::Literal => [0.0, 0.0],
    }
}
