//! Wide-band Floquet self-energies, Floquet Green's functions and the energy
//! quadrature shared by every integral over quasi-energy.
//!
//! Orbital 0 couples to the left lead and orbital 1 to the right lead, each
//! with strength Γ̃, so `Σ_r = −(i/2)Γ̃·I`. The lesser and greater
//! self-energies are diagonal; sector `m` is occupied according to the lead
//! Fermi function at its physical energy `ε − mΩ`, consistent with the `+mΩ`
//! diagonal shift of the Floquet Hamiltonian.

use crate::error::{Error, Result};
use crate::linalg::{FloquetMatrix, C64, ZERO};
use crate::model::{floquet_hamiltonian, sector_label, spectral_reach, Rect, Vec2};
use crate::params::ModelParams;
use crate::quadrature;

/// Fermi–Dirac occupation, overflow-safe for any finite argument.
pub fn fermi(eps: f64, mu: f64, kt: f64) -> f64 {
    let x = (eps - mu) / kt;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Occupation of every sector for one lead: entry `s` is `f(ε − mΩ, μ)` with
/// `m` the label of sector position `s`.
///
/// This is the only place where sector energies meet Fermi functions; the
/// self-energies and the Landauer weights both go through it.
pub fn sector_occupations(eps: f64, mu: f64, p: &ModelParams) -> Vec<f64> {
    (0..p.sectors())
        .map(|s| {
            let m = sector_label(s, p.n_floquet) as f64;
            fermi(eps - m * p.omega, mu, p.kt)
        })
        .collect()
}

/// Diagonal of `Σ_<(ε)/(iΓ̃)` in the `(sector, orbital)` basis.
pub fn basis_occupations(eps: f64, p: &ModelParams) -> Vec<f64> {
    let left = sector_occupations(eps, p.mu_l, p);
    let right = sector_occupations(eps, p.mu_r, p);
    left.iter().zip(&right).flat_map(|(&l, &r)| [l, r]).collect()
}

/// Wide-band self-energies of the junction.
#[derive(Debug, Clone, Copy)]
pub struct SelfEnergies {
    params: ModelParams,
}

pub fn self_energies(p: &ModelParams) -> SelfEnergies {
    SelfEnergies { params: *p }
}

impl SelfEnergies {
    pub fn retarded(&self) -> FloquetMatrix {
        FloquetMatrix::identity(self.params.dim()).scale(C64::new(0.0, -0.5 * self.params.gamma))
    }

    pub fn lesser(&self, eps: f64) -> FloquetMatrix {
        let g = self.params.gamma;
        diagonal(basis_occupations(eps, &self.params).iter().map(|f| C64::new(0.0, g * f)))
    }

    pub fn greater(&self, eps: f64) -> FloquetMatrix {
        let g = self.params.gamma;
        diagonal(
            basis_occupations(eps, &self.params)
                .iter()
                .map(|f| C64::new(0.0, -g * (1.0 - f))),
        )
    }
}

fn diagonal(d: impl ExactSizeIterator<Item = C64>) -> FloquetMatrix {
    let mut m = FloquetMatrix::zeros(d.len());
    for (k, z) in d.enumerate() {
        m[(k, k)] = z;
    }
    m
}

/// Retarded, advanced, lesser and greater Floquet Green's functions at one
/// quasi-energy.
#[derive(Debug, Clone)]
pub struct GreenFunctions {
    pub retarded: FloquetMatrix,
    pub advanced: FloquetMatrix,
    pub lesser: FloquetMatrix,
    pub greater: FloquetMatrix,
}

/// Green's functions by direct inversion of `ε − Σ_r − h^F`.
pub fn green_functions(eps: f64, r: Vec2, p: &ModelParams) -> Result<GreenFunctions> {
    let h = floquet_hamiltonian(r, p);
    if !h.is_finite() {
        return Err(Error::Numerical(format!("non-finite Floquet Hamiltonian at {r:?}")));
    }
    let sigma = self_energies(p);
    let n = p.dim();
    let lhs = &(&FloquetMatrix::identity(n).scale(C64::new(eps, 0.0)) - &sigma.retarded()) - &h;
    let retarded = lhs.inverse()?;
    let advanced = retarded.adjoint();
    let lesser = &(&retarded * &sigma.lesser(eps)) * &advanced;
    let greater = &(&retarded * &sigma.greater(eps)) * &advanced;
    Ok(GreenFunctions {
        retarded,
        advanced,
        lesser,
        greater,
    })
}

/// `∂G_r/∂ε = −G_r²`, exact because `Σ_r` does not depend on energy.
pub fn d_green_retarded(g_r: &FloquetMatrix) -> FloquetMatrix {
    (g_r * g_r).scale(C64::new(-1.0, 0.0))
}

/// Spectral form of the retarded Green's function at a fixed position.
///
/// Because `Σ_r ∝ I`, one eigen-decomposition `h^F = U·E·U†` gives
/// `G_r(ε) = U·diag(1/(ε − E_k + iΓ̃/2))·U†` at every energy.
#[derive(Debug, Clone)]
pub struct Resolvent {
    values: Vec<f64>,
    vectors: FloquetMatrix,
    vectors_adj: FloquetMatrix,
    half_gamma: f64,
}

impl Resolvent {
    pub fn new(r: Vec2, p: &ModelParams) -> Result<Self> {
        let h = floquet_hamiltonian(r, p);
        if !h.is_finite() {
            return Err(Error::Numerical(format!("non-finite Floquet Hamiltonian at {r:?}")));
        }
        let eig = h.hermitian_eigen();
        if eig.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("eigen-decomposition failed at {r:?}")));
        }
        Ok(Self {
            vectors_adj: eig.vectors.adjoint(),
            values: eig.values,
            vectors: eig.vectors,
            half_gamma: 0.5 * p.gamma,
        })
    }

    /// Quasi-energies of `h^F`, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.values
    }

    fn poles(&self, eps: f64) -> Vec<C64> {
        self.values
            .iter()
            .map(|&e| C64::new(eps - e, self.half_gamma).inv())
            .collect()
    }

    pub fn retarded(&self, eps: f64) -> FloquetMatrix {
        let g = self.poles(eps);
        &self.vectors.right_diag_mul(&g) * &self.vectors_adj
    }

    /// `(G_r, ∂_ε G_r)` at one energy.
    pub fn retarded_with_derivative(&self, eps: f64) -> (FloquetMatrix, FloquetMatrix) {
        let g = self.poles(eps);
        let dg: Vec<C64> = g.iter().map(|z| -z * z).collect();
        (
            &self.vectors.right_diag_mul(&g) * &self.vectors_adj,
            &self.vectors.right_diag_mul(&dg) * &self.vectors_adj,
        )
    }
}

/// Nodes and weights for integrals over quasi-energy on `(−∞, ∞)`.
///
/// The core `[lo, hi]` is tiled with equal Gauss–Legendre panels; both tails
/// are mapped onto `[0, 1)` by `ε = edge ± L·t/(1 − t)` and integrated with
/// Gauss–Legendre panels in `t`, so algebraic tails of the Green's functions
/// are captured rather than truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bounds: (f64, f64),
    core: std::ops::Range<usize>,
    recipe: GridRecipe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GridRecipe {
    lo: f64,
    hi: f64,
    core_panels: usize,
    tail_panels: usize,
    tail_scale: f64,
}

/// Nodes per Gauss–Legendre panel.
pub const PANEL_ORDER: usize = 12;
const TAIL_PANELS: usize = 3;
pub const MIN_NODES: usize = 50;

/// Tail margin `W = max(20·kT, 10·Γ̃)`.
pub fn tail_margin(p: &ModelParams) -> f64 {
    (20.0 * p.kt).max(10.0 * p.gamma)
}

/// Core integration window for a parameter set and the positions it will be
/// evaluated at: it covers every lead chemical potential and the whole
/// Floquet spectrum, widened by the tail margin on both sides.
pub fn energy_bounds(p: &ModelParams, region: &Rect) -> (f64, f64) {
    let reach = spectral_reach(p, region);
    let shift = p.n_floquet as f64 * p.omega;
    let w = tail_margin(p);
    let lo = p.mu_l.min(p.mu_r).min(-reach) - shift - w;
    let hi = p.mu_l.max(p.mu_r).max(reach) + shift + w;
    (lo, hi)
}

/// Energy grid with `n_nodes` core nodes, sized for the default `[−8, 8]²`
/// window.
pub fn make_energy_grid(p: &ModelParams, n_nodes: usize) -> Result<EnergyGrid> {
    EnergyGrid::for_region(p, Some(n_nodes), &Rect::default())
}

impl EnergyGrid {
    /// Grid covering positions in `region`. Without an explicit node count the
    /// core panels are `min(πkT, Γ̃)` wide, which resolves both the Lorentzian
    /// poles at distance Γ̃/2 from the real axis and the Matsubara poles of the
    /// Fermi functions.
    pub fn for_region(p: &ModelParams, n_nodes: Option<usize>, region: &Rect) -> Result<Self> {
        p.validate()?;
        let (lo, hi) = energy_bounds(p, region);
        let core_panels = match n_nodes {
            Some(n) if n < MIN_NODES => {
                return Err(Error::invalid("n_nodes", format!("must be >= {MIN_NODES}, got {n}")))
            }
            Some(n) => n.div_ceil(PANEL_ORDER),
            None => {
                let width = (std::f64::consts::PI * p.kt).min(p.gamma);
                ((hi - lo) / width).ceil() as usize
            }
        };
        Ok(Self::from_recipe(GridRecipe {
            lo,
            hi,
            core_panels,
            tail_panels: TAIL_PANELS,
            tail_scale: tail_margin(p),
        }))
    }

    fn from_recipe(recipe: GridRecipe) -> Self {
        let GridRecipe {
            lo,
            hi,
            core_panels,
            tail_panels,
            tail_scale,
        } = recipe;
        let (t, tw) = quadrature::composite(0.0, 1.0, tail_panels, PANEL_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        // lower tail, ascending in ε
        for (ti, wi) in t.iter().zip(&tw).rev() {
            let s = 1.0 - ti;
            nodes.push(lo - tail_scale * ti / s);
            weights.push(wi * tail_scale / (s * s));
        }
        let core_start = nodes.len();
        let (x, w) = quadrature::composite(lo, hi, core_panels, PANEL_ORDER);
        nodes.extend(x);
        weights.extend(w);
        let core = core_start..nodes.len();
        for (ti, wi) in t.iter().zip(&tw) {
            let s = 1.0 - ti;
            nodes.push(hi + tail_scale * ti / s);
            weights.push(wi * tail_scale / (s * s));
        }
        Self {
            nodes,
            weights,
            bounds: (lo, hi),
            core,
            recipe,
        }
    }

    /// The same window with twice as many panels everywhere.
    pub fn refined(&self) -> Self {
        Self::from_recipe(GridRecipe {
            core_panels: 2 * self.recipe.core_panels,
            tail_panels: 2 * self.recipe.tail_panels,
            ..self.recipe
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(ε_min, ε_max)` of the core window.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn core_len(&self) -> usize {
        self.core.len()
    }

    /// Sum of the core weights; equals `ε_max − ε_min`.
    pub fn core_weight_sum(&self) -> f64 {
        self.weights[self.core.clone()].iter().sum()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| w * f(e))
            .sum()
    }

    pub fn integrate_complex(&self, mut f: impl FnMut(f64) -> C64) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(ZERO, |acc, (&e, &w)| acc + f(e) * w)
    }
}

/// Absolute integrand size below which the tail check is skipped.
pub const TAIL_FLOOR: f64 = 1e-12;

/// Relative size of an integrand at the outermost nodes of the grid.
///
/// `magnitudes[k]` is `|integrand(ε_k)|`; returns an error when either edge
/// exceeds `1e−8` of the peak, which means the window is too narrow.
///
/// Edges below [`TAIL_FLOOR`] pass regardless: with (nearly) empty or full
/// leads the whole integrand is an algebraic tail, its peak sits at the window
/// edge and the ratio says nothing about truncation.
pub fn check_tails(magnitudes: &[f64]) -> Result<()> {
    let peak = magnitudes.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 || magnitudes.is_empty() {
        return Ok(());
    }
    let edge = magnitudes[0].max(magnitudes[magnitudes.len() - 1]);
    let ratio = edge / peak;
    if ratio > 1e-8 && edge > TAIL_FLOOR {
        return Err(Error::QuadratureTail { ratio });
    }
    Ok(())
}
