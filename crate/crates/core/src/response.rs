//! Energy integrals of the Floquet Green's functions at one nuclear position.
//!
//! One pass over the energy grid accumulates any subset of
//!
//! ```text
//! F_μ   = −1/(2πi·S) ∫ Tr{∂_μh G_<}
//! γ_μν  =  1/(2π·S)  ∫ Tr{∂_μh ∂_εG_r ∂_νh G_<} + c.c.
//! D_μν  =  1/(4π·S)  ∫ Tr{∂_μh G_> ∂_νh G_<}
//! I_loc =  1/(2π·S)  ∫ Tr{Γ_L G_r Γ_R G_a (f_L − f_R)}
//! ```
//!
//! with `S = 2N + 1`. The friction prefactor is `+1/(2π·S)`: with
//! `G_< = i·f·A` this makes the equilibrium friction non-negative and gives
//! `D = kT·γ` at equilibrium.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{FloquetMatrix, Mat2, C64, ZERO};
use crate::model::{d_hamiltonian_block, Axis, Vec2};
use crate::negf::{basis_occupations, check_tails, sector_occupations, EnergyGrid, Resolvent};
use crate::params::ModelParams;

/// Selects which integrals a pass accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wanted {
    pub force: bool,
    pub friction: bool,
    pub correlation: bool,
    pub current: bool,
}

impl Wanted {
    pub const ALL: Wanted = Wanted {
        force: true,
        friction: true,
        correlation: true,
        current: true,
    };
    pub const FRICTION_FIELDS: Wanted = Wanted {
        current: false,
        ..Wanted::ALL
    };
    pub const FORCE: Wanted = Wanted {
        force: true,
        friction: false,
        correlation: false,
        current: false,
    };
    pub const FRICTION: Wanted = Wanted {
        force: false,
        friction: true,
        correlation: false,
        current: false,
    };
    pub const CORRELATION: Wanted = Wanted {
        force: false,
        friction: false,
        correlation: true,
        current: false,
    };
    pub const CURRENT: Wanted = Wanted {
        force: false,
        friction: false,
        correlation: false,
        current: true,
    };
}

/// Largest imaginary parts discarded when the integrals were truncated to
/// real numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residues {
    pub force: f64,
    pub friction: f64,
    pub correlation: f64,
    pub current: f64,
}

impl Residues {
    pub fn max(&self) -> f64 {
        self.force
            .max(self.friction)
            .max(self.correlation)
            .max(self.current)
    }
}

/// Electronic contributions at one position. Fields not requested are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Response {
    /// Electronic part of the mean force (without `−∇U`).
    pub force: Vec2,
    pub friction: [[f64; 2]; 2],
    /// Symmetrized random-force correlation.
    pub correlation: [[f64; 2]; 2],
    pub current: f64,
    pub residues: Residues,
}

/// Evaluates the requested integrals at `r`.
pub fn electronic_response(
    r: Vec2,
    p: &ModelParams,
    grid: &EnergyGrid,
    wanted: Wanted,
) -> Result<Response> {
    electronic_response_with_sign(r, p, grid, wanted, 1.0)
}

/// As [`electronic_response`] with an explicit sign on the friction integral.
/// `−1` reproduces the bare `−1/(2π·S)` prefactor.
#[doc(hidden)]
pub fn electronic_response_with_sign(
    r: Vec2,
    p: &ModelParams,
    grid: &EnergyGrid,
    wanted: Wanted,
    friction_sign: f64,
) -> Result<Response> {
    let resolvent = Resolvent::new(r, p)?;
    let dh = [d_hamiltonian_block(Axis::X, p), d_hamiltonian_block(Axis::Y, p)];
    let gamma = p.gamma;

    let mut force = [ZERO; 2];
    let mut friction = [[ZERO; 2]; 2];
    let mut corr = [[ZERO; 2]; 2];
    let mut current = 0.0;
    let mut magnitudes = Vec::with_capacity(grid.len());

    let needs_lesser = wanted.force || wanted.friction || wanted.correlation;

    for (&eps, &w) in grid.nodes().iter().zip(grid.weights()) {
        let occ = basis_occupations(eps, p);
        let all_empty = occ.iter().all(|&f| f == 0.0);
        let all_filled = occ.iter().all(|&f| f == 1.0);
        let mut node_mag = 0.0f64;
        if all_empty {
            // G_< = 0 and f_L = f_R: nothing to accumulate
            magnitudes.push(0.0);
            continue;
        }

        let (gr, dg) = if wanted.friction {
            let (gr, dg) = resolvent.retarded_with_derivative(eps);
            (gr, Some(dg))
        } else {
            (resolvent.retarded(eps), None)
        };

        if needs_lesser {
            let ga = gr.adjoint();
            let lesser = if all_filled {
                // Σ_< = iΓ̃·I, so G_r Σ_< G_a = G_a − G_r
                &ga - &gr
            } else {
                let s: Vec<C64> = occ.iter().map(|&f| C64::new(0.0, gamma * f)).collect();
                &gr.right_diag_mul(&s) * &ga
            };

            if wanted.force {
                for mu in 0..2 {
                    let t = trace_block_product(&dh[mu], &lesser);
                    node_mag = node_mag.max(t.norm());
                    force[mu] += t * w;
                }
            }

            let q: Option<[FloquetMatrix; 2]> = (wanted.friction || wanted.correlation)
                .then(|| [lesser.left_block_mul(&dh[0]), lesser.left_block_mul(&dh[1])]);

            if let (Some(dg), Some(q)) = (&dg, &q) {
                let pm = [dg.left_block_mul(&dh[0]), dg.left_block_mul(&dh[1])];
                for mu in 0..2 {
                    for nu in 0..2 {
                        let t = pm[mu].trace_product(&q[nu]);
                        node_mag = node_mag.max(t.norm());
                        friction[mu][nu] += t * w;
                    }
                }
            }

            if wanted.correlation && !all_filled {
                let q = q.as_ref().expect("lesser products");
                let greater = &lesser + &(&gr - &ga);
                let rm = [greater.left_block_mul(&dh[0]), greater.left_block_mul(&dh[1])];
                for mu in 0..2 {
                    for nu in 0..2 {
                        let t = rm[mu].trace_product(&q[nu]);
                        node_mag = node_mag.max(t.norm());
                        corr[mu][nu] += t * w;
                    }
                }
            }
        }

        if wanted.current {
            let t = landauer_trace(&gr, eps, p);
            node_mag = node_mag.max(t.abs());
            current += w * t;
        }
        magnitudes.push(node_mag);
    }
    check_tails(&magnitudes)?;

    let s = p.sectors() as f64;
    let mut out = Response::default();
    // −1/(2πi) = i/(2π)
    for mu in 0..2 {
        let f = force[mu] * C64::new(0.0, 1.0 / (2.0 * PI * s));
        out.force[mu] = f.re;
        out.residues.force = out.residues.force.max(f.im.abs());
    }
    for mu in 0..2 {
        for nu in 0..2 {
            let integral = friction[mu][nu];
            out.friction[mu][nu] = friction_sign * (integral + integral.conj()).re / (2.0 * PI * s);
            let sym = (corr[mu][nu] + corr[nu][mu]) * (0.5 / (4.0 * PI * s));
            out.correlation[mu][nu] = sym.re;
            out.residues.correlation = out.residues.correlation.max(sym.im.abs());
        }
    }
    out.current = current / (2.0 * PI * s);

    let finite = out.force.iter().all(|v| v.is_finite())
        && out.friction.iter().flatten().all(|v| v.is_finite())
        && out.correlation.iter().flatten().all(|v| v.is_finite())
        && out.current.is_finite();
    if !finite {
        return Err(Error::Numerical(format!("non-finite electronic response at {r:?}")));
    }
    Ok(out)
}

/// `Tr{B·X}` with `B` block-diagonal (same 2×2 block in every sector).
pub(crate) fn trace_block_product(b: &Mat2, x: &FloquetMatrix) -> C64 {
    let mut acc = ZERO;
    for s in 0..x.sectors() {
        let (r0, r1) = (2 * s, 2 * s + 1);
        acc += b.0[0][0] * x[(r0, r0)]
            + b.0[0][1] * x[(r1, r0)]
            + b.0[1][0] * x[(r0, r1)]
            + b.0[1][1] * x[(r1, r1)];
    }
    acc
}

/// `Tr{T^F(ε)·(f_L^F − f_R^F)}` with `T^F = Γ_L G_r Γ_R G_a`.
///
/// Only orbital 0 of each sector couples left and only orbital 1 couples
/// right, so the trace reduces to `Γ̃² Σ_{s,s′} w_s |G_r[(s,0),(s′,1)]|²`.
pub(crate) fn landauer_trace(gr: &FloquetMatrix, eps: f64, p: &ModelParams) -> f64 {
    let fl = sector_occupations(eps, p.mu_l, p);
    let fr = sector_occupations(eps, p.mu_r, p);
    let sectors = p.sectors();
    let g2 = p.gamma * p.gamma;
    let mut acc = 0.0;
    for s in 0..sectors {
        let weight = fl[s] - fr[s];
        if weight == 0.0 {
            continue;
        }
        let row = 2 * s;
        let mut t = 0.0;
        for s2 in 0..sectors {
            t += gr[(row, 2 * s2 + 1)].norm_sqr();
        }
        acc += weight * g2 * t;
    }
    acc
}
