//! Floquet electronic friction and spin-resolved transport for a periodically
//! driven two-orbital junction.
//!
//! The electronic structure is a 2×2 Hamiltonian that depends on two nuclear
//! coordinates; its Floquet Green's functions give the mean force, friction
//! tensor and random-force correlation that drive Langevin dynamics of the
//! nuclei, and the Landauer current that is averaged over the nuclear steady
//! state of each spin species.
//!
//! Start with the examples, roughly in this order:
//!
//! ```text
//! floquet_spectrum    quasi-energies of h^F along x
//! green_functions     G_r, G_<, the Keldysh identity, Tr T for both spins
//! friction_tensor     F, γ = γ_S + γ_A and D at a few positions
//! equipartition       equilibrium Langevin ensemble, ⟨KE⟩ → kT
//! spin_polarization   spin ensembles, their currents and ξ
//! steady_state        the Experiment API with a fixed initial condition
//! field_cache         hashed field files and manifests
//! validation_suite    the property checks behind `ciss validate`
//! ```
//!
//! Run one with `cargo run --release --example <name>`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod friction;
pub mod linalg;
pub mod model;
pub mod negf;
pub mod params;
pub mod quadrature;
pub mod response;
pub mod transport;
pub mod validate;

pub use error::{Error, Result};
pub use params::{ModelParams, PotentialReading};
