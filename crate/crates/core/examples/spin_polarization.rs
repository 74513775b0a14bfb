//! Spin polarization of the current for the symmetric junction at μ_L = 4
//! without drive: both spin ensembles, their currents and ξ.
//!
//! Takes about half a minute on one core with the coarse settings below.
//!
//!     cargo run --release --example spin_polarization

use floquet_ciss::dynamics::{steady_state_positions, DynamicsConfig};
use floquet_ciss::friction::build_field_grid;
use floquet_ciss::model::Rect;
use floquet_ciss::negf::EnergyGrid;
use floquet_ciss::transport::{spin_currents, TransportMap};
use floquet_ciss::ModelParams;

fn main() -> floquet_ciss::Result<()> {
    // C = 0, so a single Floquet sector is exact.
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric().with_bias(4.0)
    };
    let region = Rect::square(8.0);
    let grid = EnergyGrid::for_region(&p, None, &region)?;
    let up = build_field_grid(&p, region, 0.4, &grid, true)?;
    let down = build_field_grid(&p.spin_flipped(), region, 0.4, &grid, true)?;

    let cfg = DynamicsConfig {
        n_traj: 200,
        ..DynamicsConfig::default()
    };
    let s = steady_state_positions(&up, &down, &cfg)?;
    let maps = (TransportMap::from_field(&up).unwrap(), TransportMap::from_field(&down).unwrap());
    let i = spin_currents(&maps.0, &maps.1, &s.stats_up, &s.stats_down)?;
    let xi = i.polarization()?;

    println!("⟨KE⟩↑ = {:.3}, ⟨KE⟩↓ = {:.3}", s.stats_up.kinetic_energy().mean, s.stats_down.kinetic_energy().mean);
    println!("I↑ = {:.5} ± {:.5}", i.up.mean, i.up.stderr);
    println!("I↓ = {:.5} ± {:.5}", i.down.mean, i.down.stderr);
    println!("ξ  = {:+.2} ± {:.2} %", xi.mean, xi.stderr);
    Ok(())
}
