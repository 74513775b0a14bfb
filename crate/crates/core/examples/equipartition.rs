//! Langevin ensemble in equilibrium: the mean kinetic energy per degree of
//! freedom approaches kT/2, i.e. ⟨p²/2M⟩ = kT for the two coordinates.
//!
//! Fields are tabulated on a coarse grid and interpolated during the run.
//!
//!     cargo run --release --example equipartition

use floquet_ciss::dynamics::{run_ensemble, DynamicsConfig};
use floquet_ciss::friction::build_field_grid;
use floquet_ciss::model::Rect;
use floquet_ciss::negf::EnergyGrid;
use floquet_ciss::ModelParams;

fn main() -> floquet_ciss::Result<()> {
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric()
    };
    let region = Rect::square(5.0);
    let grid = EnergyGrid::for_region(&p, None, &region)?;
    let field = build_field_grid(&p, region, 0.25, &grid, false)?;
    println!("{} field nodes", field.len());

    let cfg = DynamicsConfig {
        n_traj: 200,
        t_burn: 100.0,
        t_sample: 300.0,
        master_seed: 11,
        ..DynamicsConfig::default()
    };
    let stats = run_ensemble(&field, &cfg)?;
    let ke = stats.kinetic_energy();
    let [x, y] = stats.mean_position();
    println!("⟨KE⟩ = {:.4} ± {:.4}   (kT = {})", ke.mean, ke.stderr, p.kt);
    println!("⟨R⟩  = ({:+.3} ± {:.3}, {:+.3} ± {:.3})", x.mean, x.stderr, y.mean, y.stderr);
    Ok(())
}
