//! Mean force, friction tensor and random-force correlation at a few
//! positions, in and out of equilibrium.
//!
//! In equilibrium D = kT·γ_S and γ_S is positive definite. With a bias the
//! tensor acquires a non-symmetric part and may lose definiteness.
//!
//!     cargo run --release --example friction_tensor

use floquet_ciss::friction::friction_data;
use floquet_ciss::model::Rect;
use floquet_ciss::negf::EnergyGrid;
use floquet_ciss::ModelParams;

fn main() -> floquet_ciss::Result<()> {
    let region = Rect::square(4.0);
    for (label, p) in [
        ("equilibrium", ModelParams::asymmetric()),
        ("biased, driven", ModelParams::asymmetric().with_bias(4.0).with_drive(3.0, 1.0)),
    ] {
        let grid = EnergyGrid::for_region(&p, None, &region)?;
        println!("{label}: {} energy nodes", grid.len());
        for r in [[0.0, 0.8], [-1.0, 1.5], [1.0, 0.0]] {
            let f = friction_data(r, &p, &grid)?;
            println!("  R = {r:?}");
            println!("    F   = [{:+.5}, {:+.5}]", f.force[0], f.force[1]);
            println!("    γ_S = {:.5?}", f.gamma_s);
            println!("    γ_A_xy = {:+.5}", f.gamma_a[0][1]);
            println!("    D   = {:.5?}", f.d);
            println!("    D_xx / (kT·γ_S,xx) = {:.6}", f.d[0][0] / (p.kt * f.gamma_s[0][0]));
        }
    }
    Ok(())
}
