//! Floquet Green's functions, the Keldysh identity and the transmission trace
//! for both spin species.
//!
//!     cargo run --release --example green_functions

use floquet_ciss::negf::{green_functions, Resolvent};
use floquet_ciss::transport::transmission_trace;
use floquet_ciss::ModelParams;

fn main() -> floquet_ciss::Result<()> {
    let p = ModelParams::asymmetric().with_bias(-4.0).with_drive(3.0, 3.0);
    let r = [0.3, 0.8];

    let g = green_functions(0.7, r, &p)?;
    let lhs = &g.retarded - &g.advanced;
    let rhs = &g.greater - &g.lesser;
    println!("Floquet dimension {}", p.dim());
    println!("|(G_r − G_a) − (G_> − G_<)|_max = {:.2e}", lhs.max_abs_diff(&rhs));

    // The resolvent diagonalizes h^F once and then gives G_r at any energy.
    let up = Resolvent::new(r, &p)?;
    let q = p.spin_flipped();
    let down = Resolvent::new(r, &q)?;
    println!("\n   ε      Tr T(B)     Tr T(−B)");
    for k in 0..=12 {
        let eps = -6.0 + k as f64;
        let (a, b) = (transmission_trace(&up, eps, &p), transmission_trace(&down, eps, &q));
        println!("{eps:+5.1}  {a:.8}  {b:.8}");
    }
    Ok(())
}
