//! The built-in property suite, as run by `ciss validate`.
//!
//!     cargo run --release --example validation_suite

use floquet_ciss::validate::{run, ValidateOptions};

fn main() {
    let checks = run(ValidateOptions::default());
    for c in &checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        println!("{mark}  {:<36} {:>10.3e}  (tol {:.0e})  {}", c.name, c.value, c.tolerance, c.detail);
    }
    if checks.iter().any(|c| !c.passed) {
        std::process::exit(1);
    }
}
