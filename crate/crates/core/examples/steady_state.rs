//! Steady states of both spin species through the experiment API, starting
//! every trajectory from (−2, 2) with momentum (−1, 0).
//!
//! Writes `steady.json`, `steady.csv` and the heat-map CSVs into a temporary
//! directory, and caches the field files so a second call is cheap.
//!
//!     cargo run --release --example steady_state

use floquet_ciss::config::ExperimentConfig;
use floquet_ciss::dynamics::InitPolicy;
use floquet_ciss::experiment::Experiment;
use floquet_ciss::ModelParams;

fn main() -> floquet_ciss::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.model = ModelParams::symmetric().with_bias(4.0);
    cfg.grid.spacing = 0.4;
    cfg.dynamics.n_traj = 200;
    cfg.dynamics.init = InitPolicy::Fixed {
        position: [-2.0, 2.0],
        momentum: [-1.0, 0.0],
    };

    let out = std::env::temp_dir().join("ciss-steady-example");
    let r = Experiment::new(cfg).with_out(&out).steady()?;
    for (name, s) in [("up", &r.up), ("down", &r.down)] {
        println!(
            "{name:>4}: R = ({:+.3}, {:+.3})  L = {:+.3} ± {:.3}  γ_A_xy = {:+.4}",
            s.position[0].mean, s.position[1].mean, s.angular_momentum.mean, s.angular_momentum.stderr, s.gamma_a_xy
        );
    }
    println!("separation {:.4} ± {:.4}", r.separation.mean, r.separation.stderr);
    println!("files in {}", out.display());
    Ok(())
}
