//! Field files are keyed by a hash of everything they depend on: a second
//! `fields()` call with the same configuration recomputes nothing.
//!
//!     cargo run --release --example field_cache

use std::time::Instant;

use floquet_ciss::config::ExperimentConfig;
use floquet_ciss::experiment::Experiment;
use floquet_ciss::friction::FieldGrid;
use floquet_ciss::model::Rect;

fn main() -> floquet_ciss::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.model = cfg.model.with_bias(2.0);
    cfg.grid.bounds = Rect::square(3.0);
    cfg.grid.spacing = 0.5;
    let dir = tempfile_dir();
    let exp = Experiment::new(cfg).with_out(&dir);

    for _ in 0..2 {
        let t = Instant::now();
        let r = exp.fields()?;
        println!("up_to_date = {:5}  nodes = {}  {:.2}s", r.up_to_date, r.nodes, t.elapsed().as_secs_f64());
    }

    let path = exp.field_path(&exp.config.model);
    let f = FieldGrid::read(&path)?;
    let d = f.interpolate([0.25, 0.25]);
    println!("{}: γ_S_xy(0.25, 0.25) = {:+.6}", path.display(), d.gamma_s[0][1]);
    let manifest = std::fs::read_to_string(path.with_extension("bin.manifest.json")).unwrap();
    println!("{manifest}");
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join("ciss-field-cache-example");
    let _ = std::fs::remove_dir_all(&d);
    d
}
