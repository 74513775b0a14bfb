//! Local current against an independent scalar integral, spin symmetry of
//! the current and the polarization.

use std::f64::consts::PI;

use floquet_ciss::dynamics::{run_ensemble, DynamicsConfig};
use floquet_ciss::friction::build_field_grid;
use floquet_ciss::linalg::C64;
use floquet_ciss::model::Rect;
use floquet_ciss::negf::{fermi, EnergyGrid};
use floquet_ciss::transport::{local_current, spin_currents, spin_polarization, TransportMap};
use floquet_ciss::{Error, ModelParams};

/// `I = (1/2π)∫ dε Γ̃²(d_x² + d_y²)/|z² − |d|²|²·(f_L − f_R)`, `z = ε + iΓ̃/2`,
/// by the trapezoid rule on a uniform grid wide enough for the Lorentzian tails.
fn current_oracle(r: [f64; 2], p: &ModelParams) -> f64 {
    let [x, y] = r;
    let (dx, dy, dz) = (p.a * x, p.b * y, x + p.delta);
    let d2 = dx * dx + dy * dy + dz * dz;
    let (lo, hi, n) = (-400.0, 400.0, 800_000);
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let eps = lo + h * k as f64;
        let z = C64::new(eps, 0.5 * p.gamma);
        let t = p.gamma * p.gamma * (dx * dx + dy * dy) / (z * z - d2).norm_sqr();
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * t * (fermi(eps, p.mu_l, p.kt) - fermi(eps, p.mu_r, p.kt));
    }
    acc * h / (2.0 * PI)
}

// Oracle values frozen from `current_oracle`; the library must reproduce
// them independently of how it integrates.
const FROZEN: [([f64; 2], f64); 3] = [
    ([0.3, 0.8], 0.370_579_286_551),
    ([-1.0, 1.5], 0.362_086_637_753),
    ([2.0, -0.5], 0.218_566_764_839),
];

fn static_biased() -> ModelParams {
    ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric().with_bias(4.0)
    }
}

#[test]
fn oracle_reproduces_frozen_values() {
    let p = static_biased();
    for (r, want) in FROZEN {
        let got = current_oracle(r, &p);
        assert!((got - want).abs() < 1e-9, "{r:?}: {got:.10}");
    }
}

#[test]
fn static_current_matches_the_scalar_integral() {
    let p = static_biased();
    let g = EnergyGrid::for_region(&p, None, &Rect::square(3.0)).unwrap();
    for (r, want) in FROZEN {
        let got = local_current(r, &p, &g).unwrap();
        assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "{r:?}: {got} vs {want}");
    }
    // with N = 5 sectors the same current comes out
    let p5 = ModelParams { n_floquet: 5, ..p };
    let g5 = EnergyGrid::for_region(&p5, None, &Rect::square(3.0)).unwrap().refined();
    for (r, want) in FROZEN {
        assert!((local_current(r, &p5, &g5).unwrap() - want).abs() < 1e-8);
    }
}

#[test]
fn current_is_spin_independent_without_drive() {
    let p = ModelParams::asymmetric().with_bias(-4.0);
    let g = EnergyGrid::for_region(&p, None, &Rect::square(4.0)).unwrap();
    for r in [[0.1, 0.2], [-2.0, 3.0], [3.5, -1.0]] {
        let a = local_current(r, &p, &g).unwrap();
        let b = local_current(r, &p.spin_flipped(), &g).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn zero_bias_carries_no_current() {
    let p = ModelParams::symmetric().with_drive(3.0, 3.0);
    let g = EnergyGrid::for_region(&p, None, &Rect::square(8.0)).unwrap();
    let map = TransportMap::build(&p, Rect::square(8.0), 2.0, &g).unwrap();
    assert!(map.max_abs() < 1e-12);
}

#[test]
fn current_reverses_with_the_bias() {
    let p = static_biased();
    let q = ModelParams {
        mu_l: p.mu_r,
        mu_r: p.mu_l,
        ..p
    };
    let g = EnergyGrid::for_region(&p, None, &Rect::square(3.0)).unwrap();
    let r = [0.3, 0.8];
    assert!((local_current(r, &p, &g).unwrap() + local_current(r, &q, &g).unwrap()).abs() < 1e-12);
}

#[test]
fn polarization_definition() {
    assert_eq!(spin_polarization(0.2, 0.2).unwrap(), 0.0);
    assert!((spin_polarization(0.2132, 0.1620).unwrap() - (0.1620 - 0.2132) / 0.3752 * 100.0).abs() < 1e-12);
    assert!(matches!(spin_polarization(0.0, 0.0), Err(Error::UndefinedPolarization(_))));
}

#[test]
fn zero_bias_polarization_is_undefined() {
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric()
    };
    let region = Rect::square(6.0);
    let g = EnergyGrid::for_region(&p, None, &region).unwrap();
    let up = build_field_grid(&p, region, 0.5, &g, true).unwrap();
    let down = build_field_grid(&p.spin_flipped(), region, 0.5, &g, true).unwrap();
    let cfg = DynamicsConfig {
        n_traj: 8,
        t_burn: 5.0,
        t_sample: 5.0,
        ..DynamicsConfig::default()
    };
    let (su, sd) = (run_ensemble(&up, &cfg).unwrap(), run_ensemble(&down, &cfg).unwrap());
    let maps = (TransportMap::from_field(&up).unwrap(), TransportMap::from_field(&down).unwrap());
    let i = spin_currents(&maps.0, &maps.1, &su, &sd).unwrap();
    assert!(matches!(i.polarization(), Err(Error::UndefinedPolarization(_))));
}
