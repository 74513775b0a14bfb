//! Invariants over randomly drawn parameters.

use floquet_ciss::config::{Drive, ExperimentConfig};
use floquet_ciss::dynamics::InitPolicy;
use floquet_ciss::friction::{decompose, Lattice};
use floquet_ciss::model::{floquet_hamiltonian, Rect};
use floquet_ciss::negf::green_functions;
use floquet_ciss::transport::spin_polarization;
use floquet_ciss::{ModelParams, PotentialReading};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (
        (0.5..1.5f64, -1.5..1.5f64, 0.0..3.0f64, 0.5..3.0f64, -3.0..3.0f64),
        (0.5..1.5f64, 0.2..1.0f64, -4.0..4.0f64, -4.0..4.0f64, 0..4usize),
    )
        .prop_map(|((a, b, c, omega, delta), (gamma, kt, mu_l, mu_r, n))| ModelParams {
            a,
            b,
            c,
            omega,
            delta,
            gamma,
            kt,
            mu_l,
            mu_r,
            n_floquet: n,
            ..ModelParams::default()
        })
}

fn position() -> impl Strategy<Value = [f64; 2]> {
    [-5.0..5.0f64, -5.0..5.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floquet_hamiltonian_is_hermitian(p in params(), r in position()) {
        prop_assert!(floquet_hamiltonian(r, &p).hermiticity_error() < 1e-13);
    }

    #[test]
    fn keldysh_identity(p in params(), r in position(), eps in -8.0..8.0f64) {
        let g = green_functions(eps, r, &p).unwrap();
        let err = (&g.retarded - &g.advanced).max_abs_diff(&(&g.greater - &g.lesser));
        prop_assert!(err < 1e-10, "{err:e}");
        // G_< is anti-Hermitian
        prop_assert!(g.lesser.max_abs_diff(&g.lesser.adjoint().scale((-1.0).into())) < 1e-10);
    }

    #[test]
    fn decomposition_is_exact(m in [[-5.0..5.0f64, -5.0..5.0f64], [-5.0..5.0f64, -5.0..5.0f64]]) {
        let (s, a) = decompose(m);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((s[i][j] + a[i][j] - m[i][j]).abs() < 1e-14);
                prop_assert_eq!(s[i][j], s[j][i]);
                prop_assert_eq!(a[i][j], -a[j][i]);
            }
        }
    }

    #[test]
    fn bilinear_weights_form_a_partition_of_unity(
        spacing in 0.05..1.0f64,
        x in -9.0..9.0f64,
        y in -9.0..9.0f64,
    ) {
        let lat = Lattice::new(Rect::square(8.0), spacing).unwrap();
        let (idx, w) = lat.corner_weights([x, y]);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        prop_assert!(idx.iter().all(|&k| k < lat.len()));
        // inside the lattice the weights reproduce the point itself
        if lat.bounds.x[0] <= x && x <= lat.bounds.x[1] && lat.bounds.y[0] <= y && y <= lat.bounds.y[1] {
            let mut back = [0.0; 2];
            for (k, wk) in idx.iter().zip(w) {
                let q = lat.position(*k);
                back[0] += wk * q[0];
                back[1] += wk * q[1];
            }
            prop_assert!((back[0] - x).abs() < 1e-9 && (back[1] - y).abs() < 1e-9);
        }
    }

    #[test]
    fn config_round_trips_through_toml(
        p in params(),
        spacing in 0.05..1.0f64,
        n_traj in 1..5000usize,
        seed in any::<u64>(),
        mus in prop::collection::vec(-5.0..5.0f64, 0..6),
        literal in any::<bool>(),
        fixed in any::<bool>(),
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.model = ModelParams {
            potential: if literal { PotentialReading::Literal } else { PotentialReading::Shifted },
            ..p
        };
        cfg.grid.spacing = spacing;
        cfg.dynamics.n_traj = n_traj;
        cfg.dynamics.master_seed = seed;
        if fixed {
            cfg.dynamics.init = InitPolicy::Fixed { position: [-2.0, 2.0], momentum: [-1.0, 0.0] };
        }
        cfg.sweep.mu_l = mus;
        cfg.sweep.drives = vec![Drive { c: 3.0, omega: 1.0 }];
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn polarization_is_bounded_for_same_sign_currents(up in 1e-6..10.0f64, down in 1e-6..10.0f64, sign in prop::bool::ANY) {
        let s = if sign { 1.0 } else { -1.0 };
        let xi = spin_polarization(s * up, s * down).unwrap();
        prop_assert!(xi.abs() <= 100.0);
        prop_assert!((xi + spin_polarization(s * down, s * up).unwrap()).abs() < 1e-12);
    }
}
