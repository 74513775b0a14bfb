//! Oracles for the friction fields, the random force and the Langevin
//! integrator.

use floquet_ciss::dynamics::{run_ensemble, step, trajectory_rng, DynamicsConfig, InitPolicy, PhaseState};
use floquet_ciss::friction::{build_field_grid, decompose, friction_data, random_force, FieldGrid, FrictionData};
use floquet_ciss::linalg::FloquetMatrix;
use floquet_ciss::model::{d_hamiltonian_block, fourier_blocks, scalar_potential, Axis, Rect};
use floquet_ciss::negf::EnergyGrid;
use floquet_ciss::ModelParams;

fn grid(p: &ModelParams, half: f64) -> EnergyGrid {
    EnergyGrid::for_region(p, None, &Rect::square(half)).unwrap()
}

/// Berry curvature `Ω_xy = −2·Im⟨0|∂_x h|1⟩⟨1|∂_y h|0⟩/(E₀ − E₁)²` of the lower
/// adiabatic state of the static Hamiltonian.
fn berry_curvature(r: [f64; 2], p: &ModelParams) -> f64 {
    let h = FloquetMatrix::block_diagonal(1, fourier_blocks(r, p).static_part);
    let eig = h.hermitian_eigen();
    let v = &eig.vectors;
    let element = |axis| {
        let d = FloquetMatrix::block_diagonal(1, d_hamiltonian_block(axis, p));
        &(&v.adjoint() * &d) * v
    };
    let (dx, dy) = (element(Axis::X), element(Axis::Y));
    let gap = eig.values[0] - eig.values[1];
    -2.0 * (dx[(0, 1)] * dy[(1, 0)]).im / (gap * gap)
}

#[test]
fn antisymmetric_friction_is_minus_berry_curvature() {
    // adiabatic limit: narrow levels, cold leads, lower state filled
    let p = ModelParams {
        delta: 3.0,
        gamma: 0.02,
        kt: 0.02,
        n_floquet: 0,
        ..ModelParams::default()
    };
    let g = grid(&p, 2.0);
    for r in [[0.3, 0.5], [-0.5, 1.0], [1.0, -0.8]] {
        let omega = berry_curvature(r, &p);
        let (_, a) = decompose(friction_data(r, &p, &g).unwrap().gamma);
        assert!((a[0][1] + omega).abs() < 1e-4 * omega.abs(), "{r:?}: {} vs {omega}", a[0][1]);
    }
    // the curvature of d = (A·x, B·y, x + Δ) is proportional to A·B·Δ
    let flat = ModelParams { delta: 0.0, ..p };
    assert!(berry_curvature([0.3, 0.5], &flat).abs() < 1e-15);
}

#[test]
fn empty_leads_leave_the_bare_potential() {
    let p = ModelParams {
        gamma: 1e-3,
        mu_l: -50.0,
        mu_r: -50.0,
        n_floquet: 0,
        ..ModelParams::default()
    };
    let g = grid(&p, 3.0);
    for r in [[0.0, 0.0], [1.2, -0.4]] {
        let d = friction_data(r, &p, &g).unwrap();
        let (_, grad) = scalar_potential(r, &p);
        // the electronic force is of order Γ̃/μ²
        assert!((d.force[0] + grad[0]).abs() < 1e-5 && (d.force[1] + grad[1]).abs() < 1e-5);
        assert!(d.d.iter().flatten().all(|v| v.abs() < 1e-6));
    }
    let full = ModelParams {
        gamma: 1.0,
        mu_l: 50.0,
        mu_r: 50.0,
        ..p
    };
    let d = friction_data([0.5, 0.5], &full, &grid(&full, 3.0)).unwrap();
    assert!(d.d.iter().flatten().all(|v| v.abs() < 1e-6));
}

fn equilibrium() -> ModelParams {
    ModelParams {
        n_floquet: 0,
        ..ModelParams::asymmetric()
    }
}

#[test]
fn equilibrium_force_is_curl_free() {
    let p = equilibrium();
    let g = grid(&p, 4.0);
    let h = 1e-3;
    let f = |x: f64, y: f64| friction_data([x, y], &p, &g).unwrap().force;
    for r in [[0.2, 0.4], [-1.3, 2.1], [2.5, -0.6], [0.0, 1.0], [-3.0, -3.0]] {
        let [x, y] = r;
        let curl = (f(x + h, y)[1] - f(x - h, y)[1] - f(x, y + h)[0] + f(x, y - h)[0]) / (2.0 * h);
        assert!(curl.abs() < 1e-5, "{r:?}: {curl:e}");
    }
}

#[test]
fn equilibrium_friction_is_dissipative_and_spin_even() {
    let p = equilibrium();
    let q = p.spin_flipped();
    let g = grid(&p, 4.0);
    for r in [[0.2, 0.4], [-1.3, 2.1], [2.5, -0.6]] {
        let up = friction_data(r, &p, &g).unwrap();
        let down = friction_data(r, &q, &g).unwrap();
        let (lam, _) = floquet_ciss::linalg::symmetric_eigen2(up.gamma_s);
        assert!(lam[0] >= -1e-10);
        for i in 0..2 {
            assert!((up.force[i] - down.force[i]).abs() < 1e-10);
            for j in 0..2 {
                assert!((up.gamma_s[i][j] - down.gamma_s[i][j]).abs() < 1e-9);
                assert!((up.gamma_a[i][j] + down.gamma_a[i][j]).abs() < 1e-9);
                assert!((up.d[i][j] - down.d[i][j]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn equilibrium_noise_is_kt_times_friction() {
    let p = equilibrium();
    let g = grid(&p, 4.0);
    for r in [[0.2, 0.4], [-1.3, 2.1], [2.5, -0.6], [0.7, 0.7]] {
        let d = friction_data(r, &p, &g).unwrap();
        let norm = |m: [[f64; 2]; 2]| m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        let diff = [0, 1].map(|i| [0, 1].map(|j| d.d[i][j] - p.kt * d.gamma_s[i][j]));
        assert!(norm(diff) / norm(d.d) < 1e-2, "{r:?}");
    }
}

#[test]
fn no_spin_orbit_no_antisymmetric_friction() {
    let p = ModelParams {
        b: 0.0,
        ..ModelParams::asymmetric().with_bias(-4.0).with_drive(3.0, 1.0)
    };
    let g = grid(&p, 4.0);
    for r in [[0.2, 0.4], [-1.3, 2.1], [2.5, -0.6]] {
        let d = friction_data(r, &p, &g).unwrap();
        assert!(d.gamma_a[0][1].abs() < 1e-10);
    }
}

#[test]
fn random_force_covariance() {
    let mut rng = trajectory_rng(3, 0);
    let dt = 0.01;
    let n = 1_000_000;
    let cov = |d: [[f64; 2]; 2], rng: &mut _| {
        let mut c = [[0.0; 2]; 2];
        for _ in 0..n {
            let f = random_force(&d, dt, rng).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    c[i][j] += f[i] * f[j] / n as f64;
                }
            }
        }
        c
    };
    let c = cov([[1.0, 0.0], [0.0, 4.0]], &mut rng);
    assert!((c[0][0] / 200.0 - 1.0).abs() < 0.02 && (c[1][1] / 800.0 - 1.0).abs() < 0.02);
    assert!(c[0][1].abs() < 0.02 * 400.0);

    // D = R·diag(1, 4)·Rᵀ for a 45° rotation has D_xy = 1.5
    let c = cov([[2.5, 1.5], [1.5, 2.5]], &mut rng);
    let want = 2.0 * 1.5 / dt;
    // Var(f_x f_y) = σ_xx σ_yy + σ_xy² for a Gaussian pair
    let sd = ((500.0 * 500.0 + want * want) / n as f64).sqrt();
    assert!((c[0][1] - want).abs() < 3.0 * sd, "{} vs {want}", c[0][1]);
}

fn uniform(p: &ModelParams, half: f64, spacing: f64, f: impl Fn([f64; 2]) -> FrictionData + Sync) -> FieldGrid {
    FieldGrid::tabulate(p, Rect::square(half), spacing, |r| Ok((f(r), None))).unwrap()
}

#[test]
fn interpolation_is_exact_at_nodes_and_linear_on_edges() {
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric().with_bias(4.0)
    };
    let f = build_field_grid(&p, Rect::square(1.0), 0.25, &grid(&p, 1.0), true).unwrap();
    let (nx, ny) = f.shape();
    for j in 0..ny {
        for i in 0..nx {
            assert_eq!(&f.interpolate(f.position(i, j)), f.node(i, j));
        }
    }
    let (a, b) = (f.node(2, 3), f.node(3, 3));
    let [x0, y0] = f.position(2, 3);
    let mid = f.interpolate([x0 + 0.125, y0]);
    assert!((mid.gamma[0][1] - 0.5 * (a.gamma[0][1] + b.gamma[0][1])).abs() < 1e-15);
    assert!((mid.force[1] - 0.5 * (a.force[1] + b.force[1])).abs() < 1e-15);
}

#[test]
fn interpolation_error_on_the_default_spacing() {
    // a patch at the default spacing against direct evaluation off the nodes
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric().with_bias(4.0)
    };
    let g = grid(&p, 8.0);
    let patch = Rect {
        x: [-0.5, 0.5],
        y: [0.8, 1.8],
    };
    let f = build_field_grid(&p, patch, 0.1, &g, false).unwrap();
    // errors relative to the largest entry of the same field over the patch
    let comps = |m: &FrictionData| {
        let mut v = vec![m.force[0], m.force[1]];
        v.extend(m.gamma.iter().flatten());
        v.extend([m.d[0][0], m.d[0][1], m.d[1][1]]);
        v
    };
    let nodes: Vec<Vec<f64>> = f.nodes().iter().map(comps).collect();
    let field_max = |ks: std::ops::Range<usize>| {
        nodes.iter().flat_map(|n| n[ks.clone()].iter().map(|v| v.abs())).fold(0.0, f64::max)
    };
    let (fm, gm, dm) = (field_max(0..2), field_max(2..6), field_max(6..9));
    let scale = [fm, fm, gm, gm, gm, gm, dm, dm, dm];
    let mut worst: f64 = 0.0;
    let mut rng = trajectory_rng(5, 0);
    use rand::Rng;
    for _ in 0..100 {
        let r = [rng.random_range(-0.5..0.5), rng.random_range(0.8..1.8)];
        let exact = comps(&friction_data(r, &p, &g).unwrap());
        let approx = comps(&f.interpolate(r));
        for k in 0..exact.len() {
            let e = (exact[k] - approx[k]).abs() / scale[k];
            worst = worst.max(e);
        }
    }
    assert!(worst < 0.02, "{worst}");
}

fn params_unit_mass() -> ModelParams {
    ModelParams {
        n_floquet: 0,
        ..ModelParams::default()
    }
}

#[test]
fn uniform_friction_decays_momentum_exponentially() {
    let p = params_unit_mass();
    let g = 1.0;
    let field = uniform(&p, 4.0, 0.5, |_| FrictionData::new([0.0, 0.0], [[g, 0.0], [0.0, g]], [[0.0; 2]; 2]));
    let mut rng = trajectory_rng(0, 0);
    let dt = 0.01;
    let mut s = PhaseState {
        r: [0.0, 0.0],
        p: [1.0, 0.0],
        t: 0.0,
    };
    for _ in 0..100 {
        s = step(&s, &field, dt, &mut rng).unwrap();
    }
    let exact = (-g * s.t / p.mass).exp();
    assert!((s.p[0] - exact).abs() < dt * dt, "{} vs {exact}", s.p[0]);
}

#[test]
fn harmonic_energy_is_conserved_without_bath() {
    let p = params_unit_mass();
    // bilinear interpolation reproduces a linear force exactly
    let field = uniform(&p, 2.0, 0.5, |r| FrictionData::new([-r[0], -r[1]], [[0.0; 2]; 2], [[0.0; 2]; 2]));
    let mut rng = trajectory_rng(0, 0);
    let mut s = PhaseState {
        r: [1.0, 0.0],
        p: [0.0, 0.5],
        t: 0.0,
    };
    let energy = |s: &PhaseState| s.kinetic_energy(1.0) + 0.5 * (s.r[0] * s.r[0] + s.r[1] * s.r[1]);
    let e0 = energy(&s);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        s = step(&s, &field, 0.01, &mut rng).unwrap();
        worst = worst.max((energy(&s) - e0).abs() / e0);
    }
    assert!(worst < 1e-4, "{worst:e}");
}

#[test]
fn damped_noiseless_ensemble_collapses_to_a_point() {
    let p = params_unit_mass();
    let field = uniform(&p, 4.0, 0.5, |r| {
        FrictionData::new([-(r[0] - 0.5), -(r[1] - 1.0)], [[1.0, 0.2], [-0.2, 1.0]], [[0.0; 2]; 2])
    });
    let cfg = DynamicsConfig {
        n_traj: 50,
        t_burn: 60.0,
        t_sample: 1.0,
        ..DynamicsConfig::default()
    };
    let stats = run_ensemble(&field, &cfg).unwrap();
    let finals: Vec<[f64; 2]> = stats.trajectories.iter().map(|t| t.final_state.r).collect();
    let mean = [0, 1].map(|k| finals.iter().map(|r| r[k]).sum::<f64>() / finals.len() as f64);
    let var = finals
        .iter()
        .map(|r| (r[0] - mean[0]).powi(2) + (r[1] - mean[1]).powi(2))
        .sum::<f64>()
        / finals.len() as f64;
    assert!(var < 1e-6, "{var:e}");
    assert!((mean[0] - 0.5).abs() < 1e-6 && (mean[1] - 1.0).abs() < 1e-6);
}

#[test]
fn ensembles_are_reproducible_and_independent_of_worker_count() {
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric().with_bias(2.0)
    };
    let field = build_field_grid(&p, Rect::square(6.0), 0.5, &grid(&p, 6.0), false).unwrap();
    let cfg = DynamicsConfig {
        n_traj: 24,
        t_burn: 5.0,
        t_sample: 5.0,
        master_seed: 99,
        init: InitPolicy::Fixed {
            position: [-2.0, 2.0],
            momentum: [-1.0, 0.0],
        },
        ..DynamicsConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ensemble(&field, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert_eq!(a, run(1));
    let other = run_ensemble(&field, &DynamicsConfig { master_seed: 100, ..cfg }).unwrap();
    assert_ne!(a.trajectories[0].final_state, other.trajectories[0].final_state);
}

#[test]
fn field_files_round_trip() {
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::asymmetric().with_bias(-1.0)
    };
    let f = build_field_grid(&p, Rect::square(1.0), 0.5, &grid(&p, 1.0), true).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    f.write(&path).unwrap();
    let back = FieldGrid::read(&path).unwrap();
    assert_eq!(back, f);
    assert_eq!(back.to_bytes(), f.to_bytes());

    let mut bytes = f.to_bytes();
    bytes[0] ^= 1;
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(FieldGrid::read(&path), Err(floquet_ciss::Error::Format { .. })));
    std::fs::write(&path, &f.to_bytes()[..40]).unwrap();
    assert!(matches!(FieldGrid::read(&path), Err(floquet_ciss::Error::Format { .. })));
}
