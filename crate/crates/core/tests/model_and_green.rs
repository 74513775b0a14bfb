//! Independent oracles for the Hamiltonian, the self-energies and the Green's
//! functions.

use floquet_ciss::linalg::{FloquetMatrix, Mat2, C64};
use floquet_ciss::model::{
    d_floquet_hamiltonian, floquet_hamiltonian, fourier_blocks, hamiltonian_t, scalar_potential, Axis, Rect,
};
use floquet_ciss::negf::{d_green_retarded, fermi, green_functions, self_energies, EnergyGrid, Resolvent};
use floquet_ciss::transport::transmission_trace;
use floquet_ciss::validate::random_params;
use floquet_ciss::{ModelParams, PotentialReading};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(20240611)
}

fn position(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]
}

#[test]
fn fourier_blocks_match_trapezoid_quadrature() {
    let mut rng = rng();
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let r = position(&mut rng);
        let blocks = fourier_blocks(r, &p);
        let period = 2.0 * std::f64::consts::PI / p.omega;
        let m = 1000;
        for n in -2i64..=2 {
            // periodic integrand: the trapezoid rule on m points is spectrally accurate
            let mut acc = Mat2::ZERO;
            for k in 0..m {
                let t = period * k as f64 / m as f64;
                let phase = C64::from_polar(1.0 / m as f64, -(n as f64) * p.omega * t);
                acc = acc + hamiltonian_t(r, t, &p).scale(phase);
            }
            assert!(acc.max_abs_diff(&blocks.get(n)) < 1e-8, "n = {n}");
        }
        assert!(blocks.get(-1).max_abs_diff(&blocks.get(1).adjoint()) == 0.0);
    }
}

#[test]
fn one_sector_each_side_of_a_driven_junction() {
    let p = ModelParams {
        n_floquet: 1,
        ..ModelParams::symmetric().with_drive(3.0, 1.0)
    };
    let r = [0.4, -0.7];
    let h = floquet_hamiltonian(r, &p);
    assert_eq!(h.dim(), 6);
    let h0 = fourier_blocks(r, &p).static_part;
    for (s, m) in [(0, -1.0), (1, 0.0), (2, 1.0)] {
        let want = h0 + Mat2::diag(m, m);
        assert!(h.block(s, s).max_abs_diff(&want) < 1e-15);
    }
    let drive = Mat2::pauli(1.5, 0.0, 0.0);
    for (s, t) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
        assert!(h.block(s, t).max_abs_diff(&drive) < 1e-15);
    }
    assert!(h.block(0, 2).is_zero() && h.block(2, 0).is_zero());
}

#[test]
fn hamiltonian_is_hermitian_and_conjugated_by_spin_flip() {
    let mut rng = rng();
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let r = position(&mut rng);
        let h = floquet_hamiltonian(r, &p);
        assert!(h.hermiticity_error() < 1e-14);
        let flipped = floquet_hamiltonian(r, &p.spin_flipped());
        assert_eq!(flipped.max_abs_diff(&h.conj()), 0.0);
    }
}

#[test]
fn hamiltonian_gradient_matches_finite_differences() {
    let mut rng = rng();
    let step = 1e-5;
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let r = position(&mut rng);
        for axis in Axis::BOTH {
            let k = axis.index();
            let mut rp = r;
            let mut rm = r;
            rp[k] += step;
            rm[k] -= step;
            let fd = (&floquet_hamiltonian(rp, &p) - &floquet_hamiltonian(rm, &p)).scale(C64::new(0.5 / step, 0.0));
            assert!(fd.max_abs_diff(&d_floquet_hamiltonian(axis, &p)) < 1e-6);
        }
    }
}

#[test]
fn derivative_blocks() {
    let p = ModelParams::default();
    let dx = d_floquet_hamiltonian(Axis::X, &p);
    let dy = d_floquet_hamiltonian(Axis::Y, &ModelParams { b: 1.0, ..p });
    let c = |re, im| C64::new(re, im);
    for s in 0..p.sectors() {
        assert_eq!(dx.block(s, s).0, [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(-1.0, 0.0)]]);
        assert_eq!(dy.block(s, s).0, [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
    }
}

#[test]
fn potential_gradient_matches_finite_differences() {
    let mut rng = rng();
    for reading in [PotentialReading::Shifted, PotentialReading::Literal] {
        let p = ModelParams {
            potential: reading,
            ..random_params(&mut rng)
        };
        for _ in 0..20 {
            let r = position(&mut rng);
            let (_, grad) = scalar_potential(r, &p);
            for k in 0..2 {
                let h = 1e-4;
                let mut rp = r;
                let mut rm = r;
                rp[k] += h;
                rm[k] -= h;
                let fd = (scalar_potential(rp, &p).0 - scalar_potential(rm, &p).0) / (2.0 * h);
                assert!((fd - grad[k]).abs() < 1e-8, "{reading:?}");
            }
        }
    }
}

#[test]
fn fermi_one_kt_above_the_edge() {
    let f = fermi(1.5, 1.0, 0.5);
    assert!((f - 1.0 / (std::f64::consts::E + 1.0)).abs() < 1e-15);
    assert!((f - 0.26894).abs() < 1e-5);
}

#[test]
fn lesser_self_energy_at_equal_potentials_is_scalar_per_sector() {
    let p = ModelParams {
        mu_l: 0.7,
        mu_r: 0.7,
        ..ModelParams::default().with_drive(2.0, 1.3)
    };
    let s = self_energies(&p).lesser(0.2);
    for k in 0..p.sectors() {
        let b = s.block(k, k);
        assert!((b.0[0][0] - b.0[1][1]).norm() < 1e-15);
    }
    let cold = ModelParams {
        kt: 1e-6,
        mu_l: 1.0,
        mu_r: 1.0,
        n_floquet: 0,
        ..ModelParams::default()
    };
    let b = self_energies(&cold).lesser(0.5).block(0, 0);
    assert!((b.0[0][0] - C64::new(0.0, cold.gamma)).norm() < 1e-12);
}

#[test]
fn keldysh_identity_on_random_draws() {
    let mut rng = rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let r = position(&mut rng);
        let eps = rng.random_range(-8.0..8.0);
        let g = green_functions(eps, r, &p).unwrap();
        let lhs = &g.retarded - &g.advanced;
        let rhs = &g.greater - &g.lesser;
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn energy_derivative_matches_finite_differences() {
    let mut rng = rng();
    let h = 1e-5;
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let r = position(&mut rng);
        let eps = rng.random_range(-6.0..6.0);
        let g = |e| green_functions(e, r, &p).unwrap().retarded;
        let fd = (&g(eps + h) - &g(eps - h)).scale(C64::new(0.5 / h, 0.0));
        assert!(fd.max_abs_diff(&d_green_retarded(&g(eps))) < 1e-6);
        let (_, dg) = Resolvent::new(r, &p).unwrap().retarded_with_derivative(eps);
        assert!(fd.max_abs_diff(&dg) < 1e-6);
    }
}

#[test]
fn lorentzian_integrates_to_one() {
    let p = ModelParams::default();
    let grid = EnergyGrid::for_region(&p, None, &Rect::default()).unwrap();
    let g = p.gamma;
    let total = grid.integrate(|e| g / (e * e + 0.25 * g * g) / (2.0 * std::f64::consts::PI));
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn undriven_sectors_are_shifted_copies() {
    let p5 = ModelParams::symmetric().with_bias(2.0);
    let p0 = ModelParams { n_floquet: 0, ..p5 };
    let r = [0.3, -1.1];
    for eps in [-1.7, 0.0, 2.4] {
        let big = green_functions(eps, r, &p5).unwrap();
        for s in 0..p5.sectors() {
            let m = s as f64 - p5.n_floquet as f64;
            let small = green_functions(eps - m * p5.omega, r, &p0).unwrap();
            assert!(big.retarded.block(s, s).max_abs_diff(&small.retarded.block(0, 0)) < 1e-13);
            assert!(big.lesser.block(s, s).max_abs_diff(&small.lesser.block(0, 0)) < 1e-13);
        }
    }
}

/// `(z − d·σ)⁻¹ = (z + d·σ)/(z² − |d|²)`, so the left-right element is
/// `(d_x − i·d_y)/(z² − |d|²)`.
fn transmission_closed_form(eps: f64, r: [f64; 2], p: &ModelParams) -> f64 {
    let [x, y] = r;
    let (dx, dy, dz) = (p.a * x, p.b * y, x + p.delta);
    let z = C64::new(eps, 0.5 * p.gamma);
    let den = z * z - (dx * dx + dy * dy + dz * dz);
    p.gamma * p.gamma * (dx * dx + dy * dy) / den.norm_sqr()
}

#[test]
fn single_sector_transmission_has_a_closed_form() {
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::asymmetric().with_bias(1.0)
    };
    for r in [[0.0, 0.0], [0.6, -0.4], [-2.0, 1.5]] {
        let res = Resolvent::new(r, &p).unwrap();
        for k in 0..60 {
            let eps = -6.0 + 0.2 * k as f64;
            let t = transmission_trace(&res, eps, &p);
            assert!((t - transmission_closed_form(eps, r, &p)).abs() < 1e-12);
        }
    }
    // at the origin with Δ = 0 only d_z = 0 survives: the orbitals decouple
    let p = ModelParams {
        n_floquet: 0,
        ..ModelParams::symmetric()
    };
    let res = Resolvent::new([0.0, 0.0], &p).unwrap();
    assert_eq!(transmission_trace(&res, 0.3, &p), 0.0);
}

#[test]
fn floquet_matrix_inverse_round_trip() {
    let p = ModelParams::asymmetric().with_drive(3.0, 3.0);
    let h = floquet_hamiltonian([0.2, 0.9], &p);
    let shifted = &h - &FloquetMatrix::identity(p.dim()).scale(C64::new(0.37, 0.5));
    let inv = shifted.inverse().unwrap();
    assert!((&shifted * &inv).max_abs_diff(&FloquetMatrix::identity(p.dim())) < 1e-12);
}
