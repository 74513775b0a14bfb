//! Built-in property checks run by `ciss validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::friction::{decompose, Mat2r, PSD_TOLERANCE};
use crate::linalg::{symmetric_eigen2, FloquetMatrix, C64};
use crate::model::{d_floquet_hamiltonian, floquet_hamiltonian, scalar_potential, Axis, Rect, Vec2};
use crate::negf::{d_green_retarded, green_functions, EnergyGrid, Resolvent};
use crate::params::{ModelParams, PotentialReading};
use crate::response::{electronic_response_with_sign, Response, Wanted};
use crate::transport::transmission_trace;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn below(name: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: value < tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// Energy nodes for the integrals; `None` uses the automatic panel width.
    pub n_nodes: Option<usize>,
    pub seed: u64,
    /// Sign in front of the friction integral. `−1` is the mutation used to
    /// check that the suite notices a wrong sign.
    #[doc(hidden)]
    pub friction_sign: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            n_nodes: None,
            seed: 7,
            friction_sign: 1.0,
        }
    }
}

/// A random but physically sensible parameter set with drive, gap and bias.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R) -> ModelParams {
    let mu = rng.random_range(-4.0..4.0);
    ModelParams {
        a: rng.random_range(0.5..1.5),
        b: rng.random_range(-1.5..1.5),
        c: rng.random_range(0.0..3.0),
        omega: rng.random_range(0.5..3.0),
        delta: rng.random_range(-3.0..3.0),
        lambda_x: rng.random_range(-1.0..1.0),
        lambda_y: rng.random_range(-1.0..1.0),
        gamma: rng.random_range(0.5..1.5),
        kt: rng.random_range(0.2..1.0),
        mu_l: mu,
        mu_r: -mu + rng.random_range(-1.0..1.0),
        n_floquet: rng.random_range(0..4),
        mass: 1.0,
        potential: PotentialReading::Shifted,
    }
}

fn random_position<R: Rng + ?Sized>(rng: &mut R, half: f64) -> Vec2 {
    [rng.random_range(-half..half), rng.random_range(-half..half)]
}

fn mat_diff(a: &Mat2r, b: &Mat2r) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

fn mat_norm(a: &Mat2r) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

struct Ctx {
    opts: ValidateOptions,
    region: Rect,
}

impl Ctx {
    fn grid(&self, p: &ModelParams) -> Result<EnergyGrid> {
        EnergyGrid::for_region(p, self.opts.n_nodes, &self.region)
    }

    fn response(&self, r: Vec2, p: &ModelParams, grid: &EnergyGrid, wanted: Wanted) -> Result<Response> {
        electronic_response_with_sign(r, p, grid, wanted, self.opts.friction_sign)
    }
}

/// Runs every check. Numerical failures inside a check are reported as a
/// failed check rather than aborting the suite.
pub fn run(opts: ValidateOptions) -> Vec<Check> {
    let ctx = Ctx {
        opts,
        region: Rect::square(4.0),
    };
    type CheckFn = fn(&Ctx) -> Result<Check>;
    let checks: [(&'static str, CheckFn); 12] = [
        ("keldysh", keldysh),
        ("hermiticity", hermiticity),
        ("realness", realness),
        ("transmission_spin_flip", transmission_spin_flip),
        ("zero_bias_current", zero_bias),
        ("static_limit", static_limit),
        ("antisymmetric_friction_without_soc", no_soc),
        ("equilibrium_spin_flip", equilibrium_spin_flip),
        ("fluctuation_dissipation", fdt),
        ("equilibrium_friction_psd", equilibrium_psd),
        ("gradients", gradients),
        ("quadrature_convergence", quadrature_convergence),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            f(&ctx).unwrap_or_else(|e| Check {
                name,
                passed: false,
                value: f64::NAN,
                tolerance: f64::NAN,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}

fn keldysh(ctx: &Ctx) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let eps = rng.random_range(-8.0..8.0);
        let g = green_functions(eps, random_position(&mut rng, 4.0), &p)?;
        let lhs = &g.retarded - &g.advanced;
        let rhs = &g.greater - &g.lesser;
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(Check::below("keldysh", worst, 1e-10, "max |(G_r − G_a) − (G_> − G_<)| over 100 draws"))
}

fn hermiticity(ctx: &Ctx) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        worst = worst.max(floquet_hamiltonian(random_position(&mut rng, 8.0), &p).hermiticity_error());
    }
    Ok(Check::below("hermiticity", worst, 1e-14, "max |H − H†| of the Floquet Hamiltonian"))
}

fn figure_sets() -> [ModelParams; 3] {
    [
        ModelParams::symmetric().with_bias(4.0).with_drive(3.0, 3.0),
        ModelParams::asymmetric().with_bias(-4.0).with_drive(3.0, 1.0),
        ModelParams::symmetric().with_bias(4.0),
    ]
}

fn realness(ctx: &Ctx) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for p in figure_sets() {
        let grid = ctx.grid(&p)?;
        for r in [[0.2, 1.1], [-1.5, 0.4]] {
            worst = worst.max(ctx.response(r, &p, &grid, Wanted::ALL)?.residues.max());
        }
    }
    Ok(Check::below("realness", worst, 1e-9, "largest imaginary residue of F, γ, D, I_loc"))
}

fn transmission_spin_flip(ctx: &Ctx) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for p in [
        ModelParams::symmetric().with_bias(4.0).with_drive(3.0, 1.0),
        ModelParams::asymmetric().with_bias(-4.0).with_drive(3.0, 3.0),
    ] {
        let grid = ctx.grid(&p)?;
        let flipped = p.spin_flipped();
        for r in [[0.3, 0.9], [-2.0, 1.7]] {
            let up = Resolvent::new(r, &p)?;
            let down = Resolvent::new(r, &flipped)?;
            for &eps in grid.nodes() {
                let a = transmission_trace(&up, eps, &p);
                let b = transmission_trace(&down, eps, &flipped);
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(Check::below("transmission_spin_flip", worst, 1e-12, "max |Tr T(B) − Tr T(−B)| on the energy grid"))
}

fn zero_bias(ctx: &Ctx) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for p in [
        ModelParams::symmetric().with_drive(3.0, 1.0),
        ModelParams {
            mu_l: 1.3,
            mu_r: 1.3,
            ..ModelParams::asymmetric()
        },
    ] {
        let grid = ctx.grid(&p)?;
        for r in [[0.0, 0.0], [1.0, -2.0], [-3.0, 3.0]] {
            worst = worst.max(ctx.response(r, &p, &grid, Wanted::CURRENT)?.current.abs());
        }
    }
    Ok(Check::below("zero_bias_current", worst, 1e-12, "max |I_loc| with μ_L = μ_R"))
}

fn static_limit(ctx: &Ctx) -> Result<Check> {
    let p5 = ModelParams::symmetric().with_bias(2.0);
    let p0 = ModelParams { n_floquet: 0, ..p5 };
    let grid = ctx.grid(&p5)?.refined();
    let mut worst: f64 = 0.0;
    for r in [[0.4, 0.8], [-1.2, -0.3]] {
        let a = ctx.response(r, &p5, &grid, Wanted::ALL)?;
        let b = ctx.response(r, &p0, &grid, Wanted::ALL)?;
        worst = worst
            .max(response_diff(&a, &b))
            .max((a.current - b.current).abs());
    }
    Ok(Check::below("static_limit", worst, 1e-8, "C = 0: max difference between N = 5 and N = 0"))
}

fn response_diff(a: &Response, b: &Response) -> f64 {
    (a.force[0] - b.force[0])
        .abs()
        .max((a.force[1] - b.force[1]).abs())
        .max(mat_diff(&a.friction, &b.friction))
        .max(mat_diff(&a.correlation, &b.correlation))
}

fn no_soc(ctx: &Ctx) -> Result<Check> {
    let p = ModelParams {
        b: 0.0,
        ..ModelParams::symmetric().with_bias(4.0).with_drive(3.0, 1.0)
    };
    let grid = ctx.grid(&p)?;
    let mut worst: f64 = 0.0;
    for r in [[0.5, 0.5], [-1.0, 2.0], [2.0, -0.7]] {
        let (_, a) = decompose(ctx.response(r, &p, &grid, Wanted::FRICTION)?.friction);
        worst = worst.max(a[0][1].abs());
    }
    Ok(Check::below("antisymmetric_friction_without_soc", worst, 1e-10, "max |γ_A| with B = 0"))
}

fn equilibrium_spin_flip(ctx: &Ctx) -> Result<Check> {
    let p = ModelParams::symmetric();
    let q = p.spin_flipped();
    let grid = ctx.grid(&p)?;
    let mut worst: f64 = 0.0;
    for r in [[0.5, 0.5], [-1.0, 2.0]] {
        let a = ctx.response(r, &p, &grid, Wanted::FRICTION_FIELDS)?;
        let b = ctx.response(r, &q, &grid, Wanted::FRICTION_FIELDS)?;
        let (sa, aa) = decompose(a.friction);
        let (sb, ab) = decompose(b.friction);
        worst = worst
            .max(mat_diff(&sa, &sb))
            .max((aa[0][1] + ab[0][1]).abs())
            .max(mat_diff(&a.correlation, &b.correlation))
            .max((a.force[0] - b.force[0]).abs())
            .max((a.force[1] - b.force[1]).abs());
    }
    Ok(Check::below(
        "equilibrium_spin_flip",
        worst,
        1e-9,
        "μ_L = μ_R: F, γ_S, D even and γ_A odd under B → −B",
    ))
}

fn fdt(ctx: &Ctx) -> Result<Check> {
    let p = ModelParams::symmetric();
    let grid = ctx.grid(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed + 2);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let r = random_position(&mut rng, 3.0);
        let resp = ctx.response(r, &p, &grid, Wanted::FRICTION_FIELDS)?;
        let (s, _) = decompose(resp.friction);
        let scaled = s.map(|row| row.map(|v| p.kt * v));
        worst = worst.max(mat_norm(&diff(&resp.correlation, &scaled)) / mat_norm(&resp.correlation));
    }
    Ok(Check::below(
        "fluctuation_dissipation",
        worst,
        0.1,
        "equilibrium ‖D − kT·γ_S‖/‖D‖ at 10 positions",
    ))
}

fn equilibrium_psd(ctx: &Ctx) -> Result<Check> {
    let p = ModelParams::symmetric();
    let grid = ctx.grid(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed + 2);
    let mut min_eig = f64::INFINITY;
    for _ in 0..10 {
        let r = random_position(&mut rng, 3.0);
        let (s, _) = decompose(ctx.response(r, &p, &grid, Wanted::FRICTION)?.friction);
        min_eig = min_eig.min(symmetric_eigen2(s).0[0]);
    }
    Ok(Check {
        name: "equilibrium_friction_psd",
        passed: min_eig >= -PSD_TOLERANCE,
        value: min_eig,
        tolerance: -PSD_TOLERANCE,
        detail: "smallest eigenvalue of γ_S at equilibrium (must be ≥ tolerance)".into(),
    })
}

fn diff(a: &Mat2r, b: &Mat2r) -> Mat2r {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

fn gradients(ctx: &Ctx) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.opts.seed + 3);
    let mut worst_h: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    let mut worst_u: f64 = 0.0;
    let step = 1e-5;
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let r = random_position(&mut rng, 4.0);
        for axis in Axis::BOTH {
            let k = axis.index();
            let mut rp = r;
            let mut rm = r;
            rp[k] += step;
            rm[k] -= step;
            let fd = (&floquet_hamiltonian(rp, &p) - &floquet_hamiltonian(rm, &p)).scale(C64::new(0.5 / step, 0.0));
            worst_h = worst_h.max(fd.max_abs_diff(&d_floquet_hamiltonian(axis, &p)));
            let (up, _) = scalar_potential(rp, &p);
            let (um, _) = scalar_potential(rm, &p);
            let (_, grad) = scalar_potential(r, &p);
            worst_u = worst_u.max(((up - um) / (2.0 * step) - grad[k]).abs());
        }
        let eps = rng.random_range(-5.0..5.0);
        let g = green_functions(eps, r, &p)?;
        let gp = green_functions(eps + step, r, &p)?;
        let gm = green_functions(eps - step, r, &p)?;
        let fd: FloquetMatrix = (&gp.retarded - &gm.retarded).scale(C64::new(0.5 / step, 0.0));
        worst_g = worst_g.max(fd.max_abs_diff(&d_green_retarded(&g.retarded)));
    }
    let passed = worst_h < 1e-6 && worst_g < 1e-6 && worst_u < 1e-8;
    Ok(Check {
        name: "gradients",
        passed,
        value: worst_h.max(worst_g),
        tolerance: 1e-6,
        detail: format!("∂h {worst_h:.2e}, ∂_εG_r {worst_g:.2e}, ∇U {worst_u:.2e} (tolerance 1e-8)"),
    })
}

fn quadrature_convergence(ctx: &Ctx) -> Result<Check> {
    let p = ModelParams::symmetric().with_bias(4.0).with_drive(3.0, 1.0);
    let grid = ctx.grid(&p)?;
    let fine = grid.refined();
    let mut worst: f64 = 0.0;
    for r in [[0.3, 0.8], [-1.4, 1.9]] {
        let a = ctx.response(r, &p, &grid, Wanted::ALL)?;
        let b = ctx.response(r, &p, &fine, Wanted::ALL)?;
        let scale = mat_norm(&b.friction).max(1e-12);
        worst = worst
            .max(mat_diff(&a.friction, &b.friction) / scale)
            .max((a.current - b.current).abs() / b.current.abs().max(1e-12));
    }
    Ok(Check::below(
        "quadrature_convergence",
        worst,
        1e-6,
        format!("relative change of γ and I_loc when the {} energy nodes are doubled", grid.len()),
    ))
}
