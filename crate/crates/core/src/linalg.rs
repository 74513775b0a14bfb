//! Dense complex matrices sized for Floquet space.
//!
//! Matrices are small (`2(2N+1)`, 22 for the default truncation), so a flat
//! row-major buffer with hand-written loops beats a general BLAS call here.
//! Eigen-decompositions and LU inversions go through `nalgebra`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix in the orbital space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA_X: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA_Y: Mat2 = Mat2([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA_Z: Mat2 = Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]);

    /// `cx σx + cy σy + cz σz` for real coefficients.
    pub fn pauli(cx: f64, cy: f64, cz: f64) -> Mat2 {
        Mat2([
            [C64::new(cz, 0.0), C64::new(cx, -cy)],
            [C64::new(cx, cy), C64::new(-cz, 0.0)],
        ])
    }

    pub fn diag(d0: f64, d1: f64) -> Mat2 {
        Mat2([[C64::new(d0, 0.0), ZERO], [ZERO, C64::new(d1, 0.0)]])
    }

    pub fn scale(self, s: C64) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(self) -> Mat2 {
        let m = self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| *z == ZERO)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

/// Square complex matrix over the composite index `(sector, orbital)`.
///
/// Row `2·(m + N) + i` holds sector `m ∈ −N..=N`, orbital `i ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl FloquetMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Block-diagonal matrix with the same 2×2 block in every sector.
    pub fn block_diagonal(sectors: usize, block: Mat2) -> Self {
        let mut m = Self::zeros(2 * sectors);
        for s in 0..sectors {
            m.set_block(s, s, block);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sectors(&self) -> usize {
        self.dim / 2
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// 2×2 block at sector positions `(s, t)` (zero-based, not sector labels).
    pub fn block(&self, s: usize, t: usize) -> Mat2 {
        let (r, c) = (2 * s, 2 * t);
        Mat2([
            [self[(r, c)], self[(r, c + 1)]],
            [self[(r + 1, c)], self[(r + 1, c + 1)]],
        ])
    }

    pub fn set_block(&mut self, s: usize, t: usize, b: Mat2) {
        let (r, c) = (2 * s, 2 * t);
        self[(r, c)] = b.0[0][0];
        self[(r, c + 1)] = b.0[0][1];
        self[(r + 1, c)] = b.0[1][0];
        self[(r + 1, c + 1)] = b.0[1][1];
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |H − H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut e = 0.0f64;
        for r in 0..n {
            for c in r..n {
                e = e.max((self.data[r * n + c] - self.data[c * n + r].conj()).norm());
            }
        }
        e
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        Self::from_fn(n, |r, c| m[(r, c)])
    }

    /// General inverse by LU with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .to_nalgebra()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular matrix in inversion".into()))?;
        let out = Self::from_nalgebra(&inv);
        if !out.is_finite() {
            return Err(Error::Numerical("non-finite entries after inversion".into()));
        }
        Ok(out)
    }

    /// `Tr{A·B}` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            for (c, a) in row.iter().enumerate() {
                acc += a * other.data[c * n + r];
            }
        }
        acc
    }

    /// `B·self` where `B` is block-diagonal with the same 2×2 block in every sector.
    pub fn left_block_mul(&self, b: &Mat2) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        let b = b.0;
        for s in 0..n / 2 {
            let (r0, r1) = (2 * s * n, (2 * s + 1) * n);
            for c in 0..n {
                let x0 = self.data[r0 + c];
                let x1 = self.data[r1 + c];
                out.data[r0 + c] = b[0][0] * x0 + b[0][1] * x1;
                out.data[r1 + c] = b[1][0] * x0 + b[1][1] * x1;
            }
        }
        out
    }

    /// `self·B` where `B` is a diagonal matrix.
    pub fn right_diag_mul(&self, d: &[C64]) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] *= d[c];
            }
        }
        out
    }

    /// Hermitian eigen-decomposition, eigenvalues ascending.
    pub fn hermitian_eigen(&self) -> SpectralDecomposition {
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let n = self.dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(n, |r, c| eig.eigenvectors[(r, order[c])]);
        SpectralDecomposition { values, vectors }
    }
}

impl Index<(usize, usize)> for FloquetMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for FloquetMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &FloquetMatrix {
    type Output = FloquetMatrix;
    fn add(self, o: &FloquetMatrix) -> FloquetMatrix {
        assert_eq!(self.dim, o.dim);
        FloquetMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &FloquetMatrix {
    type Output = FloquetMatrix;
    fn sub(self, o: &FloquetMatrix) -> FloquetMatrix {
        assert_eq!(self.dim, o.dim);
        FloquetMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &FloquetMatrix {
    type Output = FloquetMatrix;
    fn mul(self, o: &FloquetMatrix) -> FloquetMatrix {
        let mut out = FloquetMatrix::zeros(self.dim);
        matmul_into(&self.data, &o.data, &mut out.data, self.dim);
        out
    }
}

/// `out = a·b` for row-major `n×n` buffers.
pub(crate) fn matmul_into(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    out.fill(ZERO);
    for r in 0..n {
        let out_row = &mut out[r * n..(r + 1) * n];
        for k in 0..n {
            let x = a[r * n + k];
            if x == ZERO {
                continue;
            }
            let b_row = &b[k * n..(k + 1) * n];
            for (o, y) in out_row.iter_mut().zip(b_row) {
                *o += x * y;
            }
        }
    }
}

/// `H = V·diag(values)·V†` with unitary `V`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: FloquetMatrix,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> FloquetMatrix {
        let d: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        &self.vectors.right_diag_mul(&d) * &self.vectors.adjoint()
    }
}

/// Eigen-decomposition of a real symmetric 2×2 matrix `[[a, b], [b, c]]`.
///
/// Returns eigenvalues ascending and the rotation whose columns are the
/// matching unit eigenvectors.
pub fn symmetric_eigen2(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, c) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let mean = 0.5 * (a + c);
    let half = 0.5 * (a - c);
    let r = half.hypot(b);
    let (l0, l1) = (mean - r, mean + r);
    // angle of the eigenvector belonging to the larger eigenvalue
    let theta = 0.5 * b.atan2(half);
    let (s, co) = theta.sin_cos();
    // columns: v_small = (-s, co), v_large = (co, s)
    ([l0, l1], [[-s, co], [co, s]])
}
