// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrices and the Hermitian spectral toolkit used by the
//! evolution engine.
//!
//! Every exponential in this crate is of the form `exp(-i t H)` with `H`
//! Hermitian, so it is evaluated through an eigendecomposition
//! `H = V diag(λ) V†`. That gives unitaries that are exact to rounding and a
//! closed-form Fréchet derivative through the divided-difference (Loewner)
//! kernel.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative anti-Hermitian part above which a matrix is rejected.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Eigenvalue gap below which the Loewner kernel uses its diagonal limit.
pub const DEGENERACY_GAP: f64 = 1e-12;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::dims(
                format!("{rows}x{cols} entries"),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Square matrix from nested rows. Panics on ragged input; meant for
    /// literals in gate definitions and tests.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            assert_eq!(r.len(), m, "ragged matrix literal");
            data.extend_from_slice(r);
        }
        Self { rows: n, cols: m, data }
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Real-valued matrix literal.
    pub fn real(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        Self::from_fn(n, m, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn dim_string(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: Complex64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix product. Panics on incompatible shapes; use [`ComplexMatrix::try_matmul`]
    /// for a checked variant.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * p..(k + 1) * p];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims(
                format!("left operand with {} columns", self.cols),
                rhs.dim_string(),
            ));
        }
        Ok(self.matmul(rhs))
    }

    /// `Tr(self · rhs)` without forming the product.
    pub fn trace_of_product(&self, rhs: &Self) -> Complex64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * rhs.data[k * rhs.cols + i];
            }
        }
        acc
    }

    /// Elementwise product.
    pub fn hadamard(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).collect(),
        }
    }

    /// `‖A†A − I‖_F`
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        frobenius_distance(&self.adjoint().matmul(self), &Self::identity(self.rows)).unwrap_or(f64::INFINITY)
    }

    /// `‖A − A†‖_F / ‖A‖_F` (0 for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, ONE);
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(rhs, -ONE);
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    ComplexMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Unnormalized Frobenius distance `‖a − b‖_F`.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::dims(a.dim_string(), b.dim_string()));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `min_φ ‖a − e^{iφ} b‖_F` for square matrices of equal Frobenius norm
/// `√d` (unitaries): `√(2d − 2|Tr(b† a)|)`.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::dims(a.dim_string(), b.dim_string()));
    }
    let overlap: Complex64 = a.data.iter().zip(&b.data).map(|(x, y)| y.conj() * x).sum();
    let na = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let nb = b.data.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok((na + nb - 2.0 * overlap.norm()).max(0.0).sqrt())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `j` is the eigenvector of `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(λ)) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut scaled = v.clone();
        for r in 0..n {
            for c in 0..n {
                scaled[(r, c)] *= weights[c];
            }
        }
        scaled.matmul(&v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }

    /// `exp(−i t H)`
    pub fn exp_i(&self, t: f64) -> ComplexMatrix {
        self.reconstruct_with(|l| (-I * t * l).exp())
    }

    /// Divided-difference kernel of `λ ↦ e^{−itλ}` on the spectrum.
    pub fn loewner_kernel(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let phases: Vec<Complex64> = self.eigenvalues.iter().map(|&l| (-I * t * l).exp()).collect();
        ComplexMatrix::from_fn(n, n, |j, k| {
            let (lj, lk) = (self.eigenvalues[j], self.eigenvalues[k]);
            if (lj - lk).abs() < DEGENERACY_GAP {
                -I * t * phases[j]
            } else {
                (phases[j] - phases[k]) / (lj - lk)
            }
        })
    }

    /// Directional derivative of `exp(−i t H)` along `dh`.
    pub fn frechet_exp_i(&self, t: f64, dh: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let rotated = v.adjoint().matmul(dh).matmul(v);
        let inner = rotated.hadamard(&self.loewner_kernel(t));
        v.matmul(&inner).matmul(&v.adjoint())
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::dims("square matrix", h.dim_string()));
    }
    let asymmetry = h.hermitian_defect();
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let n = h.rows;
    let eig = SymmetricEigen::new(h.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vecs = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(−i t h)` for Hermitian `h`.
pub fn expm_i(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(h)?.exp_i(t))
}

/// Fréchet derivative of `h ↦ exp(−i t h)` in direction `dh`.
pub fn frechet_expm_i(h: &ComplexMatrix, t: f64, dh: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_hermitian(dh)?;
    if (dh.rows, dh.cols) != (h.rows, h.cols) {
        return Err(Error::dims(h.dim_string(), dh.dim_string()));
    }
    Ok(eig_hermitian(h)?.frechet_exp_i(t, dh))
}
