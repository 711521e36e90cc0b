//! Dense complex linear algebra for the small matrices (side at most 16 in
//! practice) that appear in bipartite state evaluation.
//!
//! Storage is row-major. For a bipartite operator on `A ⊗ B` the joint index
//! of the basis vector `|i⟩|j⟩` is `i * dim_b + j`, so `A` is the slow index.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `‖A − A†‖_max` accepted by [`ComplexMatrix::hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 64;

/// One side of a bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::A => f.write_str("A"),
            Subsystem::B => f.write_str("B"),
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting a wrong length or
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self − other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖A − A†‖_max`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        match self.adjoint().matmul(self) {
            Ok(g) => g.max_abs_diff(&Self::identity(self.rows)),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Reduced operator on the `keep` subsystem of a `dim_a·dim_b` square
    /// matrix.
    pub fn partial_trace(&self, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<Self> {
        let side = dim_a * dim_b;
        if !self.is_square() || self.rows != side {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not a {dim_a}x{dim_b} bipartite operator",
                self.rows, self.cols
            )));
        }
        let out = match keep {
            Subsystem::A => Self::from_fn(dim_a, dim_a, |i, k| {
                (0..dim_b)
                    .map(|j| self[(i * dim_b + j, k * dim_b + j)])
                    .sum()
            }),
            Subsystem::B => Self::from_fn(dim_b, dim_b, |j, l| {
                (0..dim_a)
                    .map(|i| self[(i * dim_b + j, i * dim_b + l)])
                    .sum()
            }),
        };
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. The input is symmetrised as `(A + A†)/2` first.
    pub fn hermitian_eig(&self) -> Result<HermitianEigen> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if self
            .data
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let dev = self.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        jacobi_eig(self.hermitian_part())
    }

    /// Thin QR factorisation of a square matrix by modified Gram-Schmidt with
    /// one reorthogonalisation pass. `R` has a real non-negative diagonal.
    pub fn qr(&self) -> Result<(Self, Self)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "qr expects a square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut q: Vec<Vec<Complex64>> = (0..n).map(|j| self.column(j)).collect();
        let mut r = Self::zeros(n, n);
        for j in 0..n {
            for _pass in 0..2 {
                for k in 0..j {
                    let proj: Complex64 = q[k].iter().zip(&q[j]).map(|(a, b)| a.conj() * b).sum();
                    r[(k, j)] += proj;
                    let qk = q[k].clone();
                    for (x, y) in q[j].iter_mut().zip(&qk) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = q[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Inconsistent("qr of a rank-deficient matrix".into()));
            }
            r[(j, j)] = Complex64::new(norm, 0.0);
            for x in q[j].iter_mut() {
                *x /= norm;
            }
        }
        let q = Self::from_fn(n, n, |i, j| q[j][i]);
        Ok((q, r))
    }
}

/// Ascending eigenvalues and the unitary whose columns are the matching
/// eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }
}

fn jacobi_eig(mut a: ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)].im = 0.0;
    }
    let total: f64 = a.data.iter().map(|z| z.norm_sqr()).sum();
    let threshold = (f64::EPSILON * f64::EPSILON) * total.max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies `A ← J† A J`, `V ← V J` with `J` chosen to annihilate `A[p,q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let se = phase * s;
    let n = a.rows;

    // Columns: A J.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * se.conj();
        a[(k, q)] = akp * se + akq * c;
    }
    // Rows: J† (A J).
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * se;
        a[(q, k)] = apk * se.conj() + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * se.conj();
        v[(k, q)] = vkp * se + vkq * c;
    }
}
