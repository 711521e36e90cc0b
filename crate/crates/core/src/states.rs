//! Bipartite density matrices: named families, random sampling, and unitary
//! perturbation.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subsystem};

/// Tolerance for trace, hermiticity and positivity when validating a state.
pub const STATE_TOL: f64 = 1e-9;

/// A unit-trace positive semidefinite operator on `C^dim_a ⊗ C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
}

impl DensityMatrix {
    /// Validates and wraps `matrix`. The stored matrix is the Hermitian part
    /// of the input.
    pub fn new(matrix: ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::ParamOutOfRange(
                "subsystem dimensions must be ≥ 1".into(),
            ));
        }
        let side = dim_a * dim_b;
        if !matrix.is_square() || matrix.rows() != side {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot hold a {dim_a}x{dim_b} state",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let asym = matrix.hermitian_deviation();
        if asym > STATE_TOL {
            return Err(Error::NotAState(format!("Hermitian asymmetry {asym:e}")));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::NotAState(format!("trace {tr}")));
        }
        let min = matrix.hermitian_eig()?.eigenvalues[0];
        if min < -STATE_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            matrix,
            dim_a,
            dim_b,
        })
    }

    /// For constructions that are valid by design. Still symmetrises.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, dim_a: usize, dim_b: usize) -> Self {
        debug_assert_eq!(matrix.rows(), dim_a * dim_b);
        Self {
            matrix: matrix.hermitian_part(),
            dim_a,
            dim_b,
        }
    }

    /// Product state `ρ_A ⊗ ρ_B`; both factors are validated as states.
    pub fn product(rho_a: &ComplexMatrix, rho_b: &ComplexMatrix) -> Result<Self> {
        let a = Self::new(rho_a.clone(), rho_a.rows(), 1)?;
        let b = Self::new(rho_b.clone(), rho_b.rows(), 1)?;
        Ok(Self::from_trusted(
            a.matrix.kron(&b.matrix),
            a.dim_a,
            b.dim_a,
        ))
    }

    /// Pure state from an amplitude vector, normalised here.
    pub fn from_pure(amplitudes: &[Complex64], dim_a: usize, dim_b: usize) -> Result<Self> {
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {dim_a}x{dim_b} system",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotAState("zero or non-finite state vector".into()));
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
        Ok(Self::from_trusted(
            ComplexMatrix::projector(&psi),
            dim_a,
            dim_b,
        ))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self, side: Subsystem) -> usize {
        match side {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }

    /// Reduced state of `side` (the other subsystem is traced out).
    pub fn reduced(&self, side: Subsystem) -> ComplexMatrix {
        self.matrix
            .partial_trace(self.dim_a, self.dim_b, side)
            .expect("dimensions checked at construction")
    }

    pub fn purity(&self) -> f64 {
        self.matrix
            .matmul(&self.matrix)
            .expect("square by construction")
            .trace()
            .re
    }

    /// `U ρ U†` for a joint unitary `u`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.matrix.rows() || !u.is_square() {
            return Err(Error::DimensionMismatch(
                "unitary does not match state".into(),
            ));
        }
        Ok(Self::from_trusted(
            self.matrix.conjugate_by(u)?,
            self.dim_a,
            self.dim_b,
        ))
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::ParamOutOfRange(format!("mixing weight {w}")));
        }
        if self.dim_a != other.dim_a || self.dim_b != other.dim_b {
            return Err(Error::DimensionMismatch(
                "mixing states of different shape".into(),
            ));
        }
        let m = self.matrix.scale(w).add(&other.matrix.scale(1.0 - w))?;
        Ok(Self::from_trusted(m, self.dim_a, self.dim_b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    pub p: f64,
    pub eta: f64,
}

impl WernerParams {
    pub fn new(p: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("eta", eta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ParamOutOfRange(format!("{name}={v} outside [0, 1]")));
            }
        }
        Ok(Self { p, eta })
    }
}

/// Two-qubit asymmetric Werner state `p|ψ⟩⟨ψ| + (1−p) I/4` with
/// `|ψ⟩ = √η|↑↓⟩ − √(1−η)|↓↑⟩`, where `|↑⟩` is basis index 0.
pub fn asymmetric_werner(params: WernerParams) -> Result<DensityMatrix> {
    let WernerParams { p, eta } = WernerParams::new(params.p, params.eta)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); 4];
    psi[1] = Complex64::new(eta.sqrt(), 0.0);
    psi[2] = Complex64::new(-(1.0 - eta).sqrt(), 0.0);
    let m = ComplexMatrix::projector(&psi)
        .scale(p)
        .add(&ComplexMatrix::identity(4).scale((1.0 - p) / 4.0))?;
    Ok(DensityMatrix::from_trusted(m, 2, 2))
}

fn check_local_dim(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::ParamOutOfRange(format!("dimension {n} < {min}")));
    }
    Ok(())
}

/// `|Φ⁺⟩ = n^{-1/2} Σ_i |i,i⟩` as a density matrix.
pub fn bell_phi_plus(n: usize) -> Result<DensityMatrix> {
    check_local_dim(n, 2)?;
    let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut psi = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        psi[i * n + i] = amp;
    }
    Ok(DensityMatrix::from_trusted(
        ComplexMatrix::projector(&psi),
        n,
        n,
    ))
}

/// Maximally correlated mixed state `(1/n) Σ_i |i,i⟩⟨i,i|`.
pub fn mcm_state(n: usize) -> Result<DensityMatrix> {
    check_local_dim(n, 2)?;
    let mut diag = vec![0.0; n * n];
    for i in 0..n {
        diag[i * n + i] = 1.0 / n as f64;
    }
    Ok(DensityMatrix::from_trusted(
        ComplexMatrix::from_real_diagonal(&diag),
        n,
        n,
    ))
}

pub fn maximally_mixed(m: usize, n: usize) -> Result<DensityMatrix> {
    check_local_dim(m, 1)?;
    check_local_dim(n, 1)?;
    let d = m * n;
    Ok(DensityMatrix::from_trusted(
        ComplexMatrix::identity(d).scale(1.0 / d as f64),
        m,
        n,
    ))
}

/// The two families of CQC-saturating mixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryFamily {
    /// `λ Φ⁺ + (1−λ) ρ_MCM`
    BellWithMcm,
    /// `λ ρ_MCM + (1−λ) I/n²`
    McmWithMm,
}

impl BoundaryFamily {
    pub const ALL: [BoundaryFamily; 2] = [BoundaryFamily::BellWithMcm, BoundaryFamily::McmWithMm];

    pub fn tag(self) -> &'static str {
        match self {
            BoundaryFamily::BellWithMcm => "bell-with-mcm",
            BoundaryFamily::McmWithMm => "mcm-with-mm",
        }
    }
}

impl fmt::Display for BoundaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryMixtureSpec {
    pub family: BoundaryFamily,
    pub lambda: f64,
    pub n: usize,
}

pub fn boundary_mixture(spec: BoundaryMixtureSpec) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&spec.lambda) {
        return Err(Error::ParamOutOfRange(format!(
            "lambda={} outside [0, 1]",
            spec.lambda
        )));
    }
    check_local_dim(spec.n, 2)?;
    let n = spec.n;
    match spec.family {
        BoundaryFamily::BellWithMcm => bell_phi_plus(n)?.mix(&mcm_state(n)?, spec.lambda),
        BoundaryFamily::McmWithMm => mcm_state(n)?.mix(&maximally_mixed(n, n)?, spec.lambda),
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix, with each column
/// of `Q` rephased by `R_kk/|R_kk|` so that the factorisation is unique.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "haar_unitary needs dim ≥ 1");
    loop {
        let z = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
        // A singular Ginibre draw has probability zero; redraw if it happens.
        let Ok((q, r)) = z.qr() else { continue };
        let phases: Vec<Complex64> = (0..dim).map(|k| r[(k, k)] / r[(k, k)].norm()).collect();
        return ComplexMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * phases[j]);
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> DensityMatrix {
    loop {
        let psi: Vec<Complex64> = (0..dim_a * dim_b).map(|_| complex_gaussian(rng)).collect();
        if let Ok(rho) = DensityMatrix::from_pure(&psi, dim_a, dim_b) {
            return rho;
        }
    }
}

/// `V diag(λ) V†` with `λ` uniform on the probability simplex and `V` Haar.
pub fn random_density_matrix<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> DensityMatrix {
    let d = dim_a * dim_b;
    let mut lambda: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|l| *l /= total);
    let v = haar_unitary(d, rng);
    let m = ComplexMatrix::from_real_diagonal(&lambda)
        .conjugate_by(&v)
        .expect("square");
    DensityMatrix::from_trusted(m, dim_a, dim_b)
}

/// GUE matrix with entry variance `1/dim`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        h[(i, i)] = Complex64::new(d * scale, 0.0);
        for j in i + 1..dim {
            let z = complex_gaussian(rng) * scale;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `U ρ U†` with `U = exp(iεH)` for a fresh GUE draw `H`.
pub fn perturb<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    epsilon: f64,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("epsilon={epsilon}")));
    }
    let d = rho.matrix().rows();
    let h = random_hermitian(d, rng);
    let u = h
        .hermitian_eig()?
        .reconstruct_with(|l| Complex64::from_polar(1.0, epsilon * l));
    rho.conjugated(&u)
}
