//! Local projective measurements and their joint outcome statistics.
//!
//! An observable is represented only by its eigenbasis: every information
//! quantity used here depends on outcome probabilities, never on eigenvalue
//! labels.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::states::DensityMatrix;

/// Tolerance on `‖V†V − I‖_max` for a basis matrix.
pub const BASIS_TOL: f64 = 1e-10;
/// Tolerance on overlap moduli for a mutually unbiased pair.
pub const MUB_TOL: f64 = 1e-9;
/// Probabilities in `[−PROB_CLIP, 0)` are treated as zero.
pub const PROB_CLIP: f64 = 1e-12;
const PROB_SUM_TOL: f64 = 1e-9;

/// Orthonormal measurement basis; column `k` is the `k`-th outcome vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    vectors: ComplexMatrix,
}

impl ProjectiveBasis {
    pub fn new(vectors: ComplexMatrix) -> Result<Self> {
        if !vectors.is_square() || vectors.rows() == 0 {
            return Err(Error::DimensionMismatch(
                "basis matrix must be square and non-empty".into(),
            ));
        }
        let dev = vectors.unitarity_deviation();
        if dev > BASIS_TOL {
            return Err(Error::ParamOutOfRange(format!(
                "basis vectors are not orthonormal (deviation {dev:e})"
            )));
        }
        Ok(Self { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.rows()
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// Outcome probabilities `⟨v_k|ρ|v_k⟩` for a single-system operator.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        if rho.rows() != self.dim() || !rho.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional basis applied to a {}x{} operator",
                self.dim(),
                rho.rows(),
                rho.cols()
            )));
        }
        let rv = rho.matmul(&self.vectors)?;
        let p = (0..self.dim())
            .map(|k| {
                (0..self.dim())
                    .map(|r| (self.vectors[(r, k)].conj() * rv[(r, k)]).re)
                    .sum()
            })
            .collect();
        clip_and_normalise(p)
    }
}

pub fn computational_basis(dim: usize) -> ProjectiveBasis {
    assert!(dim >= 1, "basis dimension must be ≥ 1");
    ProjectiveBasis {
        vectors: ComplexMatrix::identity(dim),
    }
}

fn fourier_matrix(dim: usize) -> ComplexMatrix {
    let norm = 1.0 / (dim as f64).sqrt();
    ComplexMatrix::from_fn(dim, dim, |j, k| {
        // Reduce jk mod dim before scaling so the phase stays exact-ish.
        let phase = TAU * ((j * k) % dim) as f64 / dim as f64;
        Complex64::from_polar(norm, phase)
    })
}

/// Columns `F[j,k] = exp(2πi·jk/dim)/√dim`.
pub fn fourier_basis(dim: usize) -> ProjectiveBasis {
    assert!(dim >= 1, "basis dimension must be ≥ 1");
    ProjectiveBasis {
        vectors: fourier_matrix(dim),
    }
}

/// The basis `B·F`, unbiased with respect to `b` in any dimension.
pub fn conjugate_basis(b: &ProjectiveBasis) -> ProjectiveBasis {
    let vectors = b
        .vectors
        .matmul(&fourier_matrix(b.dim()))
        .expect("square matrices of equal size");
    ProjectiveBasis { vectors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Eigenbasis of a Pauli operator, `+1` eigenvector first.
pub fn pauli_basis(axis: PauliAxis) -> ProjectiveBasis {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let ih = Complex64::new(0.0, FRAC_1_SQRT_2);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let data = match axis {
        PauliAxis::X => vec![h, h, h, -h],
        PauliAxis::Y => vec![h, h, ih, -ih],
        PauliAxis::Z => vec![one, zero, zero, one],
    };
    ProjectiveBasis {
        vectors: ComplexMatrix::from_vec(2, 2, data).expect("2x2"),
    }
}

/// Largest `| |⟨a_i|b_j⟩|² − 1/dim |`.
pub fn unbiasedness_deviation(a: &ProjectiveBasis, b: &ProjectiveBasis) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "bases of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let overlaps = a.vectors.adjoint().matmul(&b.vectors)?;
    let target = 1.0 / a.dim() as f64;
    Ok(overlaps
        .as_slice()
        .iter()
        .map(|z| (z.norm_sqr() - target).abs())
        .fold(0.0, f64::max))
}

pub fn is_mutually_unbiased(a: &ProjectiveBasis, b: &ProjectiveBasis, tol: f64) -> Result<bool> {
    Ok(unbiasedness_deviation(a, b)? <= tol)
}

/// A pair of mutually unbiased bases of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MubPair {
    pub q: ProjectiveBasis,
    pub r: ProjectiveBasis,
}

impl MubPair {
    pub fn new(q: ProjectiveBasis, r: ProjectiveBasis) -> Result<Self> {
        let dev = unbiasedness_deviation(&q, &r)?;
        if dev > MUB_TOL {
            return Err(Error::MubViolation(dev));
        }
        Ok(Self { q, r })
    }

    /// `q` together with its Fourier conjugate.
    pub fn with_conjugate(q: ProjectiveBasis) -> Self {
        let r = conjugate_basis(&q);
        Self { q, r }
    }
}

/// Row-major `rows × cols` table of joint outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

fn clip_and_normalise(mut p: Vec<f64>) -> Result<Vec<f64>> {
    for x in p.iter_mut() {
        if !x.is_finite() {
            return Err(Error::InvalidDistribution("non-finite probability".into()));
        }
        if *x < 0.0 {
            if *x < -PROB_CLIP {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {x:e}"
                )));
            }
            *x = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a {rows}x{cols} table",
                p.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            p: clip_and_normalise(p)?,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Outcome distribution of the `A` measurement.
    pub fn row_marginal(&self) -> Vec<f64> {
        self.p
            .chunks(self.cols)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Outcome distribution of the `B` measurement.
    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn marginal(&self, side: Subsystem) -> Vec<f64> {
        match side {
            Subsystem::A => self.row_marginal(),
            Subsystem::B => self.col_marginal(),
        }
    }
}

fn check_bases(rho: &DensityMatrix, a: &ProjectiveBasis, b: &ProjectiveBasis) -> Result<()> {
    if a.dim() != rho.dim_a() || b.dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "bases of dimension {}x{} for a {}x{} state",
            a.dim(),
            b.dim(),
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    Ok(())
}

/// `P(i,j) = ⟨a_i b_j|ρ|a_i b_j⟩`.
pub fn joint_distribution(
    rho: &DensityMatrix,
    basis_a: &ProjectiveBasis,
    basis_b: &ProjectiveBasis,
) -> Result<JointDistribution> {
    check_bases(rho, basis_a, basis_b)?;
    let w = basis_a.vectors.kron(&basis_b.vectors);
    let rw = rho.matrix().matmul(&w)?;
    let d = w.rows();
    let p = (0..d)
        .map(|k| (0..d).map(|r| (w[(r, k)].conj() * rw[(r, k)]).re).sum())
        .collect();
    JointDistribution::new(basis_a.dim(), basis_b.dim(), p)
}

/// The post-measurement state `Σ P(i,j) |a_i b_j⟩⟨a_i b_j|`.
pub fn dephase(
    rho: &DensityMatrix,
    basis_a: &ProjectiveBasis,
    basis_b: &ProjectiveBasis,
) -> Result<DensityMatrix> {
    let table = joint_distribution(rho, basis_a, basis_b)?;
    let w = basis_a.vectors.kron(&basis_b.vectors);
    let m = ComplexMatrix::from_real_diagonal(table.as_slice()).conjugate_by(&w)?;
    DensityMatrix::new(m, rho.dim_a(), rho.dim_b())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        asymmetric_werner, haar_unitary, maximally_mixed, mcm_state, random_density_matrix,
        WernerParams,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn computational_basis_is_identity() {
        let b = computational_basis(2);
        assert_eq!(
            b.vector(0),
            vec![Complex64::new(1., 0.), Complex64::new(0., 0.)]
        );
        assert_eq!(b.vectors().unitarity_deviation(), 0.0);
    }

    #[test]
    fn mcm_in_computational_basis() {
        let j = joint_distribution(
            &mcm_state(2).unwrap(),
            &computational_basis(2),
            &computational_basis(2),
        )
        .unwrap();
        assert_eq!(j.as_slice(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn fourier_bases() {
        assert!(
            fourier_basis(2)
                .vectors()
                .max_abs_diff(pauli_basis(PauliAxis::X).vectors())
                < 1e-15
        );
        assert!(is_mutually_unbiased(&computational_basis(5), &fourier_basis(5), 1e-9).unwrap());
        assert_eq!(fourier_basis(1).vector(0), vec![Complex64::new(1.0, 0.0)]);
        for d in 1..=16 {
            assert!(fourier_basis(d).vectors().unitarity_deviation() < 1e-13);
        }
    }

    #[test]
    fn conjugate_bases() {
        assert!(
            conjugate_basis(&computational_basis(4))
                .vectors()
                .max_abs_diff(fourier_basis(4).vectors())
                < 1e-15
        );
        let x = conjugate_basis(&pauli_basis(PauliAxis::Z));
        assert!(
            x.vectors()
                .max_abs_diff(pauli_basis(PauliAxis::X).vectors())
                < 1e-15
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in 2..=4 {
            let b = ProjectiveBasis::new(haar_unitary(d, &mut rng)).unwrap();
            MubPair::new(b.clone(), conjugate_basis(&b)).unwrap();
        }
    }

    #[test]
    fn pauli_bases() {
        assert_eq!(pauli_basis(PauliAxis::Z), computational_basis(2));
        assert!(is_mutually_unbiased(
            &pauli_basis(PauliAxis::X),
            &pauli_basis(PauliAxis::Y),
            1e-12
        )
        .unwrap());
        let y = pauli_basis(PauliAxis::Y);
        let s = FRAC_1_SQRT_2;
        assert_eq!(
            y.vector(0),
            vec![Complex64::new(s, 0.), Complex64::new(0., s)]
        );
        assert_eq!(
            y.vector(1),
            vec![Complex64::new(s, 0.), Complex64::new(0., -s)]
        );
    }

    #[test]
    fn unbiasedness_checks() {
        assert!(
            !is_mutually_unbiased(&computational_basis(3), &computational_basis(3), 1e-9).unwrap()
        );
        assert!(matches!(
            is_mutually_unbiased(&computational_basis(2), &computational_basis(3), 1e-9),
            Err(Error::DimensionMismatch(_))
        ));
        let theta: f64 = 0.7;
        let rz = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex64::from_polar(1.0, theta),
            (1, 1) => Complex64::from_polar(1.0, -theta),
            _ => Complex64::new(0.0, 0.0),
        });
        let rotated =
            ProjectiveBasis::new(rz.matmul(pauli_basis(PauliAxis::X).vectors()).unwrap()).unwrap();
        assert!(is_mutually_unbiased(&pauli_basis(PauliAxis::Z), &rotated, 1e-9).unwrap());
        assert!(matches!(
            MubPair::new(computational_basis(2), computational_basis(2)),
            Err(Error::MubViolation(_))
        ));
    }

    #[test]
    fn singlet_zz_table() {
        let singlet = asymmetric_werner(WernerParams::new(1.0, 0.5).unwrap()).unwrap();
        let z = pauli_basis(PauliAxis::Z);
        let j = joint_distribution(&singlet, &z, &z).unwrap();
        for (got, want) in j.as_slice().iter().zip([0.0, 0.5, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_tables_are_uniform() {
        let mm = maximally_mixed(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = ProjectiveBasis::new(haar_unitary(2, &mut rng)).unwrap();
        let b = ProjectiveBasis::new(haar_unitary(2, &mut rng)).unwrap();
        for p in joint_distribution(&mm, &a, &b).unwrap().as_slice() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn werner_xx_table() {
        let rho = asymmetric_werner(WernerParams::new(0.75, 0.5).unwrap()).unwrap();
        let x = pauli_basis(PauliAxis::X);
        let j = joint_distribution(&rho, &x, &x).unwrap();
        let want = [1.0 / 16.0, 7.0 / 16.0, 7.0 / 16.0, 1.0 / 16.0];
        for (got, w) in j.as_slice().iter().zip(want) {
            assert!((got - w).abs() < 1e-15);
        }
    }

    #[test]
    fn marginals_match_reduced_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let rho = random_density_matrix(2, 3, &mut rng);
            let a = ProjectiveBasis::new(haar_unitary(2, &mut rng)).unwrap();
            let b = ProjectiveBasis::new(haar_unitary(3, &mut rng)).unwrap();
            let j = joint_distribution(&rho, &a, &b).unwrap();
            let pa = a.probabilities(&rho.reduced(Subsystem::A)).unwrap();
            let pb = b.probabilities(&rho.reduced(Subsystem::B)).unwrap();
            for (x, y) in j.row_marginal().iter().zip(&pa) {
                assert!((x - y).abs() < 1e-9);
            }
            for (x, y) in j.col_marginal().iter().zip(&pb) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let rho = maximally_mixed(2, 3).unwrap();
        assert!(matches!(
            joint_distribution(&rho, &computational_basis(3), &computational_basis(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn joint_distribution_validation() {
        assert!(JointDistribution::new(2, 2, vec![0.5, 0.5, -1e-13, 0.0]).is_ok());
        assert!(JointDistribution::new(2, 2, vec![0.6, 0.5, -0.1, 0.0]).is_err());
        assert!(JointDistribution::new(2, 2, vec![0.5, 0.5, 0.5, 0.0]).is_err());
        assert!(JointDistribution::new(2, 2, vec![1.0]).is_err());
    }
}
