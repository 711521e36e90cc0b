//! Shannon and von Neumann entropies and the mutual informations built from
//! them. All values are in bits.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::measurement::JointDistribution;
use crate::states::{DensityMatrix, STATE_TOL};

/// Eigenvalues below this are dropped before taking logarithms.
pub const EIGEN_CLIP: f64 = 1e-9;
/// Classical information values in `[−CLASSICAL_CLAMP, 0)` are rounded to zero.
pub const CLASSICAL_CLAMP: f64 = 1e-12;
/// Quantum information values in `[−QUANTUM_CLAMP, 0)` are rounded to zero.
pub const QUANTUM_CLAMP: f64 = 1e-9;

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {x}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `−Σ p log₂ p` with `0·log 0 = 0`. No validation; callers pass
/// distributions that are already known to be normalised.
pub(crate) fn entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(p.as_slice())
}

fn clamp_nonneg(value: f64, tol: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tol {
        Ok(0.0)
    } else {
        Err(Error::Inconsistent(format!(
            "{what} evaluated to {value:e}"
        )))
    }
}

/// `H(row) + H(col) − H(joint)`.
pub fn classical_mutual_information(j: &JointDistribution) -> Result<f64> {
    let mi = entropy_bits(&j.row_marginal()) + entropy_bits(&j.col_marginal())
        - entropy_bits(j.as_slice());
    clamp_nonneg(mi, CLASSICAL_CLAMP, "classical mutual information")
}

/// `H(joint) − H(marginal of the conditioning side)`.
pub fn classical_conditional_entropy(
    j: &JointDistribution,
    conditioned_on: Subsystem,
) -> Result<f64> {
    let h = entropy_bits(j.as_slice()) - entropy_bits(&j.marginal(conditioned_on));
    clamp_nonneg(h, CLASSICAL_CLAMP, "classical conditional entropy")
}

/// Eigenvalues of a state-like operator with entries below [`EIGEN_CLIP`]
/// zeroed and the remainder renormalised.
pub fn clipped_spectrum(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    let eig = rho.hermitian_eig()?;
    let mut spectrum = eig.eigenvalues;
    if let Some(&min) = spectrum.first() {
        if min < -STATE_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
    }
    let total: f64 = spectrum.iter().sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(Error::NotAState(format!("trace {total}")));
    }
    spectrum.iter_mut().for_each(|l| {
        if *l < EIGEN_CLIP {
            *l = 0.0
        }
    });
    let kept: f64 = spectrum.iter().sum();
    spectrum.iter_mut().for_each(|l| *l /= kept);
    Ok(spectrum)
}

pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    Ok(entropy_bits(&clipped_spectrum(rho)?))
}

/// `S(A)`, `S(B)` and `S(AB)` of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEntropies {
    pub a: f64,
    pub b: f64,
    pub joint: f64,
}

impl StateEntropies {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self {
            a: von_neumann_entropy(&rho.reduced(Subsystem::A))?,
            b: von_neumann_entropy(&rho.reduced(Subsystem::B))?,
            joint: von_neumann_entropy(rho.matrix())?,
        })
    }

    pub fn side(&self, side: Subsystem) -> f64 {
        match side {
            Subsystem::A => self.a,
            Subsystem::B => self.b,
        }
    }

    pub fn mutual_information(&self) -> Result<f64> {
        clamp_nonneg(
            self.a + self.b - self.joint,
            QUANTUM_CLAMP,
            "quantum mutual information",
        )
    }

    /// `S(AB) − S(conditioning side)`; negative values are kept.
    pub fn conditional(&self, conditioned_on: Subsystem) -> f64 {
        self.joint - self.side(conditioned_on)
    }
}

pub fn quantum_mutual_information(rho: &DensityMatrix) -> Result<f64> {
    StateEntropies::of(rho)?.mutual_information()
}

pub fn conditional_quantum_entropy(rho: &DensityMatrix, conditioned_on: Subsystem) -> Result<f64> {
    Ok(StateEntropies::of(rho)?.conditional(conditioned_on))
}
