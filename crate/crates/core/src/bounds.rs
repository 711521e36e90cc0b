//! The complementary-quantum correlation (CQC) relation
//!
//! ```text
//! H(Qᴬ:Qᴮ) + H(Rᴬ:Rᴮ) ≤ I(A:B)
//! ```
//!
//! for mutually unbiased pairs `(Qᴬ, Rᴬ)` and `(Qᴮ, Rᴮ)`, together with the
//! quantities derived from it: the residual uncertainty by which it improves
//! on the classical quantum-memory uncertainty relation, an upper bound on an
//! eavesdropper's mutual information, a key-rate lower bound for the quantum
//! one-time pad, and entanglement and steering witnesses.
//!
//! The relation is proven only for special cases (pure states, a maximally
//! mixed marginal, a minimally disturbing measurement). Anything that relies
//! on it for general states, in particular both witnesses and the key-rate
//! bound, is conditional on the conjecture holding.

use crate::error::{Error, Result};
use crate::information::{
    classical_conditional_entropy, classical_mutual_information, entropy_bits, StateEntropies,
};
use crate::linalg::Subsystem;
use crate::measurement::{
    computational_basis, fourier_basis, joint_distribution, pauli_basis, unbiasedness_deviation,
    MubPair, PauliAxis, ProjectiveBasis, MUB_TOL,
};
use crate::states::DensityMatrix;

/// Gaps below this are reported as counterexamples to the relation.
pub const VIOLATION_THRESHOLD: f64 = -1e-7;
/// Margin a witness quantity must clear before it fires.
pub const WITNESS_MARGIN: f64 = 1e-9;

/// Measurement bases for both parties: `(qa, ra)` on `A`, `(qb, rb)` on `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisQuadruple {
    qa: ProjectiveBasis,
    ra: ProjectiveBasis,
    qb: ProjectiveBasis,
    rb: ProjectiveBasis,
    unbiased: bool,
}

impl BasisQuadruple {
    /// Checks that each side's pair is mutually unbiased.
    pub fn new(
        qa: ProjectiveBasis,
        ra: ProjectiveBasis,
        qb: ProjectiveBasis,
        rb: ProjectiveBasis,
    ) -> Result<Self> {
        let dev = unbiasedness_deviation(&qa, &ra)?.max(unbiasedness_deviation(&qb, &rb)?);
        if dev > MUB_TOL {
            return Err(Error::MubViolation(dev));
        }
        Ok(Self {
            qa,
            ra,
            qb,
            rb,
            unbiased: true,
        })
    }

    pub fn from_pairs(a: MubPair, b: MubPair) -> Self {
        Self {
            qa: a.q,
            ra: a.r,
            qb: b.q,
            rb: b.r,
            unbiased: true,
        }
    }

    /// Four unrelated bases. Only the pure-state form of the relation holds
    /// for these; residual uncertainties computed from them carry no bound.
    pub fn arbitrary(
        qa: ProjectiveBasis,
        ra: ProjectiveBasis,
        qb: ProjectiveBasis,
        rb: ProjectiveBasis,
    ) -> Result<Self> {
        if qa.dim() != ra.dim() || qb.dim() != rb.dim() {
            return Err(Error::DimensionMismatch(
                "Q and R bases of one party differ in dimension".into(),
            ));
        }
        Ok(Self {
            qa,
            ra,
            qb,
            rb,
            unbiased: false,
        })
    }

    /// Computational `Q` and Fourier `R` on both sides.
    pub fn computational_fourier(dim_a: usize, dim_b: usize) -> Self {
        Self {
            qa: computational_basis(dim_a),
            ra: fourier_basis(dim_a),
            qb: computational_basis(dim_b),
            rb: fourier_basis(dim_b),
            unbiased: true,
        }
    }

    /// Qubit Pauli eigenbases, the same pair on both sides.
    pub fn pauli(q: PauliAxis, r: PauliAxis) -> Result<Self> {
        Self::new(
            pauli_basis(q),
            pauli_basis(r),
            pauli_basis(q),
            pauli_basis(r),
        )
    }

    pub fn is_unbiased(&self) -> bool {
        self.unbiased
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.qa.dim(), self.qb.dim())
    }

    /// `(Q, R)` of one party.
    pub fn pair(&self, side: Subsystem) -> (&ProjectiveBasis, &ProjectiveBasis) {
        match side {
            Subsystem::A => (&self.qa, &self.ra),
            Subsystem::B => (&self.qb, &self.rb),
        }
    }
}

/// A witness decision together with the distance of its statistic from the
/// threshold (positive when fired).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub fired: bool,
    pub margin: f64,
}

/// Entanglement witness outcome; `side` names the party whose measurement
/// entropy set the threshold, so `S(side | other) < 0` is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementWitness {
    pub fired: bool,
    pub margin: f64,
    pub side: Subsystem,
}

/// Shannon entropies of the four single-party measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEntropies {
    pub qa: f64,
    pub ra: f64,
    pub qb: f64,
    pub rb: f64,
}

/// Everything computed for one (state, bases) evaluation. Bits throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct CqcReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub mi_qq: f64,
    pub mi_rr: f64,
    pub mi_sum: f64,
    pub qmi: f64,
    /// `qmi − mi_sum`; the relation predicts `gap ≥ 0`.
    pub gap: f64,
    pub entropies: StateEntropies,
    pub marginals: MarginalEntropies,
    pub residual_a: f64,
    pub residual_b: f64,
    pub berta_bound_a: f64,
    pub berta_bound_b: f64,
    /// `2·log₂ N^A − mi_sum`.
    pub eve_bound: f64,
    /// `2·S(A) − mi_sum`.
    pub eve_bound_tight: f64,
    pub key_rate_lower: f64,
    pub entanglement_witness: EntanglementWitness,
    pub steering_witness: Witness,
}

impl CqcReport {
    pub fn is_counterexample(&self) -> bool {
        self.gap < VIOLATION_THRESHOLD
    }

    /// `S(side | other)` read off the stored entropies.
    pub fn conditional_entropy(&self, side: Subsystem) -> f64 {
        self.entropies.conditional(side.other())
    }
}

fn log2_dim(d: usize) -> f64 {
    (d as f64).log2()
}

fn check_dims(rho: &DensityMatrix, bases: &BasisQuadruple) -> Result<()> {
    if bases.dims() != (rho.dim_a(), rho.dim_b()) {
        return Err(Error::DimensionMismatch(format!(
            "bases for {}x{} applied to a {}x{} state",
            bases.dims().0,
            bases.dims().1,
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    Ok(())
}

pub fn evaluate(rho: &DensityMatrix, bases: &BasisQuadruple) -> Result<CqcReport> {
    check_dims(rho, bases)?;
    let (dim_a, dim_b) = (rho.dim_a(), rho.dim_b());
    let jq = joint_distribution(rho, &bases.qa, &bases.qb)?;
    let jr = joint_distribution(rho, &bases.ra, &bases.rb)?;
    let mi_qq = classical_mutual_information(&jq)?;
    let mi_rr = classical_mutual_information(&jr)?;
    let mi_sum = mi_qq + mi_rr;

    let entropies = StateEntropies::of(rho)?;
    let qmi = entropies.mutual_information()?;
    let marginals = MarginalEntropies {
        qa: entropy_bits(&jq.row_marginal()),
        ra: entropy_bits(&jr.row_marginal()),
        qb: entropy_bits(&jq.col_marginal()),
        rb: entropy_bits(&jr.col_marginal()),
    };

    let residual_a = marginals.qa + marginals.ra - log2_dim(dim_a) - entropies.a;
    let residual_b = marginals.qb + marginals.rb - log2_dim(dim_b) - entropies.b;
    let berta_bound_a = entropies.a + log2_dim(dim_a)
        - classical_conditional_entropy(&jq, Subsystem::B)?
        - classical_conditional_entropy(&jr, Subsystem::B)?;
    let berta_bound_b = entropies.b + log2_dim(dim_b)
        - classical_conditional_entropy(&jq, Subsystem::A)?
        - classical_conditional_entropy(&jr, Subsystem::A)?;

    Ok(CqcReport {
        dim_a,
        dim_b,
        mi_qq,
        mi_rr,
        mi_sum,
        qmi,
        gap: qmi - mi_sum,
        entropies,
        marginals,
        residual_a,
        residual_b,
        berta_bound_a,
        berta_bound_b,
        eve_bound: eve_information_bound(mi_sum, dim_a)?,
        eve_bound_tight: 2.0 * entropies.a - mi_sum,
        key_rate_lower: key_rate_lower_bound_bipartite(mi_sum, dim_a, dim_b)?,
        entanglement_witness: entanglement_witness(&marginals, mi_sum),
        steering_witness: steering_witness(mi_sum, dim_a.max(dim_b)),
    })
}

/// `H(Q) + H(R) − log₂ d − S(side)` on the reduced state of `side`.
pub fn residual_uncertainty(
    rho: &DensityMatrix,
    side: Subsystem,
    q: &ProjectiveBasis,
    r: &ProjectiveBasis,
) -> Result<f64> {
    let d = rho.dim(side);
    if q.dim() != d || r.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "bases of dimension {}/{} for a {d}-dimensional subsystem",
            q.dim(),
            r.dim()
        )));
    }
    let dev = unbiasedness_deviation(q, r)?;
    if dev > MUB_TOL {
        return Err(Error::MubViolation(dev));
    }
    let reduced = rho.reduced(side);
    let h_q = entropy_bits(&q.probabilities(&reduced)?);
    let h_r = entropy_bits(&r.probabilities(&reduced)?);
    let s = crate::information::von_neumann_entropy(&reduced)?;
    Ok(h_q + h_r - log2_dim(d) - s)
}

/// Lower bound on `I(A:B)` from the classical quantum-memory uncertainty
/// relation, written for `side`:
/// `S(side) + log₂ d − H(Q^side|Q^other) − H(R^side|R^other)`.
pub fn berta_classical_bound(
    rho: &DensityMatrix,
    bases: &BasisQuadruple,
    side: Subsystem,
) -> Result<f64> {
    let report = evaluate(rho, bases)?;
    Ok(match side {
        Subsystem::A => report.berta_bound_a,
        Subsystem::B => report.berta_bound_b,
    })
}

fn check_bound_inputs(mi_sum: f64, dim: usize) -> Result<()> {
    if !(mi_sum >= 0.0 && mi_sum.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("mi_sum={mi_sum}")));
    }
    if dim == 0 {
        return Err(Error::ParamOutOfRange("dimension must be ≥ 1".into()));
    }
    Ok(())
}

/// Upper bound `2·log₂ d − mi_sum` on the eavesdropper's mutual information
/// with the party of dimension `d`. Not clamped.
pub fn eve_information_bound(mi_sum: f64, dim: usize) -> Result<f64> {
    check_bound_inputs(mi_sum, dim)?;
    Ok(2.0 * log2_dim(dim) - mi_sum)
}

/// `max(0, 2·(mi_sum − log₂ d))`.
pub fn key_rate_lower_bound(mi_sum: f64, dim: usize) -> Result<f64> {
    check_bound_inputs(mi_sum, dim)?;
    Ok((2.0 * (mi_sum - log2_dim(dim))).max(0.0))
}

/// Key-rate bound minimised over both parties as potential targets of the
/// eavesdropper; reduces to [`key_rate_lower_bound`] for square systems.
pub fn key_rate_lower_bound_bipartite(mi_sum: f64, dim_a: usize, dim_b: usize) -> Result<f64> {
    Ok(key_rate_lower_bound(mi_sum, dim_a)?.min(key_rate_lower_bound(mi_sum, dim_b)?))
}

/// Fires when `mi_sum` exceeds the least of the four measurement entropies.
pub fn entanglement_witness(marginals: &MarginalEntropies, mi_sum: f64) -> EntanglementWitness {
    let candidates = [
        (marginals.qa, Subsystem::A),
        (marginals.ra, Subsystem::A),
        (marginals.qb, Subsystem::B),
        (marginals.rb, Subsystem::B),
    ];
    let (least, side) = candidates
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("four candidates");
    let margin = mi_sum - least;
    EntanglementWitness {
        fired: margin > WITNESS_MARGIN,
        margin,
        side,
    }
}

/// Fires when `mi_sum > log₂ d`.
pub fn steering_witness(mi_sum: f64, dim: usize) -> Witness {
    let margin = mi_sum - log2_dim(dim);
    Witness {
        fired: margin > WITNESS_MARGIN,
        margin,
    }
}
