//! JSON state files and counterexample dumps.
//!
//! A state file is
//!
//! ```json
//! { "dim_a": 2, "dim_b": 2, "entries": [[0.5, 0.0], [0.0, 0.0], ...] }
//! ```
//!
//! with `entries` the `(dim_a·dim_b)²` matrix elements as `[re, im]` pairs in
//! row-major joint-index order (`i·dim_b + j`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::BasisQuadruple;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subsystem};
use crate::states::DensityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub entries: Vec<[f64; 2]>,
}

fn pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.as_slice().iter().map(|z| [z.re, z.im]).collect()
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self {
            dim_a: rho.dim_a(),
            dim_b: rho.dim_b(),
            entries: pairs(rho.matrix()),
        }
    }

    /// Shape problems are [`Error::Parse`]; a well-formed matrix that is not
    /// a state yields [`Error::NotAState`].
    pub fn into_state(self) -> Result<DensityMatrix> {
        if self.dim_a == 0 || self.dim_b == 0 {
            return Err(Error::Parse("dimensions must be ≥ 1".into()));
        }
        let side = self
            .dim_a
            .checked_mul(self.dim_b)
            .ok_or_else(|| Error::Parse("dimensions overflow".into()))?;
        if self.entries.len() != side * side {
            return Err(Error::Parse(format!(
                "expected {} entries for a {}x{} state, found {}",
                side * side,
                self.dim_a,
                self.dim_b,
                self.entries.len()
            )));
        }
        let data = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let m =
            ComplexMatrix::from_vec(side, side, data).map_err(|e| Error::Parse(e.to_string()))?;
        match DensityMatrix::new(m, self.dim_a, self.dim_b) {
            Ok(rho) => Ok(rho),
            Err(e @ Error::NotAState(_)) => Err(e),
            Err(e) => Err(Error::NotAState(e.to_string())),
        }
    }
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_state()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_state(rho)).expect("plain data serialises")
}

/// A flagged sample written out for independent re-verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleDump {
    pub kind: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub index: u64,
    pub gap: f64,
    pub state: StateFile,
    /// Basis matrices `[qa, ra, qb, rb]`, row-major `[re, im]` pairs.
    pub bases: Vec<Vec<[f64; 2]>>,
}

impl SampleDump {
    pub fn new(
        kind: &str,
        index: u64,
        gap: f64,
        rho: &DensityMatrix,
        bases: &BasisQuadruple,
    ) -> Self {
        let (qa, ra) = bases.pair(Subsystem::A);
        let (qb, rb) = bases.pair(Subsystem::B);
        Self {
            kind: kind.to_string(),
            dim_a: rho.dim_a(),
            dim_b: rho.dim_b(),
            index,
            gap,
            state: StateFile::from_state(rho),
            bases: [qa, ra, qb, rb]
                .iter()
                .map(|b| pairs(b.vectors()))
                .collect(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain data serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_phi_plus, random_density_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn state_round_trips_through_json() {
        let rho = random_density_matrix(2, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let back = parse_state(&state_to_json(&rho)).unwrap();
        assert_eq!(back.dim_a(), 2);
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn parses_hand_written_bell_state() {
        let text = r#"{"dim_a":2,"dim_b":2,"entries":[
            [0.5,0],[0,0],[0,0],[0.5,0],
            [0,0],[0,0],[0,0],[0,0],
            [0,0],[0,0],[0,0],[0,0],
            [0.5,0],[0,0],[0,0],[0.5,0]]}"#;
        let rho = parse_state(text).unwrap();
        assert!(
            rho.matrix()
                .max_abs_diff(bell_phi_plus(2).unwrap().matrix())
                < 1e-15
        );
    }

    #[test]
    fn malformed_files_are_parse_errors() {
        for text in [
            "not json",
            r#"{"dim_a":2,"dim_b":2}"#,
            r#"{"dim_a":2,"dim_b":2,"entries":[[1,0]]}"#,
            r#"{"dim_a":1,"dim_b":1,"entries":[[1,0,3]]}"#,
            r#"{"dim_a":0,"dim_b":1,"entries":[]}"#,
            r#"{"dim_a":1,"dim_b":1,"entries":[[1,0]],"extra":1}"#,
        ] {
            assert!(matches!(parse_state(text), Err(Error::Parse(_))), "{text}");
        }
    }

    #[test]
    fn invalid_states_are_rejected() {
        let unnormalised = r#"{"dim_a":1,"dim_b":2,"entries":[[0.5,0],[0,0],[0,0],[0.4,0]]}"#;
        assert!(matches!(
            parse_state(unnormalised),
            Err(Error::NotAState(_))
        ));
        let non_hermitian = r#"{"dim_a":1,"dim_b":2,"entries":[[0.5,0],[0.1,0],[0,0],[0.5,0]]}"#;
        assert!(matches!(
            parse_state(non_hermitian),
            Err(Error::NotAState(_))
        ));
        let within_tol = r#"{"dim_a":1,"dim_b":2,"entries":[[0.5,0],[0,1e-12],[0,0],[0.5,0]]}"#;
        assert!(parse_state(within_tol).is_ok());
    }
}
