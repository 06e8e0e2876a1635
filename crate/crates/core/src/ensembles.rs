//! Signal ensembles: the trine, tetrad and their orthogonal counterparts.
//!
//! Amplitudes keep the signs of the usual printed forms (including the
//! leading minus signs), so intermediate network amplitudes can be compared
//! term by term.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, outer, CMatrix, StateVector};
use crate::polarization::PolarizationState;

const NORM_TOL: f64 = 1e-12;
const PRIOR_TOL: f64 = 1e-12;
const OVERCOMPLETE_TOL: f64 = 1e-10;

/// A list of pure states with prior probabilities.
#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "EnsembleRepr")]
pub struct Ensemble {
    label: String,
    states: Vec<StateVector>,
    priors: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    label: String,
    states: Vec<PolarizationState>,
    #[serde(default)]
    priors: Option<Vec<f64>>,
}

impl TryFrom<EnsembleRepr> for Ensemble {
    type Error = Error;

    fn try_from(r: EnsembleRepr) -> Result<Self> {
        let states = r.states.iter().map(PolarizationState::to_vector).collect();
        match r.priors {
            Some(priors) => Ensemble::new(r.label, states, priors),
            None => Ensemble::uniform(r.label, states),
        }
    }
}

impl Serialize for Ensemble {
    /// Only qubit ensembles have a JSON form.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let states = self
            .polarization_states()
            .map_err(serde::ser::Error::custom)?;
        EnsembleRepr {
            label: self.label.clone(),
            states,
            priors: Some(self.priors.clone()),
        }
        .serialize(serializer)
    }
}

impl Ensemble {
    pub fn new(label: impl Into<String>, states: Vec<StateVector>, priors: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if states.is_empty() {
            return Err(Error::InvalidEnsemble("no states".into()));
        }
        let dim = states[0].len();
        if dim == 0 {
            return Err(Error::InvalidEnsemble("zero-dimensional state".into()));
        }
        for (k, s) in states.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.len() });
            }
            let n = s.norm_squared();
            if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidEnsemble(format!(
                    "state {k} has squared norm {n}, expected 1"
                )));
            }
        }
        if priors.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if let Some((k, p)) = priors.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidEnsemble(format!("prior {k} is {p}")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        Ok(Self { label, states, priors })
    }

    /// Equal priors `1/N`.
    pub fn uniform(label: impl Into<String>, states: Vec<StateVector>) -> Result<Self> {
        let n = states.len();
        Self::new(label, states, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn from_polarization(
        label: impl Into<String>,
        states: &[PolarizationState],
        priors: Vec<f64>,
    ) -> Result<Self> {
        Self::new(label, states.iter().map(PolarizationState::to_vector).collect(), priors)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn polarization_state(&self, k: usize) -> Result<PolarizationState> {
        let s = self
            .states
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("state index {k} out of range")))?;
        PolarizationState::from_vector(s)
    }

    pub fn polarization_states(&self) -> Result<Vec<PolarizationState>> {
        self.states.iter().map(PolarizationState::from_vector).collect()
    }

    pub fn has_uniform_priors(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.priors.iter().all(|p| (p - u).abs() <= PRIOR_TOL)
    }

    /// Reorders states (and priors) so that entry `i` of the result is entry `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Self::new(
            self.label.clone(),
            perm.iter().map(|&i| self.states[i].clone()).collect(),
            perm.iter().map(|&i| self.priors[i]).collect(),
        )
    }

    /// `Σ_k |ψ_k⟩⟨ψ_k|`
    pub fn frame_operator(&self) -> CMatrix {
        let d = self.dim();
        self.states
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, s| acc + outer(s, s))
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidArgument(format!("permutation of length {} for {n} items", perm.len())));
    }
    for &i in perm {
        if i >= n || seen[i] {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        seen[i] = true;
    }
    Ok(())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn qubit(label: &str, amps: &[(Complex64, Complex64)]) -> Ensemble {
    let states: Vec<StateVector> = amps
        .iter()
        .map(|&(h, v)| StateVector::from_vec(vec![h, v]))
        .collect();
    Ensemble::uniform(label, states).expect("built-in ensembles are valid")
}

/// Three linear polarizations 60° apart; the third is `|h⟩`.
pub fn trine() -> Ensemble {
    let r3 = 3f64.sqrt();
    qubit(
        "trine",
        &[
            (c(-0.5, 0.0), c(-r3 / 2.0, 0.0)),
            (c(-0.5, 0.0), c(r3 / 2.0, 0.0)),
            (c(1.0, 0.0), c(0.0, 0.0)),
        ],
    )
}

/// Two elliptical and two linear polarizations on a tetrahedron; the fourth is `|h⟩`.
pub fn tetrad() -> Ensemble {
    let a = 1.0 / 3f64.sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    qubit(
        "tetrad",
        &[
            (c(-a, 0.0), w.conj() * b),
            (c(-a, 0.0), w * b),
            (c(-a, 0.0), c(b, 0.0)),
            (c(1.0, 0.0), c(0.0, 0.0)),
        ],
    )
}

/// States orthogonal, index by index, to [`trine`].
pub fn antitrine() -> Ensemble {
    let r3 = 3f64.sqrt();
    qubit(
        "antitrine",
        &[
            (c(r3 / 2.0, 0.0), c(-0.5, 0.0)),
            (c(-r3 / 2.0, 0.0), c(-0.5, 0.0)),
            (c(0.0, 0.0), c(1.0, 0.0)),
        ],
    )
}

/// States orthogonal, index by index, to [`tetrad`].
pub fn antitetrad() -> Ensemble {
    let a = 1.0 / 3f64.sqrt();
    let b = (2.0f64 / 3.0).sqrt();
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    qubit(
        "antitetrad",
        &[
            (-w * b, c(-a, 0.0)),
            (-w.conj() * b, c(-a, 0.0)),
            (c(-b, 0.0), c(-a, 0.0)),
            (c(0.0, 0.0), c(1.0, 0.0)),
        ],
    )
}

/// Looks up one of the four built-in ensembles by name.
pub fn builtin(label: &str) -> Result<Ensemble> {
    match label {
        "trine" => Ok(trine()),
        "tetrad" => Ok(tetrad()),
        "antitrine" => Ok(antitrine()),
        "antitetrad" => Ok(antitetrad()),
        other => Err(Error::UnknownLabel(other.to_string())),
    }
}

pub const BUILTIN_LABELS: [&str; 4] = ["trine", "antitrine", "tetrad", "antitetrad"];

/// Whether `(dim/N) Σ_k |ψ_k⟩⟨ψ_k|` resolves the identity to 1e-10 elementwise.
pub fn verify_overcomplete(ensemble: &Ensemble, dim: usize) -> Result<bool> {
    if ensemble.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: ensemble.dim() });
    }
    let scale = dim as f64 / ensemble.len() as f64;
    let residual = ensemble.frame_operator().scale(scale) - CMatrix::identity(dim, dim);
    Ok(max_abs(&residual) <= OVERCOMPLETE_TOL)
}
