//! Probability operator measures: data model, outcome probabilities,
//! the minimum-error measurement for symmetric overcomplete ensembles and a
//! numerical check of the minimum-error optimality conditions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{check_permutation, verify_overcomplete, Ensemble};
use crate::error::{Error, Result};
use crate::linalg::{
    expectation, hermitian_defect, max_abs, min_eigenvalue, outer, symmetrize, CMatrix, StateVector,
};

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-10;
const PROBABILITY_SLACK: f64 = 1e-12;

/// Default tolerance for [`check_optimality`].
pub const DEFAULT_OPTIMALITY_TOL: f64 = 1e-9;

/// A positive semidefinite Hermitian operator attached to one outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct PomElement {
    matrix: CMatrix,
}

impl PomElement {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidPom(format!(
                "element is {}×{}, expected a nonempty square matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidPom(format!("element is not Hermitian (defect {defect:e})")));
        }
        let lowest = min_eigenvalue(&matrix);
        if lowest < -PSD_TOL {
            return Err(Error::InvalidPom(format!("element has negative eigenvalue {lowest:e}")));
        }
        Ok(Self { matrix })
    }

    /// `weight · |ψ⟩⟨ψ|`
    pub fn weighted_projector(weight: f64, state: &StateVector) -> Result<Self> {
        if weight < 0.0 {
            return Err(Error::InvalidPom(format!("negative weight {weight}")));
        }
        Self::new(outer(state, state).scale(weight))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `⟨ψ|Π|ψ⟩`, clamped to `[0, 1]`.
pub fn outcome_probability(element: &PomElement, state: &StateVector) -> Result<f64> {
    if state.len() != element.dim() {
        return Err(Error::DimensionMismatch { expected: element.dim(), found: state.len() });
    }
    let p = expectation(&element.matrix, state);
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::InvalidPom(format!("outcome probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// A complete set of POM elements, `Σ_j Π_j = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pom {
    dim: usize,
    elements: Vec<PomElement>,
}

impl Pom {
    pub fn new(elements: Vec<PomElement>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPom("no elements".into()));
        };
        let dim = first.dim();
        if let Some(e) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
        }
        let sum = elements
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, e| acc + &e.matrix);
        let residual = max_abs(&(sum - CMatrix::identity(dim, dim)));
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidPom(format!(
                "elements do not sum to the identity (residual {residual:e})"
            )));
        }
        Ok(Self { dim, elements })
    }

    pub fn from_matrices(matrices: Vec<CMatrix>) -> Result<Self> {
        Self::new(matrices.into_iter().map(PomElement::new).collect::<Result<_>>()?)
    }

    /// Projective measurement onto an orthonormal basis.
    pub fn projective(basis: &[StateVector]) -> Result<Self> {
        Self::new(
            basis
                .iter()
                .map(|b| PomElement::weighted_projector(1.0, b))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PomElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Outcome distribution for one pure state.
    pub fn probabilities(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.elements
            .iter()
            .map(|e| outcome_probability(e, state))
            .collect()
    }

    /// Relabels outcomes so that element `i` of the result is element `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(Self {
            dim: self.dim,
            elements: perm.iter().map(|&i| self.elements[i].clone()).collect(),
        })
    }

    /// Coarse-grains two outcomes into one; the merged outcome takes index `min(a, b)`.
    pub fn merge_outcomes(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.len() || b >= self.len() {
            return Err(Error::InvalidArgument(format!("cannot merge outcomes {a} and {b}")));
        }
        let (keep, drop) = (a.min(b), a.max(b));
        let mut elements = self.elements.clone();
        let removed = elements.remove(drop);
        elements[keep] = PomElement::new(symmetrize(&(&elements[keep].matrix + &removed.matrix)))?;
        Self::new(elements)
    }
}

/// Density matrix of a (possibly mixed) state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        if hermitian_defect(&matrix) > HERMITIAN_TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        if min_eigenvalue(&matrix) < -PSD_TOL {
            return Err(Error::InvalidState("density matrix is not positive".into()));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density matrix has trace {tr}")));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self { matrix: outer(state, state) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `Π_k = (D/N)|ψ_k⟩⟨ψ_k|` for an overcomplete ensemble with equal priors.
pub fn min_error_pom(ensemble: &Ensemble, dim: usize) -> Result<Pom> {
    if !verify_overcomplete(ensemble, dim)? {
        return Err(Error::InvalidEnsemble(format!(
            "`{}` does not resolve the identity in dimension {dim}",
            ensemble.label()
        )));
    }
    if !ensemble.has_uniform_priors() {
        return Err(Error::InvalidEnsemble(format!("`{}` has non-uniform priors", ensemble.label())));
    }
    let weight = dim as f64 / ensemble.len() as f64;
    Pom::new(
        ensemble
            .states()
            .iter()
            .map(|s| PomElement::weighted_projector(weight, s))
            .collect::<Result<_>>()?,
    )
}

fn check_counts(pom: &Pom, ensemble: &Ensemble) -> Result<()> {
    if pom.len() != ensemble.len() {
        return Err(Error::CountMismatch { elements: pom.len(), states: ensemble.len() });
    }
    if pom.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch { expected: pom.dim(), found: ensemble.dim() });
    }
    Ok(())
}

/// `P_e = 1 − Σ_k p_k Tr(ρ_k Π_k)`, where outcome `k` declares state `k`.
pub fn error_probability(pom: &Pom, ensemble: &Ensemble) -> Result<f64> {
    check_counts(pom, ensemble)?;
    let mut correct = 0.0;
    for ((element, state), p) in pom.elements().iter().zip(ensemble.states()).zip(ensemble.priors()) {
        correct += p * outcome_probability(element, state)?;
    }
    Ok((1.0 - correct).clamp(0.0, 1.0))
}

/// Worst-case residuals of the two minimum-error optimality conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// `max_{j,k} max|Π_j (p_j ρ_j − p_k ρ_k) Π_k|`
    pub max_stationarity_residual: f64,
    /// `min_j λ_min(Σ_k p_k ρ_k Π_k − p_j ρ_j)` after Hermitian symmetrization.
    pub min_eigenvalue: f64,
}

impl OptimalityReport {
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.max_stationarity_residual <= tol && self.min_eigenvalue >= -tol
    }
}

pub fn optimality_report(pom: &Pom, ensemble: &Ensemble) -> Result<OptimalityReport> {
    check_counts(pom, ensemble)?;
    let weighted: Vec<CMatrix> = ensemble
        .states()
        .iter()
        .zip(ensemble.priors())
        .map(|(s, &p)| outer(s, s).scale(p))
        .collect();
    let pis: Vec<&CMatrix> = pom.elements().iter().map(PomElement::matrix).collect();

    let mut stationarity = 0.0_f64;
    for j in 0..pis.len() {
        for k in 0..pis.len() {
            let term = pis[j] * (&weighted[j] - &weighted[k]) * pis[k];
            stationarity = stationarity.max(max_abs(&term));
        }
    }

    let d = pom.dim();
    let lagrange = weighted
        .iter()
        .zip(&pis)
        .fold(CMatrix::zeros(d, d), |acc, (r, p)| acc + r * *p);
    let lowest = weighted
        .iter()
        .map(|r| min_eigenvalue(&symmetrize(&(&lagrange - r))))
        .fold(f64::INFINITY, f64::min);

    Ok(OptimalityReport {
        max_stationarity_residual: stationarity,
        min_eigenvalue: lowest,
    })
}

/// Whether `pom` satisfies both minimum-error optimality conditions for
/// `ensemble` within `tol`.
pub fn check_optimality(pom: &Pom, ensemble: &Ensemble, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(optimality_report(pom, ensemble)?.is_optimal(tol))
}

/// JSON form: `{"dim": D, "elements": [[[re, im], ...], ...]}` with each
/// element given as its `D²` entries in row-major order.
#[derive(Serialize, Deserialize)]
struct PomRepr {
    dim: usize,
    elements: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Pom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let m = &e.matrix;
                (0..self.dim)
                    .flat_map(|r| (0..self.dim).map(move |c| [m[(r, c)].re, m[(r, c)].im]))
                    .collect()
            })
            .collect();
        PomRepr { dim: self.dim, elements }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pom {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PomRepr::deserialize(deserializer)?;
        let d = repr.dim;
        let mut matrices = Vec::with_capacity(repr.elements.len());
        for (j, entries) in repr.elements.iter().enumerate() {
            if entries.len() != d * d {
                return Err(D::Error::custom(format!(
                    "element {j} has {} entries, expected {}",
                    entries.len(),
                    d * d
                )));
            }
            let values: Vec<Complex64> = entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
            matrices.push(CMatrix::from_row_slice(d, d, &values));
        }
        Pom::from_matrices(matrices).map_err(D::Error::custom)
    }
}
