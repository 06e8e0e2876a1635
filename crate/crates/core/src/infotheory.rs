//! Shannon information for a prepared ensemble read out by a POM.
//!
//! All logarithms are base 2 and `0 · log 0` is taken as 0.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::polarization::{stokes, StokesVector};
use crate::pom::Pom;

const DISTRIBUTION_TOL: f64 = 1e-9;

/// `x log₂ x` with the limit value at 0.
fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
        return Err(Error::InvalidDistribution(format!("entry {x} outside [0, 1]")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// `H = −Σ p log₂ p`.
pub fn shannon_entropy(priors: &[f64]) -> Result<f64> {
    check_distribution(priors)?;
    Ok(-priors.iter().map(|&p| xlog2x(p)).sum::<f64>())
}

/// Conditional outcome probabilities `P(y_j | ψ_k)`; rows are prepared
/// states, columns are outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    probs: Vec<Vec<f64>>,
}

impl ConditionalTable {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = probs.first() else {
            return Err(Error::InvalidDistribution("table has no rows".into()));
        };
        let m = first.len();
        for (k, row) in probs.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidDistribution(format!(
                    "row {k} has {} outcomes, expected {m}",
                    row.len()
                )));
            }
            check_distribution(row)
                .map_err(|e| Error::InvalidDistribution(format!("row {k}: {e}")))?;
        }
        Ok(Self { probs })
    }

    /// Builds the table from `⟨ψ_k|Π_j|ψ_k⟩`.
    pub fn from_measurement(ensemble: &Ensemble, pom: &Pom) -> Result<Self> {
        if pom.dim() != ensemble.dim() {
            return Err(Error::DimensionMismatch { expected: pom.dim(), found: ensemble.dim() });
        }
        let probs = ensemble
            .states()
            .iter()
            .map(|s| pom.probabilities(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    pub fn outcomes(&self) -> usize {
        self.probs[0].len()
    }

    /// `P(y_j) = Σ_k P(y_j|ψ_k) p_k`
    pub fn outcome_marginals(&self, priors: &[f64]) -> Result<Vec<f64>> {
        self.check_priors(priors)?;
        Ok((0..self.outcomes())
            .map(|j| self.probs.iter().zip(priors).map(|(row, p)| row[j] * p).sum())
            .collect())
    }

    fn check_priors(&self, priors: &[f64]) -> Result<()> {
        if priors.len() != self.states() {
            return Err(Error::InvalidDistribution(format!(
                "{} priors for {} table rows",
                priors.len(),
                self.states()
            )));
        }
        check_distribution(priors)
    }
}

/// Bayes posterior `P(ψ_k | y_j)`.
pub fn posterior(table: &ConditionalTable, priors: &[f64], outcome: usize) -> Result<Vec<f64>> {
    if outcome >= table.outcomes() {
        return Err(Error::InvalidArgument(format!(
            "outcome {outcome} out of range for {} outcomes",
            table.outcomes()
        )));
    }
    let marginal = table.outcome_marginals(priors)?[outcome];
    if marginal <= 0.0 {
        return Err(Error::ZeroProbabilityOutcome(outcome));
    }
    Ok(table
        .rows()
        .iter()
        .zip(priors)
        .map(|(row, p)| row[outcome] * p / marginal)
        .collect())
}

/// `H(X|Y) = −Σ_j P(y_j) Σ_k P(ψ_k|y_j) log₂ P(ψ_k|y_j)`.
pub fn conditional_entropy(table: &ConditionalTable, priors: &[f64]) -> Result<f64> {
    let marginals = table.outcome_marginals(priors)?;
    let mut h = 0.0;
    for (j, &py) in marginals.iter().enumerate() {
        if py <= 0.0 {
            continue;
        }
        let post = posterior(table, priors, j)?;
        h -= py * post.iter().map(|&q| xlog2x(q)).sum::<f64>();
    }
    Ok(h.max(0.0))
}

/// Entropy bookkeeping for one (ensemble, measurement) pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiReport {
    pub mutual_info_bits: f64,
    pub entropy_bits: f64,
    pub conditional_entropy_bits: f64,
}

/// Mutual information of a conditional table under the given priors,
/// evaluated as `Σ_jk p_k P(y_j|ψ_k) log₂(P(y_j|ψ_k) / P(y_j))`.
pub fn table_mutual_information(table: &ConditionalTable, priors: &[f64]) -> Result<MiReport> {
    let marginals = table.outcome_marginals(priors)?;
    let mut mi = 0.0;
    for (row, &p) in table.rows().iter().zip(priors) {
        for (&q, &py) in row.iter().zip(&marginals) {
            if p > 0.0 && q > 0.0 {
                mi += p * q * (q / py).log2();
            }
        }
    }
    let entropy = shannon_entropy(priors)?;
    let conditional = conditional_entropy(table, priors)?;
    Ok(MiReport {
        mutual_info_bits: mi.clamp(0.0, entropy),
        entropy_bits: entropy,
        conditional_entropy_bits: conditional,
    })
}

pub fn mutual_information(ensemble: &Ensemble, pom: &Pom) -> Result<MiReport> {
    let table = ConditionalTable::from_measurement(ensemble, pom)?;
    table_mutual_information(&table, ensemble.priors())
}

/// Grid used by [`best_von_neumann_mi`] over the measurement-axis hemisphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    /// Points in azimuth over `[0, 2π]`.
    pub azimuth: usize,
    /// Points in polar angle over `[0, π/2]`.
    pub polar: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self { azimuth: 721, polar: 361 }
    }
}

/// Best two-outcome projective measurement found by [`best_von_neumann_mi`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VonNeumannOptimum {
    pub bits: f64,
    /// Measurement axis on the Poincaré sphere; the two outcomes project
    /// onto the states at `±axis`.
    pub axis: StokesVector,
    /// Polar angle of the axis from `s1`, in `[0, π/2]`.
    pub polar: f64,
    /// Azimuth of the axis in the `s2`–`s3` plane, in `[0, 2π)`.
    pub azimuth: f64,
}

const REFINE_TOL: f64 = 1e-6;
const TIE_TOL: f64 = 1e-12;

/// Maximizes mutual information over all von Neumann measurements on a qubit.
///
/// A deterministic grid scan over the hemisphere of measurement axes is
/// followed by alternating golden-section refinement in polar angle and
/// azimuth, down to 1e-6 rad. Grid ties go to the smallest polar angle, then
/// the smallest azimuth.
pub fn best_von_neumann_mi(ensemble: &Ensemble, grid: SphereGrid) -> Result<VonNeumannOptimum> {
    if ensemble.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ensemble.dim() });
    }
    if grid.azimuth < 2 || grid.polar < 2 {
        return Err(Error::InvalidArgument("sphere grid needs at least 2×2 points".into()));
    }
    let vectors: Vec<StokesVector> = ensemble
        .polarization_states()?
        .iter()
        .map(stokes)
        .collect();
    let priors = ensemble.priors();
    let objective = |polar: f64, azimuth: f64| axis_mi(&vectors, priors, polar, azimuth);

    let d_polar = FRAC_PI_2 / (grid.polar - 1) as f64;
    let d_azimuth = 2.0 * PI / (grid.azimuth - 1) as f64;

    let row_best: Vec<(f64, f64, f64)> = (0..grid.polar)
        .into_par_iter()
        .map(|i| {
            let polar = i as f64 * d_polar;
            let mut best = (f64::NEG_INFINITY, polar, 0.0);
            for j in 0..grid.azimuth {
                let azimuth = j as f64 * d_azimuth;
                let value = objective(polar, azimuth);
                if value > best.0 + TIE_TOL {
                    best = (value, polar, azimuth);
                }
            }
            best
        })
        .collect();
    let mut best = row_best[0];
    for &candidate in &row_best[1..] {
        if candidate.0 > best.0 + TIE_TOL {
            best = candidate;
        }
    }

    let (mut value, mut polar, mut azimuth) = best;
    for _ in 0..100 {
        let (p, vp) = golden_max(|x| objective(x, azimuth), polar - d_polar, polar + d_polar);
        let (a, va) = golden_max(|x| objective(p, x), azimuth - d_azimuth, azimuth + d_azimuth);
        let moved = (p - polar).abs().max((a - azimuth).abs());
        let candidate = vp.max(va);
        if candidate >= value {
            value = candidate;
            polar = p;
            azimuth = a;
        }
        if moved < REFINE_TOL {
            break;
        }
    }

    let (polar, azimuth) = canonical_axis(polar, azimuth);
    Ok(VonNeumannOptimum {
        bits: value,
        axis: StokesVector::from_spherical(polar, azimuth),
        polar,
        azimuth,
    })
}

/// Maps an axis to the equivalent one (same measurement) with polar angle in
/// `[0, π/2]` and azimuth in `[0, 2π)`.
fn canonical_axis(polar: f64, azimuth: f64) -> (f64, f64) {
    let (mut polar, mut azimuth) = (polar, azimuth);
    if polar < 0.0 {
        polar = -polar;
        azimuth += PI;
    }
    if polar > FRAC_PI_2 {
        polar = PI - polar;
        azimuth += PI;
    }
    (polar, azimuth.rem_euclid(2.0 * PI))
}

fn axis_mi(vectors: &[StokesVector], priors: &[f64], polar: f64, azimuth: f64) -> f64 {
    let n = StokesVector::from_spherical(polar, azimuth);
    let mut plus = 0.0;
    let mut conditional = 0.0;
    for (s, &p) in vectors.iter().zip(priors) {
        let q = (0.5 * (1.0 + n.dot(s))).clamp(0.0, 1.0);
        plus += p * q;
        conditional -= p * (xlog2x(q) + xlog2x(1.0 - q));
    }
    let output = -(xlog2x(plus) + xlog2x(1.0 - plus));
    output - conditional
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > REFINE_TOL * 0.1 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Closed-form accessible information of the built-in symmetric ensembles.
pub fn accessible_info_reference(label: &str) -> Result<f64> {
    match label {
        "trine" => Ok((3.0f64 / 2.0).log2()),
        "tetrad" => Ok((4.0f64 / 3.0).log2()),
        other => Err(Error::UnknownLabel(other.to_string())),
    }
}
