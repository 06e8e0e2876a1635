//! Depolarizing detector noise and Monte Carlo error propagation.
//!
//! Noise is described by a single parameter Γ: each POM element becomes
//! `Γ·Π_j + (1−Γ)/N · I`, so every forbidden outcome fires with probability
//! `(1−Γ)/N`.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{table_mutual_information, ConditionalTable};
use crate::linalg::CMatrix;
use crate::pom::Pom;

const ROW_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    gamma: f64,
    outcomes: usize,
}

impl NoiseModel {
    pub fn new(gamma: f64, outcomes: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidGamma(gamma));
        }
        if outcomes < 2 {
            return Err(Error::InvalidArgument(format!("noise model needs at least 2 outcomes, got {outcomes}")));
        }
        Ok(Self { gamma, outcomes })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }
}

/// `Π_j → Γ·Π_j + (1−Γ)/N · I`.
pub fn noisy_pom(pom: &Pom, model: NoiseModel) -> Result<Pom> {
    if pom.len() != model.outcomes {
        return Err(Error::CountMismatch { elements: pom.len(), states: model.outcomes });
    }
    let d = pom.dim();
    let floor = CMatrix::identity(d, d).scale((1.0 - model.gamma) / model.outcomes as f64);
    let matrices = pom
        .elements()
        .iter()
        .map(|e| e.matrix().scale(model.gamma) + &floor)
        .collect();
    Pom::from_matrices(matrices)
}

/// `c · log₂ a` with a vanishing coefficient or argument contributing 0.
fn weighted_log(c: f64, a: f64) -> f64 {
    if c <= 0.0 || a <= 0.0 {
        0.0
    } else {
        c * a.log2()
    }
}

/// Noisy mutual information for a symmetric minimum-error measurement, with
/// a signed noise parameter `g ∈ [−1, 1]`. Positive `g` gives the states
/// expression and negative `g` the antistates expression.
pub fn signed_closed_form(g: f64, outcomes: usize) -> f64 {
    let n = outcomes as f64;
    let hit = (1.0 + g) / n;
    weighted_log(hit, 1.0 + g) + weighted_log(1.0 - hit, 1.0 - g / (n - 1.0))
}

/// Mutual information for the symmetric states read by the noisy
/// minimum-error measurement.
pub fn mi_states(model: NoiseModel) -> f64 {
    signed_closed_form(model.gamma, model.outcomes)
}

/// Mutual information for the antistates read by the same noisy measurement.
/// At Γ = 1 this is `log₂(N/(N−1))`.
pub fn mi_antistates(model: NoiseModel) -> f64 {
    signed_closed_form(-model.gamma, model.outcomes)
}

/// Probability that a given forbidden outcome fires: `(1−Γ)/N`.
pub fn forbidden_rate(model: NoiseModel) -> f64 {
    (1.0 - model.gamma) / model.outcomes as f64
}

/// Inverts [`forbidden_rate`]: `Γ = 1 − N·rate`.
pub fn estimate_gamma(rate: f64, outcomes: usize) -> Result<NoiseModel> {
    if outcomes < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 outcomes, got {outcomes}")));
    }
    if !(0.0..=1.0 / outcomes as f64).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "forbidden rate {rate} outside [0, 1/{outcomes}]"
        )));
    }
    NoiseModel::new((1.0 - outcomes as f64 * rate).clamp(0.0, 1.0), outcomes)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub mi_states: f64,
    pub mi_antistates: f64,
}

/// Both closed forms on `samples` evenly spaced Γ values covering [0, 1].
pub fn gamma_sweep(outcomes: usize, samples: usize) -> Result<Vec<GammaPoint>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("gamma sweep needs at least 2 samples, got {samples}")));
    }
    (0..samples)
        .map(|i| {
            let gamma = if i + 1 == samples { 1.0 } else { i as f64 / (samples - 1) as f64 };
            let model = NoiseModel::new(gamma, outcomes)?;
            Ok(GammaPoint { gamma, mi_states: mi_states(model), mi_antistates: mi_antistates(model) })
        })
        .collect()
}

/// Measured outcome frequencies: one row per input state, one column per
/// detector. Rows are renormalized on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasuredDistribution {
    detectors: Vec<String>,
    probs: Vec<Vec<f64>>,
}

impl MeasuredDistribution {
    pub fn new(detectors: Vec<String>, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no rows".into()));
        }
        let m = detectors.len();
        if m == 0 {
            return Err(Error::InvalidDistribution("no columns".into()));
        }
        let mut rows = Vec::with_capacity(probs.len());
        for (k, row) in probs.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidDistribution(format!(
                    "row {} has {} entries, expected {m}",
                    k + 1,
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::InvalidDistribution(format!(
                    "row {}, column {}: value {} outside [0, 1]",
                    k + 1,
                    j + 1,
                    row[j]
                )));
            }
            rows.push(normalize_row(row).ok_or(Error::DegenerateRow(k))?);
        }
        Ok(Self { detectors, probs: rows })
    }

    /// Unlabelled columns are named `PD1..PDm`.
    pub fn from_rows(probs: Vec<Vec<f64>>) -> Result<Self> {
        let m = probs.first().map_or(0, Vec::len);
        Self::new((1..=m).map(|j| format!("PD{j}")).collect(), probs)
    }

    /// Reads comma-separated values with a header row of detector names.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv(format!("header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut probs = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let row = k + 1;
            let record = record.map_err(|e| Error::Csv(format!("row {row}: {e}")))?;
            if record.len() != headers.len() {
                return Err(Error::Csv(format!(
                    "row {row}: {} fields, expected {}",
                    record.len(),
                    headers.len()
                )));
            }
            let values = record
                .iter()
                .enumerate()
                .map(|(j, field)| {
                    field.parse::<f64>().map_err(|_| {
                        Error::Csv(format!("row {row}, column {} (`{}`): cannot parse `{field}`", j + 1, headers[j]))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            probs.push(values);
        }
        Self::new(headers, probs)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    pub fn to_table(&self) -> Result<ConditionalTable> {
        ConditionalTable::new(self.probs.clone())
    }
}

fn normalize_row(mut row: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return None;
    }
    row.iter_mut().for_each(|x| *x /= total);
    debug_assert!((row.iter().sum::<f64>() - 1.0).abs() < ROW_TOL);
    Some(row)
}

/// Which percentiles bound the Monte Carlo interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercentileBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for PercentileBounds {
    fn default() -> Self {
        Self { lower: 0.16, upper: 0.84 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub half_width: f64,
    pub trials: usize,
    pub seed: u64,
    pub bounds: PercentileBounds,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { half_width: 0.025, trials: 100_000, seed: 0, bounds: PercentileBounds::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Percentile of sorted data by linear interpolation between order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mutual-information uncertainty for a measured table.
///
/// Each trial perturbs every entry by an independent uniform draw in
/// `[−half_width, half_width]`, clamps to [0, 1] and renormalizes rows.
/// Trial `t` draws from the ChaCha stream `t` of `seed`, so the result does
/// not depend on thread scheduling.
pub fn monte_carlo_mi(
    measured: &MeasuredDistribution,
    priors: &[f64],
    config: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    if !(config.half_width >= 0.0 && config.half_width <= 1.0) {
        return Err(Error::InvalidArgument(format!("half width {} outside [0, 1]", config.half_width)));
    }
    if config.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let b = config.bounds;
    if !(0.0 <= b.lower && b.lower <= b.upper && b.upper <= 1.0) {
        return Err(Error::InvalidArgument(format!("percentiles {} / {} are not ordered in [0, 1]", b.lower, b.upper)));
    }
    let point = table_mutual_information(&measured.to_table()?, priors)?.mutual_info_bits;

    let w = config.half_width;
    let mut samples = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(trial);
            let rows = measured
                .rows()
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    let perturbed = row
                        .iter()
                        .map(|&p| (p + rng.random_range(-w..=w)).clamp(0.0, 1.0))
                        .collect();
                    normalize_row(perturbed).ok_or(Error::DegenerateRow(k))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(table_mutual_information(&ConditionalTable::new(rows)?, priors)?.mutual_info_bits)
        })
        .collect::<Result<Vec<f64>>>()?;
    samples.sort_by(f64::total_cmp);

    Ok(MonteCarloReport {
        point,
        lower: percentile(&samples, b.lower),
        upper: percentile(&samples, b.upper),
        trials: config.trials,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{antitrine, trine};
    use crate::infotheory::mutual_information;
    use crate::pom::min_error_pom;

    fn model(g: f64, n: usize) -> NoiseModel {
        NoiseModel::new(g, n).unwrap()
    }

    #[test]
    fn noiseless_and_pure_noise_limits() {
        let pom = min_error_pom(&trine(), 2).unwrap();
        let same = noisy_pom(&pom, model(1.0, 3)).unwrap();
        assert_eq!(same, pom);
        let flat = noisy_pom(&pom, model(0.0, 3)).unwrap();
        for e in flat.elements() {
            let want = CMatrix::identity(2, 2).scale(1.0 / 3.0);
            assert!((e.matrix() - want).norm() < 1e-15);
        }
    }

    #[test]
    fn forbidden_outcome_rate() {
        let pom = noisy_pom(&min_error_pom(&trine(), 2).unwrap(), model(0.952, 3)).unwrap();
        for (j, s) in antitrine().states().iter().enumerate() {
            let p = pom.probabilities(s).unwrap();
            assert!((p[j] - 0.016).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((mi_states(model(1.0, 3)) - 1.0 / 3.0).abs() < 1e-12);
        assert!((mi_antistates(model(1.0, 3)) - 1.5f64.log2()).abs() < 1e-12);
        assert!((mi_antistates(model(1.0, 4)) - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        assert_eq!(mi_states(model(0.0, 4)), 0.0);
        assert_eq!(mi_antistates(model(0.0, 3)), 0.0);
        assert!((mi_states(model(0.952, 3)) - 0.302).abs() < 1e-3);
        assert!((mi_states(model(0.964, 4)) - 0.194).abs() < 1e-3);
        assert!((mi_antistates(model(0.964, 4)) - 0.355).abs() < 2e-3);
    }

    #[test]
    fn closed_form_matches_general_pipeline() {
        let pom = min_error_pom(&trine(), 2).unwrap();
        let m = model(0.7, 3);
        let noisy = noisy_pom(&pom, m).unwrap();
        let a = mutual_information(&trine(), &noisy).unwrap().mutual_info_bits;
        let b = mutual_information(&antitrine(), &noisy).unwrap().mutual_info_bits;
        assert!((a - mi_states(m)).abs() < 1e-12);
        assert!((b - mi_antistates(m)).abs() < 1e-12);
    }

    #[test]
    fn gamma_estimates() {
        assert!((estimate_gamma(0.016, 3).unwrap().gamma() - 0.952).abs() < 1e-12);
        assert!((estimate_gamma(0.009, 4).unwrap().gamma() - 0.964).abs() < 1e-12);
        assert_eq!(estimate_gamma(0.0, 3).unwrap().gamma(), 1.0);
        assert!(estimate_gamma(0.4, 3).is_err());
        assert!(estimate_gamma(-0.1, 3).is_err());
    }

    #[test]
    fn sweep_grid() {
        let pts = gamma_sweep(3, 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].mi_states, 0.0);
        assert_eq!(pts[1].gamma, 1.0);
        assert!(pts[1].mi_antistates > pts[1].mi_states);
        assert!(gamma_sweep(3, 1).is_err());
    }

    #[test]
    fn invalid_models() {
        assert!(matches!(NoiseModel::new(1.2, 3), Err(Error::InvalidGamma(_))));
        assert!(NoiseModel::new(0.5, 1).is_err());
        let pom = min_error_pom(&trine(), 2).unwrap();
        assert!(noisy_pom(&pom, model(0.9, 4)).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let text = "PD1,PD2\n0.5,0.5\n0.2,0.6\n";
        let m = MeasuredDistribution::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(m.detectors(), ["PD1", "PD2"]);
        assert!((m.rows()[1][0] - 0.25).abs() < 1e-15);

        let bad = "PD1,PD2\n0.5,0.5\n0.2,x\n";
        let err = MeasuredDistribution::from_csv_reader(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("column 2"), "{err}");

        let short = "PD1,PD2\n0.5\n";
        assert!(MeasuredDistribution::from_csv_reader(short.as_bytes()).is_err());
        let zero = "PD1,PD2\n0,0\n";
        assert!(MeasuredDistribution::from_csv_reader(zero.as_bytes()).is_err());
    }

    #[test]
    fn percentile_interpolation() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(percentile(&xs, 0.0), 0.0);
        assert_eq!(percentile(&xs, 1.0), 3.0);
        assert!((percentile(&xs, 0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_zero_width() {
        let m = MeasuredDistribution::from_rows(vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]]).unwrap();
        let cfg = MonteCarloConfig { half_width: 0.0, trials: 1, seed: 3, ..Default::default() };
        let r = monte_carlo_mi(&m, &[1.0 / 3.0; 3], &cfg).unwrap();
        assert_eq!(r.point, r.lower);
        assert_eq!(r.point, r.upper);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let m = MeasuredDistribution::from_rows(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap();
        let cfg = MonteCarloConfig { trials: 500, seed: 11, ..Default::default() };
        let a = monte_carlo_mi(&m, &[0.5, 0.5], &cfg).unwrap();
        let b = monte_carlo_mi(&m, &[0.5, 0.5], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.lower <= a.upper);
    }
}
