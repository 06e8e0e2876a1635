use std::path::Path;

use pom_core::ensembles::{self, verify_overcomplete, Ensemble, BUILTIN_LABELS};
use pom_core::infotheory::{best_von_neumann_mi, mutual_information, SphereGrid};
use pom_core::network::{
    bare_splitter_network, design_alpha, detection_distribution, effective_pom, wp5_sweep, NetworkKind,
    OpticalNetwork,
};
use pom_core::noise::{
    gamma_sweep, mi_antistates, mi_states, monte_carlo_mi, MeasuredDistribution, MonteCarloConfig, NoiseModel,
    PercentileBounds,
};
use pom_core::polarization::prepare_state;
use pom_core::pom::{check_optimality, min_error_pom, Pom, DEFAULT_OPTIMALITY_TOL};
use serde::Serialize;

use crate::output::{emit, Cell, Format, Table};
use crate::{CliError, Settings};

const DEFAULT_GAMMA_TRINE: f64 = 0.952;
const DEFAULT_GAMMA_TETRAD: f64 = 0.964;
const ROW_SUM_TOL: f64 = 1e-9;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new(format!("invalid-{what}"), format!("{}: {e}", path.display())))
}

fn load_ensemble(source: &str) -> Result<Ensemble, CliError> {
    if BUILTIN_LABELS.contains(&source) {
        return Ok(ensembles::builtin(source)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::new(
            "unknown-label",
            format!("`{source}` is neither a built-in ensemble ({}) nor a file", BUILTIN_LABELS.join(", ")),
        ));
    }
    read_json(path, "ensemble")
}

fn load_network(source: &str) -> Result<OpticalNetwork, CliError> {
    match source {
        "trine" => Ok(NetworkKind::Trine.build()),
        "tetrad" => Ok(NetworkKind::Tetrad.build()),
        "splitter" => Ok(bare_splitter_network()),
        other => {
            let path = Path::new(other);
            if !path.exists() {
                return Err(CliError::new(
                    "unknown-label",
                    format!("`{other}` is neither a built-in network (trine, tetrad, splitter) nor a file"),
                ));
            }
            read_json(path, "network")
        }
    }
}

/// Measurement family of a built-in ensemble label.
fn family(label: &str) -> Option<&'static str> {
    match label {
        "trine" | "antitrine" => Some("trine"),
        "tetrad" | "antitetrad" => Some("tetrad"),
        _ => None,
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(CliError::new("invalid-argument", format!("--{name} {x} outside [0, 1]")))
    }
}

#[derive(Serialize)]
struct RatioRow {
    state: usize,
    probabilities: Vec<f64>,
}

#[derive(Serialize)]
struct RatiosReport {
    ensemble: String,
    network: String,
    detectors: Vec<String>,
    rows: Vec<RatioRow>,
}

pub fn ratios(s: &Settings) -> Result<(), CliError> {
    let ensemble_src = s.ensemble.as_deref().unwrap_or("trine");
    let ensemble = load_ensemble(ensemble_src)?;
    let network_src = match (&s.network, family(ensemble_src)) {
        (Some(n), _) => n.as_str(),
        (None, Some(f)) => f,
        (None, None) => {
            return Err(CliError::new("invalid-argument", "a custom ensemble needs --network"));
        }
    };
    let network = load_network(network_src)?;
    let states = ensemble.polarization_states()?;

    let mut header = vec!["state"];
    header.extend(network.detectors().iter().map(String::as_str));
    let mut table = Table::new(&header);
    let mut rows = Vec::with_capacity(states.len());
    for (k, psi) in states.iter().enumerate() {
        let p = detection_distribution(&network, psi)?;
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(CliError::new("invalid-network", format!("state {} probabilities sum to {total}", k + 1)));
        }
        let mut row: Vec<Cell> = vec![(k + 1).into()];
        row.extend(p.iter().map(|&x| Cell::from(x)));
        table.push(row);
        rows.push(RatioRow { state: k + 1, probabilities: p });
    }
    let report = RatiosReport {
        ensemble: ensemble.label().to_string(),
        network: network.label().to_string(),
        detectors: network.detectors().to_vec(),
        rows,
    };
    emit(&table, &report, s.format.unwrap_or(Format::Csv), s.out())
}

#[derive(Serialize)]
struct MiRow {
    states: String,
    gamma: f64,
    ideal: f64,
    noisy: f64,
    von_neumann: f64,
}

#[derive(Serialize)]
struct MiTableReport {
    rows: Vec<MiRow>,
}

pub fn mi_table(s: &Settings) -> Result<(), CliError> {
    let gamma_trine = check_unit_interval("gamma-trine", s.gamma_trine.or(s.gamma).unwrap_or(DEFAULT_GAMMA_TRINE))?;
    let gamma_tetrad = check_unit_interval("gamma-tetrad", s.gamma_tetrad.or(s.gamma).unwrap_or(DEFAULT_GAMMA_TETRAD))?;
    let mut table = Table::new(&["states", "gamma", "ideal", "noisy", "von_neumann"]);
    let mut rows = Vec::new();
    for (fam, anti, gamma) in [("trine", "antitrine", gamma_trine), ("tetrad", "antitetrad", gamma_tetrad)] {
        let signal = ensembles::builtin(fam)?;
        let pom = min_error_pom(&signal, 2)?;
        let model = NoiseModel::new(gamma, signal.len())?;
        for (label, noisy) in [(fam, mi_states(model)), (anti, mi_antistates(model))] {
            let e = ensembles::builtin(label)?;
            let ideal = mutual_information(&e, &pom)?.mutual_info_bits;
            let von_neumann = best_von_neumann_mi(&e, SphereGrid::default())?.bits;
            table.push(vec![label.into(), gamma.into(), ideal.into(), noisy.into(), von_neumann.into()]);
            rows.push(MiRow { states: label.to_string(), gamma, ideal, noisy, von_neumann });
        }
    }
    // Table order: trine, antitrine, tetrad, antitetrad.
    emit(&table, &MiTableReport { rows }, s.format.unwrap_or(Format::Csv), s.out())
}

fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::new("invalid-argument", format!("--range `{text}` is not lo:hi:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !lo.is_finite() || !hi.is_finite() || !step.is_finite() || step <= 0.0 || hi < lo {
        return Err(CliError::new("invalid-argument", format!("--range `{text}` needs lo <= hi and step > 0")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

#[derive(Serialize)]
struct Wp5Row {
    offset_deg: f64,
    half_angle_deg: f64,
    rms_deviation: f64,
}

#[derive(Serialize)]
struct Wp5Report {
    sweep: &'static str,
    design_half_angle_deg: f64,
    points: Vec<Wp5Row>,
}

#[derive(Serialize)]
struct GammaReport {
    sweep: &'static str,
    outcomes: usize,
    points: Vec<pom_core::noise::GammaPoint>,
}

pub fn sweep(s: &Settings) -> Result<(), CliError> {
    let format = s.format.unwrap_or(Format::Csv);
    match s.sweep.as_deref() {
        Some("wp5") => {
            let offsets = parse_range(s.range.as_deref().unwrap_or("-10:10:0.5"))?;
            let center = design_alpha() / 2.0;
            let angles: Vec<f64> = offsets.iter().map(|d| center + d.to_radians()).collect();
            let pts = wp5_sweep(NetworkKind::Trine, &angles)?;
            let mut table = Table::new(&["offset_deg", "half_angle_deg", "rms_deviation"]);
            let mut rows = Vec::with_capacity(pts.len());
            for (offset, p) in offsets.iter().zip(&pts) {
                let deg = p.half_angle.to_degrees();
                table.push(vec![(*offset).into(), deg.into(), p.rms_deviation.into()]);
                rows.push(Wp5Row { offset_deg: *offset, half_angle_deg: deg, rms_deviation: p.rms_deviation });
            }
            let report = Wp5Report { sweep: "wp5", design_half_angle_deg: center.to_degrees(), points: rows };
            emit(&table, &report, format, s.out())
        }
        Some("gamma") => {
            let outcomes = match s.outcomes {
                Some(n) => n,
                None => load_ensemble(s.ensemble.as_deref().unwrap_or("trine"))?.len(),
            };
            let pts = gamma_sweep(outcomes, s.samples.unwrap_or(101))?;
            let mut table = Table::new(&["gamma", "mi_states", "mi_antistates"]);
            for p in &pts {
                table.push(vec![p.gamma.into(), p.mi_states.into(), p.mi_antistates.into()]);
            }
            emit(&table, &GammaReport { sweep: "gamma", outcomes, points: pts }, format, s.out())
        }
        Some(other) => Err(CliError::new("invalid-argument", format!("unknown sweep kind `{other}` (expected wp5 or gamma)"))),
        None => Err(CliError::new("invalid-argument", "--sweep wp5|gamma is required")),
    }
}

pub fn montecarlo(s: &Settings) -> Result<(), CliError> {
    let Some(input) = &s.input else {
        return Err(CliError::new("invalid-argument", "--input <CSV> is required"));
    };
    let measured = MeasuredDistribution::from_csv_path(input)?;
    let n = measured.states();
    let priors = vec![1.0 / n as f64; n];
    let defaults = MonteCarloConfig::default();
    let bounds = PercentileBounds {
        lower: s.lower_percentile.unwrap_or(defaults.bounds.lower),
        upper: s.upper_percentile.unwrap_or(defaults.bounds.upper),
    };
    let config = MonteCarloConfig {
        half_width: s.half_width.unwrap_or(defaults.half_width),
        trials: s.trials.unwrap_or(defaults.trials),
        seed: s.seed.unwrap_or(defaults.seed),
        bounds,
    };
    let report = monte_carlo_mi(&measured, &priors, &config)?;
    let mut table = Table::new(&["point", "lower", "upper", "trials", "seed"]);
    table.push(vec![report.point.into(), report.lower.into(), report.upper.into(), report.trials.into(), report.seed.into()]);
    emit(&table, &report, s.format.unwrap_or(Format::Json), s.out())
}

#[derive(Serialize)]
struct Check {
    check: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct ValidateReport {
    checks: Vec<Check>,
}

pub fn validate(s: &Settings) -> Result<(), CliError> {
    if s.ensemble.is_none() && s.pom.is_none() && s.network.is_none() {
        return Err(CliError::new("invalid-argument", "give at least one of --ensemble, --pom, --network"));
    }
    let mut checks = Vec::new();
    let mut record = |check: &str, passed: bool, detail: String| {
        checks.push(Check { check: check.to_string(), passed, detail });
    };

    let ensemble = s.ensemble.as_deref().map(load_ensemble).transpose()?;
    let pom: Option<Pom> = s.pom.as_deref().map(|p| read_json(p, "pom")).transpose()?;
    let network = s.network.as_deref().map(load_network).transpose()?;

    if let Some(e) = &ensemble {
        record("ensemble", true, format!("{} states of dimension {}", e.len(), e.dim()));
        let over = verify_overcomplete(e, e.dim())?;
        record("overcomplete", over, format!("(D/N) sum of projectors {} identity", if over { "equals" } else { "differs from" }));
        if pom.is_none() && network.is_none() && over && e.has_uniform_priors() {
            let optimal = check_optimality(&min_error_pom(e, e.dim())?, e, DEFAULT_OPTIMALITY_TOL)?;
            record("min-error-optimal", optimal, "weighted projectors onto the states".into());
        }
    }
    if let Some(p) = &pom {
        record("pom", true, format!("{} elements of dimension {}, complete", p.len(), p.dim()));
    }
    let mut measured = pom.clone();
    if let Some(n) = &network {
        let reconstructed = effective_pom(n)?;
        record(
            "network",
            true,
            format!("{} detectors, reconstructed POM with {} elements", n.detectors().len(), reconstructed.len()),
        );
        if measured.is_none() {
            measured = Some(reconstructed);
        }
    }
    if let (Some(e), Some(p)) = (&ensemble, &measured) {
        if e.len() == p.len() && e.dim() == p.dim() {
            let optimal = check_optimality(p, e, DEFAULT_OPTIMALITY_TOL)?;
            record("optimal", optimal, format!("minimum-error conditions at tol {DEFAULT_OPTIMALITY_TOL:e}"));
        } else {
            record("optimal", false, format!("{} elements for {} states", p.len(), e.len()));
        }
    }

    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.check.clone()).collect();
    let mut table = Table::new(&["check", "passed", "detail"]);
    for c in &checks {
        table.push(vec![c.check.clone().into(), c.passed.into(), c.detail.clone().into()]);
    }
    emit(&table, &ValidateReport { checks }, s.format.unwrap_or(Format::Csv), s.out())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new("validation", format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct PrepareReport {
    beta: f64,
    phase: f64,
    wp2: f64,
    wp3: f64,
    wp4: f64,
    theta: f64,
    phi: f64,
    fidelity: f64,
}

pub fn prepare(s: &Settings) -> Result<(), CliError> {
    let (Some(beta), Some(phase)) = (s.beta, s.phase) else {
        return Err(CliError::new("invalid-argument", "--beta and --phase are required"));
    };
    let (beta, phase) = if s.degrees { (beta.to_radians(), phase.to_radians()) } else { (beta, phase) };
    let seq = prepare_state(beta, phase)?;
    let mut table = Table::new(&["plate", "kind", "half_angle_rad", "half_angle_deg"]);
    for (name, kind, angle) in [("WP2", "quarter", seq.wp2), ("WP3", "half", seq.wp3), ("WP4", "quarter", seq.wp4)] {
        table.push(vec![name.into(), kind.into(), angle.into(), angle.to_degrees().into()]);
    }
    let report = PrepareReport {
        beta,
        phase,
        wp2: seq.wp2,
        wp3: seq.wp3,
        wp4: seq.wp4,
        theta: seq.theta,
        phi: seq.phi,
        fidelity: seq.fidelity,
    };
    emit(&table, &report, s.format.unwrap_or(Format::Csv), s.out())
}
