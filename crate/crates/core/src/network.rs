//! Interferometric networks that realize qubit POMs as projective
//! measurements over extra spatial modes.
//!
//! A network is an ordered list of lossless components acting on a set of
//! named spatial paths, each carrying an `(h, v)` amplitude pair, plus one
//! complex amplitude register per photodetector. The input photon enters on
//! the path named [`INPUT_PATH`]. Splitter coefficients are real: a polarizing
//! splitter transmits `h` and deflects `v`, and the non-polarizing splitter
//! sends `1/√2` to each output with no relative phase.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{antitrine, trine};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::polarization::{half_waveplate, quarter_waveplate, PolarizationOperator, PolarizationState};
use crate::pom::Pom;

pub const INPUT_PATH: &str = "in";
/// Checkpoint name for the end of the network.
pub const FINAL: &str = "F";

const NORM_TOL: f64 = 1e-12;
const RECONSTRUCTION_TOL: f64 = 1e-9;

/// Design angle `α = arcsin(1/√3)`; a half plate at `α/2` scales the `h`
/// amplitude of `|h⟩` by `√(2/3)`.
pub fn design_alpha() -> f64 {
    (1.0 / 3f64.sqrt()).asin()
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plate {
    Half,
    Quarter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    H,
    V,
}

/// One optical element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Component {
    /// Two-port polarizing splitter. `h` from `input` and `v` from `second_input`
    /// leave on `transmit`; `v` from `input` and `h` from `second_input` leave
    /// on `reflect`. With `second_input` absent the second port carries vacuum.
    /// `leakage` is the fraction of `h` intensity sent to the wrong port.
    PolarizingSplitter {
        input: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        second_input: Option<String>,
        transmit: String,
        reflect: String,
        #[serde(default)]
        leakage: f64,
    },
    /// 50/50 splitter with real coefficients: `t = (a + b)/√2`, `r = (a − b)/√2`.
    NonpolarizingSplitter {
        input: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        second_input: Option<String>,
        transmit: String,
        reflect: String,
    },
    Waveplate {
        path: String,
        plate: Plate,
        half_angle: f64,
    },
    /// Multiplies both amplitudes on `path` by `e^{i·phase}`.
    RelativePhase { path: String, phase: f64 },
    /// Moves one polarization component of `path` into a detector register.
    DetectorTap {
        path: String,
        polarization: Polarization,
        detector: String,
    },
}

impl Component {
    fn apply(&self, modes: &mut ModeAmplitudes) -> Result<()> {
        match self {
            Component::PolarizingSplitter { input, second_input, transmit, reflect, leakage } => {
                let (a, b) = modes.take_inputs(input, second_input.as_deref())?;
                let keep = (1.0 - leakage).sqrt();
                let leak = leakage.sqrt();
                let t_h = a[0] * keep - b[0] * leak;
                let r_h = a[0] * leak + b[0] * keep;
                modes.put(transmit, [t_h, b[1]])?;
                modes.put(reflect, [r_h, a[1]])?;
            }
            Component::NonpolarizingSplitter { input, second_input, transmit, reflect } => {
                let (a, b) = modes.take_inputs(input, second_input.as_deref())?;
                let s = FRAC_1_SQRT_2;
                modes.put(transmit, [(a[0] + b[0]) * s, (a[1] + b[1]) * s])?;
                modes.put(reflect, [(a[0] - b[0]) * s, (a[1] - b[1]) * s])?;
            }
            Component::Waveplate { path, plate, half_angle } => {
                let op = plate_operator(*plate, *half_angle);
                let amp = modes.path_mut(path)?;
                let (h, v) = op.apply_amplitudes(amp[0], amp[1]);
                *amp = [h, v];
            }
            Component::RelativePhase { path, phase } => {
                let factor = Complex64::from_polar(1.0, *phase);
                let amp = modes.path_mut(path)?;
                amp[0] *= factor;
                amp[1] *= factor;
            }
            Component::DetectorTap { path, polarization, detector } => {
                let idx = match polarization {
                    Polarization::H => 0,
                    Polarization::V => 1,
                };
                let amp = modes.path_mut(path)?;
                let moved = std::mem::replace(&mut amp[idx], zero());
                if modes.detectors.insert(detector.clone(), moved).is_some() {
                    return Err(Error::InvalidNetwork(format!("detector `{detector}` is fed twice")));
                }
            }
        }
        Ok(())
    }
}

fn plate_operator(plate: Plate, half_angle: f64) -> PolarizationOperator {
    match plate {
        Plate::Half => half_waveplate(half_angle),
        Plate::Quarter => quarter_waveplate(half_angle),
    }
}

/// Amplitudes over named spatial paths and detector registers.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModeAmplitudes {
    pub paths: BTreeMap<String, [Complex64; 2]>,
    pub detectors: BTreeMap<String, Complex64>,
}

impl ModeAmplitudes {
    pub fn input(state: &PolarizationState) -> Self {
        Self::from_amplitudes(state.amp_h(), state.amp_v())
    }

    /// Input amplitudes without the normalization requirement; used to check linearity.
    pub fn from_amplitudes(h: Complex64, v: Complex64) -> Self {
        let mut paths = BTreeMap::new();
        paths.insert(INPUT_PATH.to_string(), [h, v]);
        Self { paths, detectors: BTreeMap::new() }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.paths.values().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).sum::<f64>()
            + self.detectors.values().map(|d| d.norm_sqr()).sum::<f64>()
    }

    pub fn path(&self, name: &str) -> [Complex64; 2] {
        self.paths.get(name).copied().unwrap_or([zero(), zero()])
    }

    pub fn detector(&self, name: &str) -> Complex64 {
        self.detectors.get(name).copied().unwrap_or_else(zero)
    }

    /// Squared norm still travelling in spatial paths.
    pub fn residual_in_paths(&self) -> f64 {
        self.paths.values().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).sum()
    }

    fn path_mut(&mut self, name: &str) -> Result<&mut [Complex64; 2]> {
        self.paths
            .get_mut(name)
            .ok_or_else(|| Error::InvalidNetwork(format!("no amplitude on path `{name}`")))
    }

    fn take_inputs(
        &mut self,
        first: &str,
        second: Option<&str>,
    ) -> Result<([Complex64; 2], [Complex64; 2])> {
        let a = self
            .paths
            .remove(first)
            .ok_or_else(|| Error::InvalidNetwork(format!("no amplitude on path `{first}`")))?;
        let b = match second {
            Some(name) => self
                .paths
                .remove(name)
                .ok_or_else(|| Error::InvalidNetwork(format!("no amplitude on path `{name}`")))?,
            None => [zero(), zero()],
        };
        Ok((a, b))
    }

    fn put(&mut self, name: &str, amp: [Complex64; 2]) -> Result<()> {
        if self.paths.insert(name.to_string(), amp).is_some() {
            return Err(Error::InvalidNetwork(format!("path `{name}` is already occupied")));
        }
        Ok(())
    }
}

/// Named stage boundary: the snapshot after `after` components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub name: String,
    pub after: usize,
}

/// An ordered list of components with named checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr", into = "NetworkRepr")]
pub struct OpticalNetwork {
    label: String,
    detectors: Vec<String>,
    stages: Vec<Component>,
    checkpoints: Vec<Checkpoint>,
}

#[derive(Serialize, Deserialize)]
struct NetworkRepr {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detectors: Option<Vec<String>>,
    stages: Vec<Component>,
    #[serde(default)]
    checkpoints: Vec<Checkpoint>,
}

impl TryFrom<NetworkRepr> for OpticalNetwork {
    type Error = Error;

    fn try_from(r: NetworkRepr) -> Result<Self> {
        OpticalNetwork::new(r.label, r.stages, r.checkpoints, r.detectors)
    }
}

impl From<OpticalNetwork> for NetworkRepr {
    fn from(n: OpticalNetwork) -> Self {
        NetworkRepr {
            label: n.label,
            detectors: Some(n.detectors),
            stages: n.stages,
            checkpoints: n.checkpoints,
        }
    }
}

impl OpticalNetwork {
    /// Validates the component wiring by propagating a test photon.
    /// `detectors` fixes the outcome order; when absent, detector labels in
    /// sorted order are used.
    pub fn new(
        label: impl Into<String>,
        stages: Vec<Component>,
        checkpoints: Vec<Checkpoint>,
        detectors: Option<Vec<String>>,
    ) -> Result<Self> {
        for cp in &checkpoints {
            if cp.after > stages.len() {
                return Err(Error::InvalidNetwork(format!(
                    "checkpoint `{}` after stage {} of {}",
                    cp.name,
                    cp.after,
                    stages.len()
                )));
            }
        }
        for stage in &stages {
            if let Component::PolarizingSplitter { leakage, .. } = stage {
                if !(0.0..=1.0).contains(leakage) {
                    return Err(Error::InvalidNetwork(format!("leakage {leakage} outside [0, 1]")));
                }
            }
        }
        let mut network = Self {
            label: label.into(),
            detectors: Vec::new(),
            stages,
            checkpoints,
        };
        let probe = network.run(&ModeAmplitudes::input(&PolarizationState::horizontal()), usize::MAX)?;
        let fed: Vec<String> = probe.detectors.keys().cloned().collect();
        network.detectors = match detectors {
            Some(order) => {
                let mut sorted = order.clone();
                sorted.sort();
                if sorted != fed {
                    return Err(Error::InvalidNetwork(format!(
                        "declared detectors {order:?} do not match fed detectors {fed:?}"
                    )));
                }
                order
            }
            None => fed,
        };
        if network.detectors.is_empty() {
            return Err(Error::InvalidNetwork("network has no detectors".into()));
        }
        Ok(network)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn stages(&self) -> &[Component] {
        &self.stages
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }

    fn run(&self, start: &ModeAmplitudes, upto: usize) -> Result<ModeAmplitudes> {
        let mut modes = start.clone();
        for stage in self.stages.iter().take(upto) {
            stage.apply(&mut modes)?;
        }
        Ok(modes)
    }

    fn checkpoint_index(&self, name: &str) -> Result<usize> {
        if name == FINAL {
            return Ok(self.stages.len());
        }
        self.checkpoints
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.after)
            .ok_or_else(|| Error::UnknownCheckpoint(name.to_string()))
    }

    /// Runs unnormalized input amplitudes up to a checkpoint.
    pub fn propagate_amplitudes(&self, start: &ModeAmplitudes, upto: &str) -> Result<ModeAmplitudes> {
        self.run(start, self.checkpoint_index(upto)?)
    }
}

/// Amplitudes at checkpoint `upto` (`"F"` is the end of the network).
pub fn propagate(network: &OpticalNetwork, input: &PolarizationState, upto: &str) -> Result<ModeAmplitudes> {
    let out = network.propagate_amplitudes(&ModeAmplitudes::input(input), upto)?;
    let norm = out.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidNetwork(format!("propagation is not lossless (norm² {norm})")));
    }
    Ok(out)
}

/// Detector click probabilities, in the network's detector order.
pub fn detection_distribution(network: &OpticalNetwork, input: &PolarizationState) -> Result<Vec<f64>> {
    let out = propagate(network, input, FINAL)?;
    Ok(network
        .detectors
        .iter()
        .map(|d| out.detector(d).norm_sqr())
        .collect())
}

/// Reconstructs the POM a network implements on its input qubit.
///
/// Each element is recovered from click probabilities for `|h⟩`, `|v⟩`,
/// `(|h⟩+|v⟩)/√2` and `(|h⟩+i|v⟩)/√2`. The reconstruction is then checked
/// against the propagated probabilities of two further states and against
/// amplitude left in the spatial paths; a residual above 1e-9 is an error.
pub fn effective_pom(network: &OpticalNetwork) -> Result<Pom> {
    let s = FRAC_1_SQRT_2;
    let probes = [
        PolarizationState::horizontal(),
        PolarizationState::vertical(),
        PolarizationState::new(Complex64::new(s, 0.0), Complex64::new(s, 0.0))?,
        PolarizationState::new(Complex64::new(s, 0.0), Complex64::new(0.0, s))?,
    ];
    let mut residual = 0.0_f64;
    let mut dists = Vec::with_capacity(probes.len());
    for probe in &probes {
        let out = network.propagate_amplitudes(&ModeAmplitudes::input(probe), FINAL)?;
        residual = residual.max(out.residual_in_paths());
        dists.push(
            network
                .detectors
                .iter()
                .map(|d| out.detector(d).norm_sqr())
                .collect::<Vec<f64>>(),
        );
    }

    let matrices: Vec<CMatrix> = (0..network.detectors.len())
        .map(|j| {
            let (ph, pv, pd, pr) = (dists[0][j], dists[1][j], dists[2][j], dists[3][j]);
            let half_trace = 0.5 * (ph + pv);
            let off = Complex64::new(pd - half_trace, half_trace - pr);
            CMatrix::from_row_slice(
                2,
                2,
                &[Complex64::new(ph, 0.0), off, off.conj(), Complex64::new(pv, 0.0)],
            )
        })
        .collect();

    for check in [PolarizationState::from_angles(0.3, 1.1), PolarizationState::from_angles(1.2, -2.3)] {
        let out = network.propagate_amplitudes(&ModeAmplitudes::input(&check), FINAL)?;
        residual = residual.max(out.residual_in_paths());
        let psi = check.to_vector();
        for (m, d) in matrices.iter().zip(&network.detectors) {
            let predicted = psi.dotc(&(m * &psi)).re;
            residual = residual.max((predicted - out.detector(d).norm_sqr()).abs());
        }
    }
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::Reconstruction(residual));
    }
    Pom::from_matrices(matrices)
}

fn s(x: &str) -> String {
    x.to_string()
}

fn checkpoints(list: &[(&str, usize)]) -> Vec<Checkpoint> {
    list.iter()
        .map(|&(name, after)| Checkpoint { name: s(name), after })
        .collect()
}

fn detectors(n: usize) -> Option<Vec<String>> {
    Some((1..=n).map(|k| format!("PD{k}")).collect())
}

/// Minimum-error network for the trine, with WP5 at `wp5_half_angle`.
///
/// PBS1 splits `h` into the upper arm U and `v` into the lower arm L; WP5
/// rotates the upper-arm photon; PBS2 taps `h_U` to PD3; WP6 turns `v_L`
/// into `h_L`; the arms recombine on PBS4 and WP9 (half plate at π/8) mixes
/// before PBS6 sends `h` to PD1 and `v` to PD2. With real splitter
/// coefficients the arm phase reproducing the CC-stage amplitudes is zero.
pub fn trine_network_with_wp5(wp5_half_angle: f64) -> OpticalNetwork {
    let stages = vec![
        Component::PolarizingSplitter {
            input: s(INPUT_PATH),
            second_input: None,
            transmit: s("U"),
            reflect: s("L"),
            leakage: 0.0,
        },
        Component::Waveplate { path: s("U"), plate: Plate::Half, half_angle: wp5_half_angle },
        // AA
        Component::DetectorTap { path: s("U"), polarization: Polarization::H, detector: s("PD3") },
        Component::Waveplate { path: s("L"), plate: Plate::Half, half_angle: FRAC_PI_4 },
        // BB
        Component::RelativePhase { path: s("U"), phase: 0.0 },
        Component::PolarizingSplitter {
            input: s("L"),
            second_input: Some(s("U")),
            transmit: s("O"),
            reflect: s("X"),
            leakage: 0.0,
        },
        Component::Waveplate { path: s("O"), plate: Plate::Half, half_angle: FRAC_PI_8 },
        // CC
        Component::DetectorTap { path: s("O"), polarization: Polarization::H, detector: s("PD1") },
        Component::DetectorTap { path: s("O"), polarization: Polarization::V, detector: s("PD2") },
    ];
    OpticalNetwork::new(
        "trine",
        stages,
        checkpoints(&[("AA", 2), ("BB", 4), ("CC", 7)]),
        detectors(3),
    )
    .expect("built-in trine network is valid")
}

pub fn trine_network() -> OpticalNetwork {
    trine_network_with_wp5(design_alpha() / 2.0)
}

/// Minimum-error network for the tetrad.
///
/// A 50/50 non-polarizing splitter feeds L (unchanged) and U; WP5 at
/// `π/4 + α/2` on U swaps tetrad states pairwise; `h_U` and `h_L` are tapped
/// to PD3 and PD4; WP6 turns `v_L` into `h_L`; after recombination a quarter
/// plate at π/4 with a `π/2` phase on the output mode mixes the arms before
/// the final split to PD1 (`h`) and PD2 (`v`).
pub fn tetrad_network() -> OpticalNetwork {
    let stages = vec![
        Component::NonpolarizingSplitter {
            input: s(INPUT_PATH),
            second_input: None,
            transmit: s("L"),
            reflect: s("U"),
        },
        Component::Waveplate {
            path: s("U"),
            plate: Plate::Half,
            half_angle: FRAC_PI_4 + design_alpha() / 2.0,
        },
        // AA
        Component::DetectorTap { path: s("U"), polarization: Polarization::H, detector: s("PD3") },
        Component::DetectorTap { path: s("L"), polarization: Polarization::H, detector: s("PD4") },
        Component::Waveplate { path: s("L"), plate: Plate::Half, half_angle: FRAC_PI_4 },
        // BB
        Component::PolarizingSplitter {
            input: s("L"),
            second_input: Some(s("U")),
            transmit: s("O"),
            reflect: s("X"),
            leakage: 0.0,
        },
        Component::Waveplate { path: s("O"), plate: Plate::Quarter, half_angle: FRAC_PI_4 },
        Component::RelativePhase { path: s("O"), phase: FRAC_PI_2 },
        // CC
        Component::DetectorTap { path: s("O"), polarization: Polarization::H, detector: s("PD1") },
        Component::DetectorTap { path: s("O"), polarization: Polarization::V, detector: s("PD2") },
    ];
    OpticalNetwork::new(
        "tetrad",
        stages,
        checkpoints(&[("AA", 2), ("BB", 5), ("CC", 8)]),
        detectors(4),
    )
    .expect("built-in tetrad network is valid")
}

/// A single polarizing splitter feeding two detectors: `h` → PD1, `v` → PD2.
pub fn bare_splitter_network() -> OpticalNetwork {
    let stages = vec![
        Component::DetectorTap { path: s(INPUT_PATH), polarization: Polarization::H, detector: s("PD1") },
        Component::DetectorTap { path: s(INPUT_PATH), polarization: Polarization::V, detector: s("PD2") },
    ];
    OpticalNetwork::new("splitter", stages, Vec::new(), detectors(2)).expect("valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Trine,
    Tetrad,
}

impl NetworkKind {
    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "trine" => Ok(Self::Trine),
            "tetrad" => Ok(Self::Tetrad),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }

    pub fn build(self) -> OpticalNetwork {
        match self {
            Self::Trine => trine_network(),
            Self::Tetrad => tetrad_network(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub half_angle: f64,
    pub rms_deviation: f64,
}

/// RMS deviation of the 18 trine and antitrine click probabilities from their
/// ideal values, for each WP5 mount angle.
pub fn wp5_sweep(kind: NetworkKind, half_angles: &[f64]) -> Result<Vec<SweepPoint>> {
    if kind != NetworkKind::Trine {
        return Err(Error::InvalidArgument("the WP5 sweep is defined for the trine network".into()));
    }
    let states = trine().polarization_states()?;
    let antistates = antitrine().polarization_states()?;
    half_angles
        .par_iter()
        .map(|&angle| {
            let network = trine_network_with_wp5(angle);
            let mut sum_sq = 0.0;
            let mut count = 0usize;
            for k in 0..3 {
                let got = detection_distribution(&network, &states[k])?;
                for (j, p) in got.iter().enumerate() {
                    let ideal = if j == k { 2.0 / 3.0 } else { 1.0 / 6.0 };
                    sum_sq += (p - ideal).powi(2);
                    count += 1;
                }
                let got = detection_distribution(&network, &antistates[k])?;
                for (j, p) in got.iter().enumerate() {
                    let ideal = if j == k { 0.0 } else { 0.5 };
                    sum_sq += (p - ideal).powi(2);
                    count += 1;
                }
            }
            Ok(SweepPoint { half_angle: angle, rms_deviation: (sum_sq / count as f64).sqrt() })
        })
        .collect()
}
