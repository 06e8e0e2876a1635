//! Jones calculus for a single photon polarization qubit.
//!
//! States are amplitude pairs over the horizontal/vertical basis. Waveplate
//! constructors take the physical mount angle of the fast axis (measured
//! anticlockwise from horizontal, looking along the beam); the Jones matrix
//! is written in terms of the doubled angle.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::StateVector;

const NORM_TOL: f64 = 1e-12;
/// Relative slack accepted when reading hand-written amplitudes from JSON.
const INPUT_NORM_TOL: f64 = 1e-6;
/// Fidelity bound the waveplate sequence returned by [`prepare_state`] must meet.
pub const PREPARE_FIDELITY: f64 = 1.0 - 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pure polarization state `amp_h |h⟩ + amp_v |v⟩`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct PolarizationState {
    h: Complex64,
    v: Complex64,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    h: [f64; 2],
    v: [f64; 2],
}

impl TryFrom<StateRepr> for PolarizationState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        let h = Complex64::new(r.h[0], r.h[1]);
        let v = Complex64::new(r.v[0], r.v[1]);
        let norm_sqr = h.norm_sqr() + v.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have squared norm {norm_sqr}, expected 1"
            )));
        }
        PolarizationState::normalize(h, v)
    }
}

impl From<PolarizationState> for StateRepr {
    fn from(s: PolarizationState) -> Self {
        StateRepr {
            h: [s.h.re, s.h.im],
            v: [s.v.re, s.v.im],
        }
    }
}

impl PolarizationState {
    /// Builds a state from amplitudes that are already normalized to 1e-12.
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let norm_sqr = h.norm_sqr() + v.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have squared norm {norm_sqr}, expected 1"
            )));
        }
        Ok(Self { h, v })
    }

    /// Builds a state by rescaling any nonzero amplitude pair.
    pub fn normalize(h: Complex64, v: Complex64) -> Result<Self> {
        let n = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidState("zero or non-finite amplitudes".into()));
        }
        Ok(Self { h: h / n, v: v / n })
    }

    pub fn horizontal() -> Self {
        Self { h: c(1.0), v: c(0.0) }
    }

    pub fn vertical() -> Self {
        Self { h: c(0.0), v: c(1.0) }
    }

    /// `cos β |h⟩ + e^{iγ} sin β |v⟩`
    pub fn from_angles(beta: f64, gamma: f64) -> Self {
        Self {
            h: c(beta.cos()),
            v: Complex64::from_polar(beta.sin(), gamma),
        }
    }

    pub fn from_vector(v: &StateVector) -> Result<Self> {
        if v.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: v.len() });
        }
        Self::new(v[0], v[1])
    }

    pub fn amp_h(&self) -> Complex64 {
        self.h
    }

    pub fn amp_v(&self) -> Complex64 {
        self.v
    }

    pub fn to_vector(&self) -> StateVector {
        DVector::from_vec(vec![self.h, self.v])
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// The state orthogonal to this one, `-v*|h⟩ + h*|v⟩`.
    pub fn orthogonal(&self) -> Self {
        Self {
            h: -self.v.conj(),
            v: self.h.conj(),
        }
    }

    /// Representative with the first nonzero amplitude real and positive.
    pub fn canonical(&self) -> Self {
        let lead = if self.h.norm() > 1e-15 { self.h } else { self.v };
        let phase = lead.conj() / lead.norm();
        Self {
            h: self.h * phase,
            v: self.v * phase,
        }
    }

    /// Equality up to a global phase: after aligning `other`'s phase to this
    /// state, both amplitudes agree to `tol`.
    pub fn eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        let overlap = other.inner(self);
        if overlap.norm() < 1e-300 {
            return false;
        }
        let phase = overlap / overlap.norm();
        (self.h - other.h * phase).norm() <= tol && (self.v - other.v * phase).norm() <= tol
    }

    pub fn stokes(&self) -> StokesVector {
        stokes(self)
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6})|h⟩ + ({:.6})|v⟩", self.h, self.v)
    }
}

/// 2×2 Jones matrix acting on `(h, v)` amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationOperator {
    entries: Matrix2<Complex64>,
}

impl PolarizationOperator {
    pub fn new(entries: Matrix2<Complex64>) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        Self::new(Matrix2::identity())
    }

    pub fn entries(&self) -> &Matrix2<Complex64> {
        &self.entries
    }

    pub fn apply_amplitudes(&self, h: Complex64, v: Complex64) -> (Complex64, Complex64) {
        let m = &self.entries;
        (m[(0, 0)] * h + m[(0, 1)] * v, m[(1, 0)] * h + m[(1, 1)] * v)
    }

    /// Applies the operator; the result is renormalized, which is exact for unitaries.
    pub fn apply(&self, state: &PolarizationState) -> PolarizationState {
        let (h, v) = self.apply_amplitudes(state.h, state.v);
        PolarizationState::normalize(h, v).unwrap_or(*state)
    }

    /// Operator for `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self::new(next.entries * self.entries)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.entries.adjoint())
    }

    pub fn determinant(&self) -> Complex64 {
        self.entries.determinant()
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.entries.adjoint() * self.entries - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Matrix equality up to a single global phase.
    pub fn eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        let (a, b) = (&self.entries, &other.entries);
        let Some((idx, _)) = a
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        else {
            return false;
        };
        if b[idx].norm() < 1e-15 {
            return false;
        }
        let phase = a[idx] / b[idx];
        let phase = phase / phase.norm();
        a.iter().zip(b.iter()).all(|(x, y)| (x - y * phase).norm() <= tol)
    }
}

/// Half waveplate with its fast axis at `half_angle` from horizontal.
pub fn half_waveplate(half_angle: f64) -> PolarizationOperator {
    let phi = 2.0 * (half_angle % PI);
    let (s, co) = phi.sin_cos();
    PolarizationOperator::new(Matrix2::new(c(co), c(s), c(s), c(-co)))
}

/// Quarter waveplate with its fast axis at `half_angle` from horizontal.
/// The overall phase `e^{i3π/4}` is dropped.
pub fn quarter_waveplate(half_angle: f64) -> PolarizationOperator {
    let theta = 2.0 * (half_angle % PI);
    let (s, co) = theta.sin_cos();
    let i = Complex64::i();
    PolarizationOperator::new(
        Matrix2::new(c(co) - i, c(s), c(s), c(-co) - i).map(|z| z * FRAC_1_SQRT_2),
    )
}

/// Point on the Poincaré sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn dot(&self, other: &Self) -> f64 {
        self.s1 * other.s1 + self.s2 * other.s2 + self.s3 * other.s3
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Angle between the two vectors on the sphere, in degrees.
    pub fn angle_degrees(&self, other: &Self) -> f64 {
        let cos = self.dot(other) / (self.norm() * other.norm());
        cos.clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// Unit vector from polar and azimuthal angles (polar measured from s1).
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        Self {
            s1: polar.cos(),
            s2: polar.sin() * azimuth.cos(),
            s3: polar.sin() * azimuth.sin(),
        }
    }
}

/// `s1 = |h|² − |v|²`, `s2 = 2 Re(h* v)`, `s3 = 2 Im(h* v)`.
pub fn stokes(state: &PolarizationState) -> StokesVector {
    let hv = state.h.conj() * state.v;
    StokesVector {
        s1: state.h.norm_sqr() - state.v.norm_sqr(),
        s2: 2.0 * hv.re,
        s3: 2.0 * hv.im,
    }
}

/// Mount angles of the quarter–half–quarter sequence that turns `|h⟩` into
/// a chosen state, together with the `(θ, φ)` pair they were derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateSequence {
    /// First quarter plate (WP2).
    pub wp2: f64,
    /// Half plate (WP3).
    pub wp3: f64,
    /// Second quarter plate (WP4).
    pub wp4: f64,
    pub theta: f64,
    pub phi: f64,
    pub fidelity: f64,
}

impl PlateSequence {
    pub fn operator(&self) -> PolarizationOperator {
        quarter_waveplate(self.wp2)
            .then(&half_waveplate(self.wp3))
            .then(&quarter_waveplate(self.wp4))
    }

    pub fn output(&self) -> PolarizationState {
        self.operator().apply(&PolarizationState::horizontal())
    }
}

/// Solves for waveplate angles preparing `cos β|h⟩ + e^{iγ} sin β|v⟩` from `|h⟩`.
///
/// `θ` and `φ` come from `tan θ = tan β cos γ` and `sin φ = −sin β sin γ`.
/// Every branch of those relations and every sign assignment of
/// `(±θ/2, ±φ/2, ±θ/2)` to the three plates is tried; among those reaching
/// [`PREPARE_FIDELITY`] the one with the smallest total `|angle|` wins, earlier
/// candidates winning ties.
pub fn prepare_state(beta: f64, gamma: f64) -> Result<PlateSequence> {
    let (sb, cb) = beta.sin_cos();
    let gamma = if sb.abs() < 1e-12 || cb.abs() < 1e-12 { 0.0 } else { gamma };
    let target = PolarizationState::from_angles(beta, gamma);

    let theta0 = (sb * gamma.cos()).atan2(cb);
    let theta0 = if theta0 > FRAC_PI_2 {
        theta0 - PI
    } else if theta0 <= -FRAC_PI_2 {
        theta0 + PI
    } else {
        theta0
    };
    let phi0 = (-sb * gamma.sin()).clamp(-1.0, 1.0).asin();

    let mut best: Option<PlateSequence> = None;
    let mut best_fidelity = 0.0_f64;
    for theta in [theta0, theta0 + PI, theta0 - PI] {
        for phi in [phi0, PI - phi0] {
            for signs in SIGN_PATTERNS {
                let seq = PlateSequence {
                    // `+ 0.0` folds −0 into +0.
                    wp2: signs[0] * theta / 2.0 + 0.0,
                    wp3: signs[1] * phi / 2.0 + 0.0,
                    wp4: signs[2] * theta / 2.0 + 0.0,
                    theta: theta + 0.0,
                    phi: phi + 0.0,
                    fidelity: 0.0,
                };
                let fidelity = seq.output().fidelity(&target);
                best_fidelity = best_fidelity.max(fidelity);
                if fidelity < PREPARE_FIDELITY {
                    continue;
                }
                let seq = PlateSequence { fidelity, ..seq };
                let better = match &best {
                    None => true,
                    Some(b) => total_angle(&seq) < total_angle(b) - 1e-12,
                };
                if better {
                    best = Some(seq);
                }
            }
        }
    }
    best.ok_or(Error::PreparationFailed(best_fidelity))
}

const SIGN_PATTERNS: [[f64; 3]; 8] = [
    [-1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, -1.0],
];

fn total_angle(s: &PlateSequence) -> f64 {
    s.wp2.abs() + s.wp3.abs() + s.wp4.abs()
}
