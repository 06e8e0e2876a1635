//! Optimal generalized measurements on single-photon polarization states.
//!
//! The crate covers the symmetric trine and tetrad ensembles and their
//! orthogonal "anti" ensembles, probability operator measures (POMs) with
//! minimum-error construction and optimality checks, Shannon mutual
//! information, the interferometric networks that realize the measurements
//! as projective measurements over extra spatial modes, and a simple
//! detector-noise model.
//!
//! ```
//! use pom_core::{ensembles, infotheory, pom};
//!
//! let trine = ensembles::trine();
//! let measurement = pom::min_error_pom(&trine, 2).unwrap();
//! let pe = pom::error_probability(&measurement, &trine).unwrap();
//! assert!((pe - 1.0 / 3.0).abs() < 1e-12);
//!
//! let anti = ensembles::antitrine();
//! let report = infotheory::mutual_information(&anti, &measurement).unwrap();
//! assert!((report.mutual_info_bits - 1.5f64.log2()).abs() < 1e-12);
//! ```

pub mod ensembles;
pub mod error;
pub mod infotheory;
pub mod linalg;
pub mod network;
pub mod noise;
pub mod polarization;
pub mod pom;

pub use error::{Error, Result};
pub use num_complex::Complex64;
