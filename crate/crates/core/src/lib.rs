//! Werner-Wolf entanglement witnesses for `n` qubits.
//!
//! * [`boolfn`]: facet functions, exact Walsh spectra, polytope symmetries.
//! * [`spectrum`]: closed-form eigenvalues and norm maximization over angles.
//! * [`oracle`]: dense-matrix ground truth for the closed forms.
//! * [`polytope`]: the classical correlation polytope and its facets.
//! * [`montecarlo`]: sampling experiments on typical witnesses.
//! * [`cli`]: the `witness` command-line front end.

pub mod boolfn;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod polytope;
pub mod rng;
pub mod spectrum;

pub use error::{Error, Result};
