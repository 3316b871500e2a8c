//! Secrecy-capacity toolkit for binary optical wiretap channels.
//!
//! The library models a transmitter (Alice) sending on-off keyed or binary
//! phase-shift keyed optical pulses to a receiver (Bob) while an eavesdropper
//! (Eve) taps a fraction `gamma` of the photon energy arriving at Bob. It
//! computes asymptotic secrecy rates for three detection scenarios (both
//! parties quantum-optimal, Bob classical vs. Eve quantum-optimal, and Bob
//! classical vs. an Eve limited only by quantum mechanics), optionally with a
//! decoy preprocessing stage that reshapes the statistics Eve observes.
//!
//! On top of the rate engines sit an inter-satellite link designer built
//! around a security link margin, a Fock-basis squeezed-state comparison, and
//! a Monte Carlo sampler that cross-validates every closed-form transition
//! probability.

pub mod channels;
pub mod cli;
pub mod infotheory;
pub mod linkbudget;
pub mod montecarlo;
pub(crate) mod opt;
pub mod secrecy;
pub mod squeezed;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration file or flag set was invalid.
    #[error("config error: {0}")]
    Config(String),
    /// Fock-space truncation too small to represent a state faithfully.
    #[error("truncation error: n_max = {n_max} captures less than 1 - 1e-8 of the norm; use n_max >= {suggested}")]
    Truncation { n_max: usize, suggested: usize },
    /// The requested operation has no defined model.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
