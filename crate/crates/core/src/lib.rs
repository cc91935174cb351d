//! Numerical toolkit for semi-infinite Jacobi matrices: coefficient families,
//! generalized eigenvectors, commutator diagnostics and hypothesis checkers,
//! finite-section spectra, and structural transformations.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod recurrence;
pub mod sequences;
pub mod spectra;
pub mod transforms;

pub use diagnostics::{CheckConfig, CheckReport, ConditionVerdict, Evidence, Verdict};
pub use error::{Error, Result};
pub use recurrence::{EigvecInit, SignedLog};
pub use sequences::{SequencePair, WeightChoice, WeightSequence};
pub use spectra::{Truncation, TruncationSpectrum};
pub use transforms::{BirthDeathRates, PiWeights};

/// Library version, recorded next to every CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
