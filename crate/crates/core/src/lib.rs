//! Generalized Cesàro operators `C_t` on classical sequence spaces.
//!
//! Norms, spectra, eigenvectors, mean ergodicity and Hahn-space existence,
//! all reported as certified enclosures or three-valued verdicts.

pub mod claims;
pub mod cli;
pub mod eigen;
pub mod hahn;
pub mod error;
pub mod numeric;
pub mod operators;
pub mod spaces;
pub mod spectral;

pub use error::{CeslabError, Result};
pub use numeric::{Enclosure, Minorant, Mode, Outcome, Rational, Real, Scalar, SeqGenerator, TailCertificate, Verdict};
pub use spaces::{conjugation, membership, norm, norm_pow, Isometry, IsometryKind, Membership, SpaceSpec, Weight};
