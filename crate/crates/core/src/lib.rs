//! Reidemeister torsion of cochain complexes, mapping tori and surface
//! representation complexes, together with the spectral invariants and
//! stationary-phase leading terms built from them.

pub mod asymptotics;
pub mod cochain;
pub mod error;
pub mod exact_sequences;
pub mod lie_algebra;
pub mod linalg;
pub mod mapping_torus;
pub mod phase;
pub mod random;
pub mod scalar;
pub mod spectral_invariants;
pub mod surface_rep;
pub mod verify;

pub use error::Error;
pub use linalg::{LinalgError, Matrix};
pub use phase::Phase;
pub use scalar::{Magnitude, Rational, Scalar, DEFAULT_TOL};
