//! Light fields, optical forces and motion of a one-dimensional chain of thin
//! polarizable scatterers illuminated by several non-interfering light modes.
//!
//! Internal units: `eps0 = c = 1`, lengths in `1/k_ref` (so the reference
//! wavelength is `2 pi`), and a plane wave of intensity `I` has amplitude
//! modulus `sqrt(2 I)`.

pub mod cli;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod forcefield;
pub mod lattice;
pub mod output;
mod roots;
pub mod wavecore;

pub use error::{Error, Result};
