//! Parity-assisted two-photon generation in a quantum Rabi network.
//!
//! Internal units: frequencies in multiples of the cavity frequency of the
//! Rabi system, times in its inverse. See [`units`] for laboratory conversion.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod network;
pub mod protocol;
pub mod spectrum;
pub mod tensor;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
