//! Simulation of Floquet-engineered transverse interactions in flux-tunable
//! transmon chains: pulse-level dynamics, effective Hamiltonians, synthetic
//! flux interference and Ising-chain quench observables.

pub mod device;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod experiments;
pub mod qop;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
