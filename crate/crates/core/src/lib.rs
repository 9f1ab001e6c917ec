//! Quantum statistical inference: states and measurements, quantum Fisher
//! information and its bounds, instruments, quantum trajectories, homodyne
//! tomography and EPR/Bell demonstrations.

pub mod cli;
pub mod epr;
pub mod error;
pub mod instrument;
pub mod io;
pub mod measure;
pub mod qcore;
pub mod qinfo;
pub mod qmodels;
pub mod random;
pub mod stats;
pub mod tomo;
pub mod trajectory;

pub use error::{Error, Result};
