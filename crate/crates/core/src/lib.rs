//! Analysis and simulation toolkit for continuous-variable QKD with two- and
//! four-state discrete modulation: Fock-space states, covariance matrices,
//! asymptotic key rates, Monte-Carlo channel simulation and low-SNR reverse
//! reconciliation with multi-edge LDPC codes.

pub mod channel_sim;
pub mod covariance;
pub mod error;
pub mod keyrate;
pub mod protocol;
pub mod reconciliation;
pub mod states;

pub use error::{Error, Result};
pub use protocol::{Constellation, Detection, Modulation, ProtocolConfig};
