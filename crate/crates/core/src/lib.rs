//! Simulation and optimization toolkit for OFDM integrated sensing and
//! communication.
//!
//! The crate models a monostatic OFDM sensing frame in the discrete
//! frequency domain, evaluates matched (MF), reciprocal (RF) and Wiener (WF)
//! temporal-frequency filtering, and shapes the input distribution of a QAM
//! alphabet to trade sensing-CSI mean squared error against the achievable
//! information rate of the communication link.
//!
//! Module map:
//!
//! - [`constellation`]: PSK/QAM alphabets with arbitrary input distributions
//!   and the moments that drive every closed-form metric.
//! - [`channel`]: sensing CSI, symbol frames and noisy echoes.
//! - [`filtering`]: MF/RF/WF filters, CSI estimation, delay-Doppler maps and
//!   response functions.
//! - [`metrics`]: closed-form and Monte Carlo sensing metrics.
//! - [`air`]: Monte Carlo achievable information rate over AWGN.
//! - [`pcs`]: the modified Blahut-Arimoto shaping solver.
//! - [`detection`]: CA-CFAR and detection-probability estimation.

pub mod air;
pub mod channel;
pub mod constellation;
pub mod detection;
pub mod error;
pub mod filtering;
pub mod metrics;
pub mod numeric;
pub mod pcs;
pub mod rng;

pub use error::{Error, Result};

/// Linear power ratio to decibels.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Decibels to linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
