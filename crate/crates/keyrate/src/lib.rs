//! Asymptotic key-rate and QBER models for free-space optical key
//! distribution links.
//!
//! Six protocols are modelled over a lossy channel, three QKD and three
//! relaxed-threat-model PKD counterparts sharing the same source hardware:
//!
//! | Source               | QKD                | PKD                     |
//! |----------------------|--------------------|-------------------------|
//! | Weak coherent pulses | decoy-state BB84   | pulse-position encoding |
//! | Photon pairs         | BBM92              | heralded polarisation   |
//! | Ideal single photons | single-photon BB84 | single-basis encoding   |
//!
//! The PKD variants drop basis sifting and apply privacy amplification only
//! against multi-photon leakage, which roughly doubles the rate and extends
//! the loss at which a key can still be distilled.
//!
//! Modules:
//! - [`channel`]: loss/transmissivity conversion, detector noise yields,
//!   binary entropy.
//! - [`qkd`] / [`pkd`]: the six closed-form rate models.
//! - [`optimize`]: bounded 1-D maximization of rate over mean photon number.
//! - [`mc`]: seeded photon-level Monte-Carlo simulations that validate the
//!   analytic gain/error statistics.
//! - [`sweep`]: evaluation of all protocols over a loss grid with per-point
//!   mean-photon-number optimization.
//! - [`config`] / [`report`]: flat `key = value` scenario files, CSV output,
//!   and Monte-Carlo pass/fail tables.

pub mod channel;
pub mod config;
pub mod mc;
pub mod optimize;
pub mod pkd;
pub mod qkd;
pub mod report;
pub mod sweep;

pub use channel::{
    binary_entropy, db_to_transmissivity, noise_yield, transmissivity_to_db, ChannelParams,
    DetectorNoise, NoiseYield,
};
pub use config::{emit_config, parse_config, ConfigError};
pub use mc::{simulate_pairs, simulate_sps, simulate_wcp, McConfig, McEstimate, McScenario};
pub use optimize::{optimize_mu, OptimizeSpec};
pub use pkd::{heralded_pkd_rate, ppm_pkd_rate, sps_pkd_rate, PaModel, PpmPkdParams};
pub use qkd::{
    bbm92_rate, decoy_bb84_rate, sps_bb84_rate, ErrorCorrectionModel, PairSourceParams, Protocol,
    RatePoint, WcpDecoyParams,
};
pub use report::{csv_string, emit_csv, mc_validate, McValidation, CSV_HEADER};
pub use sweep::{evaluate_point, optimal_ppm_mu, run_sweep, SweepConfig, SweepResult};

/// Domain violation in a model input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{name} = {value}: must be {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

impl ModelError {
    pub(crate) fn out_of_range(name: &'static str, value: f64, constraint: &'static str) -> Self {
        ModelError::OutOfRange {
            name,
            value,
            constraint,
        }
    }
}

/// Finite and non-negative; rejects NaN and infinities.
pub(crate) fn valid_nonneg(value: f64) -> bool {
    value.is_finite() && value >= 0.0
}

/// Finite and strictly positive; rejects NaN and infinities.
pub(crate) fn valid_pos(value: f64) -> bool {
    value.is_finite() && value > 0.0
}
