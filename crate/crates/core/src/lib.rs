//! Link-level simulator and analytical evaluator for a three-slot hybrid
//! downlink-uplink cooperative NOMA (HDU-CNOMA) scheme with one base station
//! and two users.
//!
//! The crate is split along the same lines as the evaluation pipeline:
//!
//! * [`channel`] draws Rayleigh block-fading gains and exposes their exact CDF/PDF.
//! * [`schemes`] turns one channel realization into per-slot SINRs and per-link
//!   decode outcomes for HDU-CNOMA and the two baselines.
//! * [`analysis`] evaluates the closed-form outage probabilities, the
//!   Gauss-Chebyshev approximation and its numeric oracle, diversity slopes and
//!   outage throughput.
//! * [`montecarlo`] runs reproducible, parallel frame-level sweeps over an SNR grid.
//! * [`cli`] parses JSON run configs and writes CSV/gnuplot outputs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod schemes;

pub use error::{Error, Result};

use channel::ChannelStats;
use schemes::{PowerAllocation, RateTargets};

/// Converts a transmit SNR in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Full system parameterization: large-scale fading, power split and target rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub stats: ChannelStats,
    pub power: PowerAllocation,
    pub rates: RateTargets,
}

impl Default for SystemParams {
    /// β = (1, 0.05, 0.8), α = (0.05, 0.95, 0.1, 0.9), every target rate 1 bit/s/Hz.
    fn default() -> Self {
        SystemParams {
            stats: ChannelStats::default(),
            power: PowerAllocation::default(),
            rates: RateTargets::default(),
        }
    }
}
