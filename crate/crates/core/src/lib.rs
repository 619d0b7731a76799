//! Deterministic simulator for millimeter-wave side-lobe eavesdropping.
//!
//! The crate models rectangular phased arrays, free-space link budgets and
//! attacker placement sweeps over the three deployment presets (mesh,
//! picocell, peer-to-peer), and evaluates antenna-randomization and
//! RF-chain artificial-noise defenses against single- and multi-device
//! attackers with a symbol-level QPSK model.
//!
//! Module map:
//!
//! * [`arraymodel`] array geometry, steering, array factor, artifacts
//! * [`propagation`] Friis path loss, noise floor, SNR
//! * [`linkabstraction`] SNR to packet-success-rate curves and calibration
//! * [`scenario`] deployment presets and grid geometry
//! * [`sweep`] PSR heatmaps, eavesdropping areas, connected regions
//! * [`baseband`] QPSK symbol traces and demodulation
//! * [`defense`] antenna randomization and RF-chain noise precoders
//! * [`attack`] single-device, derandomization and noise-cancellation attacks

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arraymodel;
pub mod attack;
pub mod baseband;
pub mod defense;
mod error;
pub mod linkabstraction;
pub mod propagation;
pub mod rng;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier: 802.11ad channel 2 center frequency (Hz).
pub const DEFAULT_CARRIER_HZ: f64 = 60.48e9;

/// Wavelength (m) of the default carrier.
pub fn default_wavelength() -> f64 {
    SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ
}
