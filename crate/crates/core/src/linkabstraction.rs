//! SNR to packet-success-rate mapping.
//!
//! The curve is a logistic in dB. Its midpoint is calibrated so the victim
//! link clears a target PSR at the scenario's highest rate with a margin;
//! other rates are offset by a fixed gap per 0.5 Gbps step.

use serde::{Deserialize, Serialize};

use crate::propagation::DEFAULT_BANDWIDTH_HZ;
use crate::scenario::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub name: String,
    pub rate_gbps: f64,
    /// SNR at which PSR is one half.
    pub snr50_db: f64,
    pub slope_db: f64,
}

impl RateProfile {
    pub fn new(name: impl Into<String>, rate_gbps: f64, snr50_db: f64, slope_db: f64) -> Result<Self> {
        if !(slope_db > 0.0 && slope_db.is_finite()) {
            return Err(Error::contract(format!("slope must be positive, got {slope_db}")));
        }
        if !snr50_db.is_finite() || !(rate_gbps > 0.0) {
            return Err(Error::contract(format!(
                "invalid profile: rate {rate_gbps} Gbps, snr50 {snr50_db} dB"
            )));
        }
        Ok(RateProfile {
            name: name.into(),
            rate_gbps,
            snr50_db,
            slope_db,
        })
    }
}

/// Logistic PSR `1 / (1 + exp(-(snr - snr50) / slope))`.
pub fn psr_from_snr(snr_db: f64, p: &RateProfile) -> f64 {
    let x = (snr_db - p.snr50_db) / p.slope_db;
    // Split by sign to avoid overflow in exp for large |x|.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`psr_from_snr`] for `psr` in (0, 1).
pub fn snr_for_psr(psr: f64, p: &RateProfile) -> f64 {
    p.snr50_db + p.slope_db * logit(psr)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Minimum SNR (dB) at which a channel of `bandwidth_hz` can carry
/// `rate_gbps` at all.
pub fn shannon_floor_db(rate_gbps: f64, bandwidth_hz: f64) -> f64 {
    let spectral_eff = rate_gbps * 1e9 / bandwidth_hz;
    10.0 * (2f64.powf(spectral_eff) - 1.0).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationOptions {
    pub margin_db: f64,
    pub slope_db: f64,
    /// snr50 increase per additional 0.5 Gbps.
    pub rate_gap_db: f64,
    pub bandwidth_hz: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            margin_db: 1.0,
            slope_db: 1.0,
            rate_gap_db: 3.0,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
        }
    }
}

impl CalibrationOptions {
    fn validate(&self) -> Result<()> {
        if !(self.slope_db > 0.0 && self.slope_db.is_finite()) {
            return Err(Error::config(format!("slope_db must be positive, got {}", self.slope_db)));
        }
        if !(self.margin_db >= 0.0 && self.margin_db.is_finite()) {
            return Err(Error::config(format!("margin_db must be >= 0, got {}", self.margin_db)));
        }
        if !(self.rate_gap_db >= 0.0 && self.rate_gap_db.is_finite()) {
            return Err(Error::config(format!("rate_gap_db must be >= 0, got {}", self.rate_gap_db)));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::config(format!("bandwidth_hz must be positive, got {}", self.bandwidth_hz)));
        }
        Ok(())
    }
}

/// Profile at the scenario's rate with default options (1 dB margin).
pub fn calibrate(scenario: &Scenario, target_psr: f64) -> Result<RateProfile> {
    calibrate_with(scenario, target_psr, scenario.rate_gbps, &CalibrationOptions::default())
}

/// Like [`calibrate`] with an explicit margin and default everything else.
pub fn calibrate_with_margin(scenario: &Scenario, target_psr: f64, margin_db: f64) -> Result<RateProfile> {
    let opts = CalibrationOptions {
        margin_db,
        ..CalibrationOptions::default()
    };
    calibrate_with(scenario, target_psr, scenario.rate_gbps, &opts)
}

/// Calibrates at the scenario's anchor rate, then shifts to `rate_gbps`.
pub fn calibrate_with(
    scenario: &Scenario,
    target_psr: f64,
    rate_gbps: f64,
    opts: &CalibrationOptions,
) -> Result<RateProfile> {
    opts.validate()?;
    if !(target_psr > 0.0 && target_psr < 1.0) {
        return Err(Error::Calibration(format!(
            "target PSR {target_psr} must lie strictly between 0 and 1"
        )));
    }
    if !(rate_gbps > 0.0 && rate_gbps.is_finite()) {
        return Err(Error::config(format!("rate must be positive, got {rate_gbps}")));
    }
    let victim = scenario.victim_snr_db()?;
    let anchor = victim - opts.margin_db - opts.slope_db * logit(target_psr);
    let snr50 = anchor + opts.rate_gap_db * (rate_gbps - scenario.rate_gbps) / 0.5;
    let floor = shannon_floor_db(rate_gbps, opts.bandwidth_hz);
    if snr50 < floor {
        return Err(Error::Calibration(format!(
            "{} at {rate_gbps} Gbps: victim SNR {victim:.2} dB puts the curve midpoint at {snr50:.2} dB, \
             below the {floor:.2} dB capacity limit",
            scenario.name
        )));
    }
    RateProfile::new(
        format!("{}-{rate_gbps:.1}gbps", scenario.name),
        rate_gbps,
        snr50,
        opts.slope_db,
    )
}
