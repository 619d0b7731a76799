//! Free-space link budget: path loss, noise floor and SNR.
//!
//! EIRP already contains the peak transmit gain, so a receiver off the TX
//! main lobe sees `eirp + tx_gain_offset` with a non-positive offset.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_BANDWIDTH_HZ: f64 = 1.76e9;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 7.0;
const THERMAL_DBM_PER_HZ: f64 = -174.0;

/// Free-space path loss `20 log10(4 pi d / lambda)`.
pub fn fspl_db(distance_m: f64, wavelength_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !(wavelength_m > 0.0) {
        return Err(Error::contract(format!(
            "path loss needs positive distance and wavelength, got d={distance_m}, lambda={wavelength_m}"
        )));
    }
    Ok(20.0 * (4.0 * PI * distance_m / wavelength_m).log10())
}

/// Thermal noise floor `-174 + 10 log10(B) + NF` in dBm.
pub fn noise_floor_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::contract(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(THERMAL_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

pub fn default_noise_floor_dbm() -> f64 {
    THERMAL_DBM_PER_HZ + 10.0 * DEFAULT_BANDWIDTH_HZ.log10() + DEFAULT_NOISE_FIGURE_DB
}

/// Peak gain of an `n`-element array, `10 log10(n)` plus element gain.
pub fn peak_gain_dbi(element_count: usize, element_gain_dbi: f64) -> f64 {
    10.0 * (element_count as f64).log10() + element_gain_dbi
}

/// One transmitter-to-receiver link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub eirp_dbm: f64,
    /// TX pattern gain toward the receiver relative to the pattern peak.
    pub tx_gain_offset_db: f64,
    pub rx_gain_dbi: f64,
    pub distance_m: f64,
    pub wavelength_m: f64,
    pub noise_floor_dbm: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) {
            return Err(Error::contract(format!("distance must be positive, got {}", self.distance_m)));
        }
        if !(self.wavelength_m > 0.0) {
            return Err(Error::contract(format!(
                "wavelength must be positive, got {}",
                self.wavelength_m
            )));
        }
        if !(self.tx_gain_offset_db <= 0.0) {
            return Err(Error::contract(format!(
                "tx gain offset must be <= 0 dB, got {}",
                self.tx_gain_offset_db
            )));
        }
        Ok(())
    }

    pub fn fspl_db(&self) -> Result<f64> {
        fspl_db(self.distance_m, self.wavelength_m)
    }

    pub fn received_power_dbm(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.eirp_dbm + self.tx_gain_offset_db + self.rx_gain_dbi - self.fspl_db()?)
    }
}

/// `eirp + tx_gain_offset + rx_gain - fspl - noise_floor`.
pub fn snr_db(lb: &LinkBudget) -> Result<f64> {
    Ok(snr_from_fspl(lb, lb.fspl_db()?))
}

/// Same arithmetic with a caller-supplied path loss.
pub fn snr_from_fspl(lb: &LinkBudget, fspl_db: f64) -> f64 {
    lb.eirp_dbm + lb.tx_gain_offset_db + lb.rx_gain_dbi - fspl_db - lb.noise_floor_dbm
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 4.957e-3;

    fn budget(d: f64) -> LinkBudget {
        LinkBudget {
            eirp_dbm: 32.0,
            tx_gain_offset_db: -20.0,
            rx_gain_dbi: 21.0,
            distance_m: d,
            wavelength_m: LAMBDA,
            noise_floor_dbm: default_noise_floor_dbm(),
        }
    }

    #[test]
    fn fspl_examples() {
        assert!(fspl_db(LAMBDA / (4.0 * PI), LAMBDA).unwrap().abs() < 1e-12);
        assert!((fspl_db(200.0, LAMBDA).unwrap() - 114.1).abs() < 0.1);
        for d in [0.3, 7.0, 123.4] {
            let diff = fspl_db(2.0 * d, LAMBDA).unwrap() - fspl_db(d, LAMBDA).unwrap();
            assert!((diff - 6.02).abs() < 0.01);
        }
        assert!(fspl_db(0.0, LAMBDA).is_err());
        assert!(fspl_db(1.0, -1.0).is_err());
    }

    #[test]
    fn noise_floor_examples() {
        assert!((noise_floor_dbm(1.0, 0.0).unwrap() + 174.0).abs() < 1e-12);
        assert!((noise_floor_dbm(1.76e9, 7.0).unwrap() + 74.5).abs() < 0.1);
        let d = noise_floor_dbm(1e9, 10.0).unwrap() - noise_floor_dbm(1e9, 7.0).unwrap();
        assert!((d - 3.0).abs() < 1e-12);
        assert!(noise_floor_dbm(0.0, 7.0).is_err());
        assert_eq!(default_noise_floor_dbm(), noise_floor_dbm(1.76e9, 7.0).unwrap());
    }

    #[test]
    fn zero_budget_gives_negative_floor() {
        let lb = LinkBudget {
            eirp_dbm: 0.0,
            tx_gain_offset_db: 0.0,
            rx_gain_dbi: 0.0,
            distance_m: 1.0,
            wavelength_m: 1.0,
            noise_floor_dbm: -80.0,
        };
        assert_eq!(snr_from_fspl(&lb, 0.0), 80.0);
    }

    #[test]
    fn doubling_distance_costs_6_db() {
        let a = snr_db(&budget(10.0)).unwrap();
        let b = snr_db(&budget(20.0)).unwrap();
        assert!((a - b - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn received_power_round_trip() {
        let lb = budget(37.0);
        let via_power = lb.received_power_dbm().unwrap() - lb.noise_floor_dbm;
        assert!((via_power - snr_db(&lb).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn positive_offset_rejected() {
        let mut lb = budget(10.0);
        lb.tx_gain_offset_db = 0.5;
        assert!(lb.validate().is_err());
    }

    #[test]
    fn testbed_peak_gain() {
        assert!((peak_gain_dbi(128, 0.0) - 21.07).abs() < 0.01);
    }
}
