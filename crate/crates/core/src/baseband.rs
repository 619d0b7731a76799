//! Symbol-level QPSK link model.
//!
//! Device `d` observes `y_d[t] = AF(w[t], dir_d) / N * s[t] + jam_d[t] + n_d[t]`.
//! The receiver noise is referenced to boresight: a device given SNR `x` dB
//! sees noise variance `10^(-x/10)`, so an unperturbed steered array heard on
//! its main lobe (unit channel) has exactly that SNR. Side-lobe devices are
//! given the SNR they would have on boresight and pick up the pattern loss
//! through the channel itself.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::arraymodel::{array_factor, Direction, PhasedArray, WeightVector};
use crate::rng::{rng_from_seed, stream_seed, SimRng, Stream};
use crate::{Error, Result};

/// QPSK constellation, index `k` at phase `pi/4 + k*pi/2`.
pub const QPSK: [Complex64; 4] = [
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

/// Nearest constellation index.
pub fn qpsk_decide(z: Complex64) -> u8 {
    match (z.re >= 0.0, z.im >= 0.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

pub fn random_symbols(count: usize, seed: u64) -> Vec<u8> {
    let mut rng = rng_from_seed(stream_seed(seed, Stream::Symbols));
    (0..count).map(|_| rng.random_range(0..4u8)).collect()
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_normal(rng: &mut SimRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketModel {
    pub symbols_per_packet: usize,
}

impl Default for PacketModel {
    fn default() -> Self {
        PacketModel {
            symbols_per_packet: 1024,
        }
    }
}

impl PacketModel {
    pub fn new(symbols_per_packet: usize) -> Result<Self> {
        if symbols_per_packet == 0 {
            return Err(Error::config("symbols_per_packet must be positive"));
        }
        Ok(PacketModel { symbols_per_packet })
    }
}

/// Per-symbol weights stored as a small set of patterns plus an index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSchedule {
    patterns: Vec<WeightVector>,
    index: Vec<u32>,
}

impl WeightSchedule {
    pub fn new(patterns: Vec<WeightVector>, index: Vec<u32>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::contract("schedule needs at least one pattern"));
        }
        let n = patterns[0].len();
        if patterns.iter().any(|p| p.len() != n) {
            return Err(Error::contract("schedule patterns differ in length"));
        }
        if let Some(i) = index.iter().find(|&&i| i as usize >= patterns.len()) {
            return Err(Error::contract(format!(
                "schedule index {i} out of range for {} patterns",
                patterns.len()
            )));
        }
        Ok(WeightSchedule { patterns, index })
    }

    pub fn constant(w: WeightVector, symbol_count: usize) -> Self {
        WeightSchedule {
            patterns: vec![w],
            index: vec![0; symbol_count],
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn patterns(&self) -> &[WeightVector] {
        &self.patterns
    }

    pub fn index(&self) -> &[u32] {
        &self.index
    }

    pub fn weights_at(&self, t: usize) -> &WeightVector {
        &self.patterns[self.index[t] as usize]
    }
}

/// Samples seen by one or more synchronized devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolTrace {
    pub device_count: usize,
    /// `samples[d][t]`.
    pub samples: Vec<Vec<Complex64>>,
    pub truth: Vec<u8>,
    /// Receiver noise standard deviation per device (complex, total).
    pub noise_sigma: Vec<f64>,
}

impl SymbolTrace {
    pub fn new(samples: Vec<Vec<Complex64>>, truth: Vec<u8>, noise_sigma: Vec<f64>) -> Result<Self> {
        if samples.len() != noise_sigma.len() {
            return Err(Error::contract(format!(
                "{} devices but {} noise levels",
                samples.len(),
                noise_sigma.len()
            )));
        }
        if samples.iter().any(|s| s.len() != truth.len()) {
            return Err(Error::contract("sample rows differ from symbol count"));
        }
        if truth.iter().any(|&s| s > 3) {
            return Err(Error::contract("symbol index outside 0..4"));
        }
        Ok(SymbolTrace {
            device_count: samples.len(),
            samples,
            truth,
            noise_sigma,
        })
    }

    pub fn symbol_count(&self) -> usize {
        self.truth.len()
    }

    /// A trace holding only the listed devices.
    pub fn select(&self, devices: &[usize]) -> Result<SymbolTrace> {
        if let Some(d) = devices.iter().find(|&&d| d >= self.device_count) {
            return Err(Error::contract(format!("device {d} not in trace")));
        }
        SymbolTrace::new(
            devices.iter().map(|&d| self.samples[d].clone()).collect(),
            self.truth.clone(),
            devices.iter().map(|&d| self.noise_sigma[d]).collect(),
        )
    }
}

/// Noise standard deviation for a boresight-referenced SNR.
pub fn noise_sigma_for_snr(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// Inverse-variance combining weight; noiseless devices are capped so the
/// arithmetic stays finite.
pub fn inverse_noise_weight(sigma: f64) -> f64 {
    1.0 / sigma.max(1e-12).powi(2)
}

/// Channel `AF(w, d) / N` for each direction.
pub fn effective_channels(array: &PhasedArray, w: &WeightVector, dirs: &[Direction]) -> Result<Vec<Complex64>> {
    let n = array.element_count() as f64;
    dirs.iter()
        .map(|&d| Ok(array_factor(array, w, d)? / n))
        .collect()
}

pub fn transmit(
    symbols: &[u8],
    schedule: &WeightSchedule,
    rx_directions: &[Direction],
    array: &PhasedArray,
    snr_db: &[f64],
    seed: u64,
) -> Result<SymbolTrace> {
    transmit_with_jamming(symbols, schedule, &[], rx_directions, array, snr_db, seed)
}

/// As [`transmit`], plus artificial noise: each precoder `v_i` radiates an
/// independent unit-variance complex Gaussian stream, heard by device `d`
/// through `AF(v_i, dir_d) / N`.
pub fn transmit_with_jamming(
    symbols: &[u8],
    schedule: &WeightSchedule,
    precoders: &[WeightVector],
    rx_directions: &[Direction],
    array: &PhasedArray,
    snr_db: &[f64],
    seed: u64,
) -> Result<SymbolTrace> {
    if schedule.len() != symbols.len() {
        return Err(Error::contract(format!(
            "schedule has {} entries for {} symbols",
            schedule.len(),
            symbols.len()
        )));
    }
    if snr_db.len() != rx_directions.len() {
        return Err(Error::contract(format!(
            "{} SNR values for {} devices",
            snr_db.len(),
            rx_directions.len()
        )));
    }
    if let Some(s) = symbols.iter().find(|&&s| s > 3) {
        return Err(Error::contract(format!("symbol index {s} outside 0..4")));
    }
    let channels = schedule
        .patterns()
        .iter()
        .map(|w| effective_channels(array, w, rx_directions))
        .collect::<Result<Vec<_>>>()?;
    let jam_gains = precoders
        .iter()
        .map(|v| effective_channels(array, v, rx_directions))
        .collect::<Result<Vec<_>>>()?;
    let sigma: Vec<f64> = snr_db.iter().map(|&s| noise_sigma_for_snr(s)).collect();

    let devices = rx_directions.len();
    let mut samples: Vec<Vec<Complex64>> = (0..devices)
        .map(|d| {
            symbols
                .iter()
                .zip(schedule.index())
                .map(|(&s, &p)| channels[p as usize][d] * QPSK[s as usize])
                .collect()
        })
        .collect();

    if !precoders.is_empty() {
        let mut rng = rng_from_seed(stream_seed(seed, Stream::Jamming));
        let mut z = vec![Complex64::new(0.0, 0.0); precoders.len()];
        for t in 0..symbols.len() {
            z.iter_mut().for_each(|zi| *zi = complex_normal(&mut rng));
            for (d, row) in samples.iter_mut().enumerate() {
                row[t] += jam_gains.iter().zip(&z).map(|(g, zi)| g[d] * zi).sum::<Complex64>();
            }
        }
    }

    let mut rng = rng_from_seed(stream_seed(seed, Stream::Noise));
    for (row, &s) in samples.iter_mut().zip(&sigma) {
        for y in row.iter_mut() {
            *y += complex_normal(&mut rng) * s;
        }
    }
    SymbolTrace::new(samples, symbols.to_vec(), sigma)
}

/// Least-squares channel estimate from known symbols.
pub fn ls_channel_estimate(samples: &[Complex64], symbols: &[u8]) -> Complex64 {
    let n = samples.len().min(symbols.len());
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    samples
        .iter()
        .zip(symbols)
        .map(|(y, &s)| y * QPSK[s as usize].conj())
        .sum::<Complex64>()
        / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub decisions: Vec<u8>,
    pub ser: f64,
}

/// Equalizes each device with its channel estimate, combines devices by
/// maximum-ratio weighting and decides on the nearest QPSK point.
pub fn demodulate(trace: &SymbolTrace, channel_estimate: &[Complex64]) -> Result<Demodulated> {
    demodulate_range(trace, channel_estimate, 0, trace.symbol_count())
}

/// [`demodulate`] restricted to symbols `start..end`.
pub fn demodulate_range(
    trace: &SymbolTrace,
    channel_estimate: &[Complex64],
    start: usize,
    end: usize,
) -> Result<Demodulated> {
    if channel_estimate.len() != trace.device_count {
        return Err(Error::contract(format!(
            "{} channel estimates for {} devices",
            channel_estimate.len(),
            trace.device_count
        )));
    }
    if channel_estimate.iter().any(|h| !(h.norm() > 0.0) || !h.is_finite()) {
        return Err(Error::contract("channel estimate must be nonzero and finite"));
    }
    if start > end || end > trace.symbol_count() {
        return Err(Error::contract(format!("symbol range {start}..{end} out of bounds")));
    }
    let weights: Vec<Complex64> = channel_estimate
        .iter()
        .zip(&trace.noise_sigma)
        .map(|(h, &s)| h.conj() * inverse_noise_weight(s))
        .collect();
    let decisions: Vec<u8> = (start..end)
        .map(|t| {
            let z: Complex64 = weights
                .iter()
                .zip(&trace.samples)
                .map(|(w, row)| w * row[t])
                .sum();
            qpsk_decide(z)
        })
        .collect();
    let ser = symbol_error_rate(&decisions, &trace.truth[start..end]);
    Ok(Demodulated { decisions, ser })
}

pub fn symbol_error_rate(decisions: &[u8], truth: &[u8]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let wrong = decisions.iter().zip(truth).filter(|(a, b)| a != b).count();
    wrong as f64 / truth.len() as f64
}

/// `(1 - ser)^symbols_per_packet`.
pub fn psr_from_ser(ser: f64, pm: &PacketModel) -> f64 {
    (1.0 - ser.clamp(0.0, 1.0)).powi(pm.symbols_per_packet as i32)
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Uncoded QPSK symbol error rate at symbol SNR `gamma` (linear Es/N0).
pub fn qpsk_ser(gamma: f64) -> f64 {
    let q = q_function(gamma.max(0.0).sqrt());
    2.0 * q - q * q
}

/// Symbol-SNR range used when mapping packet PSR back to symbol SNR.
pub const SYMBOL_SNR_RANGE_DB: (f64, f64) = (-20.0, 40.0);

/// Symbol SNR (dB) at which uncoded QPSK packets succeed with probability
/// `psr`, clamped to [`SYMBOL_SNR_RANGE_DB`].
pub fn symbol_snr_for_psr(psr: f64, pm: &PacketModel) -> f64 {
    let (lo_db, hi_db) = SYMBOL_SNR_RANGE_DB;
    let packet_psr = |db: f64| psr_from_ser(qpsk_ser(10f64.powf(db / 10.0)), pm);
    if psr <= packet_psr(lo_db) {
        return lo_db;
    }
    if psr >= packet_psr(hi_db) {
        return hi_db;
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if packet_psr(mid) < psr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
