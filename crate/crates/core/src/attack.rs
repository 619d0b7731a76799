//! Passive eavesdropping strategies.
//!
//! * `single`: one device, least-squares channel estimate from a pilot
//!   prefix, coherent demodulation.
//! * `derandomize`: several synchronized devices; per symbol, joint
//!   maximum likelihood over (codebook mask, QPSK symbol).
//! * `noise_cancel`: one device in a data-pattern null hears only the
//!   artificial noise and serves as the reference for a second device.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arraymodel::{golden_max, BeamPattern, Direction, PhasedArray, WeightVector};
use crate::baseband::{
    demodulate_range, effective_channels, inverse_noise_weight, ls_channel_estimate, qpsk_decide,
    symbol_error_rate, PacketModel, SymbolTrace, QPSK,
};
use crate::defense::Codebook;
use crate::{Error, Result};

/// Known symbols at the start of a trace (or packet) used for estimation.
pub const PILOT_SYMBOLS: usize = 64;

/// Data-pattern gain a noise reference must sit below.
pub const NULL_TARGET_DB: f64 = -60.0;

/// Leakage above this at the reference device is flagged.
pub const NULL_WARNING_DB: f64 = -40.0;

const PILOT_REFINEMENT_ROUNDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKnowledge {
    /// Attacker predicts per-mask channels exactly from the array model.
    Known,
    /// Attacker scales the model prediction by a per-device gain fitted to
    /// the pilot prefix.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum AttackStrategy {
    Single,
    Derandomize { devices: usize, knowledge: ChannelKnowledge },
    NoiseCancel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    #[serde(flatten)]
    pub strategy: AttackStrategy,
    /// Device positions (meters); empty means "let the evaluator place them".
    pub device_positions: Vec<[f64; 3]>,
    pub seed: u64,
}

impl AttackConfig {
    pub fn new(strategy: AttackStrategy) -> Self {
        AttackConfig {
            strategy,
            device_positions: Vec::new(),
            seed: 0,
        }
    }

    pub fn device_count(&self) -> usize {
        match self.strategy {
            AttackStrategy::Single => 1,
            AttackStrategy::Derandomize { devices, .. } => devices,
            AttackStrategy::NoiseCancel => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let AttackStrategy::Derandomize { devices, .. } = self.strategy {
            if devices < 2 {
                return Err(Error::config(format!(
                    "derandomization needs at least 2 devices, got {devices}"
                )));
            }
        }
        if !self.device_positions.is_empty() && self.device_positions.len() != self.device_count() {
            return Err(Error::config(format!(
                "{} device positions for a {}-device attack",
                self.device_positions.len(),
                self.device_count()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for AttackConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.strategy {
            AttackStrategy::Single => f.write_str("single"),
            AttackStrategy::NoiseCancel => f.write_str("cancel"),
            AttackStrategy::Derandomize { devices, knowledge } => {
                write!(f, "derand:devices={devices}")?;
                if knowledge == ChannelKnowledge::Estimated {
                    f.write_str(":knowledge=estimated")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for AttackConfig {
    type Err = Error;

    /// `single`, `derand[:devices=D][:knowledge=known|estimated]`, `cancel`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let mut parts = spec.split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let strategy = match head.as_str() {
            "single" | "cancel" if !rest.is_empty() => {
                return Err(Error::config(format!("'{head}' takes no options: '{spec}'")))
            }
            "single" => AttackStrategy::Single,
            "cancel" => AttackStrategy::NoiseCancel,
            "derand" => {
                let mut devices = 4;
                let mut knowledge = ChannelKnowledge::Known;
                for p in rest {
                    match p.split_once('=') {
                        Some(("devices", v)) => {
                            devices = v.parse().map_err(|_| {
                                Error::config(format!("invalid device count '{v}' in '{spec}'"))
                            })?
                        }
                        Some(("knowledge", "known")) => knowledge = ChannelKnowledge::Known,
                        Some(("knowledge", "estimated")) => knowledge = ChannelKnowledge::Estimated,
                        _ => return Err(Error::config(format!("unknown derand option '{p}' in '{spec}'"))),
                    }
                }
                AttackStrategy::Derandomize { devices, knowledge }
            }
            _ => {
                return Err(Error::config(format!(
                    "unknown attack '{spec}' (expected single, derand:devices=N or cancel)"
                )))
            }
        };
        let cfg = AttackConfig::new(strategy);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleOutcome {
    pub channel_estimate: Complex64,
    pub decisions: Vec<u8>,
    /// SER over the symbols after the pilot prefix.
    pub ser: f64,
}

fn check_pilots(trace: &SymbolTrace) -> Result<()> {
    if trace.symbol_count() <= PILOT_SYMBOLS {
        return Err(Error::contract(format!(
            "trace of {} symbols leaves nothing after the {PILOT_SYMBOLS}-symbol pilot",
            trace.symbol_count()
        )));
    }
    Ok(())
}

fn estimate(samples: &[Complex64], truth: &[u8]) -> Result<Complex64> {
    let h = ls_channel_estimate(samples, truth);
    if !(h.norm() > 0.0) || !h.is_finite() {
        return Err(Error::Estimation("pilot prefix carries no signal".into()));
    }
    Ok(h)
}

/// Single device with one static estimate from the pilot prefix.
pub fn attack_single(trace: &SymbolTrace) -> Result<SingleOutcome> {
    if trace.device_count != 1 {
        return Err(Error::contract(format!(
            "single-device attack given {} devices",
            trace.device_count
        )));
    }
    check_pilots(trace)?;
    let h = estimate(&trace.samples[0][..PILOT_SYMBOLS], &trace.truth[..PILOT_SYMBOLS])?;
    let d = demodulate_range(trace, &[h], PILOT_SYMBOLS, trace.symbol_count())?;
    Ok(SingleOutcome {
        channel_estimate: h,
        decisions: d.decisions,
        ser: d.ser,
    })
}

/// Single device that re-estimates the channel from the pilot prefix of
/// every packet. Returns the SER over all non-pilot symbols.
pub fn attack_single_per_packet(trace: &SymbolTrace, pm: &PacketModel) -> Result<f64> {
    if trace.device_count != 1 {
        return Err(Error::contract(format!(
            "single-device attack given {} devices",
            trace.device_count
        )));
    }
    if pm.symbols_per_packet <= PILOT_SYMBOLS {
        return Err(Error::config(format!(
            "packets of {} symbols cannot hold a {PILOT_SYMBOLS}-symbol pilot",
            pm.symbols_per_packet
        )));
    }
    check_pilots(trace)?;
    let (mut wrong, mut total) = (0usize, 0usize);
    let n = trace.symbol_count();
    for start in (0..n).step_by(pm.symbols_per_packet) {
        let end = (start + pm.symbols_per_packet).min(n);
        if end - start <= PILOT_SYMBOLS {
            continue;
        }
        let p = start + PILOT_SYMBOLS;
        let h = estimate(&trace.samples[0][start..p], &trace.truth[start..p])?;
        let d = demodulate_range(trace, &[h], p, end)?;
        wrong += (d.ser * (end - p) as f64).round() as usize;
        total += end - p;
    }
    Ok(wrong as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandOutcome {
    pub decisions: Vec<u8>,
    pub mask_decisions: Vec<u32>,
    pub ser: f64,
    /// Fraction of symbols whose mask was identified correctly.
    pub mask_accuracy: f64,
}

/// Predicted channel of every mask at every device, `[mask][device]`.
pub fn predicted_channels(
    codebook: &Codebook,
    array: &PhasedArray,
    steered: &WeightVector,
    device_directions: &[Direction],
) -> Result<Vec<Vec<Complex64>>> {
    codebook
        .patterns(steered)
        .iter()
        .map(|w| effective_channels(array, w, device_directions))
        .collect()
}

/// Joint ML over (mask, symbol) per symbol across all devices. `true_masks`
/// is the transmitter's schedule index and only scores the result.
pub fn attack_derandomize(
    trace: &SymbolTrace,
    codebook: &Codebook,
    array: &PhasedArray,
    steered: &WeightVector,
    device_directions: &[Direction],
    knowledge: ChannelKnowledge,
    true_masks: &[u32],
) -> Result<DerandOutcome> {
    if trace.device_count < 2 {
        return Err(Error::config(format!(
            "derandomization needs at least 2 devices, got {}",
            trace.device_count
        )));
    }
    if device_directions.len() != trace.device_count {
        return Err(Error::contract(format!(
            "{} directions for {} devices",
            device_directions.len(),
            trace.device_count
        )));
    }
    if true_masks.len() != trace.symbol_count() {
        return Err(Error::contract("mask truth length differs from symbol count"));
    }
    let mut h = predicted_channels(codebook, array, steered, device_directions)?;
    let start = match knowledge {
        ChannelKnowledge::Known => 0,
        ChannelKnowledge::Estimated => {
            check_pilots(trace)?;
            rescale_from_pilots(trace, &mut h)?;
            PILOT_SYMBOLS
        }
    };
    let wts = pilot_noise_weights(trace, &h);
    // Per mask: sum_d |h|^2 w_d, the symbol-independent part of the cost.
    let energy: Vec<f64> = h
        .iter()
        .map(|row| row.iter().zip(&wts).map(|(x, w)| x.norm_sqr() * w).sum())
        .collect();
    let conj_weighted: Vec<Vec<Complex64>> = h
        .iter()
        .map(|row| row.iter().zip(&wts).map(|(x, w)| x.conj() * w).collect())
        .collect();

    let n = trace.symbol_count() - start;
    let mut decisions = Vec::with_capacity(n);
    let mut masks = Vec::with_capacity(n);
    let mut y = vec![Complex64::new(0.0, 0.0); trace.device_count];
    for t in start..trace.symbol_count() {
        for (d, yd) in y.iter_mut().enumerate() {
            *yd = trace.samples[d][t];
        }
        // cost(m, s) = E_m - 2 Re(conj(q_s) z_m) + const; the best s for a
        // given m is the quadrant of z_m, which leaves E_m - sqrt2(|Re|+|Im|).
        let mut best = (f64::INFINITY, 0u32, 0u8);
        for (m, cw) in conj_weighted.iter().enumerate() {
            let z: Complex64 = cw.iter().zip(&y).map(|(c, yd)| c * yd).sum();
            let cost = energy[m] - SQRT_2 * (z.re.abs() + z.im.abs());
            if cost < best.0 {
                best = (cost, m as u32, qpsk_decide(z));
            }
        }
        masks.push(best.1);
        decisions.push(best.2);
    }
    let truth = &trace.truth[start..];
    let correct = masks.iter().zip(&true_masks[start..]).filter(|(a, b)| a == b).count();
    Ok(DerandOutcome {
        ser: symbol_error_rate(&decisions, truth),
        mask_accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        decisions,
        mask_decisions: masks,
    })
}

/// Inverse noise-power weight per device. Receiver noise is the floor; the
/// pilot residuals add whatever else the device hears (artificial noise),
/// taking the best-fitting mask for each pilot symbol.
fn pilot_noise_weights(trace: &SymbolTrace, h: &[Vec<Complex64>]) -> Vec<f64> {
    let nominal: Vec<f64> = trace.noise_sigma.iter().map(|&s| inverse_noise_weight(s)).collect();
    if trace.symbol_count() < PILOT_SYMBOLS {
        return nominal;
    }
    let devices = trace.device_count;
    let mut power = vec![0.0; devices];
    for t in 0..PILOT_SYMBOLS {
        let q = QPSK[trace.truth[t] as usize];
        let residual = |row: &Vec<Complex64>, d: usize| (trace.samples[d][t] - row[d] * q).norm_sqr();
        let best = h
            .iter()
            .min_by(|a, b| {
                let ca: f64 = (0..devices).map(|d| residual(a, d) * nominal[d]).sum();
                let cb: f64 = (0..devices).map(|d| residual(b, d) * nominal[d]).sum();
                ca.total_cmp(&cb)
            })
            .expect("codebook is not empty");
        for (d, p) in power.iter_mut().enumerate() {
            *p += residual(best, d) / PILOT_SYMBOLS as f64;
        }
    }
    power
        .iter()
        .zip(&trace.noise_sigma)
        .map(|(&p, &s)| inverse_noise_weight(p.sqrt().max(s)))
        .collect()
}

/// Fits one complex gain per device to the pilot prefix. The first guess
/// matches the codebook-average channel; it is then refined by alternating
/// a joint mask decision per pilot symbol with a least-squares refit.
fn rescale_from_pilots(trace: &SymbolTrace, h: &mut [Vec<Complex64>]) -> Result<()> {
    let m = h.len() as f64;
    let devices = trace.device_count;
    let pilots = &trace.truth[..PILOT_SYMBOLS];
    let mut g = Vec::with_capacity(devices);
    for d in 0..devices {
        let mean: Complex64 = h.iter().map(|row| row[d]).sum::<Complex64>() / m;
        if !(mean.norm() > 0.0) {
            return Err(Error::Estimation(format!(
                "device {d}: codebook-average channel is zero, gain not identifiable"
            )));
        }
        g.push(estimate(&trace.samples[d][..PILOT_SYMBOLS], pilots)? / mean);
    }
    let wts: Vec<f64> = trace.noise_sigma.iter().map(|&s| inverse_noise_weight(s)).collect();
    for _ in 0..PILOT_REFINEMENT_ROUNDS {
        let chosen: Vec<usize> = (0..PILOT_SYMBOLS)
            .map(|t| {
                let q = QPSK[pilots[t] as usize];
                let cost = |row: &Vec<Complex64>| -> f64 {
                    (0..devices)
                        .map(|d| (trace.samples[d][t] - g[d] * row[d] * q).norm_sqr() * wts[d])
                        .sum()
                };
                (0..h.len())
                    .min_by(|&a, &b| cost(&h[a]).total_cmp(&cost(&h[b])))
                    .unwrap_or(0)
            })
            .collect();
        for (d, gd) in g.iter_mut().enumerate() {
            let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
            for (t, &mk) in chosen.iter().enumerate() {
                let x = h[mk][d] * QPSK[pilots[t] as usize];
                num += trace.samples[d][t] * x.conj();
                den += x.norm_sqr();
            }
            if den > 0.0 {
                *gd = num / den;
            }
        }
    }
    for row in h.iter_mut() {
        row.iter_mut().zip(&g).for_each(|(x, gd)| *x *= gd);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CancelOutcome {
    pub alpha: Complex64,
    pub cleaned: Vec<Complex64>,
    /// SER over the symbols after the pilot prefix.
    pub ser: f64,
    /// Power of the cleaned stream relative to the mixed stream.
    pub residual_ratio: f64,
    pub warnings: Vec<String>,
}

/// Subtracts the least-squares scaled reference from the mixed stream and
/// demodulates the result. `null_gain_db` is the data-pattern gain at the
/// reference device, used only for the leakage warning.
pub fn attack_noise_cancel(trace_null: &SymbolTrace, trace_mix: &SymbolTrace, null_gain_db: f64) -> Result<CancelOutcome> {
    if trace_null.device_count != 1 || trace_mix.device_count != 1 {
        return Err(Error::contract("noise cancellation takes two single-device traces"));
    }
    if trace_null.truth != trace_mix.truth {
        return Err(Error::contract("traces are not synchronized"));
    }
    let r = &trace_null.samples[0];
    let y = &trace_mix.samples[0];
    let rr: f64 = r.iter().map(|x| x.norm_sqr()).sum();
    if !(rr > 0.0) {
        return Err(Error::Estimation("reference trace is silent".into()));
    }
    let alpha: Complex64 = r.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<Complex64>() / rr;
    let cleaned: Vec<Complex64> = y.iter().zip(r).map(|(b, a)| b - alpha * a).collect();
    let yy: f64 = y.iter().map(|x| x.norm_sqr()).sum();
    let cc: f64 = cleaned.iter().map(|x| x.norm_sqr()).sum();

    let mut warnings = Vec::new();
    if null_gain_db > NULL_WARNING_DB {
        warnings.push(format!(
            "reference device hears the data pattern at {null_gain_db:.1} dB (above {NULL_WARNING_DB} dB)"
        ));
    }
    let ser = if trace_mix.symbol_count() > PILOT_SYMBOLS {
        let clean_trace = SymbolTrace::new(vec![cleaned.clone()], trace_mix.truth.clone(), trace_mix.noise_sigma.clone())?;
        match attack_single(&clean_trace) {
            Ok(o) => o.ser,
            // Nothing of the signal survived the subtraction.
            Err(Error::Estimation(_)) => 0.75,
            Err(e) => return Err(e),
        }
    } else {
        return Err(Error::contract("trace too short for the pilot prefix"));
    };
    Ok(CancelOutcome {
        alpha,
        cleaned,
        ser,
        residual_ratio: if yy > 0.0 { cc / yy } else { 0.0 },
        warnings,
    })
}

/// A gap in the data pattern found by an azimuth scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullCandidate {
    pub direction: Direction,
    pub data_gain_db: f64,
    /// Artificial-noise power heard there, relative to a unit channel.
    pub noise_power: f64,
}

/// Scans the data pattern over azimuth at `elevation`, refines every local
/// minimum, and returns the gap at or below [`NULL_TARGET_DB`] where the
/// artificial noise is strongest. Falls back to the deepest gap when none
/// reaches the target. Directions within `exclude_rad` of `avoid` are
/// skipped.
pub fn find_data_null(
    array: &PhasedArray,
    data: &WeightVector,
    precoders: &[WeightVector],
    elevation: f64,
    avoid: &[Direction],
    exclude_rad: f64,
) -> Result<NullCandidate> {
    let pattern = BeamPattern::new(array, data)?;
    let noise = precoders
        .iter()
        .map(|v| BeamPattern::new(array, v))
        .collect::<Result<Vec<_>>>()?;
    let n_el = array.element_count() as f64;
    let noise_power = |d: Direction| -> f64 {
        noise.iter().map(|p| (p.response(d) / n_el).norm_sqr()).sum()
    };
    let dir = |az: f64| Direction::new(az, elevation).expect("scan stays in range");
    let mag = |az: f64| pattern.response(dir(az)).norm();

    let samples = 4000.max(100 * array.cols());
    let step = 2.0 * FRAC_PI_2 * 0.999 / (samples - 1) as f64;
    let az_at = |i: usize| -FRAC_PI_2 * 0.999 + step * i as f64;
    let cut: Vec<f64> = (0..samples).map(|i| mag(az_at(i))).collect();

    let mut candidates = Vec::new();
    for i in 1..samples - 1 {
        if !(cut[i] <= cut[i - 1] && cut[i] < cut[i + 1]) {
            continue;
        }
        let az = refine_min(az_at(i) - step, az_at(i) + step, mag);
        let d = dir(az);
        if avoid.iter().any(|a| angular_distance(*a, d) < exclude_rad) {
            continue;
        }
        candidates.push(NullCandidate {
            direction: d,
            data_gain_db: pattern.gain_db(d),
            noise_power: noise_power(d),
        });
    }
    let deep: Vec<&NullCandidate> = candidates.iter().filter(|c| c.data_gain_db <= NULL_TARGET_DB).collect();
    let pick = if deep.is_empty() {
        candidates.iter().min_by(|a, b| a.data_gain_db.total_cmp(&b.data_gain_db))
    } else {
        deep.into_iter().max_by(|a, b| a.noise_power.total_cmp(&b.noise_power))
    };
    pick.copied()
        .ok_or_else(|| Error::Estimation("data pattern has no gaps in the scanned cut".into()))
}

fn refine_min(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    golden_max(a, b, |x| -f(x)).0
}

fn angular_distance(a: Direction, b: Direction) -> f64 {
    let [x1, y1, z1] = a.unit_vector();
    let [x2, y2, z2] = b.unit_vector();
    (x1 * x2 + y1 * y2 + z1 * z2).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arraymodel::steer;
    use crate::baseband::{random_symbols, transmit, WeightSchedule};

    #[test]
    fn parse_attacks() {
        assert_eq!("single".parse::<AttackConfig>().unwrap().strategy, AttackStrategy::Single);
        assert_eq!("cancel".parse::<AttackConfig>().unwrap().device_count(), 2);
        let d: AttackConfig = "derand:devices=4".parse().unwrap();
        assert_eq!(
            d.strategy,
            AttackStrategy::Derandomize {
                devices: 4,
                knowledge: ChannelKnowledge::Known
            }
        );
        assert_eq!(d.to_string(), "derand:devices=4");
        let e: AttackConfig = "derand:devices=3:knowledge=estimated".parse().unwrap();
        assert_eq!(e.to_string(), "derand:devices=3:knowledge=estimated");
        for bad in ["", "jam", "derand:devices=1", "derand:devices=x", "derand:k=2", "single:2"] {
            assert!(matches!(bad.parse::<AttackConfig>(), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn device_position_count_is_checked() {
        let mut c: AttackConfig = "cancel".parse().unwrap();
        c.device_positions = vec![[1.0, 0.0, 1.0]];
        assert!(c.validate().is_err());
    }

    #[test]
    fn silent_trace_is_an_estimation_error() {
        let tr = SymbolTrace::new(vec![vec![Complex64::new(0.0, 0.0); 100]], vec![0; 100], vec![0.1]).unwrap();
        assert!(matches!(attack_single(&tr), Err(Error::Estimation(_))));
    }

    #[test]
    fn noiseless_single_device_is_perfect() {
        let arr = PhasedArray::new(1, 8).unwrap();
        let w = steer(&arr, Direction::BORESIGHT);
        let syms = random_symbols(500, 1);
        let sched = WeightSchedule::constant(w, 500);
        let d = Direction::from_degrees(22.0, 0.0).unwrap();
        let tr = transmit(&syms, &sched, &[d], &arr, &[f64::INFINITY], 0).unwrap();
        assert_eq!(attack_single(&tr).unwrap().ser, 0.0);
        assert_eq!(attack_single_per_packet(&tr, &PacketModel::new(128).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn exact_cancellation_of_a_noiseless_reference() {
        let n = 1000;
        let syms = random_symbols(n, 2);
        let mut rng = crate::rng::rng_from_seed(3);
        let jam: Vec<Complex64> = (0..n).map(|_| crate::baseband::complex_normal(&mut rng)).collect();
        let alpha = Complex64::new(0.3, -1.7);
        let mix: Vec<Complex64> = jam.iter().zip(&syms).map(|(j, &s)| alpha * j + 0.5 * QPSK[s as usize]).collect();
        let tn = SymbolTrace::new(vec![jam.clone()], syms.clone(), vec![0.0]).unwrap();
        let jam_only = SymbolTrace::new(vec![jam.iter().map(|j| alpha * j).collect()], syms.clone(), vec![0.0]).unwrap();
        let o = attack_noise_cancel(&tn, &jam_only, -80.0).unwrap();
        assert!(o.residual_ratio < 1e-10);
        assert!(o.warnings.is_empty());
        let tm = SymbolTrace::new(vec![mix], syms, vec![0.0]).unwrap();
        let o = attack_noise_cancel(&tn, &tm, -20.0).unwrap();
        assert_eq!(o.ser, 0.0);
        assert_eq!(o.warnings.len(), 1);
    }

    #[test]
    fn null_scan_finds_analytic_nulls() {
        let arr = PhasedArray::new(1, 8).unwrap();
        let w = steer(&arr, Direction::BORESIGHT);
        let c = find_data_null(&arr, &w, &[], 0.0, &[], 0.0).unwrap();
        assert!(c.data_gain_db <= NULL_TARGET_DB);
        // Nulls of an 8-element half-wavelength line: sin(az) = k/4.
        let s = c.direction.azimuth().sin() * 4.0;
        assert!((s - s.round()).abs() < 1e-6 && s.round() != 0.0, "{s}");
    }
}
