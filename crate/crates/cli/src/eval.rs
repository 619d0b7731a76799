//! Symbol-level defense/attack evaluation.
//!
//! A [`Setup`] fixes the transmitter, the victim and an ordered list of
//! candidate attacker devices. [`evaluate`] runs one defense against one
//! attack on that setup and scores attacker and victim.

use serde::Serialize;
use sidelobe_core::arraymodel::{steer, BeamPattern, Direction, PhasedArray, WeightVector};
use sidelobe_core::attack::{
    attack_derandomize, attack_noise_cancel, attack_single_per_packet, find_data_null, AttackConfig, AttackStrategy,
};
use sidelobe_core::baseband::{
    effective_channels, psr_from_ser, random_symbols, symbol_snr_for_psr, transmit_with_jamming, PacketModel,
};
use sidelobe_core::defense::{build_codebook, rf_noise_precoders, weight_schedule, Codebook, DefenseConfig, MaskMode};
use sidelobe_core::linkabstraction::{psr_from_snr, RateProfile};
use sidelobe_core::propagation::snr_db;
use sidelobe_core::scenario::Scenario;
use sidelobe_core::{Error, Result};

/// One receiving device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Device {
    /// Direction in the TX array frame.
    pub direction: Direction,
    /// Boresight-referenced SNR (see the baseband module).
    pub snr_db: f64,
    pub position: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Setup {
    pub label: String,
    pub array: PhasedArray,
    pub steering: Direction,
    pub victim: Device,
    /// Attacker placements, most attractive first.
    pub candidates: Vec<Device>,
    pub symbols: usize,
    pub packet: PacketModel,
}

/// Side-lobe angles of a 1x8 half-wavelength line used by the desk setup.
pub const DESK_ANGLES_DEG: [f64; 4] = [22.0, 39.0, 61.0, -30.5];

/// Minimum angular separation between derandomization devices.
const MIN_SEPARATION_DEG: f64 = 2.0;

/// Cells closer than this to the main lobe are not attacker candidates.
const SIDE_LOBE_MAX_GAIN_DB: f64 = -10.0;

/// Boresight-referenced SNR that yields `effective_db` through channel `h`.
fn boresight_snr(effective_db: f64, h: f64) -> f64 {
    effective_db - 20.0 * h.log10()
}

impl Setup {
    /// Small bench setup: a perfect 1x8 line steered at boresight, devices on
    /// its side lobes, every device (victim included) at `effective_snr_db`
    /// after its own pattern gain.
    pub fn desk(effective_snr_db: f64, symbols: usize) -> Result<Setup> {
        let array = PhasedArray::new(1, 8)?;
        let steering = Direction::BORESIGHT;
        let w = steer(&array, steering);
        let mk = |d: Direction| -> Result<Device> {
            let h = effective_channels(&array, &w, &[d])?[0].norm();
            Ok(Device {
                direction: d,
                snr_db: boresight_snr(effective_snr_db, h),
                position: None,
            })
        };
        let candidates = DESK_ANGLES_DEG
            .iter()
            .map(|&a| mk(Direction::from_degrees(a, 0.0)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Setup {
            label: format!("desk-1x8-{effective_snr_db}db"),
            victim: mk(steering)?,
            array,
            steering,
            candidates,
            symbols,
            packet: PacketModel::default(),
        })
    }

    /// Setup on a scenario grid, devices placed by [`Placer`].
    pub fn from_scenario(
        s: &Scenario,
        array: &PhasedArray,
        profile: &RateProfile,
        symbols: usize,
        max_candidates: usize,
    ) -> Result<Setup> {
        let steering = s.tx_steering();
        let placer = Placer::new(s, array, profile)?;
        let packet = placer.packet;
        let victim = placer.place(s.rx.position)?
            .ok_or_else(|| Error::Config("victim sits in a pattern null".into()))?
            .0;

        let mut ranked = Vec::new();
        for p in s.cell_centers() {
            if let Some((d, gain, link)) = placer.place(p)? {
                if gain <= SIDE_LOBE_MAX_GAIN_DB {
                    ranked.push((d, link));
                }
            }
        }
        // Stable sort: ties keep grid order.
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let min_sep = MIN_SEPARATION_DEG.to_radians();
        let mut candidates: Vec<Device> = Vec::new();
        for (d, _) in ranked {
            if candidates.len() >= max_candidates {
                break;
            }
            if candidates.iter().all(|c| angle_between(c.direction, d.direction) >= min_sep) {
                candidates.push(d);
            }
        }
        if candidates.is_empty() {
            return Err(Error::Config(format!(
                "no grid cell of {} lies in a side lobe (gain <= {SIDE_LOBE_MAX_GAIN_DB} dB)",
                s.name
            )));
        }
        Ok(Setup {
            label: format!("{}-{}x{}", s.name, array.cols(), array.rows()),
            array: array.clone(),
            steering,
            victim,
            candidates,
            symbols,
            packet,
        })
    }
}

/// Places devices on a scenario: each gets the symbol SNR whose uncoded
/// packet success rate equals the link-level PSR at its position, so the
/// baseband and sweep views agree.
pub struct Placer<'a> {
    scenario: &'a Scenario,
    array: &'a PhasedArray,
    profile: &'a RateProfile,
    steered: WeightVector,
    pattern: BeamPattern,
    packet: PacketModel,
}

impl<'a> Placer<'a> {
    pub fn new(scenario: &'a Scenario, array: &'a PhasedArray, profile: &'a RateProfile) -> Result<Self> {
        let steered = steer(array, scenario.tx_steering());
        let pattern = BeamPattern::new(array, &steered)?;
        Ok(Placer {
            scenario,
            array,
            profile,
            steered,
            pattern,
            packet: PacketModel::default(),
        })
    }

    /// Device at `p` with its pattern gain (dB) and link SNR (dB). `None`
    /// when `p` sits in an exact pattern null.
    pub fn place(&self, p: [f64; 3]) -> Result<Option<(Device, f64, f64)>> {
        let (dist, dir) = self.scenario.geometry_to(p)?;
        let gain = self.pattern.gain_db(dir);
        let link = snr_db(&self.scenario.link_budget(dist, gain))?;
        let h = effective_channels(self.array, &self.steered, &[dir])?[0].norm();
        if !(h > 0.0) {
            return Ok(None);
        }
        let gamma = symbol_snr_for_psr(psr_from_snr(link, self.profile), &self.packet);
        Ok(Some((
            Device {
                direction: dir,
                snr_db: boresight_snr(gamma, h),
                position: Some(p),
            },
            gain,
            link,
        )))
    }
}

fn angle_between(a: Direction, b: Direction) -> f64 {
    let [x1, y1, z1] = a.unit_vector();
    let [x2, y2, z2] = b.unit_vector();
    (x1 * x2 + y1 * y2 + z1 * z2).clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub defense: String,
    pub attack: String,
    pub attacker_ser: f64,
    pub attacker_psr: f64,
    pub victim_ser: f64,
    pub victim_psr: f64,
    /// Symbols scored for the attacker.
    pub scored_symbols: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_accuracy: Option<f64>,
    pub attacker_devices: Vec<Device>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Rejects pairings that have no meaning.
pub fn check_compatible(defense: &DefenseConfig, attack: &AttackConfig) -> Result<()> {
    if attack.strategy == AttackStrategy::NoiseCancel && defense.antenna().is_some() {
        return Err(Error::Config(format!(
            "attack '{attack}' targets artificial noise and cannot run against defense '{defense}'"
        )));
    }
    Ok(())
}

/// Runs `defense` against `attack`. The defense draws from its own seed;
/// symbols and receiver noise come from `seed`.
pub fn evaluate(setup: &Setup, defense: &DefenseConfig, attack: &AttackConfig, seed: u64) -> Result<EvalResult> {
    check_compatible(defense, attack)?;
    attack.validate()?;
    let array = &setup.array;
    let steered = steer(array, setup.steering);
    let codebook = match defense.antenna() {
        Some(_) => Some(build_codebook(array, defense)?),
        None => None,
    };
    let schedule = weight_schedule(&steered, codebook.as_ref(), defense, setup.symbols, &setup.packet)?;
    let precoders = match defense.rfchain() {
        Some(_) => rf_noise_precoders(array, setup.steering, defense)?,
        None => Vec::new(),
    };

    let needed = attack.device_count();
    if setup.candidates.len() < needed {
        return Err(Error::Config(format!(
            "attack '{attack}' needs {needed} devices, setup offers {}",
            setup.candidates.len()
        )));
    }
    let mut attackers: Vec<Device> = setup.candidates[..needed.min(setup.candidates.len())].to_vec();
    let mut null_gain_db = None;
    if attack.strategy == AttackStrategy::NoiseCancel {
        // Keep the best spot for the mixed observation; the reference goes to
        // a gap in the data pattern at the same elevation.
        let mix = setup.candidates[0];
        let gap = find_data_null(
            array,
            &steered,
            &precoders,
            mix.direction.elevation(),
            &[setup.steering],
            (4.0f64 / array.cols() as f64).min(0.5),
        )?;
        null_gain_db = Some(gap.data_gain_db);
        attackers = vec![
            Device {
                direction: gap.direction,
                snr_db: mix.snr_db,
                position: None,
            },
            mix,
        ];
    }

    let symbols = random_symbols(setup.symbols, seed);
    let mut dirs = vec![setup.victim.direction];
    let mut snrs = vec![setup.victim.snr_db];
    for a in &attackers {
        dirs.push(a.direction);
        snrs.push(a.snr_db);
    }
    let trace = transmit_with_jamming(&symbols, &schedule, &precoders, &dirs, array, &snrs, seed)?;

    let victim_ser = attack_single_per_packet(&trace.select(&[0])?, &setup.packet)?;
    let attacker_idx: Vec<usize> = (1..=attackers.len()).collect();
    let mut warnings = Vec::new();
    let mut mask_accuracy = None;
    let (attacker_ser, scored) = match attack.strategy {
        AttackStrategy::Single => {
            let t = trace.select(&attacker_idx)?;
            (attack_single_per_packet(&t, &setup.packet)?, non_pilot_symbols(setup))
        }
        AttackStrategy::Derandomize { knowledge, .. } => {
            let t = trace.select(&attacker_idx)?;
            let cb = codebook.unwrap_or_else(|| Codebook {
                mode: MaskMode::Flip,
                element_count: array.element_count(),
                masks: vec![Vec::new()],
            });
            let truth: Vec<u32> = if defense.antenna().is_some() {
                schedule.index().to_vec()
            } else {
                vec![0; setup.symbols]
            };
            let adirs: Vec<Direction> = attackers.iter().map(|a| a.direction).collect();
            let o = attack_derandomize(&t, &cb, array, &steered, &adirs, knowledge, &truth)?;
            mask_accuracy = Some(o.mask_accuracy);
            (o.ser, o.decisions.len())
        }
        AttackStrategy::NoiseCancel => {
            let o = attack_noise_cancel(&trace.select(&[1])?, &trace.select(&[2])?, null_gain_db.unwrap_or(0.0))?;
            warnings = o.warnings;
            (o.ser, setup.symbols - sidelobe_core::attack::PILOT_SYMBOLS)
        }
    };
    Ok(EvalResult {
        defense: defense.to_string(),
        attack: attack.to_string(),
        attacker_ser,
        attacker_psr: psr_from_ser(attacker_ser, &setup.packet),
        victim_ser,
        victim_psr: psr_from_ser(victim_ser, &setup.packet),
        scored_symbols: scored,
        mask_accuracy,
        attacker_devices: attackers,
        warnings,
    })
}

fn non_pilot_symbols(setup: &Setup) -> usize {
    let spp = setup.packet.symbols_per_packet;
    let pilot = sidelobe_core::attack::PILOT_SYMBOLS;
    (0..setup.symbols)
        .step_by(spp)
        .map(|s| (s + spp).min(setup.symbols) - s)
        .filter(|&len| len > pilot)
        .map(|len| len - pilot)
        .sum()
}

/// Steered weights of a setup, for callers that need the data pattern.
pub fn steered_weights(setup: &Setup) -> WeightVector {
    steer(&setup.array, setup.steering)
}
