//! Transmitter-side defenses.
//!
//! *Antenna randomization* picks, per symbol or per packet, one of `M`
//! precomputed subsets of `k` elements and either disables them or flips
//! their phase. *RF-chain noise* adds extra transmit chains radiating
//! Gaussian noise through precoders that null the victim direction.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arraymodel::{Direction, PhasedArray, WeightVector};
use crate::baseband::{complex_normal, PacketModel, WeightSchedule};
use crate::rng::{rng_from_seed, stream_seed, Stream};
use crate::{Error, Result};

pub const DEFAULT_CODEBOOK_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    Disable,
    Flip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Switching {
    PerSymbol,
    PerPacket,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaDefense {
    pub mode: MaskMode,
    /// Subset size; `None` means a quarter of the array.
    pub subset_size_k: Option<usize>,
    pub codebook_size_m: usize,
    pub switching: Switching,
}

impl AntennaDefense {
    pub fn subset_size(&self, element_count: usize) -> usize {
        self.subset_size_k.unwrap_or(element_count / 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfChainDefense {
    pub noise_chains: usize,
    /// Total noise power relative to the data signal's power (dB).
    pub noise_power_rel_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DefenseKind {
    None,
    Antenna(AntennaDefense),
    Rfchain(RfChainDefense),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefenseConfig {
    #[serde(flatten)]
    pub kind: DefenseKind,
    pub seed: u64,
}

impl DefenseConfig {
    pub fn none() -> Self {
        DefenseConfig {
            kind: DefenseKind::None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn antenna(&self) -> Option<&AntennaDefense> {
        match &self.kind {
            DefenseKind::Antenna(a) => Some(a),
            _ => None,
        }
    }

    pub fn rfchain(&self) -> Option<&RfChainDefense> {
        match &self.kind {
            DefenseKind::Rfchain(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for DefenseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DefenseKind::None => f.write_str("none"),
            DefenseKind::Antenna(a) => {
                let mode = match a.mode {
                    MaskMode::Disable => "disable",
                    MaskMode::Flip => "flip",
                };
                write!(f, "antenna:{mode}")?;
                if let Some(k) = a.subset_size_k {
                    write!(f, ":k={k}")?;
                }
                let sw = match a.switching {
                    Switching::PerSymbol => "symbol",
                    Switching::PerPacket => "packet",
                };
                write!(f, ":m={}:{sw}", a.codebook_size_m)
            }
            DefenseKind::Rfchain(r) => write!(f, "rfchain:chains={}:power={}", r.noise_chains, r.noise_power_rel_db),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, spec: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value '{value}' for '{key}' in '{spec}'")))
}

impl FromStr for DefenseConfig {
    type Err = Error;

    /// `none`, `antenna:<flip|disable>[:k=K][:m=M][:symbol|packet]`,
    /// `rfchain[:chains=R][:power=DB]`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let mut parts = spec.split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let kind = match head.as_str() {
            "none" => {
                if parts.next().is_some() {
                    return Err(Error::config(format!("'none' takes no options: '{spec}'")));
                }
                DefenseKind::None
            }
            "antenna" => {
                let mode = match parts.next().map(str::to_ascii_lowercase).as_deref() {
                    Some("flip") => MaskMode::Flip,
                    Some("disable") => MaskMode::Disable,
                    _ => {
                        return Err(Error::config(format!(
                            "antenna defense needs mode flip or disable: '{spec}'"
                        )))
                    }
                };
                let mut a = AntennaDefense {
                    mode,
                    subset_size_k: None,
                    codebook_size_m: DEFAULT_CODEBOOK_SIZE,
                    switching: Switching::PerSymbol,
                };
                for p in parts {
                    match p.split_once('=') {
                        Some(("k", v)) => a.subset_size_k = Some(parse_num("k", v, spec)?),
                        Some(("m", v)) => a.codebook_size_m = parse_num("m", v, spec)?,
                        None if p == "symbol" => a.switching = Switching::PerSymbol,
                        None if p == "packet" => a.switching = Switching::PerPacket,
                        _ => return Err(Error::config(format!("unknown antenna option '{p}' in '{spec}'"))),
                    }
                }
                if a.codebook_size_m == 0 {
                    return Err(Error::config(format!("codebook size m must be >= 1 in '{spec}'")));
                }
                DefenseKind::Antenna(a)
            }
            "rfchain" => {
                let mut r = RfChainDefense {
                    noise_chains: 1,
                    noise_power_rel_db: 0.0,
                };
                for p in parts {
                    match p.split_once('=') {
                        Some(("chains", v)) => r.noise_chains = parse_num("chains", v, spec)?,
                        Some(("power", v)) => r.noise_power_rel_db = parse_num("power", v, spec)?,
                        _ => return Err(Error::config(format!("unknown rfchain option '{p}' in '{spec}'"))),
                    }
                }
                if r.noise_chains == 0 {
                    return Err(Error::config(format!("noise chains must be >= 1 in '{spec}'")));
                }
                if !r.noise_power_rel_db.is_finite() {
                    return Err(Error::config(format!("noise power must be finite in '{spec}'")));
                }
                DefenseKind::Rfchain(r)
            }
            _ => {
                return Err(Error::config(format!(
                    "unknown defense '{spec}' (expected none, antenna:... or rfchain:...)"
                )))
            }
        };
        Ok(DefenseConfig { kind, seed: 0 })
    }
}

/// `M` distinct `k`-subsets of the array's elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub mode: MaskMode,
    pub element_count: usize,
    /// Sorted element indices of each mask.
    pub masks: Vec<Vec<usize>>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn apply(&self, mask: usize, w: &WeightVector) -> WeightVector {
        let mut out = w.clone();
        let slice = out.as_mut_slice();
        for &i in &self.masks[mask] {
            slice[i] = match self.mode {
                MaskMode::Disable => Complex64::new(0.0, 0.0),
                MaskMode::Flip => -slice[i],
            };
        }
        out
    }

    /// Every mask applied to `w`, in codebook order.
    pub fn patterns(&self, w: &WeightVector) -> Vec<WeightVector> {
        (0..self.len()).map(|m| self.apply(m, w)).collect()
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Enumeration is used instead of rejection sampling below this many subsets.
const ENUMERATION_LIMIT: u128 = 1 << 16;

pub fn build_codebook(array: &PhasedArray, cfg: &DefenseConfig) -> Result<Codebook> {
    let a = cfg
        .antenna()
        .ok_or_else(|| Error::config("codebook requires an antenna defense"))?;
    let n = array.element_count();
    let k = a.subset_size(n);
    let m = a.codebook_size_m;
    if k > n {
        return Err(Error::config(format!("subset size k={k} exceeds {n} elements")));
    }
    if m == 0 {
        return Err(Error::config("codebook size m must be >= 1"));
    }
    let available = binomial(n, k);
    if m as u128 > available {
        return Err(Error::config(format!(
            "codebook size m={m} exceeds the {available} distinct {k}-subsets of {n} elements"
        )));
    }
    let mut rng = rng_from_seed(stream_seed(cfg.seed, Stream::Codebook));
    let masks = if available <= ENUMERATION_LIMIT {
        let all = all_subsets(n, k);
        sample(&mut rng, all.len(), m)
            .into_iter()
            .map(|i| all[i].clone())
            .collect()
    } else {
        let mut seen = HashSet::with_capacity(m);
        let mut masks = Vec::with_capacity(m);
        while masks.len() < m {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            if seen.insert(s.clone()) {
                masks.push(s);
            }
        }
        masks
    };
    Ok(Codebook {
        mode: a.mode,
        element_count: n,
        masks,
    })
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance to the next combination in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Per-symbol transmit weights under `cfg`. Without an antenna defense the
/// steered weights are used throughout.
pub fn weight_schedule(
    steered: &WeightVector,
    codebook: Option<&Codebook>,
    cfg: &DefenseConfig,
    symbol_count: usize,
    pm: &PacketModel,
) -> Result<WeightSchedule> {
    let Some(a) = cfg.antenna() else {
        return Ok(WeightSchedule::constant(steered.clone(), symbol_count));
    };
    let cb = codebook.ok_or_else(|| Error::contract("antenna defense needs a codebook"))?;
    if cb.element_count != steered.len() {
        return Err(Error::contract(format!(
            "codebook for {} elements, weights have {}",
            cb.element_count,
            steered.len()
        )));
    }
    let m = cb.len() as u32;
    let mut rng = rng_from_seed(stream_seed(cfg.seed, Stream::Schedule));
    let index: Vec<u32> = match a.switching {
        Switching::PerSymbol => (0..symbol_count).map(|_| rng.random_range(0..m)).collect(),
        Switching::PerPacket => {
            let spp = pm.symbols_per_packet;
            let mut out = Vec::with_capacity(symbol_count);
            while out.len() < symbol_count {
                let pick = rng.random_range(0..m);
                let take = spp.min(symbol_count - out.len());
                out.extend(std::iter::repeat_n(pick, take));
            }
            out
        }
    };
    WeightSchedule::new(cb.patterns(steered), index)
}

/// Noise precoders orthogonal to the array's response toward `rx_dir` and to
/// each other. Their summed power is `noise_power_rel_db` relative to a
/// unit-magnitude steering vector (power `N`), split equally.
pub fn rf_noise_precoders(array: &PhasedArray, rx_dir: Direction, cfg: &DefenseConfig) -> Result<Vec<WeightVector>> {
    let r = cfg
        .rfchain()
        .ok_or_else(|| Error::config("noise precoders require an rfchain defense"))?;
    let n = array.element_count();
    if r.noise_chains == 0 || r.noise_chains >= n {
        return Err(Error::config(format!(
            "{} noise chains need 1 <= chains < {n} elements",
            r.noise_chains
        )));
    }
    // AF(v, rx) = sum v_n c_n, so nulling means v is orthogonal to conj(c).
    let c: Vec<Complex64> = array.response_vector(rx_dir).into_iter().map(|x| x.conj()).collect();
    let mut basis: Vec<Vec<Complex64>> = vec![normalized(c).ok_or_else(|| Error::contract("zero response toward rx"))?];
    let mut rng = rng_from_seed(stream_seed(cfg.seed, Stream::Precoders));
    while basis.len() < r.noise_chains + 1 {
        let mut x: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng)).collect();
        // Two passes of Gram-Schmidt keep orthogonality near machine precision.
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(&x).map(|(bi, xi)| bi.conj() * xi).sum();
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= bi * proj);
            }
        }
        if let Some(v) = normalized(x) {
            basis.push(v);
        }
    }
    let scale = (10f64.powf(r.noise_power_rel_db / 10.0) * n as f64 / r.noise_chains as f64).sqrt();
    Ok(basis
        .into_iter()
        .skip(1)
        .map(|v| WeightVector::new(v.into_iter().map(|x| x * scale).collect()))
        .collect())
}

fn normalized(mut v: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 1e-12) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arraymodel::{apply_artifacts, array_factor, steer, ArtifactModel, BeamPattern};

    fn antenna(mode: &str, k: usize, m: usize, sw: &str) -> DefenseConfig {
        format!("antenna:{mode}:k={k}:m={m}:{sw}").parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["none", "antenna:flip:k=32:m=256:symbol", "antenna:disable:k=2:m=16:packet", "rfchain:chains=3:power=0"] {
            let d: DefenseConfig = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        let d: DefenseConfig = "antenna:flip".parse().unwrap();
        assert_eq!(d.antenna().unwrap().subset_size(128), 32);
        assert_eq!(d.antenna().unwrap().codebook_size_m, 256);
        let r: DefenseConfig = "rfchain".parse().unwrap();
        assert_eq!(r.rfchain().unwrap().noise_chains, 1);
        for bad in ["", "jam", "antenna", "antenna:twist", "antenna:flip:q=1", "antenna:flip:m=0", "rfchain:chains=0", "rfchain:chains=x", "none:1"] {
            assert!(matches!(bad.parse::<DefenseConfig>(), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn identity_masks_for_k_zero() {
        let arr = PhasedArray::new(1, 8).unwrap();
        let cb = build_codebook(&arr, &antenna("flip", 0, 1, "symbol")).unwrap();
        let w = steer(&arr, Direction::BORESIGHT);
        assert!(cb.patterns(&w).iter().all(|p| *p == w));
    }

    #[test]
    fn exhaustive_small_codebook() {
        let arr = PhasedArray::new(2, 2).unwrap();
        let cb = build_codebook(&arr, &antenna("disable", 2, 6, "symbol")).unwrap();
        let mut masks = cb.masks.clone();
        masks.sort();
        assert_eq!(masks, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert!(matches!(build_codebook(&arr, &antenna("disable", 2, 7, "symbol")), Err(Error::Config(_))));
        assert!(build_codebook(&arr, &antenna("disable", 5, 1, "symbol")).is_err());
    }

    #[test]
    fn large_codebook_is_distinct_and_seeded() {
        let arr = PhasedArray::new(8, 16).unwrap();
        let cfg = antenna("flip", 32, 256, "symbol").with_seed(4);
        let cb = build_codebook(&arr, &cfg).unwrap();
        let set: HashSet<_> = cb.masks.iter().collect();
        assert_eq!(set.len(), 256);
        assert!(cb.masks.iter().all(|m| m.len() == 32));
        assert_eq!(cb, build_codebook(&arr, &cfg).unwrap());
        assert_ne!(cb, build_codebook(&arr, &cfg.with_seed(5)).unwrap());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(5, 7), 0);
        assert_eq!(binomial(128, 32), 1_477_806_921_502_280_666_682_474_774_300);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn flip_and_disable_semantics() {
        let cb = Codebook {
            mode: MaskMode::Flip,
            element_count: 3,
            masks: vec![vec![1]],
        };
        let w = WeightVector::uniform(3);
        assert_eq!(cb.apply(0, &w).as_slice()[1], Complex64::new(-1.0, 0.0));
        let cb = Codebook {
            mode: MaskMode::Disable,
            ..cb
        };
        assert_eq!(cb.apply(0, &w).as_slice()[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn schedules() {
        let arr = PhasedArray::new(1, 8).unwrap();
        let w = steer(&arr, Direction::BORESIGHT);
        let pm = PacketModel::default();
        let none = weight_schedule(&w, None, &DefenseConfig::none(), 50, &pm).unwrap();
        assert!((0..50).all(|t| *none.weights_at(t) == w));

        let cfg = antenna("flip", 2, 16, "packet");
        let cb = build_codebook(&arr, &cfg).unwrap();
        let one = weight_schedule(&w, Some(&cb), &cfg, 1000, &pm).unwrap();
        assert!(one.index().iter().all(|&i| i == one.index()[0]));
        let three = weight_schedule(&w, Some(&cb), &cfg, 3 * 1024, &pm).unwrap();
        for p in three.index().chunks(1024) {
            assert!(p.iter().all(|&i| i == p[0]));
        }
    }

    #[test]
    fn per_symbol_draws_are_uniform() {
        let arr = PhasedArray::new(1, 8).unwrap();
        let w = steer(&arr, Direction::BORESIGHT);
        let cfg = antenna("flip", 2, 16, "symbol").with_seed(9);
        let cb = build_codebook(&arr, &cfg).unwrap();
        let n = 10_000;
        let s = weight_schedule(&w, Some(&cb), &cfg, n, &PacketModel::default()).unwrap();
        let mut counts = [0usize; 16];
        s.index().iter().for_each(|&i| counts[i as usize] += 1);
        let p = 1.0 / 16.0;
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - mean).abs() < 5.0 * sd), "{counts:?}");
    }

    #[test]
    fn flip_main_lobe_loss_bound() {
        let arr = PhasedArray::new(8, 16).unwrap();
        let w = steer(&arr, Direction::BORESIGHT);
        let n = arr.element_count() as f64;
        for k in [1usize, 8, 32] {
            let cfg = antenna("flip", k, 8, "symbol");
            let cb = build_codebook(&arr, &cfg).unwrap();
            let bound = 20.0 * (1.0 - 2.0 * k as f64 / n).log10();
            for p in cb.patterns(&w) {
                let loss = 20.0 * (array_factor(&arr, &p, Direction::BORESIGHT).unwrap().norm() / n).log10();
                assert!(loss >= bound - 1e-9);
            }
        }
    }

    #[test]
    fn precoders_null_the_victim() {
        let arr = apply_artifacts(&PhasedArray::new(8, 16).unwrap(), &ArtifactModel::measured_like(2));
        let rx = Direction::from_degrees(3.0, -2.0).unwrap();
        let cfg: DefenseConfig = "rfchain:chains=3:power=0".parse().unwrap();
        let v = rf_noise_precoders(&arr, rx, &cfg).unwrap();
        assert_eq!(v.len(), 3);
        for (i, a) in v.iter().enumerate() {
            let peak = BeamPattern::new(&arr, a).unwrap().peak();
            assert!(array_factor(&arr, a, rx).unwrap().norm() < 1e-6 * peak);
            for b in &v[i + 1..] {
                let ip: Complex64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum();
                assert!(ip.norm() < 1e-9);
            }
        }
        let total: f64 = v.iter().map(|x| x.power()).sum();
        assert!((total - 128.0).abs() < 1e-9);
    }

    #[test]
    fn single_chain_leaks_into_side_lobes() {
        let arr = PhasedArray::new(1, 16).unwrap();
        let cfg: DefenseConfig = "rfchain:chains=1".parse().unwrap();
        let v = rf_noise_precoders(&arr, Direction::BORESIGHT, &cfg).unwrap();
        // First side lobe of a 16-element line sits near sin(az) = 1.5/8.
        let sl = Direction::new((1.5f64 / 8.0).asin(), 0.0).unwrap();
        assert!(array_factor(&arr, &v[0], sl).unwrap().norm() > 1e-3);
    }

    #[test]
    fn too_many_chains_rejected() {
        let arr = PhasedArray::new(1, 4).unwrap();
        let cfg: DefenseConfig = "rfchain:chains=4".parse().unwrap();
        assert!(matches!(rf_noise_precoders(&arr, Direction::BORESIGHT, &cfg), Err(Error::Config(_))));
    }
}
