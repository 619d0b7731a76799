//! Run configuration: TOML file, `SIDELOBE_*` environment and flags.
//!
//! Precedence, lowest first: built-in defaults, the config file, the
//! environment, command-line flags. Environment and flags are merged by
//! clap before they reach [`resolve`].

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sidelobe_core::arraymodel::ArtifactModel;
use sidelobe_core::attack::AttackConfig;
use sidelobe_core::defense::DefenseConfig;
use sidelobe_core::linkabstraction::CalibrationOptions;
use sidelobe_core::rng::{stream_seed, Stream};
use sidelobe_core::scenario::{Scenario, ScenarioName};
use sidelobe_core::sweep::DEFAULT_THRESHOLDS;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SYMBOLS: usize = 20_000;
pub const DEFAULT_TARGET_PSR: f64 = 0.95;
pub const DEFAULT_DESK_SNR_DB: f64 = 20.0;

/// Options shared by every command. All are optional so that unset flags
/// fall through to the file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file
    #[arg(long, env = "SIDELOBE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Deployment preset: mesh, picocell or p2p
    #[arg(long, env = "SIDELOBE_SCENARIO")]
    pub scenario: Option<String>,
    /// TX array as HORIZONTALxVERTICAL element counts, e.g. 16x8
    #[arg(long, env = "SIDELOBE_ANTENNAS")]
    pub antennas: Option<String>,
    /// Hardware artifacts: none or preset
    #[arg(long, env = "SIDELOBE_ARTIFACTS")]
    pub artifacts: Option<String>,
    /// Link rate in Gbps (defaults to the preset's maximum)
    #[arg(long, env = "SIDELOBE_RATE")]
    pub rate: Option<f64>,
    /// Attacker antenna height in meters
    #[arg(long, env = "SIDELOBE_ATTACKER_HEIGHT")]
    pub attacker_height: Option<f64>,
    /// Comma-separated PSR thresholds, ascending
    #[arg(long, env = "SIDELOBE_THRESHOLDS", value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Master seed
    #[arg(long, env = "SIDELOBE_SEED")]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, env = "SIDELOBE_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Defense settings, comma-separated or repeated (none, antenna:flip:k=32:m=256:symbol, rfchain:chains=3:power=0)
    #[arg(long, env = "SIDELOBE_DEFENSE", value_delimiter = ',')]
    pub defense: Option<Vec<String>>,
    /// Attack strategies, comma-separated or repeated (single, derand:devices=4, cancel)
    #[arg(long, env = "SIDELOBE_ATTACK", value_delimiter = ',')]
    pub attack: Option<Vec<String>>,
    /// Symbols simulated per evaluation
    #[arg(long, env = "SIDELOBE_SYMBOLS")]
    pub symbols: Option<usize>,
    /// Geometry: scenario (attackers on the preset grid) or desk (1x8 bench)
    #[arg(long, env = "SIDELOBE_SETUP")]
    pub setup: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub target_psr: Option<f64>,
    pub margin_db: Option<f64>,
    pub slope_db: Option<f64>,
    pub rate_gap_db: Option<f64>,
    pub bandwidth_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eirp_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_height_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_height_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_rows: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactFile {
    pub amp_sigma_db: Option<f64>,
    pub phase_sigma_deg: Option<f64>,
}

/// The config file as written.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub antennas: Option<String>,
    pub artifacts: Option<String>,
    pub rate: Option<f64>,
    pub attacker_height: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub defense: Option<Vec<String>>,
    pub attack: Option<Vec<String>>,
    pub symbols: Option<usize>,
    pub setup: Option<String>,
    pub desk_snr_db: Option<f64>,
    pub inputs: Option<Vec<PathBuf>>,
    pub calibration: Option<CalibrationFile>,
    pub scenario_overrides: Option<ScenarioOverrides>,
    pub artifact_model: Option<ArtifactFile>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {}", path.display(), e.message())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactChoice {
    None,
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetupKind {
    Scenario,
    Desk,
}

/// Fully resolved configuration, echoed into every output document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    /// Horizontal element count.
    pub array_cols: usize,
    /// Vertical element count.
    pub array_rows: usize,
    pub artifacts: ArtifactChoice,
    pub artifact_amp_sigma_db: f64,
    pub artifact_phase_sigma_deg: f64,
    pub rate_gbps: f64,
    pub attacker_height_m: f64,
    pub thresholds: Vec<f64>,
    pub seed: u64,
    pub target_psr: f64,
    pub calibration: CalibrationOptions,
    #[serde(skip_serializing_if = "is_default_overrides")]
    pub scenario_overrides: ScenarioOverrides,
    pub defenses: Vec<String>,
    pub attacks: Vec<String>,
    pub symbols: usize,
    pub setup: SetupKind,
    pub desk_snr_db: f64,
    /// Not echoed: outputs must not depend on where they are written.
    #[serde(skip)]
    pub out: PathBuf,
}

fn is_default_overrides(o: &ScenarioOverrides) -> bool {
    *o == ScenarioOverrides::default()
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value for '{key}': {msg}"))
}

/// Parses `HxV` (horizontal by vertical element counts).
pub fn parse_antennas(s: &str) -> Result<(usize, usize), CliError> {
    let (h, v) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| bad("antennas", format!("'{s}' is not of the form 16x8")))?;
    let h: usize = h.parse().map_err(|_| bad("antennas", format!("'{s}' is not of the form 16x8")))?;
    let v: usize = v.parse().map_err(|_| bad("antennas", format!("'{s}' is not of the form 16x8")))?;
    if h == 0 || v == 0 {
        return Err(bad("antennas", "element counts must be positive"));
    }
    Ok((h, v))
}

pub fn resolve(common: &CommonArgs, eval: Option<&EvalArgs>) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let pick = |flag: &Option<String>, file: &Option<String>| flag.clone().or_else(|| file.clone());

    let scenario: ScenarioName = pick(&common.scenario, &file.scenario)
        .unwrap_or_else(|| "picocell".into())
        .parse()
        .map_err(|e| bad("scenario", e))?;
    let (array_cols, array_rows) = parse_antennas(&pick(&common.antennas, &file.antennas).unwrap_or_else(|| "16x8".into()))?;
    let artifacts = match pick(&common.artifacts, &file.artifacts).as_deref().unwrap_or("none") {
        "none" => ArtifactChoice::None,
        "preset" | "measured" => ArtifactChoice::Preset,
        other => return Err(bad("artifacts", format!("'{other}' (expected none or preset)"))),
    };
    let art = file.artifact_model.clone().unwrap_or_default();
    let preset = ArtifactModel::measured_like(0);
    let artifact_amp_sigma_db = art.amp_sigma_db.unwrap_or(preset.amp_sigma_db);
    let artifact_phase_sigma_deg = art.phase_sigma_deg.unwrap_or(preset.phase_sigma_deg);
    ArtifactModel::new(artifact_amp_sigma_db, artifact_phase_sigma_deg, 0).map_err(|e| bad("artifact_model", e))?;

    let base = Scenario::preset(scenario);
    let rate_gbps = common.rate.or(file.rate).unwrap_or(base.rate_gbps);
    if !(rate_gbps > 0.0 && rate_gbps.is_finite()) {
        return Err(bad("rate", format!("{rate_gbps} must be positive")));
    }
    let attacker_height_m = common.attacker_height.or(file.attacker_height).unwrap_or(1.0);
    if !(attacker_height_m >= 0.0 && attacker_height_m.is_finite()) {
        return Err(bad("attacker_height", format!("{attacker_height_m} must be >= 0")));
    }
    let thresholds = common
        .thresholds
        .clone()
        .or_else(|| file.thresholds.clone())
        .unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec());
    if thresholds.is_empty() {
        return Err(bad("thresholds", "at least one threshold is required"));
    }
    if let Some(t) = thresholds.iter().find(|t| !(0.0..1.0).contains(*t)) {
        return Err(bad("thresholds", format!("{t} outside [0, 1)")));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(bad("thresholds", "must be strictly ascending"));
    }
    let seed = common.seed.or(file.seed).unwrap_or(DEFAULT_SEED);

    let cal = file.calibration.clone().unwrap_or_default();
    let defaults = CalibrationOptions::default();
    let calibration = CalibrationOptions {
        margin_db: cal.margin_db.unwrap_or(defaults.margin_db),
        slope_db: cal.slope_db.unwrap_or(defaults.slope_db),
        rate_gap_db: cal.rate_gap_db.unwrap_or(defaults.rate_gap_db),
        bandwidth_hz: cal.bandwidth_hz.unwrap_or(defaults.bandwidth_hz),
    };
    let target_psr = cal.target_psr.unwrap_or(DEFAULT_TARGET_PSR);
    if !(target_psr > 0.0 && target_psr < 1.0) {
        return Err(bad("calibration.target_psr", format!("{target_psr} outside (0, 1)")));
    }

    let eval_list = |flag: Option<&Vec<String>>, file: &Option<Vec<String>>, default: &str| -> Vec<String> {
        let v = flag.cloned().or_else(|| file.clone()).unwrap_or_else(|| vec![default.to_string()]);
        v.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    };
    let defenses = eval_list(eval.and_then(|e| e.defense.as_ref()), &file.defense, "none");
    let attacks = eval_list(eval.and_then(|e| e.attack.as_ref()), &file.attack, "single");
    for d in &defenses {
        d.parse::<DefenseConfig>().map_err(|e| bad("defense", e))?;
    }
    for a in &attacks {
        a.parse::<AttackConfig>().map_err(|e| bad("attack", e))?;
    }
    let symbols = eval.and_then(|e| e.symbols).or(file.symbols).unwrap_or(DEFAULT_SYMBOLS);
    if symbols <= sidelobe_core::attack::PILOT_SYMBOLS {
        return Err(bad("symbols", format!("{symbols} leaves no data after the pilot prefix")));
    }
    let setup = match eval
        .and_then(|e| e.setup.clone())
        .or_else(|| file.setup.clone())
        .as_deref()
        .unwrap_or("scenario")
    {
        "scenario" => SetupKind::Scenario,
        "desk" => SetupKind::Desk,
        other => return Err(bad("setup", format!("'{other}' (expected scenario or desk)"))),
    };
    let desk_snr_db = file.desk_snr_db.unwrap_or(DEFAULT_DESK_SNR_DB);
    let out = common.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("out"));

    let cfg = RunConfig {
        scenario,
        array_cols,
        array_rows,
        artifacts,
        artifact_amp_sigma_db,
        artifact_phase_sigma_deg,
        rate_gbps,
        attacker_height_m,
        thresholds,
        seed,
        target_psr,
        calibration,
        scenario_overrides: file.scenario_overrides.clone().unwrap_or_default(),
        defenses,
        attacks,
        symbols,
        setup,
        desk_snr_db,
        out,
    };
    cfg.build_scenario()?;
    Ok(cfg)
}

impl RunConfig {
    /// Antenna label in `HxV` form.
    pub fn antennas(&self) -> String {
        format!("{}x{}", self.array_cols, self.array_rows)
    }

    /// Artifact model for this run, if any. Its seed derives from the
    /// master seed.
    pub fn artifact_model(&self) -> Option<ArtifactModel> {
        match self.artifacts {
            ArtifactChoice::None => None,
            ArtifactChoice::Preset => Some(ArtifactModel {
                amp_sigma_db: self.artifact_amp_sigma_db,
                phase_sigma_deg: self.artifact_phase_sigma_deg,
                seed: stream_seed(self.seed, Stream::Artifacts),
            }),
        }
    }

    pub fn build_scenario(&self) -> Result<Scenario, CliError> {
        let o = &self.scenario_overrides;
        let mut s = Scenario::preset(self.scenario);
        if let Some(v) = o.eirp_dbm {
            s.eirp_dbm = v;
        }
        if o.tx_height_m.is_some() || o.rx_distance_m.is_some() || o.rx_height_m.is_some() {
            let rebuilt = Scenario::new(
                s.name,
                o.tx_height_m.unwrap_or(s.tx.position[2]),
                o.rx_distance_m.unwrap_or(s.rx.position[0] - s.tx.position[0]),
                o.rx_height_m.unwrap_or(s.rx.position[2]),
                s.eirp_dbm,
                s.rate_gbps,
                s.area,
            )
            .map_err(|e| bad("scenario_overrides", e))?;
            s = rebuilt;
        }
        if let Some(v) = o.x_min {
            s.area.x_min = v;
        }
        if let Some(v) = o.x_max {
            s.area.x_max = v;
        }
        if let Some(v) = o.y_min {
            s.area.y_min = v;
        }
        if let Some(v) = o.y_max {
            s.area.y_max = v;
        }
        if let Some(v) = o.grid_cols {
            s.grid_cols = v;
        }
        if let Some(v) = o.grid_rows {
            s.grid_rows = v;
        }
        s.attacker_height_m = self.attacker_height_m;
        s.validate().map_err(|e| bad("scenario_overrides", e))?;
        Ok(s)
    }

    /// `{cols}x{rows}-{artifacts}-h{height}`.
    pub fn variant(&self) -> String {
        let art = match self.artifacts {
            ArtifactChoice::None => "none",
            ArtifactChoice::Preset => "preset",
        };
        format!("{}-{art}-h{:.1}", self.antennas(), self.attacker_height_m)
    }

    /// `{scenario}_{rate}gbps_{variant}`.
    pub fn stem(&self) -> String {
        format!("{}_{:.1}gbps_{}", self.scenario, self.rate_gbps, self.variant())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antennas_are_horizontal_by_vertical() {
        assert_eq!(parse_antennas("64x8").unwrap(), (64, 8));
        assert!(parse_antennas("64").is_err());
        assert!(parse_antennas("0x8").is_err());
        assert!(parse_antennas("ax8").is_err());
    }

    #[test]
    fn defaults_resolve() {
        let c = resolve(&CommonArgs::default(), None).unwrap();
        assert_eq!(c.scenario, ScenarioName::Picocell);
        assert_eq!(c.rate_gbps, 1.5);
        assert_eq!(c.thresholds, DEFAULT_THRESHOLDS.to_vec());
        assert_eq!(c.stem(), "picocell_1.5gbps_16x8-none-h1.0");
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "scenario = \"mesh\"\nseed = 9\nrate = 1.0\n").unwrap();
        let mut args = CommonArgs {
            config: Some(p),
            ..Default::default()
        };
        let c = resolve(&args, None).unwrap();
        assert_eq!((c.scenario, c.seed), (ScenarioName::Mesh, 9));
        args.seed = Some(3);
        assert_eq!(resolve(&args, None).unwrap().seed, 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "scenari = \"mesh\"\n").unwrap();
        let args = CommonArgs {
            config: Some(p),
            ..Default::default()
        };
        match resolve(&args, None) {
            Err(CliError::Usage(m)) => assert!(m.contains("scenari"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let c = CommonArgs {
            thresholds: Some(vec![0.5, 0.1]),
            ..Default::default()
        };
        assert!(matches!(resolve(&c, None), Err(CliError::Usage(_))));
        let c = CommonArgs {
            scenario: Some("lan".into()),
            ..Default::default()
        };
        assert!(matches!(resolve(&c, None), Err(CliError::Usage(_))));
    }
}
