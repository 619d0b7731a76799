//! Command bodies. Each returns the paths it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sidelobe_core::arraymodel::{apply_artifacts, steer, BeamPattern, PhasedArray};
use sidelobe_core::attack::AttackConfig;
use sidelobe_core::defense::DefenseConfig;
use sidelobe_core::linkabstraction::{calibrate_with, psr_from_snr, RateProfile};
use sidelobe_core::propagation::snr_db;
use sidelobe_core::scenario::Scenario;
use sidelobe_core::sweep::{area_vs_threshold_curve, sweep_psr, Component, PsrGrid};

use crate::config::{RunConfig, SetupKind};
use crate::eval::{check_compatible, evaluate, EvalResult, Setup};
use crate::output::{csv_digest, ensure_dir, read_to_string, write_json, write_text};
use crate::CliError;

/// Transmit array for a run, artifacts applied.
pub fn tx_array(cfg: &RunConfig, wavelength_m: f64) -> Result<PhasedArray, CliError> {
    let perfect = PhasedArray::with_geometry(cfg.array_rows, cfg.array_cols, 0.5, wavelength_m)?;
    Ok(match cfg.artifact_model() {
        Some(m) => apply_artifacts(&perfect, &m),
        None => perfect,
    })
}

pub fn profile(cfg: &RunConfig, s: &Scenario) -> Result<RateProfile, CliError> {
    Ok(calibrate_with(s, cfg.target_psr, cfg.rate_gbps, &cfg.calibration)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VictimSummary {
    pub distance_m: f64,
    pub gain_db: f64,
    pub snr_db: f64,
    pub psr: f64,
}

/// Victim link through the actual (possibly imperfect) transmit pattern.
pub fn victim_summary(s: &Scenario, array: &PhasedArray, p: &RateProfile) -> Result<VictimSummary, CliError> {
    let pattern = BeamPattern::new(array, &steer(array, s.tx_steering()))?;
    let (distance_m, dir) = s.geometry_to(s.rx.position)?;
    let gain_db = pattern.gain_db(dir);
    let snr = snr_db(&s.link_budget(distance_m, gain_db))?;
    Ok(VictimSummary {
        distance_m,
        gain_db,
        snr_db: snr,
        psr: psr_from_snr(snr, p),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSummary {
    pub cols: usize,
    pub rows: usize,
    pub x_range_m: [f64; 2],
    pub y_range_m: [f64; 2],
    pub cell_area_m2: f64,
    pub attacker_height_m: f64,
}

/// The `_report.json` document of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenario: String,
    pub rate_gbps: f64,
    pub variant: String,
    pub seed: u64,
    pub csv: String,
    pub csv_digest: String,
    /// Area in m² with PSR above each threshold, keyed by the threshold.
    pub areas_m2: BTreeMap<String, f64>,
    pub component_threshold: f64,
    pub components: Vec<Component>,
    pub grid: GridSummary,
    pub profile: RateProfile,
    pub victim: VictimSummary,
    /// TX sits at the origin; the examined rectangle starts there and extends
    /// along the boresight axis.
    pub tx_position_m: [f64; 3],
    pub rx_position_m: [f64; 3],
    pub config: serde_json::Value,
}

pub fn threshold_key(t: f64) -> String {
    format!("{t}")
}

pub struct SweepOutput {
    pub grid: PsrGrid,
    pub report: SweepReport,
    pub csv_text: String,
}

/// Runs a sweep without touching the filesystem.
pub fn compute_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let s = cfg.build_scenario()?;
    let array = tx_array(cfg, s.wavelength_m)?;
    let p = profile(cfg, &s)?;
    let grid = sweep_psr(&s, &array, &p)?;
    let curve = area_vs_threshold_curve(&grid, &cfg.thresholds, cfg.thresholds[0])?;
    let csv_text = grid.to_csv_string();
    let stem = cfg.stem();
    let report = SweepReport {
        scenario: s.name.to_string(),
        rate_gbps: cfg.rate_gbps,
        variant: cfg.variant(),
        seed: cfg.seed,
        csv: format!("{stem}.csv"),
        csv_digest: csv_digest(&csv_text)?,
        areas_m2: curve
            .areas
            .iter()
            .map(|a| (threshold_key(a.threshold), a.area_m2))
            .collect(),
        component_threshold: curve.component_threshold,
        components: curve.components,
        grid: GridSummary {
            cols: grid.cols,
            rows: grid.rows,
            x_range_m: [s.area.x_min, s.area.x_max],
            y_range_m: [s.area.y_min, s.area.y_max],
            cell_area_m2: grid.cell_area_m2,
            attacker_height_m: s.attacker_height_m,
        },
        victim: victim_summary(&s, &array, &p)?,
        profile: p,
        tx_position_m: s.tx.position,
        rx_position_m: s.rx.position,
        config: config_echo(cfg)?,
    };
    Ok(SweepOutput {
        grid,
        report,
        csv_text,
    })
}

fn config_echo(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(cfg).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = compute_sweep(cfg)?;
    ensure_dir(&cfg.out)?;
    let csv_path = cfg.out.join(&out.report.csv);
    let report_path = cfg.out.join(format!("{}_report.json", cfg.stem()));
    write_text(&csv_path, &out.csv_text)?;
    write_json(&report_path, &out.report)?;
    Ok(vec![csv_path, report_path])
}

/// Builds the evaluation setup named by the config.
pub fn build_setup(cfg: &RunConfig, attacks: &[AttackConfig]) -> Result<Setup, CliError> {
    match cfg.setup {
        SetupKind::Desk => Ok(Setup::desk(cfg.desk_snr_db, cfg.symbols)?),
        SetupKind::Scenario => {
            let s = cfg.build_scenario()?;
            let array = tx_array(cfg, s.wavelength_m)?;
            let p = profile(cfg, &s)?;
            let wanted = attacks.iter().map(|a| a.device_count()).max().unwrap_or(1).max(1);
            Ok(Setup::from_scenario(&s, &array, &p, cfg.symbols, wanted)?)
        }
    }
}

fn parse_pairs(cfg: &RunConfig) -> Result<(Vec<DefenseConfig>, Vec<AttackConfig>), CliError> {
    let defenses = cfg
        .defenses
        .iter()
        .map(|d| d.parse::<DefenseConfig>().map(|d| d.with_seed(cfg.seed)))
        .collect::<Result<Vec<_>, _>>()?;
    let attacks = cfg
        .attacks
        .iter()
        .map(|a| a.parse::<AttackConfig>())
        .collect::<Result<Vec<_>, _>>()?;
    for d in &defenses {
        for a in &attacks {
            check_compatible(d, a).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    Ok((defenses, attacks))
}

#[derive(Debug, Clone, Serialize)]
pub struct SetupSummary {
    pub label: String,
    pub array: String,
    pub symbols: usize,
    pub symbols_per_packet: usize,
    pub victim_snr_db: f64,
    pub candidate_count: usize,
}

impl SetupSummary {
    fn of(s: &Setup) -> Self {
        SetupSummary {
            label: s.label.clone(),
            array: format!("{}x{}", s.array.cols(), s.array.rows()),
            symbols: s.symbols,
            symbols_per_packet: s.packet.symbols_per_packet,
            victim_snr_db: s.victim.snr_db,
            candidate_count: s.candidates.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalDocument {
    pub seed: u64,
    pub setup: SetupSummary,
    pub results: Vec<EvalResult>,
    pub config: serde_json::Value,
}

fn eval_stem(cfg: &RunConfig) -> String {
    match cfg.setup {
        SetupKind::Scenario => cfg.stem(),
        SetupKind::Desk => format!("desk_1x8_{}db", cfg.desk_snr_db),
    }
}

/// Every defense against every attack.
pub fn compute_defense_eval(cfg: &RunConfig) -> Result<EvalDocument, CliError> {
    let (defenses, attacks) = parse_pairs(cfg)?;
    let setup = build_setup(cfg, &attacks)?;
    let pairs: Vec<(&DefenseConfig, &AttackConfig)> =
        defenses.iter().flat_map(|d| attacks.iter().map(move |a| (d, a))).collect();
    let results = pairs
        .par_iter()
        .map(|(d, a)| evaluate(&setup, d, a, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalDocument {
        seed: cfg.seed,
        setup: SetupSummary::of(&setup),
        results,
        config: config_echo(cfg)?,
    })
}

pub fn cmd_defense_eval(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let doc = compute_defense_eval(cfg)?;
    print_table(&doc.results);
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join(format!("{}_defense_eval.json", eval_stem(cfg)));
    write_json(&path, &doc)?;
    Ok(vec![path])
}

/// A single defense/attack pair with device placements.
pub fn cmd_attack_eval(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    if cfg.defenses.len() != 1 || cfg.attacks.len() != 1 {
        return Err(CliError::Usage(
            "attack-eval takes exactly one --defense and one --attack (use defense-eval for a matrix)".into(),
        ));
    }
    let doc = compute_defense_eval(cfg)?;
    print_table(&doc.results);
    for w in doc.results.iter().flat_map(|r| &r.warnings) {
        eprintln!("warning: {w}");
    }
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join(format!("{}_attack_eval.json", eval_stem(cfg)));
    write_json(&path, &doc)?;
    Ok(vec![path])
}

fn print_table(results: &[EvalResult]) {
    println!(
        "{:<36} {:<32} {:>12} {:>12} {:>12}",
        "defense", "attack", "attacker_ser", "attacker_psr", "victim_ser"
    );
    for r in results {
        println!(
            "{:<36} {:<32} {:>12.3e} {:>12.4} {:>12.3e}",
            r.defense, r.attack, r.attacker_ser, r.attacker_psr, r.victim_ser
        );
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub source: String,
    pub scenario: String,
    pub rate_gbps: f64,
    pub variant: String,
    /// Aligned with [`Summary::thresholds`]; `None` where the sweep lacked
    /// that threshold.
    pub areas_m2: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub thresholds: Vec<f64>,
    pub rows: Vec<SummaryRow>,
}

/// Aggregates sweep reports into one scenario × threshold table.
pub fn compute_report(inputs: &[PathBuf]) -> Result<Summary, CliError> {
    if inputs.is_empty() {
        return Err(CliError::Usage("report needs at least one --inputs file".into()));
    }
    let missing: Vec<String> = inputs
        .iter()
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Io(format!("missing input files: {}", missing.join(", "))));
    }
    let mut reports = Vec::new();
    for p in inputs {
        let r: SweepReport = serde_json::from_str(&read_to_string(p)?)
            .map_err(|e| CliError::Usage(format!("{} is not a sweep report: {e}", p.display())))?;
        reports.push((source_name(p), r));
    }
    let mut thresholds: Vec<f64> = Vec::new();
    for (_, r) in &reports {
        for k in r.areas_m2.keys() {
            let t: f64 = k
                .parse()
                .map_err(|_| CliError::Usage(format!("bad threshold key '{k}' in {}", r.csv)))?;
            if !thresholds.contains(&t) {
                thresholds.push(t);
            }
        }
    }
    thresholds.sort_by(f64::total_cmp);
    let rows = reports
        .into_iter()
        .map(|(source, r)| SummaryRow {
            areas_m2: thresholds
                .iter()
                .map(|&t| r.areas_m2.get(&threshold_key(t)).copied())
                .collect(),
            source,
            scenario: r.scenario,
            rate_gbps: r.rate_gbps,
            variant: r.variant,
        })
        .collect();
    Ok(Summary { thresholds, rows })
}

fn source_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

pub fn summary_csv(s: &Summary) -> String {
    let mut out = String::from("scenario,rate_gbps,variant");
    for t in &s.thresholds {
        out.push_str(&format!(",area_psr_gt_{t}"));
    }
    out.push('\n');
    for r in &s.rows {
        out.push_str(&format!("{},{:.1},{}", r.scenario, r.rate_gbps, r.variant));
        for a in &r.areas_m2 {
            match a {
                Some(v) => out.push_str(&format!(",{v:.6}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn cmd_report(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let summary = compute_report(inputs)?;
    let csv = summary_csv(&summary);
    print!("{csv}");
    ensure_dir(out)?;
    let json_path = out.join("summary.json");
    let csv_path = out.join("summary.csv");
    write_json(&json_path, &summary)?;
    write_text(&csv_path, &csv)?;
    Ok(vec![json_path, csv_path])
}

pub fn cmd_digest(path: &Path) -> Result<String, CliError> {
    csv_digest(&read_to_string(path)?)
}
