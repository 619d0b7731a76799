//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails other than those listed in
//! `KNOWN_FAILURES`, whose analysis lives with the project notes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use sidelobe_cli::commands::{cmd_sweep, compute_report, compute_sweep, victim_summary};
use sidelobe_cli::config::{resolve, CommonArgs, RunConfig};
use sidelobe_cli::eval::{evaluate, Setup};
use sidelobe_core::arraymodel::{array_factor, steer, BeamPattern, Direction, PhasedArray, WeightVector};
use sidelobe_core::attack::AttackConfig;
use sidelobe_core::baseband::{demodulate, random_symbols, transmit, WeightSchedule};
use sidelobe_core::defense::DefenseConfig;
use sidelobe_core::linkabstraction::calibrate_with;
use sidelobe_core::scenario::{Scenario, ScenarioName};
use sidelobe_core::sweep::area_above;
use sidelobe_core::Complex64;

/// Criteria expected to fail; see the decisions notes for the analysis.
const KNOWN_FAILURES: &[&str] = &["defense-matrix"];

/// Smallest reported threshold, standing in for "PSR > 0".
const ZERO_PLUS: f64 = 0.001;

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(args: &[(&str, &str)]) -> RunConfig {
    let mut c = CommonArgs::default();
    for (k, v) in args {
        match *k {
            "scenario" => c.scenario = Some(v.to_string()),
            "antennas" => c.antennas = Some(v.to_string()),
            "artifacts" => c.artifacts = Some(v.to_string()),
            "rate" => c.rate = Some(v.parse().unwrap()),
            "height" => c.attacker_height = Some(v.parse().unwrap()),
            "seed" => c.seed = Some(v.parse().unwrap()),
            "thresholds" => c.thresholds = Some(v.split(',').map(|t| t.parse().unwrap()).collect()),
            other => panic!("unknown key {other}"),
        }
    }
    resolve(&c, None).unwrap()
}

fn area0(cfg: &RunConfig) -> f64 {
    let out = compute_sweep(cfg).unwrap();
    area_above(&out.grid, ZERO_PLUS).unwrap()
}

fn line_af(n: usize, u: f64) -> f64 {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 * u))
        .sum::<Complex64>()
        .norm()
}

fn array_factor_oracle() -> Outcome {
    let n = 16;
    let samples = 2_000_000;
    let mut best = 0.0f64;
    for i in 0..=samples {
        let u = -1.0 + 2.0 * i as f64 / samples as f64;
        if u.abs() >= 2.0 / n as f64 {
            best = best.max(line_af(n, u));
        }
    }
    let oracle = 20.0 * (best / n as f64).log10();
    let arr = PhasedArray::new(1, n).unwrap();
    let model = BeamPattern::new(&arr, &steer(&arr, Direction::BORESIGHT))
        .unwrap()
        .peak_sidelobe_db(0.0);
    let w = WeightVector::uniform(n);
    let worst_null = (1..n)
        .map(|k| {
            // u = 2k/N folded into (-1, 1]; k = N/2 is endfire.
            let mut u = 2.0 * k as f64 / n as f64;
            if u > 1.0 {
                u -= 2.0;
            }
            let az = u.asin();
            array_factor(&arr, &w, Direction::new(az, 0.0).unwrap()).unwrap().norm()
        })
        .fold(0.0, f64::max);
    Outcome {
        pass: (model - oracle).abs() <= 0.1 && worst_null < 1e-9,
        detail: format!(
            "SLL model {model:.3} dB vs brute-force {oracle:.3} dB (large-N limit -13.26 dB, gap {:.3}); \
             max |AF| at {} nulls {worst_null:.1e}",
            (oracle + 13.26).abs(),
            n - 1
        ),
    }
}

fn antenna_trend() -> Outcome {
    let areas: Vec<f64> = ["16x8", "32x8", "64x8"]
        .iter()
        .map(|a| area0(&config(&[("scenario", "picocell"), ("antennas", a), ("rate", "1.0")])))
        .collect();
    let at15: Vec<f64> = ["16x8", "64x8"]
        .iter()
        .map(|a| area0(&config(&[("scenario", "picocell"), ("antennas", a), ("rate", "1.5")])))
        .collect();
    let factor = areas[0] / areas[2];
    Outcome {
        pass: areas[0] > areas[1] && areas[1] > areas[2] && factor >= 5.0,
        detail: format!(
            "1.0 Gbps areas {:.2} > {:.2} > {:.2} m2, 16->64 factor {factor:.2}x (at 1.5 Gbps: {:.2}x)",
            areas[0],
            areas[1],
            areas[2],
            at15[0] / at15[1]
        ),
    }
}

fn height_trend() -> Outcome {
    let a: Vec<f64> = ["1", "2", "6"]
        .iter()
        .map(|h| area0(&config(&[("scenario", "picocell"), ("antennas", "64x8"), ("rate", "1.0"), ("height", h)])))
        .collect();
    Outcome {
        pass: a[0] < a[1] && a[1] < a[2],
        detail: format!("64x8 areas at 1/2/6 m: {:.2} < {:.2} < {:.2} m2", a[0], a[1], a[2]),
    }
}

fn rate_trend() -> Outcome {
    let th = "0.001,0.1,0.5,0.95";
    let slow = compute_sweep(&config(&[("scenario", "picocell"), ("rate", "1.0"), ("thresholds", th)])).unwrap();
    let fast = compute_sweep(&config(&[("scenario", "picocell"), ("rate", "1.5"), ("thresholds", th)])).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, a_slow) in &slow.report.areas_m2 {
        let a_fast = fast.report.areas_m2[k];
        pass &= a_fast <= *a_slow;
        if k == "0.95" {
            pass &= a_fast < *a_slow;
        }
        parts.push(format!("{k}: {a_fast:.2}<={a_slow:.2}"));
    }
    Outcome {
        pass,
        detail: format!("1.5 vs 1.0 Gbps ({})", parts.join(", ")),
    }
}

fn artifact_trend() -> Outcome {
    let seeds = 20;
    let mut rel = Vec::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["mesh", "picocell", "p2p"] {
        let perfect = area0(&config(&[("scenario", name), ("artifacts", "none")]));
        let with: f64 = (0..seeds)
            .map(|s| area0(&config(&[("scenario", name), ("artifacts", "preset"), ("seed", &s.to_string())])))
            .sum::<f64>()
            / seeds as f64;
        // Share of the artifact-laden area removed by perfect antennas.
        let r = if with > 0.0 { (with - perfect) / with } else { 0.0 };
        if name != "p2p" {
            pass &= with >= perfect;
        }
        rel.push(r);
        parts.push(format!("{name} {perfect:.2} -> {with:.2} m2 ({:.0}%)", 100.0 * r));
    }
    pass &= rel[2] < rel[0] && rel[2] < rel[1];
    Outcome {
        pass,
        detail: format!("perfect -> artifact mean over {seeds} seeds: {}", parts.join(", ")),
    }
}

fn threshold_monotonicity(tmp: &Path) -> Outcome {
    let mut pass = true;
    let mut inputs = Vec::new();
    for name in ["mesh", "picocell", "p2p"] {
        let mut cfg = config(&[("scenario", name)]);
        cfg.out = tmp.join("mono");
        let written = cmd_sweep(&cfg).unwrap();
        let out = compute_sweep(&cfg).unwrap();
        let areas: Vec<f64> = cfg.thresholds.iter().map(|t| out.report.areas_m2[&format!("{t}")]).collect();
        pass &= areas.windows(2).all(|w| w[1] <= w[0]);
        inputs.push(written[1].clone());
    }
    let summary = compute_report(&inputs).unwrap();
    let cols: Vec<usize> = [0.1, 0.5, 0.95]
        .iter()
        .filter_map(|t| summary.thresholds.iter().position(|x| x == t))
        .collect();
    pass &= summary.rows.len() == 3 && cols.len() == 3;
    let table: Vec<String> = summary
        .rows
        .iter()
        .map(|r| {
            let v: Vec<String> = cols.iter().map(|&c| format!("{:.1}", r.areas_m2[c].unwrap_or(f64::NAN))).collect();
            format!("{} [{}]", r.scenario, v.join(" / "))
        })
        .collect();
    Outcome {
        pass,
        detail: format!("curves non-increasing; >10%/>50%/>95% table: {}", table.join(", ")),
    }
}

fn victim_calibration() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ScenarioName::ALL {
        let s = Scenario::preset(name);
        let cfg = config(&[("scenario", name.as_str())]);
        let p = calibrate_with(&s, cfg.target_psr, s.rate_gbps, &cfg.calibration).unwrap();
        let arr = PhasedArray::new(8, 16).unwrap();
        let v = victim_summary(&s, &arr, &p).unwrap();
        pass &= v.psr >= 0.95;
        parts.push(format!("{name} {:.1} Gbps PSR {:.4}", s.rate_gbps, v.psr));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn q_oracle(x: f64) -> f64 {
    let n = 200_000;
    let h = 40.0 / n as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    let mut s = pdf(x) + pdf(x + 40.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(x + i as f64 * h);
    }
    s * h / 3.0
}

fn baseband_oracle() -> Outcome {
    let n = 100_000;
    let arr = PhasedArray::new(1, 1).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, snr) in [6.0f64, 10.0, 14.0].into_iter().enumerate() {
        let q = q_oracle(10f64.powf(snr / 20.0));
        let p = 2.0 * q - q * q;
        let sym = random_symbols(n, 7 + i as u64);
        let sched = WeightSchedule::constant(WeightVector::uniform(1), n);
        let tr = transmit(&sym, &sched, &[Direction::BORESIGHT], &arr, &[snr], 7 + i as u64).unwrap();
        let ser = demodulate(&tr, &[Complex64::new(1.0, 0.0)]).unwrap().ser;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        pass &= (ser - p).abs() <= 3.0 * sigma;
        parts.push(format!("{snr} dB: {ser:.3e} vs {p:.3e} ({:.2} sigma)", (ser - p).abs() / sigma));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn run(setup: &Setup, defense: &str, attack: &str, seed: u64) -> f64 {
    let d: DefenseConfig = defense.parse::<DefenseConfig>().unwrap().with_seed(seed);
    let a: AttackConfig = attack.parse().unwrap();
    evaluate(setup, &d, &a, seed).unwrap().attacker_ser
}

fn defense_matrix() -> (Outcome, Vec<String>) {
    let n = 100_000;
    let setup = Setup::desk(20.0, n).unwrap();
    let floor = 3.0 / n as f64;
    let base = run(&setup, "none", "single", 1);
    let reference = base.max(floor);

    let a_single = run(&setup, "antenna:flip:k=2:m=16:symbol", "single", 1);
    let a_derand = run(&setup, "antenna:flip:k=2:m=16:symbol", "derand:devices=4", 1);
    let a = a_single > 0.25 && a_derand < 1e-2;

    let b_single = run(&setup, "antenna:flip:k=2:m=16:packet", "single", 1);
    let b = b_single <= 2.0 * reference;

    let c1 = run(&setup, "rfchain:chains=1", "cancel", 1);
    let c3: f64 = (1..=8).map(|s| run(&setup, "rfchain:chains=3", "cancel", s)).sum::<f64>() / 8.0;
    let c = c1 < 10.0 * reference && c3 > 0.1;

    let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let lines = vec![
        format!(
            "  (a) {} per-symbol flip N=8 M=16: single SER {a_single:.3} (> 0.25), derand:4 SER {a_derand:.2e} (< 1e-2)",
            mark(a)
        ),
        format!(
            "  (b) {} per-packet flip: single SER {b_single:.2e} vs 2x reference {:.2e} (no-defense {base:.2e}, floor 3/n)",
            mark(b),
            2.0 * reference
        ),
        format!(
            "  (c) {} rfchain: 1 chain cancel SER {c1:.2e} (< {:.2e}); 3 chains mean SER {c3:.3} over 8 seeds (> 0.1)",
            mark(c),
            10.0 * reference
        ),
    ];
    (
        Outcome {
            pass: a && b && c,
            detail: format!("{n} symbols per point at 20 dB (parts below)"),
        },
        lines,
    )
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_sidelobe"))
}

fn sidelobe(args: &[&str], out: &Path) -> bool {
    Command::new(bin())
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism(tmp: &Path) -> Outcome {
    let runs: [&[&str]; 3] = [
        &["sweep", "--scenario", "picocell", "--artifacts", "preset", "--seed", "42"],
        &["sweep", "--scenario", "mesh", "--antennas", "32x8", "--seed", "42"],
        &[
            "defense-eval",
            "--setup",
            "desk",
            "--defense",
            "none,antenna:flip:k=2:m=16:symbol,rfchain:chains=1",
            "--attack",
            "single,derand:devices=4",
            "--symbols",
            "20000",
            "--seed",
            "42",
        ],
    ];
    let mut pass = true;
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let a = tmp.join(format!("det{i}a"));
        let b = tmp.join(format!("det{i}b"));
        pass &= sidelobe(args, &a) && sidelobe(args, &b);
        let (x, y) = (dir_bytes(&a), dir_bytes(&b));
        files += x.len();
        pass &= !x.is_empty() && x == y;
    }
    let reports: Vec<PathBuf> = std::fs::read_dir(tmp.join("det0a"))
        .unwrap()
        .chain(std::fs::read_dir(tmp.join("det1a")).unwrap())
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with("_report.json"))
        .collect();
    let mut inputs: Vec<&str> = vec!["report", "--inputs"];
    let joined = reports.iter().map(|p| p.to_string_lossy().into_owned()).collect::<Vec<_>>().join(",");
    inputs.push(&joined);
    let (ra, rb) = (tmp.join("repa"), tmp.join("repb"));
    pass &= sidelobe(&inputs, &ra) && sidelobe(&inputs, &rb) && dir_bytes(&ra) == dir_bytes(&rb);
    files += dir_bytes(&ra).len();
    Outcome {
        pass,
        detail: format!("{files} output files byte-identical across reruns (sweep, defense-eval, report)"),
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let mut unexpected = Vec::new();
    let mut results: Vec<(&str, bool)> = Vec::new();
    let mut check = |id: &'static str, title: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> (Outcome, Vec<String>)| {
        let t0 = Instant::now();
        let (o, extra) = f();
        let dt = t0.elapsed();
        let in_time = limit.is_none_or(|l| dt <= l);
        let pass = o.pass && in_time;
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let budget = match limit {
            Some(l) if in_time => format!(", limit {}s", l.as_secs()),
            Some(l) => format!(", OVER the {}s limit", l.as_secs()),
            None => String::new(),
        };
        println!("[{tag}] {title}: {} [{:.2}s{budget}]", o.detail, dt.as_secs_f64());
        for l in extra {
            println!("{l}");
        }
        if !pass && !known {
            unexpected.push(id);
        }
        results.push((id, pass));
    };
    let s = |n| Some(Duration::from_secs(n));
    let plain = |o: Outcome| (o, Vec::new());
    check("af-oracle", "Array-factor oracle", s(1), &mut || plain(array_factor_oracle()));
    check("antenna-trend", "Side-lobe suppression trend", s(10), &mut || plain(antenna_trend()));
    check("height-trend", "Height trend", s(10), &mut || plain(height_trend()));
    check("rate-trend", "Rate trend", s(10), &mut || plain(rate_trend()));
    check("artifact-trend", "Artifact trend", s(60), &mut || plain(artifact_trend()));
    check("threshold-monotonicity", "Threshold monotonicity", s(30), &mut || {
        plain(threshold_monotonicity(tmp.path()))
    });
    check("victim-calibration", "Victim calibration", None, &mut || plain(victim_calibration()));
    check("baseband-oracle", "Baseband oracle", s(10), &mut || plain(baseband_oracle()));
    check("defense-matrix", "Defense/attack matrix", s(300), &mut defense_matrix);
    check("determinism", "Determinism", None, &mut || plain(determinism(tmp.path())));

    let passed = results.iter().filter(|r| r.1).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    for (id, pass) in &results {
        if *pass && KNOWN_FAILURES.contains(id) {
            println!("note: '{id}' is listed as a known failure but now passes");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
