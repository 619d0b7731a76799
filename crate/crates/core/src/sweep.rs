//! Attacker PSR over the examined area and the area metrics derived from it.

use std::collections::VecDeque;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arraymodel::{steer, BeamPattern, PhasedArray, WeightVector};
use crate::linkabstraction::{psr_from_snr, RateProfile};
use crate::propagation::snr_db;
use crate::scenario::{Area, Scenario};
use crate::{Error, Result};

/// Default area thresholds; the first one stands for "at least one packet".
pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.001, 0.1, 0.5, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsrGrid {
    pub scenario_name: String,
    pub cols: usize,
    pub rows: usize,
    pub area: Area,
    pub cell_area_m2: f64,
    /// Row-major, rows along y.
    pub values: Vec<f64>,
}

impl PsrGrid {
    pub fn new(scenario_name: impl Into<String>, cols: usize, rows: usize, area: Area, values: Vec<f64>) -> Result<Self> {
        if cols == 0 || rows == 0 || values.len() != cols * rows {
            return Err(Error::contract(format!(
                "{} values for a {cols}x{rows} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::contract(format!("PSR value {v} outside [0, 1]")));
        }
        let cell_area_m2 = area.size_m2() / (cols * rows) as f64;
        Ok(PsrGrid {
            scenario_name: scenario_name.into(),
            cols,
            rows,
            area,
            cell_area_m2,
            values,
        })
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Ground-plane center of each cell, in value order.
    pub fn cell_xy(&self) -> Vec<(f64, f64)> {
        let dx = self.area.width() / self.cols as f64;
        let dy = self.area.depth() / self.rows as f64;
        (0..self.rows)
            .flat_map(|r| {
                (0..self.cols).map(move |c| {
                    (
                        self.area.x_min + (c as f64 + 0.5) * dx,
                        self.area.y_min + (r as f64 + 0.5) * dy,
                    )
                })
            })
            .collect()
    }

    /// `x_m,y_m,psr` with six decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x_m,y_m,psr")?;
        for ((x, y), p) in self.cell_xy().into_iter().zip(&self.values) {
            writeln!(out, "{x:.6},{y:.6},{p:.6}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Attacker PSR at one position given a prepared TX pattern.
pub fn psr_at(s: &Scenario, pattern: &BeamPattern, profile: &RateProfile, p: [f64; 3]) -> Result<f64> {
    Ok(psr_from_snr(snr_at(s, pattern, p)?, profile))
}

/// Attacker SNR at one position.
pub fn snr_at(s: &Scenario, pattern: &BeamPattern, p: [f64; 3]) -> Result<f64> {
    let (dist, dir) = s.geometry_to(p)?;
    snr_db(&s.link_budget(dist, pattern.gain_db(dir)))
}

/// Sweep with the TX main lobe steered at the victim.
pub fn sweep_psr(s: &Scenario, tx_array: &PhasedArray, profile: &RateProfile) -> Result<PsrGrid> {
    let w = steer(tx_array, s.tx_steering());
    sweep_psr_weighted(s, tx_array, &w, profile)
}

/// Sweep with arbitrary TX weights. Cells are evaluated in parallel; output
/// order is the cell order.
pub fn sweep_psr_weighted(
    s: &Scenario,
    tx_array: &PhasedArray,
    w: &WeightVector,
    profile: &RateProfile,
) -> Result<PsrGrid> {
    s.validate()?;
    let pattern = BeamPattern::new(tx_array, w)?;
    let values = s
        .cell_centers()
        .par_iter()
        .map(|&p| psr_at(s, &pattern, profile, p))
        .collect::<Result<Vec<f64>>>()?;
    PsrGrid::new(s.name.as_str(), s.grid_cols, s.grid_rows, s.area, values)
}

fn check_threshold(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::contract(format!("threshold {t} outside [0, 1)")));
    }
    Ok(())
}

/// Total area of cells with PSR strictly above `threshold`.
pub fn area_above(g: &PsrGrid, threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    let n = g.values.iter().filter(|&&v| v > threshold).count();
    Ok(n as f64 * g.cell_area_m2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub cells: usize,
    pub area_m2: f64,
}

/// 4-connected regions of cells above `threshold`, largest first.
pub fn connected_components(g: &PsrGrid, threshold: f64) -> Result<Vec<Component>> {
    check_threshold(threshold)?;
    let above: Vec<bool> = g.values.iter().map(|&v| v > threshold).collect();
    let mut seen = vec![false; above.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..above.len() {
        if !above[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut count = 0;
        while let Some(i) = queue.pop_front() {
            count += 1;
            let (r, c) = (i / g.cols, i % g.cols);
            let mut visit = |j: usize| {
                if above[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if c > 0 {
                visit(i - 1);
            }
            if c + 1 < g.cols {
                visit(i + 1);
            }
            if r > 0 {
                visit(i - g.cols);
            }
            if r + 1 < g.rows {
                visit(i + g.cols);
            }
        }
        sizes.push(count);
    }
    // Stable sort keeps discovery order among equal sizes.
    sizes.sort_by(|a, b| b.cmp(a));
    Ok(sizes
        .into_iter()
        .map(|cells| Component {
            cells,
            area_m2: cells as f64 * g.cell_area_m2,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdArea {
    pub threshold: f64,
    pub area_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EavesdropReport {
    pub scenario_name: String,
    pub cols: usize,
    pub rows: usize,
    pub cell_area_m2: f64,
    pub areas: Vec<ThresholdArea>,
    pub component_threshold: f64,
    pub components: Vec<Component>,
}

impl EavesdropReport {
    pub fn area_at(&self, threshold: f64) -> Option<f64> {
        self.areas
            .iter()
            .find(|a| a.threshold == threshold)
            .map(|a| a.area_m2)
    }
}

/// Areas at each threshold (strictly ascending) plus the components at
/// `component_threshold`.
pub fn area_vs_threshold_curve(g: &PsrGrid, thresholds: &[f64], component_threshold: f64) -> Result<EavesdropReport> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::contract(format!(
            "thresholds must be strictly ascending, got {thresholds:?}"
        )));
    }
    let areas = thresholds
        .iter()
        .map(|&t| {
            Ok(ThresholdArea {
                threshold: t,
                area_m2: area_above(g, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EavesdropReport {
        scenario_name: g.scenario_name.clone(),
        cols: g.cols,
        rows: g.rows,
        cell_area_m2: g.cell_area_m2,
        areas,
        component_threshold,
        components: connected_components(g, component_threshold)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arraymodel::Direction;
    use crate::linkabstraction::calibrate;
    use crate::scenario::ScenarioName;

    fn unit_area(w: f64, h: f64) -> Area {
        Area {
            x_min: 0.0,
            x_max: w,
            y_min: 0.0,
            y_max: h,
        }
    }

    fn grid(cols: usize, rows: usize, values: Vec<f64>) -> PsrGrid {
        PsrGrid::new("t", cols, rows, unit_area(cols as f64, rows as f64), values).unwrap()
    }

    #[test]
    fn area_examples() {
        let g = grid(4, 2, vec![0.0; 8]);
        assert_eq!(area_above(&g, 0.0).unwrap(), 0.0);
        let ones = PsrGrid::new("t", 34, 24, Scenario::preset(ScenarioName::Mesh).area, vec![1.0; 816]).unwrap();
        assert!((area_above(&ones, 0.95).unwrap() - 200.0).abs() < 1e-9);
        assert!(area_above(&g, 1.0).is_err());
    }

    #[test]
    fn constant_grid_curve() {
        let g = grid(3, 3, vec![0.6; 9]);
        let r = area_vs_threshold_curve(&g, &[0.0, 0.5, 0.95], 0.0).unwrap();
        let a: Vec<f64> = r.areas.iter().map(|a| a.area_m2).collect();
        assert_eq!(a, vec![9.0, 9.0, 0.0]);
        assert_eq!(r.components.len(), 1);
        assert!(area_vs_threshold_curve(&g, &[0.5, 0.1], 0.0).is_err());
    }

    #[test]
    fn component_examples() {
        let mut v = vec![0.0; 9];
        v[4] = 1.0;
        assert_eq!(connected_components(&grid(3, 3, v), 0.5).unwrap().len(), 1);
        let diag = vec![1.0, 0.0, 0.0, 1.0];
        let c = connected_components(&grid(2, 2, diag), 0.5).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|c| c.cells == 1));
    }

    #[test]
    fn grid_validation() {
        assert!(PsrGrid::new("t", 2, 2, unit_area(1.0, 1.0), vec![0.0; 3]).is_err());
        assert!(PsrGrid::new("t", 1, 1, unit_area(1.0, 1.0), vec![1.5]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = grid(2, 1, vec![0.25, 1.0]);
        assert_eq!(g.to_csv_string(), "x_m,y_m,psr\n0.500000,0.500000,0.250000\n1.500000,0.500000,1.000000\n");
    }

    #[test]
    fn victim_psr_through_sweep_pipeline() {
        for name in ScenarioName::ALL {
            let s = Scenario::preset(name);
            let profile = calibrate(&s, 0.95).unwrap();
            let arr = PhasedArray::new(8, 16).unwrap();
            let pattern = BeamPattern::new(&arr, &steer(&arr, s.tx_steering())).unwrap();
            let psr = psr_at(&s, &pattern, &profile, s.rx.position).unwrap();
            assert!(psr >= 0.95, "{name}: {psr}");
        }
    }

    #[test]
    fn null_direction_hits_the_floor() {
        // Put the attacker on a 1x16 null: sin(az) = 1/8 at attacker height = TX height.
        let mut s = Scenario::preset(ScenarioName::Mesh);
        s.attacker_height_m = 6.0;
        let profile = calibrate(&s, 0.95).unwrap();
        let arr = PhasedArray::new(1, 16).unwrap();
        let pattern = BeamPattern::new(&arr, &steer(&arr, Direction::BORESIGHT)).unwrap();
        let az = (1.0f64 / 8.0).asin();
        let p = [10.0 * az.cos(), 10.0 * az.sin(), 6.0];
        let (_, dir) = s.geometry_to(p).unwrap();
        assert!(pattern.gain_db(dir) <= -80.0 + 1e-9);
        assert!(psr_at(&s, &pattern, &profile, p).unwrap() < 1e-6);
    }

    #[test]
    fn mesh_sweep_concentrates_on_the_x_axis() {
        let s = Scenario::preset(ScenarioName::Mesh);
        let profile = calibrate(&s, 0.95).unwrap();
        let g = sweep_psr(&s, &PhasedArray::new(8, 16).unwrap(), &profile).unwrap();
        let xy = g.cell_xy();
        let total: f64 = g.values.iter().sum();
        assert!(total > 0.0);
        let weighted: f64 = xy.iter().zip(&g.values).map(|((_, y), p)| y.abs() * p).sum::<f64>() / total;
        let uniform: f64 = xy.iter().map(|(_, y)| y.abs()).sum::<f64>() / xy.len() as f64;
        assert!(weighted < uniform);
    }

    #[test]
    fn sweep_is_deterministic() {
        let s = Scenario::preset(ScenarioName::P2p);
        let profile = calibrate(&s, 0.95).unwrap();
        let arr = PhasedArray::new(8, 16).unwrap();
        let a = sweep_psr(&s, &arr, &profile).unwrap();
        let b = sweep_psr(&s, &arr, &profile).unwrap();
        assert_eq!(a, b);
    }
}
