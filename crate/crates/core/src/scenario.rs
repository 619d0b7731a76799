//! Deployment geometries and attacker-grid placement.
//!
//! World frame: `x` along the TX boresight azimuth, `y` lateral, `z` height.
//! The TX array frame is the world frame rotated so that its boresight
//! points at the victim RX.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arraymodel::Direction;
use crate::propagation::{default_noise_floor_dbm, peak_gain_dbi, LinkBudget};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Mesh,
    Picocell,
    P2p,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 3] = [ScenarioName::Mesh, ScenarioName::Picocell, ScenarioName::P2p];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Mesh => "mesh",
            ScenarioName::Picocell => "picocell",
            ScenarioName::P2p => "p2p",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mesh" => Ok(ScenarioName::Mesh),
            "picocell" => Ok(ScenarioName::Picocell),
            "p2p" => Ok(ScenarioName::P2p),
            other => Err(Error::config(format!(
                "unknown scenario '{other}' (expected mesh, picocell or p2p)"
            ))),
        }
    }
}

/// Position plus facing direction (world frame).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    pub boresight: Direction,
}

impl Pose {
    /// A pose at `position` facing `target`.
    pub fn facing(position: [f64; 3], target: [f64; 3]) -> Result<Self> {
        let v = sub(target, position);
        let boresight = Direction::from_vector(v)
            .ok_or_else(|| Error::contract("pose cannot face its own position"))?;
        Ok(Pose { position, boresight })
    }
}

/// Ground-plane rectangle examined for attacker placements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Area {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn depth(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn size_m2(&self) -> f64 {
        self.width() * self.depth()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub tx: Pose,
    pub rx: Pose,
    pub eirp_dbm: f64,
    /// Highest rate the victim link sustains; the calibration anchor.
    pub rate_gbps: f64,
    pub area: Area,
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub attacker_height_m: f64,
    pub wavelength_m: f64,
    pub noise_floor_dbm: f64,
    /// Element count of the victim and attacker receive arrays.
    pub rx_elements: usize,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Builds a preset. `name` is case-insensitive.
pub fn preset(name: &str) -> Result<Scenario> {
    Ok(Scenario::preset(name.parse()?))
}

impl Scenario {
    pub fn preset(name: ScenarioName) -> Scenario {
        let outdoor = Area {
            x_min: 0.0,
            x_max: 20.0,
            y_min: -5.0,
            y_max: 5.0,
        };
        let (eirp, h_tx, dist, h_rx, rate, area) = match name {
            ScenarioName::Mesh => (32.0, 6.0, 200.0, 6.0, 1.0, outdoor),
            ScenarioName::Picocell => (32.0, 6.0, 50.0, 1.0, 1.5, outdoor),
            ScenarioName::P2p => (
                23.0,
                1.0,
                10.0,
                1.0,
                1.5,
                Area {
                    x_min: 0.0,
                    x_max: 5.0,
                    y_min: -2.0,
                    y_max: 2.0,
                },
            ),
        };
        Scenario::new(name, h_tx, dist, h_rx, eirp, rate, area).expect("presets are valid")
    }

    /// TX at `(0, 0, tx_height)`, RX `rx_distance` along +x at `rx_height`,
    /// defaults for everything else.
    pub fn new(
        name: ScenarioName,
        tx_height_m: f64,
        rx_distance_m: f64,
        rx_height_m: f64,
        eirp_dbm: f64,
        rate_gbps: f64,
        area: Area,
    ) -> Result<Scenario> {
        let tx_pos = [0.0, 0.0, tx_height_m];
        let rx_pos = [rx_distance_m, 0.0, rx_height_m];
        let s = Scenario {
            name,
            tx: Pose::facing(tx_pos, rx_pos)?,
            rx: Pose::facing(rx_pos, tx_pos)?,
            eirp_dbm,
            rate_gbps,
            area,
            grid_cols: 34,
            grid_rows: 24,
            attacker_height_m: 1.0,
            wavelength_m: crate::default_wavelength(),
            noise_floor_dbm: default_noise_floor_dbm(),
            rx_elements: 128,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, p) in [("tx", self.tx.position), ("rx", self.rx.position)] {
            if p.iter().any(|c| !c.is_finite()) || p[2] < 0.0 {
                return Err(Error::config(format!("{label} position {p:?} must be finite with z >= 0")));
            }
        }
        if self.tx.position == self.rx.position {
            return Err(Error::config("tx and rx coincide"));
        }
        if !(self.rx.position[0] > self.tx.position[0]) {
            return Err(Error::config("rx must lie along +x from tx"));
        }
        let a = &self.area;
        if !(a.x_max > a.x_min && a.y_max > a.y_min) || [a.x_min, a.x_max, a.y_min, a.y_max].iter().any(|v| !v.is_finite()) {
            return Err(Error::config(format!("area {a:?} is empty or not finite")));
        }
        if self.grid_cols == 0 || self.grid_rows == 0 {
            return Err(Error::config("grid must have at least one column and one row"));
        }
        if !(self.attacker_height_m >= 0.0 && self.attacker_height_m.is_finite()) {
            return Err(Error::config(format!(
                "attacker height must be >= 0, got {}",
                self.attacker_height_m
            )));
        }
        if !(self.rate_gbps > 0.0 && self.rate_gbps.is_finite()) {
            return Err(Error::config(format!("rate must be positive, got {}", self.rate_gbps)));
        }
        if !(self.wavelength_m > 0.0 && self.wavelength_m.is_finite()) {
            return Err(Error::config(format!("wavelength must be positive, got {}", self.wavelength_m)));
        }
        if self.rx_elements == 0 {
            return Err(Error::config("receive array needs at least one element"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.grid_cols * self.grid_rows
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (
            self.area.width() / self.grid_cols as f64,
            self.area.depth() / self.grid_rows as f64,
        )
    }

    pub fn cell_area_m2(&self) -> f64 {
        let (dx, dy) = self.cell_size();
        dx * dy
    }

    /// Cell centers at attacker height, row-major (rows along y, columns
    /// along x).
    pub fn cell_centers(&self) -> Vec<[f64; 3]> {
        let (dx, dy) = self.cell_size();
        let z = self.attacker_height_m;
        (0..self.grid_rows)
            .flat_map(|r| {
                let y = self.area.y_min + (r as f64 + 0.5) * dy;
                (0..self.grid_cols).map(move |c| [self.area.x_min + (c as f64 + 0.5) * dx, y, z])
            })
            .collect()
    }

    /// Distance from TX and direction in the TX array frame.
    pub fn geometry_to(&self, p: [f64; 3]) -> Result<(f64, Direction)> {
        let v = sub(p, self.tx.position);
        let dist = norm(v);
        if dist == 0.0 || !dist.is_finite() {
            return Err(Error::contract(format!("point {p:?} coincides with tx or is not finite")));
        }
        let b = sub(self.rx.position, self.tx.position);
        // Rotate by the boresight azimuth, then by its tilt. Written out so
        // that p = rx lands on (0, 0) without rounding.
        let h = b[0].hypot(b[1]);
        let (ca, sa) = (b[0] / h, b[1] / h);
        let vx = v[0] * ca + v[1] * sa;
        let vy = -v[0] * sa + v[1] * ca;
        let bn = norm(b);
        let f = (vx * h + v[2] * b[2]) / bn;
        let u = (-vx * b[2] + v[2] * h) / bn;
        let dir = Direction::from_vector([f, vy, u])
            .ok_or_else(|| Error::contract("degenerate direction"))?;
        Ok((dist, dir))
    }

    /// Direction the TX main lobe is steered to, in its own frame.
    pub fn tx_steering(&self) -> Direction {
        Direction::BORESIGHT
    }

    pub fn victim_distance_m(&self) -> f64 {
        norm(sub(self.rx.position, self.tx.position))
    }

    pub fn rx_gain_dbi(&self) -> f64 {
        peak_gain_dbi(self.rx_elements, 0.0)
    }

    /// Budget toward a receiver at `distance_m` seeing the TX pattern at
    /// `tx_gain_offset_db` below its peak.
    pub fn link_budget(&self, distance_m: f64, tx_gain_offset_db: f64) -> LinkBudget {
        LinkBudget {
            eirp_dbm: self.eirp_dbm,
            tx_gain_offset_db,
            rx_gain_dbi: self.rx_gain_dbi(),
            distance_m,
            wavelength_m: self.wavelength_m,
            noise_floor_dbm: self.noise_floor_dbm,
        }
    }

    /// Victim SNR with the main lobe on the victim.
    pub fn victim_snr_db(&self) -> Result<f64> {
        crate::propagation::snr_db(&self.link_budget(self.victim_distance_m(), 0.0))
    }
}
