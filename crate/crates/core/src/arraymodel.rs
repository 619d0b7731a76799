//! Rectangular phased arrays: steering, array factor, directional gain and
//! hardware-artifact perturbations.
//!
//! Elements sit on a `rows x cols` grid in the array's lateral/vertical
//! plane, centered on the origin. A [`Direction`] is expressed in the array
//! frame: azimuth is measured in the horizontal plane from boresight toward
//! the lateral axis, elevation from the horizontal plane upward. The array
//! factor of excitation `w` toward direction `d` is
//!
//! ```text
//! AF(d) = F(d) * sum_n w_n * e_n * exp(j * 2*pi/lambda * p_n . u(d))
//! ```
//!
//! where `e_n` is the element's complex error, `p_n` its position and
//! `F(d)` the element factor (1 for isotropic elements).

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Gains are floored here (dB relative to peak) so nulls stay finite.
pub const GAIN_FLOOR_DB: f64 = -80.0;

/// A direction in an array frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    pub const BORESIGHT: Direction = Direction {
        azimuth: 0.0,
        elevation: 0.0,
    };

    /// Angles in radians; azimuth in [-pi, pi], elevation in [-pi/2, pi/2].
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !(-PI..=PI).contains(&azimuth) {
            return Err(Error::contract(format!("azimuth {azimuth} outside [-pi, pi]")));
        }
        if !elevation.is_finite() || !(-FRAC_PI_2..=FRAC_PI_2).contains(&elevation) {
            return Err(Error::contract(format!(
                "elevation {elevation} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Direction { azimuth, elevation })
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// Direction of a (forward, lateral, up) vector. `None` for the zero vector.
    pub fn from_vector(v: [f64; 3]) -> Option<Self> {
        let [f, l, u] = v;
        let horiz = f.hypot(l);
        if horiz == 0.0 && u == 0.0 {
            return None;
        }
        let azimuth = if horiz == 0.0 { 0.0 } else { l.atan2(f) };
        Some(Direction {
            azimuth,
            elevation: u.atan2(horiz),
        })
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// Unit vector as (forward, lateral, up) direction cosines.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [ce * ca, ce * sa, se]
    }
}

/// Radiation pattern of a single element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementPattern {
    #[default]
    Isotropic,
    /// Amplitude `cos(az) * cos(el)` in front of the array, zero behind it.
    Cosine,
}

impl ElementPattern {
    fn factor(self, forward_cosine: f64) -> f64 {
        match self {
            ElementPattern::Isotropic => 1.0,
            ElementPattern::Cosine => forward_cosine.max(0.0),
        }
    }
}

/// Per-element complex excitation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<Complex64>);

impl WeightVector {
    pub fn new(weights: Vec<Complex64>) -> Self {
        WeightVector(weights)
    }

    pub fn uniform(len: usize) -> Self {
        WeightVector(vec![Complex64::new(1.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Sum of squared magnitudes (conducted power up to a constant).
    pub fn power(&self) -> f64 {
        self.0.iter().map(|w| w.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> WeightVector {
        WeightVector(self.0.iter().map(|w| w * factor).collect())
    }
}

/// Rectangular phased array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasedArray {
    rows: usize,
    cols: usize,
    /// Element pitch in wavelengths.
    spacing: f64,
    wavelength: f64,
    element_errors: Vec<Complex64>,
    element: ElementPattern,
}

impl PhasedArray {
    /// Perfect array with half-wavelength pitch at the default carrier.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        Self::with_geometry(rows, cols, 0.5, crate::default_wavelength())
    }

    pub fn with_geometry(rows: usize, cols: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!("array must be at least 1x1, got {rows}x{cols}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::contract(format!("spacing must be positive, got {spacing}")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::contract(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(PhasedArray {
            rows,
            cols,
            spacing,
            wavelength,
            element_errors: vec![Complex64::new(1.0, 0.0); rows * cols],
            element: ElementPattern::Isotropic,
        })
    }

    pub fn with_element_pattern(mut self, element: ElementPattern) -> Self {
        self.element = element;
        self
    }

    /// Replaces the per-element errors; must have one entry per element.
    pub fn with_element_errors(mut self, errors: Vec<Complex64>) -> Result<Self> {
        if errors.len() != self.element_count() {
            return Err(Error::contract(format!(
                "{} element errors for {} elements",
                errors.len(),
                self.element_count()
            )));
        }
        self.element_errors = errors;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn element_pattern(&self) -> ElementPattern {
        self.element
    }

    pub fn element_errors(&self) -> &[Complex64] {
        &self.element_errors
    }

    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_perfect(&self) -> bool {
        self.element_errors
            .iter()
            .all(|e| *e == Complex64::new(1.0, 0.0))
    }

    /// Element positions in meters as (lateral, up), row-major.
    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        let pitch = self.spacing * self.wavelength;
        let c0 = (self.cols as f64 - 1.0) / 2.0;
        let r0 = (self.rows as f64 - 1.0) / 2.0;
        (0..self.rows)
            .flat_map(|r| {
                (0..self.cols).map(move |c| ((c as f64 - c0) * pitch, (r as f64 - r0) * pitch))
            })
            .collect()
    }

    /// Ideal geometric phase terms `exp(j k p_n . u)` toward `d`, row-major,
    /// excluding element errors and element factor.
    pub fn steering_vector(&self, d: Direction) -> Vec<Complex64> {
        let [_, uy, uz] = d.unit_vector();
        self.phase_terms(uy, uz)
    }

    fn phase_terms(&self, uy: f64, uz: f64) -> Vec<Complex64> {
        let (cols, rows) = self.axis_terms(uy, uz);
        rows.iter()
            .flat_map(|r| cols.iter().map(move |c| c * r))
            .collect()
    }

    fn axis_terms(&self, uy: f64, uz: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let k = 2.0 * PI * self.spacing;
        let c0 = (self.cols as f64 - 1.0) / 2.0;
        let r0 = (self.rows as f64 - 1.0) / 2.0;
        let cols = (0..self.cols)
            .map(|c| Complex64::from_polar(1.0, k * (c as f64 - c0) * uy))
            .collect();
        let rows = (0..self.rows)
            .map(|r| Complex64::from_polar(1.0, k * (r as f64 - r0) * uz))
            .collect();
        (cols, rows)
    }

    /// Response vector including element errors: `e_n * exp(j k p_n . u)`.
    pub fn response_vector(&self, d: Direction) -> Vec<Complex64> {
        self.steering_vector(d)
            .into_iter()
            .zip(&self.element_errors)
            .map(|(a, e)| a * e)
            .collect()
    }

    fn check_weights(&self, w: &WeightVector) -> Result<()> {
        if w.len() != self.element_count() {
            return Err(Error::contract(format!(
                "weight vector has {} entries, array has {} elements",
                w.len(),
                self.element_count()
            )));
        }
        Ok(())
    }
}

/// Conjugate-phase steering toward `target`.
pub fn steer(array: &PhasedArray, target: Direction) -> WeightVector {
    WeightVector(
        array
            .steering_vector(target)
            .into_iter()
            .map(|a| a.conj())
            .collect(),
    )
}

/// Complex array factor of excitation `w` toward `d`.
pub fn array_factor(array: &PhasedArray, w: &WeightVector, d: Direction) -> Result<Complex64> {
    array.check_weights(w)?;
    let [ux, uy, uz] = d.unit_vector();
    Ok(af_at(array, &effective_excitation(array, w), ux, uy, uz))
}

fn effective_excitation(array: &PhasedArray, w: &WeightVector) -> Vec<Complex64> {
    w.as_slice()
        .iter()
        .zip(array.element_errors())
        .map(|(w, e)| w * e)
        .collect()
}

fn af_at(array: &PhasedArray, excitation: &[Complex64], ux: f64, uy: f64, uz: f64) -> Complex64 {
    let (cols, rows) = array.axis_terms(uy, uz);
    let mut total = Complex64::new(0.0, 0.0);
    for (r, row_term) in rows.iter().enumerate() {
        let row = &excitation[r * array.cols..(r + 1) * array.cols];
        let partial: Complex64 = row.iter().zip(&cols).map(|(x, c)| x * c).sum();
        total += partial * row_term;
    }
    total * array.element.factor(ux)
}

/// Gain toward `d` in dB relative to the pattern peak, floored at
/// [`GAIN_FLOOR_DB`].
///
/// Builds a [`BeamPattern`] (and so searches for the peak) on every call;
/// evaluate many directions through a shared pattern instead.
pub fn gain_dbi(array: &PhasedArray, w: &WeightVector, d: Direction) -> Result<f64> {
    Ok(BeamPattern::new(array, w)?.gain_db(d))
}

/// A weighted array with its pattern peak located once.
#[derive(Debug, Clone)]
pub struct BeamPattern {
    array: PhasedArray,
    excitation: Vec<Complex64>,
    peak: f64,
    peak_direction: Direction,
}

impl BeamPattern {
    pub fn new(array: &PhasedArray, w: &WeightVector) -> Result<Self> {
        array.check_weights(w)?;
        let excitation = effective_excitation(array, w);
        let (peak, peak_direction) = find_peak(array, &excitation);
        Ok(BeamPattern {
            array: array.clone(),
            excitation,
            peak,
            peak_direction,
        })
    }

    pub fn array(&self) -> &PhasedArray {
        &self.array
    }

    /// Peak |AF| over all directions.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn peak_direction(&self) -> Direction {
        self.peak_direction
    }

    pub fn response(&self, d: Direction) -> Complex64 {
        let [ux, uy, uz] = d.unit_vector();
        af_at(&self.array, &self.excitation, ux, uy, uz)
    }

    pub fn gain_db(&self, d: Direction) -> f64 {
        relative_db(self.response(d).norm(), self.peak)
    }

    /// Highest side lobe in the azimuth cut at `elevation`, in dB relative to
    /// the pattern peak. The main lobe is the region around the cut's maximum
    /// bounded by the first minimum on each side.
    pub fn peak_sidelobe_db(&self, elevation: f64) -> f64 {
        let samples = 20_000.max(200 * self.array.cols);
        let az_at = |i: usize| -FRAC_PI_2 + PI * i as f64 / (samples - 1) as f64;
        let mag = |az: f64| {
            let d = Direction { azimuth: az, elevation };
            self.response(d).norm()
        };
        let cut: Vec<f64> = (0..samples).map(|i| mag(az_at(i))).collect();
        let main = argmax(&cut);
        let mut lo = main;
        while lo > 0 && cut[lo - 1] <= cut[lo] {
            lo -= 1;
        }
        let mut hi = main;
        while hi + 1 < samples && cut[hi + 1] <= cut[hi] {
            hi += 1;
        }
        let best = (0..samples)
            .filter(|&i| i < lo || i > hi)
            .max_by(|&a, &b| cut[a].total_cmp(&cut[b]));
        let Some(best) = best else {
            return GAIN_FLOOR_DB;
        };
        let step = PI / (samples - 1) as f64;
        let a = (az_at(best) - step).max(-FRAC_PI_2);
        let b = (az_at(best) + step).min(FRAC_PI_2);
        let refined = golden_max(a, b, mag).1;
        relative_db(refined.max(cut[best]), self.peak)
    }
}

fn relative_db(magnitude: f64, peak: f64) -> f64 {
    if peak <= 0.0 || magnitude <= 0.0 {
        return GAIN_FLOOR_DB;
    }
    (20.0 * (magnitude / peak).log10()).clamp(GAIN_FLOOR_DB, 0.0)
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Maximizer of a unimodal `f` on `[a, b]`, as `(x, f(x))`.
pub(crate) fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd { (c, fc) } else { (d, fd) }
}

/// Global peak of |AF| over the front hemisphere. For a planar array with
/// isotropic elements the rear hemisphere mirrors the front one.
fn find_peak(array: &PhasedArray, excitation: &[Complex64]) -> (f64, Direction) {
    // Grid in direction-cosine space at a quarter of the null-to-null width.
    let step_y = (1.0 / (4.0 * array.cols as f64 * array.spacing)).min(0.01);
    let step_z = (1.0 / (4.0 * array.rows as f64 * array.spacing)).min(0.01);
    let ny = (2.0 / step_y).ceil() as usize + 1;
    let nz = (2.0 / step_z).ceil() as usize + 1;
    let k = 2.0 * PI * array.spacing;
    let c0 = (array.cols as f64 - 1.0) / 2.0;
    let r0 = (array.rows as f64 - 1.0) / 2.0;

    let uzs: Vec<f64> = (0..nz).map(|j| -1.0 + 2.0 * j as f64 / (nz - 1) as f64).collect();
    let row_terms: Vec<Vec<Complex64>> = uzs
        .iter()
        .map(|&uz| {
            (0..array.rows)
                .map(|r| Complex64::from_polar(1.0, k * (r as f64 - r0) * uz))
                .collect()
        })
        .collect();

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut sums = vec![Complex64::new(0.0, 0.0); array.rows];
    for i in 0..ny {
        let uy = -1.0 + 2.0 * i as f64 / (ny - 1) as f64;
        let col_terms: Vec<Complex64> = (0..array.cols)
            .map(|c| Complex64::from_polar(1.0, k * (c as f64 - c0) * uy))
            .collect();
        for (r, s) in sums.iter_mut().enumerate() {
            let row = &excitation[r * array.cols..(r + 1) * array.cols];
            *s = row.iter().zip(&col_terms).map(|(x, c)| x * c).sum();
        }
        for (j, &uz) in uzs.iter().enumerate() {
            let rho = uy * uy + uz * uz;
            if rho > 1.0 {
                continue;
            }
            let ux = (1.0 - rho).sqrt();
            let af: Complex64 = sums.iter().zip(&row_terms[j]).map(|(s, t)| s * t).sum();
            let m = af.norm() * array.element.factor(ux);
            if m > best.0 {
                best = (m, uy, uz);
            }
        }
    }

    // Compass search in direction-cosine space.
    let eval = |uy: f64, uz: f64| -> f64 {
        let rho = uy * uy + uz * uz;
        if rho > 1.0 {
            return f64::NEG_INFINITY;
        }
        af_at(array, excitation, (1.0 - rho).sqrt(), uy, uz).norm()
    };
    let (mut m, mut uy, mut uz) = best;
    let mut step = step_y.max(step_z);
    while step > 1e-12 {
        let mut moved = false;
        for (dy, dz) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let cand = eval(uy + dy, uz + dz);
            if cand > m {
                m = cand;
                uy += dy;
                uz += dz;
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    let rho = (uy * uy + uz * uz).min(1.0);
    let dir = Direction::from_vector([(1.0 - rho).sqrt(), uy, uz]).unwrap_or(Direction::BORESIGHT);
    (m, dir)
}

/// Per-element amplitude/phase error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArtifactModel {
    /// Log-amplitude standard deviation (dB).
    pub amp_sigma_db: f64,
    /// Phase standard deviation (degrees).
    pub phase_sigma_deg: f64,
    pub seed: u64,
}

impl ArtifactModel {
    pub fn new(amp_sigma_db: f64, phase_sigma_deg: f64, seed: u64) -> Result<Self> {
        if !(amp_sigma_db >= 0.0 && amp_sigma_db.is_finite()) {
            return Err(Error::config(format!("amp_sigma must be >= 0, got {amp_sigma_db}")));
        }
        if !(phase_sigma_deg >= 0.0 && phase_sigma_deg.is_finite()) {
            return Err(Error::config(format!(
                "phase_sigma must be >= 0, got {phase_sigma_deg}"
            )));
        }
        Ok(ArtifactModel {
            amp_sigma_db,
            phase_sigma_deg,
            seed,
        })
    }

    /// Stand-in for measured hardware (1 dB, 10 degrees). The true
    /// distribution of commercial 60 GHz arrays is not published.
    pub fn measured_like(seed: u64) -> Self {
        ArtifactModel {
            amp_sigma_db: 1.0,
            phase_sigma_deg: 10.0,
            seed,
        }
    }

    pub fn none() -> Self {
        ArtifactModel {
            amp_sigma_db: 0.0,
            phase_sigma_deg: 0.0,
            seed: 0,
        }
    }
}

/// Multiplies each element's error by an independent draw from `model`.
pub fn apply_artifacts(array: &PhasedArray, model: &ArtifactModel) -> PhasedArray {
    let mut rng = rng_from_seed(model.seed);
    // Standard deviations are validated non-negative and finite.
    let amp = Normal::new(0.0, model.amp_sigma_db).expect("validated sigma");
    let phase = Normal::new(0.0, model.phase_sigma_deg).expect("validated sigma");
    let mut out = array.clone();
    for e in out.element_errors.iter_mut() {
        let a_db: f64 = amp.sample(&mut rng);
        let p_deg: f64 = phase.sample(&mut rng);
        if a_db == 0.0 && p_deg == 0.0 {
            continue;
        }
        *e *= Complex64::from_polar(10f64.powf(a_db / 20.0), p_deg.to_radians());
    }
    out
}
