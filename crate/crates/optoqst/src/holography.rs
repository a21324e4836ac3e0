//! Phase-mask synthesis for the spatial light modulators: blazed gratings,
//! sine modulation for intensity control via the zero-order beam, a unitary
//! DFT propagation model, and the weighted Gerchberg-Saxton optimizer with
//! adaptive camera feedback.
//!
//! The SLM plane and the focal plane are the same discrete grid, linked by
//! a unitary 2D DFT; spot positions are integer bins. Axis 0 is the pixel
//! index i, axis 1 is j.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};

/// A phase pattern with every entry wrapped into [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    phase: Array2<f64>,
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PhaseMask {
    pub fn new(phase: Array2<f64>) -> Self {
        PhaseMask {
            phase: phase.mapv(wrap_phase),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PhaseMask {
            phase: Array2::zeros((rows, cols)),
        }
    }

    pub fn rows(&self) -> usize {
        self.phase.nrows()
    }

    pub fn cols(&self) -> usize {
        self.phase.ncols()
    }

    pub fn phase(&self) -> &Array2<f64> {
        &self.phase
    }

    /// The complex field this mask imprints on a given input amplitude.
    pub fn field(&self, input_amplitude: &Array2<f64>) -> Result<Array2<Complex64>> {
        if input_amplitude.dim() != self.phase.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.phase.len(),
                actual: input_amplitude.len(),
            });
        }
        Ok(ndarray::Zip::from(&self.phase)
            .and(input_amplitude)
            .map_collect(|&p, &a| Complex64::from_polar(a, p)))
    }

    /// 16-bit portable graymap, phase scaled so 2π maps to 65536.
    pub fn write_pgm(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut out = Vec::with_capacity(self.phase.len() * 2 + 64);
        writeln!(out, "P5")?;
        writeln!(out, "{} {}", self.cols(), self.rows())?;
        writeln!(out, "65535")?;
        for &p in self.phase.iter() {
            let level = ((p / TAU) * 65536.0).floor().min(65535.0) as u16;
            out.extend_from_slice(&level.to_be_bytes());
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Full-precision CSV (one row per pixel row); round-trips bit-exactly.
    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut text = String::new();
        for row in self.phase.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let row = line
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|e| Error::Format {
                        path: path.display().to_string(),
                        reason: format!("line {}: {e}", ln + 1),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Format {
                path: path.display().to_string(),
                reason: "empty or ragged phase grid".into(),
            });
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(PhaseMask {
            phase: Array2::from_shape_vec((nrows, ncols), flat).expect("shape checked"),
        })
    }
}

/// Blazed grating φ(i,j) = 2πi/T_i + 2πj/T_j, wrapped. An infinite period
/// disables that axis; zero periods are rejected.
pub fn grating_phase(t_i: f64, t_j: f64, dims: (usize, usize)) -> Result<PhaseMask> {
    if t_i == 0.0 || t_j == 0.0 {
        return Err(Error::ZeroGratingPeriod);
    }
    let fi = if t_i.is_infinite() { 0.0 } else { TAU / t_i };
    let fj = if t_j.is_infinite() { 0.0 } else { TAU / t_j };
    Ok(PhaseMask::new(Array2::from_shape_fn(dims, |(i, j)| {
        fi * i as f64 + fj * j as f64
    })))
}

/// Sine modulation φ(i,j) = mπ·sin(2πi/T_mi + 2πj/T_mj); the modulation
/// depth m ≥ 0 steers how much power stays in the zero-order beam.
pub fn sine_modulation_phase(
    depth: f64,
    t_mi: f64,
    t_mj: f64,
    dims: (usize, usize),
) -> Result<PhaseMask> {
    if depth < 0.0 {
        return Err(Error::OutOfRange {
            what: "modulation depth",
            value: depth,
            min: 0.0,
            max: f64::INFINITY,
        });
    }
    if t_mi == 0.0 || t_mj == 0.0 {
        return Err(Error::ZeroGratingPeriod);
    }
    let fi = if t_mi.is_infinite() { 0.0 } else { TAU / t_mi };
    let fj = if t_mj.is_infinite() { 0.0 } else { TAU / t_mj };
    Ok(PhaseMask::new(Array2::from_shape_fn(dims, |(i, j)| {
        depth * std::f64::consts::PI * (fi * i as f64 + fj * j as f64).sin()
    })))
}

/// Unitary 2D DFT (forward) or inverse DFT of a complex field.
fn dft2(field: &Array2<Complex64>, inverse: bool) -> Array2<Complex64> {
    let (rows, cols) = field.dim();
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = if inverse {
        planner.plan_fft_inverse(cols)
    } else {
        planner.plan_fft_forward(cols)
    };
    let col_fft = if inverse {
        planner.plan_fft_inverse(rows)
    } else {
        planner.plan_fft_forward(rows)
    };

    let mut work = field.as_standard_layout().to_owned();
    for mut row in work.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        row_fft.process(slice);
    }
    let mut transposed = work.t().as_standard_layout().to_owned();
    for mut row in transposed.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        col_fft.process(slice);
    }
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    let result = transposed.t().as_standard_layout().to_owned();
    result.mapv_into(|v| v * scale)
}

/// Focal-plane intensity |DFT(input·e^{iφ})|². Energy-conserving: the total
/// output intensity equals the total input power.
pub fn propagate(mask: &PhaseMask, input_amplitude: &Array2<f64>) -> Result<Array2<f64>> {
    let far = dft2(&mask.field(input_amplitude)?, false);
    Ok(far.mapv(|v| v.norm_sqr()))
}

/// Fraction of total power left in the (0,0) focal bin for a uniform beam.
pub fn zero_order_efficiency(mask: &PhaseMask) -> f64 {
    let ones = Array2::from_elem(mask.phase.dim(), 1.0);
    let intensity = propagate(mask, &ones).expect("dims match by construction");
    intensity[(0, 0)] / intensity.sum()
}

/// Focal-plane spots the optimizer should produce, with target intensities
/// normalized to sum 1 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotTargets {
    positions: Vec<(usize, usize)>,
    intensities: Vec<f64>,
}

impl SpotTargets {
    pub fn new(spots: Vec<(usize, usize, f64)>) -> Result<Self> {
        if spots.is_empty() {
            return Err(Error::NoSpots);
        }
        let mut seen = std::collections::HashSet::new();
        let mut total = 0.0;
        for &(u, v, intensity) in &spots {
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateSpot(u, v));
            }
            if !(intensity > 0.0) || !intensity.is_finite() {
                return Err(Error::NonPositiveIntensity(intensity));
            }
            total += intensity;
        }
        Ok(SpotTargets {
            positions: spots.iter().map(|&(u, v, _)| (u, v)).collect(),
            intensities: spots.iter().map(|&(_, _, w)| w / total).collect(),
        })
    }

    /// `count` equally weighted spots.
    pub fn uniform(positions: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(positions.into_iter().map(|(u, v)| (u, v, 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    fn check_bounds(&self, dims: (usize, usize)) -> Result<()> {
        for &(u, v) in &self.positions {
            if u >= dims.0 || v >= dims.1 {
                return Err(Error::SpotOutOfBounds {
                    u,
                    v,
                    rows: dims.0,
                    cols: dims.1,
                });
            }
        }
        Ok(())
    }
}

/// Settings of one weighted Gerchberg-Saxton run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GswConfig {
    pub dims: (usize, usize),
    /// Feedback strength a ∈ (0, 1]; below 1 damps the correction toward 1
    /// to avoid over-compensating noisy measurements.
    pub feedback: f64,
    pub max_iters: usize,
    /// Uniformity-error threshold for declaring convergence.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GswConfig {
    fn default() -> Self {
        GswConfig {
            dims: (256, 256),
            feedback: 0.7,
            max_iters: 100,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

impl GswConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.0 == 0 || self.dims.1 == 0 {
            return Err(Error::InvalidConfig("empty grid".into()));
        }
        if !(self.feedback > 0.0 && self.feedback <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "feedback parameter must lie in (0, 1], got {}",
                self.feedback
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("need at least one iteration".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidConfig("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Final state of a weighted GS run.
#[derive(Debug, Clone)]
pub struct GswState {
    /// Per-spot feedback weights g at the last update.
    pub weights: Vec<f64>,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Camera-measured spot intensities (normalized to sum 1) of the
    /// returned mask.
    pub achieved: Vec<f64>,
    /// max_k |I_k/T_k - mean| / mean over spots, for the returned mask.
    pub uniformity_error: f64,
    pub converged: bool,
    /// Set when a camera reading hit the zero floor.
    pub zero_intensity_flagged: bool,
}

/// One adaptive feedback update: g_k = a·√(I_target/I_measured)·g_prev + (1-a).
///
/// Zero or negative measured intensities are floored at 1e-12; the returned
/// flag reports whether that happened.
pub fn adaptive_feedback_step(
    g_prev: &[f64],
    i_target: &[f64],
    i_measured: &[f64],
    a: f64,
) -> Result<(Vec<f64>, bool)> {
    if g_prev.len() != i_target.len() || g_prev.len() != i_measured.len() {
        return Err(Error::DimensionMismatch {
            expected: g_prev.len(),
            actual: i_target.len().max(i_measured.len()),
        });
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "feedback parameter must lie in (0, 1], got {a}"
        )));
    }
    let mut flagged = false;
    let mut g = Vec::with_capacity(g_prev.len());
    for ((&gp, &it), &im) in g_prev.iter().zip(i_target).zip(i_measured) {
        if !(it > 0.0) {
            return Err(Error::NonPositiveIntensity(it));
        }
        let measured = if im > 0.0 {
            im
        } else {
            flagged = true;
            1e-12
        };
        g.push(a * (it / measured).sqrt() * gp + (1.0 - a));
    }
    Ok((g, flagged))
}

fn uniformity_error(measured: &[f64], targets: &[f64]) -> f64 {
    let ratios: Vec<f64> = measured
        .iter()
        .zip(targets)
        .map(|(&m, &t)| m / t)
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    if mean <= 0.0 {
        return f64::INFINITY;
    }
    ratios
        .iter()
        .map(|r| (r - mean).abs() / mean)
        .fold(0.0, f64::max)
}

fn normalized(values: &[f64]) -> Vec<f64> {
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        values.iter().map(|v| v / sum).collect()
    } else {
        values.to_vec()
    }
}

/// The noise-free forward model: uniform illumination through the mask,
/// unitary DFT, intensities read at the spot bins.
pub fn ideal_camera(
    dims: (usize, usize),
    positions: Vec<(usize, usize)>,
) -> impl Fn(&PhaseMask) -> Vec<f64> {
    let ones = Array2::from_elem(dims, 1.0);
    move |mask: &PhaseMask| {
        let intensity = propagate(mask, &ones).expect("camera dims fixed at construction");
        positions.iter().map(|&(u, v)| intensity[(u, v)]).collect()
    }
}

/// A camera whose per-spot response carries a static multiplicative gain
/// error, uniform in [1-amplitude, 1+amplitude], drawn once from `seed`.
pub fn gain_field_camera(
    dims: (usize, usize),
    positions: Vec<(usize, usize)>,
    amplitude: f64,
    seed: u64,
) -> impl Fn(&PhaseMask) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains: Vec<f64> = (0..positions.len())
        .map(|_| 1.0 + amplitude * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let ideal = ideal_camera(dims, positions);
    move |mask: &PhaseMask| {
        ideal(mask)
            .into_iter()
            .zip(&gains)
            .map(|(i, g)| i * g)
            .collect()
    }
}

/// Weighted Gerchberg-Saxton with adaptive camera feedback.
///
/// Each iteration: measure the current mask through the camera, update the
/// per-spot weights, impose amplitudes g_k·√(I_t,k·E) at the spot bins
/// (keeping the numerically computed phases, zeroing the background),
/// inverse-transform, and restore the uniform input amplitude. Terminates
/// when the camera-side uniformity error drops below the tolerance; if it
/// never does, the best iterate seen is returned flagged as non-converged.
pub fn gsw_optimize<C>(
    targets: &SpotTargets,
    cfg: &GswConfig,
    camera: C,
) -> Result<(PhaseMask, GswState)>
where
    C: Fn(&PhaseMask) -> Vec<f64>,
{
    cfg.validate()?;
    targets.check_bounds(cfg.dims)?;

    let ones = Array2::from_elem(cfg.dims, 1.0);
    let total_energy = (cfg.dims.0 * cfg.dims.1) as f64;
    let i_t = targets.intensities();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mask = PhaseMask::new(Array2::from_shape_simple_fn(cfg.dims, || {
        rng.random::<f64>() * TAU
    }));

    let mut g = vec![1.0; targets.len()];
    let mut flagged = false;
    let mut best: Option<(f64, PhaseMask, Vec<f64>, Vec<f64>)> = None;

    for iteration in 1..=cfg.max_iters {
        // Focal constraint: weighted target amplitudes at the spot bins with
        // the current focal phases, background zeroed.
        let far = dft2(&mask.field(&ones)?, false);
        let mut constrained = Array2::from_elem(cfg.dims, Complex64::ZERO);
        for (k, &(u, v)) in targets.positions().iter().enumerate() {
            let amplitude = g[k] * (i_t[k] * total_energy).sqrt();
            constrained[(u, v)] = Complex64::from_polar(amplitude, far[(u, v)].arg());
        }
        // Back to the SLM plane; keep the phase, restore the input amplitude.
        let slm = dft2(&constrained, true);
        mask = PhaseMask::new(slm.mapv(|v| v.arg()));

        let measured = normalized(&camera(&mask));
        let err = uniformity_error(&measured, i_t);
        if best.as_ref().map_or(true, |(b, ..)| err < *b) {
            best = Some((err, mask.clone(), measured.clone(), g.clone()));
        }
        if err < cfg.tolerance {
            return Ok((
                mask,
                GswState {
                    weights: g,
                    iterations: iteration,
                    achieved: measured,
                    uniformity_error: err,
                    converged: true,
                    zero_intensity_flagged: flagged,
                },
            ));
        }

        let (g_next, hit_floor) = adaptive_feedback_step(&g, i_t, &measured, cfg.feedback)?;
        g = g_next;
        flagged |= hit_floor;
    }

    let (err, best_mask, achieved, weights) = best.expect("at least one iteration ran");
    Ok((
        best_mask,
        GswState {
            weights,
            iterations: cfg.max_iters,
            achieved,
            uniformity_error: err,
            converged: false,
            zero_intensity_flagged: flagged,
        },
    ))
}

/// Relative spot-intensity spread (max - min)/mean of measured-to-target
/// ratios; 0 means perfectly proportional to the targets.
pub fn spot_spread(measured: &[f64], targets: &[f64]) -> f64 {
    let ratios: Vec<f64> = measured
        .iter()
        .zip(targets)
        .map(|(&m, &t)| m / t)
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().fold(f64::MIN, |a, &b| a.max(b));
    let min = ratios.iter().fold(f64::MAX, |a, &b| a.min(b));
    (max - min) / mean
}
