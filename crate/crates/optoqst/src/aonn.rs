//! Simulation of the constrained all-optical network for single-qubit phase
//! tomography: a 3-20-1 feed-forward net with EIT activations, nonnegative
//! weights, intensity-coded inputs (1 - ⟨X⟩, 1 - ⟨Y⟩, 1 - ⟨Z⟩), regressing
//! the phase θ of (|H⟩ + e^{iθ}|V⟩)/√2 on θ ∈ [0, π/2].

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::nn::{train, Activation, EitParams, Network, TrainConfig};
use crate::pauli::{measure_with_rng, PauliSet, ShotModel};
use crate::polarization::{measure_unit, prepare_state};
use crate::quantum::{DensityMatrix, Pauli, PureState};

/// Default shot budget of the simulated-circuit data source.
pub const DEFAULT_CIRCUIT_SHOTS: u64 = 8192;

/// Learning rate of the optical-network regression.
pub const AONN_LEARNING_RATE: f64 = 0.002;

/// Full-batch iterations of the optical-network regression.
pub const AONN_ITERATIONS: usize = 10_000;

/// Where a phase sample's measurement triple comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSource {
    /// Waveplate preparation and PBS measurement units, noise-free.
    SimulatedOptics,
    /// Hadamard-then-phase-rotation circuit sampled with finite shots.
    SimulatedCircuit { shots: u64 },
}

impl PhaseSource {
    pub fn circuit() -> Self {
        PhaseSource::SimulatedCircuit {
            shots: DEFAULT_CIRCUIT_SHOTS,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PhaseSource::SimulatedOptics => "simulated-optics",
            PhaseSource::SimulatedCircuit { .. } => "simulated-circuit",
        }
    }
}

impl std::fmt::Display for PhaseSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One labeled tomography sample of the equatorial family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub theta: f64,
    pub c: [f64; 3],
    pub source: PhaseSource,
}

/// Maps a measurement triple onto the network's intensity inputs
/// (1 - ⟨X⟩, 1 - ⟨Y⟩, 1 - ⟨Z⟩), all in [0, 2].
pub fn aonn_input_transform(c: [f64; 3]) -> Result<[f64; 3]> {
    for v in c {
        if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::OutOfRange {
                what: "expectation value",
                value: v,
                min: -1.0,
                max: 1.0,
            });
        }
    }
    Ok([
        (1.0 - c[0]).clamp(0.0, 2.0),
        (1.0 - c[1]).clamp(0.0, 2.0),
        (1.0 - c[2]).clamp(0.0, 2.0),
    ])
}

/// Draws `count` phases uniformly from [0, π/2] and measures each through
/// the chosen source. Deterministic per seed.
pub fn make_phase_dataset(
    count: usize,
    seed: u64,
    source: PhaseSource,
) -> Result<Vec<PhaseSample>> {
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xyz = PauliSet::enumerate(1)?;
    (0..count)
        .map(|_| {
            let theta = rng.random::<f64>() * FRAC_PI_2;
            let c = match source {
                PhaseSource::SimulatedOptics => {
                    let beam = prepare_state(theta);
                    [
                        measure_unit(&beam, Pauli::X)?,
                        measure_unit(&beam, Pauli::Y)?,
                        measure_unit(&beam, Pauli::Z)?,
                    ]
                }
                PhaseSource::SimulatedCircuit { shots } => {
                    let state = PureState::equatorial(theta);
                    let v = measure_with_rng(
                        &state,
                        &xyz,
                        ShotModel::shots(shots)?,
                        &mut rng,
                    )?;
                    [v[0], v[1], v[2]]
                }
            };
            Ok(PhaseSample { theta, c, source })
        })
        .collect()
}

/// The trained 3-20-1 constrained network.
#[derive(Debug, Clone, PartialEq)]
pub struct AonnModel {
    network: Network<f64>,
}

impl AonnModel {
    /// Wraps an existing network, enforcing the optical topology: widths
    /// 3-20-1, EIT hidden activation, linear output, nonnegative weights.
    pub fn new(network: Network<f64>) -> Result<Self> {
        if network.widths() != vec![3, 20, 1] {
            return Err(Error::InvalidNetwork(format!(
                "optical model must be 3-20-1, got {:?}",
                network.widths()
            )));
        }
        if !network.nonneg_constrained() {
            return Err(Error::InvalidNetwork(
                "optical model must be nonnegativity-constrained".into(),
            ));
        }
        if !matches!(network.layers()[0].activation(), Activation::Eit(_)) {
            return Err(Error::InvalidNetwork(
                "optical model's hidden activation must be the EIT curve".into(),
            ));
        }
        if !matches!(network.layers()[1].activation(), Activation::Identity) {
            return Err(Error::InvalidNetwork(
                "optical model's output layer must be linear".into(),
            ));
        }
        Ok(AonnModel { network })
    }

    pub fn network(&self) -> &Network<f64> {
        &self.network
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        self.network.save(path)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        AonnModel::new(Network::load(path)?)
    }
}

/// Trains the constrained network on a phase dataset with the default
/// initialization seed.
pub fn train_aonn(dataset: &[PhaseSample]) -> Result<(AonnModel, Vec<f64>)> {
    train_aonn_seeded(dataset, 0)
}

/// Trains the constrained network: full-batch Adam at learning rate 0.002
/// for 10000 iterations, projecting weights to nonnegative after every
/// step. Returns the model and its loss trace (rad² units).
pub fn train_aonn_seeded(dataset: &[PhaseSample], seed: u64) -> Result<(AonnModel, Vec<f64>)> {
    train_aonn_configured(
        dataset,
        seed,
        AONN_LEARNING_RATE,
        AONN_ITERATIONS,
        EitParams::default(),
    )
}

/// [`train_aonn_seeded`] with the schedule and EIT curve exposed, for
/// sweeping optical depth or the training length.
pub fn train_aonn_configured(
    dataset: &[PhaseSample],
    seed: u64,
    learning_rate: f64,
    iterations: usize,
    eit: EitParams,
) -> Result<(AonnModel, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows = dataset.len();
    let mut inputs = ndarray::Array2::zeros((rows, 3));
    let mut targets = ndarray::Array2::zeros((rows, 1));
    for (r, sample) in dataset.iter().enumerate() {
        let u = aonn_input_transform(sample.c)?;
        for (j, &v) in u.iter().enumerate() {
            inputs[(r, j)] = v;
        }
        targets[(r, 0)] = sample.theta;
    }

    let mut network = Network::random(
        &[3, 20, 1],
        Activation::eit(eit)?,
        Activation::Identity,
        true,
        seed,
    )?;
    let cfg = TrainConfig::full_batch(learning_rate, iterations, seed);
    let trace = train(&mut network, &inputs, &targets, &cfg)?;
    Ok((AonnModel::new(network)?, trace))
}

/// Predicts the phase for a measurement triple, clamped into [0, π/2].
pub fn predict_theta(model: &AonnModel, c: [f64; 3]) -> Result<f64> {
    let u = aonn_input_transform(c)?;
    let out = model.network.forward(&u)?;
    Ok(out[0].clamp(0.0, FRAC_PI_2))
}

/// Density matrix of the reconstructed state: ρ = ½(1 + cos θ·X + sin θ·Y).
pub fn rho_from_theta(theta: f64) -> Result<DensityMatrix> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::OutOfRange {
            what: "theta",
            value: theta,
            min: 0.0,
            max: FRAC_PI_2,
        });
    }
    DensityMatrix::from_bloch([theta.cos(), theta.sin(), 0.0])
}

/// Mean and max absolute prediction error over a dataset.
pub fn prediction_errors(model: &AonnModel, samples: &[PhaseSample]) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    for s in samples {
        let err = (predict_theta(model, s.c)? - s.theta).abs();
        sum += err;
        max = max.max(err);
    }
    Ok((sum / samples.len() as f64, max))
}
