//! End-to-end tomography experiments: dataset generation from Haar-random
//! states, the regression network that maps measurement vectors to state
//! parameters, training/evaluation, and the fidelity-versus-set-size sweep.

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{train, Activation, Network, Scalar, TrainConfig};
use crate::pauli::{measure_with_rng, MeasurementVector, PauliSet, ShotModel};
use crate::quantum::{param_len, AmplitudeParams, PureState};

/// Test datasets are generated this far away from the training seed.
pub const TEST_SEED_OFFSET: u64 = 1_000_000;

/// How a dataset was produced; stored alongside the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProvenance {
    pub n: usize,
    pub pauli_set: String,
    pub count: usize,
    pub seed: u64,
    pub noise: ShotModel,
    pub generator: String,
}

/// Supervised pairs (measurement vector -> amplitude parameters) for one
/// fixed Pauli set.
#[derive(Debug, Clone)]
pub struct QstDataset {
    pub n: usize,
    pub pauli_set: PauliSet,
    pub records: Vec<(MeasurementVector, AmplitudeParams)>,
    pub provenance: DatasetProvenance,
}

impl QstDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.pauli_set.len()
    }

    pub fn target_dim(&self) -> usize {
        param_len(self.n)
    }

    /// Dense (inputs, targets) matrices in the trainer's scalar type.
    pub fn to_arrays<T: Scalar>(&self) -> (Array2<T>, Array2<T>) {
        let rows = self.len();
        let mut inputs = Array2::zeros((rows, self.input_dim()));
        let mut targets = Array2::zeros((rows, self.target_dim()));
        for (r, (c, p)) in self.records.iter().enumerate() {
            for (j, &v) in c.iter().enumerate() {
                inputs[(r, j)] = T::from_f64(v);
            }
            for (j, &v) in p.values().iter().enumerate() {
                targets[(r, j)] = T::from_f64(v);
            }
        }
        (inputs, targets)
    }
}

/// Draws `count` Haar-random states, measures them on `set`, and pairs each
/// measurement vector with the state's parameter vector.
///
/// Item `i` uses the derived stream seed + i, so datasets are reproducible
/// and records are independent of each other. The rare state whose first
/// amplitude is too small to fix the global phase is resampled from the
/// same stream.
pub fn generate_dataset(
    n: usize,
    set: &PauliSet,
    count: usize,
    seed: u64,
    noise: ShotModel,
) -> Result<QstDataset> {
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    if set.qubit_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: set.qubit_count(),
        });
    }
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let (state, params) = loop {
            let state = PureState::haar_random_from_rng(n, &mut rng)?;
            match state.params() {
                Ok(p) => break (state, p),
                Err(Error::DegenerateParameterization(_)) => continue,
                Err(e) => return Err(e),
            }
        };
        let c = measure_with_rng(&state, set, noise, &mut rng)?;
        records.push((c, params));
    }
    Ok(QstDataset {
        n,
        pauli_set: set.clone(),
        records,
        provenance: DatasetProvenance {
            n,
            pauli_set: set.to_text(),
            count,
            seed,
            noise,
            generator: "haar".into(),
        },
    })
}

/// Layer widths of the tomography regressor for `m` measured operators on
/// `n` qubits: m -> 32d -> 32d -> 32d -> 32d -> d with d = 2·2^n - 1.
pub fn qst_widths(m: usize, n: usize) -> Vec<usize> {
    let d = param_len(n);
    vec![m, 32 * d, 32 * d, 32 * d, 32 * d, d]
}

/// Builds the tomography network with Leaky-ReLU hidden layers and a linear
/// output, randomly initialized from `seed`.
pub fn build_qst_network_seeded<T: Scalar>(m: usize, n: usize, seed: u64) -> Result<Network<T>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidNetwork(
            "need at least one operator and one qubit".into(),
        ));
    }
    Network::random(
        &qst_widths(m, n),
        Activation::leaky_relu(0.01)?,
        Activation::Identity,
        false,
        seed,
    )
}

/// [`build_qst_network_seeded`] with a fixed initialization seed, making the
/// architecture a pure function of (m, n).
pub fn build_qst_network<T: Scalar>(m: usize, n: usize) -> Result<Network<T>> {
    build_qst_network_seeded(m, n, 0)
}

/// Which operator set a result row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetId {
    Seeded(u64),
    Uda,
}

impl std::fmt::Display for SetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SetId::Seeded(s) => write!(f, "{s}"),
            SetId::Uda => write!(f, "uda"),
        }
    }
}

/// Held-out reconstruction quality of one trained network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub n: usize,
    pub m: usize,
    pub set: SetId,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub fidelities: Vec<f64>,
}

impl ExperimentResult {
    fn from_fidelities(n: usize, m: usize, set: SetId, fidelities: Vec<f64>) -> Self {
        let count = fidelities.len() as f64;
        let mean = fidelities.iter().sum::<f64>() / count;
        let var = fidelities.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / count;
        ExperimentResult {
            n,
            m,
            set,
            mean_fidelity: mean,
            std_fidelity: var.sqrt(),
            fidelities,
        }
    }
}

/// Reconstruction fidelity of each test record: push the prediction through
/// the parameter-to-state map and compare with the true state. A prediction
/// that cannot form a state (all zeros) scores 0.
pub fn evaluate_fidelities<T: Scalar>(net: &Network<T>, test: &QstDataset) -> Result<Vec<f64>> {
    let (inputs, _) = test.to_arrays::<T>();
    let preds = net.forward_batch(&inputs)?;
    let mut fidelities = Vec::with_capacity(test.len());
    for (row, (_, truth_params)) in preds.outer_iter().zip(&test.records) {
        let truth = PureState::from_params(truth_params)?;
        let values: Vec<f64> = row.iter().map(|v| v.as_f64()).collect();
        let fid = AmplitudeParams::new(values)
            .and_then(|p| PureState::from_params(&p))
            .and_then(|s| truth.fidelity(&s))
            .unwrap_or(0.0);
        fidelities.push(fid);
    }
    Ok(fidelities)
}

/// Generates train/test data, trains a fresh network, and scores it on the
/// held-out set. The test set is seeded [`TEST_SEED_OFFSET`] away from the
/// training data; the network is initialized from a stream derived from the
/// training seed.
pub fn train_qst(
    n: usize,
    set: &PauliSet,
    train_count: usize,
    test_count: usize,
    set_id: SetId,
    cfg: &TrainConfig,
) -> Result<(Network<f32>, ExperimentResult)> {
    let train_ds = generate_dataset(n, set, train_count, cfg.seed, ShotModel::Exact)?;
    let test_ds = generate_dataset(
        n,
        set,
        test_count,
        cfg.seed.wrapping_add(TEST_SEED_OFFSET),
        ShotModel::Exact,
    )?;

    let init_seed = cfg.seed ^ 0x9E37_79B9_7F4A_7C15;
    let mut net = build_qst_network_seeded::<f32>(set.len(), n, init_seed)?;
    let (inputs, targets) = train_ds.to_arrays::<f32>();
    train(&mut net, &inputs, &targets, cfg)?;

    let fidelities = evaluate_fidelities(&net, &test_ds)?;
    let result = ExperimentResult::from_fidelities(n, set.len(), set_id, fidelities);
    Ok((net, result))
}

/// Configuration of the fidelity-versus-set-size sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Figure2Config {
    pub n: usize,
    pub m_values: Vec<usize>,
    pub sets_per_m: usize,
    pub include_uda: bool,
    pub train_count: usize,
    pub test_count: usize,
    pub base_seed: u64,
    pub train: TrainConfig,
}

impl Figure2Config {
    /// The default sweep for each qubit count: m ∈ [1,2,3] at one qubit,
    /// [6,8,10,12] plus the UDA set at two, [20,25,30,35,40] plus UDA at
    /// three. Three sampled sets per m; 20k training pairs (50k at three
    /// qubits by default, 150k with `paper_scale`); held-out test set of
    /// one tenth, capped at 2000.
    pub fn for_qubits(n: usize, paper_scale: bool) -> Result<Self> {
        let (m_values, include_uda, train_count): (Vec<usize>, bool, usize) = match n {
            1 => (vec![1, 2, 3], false, 20_000),
            2 => (vec![6, 8, 10, 12], true, 20_000),
            3 => (
                vec![20, 25, 30, 35, 40],
                true,
                if paper_scale { 150_000 } else { 50_000 },
            ),
            other => {
                return Err(Error::QubitCountOutOfRange {
                    got: other,
                    min: 1,
                    max: 3,
                })
            }
        };
        Ok(Figure2Config {
            n,
            m_values,
            sets_per_m: 3,
            include_uda,
            train_count,
            test_count: (train_count / 10).min(2000),
            base_seed: 1,
            train: TrainConfig::default(),
        })
    }
}

/// Mean-over-sets summary for one point of the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub m: usize,
    pub uda: bool,
    pub mean_fidelity: f64,
    pub std_over_sets: f64,
}

/// Every trained cell plus the per-m aggregation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Figure2Table {
    pub cells: Vec<ExperimentResult>,
    pub aggregates: Vec<AggregateRow>,
}

impl Figure2Table {
    pub fn aggregate(&self, m: usize, uda: bool) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.m == m && a.uda == uda)
    }
}

struct CellSpec {
    m: usize,
    set: PauliSet,
    set_id: SetId,
    seed: u64,
    uda: bool,
}

fn figure2_cells(cfg: &Figure2Config) -> Result<Vec<CellSpec>> {
    let mut specs = Vec::new();
    for &m in &cfg.m_values {
        for k in 0..cfg.sets_per_m {
            let set_seed = cfg.base_seed.wrapping_add(k as u64);
            specs.push(CellSpec {
                m,
                set: PauliSet::sample(cfg.n, m, set_seed)?,
                set_id: SetId::Seeded(set_seed),
                seed: set_seed,
                uda: false,
            });
        }
    }
    if cfg.include_uda {
        let set = PauliSet::uda(cfg.n)?;
        specs.push(CellSpec {
            m: set.len(),
            set,
            set_id: SetId::Uda,
            seed: cfg.base_seed,
            uda: true,
        });
    }
    Ok(specs)
}

/// Runs the sweep: for every m, `sets_per_m` operator sets sampled with
/// seeds base, base+1, ... are trained and evaluated; the UDA set is
/// appended when configured. The same set seeds recur across m, so columns
/// are paired.
pub fn figure2_experiment(cfg: &Figure2Config) -> Result<Figure2Table> {
    figure2_with_jobs(cfg, 1)
}

/// [`figure2_experiment`] with the independent cells distributed over a
/// bounded worker pool. Each cell is internally deterministic and results
/// are assembled in cell order, so the output is identical for any job
/// count.
pub fn figure2_with_jobs(cfg: &Figure2Config, jobs: usize) -> Result<Figure2Table> {
    let specs = figure2_cells(cfg)?;
    let jobs = jobs.max(1).min(specs.len());

    let run_cell = |spec: &CellSpec| -> Result<ExperimentResult> {
        let mut train_cfg = cfg.train;
        train_cfg.seed = spec.seed;
        let (_, result) = train_qst(
            cfg.n,
            &spec.set,
            cfg.train_count,
            cfg.test_count,
            spec.set_id,
            &train_cfg,
        )?;
        Ok(result)
    };

    let cells: Vec<ExperimentResult> = if jobs == 1 {
        specs.iter().map(run_cell).collect::<Result<_>>()?
    } else {
        let slots: Vec<std::sync::Mutex<Option<Result<ExperimentResult>>>> =
            specs.iter().map(|_| std::sync::Mutex::new(None)).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if idx >= specs.len() {
                        break;
                    }
                    let outcome = run_cell(&specs[idx]);
                    *slots[idx].lock().expect("no poisoned cell") = Some(outcome);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().expect("no poisoned cell").expect("worker filled slot"))
            .collect::<Result<_>>()?
    };

    let mut aggregates = Vec::new();
    for &m in &cfg.m_values {
        let means: Vec<f64> = cells
            .iter()
            .zip(&specs)
            .filter(|(_, s)| s.m == m && !s.uda)
            .map(|(c, _)| c.mean_fidelity)
            .collect();
        aggregates.push(aggregate_row(cfg.n, m, false, &means));
    }
    if let Some((result, spec)) = cells.iter().zip(&specs).find(|(_, s)| s.uda) {
        aggregates.push(aggregate_row(cfg.n, spec.m, true, &[result.mean_fidelity]));
    }
    Ok(Figure2Table { cells, aggregates })
}

fn aggregate_row(n: usize, m: usize, uda: bool, means: &[f64]) -> AggregateRow {
    let count = means.len() as f64;
    let mean = means.iter().sum::<f64>() / count;
    let var = means.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / count;
    AggregateRow {
        n,
        m,
        uda,
        mean_fidelity: mean,
        std_over_sets: var.sqrt(),
    }
}
