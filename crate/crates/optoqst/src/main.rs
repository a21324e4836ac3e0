//! Thin command-line front end over the library: seeded, reproducible runs
//! that write CSV results plus a provenance sidecar with the fully resolved
//! configuration. Precedence: flags > config file > defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use optoqst::aonn::{
    self, make_phase_dataset, predict_theta, prediction_errors, rho_from_theta, AonnModel,
    PhaseSource,
};
use optoqst::holography::{gain_field_camera, gsw_optimize, ideal_camera, GswConfig};
use optoqst::io;
use optoqst::nn::{BatchSize, TrainConfig};
use optoqst::pauli::{PauliSet, ShotModel};
use optoqst::polarization::{measure_unit, prepare_state, stokes};
use optoqst::qst::{
    figure2_with_jobs, generate_dataset, train_qst, Figure2Config, SetId, TEST_SEED_OFFSET,
};
use optoqst::quantum::Pauli;

#[derive(Parser)]
#[command(name = "optoqst", version, about = "Neural-network quantum state tomography toolkit")]
struct Cli {
    /// TOML config file with per-command sections; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $OPTOQST_OUT, else the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tomography or phase dataset as CSV.
    GenData(GenDataArgs),
    /// Fidelity-versus-operator-count sweep with sampled and UDA sets.
    Figure2(Figure2Args),
    /// Train one tomography network and score it on held-out states.
    TrainQst(TrainQstArgs),
    /// Train or query the constrained all-optical phase-tomography model.
    Aonn {
        #[command(subcommand)]
        action: AonnAction,
    },
    /// Synthesize a weighted multi-spot hologram.
    Gsw(GswArgs),
    /// Tabulate waveplate preparation and measurement over a phase grid.
    PreparePol(PreparePolArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    Qst,
    Phase,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetKind {
    /// All 4^n - 1 operators.
    Full,
    /// The fixed UDA set (n = 2 or 3).
    Uda,
    /// m operators sampled uniformly with the run seed.
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseKind {
    Exact,
    Shots,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Optics,
    Circuit,
}

#[derive(Clone, Copy, ValueEnum)]
enum CameraKind {
    Ideal,
    GainField,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, value_enum, default_value = "qst")]
    kind: DataKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    set: Option<SetKind>,
    /// Operator count for --set random.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    noise: Option<NoiseKind>,
    #[arg(long)]
    shots: Option<u64>,
    /// Phase-data source (--kind phase).
    #[arg(long, value_enum)]
    source: Option<SourceKind>,
}

#[derive(Args)]
struct Figure2Args {
    #[arg(long)]
    n: Option<usize>,
    /// Sampled operator sets per m.
    #[arg(long)]
    sets: Option<usize>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Full 150k-pair training at three qubits.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    /// Worker threads for independent sweep cells.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TrainQstArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    set: Option<SetKind>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
}

#[derive(Subcommand)]
enum AonnAction {
    /// Train on a seeded phase dataset and report held-out errors.
    Train(AonnTrainArgs),
    /// Predict θ for one measurement triple with a saved model.
    Predict(AonnPredictArgs),
}

#[derive(Args)]
struct AonnTrainArgs {
    #[arg(long, value_enum)]
    source: Option<SourceKind>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Args)]
struct AonnPredictArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
    /// Model file (default: <out>/aonn_model.json).
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct GswArgs {
    /// Spot targets CSV with rows u,v,weight.
    #[arg(long)]
    targets: PathBuf,
    /// Grid side length.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Adaptive feedback parameter a in (0, 1].
    #[arg(long)]
    feedback: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    camera: Option<CameraKind>,
    #[arg(long)]
    gain_amplitude: Option<f64>,
    #[arg(long)]
    gain_seed: Option<u64>,
}

#[derive(Args)]
struct PreparePolArgs {
    #[arg(long)]
    points: Option<usize>,
    /// Upper end of the θ grid in radians.
    #[arg(long)]
    theta_max: Option<f64>,
}

/// A user-input problem: reported on stderr with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Optional TOML config with one table per subcommand.
struct FileConfig(Option<toml::Value>);

impl FileConfig {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(FileConfig(None)),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let value = text
                    .parse::<toml::Value>()
                    .map_err(|e| usage(format!("config {}: {e}", p.display())))?;
                Ok(FileConfig(Some(value)))
            }
        }
    }

    fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> anyhow::Result<Option<T>> {
        let Some(value) = self.0.as_ref().and_then(|v| v.get(section)).and_then(|s| s.get(key))
        else {
            return Ok(None);
        };
        value
            .clone()
            .try_into::<T>()
            .map(Some)
            .map_err(|e| usage(format!("config key {section}.{key}: {e}")))
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            if err.downcast_ref::<UsageError>().is_some() {
                eprintln!("error: {err}");
                std::process::exit(2);
            }
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os("OPTOQST_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    match cli.command {
        Command::GenData(args) => gen_data(args, &file, &out_dir),
        Command::Figure2(args) => figure2(args, &file, &out_dir),
        Command::TrainQst(args) => train_qst_cmd(args, &file, &out_dir),
        Command::Aonn { action } => match action {
            AonnAction::Train(args) => aonn_train(args, &file, &out_dir),
            AonnAction::Predict(args) => aonn_predict(args, &out_dir),
        },
        Command::Gsw(args) => gsw(args, &file, &out_dir),
        Command::PreparePol(args) => prepare_pol(args, &file, &out_dir),
    }
}

fn resolve_set(
    kind: SetKind,
    n: usize,
    m: Option<usize>,
    seed: u64,
) -> anyhow::Result<(PauliSet, String)> {
    match kind {
        SetKind::Full => Ok((PauliSet::enumerate(n)?, "full".into())),
        SetKind::Uda => Ok((PauliSet::uda(n)?, "uda".into())),
        SetKind::Random => {
            let m = m.ok_or_else(|| usage("--set random requires --m"))?;
            Ok((PauliSet::sample(n, m, seed)?, format!("random:{m}")))
        }
    }
}

fn gen_data(args: GenDataArgs, file: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let count = args
        .count
        .or(file.get("gen_data", "count")?)
        .unwrap_or(1000);
    if count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let seed = args.seed.or(file.get("gen_data", "seed")?).unwrap_or(1);

    match args.kind {
        DataKind::Qst => {
            let n = args.n.or(file.get("gen_data", "n")?).unwrap_or(1);
            let set_kind = args.set.unwrap_or(SetKind::Full);
            let (set, set_label) = resolve_set(set_kind, n, args.m, seed)?;
            let noise = match args.noise.unwrap_or(NoiseKind::Exact) {
                NoiseKind::Exact => ShotModel::Exact,
                NoiseKind::Shots => {
                    let shots = args
                        .shots
                        .or(file.get("gen_data", "shots")?)
                        .unwrap_or(8192);
                    ShotModel::shots(shots)?
                }
            };
            let dataset = generate_dataset(n, &set, count, seed, noise)?;
            let path = out.join("qst_dataset.csv");
            io::write_qst_dataset_csv(&dataset, &path)?;
            io::write_provenance_json(
                &json!({
                    "command": "gen-data",
                    "kind": "qst",
                    "n": n,
                    "set": set_label,
                    "pauli_set": set.to_text(),
                    "count": count,
                    "seed": seed,
                    "noise": noise.to_string(),
                    "version": env!("CARGO_PKG_VERSION"),
                }),
                out.join("qst_dataset.provenance.json"),
            )?;
            println!("wrote {} ({} records)", path.display(), dataset.len());
        }
        DataKind::Phase => {
            let shots = args
                .shots
                .or(file.get("gen_data", "shots")?)
                .unwrap_or(aonn::DEFAULT_CIRCUIT_SHOTS);
            let source = match args.source.unwrap_or(SourceKind::Optics) {
                SourceKind::Optics => PhaseSource::SimulatedOptics,
                SourceKind::Circuit => PhaseSource::SimulatedCircuit { shots },
            };
            let samples = make_phase_dataset(count, seed, source)?;
            let path = out.join("phase_dataset.csv");
            io::write_phase_dataset_csv(&samples, &path)?;
            io::write_provenance_json(
                &json!({
                    "command": "gen-data",
                    "kind": "phase",
                    "source": source.label(),
                    "count": count,
                    "seed": seed,
                    "version": env!("CARGO_PKG_VERSION"),
                }),
                out.join("phase_dataset.provenance.json"),
            )?;
            println!("wrote {} ({} samples)", path.display(), samples.len());
        }
    }
    Ok(())
}

fn train_config_overrides(
    base: TrainConfig,
    epochs: Option<usize>,
    lr: Option<f64>,
    batch: Option<usize>,
) -> TrainConfig {
    let mut cfg = base;
    if let Some(e) = epochs {
        cfg.iterations = e;
    }
    if let Some(l) = lr {
        cfg.learning_rate = l;
    }
    if let Some(b) = batch {
        cfg.batch_size = BatchSize::Fixed(b);
    }
    cfg
}

fn figure2(args: Figure2Args, file: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let n = args.n.or(file.get("figure2", "n")?).unwrap_or(1);
    let mut cfg = Figure2Config::for_qubits(n, args.paper_scale)?;
    if let Some(sets) = args.sets.or(file.get("figure2", "sets")?) {
        if sets == 0 {
            return Err(usage("--sets must be at least 1"));
        }
        cfg.sets_per_m = sets;
    }
    if let Some(train) = args.train.or(file.get("figure2", "train")?) {
        if train == 0 {
            return Err(usage("--train must be at least 1"));
        }
        cfg.train_count = train;
        cfg.test_count = (train / 10).clamp(1, 2000);
    }
    if let Some(test) = args.test.or(file.get("figure2", "test")?) {
        cfg.test_count = test;
    }
    cfg.base_seed = args.seed.or(file.get("figure2", "seed")?).unwrap_or(1);
    cfg.train = train_config_overrides(
        cfg.train,
        args.epochs.or(file.get("figure2", "epochs")?),
        args.lr.or(file.get("figure2", "lr")?),
        args.batch.or(file.get("figure2", "batch")?),
    );
    let jobs = args.jobs.or(file.get("figure2", "jobs")?).unwrap_or(1);

    let table = figure2_with_jobs(&cfg, jobs)?;
    io::write_results_csv(&table.cells, out.join("figure2_results.csv"))?;
    io::write_aggregate_csv(&table.aggregates, out.join("figure2_aggregate.csv"))?;
    io::write_provenance_json(
        &json!({
            "command": "figure2",
            "config": cfg,
            "jobs": jobs,
            "version": env!("CARGO_PKG_VERSION"),
        }),
        out.join("figure2.provenance.json"),
    )?;
    println!("n,m,kind,mean_fidelity,std_over_sets");
    for a in &table.aggregates {
        println!(
            "{},{},{},{:.6},{:.6}",
            a.n,
            a.m,
            if a.uda { "uda" } else { "random" },
            a.mean_fidelity,
            a.std_over_sets
        );
    }
    Ok(())
}

fn train_qst_cmd(args: TrainQstArgs, file: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let n = args.n.or(file.get("train_qst", "n")?).unwrap_or(1);
    let seed = args.seed.or(file.get("train_qst", "seed")?).unwrap_or(1);
    let train_count = args
        .train
        .or(file.get("train_qst", "train")?)
        .unwrap_or(20_000);
    if train_count == 0 {
        return Err(usage("--train must be at least 1"));
    }
    let test_count = args
        .test
        .or(file.get("train_qst", "test")?)
        .unwrap_or_else(|| (train_count / 10).clamp(1, 2000));
    let set_kind = args.set.unwrap_or(if n == 1 { SetKind::Full } else { SetKind::Uda });
    let (set, set_label) = resolve_set(set_kind, n, args.m, seed)?;
    let cfg = train_config_overrides(
        TrainConfig {
            seed,
            ..TrainConfig::default()
        },
        args.epochs.or(file.get("train_qst", "epochs")?),
        args.lr.or(file.get("train_qst", "lr")?),
        args.batch.or(file.get("train_qst", "batch")?),
    );

    let set_id = match set_kind {
        SetKind::Uda => SetId::Uda,
        _ => SetId::Seeded(seed),
    };
    let (network, result) = train_qst(n, &set, train_count, test_count, set_id, &cfg)?;
    network.save(out.join("qst_model.json"))?;
    io::write_results_csv(std::slice::from_ref(&result), out.join("qst_result.csv"))?;
    io::write_provenance_json(
        &json!({
            "command": "train-qst",
            "n": n,
            "set": set_label,
            "pauli_set": set.to_text(),
            "train_count": train_count,
            "test_count": test_count,
            "train": cfg,
            "version": env!("CARGO_PKG_VERSION"),
        }),
        out.join("qst_result.provenance.json"),
    )?;
    println!(
        "mean fidelity {:.6} (std {:.6}) over {} held-out states",
        result.mean_fidelity,
        result.std_fidelity,
        result.fidelities.len()
    );
    Ok(())
}

fn aonn_train(args: AonnTrainArgs, file: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let source_kind = args.source.unwrap_or(SourceKind::Optics);
    let shots = args
        .shots
        .or(file.get("aonn", "shots")?)
        .unwrap_or(aonn::DEFAULT_CIRCUIT_SHOTS);
    let (source, default_train, default_test) = match source_kind {
        SourceKind::Optics => (PhaseSource::SimulatedOptics, 23, 32),
        SourceKind::Circuit => (PhaseSource::SimulatedCircuit { shots }, 158, 50),
    };
    let train_count = args
        .train
        .or(file.get("aonn", "train")?)
        .unwrap_or(default_train);
    let test_count = args
        .test
        .or(file.get("aonn", "test")?)
        .unwrap_or(default_test);
    if train_count == 0 || test_count == 0 {
        return Err(usage("--train and --test must be at least 1"));
    }
    let seed = args.seed.or(file.get("aonn", "seed")?).unwrap_or(0);

    let train_set = make_phase_dataset(train_count, seed, source)?;
    let test_set = make_phase_dataset(test_count, seed.wrapping_add(TEST_SEED_OFFSET), source)?;

    let learning_rate = args
        .lr
        .or(file.get("aonn", "lr")?)
        .unwrap_or(aonn::AONN_LEARNING_RATE);
    let iterations = args
        .iterations
        .or(file.get("aonn", "iterations")?)
        .unwrap_or(aonn::AONN_ITERATIONS);
    let eit = optoqst::nn::EitParams {
        od: file.get("aonn", "od")?.unwrap_or(4.0),
        gamma12: file.get("aonn", "gamma12")?.unwrap_or(0.1),
        gamma13: file.get("aonn", "gamma13")?.unwrap_or(1.0),
        probe_in: file.get("aonn", "probe_in")?.unwrap_or(1.0),
        input_gain: file.get("aonn", "input_gain")?.unwrap_or(1.0),
    };
    let (model, trace) =
        aonn::train_aonn_configured(&train_set, seed, learning_rate, iterations, eit)?;

    let (train_mean, train_max) = prediction_errors(&model, &train_set)?;
    let (test_mean, test_max) = prediction_errors(&model, &test_set)?;

    model.save(out.join("aonn_model.json"))?;
    io::write_phase_dataset_csv(&train_set, out.join("aonn_train.csv"))?;
    io::write_phase_dataset_csv(&test_set, out.join("aonn_test.csv"))?;
    io::write_loss_trace_csv(&trace, out.join("aonn_loss.csv"))?;
    let predictions: Vec<(f64, f64, PhaseSource)> = test_set
        .iter()
        .map(|s| Ok((s.theta, predict_theta(&model, s.c)?, s.source)))
        .collect::<optoqst::Result<_>>()?;
    io::write_predictions_csv(&predictions, out.join("aonn_predictions.csv"))?;
    io::write_provenance_json(
        &json!({
            "command": "aonn train",
            "source": source.label(),
            "shots": shots,
            "train_count": train_count,
            "test_count": test_count,
            "seed": seed,
            "learning_rate": learning_rate,
            "iterations": iterations,
            "eit": eit,
            "version": env!("CARGO_PKG_VERSION"),
        }),
        out.join("aonn_model.provenance.json"),
    )?;
    println!(
        "train error: mean {train_mean:.4} rad, max {train_max:.4} rad ({} samples)",
        train_set.len()
    );
    println!(
        "test error:  mean {test_mean:.4} rad, max {test_max:.4} rad ({} samples)",
        test_set.len()
    );
    println!("final training mse: {:.3e} rad^2", trace.last().unwrap());
    Ok(())
}

fn aonn_predict(args: AonnPredictArgs, out: &Path) -> anyhow::Result<()> {
    for (name, v) in [("--x", args.x), ("--y", args.y), ("--z", args.z)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(usage(format!(
                "{name} = {v} outside [-1, 1]: not a Pauli expectation value"
            )));
        }
    }
    let model_path = args.model.unwrap_or_else(|| out.join("aonn_model.json"));
    let model = AonnModel::load(&model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let theta = predict_theta(&model, [args.x, args.y, args.z])?;
    let rho = rho_from_theta(theta)?;
    println!("theta = {theta:.6} rad");
    println!(
        "rho = [[{:.4}, {:.4}{:+.4}i], [{:.4}{:+.4}i, {:.4}]]",
        rho.entry(0, 0).re,
        rho.entry(0, 1).re,
        rho.entry(0, 1).im,
        rho.entry(1, 0).re,
        rho.entry(1, 0).im,
        rho.entry(1, 1).re
    );
    Ok(())
}

fn gsw(args: GswArgs, file: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let targets = io::read_spot_targets_csv(&args.targets)
        .with_context(|| format!("reading targets {}", args.targets.display()))?;
    let size = args.size.or(file.get("gsw", "size")?).unwrap_or(256);
    let cfg = GswConfig {
        dims: (size, size),
        feedback: args.feedback.or(file.get("gsw", "feedback")?).unwrap_or(0.7),
        max_iters: args
            .iterations
            .or(file.get("gsw", "iterations")?)
            .unwrap_or(100),
        tolerance: args
            .tolerance
            .or(file.get("gsw", "tolerance")?)
            .unwrap_or(1e-4),
        seed: args.seed.or(file.get("gsw", "seed")?).unwrap_or(0),
    };
    let camera_kind = args.camera.unwrap_or(CameraKind::Ideal);
    let gain_amplitude = args
        .gain_amplitude
        .or(file.get("gsw", "gain_amplitude")?)
        .unwrap_or(0.1);
    let gain_seed = args.gain_seed.or(file.get("gsw", "gain_seed")?).unwrap_or(0);

    let positions = targets.positions().to_vec();
    let (mask, state) = match camera_kind {
        CameraKind::Ideal => gsw_optimize(&targets, &cfg, ideal_camera(cfg.dims, positions))?,
        CameraKind::GainField => gsw_optimize(
            &targets,
            &cfg,
            gain_field_camera(cfg.dims, positions, gain_amplitude, gain_seed),
        )?,
    };

    mask.write_pgm(out.join("gsw_mask.pgm"))?;
    mask.write_csv(out.join("gsw_mask.csv"))?;
    io::write_spot_report_csv(&targets, &state, out.join("gsw_spots.csv"))?;
    io::write_provenance_json(
        &json!({
            "command": "gsw",
            "targets": args.targets.display().to_string(),
            "spots": targets.len(),
            "config": cfg,
            "camera": match camera_kind { CameraKind::Ideal => "ideal", CameraKind::GainField => "gain-field" },
            "gain_amplitude": gain_amplitude,
            "gain_seed": gain_seed,
            "version": env!("CARGO_PKG_VERSION"),
        }),
        out.join("gsw_mask.provenance.json"),
    )?;
    println!(
        "{} after {} iterations: uniformity error {:.5}{}",
        if state.converged { "converged" } else { "stopped" },
        state.iterations,
        state.uniformity_error,
        if state.zero_intensity_flagged {
            " (zero-intensity readings floored)"
        } else {
            ""
        }
    );
    Ok(())
}

fn prepare_pol(args: PreparePolArgs, file: &FileConfig, out: &Path) -> anyhow::Result<()> {
    let points = args
        .points
        .or(file.get("prepare_pol", "points")?)
        .unwrap_or(1000);
    if points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let theta_max = args
        .theta_max
        .or(file.get("prepare_pol", "theta_max")?)
        .unwrap_or(std::f64::consts::FRAC_PI_2);

    let mut text = String::from("theta,s1,s2,s3,meas_x,meas_y,meas_z\n");
    for k in 0..points {
        let theta = theta_max * k as f64 / (points - 1) as f64;
        let beam = prepare_state(theta);
        let s = stokes(&beam);
        let mx = measure_unit(&beam, Pauli::X)?;
        let my = measure_unit(&beam, Pauli::Y)?;
        let mz = measure_unit(&beam, Pauli::Z)?;
        text.push_str(&format!("{theta},{},{},{},{mx},{my},{mz}\n", s.s1, s.s2, s.s3));
    }
    let path = out.join("polarization_table.csv");
    std::fs::write(&path, text)?;
    io::write_provenance_json(
        &json!({
            "command": "prepare-pol",
            "points": points,
            "theta_max": theta_max,
            "version": env!("CARGO_PKG_VERSION"),
        }),
        out.join("polarization_table.provenance.json"),
    )?;
    println!("wrote {path}", path = path.display());
    Ok(())
}
