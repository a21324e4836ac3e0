//! Adam training on mean squared error, with optional projection onto the
//! nonnegative-weight set after every step.
//!
//! Everything is deterministic for a fixed seed: initialization comes from
//! the network constructor, shuffling from a ChaCha stream owned by the
//! trainer, and all reductions run in a fixed order.

use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, Network, Scalar};
use crate::error::{Error, Result};

/// Samples per gradient step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchSize {
    /// The whole dataset in every step; one step per iteration.
    Full,
    /// Shuffled minibatches; one epoch per iteration.
    Fixed(usize),
}

impl std::fmt::Display for BatchSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BatchSize::Full => write!(f, "full"),
            BatchSize::Fixed(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Full-batch steps (BatchSize::Full) or epochs (BatchSize::Fixed).
    pub iterations: usize,
    pub batch_size: BatchSize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            iterations: 300,
            batch_size: BatchSize::Fixed(256),
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Full-batch preset used by the optical-network regression.
    pub fn full_batch(learning_rate: f64, iterations: usize, seed: u64) -> Self {
        TrainConfig {
            learning_rate,
            iterations,
            batch_size: BatchSize::Full,
            seed,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if let BatchSize::Fixed(0) = self.batch_size {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::InvalidConfig("Adam betas must lie in (0, 1)".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("Adam epsilon must be positive".into()));
        }
        Ok(())
    }
}

pub(crate) struct LayerGrad<T: Scalar> {
    pub dw: Array2<T>,
    pub db: Array1<T>,
}

/// Mean squared error over every entry of the batch.
pub(crate) fn mse<T: Scalar>(pred: &Array2<T>, target: &Array2<T>) -> f64 {
    let diff = pred - target;
    let sum = diff.iter().map(|d| (*d * *d).as_f64()).sum::<f64>();
    sum / (pred.nrows() * pred.ncols()) as f64
}

/// C = alpha·A·B + beta·C into a preallocated output.
fn gemm_into<T: Scalar>(
    alpha: T,
    a: &ArrayView2<T>,
    b: &ArrayView2<T>,
    beta: T,
    c: &mut ArrayViewMut2<T>,
) {
    let (m, k) = a.dim();
    let (kb, n) = b.dim();
    debug_assert_eq!(k, kb);
    debug_assert_eq!(c.dim(), (m, n));
    unsafe {
        T::gemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            a.stride_of(Axis(0)),
            a.stride_of(Axis(1)),
            b.as_ptr(),
            b.stride_of(Axis(0)),
            b.stride_of(Axis(1)),
            beta,
            c.as_mut_ptr(),
            c.stride_of(Axis(0)),
            c.stride_of(Axis(1)),
        );
    }
}

/// Per-training-run buffers, sized once so the step loop never allocates.
struct Scratch<T: Scalar> {
    /// Post-activation of each layer.
    acts: Vec<Array2<T>>,
    /// Pre-activation copies, kept only where the derivative needs them.
    pres: Vec<Option<Array2<T>>>,
    /// Gradient w.r.t. each layer's output.
    deltas: Vec<Array2<T>>,
    dw: Vec<Array2<T>>,
    db: Vec<Array1<T>>,
}

impl<T: Scalar> Scratch<T> {
    fn new(net: &Network<T>, max_rows: usize) -> Self {
        let layers = net.layers();
        Scratch {
            acts: layers
                .iter()
                .map(|l| Array2::zeros((max_rows, l.output_dim())))
                .collect(),
            pres: layers
                .iter()
                .map(|l| {
                    matches!(l.activation, Activation::Eit(_))
                        .then(|| Array2::zeros((max_rows, l.output_dim())))
                })
                .collect(),
            deltas: layers
                .iter()
                .map(|l| Array2::zeros((max_rows, l.output_dim())))
                .collect(),
            dw: layers.iter().map(|l| Array2::zeros(l.weights.raw_dim())).collect(),
            db: layers.iter().map(|l| Array1::zeros(l.bias.raw_dim())).collect(),
        }
    }
}

/// One forward/backward pass over `rows` samples already staged in the
/// scratch (or provided views). Fills `scratch.dw`/`scratch.db` and returns
/// the pre-step loss.
fn compute_gradients<T: Scalar>(
    net: &Network<T>,
    scratch: &mut Scratch<T>,
    inputs: &ArrayView2<T>,
    targets: &ArrayView2<T>,
) -> Result<f64> {
    let layers = net.layers();
    let rows = inputs.nrows();

    // Forward: bias rows preset, GEMM accumulates on top, activation in place.
    for l in 0..layers.len() {
        let layer = &layers[l];
        let (before, rest) = scratch.acts.split_at_mut(l);
        let mut z = rest[0].slice_mut(ndarray::s![..rows, ..]);
        let upstream = if l == 0 {
            inputs.view()
        } else {
            before[l - 1].slice(ndarray::s![..rows, ..])
        };
        z.assign(
            &layer
                .bias
                .broadcast((rows, layer.output_dim()))
                .expect("bias broadcasts over rows"),
        );
        gemm_into(T::one(), &upstream, &layer.weights.t(), T::one(), &mut z);
        if let Some(pre) = scratch.pres[l].as_mut() {
            pre.slice_mut(ndarray::s![..rows, ..]).assign(&z);
        }
        match layer.activation {
            Activation::Identity => {}
            Activation::LeakyRelu { slope } => {
                let s = T::from_f64(slope);
                z.mapv_inplace(|v| if v >= T::zero() { v } else { s * v });
            }
            Activation::Eit(params) => {
                if let Some(bad) = z.iter().find(|v| **v < T::zero()) {
                    return Err(Error::NegativeActivationInput(bad.as_f64()));
                }
                z.mapv_inplace(|v| T::from_f64(params.transmission(v.as_f64())));
            }
        }
    }

    // Loss and its gradient at the output.
    let last = layers.len() - 1;
    let pred = scratch.acts[last].slice(ndarray::s![..rows, ..]);
    let mut sum = 0.0;
    {
        let mut d_out = scratch.deltas[last].slice_mut(ndarray::s![..rows, ..]);
        let count = (rows * net.output_dim()) as f64;
        let scale = T::from_f64(2.0 / count);
        ndarray::azip!((d in &mut d_out, &p in &pred, &t in targets) {
            let diff = p - t;
            sum += (diff * diff).as_f64();
            *d = diff * scale;
        });
    }
    let loss = sum / (rows * net.output_dim()) as f64;

    // Backward.
    for l in (0..layers.len()).rev() {
        let layer = &layers[l];
        let (d_before, d_rest) = scratch.deltas.split_at_mut(l);
        let mut dz = d_rest[0].slice_mut(ndarray::s![..rows, ..]);
        match layer.activation {
            Activation::Identity => {}
            Activation::LeakyRelu { slope } => {
                // The activation keeps the pre-activation's sign, so the
                // derivative can be read off the stored activation.
                let s = T::from_f64(slope);
                let post = scratch.acts[l].slice(ndarray::s![..rows, ..]);
                ndarray::azip!((d in &mut dz, &p in &post) {
                    if p < T::zero() {
                        *d = *d * s;
                    }
                });
            }
            Activation::Eit(params) => {
                let pre = scratch.pres[l].as_ref().expect("stored for EIT layers");
                let pre = pre.slice(ndarray::s![..rows, ..]);
                ndarray::azip!((d in &mut dz, &z in &pre) {
                    *d = *d * T::from_f64(params.derivative(z.as_f64()));
                });
            }
        }
        let upstream = if l == 0 {
            inputs.view()
        } else {
            scratch.acts[l - 1].slice(ndarray::s![..rows, ..])
        };
        gemm_into(
            T::one(),
            &dz.view().reversed_axes(),
            &upstream,
            T::zero(),
            &mut scratch.dw[l].view_mut(),
        );
        let db = &mut scratch.db[l];
        db.fill(T::zero());
        for row in dz.rows() {
            *db += &row;
        }
        if l > 0 {
            let mut da = d_before[l - 1].slice_mut(ndarray::s![..rows, ..]);
            gemm_into(
                T::one(),
                &dz.view(),
                &layer.weights.view(),
                T::zero(),
                &mut da,
            );
        }
    }
    Ok(loss)
}

/// Backpropagates the MSE gradient for a batch. Returns per-layer gradients
/// and the loss before any update.
pub(crate) fn gradients<T: Scalar>(
    net: &Network<T>,
    inputs: &Array2<T>,
    targets: &Array2<T>,
) -> Result<(Vec<LayerGrad<T>>, f64)> {
    let mut scratch = Scratch::new(net, inputs.nrows());
    let loss = compute_gradients(net, &mut scratch, &inputs.view(), &targets.view())?;
    let grads = scratch
        .dw
        .into_iter()
        .zip(scratch.db)
        .map(|(dw, db)| LayerGrad { dw, db })
        .collect();
    Ok((grads, loss))
}

struct Adam<T: Scalar> {
    m: Vec<LayerGrad<T>>,
    v: Vec<LayerGrad<T>>,
    step: u32,
}

impl<T: Scalar> Adam<T> {
    fn new(net: &Network<T>) -> Self {
        let zeros = |net: &Network<T>| {
            net.layers()
                .iter()
                .map(|l| LayerGrad {
                    dw: Array2::zeros(l.weights.raw_dim()),
                    db: Array1::zeros(l.bias.raw_dim()),
                })
                .collect()
        };
        Adam {
            m: zeros(net),
            v: zeros(net),
            step: 0,
        }
    }

    fn update(&mut self, net: &mut Network<T>, dw: &[Array2<T>], db: &[Array1<T>], cfg: &TrainConfig) {
        self.step += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.step as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.step as i32);
        let alpha = T::from_f64(cfg.learning_rate * bc2.sqrt() / bc1);
        let b1 = T::from_f64(cfg.beta1);
        let b2 = T::from_f64(cfg.beta2);
        let one_m_b1 = T::from_f64(1.0 - cfg.beta1);
        let one_m_b2 = T::from_f64(1.0 - cfg.beta2);
        let eps = T::from_f64(cfg.epsilon);

        for ((((layer, gw), gb), m), v) in net
            .layers_mut()
            .iter_mut()
            .zip(dw)
            .zip(db)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::azip!((w in &mut layer.weights, g in gw, m in &mut m.dw, v in &mut v.dw) {
                *m = b1 * *m + one_m_b1 * *g;
                *v = b2 * *v + one_m_b2 * *g * *g;
                *w = *w - alpha * *m / (v.sqrt() + eps);
            });
            ndarray::azip!((b in &mut layer.bias, g in gb, m in &mut m.db, v in &mut v.db) {
                *m = b1 * *m + one_m_b1 * *g;
                *v = b2 * *v + one_m_b2 * *g * *g;
                *b = *b - alpha * *m / (v.sqrt() + eps);
            });
        }
        if net.nonneg_constrained() {
            net.project_nonnegative();
        }
    }
}

/// Trains the network in place, minimizing MSE with Adam.
///
/// Returns the loss trace, one entry per iteration: the pre-step loss in
/// full-batch mode, the sample-weighted mean of pre-step minibatch losses
/// per epoch otherwise. Constrained networks are projected back onto
/// nonnegative weights and zero biases after every step.
pub fn train<T: Scalar>(
    net: &mut Network<T>,
    inputs: &Array2<T>,
    targets: &Array2<T>,
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let count = inputs.nrows();
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.nrows() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            actual: targets.nrows(),
        });
    }
    if inputs.ncols() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            actual: inputs.ncols(),
        });
    }
    if targets.ncols() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.output_dim(),
            actual: targets.ncols(),
        });
    }

    let mut adam = Adam::new(net);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..count).collect();
    let mut trace = Vec::with_capacity(cfg.iterations);

    let max_rows = match cfg.batch_size {
        BatchSize::Full => count,
        BatchSize::Fixed(batch) => batch.min(count),
    };
    let mut scratch = Scratch::new(net, max_rows);
    let mut batch_x: Array2<T> = Array2::zeros((max_rows, net.input_dim()));
    let mut batch_y: Array2<T> = Array2::zeros((max_rows, net.output_dim()));

    for iteration in 0..cfg.iterations {
        let loss = match cfg.batch_size {
            BatchSize::Full => {
                let loss =
                    compute_gradients(net, &mut scratch, &inputs.view(), &targets.view())?;
                adam.update(net, &scratch.dw, &scratch.db, cfg);
                loss
            }
            BatchSize::Fixed(batch) => {
                order.shuffle(&mut rng);
                let mut weighted = 0.0;
                for chunk in order.chunks(batch) {
                    let rows = chunk.len();
                    for (i, &idx) in chunk.iter().enumerate() {
                        batch_x.row_mut(i).assign(&inputs.row(idx));
                        batch_y.row_mut(i).assign(&targets.row(idx));
                    }
                    let loss = compute_gradients(
                        net,
                        &mut scratch,
                        &batch_x.slice(ndarray::s![..rows, ..]),
                        &batch_y.slice(ndarray::s![..rows, ..]),
                    )?;
                    adam.update(net, &scratch.dw, &scratch.db, cfg);
                    weighted += loss * rows as f64;
                }
                weighted / count as f64
            }
        };
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }
        trace.push(loss);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    fn line_dataset() -> (Array2<f64>, Array2<f64>) {
        // y = 2x over a few points.
        let xs: Vec<f64> = (0..16).map(|k| k as f64 / 8.0 - 1.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        (
            Array2::from_shape_vec((16, 1), xs).unwrap(),
            Array2::from_shape_vec((16, 1), ys).unwrap(),
        )
    }

    #[test]
    fn fits_a_line() {
        let (x, y) = line_dataset();
        let mut net: Network<f64> =
            Network::random(&[1, 1], Activation::Identity, Activation::Identity, false, 3)
                .unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.05,
            iterations: 500,
            batch_size: BatchSize::Full,
            seed: 1,
            ..TrainConfig::default()
        };
        let trace = train(&mut net, &x, &y, &cfg).unwrap();
        let w = net.layers()[0].weights()[(0, 0)];
        assert!((w - 2.0).abs() < 1e-2, "weight {w}");
        assert!(trace.iter().all(|l| l.is_finite()));
        assert!(trace.last().unwrap() <= trace.first().unwrap());
        assert_eq!(trace.len(), 500);
    }

    #[test]
    fn loss_trace_is_bit_identical_across_runs() {
        let (x, y) = line_dataset();
        let cfg = TrainConfig {
            learning_rate: 0.01,
            iterations: 50,
            batch_size: BatchSize::Fixed(4),
            seed: 9,
            ..TrainConfig::default()
        };
        let run = || {
            let mut net: Network<f64> = Network::random(
                &[1, 8, 1],
                Activation::leaky_relu(0.01).unwrap(),
                Activation::Identity,
                false,
                7,
            )
            .unwrap();
            train(&mut net, &x, &y, &cfg).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn constrained_training_keeps_invariant_every_step() {
        let x = Array2::from_shape_vec((8, 2), (0..16).map(|k| k as f64 / 16.0).collect())
            .unwrap();
        let y = Array2::from_shape_vec((8, 1), (0..8).map(|k| k as f64 / 8.0).collect()).unwrap();
        let mut net: Network<f64> = Network::random(
            &[2, 4, 1],
            Activation::eit(crate::nn::EitParams::default()).unwrap(),
            Activation::Identity,
            true,
            2,
        )
        .unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.01,
            iterations: 40,
            batch_size: BatchSize::Full,
            seed: 0,
            ..TrainConfig::default()
        };
        train(&mut net, &x, &y, &cfg).unwrap();
        for layer in net.layers() {
            assert!(layer.weights().iter().all(|w| *w >= 0.0));
            assert!(layer.bias().iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn rejects_empty_and_mismatched_data() {
        let mut net: Network<f64> =
            Network::random(&[1, 1], Activation::Identity, Activation::Identity, false, 0)
                .unwrap();
        let empty = Array2::<f64>::zeros((0, 1));
        assert!(matches!(
            train(&mut net, &empty, &empty, &TrainConfig::default()),
            Err(Error::EmptyDataset)
        ));
        let x = Array2::<f64>::zeros((4, 1));
        let y = Array2::<f64>::zeros((3, 1));
        assert!(train(&mut net, &x, &y, &TrainConfig::default()).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            iterations: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            batch_size: BatchSize::Fixed(0),
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
