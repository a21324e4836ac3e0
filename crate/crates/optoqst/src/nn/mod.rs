//! A small dense feed-forward network with exactly what tomography needs:
//! Leaky-ReLU and EIT-transmission activations, Adam training on mean
//! squared error, an optional nonnegativity constraint mirroring hardware
//! that encodes signals in light intensity, and a finite-difference
//! gradient checker.
//!
//! The engine is generic over `f32`/`f64`: gradient checks and the optical
//! network run in `f64`, the large tomography trainings in `f32`.

mod gradcheck;
mod train;

pub use gradcheck::{numerical_gradient_check, GradCheckReport};
pub use train::{train, BatchSize, TrainConfig};

use ndarray::{Array1, Array2};
use num_traits::Float;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floating-point scalar the network can compute in.
pub trait Scalar:
    Float
    + num_traits::NumAssign
    + ndarray::ScalarOperand
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;

    /// C = alpha·A·B + beta·C with explicit element strides.
    ///
    /// # Safety
    /// Pointers must reference buffers of the implied extents; C must not
    /// alias A or B.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// Parameters of the EIT transmission curve used as an optical activation.
///
/// A probe beam of intensity `probe_in` crosses an atomic medium of optical
/// depth `od`; a coupling beam with Rabi frequency Ω_c (Ω_c² = `input_gain`
/// times the neuron's pre-activation) opens a transparency window against
/// the dephasing/decay rates γ12, γ13.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EitParams {
    pub od: f64,
    pub gamma12: f64,
    pub gamma13: f64,
    pub probe_in: f64,
    pub input_gain: f64,
}

impl Default for EitParams {
    fn default() -> Self {
        EitParams {
            od: 4.0,
            gamma12: 0.1,
            gamma13: 1.0,
            probe_in: 1.0,
            input_gain: 1.0,
        }
    }
}

impl EitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("od", self.od),
            ("gamma12", self.gamma12),
            ("gamma13", self.gamma13),
            ("probe_in", self.probe_in),
            ("input_gain", self.input_gain),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidActivation(format!(
                    "EIT parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// 4·γ12·γ13, the linewidth product the coupling power competes with.
    fn linewidth(&self) -> f64 {
        4.0 * self.gamma12 * self.gamma13
    }

    /// Probe transmission for pre-activation `x >= 0`.
    pub fn transmission(&self, x: f64) -> f64 {
        let g = self.linewidth();
        self.probe_in * (-self.od * g / (self.input_gain * x + g)).exp()
    }

    /// d transmission / dx. Strictly positive for x >= 0.
    pub fn derivative(&self, x: f64) -> f64 {
        let g = self.linewidth();
        let denom = self.input_gain * x + g;
        self.transmission(x) * self.od * g * self.input_gain / (denom * denom)
    }

    /// Output at zero coupling power: probe_in · e^{-od}.
    pub fn floor(&self) -> f64 {
        self.probe_in * (-self.od).exp()
    }

    /// Saturation value at large coupling power.
    pub fn ceiling(&self) -> f64 {
        self.probe_in
    }

    /// Largest x up to which the curve is convex: the second derivative
    /// changes sign at x = 4γ12γ13·(od/2 - 1)/input_gain.
    pub fn convexity_limit(&self) -> f64 {
        (self.linewidth() * (self.od / 2.0 - 1.0) / self.input_gain).max(0.0)
    }
}

/// EIT transmission as a scalar activation. Negative pre-activations are
/// rejected: intensity-coded signals cannot go below zero, so a negative
/// value means the surrounding wiring is broken.
pub fn eit_activation(x: f64, params: &EitParams) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::NegativeActivationInput(x));
    }
    Ok(params.transmission(x))
}

/// x for x >= 0, slope·x otherwise.
pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Elementwise nonlinearity applied after a layer's affine map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "activation", content = "activation_params")]
pub enum Activation {
    Identity,
    LeakyRelu { slope: f64 },
    Eit(EitParams),
}

impl Activation {
    pub fn leaky_relu(slope: f64) -> Result<Self> {
        let a = Activation::LeakyRelu { slope };
        a.validate()?;
        Ok(a)
    }

    pub fn eit(params: EitParams) -> Result<Self> {
        params.validate()?;
        Ok(Activation::Eit(params))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Activation::Identity => Ok(()),
            Activation::LeakyRelu { slope } => {
                if !(*slope > 0.0 && *slope < 1.0) {
                    Err(Error::InvalidActivation(format!(
                        "Leaky ReLU slope must lie in (0, 1), got {slope}"
                    )))
                } else {
                    Ok(())
                }
            }
            Activation::Eit(p) => p.validate(),
        }
    }

    pub(crate) fn apply_batch<T: Scalar>(&self, z: &mut Array2<T>) -> Result<()> {
        match self {
            Activation::Identity => {}
            Activation::LeakyRelu { slope } => {
                let s = T::from_f64(*slope);
                z.mapv_inplace(|x| if x >= T::zero() { x } else { s * x });
            }
            Activation::Eit(p) => {
                if let Some(bad) = z.iter().find(|v| **v < T::zero()) {
                    return Err(Error::NegativeActivationInput(bad.as_f64()));
                }
                z.mapv_inplace(|x| T::from_f64(p.transmission(x.as_f64())));
            }
        }
        Ok(())
    }

}

/// One dense layer: `out = activation(weights · in + bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T: Scalar> {
    pub(crate) weights: Array2<T>, // out × in
    pub(crate) bias: Array1<T>,
    pub(crate) activation: Activation,
}

impl<T: Scalar> Layer<T> {
    pub fn new(weights: Array2<T>, bias: Array1<T>, activation: Activation) -> Result<Self> {
        activation.validate()?;
        if weights.nrows() != bias.len() {
            return Err(Error::InvalidNetwork(format!(
                "layer has {} output rows but {} bias entries",
                weights.nrows(),
                bias.len()
            )));
        }
        Ok(Layer {
            weights,
            bias,
            activation,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Array2<T> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<T> {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }
}

/// A feed-forward stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T: Scalar> {
    layers: Vec<Layer<T>>,
    nonneg_constrained: bool,
}

impl<T: Scalar> Network<T> {
    pub fn new(layers: Vec<Layer<T>>, nonneg_constrained: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("network has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::InvalidNetwork(format!(
                    "layer output {} does not chain into next input {}",
                    pair[0].output_dim(),
                    pair[1].input_dim()
                )));
            }
        }
        let net = Network {
            layers,
            nonneg_constrained,
        };
        if nonneg_constrained {
            net.check_nonneg()?;
        }
        Ok(net)
    }

    /// Randomly initialized network over the given layer widths.
    ///
    /// Hidden layers use `hidden`, the last layer `output`. Constrained
    /// networks draw weights from U[0, 1/√fan_in] so the nonnegativity
    /// invariant holds from step zero; unconstrained ones draw from
    /// U[-1/√fan_in, 1/√fan_in]. Biases start at zero.
    pub fn random(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        nonneg_constrained: bool,
        seed: u64,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidNetwork(
                "need at least input and output widths".into(),
            ));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidNetwork("zero-width layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(widths.len() - 1);
        for (l, pair) in widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            let weights = Array2::from_shape_simple_fn((fan_out, fan_in), || {
                let u: f64 = rng.random();
                let w = if nonneg_constrained {
                    u * scale
                } else {
                    (2.0 * u - 1.0) * scale
                };
                T::from_f64(w)
            });
            let bias = Array1::from_elem(fan_out, T::zero());
            let activation = if l + 2 == widths.len() { output } else { hidden };
            layers.push(Layer::new(weights, bias, activation)?);
        }
        Network::new(layers, nonneg_constrained)
    }

    fn check_nonneg(&self) -> Result<()> {
        for layer in &self.layers {
            if layer.weights.iter().any(|w| *w < T::zero()) {
                return Err(Error::InvalidNetwork(
                    "constrained network has a negative weight".into(),
                ));
            }
            if layer.bias.iter().any(|b| *b != T::zero()) {
                return Err(Error::InvalidNetwork(
                    "constrained network has a nonzero bias".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn nonneg_constrained(&self) -> bool {
        self.nonneg_constrained
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    /// Layer widths including the input: [in, hidden..., out].
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(self.layers.iter().map(|l| l.output_dim()));
        w
    }

    /// Runs one input vector through the network.
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        let x = Array2::from_shape_vec((1, input.len()), input.to_vec())
            .expect("shape matches by construction");
        let out = self.forward_batch(&x)?;
        Ok(out.row(0).to_vec())
    }

    /// Runs a batch (one row per sample) through the network.
    pub fn forward_batch(&self, input: &Array2<T>) -> Result<Array2<T>> {
        if input.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: input.ncols(),
            });
        }
        let mut a = input.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.bias;
            layer.activation.apply_batch(&mut z)?;
            a = z;
        }
        Ok(a)
    }

    /// Forward pass keeping every pre-activation and activation, for
    /// backpropagation.
    pub(crate) fn forward_trace(
        &self,
        input: &Array2<T>,
    ) -> Result<(Vec<Array2<T>>, Vec<Array2<T>>)> {
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut posts = Vec::with_capacity(self.layers.len());
        let mut a = input.to_owned();
        for layer in &self.layers {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.bias;
            pres.push(z.clone());
            layer.activation.apply_batch(&mut z)?;
            posts.push(z.clone());
            a = z;
        }
        Ok((pres, posts))
    }

    /// Clips every weight at zero and zeroes all biases. Idempotent.
    pub fn project_nonnegative(&mut self) {
        for layer in &mut self.layers {
            layer.weights.mapv_inplace(|w| w.max(T::zero()));
            layer.bias.fill(T::zero());
        }
    }

    /// Serializes to the model-file JSON schema.
    pub fn to_json(&self) -> String {
        let file = NetworkFile {
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    rows: l.output_dim(),
                    cols: l.input_dim(),
                    weights: l.weights.iter().map(|w| w.as_f64()).collect(),
                    bias: l.bias.iter().map(|b| b.as_f64()).collect(),
                    activation: l.activation,
                })
                .collect(),
            nonneg_constrained: self.nonneg_constrained,
        };
        let mut text = serde_json::to_string_pretty(&file).expect("schema is serializable");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        let layers = file
            .layers
            .into_iter()
            .map(|l| {
                if l.weights.len() != l.rows * l.cols {
                    return Err(Error::InvalidNetwork(format!(
                        "{}x{} layer with {} weights",
                        l.rows,
                        l.cols,
                        l.weights.len()
                    )));
                }
                let weights = Array2::from_shape_vec(
                    (l.rows, l.cols),
                    l.weights.iter().map(|&w| T::from_f64(w)).collect(),
                )
                .expect("length checked above");
                let bias = Array1::from_vec(l.bias.iter().map(|&b| T::from_f64(b)).collect());
                Layer::new(weights, bias, l.activation)
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(layers, file.nonneg_constrained)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    layers: Vec<LayerFile>,
    nonneg_constrained: bool,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    #[serde(flatten)]
    activation: Activation,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eit_zero_input_hits_floor() {
        let p = EitParams::default();
        let v = eit_activation(0.0, &p).unwrap();
        assert!((v - (-4.0f64).exp()).abs() < 1e-15);
        assert!((v - p.floor()).abs() < 1e-15);
    }

    #[test]
    fn eit_saturates_at_probe_intensity() {
        let p = EitParams::default();
        let v = eit_activation(1e9, &p).unwrap();
        assert!(v > 0.999 * p.ceiling());
        assert!(v < p.ceiling());
    }

    #[test]
    fn eit_half_depth_point() {
        // input_gain·x = 4γ12γ13 gives probe_in·e^{-od/2}.
        let p = EitParams::default();
        let x = 4.0 * p.gamma12 * p.gamma13 / p.input_gain;
        let v = eit_activation(x, &p).unwrap();
        assert!((v - p.probe_in * (-p.od / 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn eit_rejects_negative_input() {
        let p = EitParams::default();
        assert!(matches!(
            eit_activation(-0.1, &p),
            Err(Error::NegativeActivationInput(_))
        ));
    }

    #[test]
    fn eit_strictly_increasing_on_operating_grid() {
        let p = EitParams::default();
        let hi = 10.0 * 4.0 * p.gamma12 * p.gamma13 / p.input_gain;
        let steps = 10_000;
        let mut prev = p.transmission(0.0);
        for k in 1..=steps {
            let x = hi * k as f64 / steps as f64;
            let v = p.transmission(x);
            assert!(v > prev, "not increasing at x = {x}");
            prev = v;
        }
    }

    #[test]
    fn eit_convex_up_to_analytic_limit() {
        let p = EitParams::default();
        let limit = p.convexity_limit();
        assert!(limit > 0.0);
        let steps = 10_000;
        let h = limit / steps as f64;
        for k in 1..steps {
            let x = k as f64 * h;
            let second = p.transmission(x + h) - 2.0 * p.transmission(x) + p.transmission(x - h);
            assert!(second >= -1e-12, "second difference {second} at x = {x}");
        }
    }

    #[test]
    fn eit_invalid_params_rejected() {
        let mut p = EitParams::default();
        p.od = 0.0;
        assert!(p.validate().is_err());
        let mut q = EitParams::default();
        q.gamma12 = -1.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn leaky_relu_cases() {
        assert_eq!(leaky_relu(5.0, 0.01), 5.0);
        assert_eq!(leaky_relu(-1.0, 0.01), -0.01);
        for s in [0.01, 0.2, 0.9] {
            assert_eq!(leaky_relu(0.0, s), 0.0);
        }
    }

    #[test]
    fn leaky_relu_slope_validation() {
        assert!(Activation::leaky_relu(0.01).is_ok());
        assert!(Activation::leaky_relu(0.0).is_err());
        assert!(Activation::leaky_relu(1.0).is_err());
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net: Network<f64> = Network::new(
            vec![Layer::new(
                array![[1.0, 0.0], [0.0, 1.0]],
                array![0.0, 0.0],
                Activation::Identity,
            )
            .unwrap()],
            false,
        )
        .unwrap();
        let out = net.forward(&[0.3, -0.7]).unwrap();
        assert_eq!(out, vec![0.3, -0.7]);
    }

    #[test]
    fn leaky_layer_hand_arithmetic() {
        // w = 2, b = 1, input = -1: pre-activation = -1, output = -slope.
        let net: Network<f64> = Network::new(
            vec![Layer::new(
                array![[2.0]],
                array![1.0],
                Activation::leaky_relu(0.01).unwrap(),
            )
            .unwrap()],
            false,
        )
        .unwrap();
        let out = net.forward(&[-1.0]).unwrap();
        assert!((out[0] - (-0.01)).abs() < 1e-15);
    }

    #[test]
    fn constrained_forward_keeps_signals_nonnegative() {
        let net: Network<f64> = Network::random(
            &[3, 20, 1],
            Activation::eit(EitParams::default()).unwrap(),
            Activation::Identity,
            true,
            5,
        )
        .unwrap();
        let input = vec![0.56, 0.102, 1.0];
        let (pres, posts) = net
            .forward_trace(&Array2::from_shape_vec((1, 3), input).unwrap())
            .unwrap();
        for z in &pres {
            assert!(z.iter().all(|v| *v >= 0.0));
        }
        for a in &posts {
            assert!(a.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn dimension_chain_is_validated() {
        let l1 = Layer::<f64>::new(array![[1.0, 2.0]], array![0.0], Activation::Identity).unwrap();
        let l2 = Layer::<f64>::new(array![[1.0, 2.0]], array![0.0], Activation::Identity).unwrap();
        assert!(Network::new(vec![l1, l2], false).is_err());
    }

    #[test]
    fn forward_rejects_wrong_input_width() {
        let net: Network<f64> =
            Network::random(&[3, 4, 2], Activation::leaky_relu(0.01).unwrap(), Activation::Identity, false, 1)
                .unwrap();
        assert!(net.forward(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn projection_clips_and_zeroes() {
        let mut net: Network<f64> = Network::new(
            vec![Layer::new(
                array![[-0.3, 0.4], [0.1, -0.9]],
                array![0.5, -0.5],
                Activation::Identity,
            )
            .unwrap()],
            false,
        )
        .unwrap();
        net.project_nonnegative();
        assert_eq!(net.layers()[0].weights(), array![[0.0, 0.4], [0.1, 0.0]]);
        assert_eq!(net.layers()[0].bias(), array![0.0, 0.0]);
        // Idempotent.
        let snapshot = net.clone();
        net.project_nonnegative();
        assert_eq!(net, snapshot);
    }

    #[test]
    fn random_constrained_network_is_feasible() {
        let net: Network<f64> = Network::random(
            &[3, 20, 1],
            Activation::eit(EitParams::default()).unwrap(),
            Activation::Identity,
            true,
            0,
        )
        .unwrap();
        for layer in net.layers() {
            assert!(layer.weights().iter().all(|w| *w >= 0.0));
            assert!(layer.bias().iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn model_json_round_trip() {
        let net: Network<f64> = Network::random(
            &[3, 5, 2],
            Activation::eit(EitParams::default()).unwrap(),
            Activation::Identity,
            true,
            9,
        )
        .unwrap();
        let text = net.to_json();
        assert!(text.contains("\"nonneg_constrained\": true"));
        assert!(text.contains("\"activation\": \"eit\""));
        let back: Network<f64> = Network::from_json(&text).unwrap();
        assert_eq!(net, back);
        // f32 load of an f64 model keeps the schema.
        let as_f32: Network<f32> = Network::from_json(&text).unwrap();
        assert_eq!(as_f32.widths(), net.widths());
    }
}
