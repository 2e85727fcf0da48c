//! Many-to-one Elman RNN trained with backpropagation through time.
//!
//! Shapes: `w_in` is `b x 1`, `w_rec` is `b x b`, `b_h` has length `b`,
//! `w_out` is `H x b` and `b_out` has length `H`. The hidden state starts at
//! zero for every window:
//!
//! ```text
//! a_0 = 0
//! a_t = f(w_in x_t + w_rec a_{t-1} + b_h),   t = 1..T
//! y   = w_out a_T + b_out
//! ```
//!
//! Batches are processed column-wise: a batch of `m` windows is a `T x m`
//! input matrix and every hidden state is `b x m`. Weights are initialized in
//! the order `w_in`, `w_rec`, `w_out`, each row-major, from the
//! [`Stream::Init`] stream of the config seed.

use std::io::{Read, Write};
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::SampleSet;
use crate::rng::{self, Gaussian, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation and its output.
    /// The ReLU subgradient at 0 is 0.
    #[inline]
    fn derivative(self, pre: f64, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RnnConfig {
    pub window: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub horizon: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout_final: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub grad_clip: Option<f64>,
}

impl Default for RnnConfig {
    fn default() -> Self {
        Self {
            window: 20,
            hidden: 64,
            activation: Activation::Relu,
            horizon: 1,
            learning_rate: 1e-4,
            batch_size: 64,
            epochs: 35,
            dropout_final: 0.0,
            seed: 0,
            optimizer: Optimizer::default(),
            grad_clip: None,
        }
    }
}

impl RnnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.window == 0 || self.hidden == 0 || self.horizon == 0 {
            return bad("window, hidden and horizon must all be >= 1".into());
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be >= 1".into());
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate must be finite and >= 0, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.dropout_final) {
            return bad(format!("dropout_final must lie in [0, 1), got {}", self.dropout_final));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return bad(format!("grad_clip must be > 0, got {c}"));
            }
        }
        if let Optimizer::Adam { beta1, beta2, epsilon } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(epsilon > 0.0) {
                return bad("Adam needs beta1, beta2 in [0, 1) and epsilon > 0".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnModel {
    pub w_in: Array2<f64>,
    pub w_rec: Array2<f64>,
    pub b_h: Array1<f64>,
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
    pub config: RnnConfig,
}

/// Kaiming-normal weights (`N(0, 2 / fan_in)`) and zero biases.
pub fn init_kaiming(config: &RnnConfig) -> Result<RnnModel> {
    config.validate()?;
    let (b, h) = (config.hidden, config.horizon);
    let mut g = Gaussian::new(rng::stream(config.seed, Stream::Init));
    let mut fill = |rows: usize, cols: usize, fan_in: usize| {
        let std = (2.0 / fan_in as f64).sqrt();
        let data: Vec<f64> = (0..rows * cols).map(|_| std * g.next_standard()).collect();
        Array2::from_shape_vec((rows, cols), data).expect("shape")
    };
    let w_in = fill(b, 1, 1);
    let w_rec = fill(b, b, b);
    let w_out = fill(h, b, b);
    Ok(RnnModel {
        w_in,
        w_rec,
        b_h: Array1::zeros(b),
        w_out,
        b_out: Array1::zeros(h),
        config: config.clone(),
    })
}

/// Hidden states of a single forward pass plus the prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// `a_1..a_T`.
    pub activations: Vec<Array1<f64>>,
    pub prediction: Array1<f64>,
}

/// Batched forward trace; `hidden[0]` is the zero initial state.
struct Trace {
    pre: Vec<Array2<f64>>,
    hidden: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub w_in: Array2<f64>,
    pub w_rec: Array2<f64>,
    pub b_h: Array1<f64>,
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
}

impl Gradients {
    fn slices(&self) -> [&[f64]; 5] {
        [
            self.w_in.as_slice().expect("owned"),
            self.w_rec.as_slice().expect("owned"),
            self.b_h.as_slice().expect("owned"),
            self.w_out.as_slice().expect("owned"),
            self.b_out.as_slice().expect("owned"),
        ]
    }

    pub fn global_norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    fn scale(&mut self, k: f64) {
        self.w_in *= k;
        self.w_rec *= k;
        self.b_h *= k;
        self.w_out *= k;
        self.b_out *= k;
    }
}

impl RnnModel {
    pub fn window(&self) -> usize {
        self.config.window
    }

    pub fn hidden(&self) -> usize {
        self.config.hidden
    }

    fn params_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.w_in.as_slice_mut().expect("owned"),
            self.w_rec.as_slice_mut().expect("owned"),
            self.b_h.as_slice_mut().expect("owned"),
            self.w_out.as_slice_mut().expect("owned"),
            self.b_out.as_slice_mut().expect("owned"),
        ]
    }

    pub fn param_count(&self) -> usize {
        let b = self.hidden();
        let h = self.config.horizon;
        b + b * b + b + h * b + h
    }

    fn check_input(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.nrows() != self.window() {
            return Err(Error::ShapeMismatch(format!(
                "model window is {} but input has {} rows",
                self.window(),
                x.nrows()
            )));
        }
        if let Some(((_, col), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { column: col });
        }
        Ok(())
    }

    fn trace(&self, x: ArrayView2<'_, f64>) -> Result<Trace> {
        self.check_input(x)?;
        let m = x.ncols();
        let act = self.config.activation;
        let mut pre = Vec::with_capacity(self.window());
        let mut hidden = Vec::with_capacity(self.window() + 1);
        hidden.push(Array2::zeros((self.hidden(), m)));
        for t in 0..self.window() {
            let mut z = self.w_rec.dot(&hidden[t]);
            let xt = x.row(t);
            let w_in = self.w_in.column(0);
            Zip::indexed(&mut z).for_each(|(k, i), v| {
                *v += w_in[k] * xt[i] + self.b_h[k];
            });
            let a = z.mapv(|v| act.apply(v));
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalInstability {
                    stage: "forward",
                    step: t + 1,
                    detail: "non-finite hidden state".into(),
                });
            }
            pre.push(z);
            hidden.push(a);
        }
        Ok(Trace { pre, hidden })
    }

    fn head(&self, last: &Array2<f64>) -> Array2<f64> {
        let mut y = self.w_out.dot(last);
        y += &self.b_out.view().insert_axis(Axis(1));
        y
    }

    /// Forward pass of one window.
    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        let col = ArrayView2::from_shape((x.len(), 1), x)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        let tr = self.trace(col)?;
        let prediction = self.head(tr.hidden.last().expect("T >= 1")).column(0).to_owned();
        let activations = tr.hidden[1..].iter().map(|a| a.column(0).to_owned()).collect();
        Ok(Forward {
            activations,
            prediction,
        })
    }

    /// Predictions for every column of `x` (`T x n`), returned as `H x n`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let tr = self.trace(x)?;
        Ok(self.head(tr.hidden.last().expect("T >= 1")))
    }

    /// Batch MSE and its exact gradients, unrolled through all `T` steps.
    /// `mask` multiplies the final hidden state (inverted dropout) and is
    /// held fixed.
    pub fn bptt_gradients(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        mask: Option<ArrayView2<'_, f64>>,
    ) -> Result<(f64, Gradients)> {
        let m = x.ncols();
        if y.nrows() != self.config.horizon || y.ncols() != m {
            return Err(Error::ShapeMismatch(format!(
                "targets are {}x{}, expected {}x{m}",
                y.nrows(),
                y.ncols(),
                self.config.horizon
            )));
        }
        let tr = self.trace(x)?;
        let last = tr.hidden.last().expect("T >= 1");
        let dropped = match mask {
            Some(mask) => {
                if mask.dim() != last.dim() {
                    return Err(Error::ShapeMismatch("dropout mask shape".into()));
                }
                last * &mask
            }
            None => last.clone(),
        };
        let pred = self.head(&dropped);
        let resid = &pred - &y;
        let count = resid.len() as f64;
        let loss = resid.iter().map(|r| r * r).sum::<f64>() / count;

        let d_pred = resid.mapv(|r| 2.0 * r / count);
        let g_w_out = d_pred.dot(&dropped.t());
        let g_b_out = d_pred.sum_axis(Axis(1));
        let mut d_hidden = self.w_out.t().dot(&d_pred);
        if let Some(mask) = mask {
            d_hidden *= &mask;
        }

        let b = self.hidden();
        let act = self.config.activation;
        let mut g_w_in = Array2::<f64>::zeros((b, 1));
        let mut g_w_rec = Array2::<f64>::zeros((b, b));
        let mut g_b_h = Array1::<f64>::zeros(b);
        for t in (0..self.window()).rev() {
            let mut d_pre = d_hidden;
            Zip::from(&mut d_pre)
                .and(&tr.pre[t])
                .and(&tr.hidden[t + 1])
                .for_each(|d, &p, &a| *d *= act.derivative(p, a));
            let xt = x.row(t);
            g_w_in.column_mut(0).scaled_add(1.0, &d_pre.dot(&xt));
            g_w_rec += &d_pre.dot(&tr.hidden[t].t());
            g_b_h += &d_pre.sum_axis(Axis(1));
            d_hidden = self.w_rec.t().dot(&d_pre);
        }

        let grads = Gradients {
            w_in: g_w_in,
            w_rec: g_w_rec,
            b_h: g_b_h,
            w_out: g_w_out,
            b_out: g_b_out,
        };
        if !loss.is_finite() || grads.slices().iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::NumericalInstability {
                stage: "bptt",
                step: 0,
                detail: "non-finite loss or gradient".into(),
            });
        }
        Ok((loss, grads))
    }

    pub fn to_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn from_json<R: Read>(input: R) -> Result<Self> {
        let model: RnnModel = serde_json::from_reader(input)?;
        model.config.validate()?;
        let (b, h) = (model.hidden(), model.config.horizon);
        if model.w_in.dim() != (b, 1)
            || model.w_rec.dim() != (b, b)
            || model.b_h.len() != b
            || model.w_out.dim() != (h, b)
            || model.b_out.len() != h
        {
            return Err(Error::ShapeMismatch("checkpoint weights do not match config".into()));
        }
        Ok(model)
    }
}

/// Mean over batch and horizon of the squared error.
pub fn loss_mse(pred: ArrayView2<'_, f64>, target: ArrayView2<'_, f64>) -> Result<f64> {
    if pred.dim() != target.dim() {
        return Err(Error::ShapeMismatch(format!(
            "predictions {:?} vs targets {:?}",
            pred.dim(),
            target.dim()
        )));
    }
    let n = pred.len() as f64;
    Ok(Zip::from(&pred).and(&target).fold(0.0, |acc, p, t| acc + (p - t) * (p - t)) / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Infer,
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else
/// `1 / (1 - rate)`.
pub fn dropout_mask<R: RngCore>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Array2<f64> {
    let keep = 1.0 / (1.0 - rate);
    Array2::from_shape_simple_fn((rows, cols), || {
        if rng::uniform(rng) < rate {
            0.0
        } else {
            keep
        }
    })
}

/// Dropout on final hidden states (`b x m`). Identity in inference mode or
/// at rate 0.
pub fn dropout_final<R: RngCore>(
    a: ArrayView2<'_, f64>,
    rate: f64,
    rng: &mut R,
    mode: DropoutMode,
) -> Array2<f64> {
    if mode == DropoutMode::Infer || rate == 0.0 {
        return a.to_owned();
    }
    let mask = dropout_mask(a.nrows(), a.ncols(), rate, rng);
    &a * &mask
}

#[derive(Debug, Clone)]
enum OptimizerState {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        step: i32,
        m: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
    },
}

impl OptimizerState {
    fn new(opt: Optimizer, model: &RnnModel) -> Self {
        match opt {
            Optimizer::Sgd => OptimizerState::Sgd,
            Optimizer::Adam { beta1, beta2, epsilon } => {
                let sizes = [
                    model.w_in.len(),
                    model.w_rec.len(),
                    model.b_h.len(),
                    model.w_out.len(),
                    model.b_out.len(),
                ];
                OptimizerState::Adam {
                    beta1,
                    beta2,
                    epsilon,
                    step: 0,
                    m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
                    v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
                }
            }
        }
    }

    fn apply(&mut self, model: &mut RnnModel, grads: &Gradients, lr: f64) {
        let gs = grads.slices();
        match self {
            OptimizerState::Sgd => {
                for (p, g) in model.params_mut().into_iter().zip(gs) {
                    for (w, d) in p.iter_mut().zip(g) {
                        *w -= lr * d;
                    }
                }
            }
            OptimizerState::Adam {
                beta1,
                beta2,
                epsilon,
                step,
                m,
                v,
            } => {
                *step += 1;
                let c1 = 1.0 - beta1.powi(*step);
                let c2 = 1.0 - beta2.powi(*step);
                for (k, (p, g)) in model.params_mut().into_iter().zip(gs).enumerate() {
                    for (i, (w, d)) in p.iter_mut().zip(g).enumerate() {
                        let mk = &mut m[k][i];
                        let vk = &mut v[k][i];
                        *mk = *beta1 * *mk + (1.0 - *beta1) * d;
                        *vk = *beta2 * *vk + (1.0 - *beta2) * d * d;
                        let m_hat = *mk / c1;
                        let v_hat = *vk / c2;
                        *w -= lr * m_hat / (v_hat.sqrt() + *epsilon);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub model: RnnModel,
    pub wall_clock_secs: f64,
    pub seed: u64,
}

/// Mini-batch training from a fresh Kaiming initialization.
pub fn train(config: &RnnConfig, samples: &SampleSet) -> Result<TrainReport> {
    let model = init_kaiming(config)?;
    train_model(model, samples)
}

/// Trains `model` with its own config. Each epoch shuffles the sample order
/// from the [`Stream::Shuffle`] stream, splits it into batches (the last one
/// possibly smaller) and records the mean per-sample loss. Dropout masks
/// come from the [`Stream::Dropout`] stream.
pub fn train_model(mut model: RnnModel, samples: &SampleSet) -> Result<TrainReport> {
    let config = model.config.clone();
    config.validate()?;
    if samples.n() == 0 {
        return Err(Error::InsufficientData("training set is empty".into()));
    }
    if samples.window != config.window || samples.horizon != config.horizon {
        return Err(Error::ShapeMismatch(format!(
            "samples have T={} H={}, model expects T={} H={}",
            samples.window, samples.horizon, config.window, config.horizon
        )));
    }
    let start = Instant::now();
    let mut shuffle_rng = rng::stream(config.seed, Stream::Shuffle);
    let mut dropout_rng = rng::stream(config.seed, Stream::Dropout);
    let mut opt = OptimizerState::new(config.optimizer, &model);
    let n = samples.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        rng::shuffle(&mut shuffle_rng, &mut order);
        let mut total = 0.0;
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            let xb = samples.x.select(Axis(1), idx);
            let yb = samples.y.select(Axis(1), idx);
            let mask = (config.dropout_final > 0.0).then(|| {
                dropout_mask(config.hidden, idx.len(), config.dropout_final, &mut dropout_rng)
            });
            let (loss, mut grads) = model
                .bptt_gradients(xb.view(), yb.view(), mask.as_ref().map(|m| m.view()))
                .map_err(|e| match e {
                    Error::NumericalInstability { .. } => Error::TrainingDiverged {
                        epoch: epoch + 1,
                        batch: batch + 1,
                    },
                    other => other,
                })?;
            if let Some(clip) = config.grad_clip {
                let norm = grads.global_norm();
                if norm > clip {
                    grads.scale(clip / norm);
                }
            }
            opt.apply(&mut model, &grads, config.learning_rate);
            total += loss * idx.len() as f64;
        }
        let mean = total / n as f64;
        if !mean.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch: epoch + 1,
                batch: 0,
            });
        }
        epoch_losses.push(mean);
    }
    Ok(TrainReport {
        epoch_losses,
        model,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetTag {
    Train,
    #[default]
    Test,
}

/// Hidden states `A_1..A_T` (`b x n` each) of every sample in a set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTensor {
    pub layers: Vec<Array2<f64>>,
    pub epoch: usize,
    pub tag: DatasetTag,
    /// Absolute series index of each column's first target.
    pub targets: Vec<usize>,
}

impl ActivationTensor {
    pub fn n(&self) -> usize {
        self.layers.first().map_or(0, |a| a.ncols())
    }

    pub fn window(&self) -> usize {
        self.layers.len()
    }

    pub fn select(&self, idx: &[usize]) -> ActivationTensor {
        ActivationTensor {
            layers: self.layers.iter().map(|a| a.select(Axis(1), idx)).collect(),
            epoch: self.epoch,
            tag: self.tag,
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

/// Records every hidden state for every sample, dropout inactive.
pub fn capture_activations(
    model: &RnnModel,
    samples: &SampleSet,
    epoch: usize,
    tag: DatasetTag,
) -> Result<ActivationTensor> {
    if samples.window != model.window() {
        return Err(Error::ShapeMismatch(format!(
            "samples have window {} but model expects {}",
            samples.window,
            model.window()
        )));
    }
    let mut tr = model.trace(samples.x.view())?;
    let layers: Vec<Array2<f64>> = tr.hidden.drain(1..).collect();
    Ok(ActivationTensor {
        layers,
        epoch,
        tag,
        targets: samples.target_indices(),
    })
}

/// Same recursion written per sample with scalar loops; used to check the
/// batched implementation.
pub fn forward_reference(model: &RnnModel, x: ArrayView1<'_, f64>) -> Vec<Vec<f64>> {
    let b = model.hidden();
    let mut a = vec![0.0; b];
    let mut out = Vec::with_capacity(x.len());
    for &xt in x.iter() {
        let mut next = vec![0.0; b];
        for (k, nk) in next.iter_mut().enumerate() {
            let mut z = model.w_in[[k, 0]] * xt + model.b_h[k];
            for (j, aj) in a.iter().enumerate() {
                z += model.w_rec[[k, j]] * aj;
            }
            *nk = model.config.activation.apply(z);
        }
        out.push(next.clone());
        a = next;
    }
    out
}
