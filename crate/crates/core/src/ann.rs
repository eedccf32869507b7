//! Feedforward networks with tanh hidden layers and a linear output layer,
//! a minibatch Adam trainer, and the adapted peaks test function.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::{PointCloud, ScaleMode, Scaler};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "validom.mlp/1";

/// Adapted peaks function.
pub fn peaks(x1: f64, x2: f64) -> f64 {
    3.0 * (1.0 - x1).powi(2) * (-x1.powi(2) - (x2 + 1.0).powi(2)).exp()
        - 10.0 * (x1 / 5.0 - x1.powi(3) - x2.powi(5)) * (-x1.powi(2) - x2.powi(2)).exp()
        - (-(x1 + 1.0).powi(2) - x2.powi(2)).exp() / 3.0
        - 1.3 * x2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Linear => v,
        }
    }

    /// Derivative expressed through the activated value.
    fn slope(self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `outputs x inputs`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| {
                self.activation
                    .apply(row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub schema: String,
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub input_scaler: Scaler,
    pub output_scaler: Scaler,
}

impl MlpModel {
    /// Network with LeCun-uniform weights and zero biases.
    pub fn init(
        layer_sizes: &[usize],
        input_scaler: Scaler,
        output_scaler: Scaler,
        seed: u64,
    ) -> Result<MlpModel> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "invalid layer sizes {layer_sizes:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = layer_sizes.len() - 2;
        let layers = layer_sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let limit = (3.0 / w[0] as f64).sqrt();
                Layer {
                    weights: (0..w[1])
                        .map(|_| (0..w[0]).map(|_| rng.gen_range(-limit..limit)).collect())
                        .collect(),
                    biases: vec![0.0; w[1]],
                    activation: if k == last {
                        Activation::Linear
                    } else {
                        Activation::Tanh
                    },
                }
            })
            .collect();
        let model = MlpModel {
            schema: MODEL_SCHEMA.into(),
            layer_sizes: layer_sizes.to_vec(),
            layers,
            input_scaler,
            output_scaler,
        };
        model.check()?;
        Ok(model)
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Hidden and output neuron count.
    pub fn n_neurons(&self) -> usize {
        self.layer_sizes[1..].iter().sum()
    }

    fn check(&self) -> Result<()> {
        if self.layers.len() + 1 != self.layer_sizes.len() {
            return Err(Error::Format(
                "layer count disagrees with layer_sizes".into(),
            ));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            let (fan_in, fan_out) = (self.layer_sizes[k], self.layer_sizes[k + 1]);
            if layer.weights.len() != fan_out
                || layer.biases.len() != fan_out
                || layer.weights.iter().any(|r| r.len() != fan_in)
            {
                return Err(Error::Format(format!("layer {k} has the wrong shape")));
            }
            if layer
                .weights
                .iter()
                .flatten()
                .chain(&layer.biases)
                .any(|v| !v.is_finite())
            {
                return Err(Error::Format(format!(
                    "layer {k} has non-finite parameters"
                )));
            }
        }
        if self.input_scaler.dim() != self.n_inputs()
            || self.output_scaler.dim() != self.n_outputs()
        {
            return Err(Error::Format(
                "scaler dimensions disagree with the network".into(),
            ));
        }
        Ok(())
    }

    /// Network output on scaled inputs, in scaled output units.
    pub fn forward_scaled(&self, x: &[f64]) -> Vec<f64> {
        self.layers
            .iter()
            .fold(x.to_vec(), |h, layer| layer.forward(&h))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        Ok(self
            .output_scaler
            .invert(&self.forward_scaled(&self.input_scaler.apply(x))))
    }

    /// `d y_k / d x_j` in raw units, one row per output.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        let mut acts = vec![self.input_scaler.apply(x)];
        for layer in &self.layers {
            acts.push(layer.forward(acts.last().unwrap()));
        }
        // rows: outputs, columns: scaled inputs
        let mut jac: Option<Vec<Vec<f64>>> = None;
        for (k, layer) in self.layers.iter().enumerate() {
            let out = &acts[k + 1];
            let local: Vec<Vec<f64>> = layer
                .weights
                .iter()
                .zip(out)
                .map(|(row, &o)| row.iter().map(|w| w * layer.activation.slope(o)).collect())
                .collect();
            jac = Some(match jac {
                None => local,
                Some(prev) => local
                    .iter()
                    .map(|row| {
                        (0..prev[0].len())
                            .map(|j| row.iter().zip(&prev).map(|(a, p)| a * p[j]).sum())
                            .collect()
                    })
                    .collect(),
            });
        }
        let jac = jac.unwrap();
        Ok(jac
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .zip(&self.input_scaler.gains)
                    .map(|(v, g)| v * g / self.output_scaler.gains[k])
                    .collect()
            })
            .collect())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<MlpModel> {
        let model: MlpModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.schema != MODEL_SCHEMA {
            return Err(Error::Format(format!(
                "expected schema {MODEL_SCHEMA}, found {}",
                model.schema
            )));
        }
        model.check()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            max_epochs: 4000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean squared error on scaled outputs over the whole training set.
    pub final_mse: f64,
    /// Mean minibatch loss per epoch.
    pub epoch_loss: Vec<f64>,
}

impl TrainReport {
    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "epoch,loss")?;
        for (e, l) in self.epoch_loss.iter().enumerate() {
            writeln!(f, "{},{l:e}", e + 1)?;
        }
        Ok(())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Fits an MLP with the given hidden layer widths by minimizing the mean
/// squared error on scaled data. Inputs are mapped onto [-1, 1] and outputs
/// standardized.
pub fn train_mlp(
    inputs: &PointCloud,
    targets: &PointCloud,
    hidden: &[usize],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    if inputs.len() != targets.len() {
        return Err(Error::InsufficientRows {
            needed: inputs.len(),
            have: targets.len(),
        });
    }
    if config.batch_size == 0 || config.max_epochs == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::Config("training settings must be positive".into()));
    }
    let in_scaler = Scaler::fit(inputs, ScaleMode::MinmaxToUnitIntervalSigned)?;
    let out_scaler = Scaler::fit(targets, ScaleMode::Standardize)?;
    let xs: Vec<Vec<f64>> = inputs.points().iter().map(|p| in_scaler.apply(p)).collect();
    let ys: Vec<Vec<f64>> = targets
        .points()
        .iter()
        .map(|p| out_scaler.apply(p))
        .collect();

    let mut sizes = vec![inputs.dim()];
    sizes.extend_from_slice(hidden);
    sizes.push(targets.dim());
    let mut model = MlpModel::init(&sizes, in_scaler, out_scaler, config.seed)?;
    let n_params: usize = sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
    let mut adam = Adam {
        m: vec![0.0; n_params],
        v: vec![0.0; n_params],
        t: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut grad = vec![0.0; n_params];
    let mut epoch_loss = Vec::with_capacity(config.max_epochs);

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut loss = 0.0;
            for &i in batch {
                loss += backprop(&model, &xs[i], &ys[i], &mut grad);
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            total += loss * scale * batch.len() as f64;
            adam_step(&mut model, &mut adam, &grad, config);
        }
        let mean = total / xs.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        epoch_loss.push(mean);
    }

    let final_mse = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let out = model.forward_scaled(x);
            out.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
        })
        .sum::<f64>()
        / xs.len() as f64;
    model.check()?;
    Ok((
        model,
        TrainReport {
            final_mse,
            epoch_loss,
        },
    ))
}

/// Accumulates the gradient of the per-sample loss `mean_k (y_k - t_k)^2`
/// into `grad` (layer by layer, weights row-major then biases) and returns
/// the loss.
fn backprop(model: &MlpModel, x: &[f64], t: &[f64], grad: &mut [f64]) -> f64 {
    let mut acts = vec![x.to_vec()];
    for layer in &model.layers {
        acts.push(layer.forward(acts.last().unwrap()));
    }
    let out = acts.last().unwrap();
    let k = t.len() as f64;
    let loss = out.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / k;
    let mut delta: Vec<f64> = out.iter().zip(t).map(|(a, b)| 2.0 * (a - b) / k).collect();

    let mut offsets = Vec::with_capacity(model.layers.len());
    let mut off = 0;
    for layer in &model.layers {
        offsets.push(off);
        off += layer.weights.len() * (layer.weights[0].len() + 1);
    }
    for (li, layer) in model.layers.iter().enumerate().rev() {
        let out = &acts[li + 1];
        let inp = &acts[li];
        for (d, o) in delta.iter_mut().zip(out) {
            *d *= layer.activation.slope(*o);
        }
        let base = offsets[li];
        let fan_in = inp.len();
        for (r, d) in delta.iter().enumerate() {
            let row = &mut grad[base + r * fan_in..base + (r + 1) * fan_in];
            for (g, v) in row.iter_mut().zip(inp) {
                *g += d * v;
            }
        }
        let bias_base = base + layer.weights.len() * fan_in;
        for (r, d) in delta.iter().enumerate() {
            grad[bias_base + r] += d;
        }
        if li > 0 {
            delta = (0..fan_in)
                .map(|j| {
                    layer
                        .weights
                        .iter()
                        .zip(&delta)
                        .map(|(row, d)| row[j] * d)
                        .sum()
                })
                .collect();
        }
    }
    loss
}

fn adam_step(model: &mut MlpModel, adam: &mut Adam, grad: &[f64], c: &TrainConfig) {
    adam.t += 1;
    let bc1 = 1.0 - c.beta1.powi(adam.t);
    let bc2 = 1.0 - c.beta2.powi(adam.t);
    let mut idx = 0;
    let mut update = |p: &mut f64| {
        let g = grad[idx];
        adam.m[idx] = c.beta1 * adam.m[idx] + (1.0 - c.beta1) * g;
        adam.v[idx] = c.beta2 * adam.v[idx] + (1.0 - c.beta2) * g * g;
        *p -= c.learning_rate * (adam.m[idx] / bc1) / ((adam.v[idx] / bc2).sqrt() + c.epsilon);
        idx += 1;
    };
    for layer in &mut model.layers {
        for row in &mut layer.weights {
            row.iter_mut().for_each(&mut update);
        }
        layer.biases.iter_mut().for_each(&mut update);
    }
}
