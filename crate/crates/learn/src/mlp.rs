//! Minimal differentiable multilayer perceptron.
//!
//! Batched forward/backward over `ndarray` matrices, exact reverse-mode
//! gradients for both parameters and inputs (the deterministic policy
//! gradient needs gradients with respect to actions), a bias-corrected Adam
//! optimizer, MSE loss, soft target blending, and a versioned binary
//! checkpoint format. All math is plain `f64`.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

const CKPT_MAGIC: &[u8; 8] = b"MLPCKPT\0";
const CKPT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    fn tag(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
            Activation::Sigmoid => 3,
        }
    }

    fn from_tag(tag: u8) -> Result<Self, MlpError> {
        Ok(match tag {
            0 => Activation::Linear,
            1 => Activation::Relu,
            2 => Activation::Tanh,
            3 => Activation::Sigmoid,
            t => return Err(MlpError::BadCheckpoint(format!("unknown activation tag {t}"))),
        })
    }

    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Linear => {}
            Activation::Relu => z.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
            Activation::Sigmoid => z.mapv_inplace(|v| 1.0 / (1.0 + (-v).exp())),
        }
    }

    /// Derivative expressed through the post-activation value.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

/// Feed-forward network: `dims.len() - 1` affine layers, ReLU (or the
/// configured hidden activation) between them, and a configurable output
/// activation. Weights are stored input-major (`in x out`).
#[derive(Debug, Clone)]
pub struct Mlp {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    hidden: Activation,
    output: Activation,
}

/// Parameter gradients shaped like the network.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub d_weights: Vec<Array2<f64>>,
    pub d_biases: Vec<Array1<f64>>,
}

impl MlpGrads {
    pub fn l2_norm(&self) -> f64 {
        let mut s = 0.0;
        for w in &self.d_weights {
            s += w.iter().map(|v| v * v).sum::<f64>();
        }
        for b in &self.d_biases {
            s += b.iter().map(|v| v * v).sum::<f64>();
        }
        s.sqrt()
    }
}

/// Cached activations from a forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to every layer (length = number of layers).
    inputs: Vec<Array2<f64>>,
    /// Post-activation output of every layer.
    outputs: Vec<Array2<f64>>,
}

impl Mlp {
    /// Uniform `±1/sqrt(fan_in)` initialization, seed-deterministic.
    pub fn init<R: Rng>(dims: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need at least one layer");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weight =
                Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-bound..bound));
            let bias = Array1::from_shape_fn(fan_out, |_| rng.gen_range(-bound..bound));
            weights.push(weight);
            biases.push(bias);
        }
        Mlp {
            weights,
            biases,
            hidden,
            output,
        }
    }

    /// All-zero parameters (used in tests and as a target-template).
    pub fn zeros(dims: &[usize], hidden: Activation, output: Activation) -> Self {
        let weights = dims
            .windows(2)
            .map(|w| Array2::zeros((w[0], w[1])))
            .collect();
        let biases = dims.windows(2).map(|w| Array1::zeros(w[1])).collect();
        Mlp {
            weights,
            biases,
            hidden,
            output,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.weights.iter().map(|w| w.nrows()).collect();
        d.push(self.weights.last().expect("nonempty").ncols());
        d
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().expect("nonempty").ncols()
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn activations(&self) -> (Activation, Activation) {
        (self.hidden, self.output)
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    /// Batched forward pass: rows of `x` are samples.
    pub fn forward_batch(&self, x: &Array2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(
            x.ncols(),
            self.input_dim(),
            "input width {} does not match first layer {}",
            x.ncols(),
            self.input_dim()
        );
        let n_layers = self.weights.len();
        let mut inputs = Vec::with_capacity(n_layers);
        let mut outputs = Vec::with_capacity(n_layers);
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            inputs.push(a.clone());
            let mut z = a.dot(w);
            z += &b.view().insert_axis(Axis(0));
            let act = if l + 1 == n_layers { self.output } else { self.hidden };
            act.apply(&mut z);
            outputs.push(z.clone());
            a = z;
        }
        (
            a,
            ForwardCache { inputs, outputs },
        )
    }

    /// Single-sample forward without keeping the cache.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let arr = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("shape");
        let (y, _) = self.forward_batch(&arr);
        y.row(0).to_vec()
    }

    /// Reverse-mode gradients of the scalar objective whose per-output
    /// gradient is `d_out`. Returns parameter gradients and the gradient
    /// with respect to the input batch.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        d_out: &Array2<f64>,
    ) -> (MlpGrads, Array2<f64>) {
        let n_layers = self.weights.len();
        assert_eq!(d_out.ncols(), self.output_dim(), "output gradient width");
        assert_eq!(
            d_out.nrows(),
            cache.inputs[0].nrows(),
            "output gradient batch size"
        );
        let mut d_weights = Vec::with_capacity(n_layers);
        let mut d_biases = Vec::with_capacity(n_layers);
        let mut delta = d_out.clone();
        for l in (0..n_layers).rev() {
            let act = if l + 1 == n_layers { self.output } else { self.hidden };
            // delta ⊙ act'(a) through the stored post-activation.
            ndarray::Zip::from(&mut delta)
                .and(&cache.outputs[l])
                .for_each(|d, &a| *d *= act.derivative_from_output(a));
            d_weights.push(cache.inputs[l].t().dot(&delta));
            d_biases.push(delta.sum_axis(Axis(0)));
            delta = delta.dot(&self.weights[l].t());
        }
        d_weights.reverse();
        d_biases.reverse();
        (
            MlpGrads {
                d_weights,
                d_biases,
            },
            delta,
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), MlpError> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(CKPT_MAGIC);
        buf.extend_from_slice(&CKPT_VERSION.to_le_bytes());
        buf.push(self.hidden.tag());
        buf.push(self.output.tag());
        let dims = self.dims();
        buf.extend_from_slice(&(self.weights.len() as u32).to_le_bytes());
        for d in &dims {
            buf.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for v in w.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            for v in b.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MlpError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8], MlpError> {
            if *pos + n > bytes.len() {
                return Err(MlpError::BadCheckpoint("truncated file".into()));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 8)? != CKPT_MAGIC {
            return Err(MlpError::BadCheckpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != CKPT_VERSION {
            return Err(MlpError::BadCheckpoint(format!("unsupported version {version}")));
        }
        let hidden = Activation::from_tag(take(&mut pos, 1)?[0])?;
        let output = Activation::from_tag(take(&mut pos, 1)?[0])?;
        let n_layers = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let mut dims = Vec::with_capacity(n_layers + 1);
        for _ in 0..=n_layers {
            dims.push(u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize);
        }
        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (rows, cols) = (dims[l], dims[l + 1]);
            let mut w = Array2::zeros((rows, cols));
            for r in 0..rows {
                for c in 0..cols {
                    w[(r, c)] =
                        f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
                }
            }
            let mut b = Array1::zeros(cols);
            for c in 0..cols {
                b[c] = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            }
            weights.push(w);
            biases.push(b);
        }
        if pos != bytes.len() {
            return Err(MlpError::BadCheckpoint("trailing bytes".into()));
        }
        Ok(Mlp {
            weights,
            biases,
            hidden,
            output,
        })
    }
}

/// Adam accumulators shaped like an [`Mlp`].
#[derive(Debug, Clone)]
pub struct AdamState {
    m_weights: Vec<Array2<f64>>,
    v_weights: Vec<Array2<f64>>,
    m_biases: Vec<Array1<f64>>,
    v_biases: Vec<Array1<f64>>,
    pub step: u64,
    pub learning_rate: f64,
}

impl AdamState {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        AdamState {
            m_weights: net.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_weights: net.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_biases: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_biases: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            step: 0,
            learning_rate,
        }
    }
}

/// One bias-corrected Adam step; `grads` are gradients of the loss being
/// minimized.
pub fn adam_step(net: &mut Mlp, grads: &MlpGrads, state: &mut AdamState) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - ADAM_BETA1.powi(t);
    let bc2 = 1.0 - ADAM_BETA2.powi(t);
    let lr = state.learning_rate;
    for l in 0..net.weights.len() {
        ndarray::Zip::from(&mut net.weights[l])
            .and(&mut state.m_weights[l])
            .and(&mut state.v_weights[l])
            .and(&grads.d_weights[l])
            .for_each(|p, m, v, &g| {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            });
        ndarray::Zip::from(&mut net.biases[l])
            .and(&mut state.m_biases[l])
            .and(&mut state.v_biases[l])
            .and(&grads.d_biases[l])
            .for_each(|p, m, v, &g| {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            });
    }
}

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse_loss_and_grad(pred: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    assert_eq!(pred.len(), target.len());
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(target) {
        let d = p - t;
        loss += d * d;
        grad.push(2.0 * d / n);
    }
    (loss / n, grad)
}

/// `target ← tau·online + (1-tau)·target`, elementwise.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    assert!((0.0..=1.0).contains(&tau));
    for l in 0..target.weights.len() {
        ndarray::Zip::from(&mut target.weights[l])
            .and(&online.weights[l])
            .for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
        ndarray::Zip::from(&mut target.biases[l])
            .and(&online.biases[l])
            .for_each(|t, &o| *t = tau * o + (1.0 - tau) * *t);
    }
}
