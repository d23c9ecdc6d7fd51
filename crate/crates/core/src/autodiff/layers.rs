use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{ParamId, ParamSet, Tensor};
use super::tape::{softmax, NodeId, Tape};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("logits contain a non-finite value")]
    NonFiniteLogits,
    #[error("every entry of the distribution is masked")]
    EmptySupport,
}

/// Uniform initialization in `[-scale, scale]`.
pub fn init_tensor(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Tensor {
    let mut t = Tensor::zeros(rows, cols);
    if scale > 0.0 {
        for x in &mut t.data {
            *x = rng.gen_range(-scale..=scale);
        }
    }
    t
}

/// Fully connected layer `W x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
    pub inputs: usize,
    pub outputs: usize,
}

impl Dense {
    pub fn new(params: &mut ParamSet, name: &str, inputs: usize, outputs: usize, rng: &mut impl Rng) -> Dense {
        let scale = 1.0 / (inputs as f64).sqrt();
        let w = params.add(format!("{name}.w"), init_tensor(outputs, inputs, scale, rng));
        let b = params.add(format!("{name}.b"), Tensor::zeros(outputs, 1));
        Dense { w, b, inputs, outputs }
    }

    pub fn forward(&self, tape: &mut Tape<'_>, x: NodeId) -> NodeId {
        tape.affine(self.w, Some(self.b), x)
    }
}

/// Two-gate recurrent cell (update and reset gates plus a candidate state).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GruCell {
    pub input_size: usize,
    pub hidden_size: usize,
    wz: ParamId,
    uz: ParamId,
    bz: ParamId,
    wr: ParamId,
    ur: ParamId,
    br: ParamId,
    wn: ParamId,
    un: ParamId,
    bn: ParamId,
}

impl GruCell {
    pub fn new(params: &mut ParamSet, name: &str, input_size: usize, hidden_size: usize, rng: &mut impl Rng) -> GruCell {
        let sx = 1.0 / (input_size as f64).sqrt();
        let sh = 1.0 / (hidden_size as f64).sqrt();
        let mut mat = |params: &mut ParamSet, suffix: &str, cols: usize, scale: f64| {
            params.add(format!("{name}.{suffix}"), init_tensor(hidden_size, cols, scale, rng))
        };
        let wz = mat(params, "wz", input_size, sx);
        let uz = mat(params, "uz", hidden_size, sh);
        let wr = mat(params, "wr", input_size, sx);
        let ur = mat(params, "ur", hidden_size, sh);
        let wn = mat(params, "wn", input_size, sx);
        let un = mat(params, "un", hidden_size, sh);
        let bz = params.add(format!("{name}.bz"), Tensor::zeros(hidden_size, 1));
        let br = params.add(format!("{name}.br"), Tensor::zeros(hidden_size, 1));
        let bn = params.add(format!("{name}.bn"), Tensor::zeros(hidden_size, 1));
        GruCell {
            input_size,
            hidden_size,
            wz,
            uz,
            bz,
            wr,
            ur,
            br,
            wn,
            un,
            bn,
        }
    }

    /// `h' = (1 - z) * n + z * h`.
    pub fn step(&self, tape: &mut Tape<'_>, x: NodeId, h: NodeId) -> NodeId {
        let zx = tape.affine(self.wz, Some(self.bz), x);
        let zh = tape.affine(self.uz, None, h);
        let z_pre = tape.add(zx, zh);
        let z = tape.sigmoid(z_pre);
        let rx = tape.affine(self.wr, Some(self.br), x);
        let rh = tape.affine(self.ur, None, h);
        let r_pre = tape.add(rx, rh);
        let r = tape.sigmoid(r_pre);
        let rh = tape.mul(r, h);
        let nx = tape.affine(self.wn, Some(self.bn), x);
        let nh = tape.affine(self.un, None, rh);
        let n_pre = tape.add(nx, nh);
        let n = tape.tanh(n_pre);
        let keep = tape.one_minus(z);
        let fresh = tape.mul(keep, n);
        let carried = tape.mul(z, h);
        tape.add(fresh, carried)
    }

    /// Runs the cell over `inputs` from `h0`, returning the final state.
    pub fn run(&self, tape: &mut Tape<'_>, inputs: &[NodeId], h0: NodeId) -> NodeId {
        inputs.iter().fold(h0, |h, x| self.step(tape, *x, h))
    }
}

/// Draws an index from `softmax(logits)` (restricted to `mask`) and records
/// its differentiable log-probability.
pub fn categorical_sample(
    tape: &mut Tape<'_>,
    logits: NodeId,
    mask: Option<Vec<bool>>,
    rng: &mut impl Rng,
) -> Result<(usize, NodeId), SampleError> {
    let values = tape.value(logits);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SampleError::NonFiniteLogits);
    }
    if let Some(m) = &mask {
        if !m.iter().any(|x| *x) {
            return Err(SampleError::EmptySupport);
        }
    }
    let probs = softmax(values, mask.as_deref());
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut index = None;
    for (i, p) in probs.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        cumulative += p;
        index = Some(i);
        if u < cumulative {
            break;
        }
    }
    let index = index.expect("support is nonempty");
    let log_prob = tape.log_softmax_pick(logits, index, mask);
    Ok((index, log_prob))
}
