use serde::{Deserialize, Serialize};

use super::params::{Gradients, ParamSet, Tensor};

pub const DEFAULT_LEARNING_RATE: f64 = 5e-5;

/// RMSProp: `acc <- decay*acc + (1-decay)*g^2; p <- p - lr*g/sqrt(acc+eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    mean_square: Vec<Tensor>,
}

impl RmsProp {
    pub fn new(params: &ParamSet, learning_rate: f64) -> RmsProp {
        RmsProp {
            learning_rate,
            decay: 0.99,
            epsilon: 1e-8,
            mean_square: params
                .ids()
                .map(|id| {
                    let t = params.get(id);
                    Tensor::zeros(t.rows, t.cols)
                })
                .collect(),
        }
    }

    pub fn mean_square(&self) -> &[Tensor] {
        &self.mean_square
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &Gradients) {
        assert_eq!(self.mean_square.len(), params.len(), "optimizer/parameter count mismatch");
        for id in params.ids() {
            let g = grads.get(id);
            let acc = &mut self.mean_square[id.0];
            let p = params.get_mut(id);
            assert!(acc.same_shape(p) && g.same_shape(p), "shape mismatch for parameter {}", id.0);
            for ((pv, av), gv) in p.data.iter_mut().zip(acc.data.iter_mut()).zip(&g.data) {
                *av = self.decay * *av + (1.0 - self.decay) * gv * gv;
                *pv -= self.learning_rate * gv / (*av + self.epsilon).sqrt();
            }
        }
    }
}
