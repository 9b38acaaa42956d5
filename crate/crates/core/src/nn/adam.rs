use serde::{Deserialize, Serialize};

use super::Mlp;

/// Adaptive-moment optimizer with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self::with_decays(lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_decays(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update from the accumulated gradients in `net`, then
    /// zeroes them. Moment buffers are sized lazily from the network.
    pub fn apply_gradients(&mut self, net: &mut Mlp) {
        let n = net.param_count();
        if self.first.len() != n {
            self.first = vec![0.0; n];
            self.second = vec![0.0; n];
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let mut k = 0;
        let (first, second) = (&mut self.first, &mut self.second);
        net.visit_params_mut(|p, g| {
            let m = &mut first[k];
            let v = &mut second[k];
            *m = b1 * *m + (1.0 - b1) * *g;
            *v = b2 * *v + (1.0 - b2) * *g * *g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            *g = 0.0;
            k += 1;
        });
    }
}
