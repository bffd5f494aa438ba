//! Adam optimizer over a fixed-order collection of parameter matrices.

use crate::matrix::Matrix;

/// Adam with bias correction. One slot of first/second moment state per
/// parameter matrix, matched by position.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: usize,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn with_betas(mut self, beta1: f64, beta2: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Apply one update. `params` and `grads` must line up by position and
    /// keep the same order across calls.
    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[&Matrix]) {
        assert_eq!(params.len(), grads.len(), "param/grad count mismatch");
        if self.m.is_empty() {
            self.m = params
                .iter()
                .map(|p| Matrix::zeros(p.rows(), p.cols()))
                .collect();
            self.v = self.m.clone();
        }
        assert_eq!(self.m.len(), params.len(), "optimizer state count mismatch");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (idx, (param, grad)) in params.iter_mut().zip(grads).enumerate() {
            assert_eq!(param.shape(), grad.shape(), "grad shape mismatch");
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            for k in 0..param.len() {
                let g = grad.data()[k];
                m.data_mut()[k] = self.beta1 * m.data()[k] + (1.0 - self.beta1) * g;
                v.data_mut()[k] = self.beta2 * v.data()[k] + (1.0 - self.beta2) * g * g;
                let m_hat = m.data()[k] / bc1;
                let v_hat = v.data()[k] / bc2;
                param.data_mut()[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut w = Matrix::from_vec(1, 1, vec![1.5]);
        let g = Matrix::zeros(1, 1);
        let mut adam = Adam::new(0.1);
        adam.step(&mut [&mut w], &[&g]);
        assert_eq!(w.get(0, 0), 1.5);
    }

    #[test]
    fn one_step_descends_on_quadratic() {
        // f(w) = w^2 at w = 1, gradient 2
        let mut w = Matrix::from_vec(1, 1, vec![1.0]);
        let g = Matrix::from_vec(1, 1, vec![2.0]);
        let mut adam = Adam::new(0.1);
        adam.step(&mut [&mut w], &[&g]);
        assert!(w.get(0, 0) < 1.0);
    }

    #[test]
    fn converges_on_shifted_quadratic() {
        // f(w) = (w - 3)^2 from w = 1
        let mut w = Matrix::from_vec(1, 1, vec![1.0]);
        let mut adam = Adam::new(0.1);
        for _ in 0..500 {
            let g = Matrix::from_vec(1, 1, vec![2.0 * (w.get(0, 0) - 3.0)]);
            adam.step(&mut [&mut w], &[&g]);
        }
        assert!(
            (w.get(0, 0) - 3.0).abs() < 1e-3,
            "ended at {}",
            w.get(0, 0)
        );
    }
}
