use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam moments and hyperparameters. Defaults follow the Keras optimizer
/// (`β1 = 0.9`, `β2 = 0.999`, `ε = 1e-7`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-7 }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::Dimension {
                expected: self.m.len(),
                actual: if params.len() != self.m.len() { params.len() } else { grad.len() },
            });
        }
        self.t += 1;
        let t = self.t as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Functional form: returns the updated parameters.
pub fn adam_step(state: &mut AdamState, params: &[f64], grad: &[f64], lr: f64) -> Result<Vec<f64>> {
    let mut out = params.to_vec();
    state.step(&mut out, grad, lr)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_against_sign() {
        let mut s = AdamState::new(3);
        let p = adam_step(&mut s, &[0.0, 1.0, -2.0], &[0.5, -3.0, 1e-3], 0.01).unwrap();
        assert!((p[0] + 0.01).abs() < 1e-8);
        assert!((p[1] - 1.01).abs() < 1e-8);
        // |g| = 1e-3 is still far above ε.
        assert!((p[2] + 2.01).abs() < 1e-6);
    }

    #[test]
    fn sign_direction_with_tiny_eps() {
        let mut s = AdamState::new(4).with_eps(1e-12);
        let g = [3.0, -0.2, 1e-6, -50.0];
        let p = adam_step(&mut s, &[0.0; 4], &g, 1.0).unwrap();
        for (pi, gi) in p.iter().zip(g) {
            assert!((pi + gi.signum()).abs() < 1e-5, "{pi} for g={gi}");
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut s = AdamState::new(2);
        let mut p = vec![0.3, -0.7];
        for _ in 0..10 {
            s.step(&mut p, &[0.0, 0.0], 0.001).unwrap();
        }
        assert_eq!(p, vec![0.3, -0.7]);
    }

    #[test]
    fn positive_gradient_decreases_monotonically() {
        let mut s = AdamState::new(1);
        let mut p = vec![1.0];
        let mut last = p[0];
        for _ in 0..2 {
            s.step(&mut p, &[1.0], 0.001).unwrap();
            assert!(p[0] < last);
            last = p[0];
        }
    }

    #[test]
    fn dimension_mismatch() {
        let mut s = AdamState::new(2);
        assert!(s.step(&mut [0.0; 3], &[0.0; 3], 0.1).is_err());
        assert!(s.step(&mut [0.0; 2], &[0.0; 1], 0.1).is_err());
    }
}
