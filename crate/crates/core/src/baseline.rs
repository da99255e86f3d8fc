//! Multinomial logistic regression reference classifier.

use crate::codec::softmax;
use crate::error::{Error, Result};

pub const GRAD_TOL: f64 = 1e-5;
pub const MAX_ITERS: usize = 200;

#[derive(Debug, Clone)]
pub struct LogisticModel {
    /// `weights[c]` holds the feature weights of class `c` followed by its bias.
    pub weights: Vec<Vec<f64>>,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl LogisticModel {
    fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w[..x.len()].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[x.len()])
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let s = self.scores(x);
        crate::codec::argmax(&s)
    }

    pub fn accuracy(&self, features: &[Vec<f64>], labels: &[usize]) -> f64 {
        let correct = features.iter().zip(labels).filter(|(x, &y)| self.predict(x) == y).count();
        correct as f64 / labels.len().max(1) as f64
    }
}

fn check(features: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<usize> {
    if features.is_empty() {
        return Err(Error::EmptyDataset("logistic regression training set"));
    }
    if features.len() != labels.len() {
        return Err(Error::Dimension { expected: features.len(), actual: labels.len() });
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|x| x.len() != dim) {
        return Err(Error::Dimension { expected: dim, actual: bad.len() });
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidArgument(format!("label {l} outside 0..{n_classes}")));
    }
    Ok(dim)
}

fn mean_loss(model: &LogisticModel, features: &[Vec<f64>], labels: &[usize]) -> f64 {
    features
        .iter()
        .zip(labels)
        .map(|(x, &y)| -softmax(&model.scores(x))[y].max(1e-300).ln())
        .sum::<f64>()
        / features.len() as f64
}

/// Solves `a·x = b` for symmetric positive definite `a` (row-major, n×n).
fn cholesky_solve(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let sum = a[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i * n + k] * y[k]).sum::<f64>()) / l[i * n + i];
    }
    for i in (0..n).rev() {
        y[i] = (y[i] - (i + 1..n).map(|k| l[k * n + i] * y[k]).sum::<f64>()) / l[i * n + i];
    }
    Some(y)
}

/// Minimizes the mean cross-entropy by damped Newton steps until the
/// gradient norm drops below [`GRAD_TOL`] or [`MAX_ITERS`] steps. The last
/// class is the reference (weights fixed at zero), which removes the
/// softmax shift symmetry; predictions are unaffected.
pub fn fit(features: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<LogisticModel> {
    let dim = check(features, labels, n_classes)?;
    let width = dim + 1;
    let free = (n_classes - 1) * width;
    let n = features.len() as f64;
    let mut model = LogisticModel { weights: vec![vec![0.0; width]; n_classes], iterations: 0, grad_norm: f64::INFINITY };
    for iter in 0..=MAX_ITERS {
        let mut grad = vec![0.0; free];
        let mut hess = vec![0.0; free * free];
        for (x, &y) in features.iter().zip(labels) {
            let p = softmax(&model.scores(x));
            let xt = |j: usize| if j < dim { x[j] } else { 1.0 };
            for c in 0..n_classes - 1 {
                let r = p[c] - if c == y { 1.0 } else { 0.0 };
                for j in 0..width {
                    grad[c * width + j] += r * xt(j) / n;
                }
                for d in 0..n_classes - 1 {
                    let w = (if c == d { p[c] } else { 0.0 } - p[c] * p[d]) / n;
                    for j in 0..width {
                        let row = (c * width + j) * free + d * width;
                        let wx = w * xt(j);
                        for k in 0..width {
                            hess[row + k] += wx * xt(k);
                        }
                    }
                }
            }
        }
        model.iterations = iter;
        model.grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if model.grad_norm < GRAD_TOL || iter == MAX_ITERS {
            break;
        }
        // Tiny ridge keeps the factorization alive on separable data.
        for i in 0..free {
            hess[i * free + i] += 1e-10;
        }
        let step = cholesky_solve(&hess, &grad)
            .ok_or_else(|| Error::Numerical("logistic Hessian not positive definite".into()))?;
        let before = mean_loss(&model, features, labels);
        let mut t = 1.0;
        loop {
            let mut trial = model.clone();
            for c in 0..n_classes - 1 {
                for j in 0..width {
                    trial.weights[c][j] -= t * step[c * width + j];
                }
            }
            if mean_loss(&trial, features, labels) <= before || t < 1e-8 {
                model.weights = trial.weights;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(model)
}

/// Fits on the training split and returns test accuracy.
pub fn logistic_baseline(
    train_features: &[Vec<f64>],
    train_labels: &[usize],
    test_features: &[Vec<f64>],
    test_labels: &[usize],
    n_classes: usize,
) -> Result<f64> {
    let model = fit(train_features, train_labels, n_classes)?;
    let dim = train_features[0].len();
    if let Some(bad) = test_features.iter().find(|x| x.len() != dim) {
        return Err(Error::Dimension { expected: dim, actual: bad.len() });
    }
    if test_features.is_empty() || test_features.len() != test_labels.len() {
        return Err(Error::EmptyDataset("logistic regression test set"));
    }
    Ok(model.accuracy(test_features, test_labels))
}
