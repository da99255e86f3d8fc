//! Principal component analysis by orthogonal iteration, followed by
//! per-component min-max scaling to [0, 1].

use ndarray::{s, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, DenseMatrix};

pub const DEFAULT_COMPONENTS: usize = 8;
/// Subspace residual tolerance, relative to the leading eigenvalue.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_ITERS: usize = 20_000;
pub const ZERO_VARIANCE: f64 = 1e-12;
const EXTRA_BLOCK: usize = 8;
const INIT_SEED: u64 = 0x5eed_0fca;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows, by descending explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub iterations: usize,
}

fn to_array(data: &[Vec<f64>]) -> Result<Array2<f64>> {
    let d = data.first().map_or(0, Vec::len);
    if let Some(bad) = data.iter().find(|r| r.len() != d) {
        return Err(Error::Dimension { expected: d, actual: bad.len() });
    }
    Ok(Array2::from_shape_vec((data.len(), d), data.concat()).expect("rectangular"))
}

/// Orthonormalizes the columns in place (two Gram–Schmidt passes). A
/// column that collapses is replaced by the first coordinate vector that
/// survives orthogonalization, so the block keeps full rank.
fn orthonormalize(v: &mut Array2<f64>) {
    let (d, b) = v.dim();
    let mut next_basis = 0;
    for j in 0..b {
        let original = v.column(j).dot(&v.column(j)).sqrt();
        let mut candidate = v.column(j).to_owned();
        loop {
            for _ in 0..2 {
                for i in 0..j {
                    let qi = v.column(i);
                    let proj = qi.dot(&candidate);
                    candidate.scaled_add(-proj, &qi);
                }
            }
            let norm = candidate.dot(&candidate).sqrt();
            if norm > 1e-10 * original.max(1e-300) && norm > 1e-150 {
                v.column_mut(j).assign(&(candidate / norm));
                break;
            }
            candidate = Array1::zeros(d);
            candidate[next_basis % d] = 1.0;
            next_basis += 1;
        }
    }
}

/// Top-`k` eigenpairs of a symmetric positive semidefinite matrix.
fn top_eigenpairs(c: &Array2<f64>, k: usize) -> Result<(Vec<f64>, Array2<f64>, usize)> {
    let d = c.nrows();
    let b = (k + EXTRA_BLOCK).min(d);
    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED);
    let mut v = Array2::from_shape_fn((d, b), |_| rng.random::<f64>() - 0.5);
    orthonormalize(&mut v);
    for iter in 1..=MAX_ITERS {
        let w = c.dot(&v);
        let t = v.t().dot(&w);
        let rows: Vec<Vec<f64>> = t.outer_iter().enumerate().map(|(i, r)| {
            // Symmetrize away rounding.
            r.iter().enumerate().map(|(j, x)| 0.5 * (x + t[(j, i)])).collect()
        }).collect();
        let eig = jacobi_eigen(&DenseMatrix::from_rows(&rows)?)?;
        let order: Vec<usize> = (0..b).rev().collect();
        let u = Array2::from_shape_fn((b, b), |(r, col)| eig.vectors[(r, order[col])]);
        let theta: Vec<f64> = order.iter().map(|&i| eig.values[i]).collect();
        let v_ritz = v.dot(&u);
        let w_ritz = w.dot(&u);
        let scale = theta[0].abs().max(1.0);
        let residual = (0..k)
            .map(|i| {
                let r = &w_ritz.column(i) - &(&v_ritz.column(i) * theta[i]);
                r.dot(&r).sqrt()
            })
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            return Err(Error::Numerical("non-finite PCA residual".into()));
        }
        if residual <= RESIDUAL_TOL * scale {
            return Ok((theta[..k].to_vec(), v_ritz.slice(s![.., ..k]).to_owned(), iter));
        }
        v = w_ritz;
        orthonormalize(&mut v);
    }
    Err(Error::Numerical(format!("PCA did not converge in {MAX_ITERS} iterations")))
}

/// Fits the mean, the top-`k` principal directions and the min/max of each
/// projected coordinate over `data` (one row per example).
pub fn fit_pca(data: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    if k == 0 {
        return Err(Error::InvalidArgument("PCA needs at least one component".into()));
    }
    if data.len() < k {
        return Err(Error::InvalidArgument(format!("PCA to {k} components needs at least {k} examples, got {}", data.len())));
    }
    let mut x = to_array(data)?;
    let d = x.ncols();
    if d < k {
        return Err(Error::InvalidArgument(format!("cannot keep {k} components of {d}-dimensional data")));
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    x -= &mean;
    let cov = x.t().dot(&x) / data.len() as f64;
    let (variance, vecs, iterations) = top_eigenpairs(&cov, k)?;
    let components: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let col = vecs.column(i);
            let lead = col.iter().enumerate().fold(0, |best, (j, v)| if v.abs() > col[best].abs() { j } else { best });
            let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
            col.iter().map(|v| v * sign).collect()
        })
        .collect();
    let mut model = PcaModel {
        mean: mean.to_vec(),
        components,
        explained_variance: variance.iter().map(|v| v.max(0.0)).collect(),
        min: vec![f64::INFINITY; k],
        max: vec![f64::NEG_INFINITY; k],
        iterations,
    };
    for row in data {
        for (c, p) in model.project(row)?.into_iter().enumerate() {
            model.min[c] = model.min[c].min(p);
            model.max[c] = model.max[c].max(p);
        }
    }
    Ok(model)
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Coordinates of `x - mean` along each component.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::Dimension { expected: self.mean.len(), actual: x.len() });
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((ci, xi), mi)| ci * (xi - mi)).sum())
            .collect())
    }

    /// Projection min-max scaled with training statistics and clamped to
    /// [0, 1]. A component with no spread on the training set (variance
    /// below `ZERO_VARIANCE` of the leading one) maps to 0.
    pub fn transform_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .project(x)?
            .into_iter()
            .enumerate()
            .map(|(c, p)| {
                let range = self.max[c] - self.min[c];
                let spread = self.explained_variance[c] > ZERO_VARIANCE * self.explained_variance[0];
                if range > 0.0 && spread {
                    ((p - self.min[c]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn transform(&self, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        data.iter().map(|x| self.transform_one(x)).collect()
    }
}
