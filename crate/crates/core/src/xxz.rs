//! Periodic XXZ spin chain: Hamiltonian, exact ground energy, VQE
//! ground-state preparation with the checkerboard ansatz, and labelled
//! ground-state datasets.
//!
//! Spin up is `|0>` (σ_z = +1), so the all-up configuration is basis index 0.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr_lite::standard_normal;
use serde::{Deserialize, Serialize};

use crate::autodiff::{grad_adjoint, Observable};
use crate::circuit::{build_checkerboard, CircuitTemplate, ParamVector};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, DenseMatrix};
use crate::optim::AdamState;
use crate::statevector::Statevector;
use crate::train::{rng_for, streams};

pub const MAX_DENSE_SPINS: usize = 12;
pub const N_PHASES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XXZParams {
    pub n_spins: usize,
    pub coupling: f64,
    pub delta: f64,
}

impl XXZParams {
    /// Eight spins, `J = 1`.
    pub fn new(delta: f64) -> Self {
        XXZParams { n_spins: 8, coupling: 1.0, delta }
    }
}

/// Dense `H = J Σ_i [σˣσˣ + σʸσʸ + Δ σᶻσᶻ]` with periodic boundary.
pub fn build_hamiltonian(p: &XXZParams) -> Result<DenseMatrix> {
    let n = p.n_spins;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("XXZ chain needs at least 2 spins, got {n}")));
    }
    if n > MAX_DENSE_SPINS {
        return Err(Error::InvalidArgument(format!(
            "{n} spins exceed the dense limit of {MAX_DENSE_SPINS}"
        )));
    }
    let dim = 1usize << n;
    let mut h = DenseMatrix::zeros(dim, dim);
    for state in 0..dim {
        for i in 0..n {
            let (bi, bj) = (1 << (n - 1 - i), 1 << (n - 1 - (i + 1) % n));
            let parallel = (state & bi != 0) == (state & bj != 0);
            h[(state, state)] += p.coupling * p.delta * if parallel { 1.0 } else { -1.0 };
            if !parallel {
                // σˣσˣ + σʸσʸ = 2(σ⁺σ⁻ + σ⁻σ⁺) swaps an antiparallel pair.
                h[(state ^ bi ^ bj, state)] += 2.0 * p.coupling;
            }
        }
    }
    Ok(h)
}

/// Lowest eigenvalue of a dense symmetric matrix.
pub fn exact_ground_energy(h: &DenseMatrix) -> Result<f64> {
    let eig = jacobi_eigen(h)?;
    eig.values
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))
}

/// Ground energy from the fixed-magnetization blocks of `H`, which
/// conserves total σ_z. Same answer as [`exact_ground_energy`] on the full
/// matrix at a fraction of the cost.
pub fn exact_ground_energy_by_sector(p: &XXZParams) -> Result<f64> {
    let h = build_hamiltonian(p)?;
    let n = p.n_spins;
    let mut best = f64::INFINITY;
    for ups in 0..=n {
        let members: Vec<usize> = (0..1usize << n).filter(|s| s.count_zeros() as usize - (usize::BITS as usize - n) == ups).collect();
        let mut block = DenseMatrix::zeros(members.len(), members.len());
        for (r, &a) in members.iter().enumerate() {
            for (c, &b) in members.iter().enumerate() {
                block[(r, c)] = h[(a, b)];
            }
        }
        best = best.min(exact_ground_energy(&block)?);
    }
    Ok(best)
}

impl Observable for DenseMatrix {
    fn expectation(&self, state: &Statevector) -> Result<f64> {
        let hpsi = self.apply(state)?;
        Ok(state.inner(&hpsi).re)
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        if self.n_rows != state.dim() || self.n_cols != state.dim() {
            return Err(Error::Dimension { expected: state.dim(), actual: self.n_rows });
        }
        let amps = state.amplitudes();
        let out = (0..self.n_rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(amps)
                    .filter(|(h, _)| **h != 0.0)
                    .map(|(h, a)| a * *h)
                    .sum::<Complex64>()
            })
            .collect();
        Statevector::from_amplitudes(out)
    }
}

/// `<ψ|H|ψ>`.
pub fn energy_expectation(state: &Statevector, h: &DenseMatrix) -> Result<f64> {
    h.expectation(state)
}

/// 0 = z-ferromagnet (Δ < -1), 1 = planar paramagnet (|Δ| ≤ 1),
/// 2 = z-antiferromagnet (Δ > 1).
pub fn phase_label(delta: f64) -> usize {
    if delta < -1.0 {
        0
    } else if delta <= 1.0 {
        1
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub layers: usize,
    /// Adam steps from a cold (random) start.
    pub iterations: usize,
    /// Adam steps when warm-started from a neighbouring optimum.
    pub warm_iterations: usize,
    pub learning_rate: f64,
    /// Target energy is `E_exact - offset·max(|E_exact|, 1)`.
    pub target_offset: f64,
    /// Gaussian noise (radians) added to warm-start parameters.
    pub warm_jitter: f64,
    /// A warm start ending above this relative error is retried cold and
    /// the lower energy kept.
    pub cold_retry_above: f64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            layers: 4,
            iterations: 1500,
            warm_iterations: 400,
            learning_rate: 0.05,
            target_offset: 0.1,
            warm_jitter: 0.05,
            cold_retry_above: 0.03,
        }
    }
}

impl VqeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::InvalidArgument("VQE needs at least one checkerboard layer".into()));
        }
        if self.iterations == 0 || !(self.learning_rate > 0.0) || !(self.target_offset > 0.0) {
            return Err(Error::InvalidArgument("VQE iterations, learning rate and target offset must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    pub params: ParamVector,
    pub energy: f64,
    pub exact_energy: f64,
    pub iterations: usize,
}

impl VqeResult {
    pub fn relative_error(&self) -> f64 {
        relative_error(self.energy, self.exact_energy)
    }
}

pub fn relative_error(energy: f64, exact: f64) -> f64 {
    (energy - exact).abs() / exact.abs().max(f64::MIN_POSITIVE)
}

pub fn target_energy(exact: f64, offset: f64) -> f64 {
    exact - offset * exact.abs().max(1.0)
}

/// Everything a VQE run at one Δ needs, built once.
pub struct VqeProblem {
    pub delta: f64,
    pub hamiltonian: DenseMatrix,
    pub exact_energy: f64,
    pub template: CircuitTemplate,
    zero: Statevector,
}

impl VqeProblem {
    pub fn new(delta: f64, layers: usize) -> Result<Self> {
        let params = XXZParams::new(delta);
        let hamiltonian = build_hamiltonian(&params)?;
        let exact_energy = exact_ground_energy_by_sector(&params)?;
        let template = build_checkerboard(params.n_spins, layers)?;
        let zero = Statevector::new_zero_state(params.n_spins)?;
        Ok(VqeProblem { delta, hamiltonian, exact_energy, template, zero })
    }

    pub fn energy(&self, params: &ParamVector) -> Result<f64> {
        energy_expectation(&self.template.run(params, &self.zero)?, &self.hamiltonian)
    }

    /// Squared distance to the target energy and its gradient.
    pub fn loss_and_grad(&self, params: &ParamVector, target: f64) -> Result<(f64, f64, Vec<f64>)> {
        let (energy, grad_e) = grad_adjoint(&self.template, params, &self.zero, &self.hamiltonian)?;
        let gap = energy - target;
        Ok((gap * gap, energy, grad_e.into_iter().map(|g| 2.0 * gap * g).collect()))
    }

    /// Adam descent on `(E(θ) - E_target)²` for a fixed number of steps;
    /// returns the lowest-energy parameters seen.
    pub fn optimize(&self, start: ParamVector, iterations: usize, config: &VqeConfig) -> Result<VqeResult> {
        let target = target_energy(self.exact_energy, config.target_offset);
        let mut params = start;
        let mut adam = AdamState::new(params.len());
        let mut best: Option<(f64, ParamVector)> = None;
        for step in 0..=iterations {
            let (loss, energy, grad) = self.loss_and_grad(&params, target)?;
            if !loss.is_finite() {
                return Err(Error::Vqe { delta: self.delta, reason: format!("non-finite loss at step {step}") });
            }
            if best.as_ref().is_none_or(|(e, _)| energy < *e) {
                best = Some((energy, params.clone()));
            }
            if step < iterations {
                adam.step(&mut params.0, &grad, config.learning_rate)?;
            }
        }
        let (energy, params) = best.expect("at least one evaluation");
        Ok(VqeResult { params, energy, exact_energy: self.exact_energy, iterations })
    }
}

/// Prepares an approximate ground state of `H(Δ)`. Cold starts draw
/// uniform angles from `rng`; warm starts perturb the given parameters.
pub fn vqe_optimize(
    delta: f64,
    warm_start: Option<&ParamVector>,
    config: &VqeConfig,
    rng: &mut impl Rng,
) -> Result<VqeResult> {
    config.validate()?;
    let problem = VqeProblem::new(delta, config.layers)?;
    let n = problem.template.n_params;
    let cold = |rng: &mut dyn rand::RngCore| -> Result<VqeResult> {
        let start = ParamVector((0..n).map(|_| rng.random_range(0.0..TAU)).collect());
        problem.optimize(start, config.iterations, config)
    };
    let Some(warm) = warm_start else {
        return cold(rng);
    };
    if warm.len() != n {
        return Err(Error::Dimension { expected: n, actual: warm.len() });
    }
    let start = ParamVector(warm.0.iter().map(|p| p + config.warm_jitter * standard_normal(rng)).collect());
    let result = problem.optimize(start, config.warm_iterations, config)?;
    if result.relative_error() <= config.cold_retry_above {
        return Ok(result);
    }
    let retry = cold(rng)?;
    Ok(if retry.energy < result.energy { retry } else { result })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for DeltaGrid {
    fn default() -> Self {
        DeltaGrid { min: -2.0, max: 2.0, count: 1000 }
    }
}

impl DeltaGrid {
    /// Evenly spaced points including both ends; points that land exactly
    /// on a phase boundary `Δ = ±1` are dropped.
    pub fn points(&self) -> Vec<f64> {
        let step = if self.count > 1 { (self.max - self.min) / (self.count - 1) as f64 } else { 0.0 };
        (0..self.count)
            .map(|i| self.min + step * i as f64)
            .filter(|d| (d.abs() - 1.0).abs() > 1e-12)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateRecord {
    pub delta: f64,
    pub params: Vec<f64>,
    pub vqe_energy: f64,
    pub exact_energy: f64,
    pub label: usize,
    pub layers: usize,
    pub seed: u64,
}

impl GroundStateRecord {
    pub fn relative_error(&self) -> f64 {
        relative_error(self.vqe_energy, self.exact_energy)
    }

    /// The prepared state, checkerboard applied to `|0...0>`.
    pub fn state(&self) -> Result<Statevector> {
        let template = build_checkerboard(8, self.layers)?;
        template.run(&ParamVector(self.params.clone()), &Statevector::new_zero_state(8)?)
    }
}

/// VQE sweep over the grid in ascending Δ, each run warm-started from the
/// previous optimum.
pub fn generate_dataset(
    grid: &DeltaGrid,
    config: &VqeConfig,
    seed: u64,
    mut progress: impl FnMut(usize, &GroundStateRecord),
) -> Result<Vec<GroundStateRecord>> {
    if grid.count < 3 {
        return Err(Error::InvalidArgument(format!("grid needs at least 3 points, got {}", grid.count)));
    }
    if !(grid.min < grid.max) {
        return Err(Error::InvalidArgument(format!("empty Δ range [{}, {}]", grid.min, grid.max)));
    }
    let mut rng = rng_for(seed, streams::VQE);
    let mut records: Vec<GroundStateRecord> = Vec::with_capacity(grid.count);
    let mut warm: Option<ParamVector> = None;
    for delta in grid.points() {
        let result = vqe_optimize(delta, warm.as_ref(), config, &mut rng).map_err(|e| match e {
            Error::Vqe { .. } => e,
            other => Error::Vqe { delta, reason: other.to_string() },
        })?;
        let record = GroundStateRecord {
            delta,
            params: result.params.0.clone(),
            vqe_energy: result.energy,
            exact_energy: result.exact_energy,
            label: phase_label(delta),
            layers: config.layers,
            seed,
        };
        progress(records.len(), &record);
        warm = Some(result.params);
        records.push(record);
    }
    Ok(records)
}

/// Box–Muller normal deviates; keeps the dependency list short.
mod rand_distr_lite {
    use rand::Rng;

    pub fn standard_normal(rng: &mut (impl Rng + ?Sized)) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_free_spectrum() {
        let h = build_hamiltonian(&XXZParams { n_spins: 2, coupling: 1.0, delta: 0.0 }).unwrap();
        let mut vals = jacobi_eigen(&h).unwrap().values;
        vals.sort_by(f64::total_cmp);
        for (v, want) in vals.iter().zip([-4.0, 0.0, 0.0, 4.0]) {
            assert!((v - want).abs() < 1e-9);
        }
    }

    #[test]
    fn polarized_diagonal_entry() {
        let h = build_hamiltonian(&XXZParams::new(-2.0)).unwrap();
        assert_eq!(h[(0, 0)], -16.0);
        assert!((1..256).all(|c| h[(0, c)] == 0.0 && h[(c, 0)] == 0.0));
        let up = Statevector::new_zero_state(8).unwrap();
        assert_eq!(energy_expectation(&up, &h).unwrap(), -16.0);
    }

    #[test]
    fn conserves_magnetization() {
        let h = build_hamiltonian(&XXZParams::new(0.7)).unwrap();
        for r in 0..256usize {
            for c in 0..256usize {
                if h[(r, c)] != 0.0 {
                    assert_eq!(r.count_ones(), c.count_ones());
                }
            }
        }
        assert_eq!(h.max_asymmetry(), 0.0);
    }

    #[test]
    fn rejects_large_chains() {
        assert!(build_hamiltonian(&XXZParams { n_spins: 13, coupling: 1.0, delta: 0.0 }).is_err());
        assert!(build_hamiltonian(&XXZParams { n_spins: 1, coupling: 1.0, delta: 0.0 }).is_err());
    }

    #[test]
    fn phases() {
        assert_eq!(phase_label(-1.5), 0);
        assert_eq!(phase_label(0.0), 1);
        assert_eq!(phase_label(1.5), 2);
        assert_eq!(phase_label(-1.0), 1);
        assert_eq!(phase_label(1.0), 1);
    }

    #[test]
    fn grid_drops_boundaries() {
        let g = DeltaGrid { min: -2.0, max: 2.0, count: 5 };
        assert_eq!(g.points(), vec![-2.0, 0.0, 2.0]);
        assert_eq!(DeltaGrid { min: -2.0, max: 2.0, count: 30 }.points().len(), 30);
    }

    #[test]
    fn target_below_exact() {
        assert_eq!(target_energy(-16.0, 0.1), -17.6);
        assert_eq!(target_energy(-0.5, 0.1), -0.6);
    }

    #[test]
    fn sector_and_full_agree() {
        for delta in [-1.7, 0.3, 1.0, 2.0] {
            let p = XXZParams::new(delta);
            let full = exact_ground_energy(&build_hamiltonian(&p).unwrap()).unwrap();
            let sect = exact_ground_energy_by_sector(&p).unwrap();
            assert!((full - sect).abs() < 1e-9, "Δ={delta}: {full} vs {sect}");
        }
    }
}
