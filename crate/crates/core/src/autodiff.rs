//! Gradients of circuit expectations and classifier losses.
//!
//! Three routes are provided: the parameter-shift rule (exact for the
//! `RY`/`RZ` rotations the gate set emits), adjoint-mode differentiation
//! (one forward pass plus one reverse sweep, used in training), and
//! central finite differences as an oracle.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{CircuitTemplate, ParamVector};
use crate::codec::{amplitude_probs, binary_code, class_from_binary_outputs, argmax, Decoder};
use crate::error::{Error, Result};
use crate::gates::GateOp;
use crate::statevector::Statevector;

/// Hermitian observable that can be measured and applied to a state.
pub trait Observable: Sync {
    fn expectation(&self, state: &Statevector) -> Result<f64>;

    /// `M|ψ>`.
    fn apply(&self, state: &Statevector) -> Result<Statevector>;
}

/// `½(I + σ_z)` on one qubit.
#[derive(Debug, Clone, Copy)]
pub struct ZHalf(pub usize);

/// Projector onto one outcome of a readout register (first qubit = MSB).
#[derive(Debug, Clone)]
pub struct ReadoutProjector {
    pub readout: Vec<usize>,
    pub outcome: usize,
}

/// Observable diagonal in the computational basis.
#[derive(Debug, Clone)]
pub struct Diagonal(pub Vec<f64>);

impl Diagonal {
    /// `Σ_j w_j ½(I + σ_z^{q_j})`.
    pub fn from_z_half(n_qubits: usize, readout: &[usize], weights: &[f64]) -> Self {
        let dim = 1usize << n_qubits;
        let mut diag = vec![0.0; dim];
        for (&q, &w) in readout.iter().zip(weights) {
            let stride = 1 << (n_qubits - 1 - q);
            for (i, d) in diag.iter_mut().enumerate() {
                if i & stride == 0 {
                    *d += w;
                }
            }
        }
        Diagonal(diag)
    }

    /// `Σ_o w_o Π_o` over readout outcomes `o`.
    pub fn from_outcomes(n_qubits: usize, readout: &[usize], weights: &[f64]) -> Self {
        let strides: Vec<usize> = readout.iter().map(|&q| 1 << (n_qubits - 1 - q)).collect();
        let diag = (0..1usize << n_qubits)
            .map(|i| {
                let outcome = strides.iter().fold(0, |acc, &s| (acc << 1) | usize::from(i & s != 0));
                weights.get(outcome).copied().unwrap_or(0.0)
            })
            .collect();
        Diagonal(diag)
    }
}

impl Observable for ZHalf {
    fn expectation(&self, state: &Statevector) -> Result<f64> {
        state.expectation_z_half(self.0)
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        if self.0 >= state.n_qubits() {
            return Err(Error::QubitIndex { index: self.0, n_qubits: state.n_qubits() });
        }
        Diagonal::from_z_half(state.n_qubits(), &[self.0], &[1.0]).apply(state)
    }
}

impl Observable for ReadoutProjector {
    fn expectation(&self, state: &Statevector) -> Result<f64> {
        let probs = state.marginal_probs(&self.readout)?;
        probs
            .get(self.outcome)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {} out of range", self.outcome)))
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        state.marginal_probs(&self.readout)?;
        let mut w = vec![0.0; 1 << self.readout.len()];
        *w.get_mut(self.outcome)
            .ok_or_else(|| Error::InvalidArgument(format!("outcome {} out of range", self.outcome)))? = 1.0;
        Diagonal::from_outcomes(state.n_qubits(), &self.readout, &w).apply(state)
    }
}

impl Observable for Diagonal {
    fn expectation(&self, state: &Statevector) -> Result<f64> {
        if self.0.len() != state.dim() {
            return Err(Error::Dimension { expected: state.dim(), actual: self.0.len() });
        }
        Ok(state.amplitudes().iter().zip(&self.0).map(|(a, d)| a.norm_sqr() * d).sum())
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        if self.0.len() != state.dim() {
            return Err(Error::Dimension { expected: state.dim(), actual: self.0.len() });
        }
        let amps = state.amplitudes().iter().zip(&self.0).map(|(a, d)| a * d).collect();
        Statevector::from_amplitudes(amps)
    }
}

fn check_unique_slots(template: &CircuitTemplate) -> Result<()> {
    let mut seen = vec![false; template.n_params];
    for op in &template.ops {
        if let Some(slot) = op.param_slot() {
            if slot >= seen.len() || std::mem::replace(&mut seen[slot], true) {
                return Err(Error::InvalidArgument(format!(
                    "parameter slot {slot} is shared or out of range; the shift rule needs one rotation per slot"
                )));
            }
        }
    }
    Ok(())
}

/// Parameter-shift Jacobian of several expectation values at once:
/// `jac[j][k] = (f_j(θ_k + π/2) - f_j(θ_k - π/2)) / 2`.
///
/// `measure` must return expectation values (linear in the density matrix)
/// for the rule to be exact.
pub fn param_shift_jacobian(
    template: &CircuitTemplate,
    params: &ParamVector,
    input: &Statevector,
    measure: impl Fn(&Statevector) -> Result<Vec<f64>>,
) -> Result<Vec<Vec<f64>>> {
    params.validate_for(template)?;
    check_unique_slots(template)?;
    let mut shifted = params.clone();
    let mut jac: Vec<Vec<f64>> = Vec::new();
    for k in 0..template.n_params {
        let base = params.0[k];
        shifted.0[k] = base + FRAC_PI_2;
        let plus = measure(&template.run(&shifted, input)?)?;
        shifted.0[k] = base - FRAC_PI_2;
        let minus = measure(&template.run(&shifted, input)?)?;
        shifted.0[k] = base;
        if jac.is_empty() {
            jac = vec![vec![0.0; template.n_params]; plus.len()];
        }
        for (row, (p, m)) in jac.iter_mut().zip(plus.iter().zip(&minus)) {
            row[k] = (p - m) / 2.0;
        }
    }
    Ok(jac)
}

pub fn grad_param_shift(
    template: &CircuitTemplate,
    params: &ParamVector,
    input: &Statevector,
    observable: &dyn Observable,
) -> Result<Vec<f64>> {
    let mut jac = param_shift_jacobian(template, params, input, |s| Ok(vec![observable.expectation(s)?]))?;
    Ok(jac.pop().unwrap_or_else(|| vec![0.0; template.n_params]))
}

/// Reverse sweep shared by every adjoint gradient. `final_state` must be
/// the circuit output for `params`, `lambda` the observable applied to it.
pub(crate) fn adjoint_sweep(
    template: &CircuitTemplate,
    params: &ParamVector,
    mut phi: Statevector,
    mut lambda: Statevector,
) -> Vec<f64> {
    let p = params.as_slice();
    let mut grad = vec![0.0; template.n_params];
    for op in template.ops.iter().rev() {
        match *op {
            GateOp::Ry { wire, slot } => grad[slot] += phi.ry_derivative(&lambda, wire),
            GateOp::Rz { wire, slot } => grad[slot] += phi.rz_derivative(&lambda, wire),
            _ => {}
        }
        op.apply_inverse(&mut phi, p);
        op.apply_inverse(&mut lambda, p);
    }
    grad
}

/// Adjoint-mode gradient of `<ψ(θ)|M|ψ(θ)>`; returns the expectation too.
pub fn grad_adjoint(
    template: &CircuitTemplate,
    params: &ParamVector,
    input: &Statevector,
    observable: &dyn Observable,
) -> Result<(f64, Vec<f64>)> {
    let out = template.run(params, input)?;
    let value = observable.expectation(&out)?;
    let lambda = observable.apply(&out)?;
    Ok((value, adjoint_sweep(template, params, out, lambda)))
}

/// Classical head on top of the readout register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Head {
    pub decoder: Decoder,
    pub n_classes: usize,
}

/// Readout values a head consumes: the per-qubit outputs for the binary
/// decoder, the full readout marginal for the amplitude decoder.
pub fn readout_values(decoder: Decoder, state: &Statevector, readout: &[usize]) -> Result<Vec<f64>> {
    match decoder {
        Decoder::Binary => readout.iter().map(|&q| state.expectation_z_half(q)).collect(),
        Decoder::Amplitude => state.marginal_probs(readout),
    }
}

impl Head {
    pub fn new(decoder: Decoder, n_classes: usize) -> Self {
        Head { decoder, n_classes }
    }

    /// Loss and `∂loss/∂readout_values`.
    pub fn loss_and_slope(&self, values: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
        if label >= self.n_classes {
            return Err(Error::InvalidArgument(format!(
                "label {label} outside 0..{}",
                self.n_classes
            )));
        }
        match self.decoder {
            Decoder::Binary => {
                let target = binary_code(label, values.len());
                let k = values.len() as f64;
                let loss = values.iter().zip(&target).map(|(o, t)| (o - t).powi(2)).sum::<f64>() / k;
                let slope = values.iter().zip(&target).map(|(o, t)| 2.0 * (o - t) / k).collect();
                Ok((loss, slope))
            }
            Decoder::Amplitude => {
                let probs = amplitude_probs(values, self.n_classes)?;
                let loss = crate::codec::loss_ce(&probs, label)?;
                let mut slope = vec![0.0; values.len()];
                for (i, p) in probs.iter().enumerate() {
                    slope[i] = p - if i == label { 1.0 } else { 0.0 };
                }
                Ok((loss, slope))
            }
        }
    }

    pub fn predict(&self, values: &[f64]) -> Result<usize> {
        match self.decoder {
            Decoder::Binary => Ok(class_from_binary_outputs(values, self.n_classes)),
            Decoder::Amplitude => Ok(argmax(&amplitude_probs(values, self.n_classes)?)),
        }
    }

    /// Diagonal observable whose expectation has the same parameter
    /// gradient as the loss, given the readout slope.
    pub(crate) fn slope_observable(&self, n_qubits: usize, readout: &[usize], slope: &[f64]) -> Diagonal {
        match self.decoder {
            Decoder::Binary => Diagonal::from_z_half(n_qubits, readout, slope),
            Decoder::Amplitude => Diagonal::from_outcomes(n_qubits, readout, slope),
        }
    }
}

/// Loss of the head on the circuit output and its adjoint-mode gradient.
pub fn grad_adjoint_loss(
    template: &CircuitTemplate,
    params: &ParamVector,
    input: &Statevector,
    head: Head,
    label: usize,
) -> Result<(f64, Vec<f64>)> {
    let out = template.run(params, input)?;
    let values = readout_values(head.decoder, &out, &template.readout)?;
    let (loss, slope) = head.loss_and_slope(&values, label)?;
    let lambda = head.slope_observable(template.n_qubits, &template.readout, &slope).apply(&out)?;
    Ok((loss, adjoint_sweep(template, params, out, lambda)))
}

/// Loss gradient through the parameter-shift Jacobian of the readout values
/// and the analytic head slope.
pub fn grad_param_shift_loss(
    template: &CircuitTemplate,
    params: &ParamVector,
    input: &Statevector,
    head: Head,
    label: usize,
) -> Result<(f64, Vec<f64>)> {
    let out = template.run(params, input)?;
    let values = readout_values(head.decoder, &out, &template.readout)?;
    let (loss, slope) = head.loss_and_slope(&values, label)?;
    let jac = param_shift_jacobian(template, params, input, |s| {
        readout_values(head.decoder, s, &template.readout)
    })?;
    let mut grad = vec![0.0; template.n_params];
    for (row, s) in jac.iter().zip(&slope) {
        for (g, j) in grad.iter_mut().zip(row) {
            *g += s * j;
        }
    }
    Ok((loss, grad))
}

/// Central differences of an arbitrary scalar function of the parameters.
pub fn grad_finite_diff(
    params: &ParamVector,
    step: f64,
    f: impl Fn(&ParamVector) -> Result<f64>,
) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be > 0, got {step}")));
    }
    let mut shifted = params.clone();
    (0..params.len())
        .map(|k| {
            let base = params.0[k];
            shifted.0[k] = base + step;
            let plus = f(&shifted)?;
            shifted.0[k] = base - step;
            let minus = f(&shifted)?;
            shifted.0[k] = base;
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}
