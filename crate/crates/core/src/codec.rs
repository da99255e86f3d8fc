//! Qubit encoding of classical features, the two multi-class decoders and
//! their losses.
//!
//! Bit convention: a readout output is `<½(I + σ_z)>`, so a qubit in `|0>`
//! reads 1 and maps to bit 1. The first readout qubit is the most
//! significant bit for both decoders.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::Statevector;

pub const BIT_CONVENTION: &str = "output=<(I+Z)/2>; |0> reads 1 = bit 1; first readout qubit is MSB";

const CE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoder {
    /// One `<½(I+σ_z)>` per readout qubit read as the bits of the class index; MSE loss.
    Binary,
    /// Readout marginal, truncated to the class count, through softmax; cross-entropy loss.
    Amplitude,
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::Binary => "binary",
            Decoder::Amplitude => "amplitude",
        })
    }
}

impl FromStr for Decoder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Decoder::Binary),
            "amplitude" => Ok(Decoder::Amplitude),
            _ => Err(Error::InvalidArgument(format!("unknown decoder `{s}` (binary | amplitude)"))),
        }
    }
}

/// Number of bits needed to write `n_classes - 1`.
pub fn n_bits(n_classes: usize) -> usize {
    if n_classes <= 1 {
        1
    } else {
        (usize::BITS - (n_classes - 1).leading_zeros()) as usize
    }
}

/// Binary code of `class`, most significant bit first.
pub fn binary_code(class: usize, n_bits: usize) -> Vec<f64> {
    (0..n_bits)
        .rev()
        .map(|shift| ((class >> shift) & 1) as f64)
        .collect()
}

/// Product state `⊗_j RY(π x_j)|0>`; feature `j` goes to qubit `j`.
pub fn encode_qubit(features: &[f64]) -> Result<Statevector> {
    for (index, &value) in features.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::FeatureRange { index, value });
        }
    }
    let mut state = Statevector::new_zero_state(features.len())?;
    for (q, &x) in features.iter().enumerate() {
        state.ry(q, PI * x);
    }
    Ok(state)
}

pub fn decode_qubit_binary(state: &Statevector, readout: &[usize]) -> Result<Vec<f64>> {
    readout.iter().map(|&q| state.expectation_z_half(q)).collect()
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax over the first `n_classes` readout-marginal entries.
pub fn decode_amplitude(state: &Statevector, readout: &[usize], n_classes: usize) -> Result<Vec<f64>> {
    let marginal = state.marginal_probs(readout)?;
    amplitude_probs(&marginal, n_classes)
}

pub(crate) fn amplitude_probs(marginal: &[f64], n_classes: usize) -> Result<Vec<f64>> {
    if n_classes == 0 || n_classes > marginal.len() {
        return Err(Error::InvalidArgument(format!(
            "{n_classes} classes cannot be read from {} outcomes",
            marginal.len()
        )));
    }
    Ok(softmax(&marginal[..n_classes]))
}

/// Nearest valid class code in Euclidean distance; ties go to the lower class.
pub fn class_from_binary_outputs(outputs: &[f64], n_classes: usize) -> usize {
    let bits = outputs.len();
    let mut best = (0, f64::INFINITY);
    for class in 0..n_classes {
        let d: f64 = binary_code(class, bits)
            .iter()
            .zip(outputs)
            .map(|(c, o)| (c - o).powi(2))
            .sum();
        // Hand-computable ties (e.g. 0.52 vs 0.52) differ by rounding only.
        if d < best.1 - 1e-12 {
            best = (class, d);
        }
    }
    best.0
}

/// Index of the largest probability; ties go to the lower class.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

pub fn loss_mse(outputs: &[f64], target: &[f64]) -> Result<f64> {
    if outputs.len() != target.len() {
        return Err(Error::Dimension { expected: target.len(), actual: outputs.len() });
    }
    Ok(outputs.iter().zip(target).map(|(o, t)| (o - t).powi(2)).sum::<f64>() / outputs.len() as f64)
}

pub fn loss_ce(probs: &[f64], target: usize) -> Result<f64> {
    let p = probs.get(target).ok_or(Error::Dimension { expected: target + 1, actual: probs.len() })?;
    Ok(-p.max(CE_FLOOR).ln())
}
