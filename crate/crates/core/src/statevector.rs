//! Dense statevector over `n` qubits.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so the
//! basis state `|q0 q1 ... q_{n-1}>` sits at index `q0·2^{n-1} + ... + q_{n-1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[Complex64; 2]; 2]);

/// 4x4 complex matrix, row-major. Basis order `|hi lo>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4(pub [[Complex64; 4]; 4]);

impl Unitary2 {
    pub fn identity() -> Self {
        Unitary2([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `exp(-i θ Y / 2)`
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Unitary2([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    /// `exp(-i θ Z / 2)`
    pub fn rz(theta: f64) -> Self {
        let half = theta / 2.0;
        Unitary2([
            [Complex64::from_polar(1.0, -half), ZERO],
            [ZERO, Complex64::from_polar(1.0, half)],
        ])
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Unitary2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Kronecker product `self ⊗ other`; `self` acts on the high bit.
    pub fn kron(&self, other: &Unitary2) -> Unitary4 {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.0[r >> 1][c >> 1] * other.0[r & 1][c & 1];
            }
        }
        Unitary4(out)
    }

    pub fn unitarity_error(&self) -> f64 {
        let p = self.dagger() * *self;
        let mut err: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                err = err.max((p.0[r][c] - target).norm());
            }
        }
        err
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c];
            }
        }
        Unitary2(out)
    }
}

impl Unitary4 {
    pub fn identity() -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Unitary4(out)
    }

    /// CNOT with the high bit as control.
    pub fn cnot_hi_lo() -> Self {
        Self::permutation([0, 1, 3, 2])
    }

    /// CNOT with the low bit as control.
    pub fn cnot_lo_hi() -> Self {
        Self::permutation([0, 3, 2, 1])
    }

    pub fn swap() -> Self {
        Self::permutation([0, 2, 1, 3])
    }

    /// Matrix sending basis state `c` to `perm[c]`.
    fn permutation(perm: [usize; 4]) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (c, &r) in perm.iter().enumerate() {
            out[r][c] = ONE;
        }
        Unitary4(out)
    }

    pub fn dagger(&self) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.0[c][r].conj();
            }
        }
        Unitary4(out)
    }

    /// Max-abs deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.dagger() * *self;
        let mut err: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                let target = if r == c { ONE } else { ZERO };
                err = err.max((p.0[r][c] - target).norm());
            }
        }
        err
    }

    pub fn determinant(&self) -> Complex64 {
        // Laplace expansion is fine at 4x4.
        fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        let m = &self.0;
        let mut det = ZERO;
        for col in 0..4 {
            let mut minor = [[ZERO; 3]; 3];
            for r in 1..4 {
                let mut mc = 0;
                for c in 0..4 {
                    if c != col {
                        minor[r - 1][mc] = m[r][c];
                        mc += 1;
                    }
                }
            }
            let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
            det += m[0][col] * det3(minor) * sign;
        }
        det
    }
}

impl Mul for Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: Unitary4) -> Unitary4 {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        Unitary4(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>` on `n_qubits` wires.
    pub fn new_zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the norm is
    /// not checked so callers can build unnormalized vectors for linearity tests.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        Ok(Statevector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            Err(Error::QubitIndex { index: q, n_qubits: self.n_qubits })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn stride(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    /// Calls `f(i0, i1)` for every index pair differing only in qubit `q`,
    /// with `i0` holding the bit at 0.
    #[inline]
    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = self.stride(q);
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    pub fn apply_1q(&mut self, u: &Unitary2, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = u.0;
        self.for_pairs(qubit, |a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = m[0][0] * x + m[0][1] * y;
            *a1 = m[1][0] * x + m[1][1] * y;
        });
        Ok(())
    }

    pub fn apply_2q(&mut self, u: &Unitary4, q_hi: usize, q_lo: usize) -> Result<()> {
        self.check_qubit(q_hi)?;
        self.check_qubit(q_lo)?;
        if q_hi == q_lo {
            return Err(Error::DuplicateQubit(q_hi));
        }
        let (s_hi, s_lo) = (self.stride(q_hi), self.stride(q_lo));
        let mask = s_hi | s_lo;
        let m = u.0;
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            let idx = [base, base | s_lo, base | s_hi, base | s_hi | s_lo];
            let v = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
        Ok(())
    }

    /// Fast `RY(θ)` on `qubit`. Index must already be validated.
    pub(crate) fn ry(&mut self, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        self.for_pairs(qubit, |a0, a1| {
            let (x, y) = (*a0, *a1);
            *a0 = x * c - y * s;
            *a1 = x * s + y * c;
        });
    }

    /// Fast `RZ(θ)` on `qubit`.
    pub(crate) fn rz(&mut self, qubit: usize, theta: f64) {
        let phase = Complex64::from_polar(1.0, theta / 2.0);
        let phase_conj = phase.conj();
        self.for_pairs(qubit, |a0, a1| {
            *a0 *= phase_conj;
            *a1 *= phase;
        });
    }

    /// Fast CNOT.
    pub(crate) fn cnot(&mut self, control: usize, target: usize) {
        let (sc, st) = (self.stride(control), self.stride(target));
        for i in 0..self.amps.len() {
            if i & sc != 0 && i & st == 0 {
                self.amps.swap(i, i | st);
            }
        }
    }

    /// `2 Re <lambda| (-i Y/2) |self>` summed over qubit pairs: the adjoint
    /// derivative contribution of an `RY` acting on `qubit`.
    pub(crate) fn ry_derivative(&self, lambda: &Statevector, qubit: usize) -> f64 {
        let stride = self.stride(qubit);
        let mut acc = 0.0;
        for (phi, lam) in self.amps.chunks_exact(2 * stride).zip(lambda.amps.chunks_exact(2 * stride)) {
            let (p0, p1) = phi.split_at(stride);
            let (l0, l1) = lam.split_at(stride);
            for i in 0..stride {
                acc += (l1[i].conj() * p0[i]).re - (l0[i].conj() * p1[i]).re;
            }
        }
        acc
    }

    /// Same as [`ry_derivative`](Self::ry_derivative) for `RZ`.
    pub(crate) fn rz_derivative(&self, lambda: &Statevector, qubit: usize) -> f64 {
        let stride = self.stride(qubit);
        let mut acc = 0.0;
        for (phi, lam) in self.amps.chunks_exact(2 * stride).zip(lambda.amps.chunks_exact(2 * stride)) {
            let (p0, p1) = phi.split_at(stride);
            let (l0, l1) = lam.split_at(stride);
            for i in 0..stride {
                acc += (l0[i].conj() * p0[i]).im - (l1[i].conj() * p1[i]).im;
            }
        }
        acc
    }

    /// `<½(I + σ_z)>` on `qubit`: probability of reading 0.
    pub fn expectation_z_half(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let stride = self.stride(qubit);
        Ok(self
            .amps
            .chunks_exact(2 * stride)
            .flat_map(|block| block[..stride].iter())
            .map(|a| a.norm_sqr())
            .sum())
    }

    /// Marginal distribution over `readout`; the first listed qubit is the
    /// most significant bit of the outcome index.
    pub fn marginal_probs(&self, readout: &[usize]) -> Result<Vec<f64>> {
        for (i, &q) in readout.iter().enumerate() {
            self.check_qubit(q)?;
            if readout[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let k = readout.len();
        let strides: Vec<usize> = readout.iter().map(|&q| self.stride(q)).collect();
        let mut probs = vec![0.0; 1 << k];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut outcome = 0;
            for &s in &strides {
                outcome = (outcome << 1) | usize::from(idx & s != 0);
            }
            probs[outcome] += a.norm_sqr();
        }
        Ok(probs)
    }
}
