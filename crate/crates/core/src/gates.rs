//! Two-qubit node unitaries compiled to rotations and CNOTs.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Statevector, Unitary2, Unitary4};

/// The four node unitaries a tensor-network classifier can be built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// `RY ⊗ RY` followed by one CNOT.
    SimpleReal,
    /// `(RZ·RY·RZ) ⊗ (RZ·RY·RZ)` followed by one CNOT.
    SimpleSU2,
    /// Magic-basis compilation of a general `SO(4)` element.
    GeneralSO4,
    /// Three-CNOT compilation of a general `SU(4)` element.
    GeneralSU4,
}

impl BlockKind {
    pub const ALL: [BlockKind; 4] = [
        BlockKind::SimpleReal,
        BlockKind::SimpleSU2,
        BlockKind::GeneralSO4,
        BlockKind::GeneralSU4,
    ];

    pub fn param_count(self) -> usize {
        match self {
            BlockKind::SimpleReal => 2,
            BlockKind::SimpleSU2 => 6,
            BlockKind::GeneralSO4 => 6,
            BlockKind::GeneralSU4 => 15,
        }
    }

    pub fn is_simple(self) -> bool {
        matches!(self, BlockKind::SimpleReal | BlockKind::SimpleSU2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::SimpleReal => "simple-real",
            BlockKind::SimpleSU2 => "simple-su2",
            BlockKind::GeneralSO4 => "so4",
            BlockKind::GeneralSU4 => "su4",
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BlockKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown block kind `{s}`")))
    }
}

/// One gate of a compiled circuit. Wires are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    Ry { wire: usize, slot: usize },
    Rz { wire: usize, slot: usize },
    FixedRy { wire: usize, angle: f64 },
    FixedRz { wire: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl GateOp {
    pub fn param_slot(&self) -> Option<usize> {
        match *self {
            GateOp::Ry { slot, .. } | GateOp::Rz { slot, .. } => Some(slot),
            _ => None,
        }
    }

    pub fn wires(&self) -> Vec<usize> {
        match *self {
            GateOp::Ry { wire, .. }
            | GateOp::Rz { wire, .. }
            | GateOp::FixedRy { wire, .. }
            | GateOp::FixedRz { wire, .. } => vec![wire],
            GateOp::Cnot { control, target } => vec![control, target],
        }
    }

    /// Applies the gate, reading rotation angles from `params`.
    #[inline]
    pub(crate) fn apply(&self, state: &mut Statevector, params: &[f64]) {
        match *self {
            GateOp::Ry { wire, slot } => state.ry(wire, params[slot]),
            GateOp::Rz { wire, slot } => state.rz(wire, params[slot]),
            GateOp::FixedRy { wire, angle } => state.ry(wire, angle),
            GateOp::FixedRz { wire, angle } => state.rz(wire, angle),
            GateOp::Cnot { control, target } => state.cnot(control, target),
        }
    }

    /// Applies the inverse gate.
    #[inline]
    pub(crate) fn apply_inverse(&self, state: &mut Statevector, params: &[f64]) {
        match *self {
            GateOp::Ry { wire, slot } => state.ry(wire, -params[slot]),
            GateOp::Rz { wire, slot } => state.rz(wire, -params[slot]),
            GateOp::FixedRy { wire, angle } => state.ry(wire, -angle),
            GateOp::FixedRz { wire, angle } => state.rz(wire, -angle),
            GateOp::Cnot { control, target } => state.cnot(control, target),
        }
    }
}

fn su2(ops: &mut Vec<GateOp>, wire: usize, first_slot: usize) {
    ops.push(GateOp::Rz { wire, slot: first_slot });
    ops.push(GateOp::Ry { wire, slot: first_slot + 1 });
    ops.push(GateOp::Rz { wire, slot: first_slot + 2 });
}

/// Expands a node unitary on `(wire_a, wire_b)` into gates, drawing
/// parameters from `slots` in order. `cnot_target` orients the single CNOT
/// of the simple kinds and is ignored by the general ones.
pub fn expand_block(
    kind: BlockKind,
    wire_a: usize,
    wire_b: usize,
    slots: Range<usize>,
    cnot_target: usize,
) -> Result<Vec<GateOp>> {
    if slots.len() != kind.param_count() {
        return Err(Error::Dimension { expected: kind.param_count(), actual: slots.len() });
    }
    if wire_a == wire_b {
        return Err(Error::DuplicateQubit(wire_a));
    }
    let s = slots.start;
    let (a, b) = (wire_a, wire_b);
    let mut ops = Vec::with_capacity(24);
    match kind {
        BlockKind::SimpleReal | BlockKind::SimpleSU2 => {
            if cnot_target != a && cnot_target != b {
                return Err(Error::InvalidArgument(format!(
                    "CNOT target {cnot_target} is not one of the block wires ({a}, {b})"
                )));
            }
            if kind == BlockKind::SimpleReal {
                ops.push(GateOp::Ry { wire: a, slot: s });
                ops.push(GateOp::Ry { wire: b, slot: s + 1 });
            } else {
                su2(&mut ops, a, s);
                su2(&mut ops, b, s + 3);
            }
            let control = if cnot_target == a { b } else { a };
            ops.push(GateOp::Cnot { control, target: cnot_target });
        }
        BlockKind::GeneralSO4 => {
            ops.push(GateOp::FixedRz { wire: a, angle: FRAC_PI_2 });
            ops.push(GateOp::FixedRz { wire: b, angle: FRAC_PI_2 });
            ops.push(GateOp::FixedRy { wire: b, angle: FRAC_PI_2 });
            ops.push(GateOp::Cnot { control: b, target: a });
            su2(&mut ops, a, s);
            su2(&mut ops, b, s + 3);
            ops.push(GateOp::Cnot { control: b, target: a });
            ops.push(GateOp::FixedRy { wire: b, angle: -FRAC_PI_2 });
            ops.push(GateOp::FixedRz { wire: b, angle: -FRAC_PI_2 });
            ops.push(GateOp::FixedRz { wire: a, angle: -FRAC_PI_2 });
        }
        BlockKind::GeneralSU4 => {
            su2(&mut ops, a, s);
            su2(&mut ops, b, s + 3);
            ops.push(GateOp::Cnot { control: b, target: a });
            ops.push(GateOp::Rz { wire: a, slot: s + 6 });
            ops.push(GateOp::Ry { wire: b, slot: s + 7 });
            ops.push(GateOp::Cnot { control: a, target: b });
            ops.push(GateOp::Ry { wire: b, slot: s + 8 });
            ops.push(GateOp::Cnot { control: b, target: a });
            su2(&mut ops, a, s + 9);
            su2(&mut ops, b, s + 12);
        }
    }
    Ok(ops)
}

/// Dense 4x4 matrix of a block in the `|a b>` basis (wire `a` is the high
/// bit). The simple kinds use the default orientation, CNOT target on `b`.
pub fn block_matrix(kind: BlockKind, params: &[f64]) -> Result<Unitary4> {
    let ops = expand_block(kind, 0, 1, 0..params.len(), 1)?;
    let mut u = Unitary4::identity();
    for op in &ops {
        let g = match *op {
            GateOp::Ry { wire, slot } => lift(Unitary2::ry(params[slot]), wire),
            GateOp::Rz { wire, slot } => lift(Unitary2::rz(params[slot]), wire),
            GateOp::FixedRy { wire, angle } => lift(Unitary2::ry(angle), wire),
            GateOp::FixedRz { wire, angle } => lift(Unitary2::rz(angle), wire),
            GateOp::Cnot { control: 0, .. } => Unitary4::cnot_hi_lo(),
            GateOp::Cnot { .. } => Unitary4::cnot_lo_hi(),
        };
        u = g * u;
    }
    Ok(u)
}

fn lift(g: Unitary2, wire: usize) -> Unitary4 {
    if wire == 0 {
        g.kron(&Unitary2::identity())
    } else {
        Unitary2::identity().kron(&g)
    }
}
