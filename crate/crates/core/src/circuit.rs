//! Circuit templates for the TTN and MERA classifiers and the checkerboard
//! state-preparation ansatz.
//!
//! Layouts are written with 1-based wire labels, the way the circuit
//! diagrams number them, and converted to 0-based indices on build.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{expand_block, BlockKind, GateOp};
use crate::statevector::Statevector;

pub const CLASSIFIER_QUBITS: usize = 8;
pub const DEFAULT_CHECKERBOARD_LAYERS: usize = 4;

/// Readout wires of both classifiers, 1-based.
const READOUT_1BASED: [usize; 2] = [3, 6];

/// `(label, wire_a, wire_b, kept wire)`; `None` means both wires continue.
type Placement = (char, usize, usize, Option<usize>);

const TTN_LAYOUT: [Placement; 7] = [
    ('A', 1, 2, Some(2)),
    ('B', 3, 4, Some(3)),
    ('C', 5, 6, Some(6)),
    ('D', 7, 8, Some(7)),
    ('E', 2, 3, Some(3)),
    ('F', 6, 7, Some(6)),
    ('G', 3, 6, None),
];

const MERA_LAYOUT: [Placement; 11] = [
    ('A', 2, 3, None),
    ('B', 4, 5, None),
    ('C', 6, 7, None),
    ('D', 1, 2, Some(2)),
    ('E', 3, 4, Some(3)),
    ('F', 5, 6, Some(6)),
    ('G', 7, 8, Some(7)),
    ('H', 3, 6, None),
    ('I', 2, 3, Some(3)),
    ('L', 6, 7, Some(6)),
    ('M', 3, 6, None),
];

/// Boundary pairing of the even checkerboard layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Even layers include the `(n, 1)` wrap pair.
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Architecture {
    Ttn(BlockKind),
    Mera(BlockKind),
    Checkerboard { layers: usize },
}

impl Architecture {
    pub const VALID: &'static str =
        "ttn:<kind>, mera:<kind>, checkerboard:su4:L<layers>; kind = simple-real | simple-su2 | so4 | su4";

    pub fn build(&self) -> Result<CircuitTemplate> {
        match *self {
            Architecture::Ttn(kind) => Ok(build_ttn(kind)),
            Architecture::Mera(kind) => Ok(build_mera(kind)),
            Architecture::Checkerboard { layers } => build_checkerboard(CLASSIFIER_QUBITS, layers),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Ttn(k) => write!(f, "ttn:{k}"),
            Architecture::Mera(k) => write!(f, "mera:{k}"),
            Architecture::Checkerboard { layers } => write!(f, "checkerboard:su4:L{layers}"),
        }
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownArchitecture {
            given: s.to_string(),
            valid: Architecture::VALID.to_string(),
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["ttn", kind] => Ok(Architecture::Ttn(kind.parse().map_err(|_| unknown())?)),
            ["mera", kind] => Ok(Architecture::Mera(kind.parse().map_err(|_| unknown())?)),
            ["checkerboard", "su4"] => Ok(Architecture::Checkerboard {
                layers: DEFAULT_CHECKERBOARD_LAYERS,
            }),
            ["checkerboard", "su4", layers] => {
                let layers = layers
                    .strip_prefix('L')
                    .and_then(|l| l.parse::<usize>().ok())
                    .filter(|&l| l >= 1)
                    .ok_or_else(unknown)?;
                Ok(Architecture::Checkerboard { layers })
            }
            _ => Err(unknown()),
        }
    }
}

/// Where one node unitary sits in a template. Wires are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlacement {
    pub label: char,
    pub kind: BlockKind,
    pub wire_a: usize,
    pub wire_b: usize,
    pub kept: Option<usize>,
    pub slots: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitTemplate {
    pub architecture: Architecture,
    pub n_qubits: usize,
    pub ops: Vec<GateOp>,
    pub n_params: usize,
    /// Measured wires, most significant first.
    pub readout: Vec<usize>,
    pub blocks: Vec<BlockPlacement>,
}

/// Trainable rotation angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn validate_for(&self, template: &CircuitTemplate) -> Result<()> {
        if self.0.len() != template.n_params {
            return Err(Error::Dimension { expected: template.n_params, actual: self.0.len() });
        }
        if let Some(i) = self.0.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("parameter {i} is not finite")));
        }
        Ok(())
    }
}

fn build_tree(architecture: Architecture, kind: BlockKind, layout: &[Placement]) -> CircuitTemplate {
    let mut ops = Vec::new();
    let mut blocks = Vec::with_capacity(layout.len());
    let mut next_slot = 0;
    for &(label, a, b, kept) in layout {
        let (a, b) = (a - 1, b - 1);
        let kept = kept.map(|k| k - 1);
        let slots = next_slot..next_slot + kind.param_count();
        next_slot = slots.end;
        // Simple kinds target the wire that continues; otherwise the lower wire.
        let target = kept.unwrap_or(b);
        ops.extend(expand_block(kind, a, b, slots.clone(), target).expect("static layout is valid"));
        blocks.push(BlockPlacement { label, kind, wire_a: a, wire_b: b, kept, slots });
    }
    let readout: Vec<usize> = READOUT_1BASED.iter().map(|w| w - 1).collect();
    match kind {
        BlockKind::SimpleReal => {
            for &wire in &readout {
                ops.push(GateOp::Ry { wire, slot: next_slot });
                next_slot += 1;
            }
        }
        BlockKind::SimpleSU2 => {
            for &wire in &readout {
                ops.push(GateOp::Rz { wire, slot: next_slot });
                ops.push(GateOp::Ry { wire, slot: next_slot + 1 });
                ops.push(GateOp::Rz { wire, slot: next_slot + 2 });
                next_slot += 3;
            }
        }
        BlockKind::GeneralSO4 | BlockKind::GeneralSU4 => {}
    }
    CircuitTemplate {
        architecture,
        n_qubits: CLASSIFIER_QUBITS,
        ops,
        n_params: next_slot,
        readout,
        blocks,
    }
}

pub fn build_ttn(kind: BlockKind) -> CircuitTemplate {
    build_tree(Architecture::Ttn(kind), kind, &TTN_LAYOUT)
}

pub fn build_mera(kind: BlockKind) -> CircuitTemplate {
    build_tree(Architecture::Mera(kind), kind, &MERA_LAYOUT)
}

/// Brick-wall of general `SU(4)` blocks with periodic pairing.
pub fn build_checkerboard(n_qubits: usize, layers: usize) -> Result<CircuitTemplate> {
    build_checkerboard_with(n_qubits, layers, Boundary::Periodic)
}

pub fn build_checkerboard_with(
    n_qubits: usize,
    layers: usize,
    boundary: Boundary,
) -> Result<CircuitTemplate> {
    if n_qubits < 2 || n_qubits % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "checkerboard needs an even qubit count >= 2, got {n_qubits}"
        )));
    }
    if layers == 0 {
        return Err(Error::InvalidArgument("checkerboard needs at least one layer".into()));
    }
    let kind = BlockKind::GeneralSU4;
    let mut ops = Vec::new();
    let mut blocks = Vec::new();
    let mut next_slot = 0;
    for layer in 0..layers {
        let pairs: Vec<(usize, usize)> = if layer % 2 == 0 {
            (0..n_qubits).step_by(2).map(|a| (a, a + 1)).collect()
        } else {
            let mut p: Vec<_> = (1..n_qubits - 1).step_by(2).map(|a| (a, a + 1)).collect();
            if boundary == Boundary::Periodic && n_qubits > 2 {
                p.push((n_qubits - 1, 0));
            }
            p
        };
        for (a, b) in pairs {
            let slots = next_slot..next_slot + kind.param_count();
            next_slot = slots.end;
            ops.extend(expand_block(kind, a, b, slots.clone(), b)?);
            let label = char::from(b'A' + (blocks.len() % 26) as u8);
            blocks.push(BlockPlacement { label, kind, wire_a: a, wire_b: b, kept: None, slots });
        }
    }
    Ok(CircuitTemplate {
        architecture: Architecture::Checkerboard { layers },
        n_qubits,
        ops,
        n_params: next_slot,
        readout: Vec::new(),
        blocks,
    })
}

impl CircuitTemplate {
    /// Applies the bound circuit to `state` in place.
    pub fn apply(&self, params: &ParamVector, state: &mut Statevector) -> Result<()> {
        params.validate_for(self)?;
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension { expected: self.n_qubits, actual: state.n_qubits() });
        }
        let p = params.as_slice();
        for op in &self.ops {
            op.apply(state, p);
        }
        Ok(())
    }

    pub fn run(&self, params: &ParamVector, input: &Statevector) -> Result<Statevector> {
        let mut state = input.clone();
        self.apply(params, &mut state)?;
        Ok(state)
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

/// Free-function form of [`CircuitTemplate::run`].
pub fn run(template: &CircuitTemplate, params: &ParamVector, input: &Statevector) -> Result<Statevector> {
    template.run(params, input)
}
