//! Netlist simulation.
//!
//! Evaluation is word-parallel: every signal is a `u64` carrying 64
//! independent assignments, which makes exhaustive and random equivalence
//! sweeps cheap. The public [`simulate`] entry point wraps the word engine
//! for a single assignment.
//!
//! Flip-flops are D-type with no clock or reset modeling: their output is
//! the caller-supplied state and their fan-in value is returned as the next
//! state.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::netlist::{GateId, GateType, Netlist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    /// The assignment does not cover a primary input, key input or FF.
    MissingAssignment { gate: GateId, name: String },
    /// The combinational graph is cyclic; simulation is undefined.
    Cycle { gate: GateId },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::MissingAssignment { gate, name } => {
                write!(f, "no value assigned to input {name} ({gate})")
            }
            SimError::Cycle { gate } => write!(f, "combinational cycle through {gate}"),
        }
    }
}

impl core::error::Error for SimError {}

/// Reusable word-parallel evaluator (topological order is computed once).
pub struct Evaluator<'a> {
    netlist: &'a Netlist,
    order: Vec<GateId>,
}

/// Outputs of one word-parallel sweep.
pub struct WordsOut {
    /// One word per primary output, in interface order.
    pub outputs: Vec<u64>,
    /// One word per flip-flop (next state), in interface order.
    pub ff_next: Vec<u64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Self, SimError> {
        let order = netlist
            .topo_order()
            .map_err(|members| SimError::Cycle { gate: members[0] })?;
        Ok(Evaluator { netlist, order })
    }

    /// Evaluate with one `u64` word per interface entry: `pi`, `key` and
    /// `ff` are indexed like the netlist's interface lists.
    pub fn eval_words(&self, pi: &[u64], key: &[u64], ff: &[u64]) -> WordsOut {
        let n = self.netlist;
        debug_assert_eq!(pi.len(), n.primary_inputs.len());
        debug_assert_eq!(key.len(), n.key_inputs.len());
        debug_assert_eq!(ff.len(), n.flipflops.len());
        let mut val = vec![0u64; n.raw_len()];
        for (i, &id) in n.primary_inputs.iter().enumerate() {
            val[id.index()] = pi[i];
        }
        for (i, &id) in n.key_inputs.iter().enumerate() {
            val[id.index()] = key[i];
        }
        for (i, &id) in n.flipflops.iter().enumerate() {
            val[id.index()] = ff[i];
        }
        for &id in &self.order {
            let g = n.gate(id);
            let v = match g.gtype {
                GateType::Input | GateType::KeyInput | GateType::Ff => continue,
                GateType::Not => !val[g.fanin[0].index()],
                GateType::Buf => val[g.fanin[0].index()],
                GateType::And => g.fanin.iter().fold(!0u64, |acc, s| acc & val[s.index()]),
                GateType::Nand => !g.fanin.iter().fold(!0u64, |acc, s| acc & val[s.index()]),
                GateType::Or => g.fanin.iter().fold(0u64, |acc, s| acc | val[s.index()]),
                GateType::Nor => !g.fanin.iter().fold(0u64, |acc, s| acc | val[s.index()]),
                GateType::Xor => g.fanin.iter().fold(0u64, |acc, s| acc ^ val[s.index()]),
                GateType::Xnor => !g.fanin.iter().fold(0u64, |acc, s| acc ^ val[s.index()]),
                GateType::Output => unreachable!("OUTPUT marker in gate graph"),
            };
            val[id.index()] = v;
        }
        WordsOut {
            outputs: self
                .netlist
                .primary_outputs
                .iter()
                .map(|id| val[id.index()])
                .collect(),
            ff_next: self
                .netlist
                .flipflops
                .iter()
                .map(|id| val[self.netlist.gate(*id).fanin[0].index()])
                .collect(),
        }
    }
}

/// Single-assignment simulation result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutput {
    pub outputs: BTreeMap<GateId, bool>,
    pub next_ff_state: BTreeMap<GateId, bool>,
}

/// Evaluate one assignment. `assignment` must cover every primary input and
/// key input; `ff_state` every flip-flop.
pub fn simulate(
    netlist: &Netlist,
    assignment: &BTreeMap<GateId, bool>,
    ff_state: &BTreeMap<GateId, bool>,
) -> Result<SimOutput, SimError> {
    let fetch = |map: &BTreeMap<GateId, bool>, id: GateId| -> Result<u64, SimError> {
        match map.get(&id) {
            Some(&b) => Ok(if b { !0u64 } else { 0 }),
            None => Err(SimError::MissingAssignment {
                gate: id,
                name: netlist.gate(id).name.clone(),
            }),
        }
    };
    let pi: Vec<u64> = netlist
        .primary_inputs
        .iter()
        .map(|&id| fetch(assignment, id))
        .collect::<Result<_, _>>()?;
    let key: Vec<u64> = netlist
        .key_inputs
        .iter()
        .map(|&id| fetch(assignment, id))
        .collect::<Result<_, _>>()?;
    let ff: Vec<u64> = netlist
        .flipflops
        .iter()
        .map(|&id| fetch(ff_state, id))
        .collect::<Result<_, _>>()?;
    let out = Evaluator::new(netlist)?.eval_words(&pi, &key, &ff);
    Ok(SimOutput {
        outputs: netlist
            .primary_outputs
            .iter()
            .zip(&out.outputs)
            .map(|(&id, &w)| (id, w & 1 != 0))
            .collect(),
        next_ff_state: netlist
            .flipflops
            .iter()
            .zip(&out.ff_next)
            .map(|(&id, &w)| (id, w & 1 != 0))
            .collect(),
    })
}
