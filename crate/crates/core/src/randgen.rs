//! Seeded random netlist generation for tests, benchmarks and desk-scale
//! experiments.
//!
//! Generated netlists are DAGs by construction, XOR-rich so that internal
//! wire flips propagate to outputs, and every sink gate is promoted to a
//! primary output (no dead logic).

use alloc::vec::Vec;

use rand::Rng;

use crate::netlist::{GateId, GateType, Netlist};
use crate::seed;

#[derive(Debug, Clone, Copy)]
pub struct RandNetlistParams {
    pub inputs: usize,
    pub gates: usize,
    pub flipflops: usize,
}

impl RandNetlistParams {
    /// Exhaustively checkable: 6 inputs, ~30 gates.
    pub fn small() -> Self {
        RandNetlistParams {
            inputs: 6,
            gates: 30,
            flipflops: 0,
        }
    }

    /// Mid-size combinational circuit, still under the exhaustive cap.
    pub fn medium() -> Self {
        RandNetlistParams {
            inputs: 14,
            gates: 550,
            flipflops: 0,
        }
    }

    /// Sequential variant of [`RandNetlistParams::medium`].
    pub fn medium_sequential() -> Self {
        RandNetlistParams {
            inputs: 10,
            gates: 550,
            flipflops: 4,
        }
    }
}

const TYPE_TABLE: &[(GateType, u32)] = &[
    (GateType::And, 2),
    (GateType::Nand, 2),
    (GateType::Or, 2),
    (GateType::Nor, 1),
    (GateType::Xor, 3),
    (GateType::Xnor, 1),
    (GateType::Not, 1),
    (GateType::Buf, 1),
];

pub fn random_netlist(params: &RandNetlistParams, seed: u64) -> Netlist {
    let mut rng = seed::rng(seed);
    let mut n = Netlist::new();
    let mut wires: Vec<GateId> = Vec::new();
    for i in 0..params.inputs.max(1) {
        wires.push(n.add_input(&alloc::format!("in{i}")));
    }
    let mut ffs: Vec<GateId> = Vec::new();
    for _ in 0..params.flipflops {
        // temporarily fed by an input; rewired below once logic exists
        let d = wires[rng.gen_range(0..wires.len())];
        let q = n.add_ff(d);
        ffs.push(q);
        wires.push(q);
    }
    let total_weight: u32 = TYPE_TABLE.iter().map(|&(_, w)| w).sum();
    for _ in 0..params.gates {
        let mut pick = rng.gen_range(0..total_weight);
        let gtype = TYPE_TABLE
            .iter()
            .find(|&&(_, w)| {
                if pick < w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .unwrap()
            .0;
        let a = wires[rng.gen_range(0..wires.len())];
        let id = if matches!(gtype, GateType::Not | GateType::Buf) {
            n.add_gate(gtype, &[a])
        } else {
            let mut b = wires[rng.gen_range(0..wires.len())];
            if b == a && wires.len() > 1 {
                while b == a {
                    b = wires[rng.gen_range(0..wires.len())];
                }
            }
            n.add_gate(gtype, &[a, b])
        };
        wires.push(id);
    }
    for &q in &ffs {
        let d = wires[rng.gen_range(0..wires.len())];
        if d != q {
            n.set_fanin(q, 0, d);
        }
    }
    // every sink becomes an output so no logic is dead
    let sinks: Vec<GateId> = n
        .gates()
        .filter(|g| g.fanout.is_empty() && g.gtype.is_logic())
        .map(|g| g.id)
        .collect();
    for s in sinks {
        n.mark_output(s);
    }
    if n.primary_outputs.is_empty() {
        let last = n.gates().last().unwrap().id;
        n.mark_output(last);
    }
    n
}
