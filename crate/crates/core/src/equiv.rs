//! Combinational equivalence checking by exhaustive or seeded random
//! simulation.
//!
//! Sequential netlists are compared combinationally: flip-flop outputs are
//! treated as pseudo-inputs and flip-flop fan-ins as pseudo-outputs.
//! Interfaces are matched positionally (counts of primary inputs, key
//! inputs, outputs and flip-flops must agree); a netlist still carrying key
//! inputs is compared over those too, so locked variants of the same design
//! can be checked against each other before a key is applied.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::RngCore;

use crate::netlist::Netlist;
use crate::seed;
use crate::sim::{Evaluator, SimError};

/// Exhaustive sweeps are capped at this many input bits (2^24 vectors).
pub const EXHAUSTIVE_INPUT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivMode {
    /// Enumerate all `2^n` assignments over primary inputs, key inputs and
    /// pseudo-inputs. Rejected above [`EXHAUSTIVE_INPUT_CAP`] bits.
    Exhaustive,
    /// `vectors` uniform assignments drawn from a seeded generator.
    Random { vectors: usize, seed: u64 },
}

/// A distinguishing assignment, indexed like the left netlist's interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub primary_inputs: Vec<bool>,
    pub key_inputs: Vec<bool>,
    pub ff_state: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivOutcome {
    Equivalent,
    Counterexample(Counterexample),
}

impl EquivOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivOutcome::Equivalent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivError {
    InterfaceMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    ExhaustiveTooLarge {
        inputs: usize,
        cap: usize,
    },
    Sim(SimError),
}

impl fmt::Display for EquivError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivError::InterfaceMismatch { what, left, right } => {
                write!(f, "interface mismatch: {left} vs {right} {what}")
            }
            EquivError::ExhaustiveTooLarge { inputs, cap } => {
                write!(f, "{inputs} input bits exceed the exhaustive cap of {cap}")
            }
            EquivError::Sim(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EquivError {}

impl From<SimError> for EquivError {
    fn from(e: SimError) -> Self {
        EquivError::Sim(e)
    }
}

// Bit patterns for the low six input indices of a 64-lane word: input i
// alternates with period 2^i.
const LANE_PATTERNS: [u64; 6] = [
    0xaaaa_aaaa_aaaa_aaaa,
    0xcccc_cccc_cccc_cccc,
    0xf0f0_f0f0_f0f0_f0f0,
    0xff00_ff00_ff00_ff00,
    0xffff_0000_ffff_0000,
    0xffff_ffff_0000_0000,
];

/// Check combinational equivalence of `a` and `b`.
pub fn equiv_check(a: &Netlist, b: &Netlist, mode: EquivMode) -> Result<EquivOutcome, EquivError> {
    let pairs: [(&'static str, usize, usize); 4] = [
        (
            "primary inputs",
            a.primary_inputs.len(),
            b.primary_inputs.len(),
        ),
        ("key inputs", a.key_inputs.len(), b.key_inputs.len()),
        (
            "primary outputs",
            a.primary_outputs.len(),
            b.primary_outputs.len(),
        ),
        ("flip-flops", a.flipflops.len(), b.flipflops.len()),
    ];
    for (what, left, right) in pairs {
        if left != right {
            return Err(EquivError::InterfaceMismatch { what, left, right });
        }
    }
    let npi = a.primary_inputs.len();
    let nkey = a.key_inputs.len();
    let nff = a.flipflops.len();
    let nin = npi + nkey + nff;

    let ea = Evaluator::new(a)?;
    let eb = Evaluator::new(b)?;

    let mut words = vec![0u64; nin];
    let sweep = |words: &[u64], lanes: u64| -> Option<Counterexample> {
        let (pi, rest) = words.split_at(npi);
        let (key, ff) = rest.split_at(nkey);
        let oa = ea.eval_words(pi, key, ff);
        let ob = eb.eval_words(pi, key, ff);
        let mut diff = 0u64;
        for (x, y) in oa.outputs.iter().zip(&ob.outputs) {
            diff |= x ^ y;
        }
        for (x, y) in oa.ff_next.iter().zip(&ob.ff_next) {
            diff |= x ^ y;
        }
        diff &= lanes;
        if diff == 0 {
            return None;
        }
        let lane = diff.trailing_zeros();
        let pick = |w: &[u64]| w.iter().map(|&v| v >> lane & 1 != 0).collect();
        Some(Counterexample {
            primary_inputs: pick(pi),
            key_inputs: pick(key),
            ff_state: pick(ff),
        })
    };

    match mode {
        EquivMode::Exhaustive => {
            if nin > EXHAUSTIVE_INPUT_CAP {
                return Err(EquivError::ExhaustiveTooLarge {
                    inputs: nin,
                    cap: EXHAUSTIVE_INPUT_CAP,
                });
            }
            let total: u64 = 1u64 << nin;
            let blocks = total.div_ceil(64);
            for block in 0..blocks {
                for (i, w) in words.iter_mut().enumerate() {
                    *w = if i < 6 {
                        LANE_PATTERNS[i]
                    } else if block >> (i - 6) & 1 != 0 {
                        !0
                    } else {
                        0
                    };
                }
                let lanes = if total >= 64 {
                    !0u64
                } else {
                    (1u64 << total) - 1
                };
                if let Some(cex) = sweep(&words, lanes) {
                    return Ok(EquivOutcome::Counterexample(cex));
                }
            }
            Ok(EquivOutcome::Equivalent)
        }
        EquivMode::Random { vectors, seed } => {
            let mut rng = seed::rng(seed);
            let mut remaining = vectors;
            while remaining > 0 {
                let lanes_n = remaining.min(64);
                for w in words.iter_mut() {
                    *w = rng.next_u64();
                }
                let lanes = if lanes_n == 64 {
                    !0u64
                } else {
                    (1u64 << lanes_n) - 1
                };
                if let Some(cex) = sweep(&words, lanes) {
                    return Ok(EquivOutcome::Counterexample(cex));
                }
                remaining -= lanes_n;
            }
            Ok(EquivOutcome::Equivalent)
        }
    }
}
