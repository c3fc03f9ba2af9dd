//! Core engine for a logic-locking attack workbench.
//!
//! Everything in this crate is pure computation over in-memory values: the
//! gate-graph netlist model, XOR/XNOR key-gate insertion, generic-form
//! rewriting, locality-vector extraction, labeled dataset assembly, a small
//! neural-network engine with hand-written backpropagation, and a genetic
//! search over CNN architectures. File formats, pipelines and the command
//! line live in the companion `locklab` crate.
//!
//! The crate is `no_std` (with `alloc`) so the algorithmic core stays free
//! of platform dependencies; all randomness flows through explicitly seeded
//! generators and every operation is deterministic given its inputs.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ann;
pub mod attack;
pub mod dataset;
pub mod equiv;
pub mod extract;
pub mod locking;
pub mod netlist;
pub mod neuroevo;
pub mod randgen;
pub mod seed;
pub mod sim;
pub mod transform;

pub use netlist::{Gate, GateId, GateType, Key, Netlist};
