//! Gate-graph netlist model: types, construction helpers, structural
//! validation, key application and pin-preserving isomorphism.
//!
//! A [`Netlist`] is an id-indexed arena of [`Gate`]s plus ordered interface
//! lists (primary inputs, key inputs, primary outputs, flip-flops). Gates are
//! never renumbered; rewriting passes tombstone dead gates and the arena is
//! compacted only when a netlist is re-emitted through the text format.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Index of a gate in its netlist arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GateId(pub u32);

impl GateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Gate kinds: nine logic/storage types plus structural markers.
///
/// `Input`, `KeyInput` and `Output` are interface markers; they carry no
/// locality-encoding code and never compute anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateType {
    Not,
    And,
    Nand,
    Or,
    Xor,
    Nor,
    Xnor,
    Buf,
    Ff,
    Input,
    KeyInput,
    Output,
}

impl GateType {
    /// Combinational logic gates (includes `Buf`, excludes `Ff` and markers).
    pub fn is_logic(self) -> bool {
        use GateType::*;
        matches!(self, Not | And | Nand | Or | Xor | Nor | Xnor | Buf)
    }

    /// Gates that drive a wire without reading one.
    pub fn is_source(self) -> bool {
        matches!(self, GateType::Input | GateType::KeyInput)
    }

    /// Expected fan-in arity: `(min, max)`; `max = usize::MAX` for n-ary.
    pub fn arity(self) -> (usize, usize) {
        use GateType::*;
        match self {
            Input | KeyInput | Output => (0, 0),
            Not | Buf | Ff => (1, 1),
            And | Nand | Or | Xor | Nor | Xnor => (2, usize::MAX),
        }
    }

    pub fn name(self) -> &'static str {
        use GateType::*;
        match self {
            Not => "NOT",
            And => "AND",
            Nand => "NAND",
            Or => "OR",
            Xor => "XOR",
            Nor => "NOR",
            Xnor => "XNOR",
            Buf => "BUF",
            Ff => "DFF",
            Input => "INPUT",
            KeyInput => "KEYINPUT",
            Output => "OUTPUT",
        }
    }
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate: type, ordered fan-in pins and (unordered but stored) fan-out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub name: String,
    pub gtype: GateType,
    /// Driver gates, in pin order. Pin order is meaningful: key gates carry
    /// their key input on pin 0 and the data signal on pin 1.
    pub fanin: Vec<GateId>,
    /// Consumer gates, kept sorted by id.
    pub fanout: Vec<GateId>,
}

/// A secret key: one bit per key input, index-aligned with
/// [`Netlist::key_inputs`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Key {
    bits: Vec<bool>,
}

impl Key {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Key { bits }
    }

    /// Parse a string of `0`/`1` characters.
    pub fn from_str_bits(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(Key { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Copy with bit `i` flipped.
    pub fn with_flipped(&self, i: usize) -> Key {
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        Key { bits }
    }

    /// Concatenation: `self` bits followed by `other` bits.
    pub fn concat(&self, other: &Key) -> Key {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Key { bits }
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Key {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Key {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Key::from_str_bits(&s).ok_or_else(|| serde::de::Error::custom("key must be a 0/1 string"))
    }
}

/// Structural invariant violations reported by [`Netlist::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A fan-in pin references a missing or dead gate.
    DanglingFanin { gate: GateId, missing: GateId },
    /// A fan-out entry references a missing or dead gate.
    DanglingFanout { gate: GateId, missing: GateId },
    /// `a` lists `b` as fan-in but `b` does not list `a` as fan-out (or vice
    /// versa).
    Inconsistent { gate: GateId, peer: GateId },
    /// Fan-in count outside the arity range for the gate type.
    BadArity {
        gate: GateId,
        gtype: GateType,
        found: usize,
    },
    /// Gate participates in a combinational cycle (flip-flops cut).
    Cycle { gate: GateId },
    /// An interface list entry has the wrong gate type or is dead.
    BadInterface { gate: GateId, list: &'static str },
    /// An `Output` marker was instantiated in the gate graph.
    OutputMarker { gate: GateId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingFanin { gate, missing } => {
                write!(f, "{gate}: dangling fanin {missing}")
            }
            Violation::DanglingFanout { gate, missing } => {
                write!(f, "{gate}: dangling fanout {missing}")
            }
            Violation::Inconsistent { gate, peer } => {
                write!(f, "{gate}: fanin/fanout inconsistent with {peer}")
            }
            Violation::BadArity { gate, gtype, found } => {
                write!(f, "{gate}: {gtype} has {found} fanins")
            }
            Violation::Cycle { gate } => write!(f, "{gate}: combinational cycle"),
            Violation::BadInterface { gate, list } => {
                write!(f, "{gate}: bad entry in {list} list")
            }
            Violation::OutputMarker { gate } => write!(f, "{gate}: OUTPUT marker in gate graph"),
        }
    }
}

/// Error from [`Netlist::apply_key`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApplyKeyError {
    LengthMismatch {
        key: usize,
        key_inputs: usize,
    },
    /// Constant folding left a constant wire driving a primary output or a
    /// flip-flop; the gate vocabulary has no constant driver.
    ConstantSignal {
        gate: GateId,
    },
}

impl fmt::Display for ApplyKeyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApplyKeyError::LengthMismatch { key, key_inputs } => {
                write!(
                    f,
                    "key has {key} bits but netlist has {key_inputs} key inputs"
                )
            }
            ApplyKeyError::ConstantSignal { gate } => {
                write!(f, "constant signal at {gate} cannot be represented")
            }
        }
    }
}

impl core::error::Error for ApplyKeyError {}

/// Directed gate graph with ordered interface lists.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Netlist {
    slots: Vec<Option<Gate>>,
    pub primary_inputs: Vec<GateId>,
    pub key_inputs: Vec<GateId>,
    pub primary_outputs: Vec<GateId>,
    pub flipflops: Vec<GateId>,
}

impl Netlist {
    pub fn new() -> Self {
        Netlist::default()
    }

    // ------------------------------------------------------------------
    // Construction
    // ------------------------------------------------------------------

    fn push(&mut self, name: Option<String>, gtype: GateType, fanin: Vec<GateId>) -> GateId {
        let id = GateId(self.slots.len() as u32);
        let name = name.unwrap_or_else(|| format!("n{}", id.0));
        for &src in &fanin {
            let g = self.gate_mut(src);
            if let Err(pos) = g.fanout.binary_search(&id) {
                g.fanout.insert(pos, id);
            }
        }
        self.slots.push(Some(Gate {
            id,
            name,
            gtype,
            fanin,
            fanout: Vec::new(),
        }));
        id
    }

    /// Add a primary input.
    pub fn add_input(&mut self, name: &str) -> GateId {
        let id = self.push(Some(name.to_string()), GateType::Input, vec![]);
        self.primary_inputs.push(id);
        id
    }

    /// Add the next key input; its name is forced to `keyinput<k>`.
    pub fn add_key_input(&mut self) -> GateId {
        let k = self.key_inputs.len();
        let id = self.push(Some(format!("keyinput{k}")), GateType::KeyInput, vec![]);
        self.key_inputs.push(id);
        id
    }

    /// Add a logic gate or flip-flop. Arity is the caller's responsibility;
    /// [`Netlist::validate`] reports violations.
    pub fn add_gate(&mut self, gtype: GateType, fanin: &[GateId]) -> GateId {
        self.push(None, gtype, fanin.to_vec())
    }

    /// Add a logic gate with an explicit signal name.
    pub fn add_named_gate(&mut self, name: &str, gtype: GateType, fanin: &[GateId]) -> GateId {
        self.push(Some(name.to_string()), gtype, fanin.to_vec())
    }

    /// Register `id` as the next primary output.
    pub fn mark_output(&mut self, id: GateId) {
        self.primary_outputs.push(id);
    }

    /// Add a D flip-flop fed by `d`.
    pub fn add_ff(&mut self, d: GateId) -> GateId {
        let id = self.push(None, GateType::Ff, vec![d]);
        self.flipflops.push(id);
        id
    }

    // ------------------------------------------------------------------
    // Access
    // ------------------------------------------------------------------

    /// Live gate lookup; panics on a dead or out-of-range id.
    pub fn gate(&self, id: GateId) -> &Gate {
        self.slots[id.index()].as_ref().expect("dead gate id")
    }

    pub fn gate_mut(&mut self, id: GateId) -> &mut Gate {
        self.slots[id.index()].as_mut().expect("dead gate id")
    }

    pub fn try_gate(&self, id: GateId) -> Option<&Gate> {
        self.slots.get(id.index()).and_then(|s| s.as_ref())
    }

    pub fn is_live(&self, id: GateId) -> bool {
        self.try_gate(id).is_some()
    }

    /// All live gates in id order.
    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.slots.iter().filter_map(|s| s.as_ref())
    }

    /// Arena length including tombstones (ids are always `< raw_len`).
    pub fn raw_len(&self) -> usize {
        self.slots.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    /// Live logic/storage gates (markers excluded).
    pub fn logic_gate_count(&self) -> usize {
        self.gates()
            .filter(|g| g.gtype.is_logic() || g.gtype == GateType::Ff)
            .count()
    }

    /// Rename a gate (bench emission uses gate names as signal names).
    pub fn rename(&mut self, id: GateId, name: &str) {
        self.gate_mut(id).name = name.to_string();
    }

    /// Find a live gate by name.
    pub fn find_by_name(&self, name: &str) -> Option<GateId> {
        self.gates().find(|g| g.name == name).map(|g| g.id)
    }

    // ------------------------------------------------------------------
    // Rewriting
    // ------------------------------------------------------------------

    /// Move every consumer of `from` (and any output-list entries) onto `to`.
    pub fn rewire_consumers(&mut self, from: GateId, to: GateId) {
        let consumers = self.gate(from).fanout.clone();
        for c in consumers {
            let g = self.gate_mut(c);
            for pin in g.fanin.iter_mut() {
                if *pin == from {
                    *pin = to;
                }
            }
            self.gate_mut(from).fanout.retain(|&x| x != c);
            let t = self.gate_mut(to);
            if let Err(pos) = t.fanout.binary_search(&c) {
                t.fanout.insert(pos, c);
            }
        }
        for po in self.primary_outputs.iter_mut() {
            if *po == from {
                *po = to;
            }
        }
    }

    /// Tombstone a gate. The caller must have detached all consumers; the
    /// gate is unlinked from its drivers here.
    pub fn remove_gate(&mut self, id: GateId) {
        let fanin = self.gate(id).fanin.clone();
        for src in fanin {
            if self.is_live(src) {
                self.gate_mut(src).fanout.retain(|&x| x != id);
            }
        }
        debug_assert!(
            self.gate(id).fanout.is_empty(),
            "removing a gate with consumers"
        );
        self.slots[id.index()] = None;
    }

    /// Replace pin `pin` of `gate` with a new driver, fixing fan-out lists.
    pub fn set_fanin(&mut self, gate: GateId, pin: usize, driver: GateId) {
        let old = self.gate(gate).fanin[pin];
        if old == driver {
            return;
        }
        self.gate_mut(gate).fanin[pin] = driver;
        let still_used = self.gate(gate).fanin.contains(&old);
        if !still_used {
            self.gate_mut(old).fanout.retain(|&x| x != gate);
        }
        let d = self.gate_mut(driver);
        if let Err(pos) = d.fanout.binary_search(&gate) {
            d.fanout.insert(pos, gate);
        }
    }

    /// Change a gate's type in place (fan-in untouched).
    pub fn set_type(&mut self, gate: GateId, gtype: GateType) {
        self.gate_mut(gate).gtype = gtype;
    }

    /// Replace the whole fan-in list, fixing fan-out bookkeeping on both the
    /// old and new drivers.
    pub fn replace_fanins(&mut self, gate: GateId, fanins: &[GateId]) {
        let old = core::mem::take(&mut self.gate_mut(gate).fanin);
        for src in old {
            self.gate_mut(src).fanout.retain(|&x| x != gate);
        }
        for &src in fanins {
            let s = self.gate_mut(src);
            if let Err(pos) = s.fanout.binary_search(&gate) {
                s.fanout.insert(pos, gate);
            }
        }
        self.gate_mut(gate).fanin = fanins.to_vec();
    }

    // ------------------------------------------------------------------
    // Validation
    // ------------------------------------------------------------------

    /// Check every structural invariant; an empty list means the netlist is
    /// well formed. Violations are data, not errors.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for g in self.gates() {
            if g.gtype == GateType::Output {
                out.push(Violation::OutputMarker { gate: g.id });
            }
            let (lo, hi) = g.gtype.arity();
            if g.fanin.len() < lo || g.fanin.len() > hi {
                out.push(Violation::BadArity {
                    gate: g.id,
                    gtype: g.gtype,
                    found: g.fanin.len(),
                });
            }
            for &src in &g.fanin {
                if !self.is_live(src) {
                    out.push(Violation::DanglingFanin {
                        gate: g.id,
                        missing: src,
                    });
                } else if !self.gate(src).fanout.contains(&g.id) {
                    out.push(Violation::Inconsistent {
                        gate: g.id,
                        peer: src,
                    });
                }
            }
            for &dst in &g.fanout {
                if !self.is_live(dst) {
                    out.push(Violation::DanglingFanout {
                        gate: g.id,
                        missing: dst,
                    });
                } else if !self.gate(dst).fanin.contains(&g.id) {
                    out.push(Violation::Inconsistent {
                        gate: g.id,
                        peer: dst,
                    });
                }
            }
        }
        let check_list = |out: &mut Vec<Violation>, ids: &[GateId], want: GateType, list| {
            for &id in ids {
                if self.try_gate(id).map(|g| g.gtype) != Some(want) {
                    out.push(Violation::BadInterface { gate: id, list });
                }
            }
        };
        check_list(
            &mut out,
            &self.primary_inputs,
            GateType::Input,
            "primary_inputs",
        );
        check_list(&mut out, &self.key_inputs, GateType::KeyInput, "key_inputs");
        check_list(&mut out, &self.flipflops, GateType::Ff, "flipflops");
        for &id in &self.primary_outputs {
            if !self.is_live(id) {
                out.push(Violation::BadInterface {
                    gate: id,
                    list: "primary_outputs",
                });
            }
        }
        for id in self.combinational_cycle_members() {
            out.push(Violation::Cycle { gate: id });
        }
        out
    }

    /// Kahn topological order over the combinational graph (sources and FF
    /// outputs are roots; FF fan-in edges are next-state edges, so FFs do not
    /// depend on their drivers). Returns `Err` with the cycle members if the
    /// graph is cyclic.
    pub fn topo_order(&self) -> Result<Vec<GateId>, Vec<GateId>> {
        let n = self.slots.len();
        let mut indeg = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = Vec::new();
        for g in self.gates() {
            if g.gtype == GateType::Ff || g.gtype.is_source() {
                queue.push(g.id);
            } else {
                indeg[g.id.index()] = g.fanin.len();
                if g.fanin.is_empty() {
                    queue.push(g.id);
                }
            }
        }
        // Deterministic: queue is processed in insertion order and gates are
        // seeded in id order.
        let mut head = 0;
        while head < queue.len() {
            let id = queue[head];
            head += 1;
            order.push(id);
            for &dst in &self.gate(id).fanout {
                if self.gate(dst).gtype == GateType::Ff {
                    continue;
                }
                // fanout lists are deduplicated, fanin pins are not
                let pins = self.gate(dst).fanin.iter().filter(|&&p| p == id).count();
                indeg[dst.index()] -= pins;
                if indeg[dst.index()] == 0 {
                    queue.push(dst);
                }
            }
        }
        if order.len() == self.gate_count() {
            Ok(order)
        } else {
            let in_order: Vec<bool> = {
                let mut v = vec![false; n];
                for &id in &order {
                    v[id.index()] = true;
                }
                v
            };
            Err(self
                .gates()
                .map(|g| g.id)
                .filter(|id| !in_order[id.index()])
                .collect())
        }
    }

    fn combinational_cycle_members(&self) -> Vec<GateId> {
        match self.topo_order() {
            Ok(_) => Vec::new(),
            Err(members) => members,
        }
    }

    // ------------------------------------------------------------------
    // Key application
    // ------------------------------------------------------------------

    /// Hard-code the key: every key input becomes a constant and is folded
    /// away. The result has zero key inputs.
    pub fn apply_key(&self, key: &Key) -> Result<Netlist, ApplyKeyError> {
        if key.len() != self.key_inputs.len() {
            return Err(ApplyKeyError::LengthMismatch {
                key: key.len(),
                key_inputs: self.key_inputs.len(),
            });
        }
        let mut n = self.clone();
        let bindings: BTreeMap<GateId, bool> = n
            .key_inputs
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, key.bit(i)))
            .collect();
        crate::transform::fold_constants(&mut n, bindings, false)
            .map_err(|gate| ApplyKeyError::ConstantSignal { gate })?;
        let keys = core::mem::take(&mut n.key_inputs);
        for id in keys {
            if n.is_live(id) {
                debug_assert!(n.gate(id).fanout.is_empty());
                n.remove_gate(id);
            }
        }
        Ok(n)
    }

    // ------------------------------------------------------------------
    // Structure comparison
    // ------------------------------------------------------------------

    /// Pin-preserving graph isomorphism with matched interface ordering.
    ///
    /// Interfaces are paired positionally and the correspondence is
    /// propagated backward through fan-in pins; because pin order is
    /// meaningful there is at most one candidate mapping. Every live gate of
    /// both netlists must end up paired.
    pub fn isomorphic(&self, other: &Netlist) -> bool {
        if self.primary_inputs.len() != other.primary_inputs.len()
            || self.key_inputs.len() != other.key_inputs.len()
            || self.primary_outputs.len() != other.primary_outputs.len()
            || self.flipflops.len() != other.flipflops.len()
            || self.gate_count() != other.gate_count()
        {
            return false;
        }
        let mut map: BTreeMap<GateId, GateId> = BTreeMap::new();
        let mut rev: BTreeMap<GateId, GateId> = BTreeMap::new();
        let mut work: Vec<(GateId, GateId)> = Vec::new();
        let pair = |map: &mut BTreeMap<GateId, GateId>,
                    rev: &mut BTreeMap<GateId, GateId>,
                    work: &mut Vec<(GateId, GateId)>,
                    a: GateId,
                    b: GateId|
         -> bool {
            match (map.get(&a), rev.get(&b)) {
                (Some(&b2), _) => b2 == b,
                (None, Some(_)) => false,
                (None, None) => {
                    map.insert(a, b);
                    rev.insert(b, a);
                    work.push((a, b));
                    true
                }
            }
        };
        let seeds = self
            .primary_inputs
            .iter()
            .zip(&other.primary_inputs)
            .chain(self.key_inputs.iter().zip(&other.key_inputs))
            .chain(self.flipflops.iter().zip(&other.flipflops))
            .chain(self.primary_outputs.iter().zip(&other.primary_outputs));
        for (&a, &b) in seeds {
            if !pair(&mut map, &mut rev, &mut work, a, b) {
                return false;
            }
        }
        while let Some((a, b)) = work.pop() {
            let ga = self.gate(a);
            let gb = other.gate(b);
            if ga.gtype != gb.gtype || ga.fanin.len() != gb.fanin.len() {
                return false;
            }
            for (&fa, &fb) in ga.fanin.iter().zip(&gb.fanin) {
                if !pair(&mut map, &mut rev, &mut work, fa, fb) {
                    return false;
                }
            }
        }
        map.len() == self.gate_count()
    }
}
