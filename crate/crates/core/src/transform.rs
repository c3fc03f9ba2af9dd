//! Netlist rewriting: reduction to the generic two-input form and a
//! fixpoint peephole optimizer.
//!
//! The optimizer stands in for a commercial resynthesis step: it applies a
//! small set of local, equivalence-preserving rewrites to fixpoint. Pipeline
//! stages may skip it entirely to model the pre-resynthesis case.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::netlist::{GateId, GateType, Netlist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformError {
    /// A gate's arity cannot be decomposed (e.g. a 2-input NOT).
    Undecomposable {
        gate: GateId,
        gtype: GateType,
        fanins: usize,
    },
}

impl fmt::Display for TransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformError::Undecomposable {
                gate,
                gtype,
                fanins,
            } => {
                write!(f, "{gate}: cannot decompose {gtype} with {fanins} fanins")
            }
        }
    }
}

impl core::error::Error for TransformError {}

/// Decompose every n-ary gate into a left-leaning tree of two-input gates.
/// Already-binary netlists come back isomorphic.
pub fn to_generic(netlist: &Netlist) -> Result<Netlist, TransformError> {
    let mut n = netlist.clone();
    let ids: Vec<GateId> = n.gates().map(|g| g.id).collect();
    for id in ids {
        let g = n.gate(id);
        let (gtype, fanin) = (g.gtype, g.fanin.clone());
        if fanin.len() <= 2 {
            continue;
        }
        // Inner tree nodes use the positive-polarity gate; the negation (if
        // any) stays at the root, which keeps its id and consumers.
        let inner = match gtype {
            GateType::And | GateType::Nand => GateType::And,
            GateType::Or | GateType::Nor => GateType::Or,
            GateType::Xor | GateType::Xnor => GateType::Xor,
            other => {
                return Err(TransformError::Undecomposable {
                    gate: id,
                    gtype: other,
                    fanins: fanin.len(),
                })
            }
        };
        let mut acc = fanin[0];
        for &next in &fanin[1..fanin.len() - 1] {
            acc = n.add_gate(inner, &[acc, next]);
        }
        n.replace_fanins(id, &[acc, fanin[fanin.len() - 1]]);
    }
    Ok(n)
}

// ----------------------------------------------------------------------
// Optimizer passes
// ----------------------------------------------------------------------

/// Peephole passes, applied in order to fixpoint by [`optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pass {
    /// Fold constants and algebraic identities (duplicate-operand
    /// idempotence and XOR self-cancellation).
    ConstProp,
    /// `NOT(NOT(x))` becomes `x`.
    DoubleInverter,
    /// `BUF(x)` consumers move to `x`.
    BufferElision,
    /// Back-to-back XOR/XNOR key gates collapse onto a single data-path
    /// gate; chains whose side operands coincide cancel outright.
    RunOfGates,
    /// Drop logic gates whose output drives nothing.
    DeadGates,
    /// Canonicalize XOR+NOT into XNOR (and back out of double negation).
    NotAbsorption,
}

impl Pass {
    pub fn name(self) -> &'static str {
        match self {
            Pass::ConstProp => "const-prop",
            Pass::DoubleInverter => "double-inverter",
            Pass::BufferElision => "buffer-elision",
            Pass::RunOfGates => "run-of-gates",
            Pass::DeadGates => "dead-gates",
            Pass::NotAbsorption => "not-absorption",
        }
    }

    /// Every pass, in the default application order.
    pub fn all() -> [Pass; 6] {
        [
            Pass::ConstProp,
            Pass::DoubleInverter,
            Pass::BufferElision,
            Pass::RunOfGates,
            Pass::DeadGates,
            Pass::NotAbsorption,
        ]
    }
}

impl FromStr for Pass {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Pass::all().into_iter().find(|p| p.name() == s).ok_or(())
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Apply the given passes in order, repeatedly, until a full round changes
/// nothing. Gate count never increases.
pub fn optimize(netlist: &Netlist, passes: &[Pass]) -> Netlist {
    let mut n = netlist.clone();
    loop {
        let mut changed = false;
        for &pass in passes {
            changed |= match pass {
                Pass::ConstProp => const_prop(&mut n),
                Pass::DoubleInverter => double_inverter(&mut n),
                Pass::BufferElision => buffer_elision(&mut n),
                Pass::RunOfGates => run_of_gates(&mut n),
                Pass::DeadGates => dead_gates(&mut n),
                Pass::NotAbsorption => not_absorption(&mut n),
            };
        }
        if !changed {
            return n;
        }
    }
}

// ----------------------------------------------------------------------
// Constant folding
// ----------------------------------------------------------------------

/// Fold the netlist under the given constant bindings (typically key inputs
/// being hard-coded). Gates whose value becomes known are removed and their
/// consumers simplified. With `algebraic` set, identities over repeated
/// operands (idempotence, XOR self-cancellation) and buffer aliasing fold
/// too; key application keeps those off so it only performs rewrites the
/// key forces. Returns `Err(gate)` if a constant wire ends up driving a
/// primary output or a flip-flop, since the gate vocabulary cannot express
/// that.
pub fn fold_constants(
    netlist: &mut Netlist,
    bindings: BTreeMap<GateId, bool>,
    algebraic: bool,
) -> Result<(), GateId> {
    let order = match netlist.topo_order() {
        Ok(o) => o,
        Err(_) => return Ok(()), // cyclic graphs are left to validate()
    };
    let len = netlist.raw_len();
    let mut cval: Vec<Option<bool>> = vec![None; len];
    let mut alias: Vec<Option<GateId>> = vec![None; len];
    for (id, b) in bindings {
        cval[id.index()] = Some(b);
    }
    let resolve = |alias: &[Option<GateId>], mut id: GateId| -> GateId {
        while let Some(next) = alias[id.index()] {
            id = next;
        }
        id
    };

    for &id in &order {
        let g = netlist.gate(id);
        if g.gtype.is_source() || g.gtype == GateType::Ff {
            continue;
        }
        // key-gate structure is opaque to algebraic rewriting: extraction
        // requires every key input to keep feeding exactly one XOR/XNOR
        if algebraic
            && g.fanin
                .iter()
                .any(|&p| netlist.gate(p).gtype == GateType::KeyInput)
        {
            continue;
        }
        let gtype = g.gtype;
        let fanin = g.fanin.clone();
        // Resolve pins: constants fold into `parity`/`fixed`, signals remain.
        let mut signals: Vec<GateId> = Vec::with_capacity(fanin.len());
        let mut consts: Vec<bool> = Vec::new();
        for src in fanin {
            let r = resolve(&alias, src);
            match cval[r.index()] {
                Some(b) => consts.push(b),
                None => signals.push(r),
            }
        }
        use GateType::*;
        enum Fold {
            Const(bool),
            Alias(GateId),
            Unary(GateType, GateId), // NOT or BUF of a signal
            Nary(GateType, Vec<GateId>),
        }
        let fold = match gtype {
            Not => match (consts.first(), signals.first()) {
                (Some(&c), _) => Fold::Const(!c),
                (None, Some(&s)) => Fold::Unary(Not, s),
                _ => continue,
            },
            Buf => match (consts.first(), signals.first()) {
                (Some(&c), _) => Fold::Const(c),
                (None, Some(&s)) if algebraic => Fold::Alias(s),
                _ => continue,
            },
            And | Nand | Or | Nor => {
                let (neutral, absorbing, negated) = match gtype {
                    And => (true, false, false),
                    Nand => (true, false, true),
                    Or => (false, true, false),
                    _ => (false, true, true),
                };
                if consts.contains(&absorbing) {
                    Fold::Const(absorbing ^ negated)
                } else if !algebraic && consts.is_empty() {
                    continue;
                } else {
                    // idempotence: X op X = X
                    let mut seen: Vec<GateId> = Vec::with_capacity(signals.len());
                    for s in signals {
                        if algebraic && seen.contains(&s) {
                            continue;
                        }
                        seen.push(s);
                    }
                    match (seen.len(), negated) {
                        (0, _) => Fold::Const(neutral ^ negated),
                        (1, false) => Fold::Alias(seen[0]),
                        (1, true) => Fold::Unary(Not, seen[0]),
                        _ => Fold::Nary(gtype, seen),
                    }
                }
            }
            Xor | Xnor => {
                if !algebraic && consts.is_empty() {
                    continue;
                }
                let mut parity = gtype == Xnor;
                for &c in &consts {
                    parity ^= c;
                }
                // self-cancellation: pairs of equal operands drop
                let mut odd: Vec<GateId> = Vec::with_capacity(signals.len());
                for s in signals {
                    if algebraic {
                        if let Some(pos) = odd.iter().position(|&x| x == s) {
                            odd.remove(pos);
                            continue;
                        }
                    }
                    odd.push(s);
                }
                match (odd.len(), parity) {
                    (0, p) => Fold::Const(p),
                    (1, false) => Fold::Alias(odd[0]),
                    (1, true) => Fold::Unary(Not, odd[0]),
                    (_, p) => Fold::Nary(if p { Xnor } else { Xor }, odd),
                }
            }
            Input | KeyInput | Ff | Output => continue,
        };
        match fold {
            Fold::Const(b) => {
                cval[id.index()] = Some(b);
                netlist.replace_fanins(id, &[]);
            }
            Fold::Alias(s) => {
                alias[id.index()] = Some(s);
                netlist.replace_fanins(id, &[]);
            }
            Fold::Unary(t, s) => {
                netlist.set_type(id, t);
                netlist.replace_fanins(id, &[s]);
            }
            Fold::Nary(t, signals) => {
                netlist.set_type(id, t);
                netlist.replace_fanins(id, &signals);
            }
        }
    }

    // Constants must not surface at the interface or feed a gate that was
    // left unfolded (there is no constant driver in the vocabulary).
    for &po in &netlist.primary_outputs {
        if cval[resolve(&alias, po).index()].is_some() {
            return Err(po);
        }
    }
    for &ff in &netlist.flipflops {
        let d = netlist.gate(ff).fanin[0];
        if cval[resolve(&alias, d).index()].is_some() {
            return Err(ff);
        }
    }
    for i in 0..len {
        if cval[i].is_some() && netlist.is_live(GateId(i as u32)) {
            for &c in &netlist.gate(GateId(i as u32)).fanout {
                if cval[c.index()].is_none() && alias[c.index()].is_none() {
                    return Err(c);
                }
            }
        }
    }

    // Re-point consumers of aliased gates, then drop folded gates.
    for i in 0..len {
        if alias[i].is_some() {
            let id = GateId(i as u32);
            let target = resolve(&alias, id);
            netlist.rewire_consumers(id, target);
        }
    }
    for &ff in &netlist.flipflops.clone() {
        let d = netlist.gate(ff).fanin[0];
        let r = resolve(&alias, d);
        if r != d {
            netlist.set_fanin(ff, 0, r);
        }
    }
    for i in 0..len {
        let id = GateId(i as u32);
        if (alias[i].is_some() || cval[i].is_some())
            && netlist.is_live(id)
            && !netlist.gate(id).gtype.is_source()
        {
            // Folded gates may still feed other folded gates; consumers of
            // constants were simplified above, so remaining fanout entries
            // point at gates that are themselves being dropped.
            let consumers = netlist.gate(id).fanout.clone();
            for c in consumers {
                debug_assert!(alias[c.index()].is_some() || cval[c.index()].is_some());
                netlist.gate_mut(id).fanout.retain(|&x| x != c);
            }
            netlist.remove_gate(id);
        }
    }
    Ok(())
}

fn const_prop(n: &mut Netlist) -> bool {
    let before = n.gate_count();
    let mut folded = n.clone();
    if fold_constants(&mut folded, BTreeMap::new(), true).is_ok() {
        let changed = folded.gate_count() != before || !folded.isomorphic(n);
        if changed {
            *n = folded;
        }
        changed
    } else {
        // a structural constant reached the interface; leave the netlist be
        false
    }
}

fn double_inverter(n: &mut Netlist) -> bool {
    let mut changed = false;
    for id in n.gates().map(|g| g.id).collect::<Vec<_>>() {
        if !n.is_live(id) || n.gate(id).gtype != GateType::Not {
            continue;
        }
        let inner = n.gate(id).fanin[0];
        if n.gate(inner).gtype != GateType::Not {
            continue;
        }
        let src = n.gate(inner).fanin[0];
        n.rewire_consumers(id, src);
        n.remove_gate(id);
        if n.gate(inner).fanout.is_empty() && !n.primary_outputs.contains(&inner) {
            n.remove_gate(inner);
        }
        changed = true;
    }
    changed
}

fn buffer_elision(n: &mut Netlist) -> bool {
    let mut changed = false;
    for id in n.gates().map(|g| g.id).collect::<Vec<_>>() {
        if !n.is_live(id) || n.gate(id).gtype != GateType::Buf {
            continue;
        }
        let src = n.gate(id).fanin[0];
        n.rewire_consumers(id, src);
        n.remove_gate(id);
        changed = true;
    }
    changed
}

/// The gate fed by exactly one key input, with that key on some pin.
/// Returns `(key_pin, data_pin)` when `id` is a two-input XOR/XNOR key gate.
fn key_gate_pins(n: &Netlist, id: GateId) -> Option<(usize, usize)> {
    let g = n.gate(id);
    if !matches!(g.gtype, GateType::Xor | GateType::Xnor) || g.fanin.len() != 2 {
        return None;
    }
    let key0 = n.gate(g.fanin[0]).gtype == GateType::KeyInput;
    let key1 = n.gate(g.fanin[1]).gtype == GateType::KeyInput;
    match (key0, key1) {
        (true, false) => Some((0, 1)),
        (false, true) => Some((1, 0)),
        _ => None,
    }
}

fn run_of_gates(n: &mut Netlist) -> bool {
    let mut changed = false;
    'outer: loop {
        for id in n.gates().map(|g| g.id).collect::<Vec<_>>() {
            if !n.is_live(id) {
                continue;
            }
            // Key-gate run: u and v are both key gates, u single-fanout on
            // v's data pin. The pair becomes one data-path XOR plus a side
            // combiner over the two key inputs; the combined structure no
            // longer depends on which of the four key pairs produced it.
            if let Some((vk, vd)) = key_gate_pins(n, id) {
                let u = n.gate(id).fanin[vd];
                if let Some((uk, ud)) = key_gate_pins(n, u) {
                    if n.gate(u).fanout == [id] {
                        let parity = (n.gate(id).gtype == GateType::Xnor)
                            ^ (n.gate(u).gtype == GateType::Xnor);
                        let a = n.gate(u).fanin[uk];
                        let b = n.gate(id).fanin[vk];
                        let x = n.gate(u).fanin[ud];
                        n.set_type(
                            u,
                            if parity {
                                GateType::Xnor
                            } else {
                                GateType::Xor
                            },
                        );
                        n.replace_fanins(u, &[a, b]);
                        n.set_type(id, GateType::Xor);
                        n.replace_fanins(id, &[u, x]);
                        changed = true;
                        continue 'outer;
                    }
                }
            }
            // Same-operand cancellation: v = OP2(u, b) with u = OP1(x, b)
            // single-fanout collapses to x (or NOT x, by parity).
            let g = n.gate(id);
            if matches!(g.gtype, GateType::Xor | GateType::Xnor) && g.fanin.len() == 2 {
                for pin in 0..2 {
                    let u = n.gate(id).fanin[pin];
                    let b = n.gate(id).fanin[1 - pin];
                    let gu = n.gate(u);
                    if !matches!(gu.gtype, GateType::Xor | GateType::Xnor)
                        || gu.fanin.len() != 2
                        || gu.fanout != [id]
                        || u == b
                        || gu
                            .fanin
                            .iter()
                            .any(|&p| n.gate(p).gtype == GateType::KeyInput)
                    {
                        continue;
                    }
                    let Some(shared) = gu.fanin.iter().position(|&w| w == b) else {
                        continue;
                    };
                    let x = gu.fanin[1 - shared];
                    let parity =
                        (n.gate(id).gtype == GateType::Xnor) ^ (gu.gtype == GateType::Xnor);
                    if parity {
                        n.set_type(id, GateType::Not);
                        n.replace_fanins(id, &[x]);
                    } else {
                        // rewire repoints consumers and any output entries
                        n.rewire_consumers(id, x);
                        n.replace_fanins(id, &[]);
                        n.remove_gate(id);
                    }
                    if n.is_live(u)
                        && n.gate(u).fanout.is_empty()
                        && !n.primary_outputs.contains(&u)
                    {
                        n.remove_gate(u);
                    }
                    changed = true;
                    continue 'outer;
                }
            }
        }
        return changed;
    }
}

fn dead_gates(n: &mut Netlist) -> bool {
    let mut changed = false;
    loop {
        let dead: Vec<GateId> = n
            .gates()
            .filter(|g| {
                g.gtype.is_logic()
                    && g.fanout.is_empty()
                    && !n.primary_outputs.contains(&g.id)
                    // key gates stay: their key input must keep its consumer
                    && !g.fanin.iter().any(|&p| n.gate(p).gtype == GateType::KeyInput)
            })
            .map(|g| g.id)
            .collect();
        if dead.is_empty() {
            return changed;
        }
        for id in dead {
            n.remove_gate(id);
        }
        changed = true;
    }
}

fn not_absorption(n: &mut Netlist) -> bool {
    let mut changed = false;
    'outer: loop {
        for id in n.gates().map(|g| g.id).collect::<Vec<_>>() {
            if !n.is_live(id) {
                continue;
            }
            let g = n.gate(id);
            // NOT over an XOR/XNOR it solely consumes: flip the gate.
            if g.gtype == GateType::Not {
                let inner = g.fanin[0];
                let gi = n.gate(inner);
                if matches!(gi.gtype, GateType::Xor | GateType::Xnor)
                    && gi.fanout == [id]
                    && !n.primary_outputs.contains(&inner)
                {
                    let flipped = if gi.gtype == GateType::Xor {
                        GateType::Xnor
                    } else {
                        GateType::Xor
                    };
                    n.set_type(inner, flipped);
                    n.rewire_consumers(id, inner);
                    n.remove_gate(id);
                    changed = true;
                    continue 'outer;
                }
            }
            // XOR/XNOR with a single-fanout NOT on one pin: absorb it.
            if matches!(g.gtype, GateType::Xor | GateType::Xnor) {
                for pin in 0..g.fanin.len() {
                    let h = n.gate(id).fanin[pin];
                    let gh = n.gate(h);
                    if gh.gtype == GateType::Not
                        && gh.fanout == [id]
                        && !n.primary_outputs.contains(&h)
                    {
                        let src = gh.fanin[0];
                        let flipped = if n.gate(id).gtype == GateType::Xor {
                            GateType::Xnor
                        } else {
                            GateType::Xor
                        };
                        n.set_type(id, flipped);
                        n.set_fanin(id, pin, src);
                        n.remove_gate(h);
                        changed = true;
                        continue 'outer;
                    }
                }
            }
        }
        return changed;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{equiv_check, EquivMode, EquivOutcome};
    use crate::netlist::{GateType, Netlist};

    fn exhaustive_equiv(a: &Netlist, b: &Netlist) -> bool {
        matches!(
            equiv_check(a, b, EquivMode::Exhaustive).unwrap(),
            EquivOutcome::Equivalent
        )
    }

    #[test]
    fn ternary_and_becomes_left_leaning_tree() {
        let mut n = Netlist::new();
        let a = n.add_input("a");
        let b = n.add_input("b");
        let c = n.add_input("c");
        let z = n.add_named_gate("z", GateType::And, &[a, b, c]);
        n.mark_output(z);
        let g = to_generic(&n).unwrap();
        assert!(g.gates().all(|gt| gt.fanin.len() <= 2));
        assert_eq!(g.logic_gate_count(), 2);
        // root keeps its consumers and id; inner gate is AND(a, b)
        let root = g.gate(z);
        assert_eq!(root.gtype, GateType::And);
        let inner = g.gate(root.fanin[0]);
        assert_eq!(
            (inner.gtype, &inner.fanin[..]),
            (GateType::And, &[a, b][..])
        );
        assert_eq!(root.fanin[1], c);
        assert!(exhaustive_equiv(&n, &g));
    }

    #[test]
    fn binary_netlist_is_unchanged() {
        let mut n = Netlist::new();
        let a = n.add_input("a");
        let b = n.add_input("b");
        let z = n.add_gate(GateType::Nor, &[a, b]);
        n.mark_output(z);
        let g = to_generic(&n).unwrap();
        assert!(n.isomorphic(&g));
    }

    #[test]
    fn fig4_style_xor3_decomposes_to_two_xors_and_stays_equivalent() {
        // S = A xor B xor Cin, exhaustively checked over all 8 assignments.
        let mut n = Netlist::new();
        let a = n.add_input("A");
        let b = n.add_input("B");
        let cin = n.add_input("Cin");
        let s = n.add_named_gate("S", GateType::Xor, &[a, b, cin]);
        n.mark_output(s);
        let g = to_generic(&n).unwrap();
        assert_eq!(g.logic_gate_count(), 2);
        assert!(g.gates().filter(|x| x.gtype == GateType::Xor).count() == 2);
        assert!(exhaustive_equiv(&n, &g));
    }

    #[test]
    fn nary_nand_keeps_negation_at_root() {
        let mut n = Netlist::new();
        let ins: Vec<_> = (0..4)
            .map(|i| n.add_input(&alloc::format!("i{i}")))
            .collect();
        let z = n.add_gate(GateType::Nand, &ins);
        n.mark_output(z);
        let g = to_generic(&n).unwrap();
        assert!(exhaustive_equiv(&n, &g));
        assert_eq!(g.gates().filter(|x| x.gtype == GateType::Nand).count(), 1);
    }

    #[test]
    fn double_inverter_folds_to_wire() {
        let mut n = Netlist::new();
        let x = n.add_input("x");
        let a = n.add_gate(GateType::Not, &[x]);
        let b = n.add_gate(GateType::Not, &[a]);
        n.mark_output(b);
        let o = optimize(&n, &Pass::all());
        assert_eq!(o.primary_outputs, alloc::vec![x]);
        assert_eq!(o.logic_gate_count(), 0);
        assert!(exhaustive_equiv(&n, &o));
    }

    #[test]
    fn xnor_chain_with_shared_operand_cancels_by_parity() {
        // even parity: XNOR(XNOR(x, a), a) is the wire x
        let mut n = Netlist::new();
        let x = n.add_input("x");
        let a = n.add_input("a");
        let u = n.add_gate(GateType::Xnor, &[x, a]);
        let v = n.add_gate(GateType::Xnor, &[u, a]);
        n.mark_output(v);
        let o = optimize(&n, &[Pass::RunOfGates, Pass::DeadGates]);
        assert_eq!(o.primary_outputs, alloc::vec![x]);
        assert!(exhaustive_equiv(&n, &o));

        // odd parity: XOR(XNOR(x, a), a) is NOT x
        let mut m = Netlist::new();
        let x = m.add_input("x");
        let a = m.add_input("a");
        let u = m.add_gate(GateType::Xnor, &[x, a]);
        let v = m.add_gate(GateType::Xor, &[u, a]);
        m.mark_output(v);
        let o = optimize(&m, &[Pass::RunOfGates, Pass::DeadGates]);
        assert_eq!(o.logic_gate_count(), 1);
        assert_eq!(o.gate(o.primary_outputs[0]).gtype, GateType::Not);
        assert!(exhaustive_equiv(&m, &o));
    }

    #[test]
    fn key_gate_run_collapses_to_single_data_path_gate() {
        // two stacked key gates; 00-style (XOR,XOR) and 11-style (XNOR,XNOR)
        // collapse to the identical structure
        let build = |t: GateType| {
            let mut n = Netlist::new();
            let w = n.add_input("w");
            let k0 = n.add_key_input();
            let k1 = n.add_key_input();
            let u = n.add_gate(t, &[k0, w]);
            let v = n.add_gate(t, &[k1, u]);
            n.mark_output(v);
            n
        };
        let n00 = build(GateType::Xor);
        let n11 = build(GateType::Xnor);
        let o00 = optimize(&n00, &[Pass::RunOfGates]);
        let o11 = optimize(&n11, &[Pass::RunOfGates]);
        assert!(
            o00.isomorphic(&o11),
            "collapsed runs are structurally identical"
        );
        assert!(exhaustive_equiv(&n00, &o00));
        assert!(exhaustive_equiv(&n11, &o11));
        // single gate on the data path: the output XOR reads the side gate
        let out = o00.gate(o00.primary_outputs[0]);
        assert_eq!(out.gtype, GateType::Xor);
        let side = o00.gate(out.fanin[0]);
        assert_eq!(side.gtype, GateType::Xor);
        assert!(side
            .fanin
            .iter()
            .all(|&p| o00.gate(p).gtype == GateType::KeyInput));
    }

    #[test]
    fn not_absorption_canonicalizes_xor_not_to_xnor() {
        let mut n = Netlist::new();
        let a = n.add_input("a");
        let b = n.add_input("b");
        let x = n.add_gate(GateType::Xor, &[a, b]);
        let z = n.add_gate(GateType::Not, &[x]);
        n.mark_output(z);
        let o = optimize(&n, &[Pass::NotAbsorption]);
        assert_eq!(o.logic_gate_count(), 1);
        assert_eq!(o.gate(o.primary_outputs[0]).gtype, GateType::Xnor);
        assert!(exhaustive_equiv(&n, &o));

        // and the input-side variant
        let mut m = Netlist::new();
        let a = m.add_input("a");
        let b = m.add_input("b");
        let na = m.add_gate(GateType::Not, &[a]);
        let z = m.add_gate(GateType::Xor, &[na, b]);
        m.mark_output(z);
        let o = optimize(&m, &[Pass::NotAbsorption]);
        assert_eq!(o.logic_gate_count(), 1);
        assert_eq!(o.gate(o.primary_outputs[0]).gtype, GateType::Xnor);
        assert!(exhaustive_equiv(&m, &o));
    }

    #[test]
    fn const_prop_folds_xor_self_cancellation() {
        // z = AND(XOR(x, x), y) -> constant 0 absorbed by AND -> ... the AND
        // itself becomes constant, so it must NOT fold (it drives an output);
        // wrap it so the constant disappears internally instead.
        let mut n = Netlist::new();
        let x = n.add_input("x");
        let y = n.add_input("y");
        let t = n.add_gate(GateType::Xor, &[x, x]);
        let z = n.add_gate(GateType::Or, &[t, y]);
        n.mark_output(z);
        let o = optimize(&n, &Pass::all());
        assert_eq!(o.primary_outputs, alloc::vec![y], "OR(0, y) is the wire y");
        assert!(exhaustive_equiv(&n, &o));
    }

    #[test]
    fn const_prop_leaves_interface_constants_alone() {
        let mut n = Netlist::new();
        let x = n.add_input("x");
        let t = n.add_gate(GateType::Xor, &[x, x]);
        n.mark_output(t);
        let o = optimize(&n, &Pass::all());
        // constant would surface at the output: netlist must be unchanged
        assert!(o.isomorphic(&n));
    }

    #[test]
    fn optimize_is_idempotent_and_never_grows() {
        let n = crate::randgen::random_netlist(&crate::randgen::RandNetlistParams::small(), 42);
        let o1 = optimize(&n, &Pass::all());
        let o2 = optimize(&o1, &Pass::all());
        assert!(o1.isomorphic(&o2));
        assert!(o1.logic_gate_count() <= n.logic_gate_count());
    }

    #[test]
    fn every_pass_preserves_equivalence_on_random_netlists() {
        for seed in 0..20u64 {
            let n =
                crate::randgen::random_netlist(&crate::randgen::RandNetlistParams::small(), seed);
            let o = optimize(&n, &Pass::all());
            assert!(
                exhaustive_equiv(&n, &o),
                "optimize changed behavior for seed {seed}"
            );
            assert!(o.logic_gate_count() <= n.logic_gate_count());
        }
    }

    #[test]
    fn pass_names_round_trip() {
        for p in Pass::all() {
            assert_eq!(p.name().parse::<Pass>().unwrap(), p);
        }
        assert!("nonsense".parse::<Pass>().is_err());
    }
}
