//! Key-gate insertion: random XOR/XNOR locking, the deliberately
//! key-uncorrelated control scheme, seeded key generation and relocking.
//!
//! The standard scheme binds an XOR gate to key bit 0 and an XNOR gate to
//! key bit 1, so the inserted gate buffers its data input under the correct
//! key. The `Unbiased` control scheme picks the gate type at random
//! regardless of the key bit; it is functionally incorrect on purpose and
//! exists to probe what a learner can extract when the inserted change
//! carries no key information.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::netlist::{GateId, GateType, Key, Netlist};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Epic,
    Unbiased,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Epic => "epic",
            Scheme::Unbiased => "unbiased",
        })
    }
}

/// Everything needed to reproduce or score one locking run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockRecord {
    pub scheme: Scheme,
    pub seed: u64,
    pub key: Key,
    /// Inserted key gates; index `i` corresponds to `keyinput(first_key_index + i)`.
    pub key_gate_ids: Vec<GateId>,
    /// Key-input index of this record's first bit (0 for a fresh lock,
    /// the previous key length for a relock).
    pub first_key_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LockError {
    NotEnoughLocations { candidates: usize, needed: usize },
    EmptyKey,
}

impl fmt::Display for LockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LockError::NotEnoughLocations { candidates, needed } => {
                write!(
                    f,
                    "only {candidates} candidate wires for {needed} key gates"
                )
            }
            LockError::EmptyKey => f.write_str("key must have at least one bit"),
        }
    }
}

impl core::error::Error for LockError {}

/// Uniform random key, reproducible per seed.
pub fn keygen(length: usize, seed: u64) -> Key {
    let mut rng = seed::rng(seed);
    Key::from_bits((0..length).map(|_| rng.gen()).collect())
}

/// A gate is an existing key gate if any pin reads a key input.
fn is_key_gate(n: &Netlist, id: GateId) -> bool {
    n.gate(id)
        .fanin
        .iter()
        .any(|&s| n.gate(s).gtype == GateType::KeyInput)
}

/// Candidate wires: primary inputs and logic-gate outputs, in id order.
/// Existing key-gate outputs are excluded unless `allow_key_wires`.
fn candidates(n: &Netlist, allow_key_wires: bool) -> Vec<GateId> {
    n.gates()
        .filter(|g| g.gtype == GateType::Input || g.gtype.is_logic())
        .filter(|g| allow_key_wires || !is_key_gate(n, g.id))
        .map(|g| g.id)
        .collect()
}

fn insert_key_gates(
    netlist: &Netlist,
    scheme: Scheme,
    key: &Key,
    lock_seed: u64,
    allow_key_wires: bool,
) -> Result<(Netlist, LockRecord), LockError> {
    if key.is_empty() {
        return Err(LockError::EmptyKey);
    }
    let mut n = netlist.clone();
    let mut rng = seed::rng(lock_seed);
    let cands = candidates(&n, allow_key_wires);
    if cands.len() < key.len() {
        return Err(LockError::NotEnoughLocations {
            candidates: cands.len(),
            needed: key.len(),
        });
    }
    // Locations are drawn before any gate-type randomness so the choice of
    // wires depends only on the seed, never on the key.
    let picks = rand::seq::index::sample(&mut rng, cands.len(), key.len());
    let first_key_index = n.key_inputs.len();
    let mut key_gate_ids = Vec::with_capacity(key.len());
    for (i, pick) in picks.iter().enumerate() {
        let wire = cands[pick];
        let gtype = match scheme {
            Scheme::Epic => {
                if key.bit(i) {
                    GateType::Xnor
                } else {
                    GateType::Xor
                }
            }
            Scheme::Unbiased => {
                if rng.gen::<bool>() {
                    GateType::Xnor
                } else {
                    GateType::Xor
                }
            }
        };
        let consumers = n.gate(wire).fanout.clone();
        let key_in = n.add_key_input();
        // key input on pin 0, data wire on pin 1
        let kg = n.add_gate(gtype, &[key_in, wire]);
        for c in consumers {
            let pins: Vec<usize> = n
                .gate(c)
                .fanin
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p == wire)
                .map(|(i, _)| i)
                .collect();
            for pin in pins {
                n.set_fanin(c, pin, kg);
            }
        }
        for po in n.primary_outputs.iter_mut() {
            if *po == wire {
                *po = kg;
            }
        }
        key_gate_ids.push(kg);
    }
    let record = LockRecord {
        scheme,
        seed: lock_seed,
        key: key.clone(),
        key_gate_ids,
        first_key_index,
    };
    Ok((n, record))
}

/// Lock with random XOR/XNOR insertion: XOR on key bit 0, XNOR on key bit 1.
/// The result is equivalent to the original once the correct key is applied.
pub fn lock_epic(
    netlist: &Netlist,
    key: &Key,
    seed: u64,
) -> Result<(Netlist, LockRecord), LockError> {
    insert_key_gates(netlist, Scheme::Epic, key, seed, false)
}

/// Same location policy, but the gate type is drawn uniformly at random
/// independent of the key bit. Deliberately not functionally correct.
pub fn lock_unbiased(
    netlist: &Netlist,
    key: &Key,
    seed: u64,
) -> Result<(Netlist, LockRecord), LockError> {
    insert_key_gates(netlist, Scheme::Unbiased, key, seed, false)
}

/// Lock with an explicit scheme tag.
pub fn lock(
    netlist: &Netlist,
    scheme: Scheme,
    key: &Key,
    seed: u64,
) -> Result<(Netlist, LockRecord), LockError> {
    insert_key_gates(netlist, scheme, key, seed, false)
}

/// Add `key2.len()` additional key gates to an already locked netlist,
/// continuing the key-input numbering. Existing key gates stay untouched but
/// their output wires are fair game, so runs of key gates can occur. The
/// relock uses the scheme recorded for the original lock.
pub fn relock(
    locked: &Netlist,
    record: &LockRecord,
    key2: &Key,
    seed: u64,
) -> Result<(Netlist, LockRecord), LockError> {
    insert_key_gates(locked, record.scheme, key2, seed, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{equiv_check, EquivMode, EquivOutcome};
    use crate::randgen::{random_netlist, RandNetlistParams};

    fn one_wire() -> Netlist {
        let mut n = Netlist::new();
        let a = n.add_input("a");
        let b = n.add_input("b");
        let z = n.add_gate(GateType::And, &[a, b]);
        n.mark_output(z);
        n
    }

    #[test]
    fn keygen_is_deterministic_per_seed() {
        assert_eq!(keygen(4, 9), keygen(4, 9));
        assert_ne!(keygen(64, 9), keygen(64, 10));
    }

    #[test]
    fn keygen_bits_are_roughly_balanced() {
        let trials = 10_000;
        let k = 64;
        let mut ones = alloc::vec![0usize; k];
        for s in 0..trials {
            let key = keygen(k, s as u64);
            for (i, o) in ones.iter_mut().enumerate() {
                *o += key.bit(i) as usize;
            }
        }
        for (i, &o) in ones.iter().enumerate() {
            let f = o as f64 / trials as f64;
            assert!((0.45..=0.55).contains(&f), "bit {i} frequency {f}");
        }
    }

    #[test]
    fn epic_bit0_inserts_xor_and_correct_key_unlocks() {
        let n = one_wire();
        let key = Key::from_str_bits("0").unwrap();
        let (locked, rec) = lock_epic(&n, &key, 5).unwrap();
        assert_eq!(locked.gate(rec.key_gate_ids[0]).gtype, GateType::Xor);
        let unlocked = locked.apply_key(&key).unwrap();
        assert!(unlocked.key_inputs.is_empty());
        assert!(equiv_check(&n, &unlocked, EquivMode::Exhaustive)
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn epic_bit1_inserts_xnor_and_correct_key_unlocks() {
        let n = one_wire();
        let key = Key::from_str_bits("1").unwrap();
        let (locked, rec) = lock_epic(&n, &key, 5).unwrap();
        assert_eq!(locked.gate(rec.key_gate_ids[0]).gtype, GateType::Xnor);
        let unlocked = locked.apply_key(&key).unwrap();
        assert!(equiv_check(&n, &unlocked, EquivMode::Exhaustive)
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn key_gates_read_key_on_pin0_and_data_on_pin1() {
        let n = one_wire();
        let (locked, rec) = lock_epic(&n, &keygen(2, 1), 3).unwrap();
        for (i, &kg) in rec.key_gate_ids.iter().enumerate() {
            let g = locked.gate(kg);
            assert_eq!(locked.gate(g.fanin[0]).gtype, GateType::KeyInput);
            assert_eq!(g.fanin[0], locked.key_inputs[i]);
            assert_ne!(locked.gate(g.fanin[1]).gtype, GateType::KeyInput);
        }
    }

    #[test]
    fn midsize_lock_unlocks_and_wrong_key_is_caught() {
        let n = random_netlist(&RandNetlistParams::medium(), 77);
        let key = keygen(64, 123);
        let (locked, _) = lock_epic(&n, &key, 42).unwrap();
        assert_eq!(locked.key_inputs.len(), 64);
        assert!(locked.validate().is_empty());

        let unlocked = locked.apply_key(&key).unwrap();
        assert_eq!(unlocked.key_inputs.len(), 0);
        let mode = EquivMode::Random {
            vectors: 10_000,
            seed: 9,
        };
        assert!(equiv_check(&n, &unlocked, mode).unwrap().is_equivalent());

        let wrong = key.with_flipped(17);
        let bad = locked.apply_key(&wrong).unwrap();
        let out = equiv_check(&n, &bad, mode).unwrap();
        assert!(
            matches!(out, EquivOutcome::Counterexample(_)),
            "wrong key must be detectable"
        );
    }

    #[test]
    fn not_enough_locations_is_an_error() {
        let n = one_wire(); // 3 candidate wires: a, b, z
        let err = lock_epic(&n, &keygen(10, 0), 0).unwrap_err();
        assert_eq!(
            err,
            LockError::NotEnoughLocations {
                candidates: 3,
                needed: 10
            }
        );
    }

    #[test]
    fn location_choice_is_key_independent_for_both_schemes() {
        let n = random_netlist(&RandNetlistParams::small(), 8);
        let k1 = Key::from_bits(alloc::vec![false; 8]);
        let k2 = Key::from_bits(alloc::vec![true; 8]);
        for scheme in [Scheme::Epic, Scheme::Unbiased] {
            let (a, ra) = insert_key_gates(&n, scheme, &k1, 31, false).unwrap();
            let (b, rb) = insert_key_gates(&n, scheme, &k2, 31, false).unwrap();
            let wires = |m: &Netlist, r: &LockRecord| -> Vec<GateId> {
                r.key_gate_ids
                    .iter()
                    .map(|&kg| m.gate(kg).fanin[1])
                    .collect()
            };
            assert_eq!(
                wires(&a, &ra),
                wires(&b, &rb),
                "{scheme}: wires depend on key"
            );
        }
    }

    #[test]
    fn unbiased_gate_type_ignores_key() {
        let n = random_netlist(&RandNetlistParams::small(), 8);
        let zeros = Key::from_bits(alloc::vec![false; 8]);
        let ones = Key::from_bits(alloc::vec![true; 8]);
        let (a, _) = lock_unbiased(&n, &zeros, 55).unwrap();
        let (b, _) = lock_unbiased(&n, &ones, 55).unwrap();
        assert!(
            a.isomorphic(&b),
            "all-zero and all-one keys give the same structure"
        );
    }

    #[test]
    fn unbiased_type_is_statistically_independent_of_bit() {
        let n = random_netlist(&RandNetlistParams::medium(), 4);
        let mut xor_given_0 = 0usize;
        let mut n0 = 0usize;
        let mut total = 0usize;
        let mut s = 0u64;
        while total < 10_000 {
            let key = keygen(50, seed::derive(99, &[s, 0]));
            let (locked, rec) = lock_unbiased(&n, &key, seed::derive(99, &[s, 1])).unwrap();
            for (i, &kg) in rec.key_gate_ids.iter().enumerate() {
                let is_xor = locked.gate(kg).gtype == GateType::Xor;
                if !key.bit(i) {
                    n0 += 1;
                    xor_given_0 += is_xor as usize;
                }
                total += 1;
            }
            s += 1;
        }
        let p = xor_given_0 as f64 / n0 as f64;
        assert!((0.45..=0.55).contains(&p), "P(XOR | bit=0) = {p}");
    }

    #[test]
    fn unbiased_mismatch_produces_a_counterexample() {
        // find a seed where bit=1 received an XOR: the correct key then
        // inverts the wire, which must be observable
        let n = one_wire();
        let key = Key::from_str_bits("1").unwrap();
        let mut found = false;
        for s in 0..64 {
            let (locked, rec) = lock_unbiased(&n, &key, s).unwrap();
            if locked.gate(rec.key_gate_ids[0]).gtype == GateType::Xor {
                let bad = locked.apply_key(&key).unwrap();
                let out = equiv_check(&n, &bad, EquivMode::Exhaustive).unwrap();
                assert!(matches!(out, EquivOutcome::Counterexample(_)));
                found = true;
                break;
            }
        }
        assert!(
            found,
            "no XOR-on-bit-1 draw in 64 seeds is essentially impossible"
        );
    }

    #[test]
    fn relock_of_unlocked_netlist_matches_fresh_lock() {
        let n = random_netlist(&RandNetlistParams::small(), 2);
        let key = keygen(4, 7);
        let empty = LockRecord {
            scheme: Scheme::Epic,
            seed: 0,
            key: Key::from_bits(alloc::vec![]),
            key_gate_ids: alloc::vec![],
            first_key_index: 0,
        };
        let (a, _) = relock(&n, &empty, &key, 13).unwrap();
        let (b, _) = lock_epic(&n, &key, 13).unwrap();
        assert!(a.isomorphic(&b));
    }

    #[test]
    fn relock_extends_key_inputs_and_both_keys_unlock() {
        let n = random_netlist(&RandNetlistParams::medium(), 21);
        let k1 = keygen(64, 1);
        let (locked, rec1) = lock_epic(&n, &k1, 100).unwrap();
        let k2 = keygen(64, 2);
        let (relocked, rec2) = relock(&locked, &rec1, &k2, 200).unwrap();
        assert_eq!(relocked.key_inputs.len(), 128);
        assert_eq!(rec1.first_key_index, 0);
        assert_eq!(rec2.first_key_index, 64);
        assert_eq!(rec2.key_gate_ids.len(), 64);
        // original key gates untouched
        for &kg in &rec1.key_gate_ids {
            assert!(relocked.is_live(kg));
            assert_eq!(relocked.gate(kg).gtype, locked.gate(kg).gtype);
        }
        let unlocked = relocked.apply_key(&k1.concat(&k2)).unwrap();
        let mode = EquivMode::Random {
            vectors: 10_000,
            seed: 5,
        };
        assert!(equiv_check(&n, &unlocked, mode).unwrap().is_equivalent());
    }

    #[test]
    fn stacked_key_gate_pairs_00_and_11_are_interchangeable() {
        // same wire locked twice; XOR-XOR (key 00) and XNOR-XNOR (key 11)
        // compute the same function of (inputs, keys)
        let build = |t: GateType| {
            let mut n = Netlist::new();
            let a = n.add_input("a");
            let b = n.add_input("b");
            let w = n.add_gate(GateType::And, &[a, b]);
            let k0 = n.add_key_input();
            let u = n.add_gate(t, &[k0, w]);
            let k1 = n.add_key_input();
            let v = n.add_gate(t, &[k1, u]);
            n.mark_output(v);
            n
        };
        let n00 = build(GateType::Xor);
        let n11 = build(GateType::Xnor);
        assert!(equiv_check(&n00, &n11, EquivMode::Exhaustive)
            .unwrap()
            .is_equivalent());
        // and each unlocks under its own key
        let base = {
            let mut n = Netlist::new();
            let a = n.add_input("a");
            let b = n.add_input("b");
            let w = n.add_gate(GateType::And, &[a, b]);
            n.mark_output(w);
            n
        };
        let u00 = n00.apply_key(&Key::from_str_bits("00").unwrap()).unwrap();
        let u11 = n11.apply_key(&Key::from_str_bits("11").unwrap()).unwrap();
        assert!(equiv_check(&base, &u00, EquivMode::Exhaustive)
            .unwrap()
            .is_equivalent());
        assert!(equiv_check(&base, &u11, EquivMode::Exhaustive)
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn epic_unlocks_for_many_seeds_and_keys() {
        for s in 0..12u64 {
            let n = random_netlist(&RandNetlistParams::small(), seed::derive(1, &[s]));
            let key = keygen(6, seed::derive(2, &[s]));
            let (locked, _) = lock_epic(&n, &key, seed::derive(3, &[s])).unwrap();
            let unlocked = locked.apply_key(&key).unwrap();
            assert!(
                equiv_check(&n, &unlocked, EquivMode::Exhaustive)
                    .unwrap()
                    .is_equivalent(),
                "seed {s}"
            );
        }
    }
}
