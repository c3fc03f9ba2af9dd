//! ISCAS-style bench format: the workbench's canonical netlist interchange.
//!
//! Line-oriented grammar, `#` starts a comment, keywords are
//! case-insensitive:
//!
//! ```text
//! INPUT(<name>)
//! OUTPUT(<name>)
//! <name> = <GATE>(<name>{, <name>})
//! <name> = DFF(<name>)
//! ```
//!
//! Gate vocabulary: NOT, AND, NAND, OR, XOR, NOR, XNOR, BUF/BUFF, DFF. Key
//! inputs are declared as `INPUT(keyinput<k>)` with `k` contiguous from 0;
//! their order defines the key-bit indexing.

use std::collections::HashMap;
use std::fmt::Write as _;

use locklab_core::netlist::{GateId, GateType, Netlist};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: duplicate definition of '{name}'")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: undeclared signal '{name}'")]
    Undeclared { line: usize, name: String },
    #[error("line {line}: unsupported gate '{name}'")]
    UnsupportedGate { line: usize, name: String },
    #[error("line {line}: {gate} takes {expected}, found {found} arguments")]
    Arity {
        line: usize,
        gate: String,
        expected: &'static str,
        found: usize,
    },
    #[error("key inputs are not contiguous: missing keyinput{missing}")]
    KeyInputGap { missing: usize },
    #[error("netlist failed validation after parse: {0}")]
    Invalid(String),
}

fn gate_type_of(name: &str) -> Option<GateType> {
    match name.to_ascii_uppercase().as_str() {
        "NOT" => Some(GateType::Not),
        "AND" => Some(GateType::And),
        "NAND" => Some(GateType::Nand),
        "OR" => Some(GateType::Or),
        "XOR" => Some(GateType::Xor),
        "NOR" => Some(GateType::Nor),
        "XNOR" => Some(GateType::Xnor),
        "BUF" | "BUFF" => Some(GateType::Buf),
        "DFF" => Some(GateType::Ff),
        _ => None,
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']' | '$' | '-')
}

/// `keyinput<k>` names reserve a key-input slot.
fn key_index_of(name: &str) -> Option<usize> {
    let rest = name.strip_prefix("keyinput")?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

enum Decl {
    Input {
        name: String,
    },
    Output {
        name: String,
    },
    Def {
        name: String,
        gate: GateType,
        args: Vec<String>,
    },
}

struct Line {
    no: usize,
    decl: Decl,
}

fn parse_lines(text: &str) -> Result<Vec<Line>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let col = |rest: &str| content.len() - rest.len() + 1;
        let syntax = |rest: &str, msg: &str| BenchError::Syntax {
            line: no,
            col: col(rest),
            msg: msg.into(),
        };
        // <name> '=' <gate> '(' args ')'  |  INPUT/OUTPUT '(' name ')'
        if let Some(eq) = content.find('=') {
            let (lhs, rhs) = content.split_at(eq);
            let name = lhs.trim();
            if name.is_empty() || !name.chars().all(is_name_char) {
                return Err(syntax(content, "expected a signal name before '='"));
            }
            let rhs = rhs[1..].trim();
            let open = rhs
                .find('(')
                .ok_or_else(|| syntax(rhs, "expected '(' after gate name"))?;
            let gate_name = rhs[..open].trim();
            if gate_name.is_empty() || !gate_name.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(syntax(rhs, "malformed gate name"));
            }
            let close = rhs
                .rfind(')')
                .ok_or_else(|| syntax(rhs, "expected closing ')'"))?;
            if close < open || !rhs[close + 1..].trim().is_empty() {
                return Err(syntax(rhs, "trailing characters after ')'"));
            }
            let gate = gate_type_of(gate_name).ok_or_else(|| BenchError::UnsupportedGate {
                line: no,
                name: gate_name.to_string(),
            })?;
            let inner = &rhs[open + 1..close];
            let mut args = Vec::new();
            for part in inner.split(',') {
                let arg = part.trim();
                if arg.is_empty() || !arg.chars().all(is_name_char) {
                    return Err(syntax(inner, "malformed argument list"));
                }
                args.push(arg.to_string());
            }
            let (lo, hi) = gate.arity();
            if args.len() < lo || args.len() > hi {
                return Err(BenchError::Arity {
                    line: no,
                    gate: gate_name.to_ascii_uppercase(),
                    expected: if lo == 1 && hi == 1 {
                        "exactly 1"
                    } else {
                        "at least 2"
                    },
                    found: args.len(),
                });
            }
            out.push(Line {
                no,
                decl: Decl::Def {
                    name: name.to_string(),
                    gate,
                    args,
                },
            });
        } else {
            let open = content
                .find('(')
                .ok_or_else(|| syntax(content, "expected INPUT(...), OUTPUT(...) or '='"))?;
            let keyword = content[..open].trim().to_ascii_uppercase();
            let close = content
                .rfind(')')
                .ok_or_else(|| syntax(content, "expected closing ')'"))?;
            if close < open || !content[close + 1..].trim().is_empty() {
                return Err(syntax(content, "trailing characters after ')'"));
            }
            let name = content[open + 1..close].trim();
            if name.is_empty() || !name.chars().all(is_name_char) {
                return Err(syntax(content, "malformed signal name"));
            }
            match keyword.as_str() {
                "INPUT" => out.push(Line {
                    no,
                    decl: Decl::Input {
                        name: name.to_string(),
                    },
                }),
                "OUTPUT" => out.push(Line {
                    no,
                    decl: Decl::Output {
                        name: name.to_string(),
                    },
                }),
                _ => return Err(syntax(content, "unknown declaration keyword")),
            }
        }
    }
    Ok(out)
}

/// Parse bench text into a netlist. Key inputs land in `key_inputs` ordered
/// by their `keyinput<k>` index; everything else preserves declaration
/// order. The result always passes `validate()`.
pub fn parse_bench(text: &str) -> Result<Netlist, BenchError> {
    let lines = parse_lines(text)?;
    let mut n = Netlist::new();
    let mut by_name: HashMap<String, GateId> = HashMap::new();
    let mut key_decls: Vec<(usize, GateId)> = Vec::new();

    // first pass: create all signal-producing gates so forward references work
    for line in &lines {
        match &line.decl {
            Decl::Input { name } => {
                if by_name.contains_key(name) {
                    return Err(BenchError::Duplicate {
                        line: line.no,
                        name: name.clone(),
                    });
                }
                let id = match key_index_of(name) {
                    Some(k) => {
                        let id = n.add_key_input();
                        n.rename(id, name);
                        // the builder numbers key inputs by insertion; fix up
                        // ordering after the pass using the declared indices
                        key_decls.push((k, id));
                        id
                    }
                    None => n.add_input(name),
                };
                by_name.insert(name.clone(), id);
            }
            Decl::Def { name, gate, .. } => {
                if by_name.contains_key(name) {
                    return Err(BenchError::Duplicate {
                        line: line.no,
                        name: name.clone(),
                    });
                }
                let id = if *gate == GateType::Ff {
                    // placeholder fanin patched below
                    n.add_named_gate(name, GateType::Ff, &[])
                } else {
                    n.add_named_gate(name, *gate, &[])
                };
                if *gate == GateType::Ff {
                    n.flipflops.push(id);
                }
                by_name.insert(name.clone(), id);
            }
            Decl::Output { .. } => {}
        }
    }

    // second pass: wire fanins and outputs
    for line in &lines {
        match &line.decl {
            Decl::Def { name, args, .. } => {
                let id = by_name[name];
                let mut fanin = Vec::with_capacity(args.len());
                for a in args {
                    let src = *by_name.get(a).ok_or_else(|| BenchError::Undeclared {
                        line: line.no,
                        name: a.clone(),
                    })?;
                    fanin.push(src);
                }
                n.replace_fanins(id, &fanin);
            }
            Decl::Output { name } => {
                let id = *by_name.get(name).ok_or_else(|| BenchError::Undeclared {
                    line: line.no,
                    name: name.clone(),
                })?;
                n.mark_output(id);
            }
            Decl::Input { .. } => {}
        }
    }

    // key inputs ordered by declared index, contiguous from 0
    key_decls.sort_by_key(|&(k, _)| k);
    for (want, &(k, _)) in key_decls.iter().enumerate() {
        if k != want {
            return Err(BenchError::KeyInputGap { missing: want });
        }
    }
    n.key_inputs = key_decls.into_iter().map(|(_, id)| id).collect();

    let violations = n.validate();
    if !violations.is_empty() {
        // arity/duplication is caught above; this guards cycles and the like
        return Err(BenchError::Invalid(format!("{}", violations[0])));
    }
    Ok(n)
}

fn legal_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(is_name_char) && gate_type_of(name).is_none()
}

/// Emit bench text. Key inputs are written as `keyinput<k>` in key order;
/// other signals keep their names when legal and unique, falling back to
/// `n<id>`. Gates are emitted in id order (the format allows forward
/// references).
pub fn write_bench(netlist: &Netlist) -> String {
    let mut names: HashMap<GateId, String> = HashMap::new();
    let mut used: HashMap<String, usize> = HashMap::new();
    for (i, &id) in netlist.key_inputs.iter().enumerate() {
        let name = format!("keyinput{i}");
        used.insert(name.clone(), 1);
        names.insert(id, name);
    }
    for g in netlist.gates() {
        if names.contains_key(&g.id) {
            continue;
        }
        let candidate = if legal_name(&g.name) && key_index_of(&g.name).is_none() {
            g.name.clone()
        } else {
            format!("n{}", g.id.0)
        };
        let count = used.entry(candidate.clone()).or_insert(0);
        *count += 1;
        let name = if *count == 1 {
            candidate
        } else {
            format!("n{}", g.id.0)
        };
        used.insert(name.clone(), 1);
        names.insert(g.id, name);
    }

    let mut out = String::new();
    for &id in &netlist.primary_inputs {
        let _ = writeln!(out, "INPUT({})", names[&id]);
    }
    for &id in &netlist.key_inputs {
        let _ = writeln!(out, "INPUT({})", names[&id]);
    }
    for &id in &netlist.primary_outputs {
        let _ = writeln!(out, "OUTPUT({})", names[&id]);
    }
    for g in netlist.gates() {
        if g.gtype.is_source() {
            continue;
        }
        let args: Vec<&str> = g.fanin.iter().map(|s| names[s].as_str()).collect();
        let _ = writeln!(
            out,
            "{} = {}({})",
            names[&g.id],
            g.gtype.name(),
            args.join(", ")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use locklab_core::netlist::GateType;

    #[test]
    fn minimal_and_program() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a, b)").unwrap();
        assert_eq!(n.primary_inputs.len(), 2);
        assert_eq!(n.primary_outputs.len(), 1);
        assert_eq!(n.logic_gate_count(), 1);
        let z = n.gate(n.primary_outputs[0]);
        assert_eq!(z.gtype, GateType::And);
        assert!(n.validate().is_empty());
    }

    #[test]
    fn keyinput_prefix_lands_in_key_inputs() {
        let n =
            parse_bench("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(z)\nz = XOR(keyinput0, a)").unwrap();
        assert_eq!(n.primary_inputs.len(), 1);
        assert_eq!(n.key_inputs.len(), 1);
        assert_eq!(n.gate(n.key_inputs[0]).gtype, GateType::KeyInput);
    }

    #[test]
    fn key_inputs_are_ordered_by_index_not_declaration() {
        let n = parse_bench(
            "INPUT(keyinput1)\nINPUT(keyinput0)\nINPUT(a)\nOUTPUT(z)\n\
             t = XOR(keyinput0, a)\nz = XOR(keyinput1, t)",
        )
        .unwrap();
        assert_eq!(n.gate(n.key_inputs[0]).name, "keyinput0");
        assert_eq!(n.gate(n.key_inputs[1]).name, "keyinput1");
    }

    #[test]
    fn non_contiguous_key_inputs_are_rejected() {
        let err = parse_bench("INPUT(a)\nINPUT(keyinput2)\nOUTPUT(z)\nz = XOR(keyinput2, a)")
            .unwrap_err();
        assert_eq!(err, BenchError::KeyInputGap { missing: 0 });
    }

    #[test]
    fn unary_and_is_an_arity_error() {
        let err = parse_bench("INPUT(a)\nOUTPUT(z)\nz = AND(a)").unwrap_err();
        assert!(
            matches!(
                err,
                BenchError::Arity {
                    line: 3,
                    found: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn errors_carry_line_and_column() {
        let err = parse_bench("INPUT(a)\nz == AND(a, a)").unwrap_err();
        match err {
            BenchError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col >= 1);
            }
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn duplicates_and_undeclared_signals_are_rejected() {
        let err = parse_bench("INPUT(a)\nINPUT(a)").unwrap_err();
        assert_eq!(
            err,
            BenchError::Duplicate {
                line: 2,
                name: "a".into()
            }
        );

        let err = parse_bench("INPUT(a)\nOUTPUT(z)\nz = AND(a, ghost)").unwrap_err();
        assert_eq!(
            err,
            BenchError::Undeclared {
                line: 3,
                name: "ghost".into()
            }
        );

        let err = parse_bench("INPUT(a)\nOUTPUT(z)\nz = MUX2(a, a)").unwrap_err();
        assert_eq!(
            err,
            BenchError::UnsupportedGate {
                line: 3,
                name: "MUX2".into()
            }
        );
    }

    #[test]
    fn keywords_are_case_insensitive_and_comments_ignored() {
        let n =
            parse_bench("# full comment\ninput(a) # trailing\nInPuT(b)\noutput(z)\nz = nAnD(a, b)")
                .unwrap();
        assert_eq!(n.primary_inputs.len(), 2);
        assert_eq!(n.gate(n.primary_outputs[0]).gtype, GateType::Nand);
    }

    #[test]
    fn dff_parses_and_round_trips() {
        let text = "INPUT(d)\nOUTPUT(z)\nq = DFF(d)\nz = BUF(q)";
        let n = parse_bench(text).unwrap();
        assert_eq!(n.flipflops.len(), 1);
        let again = parse_bench(&write_bench(&n)).unwrap();
        assert!(n.isomorphic(&again));
    }

    #[test]
    fn forward_references_are_fine() {
        let n = parse_bench("INPUT(a)\nOUTPUT(z)\nz = NOT(t)\nt = BUF(a)").unwrap();
        assert!(n.validate().is_empty());
    }

    #[test]
    fn buf_wire_netlist_writes_and_reparses() {
        let mut n = Netlist::new();
        let a = n.add_input("a");
        let z = n.add_gate(GateType::Buf, &[a]);
        n.mark_output(z);
        let text = write_bench(&n);
        let again = parse_bench(&text).unwrap();
        assert!(n.isomorphic(&again));
    }
}
