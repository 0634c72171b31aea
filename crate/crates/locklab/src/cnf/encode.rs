//! Tseitin encoding and miter construction.
//!
//! Clause counts per gate are part of the contract (tests recompute them):
//!
//! ```text
//! AND/NAND/OR/NOR arity k   k + 1
//! NOT/BUF                   2
//! XOR/XNOR arity k          4 * (k - 1)   (two-input chain)
//! MUX                       4             (two implications per branch)
//! CONST0/CONST1             1             (unit clause)
//! ```

use thiserror::Error;

use crate::netlist::{GateKind, Netlist};

use super::{CnfFormula, Lit, Var};

/// Variables of one encoded circuit instance, in netlist order.
#[derive(Debug, Clone)]
pub struct Instance {
    pub tag: String,
    pub inputs: Vec<Var>,
    pub keys: Vec<Var>,
    pub outputs: Vec<Var>,
}

/// Pre-bound variables for sharing nets across instances.
#[derive(Debug, Clone, Default)]
pub struct Binding {
    pub inputs: Option<Vec<Var>>,
    pub keys: Option<Vec<Var>>,
}

/// Encodes `n` into a fresh formula under instance tag `main`.
pub fn tseitin_encode(n: &Netlist) -> (CnfFormula, Instance) {
    let mut f = CnfFormula::new();
    let inst = encode_instance(&mut f, n, "main", &Binding::default());
    (f, inst)
}

/// Encodes `n` into `f` under `tag`, reusing any bound input/key variables.
/// Every net gets exactly one variable; XOR chains above arity two use
/// unregistered auxiliaries.
pub fn encode_instance(f: &mut CnfFormula, n: &Netlist, tag: &str, bind: &Binding) -> Instance {
    if let Some(b) = &bind.inputs {
        assert_eq!(b.len(), n.inputs().len(), "input binding width");
    }
    if let Some(b) = &bind.keys {
        assert_eq!(b.len(), n.key_inputs().len(), "key binding width");
    }
    let mut net_var: Vec<Option<Var>> = vec![None; n.net_count()];
    let mut inputs = Vec::with_capacity(n.inputs().len());
    for (i, &id) in n.inputs().iter().enumerate() {
        let v = match &bind.inputs {
            Some(b) => b[i],
            None => f.new_var(),
        };
        net_var[id.index()] = Some(v);
        f.register_net(tag, n.name(id), v);
        inputs.push(v);
    }
    let mut keys = Vec::with_capacity(n.key_inputs().len());
    for (i, &id) in n.key_inputs().iter().enumerate() {
        let v = match &bind.keys {
            Some(b) => b[i],
            None => f.new_var(),
        };
        net_var[id.index()] = Some(v);
        f.register_net(tag, n.name(id), v);
        keys.push(v);
    }
    for g in n.gates() {
        let v = f.new_var();
        net_var[g.output.index()] = Some(v);
        f.register_net(tag, n.name(g.output), v);
        let fanins: Vec<Var> = g.fanins.iter().map(|&x| net_var[x.index()].expect("topological order")).collect();
        emit_gate(f, g.kind, v, &fanins);
    }
    let outputs = n.outputs().iter().map(|&o| net_var[o.index()].expect("driven output")).collect();
    Instance { tag: tag.to_string(), inputs, keys, outputs }
}

fn emit_gate(f: &mut CnfFormula, kind: GateKind, out: Var, fanins: &[Var]) {
    let o = out.lit(true);
    let no = out.lit(false);
    match kind {
        GateKind::And | GateKind::Nand => {
            // for NAND the output is used complemented
            let (o, no) = if kind == GateKind::And { (o, no) } else { (no, o) };
            let mut wide: Vec<Lit> = vec![o];
            for &a in fanins {
                f.add_clause(&[no, a.lit(true)]);
                wide.push(a.lit(false));
            }
            f.add_clause(&wide);
        }
        GateKind::Or | GateKind::Nor => {
            let (o, no) = if kind == GateKind::Or { (o, no) } else { (no, o) };
            let mut wide: Vec<Lit> = vec![no];
            for &a in fanins {
                f.add_clause(&[o, a.lit(false)]);
                wide.push(a.lit(true));
            }
            f.add_clause(&wide);
        }
        GateKind::Not => {
            let a = fanins[0];
            f.add_clause(&[no, a.lit(false)]);
            f.add_clause(&[o, a.lit(true)]);
        }
        GateKind::Buf => {
            let a = fanins[0];
            f.add_clause(&[no, a.lit(true)]);
            f.add_clause(&[o, a.lit(false)]);
        }
        GateKind::Xor | GateKind::Xnor => {
            // left-to-right chain; the last stage absorbs the XNOR negation
            let mut acc = fanins[0];
            for (i, &x) in fanins[1..].iter().enumerate() {
                let last = i + 2 == fanins.len();
                let stage = if last { out } else { f.new_var() };
                let phase = !(last && kind == GateKind::Xnor);
                emit_xor2(f, stage, acc, x, phase);
                acc = stage;
            }
        }
        GateKind::Mux => {
            let (s, d0, d1) = (fanins[0], fanins[1], fanins[2]);
            f.add_clause(&[s.lit(true), no, d0.lit(true)]);
            f.add_clause(&[s.lit(true), o, d0.lit(false)]);
            f.add_clause(&[s.lit(false), no, d1.lit(true)]);
            f.add_clause(&[s.lit(false), o, d1.lit(false)]);
        }
        GateKind::Const0 => f.add_clause(&[no]),
        GateKind::Const1 => f.add_clause(&[o]),
    }
}

// out = a ^ b when phase, out = !(a ^ b) otherwise. Four clauses.
fn emit_xor2(f: &mut CnfFormula, out: Var, a: Var, b: Var, phase: bool) {
    let o = out.lit(phase);
    let no = out.lit(!phase);
    f.add_clause(&[no, a.lit(true), b.lit(true)]);
    f.add_clause(&[no, a.lit(false), b.lit(false)]);
    f.add_clause(&[o, a.lit(true), b.lit(false)]);
    f.add_clause(&[o, a.lit(false), b.lit(true)]);
}

/// Expected clause count for one gate; the encoder is tested against the
/// sum of these.
pub fn clause_count(kind: GateKind, arity: usize) -> usize {
    match kind {
        GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor => arity + 1,
        GateKind::Not | GateKind::Buf => 2,
        GateKind::Xor | GateKind::Xnor => 4 * (arity - 1),
        GateKind::Mux => 4,
        GateKind::Const0 | GateKind::Const1 => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareMode {
    /// Tie primary inputs; leave both key sets free.
    InputsOnly,
    /// Tie primary inputs and key inputs pairwise.
    InputsAndKeys,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MiterError {
    #[error("interface mismatch in {what}: left has {left:?}, right has {right:?}")]
    Interface { what: &'static str, left: Vec<String>, right: Vec<String> },
    #[error("netlists have no outputs to compare")]
    NoOutputs,
}

/// Everything a caller needs to constrain or decode a miter.
#[derive(Debug, Clone)]
pub struct Miter {
    pub formula: CnfFormula,
    pub inputs: Vec<Var>,
    pub keys_left: Vec<Var>,
    pub keys_right: Vec<Var>,
    /// One difference indicator per output pair.
    pub diffs: Vec<Var>,
    /// Literal asserting "some output differs". Added as a guarded clause
    /// so sessions can also solve with the miter disabled.
    pub enable: Lit,
}

/// Builds the standard two-circuit miter: shared inputs, per-mode key
/// sharing, XOR difference indicators, and a guarded disjunction that at
/// least one output differs. UNSAT under the enable assumption means
/// equivalent (for the shared nets).
pub fn build_miter(left: &Netlist, right: &Netlist, share: ShareMode) -> Result<Miter, MiterError> {
    let names = |n: &Netlist, ids: &[crate::netlist::NetId]| -> Vec<String> {
        ids.iter().map(|&i| n.name(i).to_string()).collect()
    };
    let li = names(left, left.inputs());
    let ri = names(right, right.inputs());
    if li != ri {
        return Err(MiterError::Interface { what: "primary inputs", left: li, right: ri });
    }
    let lo = names(left, left.outputs());
    let ro = names(right, right.outputs());
    if lo != ro {
        return Err(MiterError::Interface { what: "primary outputs", left: lo, right: ro });
    }
    if share == ShareMode::InputsAndKeys {
        let lk = names(left, left.key_inputs());
        let rk = names(right, right.key_inputs());
        if lk != rk {
            return Err(MiterError::Interface { what: "key inputs", left: lk, right: rk });
        }
    }
    if left.outputs().is_empty() {
        return Err(MiterError::NoOutputs);
    }

    let mut f = CnfFormula::new();
    let a = encode_instance(&mut f, left, "left", &Binding::default());
    let bind = Binding {
        inputs: Some(a.inputs.clone()),
        keys: if share == ShareMode::InputsAndKeys { Some(a.keys.clone()) } else { None },
    };
    let b = encode_instance(&mut f, right, "right", &bind);

    let mut diffs = Vec::with_capacity(a.outputs.len());
    for (&x, &y) in a.outputs.iter().zip(&b.outputs) {
        let d = f.new_var();
        emit_xor2(&mut f, d, x, y, true);
        diffs.push(d);
    }
    let enable_var = f.new_var();
    let enable = enable_var.lit(true);
    let mut clause: Vec<Lit> = vec![enable.negate()];
    clause.extend(diffs.iter().map(|d| d.lit(true)));
    f.add_clause(&clause);

    Ok(Miter { formula: f, inputs: a.inputs, keys_left: a.keys, keys_right: b.keys, diffs, enable })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceResult {
    Equivalent,
    /// Witness assignment: shared inputs, then left keys, then right keys.
    Different { inputs: Vec<bool>, keys_left: Vec<bool>, keys_right: Vec<bool> },
}

/// Miter-based equivalence check. `InputsAndKeys` asks "equal for every
/// input and key", `InputsOnly` asks "equal for every input and every pair
/// of (left, right) key values".
pub fn check_equivalence(
    left: &Netlist,
    right: &Netlist,
    share: ShareMode,
    config: &super::SolverConfig,
) -> Result<EquivalenceResult, CheckError> {
    let miter = build_miter(left, right, share)?;
    let mut session = super::SatSession::with_config(config.clone());
    session.add_formula(&miter.formula);
    match session.solve(&[miter.enable])? {
        super::SatOutcome::Unsat => Ok(EquivalenceResult::Equivalent),
        super::SatOutcome::Sat(model) => Ok(EquivalenceResult::Different {
            inputs: miter.inputs.iter().map(|&v| model.value(v)).collect(),
            keys_left: miter.keys_left.iter().map(|&v| model.value(v)).collect(),
            keys_right: miter.keys_right.iter().map(|&v| model.value(v)).collect(),
        }),
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Miter(#[from] MiterError),
    #[error(transparent)]
    Solver(#[from] super::SolverError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{SatOutcome, SatSession, SolverConfig};
    use crate::netlist::parse_bench;

    #[test]
    fn and_gate_is_three_clauses() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)\n").unwrap();
        let (f, inst) = tseitin_encode(&n);
        assert_eq!(f.clauses().len(), 3);
        assert_eq!(inst.inputs.len(), 2);
        assert_eq!(inst.outputs.len(), 1);
        assert_eq!(f.var_for("main", "f"), Some(inst.outputs[0]));
    }

    #[test]
    fn clause_counts_match_contract() {
        let text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(f)\n\
                    w = XOR(a, b, c)\nx = XNOR(a, b)\ny = MUX(a, w, x)\nz = NOR(y, d, a, b)\n\
                    k = CONST1()\nf = NAND(z, k)\n";
        let n = parse_bench(text).unwrap();
        let (f, _) = tseitin_encode(&n);
        let expect: usize = n.gates().iter().map(|g| clause_count(g.kind, g.fanins.len())).sum();
        assert_eq!(f.clauses().len(), expect);
        // independent arithmetic: 4*2 + 4 + 4 + 5 + 1 + 3
        assert_eq!(expect, 8 + 4 + 4 + 5 + 1 + 3);
    }

    /// Exhaustive agreement between encoding semantics and simulation for
    /// every gate kind, via unit-clause pinning.
    #[test]
    fn encoding_agrees_with_simulation() {
        let text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f1)\nOUTPUT(f2)\nOUTPUT(f3)\nOUTPUT(f4)\n\
                    t1 = XOR(a, b, c)\nt2 = XNOR(a, b, c)\nt3 = MUX(a, b, c)\nt4 = NOR(a, b)\n\
                    f1 = NAND(t1, t2)\nf2 = OR(t3, t4)\nf3 = NOT(t1)\nf4 = BUF(t3)\n";
        let n = parse_bench(text).unwrap();
        let (f, inst) = tseitin_encode(&n);
        for x in 0u32..8 {
            let bits = [(x & 1) != 0, (x & 2) != 0, (x & 4) != 0];
            let want = n.simulate(&bits, &[]).unwrap();
            let mut session = SatSession::with_config(SolverConfig::default());
            session.add_formula(&f);
            let assumptions: Vec<_> =
                inst.inputs.iter().zip(bits).map(|(&v, b)| v.lit(b)).collect();
            match session.solve(&assumptions).unwrap() {
                SatOutcome::Sat(model) => {
                    for (j, (&ov, &w)) in inst.outputs.iter().zip(&want).enumerate() {
                        assert_eq!(model.value(ov), w, "output {j} under input {x:03b}");
                    }
                    // model must satisfy the formula per the independent evaluator
                    assert!(f.eval(model.assignment()));
                }
                other => panic!("expected SAT, got {other:?}"),
            }
        }
    }

    #[test]
    fn miter_unsat_for_identical_circuits() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)\n").unwrap();
        let r = check_equivalence(&n, &n, ShareMode::InputsOnly, &SolverConfig::default()).unwrap();
        assert_eq!(r, EquivalenceResult::Equivalent);
    }

    #[test]
    fn miter_finds_difference_witness() {
        let a = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = AND(a, b)\n").unwrap();
        let b = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(f)\nf = OR(a, b)\n").unwrap();
        match check_equivalence(&a, &b, ShareMode::InputsOnly, &SolverConfig::default()).unwrap() {
            EquivalenceResult::Different { inputs, .. } => {
                let va = a.simulate(&inputs, &[]).unwrap();
                let vb = b.simulate(&inputs, &[]).unwrap();
                assert_ne!(va, vb, "witness must distinguish the circuits");
            }
            other => panic!("expected Different, got {other:?}"),
        }
    }

    #[test]
    fn miter_rejects_mismatched_interfaces() {
        let a = parse_bench("INPUT(a)\nOUTPUT(f)\nf = NOT(a)\n").unwrap();
        let b = parse_bench("INPUT(x)\nOUTPUT(f)\nf = NOT(x)\n").unwrap();
        assert!(matches!(
            build_miter(&a, &b, ShareMode::InputsOnly),
            Err(MiterError::Interface { what: "primary inputs", .. })
        ));
    }
}
