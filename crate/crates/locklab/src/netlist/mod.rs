//! Combinational gate-level netlist IR.
//!
//! A [`Netlist`] is an immutable DAG of named nets: primary inputs, key
//! inputs, and gate outputs. Construction goes through [`NetlistBuilder`],
//! which validates the structural invariants once and stores gates in a
//! canonical topological order (sorted by logic level, ties broken by
//! insertion order). Key inputs are ordinary inputs whose names carry a
//! reserved prefix; they are kept in a separate list sorted by numeric
//! suffix so that key bit `i` always means the net `<prefix><i>`.

mod bench;
mod cone;
pub mod generate;
mod sim;
mod signature;
mod stats;

pub use bench::{parse_bench, parse_bench_with, write_bench, ParseOptions};
pub use sim::SimError;
pub use cone::extract_logic_cone;
pub use signature::{canonical_form, structural_signature, Signature};
pub use stats::{stats, stats_with_seed, ComplexityStats, POWER_VECTORS};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default name prefix that marks an input net as a key input.
pub const KEY_PREFIX: &str = "keyinput";

/// Index of a net inside one netlist. Not meaningful across netlists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Gate primitives of the BENCH dialect understood by the lab.
///
/// `And`, `Or`, `Nand`, `Nor`, `Xor`, `Xnor` accept two or more fanins
/// (multi-input XOR is parity). `Not` and `Buf` take exactly one,
/// `Mux` exactly three (select, data0, data1), constants none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Not,
    Buf,
    Xor,
    Xnor,
    Mux,
    Const0,
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Not,
        GateKind::Buf,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Mux,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Mux => "MUX",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    /// Checks the fanin count allowed for this kind.
    pub fn arity_ok(self, arity: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buf => arity == 1,
            GateKind::Mux => arity == 3,
            GateKind::Const0 | GateKind::Const1 => arity == 0,
            _ => arity >= 2,
        }
    }

    /// True for the two kinds resynthesis is required to eliminate.
    pub fn is_xor_like(self) -> bool {
        matches!(self, GateKind::Xor | GateKind::Xnor)
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            GateKind::And => 0,
            GateKind::Or => 1,
            GateKind::Nand => 2,
            GateKind::Nor => 3,
            GateKind::Not => 4,
            GateKind::Buf => 5,
            GateKind::Xor => 6,
            GateKind::Xnor => 7,
            GateKind::Mux => 8,
            GateKind::Const0 => 9,
            GateKind::Const1 => 10,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate: a driven output net, a primitive kind, and ordered fanins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: NetId,
    pub kind: GateKind,
    pub fanins: Vec<NetId>,
}

/// A key assignment. Index `i` corresponds to key input `i` in the
/// netlist's sorted key order (net `keyinput<i>` for locks made here).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeyVector(Vec<bool>);

impl KeyVector {
    pub fn new(bits: Vec<bool>) -> Self {
        KeyVector(bits)
    }

    pub fn zeros(len: usize) -> Self {
        KeyVector(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    /// Renders as a 0/1 string, index 0 first.
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Parses a 0/1 string, index 0 first. Whitespace is trimmed.
    pub fn from_bit_string(s: &str) -> Result<Self, KeyParseError> {
        let t = s.trim();
        let mut bits = Vec::with_capacity(t.len());
        for (i, c) in t.chars().enumerate() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(KeyParseError { position: i, found: c }),
            }
        }
        Ok(KeyVector(bits))
    }
}

impl fmt::Display for KeyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl Serialize for KeyVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for KeyVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        KeyVector::from_bit_string(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid key character {found:?} at position {position}, expected 0 or 1")]
pub struct KeyParseError {
    pub position: usize,
    pub found: char,
}

/// Structural validation failures raised by [`NetlistBuilder::build`].
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("net {0:?} has more than one driver")]
    DuplicateDriver(String),
    #[error("input net {0:?} is declared twice")]
    DuplicateInput(String),
    #[error("output net {0:?} is declared twice")]
    DuplicateOutput(String),
    #[error("net {0:?} is used but never driven and is not an input")]
    Undriven(String),
    #[error("primary output {0:?} is never driven and is not an input")]
    UndrivenOutput(String),
    #[error("gate {gate} drives declared input net {net:?}")]
    GateDrivesInput { gate: GateKind, net: String },
    #[error("combinational cycle through net {0:?}")]
    Cycle(String),
    #[error("{kind} gate on net {net:?} has {got} fanins")]
    Arity { kind: GateKind, net: String, got: usize },
    #[error("key index {index} out of range, netlist has {len} key inputs")]
    KeyIndex { index: usize, len: usize },
    #[error("unknown net {0:?}")]
    UnknownNet(String),
}

/// Immutable combinational netlist.
///
/// Gates are stored in canonical topological order: ascending logic level,
/// insertion order within a level. `simulate` and friends rely on that
/// order; [`write_bench`] emits it verbatim, which makes a second
/// parse/write round trip byte-stable.
#[derive(Debug, Clone)]
pub struct Netlist {
    names: Vec<String>,
    name_to_id: HashMap<String, NetId>,
    inputs: Vec<NetId>,
    keys: Vec<NetId>,
    outputs: Vec<NetId>,
    gates: Vec<Gate>,
    driver: Vec<Option<u32>>,
    level: Vec<u32>,
}

impl PartialEq for Netlist {
    // Name-based comparison: the same circuit built through different
    // construction orders interns NetIds differently, which must not
    // affect equality.
    fn eq(&self, other: &Self) -> bool {
        fn names<'a>(n: &'a Netlist, ids: &[NetId]) -> Vec<&'a str> {
            ids.iter().map(|&i| n.name(i)).collect()
        }
        names(self, &self.inputs) == names(other, &other.inputs)
            && names(self, &self.keys) == names(other, &other.keys)
            && names(self, &self.outputs) == names(other, &other.outputs)
            && self.gates.len() == other.gates.len()
            && self.gates.iter().zip(&other.gates).all(|(a, b)| {
                self.name(a.output) == other.name(b.output)
                    && a.kind == b.kind
                    && names(self, &a.fanins) == names(other, &b.fanins)
            })
    }
}

impl Eq for Netlist {}

impl Netlist {
    pub fn builder() -> NetlistBuilder {
        NetlistBuilder::new()
    }

    pub fn net_count(&self) -> usize {
        self.names.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn key_inputs(&self) -> &[NetId] {
        &self.keys
    }

    pub fn key_count(&self) -> usize {
        self.keys.len()
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn name(&self, id: NetId) -> &str {
        &self.names[id.index()]
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.name_to_id.get(name).copied()
    }

    /// Gate driving `id`, if `id` is not an input.
    pub fn driver_of(&self, id: NetId) -> Option<&Gate> {
        self.driver[id.index()].map(|g| &self.gates[g as usize])
    }

    pub fn is_input(&self, id: NetId) -> bool {
        self.driver[id.index()].is_none()
    }

    pub fn is_key_input(&self, id: NetId) -> bool {
        self.keys.contains(&id)
    }

    /// Logic level of a net: inputs are 0, a gate output is one more than
    /// its deepest fanin. Constant gates sit at level 1.
    pub fn level(&self, id: NetId) -> u32 {
        self.level[id.index()]
    }

    /// Longest input-to-output path length in gate levels.
    pub fn depth(&self) -> usize {
        self.outputs
            .iter()
            .map(|&o| self.level[o.index()] as usize)
            .max()
            .unwrap_or(0)
    }

    /// Nets that are outputs of gates, in gate order. These are the
    /// candidate sites for key-gate insertion.
    pub fn internal_nets(&self) -> impl Iterator<Item = NetId> + '_ {
        self.gates.iter().map(|g| g.output)
    }

    /// Trailing decimal digits of a net name, used as the ordering suffix
    /// when key inputs are rebuilt by a transformation pass.
    pub(crate) fn name_suffix(name: &str) -> Option<u64> {
        let digits: String = name.chars().rev().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            None
        } else {
            digits.chars().rev().collect::<String>().parse().ok()
        }
    }

    /// Set of nets in the transitive fanin of any primary output,
    /// including the outputs themselves. Index by `NetId::index`.
    pub fn live_nets(&self) -> Vec<bool> {
        let mut live = vec![false; self.names.len()];
        let mut stack: Vec<NetId> = self.outputs.clone();
        while let Some(id) = stack.pop() {
            if live[id.index()] {
                continue;
            }
            live[id.index()] = true;
            if let Some(g) = self.driver_of(id) {
                stack.extend_from_slice(&g.fanins);
            }
        }
        live
    }
}

/// Mutable accumulator for netlists. `build` performs all validation.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    names: Vec<String>,
    name_to_id: HashMap<String, NetId>,
    inputs: Vec<NetId>,
    keys: Vec<(NetId, Option<u64>)>,
    output_names: Vec<String>,
    gates: Vec<Gate>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Name behind an id this builder handed out.
    pub fn name_of(&self, id: NetId) -> &str {
        &self.names[id.index()]
    }

    /// Interns a net name, creating the id on first sight.
    pub fn net(&mut self, name: &str) -> NetId {
        if let Some(&id) = self.name_to_id.get(name) {
            return id;
        }
        let id = NetId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.name_to_id.insert(name.to_string(), id);
        id
    }

    pub fn add_input(&mut self, name: &str) -> Result<NetId, NetlistError> {
        let id = self.net(name);
        if self.inputs.contains(&id) || self.keys.iter().any(|&(k, _)| k == id) {
            return Err(NetlistError::DuplicateInput(name.to_string()));
        }
        self.inputs.push(id);
        Ok(id)
    }

    /// Declares a key input. `suffix` is its numeric position when the name
    /// carries one; keys sort by suffix, then name.
    pub fn add_key_input(&mut self, name: &str, suffix: Option<u64>) -> Result<NetId, NetlistError> {
        let id = self.net(name);
        if self.inputs.contains(&id) || self.keys.iter().any(|&(k, _)| k == id) {
            return Err(NetlistError::DuplicateInput(name.to_string()));
        }
        self.keys.push((id, suffix));
        Ok(id)
    }

    pub fn add_output(&mut self, name: &str) -> Result<(), NetlistError> {
        if self.output_names.iter().any(|n| n == name) {
            return Err(NetlistError::DuplicateOutput(name.to_string()));
        }
        self.output_names.push(name.to_string());
        Ok(())
    }

    pub fn add_gate(&mut self, output: &str, kind: GateKind, fanins: &[NetId]) -> Result<NetId, NetlistError> {
        if !kind.arity_ok(fanins.len()) {
            return Err(NetlistError::Arity { kind, net: output.to_string(), got: fanins.len() });
        }
        let out = self.net(output);
        self.gates.push(Gate { output: out, kind, fanins: fanins.to_vec() });
        Ok(out)
    }

    pub fn build(mut self) -> Result<Netlist, NetlistError> {
        let n = self.names.len();
        let mut driver: Vec<Option<u32>> = vec![None; n];
        for (gi, g) in self.gates.iter().enumerate() {
            let slot = &mut driver[g.output.index()];
            if slot.is_some() {
                return Err(NetlistError::DuplicateDriver(self.names[g.output.index()].clone()));
            }
            *slot = Some(gi as u32);
        }
        for &id in self.inputs.iter().chain(self.keys.iter().map(|(k, _)| k)) {
            if driver[id.index()].is_some() {
                let gi = driver[id.index()].unwrap() as usize;
                return Err(NetlistError::GateDrivesInput {
                    gate: self.gates[gi].kind,
                    net: self.names[id.index()].clone(),
                });
            }
        }
        let is_declared_input: Vec<bool> = {
            let mut v = vec![false; n];
            for &id in &self.inputs {
                v[id.index()] = true;
            }
            for &(id, _) in &self.keys {
                v[id.index()] = true;
            }
            v
        };
        for g in &self.gates {
            for &f in &g.fanins {
                if driver[f.index()].is_none() && !is_declared_input[f.index()] {
                    return Err(NetlistError::Undriven(self.names[f.index()].clone()));
                }
            }
        }

        let mut outputs = Vec::with_capacity(self.output_names.len());
        for name in &self.output_names {
            let id = self
                .name_to_id
                .get(name)
                .copied()
                .ok_or_else(|| NetlistError::UndrivenOutput(name.clone()))?;
            if driver[id.index()].is_none() && !is_declared_input[id.index()] {
                return Err(NetlistError::UndrivenOutput(name.clone()));
            }
            outputs.push(id);
        }

        // Longest-path levels double as the cycle check: a net whose level
        // cannot settle is on a cycle.
        let mut level = vec![0u32; n];
        let mut state = vec![0u8; n]; // 0 fresh, 1 on stack, 2 done
        let mut stack: Vec<(NetId, usize)> = Vec::new();
        for start in (0..n).map(|i| NetId(i as u32)) {
            if state[start.index()] == 2 {
                continue;
            }
            stack.push((start, 0));
            while let Some(&(id, next)) = stack.last() {
                if state[id.index()] == 2 {
                    stack.pop();
                    continue;
                }
                state[id.index()] = 1;
                let gi = driver[id.index()];
                let fanin_count = gi.map_or(0, |g| self.gates[g as usize].fanins.len());
                if next < fanin_count {
                    stack.last_mut().unwrap().1 += 1;
                    let f = self.gates[gi.unwrap() as usize].fanins[next];
                    match state[f.index()] {
                        0 => stack.push((f, 0)),
                        1 => return Err(NetlistError::Cycle(self.names[f.index()].clone())),
                        _ => {}
                    }
                } else {
                    level[id.index()] = match gi {
                        Some(g) => {
                            let fanins = &self.gates[g as usize].fanins;
                            1 + fanins.iter().map(|f| level[f.index()]).max().unwrap_or(0)
                        }
                        None => 0,
                    };
                    state[id.index()] = 2;
                    stack.pop();
                }
            }
        }

        // Canonical order: by level, stable in insertion order. Already
        // topological input order is preserved exactly when re-sorted.
        let mut order: Vec<usize> = (0..self.gates.len()).collect();
        order.sort_by_key(|&gi| level[self.gates[gi].output.index()]);
        let gates: Vec<Gate> = order.iter().map(|&gi| self.gates[gi].clone()).collect();
        let mut driver: Vec<Option<u32>> = vec![None; n];
        for (gi, g) in gates.iter().enumerate() {
            driver[g.output.index()] = Some(gi as u32);
        }

        self.keys.sort_by(|a, b| {
            let ka = (a.1.is_none(), a.1, &self.names[a.0.index()]);
            let kb = (b.1.is_none(), b.1, &self.names[b.0.index()]);
            ka.cmp(&kb)
        });
        let keys = self.keys.iter().map(|&(k, _)| k).collect();

        Ok(Netlist {
            names: self.names,
            name_to_id: self.name_to_id,
            inputs: self.inputs,
            keys,
            outputs,
            gates,
            driver,
            level,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Netlist {
        let mut b = Netlist::builder();
        let a = b.add_input("a").unwrap();
        let c = b.add_input("c").unwrap();
        b.add_output("f").unwrap();
        let n1 = b.add_gate("n1", GateKind::And, &[a, c]).unwrap();
        b.add_gate("f", GateKind::Not, &[n1]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn builds_and_levels() {
        let n = tiny();
        assert_eq!(n.gate_count(), 2);
        assert_eq!(n.depth(), 2);
        let f = n.find_net("f").unwrap();
        assert_eq!(n.level(f), 2);
        assert!(n.is_input(n.find_net("a").unwrap()));
    }

    #[test]
    fn rejects_duplicate_driver() {
        let mut b = Netlist::builder();
        let a = b.add_input("a").unwrap();
        b.add_gate("x", GateKind::Not, &[a]).unwrap();
        b.add_gate("x", GateKind::Buf, &[a]).unwrap();
        assert!(matches!(b.build(), Err(NetlistError::DuplicateDriver(_))));
    }

    #[test]
    fn rejects_cycle() {
        let mut b = Netlist::builder();
        let a = b.add_input("a").unwrap();
        let y = b.net("y");
        let x = b.add_gate("x", GateKind::And, &[a, y]).unwrap();
        b.add_gate("y", GateKind::Not, &[x]).unwrap();
        assert!(matches!(b.build(), Err(NetlistError::Cycle(_))));
    }

    #[test]
    fn rejects_undriven_fanin() {
        let mut b = Netlist::builder();
        let a = b.add_input("a").unwrap();
        let ghost = b.net("ghost");
        b.add_gate("x", GateKind::And, &[a, ghost]).unwrap();
        assert!(matches!(b.build(), Err(NetlistError::Undriven(n)) if n == "ghost"));
    }

    #[test]
    fn rejects_bad_arity() {
        let mut b = Netlist::builder();
        let a = b.add_input("a").unwrap();
        let err = b.add_gate("x", GateKind::And, &[a]);
        assert!(matches!(err, Err(NetlistError::Arity { got: 1, .. })));
    }

    #[test]
    fn output_may_be_an_input() {
        let mut b = Netlist::builder();
        b.add_input("a").unwrap();
        b.add_output("a").unwrap();
        let n = b.build().unwrap();
        assert_eq!(n.depth(), 0);
    }

    #[test]
    fn keys_sort_by_numeric_suffix() {
        let mut b = Netlist::builder();
        b.add_key_input("keyinput12", Some(12)).unwrap();
        b.add_key_input("keyinput2", Some(2)).unwrap();
        b.add_input("a").unwrap();
        b.add_output("a").unwrap();
        let n = b.build().unwrap();
        assert_eq!(n.name(n.key_inputs()[0]), "keyinput2");
        assert_eq!(n.name(n.key_inputs()[1]), "keyinput12");
    }

    #[test]
    fn key_vector_round_trips() {
        let k = KeyVector::from_bit_string("0110").unwrap();
        assert_eq!(k.to_bit_string(), "0110");
        assert!(!k.bit(0));
        assert!(k.bit(1));
        assert!(KeyVector::from_bit_string("01x1").is_err());
    }
}
