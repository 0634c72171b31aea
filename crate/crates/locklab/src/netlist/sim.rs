//! Bit-parallel simulation.
//!
//! The engine evaluates 64 input patterns per pass using one machine word
//! per net. Scalar [`Netlist::simulate`] wraps it with width 1. Simulation
//! is pure: identical inputs give identical outputs, no state survives.

use thiserror::Error;

use super::{GateKind, NetId, Netlist};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("expected {expected} primary input values, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("expected {expected} key input values, got {got}")]
    KeyWidth { expected: usize, got: usize },
}

impl Netlist {
    /// Evaluates one pattern. `inputs` follows primary input order,
    /// `key` follows sorted key order. Returns output values in output
    /// order.
    pub fn simulate(&self, inputs: &[bool], key: &[bool]) -> Result<Vec<bool>, SimError> {
        if inputs.len() != self.inputs.len() {
            return Err(SimError::InputWidth { expected: self.inputs.len(), got: inputs.len() });
        }
        if key.len() != self.keys.len() {
            return Err(SimError::KeyWidth { expected: self.keys.len(), got: key.len() });
        }
        let pi: Vec<u64> = inputs.iter().map(|&b| if b { 1 } else { 0 }).collect();
        let kw: Vec<u64> = key.iter().map(|&b| if b { 1 } else { 0 }).collect();
        Ok(self.simulate_words(&pi, &kw).iter().map(|&w| w & 1 == 1).collect())
    }

    /// Evaluates 64 patterns at once; bit `t` of every word belongs to
    /// pattern `t`. Panics on width mismatch (checked in [`simulate`]).
    pub fn simulate_words(&self, inputs: &[u64], key: &[u64]) -> Vec<u64> {
        let values = self.eval_words(inputs, key);
        self.outputs.iter().map(|&o| values[o.index()]).collect()
    }

    /// Word values for every net, indexed by `NetId::index`.
    pub(crate) fn eval_words(&self, inputs: &[u64], key: &[u64]) -> Vec<u64> {
        assert_eq!(inputs.len(), self.inputs.len(), "primary input width");
        assert_eq!(key.len(), self.keys.len(), "key input width");
        let mut values = vec![0u64; self.names.len()];
        for (&id, &w) in self.inputs.iter().zip(inputs) {
            values[id.index()] = w;
        }
        for (&id, &w) in self.keys.iter().zip(key) {
            values[id.index()] = w;
        }
        for g in &self.gates {
            values[g.output.index()] = eval_gate(g.kind, &g.fanins, &values);
        }
        values
    }
}

#[inline]
fn eval_gate(kind: GateKind, fanins: &[NetId], values: &[u64]) -> u64 {
    let v = |i: usize| values[fanins[i].index()];
    match kind {
        GateKind::And => fanins.iter().fold(u64::MAX, |acc, f| acc & values[f.index()]),
        GateKind::Or => fanins.iter().fold(0, |acc, f| acc | values[f.index()]),
        GateKind::Nand => !fanins.iter().fold(u64::MAX, |acc, f| acc & values[f.index()]),
        GateKind::Nor => !fanins.iter().fold(0, |acc, f| acc | values[f.index()]),
        GateKind::Not => !v(0),
        GateKind::Buf => v(0),
        GateKind::Xor => fanins.iter().fold(0, |acc, f| acc ^ values[f.index()]),
        GateKind::Xnor => !fanins.iter().fold(0, |acc, f| acc ^ values[f.index()]),
        GateKind::Mux => (v(0) & v(2)) | (!v(0) & v(1)),
        GateKind::Const0 => 0,
        GateKind::Const1 => u64::MAX,
    }
}
