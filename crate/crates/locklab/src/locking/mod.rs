//! Lock constructions with known true keys.
//!
//! Every scheme takes an unlocked netlist and returns the locked netlist
//! plus a [`LockRecord`] holding the ground truth: the true key, where the
//! lock was inserted, and any scheme parameters. Records exist so that
//! experiments can score attack output; attack code never reads them.
//!
//! All schemes preserve the original interface (primary inputs and outputs
//! keep names and order) and add key inputs named `keyinput0..`. Applying
//! the true key always restores the original function; that contract is
//! enforced by equivalence tests, both exhaustive and SAT-based.

mod rll;
mod sfll;
mod trees;

pub use rll::{lock_rll, lock_rll_at, lock_rll_with, RllOptions};
pub use sfll::{lock_compound, lock_sfll_point};
pub use trees::{lock_antisat, lock_caslock, TreeLevel};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateKind, KeyVector, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockScheme {
    Rll,
    AntiSat,
    CasLock,
    SfllPoint,
    Compound,
}

impl LockScheme {
    pub const ALL: [LockScheme; 5] = [
        LockScheme::Rll,
        LockScheme::AntiSat,
        LockScheme::CasLock,
        LockScheme::SfllPoint,
        LockScheme::Compound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LockScheme::Rll => "rll",
            LockScheme::AntiSat => "anti-sat",
            LockScheme::CasLock => "cas-lock",
            LockScheme::SfllPoint => "sfll-point",
            LockScheme::Compound => "compound",
        }
    }
}

/// Ground truth for one lock application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockRecord {
    pub scheme: LockScheme,
    pub true_key: KeyVector,
    pub seed: u64,
    /// RLL: original names of the nets that received key gates, index i
    /// belongs to key bit i.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub insertion_sites: Option<Vec<String>>,
    /// Point-function schemes: the output whose cone hosts the lock.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protected_output: Option<String>,
    /// SFLL-style locks: the hard-coded protected input pattern.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protected_pattern: Option<KeyVector>,
    /// Tree locks and SFLL: primary inputs compared against key bits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_inputs: Option<Vec<String>>,
    /// CAS-style locks: gate kind per tree level, leaves first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_levels: Option<Vec<TreeLevel>>,
    /// Compound locks: key index ranges per constituent scheme.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compound: Option<CompoundSplit>,
}

impl LockRecord {
    pub(crate) fn new(scheme: LockScheme, true_key: KeyVector, seed: u64) -> Self {
        LockRecord {
            scheme,
            true_key,
            seed,
            insertion_sites: None,
            protected_output: None,
            protected_pattern: None,
            compare_inputs: None,
            tree_levels: None,
            compound: None,
        }
    }
}

/// Key index ranges of a compound lock, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompoundSplit {
    pub sfll: (usize, usize),
    pub rll: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct LockResult {
    pub netlist: Netlist,
    pub record: LockRecord,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LockError {
    #[error("key width must be positive")]
    ZeroWidth,
    #[error("{scheme:?} needs an even key width, got {got}")]
    OddWidth { scheme: LockScheme, got: usize },
    #[error("not enough {what}: need {need}, have {have}")]
    NotEnough { what: &'static str, need: usize, have: usize },
    #[error("key length {got} does not match key input count {expected}")]
    KeyWidth { expected: usize, got: usize },
    #[error("net {0:?} is not a gate output and cannot host a key gate")]
    SiteNotInternal(String),
    #[error("netlist error during lock construction: {0}")]
    Build(#[from] NetlistError),
}

/// Substitutes a concrete key: every key input becomes a constant gate
/// driving a net of the same name. The result has no key inputs and is
/// what an unlocked-chip oracle evaluates.
pub fn apply_key(n: &Netlist, key: &KeyVector) -> Result<Netlist, LockError> {
    if key.len() != n.key_count() {
        return Err(LockError::KeyWidth { expected: n.key_count(), got: key.len() });
    }
    let mut b = Netlist::builder();
    for &pi in n.inputs() {
        b.add_input(n.name(pi))?;
    }
    for (i, &k) in n.key_inputs().iter().enumerate() {
        let kind = if key.bit(i) { GateKind::Const1 } else { GateKind::Const0 };
        b.add_gate(n.name(k), kind, &[])?;
    }
    for g in n.gates() {
        copy_gate(&mut b, n, g)?;
    }
    for &po in n.outputs() {
        b.add_output(n.name(po))?;
    }
    Ok(b.build()?)
}

pub(crate) fn copy_gate(b: &mut NetlistBuilder, n: &Netlist, g: &crate::netlist::Gate) -> Result<(), LockError> {
    let fanins: Vec<_> = g.fanins.iter().map(|&f| b.net(n.name(f))).collect();
    b.add_gate(n.name(g.output), g.kind, &fanins)?;
    Ok(())
}

/// Copies `n` into `b` with selected gate outputs renamed (consumers keep
/// reading the old name, which the caller is expected to re-drive).
/// Returns the rename map used.
pub(crate) fn copy_with_renames(
    b: &mut NetlistBuilder,
    n: &Netlist,
    rename: &HashMap<crate::netlist::NetId, String>,
) -> Result<(), LockError> {
    for &pi in n.inputs() {
        b.add_input(n.name(pi))?;
    }
    for (i, &k) in n.key_inputs().iter().enumerate() {
        // existing keys keep their position: suffix from current index
        let _ = i;
        let name = n.name(k).to_string();
        let suffix = key_suffix(&name);
        b.add_key_input(&name, suffix)?;
    }
    for g in n.gates() {
        let out_name = match rename.get(&g.output) {
            Some(fresh) => fresh.clone(),
            None => n.name(g.output).to_string(),
        };
        let fanins: Vec<_> = g.fanins.iter().map(|&f| b.net(n.name(f))).collect();
        b.add_gate(&out_name, g.kind, &fanins)?;
    }
    Ok(())
}

pub(crate) fn key_suffix(name: &str) -> Option<u64> {
    Netlist::name_suffix(name)
}

/// Name for an original net displaced by a key gate. Never collides with
/// an existing net.
pub(crate) fn fresh_name(n: &Netlist, base: &str) -> String {
    let mut candidate = format!("{base}__raw");
    let mut i = 0;
    while n.find_net(&candidate).is_some() {
        i += 1;
        candidate = format!("{base}__raw{i}");
    }
    candidate
}

/// Builds a balanced 2-input tree over `leaves` with per-level gate kinds.
/// `levels[0]` combines the leaves. Returns the root net. A single leaf is
/// returned unchanged.
pub(crate) fn balanced_tree(
    b: &mut NetlistBuilder,
    prefix: &str,
    leaves: Vec<crate::netlist::NetId>,
    kind_for_level: impl Fn(usize) -> GateKind,
) -> Result<crate::netlist::NetId, LockError> {
    let mut layer = leaves;
    let mut level = 0;
    let mut counter = 0;
    while layer.len() > 1 {
        let kind = kind_for_level(level);
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.chunks_exact(2);
        for pair in &mut it {
            let name = format!("{prefix}_t{level}_{counter}");
            counter += 1;
            next.push(b.add_gate(&name, kind, pair)?);
        }
        if let [odd] = it.remainder() {
            next.push(*odd);
        }
        layer = next;
        level += 1;
    }
    Ok(layer[0])
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::cnf::{check_equivalence, EquivalenceResult, ShareMode, SolverConfig};
    use crate::netlist::Netlist;

    /// Exhaustive equality over all inputs (and keys when present).
    /// Only callable for small interface widths.
    pub fn exhaustive_equal(a: &Netlist, b: &Netlist) -> bool {
        assert_eq!(a.inputs().len(), b.inputs().len());
        assert_eq!(a.key_count(), b.key_count());
        let w = a.inputs().len() + a.key_count();
        assert!(w <= 20, "too wide for exhaustive comparison");
        for x in 0u64..(1 << w) {
            let pi: Vec<bool> = (0..a.inputs().len()).map(|i| (x >> i) & 1 == 1).collect();
            let k: Vec<bool> =
                (0..a.key_count()).map(|i| (x >> (a.inputs().len() + i)) & 1 == 1).collect();
            if a.simulate(&pi, &k).unwrap() != b.simulate(&pi, &k).unwrap() {
                return false;
            }
        }
        true
    }

    /// Dual-route equivalence: exhaustive simulation and the SAT miter must
    /// agree, and the caller gets the shared verdict.
    pub fn agreed_equivalence(a: &Netlist, b: &Netlist) -> bool {
        let sim = exhaustive_equal(a, b);
        let sat = matches!(
            check_equivalence(a, b, ShareMode::InputsAndKeys, &SolverConfig::default()).unwrap(),
            EquivalenceResult::Equivalent
        );
        assert_eq!(sim, sat, "simulation and SAT disagree on equivalence");
        sim
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_bench;

    #[test]
    fn apply_key_replaces_keys_with_constants() {
        let n = parse_bench(
            "INPUT(a)\nINPUT(keyinput0)\nINPUT(keyinput1)\nOUTPUT(f)\n\
             t = XOR(a, keyinput0)\nf = XNOR(t, keyinput1)\n",
        )
        .unwrap();
        let fixed = apply_key(&n, &KeyVector::from_bit_string("01").unwrap()).unwrap();
        assert_eq!(fixed.key_count(), 0);
        assert_eq!(fixed.inputs().len(), 1);
        // f = xnor(xor(a, 0), 1) = a
        for a in [false, true] {
            assert_eq!(fixed.simulate(&[a], &[]).unwrap(), vec![a]);
        }
    }

    #[test]
    fn apply_key_checks_width() {
        let n = parse_bench("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(f)\nf = XOR(a, keyinput0)\n").unwrap();
        assert!(matches!(
            apply_key(&n, &KeyVector::zeros(2)),
            Err(LockError::KeyWidth { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn key_suffix_extraction() {
        assert_eq!(key_suffix("keyinput12"), Some(12));
        assert_eq!(key_suffix("keyinput0"), Some(0));
        assert_eq!(key_suffix("keyinput"), None);
    }
}
