//! Complementary point-function tree locks.
//!
//! Both schemes compare a set of primary inputs against two key halves and
//! feed the comparison trees into a flip signal that XORs one output:
//!
//! ```text
//! g    = Tree( x_0 ^ k_0, ..., x_{m-1} ^ k_{m-1} )
//! gbar = complement Tree( x_0 ^ k_m, ..., x_{m-1} ^ k_{2m-1} )
//! flip = AND(g, gbar)
//! po   = XOR(po_raw, flip)
//! ```
//!
//! With both halves equal, `gbar` computes exactly the complement of `g`,
//! so `flip` is constant 0 and the circuit is unchanged. The first scheme
//! uses a pure AND tree (the complement tree is the same tree with a NAND
//! root). The second draws a gate kind per tree level, AND or OR, from the
//! seed; an all-AND pattern degenerates to the first scheme.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netlist::{GateKind, KeyVector, NetId, Netlist};

use super::{balanced_tree, copy_with_renames, fresh_name, LockError, LockRecord, LockResult, LockScheme};

/// Gate kind of one tree level, leaves first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeLevel {
    And,
    Or,
}

impl TreeLevel {
    fn gate(self) -> GateKind {
        match self {
            TreeLevel::And => GateKind::And,
            TreeLevel::Or => GateKind::Or,
        }
    }

    fn complement_root(self) -> GateKind {
        match self {
            TreeLevel::And => GateKind::Nand,
            TreeLevel::Or => GateKind::Nor,
        }
    }
}

/// AND-tree instance: `levels` all AND.
pub fn lock_antisat(n: &Netlist, p: usize, seed: u64) -> Result<LockResult, LockError> {
    let m = check_width(LockScheme::AntiSat, p)?;
    let levels = vec![TreeLevel::And; tree_level_count(m)];
    lock_tree(n, p, seed, levels, LockScheme::AntiSat)
}

/// Seeded AND/OR level pattern.
pub fn lock_caslock(n: &Netlist, p: usize, seed: u64) -> Result<LockResult, LockError> {
    let m = check_width(LockScheme::CasLock, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed_split(seed, "cas-pattern", 0));
    let levels: Vec<TreeLevel> = (0..tree_level_count(m))
        .map(|_| if rng.gen() { TreeLevel::And } else { TreeLevel::Or })
        .collect();
    lock_tree(n, p, seed, levels, LockScheme::CasLock)
}

fn check_width(scheme: LockScheme, p: usize) -> Result<usize, LockError> {
    if p == 0 {
        return Err(LockError::ZeroWidth);
    }
    if p % 2 != 0 {
        return Err(LockError::OddWidth { scheme, got: p });
    }
    Ok(p / 2)
}

fn tree_level_count(m: usize) -> usize {
    (usize::BITS - (m - 1).leading_zeros()) as usize
}

fn lock_tree(
    n: &Netlist,
    p: usize,
    seed: u64,
    levels: Vec<TreeLevel>,
    scheme: LockScheme,
) -> Result<LockResult, LockError> {
    let m = p / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let live = n.live_nets();
    let mut live_pis: Vec<NetId> = n.inputs().iter().copied().filter(|pi| live[pi.index()]).collect();
    if live_pis.len() < m {
        return Err(LockError::NotEnough { what: "live primary inputs", need: m, have: live_pis.len() });
    }
    live_pis.shuffle(&mut rng);
    live_pis.truncate(m);
    let chosen = live_pis;

    let driven_pos: Vec<NetId> =
        n.outputs().iter().copied().filter(|&o| n.driver_of(o).is_some()).collect();
    if driven_pos.is_empty() {
        return Err(LockError::NotEnough { what: "gate-driven outputs", need: 1, have: 0 });
    }
    let po = driven_pos[rng.gen_range(0..driven_pos.len())];
    let po_name = n.name(po).to_string();
    let po_raw = fresh_name(n, &po_name);

    let half: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
    let mut key_bits = half.clone();
    key_bits.extend_from_slice(&half);
    let true_key = KeyVector::new(key_bits);

    let mut rename = std::collections::HashMap::new();
    rename.insert(po, po_raw.clone());
    let mut b = Netlist::builder();
    copy_with_renames(&mut b, n, &rename)?;

    let existing_keys = n.key_count();
    let mut keys = Vec::with_capacity(p);
    for i in 0..p {
        let index = existing_keys + i;
        keys.push(b.add_key_input(&format!("keyinput{index}"), Some(index as u64))?);
    }

    // leaf compare gates; the complement tree's single-leaf case absorbs
    // its negation into an XNOR leaf
    let mut g_leaves = Vec::with_capacity(m);
    let mut gbar_leaves = Vec::with_capacity(m);
    for (j, &x) in chosen.iter().enumerate() {
        let xn = b.net(n.name(x));
        g_leaves.push(b.add_gate(&format!("ll_g_cmp{j}"), GateKind::Xor, &[xn, keys[j]])?);
        let gbar_kind = if m == 1 { GateKind::Xnor } else { GateKind::Xor };
        gbar_leaves.push(b.add_gate(&format!("ll_h_cmp{j}"), gbar_kind, &[xn, keys[m + j]])?);
    }

    let g_root = tree_with_root(&mut b, "ll_g", g_leaves, &levels, false)?;
    let gbar_root = tree_with_root(&mut b, "ll_h", gbar_leaves, &levels, true)?;
    let flip = b.add_gate("ll_flip", GateKind::And, &[g_root, gbar_root])?;
    let po_raw_net = b.net(&po_raw);
    b.add_gate(&po_name, GateKind::Xor, &[po_raw_net, flip])?;

    for &o in n.outputs() {
        b.add_output(n.name(o))?;
    }

    let mut record = LockRecord::new(scheme, true_key, seed);
    record.protected_output = Some(po_name);
    record.compare_inputs = Some(chosen.iter().map(|&x| n.name(x).to_string()).collect());
    record.tree_levels = Some(levels);
    Ok(LockResult { netlist: b.build()?, record })
}

/// Balanced tree where the root gate is complemented when `complement`.
/// A single leaf passes through: its negation was folded into the leaf.
fn tree_with_root(
    b: &mut crate::netlist::NetlistBuilder,
    prefix: &str,
    leaves: Vec<NetId>,
    levels: &[TreeLevel],
    complement: bool,
) -> Result<NetId, LockError> {
    // halving with odd pass-through reaches the root in exactly
    // levels.len() steps, so the root gate sits at the final level
    let total = levels.len();
    balanced_tree(b, prefix, leaves, |level| {
        if complement && level + 1 == total {
            levels[level].complement_root()
        } else {
            levels[level].gate()
        }
    })
}
