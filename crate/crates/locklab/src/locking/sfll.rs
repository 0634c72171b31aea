//! Stripped-functionality locking around one protected input pattern, and
//! the compound lock that layers key-gate insertion on top of it.
//!
//! The stripped scheme removes one minterm from a chosen output and hands
//! its location to the key:
//!
//! ```text
//! perturb = AND-tree of input literals matching a hard-coded pattern
//! restore = AND-tree( XNOR(x_0, k_0), ..., XNOR(x_{p-1}, k_{p-1}) )
//! po      = XOR( XOR(po_raw, perturb), restore )
//! ```
//!
//! The true key is the pattern itself: then the two flips cancel
//! everywhere. A wrong key `k` corrupts the output on exactly the inputs
//! whose projection onto the compared inputs is `pattern` (stripped but
//! not restored) or `k` (restored in the wrong place).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{GateKind, KeyVector, NetId, Netlist};
use crate::seed_split;

use super::{
    balanced_tree, copy_with_renames, fresh_name, lock_rll_with, CompoundSplit, LockError,
    LockRecord, LockResult, LockScheme, RllOptions,
};

/// Locks one output with a `p`-bit protected pattern; the key is the
/// pattern.
pub fn lock_sfll_point(n: &Netlist, p: usize, seed: u64) -> Result<LockResult, LockError> {
    if p == 0 {
        return Err(LockError::ZeroWidth);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let live = n.live_nets();
    let mut pis: Vec<NetId> = n.inputs().iter().copied().filter(|pi| live[pi.index()]).collect();
    if pis.len() < p {
        return Err(LockError::NotEnough { what: "live primary inputs", need: p, have: pis.len() });
    }
    pis.shuffle(&mut rng);
    pis.truncate(p);
    let chosen = pis;

    let driven_pos: Vec<NetId> =
        n.outputs().iter().copied().filter(|&o| n.driver_of(o).is_some()).collect();
    if driven_pos.is_empty() {
        return Err(LockError::NotEnough { what: "gate-driven outputs", need: 1, have: 0 });
    }
    let po = driven_pos[rng.gen_range(0..driven_pos.len())];
    let po_name = n.name(po).to_string();
    let po_raw = fresh_name(n, &po_name);

    let pattern: Vec<bool> = (0..p).map(|_| rng.gen()).collect();

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

    // perturb leaves are literals of the hard-coded pattern: the input for
    // a 1 bit, its inversion for a 0 bit
    let mut p_leaves = Vec::with_capacity(p);
    let mut r_leaves = Vec::with_capacity(p);
    for (j, &x) in chosen.iter().enumerate() {
        let xn = b.net(n.name(x));
        if pattern[j] {
            p_leaves.push(xn);
        } else {
            p_leaves.push(b.add_gate(&format!("ll_p_lit{j}"), GateKind::Not, &[xn])?);
        }
        r_leaves.push(b.add_gate(&format!("ll_r_cmp{j}"), GateKind::Xnor, &[xn, keys[j]])?);
    }
    let perturb = balanced_tree(&mut b, "ll_p", p_leaves, |_| GateKind::And)?;
    let restore = balanced_tree(&mut b, "ll_r", r_leaves, |_| GateKind::And)?;

    let po_raw_net = b.net(&po_raw);
    let stripped = b.add_gate("ll_strip", GateKind::Xor, &[po_raw_net, perturb])?;
    b.add_gate(&po_name, GateKind::Xor, &[stripped, restore])?;

    for &o in n.outputs() {
        b.add_output(n.name(o))?;
    }

    let mut record = LockRecord::new(LockScheme::SfllPoint, KeyVector::new(pattern.clone()), seed);
    record.protected_output = Some(po_name);
    record.protected_pattern = Some(KeyVector::new(pattern));
    record.compare_inputs = Some(chosen.iter().map(|&x| n.name(x).to_string()).collect());
    Ok(LockResult { netlist: b.build()?, record })
}

/// Stripped-pattern lock followed by key-gate insertion over the combined
/// netlist. Key bits `[0, p_sfll)` belong to the pattern stage, the rest
/// to the inserted gates.
pub fn lock_compound(
    n: &Netlist,
    p_sfll: usize,
    p_rll: usize,
    seed: u64,
) -> Result<LockResult, LockError> {
    if p_sfll == 0 || p_rll == 0 {
        return Err(LockError::ZeroWidth);
    }
    let stage1 = lock_sfll_point(n, p_sfll, seed_split(seed, "compound-sfll", 0))?;
    let opts = RllOptions { include_po_drivers: false, key_index_base: p_sfll };
    let stage2 = lock_rll_with(
        &stage1.netlist,
        p_rll,
        seed_split(seed, "compound-rll", 0),
        &opts,
    )?;

    let mut bits = stage1.record.true_key.bits().to_vec();
    bits.extend_from_slice(stage2.record.true_key.bits());
    let mut record = LockRecord::new(LockScheme::Compound, KeyVector::new(bits), seed);
    record.insertion_sites = stage2.record.insertion_sites;
    record.protected_output = stage1.record.protected_output;
    record.protected_pattern = stage1.record.protected_pattern;
    record.compare_inputs = stage1.record.compare_inputs;
    record.compound =
        Some(CompoundSplit { sfll: (0, p_sfll), rll: (p_sfll, p_sfll + p_rll) });
    Ok(LockResult { netlist: stage2.netlist, record })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locking::apply_key;
    use crate::locking::test_support::agreed_equivalence;
    use crate::netlist::{generate, parse_bench};

    const MAJORITY: &str = "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\n\
        ab = AND(a, b)\nac = AND(a, c)\nbc = AND(b, c)\nf = OR(ab, ac, bc)\n";

    #[test]
    fn true_key_is_the_pattern_and_restores_function() {
        let n = parse_bench(MAJORITY).unwrap();
        let locked = lock_sfll_point(&n, 2, 11).unwrap();
        assert_eq!(locked.record.true_key, locked.record.protected_pattern.clone().unwrap());
        let unlocked = apply_key(&locked.netlist, &locked.record.true_key).unwrap();
        assert!(agreed_equivalence(&n, &unlocked));
    }

    #[test]
    fn wrong_key_corrupts_exactly_two_projections() {
        let n = parse_bench(MAJORITY).unwrap();
        let locked = lock_sfll_point(&n, 2, 3).unwrap();
        let pattern = locked.record.true_key.clone();
        // projection of a full input vector onto the compared inputs
        let cmp: Vec<usize> = locked
            .record
            .compare_inputs
            .as_ref()
            .unwrap()
            .iter()
            .map(|name| {
                let id = n.find_net(name).unwrap();
                n.inputs().iter().position(|&pi| pi == id).unwrap()
            })
            .collect();
        for key in 0u32..4 {
            let kbits: Vec<bool> = (0..2).map(|i| (key >> i) & 1 == 1).collect();
            let fixed = apply_key(&locked.netlist, &KeyVector::new(kbits.clone())).unwrap();
            for x in 0u32..8 {
                let bits = [(x & 1) != 0, (x & 2) != 0, (x & 4) != 0];
                let proj: Vec<bool> = cmp.iter().map(|&i| bits[i]).collect();
                let expect_diff = kbits != pattern.bits()
                    && (proj == pattern.bits() || proj == kbits);
                let differs =
                    n.simulate(&bits, &[]).unwrap() != fixed.simulate(&bits, &[]).unwrap();
                assert_eq!(differs, expect_diff, "key {key:02b} x {x:03b}");
            }
        }
    }

    #[test]
    fn gate_budget_is_literals_plus_trees_plus_two_xors() {
        let n = generate::random_netlist(&generate::GeneratorConfig::sized(10, 3, 80, 7));
        for p in [1usize, 3, 8] {
            let locked = lock_sfll_point(&n, p, 13).unwrap();
            let zeros =
                locked.record.true_key.bits().iter().filter(|&&b| !b).count();
            let expected = zeros + (p - 1) + p + (p - 1) + 2;
            assert_eq!(
                locked.netlist.gate_count(),
                n.gate_count() + expected,
                "p = {p}"
            );
        }
    }

    #[test]
    fn compound_concatenates_keys_and_restores() {
        let n = generate::random_netlist(&generate::GeneratorConfig::sized(8, 3, 60, 2));
        let locked = lock_compound(&n, 3, 5, 17).unwrap();
        assert_eq!(locked.netlist.key_count(), 8);
        assert_eq!(locked.record.true_key.len(), 8);
        let split = locked.record.compound.unwrap();
        assert_eq!(split.sfll, (0, 3));
        assert_eq!(split.rll, (3, 8));
        // key inputs are ordered by index across both stages
        let names: Vec<_> =
            locked.netlist.key_inputs().iter().map(|&k| locked.netlist.name(k)).collect();
        assert_eq!(
            names,
            (0..8).map(|i| format!("keyinput{i}")).collect::<Vec<_>>()
        );
        let unlocked = apply_key(&locked.netlist, &locked.record.true_key).unwrap();
        assert!(agreed_equivalence(&n, &unlocked));
    }

    #[test]
    fn compound_wrong_pattern_bit_breaks_equivalence() {
        // pattern-stage bits carry a corruption guarantee; inserted key
        // gates do not (an inverted net can be masked by reconvergence)
        let n = generate::random_netlist(&generate::GeneratorConfig::sized(8, 3, 60, 2));
        let locked = lock_compound(&n, 3, 5, 17).unwrap();
        let mut wrong = locked.record.true_key.clone();
        wrong.set(1, !wrong.bit(1));
        let fixed = apply_key(&locked.netlist, &wrong).unwrap();
        assert!(!agreed_equivalence(&n, &fixed));
    }
}
