//! Random key-gate insertion.
//!
//! Each selected internal net `w` is displaced: the driving gate's output
//! is renamed, and `w` is re-driven by `XOR(w_raw, keyinput_i)` when the
//! true key bit is 0, `XNOR` when it is 1. Either way the net carries its
//! original value exactly when the key bit is correct.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{GateKind, KeyVector, NetId, Netlist};

use super::{copy_with_renames, fresh_name, LockError, LockRecord, LockResult, LockScheme};

#[derive(Debug, Clone)]
pub struct RllOptions {
    /// Allow key gates on nets that directly drive a primary output.
    /// Off by default: output-side key gates fall to trivial constant
    /// propagation from the output side and make weak benchmarks.
    pub include_po_drivers: bool,
    /// First key index to use; later indices follow. Nonzero when another
    /// scheme already owns the low key range.
    pub key_index_base: usize,
}

impl Default for RllOptions {
    fn default() -> Self {
        RllOptions { include_po_drivers: false, key_index_base: 0 }
    }
}

pub fn lock_rll(n: &Netlist, p: usize, seed: u64) -> Result<LockResult, LockError> {
    lock_rll_with(n, p, seed, &RllOptions::default())
}

pub fn lock_rll_with(n: &Netlist, p: usize, seed: u64, opts: &RllOptions) -> Result<LockResult, LockError> {
    if p == 0 {
        return Err(LockError::ZeroWidth);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let live = n.live_nets();
    let po_driven: Vec<bool> = {
        let mut v = vec![false; n.net_count()];
        for &o in n.outputs() {
            v[o.index()] = true;
        }
        v
    };
    let mut candidates: Vec<NetId> = n
        .internal_nets()
        .filter(|id| live[id.index()] && (opts.include_po_drivers || !po_driven[id.index()]))
        .filter(|id| {
            // constant cells make degenerate sites: the key gate would be
            // an inverter or buffer of a constant
            !matches!(n.driver_of(*id).map(|g| g.kind), Some(GateKind::Const0 | GateKind::Const1))
        })
        .collect();
    if candidates.len() < p {
        return Err(LockError::NotEnough { what: "insertion sites", need: p, have: candidates.len() });
    }
    candidates.shuffle(&mut rng);
    candidates.truncate(p);
    let bits: Vec<bool> = (0..p).map(|_| rng.gen()).collect();
    let sites: Vec<String> = candidates.iter().map(|&id| n.name(id).to_string()).collect();
    let site_refs: Vec<&str> = sites.iter().map(|s| s.as_str()).collect();
    let mut result = lock_rll_at_with(n, &site_refs, &bits, opts)?;
    result.record.seed = seed;
    Ok(result)
}

/// Deterministic variant: lock exactly these nets with these key bits.
/// Site `i` gets key bit `opts.key_index_base + i`.
pub fn lock_rll_at(n: &Netlist, sites: &[&str], bits: &[bool]) -> Result<LockResult, LockError> {
    lock_rll_at_with(n, sites, bits, &RllOptions::default())
}

fn lock_rll_at_with(n: &Netlist, sites: &[&str], bits: &[bool], opts: &RllOptions) -> Result<LockResult, LockError> {
    assert_eq!(sites.len(), bits.len());
    if sites.is_empty() {
        return Err(LockError::ZeroWidth);
    }
    let mut rename: HashMap<NetId, String> = HashMap::new();
    let mut resolved: Vec<(NetId, String)> = Vec::with_capacity(sites.len());
    for &s in sites {
        let id = n
            .find_net(s)
            .ok_or_else(|| crate::netlist::NetlistError::UnknownNet(s.to_string()))?;
        if n.driver_of(id).is_none() {
            return Err(LockError::SiteNotInternal(s.to_string()));
        }
        let raw = fresh_name(n, s);
        rename.insert(id, raw.clone());
        resolved.push((id, raw));
    }

    let mut b = Netlist::builder();
    copy_with_renames(&mut b, n, &rename)?;
    for (i, ((site, raw), &bit)) in resolved.iter().zip(bits).enumerate() {
        let index = opts.key_index_base + i;
        let key_name = format!("keyinput{index}");
        let key = b.add_key_input(&key_name, Some(index as u64))?;
        let raw_net = b.net(raw);
        let kind = if bit { GateKind::Xnor } else { GateKind::Xor };
        b.add_gate(n.name(*site), kind, &[raw_net, key])?;
    }
    for &po in n.outputs() {
        b.add_output(n.name(po))?;
    }

    let mut record = LockRecord::new(LockScheme::Rll, KeyVector::new(bits.to_vec()), 0);
    record.insertion_sites = Some(sites.iter().map(|s| s.to_string()).collect());
    Ok(LockResult { netlist: b.build()?, record })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locking::test_support::agreed_equivalence;
    use crate::locking::{apply_key, LockError};
    use crate::netlist::{generate, parse_bench, structural_signature};

    const MAJORITY: &str = "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\n\
        ab = AND(a, b)\nac = AND(a, c)\nbc = AND(b, c)\nf = OR(ab, ac, bc)\n";

    #[test]
    fn adds_exactly_p_gates_and_keys() {
        let n = parse_bench(MAJORITY).unwrap();
        let locked = lock_rll(&n, 2, 7).unwrap();
        assert_eq!(locked.netlist.gate_count(), n.gate_count() + 2);
        assert_eq!(locked.netlist.key_count(), 2);
        assert_eq!(locked.record.true_key.len(), 2);
        let kinds: Vec<_> = locked
            .netlist
            .gates()
            .iter()
            .filter(|g| g.kind.is_xor_like())
            .map(|g| g.kind)
            .collect();
        assert_eq!(kinds.len(), 2);
    }

    #[test]
    fn true_key_restores_function_wrong_key_corrupts() {
        let n = parse_bench(MAJORITY).unwrap();
        let locked = lock_rll(&n, 2, 3).unwrap();
        let unlocked = apply_key(&locked.netlist, &locked.record.true_key).unwrap();
        assert!(agreed_equivalence(&n, &unlocked));
        // flip each key bit in turn: XOR/XNOR sites on a majority circuit
        // always corrupt because every internal net is observable
        for i in 0..2 {
            let mut wrong = locked.record.true_key.clone();
            wrong.set(i, !wrong.bit(i));
            let broken = apply_key(&locked.netlist, &wrong).unwrap();
            assert!(!agreed_equivalence(&n, &broken), "bit {i}");
        }
    }

    #[test]
    fn xor_site_means_zero_bit_xnor_means_one() {
        let n = parse_bench(MAJORITY).unwrap();
        let locked = lock_rll_at(&n, &["ab", "ac"], &[false, true]).unwrap();
        let gates = locked.netlist.gates();
        let ab = locked.netlist.find_net("ab").unwrap();
        let ac = locked.netlist.find_net("ac").unwrap();
        let kind_of = |id| gates.iter().find(|g| g.output == id).unwrap().kind;
        assert_eq!(kind_of(ab), GateKind::Xor);
        assert_eq!(kind_of(ac), GateKind::Xnor);
        assert_eq!(locked.record.true_key.to_bit_string(), "01");
    }

    #[test]
    fn po_drivers_are_excluded_by_default() {
        let n = parse_bench(MAJORITY).unwrap();
        // only 3 non-PO internal nets exist; asking for 4 must fail
        assert!(matches!(
            lock_rll(&n, 4, 0),
            Err(LockError::NotEnough { need: 4, have: 3, .. })
        ));
        let opts = RllOptions { include_po_drivers: true, ..Default::default() };
        assert!(lock_rll_with(&n, 4, 0, &opts).is_ok());
    }

    #[test]
    fn same_seed_same_lock_different_seed_different_sites() {
        let n = generate::random_netlist(&generate::GeneratorConfig::sized(10, 4, 120, 5));
        let a = lock_rll(&n, 8, 11).unwrap();
        let b = lock_rll(&n, 8, 11).unwrap();
        assert_eq!(a.netlist, b.netlist);
        assert_eq!(a.record, b.record);
        assert_eq!(structural_signature(&a.netlist), structural_signature(&b.netlist));
        let c = lock_rll(&n, 8, 12).unwrap();
        assert_ne!(a.record.insertion_sites, c.record.insertion_sites);
    }

    #[test]
    fn locking_locked_netlist_appends_key_range() {
        let n = parse_bench(MAJORITY).unwrap();
        let first = lock_rll(&n, 2, 1).unwrap();
        let opts = RllOptions { key_index_base: 2, ..Default::default() };
        let second = lock_rll_with(&first.netlist, 2, 9, &opts).unwrap();
        assert_eq!(second.netlist.key_count(), 4);
        let names: Vec<_> =
            second.netlist.key_inputs().iter().map(|&k| second.netlist.name(k).to_string()).collect();
        assert_eq!(names, ["keyinput0", "keyinput1", "keyinput2", "keyinput3"]);
    }
}
