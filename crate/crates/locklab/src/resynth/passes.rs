//! Netlist-level cleanup passes: constant propagation, structural hashing,
//! dead-gate sweeping, and chain balancing.
//!
//! Each pass rebuilds the netlist, preserving the primary input, key input,
//! and primary output interface by name. Internal nets keep their names
//! unless a pass erases or repurposes their gates. Two passes carry
//! contracts the rest of the pipeline relies on: `constprop` never
//! increases the gate count and `balance` never increases the depth.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::netlist::{GateKind, NetId, Netlist};

/// Simplified value of an original net inside a rebuild.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Const(bool),
    /// Net id in the new builder.
    Net(NetId),
}

/// Result of folding one gate.
enum Folded {
    Const(bool),
    Alias(Val),
    Gate(GateKind, Vec<Val>),
}

/// Shared rebuild scaffolding: copies the interface, tracks the value of
/// every original net, and patches up primary outputs whose driving gate
/// was folded away.
struct Rebuild {
    b: crate::netlist::NetlistBuilder,
    val: Vec<Option<Val>>,
    /// Whether the original net's name is present and driven in the new
    /// netlist (true for interface nets and gates emitted under their old
    /// name).
    named: Vec<bool>,
    level: Vec<u32>,
    const_nets: [Option<NetId>; 2],
    reserved: HashSet<String>,
}

impl Rebuild {
    fn new(n: &Netlist) -> Self {
        let mut b = Netlist::builder();
        let mut val = vec![None; n.net_count()];
        let mut named = vec![false; n.net_count()];
        let mut level = Vec::new();
        for &pi in n.inputs() {
            let id = b.add_input(n.name(pi)).expect("interface copy");
            val[pi.index()] = Some(Val::Net(id));
            named[pi.index()] = true;
            grow(&mut level, id, 0);
        }
        for &k in n.key_inputs() {
            let name = n.name(k);
            let id = b.add_key_input(name, Netlist::name_suffix(name)).expect("interface copy");
            val[k.index()] = Some(Val::Net(id));
            named[k.index()] = true;
            grow(&mut level, id, 0);
        }
        let reserved = (0..n.net_count()).map(|i| n.name(NetId(i as u32)).to_string()).collect();
        Rebuild { b, val, named, level, const_nets: [None, None], reserved }
    }

    fn value(&self, old: NetId) -> Val {
        self.val[old.index()].expect("gates arrive in topological order")
    }

    fn emit_gate(&mut self, name: &str, kind: GateKind, fanins: &[NetId]) -> NetId {
        let lvl = fanins.iter().map(|f| self.level[f.index()]).max().map_or(0, |m| m + 1);
        let id = self.b.add_gate(name, kind, fanins).expect("pass rebuild");
        grow(&mut self.level, id, lvl);
        id
    }

    fn materialize(&mut self, v: Val) -> NetId {
        match v {
            Val::Net(id) => id,
            Val::Const(c) => self.const_net(c),
        }
    }

    /// Constant net, materialized at most once per polarity. Every constant
    /// value reaching here came from at least one dropped gate, so the
    /// gate-count contract of `constprop` is preserved.
    fn const_net(&mut self, v: bool) -> NetId {
        if let Some(id) = self.const_nets[v as usize] {
            return id;
        }
        let base = if v { "cp_one" } else { "cp_zero" };
        let mut name = base.to_string();
        let mut i = 0;
        while self.reserved.contains(&name) {
            i += 1;
            name = format!("{base}{i}");
        }
        self.reserved.insert(name.clone());
        let kind = if v { GateKind::Const1 } else { GateKind::Const0 };
        let id = self.emit_gate(&name, kind, &[]);
        self.const_nets[v as usize] = Some(id);
        id
    }

    /// Records the folded result for one original gate output.
    fn set(&mut self, n: &Netlist, old: NetId, folded: Folded) {
        let v = match folded {
            Folded::Const(c) => Val::Const(c),
            Folded::Alias(v) => v,
            Folded::Gate(kind, vals) => {
                let fanins: Vec<NetId> = vals.iter().map(|&v| self.materialize(v)).collect();
                let id = self.emit_gate(n.name(old), kind, &fanins);
                self.named[old.index()] = true;
                Val::Net(id)
            }
        };
        self.val[old.index()] = Some(v);
    }

    /// Re-drives primary outputs whose gate was folded away and finalizes.
    fn finish(mut self, n: &Netlist) -> Netlist {
        for &po in n.outputs() {
            let name = n.name(po);
            match self.value(po) {
                Val::Net(_) if self.named[po.index()] => {}
                Val::Net(id) => {
                    self.emit_gate(name, GateKind::Buf, &[id]);
                }
                Val::Const(c) => {
                    let kind = if c { GateKind::Const1 } else { GateKind::Const0 };
                    self.emit_gate(name, kind, &[]);
                }
            }
            self.b.add_output(name).expect("interface copy");
        }
        self.b.build().expect("pass rebuild produces a valid netlist")
    }
}

fn grow(level: &mut Vec<u32>, id: NetId, lvl: u32) {
    if level.len() <= id.index() {
        level.resize(id.index() + 1, 0);
    }
    level[id.index()] = lvl;
}

fn commutative(kind: GateKind) -> bool {
    matches!(
        kind,
        GateKind::And | GateKind::Or | GateKind::Nand | GateKind::Nor | GateKind::Xor | GateKind::Xnor
    )
}

/// Folds constants through gates, drops buffers and aliases, and removes
/// duplicate fanins of idempotent gates. Never increases the gate count.
pub fn constprop(n: &Netlist) -> Netlist {
    let mut r = Rebuild::new(n);
    for g in n.gates() {
        let vals: Vec<Val> = g.fanins.iter().map(|&f| r.value(f)).collect();
        let folded = fold_gate(g.kind, &vals);
        r.set(n, g.output, folded);
    }
    r.finish(n)
}

fn fold_gate(kind: GateKind, vals: &[Val]) -> Folded {
    use GateKind::*;
    match kind {
        Const0 => Folded::Const(false),
        Const1 => Folded::Const(true),
        Buf => Folded::Alias(vals[0]),
        Not => match vals[0] {
            Val::Const(c) => Folded::Const(!c),
            v => Folded::Gate(Not, vec![v]),
        },
        And | Nand | Or | Nor => {
            let neg_out = matches!(kind, Nand | Nor);
            // OR is AND with the dominant constant flipped
            let dominant = matches!(kind, Or | Nor);
            let mut nets: Vec<Val> = Vec::new();
            let mut seen = HashSet::new();
            for &v in vals {
                match v {
                    Val::Const(c) if c == dominant => return Folded::Const(dominant ^ neg_out),
                    Val::Const(_) => {}
                    Val::Net(id) => {
                        if seen.insert(id) {
                            nets.push(v);
                        }
                    }
                }
            }
            match nets.len() {
                0 => Folded::Const(!dominant ^ neg_out),
                1 if !neg_out => Folded::Alias(nets[0]),
                1 => Folded::Gate(Not, nets),
                _ => Folded::Gate(kind, nets),
            }
        }
        Xor | Xnor => {
            // pairs cancel; constants fold into the output phase
            let mut phase = matches!(kind, Xnor);
            let mut order: Vec<NetId> = Vec::new();
            let mut parity: HashMap<NetId, bool> = HashMap::new();
            for &v in vals {
                match v {
                    Val::Const(c) => phase ^= c,
                    Val::Net(id) => {
                        let e = parity.entry(id).or_insert_with(|| {
                            order.push(id);
                            false
                        });
                        *e = !*e;
                    }
                }
            }
            let nets: Vec<Val> =
                order.iter().filter(|id| parity[id]).map(|&id| Val::Net(id)).collect();
            match nets.len() {
                0 => Folded::Const(phase),
                1 if !phase => Folded::Alias(nets[0]),
                1 => Folded::Gate(Not, nets),
                _ => Folded::Gate(if phase { Xnor } else { Xor }, nets),
            }
        }
        Mux => {
            let (s, d0, d1) = (vals[0], vals[1], vals[2]);
            match s {
                Val::Const(c) => Folded::Alias(if c { d1 } else { d0 }),
                _ if d0 == d1 => Folded::Alias(d0),
                _ => match (d0, d1) {
                    (Val::Const(false), Val::Const(true)) => Folded::Alias(s),
                    (Val::Const(true), Val::Const(false)) => Folded::Gate(Not, vec![s]),
                    _ => Folded::Gate(Mux, vec![s, d0, d1]),
                },
            }
        }
    }
}

/// Merges structurally identical gates (same kind, same fanins up to
/// commutativity); later duplicates alias the first occurrence.
pub fn strash(n: &Netlist) -> Netlist {
    let mut r = Rebuild::new(n);
    let mut seen: HashMap<(GateKind, Vec<NetId>), Val> = HashMap::new();
    for g in n.gates() {
        let fanins: Vec<NetId> = g.fanins.iter().map(|&f| r.materialize(r.value(f))).collect();
        let mut key_fanins = fanins.clone();
        if commutative(g.kind) {
            key_fanins.sort_unstable_by_key(|id| id.index());
        }
        let key = (g.kind, key_fanins);
        if let Some(&rep) = seen.get(&key) {
            r.val[g.output.index()] = Some(rep);
        } else {
            let folded = Folded::Gate(g.kind, fanins.into_iter().map(Val::Net).collect());
            r.set(n, g.output, folded);
            seen.insert(key, r.value(g.output));
        }
    }
    r.finish(n)
}

/// Drops gates that no primary output transitively reads.
pub fn sweep(n: &Netlist) -> Netlist {
    let live = n.live_nets();
    let mut r = Rebuild::new(n);
    for g in n.gates() {
        if !live[g.output.index()] {
            continue;
        }
        let vals: Vec<Val> = g.fanins.iter().map(|&f| r.value(f)).collect();
        r.set(n, g.output, Folded::Gate(g.kind, vals));
    }
    r.finish(n)
}

/// Rebuilds chains of two-input AND (or OR) gates as depth-minimal trees.
/// A chain member is a two-input gate whose sole consumer is another gate
/// of the same kind and shape; the shallowest-first rebuild guarantees the
/// result is never deeper than the original chain.
pub fn balance(n: &Netlist) -> Netlist {
    let gates = n.gates();
    let mut fanout = vec![0usize; n.net_count()];
    for g in gates {
        for &f in &g.fanins {
            fanout[f.index()] += 1;
        }
    }
    for &po in n.outputs() {
        fanout[po.index()] += 1;
    }
    let mut consumer: Vec<Option<usize>> = vec![None; n.net_count()];
    for (gi, g) in gates.iter().enumerate() {
        for &f in &g.fanins {
            if fanout[f.index()] == 1 {
                consumer[f.index()] = Some(gi);
            }
        }
    }
    let collapsible =
        |gi: usize| matches!(gates[gi].kind, GateKind::And | GateKind::Or) && gates[gi].fanins.len() == 2;
    let mut gate_of_net: Vec<Option<usize>> = vec![None; n.net_count()];
    for (gi, g) in gates.iter().enumerate() {
        gate_of_net[g.output.index()] = Some(gi);
    }
    let mut is_middle = vec![false; gates.len()];
    for (gi, g) in gates.iter().enumerate() {
        if !collapsible(gi) {
            continue;
        }
        if let Some(ci) = consumer[g.output.index()] {
            if collapsible(ci) && gates[ci].kind == g.kind {
                is_middle[gi] = true;
            }
        }
    }

    let mut r = Rebuild::new(n);
    for (gi, g) in gates.iter().enumerate() {
        if is_middle[gi] {
            continue; // emitted as part of its chain root
        }
        let feeds_chain = collapsible(gi)
            && g.fanins.iter().any(|f| gate_of_net[f.index()].is_some_and(|d| is_middle[d]));
        if !feeds_chain {
            let vals: Vec<Val> = g.fanins.iter().map(|&f| r.value(f)).collect();
            r.set(n, g.output, Folded::Gate(g.kind, vals));
            continue;
        }

        // collect tree leaves and claimed member gates depth-first
        let mut leaves: Vec<NetId> = Vec::new();
        let mut members: Vec<usize> = Vec::new();
        let mut stack: Vec<NetId> = vec![g.fanins[1], g.fanins[0]];
        while let Some(f) = stack.pop() {
            match gate_of_net[f.index()] {
                Some(d) if is_middle[d] && gates[d].kind == g.kind => {
                    members.push(d);
                    stack.push(gates[d].fanins[1]);
                    stack.push(gates[d].fanins[0]);
                }
                _ => leaves.push(f),
            }
        }
        members.sort_unstable();
        let mut names: Vec<String> =
            members.iter().map(|&d| n.name(gates[d].output).to_string()).collect();
        names.push(n.name(g.output).to_string());

        // shallowest-first combining; ties broken by insertion order
        let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
        let mut by_seq: Vec<NetId> = Vec::new();
        for &leaf in &leaves {
            let id = r.materialize(r.value(leaf));
            heap.push(Reverse((r.level[id.index()], by_seq.len() as u32)));
            by_seq.push(id);
        }
        let mut root = by_seq[0];
        for name in &names {
            let Reverse((_, s1)) = heap.pop().expect("tree has enough leaves");
            let Reverse((_, s2)) = heap.pop().expect("tree has enough leaves");
            let id = r.emit_gate(name, g.kind, &[by_seq[s1 as usize], by_seq[s2 as usize]]);
            heap.push(Reverse((r.level[id.index()], by_seq.len() as u32)));
            by_seq.push(id);
            root = id;
        }
        r.val[g.output.index()] = Some(Val::Net(root));
        r.named[g.output.index()] = true;
    }
    r.finish(n)
}
