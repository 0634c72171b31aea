//! And-inverter graph: the internal form all restructuring passes run on.
//!
//! Nodes are two-input ANDs with complemented edges; node 0 is constant
//! false. Construction hash-conses structurally identical nodes and folds
//! trivial cases, so any graph built through `and` is structurally hashed
//! by definition. Ingesting a netlist decomposes every gate into this form
//! (x XOR y becomes (x AND NOT y) OR (NOT x AND y)), which is what
//! guarantees resynthesized outputs carry no XOR-like cells.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::netlist::{GateKind, Netlist};

pub(crate) const LIT_FALSE: Lit = Lit(0);
pub(crate) const LIT_TRUE: Lit = Lit(1);

/// Edge literal: node index with a complement bit in the low bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub(crate) struct Lit(pub u32);

impl Lit {
    pub fn of(node: u32, compl: bool) -> Lit {
        Lit(node << 1 | compl as u32)
    }

    pub fn node(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn compl(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    pub fn xor_sign(self, s: bool) -> Lit {
        Lit(self.0 ^ s as u32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum NodeKind {
    Const,
    /// Index into the combined input space: primary inputs, then keys.
    Input(usize),
    And(Lit, Lit),
}

#[derive(Clone, Debug)]
pub(crate) struct Aig {
    nodes: Vec<NodeKind>,
    level: Vec<u32>,
    strash: HashMap<(Lit, Lit), u32>,
    pub pi_names: Vec<String>,
    pub key_names: Vec<String>,
    pub outputs: Vec<(String, Lit)>,
}

impl Aig {
    pub fn new(pi_names: Vec<String>, key_names: Vec<String>) -> Aig {
        let count = pi_names.len() + key_names.len();
        let mut nodes = vec![NodeKind::Const];
        let mut level = vec![0];
        for i in 0..count {
            nodes.push(NodeKind::Input(i));
            level.push(0);
        }
        Aig { nodes, level, strash: HashMap::new(), pi_names, key_names, outputs: Vec::new() }
    }

    pub fn input(&self, i: usize) -> Lit {
        debug_assert!(i < self.num_inputs());
        Lit::of(1 + i as u32, false)
    }

    pub fn num_inputs(&self) -> usize {
        self.pi_names.len() + self.key_names.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, i: usize) -> NodeKind {
        self.nodes[i]
    }

    pub fn level_of(&self, l: Lit) -> u32 {
        self.level[l.node()]
    }

    /// Count of live AND nodes, the size metric every gain estimate uses.
    pub fn and_count(&self) -> usize {
        let live = self.live();
        self.nodes
            .iter()
            .enumerate()
            .filter(|(i, k)| live[*i] && matches!(k, NodeKind::And(..)))
            .count()
    }

    pub fn depth(&self) -> u32 {
        self.outputs.iter().map(|(_, l)| self.level[l.node()]).max().unwrap_or(0)
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == LIT_FALSE || b == LIT_FALSE || a == b.not() {
            return LIT_FALSE;
        }
        if a == LIT_TRUE {
            return b;
        }
        if b == LIT_TRUE || a == b {
            return a;
        }
        let (a, b) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        if let Some(&n) = self.strash.get(&(a, b)) {
            return Lit::of(n, false);
        }
        let n = self.nodes.len() as u32;
        self.nodes.push(NodeKind::And(a, b));
        self.level.push(1 + self.level[a.node()].max(self.level[b.node()]));
        self.strash.insert((a, b), n);
        Lit::of(n, false)
    }

    /// Hash-cons lookup without insertion: the literal this pair would
    /// fold to if the node already exists. Callers are expected to have
    /// applied the trivial folds first.
    pub fn probe(&self, a: Lit, b: Lit) -> Option<Lit> {
        let (a, b) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        self.strash.get(&(a, b)).map(|&n| Lit::of(n, false))
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        self.and(a.not(), b.not()).not()
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let l = self.and(a, b.not());
        let r = self.and(a.not(), b);
        self.or(l, r)
    }

    pub fn mux(&mut self, s: Lit, d0: Lit, d1: Lit) -> Lit {
        let t = self.and(s, d1);
        let e = self.and(s.not(), d0);
        self.or(t, e)
    }

    pub fn and_many(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().copied().fold(LIT_TRUE, |acc, l| self.and(acc, l))
    }

    pub fn or_many(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().copied().fold(LIT_FALSE, |acc, l| self.or(acc, l))
    }

    pub fn from_netlist(n: &Netlist) -> Aig {
        let pi_names = n.inputs().iter().map(|&i| n.name(i).to_string()).collect();
        let key_names = n.key_inputs().iter().map(|&k| n.name(k).to_string()).collect();
        let mut aig = Aig::new(pi_names, key_names);
        let npi = n.inputs().len();
        let mut map: Vec<Lit> = vec![LIT_FALSE; n.net_count()];
        for (i, &pi) in n.inputs().iter().enumerate() {
            map[pi.index()] = aig.input(i);
        }
        for (j, &k) in n.key_inputs().iter().enumerate() {
            map[k.index()] = aig.input(npi + j);
        }
        for g in n.gates() {
            let f: Vec<Lit> = g.fanins.iter().map(|&x| map[x.index()]).collect();
            let v = match g.kind {
                GateKind::And => aig.and_many(&f),
                GateKind::Nand => aig.and_many(&f).not(),
                GateKind::Or => aig.or_many(&f),
                GateKind::Nor => aig.or_many(&f).not(),
                GateKind::Not => f[0].not(),
                GateKind::Buf => f[0],
                GateKind::Xor => f.iter().skip(1).fold(f[0], |acc, &l| aig.xor(acc, l)),
                GateKind::Xnor => f.iter().skip(1).fold(f[0], |acc, &l| aig.xor(acc, l)).not(),
                GateKind::Mux => aig.mux(f[0], f[1], f[2]),
                GateKind::Const0 => LIT_FALSE,
                GateKind::Const1 => LIT_TRUE,
            };
            map[g.output.index()] = v;
        }
        for &po in n.outputs() {
            aig.outputs.push((n.name(po).to_string(), map[po.index()]));
        }
        aig
    }

    /// Nodes reachable from any output.
    pub fn live(&self) -> Vec<bool> {
        let mut live = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self.outputs.iter().map(|(_, l)| l.node()).collect();
        while let Some(i) = stack.pop() {
            if live[i] {
                continue;
            }
            live[i] = true;
            if let NodeKind::And(a, b) = self.nodes[i] {
                stack.push(a.node());
                stack.push(b.node());
            }
        }
        live
    }

    /// Fanin reference counts over live nodes, plus one per output edge.
    pub fn refcounts(&self) -> Vec<u32> {
        let live = self.live();
        let mut refs = vec![0u32; self.nodes.len()];
        for (i, kind) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            if let NodeKind::And(a, b) = kind {
                refs[a.node()] += 1;
                refs[b.node()] += 1;
            }
        }
        for (_, l) in &self.outputs {
            refs[l.node()] += 1;
        }
        refs
    }

    /// Nodes in the transitive fanout of any key input.
    pub fn key_fanout(&self) -> Vec<bool> {
        let npi = self.pi_names.len();
        let mut scope = vec![false; self.nodes.len()];
        for (i, kind) in self.nodes.iter().enumerate() {
            match *kind {
                NodeKind::Input(k) if k >= npi => scope[i] = true,
                NodeKind::And(a, b) => scope[i] = scope[a.node()] || scope[b.node()],
                _ => {}
            }
        }
        scope
    }

    /// Longest AND-node distance from each node to any output (0 at the
    /// output-driving nodes themselves).
    pub fn heights(&self) -> Vec<u32> {
        let live = self.live();
        let mut h = vec![0u32; self.nodes.len()];
        for (_, l) in &self.outputs {
            h[l.node()] = 0;
        }
        for i in (0..self.nodes.len()).rev() {
            if !live[i] {
                continue;
            }
            if let NodeKind::And(a, b) = self.nodes[i] {
                let up = h[i] + 1;
                for c in [a, b] {
                    if h[c.node()] < up {
                        h[c.node()] = up;
                    }
                }
            }
        }
        h
    }

    /// Word-parallel evaluation; `vals` supplies one word per input in
    /// primary-input-then-key order.
    pub fn simulate_words(&self, vals: &[u64]) -> Vec<u64> {
        assert_eq!(vals.len(), self.num_inputs());
        let mut w = vec![0u64; self.nodes.len()];
        for (i, kind) in self.nodes.iter().enumerate() {
            w[i] = match *kind {
                NodeKind::Const => 0,
                NodeKind::Input(k) => vals[k],
                NodeKind::And(a, b) => lit_word(&w, a) & lit_word(&w, b),
            };
        }
        self.outputs.iter().map(|(_, l)| lit_word(&w, *l)).collect()
    }

    /// Copies only live logic into a fresh graph (dead-node sweep; folding
    /// and sharing re-apply on the way).
    pub fn rebuilt(&self) -> Aig {
        let mut out = Aig::new(self.pi_names.clone(), self.key_names.clone());
        let live = self.live();
        let mut map = vec![LIT_FALSE; self.nodes.len()];
        for (i, kind) in self.nodes.iter().enumerate() {
            match *kind {
                NodeKind::Const => {}
                NodeKind::Input(k) => map[i] = out.input(k),
                NodeKind::And(a, b) => {
                    if !live[i] {
                        continue;
                    }
                    let (ma, mb) = (translate(&map, a), translate(&map, b));
                    map[i] = out.and(ma, mb);
                }
            }
        }
        out.outputs = self
            .outputs
            .iter()
            .map(|(name, l)| (name.clone(), translate(&map, *l)))
            .collect();
        out
    }

    /// Depth-minimizing tree rebuild. Conjunction trees whose interior
    /// nodes have a single fanout are collected and recombined
    /// shallowest-first, which can only reduce the arrival level of every
    /// collected root.
    pub fn balanced(&self) -> Aig {
        self.restructure_trees(None, 2)
    }

    /// Tree rebuild with seeded leaf ordering, applied to wide conjunctions
    /// only. Same depth guarantee as `balanced`, different shapes among the
    /// depth-optimal trees.
    pub fn refactored(&self, seed: u64, scope: Option<&[bool]>) -> Aig {
        self.restructure_trees(Some((seed, scope)), 4)
    }

    /// Depth-budgeted tree shaping: conjunction trees whose root still
    /// meets `target` as a plain chain are rebuilt as chains, everything
    /// else minimum-depth. Moving the target moves the chain/tree frontier,
    /// so nearby targets produce structurally different graphs while depth
    /// stays within `max(target, minimum achievable)` on every path.
    pub fn shaped(&self, target: u32) -> Aig {
        let live = self.live();
        let refs = self.refcounts();
        let heights = self.heights();
        let mut out = Aig::new(self.pi_names.clone(), self.key_names.clone());
        let mut map = vec![LIT_FALSE; self.nodes.len()];
        for (i, kind) in self.nodes.iter().enumerate() {
            match *kind {
                NodeKind::Const => {}
                NodeKind::Input(k) => map[i] = out.input(k),
                NodeKind::And(a, b) => {
                    if !live[i] {
                        continue;
                    }
                    let leaves = self.collect_tree(i, &refs);
                    if leaves.len() < 3 {
                        map[i] = out.and(translate(&map, a), translate(&map, b));
                        continue;
                    }
                    let mapped: Vec<Lit> = leaves.iter().map(|&l| translate(&map, l)).collect();
                    let budget = target.saturating_sub(heights[i]);
                    let mut chain_level = out.level_of(mapped[0]);
                    for &l in &mapped[1..] {
                        chain_level = 1 + chain_level.max(out.level_of(l));
                    }
                    map[i] = if chain_level <= budget {
                        mapped.iter().copied().reduce(|acc, l| out.and(acc, l)).unwrap()
                    } else {
                        out.combine_min_depth(&mapped)
                    };
                }
            }
        }
        out.outputs = self
            .outputs
            .iter()
            .map(|(name, l)| (name.clone(), translate(&map, *l)))
            .collect();
        out.rebuilt()
    }

    fn restructure_trees(&self, shuffle: Option<(u64, Option<&[bool]>)>, min_leaves: usize) -> Aig {
        let live = self.live();
        let refs = self.refcounts();
        let mut out = Aig::new(self.pi_names.clone(), self.key_names.clone());
        let mut map = vec![LIT_FALSE; self.nodes.len()];
        let mut rng = shuffle.map(|(seed, _)| ChaCha8Rng::seed_from_u64(seed));
        let scope = shuffle.and_then(|(_, s)| s);
        for (i, kind) in self.nodes.iter().enumerate() {
            match *kind {
                NodeKind::Const => {}
                NodeKind::Input(k) => map[i] = out.input(k),
                NodeKind::And(a, b) => {
                    if !live[i] {
                        continue;
                    }
                    if let Some(s) = scope {
                        if !s[i] {
                            map[i] = out.and(translate(&map, a), translate(&map, b));
                            continue;
                        }
                    }
                    let leaves = self.collect_tree(i, &refs);
                    if leaves.len() < min_leaves {
                        map[i] = out.and(translate(&map, a), translate(&map, b));
                        continue;
                    }
                    let mut mapped: Vec<Lit> = leaves.iter().map(|&l| translate(&map, l)).collect();
                    if let Some(rng) = rng.as_mut() {
                        mapped.shuffle(rng);
                    }
                    map[i] = out.combine_min_depth(&mapped);
                }
            }
        }
        out.outputs = self
            .outputs
            .iter()
            .map(|(name, l)| (name.clone(), translate(&map, *l)))
            .collect();
        out.rebuilt()
    }

    /// Leaves of the maximal single-fanout conjunction tree rooted at
    /// `root` (a live AND node).
    fn collect_tree(&self, root: usize, refs: &[u32]) -> Vec<Lit> {
        let NodeKind::And(a, b) = self.nodes[root] else { unreachable!() };
        let mut leaves = Vec::new();
        let mut stack = vec![b, a];
        while let Some(l) = stack.pop() {
            let expand = !l.compl()
                && refs[l.node()] == 1
                && matches!(self.nodes[l.node()], NodeKind::And(..));
            if expand {
                let NodeKind::And(x, y) = self.nodes[l.node()] else { unreachable!() };
                stack.push(y);
                stack.push(x);
            } else {
                leaves.push(l);
            }
        }
        leaves
    }

    /// Combines literals into a conjunction, always pairing the two
    /// shallowest pending terms. Ties break on queue order, so callers
    /// control tie-breaking through the input order.
    pub fn combine_min_depth(&mut self, lits: &[Lit]) -> Lit {
        assert!(!lits.is_empty());
        let mut heap: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
        let mut by_seq: Vec<Lit> = Vec::new();
        for &l in lits {
            heap.push(Reverse((self.level[l.node()], by_seq.len() as u32)));
            by_seq.push(l);
        }
        while heap.len() > 1 {
            let Reverse((_, s1)) = heap.pop().unwrap();
            let Reverse((_, s2)) = heap.pop().unwrap();
            let l = self.and(by_seq[s1 as usize], by_seq[s2 as usize]);
            heap.push(Reverse((self.level[l.node()], by_seq.len() as u32)));
            by_seq.push(l);
        }
        let Reverse((_, s)) = heap.pop().unwrap();
        by_seq[s as usize]
    }
}

fn lit_word(w: &[u64], l: Lit) -> u64 {
    w[l.node()] ^ if l.compl() { !0 } else { 0 }
}

pub(crate) fn translate(map: &[Lit], l: Lit) -> Lit {
    map[l.node()].xor_sign(l.compl())
}
