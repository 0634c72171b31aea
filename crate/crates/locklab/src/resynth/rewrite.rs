//! Cut rewriting over the and-inverter graph.
//!
//! Each pass walks live nodes in topological order, enumerates 4-feasible
//! cuts, canonicalizes each cut function, and compares the cost of
//! instantiating the table's optimal structure against the logic the node
//! currently pays for exclusively (its maximum fanout-free cone). Cost is
//! measured by a dry run against the output graph's hash-cons table, so
//! structure that already exists is free.
//!
//! Area mode accepts strict wins, plus cost-neutral swaps decided by a
//! seeded coin; those neutral swaps are what make equally sized results
//! differ between seeds. Depth mode only touches nodes on paths longer
//! than the target, accepting replacements that arrive earlier, at the
//! same level with fewer nodes, or at the same level and size on a coin
//! keyed by the target itself. That keying keeps the pass a pure function
//! of graph and target while letting nearby targets take different shapes
//! even when both leave every path over budget.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::aig::{translate, Aig, Lit, NodeKind, LIT_FALSE};
use super::table::{opt_table, Canonicalizer, OptTable, VAR_MASK};
use crate::seed_split;

const CUTS_PER_NODE: usize = 8;
const NO_LEAF: u32 = u32::MAX;

/// How a pass decides whether a candidate replacement goes in.
pub(crate) enum Goal {
    /// Fewer nodes; `zero_gain_seed` lets cost-neutral replacements in on
    /// a coin toss so different seeds take different shapes.
    Area { zero_gain_seed: Option<u64> },
    /// Shorter arrival at nodes whose root-to-sink path exceeds `target`;
    /// cost-neutral ties break on a coin seeded by the target value.
    Depth { target: u32 },
}

pub(crate) struct RewriteStats {
    pub accepted: usize,
}

/// One rewriting pass. `scope`, when given, masks which nodes may be
/// replaced (children of out-of-scope nodes are still rebuilt as-is).
pub(crate) fn rewrite(aig: &Aig, goal: &Goal, scope: Option<&[bool]>) -> (Aig, RewriteStats) {
    let table = opt_table();
    let mut canon = Canonicalizer::new();
    let live = aig.live();
    let mut refs = aig.refcounts();
    let cuts = enumerate_cuts(aig, &live);
    let heights = match goal {
        Goal::Depth { .. } => aig.heights(),
        Goal::Area { .. } => Vec::new(),
    };
    let mut rng = match goal {
        Goal::Area { zero_gain_seed: Some(s) } => Some(ChaCha8Rng::seed_from_u64(*s)),
        Goal::Area { zero_gain_seed: None } => None,
        Goal::Depth { target } => {
            Some(ChaCha8Rng::seed_from_u64(seed_split(*target as u64, "depth-tie", 0)))
        }
    };

    let mut out = Aig::new(aig.pi_names.clone(), aig.key_names.clone());
    let mut map = vec![LIT_FALSE; aig.node_count()];
    let mut accepted = 0;
    for i in 0..aig.node_count() {
        match aig.node(i) {
            NodeKind::Const => {}
            NodeKind::Input(k) => map[i] = out.input(k),
            NodeKind::And(a, b) => {
                if !live[i] {
                    continue;
                }
                let (ma, mb) = (translate(&map, a), translate(&map, b));
                let eligible = scope.map_or(true, |s| s[i])
                    && match goal {
                        Goal::Area { .. } => true,
                        Goal::Depth { target } => aig.level_of(Lit::of(i as u32, false)) + heights[i] > *target,
                    };
                if !eligible {
                    map[i] = out.and(ma, mb);
                    continue;
                }
                let default_level = 1 + out.level_of(ma).max(out.level_of(mb));
                let chosen = choose_replacement(
                    aig, &mut refs, &cuts[i], i, table, &mut canon, &out, &map, default_level, goal,
                    &mut rng,
                );
                match chosen {
                    Some((tt, bound, flip)) => {
                        map[i] = table.instantiate(&mut out, tt, &bound).xor_sign(flip);
                        accepted += 1;
                    }
                    None => map[i] = out.and(ma, mb),
                }
            }
        }
    }
    out.outputs = aig
        .outputs
        .iter()
        .map(|(name, l)| (name.clone(), translate(&map, *l)))
        .collect();
    (out.rebuilt(), RewriteStats { accepted })
}

/// Picks the best acceptable candidate over all proper cuts of node `i`,
/// returning the canonical function, bound leaves, and output complement
/// to instantiate.
#[allow(clippy::too_many_arguments)]
fn choose_replacement(
    aig: &Aig,
    refs: &mut [u32],
    cuts: &[Cut],
    i: usize,
    table: &OptTable,
    canon: &mut Canonicalizer,
    out: &Aig,
    map: &[Lit],
    default_level: u32,
    goal: &Goal,
    rng: &mut Option<ChaCha8Rng>,
) -> Option<(u16, [Lit; 4], bool)> {
    let mut best: Option<(i64, u32, (u16, [Lit; 4], bool))> = None;
    for cut in cuts {
        if cut.len < 2 {
            continue;
        }
        let tt = cut_tt(aig, cut, i);
        let c = canon.canon(tt);
        if !table.knows(c.tt) {
            continue;
        }
        let mut leaves = [LIT_FALSE; 4];
        for (j, l) in leaves.iter_mut().enumerate().take(cut.len as usize) {
            *l = translate(map, Lit::of(cut.leaves[j], false));
        }
        let bound = c.bind(&leaves);
        let dry = dry_instantiate(out, table, c.tt, &bound);
        let saved = mffc_size(aig, i, cut, refs) as i64;
        let gain = saved - dry.created as i64;
        let acceptable = match goal {
            Goal::Area { zero_gain_seed } => {
                gain > 0
                    || (gain == 0
                        && zero_gain_seed.is_some()
                        && rng.as_mut().map_or(false, |r| r.gen_bool(0.5)))
            }
            Goal::Depth { .. } => {
                dry.level < default_level
                    || (dry.level == default_level
                        && (gain > 0
                            || (gain == 0 && rng.as_mut().map_or(false, |r| r.gen_bool(0.5)))))
            }
        };
        if !acceptable {
            continue;
        }
        let better = match goal {
            Goal::Area { .. } => best.map_or(true, |(g, _, _)| gain > g),
            Goal::Depth { .. } => {
                best.map_or(true, |(g, lv, _)| dry.level < lv || (dry.level == lv && gain > g))
            }
        };
        if better {
            best = Some((gain, dry.level, (c.tt, bound, c.out)));
        }
    }
    best.map(|(_, _, plan)| plan)
}

/// A cut: up to four leaf nodes, sorted, padded with `NO_LEAF`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Cut {
    leaves: [u32; 4],
    len: u8,
}

impl Cut {
    fn unit(node: u32) -> Cut {
        Cut { leaves: [node, NO_LEAF, NO_LEAF, NO_LEAF], len: 1 }
    }

    fn merge(a: &Cut, b: &Cut) -> Option<Cut> {
        let mut leaves = [NO_LEAF; 4];
        let mut len = 0;
        let (mut i, mut j) = (0, 0);
        while i < a.len as usize || j < b.len as usize {
            let x = if i < a.len as usize { a.leaves[i] } else { NO_LEAF };
            let y = if j < b.len as usize { b.leaves[j] } else { NO_LEAF };
            let next = x.min(y);
            if x == next {
                i += 1;
            }
            if y == next {
                j += 1;
            }
            if len == 4 {
                return None;
            }
            leaves[len] = next;
            len += 1;
        }
        Some(Cut { leaves, len: len as u8 })
    }

    fn contains(&self, node: u32) -> bool {
        self.leaves[..self.len as usize].contains(&node)
    }
}

/// Bottom-up priority cut enumeration: each node keeps its unit cut plus
/// up to `CUTS_PER_NODE` smallest merged cuts.
fn enumerate_cuts(aig: &Aig, live: &[bool]) -> Vec<Vec<Cut>> {
    let mut cuts: Vec<Vec<Cut>> = vec![Vec::new(); aig.node_count()];
    for i in 0..aig.node_count() {
        match aig.node(i) {
            NodeKind::Const => {}
            NodeKind::Input(_) => cuts[i].push(Cut::unit(i as u32)),
            NodeKind::And(a, b) => {
                if !live[i] {
                    continue;
                }
                let mut found: Vec<Cut> = Vec::new();
                for ca in &cuts[a.node()] {
                    for cb in &cuts[b.node()] {
                        if let Some(m) = Cut::merge(ca, cb) {
                            if !m.contains(i as u32) && !found.contains(&m) {
                                found.push(m);
                            }
                        }
                    }
                }
                found.sort_by_key(|c| c.len);
                found.truncate(CUTS_PER_NODE);
                found.insert(0, Cut::unit(i as u32));
                cuts[i] = found;
            }
        }
    }
    cuts
}

/// Truth table of node `root` over the cut's leaves.
fn cut_tt(aig: &Aig, cut: &Cut, root: usize) -> u16 {
    let mut memo: HashMap<usize, u16> = HashMap::new();
    for (j, &leaf) in cut.leaves[..cut.len as usize].iter().enumerate() {
        memo.insert(leaf as usize, VAR_MASK[j]);
    }
    node_tt(aig, root, &mut memo)
}

fn node_tt(aig: &Aig, n: usize, memo: &mut HashMap<usize, u16>) -> u16 {
    if let Some(&t) = memo.get(&n) {
        return t;
    }
    let NodeKind::And(a, b) = aig.node(n) else {
        // A valid cut covers every input path, so only AND nodes are
        // reached below the root.
        unreachable!("cut does not cover node {n}");
    };
    let ta = node_tt(aig, a.node(), memo) ^ if a.compl() { 0xffff } else { 0 };
    let tb = node_tt(aig, b.node(), memo) ^ if b.compl() { 0xffff } else { 0 };
    let t = ta & tb;
    memo.insert(n, t);
    t
}

/// Size of the maximum fanout-free cone of `root` above the cut: the AND
/// nodes only `root` pays for. Reference counts are decremented during the
/// walk and restored before returning.
fn mffc_size(aig: &Aig, root: usize, cut: &Cut, refs: &mut [u32]) -> u32 {
    let count = deref(aig, root, cut, refs);
    reref(aig, root, cut, refs);
    count
}

fn deref(aig: &Aig, n: usize, cut: &Cut, refs: &mut [u32]) -> u32 {
    let NodeKind::And(a, b) = aig.node(n) else { unreachable!() };
    let mut count = 1;
    for c in [a, b] {
        let m = c.node();
        if cut.contains(m as u32) || !matches!(aig.node(m), NodeKind::And(..)) {
            continue;
        }
        refs[m] -= 1;
        if refs[m] == 0 {
            count += deref(aig, m, cut, refs);
        }
    }
    count
}

fn reref(aig: &Aig, n: usize, cut: &Cut, refs: &mut [u32]) {
    let NodeKind::And(a, b) = aig.node(n) else { unreachable!() };
    for c in [a, b] {
        let m = c.node();
        if cut.contains(m as u32) || !matches!(aig.node(m), NodeKind::And(..)) {
            continue;
        }
        if refs[m] == 0 {
            reref(aig, m, cut, refs);
        }
        refs[m] += 1;
    }
}

/// A literal in a hypothetical graph: real, constant, or a node that would
/// have to be created.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum VLit {
    Const(bool),
    Real(Lit),
    New(u32, bool),
}

impl VLit {
    fn not(self) -> VLit {
        match self {
            VLit::Const(b) => VLit::Const(!b),
            VLit::Real(l) => VLit::Real(l.not()),
            VLit::New(n, c) => VLit::New(n, !c),
        }
    }
}

struct DryRun {
    created: u32,
    level: u32,
}

/// Replays `OptTable::instantiate` without mutating the graph, counting
/// the AND nodes that do not already exist and the arrival level of the
/// result. Mirrors the builder's folding and sharing exactly: constant and
/// duplicate operands fold, real pairs consult the graph's hash-cons
/// table, and hypothetical pairs share through a local table.
fn dry_instantiate(out: &Aig, table: &OptTable, tt: u16, leaves: &[Lit; 4]) -> DryRun {
    let mut ctx = DryCtx {
        out,
        table,
        next: 0,
        created: 0,
        level: HashMap::new(),
        strash: HashMap::new(),
        memo: HashMap::new(),
    };
    let v = ctx.build(tt, leaves);
    DryRun { created: ctx.created, level: ctx.level_of(v) }
}

struct DryCtx<'a> {
    out: &'a Aig,
    table: &'a OptTable,
    next: u32,
    created: u32,
    level: HashMap<u32, u32>,
    strash: HashMap<(VLit, VLit), VLit>,
    memo: HashMap<u16, VLit>,
}

impl DryCtx<'_> {
    fn level_of(&self, v: VLit) -> u32 {
        match v {
            VLit::Const(_) => 0,
            VLit::Real(l) => self.out.level_of(l),
            VLit::New(n, _) => self.level[&n],
        }
    }

    fn build(&mut self, tt: u16, leaves: &[Lit; 4]) -> VLit {
        match tt {
            0x0000 => return VLit::Const(false),
            0xffff => return VLit::Const(true),
            _ => {}
        }
        for (i, &m) in VAR_MASK.iter().enumerate() {
            if tt == m {
                return VLit::Real(leaves[i]);
            }
            if tt == !m {
                return VLit::Real(leaves[i].not());
            }
        }
        if let Some(&v) = self.memo.get(&tt) {
            return v;
        }
        let v = match self.table.def_of(tt) {
            Some((a, b)) => {
                let va = self.build(a, leaves);
                let vb = self.build(b, leaves);
                self.and(va, vb)
            }
            None => self.build(!tt, leaves).not(),
        };
        self.memo.insert(tt, v);
        v
    }

    fn and(&mut self, a: VLit, b: VLit) -> VLit {
        if a == VLit::Const(false) || b == VLit::Const(false) || a == b.not() {
            return VLit::Const(false);
        }
        if a == VLit::Const(true) {
            return b;
        }
        if b == VLit::Const(true) || a == b {
            return a;
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if let (VLit::Real(x), VLit::Real(y)) = (a, b) {
            if let Some(l) = self.out.probe(x, y) {
                return VLit::Real(l);
            }
        }
        if let Some(&v) = self.strash.get(&(a, b)) {
            return v;
        }
        let lvl = 1 + self.level_of(a).max(self.level_of(b));
        let v = VLit::New(self.next, false);
        self.level.insert(self.next, lvl);
        self.next += 1;
        self.created += 1;
        self.strash.insert((a, b), v);
        v
    }
}
