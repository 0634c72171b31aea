//! Optimal replacement structures for 4-input functions.
//!
//! Rewriting needs, for any 4-input cut function, a small AND-inverter
//! structure computing it. This table is built once per process by
//! breadth-first enumeration of conjunction trees: level k holds every
//! 16-bit truth table first reachable with k AND nodes, along with the
//! child functions that produced it, so instantiation can replay the
//! construction over arbitrary leaf literals.
//!
//! Lookups go through NPN canonicalization (permute inputs, complement
//! inputs and output). The enumerated set is closed under NPN transforms,
//! so this does not change which functions resolve; what it buys is that
//! every member of a class instantiates the same canonical structure,
//! which lets hash-consing share logic between cuts that differ only in
//! polarity or leaf order.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::aig::{Aig, Lit, LIT_FALSE, LIT_TRUE};

/// Truth-table column masks for the four cut variables.
pub(crate) const VAR_MASK: [u16; 4] = [0xaaaa, 0xcccc, 0xf0f0, 0xff00];

/// Largest tree size enumerated. Tree cost counts shared subtrees once per
/// use, so three-input parity lands at 9 (each XOR layer re-spends its
/// operand trees); functions beyond the budget simply never match and
/// their cuts are left alone.
const MAX_COST: u8 = 9;

const UNKNOWN: u8 = 0xff;
const NO_DEF: u32 = u32::MAX;

pub(crate) struct OptTable {
    cost: Vec<u8>,
    def: Vec<u32>,
}

impl OptTable {
    pub fn knows(&self, tt: u16) -> bool {
        self.cost[tt as usize] != UNKNOWN
    }

    /// Tree cost in AND nodes (0 for constants and single literals).
    pub fn cost(&self, tt: u16) -> Option<u8> {
        match self.cost[tt as usize] {
            UNKNOWN => None,
            c => Some(c),
        }
    }

    /// The stored AND decomposition of `tt`, with children already in the
    /// polarity they are used in. `None` for primitives and for tables
    /// only known through their complement.
    pub fn def_of(&self, tt: u16) -> Option<(u16, u16)> {
        match self.def[tt as usize] {
            NO_DEF => None,
            d => Some(((d >> 16) as u16, (d & 0xffff) as u16)),
        }
    }

    /// Builds the stored structure for `tt` over the given leaf literals.
    /// Panics if `tt` is not in the table; check `knows` first.
    pub fn instantiate(&self, aig: &mut Aig, tt: u16, leaves: &[Lit; 4]) -> Lit {
        debug_assert!(self.knows(tt), "instantiate of unknown function {tt:#06x}");
        match tt {
            0x0000 => return LIT_FALSE,
            0xffff => return LIT_TRUE,
            _ => {}
        }
        for (i, &m) in VAR_MASK.iter().enumerate() {
            if tt == m {
                return leaves[i];
            }
            if tt == !m {
                return leaves[i].not();
            }
        }
        let def = self.def[tt as usize];
        if def == NO_DEF {
            return self.instantiate(aig, !tt, leaves).not();
        }
        let a = self.instantiate(aig, (def >> 16) as u16, leaves);
        let b = self.instantiate(aig, (def & 0xffff) as u16, leaves);
        aig.and(a, b)
    }
}

pub(crate) fn opt_table() -> &'static OptTable {
    static TABLE: OnceLock<OptTable> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn build_table() -> OptTable {
    let mut cost = vec![UNKNOWN; 1 << 16];
    let mut def = vec![NO_DEF; 1 << 16];
    let mut levels: Vec<Vec<u16>> = vec![Vec::new(); MAX_COST as usize + 1];
    let seed = |t: u16, cost_arr: &mut Vec<u8>| {
        cost_arr[t as usize] = 0;
        cost_arr[!t as usize] = 0;
    };
    seed(0x0000, &mut cost);
    levels[0].push(0x0000);
    for m in VAR_MASK {
        seed(m, &mut cost);
        levels[0].push(m);
    }
    for k in 1..=MAX_COST as usize {
        let mut found = Vec::new();
        for i in 0..k {
            let j = k - 1 - i;
            if i > j {
                break;
            }
            for ai in 0..levels[i].len() {
                let bj_start = if i == j { ai } else { 0 };
                for bi in bj_start..levels[j].len() {
                    let (ta, tb) = (levels[i][ai], levels[j][bi]);
                    for pol in 0..4u8 {
                        let x = if pol & 1 != 0 { !ta } else { ta };
                        let y = if pol & 2 != 0 { !tb } else { tb };
                        let r = x & y;
                        if cost[r as usize] != UNKNOWN {
                            continue;
                        }
                        cost[r as usize] = k as u8;
                        def[r as usize] = (x as u32) << 16 | y as u32;
                        if cost[!r as usize] == UNKNOWN {
                            cost[!r as usize] = k as u8;
                        }
                        found.push(r);
                    }
                }
            }
        }
        levels[k] = found;
    }
    OptTable { cost, def }
}

/// An NPN transform: `apply(tt)` equals the canonical form, and
/// instantiating the canonical structure with leaf `j` bound to
/// `leaves[perm[j]] ^ negs[j]`, then complementing by `out`, rebuilds `tt`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Canon {
    pub tt: u16,
    pub perm: [u8; 4],
    pub negs: u8,
    pub out: bool,
}

impl Canon {
    /// Reorders and complements concrete leaf literals so the canonical
    /// structure computes the original function over them.
    pub fn bind(&self, leaves: &[Lit; 4]) -> [Lit; 4] {
        let mut bound = [LIT_FALSE; 4];
        for j in 0..4 {
            bound[j] = leaves[self.perm[j] as usize].xor_sign(self.negs >> j & 1 == 1);
        }
        bound
    }
}

struct Transform {
    perm: [u8; 4],
    negs: u8,
    /// Row gather map: output row y of the transformed table reads input
    /// row `rows[y]` of the original.
    rows: [u8; 16],
}

fn transforms() -> &'static Vec<Transform> {
    static T: OnceLock<Vec<Transform>> = OnceLock::new();
    T.get_or_init(|| {
        let mut out = Vec::with_capacity(384);
        let mut perm = [0u8, 1, 2, 3];
        permute(&mut perm, 0, &mut |perm| {
            for negs in 0..16u8 {
                let mut rows = [0u8; 16];
                for (y, row) in rows.iter_mut().enumerate() {
                    let mut x = 0u8;
                    for j in 0..4 {
                        let bit = (y >> j) as u8 & 1 ^ (negs >> j & 1);
                        x |= bit << perm[j];
                    }
                    *row = x;
                }
                out.push(Transform { perm: *perm, negs, rows });
            }
        });
        out
    })
}

fn permute(a: &mut [u8; 4], k: usize, f: &mut impl FnMut(&[u8; 4])) {
    if k == 4 {
        f(a);
        return;
    }
    for i in k..4 {
        a.swap(k, i);
        permute(a, k + 1, f);
        a.swap(k, i);
    }
}

fn gather(tt: u16, rows: &[u8; 16]) -> u16 {
    let mut r = 0u16;
    for (y, &x) in rows.iter().enumerate() {
        r |= (tt >> x & 1) << y;
    }
    r
}

/// Memoizing NPN canonicalizer. Canonical form is the numerically smallest
/// table over all 768 transforms.
pub(crate) struct Canonicalizer {
    memo: HashMap<u16, Canon>,
}

impl Canonicalizer {
    pub fn new() -> Canonicalizer {
        Canonicalizer { memo: HashMap::new() }
    }

    pub fn canon(&mut self, tt: u16) -> Canon {
        if let Some(&c) = self.memo.get(&tt) {
            return c;
        }
        let mut best: Option<Canon> = None;
        for t in transforms() {
            let g = gather(tt, &t.rows);
            for (cand, out) in [(g, false), (!g, true)] {
                if best.map_or(true, |b| cand < b.tt) {
                    best = Some(Canon { tt: cand, perm: t.perm, negs: t.negs, out });
                }
            }
        }
        let c = best.unwrap();
        self.memo.insert(tt, c);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Evaluates a literal built over 4 fresh inputs against the var-mask
    /// stimulus, giving the 16-row table it computes.
    fn tt_of(aig: &Aig, lit: Lit) -> u16 {
        let vals: Vec<u64> = VAR_MASK.iter().map(|&m| m as u64).collect();
        let mut probe = aig.clone();
        probe.outputs = vec![("probe".into(), lit)];
        probe.simulate_words(&vals)[0] as u16
    }

    fn fresh() -> (Aig, [Lit; 4]) {
        let aig = Aig::new(vec!["a".into(), "b".into(), "c".into(), "d".into()], vec![]);
        let leaves = [aig.input(0), aig.input(1), aig.input(2), aig.input(3)];
        (aig, leaves)
    }

    #[test]
    fn table_covers_common_cut_functions() {
        let t = opt_table();
        assert_eq!(t.cost(0x8888), Some(1), "a AND b");
        assert_eq!(t.cost(0xeeee), Some(1), "a OR b");
        assert_eq!(t.cost(0x6666), Some(3), "a XOR b");
        assert_eq!(t.cost(0xcaca), Some(3), "2:1 mux");
        assert_eq!(t.cost(0x9696), Some(9), "3-input parity, both XOR operand trees paid twice");
        assert_eq!(t.cost(0x8000), Some(3), "4-input AND");
        assert!(!t.knows(0x6996), "4-input parity exceeds the tree budget");
    }

    #[test]
    fn instantiation_reproduces_stored_functions() {
        let t = opt_table();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 400 {
            let tt: u16 = rng.gen();
            if !t.knows(tt) {
                continue;
            }
            let (mut aig, leaves) = fresh();
            let lit = t.instantiate(&mut aig, tt, &leaves);
            assert_eq!(tt_of(&aig, lit), tt, "tt {tt:#06x}");
            checked += 1;
        }
    }

    #[test]
    fn canonicalization_is_class_invariant_and_instantiable() {
        let t = opt_table();
        let mut canon = Canonicalizer::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let tt: u16 = rng.gen();
            let c = canon.canon(tt);
            // The canonical form is itself in the class, so transforming it
            // must give itself.
            assert_eq!(canon.canon(c.tt).tt, c.tt);
            // Knowledge is class-closed: enumeration reaches a function iff
            // it reaches its canonical form.
            assert_eq!(t.knows(tt), t.knows(c.tt), "tt {tt:#06x}");
            if !t.knows(tt) {
                continue;
            }
            // Binding the canonical structure to permuted and complemented
            // leaves reproduces the original function exactly.
            let (mut aig, leaves) = fresh();
            let bound = c.bind(&leaves);
            let lit = t.instantiate(&mut aig, c.tt, &bound).xor_sign(c.out);
            assert_eq!(tt_of(&aig, lit), tt, "tt {tt:#06x}");
        }
    }

    #[test]
    fn class_members_share_canonical_form() {
        let mut canon = Canonicalizer::new();
        // x AND y under every variable pairing and polarity maps to one
        // canonical table.
        let base = canon.canon(0x8888).tt;
        for &tt in &[0x4444u16, 0x2222, 0x1111, 0xa0a0, 0x0a0a, 0xc0c0] {
            assert_eq!(canon.canon(tt).tt, base, "tt {tt:#06x}");
        }
        // Output complement lands in the same class as well.
        assert_eq!(canon.canon(0x7777).tt, base);
    }
}
