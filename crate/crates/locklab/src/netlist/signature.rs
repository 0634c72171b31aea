//! Structural signatures for variant deduplication.
//!
//! Two netlists get the same signature exactly when their canonical forms
//! match: same input/key/output arities and order, same gates after
//! renumbering nets in a canonical topological order. Net names do not
//! participate, so renaming internal nets (or inputs) never changes the
//! digest, while any change to a gate kind, a fanin, or interface order
//! does.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::Netlist;

/// 256-bit digest of the canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(pub [u8; 32]);

impl Signature {
    pub fn to_hex(self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(Signature(arr))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Signature::from_hex(&s).ok_or_else(|| serde::de::Error::custom("expected 64 hex chars"))
    }
}

pub fn structural_signature(n: &Netlist) -> Signature {
    let mut h = Sha256::new();
    h.update(canonical_form(n));
    Signature(h.finalize().into())
}

/// Byte serialization of the canonical form. Equality of these byte
/// strings is the ground-truth comparison that the signature approximates
/// (collisions aside); dedup correctness tests compare both.
pub fn canonical_form(n: &Netlist) -> Vec<u8> {
    // Canonical ids: primary inputs first (in order), then key inputs, then
    // gate outputs level by level. Within a level gates sort by kind and
    // canonically renumbered fanins; insertion order breaks exact ties,
    // which is stable under net renaming because renaming cannot reorder
    // gates.
    let invalid = u32::MAX;
    let mut canon = vec![invalid; n.net_count()];
    let mut next = 0u32;
    for &pi in n.inputs() {
        canon[pi.index()] = next;
        next += 1;
    }
    for &k in n.key_inputs() {
        canon[k.index()] = next;
        next += 1;
    }

    let mut order: Vec<usize> = (0..n.gate_count()).collect();
    order.sort_by(|&a, &b| {
        let ga = &n.gates()[a];
        let gb = &n.gates()[b];
        n.level(ga.output)
            .cmp(&n.level(gb.output))
            .then_with(|| ga.kind.tag().cmp(&gb.kind.tag()))
    });
    // Two passes per level: ids for a level depend only on lower levels, so
    // sort each level block by (kind, canonical fanins) and then assign.
    let mut out: Vec<usize> = Vec::with_capacity(order.len());
    let mut i = 0;
    while i < order.len() {
        let lv = n.level(n.gates()[order[i]].output);
        let mut j = i;
        while j < order.len() && n.level(n.gates()[order[j]].output) == lv {
            j += 1;
        }
        let mut block: Vec<usize> = order[i..j].to_vec();
        block.sort_by(|&a, &b| {
            let ga = &n.gates()[a];
            let gb = &n.gates()[b];
            let fa: Vec<u32> = ga.fanins.iter().map(|f| canon[f.index()]).collect();
            let fb: Vec<u32> = gb.fanins.iter().map(|f| canon[f.index()]).collect();
            ga.kind.tag().cmp(&gb.kind.tag()).then_with(|| fa.cmp(&fb)).then(a.cmp(&b))
        });
        for &gi in &block {
            canon[n.gates()[gi].output.index()] = next;
            next += 1;
            out.push(gi);
        }
        i = j;
    }

    let mut bytes = Vec::with_capacity(16 + out.len() * 10);
    bytes.push(1); // format version
    push_u32(&mut bytes, n.inputs().len() as u32);
    push_u32(&mut bytes, n.key_inputs().len() as u32);
    push_u32(&mut bytes, n.gate_count() as u32);
    push_u32(&mut bytes, n.outputs().len() as u32);
    for &gi in &out {
        let g = &n.gates()[gi];
        bytes.push(g.kind.tag());
        push_u32(&mut bytes, g.fanins.len() as u32);
        for &f in &g.fanins {
            debug_assert_ne!(canon[f.index()], invalid);
            push_u32(&mut bytes, canon[f.index()]);
        }
    }
    for &po in n.outputs() {
        push_u32(&mut bytes, canon[po.index()]);
    }
    bytes
}

fn push_u32(bytes: &mut Vec<u8>, v: u32) {
    bytes.extend_from_slice(&v.to_le_bytes());
}
