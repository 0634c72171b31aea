//! Complexity statistics used as attack features.
//!
//! Area and power are proxies, not library numbers: area weights count gate
//! complexity (inverter 1, two-input gate 2, one more per extra fanin, MUX
//! 4, constants 0) and power is switching activity under seeded random
//! stimulus times the same weights. The proxies only ever feed *relative*
//! comparisons between hardenings of the same netlist, so the units are
//! arbitrary but must stay deterministic.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GateKind, Netlist};

/// Number of random vectors behind the power proxy.
pub const POWER_VECTORS: usize = 1024;

/// Fixed stimulus seed so that `stats` is a pure function of the netlist.
const POWER_SEED: u64 = 0x5eed_0f_10c4_1ab5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityStats {
    pub gate_count: usize,
    pub depth: usize,
    /// Total fanin references across all gates.
    pub literal_count: usize,
    pub area_proxy: f64,
    pub power_proxy: f64,
}

pub(crate) fn area_weight(kind: GateKind, arity: usize) -> f64 {
    match kind {
        GateKind::Not | GateKind::Buf => 1.0,
        GateKind::Mux => 4.0,
        GateKind::Const0 | GateKind::Const1 => 0.0,
        _ => 2.0 + (arity.saturating_sub(2)) as f64,
    }
}

/// Statistics under the default stimulus seed.
pub fn stats(n: &Netlist) -> ComplexityStats {
    stats_with_seed(n, POWER_SEED)
}

/// Same, with caller-chosen stimulus seed for the power proxy.
pub fn stats_with_seed(n: &Netlist, seed: u64) -> ComplexityStats {
    let gate_count = n.gate_count();
    let depth = n.depth();
    let literal_count = n.gates().iter().map(|g| g.fanins.len()).sum();
    let area_proxy: f64 = n.gates().iter().map(|g| area_weight(g.kind, g.fanins.len())).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = POWER_VECTORS / 64;
    let mut toggles = vec![0u64; n.net_count()];
    let mut prev_msb: Vec<u64> = Vec::new();
    for w in 0..words {
        let pi: Vec<u64> = (0..n.inputs().len()).map(|_| rng.next_u64()).collect();
        let key: Vec<u64> = (0..n.key_count()).map(|_| rng.next_u64()).collect();
        let values = n.eval_words(&pi, &key);
        for (i, &v) in values.iter().enumerate() {
            // transitions inside the word, plus the seam to the previous word
            let mut t = (v ^ (v >> 1)).count_ones() as u64;
            if w > 0 {
                t += ((v & 1) ^ (prev_msb[i] >> 63)) & 1;
            }
            toggles[i] += t;
        }
        prev_msb = values;
    }
    let power_proxy: f64 = n
        .gates()
        .iter()
        .map(|g| {
            let rate = toggles[g.output.index()] as f64 / POWER_VECTORS as f64;
            rate * area_weight(g.kind, g.fanins.len())
        })
        .sum();

    ComplexityStats { gate_count, depth, literal_count, area_proxy, power_proxy }
}
