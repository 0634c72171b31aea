//! Seeded random combinational circuits.
//!
//! Used as base designs for lock/attack experiments when no external BENCH
//! file is supplied. Generation is deterministic in the config, biased
//! toward recent nets so circuits get realistic depth rather than a flat
//! two-level soup.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GateKind, NetId, Netlist};

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub seed: u64,
    /// Gate kinds to draw from. XOR-like kinds are fine here; resynthesis
    /// removes them from variants.
    pub kinds: Vec<GateKind>,
    /// Fanins are drawn from the last `locality` created nets with high
    /// probability, which stretches the circuit vertically.
    pub locality: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            inputs: 8,
            outputs: 4,
            gates: 60,
            seed: 0,
            kinds: vec![
                GateKind::And,
                GateKind::Or,
                GateKind::Nand,
                GateKind::Nor,
                GateKind::Not,
                GateKind::And,
                GateKind::Nand,
            ],
            locality: 24,
        }
    }
}

impl GeneratorConfig {
    pub fn sized(inputs: usize, outputs: usize, gates: usize, seed: u64) -> Self {
        GeneratorConfig { inputs, outputs, gates, seed, ..Default::default() }
    }
}

/// Builds a random netlist. Panics only on degenerate configs
/// (zero inputs or zero gates with outputs requested).
pub fn random_netlist(cfg: &GeneratorConfig) -> Netlist {
    assert!(cfg.inputs > 0, "need at least one input");
    assert!(cfg.gates >= cfg.outputs, "need at least one gate per output");
    assert!(!cfg.kinds.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = Netlist::builder();

    let mut nets: Vec<NetId> = (0..cfg.inputs).map(|i| b.add_input(&format!("x{i}")).unwrap()).collect();

    let mut gate_outputs: Vec<NetId> = Vec::with_capacity(cfg.gates);
    let mut fanout = vec![0usize; cfg.inputs + cfg.gates];
    // Nets nobody reads yet. Each gate consumes one of them first, which
    // keeps dangling logic to roughly the number of requested outputs.
    let mut dangling: Vec<NetId> = nets.clone();
    for gi in 0..cfg.gates {
        let kind = *cfg.kinds.choose(&mut rng).unwrap();
        let arity = match kind {
            GateKind::Not | GateKind::Buf => 1,
            GateKind::Mux => 3,
            GateKind::Const0 | GateKind::Const1 => 0,
            _ => {
                if rng.gen_ratio(1, 8) {
                    3
                } else {
                    2
                }
            }
        };
        let mut fanins: Vec<NetId> = Vec::with_capacity(arity);
        while arity > 0 && dangling.len() > cfg.outputs {
            let idx = rng.gen_range(0..dangling.len());
            let id = dangling.swap_remove(idx);
            if fanout[id.index()] == 0 {
                fanins.push(id);
                break;
            }
        }
        while fanins.len() < arity {
            let id = pick_net(&nets, cfg.locality, &mut rng);
            if !fanins.contains(&id) {
                fanins.push(id);
            }
        }
        let out = b.add_gate(&format!("g{gi}"), kind, &fanins).unwrap();
        for f in &fanins {
            fanout[f.index()] += 1;
        }
        nets.push(out);
        dangling.push(out);
        gate_outputs.push(out);
    }

    // Outputs: every sink (zero-fanout gate) becomes an output if room
    // remains, so dead logic stays rare; fill up with random distinct picks.
    let mut sinks: Vec<NetId> = gate_outputs.iter().copied().filter(|id| fanout[id.index()] == 0).collect();
    sinks.truncate(cfg.outputs);
    let mut chosen = sinks;
    let mut pool: Vec<NetId> = gate_outputs.iter().copied().filter(|id| !chosen.contains(id)).collect();
    pool.shuffle(&mut rng);
    while chosen.len() < cfg.outputs {
        chosen.push(pool.pop().expect("not enough gates for requested outputs"));
    }
    // net ids are interned in creation order: x0..x<I-1>, then g0..
    for id in chosen {
        let name = if id.index() < cfg.inputs {
            format!("x{}", id.index())
        } else {
            format!("g{}", id.index() - cfg.inputs)
        };
        b.add_output(&name).unwrap();
    }
    b.build().expect("generator emits valid netlists")
}

fn pick_net(nets: &[NetId], locality: usize, rng: &mut ChaCha8Rng) -> NetId {
    if nets.len() > locality && rng.gen_ratio(3, 4) {
        let lo = nets.len() - locality;
        nets[rng.gen_range(lo..nets.len())]
    } else {
        nets[rng.gen_range(0..nets.len())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, write_bench};

    #[test]
    fn generator_is_deterministic() {
        let cfg = GeneratorConfig::sized(12, 4, 80, 42);
        let a = random_netlist(&cfg);
        let b = random_netlist(&cfg);
        assert_eq!(a, b);
        assert_eq!(a.gate_count(), 80);
        assert_eq!(a.inputs().len(), 12);
        assert_eq!(a.outputs().len(), 4);
    }

    #[test]
    fn different_seeds_differ() {
        let a = random_netlist(&GeneratorConfig::sized(10, 3, 50, 1));
        let b = random_netlist(&GeneratorConfig::sized(10, 3, 50, 2));
        assert_ne!(a, b);
    }

    #[test]
    fn generated_netlists_round_trip() {
        for seed in 0..20 {
            let n = random_netlist(&GeneratorConfig::sized(9, 3, 40, seed));
            let text = write_bench(&n);
            let n2 = parse_bench(&text).unwrap();
            assert_eq!(n, n2, "seed {seed}");
            assert_eq!(write_bench(&n2), text, "seed {seed}");
        }
    }

    #[test]
    fn most_logic_is_live() {
        let n = random_netlist(&GeneratorConfig::sized(16, 6, 300, 7));
        let live = n.live_nets();
        let live_gates = n.gates().iter().filter(|g| live[g.output.index()]).count();
        assert!(live_gates * 10 >= n.gate_count() * 7, "live {live_gates} of {}", n.gate_count());
    }
}
