//! Parameterized, equivalence-preserving resynthesis.
//!
//! A [`SynthesisRecipe`] drives a fixed pass pipeline; sweeping the recipe
//! grid over one locked netlist yields many functionally identical,
//! structurally different variants. The knobs and what they actually do:
//!
//! * `syn_gen` — 1, 2, or 4 rounds of netlist-level cleanup (constant
//!   propagation, structural hashing, dead-gate sweep). Cleanup reaches a
//!   fixpoint after the first round, so higher settings change nothing by
//!   themselves; they exist so downstream tooling can detect and prune the
//!   redundancy.
//! * `syn_opt` — 0, 1, 2, or 4 rounds of cut rewriting plus wide-gate
//!   refactoring on the and-inverter form. The recipe seed breaks
//!   cost-neutral ties, which is the main source of structural diversity.
//! * `syn_map` — which cell library the result is mapped onto and how many
//!   mapping iterations run. The richest setting also shuffles emission
//!   order by seed and extracts MUX cells.
//! * `delay_point` — optional depth target at 1/5 .. 4/5 of the cleaned-up
//!   critical path ([`compute_dcp`]). The pass spends the slack the target
//!   leaves: conjunction trees that still fit the budget as plain chains
//!   are built as chains, the rest minimum-depth, and a depth-directed
//!   rewrite then works the nodes on over-budget paths, breaking
//!   cost-neutral ties on the target value. Both steps are functions of
//!   the graph and the target alone, never of the recipe seed, so nearby
//!   points give different structures while recipes that differ only in
//!   redundant axes still collapse. The target may be unmet; equivalence
//!   is unconditional either way.
//! * `max_transition` — a fanout cap (4, 8, or 16 pins per net) enforced
//!   last by buffer trees, standing in for electrical transition limits.
//! * `key_constraint` — restricts the restructuring passes to the
//!   transitive fanout of the key inputs.
//!
//! Every variant is certified against the base netlist (random simulation,
//! a SAT miter, or both) and deduplicated by structural signature; XOR and
//! XNOR cells never appear in outputs because all logic passes through the
//! two-input AND decomposition.

mod aig;
mod map;
mod passes;
mod rewrite;
mod table;

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{check_equivalence, CheckError, EquivalenceResult, ShareMode, SolverConfig};
use crate::netlist::{
    stats, structural_signature, ComplexityStats, Netlist, Signature,
};
use crate::seed_split;
use aig::Aig;
use map::{limit_fanout, map_to_netlist, CellLibrary, MapOptions};
use rewrite::{rewrite, Goal};

pub use passes::{balance, constprop, strash, sweep};

/// Effort levels for the cleanup and mapping axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Effort {
    Low,
    Medium,
    High,
}

impl Effort {
    pub const ALL: [Effort; 3] = [Effort::Low, Effort::Medium, Effort::High];
}

/// Effort levels for the restructuring axis, which goes one step further.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptEffort {
    Low,
    Medium,
    High,
    Extreme,
}

impl OptEffort {
    pub const ALL: [OptEffort; 4] =
        [OptEffort::Low, OptEffort::Medium, OptEffort::High, OptEffort::Extreme];

    fn rounds(self) -> usize {
        match self {
            OptEffort::Low => 0,
            OptEffort::Medium => 1,
            OptEffort::High => 2,
            OptEffort::Extreme => 4,
        }
    }
}

/// Fraction of the critical path used as a depth target: point `i` asks
/// for `ceil(dcp * i / 5)` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayPoint {
    Unconstrained,
    P1,
    P2,
    P3,
    P4,
}

impl DelayPoint {
    pub const ALL: [DelayPoint; 5] = [
        DelayPoint::Unconstrained,
        DelayPoint::P1,
        DelayPoint::P2,
        DelayPoint::P3,
        DelayPoint::P4,
    ];

    fn numerator(self) -> Option<usize> {
        match self {
            DelayPoint::Unconstrained => None,
            DelayPoint::P1 => Some(1),
            DelayPoint::P2 => Some(2),
            DelayPoint::P3 => Some(3),
            DelayPoint::P4 => Some(4),
        }
    }

    /// Depth target for a given critical-path length, when constrained.
    pub fn target(self, dcp: usize) -> Option<usize> {
        self.numerator().map(|i| (dcp * i).div_ceil(5))
    }
}

/// Fanout-cap proxy for transition-time limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxTransition {
    P5,
    P10,
    P15,
}

impl MaxTransition {
    pub const ALL: [MaxTransition; 3] = [MaxTransition::P5, MaxTransition::P10, MaxTransition::P15];

    pub fn fanout_cap(self) -> usize {
        match self {
            MaxTransition::P5 => 4,
            MaxTransition::P10 => 8,
            MaxTransition::P15 => 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyConstraint {
    Off,
    On,
}

impl KeyConstraint {
    pub const ALL: [KeyConstraint; 2] = [KeyConstraint::Off, KeyConstraint::On];
}

/// One point in the synthesis-parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SynthesisRecipe {
    pub syn_gen: Effort,
    pub syn_map: Effort,
    pub syn_opt: OptEffort,
    pub delay_point: DelayPoint,
    pub max_transition: MaxTransition,
    pub key_constraint: KeyConstraint,
    pub seed: u64,
}

/// Which values each axis contributes to [`enumerate_recipes`]. The
/// default enables everything: 3 x 3 x 4 x 5 x 3 x 2 = 1080 recipes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeConfig {
    pub syn_gen: Vec<Effort>,
    pub syn_map: Vec<Effort>,
    pub syn_opt: Vec<OptEffort>,
    pub delay_point: Vec<DelayPoint>,
    pub max_transition: Vec<MaxTransition>,
    pub key_constraint: Vec<KeyConstraint>,
    /// Rebases the per-position seed derivation; identical configs with
    /// different bases give the same grid with different tie-breaking.
    pub seed_base: u64,
}

impl Default for RecipeConfig {
    fn default() -> Self {
        RecipeConfig {
            syn_gen: Effort::ALL.to_vec(),
            syn_map: Effort::ALL.to_vec(),
            syn_opt: OptEffort::ALL.to_vec(),
            delay_point: DelayPoint::ALL.to_vec(),
            max_transition: MaxTransition::ALL.to_vec(),
            key_constraint: KeyConstraint::ALL.to_vec(),
            seed_base: 0,
        }
    }
}

impl RecipeConfig {
    /// The grid with the cleanup axis capped at its second value. Extra
    /// cleanup rounds are a fixpoint, so this drops a third of the grid
    /// without losing any reachable structure.
    pub fn reduced() -> Self {
        RecipeConfig { syn_gen: vec![Effort::Low, Effort::Medium], ..Self::default() }
    }
}

#[derive(Debug, Error)]
pub enum ResynthError {
    #[error("recipe axis {0} has no values")]
    EmptyAxis(&'static str),
    #[error("variant from recipe {recipe_index} disagrees with the base netlist")]
    NotEquivalent { recipe_index: usize },
    #[error("equivalence certification failed: {0}")]
    Check(#[from] CheckError),
    #[error("variant set is empty")]
    EmptyVariantSet,
}

/// Cartesian product of the configured axes in lexicographic order, outer
/// axis first. Each recipe's seed mixes the config base with its grid
/// position, so the enumeration is fully deterministic.
pub fn enumerate_recipes(config: &RecipeConfig) -> Result<Vec<SynthesisRecipe>, ResynthError> {
    let axes: [(&'static str, usize); 6] = [
        ("syn_gen", config.syn_gen.len()),
        ("syn_map", config.syn_map.len()),
        ("syn_opt", config.syn_opt.len()),
        ("delay_point", config.delay_point.len()),
        ("max_transition", config.max_transition.len()),
        ("key_constraint", config.key_constraint.len()),
    ];
    for (name, len) in axes {
        if len == 0 {
            return Err(ResynthError::EmptyAxis(name));
        }
    }
    let mut out = Vec::new();
    for &syn_gen in &config.syn_gen {
        for &syn_map in &config.syn_map {
            for &syn_opt in &config.syn_opt {
                for &delay_point in &config.delay_point {
                    for &max_transition in &config.max_transition {
                        for &key_constraint in &config.key_constraint {
                            let position = out.len() as u64;
                            out.push(SynthesisRecipe {
                                syn_gen,
                                syn_map,
                                syn_opt,
                                delay_point,
                                max_transition,
                                key_constraint,
                                seed: seed_split(config.seed_base, "recipe", position),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Critical-path proxy: depth in levels after one unconstrained cleanup
/// (constant propagation, structural hashing, tree balancing). Depth
/// targets derive from this rather than from the raw input depth, so
/// padding a netlist with collapsible chains does not inflate its targets.
pub fn compute_dcp(n: &Netlist) -> usize {
    balance(&strash(&constprop(n))).depth()
}

/// Runs the pipeline selected by the recipe. The output is functionally
/// equivalent to `n` over primary inputs and key inputs, contains no
/// XOR/XNOR cells, and is a pure function of `(n, recipe)`.
pub fn resynthesize(n: &Netlist, r: &SynthesisRecipe) -> Netlist {
    let gen_rounds = match r.syn_gen {
        Effort::Low => 1,
        Effort::Medium => 2,
        Effort::High => 4,
    };
    let mut cleaned = n.clone();
    for _ in 0..gen_rounds {
        cleaned = sweep(&strash(&constprop(&cleaned)));
    }

    let mut graph = Aig::from_netlist(&cleaned).balanced();
    let scope_mask = |g: &Aig| match r.key_constraint {
        KeyConstraint::Off => None,
        KeyConstraint::On => Some(g.key_fanout()),
    };
    for round in 0..r.syn_opt.rounds() {
        let seed = seed_split(r.seed, "opt", round as u64);
        let scope = scope_mask(&graph);
        let (g, _) = rewrite(&graph, &Goal::Area { zero_gain_seed: Some(seed) }, scope.as_deref());
        graph = g;
        let scope = scope_mask(&graph);
        graph = graph.refactored(seed_split(r.seed, "refactor", round as u64), scope.as_deref());
    }
    if let Some(i) = r.delay_point.numerator() {
        graph = graph.balanced();
        // The reported target is in mapped-netlist levels; the graph here is
        // two-input only, so the pass drives toward the same fraction of the
        // graph's own critical path instead.
        let t = ((graph.depth() as usize * i).div_ceil(5)) as u32;
        graph = graph.shaped(t);
        let scope = scope_mask(&graph);
        let (g, _) = rewrite(&graph, &Goal::Depth { target: t }, scope.as_deref());
        graph = g;
    }

    let (library, iterations) = match r.syn_map {
        Effort::Low => (CellLibrary::Minimal, 1),
        Effort::Medium => (CellLibrary::Standard, 2),
        Effort::High => (CellLibrary::Rich, 3),
    };
    let opts = MapOptions {
        library,
        iterations,
        order_seed: (r.syn_map == Effort::High).then(|| seed_split(r.seed, "map", 0)),
        mux_extraction: r.syn_map == Effort::High,
    };
    let mapped = map_to_netlist(&graph, &opts);
    limit_fanout(&mapped, r.max_transition.fanout_cap())
}

/// Levels of margin against the recipe's depth target; recipes without a
/// target count as positive slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slack {
    Unconstrained,
    Levels(i64),
}

impl Slack {
    /// The sign classification used by slack analyses: targets met with
    /// room (or absent) versus tight or missed.
    pub fn is_positive(self) -> bool {
        match self {
            Slack::Unconstrained => true,
            Slack::Levels(l) => l > 0,
        }
    }
}

/// How variants get certified equivalent to their base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyMode {
    /// Random-simulation agreement on 10^4 vectors.
    Sim,
    /// Miter unsatisfiability.
    Sat,
    /// Simulation as a fast pre-check, then the miter.
    Both,
}

#[derive(Debug, Clone)]
pub struct VariantOptions {
    pub certify: CertifyMode,
    /// Worker threads for the recipe sweep; `None` uses the default pool.
    pub jobs: Option<usize>,
}

impl Default for VariantOptions {
    fn default() -> Self {
        VariantOptions { certify: CertifyMode::Both, jobs: None }
    }
}

/// One unique synthesis result: the first recipe that produced this
/// structure, plus its measurements.
#[derive(Debug, Clone)]
pub struct Variant {
    pub recipe: SynthesisRecipe,
    /// Position of that recipe in the executed list.
    pub recipe_index: usize,
    pub netlist: Netlist,
    pub stats: ComplexityStats,
    pub slack: Slack,
    pub signature: Signature,
}

/// Outcome of one executed recipe, whether or not it was the first to
/// reach its structure.
#[derive(Debug, Clone)]
pub struct ExecutedRecipe {
    pub recipe: SynthesisRecipe,
    pub index: usize,
    pub signature: Signature,
    /// Which entry of `VariantSet::variants` carries this structure.
    pub unique_index: usize,
}

/// All results of one recipe sweep over one base netlist.
#[derive(Debug, Clone)]
pub struct VariantSet {
    pub base: Netlist,
    /// Unique variants in first-reached order.
    pub variants: Vec<Variant>,
    /// Every executed recipe in input order.
    pub executed: Vec<ExecutedRecipe>,
    pub unique_signatures: BTreeSet<Signature>,
}

/// Number of 64-bit words behind the simulation certificate.
const SIM_CERT_WORDS: usize = 157; // 157 * 64 > 10^4 vectors

fn sim_agrees(a: &Netlist, b: &Netlist, seed: u64) -> bool {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SIM_CERT_WORDS {
        let pis: Vec<u64> = (0..a.inputs().len()).map(|_| rng.gen()).collect();
        let keys: Vec<u64> = (0..a.key_count()).map(|_| rng.gen()).collect();
        if a.simulate_words(&pis, &keys) != b.simulate_words(&pis, &keys) {
            return false;
        }
    }
    true
}

fn certify(base: &Netlist, variant: &Netlist, mode: CertifyMode, index: usize) -> Result<(), ResynthError> {
    if matches!(mode, CertifyMode::Sim | CertifyMode::Both)
        && !sim_agrees(base, variant, seed_split(0x5eed, "certify", index as u64))
    {
        return Err(ResynthError::NotEquivalent { recipe_index: index });
    }
    if matches!(mode, CertifyMode::Sat | CertifyMode::Both) {
        let r = check_equivalence(base, variant, ShareMode::InputsAndKeys, &SolverConfig::default())?;
        if r != EquivalenceResult::Equivalent {
            return Err(ResynthError::NotEquivalent { recipe_index: index });
        }
    }
    Ok(())
}

/// Resynthesizes `n` under every recipe, certifies each result, and
/// deduplicates by structural signature, keeping the first recipe per
/// structure. Recipes run on a worker pool; the collector performs the
/// dedup sequentially so the outcome is independent of scheduling.
pub fn generate_variants(
    n: &Netlist,
    recipes: &[SynthesisRecipe],
    opts: &VariantOptions,
) -> Result<VariantSet, ResynthError> {
    let run = || -> Result<Vec<(usize, Netlist)>, ResynthError> {
        recipes
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let v = resynthesize(n, r);
                certify(n, &v, opts.certify, i)?;
                Ok((i, v))
            })
            .collect()
    };
    let produced = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .expect("worker pool")
            .install(run),
        None => run(),
    }?;

    let mut variants: Vec<Variant> = Vec::new();
    let mut executed: Vec<ExecutedRecipe> = Vec::new();
    let mut by_signature: HashMap<Signature, usize> = HashMap::new();
    for (index, netlist) in produced {
        let recipe = recipes[index];
        let signature = structural_signature(&netlist);
        let unique_index = match by_signature.get(&signature) {
            Some(&u) => u,
            None => {
                let slack = match recipe.delay_point.target(compute_dcp(n)) {
                    None => Slack::Unconstrained,
                    Some(t) => Slack::Levels(t as i64 - netlist.depth() as i64),
                };
                let u = variants.len();
                by_signature.insert(signature, u);
                variants.push(Variant {
                    recipe,
                    recipe_index: index,
                    stats: stats(&netlist),
                    slack,
                    signature,
                    netlist,
                });
                u
            }
        };
        executed.push(ExecutedRecipe { recipe, index, signature, unique_index });
    }
    let unique_signatures = variants.iter().map(|v| v.signature).collect();
    Ok(VariantSet { base: n.clone(), variants, executed, unique_signatures })
}

/// Greedy first-occurrence cover: the sub-list of executed recipes that
/// still reaches every unique signature, in original order. Replaying the
/// returned list reproduces `unique_signatures` exactly.
pub fn prune_redundant_recipes(set: &VariantSet) -> Vec<SynthesisRecipe> {
    let mut covered: BTreeSet<Signature> = BTreeSet::new();
    let mut keep = Vec::new();
    for e in &set.executed {
        if covered.insert(e.signature) {
            keep.push(e.recipe);
        }
    }
    keep
}

/// Mean, population standard deviation, and the mean-normalized series for
/// one statistic across a variant set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub stddev: f64,
    /// Per-variant values divided by the mean (1.0 for every variant when
    /// the mean is zero, which only happens for all-zero series).
    pub normalized: Vec<f64>,
}

fn summarize(values: &[f64]) -> StatSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let normalized = values
        .iter()
        .map(|&v| if mean == 0.0 { 1.0 } else { v / mean })
        .collect();
    StatSummary { mean, stddev: var.sqrt(), normalized }
}

/// Spread of each complexity statistic across the unique variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub gate_count: StatSummary,
    pub depth: StatSummary,
    pub literal_count: StatSummary,
    pub area: StatSummary,
    pub power: StatSummary,
}

impl DiversityReport {
    pub fn rows(&self) -> [(&'static str, &StatSummary); 5] {
        [
            ("gate_count", &self.gate_count),
            ("depth", &self.depth),
            ("literal_count", &self.literal_count),
            ("area", &self.area),
            ("power", &self.power),
        ]
    }
}

pub fn diversity_report(set: &VariantSet) -> Result<DiversityReport, ResynthError> {
    if set.variants.is_empty() {
        return Err(ResynthError::EmptyVariantSet);
    }
    let col = |f: fn(&ComplexityStats) -> f64| -> StatSummary {
        let values: Vec<f64> = set.variants.iter().map(|v| f(&v.stats)).collect();
        summarize(&values)
    };
    Ok(DiversityReport {
        gate_count: col(|s| s.gate_count as f64),
        depth: col(|s| s.depth as f64),
        literal_count: col(|s| s.literal_count as f64),
        area: col(|s| s.area_proxy),
        power: col(|s| s.power_proxy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locking::{lock_rll, RllOptions};
    use crate::netlist::generate::{self, GeneratorConfig};
    use crate::netlist::{canonical_form, parse_bench, write_bench, GateKind, KeyVector};

    fn majority() -> Netlist {
        parse_bench(
            "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(f)\n\
             t1 = AND(a, b)\nt2 = AND(a, c)\nt3 = AND(b, c)\nf = OR(t1, t2, t3)\n",
        )
        .unwrap()
    }

    fn locked(seed: u64, gates: usize, key_bits: usize) -> Netlist {
        let mut cfg = GeneratorConfig::sized(10, 4, gates, seed);
        cfg.kinds.push(GateKind::Xor);
        let n = generate::random_netlist(&cfg);
        lock_rll(&n, key_bits, seed).unwrap().netlist
    }

    #[test]
    fn default_grid_has_1080_recipes() {
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        assert_eq!(recipes.len(), 1080);
        let first = recipes[0];
        assert_eq!(first.syn_gen, Effort::Low);
        assert_eq!(first.syn_opt, OptEffort::Low);
        assert_eq!(first.delay_point, DelayPoint::Unconstrained);
        let seeds: BTreeSet<u64> = recipes.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 1080, "position-derived seeds are distinct");
    }

    #[test]
    fn restricted_and_single_grids() {
        assert_eq!(enumerate_recipes(&RecipeConfig::reduced()).unwrap().len(), 720);
        let single = RecipeConfig {
            syn_gen: vec![Effort::Medium],
            syn_map: vec![Effort::Low],
            syn_opt: vec![OptEffort::Low],
            delay_point: vec![DelayPoint::Unconstrained],
            max_transition: vec![MaxTransition::P10],
            key_constraint: vec![KeyConstraint::Off],
            seed_base: 7,
        };
        assert_eq!(enumerate_recipes(&single).unwrap().len(), 1);
    }

    #[test]
    fn empty_axis_is_an_error() {
        let cfg = RecipeConfig { delay_point: vec![], ..RecipeConfig::default() };
        match enumerate_recipes(&cfg) {
            Err(ResynthError::EmptyAxis("delay_point")) => {}
            other => panic!("expected empty-axis error, got {other:?}"),
        }
    }

    #[test]
    fn dcp_oracles() {
        let mut b = Netlist::builder();
        let mut prev = b.add_input("x").unwrap();
        for i in 0..8 {
            prev = b.add_gate(&format!("b{i}"), GateKind::Buf, &[prev]).unwrap();
        }
        b.add_output("b7").unwrap();
        let bufs = b.build().unwrap();
        assert!(compute_dcp(&bufs) <= 8, "buffer chains cannot deepen");

        let mut b = Netlist::builder();
        let mut prev = b.add_input("x0").unwrap();
        for i in 1..=7 {
            let x = b.add_input(&format!("x{i}")).unwrap();
            prev = b.add_gate(&format!("c{i}"), GateKind::And, &[prev, x]).unwrap();
        }
        b.add_output("c7").unwrap();
        let chain = b.build().unwrap();
        assert_eq!(compute_dcp(&chain), 3);

        assert_eq!(compute_dcp(&majority()), 2);
    }

    #[test]
    fn all_low_recipe_is_sat_certified_equivalent() {
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        let n = locked(1, 90, 4);
        let v = resynthesize(&n, &recipes[0]);
        let r = check_equivalence(&n, &v, ShareMode::InputsAndKeys, &SolverConfig::default())
            .unwrap();
        assert_eq!(r, EquivalenceResult::Equivalent);
    }

    #[test]
    fn locked_majority_resynthesizes_xor_free_and_exact() {
        let lock = lock_rll(&majority(), 2, 3).unwrap();
        let n = &lock.netlist;
        assert!(n.gates().iter().any(|g| matches!(g.kind, GateKind::Xor | GateKind::Xnor)));
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        for r in [&recipes[0], &recipes[540], &recipes[1079]] {
            let v = resynthesize(n, r);
            assert!(
                !v.gates().iter().any(|g| matches!(g.kind, GateKind::Xor | GateKind::Xnor)),
                "XOR survived recipe {r:?}"
            );
            // 3 inputs x 2 key bits: all 32 combinations.
            for assignment in 0..32u64 {
                let pis: Vec<u64> = (0..3).map(|i| (assignment >> i) & 1).collect();
                let keys = vec![(assignment >> 3) & 1, (assignment >> 4) & 1];
                assert_eq!(
                    n.simulate_words(&pis, &keys),
                    v.simulate_words(&pis, &keys),
                    "combination {assignment}"
                );
            }
        }
    }

    #[test]
    fn resynthesis_is_deterministic() {
        let n = locked(5, 120, 6);
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        for r in [&recipes[37], &recipes[911]] {
            let a = write_bench(&resynthesize(&n, r));
            let b = write_bench(&resynthesize(&n, r));
            assert_eq!(a, b, "recipe {r:?} not reproducible");
        }
    }

    #[test]
    fn delay_points_usually_change_structure() {
        // Statistical claim over ten 1000+ gate circuits: moving only the
        // delay target usually lands on a different structure.
        let base_cfg = RecipeConfig {
            syn_gen: vec![Effort::Low],
            syn_map: vec![Effort::Low],
            syn_opt: vec![OptEffort::Low],
            delay_point: vec![DelayPoint::P1, DelayPoint::P3],
            max_transition: vec![MaxTransition::P15],
            key_constraint: vec![KeyConstraint::Off],
            seed_base: 0,
        };
        let recipes = enumerate_recipes(&base_cfg).unwrap();
        let mut differing = 0;
        for seed in 0..10u64 {
            let n = locked(seed + 100, 1000, 8);
            let a = structural_signature(&resynthesize(&n, &recipes[0]));
            let b = structural_signature(&resynthesize(&n, &recipes[1]));
            if a != b {
                differing += 1;
            }
        }
        assert!(differing >= 7, "only {differing}/10 circuits changed structure");
    }

    #[test]
    fn single_recipe_yields_single_variant() {
        let n = locked(9, 80, 4);
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        let set = generate_variants(&n, &recipes[..1], &VariantOptions::default()).unwrap();
        assert_eq!(set.variants.len(), 1);
        assert_eq!(set.executed.len(), 1);
        assert_eq!(set.unique_signatures.len(), 1);
    }

    #[test]
    fn sweep_finds_duplicates_and_dedups_first_wins() {
        // Seed-free recipes differing only in cleanup effort are exact
        // duplicates by construction.
        let cfg = RecipeConfig {
            syn_gen: Effort::ALL.to_vec(),
            syn_map: vec![Effort::Low, Effort::Medium],
            syn_opt: vec![OptEffort::Low],
            delay_point: vec![DelayPoint::Unconstrained, DelayPoint::P2],
            max_transition: vec![MaxTransition::P10],
            key_constraint: vec![KeyConstraint::Off],
            seed_base: 0,
        };
        let recipes = enumerate_recipes(&cfg).unwrap();
        assert_eq!(recipes.len(), 12);
        let n = locked(11, 100, 4);
        let set = generate_variants(&n, &recipes, &VariantOptions::default()).unwrap();
        assert!(set.variants.len() < recipes.len(), "no duplicates found");
        assert_eq!(set.variants.len() * 3, recipes.len(), "cleanup axis should collapse 3-to-1");
        for e in &set.executed {
            let v = &set.variants[e.unique_index];
            assert_eq!(v.signature, e.signature);
            assert!(v.recipe_index <= e.index, "first recipe wins");
        }
        // Dedup matches exact canonical comparison, not just digests.
        let mut canon: Vec<Vec<u8>> =
            set.executed.iter().map(|e| canonical_form(&set.variants[e.unique_index].netlist)).collect();
        canon.sort();
        canon.dedup();
        assert_eq!(canon.len(), set.variants.len());
    }

    #[test]
    fn reruns_reproduce_the_signature_set() {
        let n = locked(13, 90, 4);
        let cfg = RecipeConfig {
            syn_gen: vec![Effort::Low],
            syn_map: vec![Effort::Low, Effort::High],
            syn_opt: vec![OptEffort::Low, OptEffort::Medium],
            delay_point: vec![DelayPoint::Unconstrained],
            max_transition: vec![MaxTransition::P10],
            key_constraint: vec![KeyConstraint::Off],
            seed_base: 3,
        };
        let recipes = enumerate_recipes(&cfg).unwrap();
        let a = generate_variants(&n, &recipes, &VariantOptions::default()).unwrap();
        let b = generate_variants(&n, &recipes, &VariantOptions::default()).unwrap();
        assert_eq!(a.unique_signatures, b.unique_signatures);
    }

    #[test]
    fn every_certify_mode_accepts_honest_variants() {
        let n = locked(17, 70, 4);
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        for mode in [CertifyMode::Sim, CertifyMode::Sat, CertifyMode::Both] {
            let set = generate_variants(
                &n,
                &recipes[..2],
                &VariantOptions { certify: mode, jobs: Some(1) },
            )
            .unwrap();
            assert_eq!(set.executed.len(), 2);
        }
    }

    #[test]
    fn variants_carry_true_key_behavior() {
        // The recipe sweep must preserve the lock: with the true key the
        // variant equals the original circuit, with a wrong key it may not.
        let cfg = GeneratorConfig::sized(8, 3, 80, 21);
        let clear = generate::random_netlist(&cfg);
        let lock = lock_rll(&clear, 4, 9).unwrap();
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        let v = resynthesize(&lock.netlist, &recipes[700]);
        let true_bits: Vec<u64> =
            (0..4).map(|i| if lock.record.true_key.bit(i) { !0u64 } else { 0 }).collect();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..32 {
            let pis: Vec<u64> = (0..8).map(|_| rng.gen()).collect();
            assert_eq!(clear.simulate_words(&pis, &[]), v.simulate_words(&pis, &true_bits));
        }
    }

    #[test]
    fn prune_is_identity_when_all_distinct() {
        let n = locked(19, 90, 4);
        let cfg = RecipeConfig {
            syn_gen: vec![Effort::Low],
            syn_map: vec![Effort::Low, Effort::Medium, Effort::High],
            syn_opt: vec![OptEffort::Medium],
            delay_point: vec![DelayPoint::Unconstrained],
            max_transition: vec![MaxTransition::P10],
            key_constraint: vec![KeyConstraint::Off],
            seed_base: 1,
        };
        let recipes = enumerate_recipes(&cfg).unwrap();
        let set = generate_variants(&n, &recipes, &VariantOptions::default()).unwrap();
        if set.variants.len() == recipes.len() {
            assert_eq!(prune_redundant_recipes(&set), recipes);
        } else {
            // Different libraries still collided; the pruned list must be
            // strictly shorter yet cover everything.
            let pruned = prune_redundant_recipes(&set);
            assert!(pruned.len() < recipes.len());
        }
    }

    #[test]
    fn pruned_recipes_replay_to_the_same_unique_set() {
        let n = locked(23, 100, 4);
        let cfg = RecipeConfig {
            syn_gen: Effort::ALL.to_vec(),
            syn_map: vec![Effort::Low, Effort::Medium],
            syn_opt: vec![OptEffort::Low, OptEffort::Medium],
            delay_point: vec![DelayPoint::Unconstrained],
            max_transition: vec![MaxTransition::P5, MaxTransition::P10],
            key_constraint: vec![KeyConstraint::Off],
            seed_base: 0,
        };
        let recipes = enumerate_recipes(&cfg).unwrap();
        let full = generate_variants(&n, &recipes, &VariantOptions::default()).unwrap();
        let pruned = prune_redundant_recipes(&full);
        assert!(pruned.len() < recipes.len(), "grid contains guaranteed duplicates");
        assert_eq!(pruned.len(), full.variants.len());
        let replay = generate_variants(&n, &pruned, &VariantOptions::default()).unwrap();
        assert_eq!(replay.unique_signatures, full.unique_signatures);
    }

    #[test]
    fn diversity_arithmetic_oracles() {
        let n = locked(29, 60, 2);
        let recipes = enumerate_recipes(&RecipeConfig::default()).unwrap();
        let single = generate_variants(&n, &recipes[..1], &VariantOptions::default()).unwrap();
        let report = diversity_report(&single).unwrap();
        for (name, s) in report.rows() {
            assert_eq!(s.stddev, 0.0, "{name} stddev of one sample");
            assert_eq!(s.normalized, vec![1.0], "{name}");
        }

        // Hand-built pair with gate counts 10 and 20.
        let mk = |gates: usize, seed: u64| {
            let c = GeneratorConfig::sized(6, 2, gates, seed);
            let netlist = generate::random_netlist(&c);
            Variant {
                recipe: recipes[0],
                recipe_index: 0,
                stats: stats(&netlist),
                slack: Slack::Unconstrained,
                signature: structural_signature(&netlist),
                netlist,
            }
        };
        let (a, b) = (mk(10, 1), mk(20, 2));
        assert_eq!(a.stats.gate_count, 10);
        assert_eq!(b.stats.gate_count, 20);
        let set = VariantSet {
            base: a.netlist.clone(),
            unique_signatures: [a.signature, b.signature].into_iter().collect(),
            executed: vec![],
            variants: vec![a, b],
        };
        let report = diversity_report(&set).unwrap();
        assert_eq!(report.gate_count.mean, 15.0);
        assert_eq!(report.gate_count.stddev, 5.0);
        for (name, s) in report.rows() {
            let mean: f64 = s.normalized.iter().sum::<f64>() / s.normalized.len() as f64;
            assert!((mean - 1.0).abs() < 1e-9, "{name} normalized mean {mean}");
        }

        let empty = VariantSet {
            base: majority(),
            variants: vec![],
            executed: vec![],
            unique_signatures: BTreeSet::new(),
        };
        assert!(matches!(diversity_report(&empty), Err(ResynthError::EmptyVariantSet)));
    }

    #[test]
    fn key_constraint_and_rll_options_compose() {
        // Smoke test over the remaining axes: key-scoped recipes with every
        // optimization effort still certify.
        let cfg = GeneratorConfig::sized(8, 3, 90, 41);
        let clear = generate::random_netlist(&cfg);
        let lock = lock_rll(&clear, 6, 5).unwrap();
        let n = &lock.netlist;
        let grid = RecipeConfig {
            syn_gen: vec![Effort::Low],
            syn_map: vec![Effort::Medium],
            syn_opt: OptEffort::ALL.to_vec(),
            delay_point: vec![DelayPoint::P2],
            max_transition: vec![MaxTransition::P5],
            key_constraint: vec![KeyConstraint::On],
            seed_base: 11,
        };
        let recipes = enumerate_recipes(&grid).unwrap();
        let set = generate_variants(n, &recipes, &VariantOptions::default()).unwrap();
        assert_eq!(set.executed.len(), 4);
        for v in &set.variants {
            assert!(matches!(v.slack, Slack::Levels(_)));
        }
        let _ = KeyVector::zeros(6);
        let _ = RllOptions::default();
    }
}
