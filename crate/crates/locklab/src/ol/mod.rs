//! Oracle-less key recovery from structure alone.
//!
//! The attack never sees a working chip. For each key bit it builds two
//! circuits, one with the bit hardened to 0 and one to 1, pushes both
//! through the same fixed light synthesis recipe, and compares complexity
//! statistics: hardening a key gate with its correct value tends to let
//! constant propagation collapse the logic the locker wove in, while the
//! wrong value leaves residue standing. A decision policy turns the
//! per-bit feature deltas into 0/1/unknown guesses, and guesses gathered
//! from many structural variants of the same locked design are merged by
//! per-bit majority vote, ties staying unknown.
//!
//! Nothing here takes the true key as input; scoring against a known key
//! is a separate, explicit step ([`score`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{
    stats, structural_signature, ComplexityStats, GateKind, KeyVector, Netlist, NetlistError,
    Signature,
};
use crate::resynth::{
    constprop, resynthesize, sweep, DelayPoint, Effort, KeyConstraint, MaxTransition, OptEffort,
    SynthesisRecipe,
};

/// Default decision margin as a fraction of the base circuit's area proxy.
pub const DEFAULT_TAU: f64 = 0.02;

/// The fixed recipe applied to both hardenings before features are read:
/// enough cleanup and rewriting for collapses to show, cheap mapping, no
/// delay shaping, and a constant seed so the whole attack is a pure
/// function of the netlist.
const LIGHT_RECIPE: SynthesisRecipe = SynthesisRecipe {
    syn_gen: Effort::Medium,
    syn_map: Effort::Low,
    syn_opt: OptEffort::Medium,
    delay_point: DelayPoint::Unconstrained,
    max_transition: MaxTransition::P15,
    key_constraint: KeyConstraint::Off,
    seed: 0x0150_1a7e,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OlError {
    #[error("key index {index} out of range, netlist has {key_count} key inputs")]
    KeyIndex { index: usize, key_count: usize },
    #[error("netlist has no key inputs")]
    NoKeyInputs,
    #[error("no solutions to merge")]
    NoSolutions,
    #[error("solution length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("netlist rebuild failed: {0}")]
    Build(#[from] NetlistError),
}

/// One key bit's verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitValue {
    Zero,
    One,
    Unknown,
}

impl BitValue {
    pub fn from_bool(v: bool) -> BitValue {
        if v {
            BitValue::One
        } else {
            BitValue::Zero
        }
    }

    pub fn is_decided(self) -> bool {
        self != BitValue::Unknown
    }

    /// Whether a decided value matches the true bit. Unknown never agrees.
    pub fn agrees(self, truth: bool) -> bool {
        self == BitValue::from_bool(truth)
    }
}

/// A guess plus a reporting-only confidence. Merging and scoring look at
/// the value alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyBitGuess {
    pub value: BitValue,
    /// In `[0, 1]`; exactly 0 for unknown bits.
    pub confidence: f64,
}

impl KeyBitGuess {
    /// Normalizing constructor: unknown forces confidence 0, anything else
    /// clamps into `[0, 1]`.
    pub fn new(value: BitValue, confidence: f64) -> KeyBitGuess {
        let confidence = match value {
            BitValue::Unknown => 0.0,
            _ => confidence.clamp(0.0, 1.0),
        };
        KeyBitGuess { value, confidence }
    }

    pub fn unknown() -> KeyBitGuess {
        KeyBitGuess { value: BitValue::Unknown, confidence: 0.0 }
    }
}

/// Per-bit guesses read off one netlist, tagged with that netlist's
/// structural signature so reports can trace every vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionVector {
    pub guesses: Vec<KeyBitGuess>,
    pub source: Signature,
}

impl SolutionVector {
    pub fn score(&self, truth: &KeyVector) -> Result<Score, OlError> {
        score(&self.guesses, truth)
    }
}

/// Vote counts and the majority verdict for one key bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleBit {
    /// Contributing solutions that said zero.
    pub dk0: usize,
    /// Contributing solutions that said one.
    pub dk1: usize,
    pub merged: KeyBitGuess,
}

/// The merged verdict across solutions: strict majority decides, a tie or
/// total silence stays unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSolution {
    pub bits: Vec<EnsembleBit>,
}

impl EnsembleSolution {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn merged(&self) -> Vec<KeyBitGuess> {
        self.bits.iter().map(|b| b.merged).collect()
    }

    pub fn score(&self, truth: &KeyVector) -> Result<Score, OlError> {
        score(&self.merged(), truth)
    }
}

/// `cdk` correctly deciphered bits out of `dk` deciphered at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub cdk: usize,
    pub dk: usize,
}

impl std::fmt::Display for Score {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.cdk, self.dk)
    }
}

/// Per-field difference between the two hardenings of one key bit, zero
/// hardening minus one hardening, both after [`LIGHT_RECIPE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureDelta {
    pub gate_count: f64,
    pub depth: f64,
    pub literal_count: f64,
    pub area: f64,
    pub power: f64,
}

impl FeatureDelta {
    fn between(zero: &ComplexityStats, one: &ComplexityStats) -> FeatureDelta {
        let d = FeatureDelta {
            gate_count: zero.gate_count as f64 - one.gate_count as f64,
            depth: zero.depth as f64 - one.depth as f64,
            literal_count: zero.literal_count as f64 - one.literal_count as f64,
            area: zero.area_proxy - one.area_proxy,
            power: zero.power_proxy - one.power_proxy,
        };
        debug_assert!(d.as_array().iter().all(|v| v.is_finite()));
        d
    }

    fn as_array(&self) -> [f64; 5] {
        [self.gate_count, self.depth, self.literal_count, self.area, self.power]
    }

    /// The decision statistic: positive when the zero hardening came out
    /// smaller, which is evidence for the bit being zero.
    fn statistic(&self) -> f64 {
        -self.area
    }
}

/// How per-bit deltas become guesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionPolicy {
    /// Guess the value whose hardening simplified more, when its advantage
    /// exceeds `tau` times the base area; otherwise unknown.
    Threshold { tau: f64 },
    /// Two-group split of the normalized delta vectors; each group takes
    /// the sign of its aggregate simplification. Sub-threshold bits and
    /// groups with no leaning stay unknown. One key bit degenerates to the
    /// threshold rule.
    Cluster { tau: f64 },
}

impl Default for DecisionPolicy {
    fn default() -> Self {
        DecisionPolicy::Threshold { tau: DEFAULT_TAU }
    }
}

/// Replaces key input `i` with the constant `v` and cleans up: constant
/// propagation followed by a dead-gate sweep. Remaining key inputs keep
/// their names and relative order, so the result has one key input less.
pub fn harden_key_bit(n: &Netlist, i: usize, v: bool) -> Result<Netlist, OlError> {
    let built = substitute_key_bit(n, i, v)?;
    Ok(sweep(&constprop(&built)))
}

/// The rebuild half of [`harden_key_bit`]: key `i` becomes a constant gate
/// driving the same net, nothing is simplified.
fn substitute_key_bit(n: &Netlist, i: usize, v: bool) -> Result<Netlist, OlError> {
    let p = n.key_count();
    if i >= p {
        return Err(OlError::KeyIndex { index: i, key_count: p });
    }
    let mut b = Netlist::builder();
    for &pi in n.inputs() {
        b.add_input(n.name(pi))?;
    }
    for (j, &k) in n.key_inputs().iter().enumerate() {
        let name = n.name(k);
        if j == i {
            let kind = if v { GateKind::Const1 } else { GateKind::Const0 };
            b.add_gate(name, kind, &[])?;
        } else {
            b.add_key_input(name, crate::locking::key_suffix(name))?;
        }
    }
    for g in n.gates() {
        let fanins: Vec<_> = g.fanins.iter().map(|&f| b.net(n.name(f))).collect();
        b.add_gate(n.name(g.output), g.kind, &fanins)?;
    }
    for &po in n.outputs() {
        b.add_output(n.name(po))?;
    }
    Ok(b.build()?)
}

/// Hardens bit `i` both ways, resimplifies both circuits identically, and
/// returns the feature difference the decision policies read.
pub fn feature_delta(n: &Netlist, i: usize) -> Result<FeatureDelta, OlError> {
    let zero = resynthesize(&harden_key_bit(n, i, false)?, &LIGHT_RECIPE);
    let one = resynthesize(&harden_key_bit(n, i, true)?, &LIGHT_RECIPE);
    Ok(FeatureDelta::between(&stats(&zero), &stats(&one)))
}

/// Runs the single-netlist attack: per-bit hardening deltas through the
/// decision policy. Deterministic, and the true key never enters.
pub fn attack_netlist(n: &Netlist, policy: &DecisionPolicy) -> Result<SolutionVector, OlError> {
    let p = n.key_count();
    if p == 0 {
        return Err(OlError::NoKeyInputs);
    }
    let base_area = stats(&resynthesize(n, &LIGHT_RECIPE)).area_proxy;
    let deltas: Vec<FeatureDelta> =
        (0..p).map(|i| feature_delta(n, i)).collect::<Result<_, _>>()?;
    let guesses = match *policy {
        DecisionPolicy::Threshold { tau } => {
            deltas.iter().map(|d| threshold_guess(d, tau, base_area)).collect()
        }
        DecisionPolicy::Cluster { tau } => cluster_guesses(&deltas, tau, base_area),
    };
    Ok(SolutionVector { guesses, source: structural_signature(n) })
}

/// Attacks every netlist (in parallel) and merges the votes.
pub fn attack_ensemble(
    nets: &[&Netlist],
    policy: &DecisionPolicy,
) -> Result<EnsembleRun, OlError> {
    let solutions: Vec<SolutionVector> =
        nets.par_iter().map(|n| attack_netlist(n, policy)).collect::<Result<_, _>>()?;
    let ensemble = merge_votes(&solutions)?;
    Ok(EnsembleRun { solutions, ensemble })
}

/// One ensemble attack's full output: every contributing solution plus the
/// merged verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub solutions: Vec<SolutionVector>,
    pub ensemble: EnsembleSolution,
}

fn threshold_guess(d: &FeatureDelta, tau: f64, base_area: f64) -> KeyBitGuess {
    let margin = tau * base_area;
    let s = d.statistic();
    if s > margin {
        KeyBitGuess::new(BitValue::Zero, decision_confidence(s, margin))
    } else if -s > margin {
        KeyBitGuess::new(BitValue::One, decision_confidence(-s, margin))
    } else {
        KeyBitGuess::unknown()
    }
}

/// Fraction of the statistic sitting above the decision margin: 0 at the
/// boundary, approaching 1 as the evidence dwarfs it.
fn decision_confidence(magnitude: f64, margin: f64) -> f64 {
    if magnitude <= 0.0 {
        return 0.0;
    }
    (1.0 - margin / magnitude).clamp(0.0, 1.0)
}

fn cluster_guesses(deltas: &[FeatureDelta], tau: f64, base_area: f64) -> Vec<KeyBitGuess> {
    if deltas.len() < 2 {
        return deltas.iter().map(|d| threshold_guess(d, tau, base_area)).collect();
    }
    let raw: Vec<[f64; 5]> = deltas.iter().map(|d| d.as_array()).collect();
    let pts = zscore(&raw);

    // Deterministic two-means: centroids start at the area-delta extremes.
    let lo = (0..raw.len()).min_by(|&a, &b| raw[a][3].total_cmp(&raw[b][3])).unwrap();
    let hi = (0..raw.len()).max_by(|&a, &b| raw[a][3].total_cmp(&raw[b][3])).unwrap();
    let mut centroids = [pts[lo], pts[hi]];
    let mut assign = vec![0usize; pts.len()];
    for _ in 0..32 {
        let mut changed = false;
        for (i, p) in pts.iter().enumerate() {
            let c = usize::from(dist2(p, &centroids[1]) < dist2(p, &centroids[0]));
            if c != assign[i] {
                assign[i] = c;
                changed = true;
            }
        }
        for c in 0..2 {
            let members: Vec<&[f64; 5]> =
                pts.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..5 {
                centroids[c][d] = members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }

    // A group leans the way its aggregate statistic points.
    let polarity: Vec<Option<BitValue>> = (0..2)
        .map(|c| {
            let (sum, count) = deltas
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .fold((0.0, 0usize), |(s, n), (d, _)| (s + d.statistic(), n + 1));
            if count == 0 || sum == 0.0 {
                None
            } else if sum > 0.0 {
                Some(BitValue::Zero)
            } else {
                Some(BitValue::One)
            }
        })
        .collect();

    deltas
        .iter()
        .zip(&assign)
        .map(|(d, &c)| {
            let s = d.statistic();
            let margin = tau * base_area;
            match polarity[c] {
                Some(v) if s.abs() > margin => {
                    KeyBitGuess::new(v, decision_confidence(s.abs(), margin))
                }
                _ => KeyBitGuess::unknown(),
            }
        })
        .collect()
}

/// Per-dimension standard scores; a flat dimension contributes zero.
fn zscore(raw: &[[f64; 5]]) -> Vec<[f64; 5]> {
    let n = raw.len() as f64;
    let mut out = vec![[0.0; 5]; raw.len()];
    for d in 0..5 {
        let mean = raw.iter().map(|r| r[d]).sum::<f64>() / n;
        let var = raw.iter().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd > 0.0 {
            for (o, r) in out.iter_mut().zip(raw) {
                o[d] = (r[d] - mean) / sd;
            }
        }
    }
    out
}

fn dist2(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Counts each bit's zero and one votes across solutions and applies the
/// majority rule: strict majority decides, ties and silence stay unknown.
/// The merged confidence is the vote margin over the votes cast.
pub fn merge_votes(solutions: &[SolutionVector]) -> Result<EnsembleSolution, OlError> {
    let first = solutions.first().ok_or(OlError::NoSolutions)?;
    let p = first.guesses.len();
    for s in solutions {
        if s.guesses.len() != p {
            return Err(OlError::LengthMismatch { expected: p, got: s.guesses.len() });
        }
    }
    let bits = (0..p)
        .map(|i| {
            let dk0 = solutions.iter().filter(|s| s.guesses[i].value == BitValue::Zero).count();
            let dk1 = solutions.iter().filter(|s| s.guesses[i].value == BitValue::One).count();
            let merged = match dk0.cmp(&dk1) {
                std::cmp::Ordering::Greater => KeyBitGuess::new(
                    BitValue::Zero,
                    (dk0 - dk1) as f64 / (dk0 + dk1) as f64,
                ),
                std::cmp::Ordering::Less => KeyBitGuess::new(
                    BitValue::One,
                    (dk1 - dk0) as f64 / (dk0 + dk1) as f64,
                ),
                std::cmp::Ordering::Equal => KeyBitGuess::unknown(),
            };
            EnsembleBit { dk0, dk1, merged }
        })
        .collect();
    Ok(EnsembleSolution { bits })
}

/// `dk` counts the decided bits, `cdk` those decided correctly.
pub fn score(guesses: &[KeyBitGuess], truth: &KeyVector) -> Result<Score, OlError> {
    if guesses.len() != truth.len() {
        return Err(OlError::LengthMismatch { expected: truth.len(), got: guesses.len() });
    }
    let dk = guesses.iter().filter(|g| g.value.is_decided()).count();
    let cdk = guesses
        .iter()
        .zip(truth.bits())
        .filter(|(g, &t)| g.value.is_decided() && g.value.agrees(t))
        .count();
    Ok(Score { cdk, dk })
}
