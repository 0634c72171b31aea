//! Oracle-guided attacks: the query attack with per-bit proofs, the
//! ensemble merge on top of oracle-less votes, and a classic iterative
//! two-copy attack as a baseline.
//!
//! The query attack spends a fixed oracle budget, twice the key width by
//! default: one sensitization query per key bit (an input under which
//! flipping that bit can change an output, found by SAT on a two-copy
//! construction) plus seeded random queries to fill the budget. Every
//! question/answer pair becomes a copy of the locked circuit pinned to
//! that behavior inside one growing formula whose key variables are
//! shared, so a model of the formula is a key candidate that replays all
//! observed behavior. A bit is *proven* when the formula is unsatisfiable
//! with the bit forced to the complement of its candidate value; running
//! out of solver budget is reported as such and never as a proof.
//!
//! [`ensemble_og_attack`] repeats the proof stage on every resynthesized
//! variant with one shared query log. Proven values take precedence in the
//! merged solution; bits nobody proves fall back to the oracle-less vote,
//! and a proven-value conflict across variants is a fatal integrity error
//! because certified-equivalent circuits cannot pin the same bit both ways.
//!
//! [`dip_attack`] is the reference point the locks defend against: find an
//! input where two keys disagree, ask the oracle, force agreement, repeat.
//! Its iteration count is the classic resilience measure; point-function
//! trees make it grow exponentially while the query attack above stays at
//! its fixed budget.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{
    build_miter, check_equivalence, encode_instance, tseitin_encode, Binding, CheckError,
    CnfFormula, EquivalenceResult, Lit, MiterError, Model, SatOutcome, SatSession, ShareMode,
    SolverConfig, SolverError, Var,
};
use crate::locking::{apply_key, LockError};
use crate::netlist::{KeyVector, Netlist, SimError};
use crate::ol::{BitValue, EnsembleSolution, KeyBitGuess, Score};
use crate::seed_split;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OgError {
    #[error("netlist has no key inputs to attack")]
    NoKeyInputs,
    #[error("no variants to attack")]
    NoVariants,
    #[error("key bit {index} out of range for {key_count} key inputs")]
    KeyIndex { index: usize, key_count: usize },
    #[error("query has {got} bits but the circuit has {expected} primary inputs")]
    QueryWidth { expected: usize, got: usize },
    #[error("response has {got} bits but the circuit has {expected} outputs")]
    ResponseWidth { expected: usize, got: usize },
    #[error("oracle circuit still has key inputs; apply the key first")]
    KeyedOracle,
    #[error("oracle interface does not match the locked netlist: {0}")]
    OracleInterface(String),
    #[error("variant interface does not match the locked netlist: {0}")]
    VariantInterface(String),
    #[error("solution has {got} bits but the lock has {expected} key inputs")]
    SolutionWidth { expected: usize, got: usize },
    #[error("variants prove key bit {bit} to opposite values; they cannot all be equivalent")]
    ProofConflict { bit: usize },
    #[error("query constraints are unsatisfiable; the oracle does not match the locked circuit")]
    InconsistentOracle,
    #[error("candidate search exhausted the solver budget")]
    CandidateBudget,
    #[error("extracted key failed the final equivalence check")]
    DipVerification,
    #[error(transparent)]
    Miter(#[from] MiterError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Lock(#[from] LockError),
}

/// One oracle question: an assignment of the primary inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub inputs: Vec<bool>,
}

/// The unlocked chip. Answers are memoized, so repeating a question hits
/// the cache without bumping the counter, and the whole type is safe to
/// share across concurrently attacked variants.
#[derive(Debug)]
pub struct Oracle {
    circuit: Netlist,
    state: Mutex<OracleState>,
}

#[derive(Debug, Default)]
struct OracleState {
    cache: HashMap<Vec<bool>, Vec<bool>>,
    count: u64,
}

impl Oracle {
    /// Wraps the original, never-locked design.
    pub fn from_original(n: &Netlist) -> Result<Oracle, OgError> {
        if n.key_count() > 0 {
            return Err(OgError::KeyedOracle);
        }
        Ok(Oracle { circuit: n.clone(), state: Mutex::new(OracleState::default()) })
    }

    /// Programs the locked design with its true key.
    pub fn from_locked(locked: &Netlist, key: &KeyVector) -> Result<Oracle, OgError> {
        let sealed = apply_key(locked, key)?;
        Ok(Oracle { circuit: sealed, state: Mutex::new(OracleState::default()) })
    }

    /// The key-free reference circuit behind the oracle.
    pub fn circuit(&self) -> &Netlist {
        &self.circuit
    }

    /// Output values for one query, in output order.
    pub fn respond(&self, q: &Query) -> Result<Vec<bool>, OgError> {
        if q.inputs.len() != self.circuit.inputs().len() {
            return Err(OgError::QueryWidth {
                expected: self.circuit.inputs().len(),
                got: q.inputs.len(),
            });
        }
        let mut state = self.state.lock().expect("oracle state");
        if let Some(hit) = state.cache.get(&q.inputs) {
            return Ok(hit.clone());
        }
        let out = self.circuit.simulate(&q.inputs, &[])?;
        state.cache.insert(q.inputs.clone(), out.clone());
        state.count += 1;
        Ok(out)
    }

    /// Distinct questions answered so far.
    pub fn query_count(&self) -> u64 {
        self.state.lock().expect("oracle state").count
    }

    /// Checks that `locked` exposes the same ordered primary inputs and
    /// outputs as the chip, so queries and responses line up positionally.
    pub fn matches_interface(&self, locked: &Netlist) -> Result<(), OgError> {
        same_names(&self.circuit, locked, false).map_err(OgError::OracleInterface)
    }
}

/// Compares ordered PI and PO name lists, and key names too when asked.
fn same_names(a: &Netlist, b: &Netlist, keys: bool) -> Result<(), String> {
    fn list<'a>(n: &'a Netlist, ids: &[crate::netlist::NetId]) -> Vec<&'a str> {
        ids.iter().map(|&i| n.name(i)).collect()
    }
    if list(a, a.inputs()) != list(b, b.inputs()) {
        return Err("primary inputs differ".into());
    }
    if list(a, a.outputs()) != list(b, b.outputs()) {
        return Err("primary outputs differ".into());
    }
    if keys && list(a, a.key_inputs()) != list(b, b.key_inputs()) {
        return Err("key inputs differ".into());
    }
    Ok(())
}

/// The accumulated attack formula: one free copy of the locked circuit
/// plus one input/output-pinned copy per observed query, all sharing the
/// same key variables. Any model's key projection replays every query.
#[derive(Debug, Clone)]
pub struct QueryFormula {
    formula: CnfFormula,
    keys: Vec<Var>,
    circuit: Netlist,
    copies: usize,
}

impl QueryFormula {
    pub fn new(locked: &Netlist) -> QueryFormula {
        let (formula, inst) = tseitin_encode(locked);
        QueryFormula { formula, keys: inst.keys, circuit: locked.clone(), copies: 0 }
    }

    /// Conjoins one pinned copy: primary inputs fixed to `q`, outputs
    /// fixed to the oracle's `response`, keys shared with every other copy.
    pub fn constrain(&mut self, q: &Query, response: &[bool]) -> Result<(), OgError> {
        if q.inputs.len() != self.circuit.inputs().len() {
            return Err(OgError::QueryWidth {
                expected: self.circuit.inputs().len(),
                got: q.inputs.len(),
            });
        }
        if response.len() != self.circuit.outputs().len() {
            return Err(OgError::ResponseWidth {
                expected: self.circuit.outputs().len(),
                got: response.len(),
            });
        }
        let tag = format!("q{}", self.copies);
        let bind = Binding { inputs: None, keys: Some(self.keys.clone()) };
        let inst = encode_instance(&mut self.formula, &self.circuit, &tag, &bind);
        for (&v, &bit) in inst.inputs.iter().zip(&q.inputs) {
            self.formula.add_clause(&[v.lit(bit)]);
        }
        for (&v, &bit) in inst.outputs.iter().zip(response) {
            self.formula.add_clause(&[v.lit(bit)]);
        }
        self.copies += 1;
        Ok(())
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    /// Shared key variables, in sorted key order.
    pub fn keys(&self) -> &[Var] {
        &self.keys
    }

    /// Pinned copies conjoined so far.
    pub fn copies(&self) -> usize {
        self.copies
    }

    fn project_key(&self, m: &Model) -> KeyVector {
        KeyVector::new(self.keys.iter().map(|&v| m.value(v)).collect())
    }

    /// Any key consistent with every observed query. Not necessarily the
    /// secret key; the guarantee is replay, nothing more.
    pub fn solve_candidate(&self, config: &SolverConfig) -> Result<KeyVector, OgError> {
        let mut session = SatSession::with_config(config.clone());
        session.add_formula(&self.formula);
        match session.solve(&[]) {
            Ok(SatOutcome::Sat(m)) => Ok(self.project_key(&m)),
            Ok(SatOutcome::Unsat) => Err(OgError::InconsistentOracle),
            Err(SolverError::ResourceLimit) => Err(OgError::CandidateBudget),
        }
    }

    /// Tries to prove bit `bit` equals `value` by refuting the complement.
    pub fn prove_bit(
        &self,
        bit: usize,
        value: bool,
        config: &SolverConfig,
    ) -> Result<ProofStatus, OgError> {
        if bit >= self.keys.len() {
            return Err(OgError::KeyIndex { index: bit, key_count: self.keys.len() });
        }
        let mut session = SatSession::with_config(config.clone());
        session.add_formula(&self.formula);
        Ok(match session.solve(&[self.keys[bit].lit(!value)]) {
            Ok(SatOutcome::Unsat) => ProofStatus::Proven,
            Ok(SatOutcome::Sat(m)) => ProofStatus::Undecided(self.project_key(&m)),
            Err(SolverError::ResourceLimit) => ProofStatus::Budget,
        })
    }
}

/// Outcome of one per-bit proof attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum ProofStatus {
    /// Every key consistent with the queries agrees on this bit.
    Proven,
    /// A consistent key disagreeing on this bit exists; carried as a
    /// ready-made alternative candidate.
    Undecided(KeyVector),
    /// The solver gave up first. Says nothing about the bit.
    Budget,
}

/// One key bit after the proof stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitProof {
    pub candidate: bool,
    pub proven: bool,
    /// The complement check hit the solver budget instead of returning a
    /// verdict. Only ever set on unproven bits.
    pub budget: bool,
}

/// Why a key bit produced no sensitization query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    /// No input/key completion makes flipping the bit visible at an output.
    Unobservable,
    /// The search hit the solver budget.
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedBit {
    pub bit: usize,
    pub reason: SkipReason,
}

/// Result of the per-bit sensitization search.
#[derive(Debug, Clone)]
pub struct SensitizationOutcome {
    /// `(key bit, query)` pairs in key order, sensitized bits only.
    pub queries: Vec<(usize, Query)>,
    pub skipped: Vec<SkippedBit>,
}

/// Finds, for each key bit, an input under which flipping that bit can
/// change an output for some completion of the remaining bits. Realized as
/// one incremental two-copy formula: the copies share primary inputs, and
/// guard literals select per solve which key pair is forced unequal (the
/// probed bit) and which are tied.
pub fn gen_sensitization_queries(
    locked: &Netlist,
    config: &SolverConfig,
) -> Result<SensitizationOutcome, OgError> {
    let p = locked.key_count();
    if p == 0 {
        return Ok(SensitizationOutcome { queries: Vec::new(), skipped: Vec::new() });
    }
    let mut miter = build_miter(locked, locked, ShareMode::InputsOnly)?;
    let mut tie = Vec::with_capacity(p);
    let mut split = Vec::with_capacity(p);
    for j in 0..p {
        let (l, r) = (miter.keys_left[j], miter.keys_right[j]);
        let t = miter.formula.new_var().lit(true);
        miter.formula.add_clause(&[t.negate(), l.lit(false), r.lit(true)]);
        miter.formula.add_clause(&[t.negate(), l.lit(true), r.lit(false)]);
        tie.push(t);
        let s = miter.formula.new_var().lit(true);
        miter.formula.add_clause(&[s.negate(), l.lit(true), r.lit(true)]);
        miter.formula.add_clause(&[s.negate(), l.lit(false), r.lit(false)]);
        split.push(s);
    }
    let mut session = SatSession::with_config(config.clone());
    session.add_formula(&miter.formula);

    let mut queries = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..p {
        let mut assumptions: Vec<Lit> = vec![miter.enable, split[i]];
        assumptions.extend((0..p).filter(|&j| j != i).map(|j| tie[j]));
        match session.solve(&assumptions) {
            Ok(SatOutcome::Sat(model)) => {
                let inputs = miter.inputs.iter().map(|&v| model.value(v)).collect();
                queries.push((i, Query { inputs }));
            }
            Ok(SatOutcome::Unsat) => {
                skipped.push(SkippedBit { bit: i, reason: SkipReason::Unobservable });
            }
            Err(SolverError::ResourceLimit) => {
                skipped.push(SkippedBit { bit: i, reason: SkipReason::Budget });
            }
        }
    }
    Ok(SensitizationOutcome { queries, skipped })
}

/// Seeded uniform input vectors, deduplicated. May return fewer than
/// `count` when the input space is nearly exhausted.
pub fn gen_random_queries(locked: &Netlist, count: usize, seed: u64) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_split(seed, "og-random", 0));
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    draw_random(locked.inputs().len(), count, &mut rng, &mut seen, &mut out);
    out
}

fn draw_random(
    width: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
    seen: &mut HashSet<Vec<bool>>,
    out: &mut Vec<Query>,
) {
    // the attempt cap keeps tiny input spaces from spinning once nearly
    // every pattern has been asked
    let mut attempts = 64 * count + 256;
    let mut found = 0;
    while found < count && attempts > 0 {
        attempts -= 1;
        let v: Vec<bool> = (0..width).map(|_| rng.gen()).collect();
        if seen.insert(v.clone()) {
            out.push(Query { inputs: v });
            found += 1;
        }
    }
}

/// Query attack knobs. The totals follow the two-per-key-bit budget unless
/// overridden.
#[derive(Debug, Clone)]
pub struct AttackConfig {
    /// Total query budget; `None` means twice the key count.
    pub total_queries: Option<usize>,
    /// Seeds the random query generator.
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig { total_queries: None, seed: 0x00de_c1de, solver: SolverConfig::default() }
    }
}

/// Sensitization queries first, then random fill, all distinct.
fn build_queries(
    locked: &Netlist,
    cfg: &AttackConfig,
) -> Result<(Vec<Query>, Vec<SkippedBit>), OgError> {
    let total = cfg.total_queries.unwrap_or(2 * locked.key_count());
    if total == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let sens = gen_sensitization_queries(locked, &cfg.solver)?;
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut queries = Vec::new();
    for (_, q) in sens.queries {
        if queries.len() == total {
            break;
        }
        if seen.insert(q.inputs.clone()) {
            queries.push(q);
        }
    }
    let need = total - queries.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed_split(cfg.seed, "og-random", 0));
    draw_random(locked.inputs().len(), need, &mut rng, &mut seen, &mut queries);
    Ok((queries, sens.skipped))
}

/// Candidate solve plus one complement check per key bit, all on one
/// incremental session over the finished formula.
fn prove_candidate(qf: &QueryFormula, config: &SolverConfig) -> Result<Vec<BitProof>, OgError> {
    let mut session = SatSession::with_config(config.clone());
    session.add_formula(qf.formula());
    let candidate = match session.solve(&[]) {
        Ok(SatOutcome::Sat(m)) => qf.project_key(&m),
        Ok(SatOutcome::Unsat) => return Err(OgError::InconsistentOracle),
        Err(SolverError::ResourceLimit) => return Err(OgError::CandidateBudget),
    };
    let bits = (0..qf.keys().len())
        .map(|i| {
            let value = candidate.bit(i);
            match session.solve(&[qf.keys()[i].lit(!value)]) {
                Ok(SatOutcome::Unsat) => BitProof { candidate: value, proven: true, budget: false },
                Ok(SatOutcome::Sat(_)) => {
                    BitProof { candidate: value, proven: false, budget: false }
                }
                Err(SolverError::ResourceLimit) => {
                    BitProof { candidate: value, proven: false, budget: true }
                }
            }
        })
        .collect();
    Ok(bits)
}

/// Full query-attack result for one netlist.
#[derive(Debug, Clone)]
pub struct ProvenSolution {
    pub bits: Vec<BitProof>,
    /// Every question asked, sensitization first.
    pub queries: Vec<Query>,
    /// Key bits whose sensitization search produced no query.
    pub skipped: Vec<SkippedBit>,
    /// The accumulated formula, reusable for further constraints,
    /// enumeration, or export.
    pub formula: QueryFormula,
}

impl ProvenSolution {
    pub fn candidate_key(&self) -> KeyVector {
        KeyVector::new(self.bits.iter().map(|b| b.candidate).collect())
    }

    pub fn proven_count(&self) -> usize {
        self.bits.iter().filter(|b| b.proven).count()
    }

    /// Proven bits as decided guesses, everything else unknown.
    pub fn guesses(&self) -> Vec<KeyBitGuess> {
        self.bits
            .iter()
            .map(|b| match b.proven {
                true => KeyBitGuess::new(BitValue::from_bool(b.candidate), 1.0),
                false => KeyBitGuess::unknown(),
            })
            .collect()
    }

    /// `cdk/dk` over proven bits only.
    pub fn score(&self, truth: &KeyVector) -> Result<Score, OgError> {
        if truth.len() != self.bits.len() {
            return Err(OgError::SolutionWidth { expected: self.bits.len(), got: truth.len() });
        }
        let dk = self.proven_count();
        let cdk = self
            .bits
            .iter()
            .enumerate()
            .filter(|(i, b)| b.proven && b.candidate == truth.bit(*i))
            .count();
        Ok(Score { cdk, dk })
    }
}

/// Runs the whole query attack on one locked netlist: generate queries,
/// ask the oracle, accumulate constraints, solve a candidate, prove bits.
/// Deterministic given the config; oracle calls equal the query count.
pub fn query_attack(
    locked: &Netlist,
    oracle: &Oracle,
    cfg: &AttackConfig,
) -> Result<ProvenSolution, OgError> {
    if locked.key_count() == 0 {
        return Err(OgError::NoKeyInputs);
    }
    oracle.matches_interface(locked)?;
    let (queries, skipped) = build_queries(locked, cfg)?;
    let mut formula = QueryFormula::new(locked);
    for q in &queries {
        let response = oracle.respond(q)?;
        formula.constrain(q, &response)?;
    }
    let bits = prove_candidate(&formula, &cfg.solver)?;
    Ok(ProvenSolution { bits, queries, skipped, formula })
}

/// Proof stage outcome for one ensemble member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantProof {
    pub bits: Vec<BitProof>,
}

impl VariantProof {
    pub fn candidate_key(&self) -> KeyVector {
        KeyVector::new(self.bits.iter().map(|b| b.candidate).collect())
    }

    pub fn proven_count(&self) -> usize {
        self.bits.iter().filter(|b| b.proven).count()
    }
}

/// Where a merged key bit's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Some variant proved it; proofs always win.
    Proven,
    /// No proof anywhere; the oracle-less vote decided it.
    OlGuess,
    Unknown,
}

/// One key bit of the merged solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalBit {
    pub value: Option<bool>,
    pub provenance: Provenance,
    /// Some unproven complement check hit the solver budget, so the bit
    /// might have been provable with more resources. Never set on proofs.
    pub budget: bool,
    /// 1 for proven bits, the vote confidence for guesses, 0 otherwise.
    pub confidence: f64,
}

/// The merged per-bit solution across variants and attack families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeySolution {
    pub bits: Vec<FinalBit>,
}

impl KeySolution {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn proven_count(&self) -> usize {
        self.bits.iter().filter(|b| b.provenance == Provenance::Proven).count()
    }

    /// Decided bits as guesses, for interop with oracle-less scoring.
    pub fn guesses(&self) -> Vec<KeyBitGuess> {
        self.bits
            .iter()
            .map(|b| match b.value {
                Some(v) => KeyBitGuess::new(BitValue::from_bool(v), b.confidence),
                None => KeyBitGuess::unknown(),
            })
            .collect()
    }

    /// `cdk/dk` over decided bits, proven or guessed.
    pub fn score(&self, truth: &KeyVector) -> Result<Score, OgError> {
        if truth.len() != self.bits.len() {
            return Err(OgError::SolutionWidth { expected: self.bits.len(), got: truth.len() });
        }
        let dk = self.bits.iter().filter(|b| b.value.is_some()).count();
        let cdk = self
            .bits
            .iter()
            .enumerate()
            .filter(|(i, b)| b.value == Some(truth.bit(*i)))
            .count();
        Ok(Score { cdk, dk })
    }

    /// Concrete key with undecided bits filled by `fill`.
    pub fn key(&self, fill: bool) -> KeyVector {
        KeyVector::new(self.bits.iter().map(|b| b.value.unwrap_or(fill)).collect())
    }
}

/// Merges per-variant proofs with an optional oracle-less vote: any proof
/// decides its bit, opposite proofs are a fatal integrity error, and
/// unproven bits take the vote's verdict when there is one.
pub fn merge_proven(
    per_variant: &[VariantProof],
    ol: Option<&EnsembleSolution>,
    key_count: usize,
) -> Result<KeySolution, OgError> {
    for vp in per_variant {
        if vp.bits.len() != key_count {
            return Err(OgError::SolutionWidth { expected: key_count, got: vp.bits.len() });
        }
    }
    if let Some(sol) = ol {
        if sol.len() != key_count {
            return Err(OgError::SolutionWidth { expected: key_count, got: sol.len() });
        }
    }
    let mut bits = Vec::with_capacity(key_count);
    for i in 0..key_count {
        let mut proven: Option<bool> = None;
        let mut budget = false;
        for vp in per_variant {
            let b = &vp.bits[i];
            budget |= b.budget;
            if b.proven {
                match proven {
                    Some(v) if v != b.candidate => return Err(OgError::ProofConflict { bit: i }),
                    _ => proven = Some(b.candidate),
                }
            }
        }
        bits.push(match proven {
            Some(v) => FinalBit {
                value: Some(v),
                provenance: Provenance::Proven,
                budget: false,
                confidence: 1.0,
            },
            None => match ol.map(|s| s.bits[i].merged) {
                Some(g) if g.value.is_decided() => FinalBit {
                    value: Some(g.value == BitValue::One),
                    provenance: Provenance::OlGuess,
                    budget,
                    confidence: g.confidence,
                },
                _ => FinalBit {
                    value: None,
                    provenance: Provenance::Unknown,
                    budget,
                    confidence: 0.0,
                },
            },
        });
    }
    Ok(KeySolution { bits })
}

/// Everything the ensemble attack produced.
#[derive(Debug, Clone)]
pub struct EnsembleOgRun {
    /// Shared query log: generated once on the original locked netlist,
    /// answered once, reused by every variant.
    pub queries: Vec<Query>,
    pub skipped: Vec<SkippedBit>,
    /// Proof outcomes per variant, in input order.
    pub per_variant: Vec<VariantProof>,
    pub solution: KeySolution,
}

/// Runs the proof stage on every variant over one shared query log and
/// merges the results with the oracle-less vote. Queries come from
/// `locked` (the original), so the oracle spend stays at one budget no
/// matter how many variants join the ensemble.
pub fn ensemble_og_attack(
    locked: &Netlist,
    variants: &[&Netlist],
    oracle: &Oracle,
    ol: Option<&EnsembleSolution>,
    cfg: &AttackConfig,
) -> Result<EnsembleOgRun, OgError> {
    if locked.key_count() == 0 {
        return Err(OgError::NoKeyInputs);
    }
    if variants.is_empty() {
        return Err(OgError::NoVariants);
    }
    oracle.matches_interface(locked)?;
    for v in variants {
        same_names(locked, v, true).map_err(OgError::VariantInterface)?;
    }
    if let Some(sol) = ol {
        if sol.len() != locked.key_count() {
            return Err(OgError::SolutionWidth {
                expected: locked.key_count(),
                got: sol.len(),
            });
        }
    }

    let (queries, skipped) = build_queries(locked, cfg)?;
    let answered: Vec<(&Query, Vec<bool>)> = queries
        .iter()
        .map(|q| oracle.respond(q).map(|r| (q, r)))
        .collect::<Result<_, _>>()?;

    let per_variant: Vec<VariantProof> = variants
        .par_iter()
        .map(|v| {
            let mut qf = QueryFormula::new(v);
            for (q, r) in &answered {
                qf.constrain(q, r)?;
            }
            prove_candidate(&qf, &cfg.solver).map(|bits| VariantProof { bits })
        })
        .collect::<Result<_, _>>()?;

    let solution = merge_proven(&per_variant, ol, locked.key_count())?;
    Ok(EnsembleOgRun { queries, skipped, per_variant, solution })
}

/// Budgets for [`dip_attack`]. Iterations and solver conflicts are capped
/// separately; hitting either one reports a timeout, never a key.
#[derive(Debug, Clone)]
pub struct DipBudget {
    pub max_iterations: usize,
    pub solver: SolverConfig,
}

impl Default for DipBudget {
    fn default() -> Self {
        DipBudget { max_iterations: 4096, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DipResult {
    /// Terminated with a key that passed the final equivalence check.
    Key { key: KeyVector, iterations: usize },
    /// A budget ran out first.
    Timeout { iterations: usize },
}

/// The classic iterative two-copy attack: find an input where two keys
/// that both survive all constraints so far still disagree, ask the oracle
/// there, pin both copies to the answer, repeat until no such input
/// remains, then read any surviving key and verify it by miter. One oracle
/// call per iteration.
pub fn dip_attack(
    locked: &Netlist,
    oracle: &Oracle,
    budget: &DipBudget,
) -> Result<DipResult, OgError> {
    oracle.matches_interface(locked)?;
    let mut miter = build_miter(locked, locked, ShareMode::InputsOnly)?;
    let mut session = SatSession::with_config(budget.solver.clone());
    session.add_formula(&miter.formula);

    let mut iterations = 0usize;
    loop {
        match session.solve(&[miter.enable]) {
            Ok(SatOutcome::Sat(model)) => {
                if iterations >= budget.max_iterations {
                    return Ok(DipResult::Timeout { iterations });
                }
                iterations += 1;
                let q = Query { inputs: miter.inputs.iter().map(|&v| model.value(v)).collect() };
                let response = oracle.respond(&q)?;
                for (side, keys) in [("l", &miter.keys_left), ("r", &miter.keys_right)] {
                    let tag = format!("a{iterations}{side}");
                    let bind = Binding { inputs: None, keys: Some(keys.clone()) };
                    let inst = encode_instance(&mut miter.formula, locked, &tag, &bind);
                    for (&v, &bit) in inst.inputs.iter().zip(&q.inputs) {
                        miter.formula.add_clause(&[v.lit(bit)]);
                    }
                    for (&v, &bit) in inst.outputs.iter().zip(&response) {
                        miter.formula.add_clause(&[v.lit(bit)]);
                    }
                }
                session.add_formula(&miter.formula);
            }
            Ok(SatOutcome::Unsat) => break,
            Err(SolverError::ResourceLimit) => return Ok(DipResult::Timeout { iterations }),
        }
    }

    // no differentiating input remains; any surviving key is functionally
    // correct, modulo the verification below
    let key = match session.solve(&[]) {
        Ok(SatOutcome::Sat(model)) => {
            KeyVector::new(miter.keys_left.iter().map(|&v| model.value(v)).collect())
        }
        Ok(SatOutcome::Unsat) => return Err(OgError::InconsistentOracle),
        Err(SolverError::ResourceLimit) => return Ok(DipResult::Timeout { iterations }),
    };
    let sealed = apply_key(locked, &key)?;
    match check_equivalence(&sealed, oracle.circuit(), ShareMode::InputsAndKeys, &budget.solver) {
        Ok(EquivalenceResult::Equivalent) => Ok(DipResult::Key { key, iterations }),
        Ok(EquivalenceResult::Different { .. }) => Err(OgError::DipVerification),
        Err(CheckError::Solver(_)) => Ok(DipResult::Timeout { iterations }),
        Err(CheckError::Miter(e)) => Err(OgError::Miter(e)),
    }
}
