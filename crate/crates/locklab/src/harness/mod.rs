//! Experiment pipelines: lock, resynthesize, attack, score, report.
//!
//! A pipeline run takes an [`ExperimentConfig`] and an output
//! [`Workspace`] and executes one job per (circuit, lock) pair. Each job
//! walks the stages in order; every stage persists its outputs and is
//! cached behind a digest of its inputs, so reruns with an unchanged
//! config load instead of recompute and deleting any intermediate file
//! reproduces it byte for byte.
//!
//! Ground truth is quarantined by construction: the lock stage writes the
//! true key to a `.key` file that only the scoring stage reads back, and
//! the workspace access log proves it. Attacks see the locked netlist,
//! its variants, and (for the oracle-guided ones) the original unlocked
//! circuit standing in for a functional chip.
//!
//! Reports carry no wall-clock times; those go to `timing.json` so that
//! everything else is byte-identical across reruns of the same config.
//! Per-job failures (a lock that does not fit, a budget blowout) are
//! collected instead of aborting the run; config-level problems (missing
//! or unparseable circuit files, an empty grid) fail fast.

mod analyze;
mod workspace;

pub use analyze::{
    cone_mode, convergence_analysis, slack_analysis, solutions_for_basis, ConeOutcome,
    ConvergenceBasis, ConvergencePoint, SlackReport,
};
pub use workspace::{content_hash, csv_record, Access, Stage, Workspace};

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::SolverConfig;
use crate::locking::{
    lock_antisat, lock_caslock, lock_compound, lock_rll, lock_sfll_point, CompoundSplit,
    LockError, LockResult, LockScheme, TreeLevel,
};
use crate::netlist::{
    parse_bench, structural_signature, write_bench, ComplexityStats, KeyVector, Netlist,
    NetlistError, Signature,
};
use crate::og::{
    dip_attack, ensemble_og_attack, AttackConfig, DipBudget, DipResult, KeySolution, OgError,
    Oracle, Query, SkippedBit, VariantProof,
};
use crate::ol::{self, DecisionPolicy, EnsembleSolution, OlError, Score, SolutionVector};
use crate::resynth::{
    generate_variants, CertifyMode, RecipeConfig, ResynthError, Slack, SynthesisRecipe,
    VariantOptions,
};
use crate::seed_split;

use workspace::cached_stage;

/// Environment variable that overrides the config seed; the CLI applies
/// it via [`seed_override`] before handing the config to [`run_pipeline`].
pub const SEED_ENV: &str = "LOCKLAB_SEED";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("no solutions to analyze")]
    NoSolutions,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("lock construction: {0}")]
    Lock(#[from] LockError),
    #[error("resynthesis: {0}")]
    Resynth(#[from] ResynthError),
    #[error("netlist: {0}")]
    Netlist(#[from] NetlistError),
    #[error("oracle-less attack: {0}")]
    Ol(#[from] OlError),
    #[error("oracle-guided attack: {0}")]
    Og(#[from] OgError),
}

/// Reads the [`SEED_ENV`] override. Unset is `None`; a set but
/// unparseable value is a configuration error, never silently ignored.
pub fn seed_override() -> Result<Option<u64>, HarnessError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse::<u64>().map(Some).map_err(|_| {
            HarnessError::Config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(HarnessError::Config(format!("{SEED_ENV}: {e}"))),
    }
}

/// One lock to apply to every circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockSpec {
    pub scheme: LockScheme,
    /// Total key width `p`. Compound locks split it half and half between
    /// the pattern stage and the gate-insertion stage.
    pub key_bits: usize,
}

/// Which recipe grid the resynthesis stage sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecipeSelection {
    /// The full six-axis grid (1080 points).
    All,
    /// The grid with the generation-effort axis capped (720 points).
    Reduced,
    /// An explicit axis selection.
    Custom(RecipeConfig),
}

impl Default for RecipeSelection {
    fn default() -> Self {
        RecipeSelection::Reduced
    }
}

impl RecipeSelection {
    pub fn recipes(&self) -> Result<Vec<SynthesisRecipe>, ResynthError> {
        let config = match self {
            RecipeSelection::All => RecipeConfig::default(),
            RecipeSelection::Reduced => RecipeConfig::reduced(),
            RecipeSelection::Custom(c) => c.clone(),
        };
        crate::resynth::enumerate_recipes(&config)
    }
}

/// Which attacks run. Everything defaults to off, so an empty `attacks`
/// object in a config file yields a resynthesis-only experiment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSelection {
    #[serde(default)]
    pub ol: bool,
    #[serde(default)]
    pub og: bool,
    #[serde(default)]
    pub dip: bool,
}

impl AttackSelection {
    pub fn any(self) -> bool {
        self.ol || self.og || self.dip
    }
}

fn default_conflicts() -> u64 {
    crate::cnf::DEFAULT_CONFLICT_BUDGET
}

fn default_dip_iterations() -> usize {
    4096
}

fn default_certify() -> CertifyMode {
    CertifyMode::Both
}

/// Resource limits and worker settings shared by all jobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// SAT conflicts per solve call.
    #[serde(default = "default_conflicts")]
    pub conflict_budget: u64,
    /// Iteration cap for the two-copy baseline attack.
    #[serde(default = "default_dip_iterations")]
    pub dip_iterations: usize,
    /// Oracle query budget; `None` means twice the key width.
    #[serde(default)]
    pub total_queries: Option<usize>,
    /// Worker threads for the recipe sweep; `None` uses the default pool.
    #[serde(default)]
    pub jobs: Option<usize>,
    /// How variants get certified equivalent to their base.
    #[serde(default = "default_certify")]
    pub certify: CertifyMode,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            conflict_budget: default_conflicts(),
            dip_iterations: default_dip_iterations(),
            total_queries: None,
            jobs: None,
            certify: default_certify(),
        }
    }
}

/// A full experiment: circuits x locks, one grid, one attack selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// BENCH files; relative paths resolve against the workspace root.
    pub circuits: Vec<String>,
    pub locks: Vec<LockSpec>,
    #[serde(default)]
    pub recipes: RecipeSelection,
    #[serde(default)]
    pub attacks: AttackSelection,
    /// Decision policy for the oracle-less attack.
    #[serde(default)]
    pub policy: DecisionPolicy,
    /// Base seed; every randomized stage derives its own stream from it,
    /// so a fixed seed makes the whole run deterministic. The CLI lets
    /// [`SEED_ENV`] override this field.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
}

/// The lock metadata that may sit next to the locked netlist: the record
/// minus ground truth. The true key (and the protected pattern, which
/// equals it for point-function locks) lives only in the `.key` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockArtifact {
    pub scheme: LockScheme,
    pub key_bits: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub insertion_sites: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protected_output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_inputs: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_levels: Option<Vec<TreeLevel>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compound: Option<CompoundSplit>,
}

impl LockArtifact {
    pub fn from_result(r: &LockResult) -> LockArtifact {
        LockArtifact {
            scheme: r.record.scheme,
            key_bits: r.record.true_key.len(),
            seed: r.record.seed,
            insertion_sites: r.record.insertion_sites.clone(),
            protected_output: r.record.protected_output.clone(),
            compare_inputs: r.record.compare_inputs.clone(),
            tree_levels: r.record.tree_levels.clone(),
            compound: r.record.compound,
        }
    }
}

/// One unique variant as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantEntry {
    /// File name under `variants/`, `<circuit>__r<recipe-index>.bench`.
    pub file: String,
    pub recipe_index: usize,
    pub recipe: SynthesisRecipe,
    pub signature: Signature,
    pub stats: ComplexityStats,
    pub slack: Slack,
}

/// One executed recipe and which unique variant carries its structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutedEntry {
    pub index: usize,
    pub signature: Signature,
    pub unique_index: usize,
}

/// `variants/manifest.json`: the recipe sweep's bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantManifest {
    pub base_signature: Signature,
    pub recipe_count: usize,
    pub unique_variant_count: usize,
    pub variants: Vec<VariantEntry>,
    pub executed: Vec<ExecutedEntry>,
}

/// Manifest plus the parsed variant netlists, parallel to
/// `manifest.variants`.
pub struct VariantBundle {
    pub manifest: VariantManifest,
    pub netlists: Vec<Netlist>,
}

/// `ol.json`: the oracle-less attack's full vote trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlArtifact {
    pub policy: DecisionPolicy,
    pub solutions: Vec<SolutionVector>,
    pub ensemble: EnsembleSolution,
}

/// `og.json`: queries, per-variant proofs, and the merged verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgArtifact {
    pub queries: Vec<Query>,
    pub skipped: Vec<SkippedBit>,
    pub per_variant: Vec<VariantProof>,
    pub solution: KeySolution,
    pub oracle_queries: usize,
}

/// `dip.json`: the two-copy baseline's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipArtifact {
    pub solved: bool,
    pub iterations: usize,
    /// Recovered key as a bit string, present only when solved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub oracle_queries: usize,
}

/// Shape of one netlist, as reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeSection {
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub depth: usize,
}

impl ShapeSection {
    fn of(n: &Netlist) -> ShapeSection {
        ShapeSection {
            inputs: n.inputs().len(),
            outputs: n.outputs().len(),
            gates: n.gate_count(),
            depth: n.depth(),
        }
    }
}

/// Min / mean / max over the unique variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

fn aggregate(values: impl Iterator<Item = f64>) -> Aggregate {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
        n += 1;
    }
    debug_assert!(n > 0, "aggregating an empty variant set");
    Aggregate { min, mean: sum / n as f64, max }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResynthSection {
    pub recipe_count: usize,
    pub unique_variant_count: usize,
    pub gates: Aggregate,
    pub depth: Aggregate,
    pub area: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlSection {
    pub policy: DecisionPolicy,
    pub score: Score,
    pub convergence: Vec<ConvergencePoint>,
    pub slack: SlackReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OgSection {
    pub queries: usize,
    pub skipped: usize,
    pub proven: usize,
    pub budget_flagged: usize,
    pub score: Score,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DipSection {
    pub iterations: usize,
    pub solved: bool,
    /// Whether the recovered key matches ground truth bit for bit (the
    /// attack itself only certifies functional equivalence).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_key: Option<bool>,
    pub oracle_queries: usize,
}

/// `report.json` for one (circuit, lock) job. Wall-clock times live in
/// the run-level `timing.json` instead, keeping this file reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub circuit: String,
    pub scheme: LockScheme,
    pub key_bits: usize,
    pub locked: ShapeSection,
    pub resynth: ResynthSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ol: Option<OlSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub og: Option<OgSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dip: Option<DipSection>,
}

/// One job stage execution: whether the cache answered, and how long the
/// stage took this run (cached loads count their load time).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTrace {
    pub job: String,
    pub stage: Stage,
    pub fresh: bool,
    pub seconds: f64,
}

/// A job that died, and where. The run continues past it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobFailure {
    pub circuit: String,
    pub scheme: LockScheme,
    pub key_bits: usize,
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub reports: Vec<AttackReport>,
    pub failures: Vec<JobFailure>,
    pub trace: Vec<StageTrace>,
}

#[derive(Debug, Serialize)]
struct Fingerprint {
    os: &'static str,
    arch: &'static str,
    threads: usize,
}

#[derive(Debug, Serialize)]
struct TimingFile<'a> {
    fingerprint: Fingerprint,
    stages: &'a [StageTrace],
}

fn score_in_range(p: usize, s: Score) -> Result<(), HarnessError> {
    if s.cdk > s.dk || s.dk > p {
        return Err(HarnessError::Invariant(format!(
            "score {s} out of range for key width {p}"
        )));
    }
    Ok(())
}

fn file_stem(path: &str) -> Result<String, HarnessError> {
    Path::new(path)
        .file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| HarnessError::Config(format!("circuit path {path:?} has no file stem")))
}

fn apply_lock(base: &Netlist, spec: LockSpec, seed: u64) -> Result<LockResult, LockError> {
    match spec.scheme {
        LockScheme::Rll => lock_rll(base, spec.key_bits, seed),
        LockScheme::AntiSat => lock_antisat(base, spec.key_bits, seed),
        LockScheme::CasLock => lock_caslock(base, spec.key_bits, seed),
        LockScheme::SfllPoint => lock_sfll_point(base, spec.key_bits, seed),
        LockScheme::Compound => {
            let half = spec.key_bits / 2;
            lock_compound(base, half, spec.key_bits - half, seed)
        }
    }
}

struct Job<'a> {
    ws: &'a Workspace,
    recipes: &'a [SynthesisRecipe],
    budgets: &'a Budgets,
    policy: DecisionPolicy,
    attacks: AttackSelection,
    seed: u64,
    index: u64,
    circuit: String,
    circuit_path: String,
    base_text: String,
    dir: String,
    spec: LockSpec,
}

impl Job<'_> {
    fn rel(&self, name: &str) -> String {
        format!("{}/{}", self.dir, name)
    }

    fn parse_at(&self, rel: &str, text: &str) -> Result<Netlist, HarnessError> {
        parse_bench(text).map_err(|e| HarnessError::Parse {
            path: self.ws.resolve(rel),
            message: e.to_string(),
        })
    }

    fn timed<T>(
        &self,
        trace: &mut Vec<StageTrace>,
        stage: Stage,
        f: impl FnOnce() -> Result<(T, bool), HarnessError>,
    ) -> Result<T, (Stage, HarnessError)> {
        let start = Instant::now();
        let out = f();
        let seconds = start.elapsed().as_secs_f64();
        match out {
            Ok((v, fresh)) => {
                trace.push(StageTrace { job: self.dir.clone(), stage, fresh, seconds });
                Ok(v)
            }
            Err(e) => Err((stage, e)),
        }
    }

    fn run(&self, trace: &mut Vec<StageTrace>) -> Result<AttackReport, (Stage, HarnessError)> {
        let locked = self.timed(trace, Stage::Lock, || self.lock_stage())?;
        let bundle = self.timed(trace, Stage::Resynth, || self.resynth_stage(&locked))?;
        let ol = match self.attacks.ol {
            true => Some(self.timed(trace, Stage::AttackOl, || self.ol_stage(&bundle))?),
            false => None,
        };
        let og = match self.attacks.og {
            true => Some(self.timed(trace, Stage::AttackOg, || {
                self.og_stage(&locked, &bundle, ol.as_ref())
            })?),
            false => None,
        };
        let dip = match self.attacks.dip {
            true => Some(self.timed(trace, Stage::AttackDip, || self.dip_stage(&locked))?),
            false => None,
        };
        let report = self
            .timed(trace, Stage::Score, || {
                self.score_stage(&locked, &bundle, ol, og, dip).map(|r| (r, true))
            })?;
        self.timed(trace, Stage::Report, || {
            self.ws.write_json(Stage::Report, self.rel("report.json"), &report)?;
            Ok(((), true))
        })?;
        Ok(report)
    }

    fn lock_stage(&self) -> Result<(Netlist, bool), HarnessError> {
        let lock_seed = seed_split(self.seed, "lock", self.index);
        let hash = content_hash(&[
            self.base_text.as_bytes(),
            self.spec.scheme.as_str().as_bytes(),
            &(self.spec.key_bits as u64).to_le_bytes(),
            &lock_seed.to_le_bytes(),
        ]);
        cached_stage(
            self.ws,
            Stage::Lock,
            &self.rel("lock.stamp"),
            &hash,
            || {
                let text = self.ws.read(Stage::Lock, self.rel("locked.bench"))?;
                self.parse_at("locked.bench", &text)
            },
            || {
                let base = self.parse_at(&self.circuit_path, &self.base_text)?;
                let result = apply_lock(&base, self.spec, lock_seed)?;
                if result.netlist.key_count() != self.spec.key_bits {
                    return Err(HarnessError::Invariant(format!(
                        "lock produced {} key bits, wanted {}",
                        result.netlist.key_count(),
                        self.spec.key_bits
                    )));
                }
                self.ws.write(
                    Stage::Lock,
                    self.rel("locked.bench"),
                    &write_bench(&result.netlist),
                )?;
                let mut key = result.record.true_key.to_bit_string();
                key.push('\n');
                self.ws.write(Stage::Lock, self.rel("truth.key"), &key)?;
                self.ws.write_json(
                    Stage::Lock,
                    self.rel("lock.json"),
                    &LockArtifact::from_result(&result),
                )?;
                Ok(result.netlist)
            },
        )
    }

    fn resynth_stage(&self, locked: &Netlist) -> Result<(VariantBundle, bool), HarnessError> {
        let recipes_json = serde_json::to_vec(self.recipes).map_err(|source| {
            HarnessError::Json { path: self.ws.resolve(self.rel("resynth.stamp")), source }
        })?;
        let hash = content_hash(&[
            write_bench(locked).as_bytes(),
            &recipes_json,
            format!("{:?}", self.budgets.certify).as_bytes(),
        ]);
        cached_stage(
            self.ws,
            Stage::Resynth,
            &self.rel("resynth.stamp"),
            &hash,
            || self.load_variants(Stage::Resynth),
            || {
                let opts =
                    VariantOptions { certify: self.budgets.certify, jobs: self.budgets.jobs };
                let set = generate_variants(locked, self.recipes, &opts)?;
                let mut variants = Vec::with_capacity(set.variants.len());
                for v in &set.variants {
                    let file = format!("{}__r{}.bench", self.circuit, v.recipe_index);
                    self.ws.write(
                        Stage::Resynth,
                        self.rel(&format!("variants/{file}")),
                        &write_bench(&v.netlist),
                    )?;
                    variants.push(VariantEntry {
                        file,
                        recipe_index: v.recipe_index,
                        recipe: v.recipe,
                        signature: v.signature,
                        stats: v.stats,
                        slack: v.slack,
                    });
                }
                let manifest = VariantManifest {
                    base_signature: structural_signature(locked),
                    recipe_count: self.recipes.len(),
                    unique_variant_count: set.variants.len(),
                    variants,
                    executed: set
                        .executed
                        .iter()
                        .map(|e| ExecutedEntry {
                            index: e.index,
                            signature: e.signature,
                            unique_index: e.unique_index,
                        })
                        .collect(),
                };
                self.ws.write_json(
                    Stage::Resynth,
                    self.rel("variants/manifest.json"),
                    &manifest,
                )?;
                let netlists = set.variants.into_iter().map(|v| v.netlist).collect();
                Ok(VariantBundle { manifest, netlists })
            },
        )
    }

    /// Reads the manifest and every variant back, verifying signatures so
    /// a tampered or truncated file fails the load (and so triggers a
    /// recompute instead of silently feeding attacks the wrong netlist).
    fn load_variants(&self, stage: Stage) -> Result<VariantBundle, HarnessError> {
        let manifest: VariantManifest =
            self.ws.read_json(stage, self.rel("variants/manifest.json"))?;
        let mut netlists = Vec::with_capacity(manifest.variants.len());
        for entry in &manifest.variants {
            let rel = self.rel(&format!("variants/{}", entry.file));
            let text = self.ws.read(stage, &rel)?;
            let n = self.parse_at(&rel, &text)?;
            if structural_signature(&n) != entry.signature {
                return Err(HarnessError::Invariant(format!(
                    "{} does not match its recorded signature",
                    entry.file
                )));
            }
            netlists.push(n);
        }
        Ok(VariantBundle { manifest, netlists })
    }

    fn ol_stage(&self, bundle: &VariantBundle) -> Result<(OlArtifact, bool), HarnessError> {
        let manifest_json = serde_json::to_vec(&bundle.manifest).map_err(|source| {
            HarnessError::Json { path: self.ws.resolve(self.rel("ol.stamp")), source }
        })?;
        let policy_json = serde_json::to_vec(&self.policy).map_err(|source| {
            HarnessError::Json { path: self.ws.resolve(self.rel("ol.stamp")), source }
        })?;
        let hash = content_hash(&[&manifest_json, &policy_json]);
        cached_stage(
            self.ws,
            Stage::AttackOl,
            &self.rel("ol.stamp"),
            &hash,
            || self.ws.read_json(Stage::AttackOl, self.rel("ol.json")),
            || {
                // the attack consumes the variant files, not ground truth
                let bundle = self.load_variants(Stage::AttackOl)?;
                let nets: Vec<&Netlist> = bundle.netlists.iter().collect();
                let run = ol::attack_ensemble(&nets, &self.policy)?;
                let artifact = OlArtifact {
                    policy: self.policy,
                    solutions: run.solutions,
                    ensemble: run.ensemble,
                };
                self.ws.write_json(Stage::AttackOl, self.rel("ol.json"), &artifact)?;
                Ok(artifact)
            },
        )
    }

    fn og_stage(
        &self,
        locked: &Netlist,
        bundle: &VariantBundle,
        ol: Option<&OlArtifact>,
    ) -> Result<(OgArtifact, bool), HarnessError> {
        let manifest_json = serde_json::to_vec(&bundle.manifest).map_err(|source| {
            HarnessError::Json { path: self.ws.resolve(self.rel("og.stamp")), source }
        })?;
        let ol_json = match ol {
            Some(a) => serde_json::to_vec(a).map_err(|source| HarnessError::Json {
                path: self.ws.resolve(self.rel("og.stamp")),
                source,
            })?,
            None => Vec::new(),
        };
        let og_seed = seed_split(self.seed, "og", self.index);
        let hash = content_hash(&[
            write_bench(locked).as_bytes(),
            &manifest_json,
            &ol_json,
            &og_seed.to_le_bytes(),
            &self.budgets.conflict_budget.to_le_bytes(),
            &(self.budgets.total_queries.unwrap_or(0) as u64).to_le_bytes(),
        ]);
        cached_stage(
            self.ws,
            Stage::AttackOg,
            &self.rel("og.stamp"),
            &hash,
            || self.ws.read_json(Stage::AttackOg, self.rel("og.json")),
            || {
                let locked_text = self.ws.read(Stage::AttackOg, self.rel("locked.bench"))?;
                let locked = self.parse_at("locked.bench", &locked_text)?;
                let bundle = self.load_variants(Stage::AttackOg)?;
                let original_text = self.ws.read(Stage::AttackOg, &self.circuit_path)?;
                let original = self.parse_at(&self.circuit_path, &original_text)?;
                let oracle = Oracle::from_original(&original)?;
                let cfg = AttackConfig {
                    total_queries: self.budgets.total_queries,
                    seed: og_seed,
                    solver: SolverConfig { conflict_budget: Some(self.budgets.conflict_budget) },
                };
                let nets: Vec<&Netlist> = bundle.netlists.iter().collect();
                let run = ensemble_og_attack(
                    &locked,
                    &nets,
                    &oracle,
                    ol.map(|a| &a.ensemble),
                    &cfg,
                )?;
                let artifact = OgArtifact {
                    queries: run.queries,
                    skipped: run.skipped,
                    per_variant: run.per_variant,
                    solution: run.solution,
                    oracle_queries: oracle.query_count() as usize,
                };
                self.ws.write_json(Stage::AttackOg, self.rel("og.json"), &artifact)?;
                Ok(artifact)
            },
        )
    }

    fn dip_stage(&self, locked: &Netlist) -> Result<(DipArtifact, bool), HarnessError> {
        let hash = content_hash(&[
            write_bench(locked).as_bytes(),
            self.base_text.as_bytes(),
            &(self.budgets.dip_iterations as u64).to_le_bytes(),
            &self.budgets.conflict_budget.to_le_bytes(),
        ]);
        cached_stage(
            self.ws,
            Stage::AttackDip,
            &self.rel("dip.stamp"),
            &hash,
            || self.ws.read_json(Stage::AttackDip, self.rel("dip.json")),
            || {
                let locked_text = self.ws.read(Stage::AttackDip, self.rel("locked.bench"))?;
                let locked = self.parse_at("locked.bench", &locked_text)?;
                let original_text = self.ws.read(Stage::AttackDip, &self.circuit_path)?;
                let original = self.parse_at(&self.circuit_path, &original_text)?;
                let oracle = Oracle::from_original(&original)?;
                let budget = DipBudget {
                    max_iterations: self.budgets.dip_iterations,
                    solver: SolverConfig { conflict_budget: Some(self.budgets.conflict_budget) },
                };
                let artifact = match dip_attack(&locked, &oracle, &budget)? {
                    DipResult::Key { key, iterations } => DipArtifact {
                        solved: true,
                        iterations,
                        key: Some(key.to_bit_string()),
                        oracle_queries: oracle.query_count() as usize,
                    },
                    DipResult::Timeout { iterations } => DipArtifact {
                        solved: false,
                        iterations,
                        key: None,
                        oracle_queries: oracle.query_count() as usize,
                    },
                };
                self.ws.write_json(Stage::AttackDip, self.rel("dip.json"), &artifact)?;
                Ok(artifact)
            },
        )
    }

    /// The only stage allowed to read `truth.key`.
    fn score_stage(
        &self,
        locked: &Netlist,
        bundle: &VariantBundle,
        ol: Option<OlArtifact>,
        og: Option<OgArtifact>,
        dip: Option<DipArtifact>,
    ) -> Result<AttackReport, HarnessError> {
        let p = self.spec.key_bits;
        let truth_text = self.ws.read(Stage::Score, self.rel("truth.key"))?;
        let truth = KeyVector::from_bit_string(truth_text.trim()).map_err(|e| {
            HarnessError::Parse {
                path: self.ws.resolve(self.rel("truth.key")),
                message: e.to_string(),
            }
        })?;

        let ol = ol
            .map(|a| -> Result<OlSection, HarnessError> {
                let score = a.ensemble.score(&truth)?;
                score_in_range(p, score)?;
                let slacks: Vec<Slack> =
                    bundle.manifest.variants.iter().map(|v| v.slack).collect();
                Ok(OlSection {
                    policy: a.policy,
                    score,
                    convergence: convergence_analysis(&a.solutions, &truth)?,
                    slack: slack_analysis(&slacks, &a.solutions)?,
                })
            })
            .transpose()?;

        let og = og
            .map(|a| -> Result<OgSection, HarnessError> {
                let score = a.solution.score(&truth)?;
                score_in_range(p, score)?;
                let proven = a.solution.proven_count();
                if proven > score.dk {
                    return Err(HarnessError::Invariant(format!(
                        "{proven} proven bits but only {} decided",
                        score.dk
                    )));
                }
                Ok(OgSection {
                    queries: a.queries.len(),
                    skipped: a.skipped.len(),
                    proven,
                    budget_flagged: a.solution.bits.iter().filter(|b| b.budget).count(),
                    score,
                })
            })
            .transpose()?;

        let dip = dip.map(|a| DipSection {
            iterations: a.iterations,
            solved: a.solved,
            exact_key: a.key.as_deref().map(|k| k == truth.to_bit_string()),
            oracle_queries: a.oracle_queries,
        });

        let stats = &bundle.manifest.variants;
        Ok(AttackReport {
            circuit: self.circuit.clone(),
            scheme: self.spec.scheme,
            key_bits: p,
            locked: ShapeSection::of(locked),
            resynth: ResynthSection {
                recipe_count: bundle.manifest.recipe_count,
                unique_variant_count: bundle.manifest.unique_variant_count,
                gates: aggregate(stats.iter().map(|v| v.stats.gate_count as f64)),
                depth: aggregate(stats.iter().map(|v| v.stats.depth as f64)),
                area: aggregate(stats.iter().map(|v| v.stats.area_proxy)),
            },
            ol,
            og,
            dip,
        })
    }
}

/// Runs every (circuit, lock) job and writes the run-level views. Config
/// problems (missing or unparseable circuits, an empty grid) abort;
/// anything that breaks inside one job becomes a [`JobFailure`] and the
/// other jobs still run.
pub fn run_pipeline(
    cfg: &ExperimentConfig,
    ws: &Workspace,
) -> Result<PipelineOutcome, HarnessError> {
    if cfg.circuits.is_empty() {
        return Err(HarnessError::Config("no circuits configured".into()));
    }
    if cfg.locks.is_empty() {
        return Err(HarnessError::Config("no locks configured".into()));
    }
    let recipes = cfg
        .recipes
        .recipes()
        .map_err(|e| HarnessError::Config(format!("recipe grid: {e}")))?;

    let mut stems = HashSet::new();
    let mut sources = Vec::new();
    for path in &cfg.circuits {
        let stem = file_stem(path)?;
        if !stems.insert(stem.clone()) {
            return Err(HarnessError::Config(format!("duplicate circuit name {stem:?}")));
        }
        let text = ws
            .read(Stage::Lock, path)
            .map_err(|e| HarnessError::Config(format!("circuit {path}: {e}")))?;
        if let Err(e) = parse_bench(&text) {
            return Err(HarnessError::Config(format!("circuit {path}: {e}")));
        }
        sources.push((stem, path.clone(), text));
    }

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut trace = Vec::new();
    for (ci, (stem, path, text)) in sources.iter().enumerate() {
        for (li, &spec) in cfg.locks.iter().enumerate() {
            let job = Job {
                ws,
                recipes: &recipes,
                budgets: &cfg.budgets,
                policy: cfg.policy,
                attacks: cfg.attacks,
                seed: cfg.seed,
                index: (ci * cfg.locks.len() + li) as u64,
                circuit: stem.clone(),
                circuit_path: path.clone(),
                base_text: text.clone(),
                dir: format!("{stem}/{}-p{}", spec.scheme.as_str(), spec.key_bits),
                spec,
            };
            match job.run(&mut trace) {
                Ok(r) => reports.push(r),
                Err((stage, e)) => failures.push(JobFailure {
                    circuit: stem.clone(),
                    scheme: spec.scheme,
                    key_bits: spec.key_bits,
                    stage,
                    message: e.to_string(),
                }),
            }
        }
    }

    write_run_views(ws, &reports, &failures, &trace)?;
    Ok(PipelineOutcome { reports, failures, trace })
}

fn job_seconds(trace: &[StageTrace], job: &str, stages: &[Stage]) -> f64 {
    trace
        .iter()
        .filter(|t| t.job == job && stages.contains(&t.stage))
        .map(|t| t.seconds)
        .sum()
}

/// Run-level outputs: two CSV views over the reports, the failure list,
/// and the timing file. Only the timing file may differ between reruns.
fn write_run_views(
    ws: &Workspace,
    reports: &[AttackReport],
    failures: &[JobFailure],
    trace: &[StageTrace],
) -> Result<(), HarnessError> {
    let job_of = |r: &AttackReport| format!("{}/{}-p{}", r.circuit, r.scheme.as_str(), r.key_bits);

    let mut resynth = csv_record(&[
        "circuit".into(),
        "scheme".into(),
        "key_bits".into(),
        "recipes".into(),
        "unique_variants".into(),
        "gates_min".into(),
        "gates_mean".into(),
        "gates_max".into(),
        "seconds".into(),
    ]);
    for r in reports {
        let secs = job_seconds(trace, &job_of(r), &[Stage::Lock, Stage::Resynth]);
        resynth += &csv_record(&[
            r.circuit.clone(),
            r.scheme.as_str().into(),
            r.key_bits.to_string(),
            r.resynth.recipe_count.to_string(),
            r.resynth.unique_variant_count.to_string(),
            format!("{:.0}", r.resynth.gates.min),
            format!("{:.1}", r.resynth.gates.mean),
            format!("{:.0}", r.resynth.gates.max),
            format!("{:.3}", secs),
        ]);
    }
    ws.write(Stage::Report, "resynth.csv", &resynth)?;

    let mut attacks = csv_record(&[
        "circuit".into(),
        "scheme".into(),
        "key_bits".into(),
        "attack".into(),
        "decided".into(),
        "correct".into(),
        "proven".into(),
        "iterations".into(),
        "queries".into(),
        "seconds".into(),
    ]);
    for r in reports {
        let job = job_of(r);
        let head = |attack: &str| {
            vec![
                r.circuit.clone(),
                r.scheme.as_str().into(),
                r.key_bits.to_string(),
                attack.to_string(),
            ]
        };
        if let Some(ol) = &r.ol {
            let mut row = head("ol");
            row.extend([
                ol.score.dk.to_string(),
                ol.score.cdk.to_string(),
                String::new(),
                String::new(),
                String::new(),
                format!("{:.3}", job_seconds(trace, &job, &[Stage::AttackOl])),
            ]);
            attacks += &csv_record(&row);
        }
        if let Some(og) = &r.og {
            let mut row = head("og");
            row.extend([
                og.score.dk.to_string(),
                og.score.cdk.to_string(),
                og.proven.to_string(),
                String::new(),
                og.queries.to_string(),
                format!("{:.3}", job_seconds(trace, &job, &[Stage::AttackOg])),
            ]);
            attacks += &csv_record(&row);
        }
        if let Some(dip) = &r.dip {
            let decided = if dip.solved { r.key_bits } else { 0 };
            let correct = match dip.exact_key {
                Some(true) => r.key_bits.to_string(),
                _ => String::new(),
            };
            let mut row = head("dip");
            row.extend([
                decided.to_string(),
                correct,
                String::new(),
                dip.iterations.to_string(),
                dip.oracle_queries.to_string(),
                format!("{:.3}", job_seconds(trace, &job, &[Stage::AttackDip])),
            ]);
            attacks += &csv_record(&row);
        }
    }
    ws.write(Stage::Report, "attacks.csv", &attacks)?;

    ws.write_json(Stage::Report, "failures.json", &failures)?;
    let timing = TimingFile {
        fingerprint: Fingerprint {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
        stages: trace,
    };
    ws.write_json(Stage::Report, "timing.json", &timing)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::generate::{random_netlist, GeneratorConfig};
    use crate::resynth::{DelayPoint, Effort, KeyConstraint, MaxTransition, OptEffort};

    fn small_grid() -> RecipeSelection {
        RecipeSelection::Custom(RecipeConfig {
            syn_gen: vec![Effort::Low],
            syn_map: vec![Effort::Low, Effort::Medium],
            syn_opt: vec![OptEffort::Low, OptEffort::High],
            delay_point: vec![DelayPoint::Unconstrained, DelayPoint::P2],
            max_transition: vec![MaxTransition::P10],
            key_constraint: KeyConstraint::ALL.to_vec(),
            seed_base: 5,
        })
    }

    fn write_circuit(ws: &Workspace, name: &str, seed: u64) -> String {
        let n = random_netlist(&GeneratorConfig::sized(10, 3, 70, seed));
        let file = format!("{name}.bench");
        ws.write(Stage::Lock, &file, &write_bench(&n)).unwrap();
        file
    }

    fn config(circuits: Vec<String>, attacks: AttackSelection) -> ExperimentConfig {
        ExperimentConfig {
            circuits,
            locks: vec![LockSpec { scheme: LockScheme::Rll, key_bits: 8 }],
            recipes: small_grid(),
            attacks,
            policy: DecisionPolicy::default(),
            seed: 99,
            budgets: Budgets::default(),
        }
    }

    fn read(ws: &Workspace, rel: &str) -> String {
        std::fs::read_to_string(ws.resolve(rel)).unwrap()
    }

    #[test]
    fn pipeline_runs_every_stage_and_reports_consistently() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let circuit = write_circuit(&ws, "alpha", 1);
        let cfg = config(vec![circuit], AttackSelection { ol: true, og: true, dip: true });

        let out = run_pipeline(&cfg, &ws).unwrap();
        assert!(out.failures.is_empty(), "failures: {:?}", out.failures);
        assert_eq!(out.reports.len(), 1);
        let r = &out.reports[0];

        assert_eq!((r.circuit.as_str(), r.scheme, r.key_bits), ("alpha", LockScheme::Rll, 8));
        assert!(r.resynth.recipe_count == 16 && r.resynth.unique_variant_count >= 1);
        assert!(r.resynth.gates.min <= r.resynth.gates.mean);
        assert!(r.resynth.gates.mean <= r.resynth.gates.max);

        let ol = r.ol.as_ref().unwrap();
        assert!(ol.score.cdk <= ol.score.dk && ol.score.dk <= 8);
        assert_eq!(ol.convergence.len(), r.resynth.unique_variant_count);
        let last = ol.convergence.last().unwrap();
        assert_eq!((last.dk, last.cdk), (ol.score.dk, ol.score.cdk));
        assert_eq!(ol.slack.positive + ol.slack.non_positive, ol.slack.bucket_size);

        let og = r.og.as_ref().unwrap();
        assert!(og.score.cdk <= og.score.dk && og.score.dk <= 8);
        assert!(og.proven <= og.score.dk);
        assert!(og.proven >= 1, "query proofs should pin something on an 8-bit lock");
        assert_eq!(og.queries, 16);

        let dip = r.dip.as_ref().unwrap();
        assert!(dip.solved && dip.iterations >= 1);
        assert_eq!(dip.exact_key, Some(true));
        assert_eq!(dip.oracle_queries, dip.iterations);

        // artifacts on disk
        let base = "alpha/rll-p8";
        for f in ["locked.bench", "truth.key", "lock.json", "ol.json", "og.json", "dip.json", "report.json"] {
            assert!(ws.exists(format!("{base}/{f}")), "{f} missing");
        }
        let manifest: VariantManifest =
            serde_json::from_str(&read(&ws, &format!("{base}/variants/manifest.json"))).unwrap();
        assert_eq!(manifest.unique_variant_count, r.resynth.unique_variant_count);
        assert_eq!(manifest.executed.len(), 16);
        for v in &manifest.variants {
            assert!(ws.exists(format!("{base}/variants/{}", v.file)));
            assert!(v.file.starts_with("alpha__r"));
        }
        for f in ["resynth.csv", "attacks.csv", "timing.json", "failures.json"] {
            assert!(ws.exists(f), "{f} missing");
        }
        assert_eq!(read(&ws, "attacks.csv").lines().count(), 4, "header + one row per attack");

        // ground truth stays out of the public lock metadata
        let lock_json = read(&ws, &format!("{base}/lock.json"));
        assert!(!lock_json.contains("true_key") && !lock_json.contains("protected_pattern"));
        let truth = read(&ws, &format!("{base}/truth.key"));
        assert_eq!(truth.trim().len(), 8);
    }

    #[test]
    fn attack_stages_never_read_key_files() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let circuit = write_circuit(&ws, "beta", 2);
        let cfg = config(vec![circuit], AttackSelection { ol: true, og: true, dip: true });
        run_pipeline(&cfg, &ws).unwrap();

        let log = ws.accesses();
        let attack_reads: Vec<_> =
            log.iter().filter(|a| a.stage.is_attack() && !a.write).collect();
        assert!(!attack_reads.is_empty());
        for a in &attack_reads {
            assert!(
                a.path.extension().is_none_or(|e| e != "key"),
                "{:?} read {:?}",
                a.stage,
                a.path
            );
        }
        // attacks did consume the published netlists
        assert!(attack_reads.iter().any(|a| a.path.extension().is_some_and(|e| e == "bench")));
        // and scoring is the stage that read the truth
        assert!(ws
            .reads_in(Stage::Score)
            .iter()
            .any(|p| p.extension().is_some_and(|e| e == "key")));
    }

    #[test]
    fn reruns_load_from_cache_and_reproduce_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let circuit = write_circuit(&ws, "gamma", 3);
        let cfg = config(vec![circuit], AttackSelection { ol: true, og: true, dip: false });

        run_pipeline(&cfg, &ws).unwrap();
        let report1 = read(&ws, "gamma/rll-p8/report.json");
        let manifest1 = read(&ws, "gamma/rll-p8/variants/manifest.json");
        let ol1 = read(&ws, "gamma/rll-p8/ol.json");
        let og1 = read(&ws, "gamma/rll-p8/og.json");

        // second run: same config, fresh workspace over the same directory
        let ws2 = Workspace::new(dir.path());
        let out2 = run_pipeline(&cfg, &ws2).unwrap();
        for t in &out2.trace {
            if matches!(t.stage, Stage::Lock | Stage::Resynth | Stage::AttackOl | Stage::AttackOg)
            {
                assert!(!t.fresh, "{:?} recomputed on identical config", t.stage);
            }
        }
        assert!(!ws2.accesses().iter().any(|a| {
            a.write && a.path.extension().is_some_and(|e| e == "bench")
        }));
        assert_eq!(report1, read(&ws2, "gamma/rll-p8/report.json"));
        assert_eq!(manifest1, read(&ws2, "gamma/rll-p8/variants/manifest.json"));

        // deleting late-stage outputs reproduces them byte for byte
        std::fs::remove_file(ws.resolve("gamma/rll-p8/ol.json")).unwrap();
        std::fs::remove_file(ws.resolve("gamma/rll-p8/og.json")).unwrap();
        let ws3 = Workspace::new(dir.path());
        let out3 = run_pipeline(&cfg, &ws3).unwrap();
        assert!(out3.failures.is_empty());
        assert_eq!(ol1, read(&ws3, "gamma/rll-p8/ol.json"));
        assert_eq!(og1, read(&ws3, "gamma/rll-p8/og.json"));

        // a different seed invalidates the lock stage
        let reseeded = ExperimentConfig { seed: 100, ..cfg };
        let ws4 = Workspace::new(dir.path());
        let out4 = run_pipeline(&reseeded, &ws4).unwrap();
        assert!(out4.trace.iter().any(|t| t.stage == Stage::Lock && t.fresh));
    }

    #[test]
    fn resynthesis_only_experiment_skips_attacks_and_truth() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let circuit = write_circuit(&ws, "delta", 4);
        let cfg = config(vec![circuit], AttackSelection::default());

        let out = run_pipeline(&cfg, &ws).unwrap();
        assert!(out.failures.is_empty());
        let r = &out.reports[0];
        assert!(r.ol.is_none() && r.og.is_none() && r.dip.is_none());
        assert!(r.resynth.unique_variant_count >= 1);
        assert!(!ws.exists("delta/rll-p8/ol.json"));
        assert!(!ws.exists("delta/rll-p8/og.json"));
        assert!(!ws.exists("delta/rll-p8/dip.json"));
        assert_eq!(read(&ws, "attacks.csv").lines().count(), 1, "header only");
    }

    #[test]
    fn job_failures_are_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let circuit = write_circuit(&ws, "eps", 5);
        let mut cfg = config(vec![circuit], AttackSelection { ol: true, og: false, dip: false });
        // a 64-bit tree lock needs 32 live inputs; this circuit has 10
        cfg.locks.push(LockSpec { scheme: LockScheme::AntiSat, key_bits: 64 });

        let out = run_pipeline(&cfg, &ws).unwrap();
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.failures.len(), 1);
        let f = &out.failures[0];
        assert_eq!((f.scheme, f.key_bits, f.stage), (LockScheme::AntiSat, 64, Stage::Lock));
        assert!(ws.exists("eps/rll-p8/report.json"));
        assert!(!ws.exists("eps/anti-sat-p64/report.json"));

        let failures = read(&ws, "failures.json");
        assert!(failures.contains("anti-sat"));
    }

    #[test]
    fn config_problems_fail_the_whole_run() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());

        let missing = config(vec!["ghost.bench".into()], AttackSelection::default());
        assert!(matches!(run_pipeline(&missing, &ws), Err(HarnessError::Config(_))));

        ws.write(Stage::Lock, "bad.bench", "INPUT(a\n").unwrap();
        let bad = config(vec!["bad.bench".into()], AttackSelection::default());
        assert!(matches!(run_pipeline(&bad, &ws), Err(HarnessError::Config(_))));

        let circuit = write_circuit(&ws, "zeta", 6);
        let mut none = config(vec![circuit.clone()], AttackSelection::default());
        none.locks.clear();
        assert!(matches!(run_pipeline(&none, &ws), Err(HarnessError::Config(_))));

        let mut dup = config(vec![circuit.clone(), circuit], AttackSelection::default());
        dup.circuits[1] = "zeta.bench".into();
        assert!(matches!(run_pipeline(&dup, &ws), Err(HarnessError::Config(_))));
    }

    #[test]
    fn seed_env_override_is_strict() {
        // the pipeline itself never reads the environment; only this
        // helper does, so the test can own the variable safely
        std::env::remove_var(SEED_ENV);
        assert_eq!(seed_override().unwrap(), None);
        std::env::set_var(SEED_ENV, "42");
        assert_eq!(seed_override().unwrap(), Some(42));
        std::env::set_var(SEED_ENV, "not-a-number");
        assert!(matches!(seed_override(), Err(HarnessError::Config(_))));
        std::env::remove_var(SEED_ENV);
    }

    #[test]
    fn config_round_trips_and_fills_defaults() {
        let json = r#"{
            "circuits": ["a.bench"],
            "locks": [{"scheme": "rll", "key_bits": 16}],
            "attacks": {}
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.recipes, RecipeSelection::Reduced);
        assert!(!cfg.attacks.any());
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.budgets, Budgets::default());

        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);

        let typo = r#"{"circuits": [], "locks": [], "atacks": {}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(typo).is_err());
    }
}
