//! Incremental SAT session with a conflict budget.
//!
//! Backed by batsat behind this module's own types; nothing outside sees
//! backend types. Budget exhaustion is a distinct outcome from UNSAT so
//! attack code can skip a bit instead of misreporting it: the backend's
//! search is interrupted through its stop callback after the configured
//! number of conflicts, and the indeterminate result maps to
//! [`SolverError::ResourceLimit`].

use batsat::{lbool, Callbacks, ClauseKind, SolverInterface, SolverOpts};
use thiserror::Error;

use super::{CnfFormula, Lit, Var};

/// Default per-call conflict budget.
pub const DEFAULT_CONFLICT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Conflicts allowed per `solve` call; `None` disables the limit.
    pub conflict_budget: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { conflict_budget: Some(DEFAULT_CONFLICT_BUDGET) }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("conflict budget exhausted")]
    ResourceLimit,
}

/// Complete assignment from a satisfiable call. Indexed by [`Var`];
/// variables the backend left unassigned default to false, which keeps the
/// model total (and still satisfying, checked in tests via
/// [`CnfFormula::eval`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn value(&self, v: Var) -> bool {
        self.0[(v.0 - 1) as usize]
    }

    pub fn lit_true(&self, l: Lit) -> bool {
        self.value(l.var()) == l.is_positive()
    }

    pub fn assignment(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Model),
    Unsat,
}

#[derive(Default)]
struct BudgetCb {
    conflicts: u64,
    limit: Option<u64>,
}

impl Callbacks for BudgetCb {
    fn on_new_clause(&mut self, _c: &[batsat::Lit], src: ClauseKind) {
        if src == ClauseKind::Learnt {
            self.conflicts += 1;
        }
    }

    fn stop(&self) -> bool {
        matches!(self.limit, Some(l) if self.conflicts >= l)
    }
}

/// One incremental solver. Clauses persist across `solve` calls;
/// assumptions do not.
pub struct SatSession {
    solver: batsat::Solver<BudgetCb>,
    config: SolverConfig,
    num_vars: u32,
    /// How many clauses of each added formula have been forwarded, so
    /// `add_formula` can be called again after the formula grew.
    forwarded: usize,
    failed: bool,
}

impl SatSession {
    pub fn new() -> Self {
        Self::with_config(SolverConfig::default())
    }

    pub fn with_config(config: SolverConfig) -> Self {
        SatSession {
            solver: batsat::Solver::new_with(SolverOpts::default(), BudgetCb::default()),
            config,
            num_vars: 0,
            forwarded: 0,
            failed: false,
        }
    }

    fn ensure_vars(&mut self, n: u32) {
        while self.num_vars < n {
            self.solver.new_var_default();
            self.num_vars += 1;
        }
    }

    fn blit(l: Lit) -> batsat::Lit {
        batsat::Lit::new(batsat::Var::unsafe_from_idx(l.var().0 - 1), l.is_positive())
    }

    /// Adds every clause of `f` not yet forwarded to the backend. Safe to
    /// call repeatedly as `f` grows; clauses already sent are skipped, so
    /// callers must only append to `f` between calls.
    pub fn add_formula(&mut self, f: &CnfFormula) {
        self.ensure_vars(f.num_vars());
        let clauses = f.clauses();
        for c in &clauses[self.forwarded.min(clauses.len())..] {
            self.push_clause(c);
        }
        self.forwarded = clauses.len();
    }

    /// Adds one clause outside any formula bookkeeping.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        let max = lits.iter().map(|l| l.var().0).max().unwrap_or(0);
        self.ensure_vars(max);
        self.push_clause(lits);
    }

    fn push_clause(&mut self, lits: &[Lit]) {
        let mut v: Vec<batsat::Lit> = lits.iter().map(|&l| Self::blit(l)).collect();
        if !self.solver.add_clause_reuse(&mut v) {
            self.failed = true;
        }
    }

    /// Decides satisfiability under `assumptions`. The conflict budget is
    /// per call; hitting it returns `Err(ResourceLimit)` and leaves the
    /// session usable.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SatOutcome, SolverError> {
        if self.failed {
            return Ok(SatOutcome::Unsat);
        }
        let start = self.solver.cb().conflicts;
        self.solver.cb_mut().limit = self.config.conflict_budget.map(|b| start.saturating_add(b));
        let assumps: Vec<batsat::Lit> = assumptions.iter().map(|&l| Self::blit(l)).collect();
        let res = self.solver.solve_limited(&assumps);
        if res == lbool::TRUE {
            let m = self.solver.get_model();
            let mut assignment = vec![false; self.num_vars as usize];
            for (i, slot) in assignment.iter_mut().enumerate() {
                *slot = m.get(i).is_some_and(|&v| v == lbool::TRUE);
            }
            Ok(SatOutcome::Sat(Model(assignment)))
        } else if res == lbool::FALSE {
            Ok(SatOutcome::Unsat)
        } else {
            Err(SolverError::ResourceLimit)
        }
    }

    /// Conflicts spent so far across all calls.
    pub fn conflicts(&self) -> u64 {
        self.solver.cb().conflicts
    }
}

impl Default for SatSession {
    fn default() -> Self {
        Self::new()
    }
}
