//! CNF formulas, circuit encodings, and a budgeted SAT session.
//!
//! The formula representation is DIMACS-flavored: variables are 1-based,
//! literals are signed integers, clauses are immutable once added. Circuit
//! instances encoded into a formula register a (instance tag, net name) to
//! variable map so that attacks can locate inputs, keys, and outputs.
//!
//! The solving backend sits behind [`SatSession`]; models returned from it
//! can always be checked against the owning [`CnfFormula`] with
//! [`CnfFormula::eval`], which is an independent clause walk that shares no
//! code with the solver.

mod encode;
mod solver;

pub use encode::{build_miter, check_equivalence, tseitin_encode, encode_instance, Binding, CheckError, EquivalenceResult, Instance, Miter, MiterError, ShareMode};
pub use solver::{Model, SatOutcome, SatSession, SolverConfig, SolverError, DEFAULT_CONFLICT_BUDGET};

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// 1-based CNF variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }
}

/// Signed DIMACS literal. Never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        debug_assert!(var.0 > 0);
        Lit(if positive { var.0 as i32 } else { -(var.0 as i32) })
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negate(self) -> Lit {
        Lit(-self.0)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }
}

/// Growable clause database plus the net-to-variable maps of every circuit
/// instance encoded into it.
#[derive(Debug, Clone, Default)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    instances: BTreeMap<String, BTreeMap<String, Var>>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Adds a clause. Empty clauses and out-of-range variables are
    /// construction bugs and panic.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        assert!(!lits.is_empty(), "empty clause");
        for l in lits {
            assert!(l.var().0 >= 1 && l.var().0 <= self.num_vars, "literal {l:?} out of range");
        }
        self.clauses.push(lits.to_vec());
    }

    /// Records that `net` of instance `tag` is represented by `var`.
    pub fn register_net(&mut self, tag: &str, net: &str, var: Var) {
        self.instances.entry(tag.to_string()).or_default().insert(net.to_string(), var);
    }

    pub fn var_for(&self, tag: &str, net: &str) -> Option<Var> {
        self.instances.get(tag)?.get(net).copied()
    }

    pub fn instance(&self, tag: &str) -> Option<&BTreeMap<String, Var>> {
        self.instances.get(tag)
    }

    /// Clause walk under a full assignment (`assignment[v.0 - 1]`).
    /// This is the model validator used against solver output in tests.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        assert!(assignment.len() >= self.num_vars as usize, "partial assignment");
        self.clauses.iter().all(|c| {
            c.iter().any(|l| assignment[(l.var().0 - 1) as usize] == l.is_positive())
        })
    }

    /// DIMACS `p cnf` serialization with instance maps in comments.
    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        for (tag, nets) in &self.instances {
            for (net, var) in nets {
                let _ = writeln!(s, "c var {} = {}:{}", var.0, tag, net);
            }
        }
        let _ = writeln!(s, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(s, "{} ", l.to_dimacs());
            }
            let _ = writeln!(s, "0");
        }
        s
    }
}

/// Exports a formula as DIMACS text.
pub fn export_dimacs(f: &CnfFormula) -> String {
    f.to_dimacs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_carry_sign() {
        let v = Var(3);
        assert_eq!(v.lit(true).to_dimacs(), 3);
        assert_eq!(v.lit(false).to_dimacs(), -3);
        assert_eq!(v.lit(false).negate(), v.lit(true));
        assert_eq!(v.lit(false).var(), v);
    }

    #[test]
    fn eval_checks_all_clauses() {
        let mut f = CnfFormula::new();
        let a = f.new_var();
        let b = f.new_var();
        f.add_clause(&[a.lit(true), b.lit(true)]);
        f.add_clause(&[a.lit(false), b.lit(false)]);
        assert!(f.eval(&[true, false]));
        assert!(f.eval(&[false, true]));
        assert!(!f.eval(&[true, true]));
        assert!(!f.eval(&[false, false]));
    }

    #[test]
    #[should_panic(expected = "empty clause")]
    fn empty_clause_panics() {
        let mut f = CnfFormula::new();
        f.add_clause(&[]);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn out_of_range_literal_panics() {
        let mut f = CnfFormula::new();
        f.add_clause(&[Var(1).lit(true)]);
    }

    #[test]
    fn dimacs_has_header_and_terminators() {
        let mut f = CnfFormula::new();
        let a = f.new_var();
        let b = f.new_var();
        f.register_net("main", "x", a);
        f.add_clause(&[a.lit(true), b.lit(false)]);
        let text = f.to_dimacs();
        assert!(text.contains("p cnf 2 1"));
        assert!(text.contains("1 -2 0"));
        assert!(text.contains("c var 1 = main:x"));
    }
}
