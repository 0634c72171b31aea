//! Logic-locking attack laboratory.
//!
//! The crate generates functionally equivalent, structurally different
//! variants of locked gate-level netlists and mounts ensemble attacks over
//! them to recover locking key bits:
//!
//! * [`netlist`] holds the combinational netlist IR, BENCH text I/O,
//!   simulation, complexity statistics, structural signatures, logic cones,
//!   and a seeded random circuit generator.
//! * [`locking`] implements the lock constructions (XOR/XNOR key gates,
//!   complementary point-function trees, alternating-tree variants,
//!   hard-coded-pattern perturb/restore units, and compound locks).
//! * [`resynth`] enumerates parameterized synthesis recipes and runs the
//!   resynthesis pipeline that produces XOR-free structural variants.
//! * [`cnf`] provides Tseitin encoding, miter construction, DIMACS export,
//!   and a budgeted incremental SAT session.
//! * [`ol`] is the oracle-less attack: per-bit hardening deltas, decision
//!   policies, vote merging, and scoring.
//! * [`og`] is the oracle-guided side: query generation, constraint
//!   accumulation, per-bit proofs, the ensemble merge, and a classic
//!   iterative two-copy attack as a baseline.
//! * [`harness`] wires everything into resumable experiment pipelines with
//!   deterministic reports and analyses.
//!
//! Runnable walkthroughs live in `examples/`; each major capability has one:
//!
//! ```text
//! cargo run -p locklab --example lock_and_verify
//! cargo run -p locklab --example resynthesize_variants
//! cargo run -p locklab --example oracle_less_attack
//! cargo run -p locklab --example prove_key_bits
//! cargo run -p locklab --example dip_baseline
//! cargo run -p locklab --example full_pipeline
//! ```
//!
//! The `locklab` binary exposes the same operations as a small CLI
//! (`lock`, `resynth`, `attack`, `score`, `analyze`, `report`).

pub mod cnf;
pub mod harness;
pub mod locking;
pub mod netlist;
pub mod og;
pub mod ol;
pub mod resynth;

mod seed;

pub use seed::seed_split;
