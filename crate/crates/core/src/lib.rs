//! Verification of partial quantifier elimination (PQE) solutions.
//!
//! Given `∃X[F]` and a set `G ⊆ F` of clauses with quantified variables, a
//! formula `H(Y)` solves the problem when `∃X[F] ≡ H ∧ ∃X[F \ G]`. The
//! [`verifier`] decides this with a SAT oracle by checking that `F` implies
//! `H` and that every clause of `G` is redundant in `H ∧ ∃X[F]`.

pub mod bench;
pub mod candidate;
pub mod dimacs;
pub mod formula;
pub mod gen;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod sat;
pub mod verifier;

pub use formula::{Assignment, Clause, CnfFormula, Lit, Var};
pub use problem::{PqeProblem, Solution};
pub use sat::{Limits, ResourceLimit, SatOracle, SatOutcome};
pub use verifier::{ver_pqe, Verdict, VerdictStatus, VerifyOptions};
