//! Decision procedure for a single not-contains string constraint
//! `¬Contains(N, H)` where the needle `N` and haystack `H` are sequences of
//! letters and string variables, and every variable ranges over a regular
//! language.
//!
//! The pipeline normalizes variable languages, dispatches easy fragments,
//! eliminates non-flat variables occurring on both sides, underapproximates
//! the remaining non-flat haystack variables by flat languages, and finishes
//! with a bounded search over flat languages. Every satisfying assignment is
//! verified against the input before it is returned.

pub mod alphabet;
pub mod automata;
pub mod constraints;
pub mod driver;
pub mod flatsolver;
pub mod gamma;
pub mod twosided;
pub mod words;

pub use alphabet::{Alphabet, AlphabetError};
pub use automata::{canonical_dfa, parse_regex, AutomataError, Dfa, FlatPattern, Nfa};
pub use constraints::{parse_instance, parse_instance_json, Assignment, ConstraintError, Instance, InstanceDocument, Term, TermItem};
pub use driver::{brute_oracle, solve, verify_model, BoundsProfile, OracleResult, SolveError, SolverConfig, Stats, Status, Verdict};
pub use flatsolver::emit_smtlib;
pub use words::{Symbol, Word, WordError};
