//! Proof search, proof checking and the QBF reduction for the
//! `∀,∃`-free fragment of computability logic.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line and benchmarking live in the `cl4-tools` crate.
//!
//! Module map:
//!
//! - [`formula`] and [`parse`]: the formula language and its grammar.
//! - [`elementary`]: elementarization, classical validity, stability.
//! - [`prover`] and [`check`]: proof search and the independent checker.
//! - [`qbf`]: strictly alternating 3-CNF QBFs and strategy trees.
//! - [`reduction`]: the QBF to formula mapping and its elementary variant.
//! - [`bridge`]: proofs from winning strategy trees and back.

#![no_std]
extern crate alloc;

pub mod bridge;
pub mod check;
pub mod elementary;
pub mod formula;
pub mod parse;
pub mod prover;
pub mod qbf;
pub mod reduction;
mod sat;

pub use check::{check_proof, CheckReport, Diagnostic};
pub use elementary::{elementarize, is_stable, is_valid_classical};
pub use formula::{Formula, Letter, OccurrenceKind, Path, Sort, Term};
pub use parse::{parse_formula, ParseError};
pub use prover::{prove, Logic, Move, ProofNode, Prover, ProverConfig, Rule, TermPool};
pub use qbf::{Qbf, Quantifier, StrategyNode, StrategyTree};
