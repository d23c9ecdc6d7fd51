//! Propositional terms, goals, theorems and the truth-table oracle.
//!
//! Every value here is immutable once built; the operations are pure.

mod enumerate;
mod goal;
mod oracle;
mod parse;
mod term;

pub use enumerate::enumerate_terms;
pub use goal::{Goal, Theorem};
pub use oracle::{is_tautology, term_is_tautology, VariableBudgetExceeded, VARIABLE_BUDGET};
pub use parse::{parse_term, ParseError};
pub use term::{is_identifier, BinOp, Term};
