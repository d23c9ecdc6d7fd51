//! Propositional tactic prover driven by a learned fringe/tactic/argument
//! policy.

pub mod kernel;
pub mod tactics;
pub mod autodiff;
pub mod encoder;
pub mod env;
pub mod policy;
pub mod corpus;
pub mod learner;
pub mod strategies;
