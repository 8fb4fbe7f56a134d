//! Independent reference implementations and generators for the npmt test suites.
//!
//! Nothing here calls into `npmt::semantics`. The reference evaluators
//! re-implement satisfaction straight from the clause definitions so the
//! production evaluator can be checked against them.

pub mod enumerate;
pub mod gen;
pub mod raw;
pub mod reference;
