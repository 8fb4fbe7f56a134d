//! Exhaustive persistence check: satisfaction at a state carries over to every later state.

use serde::Serialize;

use crate::error::ModelError;
use crate::semantics::StateSpace;
use crate::structure::{State, Structure};
use crate::syntax::{Assignment, Formula};

/// A state pair `lower ≤ upper` where `formula` holds at `lower` but not at `upper`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PersistenceViolation {
    pub formula: Formula,
    pub lower: State,
    pub upper: State,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PersistenceReport {
    /// Comparable state pairs times formulas.
    pub checked: u64,
    pub violation: Option<PersistenceViolation>,
}

impl PersistenceReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks every comparable pair of canonical states of `m` against every formula.
pub fn check_persistence(m: &Structure, formulas: &[Formula]) -> Result<PersistenceReport, ModelError> {
    let space = StateSpace::new(m, &m.initial_state())?;
    check_persistence_in(&space, formulas)
}

/// [`check_persistence`] over an already built state space.
pub fn check_persistence_in(space: &StateSpace<'_>, formulas: &[Formula]) -> Result<PersistenceReport, ModelError> {
    let mut checked = 0;
    for phi in formulas {
        if !phi.is_closed() {
            return Err(ModelError::OpenFormula(phi.to_string()));
        }
        let table = space.truth_table(phi, &Assignment::new())?;
        for i in 0..space.states().len() {
            for j in space.futures_of(i) {
                checked += 1;
                if table[i] && !table[j] {
                    return Ok(PersistenceReport {
                        checked,
                        violation: Some(PersistenceViolation {
                            formula: phi.clone(),
                            lower: space.states()[i].clone(),
                            upper: space.states()[j].clone(),
                        }),
                    });
                }
            }
        }
    }
    Ok(PersistenceReport { checked, violation: None })
}
