//! The non-interactive CLI commands, as functions from inputs to printed output.

use std::fmt::Write;
use std::time::Duration;

use npmt::{
    load_structure, parse_formula, parse_with_inferred_signature, print_structure, render_report, satisfies,
    Assignment, SearchBounds, SearchOutcome, Searcher, Sequent,
};

use crate::error::ServiceError;

pub const EXIT_SATISFIED: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

/// Default search budget when `NPMT_BUDGET_MS` is unset.
pub const DEFAULT_BUDGET_MS: u64 = 60_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
}

/// Formulas of a premise file: one per line, blank lines and `#` comments skipped.
pub fn formula_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Evaluates `formula` (and any premises) at `state`, or at the initial state.
///
/// Exit code 1 means the state refutes the sequent: every premise holds and
/// the formula fails. Otherwise 0.
pub fn check(spec: &str, formula: &str, gamma: &[String], state: Option<&str>) -> Result<Output, ServiceError> {
    let m = load_structure(spec)?;
    let e = match state {
        Some(text) => m.parse_state(text)?,
        None => m.initial_state(),
    };
    let parse = |text: &str| -> Result<_, ServiceError> {
        let phi = parse_formula(text, m.signature())?;
        if !phi.is_closed() {
            return Err(ServiceError::new("open_formula", format!("formula `{phi}` is not closed")));
        }
        Ok(phi)
    };
    let phi = parse(formula)?;
    let premises = gamma.iter().map(|t| parse(t)).collect::<Result<Vec<_>, _>>()?;
    let a = Assignment::new();
    let mut stdout = String::new();
    let mut premises_hold = true;
    for psi in &premises {
        let v = satisfies(&m, &e, psi, &a)?;
        premises_hold &= v.satisfied;
        stdout.push_str(&render_report(psi, &e, &v));
    }
    let v = satisfies(&m, &e, &phi, &a)?;
    stdout.push_str(&render_report(&phi, &e, &v));
    let code = if premises_hold && !v.satisfied { EXIT_REFUTED } else { EXIT_SATISFIED };
    Ok(Output { code, stdout })
}

/// Loads a structure spec and summarizes it.
pub fn validate(spec: &str) -> Result<String, ServiceError> {
    let m = load_structure(spec)?;
    let sig = m.signature();
    let list = |decls: &[npmt::SymbolDecl]| {
        if decls.is_empty() {
            "none".to_string()
        } else {
            decls.iter().map(|d| format!("{}/{}", d.name, d.arity)).collect::<Vec<_>>().join(", ")
        }
    };
    let constants = if sig.constants().is_empty() { "none".to_string() } else { sig.constants().join(", ") };
    let universe: Vec<String> = m.universe().iter().map(|e| e.to_string()).collect();
    Ok(format!(
        "ok\nuniverse: {}\nfunctions: {}\nrelations: {}\nconstants: {}\n",
        universe.join(" "),
        list(sig.functions()),
        list(sig.predicates()),
        constants
    ))
}

/// Reads the search budget from the value of `NPMT_BUDGET_MS`.
pub fn budget(env: Option<&str>) -> Result<Duration, ServiceError> {
    match env {
        None => Ok(Duration::from_millis(DEFAULT_BUDGET_MS)),
        Some(v) => match v.trim().parse::<u64>() {
            Ok(ms) if ms > 0 => Ok(Duration::from_millis(ms)),
            _ => Err(ServiceError::new("invalid_bounds", format!("NPMT_BUDGET_MS must be a positive integer, got `{v}`"))),
        },
    }
}

/// Looks for a countermodel to `gamma ⊢ formula`. Free identifiers are
/// constants and symbols are inferred from use.
///
/// Exit code 1 when a countermodel is found, 0 when the bounded space is
/// exhausted, 3 when the budget runs out.
pub fn search(searcher: &mut Searcher, formula: &str, gamma: &[String], bounds: &SearchBounds) -> Result<Output, ServiceError> {
    let mut texts: Vec<&str> = gamma.iter().map(String::as_str).collect();
    texts.push(formula);
    let (_, mut formulas) = parse_with_inferred_signature(&texts)?;
    let phi = formulas.pop().expect("formula was pushed last");
    let seq = Sequent::new(formulas, phi);
    let result = searcher.search(&seq, bounds)?;
    let mut out = String::new();
    let code = match &result.outcome {
        SearchOutcome::Found(cm) => {
            let _ = writeln!(out, "countermodel found after {} structures", result.structures);
            out.push_str(&print_structure(&cm.structure));
            let _ = writeln!(out, "state: {}", cm.state);
            for (psi, v) in seq.gamma.iter().zip(&cm.gamma_verdicts) {
                out.push_str(&render_report(psi, &cm.state, v));
            }
            out.push_str(&render_report(&seq.phi, &cm.state, &cm.phi_verdict));
            let verified = cm.verify(&seq)?;
            let _ = writeln!(out, "replay: {}", if verified { "verified" } else { "FAILED" });
            if !verified {
                return Err(ServiceError::new("internal", "countermodel did not replay"));
            }
            EXIT_REFUTED
        }
        SearchOutcome::Exhausted => {
            let _ = writeln!(
                out,
                "no countermodel: exhausted {} structures (universe ≤ {}, clauses ≤ {}, guard ≤ {})",
                result.structures, bounds.max_universe, bounds.max_clauses, bounds.guard_depth
            );
            EXIT_SATISFIED
        }
        SearchOutcome::Unknown => {
            let _ = writeln!(
                out,
                "unknown: budget of {} ms ran out after {} structures",
                bounds.budget.as_millis(),
                result.structures
            );
            EXIT_UNKNOWN
        }
    };
    Ok(Output { code, stdout: out })
}
