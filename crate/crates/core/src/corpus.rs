//! Intuitionistically derivable schemes, instantiated over a structure's atoms and
//! checked at its states.
//!
//! Templates use `$A`, `$B`, `$C` for closed formulas, `$P` for a unary
//! predicate and `$e` for a universe element.

use serde::Serialize;

use crate::error::ModelError;
use crate::oracle::Point;
use crate::parser::parse_formula;
use crate::semantics::StateSpace;
use crate::structure::{State, Structure};
use crate::syntax::{Assignment, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Scheme {
    pub name: &'static str,
    pub template: &'static str,
}

const fn scheme(name: &'static str, template: &'static str) -> Scheme {
    Scheme { name, template }
}

/// Derivable in intuitionistic first-order logic with equality.
pub const CORPUS: [Scheme; 26] = [
    scheme("identity", "$A -> $A"),
    scheme("weakening", "$A -> ($B -> $A)"),
    scheme("distribution", "($A -> ($B -> $C)) -> (($A -> $B) -> ($A -> $C))"),
    scheme("and-elim-left", "$A & $B -> $A"),
    scheme("and-elim-right", "$A & $B -> $B"),
    scheme("and-intro", "$A -> ($B -> $A & $B)"),
    scheme("or-intro-left", "$A -> $A | $B"),
    scheme("or-intro-right", "$B -> $A | $B"),
    scheme("or-elim", "($A -> $C) -> (($B -> $C) -> ($A | $B -> $C))"),
    scheme("not-not-excluded-middle", "!!($A | !$A)"),
    scheme("contraposition", "($A -> $B) -> (!$B -> !$A)"),
    scheme("non-contradiction", "!($A & !$A)"),
    scheme("double-negation-intro", "$A -> !!$A"),
    scheme("triple-negation", "!!!$A -> !$A"),
    scheme("modus-ponens", "$A & ($A -> $B) -> $B"),
    scheme("and-commutes", "$A & $B -> $B & $A"),
    scheme("or-commutes", "$A | $B -> $B | $A"),
    scheme("ex-falso", "$A & !$A -> $B"),
    scheme("de-morgan-or", "!($A | $B) -> !$A & !$B"),
    scheme("de-morgan-and-weak", "!$A | !$B -> !($A & $B)"),
    scheme("curry", "($A & $B -> $C) -> ($A -> ($B -> $C))"),
    scheme("equality-reflexive", "forall x. x = x"),
    scheme("forall-instance", "(forall x. $P(x)) -> $P($e)"),
    scheme("exists-intro", "$P($e) -> exists x. $P(x)"),
    scheme("exists-not-forall", "(exists x. !$P(x)) -> !(forall x. $P(x))"),
    scheme("forall-not-exists", "(forall x. !$P(x)) -> !(exists x. $P(x))"),
];

/// Classically valid, not intuitionistically derivable.
pub const CLASSICAL: [Scheme; 2] =
    [scheme("excluded-middle", "$A | !$A"), scheme("weak-excluded-middle", "!$A | !!$A")];

/// Letters are drawn from the first this-many atoms of the pool.
const POOL: usize = 3;

/// Closed atoms of `m`, alternating between symbols so that distinct letters
/// can land on distinct symbols.
pub fn atom_pool(m: &Structure) -> Vec<String> {
    let sig = m.signature();
    let u = m.universe();
    let mut per_symbol: Vec<Vec<String>> = Vec::new();
    for d in sig.predicates() {
        per_symbol.push(Point::all(u, d.arity).iter().map(|p| format!("{}{}", d.name, args(p))).collect());
    }
    for d in sig.functions() {
        per_symbol.push(Point::all(u, d.arity).iter().map(|p| format!("{}{} = {}", d.name, args(p), u[0].0)).collect());
    }
    let longest = per_symbol.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::new();
    for i in 0..longest {
        for atoms in &per_symbol {
            if let Some(a) = atoms.get(i) {
                out.push(a.clone());
            }
        }
    }
    if out.is_empty() {
        out.push(format!("{0} = {0}", u[0].0));
    }
    out
}

fn args(p: &Point) -> String {
    let inner: Vec<String> = p.0.iter().map(|e| e.0.to_string()).collect();
    format!("({})", inner.join(", "))
}

/// All instances of `scheme` over `m`: every choice of letters from the atom
/// pool, every unary predicate for `$P`, every element for `$e`.
pub fn instantiate(scheme: &Scheme, m: &Structure) -> Vec<Formula> {
    let pool: Vec<String> = atom_pool(m).into_iter().take(POOL).collect();
    let mut texts = vec![scheme.template.to_string()];
    for letter in ["$A", "$B", "$C"] {
        if scheme.template.contains(letter) {
            texts = texts
                .iter()
                .flat_map(|t| pool.iter().map(move |atom| t.replace(letter, &format!("({atom})"))))
                .collect();
        }
    }
    if scheme.template.contains("$P") {
        let unary: Vec<&str> =
            m.signature().predicates().iter().filter(|d| d.arity == 1).map(|d| d.name.as_str()).collect();
        texts = texts.iter().flat_map(|t| unary.iter().map(move |p| t.replace("$P", p))).collect();
    }
    if scheme.template.contains("$e") {
        texts = texts.iter().flat_map(|t| m.universe().iter().map(move |e| t.replace("$e", &e.0.to_string()))).collect();
    }
    let mut out: Vec<Formula> = texts
        .iter()
        .map(|t| parse_formula(t, m.signature()).expect("corpus templates instantiate to well-formed formulas"))
        .collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusViolation {
    pub scheme: &'static str,
    pub formula: Formula,
    pub state: State,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    /// Number of (instance, state) checks made.
    pub checked: u64,
    pub instances: usize,
    pub violations: Vec<CorpusViolation>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every instance of every scheme in `schemes` at each of `states`.
pub fn run_schemes(m: &Structure, states: &[State], schemes: &[Scheme]) -> Result<CorpusReport, ModelError> {
    let space = StateSpace::new(m, &m.initial_state())?;
    let indices = states
        .iter()
        .map(|e| space.index_of(e).ok_or(ModelError::ShapeMismatch))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = CorpusReport::default();
    for s in schemes {
        for phi in instantiate(s, m) {
            report.instances += 1;
            let table = space.truth_table(&phi, &Assignment::new())?;
            for (&i, e) in indices.iter().zip(states) {
                report.checked += 1;
                if !table[i] {
                    report.violations.push(CorpusViolation { scheme: s.name, formula: phi.clone(), state: e.clone() });
                }
            }
        }
    }
    Ok(report)
}

/// Runs the derivable corpus at each of `states`; any violation is an evaluator bug.
pub fn run_soundness_corpus(m: &Structure, states: &[State]) -> Result<CorpusReport, ModelError> {
    run_schemes(m, states, &CORPUS)
}
