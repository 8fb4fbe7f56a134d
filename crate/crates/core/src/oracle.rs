//! Non-predetermined functions realized as finite determination rules.
//!
//! An oracle answers a query for a point from the history of earlier
//! determinations of the same symbol. Values are fixed the first time a point
//! is asked for; later queries of that point never reach the rule again, which
//! makes every rule-induced oracle coherent under string extension.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::Element;

/// The value of a function (a universe element's number) or a relation (0 or 1).
pub type Value = u32;

/// A tuple of universe elements; its length is the owning symbol's arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<Element>);

impl Point {
    pub fn new(coords: impl IntoIterator<Item = u32>) -> Self {
        Point(coords.into_iter().map(Element).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Every point of the given arity over `universe`, in lexicographic order.
    pub fn all(universe: &[Element], arity: usize) -> Vec<Point> {
        let mut out = vec![Vec::with_capacity(arity)];
        for _ in 0..arity {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    universe.iter().map(move |&e| {
                        let mut next = prefix.clone();
                        next.push(e);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(Point).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// One conjunct of a clause guard.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Exactly this many points of the symbol are already determined.
    Count(usize),
    /// The point is already determined, with this value.
    Determined(Point, Value),
    /// The point being asked for.
    Query(Point),
}

impl Condition {
    pub(crate) fn holds(&self, history: &[(Point, Value)], query: &Point) -> bool {
        match self {
            Condition::Count(k) => history.len() == *k,
            Condition::Determined(p, v) => history.iter().any(|(q, w)| q == p && w == v),
            Condition::Query(p) => p == query,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Count(k) => write!(f, "count == {k}"),
            Condition::Determined(p, v) => write!(f, "determined({p}) == {v}"),
            Condition::Query(p) => write!(f, "query == {p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause {
    /// Conjunction; empty means always.
    pub guard: Vec<Condition>,
    pub value: Value,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("when ")?;
        if self.guard.is_empty() {
            f.write_str("true")?;
        }
        for (i, c) in self.guard.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " -> {}", self.value)
    }
}

/// First matching clause wins; the default makes the rule total.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterminationRule {
    pub clauses: Vec<Clause>,
    pub default: Value,
}

impl DeterminationRule {
    pub fn constant(default: Value) -> Self {
        Self { clauses: Vec::new(), default }
    }

    /// The value for `query` given the symbol's determination history so far.
    pub fn eval(&self, history: &[(Point, Value)], query: &Point) -> Value {
        self.clauses
            .iter()
            .find(|c| c.guard.iter().all(|cond| cond.holds(history, query)))
            .map_or(self.default, |c| c.value)
    }
}

/// Free-standing form of [`DeterminationRule::eval`].
pub fn rule_eval(rule: &DeterminationRule, history: &[(Point, Value)], query: &Point) -> Value {
    rule.eval(history, query)
}

impl fmt::Display for DeterminationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "  {c}")?;
        }
        write!(f, "  default -> {}", self.default)
    }
}

/// The codomain of an oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Codomain {
    /// {0, 1}, for relations.
    Truth,
    /// The universe, for functions.
    Universe(Vec<Element>),
}

impl Codomain {
    pub fn contains(&self, v: Value) -> bool {
        match self {
            Codomain::Truth => v <= 1,
            Codomain::Universe(u) => u.contains(&Element(v)),
        }
    }

    pub fn values(&self) -> Vec<Value> {
        match self {
            Codomain::Truth => vec![0, 1],
            Codomain::Universe(u) => u.iter().map(|e| e.0).collect(),
        }
    }
}

/// Anything presenting a non-predetermined function: a map from query
/// strings to partial interpretations on the string's elements.
pub trait NonPredetermined {
    fn arity(&self) -> usize;

    /// The partial interpretation reached after querying `s` left to right.
    fn apply(&self, s: &[Point]) -> BTreeMap<Point, Value>;
}

/// A symbol's non-predetermined interpretation, presented by a determination rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oracle {
    pub symbol: String,
    pub arity: usize,
    pub codomain: Codomain,
    pub rule: DeterminationRule,
}

impl Oracle {
    pub fn new(symbol: impl Into<String>, arity: usize, codomain: Codomain, rule: DeterminationRule) -> Self {
        Self { symbol: symbol.into(), arity, codomain, rule }
    }

    /// Determination history after querying `s`: first occurrences only, in order.
    pub fn history(&self, s: &[Point]) -> Vec<(Point, Value)> {
        let mut history: Vec<(Point, Value)> = Vec::new();
        for p in s {
            if history.iter().any(|(q, _)| q == p) {
                continue;
            }
            let v = self.rule.eval(&history, p);
            history.push((p.clone(), v));
        }
        history
    }

    /// Checks arities and that every value the rule mentions lies in the codomain.
    pub(crate) fn validate(&self) -> Result<(), String> {
        let check_value = |v: Value| {
            if self.codomain.contains(v) {
                Ok(())
            } else {
                Err(format!("value {v} is outside the codomain"))
            }
        };
        let check_point = |p: &Point| {
            if p.arity() == self.arity {
                Ok(())
            } else {
                Err(format!("point {p} has arity {}, expected {}", p.arity(), self.arity))
            }
        };
        check_value(self.rule.default)?;
        for clause in &self.rule.clauses {
            check_value(clause.value)?;
            for cond in &clause.guard {
                match cond {
                    Condition::Count(_) => {}
                    Condition::Determined(p, v) => {
                        check_point(p)?;
                        check_value(*v)?;
                    }
                    Condition::Query(p) => check_point(p)?,
                }
            }
        }
        Ok(())
    }
}

impl NonPredetermined for Oracle {
    fn arity(&self) -> usize {
        self.arity
    }

    fn apply(&self, s: &[Point]) -> BTreeMap<Point, Value> {
        self.history(s).into_iter().collect()
    }
}

/// `H[s]` for a rule-induced oracle.
pub fn oracle_apply(oracle: &Oracle, s: &[Point]) -> BTreeMap<Point, Value> {
    oracle.apply(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CoherenceViolation {
    /// `H[s]` is not defined on exactly the elements of `s`.
    Domain { string: Vec<Point> },
    /// Extending `prefix` by `extension` changed the value of `point`.
    Changed { prefix: Vec<Point>, extension: Point, point: Point, before: Value, after: Option<Value> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoherenceReport {
    /// Number of (string, extension) pairs examined.
    pub checked: usize,
    pub violation: Option<CoherenceViolation>,
}

impl CoherenceReport {
    pub fn is_coherent(&self) -> bool {
        self.violation.is_none()
    }
}

/// Exhaustively checks the extension property on all strings with
/// `len(s) < max_len`, duplicates included. Stops at the first violation.
pub fn check_coherence<O: NonPredetermined + ?Sized>(oracle: &O, universe: &[Element], max_len: usize) -> CoherenceReport {
    let points = Point::all(universe, oracle.arity());
    let mut checked = 0;
    let mut frontier: Vec<Vec<Point>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in frontier {
            let base = oracle.apply(&s);
            let elems: HashSet<&Point> = s.iter().collect();
            if base.len() != elems.len() || !base.keys().all(|p| elems.contains(p)) {
                return CoherenceReport { checked, violation: Some(CoherenceViolation::Domain { string: s }) };
            }
            for d in &points {
                checked += 1;
                let mut ext = s.clone();
                ext.push(d.clone());
                let after = oracle.apply(&ext);
                for (p, &before) in &base {
                    if after.get(p) != Some(&before) {
                        return CoherenceReport {
                            checked,
                            violation: Some(CoherenceViolation::Changed {
                                prefix: s.clone(),
                                extension: d.clone(),
                                point: p.clone(),
                                before,
                                after: after.get(p).copied(),
                            }),
                        };
                    }
                }
                next.push(ext);
            }
        }
        frontier = next;
    }
    CoherenceReport { checked, violation: None }
}
