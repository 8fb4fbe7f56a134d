//! Bounded countermodel search.
//!
//! Candidates are enumerated in a fixed order: universe size, then total
//! clause count, then per-symbol clause counts (predicates before functions,
//! declaration order), then constant values, then the rules themselves in
//! lexicographic order. The first candidate with a state satisfying every
//! premise and refuting the conclusion wins.
//!
//! Two rules with the same behavior (the same value at every history) give
//! the same structure, so each symbol only contributes the first rule of each
//! behavior. Rules containing a clause that can never fire are skipped: the
//! rule without that clause behaves the same and comes earlier.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::error::{ModelError, SignatureError};
use crate::oracle::{Clause, Codomain, Condition, DeterminationRule, Oracle, Point, Value};
use crate::semantics::{replay_verdict, satisfies, StateSpace, Verdict};
use crate::structure::{State, Structure};
use crate::syntax::{Assignment, Element, Formula, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sequent {
    pub gamma: Vec<Formula>,
    pub phi: Formula,
}

impl Sequent {
    pub fn new(gamma: Vec<Formula>, phi: Formula) -> Self {
        Self { gamma, phi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_universe: u32,
    pub max_clauses: usize,
    /// Most conditions in one guard.
    pub guard_depth: usize,
    pub budget: Duration,
}

impl SearchBounds {
    pub fn new(max_universe: u32, max_clauses: usize, guard_depth: usize, budget: Duration) -> Result<Self, SearchError> {
        if max_universe == 0 || max_clauses == 0 || guard_depth == 0 {
            return Err(SearchError::InvalidBounds("universe, clause and guard bounds must be at least 1".into()));
        }
        if budget.is_zero() {
            return Err(SearchError::InvalidBounds("budget must be positive".into()));
        }
        Ok(Self { max_universe, max_clauses, guard_depth, budget })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("formula `{0}` is not closed")]
    OpenFormula(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A structure and one of its states where every premise holds and the conclusion fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Countermodel {
    pub structure: Structure,
    pub state: State,
    pub gamma_verdicts: Vec<Verdict>,
    pub phi_verdict: Verdict,
}

impl Countermodel {
    /// Re-evaluates the sequent at the state and replays every stored verdict.
    pub fn verify(&self, seq: &Sequent) -> Result<bool, ModelError> {
        let m = &self.structure;
        let a = Assignment::new();
        for (psi, v) in seq.gamma.iter().zip(&self.gamma_verdicts) {
            if !v.satisfied || satisfies(m, &self.state, psi, &a)? != *v || !replay_verdict(m, &self.state, psi, &a, v)? {
                return Ok(false);
            }
        }
        let v = &self.phi_verdict;
        Ok(seq.gamma.len() == self.gamma_verdicts.len()
            && !v.satisfied
            && satisfies(m, &self.state, &seq.phi, &a)? == *v
            && replay_verdict(m, &self.state, &seq.phi, &a, v)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    Found(Box<Countermodel>),
    /// Every candidate within the bounds was checked; none is a countermodel.
    Exhausted,
    /// The budget ran out first.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    /// Candidate structures evaluated.
    pub structures: u64,
}

/// Runs one search with a fresh catalog cache.
pub fn search_countermodel(seq: &Sequent, bounds: &SearchBounds) -> Result<SearchResult, SearchError> {
    Searcher::new().search(seq, bounds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct CatalogKey {
    universe: u32,
    arity: usize,
    truth: bool,
    guard_depth: usize,
}

/// Reuses per-symbol rule catalogs across searches.
#[derive(Default)]
pub struct Searcher {
    catalogs: HashMap<CatalogKey, Catalog>,
}

struct Deadline(Instant);

impl Deadline {
    fn passed(&self) -> bool {
        Instant::now() >= self.0
    }
}

impl Searcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn search(&mut self, seq: &Sequent, bounds: &SearchBounds) -> Result<SearchResult, SearchError> {
        let deadline = Deadline(Instant::now() + bounds.budget);
        for f in seq.gamma.iter().chain([&seq.phi]) {
            if !f.is_closed() {
                return Err(SearchError::OpenFormula(f.to_string()));
            }
        }
        let exhausted = SearchResult { outcome: SearchOutcome::Exhausted, structures: 0 };
        if seq.gamma.contains(&seq.phi) {
            return Ok(exhausted);
        }
        let sig = Signature::infer(seq.gamma.iter().chain([&seq.phi]))?;
        let smallest = seq.gamma.iter().chain([&seq.phi]).filter_map(max_element).max().map_or(1, |e| e + 1);
        let mut structures = 0;
        let unknown = |structures| Ok(SearchResult { outcome: SearchOutcome::Unknown, structures });
        for n in smallest.max(1)..=bounds.max_universe {
            let universe: Vec<Element> = (0..n).map(Element).collect();
            let mut symbols: Vec<(String, usize, Codomain)> = Vec::new();
            for d in sig.predicates() {
                symbols.push((d.name.clone(), d.arity, Codomain::Truth));
            }
            for d in sig.functions() {
                symbols.push((d.name.clone(), d.arity, Codomain::Universe(universe.clone())));
            }
            let keys: Vec<CatalogKey> = symbols
                .iter()
                .map(|(_, arity, codomain)| CatalogKey {
                    universe: n,
                    arity: *arity,
                    truth: *codomain == Codomain::Truth,
                    guard_depth: bounds.guard_depth,
                })
                .collect();
            for (key, (_, arity, codomain)) in keys.iter().zip(&symbols) {
                self.catalogs
                    .entry(*key)
                    .or_insert_with(|| Catalog::new(&universe, *arity, &codomain.values(), bounds.guard_depth));
            }
            for total in 0..=symbols.len() * bounds.max_clauses {
                // Every level a composition of `total` can use must exist first.
                for key in &keys {
                    if !self.catalogs.get_mut(key).unwrap().grow_to(total.min(bounds.max_clauses), &deadline) {
                        return unknown(structures);
                    }
                }
                let catalogs: Vec<&Catalog> = keys.iter().map(|k| &self.catalogs[k]).collect();
                for counts in compositions(total, symbols.len(), bounds.max_clauses) {
                    let groups: Vec<&Vec<DeterminationRule>> =
                        counts.iter().zip(&catalogs).map(|(&k, c)| &c.levels[k]).collect();
                    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
                    for constants in tuples(n as usize, sig.constants().len()) {
                        for pick in product(&sizes) {
                            if deadline.passed() {
                                return unknown(structures);
                            }
                            structures += 1;
                            let oracles = symbols
                                .iter()
                                .zip(&pick)
                                .zip(&groups)
                                .map(|(((name, arity, codomain), &i), g)| {
                                    Oracle::new(name.clone(), *arity, codomain.clone(), g[i].clone())
                                })
                                .collect();
                            let consts = sig
                                .constants()
                                .iter()
                                .zip(&constants)
                                .map(|(c, &v)| (c.clone(), Element(v as u32)))
                                .collect();
                            let m = Structure::new(universe.clone(), sig.clone(), oracles, consts)?;
                            if let Some(cm) = refute(&m, seq)? {
                                return Ok(SearchResult { outcome: SearchOutcome::Found(Box::new(cm)), structures });
                            }
                        }
                    }
                }
            }
        }
        Ok(SearchResult { structures, ..exhausted })
    }
}

/// The first state of `m` (in futures order from the initial state) satisfying
/// the premises and refuting the conclusion.
fn refute(m: &Structure, seq: &Sequent) -> Result<Option<Countermodel>, ModelError> {
    let space = StateSpace::new(m, &m.initial_state())?;
    let a = Assignment::new();
    let phi = space.truth_table(&seq.phi, &a)?;
    if phi.iter().all(|&b| b) {
        return Ok(None);
    }
    let mut ok: Vec<bool> = phi.iter().map(|b| !b).collect();
    for psi in &seq.gamma {
        let t = space.truth_table(psi, &a)?;
        ok.iter_mut().zip(t).for_each(|(o, b)| *o &= b);
    }
    let Some(i) = ok.iter().position(|&b| b) else {
        return Ok(None);
    };
    let state = space.states()[i].clone();
    let gamma_verdicts = seq.gamma.iter().map(|psi| space.verdict(&state, psi, &a)).collect::<Result<_, _>>()?;
    let phi_verdict = space.verdict(&state, &seq.phi, &a)?;
    Ok(Some(Countermodel { structure: m.clone(), state, gamma_verdicts, phi_verdict }))
}

fn max_element(phi: &Formula) -> Option<u32> {
    fn term(t: &Term) -> Option<u32> {
        match t {
            Term::Elem(e) => Some(e.0),
            Term::Apply(_, args) => args.iter().filter_map(term).max(),
            _ => None,
        }
    }
    match phi {
        Formula::Equals(l, r) => term(l).max(term(r)),
        Formula::Atom(_, args) => args.iter().filter_map(term).max(),
        Formula::Not(x) | Formula::Forall(_, x) | Formula::Exists(_, x) => max_element(x),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => max_element(l).max(max_element(r)),
    }
}

/// Ways to write `total` as `parts` ordered summands in `0..=cap`, lexicographically.
fn compositions(total: usize, parts: usize, cap: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=cap.min(total) {
        for mut rest in compositions(total - first, parts - 1, cap) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All tuples in `0..n` of length `len`, lexicographically.
fn tuples(n: usize, len: usize) -> Product {
    product(&vec![n; len])
}

/// All index tuples below `sizes`, lexicographically, generated lazily.
fn product(sizes: &[usize]) -> Product {
    let done = sizes.iter().any(|&s| s == 0);
    Product { sizes: sizes.to_vec(), next: Some(vec![0; sizes.len()]).filter(|_| !done) }
}

struct Product {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Product {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// A syntactic rule context: what a guard can see when a fresh point is asked.
struct Context {
    history: Vec<(Point, Value)>,
    query: Point,
}

fn contexts(points: &[Point], values: &[Value]) -> Vec<Context> {
    fn go(points: &[Point], values: &[Value], history: &mut Vec<(Point, Value)>, out: &mut Vec<Context>) {
        for p in points {
            if history.iter().any(|(q, _)| q == p) {
                continue;
            }
            out.push(Context { history: history.clone(), query: p.clone() });
            for &v in values {
                history.push((p.clone(), v));
                go(points, values, history, out);
                history.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(points, values, &mut Vec::new(), &mut out);
    out
}

/// Value at every canonical history, depth first over points in order.
pub fn rule_behavior(rule: &DeterminationRule, universe: &[Element], arity: usize) -> Vec<Value> {
    fn go(rule: &DeterminationRule, points: &[Point], history: &mut Vec<(Point, Value)>, out: &mut Vec<Value>) {
        for p in points {
            if history.iter().any(|(q, _)| q == p) {
                continue;
            }
            let v = rule.eval(history, p);
            out.push(v);
            history.push((p.clone(), v));
            go(rule, points, history, out);
            history.pop();
        }
    }
    let mut out = Vec::new();
    go(rule, &Point::all(universe, arity), &mut Vec::new(), &mut out);
    out
}

/// Every guard condition a rule for this symbol could usefully mention, in canonical order.
pub fn conditions(universe: &[Element], arity: usize, values: &[Value]) -> Vec<Condition> {
    let points = Point::all(universe, arity);
    let mut out: Vec<Condition> = (0..points.len()).map(Condition::Count).collect();
    for p in &points {
        for &v in values {
            out.push(Condition::Determined(p.clone(), v));
        }
    }
    out.extend(points.iter().cloned().map(Condition::Query));
    out.sort();
    out
}

/// First rule of each behavior, grouped by clause count, grown one clause
/// count at a time.
struct Catalog {
    universe: Vec<Element>,
    arity: usize,
    values: Vec<Value>,
    /// Candidate clauses in canonical order with the contexts each fires on.
    clauses: Vec<(Clause, Vec<u64>)>,
    all_open: Vec<u64>,
    seen: HashSet<Vec<Value>>,
    /// Number of distinct behaviors there are, when it fits.
    total: Option<u128>,
    levels: Vec<Vec<DeterminationRule>>,
}

impl Catalog {
    fn new(universe: &[Element], arity: usize, values: &[Value], guard_depth: usize) -> Self {
        let points = Point::all(universe, arity);
        let ctxs = contexts(&points, values);
        let words = ctxs.len().div_ceil(64).max(1);
        let conds = conditions(universe, arity, values);
        let mut guards: Vec<Vec<Condition>> = Vec::new();
        let mut layer: Vec<Vec<Condition>> = vec![Vec::new()];
        for _ in 0..guard_depth {
            layer = layer
                .into_iter()
                .flat_map(|g| {
                    let start = g.last().map_or(0, |last| conds.binary_search(last).unwrap() + 1);
                    conds[start..].iter().map(move |c| {
                        let mut next = g.clone();
                        next.push(c.clone());
                        next
                    })
                })
                .collect();
            guards.extend(layer.iter().cloned());
        }
        let mut clauses: Vec<Clause> = guards
            .into_iter()
            .flat_map(|guard| values.iter().map(move |&value| Clause { guard: guard.clone(), value }))
            .collect();
        clauses.sort();
        let clauses: Vec<(Clause, Vec<u64>)> = clauses
            .into_iter()
            .map(|c| {
                let mut mask = vec![0u64; words];
                for (k, ctx) in ctxs.iter().enumerate() {
                    if c.guard.iter().all(|cond| cond.holds(&ctx.history, &ctx.query)) {
                        mask[k / 64] |= 1 << (k % 64);
                    }
                }
                (c, mask)
            })
            .filter(|(_, mask)| mask.iter().any(|w| *w != 0))
            .collect();
        let r = points.len() as u128;
        let mut nodes = 0u128;
        let mut term = 1u128;
        for k in 0..r {
            term = term.saturating_mul(r - k);
            nodes = nodes.saturating_add(term);
        }
        let total = u32::try_from(nodes).ok().and_then(|nodes| (values.len() as u128).checked_pow(nodes));
        let mut all_open = vec![0u64; words];
        for k in 0..ctxs.len() {
            all_open[k / 64] |= 1 << (k % 64);
        }
        Self {
            universe: universe.to_vec(),
            arity,
            values: values.to_vec(),
            clauses,
            all_open,
            seen: HashSet::new(),
            total,
            levels: Vec::new(),
        }
    }

    fn complete(&self) -> bool {
        self.total.is_some_and(|t| self.seen.len() as u128 >= t)
    }

    /// Fills levels up to `len` clauses. False if the deadline passed first;
    /// the partial level is then discarded.
    fn grow_to(&mut self, len: usize, deadline: &Deadline) -> bool {
        while self.levels.len() <= len {
            let k = self.levels.len();
            let mut level = Level { catalog: self, found: Vec::new(), steps: 0, timed_out: false, deadline };
            let open = level.catalog.all_open.clone();
            level.extend(&mut Vec::new(), &open, k);
            if level.timed_out {
                let found = std::mem::take(&mut level.found);
                for r in found {
                    let b = rule_behavior(&r, &self.universe, self.arity);
                    self.seen.remove(&b);
                }
                return false;
            }
            let found = level.found;
            self.levels.push(found);
        }
        true
    }
}

struct Level<'c> {
    catalog: &'c mut Catalog,
    found: Vec<DeterminationRule>,
    steps: u64,
    timed_out: bool,
    deadline: &'c Deadline,
}

impl Level<'_> {
    fn offer(&mut self, rule: DeterminationRule) {
        let c = &mut *self.catalog;
        if c.seen.insert(rule_behavior(&rule, &c.universe, c.arity)) {
            self.found.push(rule);
        }
    }

    /// Extends `prefix` to exactly `len` clauses, each firing on some context
    /// the earlier ones leave open.
    fn extend(&mut self, prefix: &mut Vec<Clause>, open: &[u64], len: usize) {
        if self.timed_out || self.catalog.complete() {
            return;
        }
        self.steps += 1;
        if self.steps % 4096 == 0 && self.deadline.passed() {
            self.timed_out = true;
            return;
        }
        let any_open = open.iter().any(|w| *w != 0);
        if prefix.len() == len {
            let values = self.catalog.values.clone();
            let defaults: &[Value] = if any_open { &values } else { &values[..1] };
            for &default in defaults {
                self.offer(DeterminationRule { clauses: prefix.clone(), default });
            }
            return;
        }
        if !any_open {
            return;
        }
        for i in 0..self.catalog.clauses.len() {
            let (clause, mask) = &self.catalog.clauses[i];
            if !mask.iter().zip(open).any(|(m, o)| m & o != 0) {
                continue;
            }
            let rest: Vec<u64> = mask.iter().zip(open).map(|(m, o)| o & !m).collect();
            prefix.push(clause.clone());
            self.extend(prefix, &rest, len);
            prefix.pop();
            if self.timed_out || self.catalog.complete() {
                return;
            }
        }
    }
}

/// The first rule (in canonical order) of every behavior reachable with at
/// most `max_clauses` clauses of at most `guard_depth` conditions, in
/// canonical order.
pub fn behavior_catalog(
    universe: &[Element],
    arity: usize,
    values: &[Value],
    max_clauses: usize,
    guard_depth: usize,
) -> Vec<DeterminationRule> {
    let mut c = Catalog::new(universe, arity, values, guard_depth);
    let far = Deadline(Instant::now() + Duration::from_secs(365 * 24 * 3600));
    c.grow_to(max_clauses, &far);
    c.levels.concat()
}
