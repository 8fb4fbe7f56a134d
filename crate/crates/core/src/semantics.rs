//! Satisfaction at a state, quantifying over every future state.
//!
//! Formulas are compiled into an arena whose nodes know their free variables
//! and the atoms that count for the determinedness guard. Evaluation runs over
//! the upward-closed set of states above a root state and memoizes each node on
//! (state, values of the node's free variables).

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::ModelError;
use crate::oracle::{Point, Value};
use crate::structure::{State, Structure};
use crate::syntax::{Assignment, Element, Formula, SymbolKind, SymbolRef, Term};

/// Largest state space the evaluator will build.
pub const MAX_STATES: u128 = 250_000;

/// Value of a term at a state, or `None` when the term is not yet determined.
pub fn interpret_term(m: &Structure, e: &State, t: &Term, a: &Assignment) -> Result<Option<Element>, ModelError> {
    m.check_shape(e)?;
    match t {
        Term::Var(v) => a.get(v).map(Some).ok_or_else(|| ModelError::UnboundVariable(v.clone())),
        Term::Const(c) => m.constant(c).map(Some).ok_or_else(|| ModelError::UnknownSymbol(c.clone())),
        Term::Elem(x) => {
            if m.universe().contains(x) {
                Ok(Some(*x))
            } else {
                Err(ModelError::ElementOutsideUniverse(*x))
            }
        }
        Term::Apply(f, args) => {
            let idx = m.signature().function_index(f).ok_or_else(|| ModelError::UnknownSymbol(f.clone()))?;
            let sym = SymbolRef { kind: SymbolKind::Function, index: idx };
            let arity = m.signature().functions()[idx].arity;
            if arity != args.len() {
                return Err(ModelError::ArityMismatch { symbol: f.clone(), expected: arity, found: args.len() });
            }
            let mut coords = Vec::with_capacity(args.len());
            for arg in args {
                match interpret_term(m, e, arg, a)? {
                    Some(x) => coords.push(x),
                    None => return Ok(None),
                }
            }
            Ok(e.value(sym, &Point(coords)).map(Element))
        }
    }
}

/// Whether a closed atomic formula is determined at `e`.
///
/// Returns `Ok(false)` for non-atomic formulas.
pub fn atom_determined(m: &Structure, e: &State, atom: &Formula) -> Result<bool, ModelError> {
    let none = Assignment::new();
    match atom {
        Formula::Equals(l, r) => {
            Ok(interpret_term(m, e, l, &none)?.is_some() && interpret_term(m, e, r, &none)?.is_some())
        }
        Formula::Atom(p, args) => {
            let idx = m.signature().predicate_index(p).ok_or_else(|| ModelError::UnknownSymbol(p.clone()))?;
            let mut coords = Vec::with_capacity(args.len());
            for t in args {
                match interpret_term(m, e, t, &none)? {
                    Some(x) => coords.push(x),
                    None => return Ok(false),
                }
            }
            Ok(e.value(SymbolRef { kind: SymbolKind::Predicate, index: idx }, &Point(coords)).is_some())
        }
        _ => Ok(false),
    }
}

/// Which satisfaction clause a witness refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseKind {
    Equality,
    Relation,
    Negation,
    Conjunction,
    Disjunction,
    Implication,
    Universal,
    Existential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Explanation attached to a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The clause's condition breaks at this future state. For conjunctions
    /// `side` names the failing conjunct; for universals `binding` names the
    /// failing element.
    FailsAt {
        clause: ClauseKind,
        state: State,
        side: Option<Side>,
        binding: Option<(String, Element)>,
    },
    /// Neither disjunct's guarded condition holds; first failing future of each.
    NeitherDisjunct { left: State, right: State },
    /// No element works; the first failing future for each candidate.
    NoElement { variable: String, failures: Vec<(Element, State)> },
    /// An element making the existential true.
    Element { variable: String, element: Element },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub satisfied: bool,
    pub witness: Option<Witness>,
}

type NodeId = usize;
type TermId = usize;

#[derive(Debug)]
enum TermNode {
    Slot(usize),
    Fixed(usize),
    Apply(usize, Vec<TermId>),
}

#[derive(Debug)]
enum Kind {
    Eq(TermId, TermId),
    Atom(usize, Vec<TermId>),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Implies(NodeId, NodeId),
    Forall(usize, NodeId),
    Exists(usize, NodeId),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    /// Free variable slots, sorted.
    free: Vec<usize>,
    /// Atom nodes below (or at) this node whose variables are all free here.
    guard: Vec<NodeId>,
}

/// A formula lowered to universe positions and slot-indexed variables.
struct Compiled {
    terms: Vec<TermNode>,
    nodes: Vec<Node>,
    root: NodeId,
    slot_names: Vec<String>,
    /// Positions bound to the root's free slots.
    env: Vec<Option<usize>>,
}

struct Compiler<'a> {
    m: &'a Structure,
    terms: Vec<TermNode>,
    nodes: Vec<Node>,
    slot_names: Vec<String>,
    scope: Vec<(String, usize)>,
    free_slots: HashMap<String, usize>,
}

impl<'a> Compiler<'a> {
    fn slot_for(&mut self, name: &str) -> usize {
        if let Some((_, s)) = self.scope.iter().rev().find(|(n, _)| n == name) {
            return *s;
        }
        if let Some(&s) = self.free_slots.get(name) {
            return s;
        }
        let s = self.slot_names.len();
        self.slot_names.push(name.to_string());
        self.free_slots.insert(name.to_string(), s);
        s
    }

    fn position(&self, e: Element) -> Result<usize, ModelError> {
        self.m.universe().binary_search(&e).map_err(|_| ModelError::ElementOutsideUniverse(e))
    }

    fn term(&mut self, t: &Term, slots: &mut Vec<usize>) -> Result<TermId, ModelError> {
        let node = match t {
            Term::Var(v) => {
                let s = self.slot_for(v);
                slots.push(s);
                TermNode::Slot(s)
            }
            Term::Const(c) => {
                let e = self.m.constant(c).ok_or_else(|| ModelError::UnknownSymbol(c.clone()))?;
                TermNode::Fixed(self.position(e)?)
            }
            Term::Elem(e) => TermNode::Fixed(self.position(*e)?),
            Term::Apply(f, args) => {
                let idx = self.m.signature().function_index(f).ok_or_else(|| ModelError::UnknownSymbol(f.clone()))?;
                let arity = self.m.signature().functions()[idx].arity;
                if arity != args.len() {
                    return Err(ModelError::ArityMismatch { symbol: f.clone(), expected: arity, found: args.len() });
                }
                let ids = args.iter().map(|a| self.term(a, slots)).collect::<Result<_, _>>()?;
                TermNode::Apply(idx, ids)
            }
        };
        self.terms.push(node);
        Ok(self.terms.len() - 1)
    }

    fn push(&mut self, kind: Kind, free: Vec<usize>, guard: Vec<NodeId>) -> NodeId {
        self.nodes.push(Node { kind, free, guard });
        self.nodes.len() - 1
    }

    fn formula(&mut self, phi: &Formula) -> Result<NodeId, ModelError> {
        let sorted = |mut v: Vec<usize>| {
            v.sort_unstable();
            v.dedup();
            v
        };
        let binary = |c: &mut Self, l: &Formula, r: &Formula, make: fn(NodeId, NodeId) -> Kind| {
            let (a, b) = (c.formula(l)?, c.formula(r)?);
            let free = sorted([c.nodes[a].free.clone(), c.nodes[b].free.clone()].concat());
            let guard = [c.nodes[a].guard.clone(), c.nodes[b].guard.clone()].concat();
            Ok::<_, ModelError>(c.push(make(a, b), free, guard))
        };
        match phi {
            Formula::Equals(l, r) => {
                let mut slots = Vec::new();
                let (a, b) = (self.term(l, &mut slots)?, self.term(r, &mut slots)?);
                let id = self.nodes.len();
                Ok(self.push(Kind::Eq(a, b), sorted(slots), vec![id]))
            }
            Formula::Atom(p, args) => {
                let idx = self.m.signature().predicate_index(p).ok_or_else(|| ModelError::UnknownSymbol(p.clone()))?;
                let arity = self.m.signature().predicates()[idx].arity;
                if arity != args.len() {
                    return Err(ModelError::ArityMismatch { symbol: p.clone(), expected: arity, found: args.len() });
                }
                let mut slots = Vec::new();
                let ids = args.iter().map(|t| self.term(t, &mut slots)).collect::<Result<_, _>>()?;
                let id = self.nodes.len();
                Ok(self.push(Kind::Atom(idx, ids), sorted(slots), vec![id]))
            }
            Formula::Not(inner) => {
                let a = self.formula(inner)?;
                let (free, guard) = (self.nodes[a].free.clone(), self.nodes[a].guard.clone());
                Ok(self.push(Kind::Not(a), free, guard))
            }
            Formula::And(l, r) => binary(self, l, r, Kind::And),
            Formula::Or(l, r) => binary(self, l, r, Kind::Or),
            Formula::Implies(l, r) => binary(self, l, r, Kind::Implies),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let slot = self.slot_names.len();
                self.slot_names.push(v.clone());
                self.scope.push((v.clone(), slot));
                let b = self.formula(body);
                self.scope.pop();
                let b = b?;
                let free: Vec<usize> = self.nodes[b].free.iter().copied().filter(|&s| s != slot).collect();
                let guard: Vec<NodeId> =
                    self.nodes[b].guard.iter().copied().filter(|&g| self.nodes[g].free.iter().all(|s| free.contains(s))).collect();
                let kind = if matches!(phi, Formula::Forall(..)) { Kind::Forall(slot, b) } else { Kind::Exists(slot, b) };
                Ok(self.push(kind, free, guard))
            }
        }
    }
}

fn compile(m: &Structure, phi: &Formula, a: &Assignment) -> Result<Compiled, ModelError> {
    let mut c = Compiler {
        m,
        terms: Vec::new(),
        nodes: Vec::new(),
        slot_names: Vec::new(),
        scope: Vec::new(),
        free_slots: HashMap::new(),
    };
    let root = c.formula(phi)?;
    let mut env = vec![None; c.slot_names.len()];
    for &s in &c.nodes[root].free {
        let name = &c.slot_names[s];
        let e = a.get(name).ok_or_else(|| ModelError::UnboundVariable(name.clone()))?;
        env[s] = Some(c.position(e)?);
    }
    Ok(Compiled { terms: c.terms, nodes: c.nodes, root, slot_names: c.slot_names, env })
}

/// The upward-closed set of canonical states above a root, with per-state
/// lookup tables and each state's futures listed in enumeration order.
pub struct StateSpace<'m> {
    m: &'m Structure,
    states: Vec<State>,
    index: HashMap<State, usize>,
    up: Vec<Vec<u32>>,
    /// `tables[state][symbol][point index]`, symbols in layout order.
    tables: Vec<Vec<Vec<Option<Value>>>>,
}

impl<'m> StateSpace<'m> {
    pub fn new(m: &'m Structure, root: &State) -> Result<Self, ModelError> {
        m.check_shape(root)?;
        let count = m.futures_count(root);
        if count > MAX_STATES {
            return Err(ModelError::StateSpaceTooLarge(count));
        }
        let states = m.futures(root);
        let index: HashMap<State, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let up = states
            .iter()
            .map(|s| m.futures(s).iter().map(|f| index[f] as u32).collect())
            .collect();
        let n = m.universe().len();
        let symbols: Vec<SymbolRef> = m.symbols().collect();
        let tables = states
            .iter()
            .map(|s| {
                symbols
                    .iter()
                    .map(|&sym| {
                        let arity = m.signature().decl(sym).arity;
                        let mut table = vec![None; n.pow(arity as u32)];
                        for (p, v) in s.sequence(sym) {
                            table[point_index(m, p)] = Some(*v);
                        }
                        table
                    })
                    .collect()
            })
            .collect();
        Ok(Self { m, states, index, up, tables })
    }

    pub fn structure(&self) -> &'m Structure {
        self.m
    }

    /// All states, root first.
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn index_of(&self, e: &State) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Indices of the futures of state `i` (including `i`), in enumeration order.
    pub fn futures_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.up[i].iter().map(|&j| j as usize)
    }

    fn symbol_slot(&self, sym: SymbolRef) -> usize {
        match sym.kind {
            SymbolKind::Function => sym.index,
            SymbolKind::Predicate => self.m.function_oracles().len() + sym.index,
        }
    }

    /// Satisfaction of `phi` under `a` at every state of the space.
    pub fn truth_table(&self, phi: &Formula, a: &Assignment) -> Result<Vec<bool>, ModelError> {
        let c = compile(self.m, phi, a)?;
        let mut run = Run::new(self, &c);
        let env = c.env.clone();
        Ok((0..self.states.len()).map(|i| run.sat(c.root, i, &env)).collect())
    }

    /// Satisfaction at state `e` (which must belong to the space) with an explanation.
    pub fn verdict(&self, e: &State, phi: &Formula, a: &Assignment) -> Result<Verdict, ModelError> {
        let i = self.index_of(e).ok_or(ModelError::ShapeMismatch)?;
        let c = compile(self.m, phi, a)?;
        let mut run = Run::new(self, &c);
        let env = c.env.clone();
        let satisfied = run.sat(c.root, i, &env);
        let witness = run.witness(c.root, i, &env, satisfied);
        Ok(Verdict { satisfied, witness })
    }
}

fn point_index(m: &Structure, p: &Point) -> usize {
    let n = m.universe().len();
    p.0.iter().fold(0, |acc, e| acc * n + m.universe().binary_search(e).expect("point inside universe"))
}

struct Run<'s, 'm> {
    space: &'s StateSpace<'m>,
    c: &'s Compiled,
    n: u128,
    sat_memo: Vec<HashMap<u128, bool>>,
    guarded_memo: Vec<HashMap<u128, bool>>,
}

impl<'s, 'm> Run<'s, 'm> {
    fn new(space: &'s StateSpace<'m>, c: &'s Compiled) -> Self {
        let len = c.nodes.len();
        Self {
            space,
            c,
            n: space.m.universe().len() as u128,
            sat_memo: vec![HashMap::new(); len],
            guarded_memo: vec![HashMap::new(); len],
        }
    }

    fn key(&self, node: NodeId, state: usize, env: &[Option<usize>]) -> u128 {
        self.c.nodes[node]
            .free
            .iter()
            .fold(state as u128, |acc, &s| acc * self.n + env[s].expect("free slot bound") as u128)
    }

    fn term(&self, t: TermId, state: usize, env: &[Option<usize>]) -> Option<usize> {
        match &self.c.terms[t] {
            TermNode::Slot(s) => Some(env[*s].expect("slot bound")),
            TermNode::Fixed(pos) => Some(*pos),
            TermNode::Apply(f, args) => {
                let mut idx = 0usize;
                for &a in args {
                    idx = idx * self.n as usize + self.term(a, state, env)?;
                }
                let sym = SymbolRef { kind: SymbolKind::Function, index: *f };
                let v = self.space.tables[state][self.space.symbol_slot(sym)][idx]?;
                Some(self.space.m.universe().binary_search(&Element(v)).expect("function value in universe"))
            }
        }
    }

    /// `Some(value)` when the relation point of an atom is determined.
    fn relation(&self, p: usize, args: &[TermId], state: usize, env: &[Option<usize>]) -> Option<Value> {
        let mut idx = 0usize;
        for &a in args {
            idx = idx * self.n as usize + self.term(a, state, env)?;
        }
        let sym = SymbolRef { kind: SymbolKind::Predicate, index: p };
        self.space.tables[state][self.space.symbol_slot(sym)][idx]
    }

    fn atom_determined(&self, node: NodeId, state: usize, env: &[Option<usize>]) -> bool {
        match &self.c.nodes[node].kind {
            Kind::Eq(l, r) => self.term(*l, state, env).is_some() && self.term(*r, state, env).is_some(),
            Kind::Atom(p, args) => self.relation(*p, args, state, env).is_some(),
            _ => unreachable!("guard lists only hold atoms"),
        }
    }

    fn guard_holds(&self, node: NodeId, state: usize, env: &[Option<usize>]) -> bool {
        self.c.nodes[node].guard.iter().all(|&a| self.atom_determined(a, state, env))
    }

    /// Local failure of an atomic clause at one state.
    fn atom_fails_at(&self, node: NodeId, state: usize, env: &[Option<usize>]) -> bool {
        match &self.c.nodes[node].kind {
            Kind::Eq(l, r) => match (self.term(*l, state, env), self.term(*r, state, env)) {
                (Some(a), Some(b)) => a != b,
                _ => false,
            },
            Kind::Atom(p, args) => matches!(self.relation(*p, args, state, env), Some(v) if v != 1),
            _ => unreachable!(),
        }
    }

    fn sat(&mut self, node: NodeId, state: usize, env: &[Option<usize>]) -> bool {
        let key = self.key(node, state, env);
        if let Some(&b) = self.sat_memo[node].get(&key) {
            return b;
        }
        let space = self.space;
        let result = match self.c.nodes[node].kind {
            Kind::Eq(..) | Kind::Atom(..) => space.futures_of(state).all(|j| !self.atom_fails_at(node, j, env)),
            Kind::Not(inner) => space.futures_of(state).all(|j| !self.sat(inner, j, env)),
            Kind::And(l, r) => self.guarded(l, state, env) && self.guarded(r, state, env),
            Kind::Or(l, r) => self.guarded(l, state, env) || self.guarded(r, state, env),
            Kind::Implies(l, r) => space.futures_of(state).all(|j| !self.implication_fails_at(l, r, j, env)),
            Kind::Forall(slot, body) => self.each_binding(slot, env).all(|e| self.guarded(body, state, &e)),
            Kind::Exists(slot, body) => {
                let bindings: Vec<_> = self.each_binding(slot, env).collect();
                bindings.iter().any(|e| self.guarded(body, state, e))
            }
        };
        self.sat_memo[node].insert(key, result);
        result
    }

    fn implication_fails_at(&mut self, l: NodeId, r: NodeId, j: usize, env: &[Option<usize>]) -> bool {
        self.guard_holds(l, j, env) && self.guard_holds(r, j, env) && self.sat(l, j, env) && !self.sat(r, j, env)
    }

    fn each_binding(&self, slot: usize, env: &[Option<usize>]) -> impl Iterator<Item = Vec<Option<usize>>> {
        let env = env.to_vec();
        (0..self.n as usize).map(move |pos| {
            let mut e = env.clone();
            e[slot] = Some(pos);
            e
        })
    }

    /// For every future where the node's closed atoms are determined, the node holds.
    fn guarded(&mut self, node: NodeId, state: usize, env: &[Option<usize>]) -> bool {
        let key = self.key(node, state, env);
        if let Some(&b) = self.guarded_memo[node].get(&key) {
            return b;
        }
        let result = self.first_guarded_failure(node, state, env).is_none();
        self.guarded_memo[node].insert(key, result);
        result
    }

    fn first_guarded_failure(&mut self, node: NodeId, state: usize, env: &[Option<usize>]) -> Option<usize> {
        let space = self.space;
        space.futures_of(state).find(|&j| self.guard_holds(node, j, env) && !self.sat(node, j, env))
    }

    fn witness(&mut self, node: NodeId, i: usize, env: &[Option<usize>], satisfied: bool) -> Option<Witness> {
        let space = self.space;
        let state = |j: usize| space.states[j].clone();
        let fails_at = |clause, j: usize| Witness::FailsAt { clause, state: state(j), side: None, binding: None };
        match self.c.nodes[node].kind {
            Kind::Exists(slot, body) => {
                let name = self.c.slot_names[slot].clone();
                let bindings: Vec<_> = self.each_binding(slot, env).collect();
                if satisfied {
                    let pos = bindings.iter().position(|e| self.guarded(body, i, e))?;
                    Some(Witness::Element { variable: name, element: space.m.universe()[pos] })
                } else {
                    let failures = bindings
                        .iter()
                        .enumerate()
                        .map(|(pos, e)| {
                            let j = self.first_guarded_failure(body, i, e).expect("existential refuted");
                            (space.m.universe()[pos], state(j))
                        })
                        .collect();
                    Some(Witness::NoElement { variable: name, failures })
                }
            }
            _ if satisfied => None,
            Kind::Eq(..) => space.futures_of(i).find(|&j| self.atom_fails_at(node, j, env)).map(|j| fails_at(ClauseKind::Equality, j)),
            Kind::Atom(..) => space.futures_of(i).find(|&j| self.atom_fails_at(node, j, env)).map(|j| fails_at(ClauseKind::Relation, j)),
            Kind::Not(inner) => space.futures_of(i).find(|&j| self.sat(inner, j, env)).map(|j| fails_at(ClauseKind::Negation, j)),
            Kind::Implies(l, r) => space
                .futures_of(i)
                .find(|&j| self.implication_fails_at(l, r, j, env))
                .map(|j| fails_at(ClauseKind::Implication, j)),
            Kind::And(l, r) => {
                let (side, j) = match self.first_guarded_failure(l, i, env) {
                    Some(j) => (Side::Left, j),
                    None => (Side::Right, self.first_guarded_failure(r, i, env)?),
                };
                Some(Witness::FailsAt { clause: ClauseKind::Conjunction, state: state(j), side: Some(side), binding: None })
            }
            Kind::Or(l, r) => {
                let left = self.first_guarded_failure(l, i, env)?;
                let right = self.first_guarded_failure(r, i, env)?;
                Some(Witness::NeitherDisjunct { left: state(left), right: state(right) })
            }
            Kind::Forall(slot, body) => {
                let bindings: Vec<_> = self.each_binding(slot, env).collect();
                bindings.iter().enumerate().find_map(|(pos, e)| {
                    self.first_guarded_failure(body, i, e).map(|j| Witness::FailsAt {
                        clause: ClauseKind::Universal,
                        state: state(j),
                        side: None,
                        binding: Some((self.c.slot_names[slot].clone(), space.m.universe()[pos])),
                    })
                })
            }
        }
    }
}

/// `(m, e) ⊨ phi[a]`, with an explanation.
pub fn satisfies(m: &Structure, e: &State, phi: &Formula, a: &Assignment) -> Result<Verdict, ModelError> {
    let space = StateSpace::new(m, e)?;
    space.verdict(e, phi, a)
}

/// Conjunction of [`satisfies`] over closed formulas. Empty `gamma` holds.
pub fn satisfies_all(m: &Structure, e: &State, gamma: &[Formula]) -> Result<bool, ModelError> {
    if let Some(open) = gamma.iter().find(|phi| !phi.is_closed()) {
        return Err(ModelError::OpenFormula(open.to_string()));
    }
    let space = StateSpace::new(m, e)?;
    for phi in gamma {
        if !space.verdict(e, phi, &Assignment::new())?.satisfied {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-derives the verdict's boolean from its witness alone.
///
/// For failures, the clause-local condition is re-evaluated at the recorded
/// future state; for an existential witness, the guarded condition is
/// re-evaluated for the recorded element. Verdicts without a witness are
/// confirmed by full re-evaluation.
pub fn replay_verdict(m: &Structure, e: &State, phi: &Formula, a: &Assignment, verdict: &Verdict) -> Result<bool, ModelError> {
    let sat_at = |state: &State, f: &Formula, a: &Assignment| satisfies(m, state, f, a).map(|v| v.satisfied);
    let guarded_fails = |state: &State, f: &Formula, a: &Assignment| -> Result<bool, ModelError> {
        let determined = f
            .atomic_instances(a)
            .iter()
            .map(|atom| atom_determined(m, state, atom))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|b| b);
        Ok(determined && !sat_at(state, f, a)?)
    };
    let after = |state: &State| e.leq(state);
    let Some(w) = &verdict.witness else {
        return Ok(satisfies(m, e, phi, a)?.satisfied == verdict.satisfied);
    };
    let derived = match (w, phi) {
        (Witness::Element { variable, element }, Formula::Exists(v, body)) if v == variable => {
            let b = a.clone().with(v.clone(), *element);
            let space = StateSpace::new(m, e)?;
            let mut ok = true;
            for j in space.futures_of(0) {
                if guarded_fails(&space.states()[j], body, &b)? {
                    ok = false;
                    break;
                }
            }
            ok
        }
        (Witness::NoElement { variable, failures }, Formula::Exists(v, body)) if v == variable => {
            let mut refuted = failures.len() == m.universe().len();
            for (x, state) in failures {
                refuted &= after(state)? && guarded_fails(state, body, &a.clone().with(v.clone(), *x))?;
            }
            !refuted
        }
        (Witness::NeitherDisjunct { left, right }, Formula::Or(l, r)) => {
            !(after(left)? && after(right)? && guarded_fails(left, l, a)? && guarded_fails(right, r, a)?)
        }
        (Witness::FailsAt { clause, state, side, binding }, _) => {
            if !after(state)? {
                return Ok(false);
            }
            let none = Assignment::new();
            let broke = match (clause, phi) {
                (ClauseKind::Equality, Formula::Equals(l, r)) => {
                    let subst = |t: &Term| interpret_term(m, state, t, a);
                    matches!((subst(l)?, subst(r)?), (Some(x), Some(y)) if x != y)
                }
                (ClauseKind::Relation, Formula::Atom(..)) => {
                    let inst = phi.atomic_instances(a);
                    let atom = inst.first().ok_or(ModelError::OpenFormula(phi.to_string()))?;
                    atom_determined(m, state, atom)? && !sat_at(state, atom, &none)?
                }
                (ClauseKind::Negation, Formula::Not(inner)) => sat_at(state, inner, a)?,
                (ClauseKind::Conjunction, Formula::And(l, r)) => {
                    let part = if *side == Some(Side::Right) { r } else { l };
                    guarded_fails(state, part, a)?
                }
                (ClauseKind::Implication, Formula::Implies(l, r)) => {
                    let guards = l.atomic_instances(a).into_iter().chain(r.atomic_instances(a));
                    let mut determined = true;
                    for atom in guards {
                        determined &= atom_determined(m, state, &atom)?;
                    }
                    determined && sat_at(state, l, a)? && !sat_at(state, r, a)?
                }
                (ClauseKind::Universal, Formula::Forall(v, body)) => match binding {
                    Some((name, x)) if name == v => guarded_fails(state, body, &a.clone().with(v.clone(), *x))?,
                    _ => false,
                },
                _ => false,
            };
            !broke
        }
        _ => return Ok(false),
    };
    Ok(derived == verdict.satisfied)
}

/// Plain-text report shared by the CLI and the HTTP API.
pub fn render_report(phi: &Formula, e: &State, verdict: &Verdict) -> String {
    let mut out = String::new();
    let mark = if verdict.satisfied { "⊨" } else { "⊭" };
    let _ = writeln!(out, "{mark} {phi}");
    let _ = writeln!(out, "  state: {e}");
    match &verdict.witness {
        None => {}
        Some(Witness::FailsAt { clause, state, side, binding }) => {
            let mut what = format!("{clause:?}").to_lowercase();
            if let Some(side) = side {
                let _ = write!(what, " ({} conjunct)", if *side == Side::Left { "left" } else { "right" });
            }
            if let Some((v, x)) = binding {
                let _ = write!(what, " ({v} = {x})");
            }
            let _ = writeln!(out, "  {what} fails at {state}");
        }
        Some(Witness::NeitherDisjunct { left, right }) => {
            let _ = writeln!(out, "  left disjunct fails at {left}");
            let _ = writeln!(out, "  right disjunct fails at {right}");
        }
        Some(Witness::NoElement { variable, failures }) => {
            for (x, state) in failures {
                let _ = writeln!(out, "  {variable} = {x} fails at {state}");
            }
        }
        Some(Witness::Element { variable, element }) => {
            let _ = writeln!(out, "  witness {variable} = {element}");
        }
    }
    out
}
