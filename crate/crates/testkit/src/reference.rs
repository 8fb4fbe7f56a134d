//! Naive satisfaction: direct recursion over the clause definitions, no memo.

use std::collections::{HashSet, VecDeque};

use npmt::{Assignment, Element, Formula, Point, State, Structure, SymbolKind, SymbolRef, Term};

/// Canonical states reachable from `root` by single queries, breadth first.
pub fn reachable_states(m: &Structure, root: &State) -> Vec<State> {
    let symbols: Vec<(String, usize)> = m
        .signature()
        .functions()
        .iter()
        .chain(m.signature().predicates())
        .map(|d| (d.name.clone(), d.arity))
        .collect();
    let mut seen: HashSet<State> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([root.clone()]);
    seen.insert(root.clone());
    while let Some(e) = queue.pop_front() {
        for (name, arity) in &symbols {
            for d in Point::all(m.universe(), *arity) {
                let (_, next) = m.query(&e, name, &d).expect("valid query");
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        order.push(e);
    }
    order
}

/// Every atomic subformula occurrence with `a` substituted, kept only if closed.
///
/// Enumerates (subformula, enclosing binders) pairs with an explicit stack,
/// independently of `Formula::atomic_instances`.
pub fn closed_atoms(phi: &Formula, a: &Assignment) -> Vec<Formula> {
    fn subst(t: &Term, a: &Assignment, bound: &[String]) -> Option<Term> {
        match t {
            Term::Var(v) if bound.contains(v) => None,
            Term::Var(v) => a.get(v).map(Term::Elem),
            Term::Apply(f, args) => {
                let args: Option<Vec<Term>> = args.iter().map(|x| subst(x, a, bound)).collect();
                args.map(|args| Term::Apply(f.clone(), args))
            }
            other => Some(other.clone()),
        }
    }
    let mut out: Vec<Formula> = Vec::new();
    let mut stack: Vec<(&Formula, Vec<String>)> = vec![(phi, Vec::new())];
    let mut occurrences = Vec::new();
    while let Some((f, bound)) = stack.pop() {
        match f {
            Formula::Equals(..) | Formula::Atom(..) => occurrences.push((f, bound)),
            Formula::Not(x) => stack.push((x, bound)),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                stack.push((r, bound.clone()));
                stack.push((l, bound));
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let mut inner = bound;
                inner.push(v.clone());
                stack.push((body, inner));
            }
        }
    }
    for (f, bound) in occurrences {
        let inst = match f {
            Formula::Equals(l, r) => match (subst(l, a, &bound), subst(r, a, &bound)) {
                (Some(l), Some(r)) => Some(Formula::Equals(l, r)),
                _ => None,
            },
            Formula::Atom(p, args) => {
                let args: Option<Vec<Term>> = args.iter().map(|x| subst(x, a, &bound)).collect();
                args.map(|args| Formula::Atom(p.clone(), args))
            }
            _ => unreachable!(),
        };
        if let Some(inst) = inst {
            if !out.contains(&inst) {
                out.push(inst);
            }
        }
    }
    out
}

/// A naive evaluator over the states reachable from a root.
pub struct Naive<'m> {
    m: &'m Structure,
    states: Vec<State>,
    up: Vec<Vec<usize>>,
}

impl<'m> Naive<'m> {
    pub fn new(m: &'m Structure, root: &State) -> Self {
        let states = reachable_states(m, root);
        let up = states
            .iter()
            .map(|e| (0..states.len()).filter(|&j| is_prefix_state(e, &states[j])).collect())
            .collect();
        Self { m, states, up }
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn index_of(&self, e: &State) -> Option<usize> {
        self.states.iter().position(|s| s == e)
    }

    fn term(&self, i: usize, t: &Term, a: &Assignment) -> Option<Element> {
        match t {
            Term::Var(v) => Some(a.get(v).expect("assigned variable")),
            Term::Const(c) => self.m.constant(c),
            Term::Elem(x) => Some(*x),
            Term::Apply(f, args) => {
                let coords: Option<Vec<Element>> = args.iter().map(|x| self.term(i, x, a)).collect();
                let index = self.m.signature().function_index(f).expect("declared function");
                let sym = SymbolRef { kind: SymbolKind::Function, index };
                lookup(&self.states[i], sym, &Point(coords?)).map(Element)
            }
        }
    }

    fn relation(&self, i: usize, p: &str, args: &[Term], a: &Assignment) -> Option<u32> {
        let coords: Option<Vec<Element>> = args.iter().map(|x| self.term(i, x, a)).collect();
        let index = self.m.signature().predicate_index(p).expect("declared predicate");
        lookup(&self.states[i], SymbolRef { kind: SymbolKind::Predicate, index }, &Point(coords?))
    }

    fn determined(&self, i: usize, atom: &Formula) -> bool {
        let none = Assignment::new();
        match atom {
            Formula::Equals(l, r) => self.term(i, l, &none).is_some() && self.term(i, r, &none).is_some(),
            Formula::Atom(p, args) => self.relation(i, p, args, &none).is_some(),
            _ => unreachable!(),
        }
    }

    fn all_determined(&self, i: usize, phi: &Formula, a: &Assignment) -> bool {
        closed_atoms(phi, a).iter().all(|atom| self.determined(i, atom))
    }

    fn guarded(&self, i: usize, phi: &Formula, a: &Assignment) -> bool {
        self.up[i].iter().all(|&j| !self.all_determined(j, phi, a) || self.holds(j, phi, a))
    }

    /// Satisfaction at state index `i`.
    pub fn holds(&self, i: usize, phi: &Formula, a: &Assignment) -> bool {
        let up = &self.up[i];
        match phi {
            Formula::Equals(l, r) => up.iter().all(|&j| match (self.term(j, l, a), self.term(j, r, a)) {
                (Some(x), Some(y)) => x == y,
                _ => true,
            }),
            Formula::Atom(p, args) => up.iter().all(|&j| self.relation(j, p, args, a).map_or(true, |v| v == 1)),
            Formula::Not(x) => up.iter().all(|&j| !self.holds(j, x, a)),
            Formula::And(l, r) => self.guarded(i, l, a) && self.guarded(i, r, a),
            Formula::Or(l, r) => self.guarded(i, l, a) || self.guarded(i, r, a),
            Formula::Implies(l, r) => up.iter().all(|&j| {
                let guard = self.all_determined(j, l, a) && self.all_determined(j, r, a);
                !guard || !self.holds(j, l, a) || self.holds(j, r, a)
            }),
            Formula::Forall(v, body) => {
                self.m.universe().iter().all(|&b| self.guarded(i, body, &a.clone().with(v.clone(), b)))
            }
            Formula::Exists(v, body) => {
                self.m.universe().iter().any(|&b| self.guarded(i, body, &a.clone().with(v.clone(), b)))
            }
        }
    }

    pub fn holds_at(&self, e: &State, phi: &Formula) -> bool {
        self.holds(self.index_of(e).expect("state reachable from root"), phi, &Assignment::new())
    }
}

fn lookup(e: &State, sym: SymbolRef, d: &Point) -> Option<u32> {
    e.sequence(sym).iter().find(|(p, _)| p == d).map(|(_, v)| *v)
}

fn is_prefix_state(a: &State, b: &State) -> bool {
    let seqs = |s: &State| -> Vec<Vec<Point>> {
        s.function_sequences()
            .iter()
            .chain(s.predicate_sequences())
            .map(|seq| seq.iter().map(|(p, _)| p.clone()).collect())
            .collect()
    };
    seqs(a).iter().zip(seqs(b).iter()).all(|(x, y)| x.len() <= y.len() && x[..] == y[..x.len()])
}
