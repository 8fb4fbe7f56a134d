//! Satisfaction over raw query strings, duplicates included.
//!
//! A raw state keeps every query a subject made, repeated points and all. The
//! value of a point is `H[s](d)`, computed by walking the string. Futures are
//! all raw extensions inside a length budget: a per-symbol string `t` is kept
//! when `len(t)` plus the number of points it has not touched stays within the
//! budget, so every kept string can still reach full determination.

use std::collections::HashMap;
use std::rc::Rc;

use crate::reference::closed_atoms;
use npmt::{Assignment, DeterminationRule, Element, Formula, Point, State, Structure, SymbolKind, SymbolRef, Term};

/// `H[s]` as a list of (point, value), built one query at a time.
pub fn walk(rule: &DeterminationRule, s: &[Point]) -> Vec<(Point, u32)> {
    let mut h: Vec<(Point, u32)> = Vec::new();
    for d in s {
        if !h.iter().any(|(p, _)| p == d) {
            let v = rule.eval(&h, d);
            h.push((d.clone(), v));
        }
    }
    h
}

pub struct RawSpace<'m> {
    m: &'m Structure,
    symbols: Vec<SymbolRef>,
    /// Per state, per symbol, the raw string.
    states: Vec<Vec<Vec<Point>>>,
    values: Vec<Vec<Vec<(Point, u32)>>>,
    up: Vec<Vec<usize>>,
}

impl<'m> RawSpace<'m> {
    /// All raw states whose per-symbol strings fit within `budget`.
    pub fn new(m: &'m Structure, budget: usize) -> Self {
        let symbols: Vec<SymbolRef> = m.symbols().collect();
        let per_symbol: Vec<Vec<Vec<Point>>> = symbols
            .iter()
            .map(|&sym| {
                let points = Point::all(m.universe(), m.signature().decl(sym).arity);
                let mut out = Vec::new();
                let mut frontier = vec![Vec::<Point>::new()];
                while let Some(s) = frontier.pop() {
                    let touched = points.iter().filter(|p| s.contains(p)).count();
                    if s.len() + (points.len() - touched) > budget {
                        continue;
                    }
                    for p in &points {
                        let mut t = s.clone();
                        t.push(p.clone());
                        frontier.push(t);
                    }
                    out.push(s);
                }
                out
            })
            .collect();
        let mut states: Vec<Vec<Vec<Point>>> = vec![Vec::new()];
        for strings in &per_symbol {
            states = states
                .into_iter()
                .flat_map(|partial| {
                    strings.iter().map(move |s| {
                        let mut next = partial.clone();
                        next.push(s.clone());
                        next
                    })
                })
                .collect();
        }
        let values = states
            .iter()
            .map(|st| symbols.iter().zip(st).map(|(&sym, s)| walk(&m.oracle(sym).rule, s)).collect())
            .collect();
        let up = states
            .iter()
            .map(|a| {
                (0..states.len())
                    .filter(|&j| a.iter().zip(&states[j]).all(|(x, y)| x.len() <= y.len() && x[..] == y[..x.len()]))
                    .collect()
            })
            .collect();
        Self { m, symbols, states, values, up }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The raw strings of state `i`, symbols in layout order.
    pub fn strings(&self, i: usize) -> &[Vec<Point>] {
        &self.states[i]
    }

    /// Whether state `i` repeats some point.
    pub fn has_duplicates(&self, i: usize) -> bool {
        self.states[i].iter().zip(&self.values[i]).any(|(s, h)| s.len() != h.len())
    }

    /// The canonical state with the same first occurrences.
    pub fn canonical(&self, i: usize) -> State {
        let mut functions = Vec::new();
        let mut predicates = Vec::new();
        for (sym, h) in self.symbols.iter().zip(&self.values[i]) {
            let seq = h.iter().map(|(p, _)| p.clone()).collect();
            match sym.kind {
                SymbolKind::Function => functions.push(seq),
                SymbolKind::Predicate => predicates.push(seq),
            }
        }
        self.m.state_from_sequences(functions, predicates).expect("canonical state")
    }

    fn slot(&self, sym: SymbolRef) -> usize {
        self.symbols.iter().position(|s| *s == sym).expect("symbol")
    }

    fn lookup(&self, i: usize, sym: SymbolRef, d: &Point) -> Option<u32> {
        self.values[i][self.slot(sym)].iter().find(|(p, _)| p == d).map(|(_, v)| *v)
    }

    fn term(&self, i: usize, t: &Term, a: &Assignment) -> Option<Element> {
        match t {
            Term::Var(v) => a.get(v),
            Term::Const(c) => self.m.constant(c),
            Term::Elem(x) => Some(*x),
            Term::Apply(f, args) => {
                let coords: Option<Vec<Element>> = args.iter().map(|x| self.term(i, x, a)).collect();
                let index = self.m.signature().function_index(f)?;
                self.lookup(i, SymbolRef { kind: SymbolKind::Function, index }, &Point(coords?)).map(Element)
            }
        }
    }

    fn relation(&self, i: usize, p: &str, args: &[Term], a: &Assignment) -> Option<u32> {
        let coords: Option<Vec<Element>> = args.iter().map(|x| self.term(i, x, a)).collect();
        let index = self.m.signature().predicate_index(p)?;
        self.lookup(i, SymbolRef { kind: SymbolKind::Predicate, index }, &Point(coords?))
    }
}

/// Memoized evaluator over a [`RawSpace`]: whole truth tables per
/// (subformula, assignment restricted to its free variables).
pub struct RawEval<'s, 'm> {
    space: &'s RawSpace<'m>,
    sat: HashMap<(Formula, Assignment), Rc<Vec<bool>>>,
    det: HashMap<(Formula, Assignment), Rc<Vec<bool>>>,
}

fn restrict(phi: &Formula, a: &Assignment) -> Assignment {
    let free = phi.free_variables();
    a.iter().filter(|(v, _)| free.contains(*v)).map(|(v, e)| (v.to_string(), e)).collect()
}

impl<'s, 'm> RawEval<'s, 'm> {
    pub fn new(space: &'s RawSpace<'m>) -> Self {
        Self { space, sat: HashMap::new(), det: HashMap::new() }
    }

    fn all_up(&self, ok: &[bool]) -> Vec<bool> {
        self.space.up.iter().map(|up| up.iter().all(|&j| ok[j])).collect()
    }

    fn determined(&mut self, phi: &Formula, a: &Assignment) -> Rc<Vec<bool>> {
        let key = (phi.clone(), restrict(phi, a));
        if let Some(t) = self.det.get(&key) {
            return t.clone();
        }
        let none = Assignment::new();
        let atoms = closed_atoms(phi, a);
        let space = self.space;
        let table: Vec<bool> = (0..space.len())
            .map(|i| {
                atoms.iter().all(|atom| match atom {
                    Formula::Equals(l, r) => space.term(i, l, &none).is_some() && space.term(i, r, &none).is_some(),
                    Formula::Atom(p, args) => space.relation(i, p, args, &none).is_some(),
                    _ => unreachable!(),
                })
            })
            .collect();
        let table = Rc::new(table);
        self.det.insert(key, table.clone());
        table
    }

    fn guarded(&mut self, phi: &Formula, a: &Assignment) -> Vec<bool> {
        let det = self.determined(phi, a);
        let sat = self.table(phi, a);
        let ok: Vec<bool> = det.iter().zip(sat.iter()).map(|(d, s)| !d || *s).collect();
        self.all_up(&ok)
    }

    /// Satisfaction of `phi` under `a` at every raw state.
    pub fn table(&mut self, phi: &Formula, a: &Assignment) -> Rc<Vec<bool>> {
        let key = (phi.clone(), restrict(phi, a));
        if let Some(t) = self.sat.get(&key) {
            return t.clone();
        }
        let space = self.space;
        let n = space.len();
        let table = match phi {
            Formula::Equals(l, r) => {
                let ok: Vec<bool> = (0..n)
                    .map(|j| match (space.term(j, l, a), space.term(j, r, a)) {
                        (Some(x), Some(y)) => x == y,
                        _ => true,
                    })
                    .collect();
                self.all_up(&ok)
            }
            Formula::Atom(p, args) => {
                let ok: Vec<bool> = (0..n).map(|j| space.relation(j, p, args, a).map_or(true, |v| v == 1)).collect();
                self.all_up(&ok)
            }
            Formula::Not(x) => {
                let inner = self.table(x, a);
                let ok: Vec<bool> = inner.iter().map(|b| !b).collect();
                self.all_up(&ok)
            }
            Formula::And(l, r) => {
                let (gl, gr) = (self.guarded(l, a), self.guarded(r, a));
                gl.iter().zip(&gr).map(|(x, y)| *x && *y).collect()
            }
            Formula::Or(l, r) => {
                let (gl, gr) = (self.guarded(l, a), self.guarded(r, a));
                gl.iter().zip(&gr).map(|(x, y)| *x || *y).collect()
            }
            Formula::Implies(l, r) => {
                let (dl, dr) = (self.determined(l, a), self.determined(r, a));
                let (sl, sr) = (self.table(l, a), self.table(r, a));
                let ok: Vec<bool> = (0..n).map(|j| !(dl[j] && dr[j]) || !sl[j] || sr[j]).collect();
                self.all_up(&ok)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(phi, Formula::Forall(..));
                let mut acc = vec![universal; n];
                for &b in space.m.universe() {
                    let g = self.guarded(body, &a.clone().with(v.clone(), b));
                    for (x, y) in acc.iter_mut().zip(g) {
                        *x = if universal { *x && y } else { *x || y };
                    }
                }
                acc
            }
        };
        let table = Rc::new(table);
        self.sat.insert(key, table.clone());
        table
    }

    pub fn holds(&mut self, i: usize, phi: &Formula) -> bool {
        self.table(phi, &Assignment::new())[i]
    }
}
