//! Random rules, structures, states and formulas.

use rand::seq::SliceRandom;
use rand::Rng;

use npmt::{
    Clause, Codomain, Condition, DeterminationRule, Element, Formula, Oracle, Point, Signature, State, Structure,
    SymbolDecl, Term, Value,
};

pub fn universe(n: u32) -> Vec<Element> {
    (0..n).map(Element).collect()
}

/// A rule with at most `max_clauses` clauses, each with 1..=`max_guard` conditions.
pub fn random_rule<R: Rng>(
    rng: &mut R,
    universe: &[Element],
    arity: usize,
    values: &[Value],
    max_clauses: usize,
    max_guard: usize,
) -> DeterminationRule {
    let points = Point::all(universe, arity);
    let condition = |rng: &mut R| match rng.gen_range(0..3) {
        0 => Condition::Count(rng.gen_range(0..points.len())),
        1 => Condition::Determined(points.choose(rng).unwrap().clone(), *values.choose(rng).unwrap()),
        _ => Condition::Query(points.choose(rng).unwrap().clone()),
    };
    let clauses = (0..rng.gen_range(0..=max_clauses))
        .map(|_| Clause {
            guard: (0..rng.gen_range(1..=max_guard.max(1))).map(|_| condition(rng)).collect(),
            value: *values.choose(rng).unwrap(),
        })
        .collect();
    DeterminationRule { clauses, default: *values.choose(rng).unwrap() }
}

/// Shape of a random structure.
#[derive(Clone, Debug)]
pub struct Shape {
    pub universe: u32,
    pub predicates: Vec<(String, usize)>,
    pub functions: Vec<(String, usize)>,
    pub constants: Vec<String>,
    pub max_clauses: usize,
    pub max_guard: usize,
}

impl Shape {
    /// `k` unary predicates `R1..Rk` and nothing else.
    pub fn unary(universe: u32, k: usize, max_clauses: usize, max_guard: usize) -> Self {
        Self {
            universe,
            predicates: (1..=k).map(|i| (format!("R{i}"), 1)).collect(),
            functions: Vec::new(),
            constants: Vec::new(),
            max_clauses,
            max_guard,
        }
    }
}

pub fn random_structure<R: Rng>(rng: &mut R, shape: &Shape) -> Structure {
    let u = universe(shape.universe);
    let decls = |v: &[(String, usize)]| v.iter().map(|(n, a)| SymbolDecl::new(n.clone(), *a)).collect::<Vec<_>>();
    let sig = Signature::new(decls(&shape.functions), decls(&shape.predicates), shape.constants.clone())
        .expect("valid shape");
    let elems: Vec<Value> = u.iter().map(|e| e.0).collect();
    let mut oracles = Vec::new();
    for (name, arity) in &shape.functions {
        let rule = random_rule(rng, &u, *arity, &elems, shape.max_clauses, shape.max_guard);
        oracles.push(Oracle::new(name.clone(), *arity, Codomain::Universe(u.clone()), rule));
    }
    for (name, arity) in &shape.predicates {
        let rule = random_rule(rng, &u, *arity, &[0, 1], shape.max_clauses, shape.max_guard);
        oracles.push(Oracle::new(name.clone(), *arity, Codomain::Truth, rule));
    }
    let constants = shape.constants.iter().map(|c| (c.clone(), *u.choose(rng).unwrap())).collect();
    Structure::new(u, sig, oracles, constants).expect("valid random structure")
}

/// A state reached by `queries` random queries from the initial state.
pub fn random_state<R: Rng>(rng: &mut R, m: &Structure, queries: usize) -> State {
    let decls: Vec<SymbolDecl> =
        m.signature().functions().iter().chain(m.signature().predicates()).cloned().collect();
    let mut e = m.initial_state();
    for _ in 0..queries {
        let d = decls.choose(rng).unwrap();
        let point = Point::all(m.universe(), d.arity).choose(rng).unwrap().clone();
        e = m.query(&e, &d.name, &point).expect("valid query").1;
    }
    e
}

const VARS: [&str; 2] = ["x", "y"];

fn random_term<R: Rng>(rng: &mut R, sig: &Signature, universe: &[Element], scope: &[String], nest: bool) -> Term {
    let roll = rng.gen_range(0..10);
    if roll < 3 && !scope.is_empty() {
        return Term::Var(scope.choose(rng).unwrap().clone());
    }
    if roll < 5 && !sig.constants().is_empty() {
        return Term::Const(sig.constants().choose(rng).unwrap().clone());
    }
    if roll < 7 && nest && !sig.functions().is_empty() {
        let f = sig.functions().choose(rng).unwrap();
        let args = (0..f.arity).map(|_| random_term(rng, sig, universe, scope, false)).collect();
        return Term::Apply(f.name.clone(), args);
    }
    Term::Elem(*universe.choose(rng).unwrap())
}

fn random_atom<R: Rng>(rng: &mut R, sig: &Signature, universe: &[Element], scope: &[String]) -> Formula {
    if sig.predicates().is_empty() || rng.gen_bool(0.25) {
        let l = random_term(rng, sig, universe, scope, true);
        let r = random_term(rng, sig, universe, scope, true);
        return Formula::Equals(l, r);
    }
    let p = sig.predicates().choose(rng).unwrap();
    let args = (0..p.arity).map(|_| random_term(rng, sig, universe, scope, true)).collect();
    Formula::Atom(p.name.clone(), args)
}

fn random_open<R: Rng>(rng: &mut R, sig: &Signature, universe: &[Element], depth: usize, scope: &[String]) -> Formula {
    if depth <= 1 || rng.gen_bool(0.2) {
        return random_atom(rng, sig, universe, scope);
    }
    let sub = |rng: &mut R, scope: &[String]| random_open(rng, sig, universe, depth - 1, scope);
    match rng.gen_range(0..6) {
        0 => Formula::not(sub(rng, scope)),
        1 => Formula::and(sub(rng, scope), sub(rng, scope)),
        2 => Formula::or(sub(rng, scope), sub(rng, scope)),
        3 => Formula::implies(sub(rng, scope), sub(rng, scope)),
        k => {
            let v = VARS.choose(rng).unwrap().to_string();
            let mut inner = scope.to_vec();
            if !inner.contains(&v) {
                inner.push(v.clone());
            }
            let body = sub(rng, &inner);
            if k == 4 {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            }
        }
    }
}

/// A closed formula of depth at most `depth` (atoms have depth 1).
pub fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, universe: &[Element], depth: usize) -> Formula {
    random_open(rng, sig, universe, depth, &[])
}
