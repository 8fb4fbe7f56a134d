//! Exhaustive enumerations for the small-instance suites.

use npmt::{Clause, Codomain, Condition, DeterminationRule, Element, Formula, Oracle, Point, Signature, Structure, SymbolDecl, Term, Value};

/// Every closed formula of depth at most `depth` over `predicates`, the
/// universe elements as parameters and the single variable `x`.
///
/// Atoms have depth 1. Equalities are kept only with the left term ordered
/// before the right one, so `1 = 0` is dropped in favour of `0 = 1`.
/// Quantifiers may re-bind `x`.
pub fn closed_formulas(predicates: &[(&str, usize)], universe: &[Element], depth: usize) -> Vec<Formula> {
    levels(predicates, universe, depth, false)
}

fn atoms(predicates: &[(&str, usize)], universe: &[Element], scoped: bool) -> Vec<Formula> {
    let mut terms: Vec<Term> = universe.iter().map(|&e| Term::Elem(e)).collect();
    if scoped {
        terms.push(Term::var("x"));
    }
    let mut out = Vec::new();
    for (i, l) in terms.iter().enumerate() {
        for r in &terms[i..] {
            out.push(Formula::Equals(l.clone(), r.clone()));
        }
    }
    for (p, arity) in predicates {
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for _ in 0..*arity {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    terms.iter().map(move |x| {
                        let mut next = t.clone();
                        next.push(x.clone());
                        next
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|args| Formula::Atom(p.to_string(), args)));
    }
    out
}

fn levels(predicates: &[(&str, usize)], universe: &[Element], depth: usize, scoped: bool) -> Vec<Formula> {
    if depth <= 1 {
        return atoms(predicates, universe, scoped);
    }
    let below = levels(predicates, universe, depth - 1, scoped);
    let inner = levels(predicates, universe, depth - 1, true);
    let mut out = below.clone();
    out.extend(below.iter().map(|f| Formula::not(f.clone())));
    for l in &below {
        for r in &below {
            out.push(Formula::and(l.clone(), r.clone()));
            out.push(Formula::or(l.clone(), r.clone()));
            out.push(Formula::implies(l.clone(), r.clone()));
        }
    }
    for body in &inner {
        out.push(Formula::forall("x", body.clone()));
        out.push(Formula::exists("x", body.clone()));
    }
    out.sort();
    out.dedup();
    out
}

/// Value tree of a rule: the value at every canonical history, depth first
/// over points in lexicographic order.
pub fn behavior(rule: &DeterminationRule, universe: &[Element], arity: usize) -> Vec<Value> {
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

/// One rule per behavior of a unary truth-valued symbol, over universe size 1 or 2.
///
/// Over `{0, 1}` a behavior is fixed by four values: the first answer for
/// `(0)`, the answer for `(1)` after it, the first answer for `(1)`, and the
/// answer for `(0)` after it. Three clauses and a default cover all 16.
pub fn unary_rules(universe_size: u32) -> Vec<DeterminationRule> {
    let p = |i: u32| Point::new([i]);
    match universe_size {
        1 => (0..2).map(DeterminationRule::constant).collect(),
        2 => (0..16u32)
            .map(|bits| {
                let bit = |k: u32| (bits >> k) & 1;
                DeterminationRule {
                    clauses: vec![
                        Clause { guard: vec![Condition::Count(0), Condition::Query(p(0))], value: bit(0) },
                        Clause { guard: vec![Condition::Count(0), Condition::Query(p(1))], value: bit(2) },
                        Clause { guard: vec![Condition::Query(p(1))], value: bit(1) },
                    ],
                    default: bit(3),
                }
            })
            .collect(),
        _ => panic!("unary_rules covers universes of size 1 and 2"),
    }
}

/// Structures over `{0..n}` with one unary predicate `R1` driven by `rule`.
pub fn unary_structure(universe_size: u32, rule: DeterminationRule) -> Structure {
    let u: Vec<Element> = (0..universe_size).map(Element).collect();
    let sig = Signature::new(vec![], vec![SymbolDecl::new("R1", 1)], vec![]).expect("signature");
    Structure::new(u, sig, vec![Oracle::new("R1", 1, Codomain::Truth, rule)], vec![]).expect("structure")
}

/// Every structure with universe size at most 2 and one unary predicate, up
/// to oracle behavior.
pub fn small_unary_structures() -> Vec<Structure> {
    (1..=2).flat_map(|n| unary_rules(n).into_iter().map(move |r| unary_structure(n, r))).collect()
}

/// All rules over `conditions` with at most `max_clauses` clauses, guards of
/// 1..=`max_guard` distinct conditions in increasing order, and any values.
pub fn all_rules(conditions: &[Condition], values: &[Value], max_clauses: usize, max_guard: usize) -> Vec<DeterminationRule> {
    let mut guards: Vec<Vec<Condition>> = vec![Vec::new()];
    let mut all_guards = Vec::new();
    for _ in 0..max_guard {
        guards = guards
            .into_iter()
            .flat_map(|g| {
                let start = g.last().map_or(0, |last| conditions.iter().position(|c| c == last).unwrap() + 1);
                conditions[start..].iter().map(move |c| {
                    let mut next = g.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
        all_guards.extend(guards.iter().cloned());
    }
    let clauses: Vec<Clause> = all_guards
        .iter()
        .flat_map(|g| values.iter().map(move |&value| Clause { guard: g.clone(), value }))
        .collect();
    let mut lists: Vec<Vec<Clause>> = vec![Vec::new()];
    let mut out = Vec::new();
    for k in 0..=max_clauses {
        if k > 0 {
            lists = lists
                .into_iter()
                .flat_map(|l| {
                    clauses.iter().map(move |c| {
                        let mut next = l.clone();
                        next.push(c.clone());
                        next
                    })
                })
                .collect();
        }
        for l in &lists {
            for &default in values {
                out.push(DeterminationRule { clauses: l.clone(), default });
            }
        }
    }
    out
}
