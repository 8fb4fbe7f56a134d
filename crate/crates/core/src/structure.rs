//! Subject-dependent structures, their states, and the query protocol.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::oracle::{Codomain, Condition, Oracle, Point, Value};
use crate::syntax::{Element, Signature, SymbolKind, SymbolRef};

/// A finite universe, a signature, one oracle per symbol, and the constants' values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    universe: Vec<Element>,
    signature: Signature,
    functions: Vec<Oracle>,
    predicates: Vec<Oracle>,
    constants: Vec<Element>,
}

impl Structure {
    /// Builds and validates a structure. Oracles and constants are matched to
    /// the signature by name; the universe is sorted.
    pub fn new(
        universe: Vec<Element>,
        signature: Signature,
        oracles: Vec<Oracle>,
        constants: Vec<(String, Element)>,
    ) -> Result<Self, ModelError> {
        let mut universe = universe;
        universe.sort();
        let n = universe.len();
        universe.dedup();
        if universe.is_empty() || universe.len() != n {
            return Err(ModelError::BadUniverse);
        }
        let mut by_name: HashMap<String, Oracle> = HashMap::new();
        for o in oracles {
            let sym = signature.symbol(&o.symbol).ok_or_else(|| ModelError::UnknownSymbol(o.symbol.clone()))?;
            let decl = signature.decl(sym);
            if decl.arity != o.arity {
                return Err(ModelError::ArityMismatch { symbol: o.symbol.clone(), expected: decl.arity, found: o.arity });
            }
            let expected = match sym.kind {
                SymbolKind::Function => Codomain::Universe(universe.clone()),
                SymbolKind::Predicate => Codomain::Truth,
            };
            if o.codomain != expected {
                return Err(ModelError::BadOracle { symbol: o.symbol.clone(), message: "wrong codomain".into() });
            }
            o.validate().map_err(|message| ModelError::BadOracle { symbol: o.symbol.clone(), message })?;
            for clause in &o.rule.clauses {
                for cond in &clause.guard {
                    if let Condition::Determined(p, _) | Condition::Query(p) = cond {
                        if let Some(e) = p.0.iter().find(|e| !universe.contains(e)) {
                            return Err(ModelError::ElementOutsideUniverse(*e));
                        }
                    }
                }
            }
            if by_name.insert(o.symbol.clone(), o).is_some() {
                return Err(ModelError::BadOracle {
                    symbol: signature.decl(sym).name.clone(),
                    message: "given more than once".into(),
                });
            }
        }
        let mut take = |name: &str| by_name.remove(name).ok_or_else(|| ModelError::MissingOracle(name.to_string()));
        let functions = signature.functions().iter().map(|d| take(&d.name)).collect::<Result<Vec<_>, _>>()?;
        let predicates = signature.predicates().iter().map(|d| take(&d.name)).collect::<Result<Vec<_>, _>>()?;

        let mut values = vec![None; signature.constants().len()];
        for (name, e) in constants {
            let idx = signature.constant_index(&name).ok_or(ModelError::UnknownSymbol(name))?;
            if !universe.contains(&e) {
                return Err(ModelError::ElementOutsideUniverse(e));
            }
            values[idx] = Some(e);
        }
        let constants = values
            .into_iter()
            .zip(signature.constants())
            .map(|(v, name)| v.ok_or_else(|| ModelError::MissingConstant(name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { universe, signature, functions, predicates, constants })
    }

    pub fn universe(&self) -> &[Element] {
        &self.universe
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn oracle(&self, sym: SymbolRef) -> &Oracle {
        match sym.kind {
            SymbolKind::Function => &self.functions[sym.index],
            SymbolKind::Predicate => &self.predicates[sym.index],
        }
    }

    pub fn function_oracles(&self) -> &[Oracle] {
        &self.functions
    }

    pub fn predicate_oracles(&self) -> &[Oracle] {
        &self.predicates
    }

    pub fn constant(&self, name: &str) -> Option<Element> {
        self.signature.constant_index(name).map(|i| self.constants[i])
    }

    pub fn constant_values(&self) -> &[Element] {
        &self.constants
    }

    /// All symbols in state layout order: functions, then predicates.
    pub fn symbols(&self) -> impl Iterator<Item = SymbolRef> + '_ {
        (0..self.functions.len())
            .map(|index| SymbolRef { kind: SymbolKind::Function, index })
            .chain((0..self.predicates.len()).map(|index| SymbolRef { kind: SymbolKind::Predicate, index }))
    }

    /// Checks a point against a symbol's arity and the universe.
    pub fn check_point(&self, sym: SymbolRef, d: &Point) -> Result<(), ModelError> {
        let decl = self.signature.decl(sym);
        if d.arity() != decl.arity {
            return Err(ModelError::ArityMismatch { symbol: decl.name.clone(), expected: decl.arity, found: d.arity() });
        }
        match d.0.iter().find(|e| !self.universe.contains(e)) {
            Some(e) => Err(ModelError::ElementOutsideUniverse(*e)),
            None => Ok(()),
        }
    }

    pub fn resolve(&self, symbol: &str) -> Result<SymbolRef, ModelError> {
        self.signature.symbol(symbol).ok_or_else(|| ModelError::UnknownSymbol(symbol.to_string()))
    }

    /// The state in which nothing has been asked yet.
    pub fn initial_state(&self) -> State {
        State { functions: vec![Vec::new(); self.functions.len()], predicates: vec![Vec::new(); self.predicates.len()] }
    }

    /// The subject asks for `symbol` at `d`.
    ///
    /// An already determined point answers with its stored value and leaves the
    /// state unchanged; otherwise the point is appended and the oracle decides.
    pub fn query(&self, e: &State, symbol: &str, d: &Point) -> Result<(Value, State), ModelError> {
        let sym = self.resolve(symbol)?;
        self.query_symbol(e, sym, d)
    }

    pub fn query_symbol(&self, e: &State, sym: SymbolRef, d: &Point) -> Result<(Value, State), ModelError> {
        self.check_shape(e)?;
        self.check_point(sym, d)?;
        if let Some(v) = e.value(sym, d) {
            return Ok((v, e.clone()));
        }
        let history = e.sequence(sym);
        let v = self.oracle(sym).rule.eval(history, d);
        let mut next = e.clone();
        next.sequence_mut(sym).push((d.clone(), v));
        Ok((v, next))
    }

    /// Builds the state reached by asking the given queries in order.
    pub fn replay<'a>(&self, queries: impl IntoIterator<Item = (&'a str, &'a Point)>) -> Result<State, ModelError> {
        let mut e = self.initial_state();
        for (symbol, d) in queries {
            e = self.query(&e, symbol, d)?.1;
        }
        Ok(e)
    }

    /// Builds a state from per-symbol point sequences (functions first, then
    /// predicates), recomputing the values with the oracles.
    pub fn state_from_sequences(&self, functions: Vec<Vec<Point>>, predicates: Vec<Vec<Point>>) -> Result<State, ModelError> {
        if functions.len() != self.functions.len() || predicates.len() != self.predicates.len() {
            return Err(ModelError::ShapeMismatch);
        }
        let mut e = self.initial_state();
        let seqs = functions.into_iter().chain(predicates);
        for (sym, seq) in self.symbols().collect::<Vec<_>>().into_iter().zip(seqs) {
            for d in seq {
                if e.value(sym, &d).is_some() {
                    return Err(ModelError::DuplicatePoint { symbol: self.signature.decl(sym).name.clone(), point: d.to_string() });
                }
                e = self.query_symbol(&e, sym, &d)?.1;
            }
        }
        Ok(e)
    }

    /// Parses a state literal in the printed form, e.g. `([],[⟨(0),(1)⟩])`.
    /// `<`, `>` and `lambda` are accepted for `⟨`, `⟩` and `λ`. Values are
    /// recomputed by the oracles.
    pub fn parse_state(&self, text: &str) -> Result<State, ModelError> {
        let mut r = StateReader { text, pos: 0 };
        r.expect("(")?;
        let functions = r.group()?;
        r.expect(",")?;
        let predicates = r.group()?;
        r.expect(")")?;
        r.skip_ws();
        if r.pos < text.len() {
            return Err(r.error("trailing input"));
        }
        self.state_from_sequences(functions, predicates)
    }

    pub(crate) fn check_shape(&self, e: &State) -> Result<(), ModelError> {
        if e.functions.len() == self.functions.len() && e.predicates.len() == self.predicates.len() {
            Ok(())
        } else {
            Err(ModelError::ShapeMismatch)
        }
    }

    /// Every extension of one symbol's sequence by distinct fresh points, in
    /// depth-first order with points tried in lexicographic order. The
    /// unextended sequence comes first.
    fn extensions(&self, sym: SymbolRef, seq: &[(Point, Value)]) -> Vec<Vec<(Point, Value)>> {
        let all = Point::all(&self.universe, self.signature.decl(sym).arity);
        let rule = &self.oracle(sym).rule;
        let mut out = Vec::new();
        let mut stack = seq.to_vec();
        fn dfs(
            all: &[Point],
            rule: &crate::oracle::DeterminationRule,
            stack: &mut Vec<(Point, Value)>,
            out: &mut Vec<Vec<(Point, Value)>>,
        ) {
            out.push(stack.clone());
            for p in all {
                if stack.iter().any(|(q, _)| q == p) {
                    continue;
                }
                let v = rule.eval(stack, p);
                stack.push((p.clone(), v));
                dfs(all, rule, stack, out);
                stack.pop();
            }
        }
        dfs(&all, rule, &mut stack, &mut out);
        out
    }

    /// All canonical states `e2` with `e <= e2`, starting with `e` itself.
    ///
    /// Symbols vary in state layout order with the first symbol slowest; each
    /// symbol's extensions come in depth-first lexicographic order.
    pub fn futures(&self, e: &State) -> Vec<State> {
        let per_symbol: Vec<(SymbolRef, Vec<Vec<(Point, Value)>>)> =
            self.symbols().map(|sym| (sym, self.extensions(sym, e.sequence(sym)))).collect();
        let mut out = vec![self.initial_state()];
        for (sym, exts) in per_symbol {
            out = out
                .into_iter()
                .flat_map(|partial| {
                    exts.iter().map(move |ext| {
                        let mut s = partial.clone();
                        *s.sequence_mut(sym) = ext.clone();
                        s
                    })
                })
                .collect();
        }
        out
    }

    /// `futures(e).len()` without building the states.
    pub fn futures_count(&self, e: &State) -> u128 {
        self.symbols()
            .map(|sym| {
                let total = (self.universe.len() as u128).pow(self.signature.decl(sym).arity as u32);
                let r = total - e.sequence(sym).len() as u128;
                // sum over k of r!/(r-k)!
                let mut sum = 0u128;
                let mut term = 1u128;
                for k in 0..=r {
                    sum = sum.saturating_add(term);
                    term = term.saturating_mul(r - k);
                }
                sum
            })
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }
}

/// Per-symbol determination sequences: for each symbol, the distinct points
/// asked so far, in order, with the value the oracle gave each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    functions: Vec<Vec<(Point, Value)>>,
    predicates: Vec<Vec<(Point, Value)>>,
}

impl State {
    pub fn sequence(&self, sym: SymbolRef) -> &[(Point, Value)] {
        match sym.kind {
            SymbolKind::Function => &self.functions[sym.index],
            SymbolKind::Predicate => &self.predicates[sym.index],
        }
    }

    fn sequence_mut(&mut self, sym: SymbolRef) -> &mut Vec<(Point, Value)> {
        match sym.kind {
            SymbolKind::Function => &mut self.functions[sym.index],
            SymbolKind::Predicate => &mut self.predicates[sym.index],
        }
    }

    /// The determined value of `sym` at `d`, if `d` has been asked.
    pub fn value(&self, sym: SymbolRef, d: &Point) -> Option<Value> {
        self.sequence(sym).iter().find(|(p, _)| p == d).map(|(_, v)| *v)
    }

    pub fn function_sequences(&self) -> &[Vec<(Point, Value)>] {
        &self.functions
    }

    pub fn predicate_sequences(&self) -> &[Vec<(Point, Value)>] {
        &self.predicates
    }

    /// Total number of determined points.
    pub fn len(&self) -> usize {
        self.functions.iter().chain(&self.predicates).map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Prefix order: every sequence of `self` is a prefix of the matching one in `other`.
    pub fn leq(&self, other: &State) -> Result<bool, ModelError> {
        if self.functions.len() != other.functions.len() || self.predicates.len() != other.predicates.len() {
            return Err(ModelError::ShapeMismatch);
        }
        let prefix = |a: &Vec<(Point, Value)>, b: &Vec<(Point, Value)>| {
            a.len() <= b.len() && a.iter().zip(b).all(|((p, _), (q, _))| p == q)
        };
        Ok(self.functions.iter().zip(&other.functions).all(|(a, b)| prefix(a, b))
            && self.predicates.iter().zip(&other.predicates).all(|(a, b)| prefix(a, b)))
    }
}

struct StateReader<'t> {
    text: &'t str,
    pos: usize,
}

impl StateReader<'_> {
    fn error(&self, message: &str) -> ModelError {
        ModelError::BadStateLiteral { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ModelError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn group(&mut self) -> Result<Vec<Vec<Point>>, ModelError> {
        self.expect("[")?;
        let mut seqs = Vec::new();
        if self.eat("]") {
            return Ok(seqs);
        }
        loop {
            seqs.push(self.sequence()?);
            if self.eat("]") {
                return Ok(seqs);
            }
            self.expect(",")?;
        }
    }

    fn sequence(&mut self) -> Result<Vec<Point>, ModelError> {
        if self.eat("λ") || self.eat("lambda") {
            return Ok(Vec::new());
        }
        let close = if self.eat("⟨") {
            "⟩"
        } else if self.eat("<") {
            ">"
        } else {
            return Err(self.error("expected a sequence"));
        };
        let mut points = Vec::new();
        loop {
            points.push(self.point()?);
            if self.eat(close) {
                return Ok(points);
            }
            self.expect(",")?;
        }
    }

    fn point(&mut self) -> Result<Point, ModelError> {
        self.expect("(")?;
        let mut coords = Vec::new();
        if self.eat(")") {
            return Ok(Point(coords));
        }
        loop {
            self.skip_ws();
            let rest = &self.text[self.pos..];
            let digits = rest.len() - rest.trim_start_matches(|c: char| c.is_ascii_digit()).len();
            let n: u32 = rest[..digits].parse().map_err(|_| self.error("expected an element"))?;
            self.pos += digits;
            coords.push(Element(n));
            if self.eat(")") {
                return Ok(Point(coords));
            }
            self.expect(",")?;
        }
    }
}

/// `e <= e2` in the prefix order.
pub fn state_leq(e: &State, e2: &State) -> Result<bool, ModelError> {
    e.leq(e2)
}

impl fmt::Display for State {
    /// Renders as `([s_1, ...], [s'_1, ...])`, with `λ` for empty sequences.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn group(f: &mut fmt::Formatter<'_>, seqs: &[Vec<(Point, Value)>]) -> fmt::Result {
            f.write_str("[")?;
            for (i, seq) in seqs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                if seq.is_empty() {
                    f.write_str("λ")?;
                } else {
                    f.write_str("⟨")?;
                    for (j, (p, _)) in seq.iter().enumerate() {
                        if j > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{p}")?;
                    }
                    f.write_str("⟩")?;
                }
            }
            f.write_str("]")
        }
        f.write_str("(")?;
        group(f, &self.functions)?;
        f.write_str(",")?;
        group(f, &self.predicates)?;
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Clause, DeterminationRule};
    use crate::syntax::SymbolDecl;

    fn p(e: u32) -> Point {
        Point::new([e])
    }

    fn example() -> Structure {
        let rule = DeterminationRule {
            clauses: vec![
                Clause { guard: vec![Condition::Count(0), Condition::Query(p(0))], value: 1 },
                Clause { guard: vec![Condition::Count(0), Condition::Query(p(1))], value: 1 },
                Clause { guard: vec![Condition::Determined(p(1), 1), Condition::Query(p(0))], value: 0 },
                Clause { guard: vec![Condition::Determined(p(0), 1), Condition::Query(p(1))], value: 0 },
            ],
            default: 0,
        };
        let sig = Signature::new(vec![], vec![SymbolDecl::new("R1", 1)], vec![]).unwrap();
        Structure::new(vec![Element(0), Element(1)], sig, vec![Oracle::new("R1", 1, Codomain::Truth, rule)], vec![])
            .unwrap()
    }

    #[test]
    fn initial_state_rendering() {
        let m = example();
        assert_eq!(m.initial_state().to_string(), "([],[λ])");
    }

    #[test]
    fn query_protocol_example() {
        let m = example();
        let e0 = m.initial_state();
        let (v, e1) = m.query(&e0, "R1", &p(0)).unwrap();
        assert_eq!((v, e1.to_string().as_str()), (1, "([],[⟨(0)⟩])"));
        let (v, e2) = m.query(&e1, "R1", &p(1)).unwrap();
        assert_eq!((v, e2.to_string().as_str()), (0, "([],[⟨(0),(1)⟩])"));
        let (v, same) = m.query(&e1, "R1", &p(0)).unwrap();
        assert_eq!(v, 1);
        assert_eq!(same, e1);
    }

    #[test]
    fn query_errors() {
        let m = example();
        let e = m.initial_state();
        assert_eq!(m.query(&e, "Q", &p(0)).unwrap_err(), ModelError::UnknownSymbol("Q".into()));
        assert!(matches!(m.query(&e, "R1", &Point::new([0, 1])), Err(ModelError::ArityMismatch { .. })));
        assert_eq!(m.query(&e, "R1", &p(7)).unwrap_err(), ModelError::ElementOutsideUniverse(Element(7)));
    }

    #[test]
    fn leq_examples() {
        let m = example();
        let e0 = m.initial_state();
        let e1 = m.query(&e0, "R1", &p(0)).unwrap().1;
        let e10 = m.replay([("R1", &p(1)), ("R1", &p(0))]).unwrap();
        assert!(state_leq(&e0, &e1).unwrap());
        assert!(!state_leq(&e1, &e10).unwrap());
        assert!(state_leq(&e10, &e10).unwrap());
    }

    #[test]
    fn futures_of_example() {
        let m = example();
        let fs: Vec<String> = m.futures(&m.initial_state()).iter().map(ToString::to_string).collect();
        assert_eq!(fs, ["([],[λ])", "([],[⟨(0)⟩])", "([],[⟨(0),(1)⟩])", "([],[⟨(1)⟩])", "([],[⟨(1),(0)⟩])"]);
        let full = m.replay([("R1", &p(0)), ("R1", &p(1))]).unwrap();
        assert_eq!(m.futures(&full), vec![full.clone()]);
        assert_eq!(m.futures_count(&m.initial_state()), 5);
    }

    #[test]
    fn state_from_sequences_rejects_duplicates() {
        let m = example();
        let err = m.state_from_sequences(vec![], vec![vec![p(0), p(0)]]).unwrap_err();
        assert!(matches!(err, ModelError::DuplicatePoint { .. }));
        let e = m.state_from_sequences(vec![], vec![vec![p(1), p(0)]]).unwrap();
        assert_eq!(e.value(m.resolve("R1").unwrap(), &p(0)), Some(0));
    }

    #[test]
    fn structure_validation() {
        let sig = Signature::new(vec![SymbolDecl::new("f", 1)], vec![], vec!["c".into()]).unwrap();
        let f = Oracle::new("f", 1, Codomain::Universe(vec![Element(0), Element(1)]), DeterminationRule::constant(1));
        let missing_const = Structure::new(vec![Element(0), Element(1)], sig.clone(), vec![f.clone()], vec![]);
        assert_eq!(missing_const.unwrap_err(), ModelError::MissingConstant("c".into()));
        let missing_oracle = Structure::new(vec![Element(0), Element(1)], sig.clone(), vec![], vec![("c".into(), Element(0))]);
        assert_eq!(missing_oracle.unwrap_err(), ModelError::MissingOracle("f".into()));
        let bad_value = Oracle::new("f", 1, Codomain::Universe(vec![Element(0)]), DeterminationRule::constant(1));
        assert!(Structure::new(vec![Element(0)], sig, vec![bad_value], vec![("c".into(), Element(0))]).is_err());
    }
}
