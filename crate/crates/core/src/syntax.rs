//! First-order language: signatures, terms, formulas and assignments.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SignatureError;

/// A member of a finite universe. Universes are ordered by the wrapped integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub u32);

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A function or predicate symbol together with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolDecl {
    pub name: String,
    pub arity: usize,
}

impl SymbolDecl {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self { name: name.into(), arity }
    }
}

/// Which family a symbol belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Function,
    Predicate,
}

/// Reference to a declared symbol by family and declaration index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolRef {
    pub kind: SymbolKind,
    pub index: usize,
}

/// The language: function symbols, predicate symbols and constants.
///
/// Declaration order is significant. It fixes the index each symbol's query
/// sequence has inside a [`State`](crate::State).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    functions: Vec<SymbolDecl>,
    predicates: Vec<SymbolDecl>,
    constants: Vec<String>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !matches!(name, "forall" | "exists")
}

impl Signature {
    pub fn new(
        functions: Vec<SymbolDecl>,
        predicates: Vec<SymbolDecl>,
        constants: Vec<String>,
    ) -> Result<Self, SignatureError> {
        let mut seen = HashSet::new();
        let names = functions
            .iter()
            .chain(predicates.iter())
            .map(|d| d.name.as_str())
            .chain(constants.iter().map(String::as_str));
        for name in names {
            if !is_identifier(name) {
                return Err(SignatureError::InvalidName(name.to_string()));
            }
            if !seen.insert(name) {
                return Err(SignatureError::DuplicateName(name.to_string()));
            }
        }
        for decl in functions.iter().chain(predicates.iter()) {
            if decl.arity == 0 {
                return Err(SignatureError::ZeroArity(decl.name.clone()));
            }
        }
        Ok(Self { functions, predicates, constants })
    }

    pub fn functions(&self) -> &[SymbolDecl] {
        &self.functions
    }

    pub fn predicates(&self) -> &[SymbolDecl] {
        &self.predicates
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|d| d.name == name)
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|d| d.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    /// Resolves a function or predicate name.
    pub fn symbol(&self, name: &str) -> Option<SymbolRef> {
        if let Some(index) = self.function_index(name) {
            return Some(SymbolRef { kind: SymbolKind::Function, index });
        }
        self.predicate_index(name)
            .map(|index| SymbolRef { kind: SymbolKind::Predicate, index })
    }

    pub fn decl(&self, sym: SymbolRef) -> &SymbolDecl {
        match sym.kind {
            SymbolKind::Function => &self.functions[sym.index],
            SymbolKind::Predicate => &self.predicates[sym.index],
        }
    }

    /// Infers the smallest signature under which every formula is well formed.
    ///
    /// Applied names become predicates (atom position) or functions (term
    /// position) in order of first appearance; free identifiers become
    /// constants. Fails if a name is used inconsistently.
    pub fn infer<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Result<Self, SignatureError> {
        #[derive(Default)]
        struct Acc {
            functions: Vec<SymbolDecl>,
            predicates: Vec<SymbolDecl>,
            constants: Vec<String>,
        }
        fn note(list: &mut Vec<SymbolDecl>, name: &str, arity: usize) -> Result<(), SignatureError> {
            match list.iter().find(|d| d.name == name) {
                Some(d) if d.arity != arity => Err(SignatureError::InconsistentArity(name.to_string())),
                Some(_) => Ok(()),
                None => {
                    list.push(SymbolDecl::new(name, arity));
                    Ok(())
                }
            }
        }
        fn term(acc: &mut Acc, t: &Term, bound: &[String]) -> Result<(), SignatureError> {
            match t {
                Term::Var(v) | Term::Const(v) => {
                    if !bound.contains(v) && !acc.constants.contains(v) {
                        acc.constants.push(v.clone());
                    }
                }
                Term::Elem(_) => {}
                Term::Apply(f, args) => {
                    note(&mut acc.functions, f, args.len())?;
                    for a in args {
                        term(acc, a, bound)?;
                    }
                }
            }
            Ok(())
        }
        fn walk(acc: &mut Acc, phi: &Formula, bound: &mut Vec<String>) -> Result<(), SignatureError> {
            match phi {
                Formula::Equals(l, r) => {
                    term(acc, l, bound)?;
                    term(acc, r, bound)
                }
                Formula::Atom(p, args) => {
                    note(&mut acc.predicates, p, args.len())?;
                    args.iter().try_for_each(|a| term(acc, a, bound))
                }
                Formula::Not(inner) => walk(acc, inner, bound),
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                    walk(acc, l, bound)?;
                    walk(acc, r, bound)
                }
                Formula::Forall(v, body) | Formula::Exists(v, body) => {
                    bound.push(v.clone());
                    let out = walk(acc, body, bound);
                    bound.pop();
                    out
                }
            }
        }
        let mut acc = Acc::default();
        for phi in formulas {
            walk(&mut acc, phi, &mut Vec::new())?;
        }
        Signature::new(acc.functions, acc.predicates, acc.constants)
    }
}

/// A term: variable, constant, universe element literal, or function application.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
    /// A universe element used as a parameter, e.g. the `0` in `R1(0)`.
    Elem(Element),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn elem(e: u32) -> Self {
        Term::Elem(Element(e))
    }

    pub fn apply(f: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Apply(f.into(), args)
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Elem(_) => true,
            Term::Apply(_, args) => args.iter().all(Term::is_closed),
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Const(_) | Term::Elem(_) => {}
            Term::Apply(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Replaces variables that are not in `bound` by their value in `a`.
    fn substitute(&self, a: &Assignment, bound: &[&str]) -> Term {
        match self {
            Term::Var(v) if !bound.contains(&v.as_str()) => match a.get(v) {
                Some(e) => Term::Elem(e),
                None => self.clone(),
            },
            Term::Apply(f, args) => {
                Term::Apply(f.clone(), args.iter().map(|t| t.substitute(a, bound)).collect())
            }
            _ => self.clone(),
        }
    }
}

/// A first-order formula with equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Equals(Term, Term),
    Atom(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(p: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom(p.into(), args)
    }

    pub fn equals(l: Term, r: Term) -> Self {
        Formula::Equals(l, r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Formula) -> Self {
        Formula::Not(Box::new(inner))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(body))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Equals(..) | Formula::Atom(..))
    }

    /// Nesting depth; atoms have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Equals(..) | Formula::Atom(..) => 1,
            Formula::Not(inner) | Formula::Forall(_, inner) | Formula::Exists(_, inner) => 1 + inner.depth(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut terms = Vec::new();
        match self {
            Formula::Equals(l, r) => {
                l.collect_vars(&mut terms);
                r.collect_vars(&mut terms);
            }
            Formula::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(&mut terms)),
            Formula::Not(inner) => inner.collect_free(bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                bound.push(v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
        for v in terms {
            if !bound.contains(&v) {
                out.insert(v.to_string());
            }
        }
    }

    /// The closed atomic subformulas of `self` after applying `a` to its free
    /// variables, in order of first occurrence and without repeats.
    ///
    /// Atoms that still mention a quantifier-bound (or unassigned) variable
    /// are left out.
    pub fn atomic_instances(&self, a: &Assignment) -> Vec<Formula> {
        fn walk<'a>(phi: &'a Formula, a: &Assignment, bound: &mut Vec<&'a str>, out: &mut Vec<Formula>) {
            let inst = match phi {
                Formula::Equals(l, r) => Formula::Equals(l.substitute(a, bound), r.substitute(a, bound)),
                Formula::Atom(p, args) => {
                    Formula::Atom(p.clone(), args.iter().map(|t| t.substitute(a, bound)).collect())
                }
                Formula::Not(inner) => return walk(inner, a, bound, out),
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                    walk(l, a, bound, out);
                    return walk(r, a, bound, out);
                }
                Formula::Forall(v, body) | Formula::Exists(v, body) => {
                    bound.push(v);
                    walk(body, a, bound, out);
                    bound.pop();
                    return;
                }
            };
            if inst.is_closed() && !out.contains(&inst) {
                out.push(inst);
            }
        }
        let mut out = Vec::new();
        walk(self, a, &mut Vec::new(), &mut out);
        out
    }
}

/// Partial map from variable names to universe elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(BTreeMap<String, Element>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<Element> {
        self.0.get(var).copied()
    }

    pub fn with(mut self, var: impl Into<String>, e: Element) -> Self {
        self.0.insert(var.into(), e);
        self
    }

    pub fn insert(&mut self, var: impl Into<String>, e: Element) -> Option<Element> {
        self.0.insert(var.into(), e)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Element)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, Element)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, Element)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Elem(e) => write!(f, "{e}"),
            Term::Apply(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

// Binding strength used by the printer; mirrors the parser.
const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 4;

impl Formula {
    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => PREC_IMPLIES,
            Formula::Or(..) => PREC_OR,
            Formula::And(..) => PREC_AND,
            _ => PREC_UNARY,
        }
    }

    /// `open_tail`: nothing follows this formula in its context, so a bare
    /// quantifier (whose body extends rightward) may be printed without parens.
    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8, open_tail: bool) -> fmt::Result {
        let quantifier = matches!(self, Formula::Forall(..) | Formula::Exists(..));
        if self.precedence() < min_prec || (quantifier && !open_tail) {
            f.write_str("(")?;
            self.write_prec(f, PREC_IMPLIES, true)?;
            return f.write_str(")");
        }
        match self {
            Formula::Equals(l, r) => write!(f, "{l} = {r}"),
            Formula::Atom(p, args) => write!(f, "{}", Term::Apply(p.clone(), args.clone())),
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.write_prec(f, PREC_UNARY, open_tail)
            }
            Formula::And(l, r) => {
                l.write_prec(f, PREC_AND, false)?;
                f.write_str(" & ")?;
                r.write_prec(f, PREC_UNARY, open_tail)
            }
            Formula::Or(l, r) => {
                l.write_prec(f, PREC_OR, false)?;
                f.write_str(" | ")?;
                r.write_prec(f, PREC_AND, open_tail)
            }
            Formula::Implies(l, r) => {
                l.write_prec(f, PREC_OR, false)?;
                f.write_str(" -> ")?;
                r.write_prec(f, PREC_IMPLIES, open_tail)
            }
            Formula::Forall(v, body) => {
                write!(f, "forall {v}. ")?;
                body.write_prec(f, PREC_IMPLIES, open_tail)
            }
            Formula::Exists(v, body) => {
                write!(f, "exists {v}. ")?;
                body.write_prec(f, PREC_IMPLIES, open_tail)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, PREC_IMPLIES, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1(t: Term) -> Formula {
        Formula::atom("R1", vec![t])
    }

    #[test]
    fn signature_rejects_duplicates_and_nullary() {
        let dup = Signature::new(vec![SymbolDecl::new("f", 1)], vec![SymbolDecl::new("f", 1)], vec![]);
        assert_eq!(dup, Err(SignatureError::DuplicateName("f".into())));
        let nullary = Signature::new(vec![SymbolDecl::new("f", 0)], vec![], vec![]);
        assert_eq!(nullary, Err(SignatureError::ZeroArity("f".into())));
        let clash = Signature::new(vec![], vec![SymbolDecl::new("R", 1)], vec!["R".into()]);
        assert!(clash.is_err());
    }

    #[test]
    fn free_variables_examples() {
        assert_eq!(r1(Term::var("x")).free_variables(), ["x".to_string()].into());
        assert!(Formula::forall("x", r1(Term::var("x"))).free_variables().is_empty());
        let shadow = Formula::and(
            r1(Term::var("x")),
            Formula::exists(
                "x",
                Formula::equals(Term::apply("f", vec![Term::var("x")]), Term::var("y")),
            ),
        );
        assert_eq!(shadow.free_variables(), ["x".to_string(), "y".to_string()].into());
    }

    #[test]
    fn atomic_instances_examples() {
        let both = Formula::and(r1(Term::elem(0)), r1(Term::elem(1)));
        assert_eq!(both.atomic_instances(&Assignment::new()), vec![r1(Term::elem(0)), r1(Term::elem(1))]);

        let open = r1(Term::var("x"));
        let a = Assignment::new().with("x", Element(0));
        assert_eq!(open.atomic_instances(&a), vec![r1(Term::elem(0))]);

        let mixed = Formula::exists("y", Formula::and(r1(Term::var("y")), r1(Term::var("x"))));
        let a = Assignment::new().with("x", Element(1));
        assert_eq!(mixed.atomic_instances(&a), vec![r1(Term::elem(1))]);
    }

    #[test]
    fn atomic_instances_respect_shadowing() {
        // The outer x is assigned; the inner x is bound and must stay out.
        let phi = Formula::and(r1(Term::var("x")), Formula::forall("x", r1(Term::var("x"))));
        let a = Assignment::new().with("x", Element(1));
        assert_eq!(phi.atomic_instances(&a), vec![r1(Term::elem(1))]);
    }

    #[test]
    fn printer_parenthesizes_quantifiers_in_non_final_position() {
        let phi = Formula::and(Formula::forall("x", r1(Term::var("x"))), r1(Term::elem(0)));
        assert_eq!(phi.to_string(), "(forall x. R1(x)) & R1(0)");
        let psi = Formula::and(r1(Term::elem(0)), Formula::forall("x", r1(Term::var("x"))));
        assert_eq!(psi.to_string(), "R1(0) & forall x. R1(x)");
        let imp = Formula::implies(Formula::implies(r1(Term::elem(0)), r1(Term::elem(1))), r1(Term::elem(0)));
        assert_eq!(imp.to_string(), "(R1(0) -> R1(1)) -> R1(0)");
    }

    #[test]
    fn infer_signature() {
        let phi = Formula::or(
            Formula::atom("R", vec![Term::elem(0)]),
            Formula::forall("x", Formula::equals(Term::apply("f", vec![Term::var("x")]), Term::var("c"))),
        );
        let sig = Signature::infer([&phi]).unwrap();
        assert_eq!(sig.predicates(), &[SymbolDecl::new("R", 1)]);
        assert_eq!(sig.functions(), &[SymbolDecl::new("f", 1)]);
        assert_eq!(sig.constants(), &["c".to_string()]);
    }
}
