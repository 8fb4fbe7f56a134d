//! Loader and printer for structure-spec files.
//!
//! ```text
//! # comments run to end of line
//! universe 0 1
//! relation R1 1
//! function f 1
//! constant c = 0
//! oracle R1 {
//!   when count == 0 && query == (0) -> 1
//!   when determined((1)) == 1 && query == (0) -> 0
//!   default -> 0
//! }
//! ```
//!
//! See `docs/structure-spec.md` for the full grammar.

use std::fmt::Write as _;

use crate::error::{LoadError, ModelError};
use crate::oracle::{Clause, Codomain, Condition, DeterminationRule, Oracle, Point, Value};
use crate::structure::Structure;
use crate::syntax::{is_identifier, Element, Signature, SymbolDecl};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Num(u32),
    Punct(&'static str),
    Eof,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, LoadError> {
    const PUNCT: [&str; 8] = ["==", "&&", "->", "{", "}", "(", ")", ","];
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let code = raw.split('#').next().unwrap_or("");
        let mut rest = code.trim_start();
        while !rest.is_empty() {
            if let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) {
                out.push((Tok::Punct(p), line));
                rest = &rest[p.len()..];
            } else if rest.starts_with('=') {
                out.push((Tok::Punct("="), line));
                rest = &rest[1..];
            } else {
                let end = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                if end == 0 {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(LoadError::new(line, format!("unexpected character `{ch}`")));
                }
                let word = &rest[..end];
                let tok = if word.bytes().all(|b| b.is_ascii_digit()) {
                    Tok::Num(word.parse().map_err(|_| LoadError::new(line, format!("number `{word}` is too large")))?)
                } else {
                    Tok::Word(word.to_string())
                };
                out.push((tok, line));
                rest = &rest[end..];
            }
            rest = rest.trim_start();
        }
    }
    let last = text.lines().count().max(1);
    out.push((Tok::Eof, last));
    Ok(out)
}

struct OracleBlock {
    symbol: String,
    line: usize,
    rule: DeterminationRule,
}

struct Reader {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Reader {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn line(&self) -> usize {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> LoadError {
        LoadError::new(self.line(), msg)
    }

    fn punct(&mut self, p: &str) -> Result<(), LoadError> {
        match self.peek() {
            Tok::Punct(q) if *q == p => {
                self.next();
                Ok(())
            }
            other => Err(self.err(format!("expected `{p}`, found {}", show(other)))),
        }
    }

    fn ident(&mut self) -> Result<String, LoadError> {
        match self.peek().clone() {
            Tok::Word(w) if is_identifier(&w) => {
                self.next();
                Ok(w)
            }
            other => Err(self.err(format!("expected a name, found {}", show(&other)))),
        }
    }

    fn number(&mut self) -> Result<u32, LoadError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.next();
                Ok(n)
            }
            other => Err(self.err(format!("expected a number, found {}", show(&other)))),
        }
    }

    fn point(&mut self) -> Result<Point, LoadError> {
        self.punct("(")?;
        let mut coords = vec![self.number()?];
        while *self.peek() == Tok::Punct(",") {
            self.next();
            coords.push(self.number()?);
        }
        self.punct(")")?;
        Ok(Point::new(coords))
    }

    fn condition(&mut self) -> Result<Condition, LoadError> {
        let word = self.ident()?;
        match word.as_str() {
            "count" => {
                self.punct("==")?;
                Ok(Condition::Count(self.number()? as usize))
            }
            "query" => {
                self.punct("==")?;
                Ok(Condition::Query(self.point()?))
            }
            "determined" => {
                self.punct("(")?;
                let p = self.point()?;
                self.punct(")")?;
                self.punct("==")?;
                Ok(Condition::Determined(p, self.number()?))
            }
            other => Err(self.err(format!("unknown condition `{other}`"))),
        }
    }

    fn oracle_body(&mut self) -> Result<DeterminationRule, LoadError> {
        self.punct("{")?;
        let mut clauses = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Word(w) if w == "when" => {
                    self.next();
                    let mut guard = Vec::new();
                    if *self.peek() == Tok::Word("true".into()) {
                        self.next();
                    } else {
                        guard.push(self.condition()?);
                        while *self.peek() == Tok::Punct("&&") {
                            self.next();
                            guard.push(self.condition()?);
                        }
                    }
                    self.punct("->")?;
                    clauses.push(Clause { guard, value: self.number()? });
                }
                Tok::Word(w) if w == "default" => {
                    self.next();
                    self.punct("->")?;
                    let default: Value = self.number()?;
                    if *self.peek() != Tok::Punct("}") {
                        return Err(self.err("`default` must be the last clause of an oracle"));
                    }
                    self.next();
                    return Ok(DeterminationRule { clauses, default });
                }
                Tok::Punct("}") => return Err(self.err("oracle has no `default` clause")),
                other => return Err(self.err(format!("expected `when` or `default`, found {}", show(&other)))),
            }
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of file".into(),
    }
}

/// Parses a structure-spec file.
pub fn load_structure(text: &str) -> Result<Structure, LoadError> {
    let mut r = Reader { toks: lex(text)?, pos: 0 };
    let mut universe: Option<Vec<Element>> = None;
    let mut functions = Vec::new();
    let mut predicates = Vec::new();
    let mut constants: Vec<(String, u32, usize)> = Vec::new();
    let mut blocks: Vec<OracleBlock> = Vec::new();
    let mut decl_lines: Vec<(String, usize)> = Vec::new();

    while *r.peek() != Tok::Eof {
        let line = r.line();
        let kw = r.ident()?;
        match kw.as_str() {
            "universe" => {
                if universe.is_some() {
                    return Err(LoadError::new(line, "universe declared twice"));
                }
                let mut elems = Vec::new();
                while let Tok::Num(_) = r.peek() {
                    elems.push(Element(r.number()?));
                }
                if elems.is_empty() {
                    return Err(LoadError::new(line, "universe must list at least one element"));
                }
                universe = Some(elems);
            }
            "relation" | "function" => {
                let name = r.ident()?;
                let arity = r.number()? as usize;
                decl_lines.push((name.clone(), line));
                let list = if kw == "relation" { &mut predicates } else { &mut functions };
                list.push(SymbolDecl::new(name, arity));
            }
            "constant" => {
                let name = r.ident()?;
                r.punct("=")?;
                let value = r.number()?;
                decl_lines.push((name.clone(), line));
                constants.push((name, value, line));
            }
            "oracle" => {
                let symbol = r.ident()?;
                let rule = r.oracle_body()?;
                blocks.push(OracleBlock { symbol, line, rule });
            }
            other => return Err(LoadError::new(line, format!("unknown declaration `{other}`"))),
        }
    }

    let universe = universe.ok_or_else(|| LoadError::new(1, "missing `universe` declaration"))?;
    let line_of = |name: &str| decl_lines.iter().find(|(n, _)| n == name).map_or(1, |(_, l)| *l);
    let signature = Signature::new(functions, predicates, constants.iter().map(|(n, _, _)| n.clone()).collect())
        .map_err(|e| {
            let name = match &e {
                crate::SignatureError::InvalidName(n)
                | crate::SignatureError::DuplicateName(n)
                | crate::SignatureError::ZeroArity(n)
                | crate::SignatureError::InconsistentArity(n) => n.clone(),
            };
            LoadError::new(line_of(&name), e.to_string())
        })?;

    let mut oracles = Vec::new();
    for block in blocks {
        let sym = signature
            .symbol(&block.symbol)
            .ok_or_else(|| LoadError::new(block.line, format!("oracle for undeclared symbol `{}`", block.symbol)))?;
        let decl = signature.decl(sym);
        let codomain = match sym.kind {
            crate::SymbolKind::Function => Codomain::Universe(universe.clone()),
            crate::SymbolKind::Predicate => Codomain::Truth,
        };
        let oracle = Oracle::new(decl.name.clone(), decl.arity, codomain, block.rule);
        oracle.validate().map_err(|m| LoadError::new(block.line, format!("oracle `{}`: {m}", block.symbol)))?;
        oracles.push((oracle, block.line));
    }
    let lines: Vec<(String, usize)> = oracles.iter().map(|(o, l)| (o.symbol.clone(), *l)).collect();
    let oracle_line = |name: &str| lines.iter().find(|(s, _)| s == name).map(|(_, l)| *l);
    let constant_values = constants.iter().map(|(n, v, _)| (n.clone(), Element(*v))).collect();
    Structure::new(universe, signature, oracles.into_iter().map(|(o, _)| o).collect(), constant_values).map_err(|e| {
        let line = match &e {
            ModelError::MissingOracle(n) => line_of(n),
            ModelError::BadOracle { symbol, .. } => oracle_line(symbol).unwrap_or_else(|| line_of(symbol)),
            ModelError::ElementOutsideUniverse(x) => constants
                .iter()
                .find(|(_, v, _)| *v == x.0)
                .map(|(_, _, l)| *l)
                .or_else(|| lines.first().map(|(_, l)| *l))
                .unwrap_or(1),
            _ => 1,
        };
        LoadError::new(line, e.to_string())
    })
}

/// Renders a structure in the spec-file syntax; `load_structure` reads it back.
pub fn print_structure(m: &Structure) -> String {
    let mut out = String::from("universe");
    for e in m.universe() {
        let _ = write!(out, " {e}");
    }
    out.push('\n');
    let sig = m.signature();
    for d in sig.predicates() {
        let _ = writeln!(out, "relation {} {}", d.name, d.arity);
    }
    for d in sig.functions() {
        let _ = writeln!(out, "function {} {}", d.name, d.arity);
    }
    for (name, value) in sig.constants().iter().zip(m.constant_values()) {
        let _ = writeln!(out, "constant {name} = {value}");
    }
    for o in m.predicate_oracles().iter().chain(m.function_oracles()) {
        let _ = writeln!(out, "oracle {} {{\n{}\n}}", o.symbol, o.rule);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn loads_bundled_example() {
        let m = load_structure(bundled::EXAMPLE).unwrap();
        assert_eq!(m.universe(), &[Element(0), Element(1)]);
        assert_eq!(m.signature().predicates(), &[SymbolDecl::new("R1", 1)]);
        assert_eq!(m.predicate_oracles()[0].rule.clauses.len(), 4);
        assert_eq!(m.initial_state().to_string(), "([],[λ])");
    }

    #[test]
    fn all_bundled_specs_load_and_round_trip() {
        for (name, text) in bundled::ALL {
            let m = load_structure(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let again = load_structure(&print_structure(&m)).unwrap();
            assert_eq!(m, again, "{name}");
        }
    }

    #[test]
    fn single_line_oracle_block() {
        let m = load_structure("universe 0 1\nrelation R 1\noracle R { when query == (1) -> 1 default -> 0 }").unwrap();
        assert_eq!(m.predicate_oracles()[0].rule.clauses.len(), 1);
    }

    #[test]
    fn rejects_missing_default() {
        let err = load_structure("universe 0 1\nrelation R 1\noracle R {\n when count == 0 -> 1\n}\n").unwrap_err();
        assert_eq!(err.line, 5);
        assert!(err.message.contains("default"), "{err}");
    }

    #[test]
    fn rejects_unknown_symbol() {
        let err = load_structure("universe 0 1\nrelation R 1\noracle S { default -> 0 }\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("undeclared"), "{err}");
    }

    #[test]
    fn rejects_arity_mismatch_in_rule() {
        let err = load_structure("universe 0 1\nrelation R 1\noracle R { when query == (0, 1) -> 1 default -> 0 }\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("arity"), "{err}");
    }

    #[test]
    fn rejects_missing_oracle_and_bad_values() {
        let err = load_structure("universe 0 1\nrelation R 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = load_structure("universe 0 1\nrelation R 1\noracle R { default -> 2 }").unwrap_err();
        assert!(err.message.contains("codomain"), "{err}");
        let err = load_structure("universe 0 1\nfunction f 1\nconstant c = 5\noracle f { default -> 0 }").unwrap_err();
        assert_eq!(err.line, 3);
        let err = load_structure("relation R 1\noracle R { default -> 0 }").unwrap_err();
        assert!(err.message.contains("universe"));
        let err = load_structure("universe 0 1\nrelation R 1\nrelation R 1\noracle R { default -> 0 }").unwrap_err();
        assert_eq!(err.line, 2);
        let err = load_structure("universe 0 1\nrelation R 1\noracle R { default -> 0 when count == 0 -> 1 }").unwrap_err();
        assert!(err.message.contains("last"));
    }
}
