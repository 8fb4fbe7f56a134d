//! Recursive-descent parser for the textual formula syntax.
//!
//! ```text
//! formula  := or ( "->" formula )?
//! or       := and ( "|" and )*
//! and      := unary ( "&" unary )*
//! unary    := "!" unary | ("forall" | "exists") ident "." formula | primary
//! primary  := "(" formula ")" | term "=" term | pred "(" term ("," term)* ")"
//! term     := ident | integer | func "(" term ("," term)* ")"
//! ```
//!
//! `!` binds tightest, then `&`, `|`, and `->` (right-associative). A
//! quantifier body extends as far right as possible.

use crate::error::{ParseError, ParseErrorKind, SignatureError};
use crate::syntax::{Element, Formula, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Bar,
    Arrow,
    Eq,
    Forall,
    Exists,
    Eof,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Forall => "`forall`".into(),
        Tok::Exists => "`exists`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'=' => Tok::Eq,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..=i];
                let n = digits
                    .parse::<u32>()
                    .map_err(|_| ParseError::syntax(format!("element literal `{digits}` is too large"), start))?;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                match &text[start..=i] {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    word => Tok::Ident(word.to_string()),
                }
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::syntax(format!("unexpected character `{ch}`"), start));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// A term before symbol checking; keeps source offsets for diagnostics.
enum RawTerm {
    Name(String, usize),
    Elem(Element),
    Apply(String, Vec<RawTerm>, usize),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: Option<&'a Signature>,
    scope: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if tok != Tok::Eof {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", describe(&want))))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        ParseError::syntax(format!("{what}, found {}", describe(self.peek())), self.offset())
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Forall | Tok::Exists => {
                let universal = self.bump() == Tok::Forall;
                let var = match self.peek() {
                    Tok::Ident(v) => v.clone(),
                    _ => return Err(self.unexpected("expected a variable after quantifier")),
                };
                self.bump();
                self.expect(Tok::Dot)?;
                self.scope.push(var.clone());
                let body = self.formula();
                self.scope.pop();
                let body = body?;
                Ok(if universal { Formula::forall(var, body) } else { Formula::exists(var, body) })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let inner = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let lhs = self.raw_term()?;
        if *self.peek() == Tok::Eq {
            self.bump();
            let rhs = self.raw_term()?;
            return Ok(Formula::Equals(self.term(lhs)?, self.term(rhs)?));
        }
        match lhs {
            RawTerm::Apply(name, args, at) => {
                if let Some(sig) = self.sig {
                    let idx = sig.predicate_index(&name).ok_or_else(|| {
                        if sig.function_index(&name).is_some() {
                            ParseError::syntax(format!("function term `{name}(..)` used as a formula; expected `=`"), self.offset())
                        } else {
                            ParseError { kind: ParseErrorKind::UnknownSymbol(name.clone()), offset: at }
                        }
                    })?;
                    check_arity(&name, sig.predicates()[idx].arity, args.len(), at)?;
                }
                let args = args.into_iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Ok(Formula::Atom(name, args))
            }
            _ => Err(self.unexpected("expected `=`")),
        }
    }

    fn raw_term(&mut self) -> Result<RawTerm, ParseError> {
        let at = self.offset();
        if !matches!(self.peek(), Tok::Num(_) | Tok::Ident(_)) {
            return Err(self.unexpected("expected a term"));
        }
        match self.bump() {
            Tok::Num(n) => Ok(RawTerm::Elem(Element(n))),
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(RawTerm::Name(name, at));
                }
                self.bump();
                let mut args = vec![self.raw_term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.raw_term()?);
                }
                self.expect(Tok::RParen)?;
                Ok(RawTerm::Apply(name, args, at))
            }
            _ => unreachable!(),
        }
    }

    fn term(&self, raw: RawTerm) -> Result<Term, ParseError> {
        match raw {
            RawTerm::Elem(e) => Ok(Term::Elem(e)),
            RawTerm::Name(name, at) => {
                if self.scope.contains(&name) {
                    return Ok(Term::Var(name));
                }
                match self.sig {
                    Some(sig) if sig.constant_index(&name).is_some() => Ok(Term::Const(name)),
                    Some(sig) => match sig.symbol(&name) {
                        Some(sym) => Err(ParseError {
                            kind: ParseErrorKind::ArityMismatch {
                                symbol: name,
                                expected: sig.decl(sym).arity,
                                found: 0,
                            },
                            offset: at,
                        }),
                        None => Ok(Term::Var(name)),
                    },
                    None => Ok(Term::Var(name)),
                }
            }
            RawTerm::Apply(name, args, at) => {
                if let Some(sig) = self.sig {
                    let idx = match sig.function_index(&name) {
                        Some(idx) => idx,
                        None if sig.predicate_index(&name).is_some() => {
                            return Err(ParseError::syntax(format!("predicate `{name}` used as a term"), at))
                        }
                        None => return Err(ParseError { kind: ParseErrorKind::UnknownSymbol(name), offset: at }),
                    };
                    check_arity(&name, sig.functions()[idx].arity, args.len(), at)?;
                }
                let args = args.into_iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                Ok(Term::Apply(name, args))
            }
        }
    }
}

fn check_arity(symbol: &str, expected: usize, found: usize, offset: usize) -> Result<(), ParseError> {
    if expected == found {
        Ok(())
    } else {
        Err(ParseError {
            kind: ParseErrorKind::ArityMismatch { symbol: symbol.to_string(), expected, found },
            offset,
        })
    }
}

fn run(text: &str, sig: Option<&Signature>) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, sig, scope: Vec::new() };
    let phi = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("expected end of input"));
    }
    Ok(phi)
}

/// Parses `text` against `sig`, checking every symbol and arity.
///
/// Unbound identifiers that are not constants of `sig` become free variables.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    run(text, Some(sig))
}

/// Parses without a signature. Every unbound identifier becomes a variable.
pub fn parse_formula_unchecked(text: &str) -> Result<Formula, ParseError> {
    run(text, None)
}

#[derive(Debug, thiserror::Error)]
pub enum InferError {
    #[error("formula {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// Parses several formulas that share an implicit language and infers it.
///
/// Free identifiers are read as constants, so the returned formulas are closed.
pub fn parse_with_inferred_signature(texts: &[&str]) -> Result<(Signature, Vec<Formula>), InferError> {
    let raw = texts
        .iter()
        .enumerate()
        .map(|(index, t)| parse_formula_unchecked(t).map_err(|source| InferError::Parse { index, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let sig = Signature::infer(raw.iter())?;
    let formulas = texts
        .iter()
        .enumerate()
        .map(|(index, t)| parse_formula(t, &sig).map_err(|source| InferError::Parse { index, source }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((sig, formulas))
}
