//! Line-oriented subject session for the terminal.

use std::fmt::Write;

use crate::error::ServiceError;
use crate::session::Session;

pub const HELP: &str = "\
commands:
  query R1(0)        ask the structure for a value (also: query R1 0)
  eval <formula>     evaluate at the current state and watch it
  state              current state and determined values
  open               points not yet determined
  watch              watchlist verdicts
  log                event log
  help               this text
  quit
";

pub struct Repl {
    session: Session,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    Text(String),
    Quit,
}

impl Repl {
    pub fn new(session: Session) -> Self {
        Self { session }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    /// Runs one input line. Errors become `error: ...` text; the session is left unchanged.
    pub fn execute(&mut self, line: &str) -> Reply {
        let line = line.trim();
        let (cmd, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let result = match cmd {
            "" => Ok(String::new()),
            "quit" | "exit" => return Reply::Quit,
            "help" => Ok(HELP.to_string()),
            "query" | "q" => self.query(rest),
            "eval" | "e" => self.session.eval(rest).map(|o| o.report),
            "state" => Ok(self.state()),
            "open" => Ok(self.open()),
            "watch" => Ok(self.watch()),
            "log" => Ok(self.log()),
            other => Err(ServiceError::new("unknown_command", format!("unknown command `{other}`; try `help`"))),
        };
        Reply::Text(result.unwrap_or_else(|e| format!("error: {}\n", e.message)))
    }

    fn query(&mut self, rest: &str) -> Result<String, ServiceError> {
        let (symbol, coords) = parse_query(rest)?;
        let before: Vec<bool> = self.session.watchlist().iter().map(|w| w.verdict.satisfied).collect();
        let out = self.session.query(&symbol, &coords)?;
        let point = coords.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
        let mut text = if out.new_event {
            format!("#{} {symbol}({point}) = {}\n", out.seq, out.value)
        } else {
            format!("{symbol}({point}) = {} (already determined at #{})\n", out.value, out.seq)
        };
        for (w, was) in self.session.watchlist().iter().zip(before) {
            if w.verdict.satisfied != was {
                let mark = if w.verdict.satisfied { "⊨" } else { "⊭" };
                let _ = writeln!(text, "  now {mark} {}", w.formula);
            }
        }
        Ok(text)
    }

    fn state(&self) -> String {
        let view = self.session.view();
        let mut out = format!("state: {}\n", view.state);
        for d in &view.determined {
            let point = d.point.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "  {}({point}) = {}", d.symbol, d.value);
        }
        out
    }

    fn open(&self) -> String {
        let mut out = String::new();
        for p in self.session.view().undetermined {
            let point = p.point.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "  {}({point})", p.symbol);
        }
        if out.is_empty() {
            out.push_str("every point is determined\n");
        }
        out
    }

    fn watch(&self) -> String {
        let mut out = String::new();
        for w in self.session.watchlist() {
            let mark = if w.verdict.satisfied { "⊨" } else { "⊭" };
            let since = w.satisfied_since().map(|s| format!("  (since #{s})")).unwrap_or_default();
            let _ = writeln!(out, "{mark} {}{since}", w.formula);
        }
        if out.is_empty() {
            out.push_str("watchlist is empty\n");
        }
        out
    }

    fn log(&self) -> String {
        let mut out = String::new();
        for ev in self.session.log() {
            let point = ev.point.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
            let _ = writeln!(out, "#{} {}({point}) = {}", ev.seq, ev.symbol, ev.value);
        }
        if out.is_empty() {
            out.push_str("no events yet\n");
        }
        out
    }
}

/// Accepts `R1(0, 1)` or `R1 0 1`.
pub fn parse_query(text: &str) -> Result<(String, Vec<u32>), ServiceError> {
    let bad = || ServiceError::new("bad_query", format!("cannot read `{text}` as a query; expected e.g. `R1(0)`"));
    let (symbol, args): (&str, Vec<&str>) = match text.split_once('(') {
        Some((sym, rest)) => {
            let inner = rest.trim_end().strip_suffix(')').ok_or_else(bad)?;
            let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').collect() };
            (sym.trim(), args)
        }
        None => {
            let mut parts = text.split_whitespace();
            (parts.next().ok_or_else(bad)?, parts.collect())
        }
    };
    if symbol.is_empty() {
        return Err(bad());
    }
    let coords = args.iter().map(|a| a.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok((symbol.to_string(), coords))
}
