//! Subject sessions: one structure, one current state, an append-only event
//! log and a watchlist of formulas re-evaluated after every query.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use npmt::{
    load_structure, parse_formula, render_report, satisfies, Assignment, Element, Formula, Point, State, Structure,
    Value, Verdict,
};

use crate::error::ServiceError;

/// One determination: the `seq`-th new point asked in the session.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub symbol: String,
    pub point: Vec<u32>,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WatchEntry {
    pub formula: Formula,
    pub verdict: Verdict,
    /// `(events so far, satisfied)`, one entry when added and one per later event.
    pub history: Vec<(u64, bool)>,
}

impl WatchEntry {
    /// The event count at which the formula was first seen satisfied.
    pub fn satisfied_since(&self) -> Option<u64> {
        self.history.iter().find(|(_, sat)| *sat).map(|(seq, _)| *seq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryOutcome {
    pub value: Value,
    /// Sequence number of the event that determined the point.
    pub seq: u64,
    /// False when the point was already determined and nothing was logged.
    pub new_event: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvalOutcome {
    pub formula: String,
    pub satisfied: bool,
    pub verdict: Verdict,
    pub report: String,
}

/// A line of a session log file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogLine {
    Spec { text: String },
    Query(Event),
    Watch { formula: String },
}

pub struct Session {
    id: String,
    spec: String,
    structure: Structure,
    state: State,
    log: Vec<Event>,
    watchlist: Vec<WatchEntry>,
    sink: Option<File>,
}

impl Session {
    pub fn create(id: impl Into<String>, spec: &str) -> Result<Self, ServiceError> {
        let structure = load_structure(spec)?;
        let state = structure.initial_state();
        Ok(Self {
            id: id.into(),
            spec: spec.to_string(),
            structure,
            state,
            log: Vec::new(),
            watchlist: Vec::new(),
            sink: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn watchlist(&self) -> &[WatchEntry] {
        &self.watchlist
    }

    pub fn point(&self, symbol: &str, coords: &[u32]) -> Result<Point, ServiceError> {
        let sym = self.structure.resolve(symbol)?;
        let d = Point(coords.iter().map(|&c| Element(c)).collect());
        self.structure.check_point(sym, &d)?;
        Ok(d)
    }

    pub fn query(&mut self, symbol: &str, coords: &[u32]) -> Result<QueryOutcome, ServiceError> {
        let d = self.point(symbol, coords)?;
        let sym = self.structure.resolve(symbol)?;
        if let Some(value) = self.state.value(sym, &d) {
            let seq = self.log.iter().find(|ev| ev.symbol == symbol && ev.point == coords).map_or(0, |ev| ev.seq);
            return Ok(QueryOutcome { value, seq, new_event: false });
        }
        let (value, next) = self.structure.query_symbol(&self.state, sym, &d)?;
        let event = Event { seq: self.log.len() as u64 + 1, symbol: symbol.to_string(), point: coords.to_vec(), value };
        self.write(&LogLine::Query(event.clone()))?;
        self.state = next;
        self.log.push(event);
        let seq = self.log.len() as u64;
        let (m, e) = (&self.structure, &self.state);
        for w in &mut self.watchlist {
            w.verdict = satisfies(m, e, &w.formula, &Assignment::new())?;
            w.history.push((seq, w.verdict.satisfied));
        }
        Ok(QueryOutcome { value, seq, new_event: true })
    }

    pub fn parse(&self, text: &str) -> Result<Formula, ServiceError> {
        let phi = parse_formula(text, self.structure.signature())?;
        if !phi.is_closed() {
            return Err(ServiceError::new("open_formula", format!("formula `{phi}` is not closed")));
        }
        Ok(phi)
    }

    /// Evaluates `text` at the current state and adds it to the watchlist.
    pub fn eval(&mut self, text: &str) -> Result<EvalOutcome, ServiceError> {
        let phi = self.parse(text)?;
        let verdict = satisfies(&self.structure, &self.state, &phi, &Assignment::new())?;
        if !self.watchlist.iter().any(|w| w.formula == phi) {
            self.write(&LogLine::Watch { formula: phi.to_string() })?;
            self.watchlist.push(WatchEntry {
                formula: phi.clone(),
                verdict: verdict.clone(),
                history: vec![(self.log.len() as u64, verdict.satisfied)],
            });
        }
        Ok(EvalOutcome {
            formula: phi.to_string(),
            satisfied: verdict.satisfied,
            report: render_report(&phi, &self.state, &verdict),
            verdict,
        })
    }

    /// Starts appending to `path`: writes the spec and everything so far,
    /// then one line per later event or watch.
    pub fn attach_log(&mut self, path: &Path) -> Result<(), ServiceError> {
        let mut file = File::create(path).map_err(ServiceError::io)?;
        for line in self.log_lines() {
            writeln!(file, "{}", serde_json::to_string(&line).expect("log lines serialize")).map_err(ServiceError::io)?;
        }
        self.sink = Some(file);
        Ok(())
    }

    /// The session as log lines: spec, then events and watches in the order they happened.
    pub fn log_lines(&self) -> Vec<LogLine> {
        let mut out = vec![LogLine::Spec { text: self.spec.clone() }];
        let mut events = self.log.iter().peekable();
        for w in &self.watchlist {
            let added = w.history[0].0;
            while let Some(ev) = events.next_if(|ev| ev.seq <= added) {
                out.push(LogLine::Query(ev.clone()));
            }
            out.push(LogLine::Watch { formula: w.formula.to_string() });
        }
        out.extend(events.cloned().map(LogLine::Query));
        out
    }

    /// Rebuilds a session by re-running a log. Recorded values must match
    /// what the structure answers.
    pub fn replay(id: impl Into<String>, lines: &[LogLine]) -> Result<Self, ServiceError> {
        let Some(LogLine::Spec { text }) = lines.first() else {
            return Err(ServiceError::new("corrupt_log", "log does not start with a spec line"));
        };
        let mut s = Self::create(id, text)?;
        for line in &lines[1..] {
            match line {
                LogLine::Spec { .. } => return Err(ServiceError::new("corrupt_log", "spec line in the middle of a log")),
                LogLine::Query(ev) => {
                    let out = s.query(&ev.symbol, &ev.point)?;
                    if !out.new_event || out.seq != ev.seq || out.value != ev.value {
                        return Err(ServiceError::new(
                            "corrupt_log",
                            format!("event #{} does not replay to the recorded value", ev.seq),
                        ));
                    }
                }
                LogLine::Watch { formula } => {
                    s.eval(formula)?;
                }
            }
        }
        Ok(s)
    }

    /// Reads a log file written by [`Session::attach_log`] and keeps appending to it.
    pub fn resume(id: impl Into<String>, path: &Path) -> Result<Self, ServiceError> {
        let file = File::open(path).map_err(ServiceError::io)?;
        let mut lines = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(ServiceError::io)?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str(&line)
                .map_err(|e| ServiceError::new("corrupt_log", format!("line {}: {e}", i + 1)))?;
            lines.push(parsed);
        }
        let mut s = Self::replay(id, &lines)?;
        s.sink = Some(OpenOptions::new().append(true).open(path).map_err(ServiceError::io)?);
        Ok(s)
    }

    fn write(&mut self, line: &LogLine) -> Result<(), ServiceError> {
        if let Some(f) = &mut self.sink {
            writeln!(f, "{}", serde_json::to_string(line).expect("log lines serialize")).map_err(ServiceError::io)?;
        }
        Ok(())
    }

    pub fn view(&self) -> SessionView {
        let m = &self.structure;
        let mut determined = Vec::new();
        let mut undetermined = Vec::new();
        for sym in m.symbols() {
            let decl = m.signature().decl(sym);
            for d in Point::all(m.universe(), decl.arity) {
                let point: Vec<u32> = d.0.iter().map(|e| e.0).collect();
                match self.state.value(sym, &d) {
                    Some(value) => determined.push(Determined { symbol: decl.name.clone(), point, value }),
                    None => undetermined.push(PointRef { symbol: decl.name.clone(), point }),
                }
            }
        }
        SessionView {
            id: self.id.clone(),
            state: self.state.to_string(),
            determined,
            undetermined,
            events: self.log.len() as u64,
            watchlist: self
                .watchlist
                .iter()
                .map(|w| WatchView {
                    formula: w.formula.to_string(),
                    satisfied: w.verdict.satisfied,
                    satisfied_since: w.satisfied_since(),
                    report: render_report(&w.formula, &self.state, &w.verdict),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Determined {
    pub symbol: String,
    pub point: Vec<u32>,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRef {
    pub symbol: String,
    pub point: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchView {
    pub formula: String,
    pub satisfied: bool,
    pub satisfied_since: Option<u64>,
    pub report: String,
}

/// Snapshot of a session, points in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub state: String,
    pub determined: Vec<Determined>,
    pub undetermined: Vec<PointRef>,
    pub events: u64,
    pub watchlist: Vec<WatchView>,
}
