//! Python bindings: structures, states, satisfaction, sessions and search.

use std::time::Duration;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use npmt::{
    bundled, load_structure, parse_formula, parse_with_inferred_signature, print_structure, render_report, satisfies,
    Assignment, Element, Point, SearchBounds, SearchOutcome, Searcher, Sequent,
};
use npmt_service::Session as CoreSession;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_point(coords: &[u32]) -> Point {
    Point(coords.iter().map(|&c| Element(c)).collect())
}

#[pyclass(frozen, eq, hash, skip_from_py_object, name = "State")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct State(npmt::State);

#[pymethods]
impl State {
    fn leq(&self, other: &State) -> PyResult<bool> {
        self.0.leq(&other.0).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("State({})", self.0)
    }
}

#[pyclass(frozen, name = "Structure")]
struct Structure(npmt::Structure);

#[pymethods]
impl Structure {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        load_structure(spec).map(Self).map_err(err)
    }

    /// One of the shipped structures: "example", "successor", "edges", "two_relations".
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        let (_, text) = bundled::ALL
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| PyValueError::new_err(format!("no bundled structure `{name}`")))?;
        Self::new(text)
    }

    #[getter]
    fn universe(&self) -> Vec<u32> {
        self.0.universe().iter().map(|e| e.0).collect()
    }

    fn spec(&self) -> String {
        print_structure(&self.0)
    }

    fn initial_state(&self) -> State {
        State(self.0.initial_state())
    }

    fn parse_state(&self, text: &str) -> PyResult<State> {
        self.0.parse_state(text).map(State).map_err(err)
    }

    /// Asks `symbol` at `point`; returns the value and the next state.
    fn query(&self, state: &State, symbol: &str, point: Vec<u32>) -> PyResult<(u32, State)> {
        let (v, e) = self.0.query(&state.0, symbol, &to_point(&point)).map_err(err)?;
        Ok((v, State(e)))
    }

    fn futures(&self, state: &State) -> Vec<State> {
        self.0.futures(&state.0).into_iter().map(State).collect()
    }

    /// Whether `formula` holds at `state`, with the plain-text report.
    fn satisfies(&self, state: &State, formula: &str) -> PyResult<(bool, String)> {
        let phi = parse_formula(formula, self.0.signature()).map_err(err)?;
        let v = satisfies(&self.0, &state.0, &phi, &Assignment::new()).map_err(err)?;
        Ok((v.satisfied, render_report(&phi, &state.0, &v)))
    }
}

#[pyclass(name = "Session")]
struct Session(CoreSession);

#[pymethods]
impl Session {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        CoreSession::create("py", spec).map(Self).map_err(err)
    }

    /// Returns `(value, seq, new_event)`.
    fn query(&mut self, symbol: &str, point: Vec<u32>) -> PyResult<(u32, u64, bool)> {
        let out = self.0.query(symbol, &point).map_err(err)?;
        Ok((out.value, out.seq, out.new_event))
    }

    /// Evaluates at the current state and adds to the watchlist. Returns `(satisfied, report)`.
    fn eval(&mut self, formula: &str) -> PyResult<(bool, String)> {
        let out = self.0.eval(formula).map_err(err)?;
        Ok((out.satisfied, out.report))
    }

    #[getter]
    fn state(&self) -> String {
        self.0.state().to_string()
    }

    /// Events as `(seq, symbol, point, value)`.
    fn log(&self) -> Vec<(u64, String, Vec<u32>, u32)> {
        self.0.log().iter().map(|ev| (ev.seq, ev.symbol.clone(), ev.point.clone(), ev.value)).collect()
    }

    /// The same snapshot the HTTP API returns, as JSON.
    fn view_json(&self) -> String {
        serde_json::to_string(&self.0.view()).expect("views serialize")
    }
}

/// Bounded countermodel search for `gamma ⊢ formula`.
#[pyfunction]
#[pyo3(signature = (formula, gamma=Vec::new(), universe=2, clauses=4, guard=2, budget_ms=60_000))]
fn search<'py>(
    py: Python<'py>,
    formula: &str,
    gamma: Vec<String>,
    universe: u32,
    clauses: usize,
    guard: usize,
    budget_ms: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut texts: Vec<&str> = gamma.iter().map(String::as_str).collect();
    texts.push(formula);
    let (_, mut formulas) = parse_with_inferred_signature(&texts).map_err(err)?;
    let phi = formulas.pop().expect("formula was pushed last");
    let seq = Sequent::new(formulas, phi);
    let bounds = SearchBounds::new(universe, clauses, guard, Duration::from_millis(budget_ms)).map_err(err)?;
    let result = py.detach(|| Searcher::new().search(&seq, &bounds)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("structures", result.structures)?;
    match &result.outcome {
        SearchOutcome::Found(cm) => {
            out.set_item("outcome", "found")?;
            out.set_item("spec", print_structure(&cm.structure))?;
            out.set_item("state", cm.state.to_string())?;
            out.set_item("report", render_report(&seq.phi, &cm.state, &cm.phi_verdict))?;
            out.set_item("verified", cm.verify(&seq).map_err(err)?)?;
        }
        SearchOutcome::Exhausted => out.set_item("outcome", "exhausted")?,
        SearchOutcome::Unknown => out.set_item("outcome", "unknown")?,
    }
    Ok(out)
}

#[pymodule]
fn npmt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Structure>()?;
    m.add_class::<State>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    Ok(())
}
