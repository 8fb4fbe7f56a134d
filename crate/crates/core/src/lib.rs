//! Non-predetermined first-order structures.
//!
//! Functions and relations of a [`Structure`] are not fixed in advance: each
//! value is decided by an [`Oracle`] the first time a subject asks for it, and
//! the order of questions can change the answers. A [`State`] records what has
//! been asked. Satisfaction quantifies over every future state, which yields an
//! intuitionistic logic; [`search`] looks for small countermodels.

pub mod bundled;
pub mod corpus;
pub mod error;
pub mod oracle;
pub mod parser;
pub mod persistence;
pub mod search;
pub mod semantics;
pub mod spec_file;
pub mod structure;
pub mod syntax;

pub use error::{LoadError, ModelError, ParseError, ParseErrorKind, SignatureError};
pub use oracle::{
    check_coherence, oracle_apply, rule_eval, Clause, Codomain, CoherenceReport, CoherenceViolation, Condition,
    DeterminationRule, NonPredetermined, Oracle, Point, Value,
};
pub use corpus::{run_schemes, run_soundness_corpus, CorpusReport, CorpusViolation, Scheme, CLASSICAL, CORPUS};
pub use parser::{parse_formula, parse_formula_unchecked, parse_with_inferred_signature};
pub use semantics::{
    atom_determined, interpret_term, render_report, replay_verdict, satisfies, satisfies_all, ClauseKind, Side,
    StateSpace, Verdict, Witness,
};
pub use persistence::{check_persistence, PersistenceReport, PersistenceViolation};
pub use search::{
    search_countermodel, Countermodel, SearchBounds, SearchError, SearchOutcome, SearchResult, Searcher, Sequent,
};
pub use structure::{state_leq, State, Structure};
pub use syntax::{Assignment, Element, Formula, Signature, SymbolDecl, SymbolKind, SymbolRef, Term};
pub use spec_file::{load_structure, print_structure};
