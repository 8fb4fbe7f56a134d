//! Command-line tools, interactive subject sessions and the HTTP session API
//! for non-predetermined structures.

pub mod commands;
pub mod error;
pub mod http;
pub mod repl;
pub mod session;

pub use error::ServiceError;
pub use session::{Event, LogLine, Session, SessionView};
