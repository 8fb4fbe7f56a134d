use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use npmt::{SearchBounds, Searcher};
use npmt_service::commands::{self, EXIT_ERROR};
use npmt_service::repl::{Repl, Reply};
use npmt_service::{http, Session, ServiceError};

#[derive(Parser)]
#[command(name = "npmt", version, about = "Explore non-predetermined first-order structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at a state of a structure.
    Check {
        /// Structure spec file.
        spec: PathBuf,
        /// Formula text. Omit when using --formula-file.
        formula: Option<String>,
        #[arg(long, conflicts_with = "formula")]
        formula_file: Option<PathBuf>,
        /// Premises, one formula per line.
        #[arg(long)]
        gamma: Option<PathBuf>,
        /// State literal such as `([],[⟨(0),(1)⟩])`; defaults to the initial state.
        #[arg(long)]
        state: Option<String>,
    },
    /// Look for a small structure refuting `gamma ⊢ formula`.
    Search {
        formula: String,
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        universe: u32,
        #[arg(long, default_value_t = 4)]
        clauses: usize,
        #[arg(long, default_value_t = 2)]
        guard: usize,
        /// Budget in milliseconds.
        #[arg(long, env = "NPMT_BUDGET_MS")]
        budget_ms: Option<String>,
    },
    /// Play the subject against a structure in the terminal.
    Repl {
        spec: PathBuf,
        /// Append every event to this log file.
        #[arg(long, conflicts_with = "resume")]
        log: Option<PathBuf>,
        /// Continue a session from its log file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Check that a structure spec loads.
    Validate { spec: PathBuf },
}

fn read(path: &Path) -> Result<String, ServiceError> {
    std::fs::read_to_string(path)
        .map_err(|e| ServiceError::new("io_error", format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<i32, ServiceError> {
    match cli.command {
        Command::Check { spec, formula, formula_file, gamma, state } => {
            let formula = match (formula, formula_file) {
                (Some(f), _) => f,
                (None, Some(path)) => read(&path)?.trim().to_string(),
                (None, None) => return Err(ServiceError::new("bad_request", "give a formula or --formula-file")),
            };
            let gamma = match gamma {
                Some(path) => commands::formula_lines(&read(&path)?),
                None => Vec::new(),
            };
            let out = commands::check(&read(&spec)?, &formula, &gamma, state.as_deref())?;
            print!("{}", out.stdout);
            Ok(out.code)
        }
        Command::Search { formula, gamma, universe, clauses, guard, budget_ms } => {
            let gamma = match gamma {
                Some(path) => commands::formula_lines(&read(&path)?),
                None => Vec::new(),
            };
            let bounds = SearchBounds::new(universe, clauses, guard, commands::budget(budget_ms.as_deref())?)?;
            let out = commands::search(&mut Searcher::new(), &formula, &gamma, &bounds)?;
            print!("{}", out.stdout);
            Ok(out.code)
        }
        Command::Repl { spec, log, resume } => {
            let session = match &resume {
                Some(path) => Session::resume("repl", path)?,
                None => {
                    let mut s = Session::create("repl", &read(&spec)?)?;
                    if let Some(path) = &log {
                        s.attach_log(path)?;
                    }
                    s
                }
            };
            repl(Repl::new(session))
        }
        Command::Serve { port, host } => {
            let addr = format!("{host}:{port}");
            let rt = tokio::runtime::Runtime::new().map_err(ServiceError::io)?;
            eprintln!("listening on http://{addr}");
            rt.block_on(http::serve(&addr, http::Sessions::new())).map_err(ServiceError::io)?;
            Ok(0)
        }
        Command::Validate { spec } => {
            print!("{}", commands::validate(&read(&spec)?)?);
            Ok(0)
        }
    }
}

fn repl(mut r: Repl) -> Result<i32, ServiceError> {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    println!("state: {}", r.session().state());
    println!("type `help` for commands");
    loop {
        print!("> ");
        stdout.flush().map_err(ServiceError::io)?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line).map_err(ServiceError::io)? == 0 {
            return Ok(0);
        }
        match r.execute(&line) {
            Reply::Quit => return Ok(0),
            Reply::Text(t) => print!("{t}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error[{}]: {}", e.code, e.message);
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
