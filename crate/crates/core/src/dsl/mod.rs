//! Scenario files (`.promise`) and trace files.
//!
//! A scenario is line oriented. Lines starting with `#` are comments.
//!
//! ```text
//! agent ja ju ma
//! subord ju <= ma
//! type transport
//! task tbc2JUB : transport
//! exclusive ~tbc2JUB
//! incompatible train # car
//! def offer = pi(ja, tbc2JUB, ma)
//! init pi(ju, gamma, ma)
//! run protocol(ja, ma, tbc2JUB) || protocol(ju, ma, tbc2JUB)
//! ```
//!
//! Terms: `pi(a, x, b)`, `pi(a[c], x, b[d])`, `pw(a, x, b)`, `delta`,
//! `skip`, `P . Q`, `P + Q`, `P || Q`, `[COND] -> P`, `protocol(a, b, x)`
//! and references to earlier `def`s. `.` binds tighter than `+`, which
//! binds tighter than `||`; all three associate to the left. A guard
//! applies to the single term after the arrow.
//!
//! Conditions: `p(a, x, b)`, `E(x)`, `true`, `false`, `not`, `and`, `or`,
//! `=>` (right associative) and `forall c != a : COND`, whose body extends
//! as far right as possible.
//!
//! Task bodies are written `[!][~]atom`; repeated prefixes cancel.

mod lexer;
mod parser;
mod render;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::process::{Event, ProcessError, Term};
use crate::promise::{ModelError, PromiseError, PromiseModel, State};

pub use lexer::is_identifier;
pub use parser::{parse_body, parse_condition, parse_event, parse_scenario, parse_term, parse_trace};
pub use render::{render_events, render_scenario, Render};

/// Words that cannot be used as declared names.
pub const RESERVED: &[&str] = &[
    "pi", "pw", "delta", "skip", "protocol", "p", "E", "not", "and", "or", "forall", "true",
    "false", "gamma", "compliance",
];

/// A parsed and validated scenario. Definitions are stored expanded:
/// references to earlier definitions and `protocol(..)` are replaced by the
/// terms they denote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub model: PromiseModel,
    pub definitions: Vec<(String, Term)>,
    pub entry: Term,
    pub initial_state: State,
}

impl Scenario {
    pub fn initial_configuration(&self) -> crate::process::Configuration {
        crate::process::Configuration::new(self.entry.clone(), self.initial_state.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProcessError),
    #[error("initial state: {0}")]
    InitialState(PromiseError),
    #[error("`init` accepts basic introductions only, got `{0}`")]
    InitNotIntroduction(Event),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
    #[error("`{0}` defined twice")]
    DuplicateDefinition(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("scenario has no `run` line")]
    MissingRun,
    #[error("scenario has more than one `run` line")]
    DuplicateRun,
    #[error("scenario has more than one `init` line")]
    DuplicateInit,
}

impl ValidationError {
    /// The task-algebra error underneath, if that is what this is.
    pub fn algebra(&self) -> Option<&AlgebraError> {
        match self {
            ValidationError::Model(ModelError::Algebra(e)) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("{line}:{column}: {error}")]
    Validation {
        line: usize,
        column: usize,
        error: Box<ValidationError>,
    },
}

impl DslError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            DslError::Syntax { line, column, .. } | DslError::Validation { line, column, .. } => {
                (*line, *column)
            }
        }
    }

    pub fn validation(&self) -> Option<&ValidationError> {
        match self {
            DslError::Validation { error, .. } => Some(error.as_ref()),
            DslError::Syntax { .. } => None,
        }
    }
}

