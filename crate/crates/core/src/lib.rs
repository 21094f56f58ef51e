//! Promise theory on top of a small ACP-style process algebra.
//!
//! * [`algebra`]: task bodies in normal form and the laws of usage,
//!   negation, typing, incompatibility and exclusiveness.
//! * [`promise`]: agents, promises, promise states and the introduction and
//!   withdrawal rules.
//! * [`process`]: process terms with guards and their small-step semantics.
//! * [`explorer`]: exhaustive state-space exploration and trace checking.
//! * [`dsl`]: the `.promise` scenario language and trace files.
//! * [`laws`]: brute-force re-verification of the algebraic laws on a model.
//! * [`corpus`]: the bundled scenarios.

pub mod algebra;
pub mod corpus;
pub mod dsl;
pub mod explorer;
pub mod laws;
pub mod process;
pub mod promise;

pub use algebra::{Atom, TaskBody, TypeTag};
pub use dsl::{parse_scenario, Render, Scenario};
pub use explorer::{Lts, Outcome, Trace, Verdict};
pub use process::{Condition, Configuration, Event, Term};
pub use promise::{Agent, ConflictScope, Promise, PromiseModel, State};
