//! Machine-readable report shapes. Field order is the serialization order.

use serde::Serialize;

use promise_core::explorer::{Outcome, Trace, Verdict, Violation};
use promise_core::State;

fn promises(state: &State) -> Vec<String> {
    state.iter().map(ToString::to_string).collect()
}

#[derive(Serialize)]
pub struct CheckReport {
    pub status: &'static str,
    pub agents: usize,
    pub tasks: usize,
    pub task_bodies: usize,
    pub incompatible_pairs: usize,
    pub exclusive: Vec<String>,
    pub law_violations: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct TraceReport {
    pub events: Vec<String>,
    pub outcome: String,
}

impl From<&Trace> for TraceReport {
    fn from(t: &Trace) -> Self {
        TraceReport {
            events: t.events.iter().map(ToString::to_string).collect(),
            outcome: t.outcome.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct DeadlockReport {
    pub node: usize,
    pub term: String,
    pub state: Vec<String>,
}

#[derive(Serialize)]
pub struct ExploreReport {
    pub conflict_scope: &'static str,
    pub complete: bool,
    pub nodes: usize,
    pub edges: usize,
    pub traces: Vec<TraceReport>,
    pub deadlocks: Vec<DeadlockReport>,
    pub violations: Vec<String>,
}

#[derive(Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub events: Vec<String>,
    pub outcome: String,
    pub final_state: Vec<String>,
}

#[derive(Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum VerdictReport {
    Accepted {
        maximal: bool,
        outcome: Option<String>,
        final_state: Vec<String>,
    },
    Rejected {
        index: usize,
        event: String,
        available: Vec<String>,
    },
}

impl VerdictReport {
    pub fn new(verdict: &Verdict, events: &[promise_core::Event]) -> Self {
        match verdict {
            Verdict::Accepted {
                final_state,
                maximal,
                outcome,
            } => VerdictReport::Accepted {
                maximal: *maximal,
                outcome: outcome.map(|o: Outcome| o.to_string()),
                final_state: promises(final_state),
            },
            Verdict::Rejected { index, available } => VerdictReport::Rejected {
                index: *index,
                event: events[*index].to_string(),
                available: available.iter().map(ToString::to_string).collect(),
            },
        }
    }
}

pub fn state_list(state: &State) -> Vec<String> {
    promises(state)
}

pub fn violation_list(v: &[Violation]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}
