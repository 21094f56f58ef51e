//! Exhaustive exploration of the transition system reachable from a
//! configuration: LTS construction, maximal traces, deadlocks, invariant
//! checks and trace verification.
//!
//! Exploration is breadth-first by levels. With the `parallel` feature the
//! successors of a level are computed on the rayon pool; insertion into the
//! node table is always sequential and in frontier order, so the parallel
//! and sequential builders produce identical node numbering and edges.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::algebra::TaskBody;
use crate::process::{step, Configuration, Event, Term, Transition};
use crate::promise::{Agent, Promise, PromiseModel, State};

pub const DEFAULT_NODE_LIMIT: usize = 100_000;
pub const DEFAULT_MAX_TRACES: usize = 10_000;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: NodeId,
    pub event: Event,
    pub target: NodeId,
}

/// A labelled transition system over configurations. Node 0 is the
/// initial configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    nodes: Vec<Configuration>,
    // outgoing (event, target) per node, sorted as `step` returns them
    out: Vec<Vec<(Event, NodeId)>>,
    complete: bool,
}

impl Lts {
    /// A one-node system whose only node is `config`, without edges. Used
    /// to run the state checks on hand-built configurations.
    pub fn single(config: Configuration) -> Self {
        Lts {
            nodes: vec![config],
            out: vec![Vec::new()],
            complete: true,
        }
    }

    pub fn initial(&self) -> &Configuration {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[Configuration] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Configuration {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, id: NodeId) -> &[(Event, NodeId)] {
        &self.out[id]
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out.iter().enumerate().flat_map(|(source, es)| {
            es.iter().map(move |(event, target)| Edge {
                source,
                event: event.clone(),
                target: *target,
            })
        })
    }

    /// False when construction stopped at the node limit.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        self.out[id].is_empty()
    }

    /// Length of the longest path from the initial node.
    pub fn longest_path(&self) -> usize {
        // nodes are discovered in BFS order but the graph is a DAG whose
        // topological order is not the BFS order, so memoize from the sinks
        let mut memo: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut stack = vec![(0usize, false)];
        while let Some((id, expanded)) = stack.pop() {
            if memo[id].is_some() {
                continue;
            }
            if expanded {
                let best = self.out[id]
                    .iter()
                    .map(|(_, t)| memo[*t].map_or(0, |d| d + 1))
                    .max()
                    .unwrap_or(0);
                memo[id] = Some(best);
            } else {
                stack.push((id, true));
                for (_, t) in &self.out[id] {
                    if memo[*t].is_none() {
                        stack.push((*t, false));
                    }
                }
            }
        }
        memo[0].unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("state space exceeds the node limit of {limit}")]
    NodeLimit { limit: usize, partial: Box<Lts> },
    #[error("more than {limit} maximal traces")]
    TraceLimit { limit: usize },
    #[error("transition system is incomplete")]
    Incomplete,
}

fn build_with<F>(initial: Configuration, node_limit: usize, expand: F) -> Result<Lts, ExploreError>
where
    F: Fn(&[Configuration]) -> Vec<Vec<Transition>>,
{
    assert!(node_limit > 0, "node limit must be positive");
    let mut index: HashMap<Configuration, NodeId> = HashMap::new();
    index.insert(initial.clone(), 0);
    let mut lts = Lts {
        nodes: vec![initial],
        out: vec![Vec::new()],
        complete: true,
    };
    let mut frontier: Vec<NodeId> = vec![0];
    while !frontier.is_empty() {
        let configs: Vec<Configuration> = frontier.iter().map(|&i| lts.nodes[i].clone()).collect();
        let expanded = expand(&configs);
        let mut next = Vec::new();
        for (&source, transitions) in frontier.iter().zip(expanded) {
            for Transition { event, target } in transitions {
                let id = match index.get(&target) {
                    Some(&id) => id,
                    None => {
                        if lts.nodes.len() >= node_limit {
                            lts.complete = false;
                            return Err(ExploreError::NodeLimit {
                                limit: node_limit,
                                partial: Box::new(lts),
                            });
                        }
                        let id = lts.nodes.len();
                        index.insert(target.clone(), id);
                        lts.nodes.push(target);
                        lts.out.push(Vec::new());
                        next.push(id);
                        id
                    }
                };
                lts.out[source].push((event, id));
            }
        }
        frontier = next;
    }
    Ok(lts)
}

/// Breadth-first construction on the current thread.
pub fn build_lts_sequential(
    model: &PromiseModel,
    initial: Configuration,
    node_limit: usize,
) -> Result<Lts, ExploreError> {
    build_with(initial, node_limit, |level| {
        level.iter().map(|c| step(model, c)).collect()
    })
}

/// Breadth-first construction with each level expanded on the rayon pool.
#[cfg(feature = "parallel")]
pub fn build_lts_parallel(
    model: &PromiseModel,
    initial: Configuration,
    node_limit: usize,
) -> Result<Lts, ExploreError> {
    use rayon::prelude::*;
    build_with(initial, node_limit, |level| {
        level.par_iter().map(|c| step(model, c)).collect()
    })
}

/// Builds the LTS reachable from `initial`, in parallel when the
/// `parallel` feature is enabled. The result does not depend on the
/// feature.
pub fn build_lts(
    model: &PromiseModel,
    initial: Configuration,
    node_limit: usize,
) -> Result<Lts, ExploreError> {
    #[cfg(feature = "parallel")]
    {
        build_lts_parallel(model, initial, node_limit)
    }
    #[cfg(not(feature = "parallel"))]
    {
        build_lts_sequential(model, initial, node_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Successful,
    Deadlocked,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Successful => "successful",
            Outcome::Deadlocked => "deadlocked",
        })
    }
}

impl Outcome {
    fn of(config: &Configuration) -> Self {
        if config.can_terminate() {
            Outcome::Successful
        } else {
            Outcome::Deadlocked
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace {
    pub events: Vec<Event>,
    pub outcome: Outcome,
}

impl Trace {
    fn sort_key(&self) -> (Vec<String>, Outcome) {
        (self.events.iter().map(Event::to_string).collect(), self.outcome)
    }
}

/// Every event sequence from the initial node to a node without outgoing
/// edges, in lexicographic order of the rendered events. Sequences reached
/// along different paths are reported once per outcome.
pub fn maximal_traces(lts: &Lts, max_traces: usize) -> Result<Vec<Trace>, ExploreError> {
    if !lts.is_complete() {
        return Err(ExploreError::Incomplete);
    }
    let mut found: BTreeSet<(Vec<String>, Outcome, Vec<Event>)> = BTreeSet::new();
    let mut path: Vec<Event> = Vec::new();
    // (node, index of next successor to visit)
    let mut stack: Vec<(NodeId, usize)> = vec![(0, 0)];
    while let Some(top) = stack.last_mut() {
        let (id, next) = *top;
        let succ = lts.successors(id);
        if succ.is_empty() {
            let trace = Trace {
                events: path.clone(),
                outcome: Outcome::of(lts.node(id)),
            };
            let (key, outcome) = trace.sort_key();
            found.insert((key, outcome, trace.events));
            if found.len() > max_traces {
                return Err(ExploreError::TraceLimit { limit: max_traces });
            }
        }
        if next < succ.len() {
            top.1 += 1;
            let (event, target) = &succ[next];
            path.push(event.clone());
            stack.push((*target, 0));
        } else {
            stack.pop();
            if !stack.is_empty() {
                path.pop();
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|(_, outcome, events)| Trace { events, outcome })
        .collect())
}

/// Nodes without outgoing edges whose term cannot terminate.
pub fn find_deadlocks(lts: &Lts) -> Vec<NodeId> {
    (0..lts.node_count())
        .filter(|&id| lts.is_terminal(id) && !lts.node(id).can_terminate())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A promiser holds two incompatible promises within the conflict scope.
    Conflict {
        node: NodeId,
        first: Promise,
        second: Promise,
    },
    /// An exclusive body is promised by one promiser to several promisees.
    Exclusiveness {
        node: NodeId,
        promiser: Agent,
        body: TaskBody,
        promisees: Vec<Agent>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Conflict {
                node,
                first,
                second,
            } => write!(f, "node {node}: {first} conflicts with {second}"),
            Violation::Exclusiveness {
                node,
                promiser,
                body,
                promisees,
            } => {
                let names: Vec<&str> = promisees.iter().map(Agent::as_str).collect();
                write!(
                    f,
                    "node {node}: {promiser} promises exclusive {body} to {}",
                    names.join(", ")
                )
            }
        }
    }
}

/// Conflict-freedom and exclusiveness over every node of the system.
pub fn check_invariants(model: &PromiseModel, lts: &Lts) -> Vec<Violation> {
    let mut out = Vec::new();
    for (node, config) in lts.nodes().iter().enumerate() {
        out.extend(check_state(model, &config.state).into_iter().map(|v| match v {
            Violation::Conflict { first, second, .. } => Violation::Conflict {
                node,
                first,
                second,
            },
            Violation::Exclusiveness {
                promiser,
                body,
                promisees,
                ..
            } => Violation::Exclusiveness {
                node,
                promiser,
                body,
                promisees,
            },
        }));
    }
    out
}

fn check_state(model: &PromiseModel, state: &State) -> Vec<Violation> {
    let mut out: Vec<Violation> = state
        .conflicts(model)
        .into_iter()
        .map(|(first, second)| Violation::Conflict {
            node: 0,
            first,
            second,
        })
        .collect();
    out.extend(
        state
            .exclusiveness_violations(model)
            .into_iter()
            .map(|(promiser, body, promisees)| Violation::Exclusiveness {
                node: 0,
                promiser,
                body,
                promisees,
            }),
    );
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every event labelled an available transition. `outcome` is set when
    /// the trace is maximal, i.e. some configuration it reaches has no
    /// further transitions.
    Accepted {
        final_state: State,
        maximal: bool,
        outcome: Option<Outcome>,
    },
    /// Event `index` (0-based) was not available; `available` lists what was.
    Rejected { index: usize, available: Vec<Event> },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }
}

/// Replays `events` from `initial`. The same event may lead to several
/// configurations (e.g. under `+`), so the set of reachable configurations
/// is tracked. The state is the same in all of them.
pub fn verify_trace(model: &PromiseModel, initial: &Configuration, events: &[Event]) -> Verdict {
    let mut current: BTreeSet<Configuration> = BTreeSet::from([initial.clone()]);
    for (index, event) in events.iter().enumerate() {
        let mut next = BTreeSet::new();
        let mut available = BTreeSet::new();
        for config in &current {
            for t in step(model, config) {
                if &t.event == event {
                    next.insert(t.target);
                } else {
                    available.insert(t.event);
                }
            }
        }
        if next.is_empty() {
            return Verdict::Rejected {
                index,
                available: available.into_iter().collect(),
            };
        }
        current = next;
    }
    let final_state = current
        .first()
        .map(|c| c.state.clone())
        .expect("configuration set is never empty");
    let terminal: Vec<&Configuration> = current
        .iter()
        .filter(|c| step(model, c).is_empty())
        .collect();
    let outcome = if terminal.is_empty() {
        None
    } else if terminal.iter().any(|c| c.can_terminate()) {
        Some(Outcome::Successful)
    } else {
        Some(Outcome::Deadlocked)
    };
    Verdict::Accepted {
        final_state,
        maximal: outcome.is_some(),
        outcome,
    }
}

/// Walks from `initial`, letting `choose` pick among the available
/// transitions (given in `step` order) until none remain.
pub fn walk<F>(model: &PromiseModel, initial: Configuration, mut choose: F) -> (Trace, State)
where
    F: FnMut(&[Transition]) -> usize,
{
    let mut config = initial;
    let mut events = Vec::new();
    loop {
        let mut options = step(model, &config);
        if options.is_empty() {
            let outcome = Outcome::of(&config);
            return (Trace { events, outcome }, config.state);
        }
        let pick = choose(&options).min(options.len() - 1);
        let t = options.swap_remove(pick);
        events.push(t.event);
        config = t.target;
    }
}

/// Maximal traces of many independent terms, each explored from the same
/// initial state. Terms are processed on the rayon pool when the `parallel`
/// feature is enabled; the output order follows `terms`.
pub fn explore_batch(
    model: &PromiseModel,
    terms: &[Term],
    state: &State,
    node_limit: usize,
    max_traces: usize,
) -> Vec<Result<Vec<Trace>, ExploreError>> {
    let one = |t: &Term| {
        let lts = build_lts_sequential(model, Configuration::new(t.clone(), state.clone()), node_limit)?;
        maximal_traces(&lts, max_traces)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        terms.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        terms.iter().map(one).collect()
    }
}
