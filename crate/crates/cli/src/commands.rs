use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use promise_core::dsl::{parse_scenario, parse_trace, Scenario};
use promise_core::explorer::{
    build_lts, check_invariants, find_deadlocks, maximal_traces, verify_trace, walk,
    ExploreError, Verdict,
};
use promise_core::laws;
use promise_core::promise::obligation_warnings;
use promise_core::{ConflictScope, Event};

use crate::report::{
    state_list, violation_list, CheckReport, DeadlockReport, ExploreReport, RunReport,
    TraceReport, VerdictReport,
};
use crate::{Cli, Command, Format, Options, EXIT_FAILURE, EXIT_LIMIT, EXIT_OK, EXIT_USAGE};

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn out(&mut self, s: &str) {
        let _ = self.out.write_all(s.as_bytes());
    }

    fn err(&mut self, s: &str) {
        let _ = self.err.write_all(s.as_bytes());
    }

    fn json<T: serde::Serialize>(&mut self, value: &T) {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        self.out(&s);
    }
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut io = Io { out, err };
    let opts = cli.command.options();
    let scenario = match load_scenario(&opts.scenario, opts.strict_conflicts, &mut io) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match &cli.command {
        Command::Check(o) => check(&scenario, o, &mut io),
        Command::Explore(o) => explore(&scenario, o, &mut io),
        Command::Run(o) => run(&scenario, o, &mut io),
        Command::VerifyTrace(o) => verify(&scenario, o, &mut io),
    }
}

fn load_scenario(path: &Path, strict: bool, io: &mut Io<'_>) -> Result<Scenario, i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        io.err(&format!("error: cannot read {}: {e}\n", path.display()));
        EXIT_USAGE
    })?;
    let mut scenario = parse_scenario(&text).map_err(|e| {
        io.err(&format!("error: {}:{e}\n", path.display()));
        EXIT_FAILURE
    })?;
    if strict {
        scenario.model.set_conflict_scope(ConflictScope::Strict);
    }
    Ok(scenario)
}

fn check(s: &Scenario, o: &Options, io: &mut Io<'_>) -> i32 {
    let m = &s.model;
    let violations = laws::check_model(m);
    let warnings: Vec<String> = s
        .entry
        .events()
        .into_iter()
        .chain(s.definitions.iter().flat_map(|(_, t)| t.events()))
        .filter_map(|e| match e {
            Event::PiGeneralized(g) => Some(obligation_warnings(m, g)),
            _ => None,
        })
        .flatten()
        .map(|w| w.to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let report = CheckReport {
        status: if violations.is_empty() { "ok" } else { "failed" },
        agents: m.agents().len(),
        tasks: m.signature().atoms().len(),
        task_bodies: m.signature().bodies().count(),
        incompatible_pairs: m.incompatibility().unordered_len(),
        exclusive: m.exclusiveness().iter().map(ToString::to_string).collect(),
        law_violations: violations.iter().map(ToString::to_string).collect(),
        warnings,
    };
    match o.format {
        Format::Json => io.json(&report),
        Format::Text => {
            let mut t = String::new();
            let _ = writeln!(t, "agents: {}", report.agents);
            let _ = writeln!(t, "tasks: {} ({} task bodies)", report.tasks, report.task_bodies);
            let _ = writeln!(t, "incompatible pairs: {}", report.incompatible_pairs);
            let _ = writeln!(t, "exclusive: {}", report.exclusive.join(", "));
            for v in &report.law_violations {
                let _ = writeln!(t, "law violated: {v}");
            }
            for w in &report.warnings {
                let _ = writeln!(t, "warning: {w}");
            }
            let _ = writeln!(t, "status: {}", report.status);
            io.out(&t);
        }
    }
    for w in &report.warnings {
        io.err(&format!("warning: {w}\n"));
    }
    if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn explore(s: &Scenario, o: &Options, io: &mut Io<'_>) -> i32 {
    let m = &s.model;
    let lts = match build_lts(m, s.initial_configuration(), o.node_limit) {
        Ok(l) => l,
        Err(ExploreError::NodeLimit { limit, partial }) => {
            io.err(&format!(
                "error: state space exceeds the node limit of {limit} ({} edges explored)\n",
                partial.edge_count()
            ));
            return EXIT_LIMIT;
        }
        Err(e) => {
            io.err(&format!("error: {e}\n"));
            return EXIT_LIMIT;
        }
    };
    let traces = match maximal_traces(&lts, o.max_traces) {
        Ok(t) => t,
        Err(e) => {
            io.err(&format!("error: {e}\n"));
            return EXIT_LIMIT;
        }
    };
    let deadlocks = find_deadlocks(&lts);
    let violations = check_invariants(m, &lts);

    let report = ExploreReport {
        conflict_scope: match m.conflict_scope() {
            ConflictScope::Dyadic => "dyadic",
            ConflictScope::Strict => "strict",
        },
        complete: lts.is_complete(),
        nodes: lts.node_count(),
        edges: lts.edge_count(),
        traces: traces.iter().map(TraceReport::from).collect(),
        deadlocks: deadlocks
            .iter()
            .map(|&id| DeadlockReport {
                node: id,
                term: lts.node(id).term.to_string(),
                state: state_list(&lts.node(id).state),
            })
            .collect(),
        violations: violation_list(&violations),
    };
    match o.format {
        Format::Json => io.json(&report),
        Format::Text => {
            let mut t = String::new();
            let _ = writeln!(t, "conflict scope: {}", report.conflict_scope);
            let _ = writeln!(t, "nodes: {}", report.nodes);
            let _ = writeln!(t, "edges: {}", report.edges);
            let _ = writeln!(t, "traces: {}", report.traces.len());
            for tr in &report.traces {
                let _ = writeln!(t, "  [{}] {}", tr.outcome, tr.events.join(" . "));
            }
            let _ = writeln!(t, "deadlocks: {}", report.deadlocks.len());
            for d in &report.deadlocks {
                let _ = writeln!(t, "  node {}: {} with {{{}}}", d.node, d.term, d.state.join(", "));
            }
            let _ = writeln!(t, "violations: {}", report.violations.len());
            for v in &report.violations {
                let _ = writeln!(t, "  {v}");
            }
            io.out(&t);
        }
    }
    if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn run(s: &Scenario, o: &Options, io: &mut Io<'_>) -> i32 {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let (trace, state) = walk(&s.model, s.initial_configuration(), |options| {
        rng.random_range(0..options.len())
    });
    let report = RunReport {
        seed: o.seed,
        events: trace.events.iter().map(ToString::to_string).collect(),
        outcome: trace.outcome.to_string(),
        final_state: state_list(&state),
    };
    match o.format {
        Format::Json => io.json(&report),
        Format::Text => {
            // a valid trace file: everything but the events is a comment
            let mut t = String::new();
            let _ = writeln!(t, "# seed: {}", report.seed);
            for e in &report.events {
                let _ = writeln!(t, "{e}");
            }
            let _ = writeln!(t, "# outcome: {}", report.outcome);
            let _ = writeln!(t, "# final state: {{{}}}", report.final_state.join(", "));
            io.out(&t);
        }
    }
    EXIT_OK
}

fn verify(s: &Scenario, o: &Options, io: &mut Io<'_>) -> i32 {
    let Some(path) = &o.trace else {
        io.err("error: verify-trace requires --trace FILE\n");
        return EXIT_USAGE;
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            io.err(&format!("error: cannot read {}: {e}\n", path.display()));
            return EXIT_USAGE;
        }
    };
    let events = match parse_trace(&text, &s.model) {
        Ok(ev) => ev,
        Err(e) => {
            io.err(&format!("error: {}:{e}\n", path.display()));
            return EXIT_FAILURE;
        }
    };
    let verdict = verify_trace(&s.model, &s.initial_configuration(), &events);
    let report = VerdictReport::new(&verdict, &events);
    match o.format {
        Format::Json => io.json(&report),
        Format::Text => {
            let mut t = String::new();
            match &report {
                VerdictReport::Accepted {
                    maximal,
                    outcome,
                    final_state,
                } => {
                    let _ = writeln!(t, "accepted");
                    let _ = writeln!(t, "maximal: {}", if *maximal { "yes" } else { "no" });
                    if let Some(outcome) = outcome {
                        let _ = writeln!(t, "outcome: {outcome}");
                    }
                    let _ = writeln!(t, "final state: {{{}}}", final_state.join(", "));
                }
                VerdictReport::Rejected {
                    index,
                    event,
                    available,
                } => {
                    let _ = writeln!(t, "rejected at event {} (index {index}): {event}", index + 1);
                    let _ = writeln!(t, "available: {}", available.join(", "));
                }
            }
            io.out(&t);
        }
    }
    match verdict {
        Verdict::Accepted { .. } => EXIT_OK,
        Verdict::Rejected { index, .. } => {
            io.err(&format!(
                "error: event {} `{}` is not available\n",
                index + 1,
                events[index]
            ));
            EXIT_FAILURE
        }
    }
}
