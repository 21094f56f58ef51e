//! Test-only oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;

use promise_core::explorer::Outcome;
use promise_core::process::AgentRef;
use promise_core::{Condition, Event, PromiseModel, TaskBody, Term};
use rand::seq::IndexedRandom;
use rand::Rng;

/// A direct recursive reading of the transition rules over a two-agent,
/// one-atom model with `E(x)` and no declared incompatibilities. Shares no
/// code with the interpreter beyond the term and event types.
pub mod oracle {
    use super::*;

    // (promiser, usage, negated, promisee)
    type Fact = (String, bool, bool, String);
    type Facts = BTreeSet<Fact>;

    #[derive(Clone)]
    enum O {
        Done,
        Delta,
        Act(Event),
        Seq(Box<O>, Box<O>),
        Alt(Box<O>, Box<O>),
        Par(Box<O>, Box<O>),
        Guard(Cond, Box<O>),
    }

    #[derive(Clone)]
    enum Cond {
        Has(Fact),
        Not(Box<Cond>),
        True,
        False,
    }

    fn fact(p: &promise_core::Promise) -> Fact {
        (
            p.promiser.to_string(),
            p.body.has_usage(),
            p.body.is_negated(),
            p.promisee.to_string(),
        )
    }

    fn agent(r: &AgentRef) -> String {
        match r {
            AgentRef::Agent(a) => a.to_string(),
            AgentRef::Var(v) => panic!("oracle has no quantifiers, got variable {v}"),
        }
    }

    fn cond(c: &Condition) -> Cond {
        match c {
            Condition::True => Cond::True,
            Condition::False => Cond::False,
            Condition::Not(c) => Cond::Not(Box::new(cond(c))),
            Condition::HasPromise {
                promiser,
                body,
                promisee,
            } => Cond::Has((agent(promiser), body.has_usage(), body.is_negated(), agent(promisee))),
            other => panic!("oracle does not cover condition {other}"),
        }
    }

    fn lower(t: &Term) -> O {
        let b = |t: &Term| Box::new(lower(t));
        match t {
            Term::Done => O::Done,
            Term::Deadlock => O::Delta,
            Term::Act(e) => O::Act(e.clone()),
            Term::Seq(l, r) => O::Seq(b(l), b(r)),
            Term::Alt(l, r) => O::Alt(b(l), b(r)),
            Term::Par(l, r) => O::Par(b(l), b(r)),
            Term::Guard(c, body) => O::Guard(cond(c), b(body)),
        }
    }

    fn holds(c: &Cond, s: &Facts) -> bool {
        match c {
            Cond::True => true,
            Cond::False => false,
            Cond::Has(f) => s.contains(f),
            Cond::Not(c) => !holds(c, s),
        }
    }

    // x # !x and ~x # !~x, between promises of one promiser to one promisee;
    // E(x) forbids plain x toward two promisees.
    fn fire(e: &Event, s: &Facts) -> Option<Facts> {
        match e {
            Event::Pi(p) => {
                let (a, u, n, b) = fact(p);
                let clash = s.iter().any(|(a2, u2, n2, b2)| {
                    let conflict = *a2 == a && *b2 == b && *u2 == u && *n2 != n;
                    let exclusive = !u && !n && *a2 == a && !*u2 && !*n2 && *b2 != b;
                    conflict || exclusive
                });
                if clash {
                    return None;
                }
                let mut next = s.clone();
                next.insert((a, u, n, b));
                Some(next)
            }
            Event::Pw(p) => {
                let f = fact(p);
                let mut next = s.clone();
                next.remove(&f).then_some(next)
            }
            Event::PiGeneralized(_) => panic!("oracle has no generalized promises"),
        }
    }

    fn ends(t: &O) -> bool {
        match t {
            O::Done => true,
            O::Delta | O::Act(_) | O::Guard(..) => false,
            O::Seq(l, r) | O::Par(l, r) => ends(l) && ends(r),
            O::Alt(l, r) => ends(l) || ends(r),
        }
    }

    // One-step moves; a residual of `None` means the component has finished.
    fn moves(t: &O, s: &Facts) -> Vec<(Event, Option<O>, Facts)> {
        match t {
            O::Done | O::Delta => vec![],
            O::Act(e) => fire(e, s).map(|n| (e.clone(), None, n)).into_iter().collect(),
            O::Alt(l, r) => {
                let mut v = moves(l, s);
                v.extend(moves(r, s));
                v
            }
            O::Seq(l, r) => {
                let mut v: Vec<_> = moves(l, s)
                    .into_iter()
                    .map(|(e, rest, n)| {
                        let next = match rest {
                            None => (**r).clone(),
                            Some(l2) => O::Seq(Box::new(l2), r.clone()),
                        };
                        (e, Some(next), n)
                    })
                    .collect();
                if ends(l) {
                    v.extend(moves(r, s));
                }
                v
            }
            O::Par(l, r) => {
                let mut v: Vec<_> = moves(l, s)
                    .into_iter()
                    .map(|(e, rest, n)| {
                        let next = match rest {
                            None => (**r).clone(),
                            Some(l2) => O::Par(Box::new(l2), r.clone()),
                        };
                        (e, Some(next), n)
                    })
                    .collect();
                v.extend(moves(r, s).into_iter().map(|(e, rest, n)| {
                    let next = match rest {
                        None => (**l).clone(),
                        Some(r2) => O::Par(l.clone(), Box::new(r2)),
                    };
                    (e, Some(next), n)
                }));
                v
            }
            O::Guard(c, body) => {
                if holds(c, s) {
                    moves(body, s)
                } else {
                    vec![]
                }
            }
        }
    }

    fn collect(t: &O, s: &Facts, path: &mut Vec<Event>, out: &mut BTreeSet<(Vec<Event>, Outcome)>) {
        let ms = moves(t, s);
        if ms.is_empty() {
            let outcome = if ends(t) {
                Outcome::Successful
            } else {
                Outcome::Deadlocked
            };
            out.insert((path.clone(), outcome));
            return;
        }
        for (e, rest, n) in ms {
            path.push(e);
            match rest {
                Some(r) => collect(&r, &n, path, out),
                None => collect(&O::Done, &n, path, out),
            }
            path.pop();
        }
    }

    /// Maximal traces of `t` from the empty state.
    pub fn maximal_traces(t: &Term) -> BTreeSet<(Vec<Event>, Outcome)> {
        let mut out = BTreeSet::new();
        collect(&lower(t), &Facts::new(), &mut Vec::new(), &mut out);
        out
    }
}

/// The model the oracle describes.
pub fn oracle_model() -> PromiseModel {
    let mut b = PromiseModel::builder();
    b.agent("a").unwrap().agent("b").unwrap();
    b.type_tag("t").unwrap();
    b.task("x", "t").unwrap();
    b.exclusive(TaskBody::named("x")).unwrap();
    b.build().unwrap()
}

/// Every term of depth at most 3 over a fixed set of leaves and guards.
pub fn terms_up_to_depth_3() -> Vec<Term> {
    let x = TaskBody::named("x");
    let leaves = vec![
        Term::act(Event::pi("a", x.clone(), "b")),
        Term::act(Event::pi("a", x.clone(), "a")),
        Term::act(Event::pw("a", x.clone(), "b")),
        Term::act(Event::pi("a", x.negate(), "b")),
        Term::Deadlock,
        Term::Done,
    ];
    let has = Condition::has_promise(AgentRef::agent("a"), x, AgentRef::agent("b"));
    let guards = [has.clone(), Condition::not(has)];

    let grow = |all: &[Term], newest: &[Term]| {
        let mut out = Vec::new();
        for l in all {
            for r in all {
                if !newest.contains(l) && !newest.contains(r) {
                    continue;
                }
                out.push(Term::seq(l.clone(), r.clone()));
                out.push(Term::alt(l.clone(), r.clone()));
                out.push(Term::par(l.clone(), r.clone()));
            }
        }
        for t in newest {
            for g in &guards {
                out.push(Term::guard(g.clone(), t.clone()));
            }
        }
        out
    };
    let depth2 = grow(&leaves, &leaves);
    let upto2: Vec<Term> = leaves.iter().chain(&depth2).cloned().collect();
    let depth3 = grow(&upto2, &depth2);
    upto2.into_iter().chain(depth3).collect()
}

const TYPE_NAMES: &[&str] = &["transport", "food", "energy"];
const TASK_NAMES: &[&str] = &["car", "train", "lunch", "soup", "power", "heat"];
const AGENT_NAMES: &[&str] = &["ann", "bob", "cat", "dan"];

fn body<R: Rng>(rng: &mut R, tasks: &[&str]) -> String {
    let atom = tasks.choose(rng).unwrap();
    let prefix = ["", "~", "!", "!~"].choose(rng).unwrap();
    format!("{prefix}{atom}")
}

fn condition<R: Rng>(rng: &mut R, agents: &[&str], tasks: &[&str], depth: u32) -> String {
    let leaf = depth == 0 || rng.random_bool(0.4);
    if leaf {
        return match rng.random_range(0..4) {
            0 => "true".into(),
            1 => "false".into(),
            2 => format!("E({})", body(rng, tasks)),
            _ => format!(
                "p({}, {}, {})",
                agents.choose(rng).unwrap(),
                body(rng, tasks),
                agents.choose(rng).unwrap()
            ),
        };
    }
    let sub = |rng: &mut R| condition(rng, agents, tasks, depth - 1);
    match rng.random_range(0..5) {
        0 => format!("not ({})", sub(rng)),
        1 => format!("({}) and ({})", sub(rng), sub(rng)),
        2 => format!("({}) or ({})", sub(rng), sub(rng)),
        3 => format!("({}) => ({})", sub(rng), sub(rng)),
        _ => {
            let a = agents.choose(rng).unwrap();
            format!(
                "forall v != {a} : not p({}, {}, v)",
                agents.choose(rng).unwrap(),
                body(rng, tasks)
            )
        }
    }
}

fn term<R: Rng>(rng: &mut R, agents: &[&str], tasks: &[&str], defs: &[String], depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.3) {
        let a = agents.choose(rng).unwrap();
        let b = agents.choose(rng).unwrap();
        return match rng.random_range(0..7) {
            0 => "delta".into(),
            1 => "skip".into(),
            2 if !defs.is_empty() => defs.choose(rng).unwrap().clone(),
            3 if a != b => format!("protocol({a}, {b}, {})", tasks.choose(rng).unwrap()),
            4 => format!("pw({a}, {}, {b})", body(rng, tasks)),
            _ => format!("pi({a}, {}, {b})", body(rng, tasks)),
        };
    }
    let sub = |rng: &mut R| term(rng, agents, tasks, defs, depth - 1);
    match rng.random_range(0..4) {
        0 => format!("({}) . ({})", sub(rng), sub(rng)),
        1 => format!("({}) + ({})", sub(rng), sub(rng)),
        2 => format!("({}) || ({})", sub(rng), sub(rng)),
        _ => format!(
            "[{}] -> ({})",
            condition(rng, agents, tasks, 2),
            sub(rng)
        ),
    }
}

/// A random well-formed scenario. Declared incompatibilities are between
/// positive services of one type, so they never contradict the closure
/// rules.
pub fn random_scenario<R: Rng>(rng: &mut R) -> String {
    let mut out = String::new();
    let n_agents = rng.random_range(2..=AGENT_NAMES.len());
    let agents = &AGENT_NAMES[..n_agents];
    writeln!(out, "# generated").unwrap();
    writeln!(out, "agent {}", agents.join(" ")).unwrap();
    for i in 1..n_agents {
        if rng.random_bool(0.4) {
            writeln!(out, "subord {} <= {}", agents[i - 1], agents[i]).unwrap();
        }
    }
    let n_types = rng.random_range(1..=TYPE_NAMES.len());
    for t in &TYPE_NAMES[..n_types] {
        writeln!(out, "type {t}").unwrap();
    }
    let mut typed: Vec<(&str, &str)> = Vec::new();
    for (i, task) in TASK_NAMES.iter().enumerate() {
        if i < 1 || rng.random_bool(0.6) {
            let ty = TYPE_NAMES[..n_types].choose(rng).unwrap();
            typed.push((task, ty));
            writeln!(out, "task {task} : {ty}").unwrap();
        }
    }
    let tasks: Vec<&str> = typed.iter().map(|(t, _)| *t).collect();
    for _ in 0..rng.random_range(0..3) {
        writeln!(out, "exclusive {}", body(rng, &tasks)).unwrap();
    }
    for (i, (x, tx)) in typed.iter().enumerate() {
        for (y, ty) in &typed[i + 1..] {
            if tx == ty && rng.random_bool(0.5) {
                writeln!(out, "incompatible {x} # {y}").unwrap();
            }
        }
    }
    let mut defs = Vec::new();
    for i in 0..rng.random_range(0..3) {
        let name = format!("d{i}");
        writeln!(out, "def {name} = {}", term(rng, agents, &tasks, &defs, 2)).unwrap();
        defs.push(name);
    }
    if rng.random_bool(0.5) {
        writeln!(out, "init pi({}, gamma, {})", agents[0], agents[1]).unwrap();
    }
    let mut entry = term(rng, agents, &tasks, &defs, 3);
    if rng.random_bool(0.3) {
        entry = format!(
            "pi({}[{}], {}, {}[{}]) . ({entry})",
            agents[1],
            agents[0],
            tasks[0],
            agents[1],
            agents[n_agents - 1]
        );
    }
    writeln!(out, "run {entry}").unwrap();
    out
}
