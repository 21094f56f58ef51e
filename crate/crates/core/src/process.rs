//! ACP-style process terms over promise events, with guards, and their
//! small-step semantics on `(term, state)` configurations.
//!
//! Parallel composition is free interleaving; there is no communication
//! merge. A guard is evaluated against the state in which its body takes
//! its first step, so a guard can never authorize an action after an
//! interleaved step has falsified it.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::TaskBody;
use crate::promise::{Agent, GeneralizedPromise, ModelError, Promise, PromiseModel, State};

/// An atomic action of the process language.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    /// Promise introduction `pi_{a,b}(x)`.
    Pi(Promise),
    /// Promise withdrawal `pw_{a,b}(x)`.
    Pw(Promise),
    /// Generalized introduction `pi_{a[c]->b[d]}(x)` through the compliance rule.
    PiGeneralized(GeneralizedPromise),
}

impl Event {
    pub fn pi(a: &str, x: TaskBody, b: &str) -> Self {
        Event::Pi(Promise::new(Agent::new(a), x, Agent::new(b)))
    }

    pub fn pw(a: &str, x: TaskBody, b: &str) -> Self {
        Event::Pw(Promise::new(Agent::new(a), x, Agent::new(b)))
    }

    /// Whether the event can fire in `state`.
    pub fn enabled(&self, model: &PromiseModel, state: &State) -> bool {
        match self {
            Event::Pi(p) => state.pi_enabled(model, p),
            Event::Pw(p) => state.pw_enabled(p),
            Event::PiGeneralized(g) => state.generalized_enabled(model, g),
        }
    }

    /// The successor state, or `None` if the event is not enabled.
    pub fn apply(&self, model: &PromiseModel, state: &State) -> Option<State> {
        match self {
            Event::Pi(p) => state.introduce(model, p).ok(),
            Event::Pw(p) => state.withdraw(p).ok(),
            Event::PiGeneralized(g) => state.introduce_generalized(model, g).ok(),
        }
    }

    pub fn check(&self, model: &PromiseModel) -> Result<(), ModelError> {
        match self {
            Event::Pi(p) | Event::Pw(p) => model.check_promise(p),
            Event::PiGeneralized(g) => model.check_generalized(g),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Pi(p) => write!(f, "pi({}, {}, {})", p.promiser, p.body, p.promisee),
            Event::Pw(p) => write!(f, "pw({}, {}, {})", p.promiser, p.body, p.promisee),
            Event::PiGeneralized(g) => write!(
                f,
                "pi({}[{}], {}, {}[{}])",
                g.promiser, g.performer, g.body, g.promisee, g.beneficiary
            ),
        }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An agent position in a condition: a concrete agent or a variable bound
/// by an enclosing quantifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentRef {
    Agent(Agent),
    Var(Arc<str>),
}

impl AgentRef {
    pub fn agent(name: &str) -> Self {
        AgentRef::Agent(Agent::new(name))
    }

    pub fn var(name: &str) -> Self {
        AgentRef::Var(Arc::from(name))
    }

    fn resolve(&self, env: &[(Arc<str>, Agent)]) -> Result<Agent, ConditionError> {
        match self {
            AgentRef::Agent(a) => Ok(a.clone()),
            AgentRef::Var(v) => env
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, a)| a.clone())
                .ok_or_else(|| ConditionError::UnboundVariable(v.to_string())),
        }
    }
}

/// Guard conditions over a promise state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    True,
    False,
    /// `p_{a,b}(x)`.
    HasPromise {
        promiser: AgentRef,
        body: TaskBody,
        promisee: AgentRef,
    },
    /// `E(x)`.
    IsExclusive(TaskBody),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Implies(Box<Condition>, Box<Condition>),
    /// `forall var != excluding : body`, ranging over the model's agents.
    ForAll {
        var: Arc<str>,
        excluding: AgentRef,
        body: Box<Condition>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("unbound variable `{0}` in condition")]
    UnboundVariable(String),
}

impl Condition {
    pub fn has_promise(promiser: AgentRef, body: TaskBody, promisee: AgentRef) -> Self {
        Condition::HasPromise {
            promiser,
            body,
            promisee,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Condition) -> Self {
        Condition::Not(Box::new(c))
    }

    pub fn and(l: Condition, r: Condition) -> Self {
        Condition::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Condition, r: Condition) -> Self {
        Condition::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Condition, r: Condition) -> Self {
        Condition::Implies(Box::new(l), Box::new(r))
    }

    pub fn for_all(var: &str, excluding: AgentRef, body: Condition) -> Self {
        Condition::ForAll {
            var: Arc::from(var),
            excluding,
            body: Box::new(body),
        }
    }

    /// The first variable occurring free, if any.
    pub fn free_variable(&self) -> Option<String> {
        fn go(c: &Condition, bound: &mut Vec<Arc<str>>) -> Option<String> {
            let free = |r: &AgentRef, bound: &[Arc<str>]| match r {
                AgentRef::Var(v) if !bound.contains(v) => Some(v.to_string()),
                _ => None,
            };
            match c {
                Condition::True | Condition::False | Condition::IsExclusive(_) => None,
                Condition::HasPromise {
                    promiser, promisee, ..
                } => free(promiser, bound).or_else(|| free(promisee, bound)),
                Condition::Not(c) => go(c, bound),
                Condition::And(l, r) | Condition::Or(l, r) | Condition::Implies(l, r) => {
                    go(l, bound).or_else(|| go(r, bound))
                }
                Condition::ForAll {
                    var,
                    excluding,
                    body,
                } => free(excluding, bound).or_else(|| {
                    bound.push(var.clone());
                    let r = go(body, bound);
                    bound.pop();
                    r
                }),
            }
        }
        go(self, &mut Vec::new())
    }

    /// Evaluates a closed condition against `state`.
    pub fn eval(&self, model: &PromiseModel, state: &State) -> Result<bool, ConditionError> {
        if let Some(v) = self.free_variable() {
            return Err(ConditionError::UnboundVariable(v));
        }
        self.eval_in(model, state, &mut Vec::new())
    }

    fn eval_in(
        &self,
        model: &PromiseModel,
        state: &State,
        env: &mut Vec<(Arc<str>, Agent)>,
    ) -> Result<bool, ConditionError> {
        Ok(match self {
            Condition::True => true,
            Condition::False => false,
            Condition::HasPromise {
                promiser,
                body,
                promisee,
            } => state.has_promise(&promiser.resolve(env)?, body, &promisee.resolve(env)?),
            Condition::IsExclusive(x) => model.is_exclusive(x),
            Condition::Not(c) => !c.eval_in(model, state, env)?,
            Condition::And(l, r) => l.eval_in(model, state, env)? && r.eval_in(model, state, env)?,
            Condition::Or(l, r) => l.eval_in(model, state, env)? || r.eval_in(model, state, env)?,
            Condition::Implies(l, r) => {
                !l.eval_in(model, state, env)? || r.eval_in(model, state, env)?
            }
            Condition::ForAll {
                var,
                excluding,
                body,
            } => {
                let skip = excluding.resolve(env)?;
                for a in model.agents().iter().filter(|a| **a != skip) {
                    env.push((var.clone(), a.clone()));
                    let holds = body.eval_in(model, state, env);
                    env.pop();
                    if !holds? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }
}

/// Process terms. `Done` is the successfully terminated process; it has no
/// concrete syntax of its own in scenarios but renders as `skip`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Done,
    Deadlock,
    Act(Event),
    Seq(Box<Term>, Box<Term>),
    Alt(Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
    Guard(Condition, Box<Term>),
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Term {
    pub fn act(e: Event) -> Self {
        Term::Act(e)
    }

    pub fn seq(l: Term, r: Term) -> Self {
        Term::Seq(Box::new(l), Box::new(r))
    }

    pub fn alt(l: Term, r: Term) -> Self {
        Term::Alt(Box::new(l), Box::new(r))
    }

    pub fn par(l: Term, r: Term) -> Self {
        Term::Par(Box::new(l), Box::new(r))
    }

    pub fn guard(c: Condition, body: Term) -> Self {
        Term::Guard(c, Box::new(body))
    }

    /// Successful termination predicate.
    pub fn can_terminate(&self) -> bool {
        match self {
            Term::Done => true,
            Term::Deadlock | Term::Act(_) | Term::Guard(..) => false,
            Term::Seq(l, r) | Term::Par(l, r) => l.can_terminate() && r.can_terminate(),
            Term::Alt(l, r) => l.can_terminate() || r.can_terminate(),
        }
    }

    /// Nesting depth: leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Done | Term::Deadlock | Term::Act(_) => 1,
            Term::Guard(_, t) => 1 + t.depth(),
            Term::Seq(l, r) | Term::Alt(l, r) | Term::Par(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Every event occurring in the term, guards included.
    pub fn events(&self) -> Vec<&Event> {
        let mut out = Vec::new();
        self.collect_events(&mut out);
        out
    }

    fn collect_events<'a>(&'a self, out: &mut Vec<&'a Event>) {
        match self {
            Term::Done | Term::Deadlock => {}
            Term::Act(e) => out.push(e),
            Term::Guard(_, t) => t.collect_events(out),
            Term::Seq(l, r) | Term::Alt(l, r) | Term::Par(l, r) => {
                l.collect_events(out);
                r.collect_events(out);
            }
        }
    }

    /// Conditions of every guard in the term.
    pub fn conditions(&self) -> Vec<&Condition> {
        match self {
            Term::Done | Term::Deadlock | Term::Act(_) => Vec::new(),
            Term::Guard(c, t) => {
                let mut v = vec![c];
                v.extend(t.conditions());
                v
            }
            Term::Seq(l, r) | Term::Alt(l, r) | Term::Par(l, r) => {
                let mut v = l.conditions();
                v.extend(r.conditions());
                v
            }
        }
    }

    // `Done . q` and `Done || q` behave exactly as `q`; collapsing them keeps
    // configuration deduplication effective.
    fn then(self, rest: &Term) -> Term {
        match self {
            Term::Done => rest.clone(),
            t => Term::seq(t, rest.clone()),
        }
    }

    fn beside_right(self, right: &Term) -> Term {
        match (self, right) {
            (Term::Done, r) => r.clone(),
            (l, Term::Done) => l,
            (l, r) => Term::par(l, r.clone()),
        }
    }

    fn beside_left(self, left: &Term) -> Term {
        match (left, self) {
            (l, Term::Done) => l.clone(),
            (Term::Done, r) => r,
            (l, r) => Term::par(l.clone(), r),
        }
    }

    fn transitions(&self, model: &PromiseModel, state: &State, out: &mut Vec<(Event, Term, State)>) {
        match self {
            Term::Done | Term::Deadlock => {}
            Term::Act(e) => {
                if let Some(next) = e.apply(model, state) {
                    out.push((e.clone(), Term::Done, next));
                }
            }
            Term::Alt(l, r) => {
                l.transitions(model, state, out);
                r.transitions(model, state, out);
            }
            Term::Seq(l, r) => {
                let mut left = Vec::new();
                l.transitions(model, state, &mut left);
                out.extend(left.into_iter().map(|(e, t, s)| (e, t.then(r), s)));
                if l.can_terminate() {
                    r.transitions(model, state, out);
                }
            }
            Term::Par(l, r) => {
                let mut side = Vec::new();
                l.transitions(model, state, &mut side);
                out.extend(side.drain(..).map(|(e, t, s)| (e, t.beside_right(r), s)));
                r.transitions(model, state, &mut side);
                out.extend(side.into_iter().map(|(e, t, s)| (e, t.beside_left(l), s)));
            }
            Term::Guard(c, body) => {
                // an open condition never holds
                if c.eval(model, state).unwrap_or(false) {
                    body.transitions(model, state, out);
                }
            }
        }
    }
}

/// A `(term, state)` pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub term: Term,
    pub state: State,
}

impl Configuration {
    pub fn new(term: Term, state: State) -> Self {
        Configuration { term, state }
    }

    pub fn can_terminate(&self) -> bool {
        self.term.can_terminate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub event: Event,
    pub target: Configuration,
}

/// All one-step transitions of a configuration, sorted and without
/// duplicates.
pub fn step(model: &PromiseModel, config: &Configuration) -> Vec<Transition> {
    let mut raw = Vec::new();
    config.term.transitions(model, &config.state, &mut raw);
    let set: BTreeSet<Transition> = raw
        .into_iter()
        .map(|(event, term, state)| Transition {
            event,
            target: Configuration { term, state },
        })
        .collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProcessError {
    #[error("protocol body must be a positive service, got `{0}`")]
    InvalidBody(TaskBody),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The negotiation protocol for introducing `a : x -> b`:
///
/// ```text
/// pi(a, x, b) . ( [E(~x) => forall c != a : not p(b, c, ~x)] -> pi(b, ~x, a)
///               + pi(b, !~x, a) . (pw(a, x, b) || pw(b, !~x, a)) )
/// ```
///
/// `b` either accepts by promising to use `x`, guarded so that an
/// exclusive use is not promised twice, or declines, after which both
/// promises are withdrawn.
pub fn make_protocol(
    model: &PromiseModel,
    a: &Agent,
    b: &Agent,
    x: &TaskBody,
) -> Result<Term, ProcessError> {
    if !(x.is_service() && x.is_positive()) {
        return Err(ProcessError::InvalidBody(x.clone()));
    }
    let offer = Promise::new(a.clone(), x.clone(), b.clone());
    model.check_promise(&offer)?;

    let used = x.usage();
    let declined = used.negate();
    let var = fresh_variable(model);

    let guard = Condition::implies(
        Condition::IsExclusive(used.clone()),
        Condition::for_all(
            &var,
            AgentRef::Agent(a.clone()),
            Condition::not(Condition::has_promise(
                AgentRef::Agent(b.clone()),
                used.clone(),
                AgentRef::var(&var),
            )),
        ),
    );
    let accept = Term::guard(
        guard,
        Term::act(Event::Pi(Promise::new(b.clone(), used, a.clone()))),
    );
    let decline_promise = Promise::new(b.clone(), declined, a.clone());
    let decline = Term::seq(
        Term::act(Event::Pi(decline_promise.clone())),
        Term::par(
            Term::act(Event::Pw(offer.clone())),
            Term::act(Event::Pw(decline_promise)),
        ),
    );
    Ok(Term::seq(Term::act(Event::Pi(offer)), Term::alt(accept, decline)))
}

// `c`, unless an agent already has that name.
fn fresh_variable(model: &PromiseModel) -> String {
    let taken = |v: &str| model.agents().iter().any(|a| a.as_str() == v);
    if !taken("c") {
        return "c".to_owned();
    }
    (1..).map(|i| format!("c{i}")).find(|v| !taken(v)).unwrap()
}
