//! Agents, promises and promise states, together with the two transition
//! rules (introduction and withdrawal), the exclusiveness-conditioned
//! introduction rule and the compliance rule for generalized promises.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{
    AlgebraError, ExclusivenessRegistry, IncompatibilityRelation, Signature, TaskBody, TypeTag,
};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Agent(Arc<str>);

impl Agent {
    pub fn new(name: &str) -> Self {
        Agent(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A basic promise `promiser : body -> promisee`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Promise {
    pub promiser: Agent,
    pub body: TaskBody,
    pub promisee: Agent,
}

impl Promise {
    pub fn new(promiser: Agent, body: TaskBody, promisee: Agent) -> Self {
        Promise {
            promiser,
            body,
            promisee,
        }
    }
}

impl fmt::Display for Promise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{}", self.promiser, self.body, self.promisee)
    }
}

impl fmt::Debug for Promise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `promiser[performer] : body -> promisee[beneficiary]`: the promiser
/// promises the promisee that the performer will do `body` for the
/// beneficiary.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneralizedPromise {
    pub promiser: Agent,
    pub performer: Agent,
    pub body: TaskBody,
    pub promisee: Agent,
    pub beneficiary: Agent,
}

impl GeneralizedPromise {
    pub fn is_basic(&self) -> bool {
        self.promiser == self.performer && self.promisee == self.beneficiary
    }

    /// The basic promise the compliance rule yields: `performer : body -> beneficiary`.
    pub fn induced(&self) -> Promise {
        Promise::new(
            self.performer.clone(),
            self.body.clone(),
            self.beneficiary.clone(),
        )
    }

    /// The compliance promise the rule requires: `performer : gamma -> promiser`.
    pub fn compliance(&self) -> Promise {
        Promise::new(
            self.performer.clone(),
            TaskBody::gamma(),
            self.promiser.clone(),
        )
    }
}

impl From<Promise> for GeneralizedPromise {
    fn from(p: Promise) -> Self {
        GeneralizedPromise {
            performer: p.promiser.clone(),
            promiser: p.promiser,
            body: p.body,
            beneficiary: p.promisee.clone(),
            promisee: p.promisee,
        }
    }
}

impl fmt::Display for GeneralizedPromise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}]:{}->{}[{}]",
            self.promiser, self.performer, self.body, self.promisee, self.beneficiary
        )
    }
}

impl fmt::Debug for GeneralizedPromise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("unknown agent `{0}` in subordination")]
    UnknownAgent(String),
    #[error("subordination is not antisymmetric: `{0}` <= `{1}` and `{1}` <= `{0}`")]
    Cycle(Agent, Agent),
}

/// Subordination `c <= a` on agents. Declared pairs are closed reflexively
/// and transitively; the closure must be antisymmetric.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubordinationOrder {
    declared: Vec<(Agent, Agent)>,
    closure: BTreeSet<(Agent, Agent)>,
}

impl SubordinationOrder {
    pub fn new(declared: Vec<(Agent, Agent)>) -> Result<Self, OrderError> {
        let mut closure: BTreeSet<(Agent, Agent)> = declared
            .iter()
            .filter(|(a, b)| a != b)
            .cloned()
            .collect();
        loop {
            let mut added = Vec::new();
            for (a, b) in &closure {
                for (c, d) in closure.range((b.clone(), Agent::new(""))..) {
                    if c != b {
                        break;
                    }
                    if a != d && !closure.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            closure.extend(added);
        }
        for (a, b) in &closure {
            if closure.contains(&(b.clone(), a.clone())) {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                return Err(OrderError::Cycle(lo.clone(), hi.clone()));
            }
        }
        Ok(SubordinationOrder { declared, closure })
    }

    /// `c <= a`, reflexively.
    pub fn leq(&self, c: &Agent, a: &Agent) -> bool {
        c == a || self.closure.contains(&(c.clone(), a.clone()))
    }

    pub fn declared(&self) -> &[(Agent, Agent)] {
        &self.declared
    }
}

/// Which of a promiser's existing promises an introduction is checked
/// against for incompatibility.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ConflictScope {
    /// Only promises toward the same promisee.
    #[default]
    Dyadic,
    /// Every promise of the promiser, whatever its promisee.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("agent `{0}` declared twice")]
    DuplicateAgent(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
}

/// The static world: agents, subordination, typed atoms, incompatibility
/// and exclusiveness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromiseModel {
    agents: Vec<Agent>,
    order: SubordinationOrder,
    signature: Signature,
    incompatibility: IncompatibilityRelation,
    exclusive: ExclusivenessRegistry,
    scope: ConflictScope,
}

impl PromiseModel {
    pub fn builder() -> ModelBuilder {
        ModelBuilder::default()
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn has_agent(&self, a: &Agent) -> bool {
        self.agents.contains(a)
    }

    pub fn order(&self) -> &SubordinationOrder {
        &self.order
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn incompatibility(&self) -> &IncompatibilityRelation {
        &self.incompatibility
    }

    pub fn exclusiveness(&self) -> &ExclusivenessRegistry {
        &self.exclusive
    }

    pub fn incompatible(&self, x: &TaskBody, y: &TaskBody) -> bool {
        self.incompatibility.incompatible(x, y)
    }

    pub fn is_exclusive(&self, x: &TaskBody) -> bool {
        self.exclusive.is_exclusive(x)
    }

    pub fn type_of(&self, x: &TaskBody) -> Option<&TypeTag> {
        self.signature.type_of(x)
    }

    pub fn conflict_scope(&self) -> ConflictScope {
        self.scope
    }

    pub fn set_conflict_scope(&mut self, scope: ConflictScope) {
        self.scope = scope;
    }

    pub fn with_conflict_scope(mut self, scope: ConflictScope) -> Self {
        self.scope = scope;
        self
    }

    /// Checks that every name in the promise is declared.
    pub fn check_promise(&self, p: &Promise) -> Result<(), ModelError> {
        for a in [&p.promiser, &p.promisee] {
            if !self.has_agent(a) {
                return Err(ModelError::UnknownAgent(a.to_string()));
            }
        }
        if !self.signature.contains(&p.body) {
            return Err(AlgebraError::UnknownAtom(p.body.atom_name().to_string()).into());
        }
        Ok(())
    }

    pub fn check_generalized(&self, g: &GeneralizedPromise) -> Result<(), ModelError> {
        self.check_promise(&Promise::new(
            g.promiser.clone(),
            g.body.clone(),
            g.promisee.clone(),
        ))?;
        self.check_promise(&g.induced())
    }
}

/// Incremental construction of a [`PromiseModel`]. Validation of the
/// incompatibility laws and the order happens in [`ModelBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    agents: Vec<Agent>,
    order: Vec<(Agent, Agent)>,
    signature: Signature,
    declared: Vec<(TaskBody, TaskBody)>,
    exclusive: ExclusivenessRegistry,
}

impl ModelBuilder {
    pub fn agent(&mut self, name: &str) -> Result<&mut Self, ModelError> {
        let a = Agent::new(name);
        if self.agents.contains(&a) {
            return Err(ModelError::DuplicateAgent(name.to_owned()));
        }
        self.agents.push(a);
        Ok(self)
    }

    pub fn subordinate(&mut self, lower: &str, upper: &str) -> Result<&mut Self, ModelError> {
        let pair = (Agent::new(lower), Agent::new(upper));
        for a in [&pair.0, &pair.1] {
            if !self.agents.contains(a) {
                return Err(OrderError::UnknownAgent(a.to_string()).into());
            }
        }
        self.order.push(pair);
        Ok(self)
    }

    pub fn type_tag(&mut self, name: &str) -> Result<&mut Self, ModelError> {
        self.signature.add_type(name)?;
        Ok(self)
    }

    pub fn task(&mut self, name: &str, ty: &str) -> Result<&mut Self, ModelError> {
        self.signature.add_atom(name, ty)?;
        Ok(self)
    }

    pub fn exclusive(&mut self, x: TaskBody) -> Result<&mut Self, ModelError> {
        if !self.signature.contains(&x) {
            return Err(AlgebraError::UnknownAtom(x.atom_name().to_string()).into());
        }
        self.exclusive.insert(x);
        Ok(self)
    }

    pub fn incompatible(&mut self, x: TaskBody, y: TaskBody) -> &mut Self {
        self.declared.push((x, y));
        self
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn has_agent(&self, a: &str) -> bool {
        self.agents.iter().any(|b| b.as_str() == a)
    }

    pub fn build(&self) -> Result<PromiseModel, ModelError> {
        let incompatibility = IncompatibilityRelation::build(&self.signature, &self.declared)?;
        let order = SubordinationOrder::new(self.order.clone())?;
        Ok(PromiseModel {
            agents: self.agents.clone(),
            order,
            signature: self.signature.clone(),
            incompatibility,
            exclusive: self.exclusive.clone(),
            scope: ConflictScope::default(),
        })
    }
}

/// Why an introduction is not enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Blocked {
    /// The promiser already holds `existing`, whose body is incompatible.
    Conflict { existing: Promise },
    /// The body is exclusive and already promised to `existing.promisee`.
    Exclusiveness { existing: Promise },
}

impl fmt::Display for Blocked {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Blocked::Conflict { existing } => write!(f, "conflicts with {existing}"),
            Blocked::Exclusiveness { existing } => {
                write!(f, "exclusive task already promised in {existing}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromiseError {
    #[error("cannot introduce {promise}: {reason}")]
    NotEnabled { promise: Promise, reason: Blocked },
    #[error("cannot withdraw {0}: not present")]
    NotPresent(Promise),
    #[error("cannot introduce {promise}: missing compliance promise {compliance}")]
    NoCompliance {
        promise: Box<GeneralizedPromise>,
        compliance: Promise,
    },
}

/// A set of basic promises. States are values: the transition rules return
/// new states.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    promises: BTreeSet<Promise>,
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.promises.iter()).finish()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.promises.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<Promise> for State {
    fn from_iter<I: IntoIterator<Item = Promise>>(iter: I) -> Self {
        State {
            promises: iter.into_iter().collect(),
        }
    }
}

impl State {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Promise> {
        self.promises.iter()
    }

    pub fn len(&self) -> usize {
        self.promises.len()
    }

    pub fn is_empty(&self) -> bool {
        self.promises.is_empty()
    }

    pub fn contains(&self, p: &Promise) -> bool {
        self.promises.contains(p)
    }

    /// `p_{a,b}(x)`.
    pub fn has_promise(&self, a: &Agent, x: &TaskBody, b: &Agent) -> bool {
        self.promises
            .contains(&Promise::new(a.clone(), x.clone(), b.clone()))
    }

    /// Promises made by `a`.
    pub fn by_promiser<'a>(&'a self, a: &'a Agent) -> impl Iterator<Item = &'a Promise> + 'a {
        self.promises.iter().filter(move |p| &p.promiser == a)
    }

    /// Why `p` could not be introduced into this state, if anything.
    pub fn blocker(&self, model: &PromiseModel, p: &Promise) -> Option<Blocked> {
        let scope = model.conflict_scope();
        for q in self.by_promiser(&p.promiser) {
            let in_scope = scope == ConflictScope::Strict || q.promisee == p.promisee;
            if in_scope && model.incompatible(&p.body, &q.body) {
                return Some(Blocked::Conflict { existing: q.clone() });
            }
        }
        if model.is_exclusive(&p.body) {
            if let Some(q) = self
                .by_promiser(&p.promiser)
                .find(|q| q.body == p.body && q.promisee != p.promisee)
            {
                return Some(Blocked::Exclusiveness { existing: q.clone() });
            }
        }
        None
    }

    pub fn pi_enabled(&self, model: &PromiseModel, p: &Promise) -> bool {
        self.blocker(model, p).is_none()
    }

    /// `S (+) p`. Introducing a promise already present returns the state
    /// unchanged.
    pub fn introduce(&self, model: &PromiseModel, p: &Promise) -> Result<State, PromiseError> {
        if let Some(reason) = self.blocker(model, p) {
            return Err(PromiseError::NotEnabled {
                promise: p.clone(),
                reason,
            });
        }
        let mut next = self.clone();
        next.promises.insert(p.clone());
        Ok(next)
    }

    pub fn pw_enabled(&self, p: &Promise) -> bool {
        self.contains(p)
    }

    /// `S (-) p`.
    pub fn withdraw(&self, p: &Promise) -> Result<State, PromiseError> {
        if !self.contains(p) {
            return Err(PromiseError::NotPresent(p.clone()));
        }
        let mut next = self.clone();
        next.promises.remove(p);
        Ok(next)
    }

    /// The compliance rule: with `performer : gamma -> promiser` in the
    /// state, `g` induces `performer : body -> beneficiary`. The generalized
    /// promise itself is not stored.
    pub fn introduce_generalized(
        &self,
        model: &PromiseModel,
        g: &GeneralizedPromise,
    ) -> Result<State, PromiseError> {
        let compliance = g.compliance();
        if !self.contains(&compliance) {
            return Err(PromiseError::NoCompliance {
                promise: Box::new(g.clone()),
                compliance,
            });
        }
        self.introduce(model, &g.induced())
    }

    pub fn generalized_enabled(&self, model: &PromiseModel, g: &GeneralizedPromise) -> bool {
        self.contains(&g.compliance()) && self.pi_enabled(model, &g.induced())
    }

    /// Pairs of promises in this state that violate conflict-freedom under
    /// the model's conflict scope.
    pub fn conflicts(&self, model: &PromiseModel) -> Vec<(Promise, Promise)> {
        let strict = model.conflict_scope() == ConflictScope::Strict;
        let mut out = Vec::new();
        for p in &self.promises {
            for q in self.promises.range(p.clone()..).skip(1) {
                if q.promiser != p.promiser {
                    break;
                }
                if (strict || q.promisee == p.promisee) && model.incompatible(&p.body, &q.body) {
                    out.push((p.clone(), q.clone()));
                }
            }
        }
        out
    }

    /// Exclusive bodies promised by one promiser to more than one promisee.
    pub fn exclusiveness_violations(&self, model: &PromiseModel) -> Vec<(Agent, TaskBody, Vec<Agent>)> {
        let mut grouped: BTreeMap<(&Agent, &TaskBody), Vec<Agent>> = BTreeMap::new();
        for p in self.promises.iter().filter(|p| model.is_exclusive(&p.body)) {
            grouped
                .entry((&p.promiser, &p.body))
                .or_default()
                .push(p.promisee.clone());
        }
        grouped
            .into_iter()
            .filter(|(_, bs)| bs.len() > 1)
            .map(|((a, x), bs)| (a.clone(), x.clone(), bs))
            .collect()
    }

    pub fn is_consistent(&self, model: &PromiseModel) -> bool {
        self.conflicts(model).is_empty() && self.exclusiveness_violations(model).is_empty()
    }
}

/// Raised when a generalized promise makes a subordinate the performer:
/// the promise then implies an obligation for the subordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObligationWarning {
    pub subordinate: Agent,
    pub superior: Agent,
}

impl fmt::Display for ObligationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "promise by `{}` implies an obligation for subordinate `{}`",
            self.superior, self.subordinate
        )
    }
}

pub fn obligation_warnings(model: &PromiseModel, g: &GeneralizedPromise) -> Vec<ObligationWarning> {
    if g.performer != g.promiser && model.order().leq(&g.performer, &g.promiser) {
        vec![ObligationWarning {
            subordinate: g.performer.clone(),
            superior: g.promiser.clone(),
        }]
    } else {
        Vec::new()
    }
}
