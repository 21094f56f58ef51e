//! Task bodies and the static algebra over them: usage, negation, the
//! service/positive predicates, typing, incompatibility and exclusiveness.
//!
//! Every task body is kept in the normal form `(atom, usage parity,
//! negation parity)`, so the involution and commutation laws between `~`
//! and `!` hold by construction and equality is plain structural equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Name of the reserved compliance atom.
pub const GAMMA: &str = "gamma";
/// Name of the reserved type of the compliance atom.
pub const COMPLIANCE: &str = "compliance";

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeTag(Arc<str>);

impl TypeTag {
    pub fn new(name: &str) -> Self {
        TypeTag(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeTag({})", self.0)
    }
}

/// Name of an atomic task. Atoms are positive services.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Self {
        Atom(Arc::from(name))
    }

    pub fn gamma() -> Self {
        Atom::new(GAMMA)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_gamma(&self) -> bool {
        &*self.0 == GAMMA
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A task body in normal form.
///
/// `usage` records whether `~` was applied an odd number of times and
/// `negated` the same for `!`. The canonical rendering is `[!][~]atom`,
/// negation outermost.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskBody {
    atom: Atom,
    usage: bool,
    negated: bool,
}

impl TaskBody {
    /// The atom itself: a positive service.
    pub fn atom(atom: Atom) -> Self {
        TaskBody {
            atom,
            usage: false,
            negated: false,
        }
    }

    pub fn named(name: &str) -> Self {
        TaskBody::atom(Atom::new(name))
    }

    pub fn gamma() -> Self {
        TaskBody::atom(Atom::gamma())
    }

    pub fn from_parts(atom: Atom, usage: bool, negated: bool) -> Self {
        TaskBody {
            atom,
            usage,
            negated,
        }
    }

    /// The four task bodies generated by an atom under `~` and `!`.
    pub fn forms(atom: &Atom) -> [TaskBody; 4] {
        [
            TaskBody::from_parts(atom.clone(), false, false),
            TaskBody::from_parts(atom.clone(), true, false),
            TaskBody::from_parts(atom.clone(), false, true),
            TaskBody::from_parts(atom.clone(), true, true),
        ]
    }

    pub fn atom_name(&self) -> &Atom {
        &self.atom
    }

    pub fn has_usage(&self) -> bool {
        self.usage
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// `~x`: making use of `x` as performed by another agent.
    pub fn usage(&self) -> TaskBody {
        TaskBody {
            usage: !self.usage,
            ..self.clone()
        }
    }

    /// `!x`: not doing `x`.
    pub fn negate(&self) -> TaskBody {
        TaskBody {
            negated: !self.negated,
            ..self.clone()
        }
    }

    pub fn is_service(&self) -> bool {
        !self.usage
    }

    pub fn is_positive(&self) -> bool {
        !self.negated
    }

    pub fn is_gamma(&self) -> bool {
        self.atom.is_gamma()
    }
}

impl fmt::Display for TaskBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        if self.usage {
            f.write_str("~")?;
        }
        f.write_str(self.atom.as_str())
    }
}

impl fmt::Debug for TaskBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown task `{0}`")]
    UnknownAtom(String),
    #[error("type `{0}` declared twice")]
    DuplicateType(String),
    #[error("task `{0}` declared twice")]
    DuplicateAtom(String),
    #[error("`{0}` is reserved")]
    ReservedName(String),
    #[error("incompatible tasks must share a type: `{left}` has type `{left_type}`, `{right}` has type `{right_type}`")]
    TypeMismatch {
        left: TaskBody,
        left_type: TypeTag,
        right: TaskBody,
        right_type: TypeTag,
    },
    #[error("a task cannot be incompatible with itself: `{0}`")]
    ReflexiveDeclaration(TaskBody),
    #[error("`{x}` # `{y}` and `{x}` # `{negated}` cannot both hold", negated = .y.negate())]
    NegationConflict { x: TaskBody, y: TaskBody },
    #[error("the compliance task cannot be declared incompatible: `{0}`")]
    ComplianceIncompatible(TaskBody),
}

/// Types and atoms of a model. `gamma : compliance` is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    types: Vec<TypeTag>,
    atoms: Vec<(Atom, TypeTag)>,
    lookup: BTreeMap<Atom, TypeTag>,
}

impl Default for Signature {
    fn default() -> Self {
        Self::new()
    }
}

impl Signature {
    pub fn new() -> Self {
        let compliance = TypeTag::new(COMPLIANCE);
        let mut lookup = BTreeMap::new();
        lookup.insert(Atom::gamma(), compliance.clone());
        Signature {
            types: vec![compliance.clone()],
            atoms: vec![(Atom::gamma(), compliance)],
            lookup,
        }
    }

    pub fn add_type(&mut self, name: &str) -> Result<TypeTag, AlgebraError> {
        if name == COMPLIANCE {
            return Err(AlgebraError::ReservedName(name.to_owned()));
        }
        if self.types.iter().any(|t| t.as_str() == name) {
            return Err(AlgebraError::DuplicateType(name.to_owned()));
        }
        let tag = TypeTag::new(name);
        self.types.push(tag.clone());
        Ok(tag)
    }

    pub fn add_atom(&mut self, name: &str, ty: &str) -> Result<Atom, AlgebraError> {
        if name == GAMMA {
            return Err(AlgebraError::ReservedName(name.to_owned()));
        }
        let atom = Atom::new(name);
        if self.lookup.contains_key(&atom) {
            return Err(AlgebraError::DuplicateAtom(name.to_owned()));
        }
        let tag = self
            .types
            .iter()
            .find(|t| t.as_str() == ty)
            .cloned()
            .ok_or_else(|| AlgebraError::UnknownType(ty.to_owned()))?;
        self.atoms.push((atom.clone(), tag.clone()));
        self.lookup.insert(atom.clone(), tag);
        Ok(atom)
    }

    /// Declared types in declaration order, `compliance` first.
    pub fn types(&self) -> &[TypeTag] {
        &self.types
    }

    /// Atoms in declaration order, `gamma` first.
    pub fn atoms(&self) -> &[(Atom, TypeTag)] {
        &self.atoms
    }

    pub fn contains_atom(&self, atom: &Atom) -> bool {
        self.lookup.contains_key(atom)
    }

    pub fn contains(&self, x: &TaskBody) -> bool {
        self.contains_atom(x.atom_name())
    }

    /// The type of a task body; usage and negation do not change it.
    pub fn type_of(&self, x: &TaskBody) -> Option<&TypeTag> {
        self.lookup.get(x.atom_name())
    }

    /// All `4 * |atoms|` task bodies, in atom declaration order.
    pub fn bodies(&self) -> impl Iterator<Item = TaskBody> + '_ {
        self.atoms.iter().flat_map(|(a, _)| TaskBody::forms(a))
    }

    fn require(&self, x: &TaskBody) -> Result<&TypeTag, AlgebraError> {
        self.type_of(x)
            .ok_or_else(|| AlgebraError::UnknownAtom(x.atom_name().to_string()))
    }
}

/// The incompatibility relation `#`, closed under the axiom `x # !x` and
/// symmetry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncompatibilityRelation {
    declared: Vec<(TaskBody, TaskBody)>,
    // both orientations of every pair
    pairs: BTreeSet<(TaskBody, TaskBody)>,
}

impl IncompatibilityRelation {
    /// Builds the smallest symmetric relation containing the declared pairs
    /// and every axiom pair `(x, !x)` over the signature, rejecting
    /// declarations that break the incompatibility laws.
    pub fn build(
        signature: &Signature,
        declared: &[(TaskBody, TaskBody)],
    ) -> Result<Self, AlgebraError> {
        for (x, y) in declared {
            let tx = signature.require(x)?;
            let ty = signature.require(y)?;
            if x.is_gamma() {
                return Err(AlgebraError::ComplianceIncompatible(x.clone()));
            }
            if y.is_gamma() {
                return Err(AlgebraError::ComplianceIncompatible(y.clone()));
            }
            if x == y {
                return Err(AlgebraError::ReflexiveDeclaration(x.clone()));
            }
            if tx != ty {
                return Err(AlgebraError::TypeMismatch {
                    left: x.clone(),
                    left_type: tx.clone(),
                    right: y.clone(),
                    right_type: ty.clone(),
                });
            }
        }

        let mut pairs = BTreeSet::new();
        for x in signature.bodies() {
            let nx = x.negate();
            pairs.insert((nx.clone(), x.clone()));
            pairs.insert((x, nx));
        }
        for (x, y) in declared {
            pairs.insert((x.clone(), y.clone()));
            pairs.insert((y.clone(), x.clone()));
        }

        // x # y forbids x # !y
        for (x, y) in &pairs {
            if pairs.contains(&(x.clone(), y.negate())) {
                let (x, y) = if y.is_positive() {
                    (x.clone(), y.clone())
                } else {
                    (x.clone(), y.negate())
                };
                return Err(AlgebraError::NegationConflict { x, y });
            }
        }

        Ok(IncompatibilityRelation {
            declared: declared.to_vec(),
            pairs,
        })
    }

    pub fn incompatible(&self, x: &TaskBody, y: &TaskBody) -> bool {
        self.pairs.contains(&(x.clone(), y.clone()))
    }

    /// Pairs as written by the user, in declaration order.
    pub fn declared(&self) -> &[(TaskBody, TaskBody)] {
        &self.declared
    }

    /// The closure, listing each pair in both orientations.
    pub fn pairs(&self) -> impl Iterator<Item = (&TaskBody, &TaskBody)> {
        self.pairs.iter().map(|(x, y)| (x, y))
    }

    /// Number of unordered pairs in the closure.
    pub fn unordered_len(&self) -> usize {
        self.pairs.len() / 2
    }
}

/// Task bodies marked exclusive; everything else is non-exclusive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusivenessRegistry {
    exclusive: BTreeSet<TaskBody>,
}

impl ExclusivenessRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if `x` was already registered.
    pub fn insert(&mut self, x: TaskBody) -> bool {
        self.exclusive.insert(x)
    }

    pub fn is_exclusive(&self, x: &TaskBody) -> bool {
        self.exclusive.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TaskBody> {
        self.exclusive.iter()
    }

    pub fn len(&self) -> usize {
        self.exclusive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exclusive.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jub() -> Signature {
        let mut sig = Signature::new();
        sig.add_type("transport").unwrap();
        sig.add_atom("tbc2JUB", "transport").unwrap();
        sig
    }

    fn travel() -> Signature {
        let mut sig = Signature::new();
        sig.add_type("travel").unwrap();
        sig.add_type("food").unwrap();
        sig.add_atom("train", "travel").unwrap();
        sig.add_atom("car", "travel").unwrap();
        sig.add_atom("lunch", "food").unwrap();
        sig
    }

    #[test]
    fn usage_is_an_involution() {
        let x = TaskBody::named("tbc2JUB");
        assert_eq!(x.usage().to_string(), "~tbc2JUB");
        assert_eq!(x.usage().usage(), x);
    }

    #[test]
    fn usage_commutes_with_negation() {
        for x in jub().bodies() {
            assert_eq!(x.negate().usage(), x.usage().negate());
        }
    }

    #[test]
    fn negated_gamma_is_still_a_service() {
        let g = TaskBody::gamma().negate();
        assert!(g.is_service());
        assert!(!g.is_positive());
    }

    #[test]
    fn predicates_on_example_bodies() {
        let x = TaskBody::named("tbc2JUB");
        assert!(TaskBody::gamma().is_service());
        assert!(TaskBody::gamma().is_positive());
        assert!(!x.usage().is_service());
        assert!(!x.usage().negate().is_service());
        assert!(!x.negate().is_positive());
        assert!(x.usage().is_positive());
    }

    #[test]
    fn types_ignore_usage_and_negation() {
        let sig = jub();
        let x = TaskBody::named("tbc2JUB");
        let transport = TypeTag::new("transport");
        assert_eq!(sig.type_of(&x), Some(&transport));
        assert_eq!(sig.type_of(&x.usage()), Some(&transport));
        assert_eq!(sig.type_of(&x.usage().negate()), Some(&transport));
    }

    #[test]
    fn rendering_puts_negation_outermost() {
        let x = TaskBody::named("tbc2JUB");
        assert_eq!(x.usage().negate().to_string(), "!~tbc2JUB");
        assert_eq!(x.negate().usage().to_string(), "!~tbc2JUB");
    }

    #[test]
    fn axiom_only_closure_over_one_atom() {
        let mut sig = Signature::new();
        sig.add_type("t").unwrap();
        sig.add_atom("a", "t").unwrap();
        let rel = IncompatibilityRelation::build(&sig, &[]).unwrap();
        let a = Atom::new("a");
        let forms = TaskBody::forms(&a);
        let count = rel
            .pairs()
            .filter(|(x, y)| x.atom_name() == &a && y.atom_name() == &a && x < y)
            .count();
        assert_eq!(count, 2);
        // the 4 ordered axiom instances x # !x, one per form
        for x in &forms {
            assert!(rel.incompatible(x, &x.negate()));
        }
        // gamma contributes its own two unordered pairs
        assert_eq!(rel.unordered_len(), 4);
    }

    #[test]
    fn declared_pair_is_symmetric() {
        let sig = travel();
        let train = TaskBody::named("train");
        let car = TaskBody::named("car");
        let rel = IncompatibilityRelation::build(&sig, &[(train.clone(), car.clone())]).unwrap();
        assert!(rel.incompatible(&car, &train));
        assert!(!rel.incompatible(&car, &train.negate()));
        assert!(!rel.incompatible(&car, &car));
        assert!(rel.incompatible(&car, &car.negate()));
    }

    #[test]
    fn negation_conflict_is_rejected() {
        let sig = travel();
        let train = TaskBody::named("train");
        let car = TaskBody::named("car");
        let err =
            IncompatibilityRelation::build(&sig, &[(train.clone(), car.clone()), (train, car.negate())])
                .unwrap_err();
        assert!(matches!(err, AlgebraError::NegationConflict { .. }), "{err}");
    }

    #[test]
    fn cross_type_declaration_is_rejected() {
        let sig = travel();
        let err = IncompatibilityRelation::build(
            &sig,
            &[(TaskBody::named("train"), TaskBody::named("lunch"))],
        )
        .unwrap_err();
        assert!(matches!(err, AlgebraError::TypeMismatch { .. }));
    }

    #[test]
    fn reflexive_declaration_is_rejected() {
        let sig = travel();
        let car = TaskBody::named("car");
        let err = IncompatibilityRelation::build(&sig, &[(car.clone(), car)]).unwrap_err();
        assert!(matches!(err, AlgebraError::ReflexiveDeclaration(_)));
    }

    #[test]
    fn redundant_axiom_declaration_is_absorbed() {
        let sig = travel();
        let car = TaskBody::named("car");
        let plain = IncompatibilityRelation::build(&sig, &[]).unwrap();
        let redundant = IncompatibilityRelation::build(&sig, &[(car.clone(), car.negate())]).unwrap();
        assert!(plain.pairs().eq(redundant.pairs()));
    }

    #[test]
    fn gamma_cannot_be_declared_incompatible() {
        let mut sig = travel();
        sig.add_atom("obey", "travel").unwrap();
        let err =
            IncompatibilityRelation::build(&sig, &[(TaskBody::gamma(), TaskBody::named("car"))])
                .unwrap_err();
        assert!(matches!(err, AlgebraError::ComplianceIncompatible(_)));
    }

    #[test]
    fn unknown_atom_is_rejected() {
        let sig = travel();
        let err = IncompatibilityRelation::build(
            &sig,
            &[(TaskBody::named("boat"), TaskBody::named("car"))],
        )
        .unwrap_err();
        assert_eq!(err, AlgebraError::UnknownAtom("boat".into()));
    }

    #[test]
    fn exclusiveness_defaults_to_false() {
        let x = TaskBody::named("tbc2JUB");
        let mut reg = ExclusivenessRegistry::new();
        reg.insert(x.usage());
        assert!(reg.is_exclusive(&x.usage()));
        assert!(!reg.is_exclusive(&x));
        assert!(!reg.is_exclusive(&TaskBody::gamma()));
    }

    #[test]
    fn reserved_names_cannot_be_redeclared() {
        let mut sig = Signature::new();
        assert!(matches!(sig.add_type(COMPLIANCE), Err(AlgebraError::ReservedName(_))));
        assert!(matches!(sig.add_atom(GAMMA, COMPLIANCE), Err(AlgebraError::ReservedName(_))));
        sig.add_type("t").unwrap();
        assert!(matches!(sig.add_type("t"), Err(AlgebraError::DuplicateType(_))));
        assert!(matches!(sig.add_atom("x", "u"), Err(AlgebraError::UnknownType(_))));
    }
}
