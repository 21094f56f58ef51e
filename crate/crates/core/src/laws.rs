//! Brute-force re-verification of the task-body and incompatibility laws
//! over every task body of a model.

use std::fmt;

use crate::algebra::{IncompatibilityRelation, Signature, TaskBody};
use crate::promise::PromiseModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawViolation {
    pub law: &'static str,
    pub detail: String,
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.law, self.detail)
    }
}

fn check(out: &mut Vec<LawViolation>, law: &'static str, holds: bool, x: &TaskBody) {
    if !holds {
        out.push(LawViolation {
            law,
            detail: format!("fails for `{x}`"),
        });
    }
}

/// Usage/negation identities and the service, positivity and typing laws.
pub fn check_task_laws(sig: &Signature) -> Vec<LawViolation> {
    let mut out = Vec::new();
    let gamma = TaskBody::gamma();
    check(&mut out, "s(gamma) = true", gamma.is_service(), &gamma);
    check(&mut out, "p(gamma) = true", gamma.is_positive(), &gamma);
    for x in sig.bodies() {
        check(&mut out, "~~x = x", x.usage().usage() == x, &x);
        check(&mut out, "!!x = x", x.negate().negate() == x, &x);
        check(&mut out, "~!x = !~x", x.negate().usage() == x.usage().negate(), &x);
        check(&mut out, "s(!x) = s(x)", x.negate().is_service() == x.is_service(), &x);
        check(&mut out, "s(~x) = !s(x)", x.usage().is_service() != x.is_service(), &x);
        check(&mut out, "p(!x) = !p(x)", x.negate().is_positive() != x.is_positive(), &x);
        check(&mut out, "p(~x) = p(x)", x.usage().is_positive() == x.is_positive(), &x);
        let t = sig.type_of(&x);
        check(
            &mut out,
            "t(~x) = t(x) = t(!x)",
            t.is_some() && sig.type_of(&x.usage()) == t && sig.type_of(&x.negate()) == t,
            &x,
        );
    }
    out
}

/// The incompatibility laws, checked pairwise over all task bodies.
pub fn check_incompatibility_laws(sig: &Signature, rel: &IncompatibilityRelation) -> Vec<LawViolation> {
    let mut out = Vec::new();
    let bodies: Vec<TaskBody> = sig.bodies().collect();
    for x in &bodies {
        check(&mut out, "x # !x", rel.incompatible(x, &x.negate()), x);
        check(&mut out, "not x # x", !rel.incompatible(x, x), x);
        for y in &bodies {
            if !rel.incompatible(x, y) {
                continue;
            }
            let pair = |law| LawViolation {
                law,
                detail: format!("fails for `{x}` # `{y}`"),
            };
            if !rel.incompatible(y, x) {
                out.push(pair("x # y => y # x"));
            }
            if sig.type_of(x) != sig.type_of(y) {
                out.push(pair("x # y => t(x) = t(y)"));
            }
            if rel.incompatible(x, &y.negate()) {
                out.push(pair("x # y => not x # !y"));
            }
        }
    }
    out
}

pub fn check_model(model: &PromiseModel) -> Vec<LawViolation> {
    let mut out = check_task_laws(model.signature());
    out.extend(check_incompatibility_laws(
        model.signature(),
        model.incompatibility(),
    ));
    out
}
