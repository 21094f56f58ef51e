use std::fmt::{self, Write};

use super::Scenario;
use crate::algebra::{COMPLIANCE, GAMMA};
use crate::explorer::Trace;
use crate::process::{AgentRef, Condition, Event, Term};
use crate::promise::{Promise, State};

/// Canonical textual form, accepted back by the parsers.
pub trait Render {
    fn render(&self) -> String;
}

// Binding strength, loosest first. Operands weaker than the slot they sit
// in are parenthesized.
fn term_level(t: &Term) -> u8 {
    match t {
        Term::Par(..) => 0,
        Term::Alt(..) => 1,
        Term::Seq(..) => 2,
        Term::Guard(..) => 3,
        Term::Done | Term::Deadlock | Term::Act(_) => 4,
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    let paren = term_level(t) < min;
    if paren {
        f.write_str("(")?;
    }
    match t {
        Term::Done => f.write_str("skip")?,
        Term::Deadlock => f.write_str("delta")?,
        Term::Act(e) => write!(f, "{e}")?,
        Term::Par(l, r) => {
            write_term(f, l, 0)?;
            f.write_str(" || ")?;
            write_term(f, r, 1)?;
        }
        Term::Alt(l, r) => {
            write_term(f, l, 1)?;
            f.write_str(" + ")?;
            write_term(f, r, 2)?;
        }
        Term::Seq(l, r) => {
            write_term(f, l, 2)?;
            f.write_str(" . ")?;
            write_term(f, r, 3)?;
        }
        Term::Guard(c, body) => {
            write!(f, "[{c}] -> ")?;
            write_term(f, body, 3)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

fn cond_level(c: &Condition) -> u8 {
    match c {
        Condition::ForAll { .. } => 0,
        Condition::Implies(..) => 1,
        Condition::Or(..) => 2,
        Condition::And(..) => 3,
        Condition::Not(_) => 4,
        Condition::True
        | Condition::False
        | Condition::HasPromise { .. }
        | Condition::IsExclusive(_) => 5,
    }
}

fn write_cond(f: &mut fmt::Formatter<'_>, c: &Condition, min: u8) -> fmt::Result {
    let paren = cond_level(c) < min;
    if paren {
        f.write_str("(")?;
    }
    match c {
        Condition::True => f.write_str("true")?,
        Condition::False => f.write_str("false")?,
        Condition::HasPromise {
            promiser,
            body,
            promisee,
        } => write!(f, "p({promiser}, {body}, {promisee})")?,
        Condition::IsExclusive(x) => write!(f, "E({x})")?,
        Condition::Not(inner) => {
            f.write_str("not ")?;
            write_cond(f, inner, 4)?;
        }
        Condition::And(l, r) => {
            write_cond(f, l, 3)?;
            f.write_str(" and ")?;
            write_cond(f, r, 4)?;
        }
        Condition::Or(l, r) => {
            write_cond(f, l, 2)?;
            f.write_str(" or ")?;
            write_cond(f, r, 3)?;
        }
        Condition::Implies(l, r) => {
            write_cond(f, l, 2)?;
            f.write_str(" => ")?;
            write_cond(f, r, 0)?;
        }
        Condition::ForAll {
            var,
            excluding,
            body,
        } => {
            write!(f, "forall {var} != {excluding} : ")?;
            write_cond(f, body, 0)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cond(f, self, 0)
    }
}

impl fmt::Display for AgentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentRef::Agent(a) => write!(f, "{a}"),
            AgentRef::Var(v) => f.write_str(v),
        }
    }
}

impl Render for Term {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Render for Condition {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Render for Event {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Render for Promise {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Render for State {
    fn render(&self) -> String {
        self.to_string()
    }
}

/// One event per line, newline terminated.
pub fn render_events(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let _ = writeln!(out, "{e}");
    }
    out
}

impl Render for Trace {
    fn render(&self) -> String {
        render_events(&self.events)
    }
}

impl Render for Scenario {
    fn render(&self) -> String {
        render_scenario(self)
    }
}

pub fn render_scenario(s: &Scenario) -> String {
    let m = &s.model;
    let mut out = String::new();
    if !m.agents().is_empty() {
        let names: Vec<&str> = m.agents().iter().map(|a| a.as_str()).collect();
        let _ = writeln!(out, "agent {}", names.join(" "));
    }
    for (lower, upper) in m.order().declared() {
        let _ = writeln!(out, "subord {lower} <= {upper}");
    }
    for t in m.signature().types().iter().filter(|t| t.as_str() != COMPLIANCE) {
        let _ = writeln!(out, "type {t}");
    }
    for (a, t) in m.signature().atoms().iter().filter(|(a, _)| a.as_str() != GAMMA) {
        let _ = writeln!(out, "task {a} : {t}");
    }
    for x in m.exclusiveness().iter() {
        let _ = writeln!(out, "exclusive {x}");
    }
    for (x, y) in m.incompatibility().declared() {
        let _ = writeln!(out, "incompatible {x} # {y}");
    }
    for (name, t) in &s.definitions {
        let _ = writeln!(out, "def {name} = {t}");
    }
    if !s.initial_state.is_empty() {
        let list: Vec<String> = s
            .initial_state
            .iter()
            .map(|p| Event::Pi(p.clone()).to_string())
            .collect();
        let _ = writeln!(out, "init {}", list.join(", "));
    }
    let _ = writeln!(out, "run {}", s.entry);
    out
}

#[cfg(test)]
mod tests {
    use crate::algebra::TaskBody;
    use crate::dsl::{parse_scenario, parse_term};

    #[test]
    fn body_rendering() {
        assert_eq!(TaskBody::named("tbc2JUB").usage().negate().to_string(), "!~tbc2JUB");
    }

    #[test]
    fn right_nested_operands_are_parenthesized() {
        let s = parse_scenario("agent a b\ntype t\ntask x : t\nrun delta").unwrap();
        for src in [
            "pi(a, x, b) . (pw(a, x, b) . delta)",
            "delta + (skip + delta)",
            "delta || (skip || delta)",
            "[true] -> (delta . skip)",
            "[true] -> delta + skip",
            "(delta + skip) . delta",
            "[E(x) => forall c != a : not p(b, ~x, c)] -> pi(b, ~x, a)",
            "[(forall c != a : true) and not (true or false)] -> delta",
            "[(true => false) => true] -> delta",
            "[not (true and false) or false and true] -> delta",
        ] {
            let t = parse_term(src, &s.model).unwrap();
            assert_eq!(t.to_string(), src);
            assert_eq!(parse_term(&t.to_string(), &s.model).unwrap(), t);
        }
    }

    #[test]
    fn left_nested_operands_stay_bare() {
        let s = parse_scenario("agent a b\ntype t\ntask x : t\nrun delta").unwrap();
        let t = parse_term("(delta . skip) . delta", &s.model).unwrap();
        assert_eq!(t.to_string(), "delta . skip . delta");
    }
}
