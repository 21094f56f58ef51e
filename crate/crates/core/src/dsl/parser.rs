use std::sync::Arc;

use super::lexer::{lex_line, Spanned, Tok};
use super::{DslError, Scenario, ValidationError, RESERVED};
use crate::algebra::{Atom, IncompatibilityRelation, Signature, TaskBody};
use crate::process::{make_protocol, AgentRef, Condition, Event, Term};
use crate::promise::{
    Agent, GeneralizedPromise, ModelBuilder, ModelError, Promise, PromiseModel, State,
    SubordinationOrder,
};

/// What names resolve against while parsing a line.
struct Names<'a> {
    agents: &'a dyn Fn(&str) -> bool,
    signature: &'a Signature,
    model: Option<&'a PromiseModel>,
    definitions: &'a [(String, Term)],
}

struct LineParser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
    end_column: usize,
    names: Names<'a>,
    // quantifier variables in scope, innermost last
    bound: Vec<Arc<str>>,
}

type PResult<T> = Result<T, DslError>;

impl<'a> LineParser<'a> {
    fn new(text: &str, line: usize, names: Names<'a>) -> PResult<Self> {
        let toks = lex_line(text).map_err(|e| DslError::Syntax {
            line,
            column: e.column,
            expected: "a token".into(),
            found: format!("`{}`", e.found),
        })?;
        Ok(LineParser {
            toks,
            pos: 0,
            line,
            end_column: text.chars().count() + 1,
            names,
            bound: Vec::new(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.end_column, |s| s.column)
    }

    fn syntax<T>(&self, expected: &str) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => t.to_string(),
            None => "end of line".into(),
        };
        Err(DslError::Syntax {
            line: self.line,
            column: self.column(),
            expected: expected.into(),
            found,
        })
    }

    fn invalid_at<T>(&self, column: usize, error: ValidationError) -> PResult<T> {
        Err(DslError::Validation {
            line: self.line,
            column,
            error: Box::new(error),
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.syntax(&tok.to_string())
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, usize)> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, column))
            }
            _ => self.syntax(what),
        }
    }

    /// A name being declared: an identifier that is not reserved.
    fn fresh_name(&mut self, what: &str) -> PResult<(String, usize)> {
        let (name, column) = self.ident(what)?;
        if RESERVED.contains(&name.as_str()) {
            return self.invalid_at(column, ValidationError::Reserved(name));
        }
        Ok((name, column))
    }

    fn finish(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            self.syntax("end of line")
        } else {
            Ok(())
        }
    }

    fn agent(&mut self) -> PResult<Agent> {
        let (name, column) = self.ident("an agent name")?;
        if !(self.names.agents)(&name) {
            return self.invalid_at(column, ValidationError::UnknownAgent(name));
        }
        Ok(Agent::new(&name))
    }

    fn agent_ref(&mut self) -> PResult<AgentRef> {
        let (name, column) = self.ident("an agent name or variable")?;
        if let Some(v) = self.bound.iter().rev().find(|v| ***v == *name) {
            return Ok(AgentRef::Var(v.clone()));
        }
        if !(self.names.agents)(&name) {
            return self.invalid_at(column, ValidationError::UnknownAgent(name));
        }
        Ok(AgentRef::agent(&name))
    }

    fn body(&mut self) -> PResult<TaskBody> {
        let mut usage = false;
        let mut negated = false;
        loop {
            if self.eat(&Tok::Bang) {
                negated = !negated;
            } else if self.eat(&Tok::Tilde) {
                usage = !usage;
            } else {
                break;
            }
        }
        let (name, column) = self.ident("a task name")?;
        let atom = Atom::new(&name);
        if !self.names.signature.contains_atom(&atom) {
            return self.invalid_at(column, ValidationError::UnknownTask(name));
        }
        Ok(TaskBody::from_parts(atom, usage, negated))
    }

    // --- events ---------------------------------------------------------

    fn bracketed_agent(&mut self) -> PResult<Option<Agent>> {
        if self.eat(&Tok::LBracket) {
            let a = self.agent()?;
            self.expect(Tok::RBracket)?;
            Ok(Some(a))
        } else {
            Ok(None)
        }
    }

    /// `pi(...)` or `pw(...)`, positioned at the keyword.
    fn event(&mut self) -> PResult<Event> {
        let (kw, _) = self.ident("`pi` or `pw`")?;
        let withdrawal = match kw.as_str() {
            "pi" => false,
            "pw" => true,
            _ => {
                self.pos -= 1;
                return self.syntax("`pi` or `pw`");
            }
        };
        self.expect(Tok::LParen)?;
        let promiser = self.agent()?;
        let performer = if withdrawal {
            None
        } else {
            self.bracketed_agent()?
        };
        self.expect(Tok::Comma)?;
        let body = self.body()?;
        self.expect(Tok::Comma)?;
        let promisee = self.agent()?;
        let beneficiary = if withdrawal {
            None
        } else {
            self.bracketed_agent()?
        };
        self.expect(Tok::RParen)?;
        if withdrawal {
            return Ok(Event::Pw(Promise::new(promiser, body, promisee)));
        }
        if performer.is_none() && beneficiary.is_none() {
            return Ok(Event::Pi(Promise::new(promiser, body, promisee)));
        }
        Ok(Event::PiGeneralized(GeneralizedPromise {
            performer: performer.unwrap_or_else(|| promiser.clone()),
            promiser,
            body,
            beneficiary: beneficiary.unwrap_or_else(|| promisee.clone()),
            promisee,
        }))
    }

    // --- terms ----------------------------------------------------------

    fn term(&mut self) -> PResult<Term> {
        let mut left = self.term_alt()?;
        while self.eat(&Tok::Bar2) {
            let right = self.term_alt()?;
            left = Term::par(left, right);
        }
        Ok(left)
    }

    fn term_alt(&mut self) -> PResult<Term> {
        let mut left = self.term_seq()?;
        while self.eat(&Tok::Plus) {
            let right = self.term_seq()?;
            left = Term::alt(left, right);
        }
        Ok(left)
    }

    fn term_seq(&mut self) -> PResult<Term> {
        let mut left = self.term_unary()?;
        while self.eat(&Tok::Dot) {
            let right = self.term_unary()?;
            left = Term::seq(left, right);
        }
        Ok(left)
    }

    fn term_unary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::LBracket) {
            let cond = self.condition()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Arrow)?;
            let body = self.term_unary()?;
            return Ok(Term::guard(cond, body));
        }
        self.term_primary()
    }

    fn term_primary(&mut self) -> PResult<Term> {
        if self.eat(&Tok::LParen) {
            let t = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok(t);
        }
        let column = self.column();
        let Some(word) = self.peek_ident().map(str::to_owned) else {
            return self.syntax("a process term");
        };
        match word.as_str() {
            "pi" | "pw" => Ok(Term::act(self.event()?)),
            "delta" => {
                self.pos += 1;
                Ok(Term::Deadlock)
            }
            "skip" => {
                self.pos += 1;
                Ok(Term::Done)
            }
            "protocol" => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let b = self.agent()?;
                self.expect(Tok::Comma)?;
                let x = self.body()?;
                self.expect(Tok::RParen)?;
                let model = self
                    .names
                    .model
                    .expect("terms are parsed against a built model");
                match make_protocol(model, &a, &b, &x) {
                    Ok(t) => Ok(t),
                    Err(e) => self.invalid_at(column, e.into()),
                }
            }
            _ => {
                self.pos += 1;
                match self.names.definitions.iter().find(|(n, _)| *n == word) {
                    Some((_, t)) => Ok(t.clone()),
                    None => self.invalid_at(column, ValidationError::UnknownDefinition(word)),
                }
            }
        }
    }

    // --- conditions -----------------------------------------------------

    fn condition(&mut self) -> PResult<Condition> {
        if self.eat_keyword("forall") {
            let (var, column) = self.ident("a variable")?;
            if RESERVED.contains(&var.as_str()) {
                return self.invalid_at(column, ValidationError::Reserved(var));
            }
            self.expect(Tok::NotEq)?;
            let excluding = self.agent_ref()?;
            self.expect(Tok::Colon)?;
            self.bound.push(Arc::from(var.as_str()));
            let body = self.condition();
            self.bound.pop();
            return Ok(Condition::for_all(&var, excluding, body?));
        }
        let left = self.cond_or()?;
        if self.eat(&Tok::FatArrow) {
            let right = self.condition()?;
            return Ok(Condition::implies(left, right));
        }
        Ok(left)
    }

    fn cond_or(&mut self) -> PResult<Condition> {
        let mut left = self.cond_and()?;
        while self.eat_keyword("or") {
            let right = self.cond_and()?;
            left = Condition::or(left, right);
        }
        Ok(left)
    }

    fn cond_and(&mut self) -> PResult<Condition> {
        let mut left = self.cond_not()?;
        while self.eat_keyword("and") {
            let right = self.cond_not()?;
            left = Condition::and(left, right);
        }
        Ok(left)
    }

    fn cond_not(&mut self) -> PResult<Condition> {
        if self.eat_keyword("not") {
            return Ok(Condition::not(self.cond_not()?));
        }
        self.cond_atom()
    }

    fn cond_atom(&mut self) -> PResult<Condition> {
        if self.eat(&Tok::LParen) {
            let c = self.condition()?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        if self.eat_keyword("true") {
            return Ok(Condition::True);
        }
        if self.eat_keyword("false") {
            return Ok(Condition::False);
        }
        if self.peek_ident() == Some("p") && self.peek_at(1) == Some(&Tok::LParen) {
            self.pos += 2;
            let a = self.agent_ref()?;
            self.expect(Tok::Comma)?;
            let x = self.body()?;
            self.expect(Tok::Comma)?;
            let b = self.agent_ref()?;
            self.expect(Tok::RParen)?;
            return Ok(Condition::has_promise(a, x, b));
        }
        if self.peek_ident() == Some("E") && self.peek_at(1) == Some(&Tok::LParen) {
            self.pos += 2;
            let x = self.body()?;
            self.expect(Tok::RParen)?;
            return Ok(Condition::IsExclusive(x));
        }
        self.syntax("a condition")
    }
}

fn is_comment_or_blank(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#')
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, DslError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !is_comment_or_blank(l))
        .collect();

    // first pass: the static model
    let mut builder = ModelBuilder::default();
    let mut declared: Vec<(TaskBody, TaskBody)> = Vec::new();
    let mut order: Vec<(Agent, Agent)> = Vec::new();
    let mut behaviour: Vec<(usize, &str)> = Vec::new();

    for &(line, text) in &lines {
        let keyword = text.split_whitespace().next().unwrap_or("");
        if matches!(keyword, "def" | "init" | "run") {
            behaviour.push((line, text));
            continue;
        }
        let snapshot = builder.clone();
        let has_agent = |a: &str| snapshot.has_agent(a);
        let mut p = LineParser::new(
            text,
            line,
            Names {
                agents: &has_agent,
                signature: snapshot.signature(),
                model: None,
                definitions: &[],
            },
        )?;
        let (kw, _) = p.ident("a declaration keyword")?;
        let wrap = |column: usize, e: ModelError| DslError::Validation {
            line,
            column,
            error: Box::new(ValidationError::Model(e)),
        };
        match kw.as_str() {
            "agent" => {
                let mut any = false;
                while p.peek().is_some() {
                    let (name, column) = p.fresh_name("an agent name")?;
                    builder.agent(&name).map_err(|e| wrap(column, e))?;
                    any = true;
                }
                if !any {
                    return p.syntax("an agent name");
                }
            }
            "subord" => {
                let column = p.column();
                let lower = p.agent()?;
                p.expect(Tok::Le)?;
                let upper = p.agent()?;
                p.finish()?;
                order.push((lower.clone(), upper.clone()));
                SubordinationOrder::new(order.clone()).map_err(|e| wrap(column, e.into()))?;
                builder
                    .subordinate(lower.as_str(), upper.as_str())
                    .map_err(|e| wrap(column, e))?;
            }
            "type" => {
                let (name, column) = p.fresh_name("a type name")?;
                p.finish()?;
                builder.type_tag(&name).map_err(|e| wrap(column, e))?;
            }
            "task" => {
                let (name, column) = p.fresh_name("a task name")?;
                p.expect(Tok::Colon)?;
                let (ty, _) = p.ident("a type name")?;
                p.finish()?;
                builder.task(&name, &ty).map_err(|e| wrap(column, e))?;
            }
            "exclusive" => {
                let x = p.body()?;
                p.finish()?;
                builder.exclusive(x).expect("body was resolved");
            }
            "incompatible" => {
                let column = p.column();
                let x = p.body()?;
                p.expect(Tok::Hash)?;
                let y = p.body()?;
                p.finish()?;
                declared.push((x.clone(), y.clone()));
                IncompatibilityRelation::build(builder.signature(), &declared)
                    .map_err(|e| wrap(column, e.into()))?;
                builder.incompatible(x, y);
            }
            _ => {
                p.pos -= 1;
                return p.syntax("a declaration keyword");
            }
        }
        p.finish()?;
    }

    let model = builder.build().map_err(|e| DslError::Validation {
        line: 1,
        column: 1,
        error: Box::new(e.into()),
    })?;

    // second pass: definitions, initial state and the entry term
    let mut definitions: Vec<(String, Term)> = Vec::new();
    let mut entry: Option<Term> = None;
    let mut initial: Option<State> = None;
    let has_agent = |a: &str| model.has_agent(&Agent::new(a));

    for (line, text) in behaviour {
        let mut p = LineParser::new(
            text,
            line,
            Names {
                agents: &has_agent,
                signature: model.signature(),
                model: Some(&model),
                definitions: &definitions,
            },
        )?;
        let (kw, kw_column) = p.ident("a declaration keyword")?;
        match kw.as_str() {
            "def" => {
                let (name, column) = p.fresh_name("a definition name")?;
                p.expect(Tok::Eq)?;
                let t = p.term()?;
                p.finish()?;
                if definitions.iter().any(|(n, _)| *n == name) {
                    return p.invalid_at(column, ValidationError::DuplicateDefinition(name));
                }
                definitions.push((name, t));
            }
            "init" => {
                if initial.is_some() {
                    return p.invalid_at(kw_column, ValidationError::DuplicateInit);
                }
                let mut state = State::empty();
                loop {
                    let column = p.column();
                    let e = p.event()?;
                    let Event::Pi(promise) = e else {
                        return p.invalid_at(column, ValidationError::InitNotIntroduction(e));
                    };
                    state = match state.introduce(&model, &promise) {
                        Ok(s) => s,
                        Err(err) => {
                            return p.invalid_at(column, ValidationError::InitialState(err))
                        }
                    };
                    if !p.eat(&Tok::Comma) {
                        break;
                    }
                }
                p.finish()?;
                initial = Some(state);
            }
            "run" => {
                if entry.is_some() {
                    return p.invalid_at(kw_column, ValidationError::DuplicateRun);
                }
                let t = p.term()?;
                p.finish()?;
                entry = Some(t);
            }
            _ => unreachable!("only behaviour lines reach the second pass"),
        }
    }

    let entry = entry.ok_or(DslError::Validation {
        line: text.lines().count().max(1),
        column: 1,
        error: Box::new(ValidationError::MissingRun),
    })?;
    Ok(Scenario {
        model,
        definitions,
        entry,
        initial_state: initial.unwrap_or_default(),
    })
}

fn single_line<T>(
    text: &str,
    model: &PromiseModel,
    f: impl FnOnce(&mut LineParser<'_>) -> PResult<T>,
) -> PResult<T> {
    let has_agent = |a: &str| model.has_agent(&Agent::new(a));
    let mut p = LineParser::new(
        text,
        1,
        Names {
            agents: &has_agent,
            signature: model.signature(),
            model: Some(model),
            definitions: &[],
        },
    )?;
    let v = f(&mut p)?;
    p.finish()?;
    Ok(v)
}

/// Parses one process term against `model`.
pub fn parse_term(text: &str, model: &PromiseModel) -> Result<Term, DslError> {
    single_line(text, model, |p| p.term())
}

/// Parses one closed condition against `model`.
pub fn parse_condition(text: &str, model: &PromiseModel) -> Result<Condition, DslError> {
    single_line(text, model, |p| p.condition())
}

/// Parses one event against `model`.
pub fn parse_event(text: &str, model: &PromiseModel) -> Result<Event, DslError> {
    single_line(text, model, |p| p.event())
}

/// Parses a task body against `model`.
pub fn parse_body(text: &str, model: &PromiseModel) -> Result<TaskBody, DslError> {
    single_line(text, model, |p| p.body())
}

/// Parses a trace file: one event per line; blank lines and `#` comments,
/// including trailing ones, are ignored.
pub fn parse_trace(text: &str, model: &PromiseModel) -> Result<Vec<Event>, DslError> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let e = single_line(content, model, |p| p.event()).map_err(|e| match e {
            DslError::Syntax {
                column,
                expected,
                found,
                ..
            } => DslError::Syntax {
                line: i + 1,
                column,
                expected,
                found,
            },
            DslError::Validation { column, error, .. } => DslError::Validation {
                line: i + 1,
                column,
                error,
            },
        })?;
        events.push(e);
    }
    Ok(events)
}
