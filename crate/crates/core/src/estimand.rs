//! A small expression language for identification formulas, evaluated
//! exactly against a model's observational distribution.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := prob | sum | '(' expr ')' | rational
//! sum     := 'sum_{' name (',' name)* '}' factor
//! prob    := 'P(' atoms ('|' atoms)? ')'
//! atoms   := atom (',' atom)*
//! atom    := name ('=' rhs)?
//! rhs     := '$' name | literal-or-bound-name
//! ```
//!
//! An atom's right-hand side is resolved at parse time: a `$name` is a
//! symbol reference, a bare token is a symbol reference when an enclosing
//! `sum_{..}` binds that name and a state literal otherwise. An atom with
//! no `=` (`P(T)`) refers to the symbol of the same name as the variable.
//! Symbols resolve innermost-sum-first and fall back to placeholders
//! supplied at evaluation time, so an inner `sum_{X}` shadows a
//! placeholder `$X` within its body.
//!
//! Events may mention observed variables only: estimands exist precisely
//! to avoid hidden quantities. Every conditioning event must have
//! positive observational probability.

use crate::inference::{marginal, Dist, InferenceError};
use crate::model::{Cbn, Instantiation, ModelError};
use crate::rat::{parse_rat, Rat};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EstimandError {
    #[error("syntax error at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("placeholder `{0}` is not bound")]
    UnboundPlaceholder(String),
    #[error("estimand mentions hidden variable `{0}`")]
    HiddenVariable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("conditioning event {0} has probability zero")]
    ZeroConditioningEvent(String),
    #[error("division by zero while evaluating")]
    DivisionByZero,
    #[error("subtraction went negative while evaluating")]
    NegativeResult,
}

/// Value side of an atom: a concrete state label or a symbol reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomValue {
    State(String),
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub var: String,
    pub value: AtomValue,
}

/// One `sum_{..}` binder: `symbol` ranges over the states of the model
/// variable `domain`. Textual estimands always use the variable's own
/// name as the symbol; the split exists so trees can be alpha-renamed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumBinding {
    pub symbol: String,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Estimand {
    Const(Rat),
    Prob {
        event: Vec<Atom>,
        given: Vec<Atom>,
    },
    Product(Vec<Estimand>),
    Quotient(Box<Estimand>, Box<Estimand>),
    Sum {
        bindings: Vec<SumBinding>,
        body: Box<Estimand>,
    },
    Add(Box<Estimand>, Box<Estimand>),
    Sub(Box<Estimand>, Box<Estimand>),
}

/// Parse result: the tree plus non-fatal scoping warnings (for example,
/// an inner sum shadowing a placeholder of the same name).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub estimand: Estimand,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Pipe,
    Comma,
    Eq,
    Dollar,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, EstimandError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'|' => Tok::Pipe,
            b',' => Tok::Comma,
            b'=' => Tok::Eq,
            b'$' => Tok::Dollar,
            c if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.')
                {
                    i += 1;
                }
                out.push((Tok::Word(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(EstimandError::SyntaxError {
                    pos: i,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        out.push((tok, i));
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> EstimandError {
        EstimandError::SyntaxError {
            pos: self.here(),
            msg: msg.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), EstimandError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, EstimandError> {
        match self.bump() {
            Some(Tok::Word(w)) => Ok(w),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err(format!("expected {what}")))
            }
        }
    }

    fn expr(&mut self) -> Result<Estimand, EstimandError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Estimand::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Estimand::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Estimand, EstimandError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let next = self.factor()?;
                    match &mut acc {
                        Estimand::Product(terms) => terms.push(next),
                        _ => acc = Estimand::Product(vec![acc, next]),
                    }
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = Estimand::Quotient(Box::new(acc), Box::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Estimand, EstimandError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Word(w)) if w == "P" => self.prob(),
            Some(Tok::Word(w)) if w == "sum_" => self.sum(),
            Some(Tok::Word(w)) => {
                let at = self.here();
                self.pos += 1;
                let value = parse_rat(&w).map_err(|e| EstimandError::SyntaxError {
                    pos: at,
                    msg: format!("expected `P(`, `sum_{{`, `(` or a rational: {e}"),
                })?;
                Ok(Estimand::Const(value))
            }
            _ => Err(self.err("expected a factor")),
        }
    }

    fn sum(&mut self) -> Result<Estimand, EstimandError> {
        self.pos += 1; // the `sum_` word
        self.expect(Tok::LBrace, "`{` after `sum_`")?;
        let mut bindings = Vec::new();
        loop {
            let name = self.word("a bound variable name")?;
            bindings.push(SumBinding {
                symbol: name.clone(),
                domain: name,
            });
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBrace) => break,
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return Err(self.err("expected `,` or `}` in sum binder"));
                }
            }
        }
        let depth = self.bound.len();
        self.bound.extend(bindings.iter().map(|b| b.symbol.clone()));
        let body = self.factor()?;
        self.bound.truncate(depth);
        Ok(Estimand::Sum {
            bindings,
            body: Box::new(body),
        })
    }

    fn prob(&mut self) -> Result<Estimand, EstimandError> {
        self.pos += 1; // `P`
        self.expect(Tok::LParen, "`(` after `P`")?;
        let event = self.atoms()?;
        let given = if self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            self.atoms()?
        } else {
            Vec::new()
        };
        self.expect(Tok::RParen, "`)` closing `P(`")?;
        Ok(Estimand::Prob { event, given })
    }

    fn atoms(&mut self) -> Result<Vec<Atom>, EstimandError> {
        let mut out = Vec::new();
        loop {
            let var = self.word("a variable name")?;
            let value = if self.peek() == Some(&Tok::Eq) {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Dollar) => {
                        self.pos += 1;
                        AtomValue::Symbol(self.word("a placeholder name after `$`")?)
                    }
                    Some(Tok::Word(w)) => {
                        self.pos += 1;
                        if self.bound.contains(&w) {
                            AtomValue::Symbol(w)
                        } else {
                            AtomValue::State(w)
                        }
                    }
                    _ => return Err(self.err("expected a state, `$placeholder`, or bound name")),
                }
            } else {
                // bare atom: the variable's value is the symbol of the
                // same name (sum-bound or placeholder)
                AtomValue::Symbol(var.clone())
            };
            out.push(Atom { var, value });
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }
}

/// Parses the textual form into a well-scoped tree, reporting shadowing
/// as warnings rather than errors.
pub fn parse_estimand(text: &str) -> Result<ParseOutcome, EstimandError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        bound: Vec::new(),
    };
    let estimand = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("trailing input after expression"));
    }
    let placeholders = free_placeholders(&estimand);
    let mut warnings = Vec::new();
    collect_shadow_warnings(&estimand, &placeholders, &mut Vec::new(), &mut warnings);
    Ok(ParseOutcome { estimand, warnings })
}

fn collect_shadow_warnings(
    e: &Estimand,
    placeholders: &BTreeSet<String>,
    bound: &mut Vec<String>,
    warnings: &mut Vec<String>,
) {
    match e {
        Estimand::Sum { bindings, body } => {
            for b in bindings {
                if bound.contains(&b.symbol) {
                    warnings.push(format!(
                        "sum binding `{}` shadows an outer sum binding",
                        b.symbol
                    ));
                } else if placeholders.contains(&b.symbol) {
                    warnings.push(format!(
                        "sum binding `{}` shadows a placeholder of the same name",
                        b.symbol
                    ));
                }
            }
            let depth = bound.len();
            bound.extend(bindings.iter().map(|b| b.symbol.clone()));
            collect_shadow_warnings(body, placeholders, bound, warnings);
            bound.truncate(depth);
        }
        Estimand::Product(terms) => {
            for t in terms {
                collect_shadow_warnings(t, placeholders, bound, warnings);
            }
        }
        Estimand::Quotient(a, b) | Estimand::Add(a, b) | Estimand::Sub(a, b) => {
            collect_shadow_warnings(a, placeholders, bound, warnings);
            collect_shadow_warnings(b, placeholders, bound, warnings);
        }
        Estimand::Const(_) | Estimand::Prob { .. } => {}
    }
}

/// The placeholder signature: every symbol reference not captured by an
/// enclosing sum. Bindings supplied to [`evaluate`] must cover it.
pub fn free_placeholders(e: &Estimand) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk_free(e, &mut Vec::new(), &mut out);
    out
}

fn walk_free(e: &Estimand, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match e {
        Estimand::Const(_) => {}
        Estimand::Prob { event, given } => {
            for atom in event.iter().chain(given) {
                if let AtomValue::Symbol(s) = &atom.value {
                    if !bound.iter().any(|b| b == s) {
                        out.insert(s.clone());
                    }
                }
            }
        }
        Estimand::Product(terms) => {
            for t in terms {
                walk_free(t, bound, out);
            }
        }
        Estimand::Quotient(a, b) | Estimand::Add(a, b) | Estimand::Sub(a, b) => {
            walk_free(a, bound, out);
            walk_free(b, bound, out);
        }
        Estimand::Sum { bindings, body } => {
            let depth = bound.len();
            bound.extend(bindings.iter().map(|b| b.symbol.clone()));
            walk_free(body, bound, out);
            bound.truncate(depth);
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Evaluator with the observational distribution precomputed; reuse it
/// when evaluating several estimands or bindings against one model.
pub struct Evaluator<'m> {
    model: &'m Cbn,
    observational: Dist,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Cbn) -> Result<Self, EstimandError> {
        let observed: BTreeSet<String> = model
            .graph()
            .observed_names()
            .into_iter()
            .map(String::from)
            .collect();
        if observed.is_empty() {
            return Err(EstimandError::HiddenVariable(
                "(model has no observed variables)".to_string(),
            ));
        }
        let observational = marginal(model, &observed)?;
        Ok(Evaluator {
            model,
            observational,
        })
    }

    pub fn evaluate(
        &self,
        e: &Estimand,
        binding: &BTreeMap<String, String>,
    ) -> Result<Rat, EstimandError> {
        let mut frames = Vec::new();
        self.eval(e, binding, &mut frames)
    }

    fn resolve(
        &self,
        symbol: &str,
        binding: &BTreeMap<String, String>,
        frames: &[(String, String)],
    ) -> Result<String, EstimandError> {
        for (sym, state) in frames.iter().rev() {
            if sym == symbol {
                return Ok(state.clone());
            }
        }
        binding
            .get(symbol)
            .cloned()
            .ok_or_else(|| EstimandError::UnboundPlaceholder(symbol.to_string()))
    }

    fn atoms_to_event(
        &self,
        atoms: &[Atom],
        binding: &BTreeMap<String, String>,
        frames: &[(String, String)],
        base: Instantiation,
    ) -> Result<Option<Instantiation>, EstimandError> {
        // None means the conjunction is contradictory (probability zero)
        let graph = self.model.graph();
        let mut event = base;
        for atom in atoms {
            let var = graph.var(&atom.var)?;
            if !graph.is_observed(&atom.var) {
                return Err(EstimandError::HiddenVariable(atom.var.clone()));
            }
            let state = match &atom.value {
                AtomValue::State(s) => s.clone(),
                AtomValue::Symbol(s) => self.resolve(s, binding, frames)?,
            };
            var.state_index(&state)?;
            if let Some(existing) = event.get(&atom.var) {
                if existing != state {
                    return Ok(None);
                }
            }
            event = event.set(atom.var.clone(), state);
        }
        Ok(Some(event))
    }

    fn eval(
        &self,
        e: &Estimand,
        binding: &BTreeMap<String, String>,
        frames: &mut Vec<(String, String)>,
    ) -> Result<Rat, EstimandError> {
        match e {
            Estimand::Const(v) => Ok(v.clone()),
            Estimand::Prob { event, given } => {
                let given_event =
                    self.atoms_to_event(given, binding, frames, Instantiation::empty())?;
                let Some(given_event) = given_event else {
                    return Err(EstimandError::ZeroConditioningEvent(
                        "(contradictory conditioning atoms)".to_string(),
                    ));
                };
                let p_given = if given_event.is_empty() {
                    Rat::one()
                } else {
                    self.observational.mass_consistent_with(&given_event)
                };
                if p_given.is_zero() {
                    return Err(EstimandError::ZeroConditioningEvent(
                        given_event.to_string(),
                    ));
                }
                let joint_event = self.atoms_to_event(event, binding, frames, given_event)?;
                let p_both = match joint_event {
                    Some(ev) => self.observational.mass_consistent_with(&ev),
                    None => Rat::zero(),
                };
                Ok(&p_both / &p_given)
            }
            Estimand::Product(terms) => {
                let mut acc = Rat::one();
                for t in terms {
                    acc *= &self.eval(t, binding, frames)?;
                }
                Ok(acc)
            }
            Estimand::Quotient(num, den) => {
                let d = self.eval(den, binding, frames)?;
                if d.is_zero() {
                    return Err(EstimandError::DivisionByZero);
                }
                let n = self.eval(num, binding, frames)?;
                Ok(&n / &d)
            }
            Estimand::Add(a, b) => {
                Ok(&self.eval(a, binding, frames)? + &self.eval(b, binding, frames)?)
            }
            Estimand::Sub(a, b) => {
                let lhs = self.eval(a, binding, frames)?;
                let rhs = self.eval(b, binding, frames)?;
                lhs.checked_sub(&rhs).ok_or(EstimandError::NegativeResult)
            }
            Estimand::Sum { bindings, body } => {
                let graph = self.model.graph();
                let mut domains = Vec::with_capacity(bindings.len());
                for b in bindings {
                    let var = graph.var(&b.domain)?;
                    if !graph.is_observed(&b.domain) {
                        return Err(EstimandError::HiddenVariable(b.domain.clone()));
                    }
                    domains.push(var.states().to_vec());
                }
                let cards: Vec<usize> = domains.iter().map(Vec::len).collect();
                let mut total = Rat::zero();
                for idxs in crate::model::Odometer::new(cards) {
                    let depth = frames.len();
                    for (b, (&i, states)) in bindings.iter().zip(idxs.iter().zip(&domains)) {
                        frames.push((b.symbol.clone(), states[i].clone()));
                    }
                    total += &self.eval(body, binding, frames)?;
                    frames.truncate(depth);
                }
                Ok(total)
            }
        }
    }
}

/// One-shot convenience wrapper around [`Evaluator`].
pub fn evaluate(
    e: &Estimand,
    model: &Cbn,
    binding: &BTreeMap<String, String>,
) -> Result<Rat, EstimandError> {
    Evaluator::new(model)?.evaluate(e, binding)
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            AtomValue::State(s) => write!(f, "{}={}", self.var, s),
            AtomValue::Symbol(s) => write!(f, "{}=${}", self.var, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{sample_constrained, Constraint};
    use crate::inference::causal_effect;
    use crate::model::{build_model, cpt_from_fn, CausalGraph, Variable};

    fn r(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    fn bind(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn parses_product_of_probs() {
        let out = parse_estimand("P(J=0) * P(S=0 | Y=0, J=0)").unwrap();
        assert!(out.warnings.is_empty());
        match &out.estimand {
            Estimand::Product(terms) => {
                assert_eq!(terms.len(), 2);
                match &terms[0] {
                    Estimand::Prob { event, given } => {
                        assert_eq!(event.len(), 1);
                        assert!(given.is_empty());
                        assert_eq!(event[0].var, "J");
                        assert_eq!(event[0].value, AtomValue::State("0".into()));
                    }
                    other => panic!("unexpected node {other:?}"),
                }
                match &terms[1] {
                    Estimand::Prob { event, given } => {
                        assert_eq!(event.len(), 1);
                        assert_eq!(given.len(), 2);
                    }
                    other => panic!("unexpected node {other:?}"),
                }
            }
            other => panic!("unexpected node {other:?}"),
        }
        assert!(free_placeholders(&out.estimand).is_empty());
    }

    #[test]
    fn placeholder_atom_parses() {
        let out = parse_estimand("P(A=$a)").unwrap();
        match &out.estimand {
            Estimand::Prob { event, .. } => {
                assert_eq!(event[0].value, AtomValue::Symbol("a".into()));
            }
            other => panic!("unexpected node {other:?}"),
        }
        assert_eq!(
            free_placeholders(&out.estimand),
            ["a".to_string()].into_iter().collect()
        );
    }

    #[test]
    fn flight_formula_placeholder_signature() {
        let out =
            parse_estimand("P(A=0) * P(Y=$y | X=$x, A=0) + P(A=1) * P(Y=$y | X=$x, A=1)").unwrap();
        assert_eq!(
            free_placeholders(&out.estimand),
            ["x".to_string(), "y".to_string()].into_iter().collect()
        );
    }

    #[test]
    fn inner_sum_shadows_placeholder() {
        let text = "P(Y=$Y | B=1, C=0, X=$X) * sum_{X} (P(F=0 | X) * P(X))";
        let out = parse_estimand(text).unwrap();
        // the placeholder signature keeps X: the outer use is free
        assert_eq!(
            free_placeholders(&out.estimand),
            ["X".to_string(), "Y".to_string()].into_iter().collect()
        );
        assert!(out
            .warnings
            .iter()
            .any(|w| w.contains("shadows a placeholder")));
    }

    #[test]
    fn rational_literals_and_arithmetic() {
        let out = parse_estimand("1/3 + 0.25 - 1/12").unwrap();
        let g =
            CausalGraph::new(vec![Variable::new("X", ["0", "1"]).unwrap()], vec![], ["X"]).unwrap();
        let cpt = cpt_from_fn(&g, "X", &[], |_| vec![r("1/2"), r("1/2")]).unwrap();
        let m = build_model(g, vec![cpt]).unwrap();
        assert_eq!(evaluate(&out.estimand, &m, &bind(&[])).unwrap(), r("1/2"));
        // Const(1) evaluates to 1
        let one = parse_estimand("1").unwrap();
        assert!(evaluate(&one.estimand, &m, &bind(&[])).unwrap().is_one());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_estimand("P(A=0) * ").unwrap_err();
        assert!(matches!(err, EstimandError::SyntaxError { .. }));
        let err = parse_estimand("P(A=0) P(B=0)").unwrap_err();
        match err {
            EstimandError::SyntaxError { pos, .. } => assert_eq!(pos, 7),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(parse_estimand("sum_{").is_err());
        assert!(parse_estimand("Q(A=0)").is_err());
    }

    /// Chain A -> Y with A, Y observed; hidden U -> Y as well.
    fn small_model(seed: u64) -> Cbn {
        let g = CausalGraph::new(
            vec![
                Variable::new("U", ["0", "1"]).unwrap(),
                Variable::new("A", ["0", "1"]).unwrap(),
                Variable::new("Y", ["0", "1"]).unwrap(),
            ],
            vec![("A".into(), "Y".into()), ("U".into(), "Y".into())],
            ["A", "Y"],
        )
        .unwrap();
        sample_constrained(&g, &[], seed, 50).unwrap()
    }

    #[test]
    fn probabilities_come_from_the_observational_marginal() {
        let m = small_model(3);
        let total = parse_estimand("P(A=0) + P(A=1)").unwrap().estimand;
        assert!(evaluate(&total, &m, &bind(&[])).unwrap().is_one());
        // conditional times marginal equals joint
        let lhs = parse_estimand("P(Y=1 | A=0) * P(A=0)").unwrap().estimand;
        let rhs = parse_estimand("P(Y=1, A=0)").unwrap().estimand;
        assert_eq!(
            evaluate(&lhs, &m, &bind(&[])).unwrap(),
            evaluate(&rhs, &m, &bind(&[])).unwrap()
        );
    }

    #[test]
    fn hidden_variables_are_rejected() {
        let m = small_model(4);
        let e = parse_estimand("P(U=0)").unwrap().estimand;
        assert!(matches!(
            evaluate(&e, &m, &bind(&[])),
            Err(EstimandError::HiddenVariable(_))
        ));
        let e = parse_estimand("sum_{U} P(A=0 | U)").unwrap().estimand;
        assert!(matches!(
            evaluate(&e, &m, &bind(&[])),
            Err(EstimandError::HiddenVariable(_))
        ));
    }

    #[test]
    fn unbound_placeholder_is_reported() {
        let m = small_model(5);
        let e = parse_estimand("P(A=$a)").unwrap().estimand;
        assert!(matches!(
            evaluate(&e, &m, &bind(&[])),
            Err(EstimandError::UnboundPlaceholder(s)) if s == "a"
        ));
        assert_eq!(
            evaluate(&e, &m, &bind(&[("a", "0")])).unwrap(),
            evaluate(&parse_estimand("P(A=0)").unwrap().estimand, &m, &bind(&[])).unwrap()
        );
    }

    #[test]
    fn zero_conditioning_event_is_an_error() {
        let g =
            CausalGraph::new(vec![Variable::new("X", ["0", "1"]).unwrap()], vec![], ["X"]).unwrap();
        let cpt = cpt_from_fn(&g, "X", &[], |_| vec![Rat::one(), Rat::zero()]).unwrap();
        let m = build_model(g, vec![cpt]).unwrap();
        let e = parse_estimand("P(X=0 | X=1)").unwrap().estimand;
        assert!(matches!(
            evaluate(&e, &m, &bind(&[])),
            Err(EstimandError::ZeroConditioningEvent(_))
        ));
    }

    #[test]
    fn alpha_conversion_keeps_the_value() {
        let m = small_model(6);
        let original = parse_estimand("sum_{A} (P(A) * P(Y=1 | A))")
            .unwrap()
            .estimand;
        // rename the bound symbol A to k by hand: sum_{k over A} P(A=k)...
        let renamed = Estimand::Sum {
            bindings: vec![SumBinding {
                symbol: "k".into(),
                domain: "A".into(),
            }],
            body: Box::new(Estimand::Product(vec![
                Estimand::Prob {
                    event: vec![Atom {
                        var: "A".into(),
                        value: AtomValue::Symbol("k".into()),
                    }],
                    given: vec![],
                },
                Estimand::Prob {
                    event: vec![Atom {
                        var: "Y".into(),
                        value: AtomValue::State("1".into()),
                    }],
                    given: vec![Atom {
                        var: "A".into(),
                        value: AtomValue::Symbol("k".into()),
                    }],
                },
            ])),
        };
        let lhs = evaluate(&original, &m, &bind(&[])).unwrap();
        let rhs = evaluate(&renamed, &m, &bind(&[])).unwrap();
        assert_eq!(lhs, rhs);
        // both reduce to the plain marginal P(Y=1)
        let marginal = parse_estimand("P(Y=1)").unwrap().estimand;
        assert_eq!(lhs, evaluate(&marginal, &m, &bind(&[])).unwrap());
    }

    #[test]
    fn arithmetic_error_paths() {
        let m = small_model(9);
        let negative = parse_estimand("P(A=0) - 1").unwrap().estimand;
        assert!(matches!(
            evaluate(&negative, &m, &bind(&[])),
            Err(EstimandError::NegativeResult)
        ));
        let by_zero = parse_estimand("1 / (P(A=0) - P(A=0))").unwrap().estimand;
        assert!(matches!(
            evaluate(&by_zero, &m, &bind(&[])),
            Err(EstimandError::DivisionByZero)
        ));
    }

    #[test]
    fn linearity_of_evaluation() {
        let m = small_model(7);
        let a = parse_estimand("P(A=0) * P(Y=0 | A=0)").unwrap().estimand;
        let b = parse_estimand("P(A=1) * P(Y=0 | A=1)").unwrap().estimand;
        let sum = Estimand::Add(Box::new(a.clone()), Box::new(b.clone()));
        let ev = Evaluator::new(&m).unwrap();
        let empty = bind(&[]);
        assert_eq!(
            ev.evaluate(&sum, &empty).unwrap(),
            &ev.evaluate(&a, &empty).unwrap() + &ev.evaluate(&b, &empty).unwrap()
        );
    }

    /// Back-door style sanity check on a model with no confounding: with
    /// A a root, adjusting is unnecessary and P(Y | do(A)) = P(Y | A).
    #[test]
    fn estimand_matches_effect_without_confounding() {
        let g = CausalGraph::new(
            vec![
                Variable::new("A", ["0", "1"]).unwrap(),
                Variable::new("Y", ["0", "1"]).unwrap(),
            ],
            vec![("A".into(), "Y".into())],
            ["A", "Y"],
        )
        .unwrap();
        for seed in 0..10 {
            let m = sample_constrained(&g, &[], seed, 30).unwrap();
            let e = parse_estimand("P(Y=1 | A=0)").unwrap().estimand;
            let effect = causal_effect(
                &m,
                &Instantiation::from_pairs([("A", "0")]),
                &Instantiation::from_pairs([("Y", "1")]),
            )
            .unwrap();
            assert_eq!(evaluate(&e, &m, &bind(&[])).unwrap(), effect);
        }
    }

    /// The CSI identification argument, end to end on one tiny graph:
    /// with hidden U and the CSI (Y indep U | A=0), conditioning at A=0
    /// identifies the interventional quantity.
    #[test]
    fn csi_makes_the_conditional_causal() {
        let g = CausalGraph::new(
            vec![
                Variable::new("U", ["0", "1"]).unwrap(),
                Variable::new("A", ["0", "1"]).unwrap(),
                Variable::new("Y", ["0", "1"]).unwrap(),
            ],
            vec![
                ("U".into(), "A".into()),
                ("U".into(), "Y".into()),
                ("A".into(), "Y".into()),
            ],
            ["A", "Y"],
        )
        .unwrap();
        let cs = vec![Constraint::csi(
            "Y",
            ["U"],
            Instantiation::from_pairs([("A", "0")]),
            Vec::<String>::new(),
        )];
        let e = parse_estimand("P(Y=0 | A=0)").unwrap().estimand;
        for seed in 0..10 {
            let m = sample_constrained(&g, &cs, seed, 40).unwrap();
            let effect = causal_effect(
                &m,
                &Instantiation::from_pairs([("A", "0")]),
                &Instantiation::from_pairs([("Y", "0")]),
            )
            .unwrap();
            assert_eq!(evaluate(&e, &m, &bind(&[])).unwrap(), effect, "seed {seed}");
        }
    }
}
