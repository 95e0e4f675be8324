//! Modal mu-calculus over finite Kripke frames.
//!
//! The parser accepts `mu X. f`, `nu X. f`, `[]f`, `<>f`, `&`, `|`, `!` and
//! parentheses. Identifiers starting with an uppercase letter are fixpoint
//! variables and must be bound by an enclosing binder; lowercase identifiers
//! are propositions looked up in the frame labeling. Formulas are brought to
//! negation normal form at parse time, so only propositions ever sit under a
//! negation and every fixpoint body is monotone.
//!
//! [`mc_eval`] computes denotations by fixpoint iteration (ascending from the
//! empty set for `mu`, descending from all states for `nu`, innermost-first
//! for nestings). [`naive_eval`] is the literal intersection-of-pre-fixed-
//! points / union-of-post-fixed-points oracle, usable on frames of at most
//! [`NAIVE_STATE_BOUND`] states.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Frames larger than this cannot be represented (states live in a u64 mask).
pub const FRAME_STATE_BOUND: usize = 64;

/// State-count bound for the subset-scan oracle.
pub const NAIVE_STATE_BOUND: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum MucalcError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unbound variable `{name}` at line {line}, column {column}")]
    UnboundVariable { name: String, line: usize, column: usize },
    #[error("positivity violation: {0}")]
    Positivity(PositivityViolation),
    #[error("frame has {states} states, over the bound of {bound}")]
    CapacityExceeded { states: usize, bound: usize },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("proposition `{0}` is not in the frame labeling")]
    UnknownProposition(String),
}

/// Mu-calculus formula. Constructed formulas are not required to be in
/// negation normal form; [`parse_mu`] always produces NNF.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MuFormula {
    Prop(String),
    Var(String),
    Not(Box<MuFormula>),
    And(Box<MuFormula>, Box<MuFormula>),
    Or(Box<MuFormula>, Box<MuFormula>),
    Box_(Box<MuFormula>),
    Diamond(Box<MuFormula>),
    Mu(String, Box<MuFormula>),
    Nu(String, Box<MuFormula>),
}

impl MuFormula {
    pub fn prop(name: &str) -> Self {
        MuFormula::Prop(name.to_string())
    }

    pub fn var(name: &str) -> Self {
        MuFormula::Var(name.to_string())
    }

    pub fn mu(var: &str, body: MuFormula) -> Self {
        MuFormula::Mu(var.to_string(), Box::new(body))
    }

    pub fn nu(var: &str, body: MuFormula) -> Self {
        MuFormula::Nu(var.to_string(), Box::new(body))
    }

    pub fn boxed(body: MuFormula) -> Self {
        MuFormula::Box_(Box::new(body))
    }

    pub fn diamond(body: MuFormula) -> Self {
        MuFormula::Diamond(Box::new(body))
    }

    pub fn and(a: MuFormula, b: MuFormula) -> Self {
        MuFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: MuFormula, b: MuFormula) -> Self {
        MuFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn negated(a: MuFormula) -> Self {
        MuFormula::Not(Box::new(a))
    }
}

impl fmt::Display for MuFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuFormula::Prop(p) => write!(f, "{p}"),
            MuFormula::Var(x) => write!(f, "{x}"),
            MuFormula::Not(a) => write!(f, "!{a}"),
            MuFormula::And(a, b) => write!(f, "({a} & {b})"),
            MuFormula::Or(a, b) => write!(f, "({a} | {b})"),
            MuFormula::Box_(a) => write!(f, "[]{a}"),
            MuFormula::Diamond(a) => write!(f, "<>{a}"),
            MuFormula::Mu(x, a) => write!(f, "mu {x}. {a}"),
            MuFormula::Nu(x, a) => write!(f, "nu {x}. {a}"),
        }
    }
}

/// A bound variable occurring under an odd number of negations, with the
/// path of connectives leading to the offending occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositivityViolation {
    pub variable: String,
    pub path: String,
}

impl fmt::Display for PositivityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "variable `{}` occurs negatively at {}", self.variable, self.path)
    }
}

/// Checks that every bound variable occurs under an even number of
/// negations. Violations are returned as data.
pub fn check_positivity(formula: &MuFormula) -> Vec<PositivityViolation> {
    let mut violations = Vec::new();
    fn walk<'f>(
        formula: &'f MuFormula,
        parity: BTreeMap<&'f str, bool>,
        negations: bool,
        path: &mut Vec<String>,
        out: &mut Vec<PositivityViolation>,
    ) {
        match formula {
            MuFormula::Prop(_) => {}
            MuFormula::Var(x) => {
                // parity maps each bound variable to whether the negation
                // count at its binder was even; an occurrence is negative
                // when the counts disagree
                if let Some(bound_even) = parity.get(x.as_str()) {
                    if *bound_even != !negations {
                        out.push(PositivityViolation {
                            variable: x.clone(),
                            path: path.join(" > "),
                        });
                    }
                }
            }
            MuFormula::Not(a) => {
                path.push("!".to_string());
                walk(a, parity, !negations, path, out);
                path.pop();
            }
            MuFormula::And(a, b) | MuFormula::Or(a, b) => {
                let label = if matches!(formula, MuFormula::And(..)) { "&" } else { "|" };
                path.push(label.to_string());
                walk(a, parity.clone(), negations, path, out);
                walk(b, parity, negations, path, out);
                path.pop();
            }
            MuFormula::Box_(a) | MuFormula::Diamond(a) => {
                let label = if matches!(formula, MuFormula::Box_(..)) { "[]" } else { "<>" };
                path.push(label.to_string());
                walk(a, parity, negations, path, out);
                path.pop();
            }
            MuFormula::Mu(x, a) | MuFormula::Nu(x, a) => {
                let label = if matches!(formula, MuFormula::Mu(..)) { "mu" } else { "nu" };
                let mut parity = parity;
                parity.insert(x.as_str(), !negations);
                path.push(format!("{label} {x}"));
                walk(a, parity, negations, path, out);
                path.pop();
            }
        }
    }
    walk(formula, BTreeMap::new(), false, &mut Vec::new(), &mut violations);
    violations
}

/// A finite transition structure with named states and a proposition
/// labeling. States are indexed by their position in the state list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KripkeFrame {
    states: Vec<String>,
    transitions: Vec<(usize, usize)>,
    labeling: BTreeMap<String, StateSet>,
}

impl KripkeFrame {
    pub fn new<S: Into<String>>(states: Vec<S>) -> Result<Self, MucalcError> {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if states.len() > FRAME_STATE_BOUND {
            return Err(MucalcError::CapacityExceeded {
                states: states.len(),
                bound: FRAME_STATE_BOUND,
            });
        }
        Ok(KripkeFrame {
            states,
            transitions: Vec::new(),
            labeling: BTreeMap::new(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Result<usize, MucalcError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| MucalcError::UnknownState(name.to_string()))
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<(), MucalcError> {
        let from = self.state_index(from)?;
        let to = self.state_index(to)?;
        self.add_edge_by_index(from, to);
        Ok(())
    }

    pub fn add_edge_by_index(&mut self, from: usize, to: usize) {
        assert!(from < self.states.len() && to < self.states.len());
        if !self.transitions.contains(&(from, to)) {
            self.transitions.push((from, to));
        }
    }

    pub fn transitions(&self) -> &[(usize, usize)] {
        &self.transitions
    }

    pub fn label<'a, I>(&mut self, prop: &str, states: I) -> Result<(), MucalcError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut set = StateSet::empty();
        for s in states {
            set.insert(self.state_index(s)?);
        }
        self.labeling.insert(prop.to_string(), set);
        Ok(())
    }

    pub fn labeling(&self) -> &BTreeMap<String, StateSet> {
        &self.labeling
    }

    pub fn proposition(&self, name: &str) -> Result<StateSet, MucalcError> {
        self.labeling
            .get(name)
            .copied()
            .ok_or_else(|| MucalcError::UnknownProposition(name.to_string()))
    }

    pub fn all_states(&self) -> StateSet {
        StateSet::full(self.states.len())
    }

    pub fn successors(&self, state: usize) -> StateSet {
        let mut set = StateSet::empty();
        for (from, to) in &self.transitions {
            if *from == state {
                set.insert(*to);
            }
        }
        set
    }

    /// Renders a state set as `{s0, s2}` using this frame's state names.
    pub fn format_states(&self, set: StateSet) -> String {
        let names: Vec<&str> = set
            .iter(self.state_count())
            .map(|i| self.states[i].as_str())
            .collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// A subset of a frame's states, packed into a u64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct StateSet(pub u64);

impl StateSet {
    pub fn empty() -> Self {
        StateSet(0)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= FRAME_STATE_BOUND);
        if n == 64 {
            StateSet(u64::MAX)
        } else {
            StateSet((1u64 << n) - 1)
        }
    }

    pub fn insert(&mut self, state: usize) {
        self.0 |= 1 << state;
    }

    pub fn contains(self, state: usize) -> bool {
        self.0 & (1 << state) != 0
    }

    pub fn union(self, other: Self) -> Self {
        StateSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        StateSet(self.0 & other.0)
    }

    pub fn complement(self, n: usize) -> Self {
        StateSet(!self.0 & Self::full(n).0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self, n: usize) -> impl Iterator<Item = usize> {
        (0..n).filter(move |i| self.contains(*i))
    }
}

type Environment = BTreeMap<String, StateSet>;

/// Evaluates a closed formula by fixpoint iteration.
pub fn mc_eval(formula: &MuFormula, frame: &KripkeFrame) -> Result<StateSet, MucalcError> {
    mc_eval_env(formula, frame, &Environment::new())
}

/// Evaluates a formula whose free variables are bound by `env`.
pub fn mc_eval_env(
    formula: &MuFormula,
    frame: &KripkeFrame,
    env: &Environment,
) -> Result<StateSet, MucalcError> {
    if let Some(violation) = check_positivity(formula).into_iter().next() {
        return Err(MucalcError::Positivity(violation));
    }
    eval_iterative(formula, frame, env)
}

fn eval_iterative(
    formula: &MuFormula,
    frame: &KripkeFrame,
    env: &Environment,
) -> Result<StateSet, MucalcError> {
    let n = frame.state_count();
    Ok(match formula {
        MuFormula::Prop(p) => frame.proposition(p)?,
        MuFormula::Var(x) => *env
            .get(x)
            .ok_or_else(|| MucalcError::UnboundVariable {
                name: x.clone(),
                line: 0,
                column: 0,
            })?,
        MuFormula::Not(a) => eval_iterative(a, frame, env)?.complement(n),
        MuFormula::And(a, b) => {
            eval_iterative(a, frame, env)?.intersection(eval_iterative(b, frame, env)?)
        }
        MuFormula::Or(a, b) => {
            eval_iterative(a, frame, env)?.union(eval_iterative(b, frame, env)?)
        }
        MuFormula::Box_(a) => {
            let inner = eval_iterative(a, frame, env)?;
            let mut out = StateSet::empty();
            for s in 0..n {
                if frame.successors(s).is_subset_of(inner) {
                    out.insert(s);
                }
            }
            out
        }
        MuFormula::Diamond(a) => {
            let inner = eval_iterative(a, frame, env)?;
            let mut out = StateSet::empty();
            for s in 0..n {
                if !frame.successors(s).intersection(inner).is_empty() {
                    out.insert(s);
                }
            }
            out
        }
        MuFormula::Mu(x, body) => {
            let mut current = StateSet::empty();
            loop {
                let mut inner_env = env.clone();
                inner_env.insert(x.clone(), current);
                let next = eval_iterative(body, frame, &inner_env)?;
                if next == current {
                    break current;
                }
                current = next;
            }
        }
        MuFormula::Nu(x, body) => {
            let mut current = frame.all_states();
            loop {
                let mut inner_env = env.clone();
                inner_env.insert(x.clone(), current);
                let next = eval_iterative(body, frame, &inner_env)?;
                if next == current {
                    break current;
                }
                current = next;
            }
        }
    })
}

/// Literal set-theoretic semantics: `mu` as the intersection of all
/// pre-fixed points, `nu` as the union of all post-fixed points, scanning
/// every subset of states per binder. The oracle for [`mc_eval`].
pub fn naive_eval(formula: &MuFormula, frame: &KripkeFrame) -> Result<StateSet, MucalcError> {
    if frame.state_count() > NAIVE_STATE_BOUND {
        return Err(MucalcError::CapacityExceeded {
            states: frame.state_count(),
            bound: NAIVE_STATE_BOUND,
        });
    }
    if let Some(violation) = check_positivity(formula).into_iter().next() {
        return Err(MucalcError::Positivity(violation));
    }
    naive_inner(formula, frame, &Environment::new())
}

fn naive_inner(
    formula: &MuFormula,
    frame: &KripkeFrame,
    env: &Environment,
) -> Result<StateSet, MucalcError> {
    let n = frame.state_count();
    Ok(match formula {
        MuFormula::Mu(x, body) => {
            let mut acc = StateSet::full(n);
            for mask in 0..(1u64 << n) {
                let s = StateSet(mask);
                let mut inner_env = env.clone();
                inner_env.insert(x.clone(), s);
                if naive_inner(body, frame, &inner_env)?.is_subset_of(s) {
                    acc = acc.intersection(s);
                }
            }
            acc
        }
        MuFormula::Nu(x, body) => {
            let mut acc = StateSet::empty();
            for mask in 0..(1u64 << n) {
                let s = StateSet(mask);
                let mut inner_env = env.clone();
                inner_env.insert(x.clone(), s);
                if s.is_subset_of(naive_inner(body, frame, &inner_env)?) {
                    acc = acc.union(s);
                }
            }
            acc
        }
        MuFormula::Prop(_) | MuFormula::Var(_) => eval_iterative(formula, frame, env)?,
        MuFormula::Not(a) => naive_inner(a, frame, env)?.complement(n),
        MuFormula::And(a, b) => {
            naive_inner(a, frame, env)?.intersection(naive_inner(b, frame, env)?)
        }
        MuFormula::Or(a, b) => naive_inner(a, frame, env)?.union(naive_inner(b, frame, env)?),
        MuFormula::Box_(a) => {
            let inner = naive_inner(a, frame, env)?;
            let mut out = StateSet::empty();
            for s in 0..n {
                if frame.successors(s).is_subset_of(inner) {
                    out.insert(s);
                }
            }
            out
        }
        MuFormula::Diamond(a) => {
            let inner = naive_inner(a, frame, env)?;
            let mut out = StateSet::empty();
            for s in 0..n {
                if !frame.successors(s).intersection(inner).is_empty() {
                    out.insert(s);
                }
            }
            out
        }
    })
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct MuParser<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
    scope: Vec<String>,
}

impl<'a> MuParser<'a> {
    fn new(text: &'a str) -> Self {
        MuParser {
            chars: text.chars().collect(),
            pos: 0,
            text,
            scope: Vec::new(),
        }
    }

    fn line_column(&self) -> (usize, usize) {
        let mut line = 1;
        let mut column = 1;
        for c in self.text.chars().take(self.pos) {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        (line, column)
    }

    fn syntax_error(&self, message: &str) -> MucalcError {
        let (line, column) = self.line_column();
        MucalcError::Syntax {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, expected: char) -> Result<(), MucalcError> {
        if self.peek() == Some(expected) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax_error(&format!("expected `{expected}`")))
        }
    }

    fn ident(&mut self) -> Result<String, MucalcError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_alphanumeric() || c == '_' || (self.pos > start && c == '\'') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start || self.chars[start].is_ascii_digit() {
            return Err(self.syntax_error("expected an identifier"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    // or-formula := and-formula (`|` and-formula)*
    fn or_formula(&mut self) -> Result<MuFormula, MucalcError> {
        let mut left = self.and_formula()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let right = self.and_formula()?;
            left = MuFormula::or(left, right);
        }
        Ok(left)
    }

    fn and_formula(&mut self) -> Result<MuFormula, MucalcError> {
        let mut left = self.unary_formula()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            let right = self.unary_formula()?;
            left = MuFormula::and(left, right);
        }
        Ok(left)
    }

    fn unary_formula(&mut self) -> Result<MuFormula, MucalcError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(MuFormula::negated(self.unary_formula()?))
            }
            Some('[') => {
                self.pos += 1;
                self.eat(']')?;
                Ok(MuFormula::boxed(self.unary_formula()?))
            }
            Some('<') => {
                self.pos += 1;
                self.eat('>')?;
                Ok(MuFormula::diamond(self.unary_formula()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.or_formula()?;
                self.eat(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.atom_or_binder(),
            _ => Err(self.syntax_error("expected a formula")),
        }
    }

    fn atom_or_binder(&mut self) -> Result<MuFormula, MucalcError> {
        let start = self.pos;
        let ident = self.ident()?;
        match ident.as_str() {
            "mu" | "nu" => {
                let var = self.ident()?;
                if !var.starts_with(|c: char| c.is_ascii_uppercase()) {
                    self.pos = start;
                    return Err(self.syntax_error(
                        "fixpoint variables must start with an uppercase letter",
                    ));
                }
                self.eat('.')?;
                self.scope.push(var.clone());
                let body = self.or_formula()?;
                self.scope.pop();
                Ok(if ident == "mu" {
                    MuFormula::mu(&var, body)
                } else {
                    MuFormula::nu(&var, body)
                })
            }
            _ => {
                if ident.starts_with(|c: char| c.is_ascii_uppercase()) {
                    if self.scope.iter().any(|v| *v == ident) {
                        Ok(MuFormula::var(&ident))
                    } else {
                        self.pos = start;
                        let (line, column) = self.line_column();
                        Err(MucalcError::UnboundVariable { name: ident, line, column })
                    }
                } else {
                    Ok(MuFormula::prop(&ident))
                }
            }
        }
    }
}

/// Parses a formula and converts it to negation normal form, rejecting
/// positivity violations.
pub fn parse_mu(text: &str) -> Result<MuFormula, MucalcError> {
    let mut parser = MuParser::new(text);
    let raw = parser.or_formula()?;
    parser.skip_ws();
    if parser.pos != parser.chars.len() {
        return Err(parser.syntax_error("trailing input"));
    }
    let violations = check_positivity(&raw);
    if let Some(v) = violations.into_iter().next() {
        return Err(MucalcError::Positivity(v));
    }
    Ok(to_nnf(&raw, false))
}

/// Negation normal form. `negate` tracks whether the current subformula is
/// under an odd number of negations. Binder duality flips the binder and
/// leaves bound-variable occurrences positive (the double negation on the
/// variable cancels), which is only sound for positive formulas — callers
/// check positivity first.
fn to_nnf(formula: &MuFormula, negate: bool) -> MuFormula {
    match (formula, negate) {
        (MuFormula::Prop(p), false) => MuFormula::prop(p),
        (MuFormula::Prop(p), true) => MuFormula::negated(MuFormula::prop(p)),
        (MuFormula::Var(x), _) => MuFormula::var(x),
        (MuFormula::Not(a), _) => to_nnf(a, !negate),
        (MuFormula::And(a, b), false) => MuFormula::and(to_nnf(a, false), to_nnf(b, false)),
        (MuFormula::And(a, b), true) => MuFormula::or(to_nnf(a, true), to_nnf(b, true)),
        (MuFormula::Or(a, b), false) => MuFormula::or(to_nnf(a, false), to_nnf(b, false)),
        (MuFormula::Or(a, b), true) => MuFormula::and(to_nnf(a, true), to_nnf(b, true)),
        (MuFormula::Box_(a), false) => MuFormula::boxed(to_nnf(a, false)),
        (MuFormula::Box_(a), true) => MuFormula::diamond(to_nnf(a, true)),
        (MuFormula::Diamond(a), false) => MuFormula::diamond(to_nnf(a, false)),
        (MuFormula::Diamond(a), true) => MuFormula::boxed(to_nnf(a, true)),
        (MuFormula::Mu(x, a), false) => MuFormula::mu(x, to_nnf(a, false)),
        (MuFormula::Mu(x, a), true) => MuFormula::nu(x, to_nnf(a, true)),
        (MuFormula::Nu(x, a), false) => MuFormula::nu(x, to_nnf(a, false)),
        (MuFormula::Nu(x, a), true) => MuFormula::mu(x, to_nnf(a, true)),
    }
}

// ---------------------------------------------------------------------------
// Safety preservation
// ---------------------------------------------------------------------------

/// Report of the safety-preservation check for one disclosure frame.
///
/// `always_invariant` is the greatest fixed point `nu X. I & []X`;
/// `eventually_event` the least fixed point `mu Y. E | <>Y`. The hypothesis
/// is checked transition-locally: every edge out of a state satisfying the
/// invariant with the event reachable, into an event state, must land inside
/// the invariant. The conclusion then asserts that every event state
/// reachable from the invariant-and-event-possible region satisfies the
/// invariant. `failures_consistent` records that the implication
/// hypothesis-implies-conclusion held on this frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub always_invariant: StateSet,
    pub eventually_event: StateSet,
    pub start_region: StateSet,
    pub hypothesis_holds: bool,
    pub hypothesis_violations: Vec<(usize, usize)>,
    pub conclusion_holds: bool,
    pub counterexamples: Vec<usize>,
    pub witness_paths: Vec<Vec<usize>>,
    pub failures_consistent: bool,
}

pub fn safety_preservation_check(
    frame: &KripkeFrame,
    invariant: &str,
    event: &str,
) -> Result<SafetyReport, MucalcError> {
    let inv = frame.proposition(invariant)?;
    let ev = frame.proposition(event)?;
    let n = frame.state_count();

    let always_invariant = mc_eval(
        &MuFormula::nu("X", MuFormula::and(MuFormula::prop(invariant), MuFormula::boxed(MuFormula::var("X")))),
        frame,
    )?;
    let eventually_event = mc_eval(
        &MuFormula::mu("Y", MuFormula::or(MuFormula::prop(event), MuFormula::diamond(MuFormula::var("Y")))),
        frame,
    )?;

    // hypothesis: disclosure steps into the event do not leave the invariant
    let mut hypothesis_violations = Vec::new();
    for &(from, to) in frame.transitions() {
        if inv.contains(from) && eventually_event.contains(from) && ev.contains(to) && !inv.contains(to) {
            hypothesis_violations.push((from, to));
        }
    }
    let hypothesis_holds = hypothesis_violations.is_empty();

    // conclusion: every event state reachable from the start region (invariant
    // holds now, event still reachable) satisfies the invariant
    let start_region = inv.intersection(eventually_event);
    let mut reachable = start_region;
    loop {
        let mut next = reachable;
        for s in reachable.iter(n) {
            next = next.union(frame.successors(s));
        }
        if next == reachable {
            break;
        }
        reachable = next;
    }
    let event_witnesses = reachable.intersection(ev);
    let counterexamples: Vec<usize> = event_witnesses
        .iter(n)
        .filter(|s| !inv.contains(*s))
        .collect();
    let conclusion_holds = counterexamples.is_empty();

    // for each reachable event state, a demonstration path from the first
    // start state that reaches it
    let mut witness_paths = Vec::new();
    for target in event_witnesses.iter(n) {
        for origin in start_region.iter(n) {
            let mut single = StateSet::empty();
            single.insert(origin);
            if let Some(path) = shortest_path(frame, single, target) {
                witness_paths.push(path);
                break;
            }
        }
    }

    Ok(SafetyReport {
        always_invariant,
        eventually_event,
        start_region,
        hypothesis_holds,
        hypothesis_violations,
        conclusion_holds,
        counterexamples,
        witness_paths,
        failures_consistent: conclusion_holds || !hypothesis_holds,
    })
}

fn shortest_path(frame: &KripkeFrame, from: StateSet, target: usize) -> Option<Vec<usize>> {
    let n = frame.state_count();
    let mut predecessor: Vec<Option<usize>> = vec![None; n];
    let mut visited = from;
    let mut queue: Vec<usize> = from.iter(n).collect();
    if from.contains(target) {
        return Some(vec![target]);
    }
    let mut head = 0;
    while head < queue.len() {
        let s = queue[head];
        head += 1;
        for t in frame.successors(s).iter(n) {
            if !visited.contains(t) {
                visited.insert(t);
                predecessor[t] = Some(s);
                if t == target {
                    let mut path = vec![t];
                    let mut cur = s;
                    loop {
                        path.push(cur);
                        match predecessor[cur] {
                            Some(p) => cur = p,
                            None => break,
                        }
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push(t);
            }
        }
    }
    None
}

/// Evaluates both nestings `nu X. mu Y. body` and `mu Y. nu X. body` of a
/// two-variable body and reports whether they agree on this frame. Nothing
/// is asserted; the comparison is exploratory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommuteReport {
    pub nu_mu: StateSet,
    pub mu_nu: StateSet,
    pub equal: bool,
}

pub fn commute_experiment(
    frame: &KripkeFrame,
    body_text: &str,
) -> Result<CommuteReport, MucalcError> {
    let nu_mu = mc_eval(&parse_mu(&format!("nu X. mu Y. {body_text}"))?, frame)?;
    let mu_nu = mc_eval(&parse_mu(&format!("mu Y. nu X. {body_text}"))?, frame)?;
    Ok(CommuteReport { nu_mu, mu_nu, equal: nu_mu == mu_nu })
}
