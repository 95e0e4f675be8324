//! Finite-frame semantics for the provability logic GL.
//!
//! GL is characterized by finite transitive irreflexive frames; its signature
//! axiom is the Loeb schema `[]([]p -> p) -> []p`. This module enumerates
//! every GL frame up to four states, checks schema validity exhaustively over
//! all labelings, and replays the six-line self-endorsement derivation as a
//! locally checked trace.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest state count for frame enumeration.
pub const FRAME_ENUMERATION_BOUND: usize = 4;

/// Largest number of distinct propositions in a validity scan.
pub const PROPOSITION_BOUND: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum GlError {
    #[error("{states} states exceeds the frame enumeration bound of {bound}")]
    CapacityExceeded { states: usize, bound: usize },
    #[error("formula has {props} distinct propositions, over the bound of {bound}")]
    TooManyPropositions { props: usize, bound: usize },
    #[error("relation is not transitive: ({0},{1}) and ({1},{2}) without ({0},{2})")]
    NotTransitive(usize, usize, usize),
    #[error("relation is not irreflexive: ({0},{0})")]
    NotIrreflexive(usize),
    #[error("edge ({0},{1}) mentions a state outside 0..{2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
}

/// Propositional modal formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModalFormula {
    Prop(String),
    Not(Box<ModalFormula>),
    And(Box<ModalFormula>, Box<ModalFormula>),
    Or(Box<ModalFormula>, Box<ModalFormula>),
    Implies(Box<ModalFormula>, Box<ModalFormula>),
    Box_(Box<ModalFormula>),
    Diamond(Box<ModalFormula>),
}

impl ModalFormula {
    pub fn prop(name: &str) -> Self {
        ModalFormula::Prop(name.to_string())
    }

    pub fn not(a: ModalFormula) -> Self {
        ModalFormula::Not(Box::new(a))
    }

    pub fn and(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn boxed(a: ModalFormula) -> Self {
        ModalFormula::Box_(Box::new(a))
    }

    pub fn diamond(a: ModalFormula) -> Self {
        ModalFormula::Diamond(Box::new(a))
    }

    /// The Loeb schema instantiated at `inner`: `[]([]f -> f) -> []f`.
    pub fn loeb(inner: ModalFormula) -> Self {
        ModalFormula::implies(
            ModalFormula::boxed(ModalFormula::implies(
                ModalFormula::boxed(inner.clone()),
                inner.clone(),
            )),
            ModalFormula::boxed(inner),
        )
    }

    /// The K axiom at (f, g): `[](f -> g) -> ([]f -> []g)`.
    pub fn k_axiom(f: ModalFormula, g: ModalFormula) -> Self {
        ModalFormula::implies(
            ModalFormula::boxed(ModalFormula::implies(f.clone(), g.clone())),
            ModalFormula::implies(ModalFormula::boxed(f), ModalFormula::boxed(g)),
        )
    }

    /// The transitivity (4) axiom at `f`: `[]f -> [][]f`.
    pub fn four_axiom(f: ModalFormula) -> Self {
        ModalFormula::implies(
            ModalFormula::boxed(f.clone()),
            ModalFormula::boxed(ModalFormula::boxed(f)),
        )
    }

    pub fn propositions(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(f: &ModalFormula, out: &mut Vec<String>) {
            match f {
                ModalFormula::Prop(p) => {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
                ModalFormula::Not(a) | ModalFormula::Box_(a) | ModalFormula::Diamond(a) => {
                    walk(a, out)
                }
                ModalFormula::And(a, b)
                | ModalFormula::Or(a, b)
                | ModalFormula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out.sort();
        out
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModalFormula::Prop(p) => write!(f, "{p}"),
            ModalFormula::Not(a) => write!(f, "!{a}"),
            ModalFormula::And(a, b) => write!(f, "({a} & {b})"),
            ModalFormula::Or(a, b) => write!(f, "({a} | {b})"),
            ModalFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
            ModalFormula::Box_(a) => write!(f, "[]{a}"),
            ModalFormula::Diamond(a) => write!(f, "<>{a}"),
        }
    }
}

/// A finite modal frame. [`GlFrame::new`] validates the GL frame class
/// (transitive and irreflexive); [`GlFrame::raw`] skips validation so that
/// counterexample frames can be supplied through the raw-relation escape
/// hatch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlFrame {
    states: usize,
    relation: Vec<(usize, usize)>,
}

impl GlFrame {
    pub fn new(states: usize, relation: Vec<(usize, usize)>) -> Result<Self, GlError> {
        let frame = Self::raw(states, relation)?;
        if let Some(s) = (0..states).find(|s| frame.related(*s, *s)) {
            return Err(GlError::NotIrreflexive(s));
        }
        for &(a, b) in &frame.relation {
            for &(b2, c) in &frame.relation {
                if b == b2 && !frame.related(a, c) {
                    return Err(GlError::NotTransitive(a, b, c));
                }
            }
        }
        Ok(frame)
    }

    /// Builds a frame without the GL class validation. Range checks still
    /// apply.
    pub fn raw(states: usize, mut relation: Vec<(usize, usize)>) -> Result<Self, GlError> {
        for &(a, b) in &relation {
            if a >= states || b >= states {
                return Err(GlError::EdgeOutOfRange(a, b, states));
            }
        }
        relation.sort();
        relation.dedup();
        Ok(GlFrame { states, relation })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn relation(&self) -> &[(usize, usize)] {
        &self.relation
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.relation.binary_search(&(a, b)).is_ok()
    }

    pub fn is_transitive(&self) -> bool {
        self.relation.iter().all(|&(a, b)| {
            self.relation
                .iter()
                .filter(|&&(b2, _)| b2 == b)
                .all(|&(_, c)| self.related(a, c))
        })
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.states).all(|s| !self.related(s, s))
    }

    /// Whether the relation contains a cycle (a self-loop counts). On a
    /// finite frame this is exactly the failure of converse well-foundedness.
    pub fn has_cycle(&self) -> bool {
        // colors: 0 unvisited, 1 on stack, 2 done
        fn visit(frame: &GlFrame, s: usize, color: &mut [u8]) -> bool {
            color[s] = 1;
            for &(a, b) in &frame.relation {
                if a == s {
                    if color[b] == 1 {
                        return true;
                    }
                    if color[b] == 0 && visit(frame, b, color) {
                        return true;
                    }
                }
            }
            color[s] = 2;
            false
        }
        let mut color = vec![0u8; self.states];
        (0..self.states).any(|s| color[s] == 0 && visit(self, s, &mut color))
    }
}

/// Yields every transitive irreflexive frame on `n` states, each exactly
/// once, by scanning subsets of the off-diagonal pairs.
pub fn enumerate_gl_frames(n: usize) -> Result<Vec<GlFrame>, GlError> {
    if n > FRAME_ENUMERATION_BOUND {
        return Err(GlError::CapacityExceeded {
            states: n,
            bound: FRAME_ENUMERATION_BOUND,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();
    let mut frames = Vec::new();
    for mask in 0..(1u64 << pairs.len()) {
        let relation: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| *p)
            .collect();
        if let Ok(frame) = GlFrame::new(n, relation) {
            frames.push(frame);
        }
    }
    Ok(frames)
}

fn eval_modal(
    formula: &ModalFormula,
    frame: &GlFrame,
    labeling: &BTreeMap<String, u64>,
    state: usize,
) -> bool {
    match formula {
        ModalFormula::Prop(p) => labeling.get(p).copied().unwrap_or(0) & (1 << state) != 0,
        ModalFormula::Not(a) => !eval_modal(a, frame, labeling, state),
        ModalFormula::And(a, b) => {
            eval_modal(a, frame, labeling, state) && eval_modal(b, frame, labeling, state)
        }
        ModalFormula::Or(a, b) => {
            eval_modal(a, frame, labeling, state) || eval_modal(b, frame, labeling, state)
        }
        ModalFormula::Implies(a, b) => {
            !eval_modal(a, frame, labeling, state) || eval_modal(b, frame, labeling, state)
        }
        ModalFormula::Box_(a) => (0..frame.states())
            .filter(|t| frame.related(state, *t))
            .all(|t| eval_modal(a, frame, labeling, t)),
        ModalFormula::Diamond(a) => (0..frame.states())
            .filter(|t| frame.related(state, *t))
            .any(|t| eval_modal(a, frame, labeling, t)),
    }
}

/// True iff the formula holds at every state under every labeling of its
/// propositions. Scans 2^(props * states) labelings.
pub fn valid_in_frame(formula: &ModalFormula, frame: &GlFrame) -> Result<bool, GlError> {
    let props = formula.propositions();
    if props.len() > PROPOSITION_BOUND {
        return Err(GlError::TooManyPropositions {
            props: props.len(),
            bound: PROPOSITION_BOUND,
        });
    }
    let n = frame.states();
    let bits = props.len() * n;
    for assignment in 0..(1u64 << bits) {
        let labeling: BTreeMap<String, u64> = props
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mask = (assignment >> (i * n)) & ((1u64 << n) - 1);
                (p.clone(), mask)
            })
            .collect();
        for state in 0..n {
            if !eval_modal(formula, frame, &labeling, state) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rule tags for derivation steps. D1-D3 are the derivability conditions:
/// necessitation, distribution of provability over implication, and
/// provability of provability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleTag {
    Premise,
    D1,
    D2,
    D3,
    Taut,
    MP,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub formula: ModalFormula,
    pub rule: RuleTag,
    /// 1-based line numbers of the referenced prior steps.
    pub refs: Vec<usize>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub steps: Vec<DerivationStep>,
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "({}) {}  [{:?}{}] {}",
                i + 1,
                render_prov(&step.formula),
                step.rule,
                if step.refs.is_empty() {
                    String::new()
                } else {
                    format!(
                        " from {}",
                        step.refs.iter().map(|r| format!("({r})")).collect::<Vec<_>>().join(",")
                    )
                },
                step.note,
            )?;
        }
        Ok(())
    }
}

/// Renders Box as a provability predicate, matching the arithmetic-style
/// presentation of the derivation.
fn render_prov(formula: &ModalFormula) -> String {
    match formula {
        ModalFormula::Prop(p) => p.clone(),
        ModalFormula::Not(a) => format!("!{}", render_prov(a)),
        ModalFormula::And(a, b) => format!("({} & {})", render_prov(a), render_prov(b)),
        ModalFormula::Or(a, b) => format!("({} | {})", render_prov(a), render_prov(b)),
        ModalFormula::Implies(a, b) => format!("({} -> {})", render_prov(a), render_prov(b)),
        ModalFormula::Box_(a) => format!("Prov({})", render_prov(a)),
        ModalFormula::Diamond(a) => format!("!Prov(!{})", render_prov(a)),
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceDefect {
    #[error("step {step}: reference {reference} is not an earlier line")]
    BadReference { step: usize, reference: usize },
    #[error("step {step}: formula does not match rule {rule:?}")]
    RuleMismatch { step: usize, rule: RuleTag },
}

/// Checks every step of a trace against its rule, using only the referenced
/// earlier lines.
pub fn check_trace(trace: &DerivationTrace) -> Result<(), TraceDefect> {
    for (index, step) in trace.steps.iter().enumerate() {
        let line = index + 1;
        for &r in &step.refs {
            if r == 0 || r > index {
                return Err(TraceDefect::BadReference { step: line, reference: r });
            }
        }
        let referenced: Vec<&ModalFormula> =
            step.refs.iter().map(|r| &trace.steps[r - 1].formula).collect();
        let ok = match step.rule {
            RuleTag::Premise => true,
            // D1: from Prov(A) conclude A
            RuleTag::D1 => matches!(
                referenced.as_slice(),
                [ModalFormula::Box_(inner)] if **inner == step.formula
            ),
            // D2: from Prov(A -> B) conclude Prov(A) -> Prov(B)
            RuleTag::D2 => match referenced.as_slice() {
                [ModalFormula::Box_(inner)] => match &**inner {
                    ModalFormula::Implies(a, b) => {
                        step.formula
                            == ModalFormula::implies(
                                ModalFormula::boxed((**a).clone()),
                                ModalFormula::boxed((**b).clone()),
                            )
                    }
                    _ => false,
                },
                _ => false,
            },
            // D3: axiom schema Prov(A) -> Prov(Prov(A))
            RuleTag::D3 => match &step.formula {
                ModalFormula::Implies(a, b) => match (&**a, &**b) {
                    (ModalFormula::Box_(x), ModalFormula::Box_(y)) => {
                        **y == ModalFormula::boxed((**x).clone())
                    }
                    _ => false,
                },
                _ => false,
            },
            // Taut covers two patterns: a tautological consequence of the
            // referenced lines (boxed subformulas abstracted to atoms), or
            // the discharge step A from the reflexive implication A -> A.
            RuleTag::Taut => {
                let discharge = matches!(
                    referenced.as_slice(),
                    [ModalFormula::Implies(a, b)] if a == b && **a == step.formula
                );
                discharge || is_tautological_consequence(&referenced, &step.formula)
            }
            // MP: from A -> B and A conclude B
            RuleTag::MP => match referenced.as_slice() {
                [ModalFormula::Implies(a, b), premise] => {
                    **a == **premise && **b == step.formula
                }
                _ => false,
            },
        };
        if !ok {
            return Err(TraceDefect::RuleMismatch { step: line, rule: step.rule });
        }
    }
    Ok(())
}

/// Truth-table check treating every maximal boxed subformula as an atom.
fn is_tautological_consequence(premises: &[&ModalFormula], conclusion: &ModalFormula) -> bool {
    fn atoms(f: &ModalFormula, out: &mut Vec<ModalFormula>) {
        match f {
            ModalFormula::Prop(_) | ModalFormula::Box_(_) | ModalFormula::Diamond(_) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            ModalFormula::Not(a) => atoms(a, out),
            ModalFormula::And(a, b) | ModalFormula::Or(a, b) | ModalFormula::Implies(a, b) => {
                atoms(a, out);
                atoms(b, out);
            }
        }
    }
    fn eval(f: &ModalFormula, atoms: &[ModalFormula], row: u32) -> bool {
        if let Some(i) = atoms.iter().position(|a| a == f) {
            return row & (1 << i) != 0;
        }
        match f {
            ModalFormula::Not(a) => !eval(a, atoms, row),
            ModalFormula::And(a, b) => eval(a, atoms, row) && eval(b, atoms, row),
            ModalFormula::Or(a, b) => eval(a, atoms, row) || eval(b, atoms, row),
            ModalFormula::Implies(a, b) => !eval(a, atoms, row) || eval(b, atoms, row),
            // an unregistered atom (can't happen: atoms collects all)
            _ => false,
        }
    }
    let mut table = Vec::new();
    for p in premises {
        atoms(p, &mut table);
    }
    atoms(conclusion, &mut table);
    if table.len() > 16 {
        return false;
    }
    (0..(1u32 << table.len())).all(|row| {
        premises.iter().any(|p| !eval(p, &table, row)) || eval(conclusion, &table, row)
    })
}

/// Replays the six-line self-endorsement derivation instantiated at the
/// named proposition and checks every line. A check failure is a defect in
/// this module, not in the input.
pub fn lob_hazard_replay(prop: &str) -> DerivationTrace {
    let phi = ModalFormula::prop(prop);
    let prov = |f: ModalFormula| ModalFormula::boxed(f);
    let lines = vec![
        DerivationStep {
            formula: prov(ModalFormula::implies(prov(phi.clone()), phi.clone())),
            rule: RuleTag::Premise,
            refs: vec![],
            note: format!("policy proves: endorsing `{prop}` would make it hold"),
        },
        DerivationStep {
            formula: ModalFormula::implies(prov(prov(phi.clone())), prov(phi.clone())),
            rule: RuleTag::D2,
            refs: vec![1],
            note: "distribution applied inside the premise".to_string(),
        },
        DerivationStep {
            formula: ModalFormula::implies(prov(phi.clone()), prov(prov(phi.clone()))),
            rule: RuleTag::D3,
            refs: vec![],
            note: "provability of provability".to_string(),
        },
        DerivationStep {
            formula: ModalFormula::implies(prov(phi.clone()), prov(phi.clone())),
            rule: RuleTag::Taut,
            refs: vec![2, 3],
            note: "transitivity of (3) then (2)".to_string(),
        },
        DerivationStep {
            formula: prov(phi.clone()),
            rule: RuleTag::Taut,
            refs: vec![4],
            note: "discharge of the reflexive implication".to_string(),
        },
        DerivationStep {
            formula: phi,
            rule: RuleTag::D1,
            refs: vec![5],
            note: format!("`{prop}` endorsed"),
        },
    ];
    let trace = DerivationTrace { steps: lines };
    if let Err(defect) = check_trace(&trace) {
        unreachable!("fixed derivation failed its own check: {defect}");
    }
    trace
}

/// Parses the modal grammar: `[]f`, `<>f`, `!`, `&`, `|`, `->` (right
/// associative, lowest precedence), parentheses, identifiers.
pub fn parse_modal(text: &str) -> Result<ModalFormula, GlError> {
    let mut parser = ModalParser { chars: text.chars().collect(), pos: 0 };
    let formula = parser.implication()?;
    parser.skip_ws();
    if parser.pos != parser.chars.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(formula)
}

struct ModalParser {
    chars: Vec<char>,
    pos: usize,
}

impl ModalParser {
    fn error(&self, message: &str) -> GlError {
        GlError::Syntax {
            column: self.pos + 1,
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

    fn implication(&mut self) -> Result<ModalFormula, GlError> {
        let left = self.disjunction()?;
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'-') && self.chars.get(self.pos + 1) == Some(&'>') {
            self.pos += 2;
            let right = self.implication()?;
            return Ok(ModalFormula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<ModalFormula, GlError> {
        let mut left = self.conjunction()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            left = ModalFormula::or(left, self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<ModalFormula, GlError> {
        let mut left = self.unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            left = ModalFormula::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<ModalFormula, GlError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(ModalFormula::not(self.unary()?))
            }
            Some('[') => {
                self.pos += 1;
                if self.chars.get(self.pos) != Some(&']') {
                    return Err(self.error("expected `]`"));
                }
                self.pos += 1;
                Ok(ModalFormula::boxed(self.unary()?))
            }
            Some('<') => {
                self.pos += 1;
                if self.chars.get(self.pos) != Some(&'>') {
                    return Err(self.error("expected `>`"));
                }
                self.pos += 1;
                Ok(ModalFormula::diamond(self.unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.implication()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len() {
                    let c = self.chars[self.pos];
                    if c.is_ascii_alphanumeric() || c == '_' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Ok(ModalFormula::Prop(self.chars[start..self.pos].iter().collect()))
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_state_has_one_frame() {
        let frames = enumerate_gl_frames(1).unwrap();
        assert_eq!(frames.len(), 1);
        assert!(frames[0].relation().is_empty());
    }

    #[test]
    fn two_states_have_three_frames() {
        let frames = enumerate_gl_frames(2).unwrap();
        assert_eq!(frames.len(), 3);
        let relations: Vec<_> = frames.iter().map(|f| f.relation().to_vec()).collect();
        assert!(relations.contains(&vec![]));
        assert!(relations.contains(&vec![(0, 1)]));
        assert!(relations.contains(&vec![(1, 0)]));
    }

    #[test]
    fn three_state_count_matches_independent_filter() {
        // oracle: scan all 2^(n*n) relations, filter irreflexive and
        // transitive with a matrix-composition test
        let n = 3usize;
        let mut count = 0usize;
        for mask in 0..(1u32 << (n * n)) {
            let rel = |a: usize, b: usize| mask & (1 << (a * n + b)) != 0;
            let irreflexive = (0..n).all(|s| !rel(s, s));
            let transitive = (0..n).all(|a| {
                (0..n).all(|b| {
                    (0..n).all(|c| !(rel(a, b) && rel(b, c)) || rel(a, c))
                })
            });
            if irreflexive && transitive {
                count += 1;
            }
        }
        let frames = enumerate_gl_frames(n).unwrap();
        assert_eq!(frames.len(), count);
        assert_eq!(count, 19);
    }

    #[test]
    fn enumeration_rejects_large_n() {
        assert!(matches!(
            enumerate_gl_frames(5),
            Err(GlError::CapacityExceeded { states: 5, .. })
        ));
    }

    #[test]
    fn k_axiom_valid_on_all_small_frames() {
        let k = ModalFormula::k_axiom(ModalFormula::prop("p"), ModalFormula::prop("q"));
        for n in 1..=3 {
            for frame in enumerate_gl_frames(n).unwrap() {
                assert!(valid_in_frame(&k, &frame).unwrap());
            }
        }
    }

    #[test]
    fn loeb_valid_on_all_gl_frames() {
        let loeb = ModalFormula::loeb(ModalFormula::prop("p"));
        for n in 1..=3 {
            for frame in enumerate_gl_frames(n).unwrap() {
                assert!(valid_in_frame(&loeb, &frame).unwrap(), "failed on {frame:?}");
            }
        }
    }

    #[test]
    fn four_axiom_valid_on_all_gl_frames() {
        let four = ModalFormula::four_axiom(ModalFormula::prop("p"));
        for frame in enumerate_gl_frames(3).unwrap() {
            assert!(valid_in_frame(&four, &frame).unwrap());
        }
    }

    #[test]
    fn loeb_fails_on_reflexive_point() {
        let frame = GlFrame::raw(1, vec![(0, 0)]).unwrap();
        let loeb = ModalFormula::loeb(ModalFormula::prop("p"));
        assert!(!valid_in_frame(&loeb, &frame).unwrap());
        assert!(frame.has_cycle());
    }

    #[test]
    fn gl_constructor_rejects_reflexive_and_intransitive() {
        assert_eq!(
            GlFrame::new(1, vec![(0, 0)]).unwrap_err(),
            GlError::NotIrreflexive(0)
        );
        assert_eq!(
            GlFrame::new(3, vec![(0, 1), (1, 2)]).unwrap_err(),
            GlError::NotTransitive(0, 1, 2)
        );
    }

    #[test]
    fn replay_produces_checked_six_lines() {
        let trace = lob_hazard_replay("safe");
        assert_eq!(trace.steps.len(), 6);
        assert_eq!(trace.steps[5].formula, ModalFormula::prop("safe"));
        assert_eq!(trace.steps[1].rule, RuleTag::D2);
        assert_eq!(trace.steps[1].refs, vec![1]);
        assert!(check_trace(&trace).is_ok());
    }

    #[test]
    fn replay_is_deterministic() {
        assert_eq!(lob_hazard_replay("safe"), lob_hazard_replay("safe"));
    }

    #[test]
    fn check_trace_rejects_wrong_rule() {
        let mut trace = lob_hazard_replay("p");
        trace.steps[2].rule = RuleTag::D1;
        assert!(matches!(
            check_trace(&trace),
            Err(TraceDefect::RuleMismatch { step: 3, .. })
        ));
    }

    #[test]
    fn check_trace_rejects_forward_reference() {
        let mut trace = lob_hazard_replay("p");
        trace.steps[0].refs = vec![3];
        assert!(matches!(
            check_trace(&trace),
            Err(TraceDefect::BadReference { step: 1, reference: 3 })
        ));
    }

    #[test]
    fn parse_loeb_text() {
        let parsed = parse_modal("[]([]p -> p) -> []p").unwrap();
        assert_eq!(parsed, ModalFormula::loeb(ModalFormula::prop("p")));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(parse_modal("p ->"), Err(GlError::Syntax { .. })));
    }

    #[test]
    fn prov_rendering() {
        let trace = lob_hazard_replay("safe");
        let text = trace.to_string();
        assert!(text.contains("Prov(safe)"));
        assert!(text.lines().count() == 6);
    }
}
