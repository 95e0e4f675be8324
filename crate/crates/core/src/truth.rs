//! Self-referential sentence systems over a transparency predicate.
//!
//! A [`SentenceSystem`] maps names to formulas that may refer back to any
//! name in the system, including their own. Three semantics are provided:
//!
//! - strong-Kleene three-valued evaluation and the Kripke least-fixed-point
//!   jump ([`kripke_lfp`]), under which paradoxical sentences stay at the
//!   third value instead of collapsing the system;
//! - exhaustive classical search ([`total_classical_search`]) for a
//!   two-valued model in which every definition holds and the `trans`
//!   predicate is both total and in agreement with sentence values — the
//!   search comes back empty on any system embedding the transparency liar;
//! - a paraconsistent LP model ([`lp_model`]) in which the liar becomes a
//!   glut (designated both true and false) without every sentence following.
//!
//! Goedel coding is replaced by a finite name space: `trans` applies to
//! sentence names, which keeps the diagonal arguments runnable at desk scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TruthError {
    #[error("name `{0}` does not resolve to a definition or ground atom")]
    UnresolvedName(String),
    #[error("name `{0}` is declared both as a ground atom and as a definition")]
    NameCollision(String),
    #[error("ground atom `{0}` declared with conflicting values")]
    ConflictingAtom(String),
    #[error("system has {names} defined names, over the bound of {bound}")]
    CapacityExceeded { names: usize, bound: usize },
    #[error("kripke jump did not stabilize within {0} stages")]
    FuelExhausted(usize),
    #[error("valuation does not cover name `{0}`")]
    IncompleteValuation(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// Strong-Kleene truth value. The information order puts `NoneV` strictly
/// below both `TrueV` and `FalseV`, which are incomparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ThreeVal {
    TrueV,
    FalseV,
    NoneV,
}

use ThreeVal::{FalseV, NoneV, TrueV};

impl ThreeVal {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TrueV
        } else {
            FalseV
        }
    }

    pub fn is_classical(self) -> bool {
        self != NoneV
    }

    /// Rank in the truth order F < N < T (not the information order).
    fn truth_rank(self) -> u8 {
        match self {
            FalseV => 0,
            NoneV => 1,
            TrueV => 2,
        }
    }

    fn from_truth_rank(rank: u8) -> Self {
        match rank {
            0 => FalseV,
            1 => NoneV,
            _ => TrueV,
        }
    }

    pub fn not(self) -> Self {
        match self {
            TrueV => FalseV,
            FalseV => TrueV,
            NoneV => NoneV,
        }
    }

    /// Conjunction: minimum in the truth order.
    pub fn and(self, other: Self) -> Self {
        Self::from_truth_rank(self.truth_rank().min(other.truth_rank()))
    }

    /// Disjunction: maximum in the truth order.
    pub fn or(self, other: Self) -> Self {
        Self::from_truth_rank(self.truth_rank().max(other.truth_rank()))
    }

    pub fn implies(self, other: Self) -> Self {
        self.not().or(other)
    }

    pub fn iff(self, other: Self) -> Self {
        self.implies(other).and(other.implies(self))
    }

    /// Information order: `NoneV` is below everything, classical values are
    /// below only themselves.
    pub fn info_leq(self, other: Self) -> bool {
        self == NoneV || self == other
    }
}

/// Reading of the `trans` predicate on names whose sentence is undetermined.
///
/// The strong-Kleene reading leaves `trans(n)` at the third value when `n`
/// is; the closed reading declares it false instead (the convention under
/// which the minimal fixed point answers every `trans` question, at the cost
/// of the jump no longer being monotone in general).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransReading {
    #[default]
    StrongKleene,
    ClosedFalse,
}

/// Formula over sentence names and ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SentenceFormula {
    /// A named atom carrying its fixed classical value.
    GroundAtom(String, bool),
    /// The truth value of the named sentence.
    Ref(String),
    /// The transparency status of the named sentence.
    Trans(String),
    Not(Box<SentenceFormula>),
    And(Box<SentenceFormula>, Box<SentenceFormula>),
    Or(Box<SentenceFormula>, Box<SentenceFormula>),
    Implies(Box<SentenceFormula>, Box<SentenceFormula>),
    Iff(Box<SentenceFormula>, Box<SentenceFormula>),
}

impl SentenceFormula {
    pub fn not(inner: SentenceFormula) -> Self {
        SentenceFormula::Not(Box::new(inner))
    }

    pub fn trans(name: &str) -> Self {
        SentenceFormula::Trans(name.to_string())
    }

    pub fn reference(name: &str) -> Self {
        SentenceFormula::Ref(name.to_string())
    }

    fn referenced_names(&self, out: &mut BTreeSet<String>) {
        match self {
            SentenceFormula::GroundAtom(..) => {}
            SentenceFormula::Ref(n) | SentenceFormula::Trans(n) => {
                out.insert(n.clone());
            }
            SentenceFormula::Not(a) => a.referenced_names(out),
            SentenceFormula::And(a, b)
            | SentenceFormula::Or(a, b)
            | SentenceFormula::Implies(a, b)
            | SentenceFormula::Iff(a, b) => {
                a.referenced_names(out);
                b.referenced_names(out);
            }
        }
    }

    fn ground_atoms(&self, out: &mut BTreeMap<String, bool>) -> Result<(), TruthError> {
        match self {
            SentenceFormula::GroundAtom(n, v) => {
                if let Some(prev) = out.insert(n.clone(), *v) {
                    if prev != *v {
                        return Err(TruthError::ConflictingAtom(n.clone()));
                    }
                }
                Ok(())
            }
            SentenceFormula::Ref(_) | SentenceFormula::Trans(_) => Ok(()),
            SentenceFormula::Not(a) => a.ground_atoms(out),
            SentenceFormula::And(a, b)
            | SentenceFormula::Or(a, b)
            | SentenceFormula::Implies(a, b)
            | SentenceFormula::Iff(a, b) => {
                a.ground_atoms(out)?;
                b.ground_atoms(out)
            }
        }
    }
}

impl fmt::Display for SentenceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceFormula::GroundAtom(n, v) => write!(f, "atom({n},{v})"),
            SentenceFormula::Ref(n) => write!(f, "ref({n})"),
            SentenceFormula::Trans(n) => write!(f, "trans({n})"),
            SentenceFormula::Not(a) => write!(f, "not({a})"),
            SentenceFormula::And(a, b) => write!(f, "and({a},{b})"),
            SentenceFormula::Or(a, b) => write!(f, "or({a},{b})"),
            SentenceFormula::Implies(a, b) => write!(f, "implies({a},{b})"),
            SentenceFormula::Iff(a, b) => write!(f, "iff({a},{b})"),
        }
    }
}

/// A finite system of named, possibly self-referential sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceSystem {
    definitions: BTreeMap<String, SentenceFormula>,
    ground_atoms: BTreeMap<String, bool>,
}

impl SentenceSystem {
    /// Builds a system, collecting inline ground atoms from the definitions
    /// and checking that every referenced name resolves.
    pub fn new(
        definitions: BTreeMap<String, SentenceFormula>,
        mut ground_atoms: BTreeMap<String, bool>,
    ) -> Result<Self, TruthError> {
        for formula in definitions.values() {
            formula.ground_atoms(&mut ground_atoms)?;
        }
        for name in ground_atoms.keys() {
            if definitions.contains_key(name) {
                return Err(TruthError::NameCollision(name.clone()));
            }
        }
        let mut referenced = BTreeSet::new();
        for formula in definitions.values() {
            formula.referenced_names(&mut referenced);
        }
        for name in referenced {
            if !definitions.contains_key(&name) && !ground_atoms.contains_key(&name) {
                return Err(TruthError::UnresolvedName(name));
            }
        }
        Ok(SentenceSystem { definitions, ground_atoms })
    }

    pub fn empty() -> Self {
        SentenceSystem {
            definitions: BTreeMap::new(),
            ground_atoms: BTreeMap::new(),
        }
    }

    pub fn definitions(&self) -> &BTreeMap<String, SentenceFormula> {
        &self.definitions
    }

    pub fn ground_atoms(&self) -> &BTreeMap<String, bool> {
        &self.ground_atoms
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.definitions.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.definitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.definitions.is_empty()
    }
}

/// Total mapping from defined names to three-valued truth, ordered pointwise
/// by the information order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeValuation {
    values: BTreeMap<String, ThreeVal>,
}

impl ThreeValuation {
    pub fn all_none(sys: &SentenceSystem) -> Self {
        ThreeValuation {
            values: sys.names().map(|n| (n.to_string(), NoneV)).collect(),
        }
    }

    pub fn from_map(values: BTreeMap<String, ThreeVal>) -> Self {
        ThreeValuation { values }
    }

    pub fn get(&self, name: &str) -> Option<ThreeVal> {
        self.values.get(name).copied()
    }

    pub fn values(&self) -> &BTreeMap<String, ThreeVal> {
        &self.values
    }

    pub fn set(&mut self, name: &str, v: ThreeVal) {
        self.values.insert(name.to_string(), v);
    }

    /// Pointwise information order.
    pub fn info_leq(&self, other: &Self) -> bool {
        self.values
            .iter()
            .all(|(n, v)| other.get(n).is_some_and(|w| v.info_leq(w)))
    }
}

/// Strong-Kleene evaluation of a formula under a valuation of the system's
/// defined names. Ground atoms evaluate to their fixed classical value;
/// `trans` follows the supplied reading.
pub fn kleene_eval_with(
    sys: &SentenceSystem,
    formula: &SentenceFormula,
    v: &ThreeValuation,
    reading: TransReading,
) -> Result<ThreeVal, TruthError> {
    let resolve = |name: &str| -> Result<ThreeVal, TruthError> {
        if let Some(b) = sys.ground_atoms.get(name) {
            return Ok(ThreeVal::from_bool(*b));
        }
        if sys.definitions.contains_key(name) {
            return v
                .get(name)
                .ok_or_else(|| TruthError::IncompleteValuation(name.to_string()));
        }
        Err(TruthError::UnresolvedName(name.to_string()))
    };
    Ok(match formula {
        SentenceFormula::GroundAtom(_, b) => ThreeVal::from_bool(*b),
        SentenceFormula::Ref(n) => resolve(n)?,
        SentenceFormula::Trans(n) => {
            let val = resolve(n)?;
            match (val, reading) {
                (NoneV, TransReading::ClosedFalse) => FalseV,
                _ => val,
            }
        }
        SentenceFormula::Not(a) => kleene_eval_with(sys, a, v, reading)?.not(),
        SentenceFormula::And(a, b) => {
            kleene_eval_with(sys, a, v, reading)?.and(kleene_eval_with(sys, b, v, reading)?)
        }
        SentenceFormula::Or(a, b) => {
            kleene_eval_with(sys, a, v, reading)?.or(kleene_eval_with(sys, b, v, reading)?)
        }
        SentenceFormula::Implies(a, b) => {
            kleene_eval_with(sys, a, v, reading)?.implies(kleene_eval_with(sys, b, v, reading)?)
        }
        SentenceFormula::Iff(a, b) => {
            kleene_eval_with(sys, a, v, reading)?.iff(kleene_eval_with(sys, b, v, reading)?)
        }
    })
}

/// [`kleene_eval_with`] under the default strong-Kleene `trans` reading.
pub fn kleene_eval(
    sys: &SentenceSystem,
    formula: &SentenceFormula,
    v: &ThreeValuation,
) -> Result<ThreeVal, TruthError> {
    kleene_eval_with(sys, formula, v, TransReading::StrongKleene)
}

/// One application of the Kripke jump: every definition re-evaluated under
/// the current valuation. Under the strong-Kleene reading this is monotone
/// in the information order, so iteration from the all-undetermined
/// valuation climbs without ever demoting a name.
pub fn jump(
    sys: &SentenceSystem,
    v: &ThreeValuation,
    reading: TransReading,
) -> Result<ThreeValuation, TruthError> {
    let mut next = ThreeValuation { values: BTreeMap::new() };
    for (name, formula) in &sys.definitions {
        next.set(name, kleene_eval_with(sys, formula, v, reading)?);
    }
    Ok(next)
}

/// The jump with already-classical values pinned. Equivalent to [`jump`]
/// along the ascending chain under the strong-Kleene reading; under the
/// closed-false reading the pin is what makes the iteration stabilize
/// instead of oscillating through the liar.
fn clamped_jump(
    sys: &SentenceSystem,
    v: &ThreeValuation,
    reading: TransReading,
) -> Result<ThreeValuation, TruthError> {
    let mut next = v.clone();
    for (name, formula) in &sys.definitions {
        let current = v
            .get(name)
            .ok_or_else(|| TruthError::IncompleteValuation(name.clone()))?;
        if current == NoneV {
            let evaluated = kleene_eval_with(sys, formula, v, reading)?;
            if evaluated.is_classical() {
                next.set(name, evaluated);
            }
        }
    }
    Ok(next)
}

/// Iterates the jump from the all-undetermined valuation until it repeats,
/// returning the least fixed point and the full stage trace.
pub fn kripke_lfp(
    sys: &SentenceSystem,
    fuel: usize,
) -> Result<(ThreeValuation, Vec<ThreeValuation>), TruthError> {
    kripke_lfp_with(sys, fuel, TransReading::StrongKleene)
}

pub fn kripke_lfp_with(
    sys: &SentenceSystem,
    fuel: usize,
    reading: TransReading,
) -> Result<(ThreeValuation, Vec<ThreeValuation>), TruthError> {
    let mut current = ThreeValuation::all_none(sys);
    let mut trace = vec![current.clone()];
    for _ in 0..fuel {
        let next = clamped_jump(sys, &current, reading)?;
        if next == current {
            return Ok((current, trace));
        }
        trace.push(next.clone());
        current = next;
    }
    Err(TruthError::FuelExhausted(fuel))
}

/// Default jump fuel: a finite system stabilizes well within this many stages.
pub fn default_jump_fuel(sys: &SentenceSystem) -> usize {
    2 * sys.len() + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grounding {
    GroundedTrue,
    GroundedFalse,
    Ungrounded,
}

/// Classifies every defined name by its value in the Kripke least fixed point.
pub fn classify(sys: &SentenceSystem) -> Result<BTreeMap<String, Grounding>, TruthError> {
    let (fixed, _) = kripke_lfp(sys, default_jump_fuel(sys))?;
    Ok(fixed
        .values()
        .iter()
        .map(|(n, v)| {
            let g = match v {
                TrueV => Grounding::GroundedTrue,
                FalseV => Grounding::GroundedFalse,
                NoneV => Grounding::Ungrounded,
            };
            (n.clone(), g)
        })
        .collect())
}

/// Bound on defined names for the exhaustive two-valued search.
pub const CLASSICAL_SEARCH_BOUND: usize = 20;

/// Classical evaluation of a formula under a total two-valued assignment,
/// with `trans(n)` forced to agree with the value of `n`.
fn classical_eval(
    sys: &SentenceSystem,
    formula: &SentenceFormula,
    w: &BTreeMap<String, bool>,
) -> Result<bool, TruthError> {
    let resolve = |name: &str| -> Result<bool, TruthError> {
        if let Some(b) = sys.ground_atoms.get(name) {
            return Ok(*b);
        }
        w.get(name)
            .copied()
            .ok_or_else(|| TruthError::UnresolvedName(name.to_string()))
    };
    Ok(match formula {
        SentenceFormula::GroundAtom(_, b) => *b,
        SentenceFormula::Ref(n) | SentenceFormula::Trans(n) => resolve(n)?,
        SentenceFormula::Not(a) => !classical_eval(sys, a, w)?,
        SentenceFormula::And(a, b) => classical_eval(sys, a, w)? && classical_eval(sys, b, w)?,
        SentenceFormula::Or(a, b) => classical_eval(sys, a, w)? || classical_eval(sys, b, w)?,
        SentenceFormula::Implies(a, b) => !classical_eval(sys, a, w)? || classical_eval(sys, b, w)?,
        SentenceFormula::Iff(a, b) => classical_eval(sys, a, w)? == classical_eval(sys, b, w)?,
    })
}

/// Searches all two-valued assignments for one in which (a) every definition
/// biconditional holds and (b) the totally-defined `trans` predicate agrees
/// with sentence values. `None` on the transparency liar is the finite form
/// of the impossibility theorem. Assignments are tried in lexicographic name
/// order with false before true, so the first witness found is canonical.
pub fn total_classical_search(
    sys: &SentenceSystem,
) -> Result<Option<BTreeMap<String, bool>>, TruthError> {
    let mut found = None;
    scan_classical(sys, |w| {
        found = Some(w);
        false
    })?;
    Ok(found)
}

/// Every total classical witness, in the canonical search order.
pub fn all_classical_witnesses(
    sys: &SentenceSystem,
) -> Result<Vec<BTreeMap<String, bool>>, TruthError> {
    let mut found = Vec::new();
    scan_classical(sys, |w| {
        found.push(w);
        true
    })?;
    Ok(found)
}

/// Runs `visit` on each witness in order until it returns false.
fn scan_classical(
    sys: &SentenceSystem,
    mut visit: impl FnMut(BTreeMap<String, bool>) -> bool,
) -> Result<(), TruthError> {
    let names: Vec<&String> = sys.definitions.keys().collect();
    let n = names.len();
    if n > CLASSICAL_SEARCH_BOUND {
        return Err(TruthError::CapacityExceeded {
            names: n,
            bound: CLASSICAL_SEARCH_BOUND,
        });
    }
    for assignment in 0..(1u64 << n) {
        let w: BTreeMap<String, bool> = names
            .iter()
            .enumerate()
            // names[0] is the most significant bit so that counting order is
            // name-then-false-before-true lexicographic order
            .map(|(i, name)| ((*name).clone(), assignment >> (n - 1 - i) & 1 == 1))
            .collect();
        let mut ok = true;
        for (name, formula) in &sys.definitions {
            if classical_eval(sys, formula, &w)? != w[name] {
                ok = false;
                break;
            }
        }
        if ok && !visit(w) {
            return Ok(());
        }
    }
    Ok(())
}

/// The canonical name of the transparency-liar sentence.
pub const LIAR_NAME: &str = "liar";

/// The one-sentence system `liar := not(trans(liar))`.
pub fn make_transparency_liar() -> SentenceSystem {
    let mut definitions = BTreeMap::new();
    definitions.insert(
        LIAR_NAME.to_string(),
        SentenceFormula::not(SentenceFormula::trans(LIAR_NAME)),
    );
    SentenceSystem::new(definitions, BTreeMap::new()).expect("liar system is well formed")
}

/// Bound on defined names for the LP model scan (3^n assignments).
pub const LP_BOUND: usize = 12;

/// Paraconsistent designation: a name may be designated true, false, or both
/// (a glut). Ground atoms are designated by their value and never glutted.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LPValuation {
    pub designated_true: BTreeSet<String>,
    pub designated_false: BTreeSet<String>,
}

impl LPValuation {
    pub fn gluts(&self) -> BTreeSet<String> {
        self.designated_true
            .intersection(&self.designated_false)
            .cloned()
            .collect()
    }
}

/// LP value of a name in a three-valued branch, where the third value plays
/// the role of "both".
fn lp_designated(v: ThreeVal, polarity: bool) -> bool {
    matches!((v, polarity), (TrueV, true) | (FalseV, false) | (NoneV, _))
}

/// Computes the paraconsistent model by branch-forcing closure: scan all
/// three-valued assignments (third value = glut), keep those in which every
/// definition biconditional is designated, restrict to the minimally glutted
/// ones, and designate a name in a polarity when some minimal branch does.
///
/// Classical models are exactly the glut-free branches, so on a classically
/// satisfiable system the result agrees with [`total_classical_search`].
/// The returned witness is a name designated in only one polarity — its
/// existence shows a liar-induced contradiction does not spread to every
/// sentence.
pub fn lp_model(
    sys: &SentenceSystem,
) -> Result<(LPValuation, Option<String>), TruthError> {
    let names: Vec<&String> = sys.definitions.keys().collect();
    let n = names.len();
    if n > LP_BOUND {
        return Err(TruthError::CapacityExceeded { names: n, bound: LP_BOUND });
    }

    let mut branches: Vec<ThreeValuation> = Vec::new();
    let mut min_gluts = usize::MAX;
    let mut counter = vec![0u8; n];
    loop {
        let mut v = ThreeValuation { values: BTreeMap::new() };
        for (i, name) in names.iter().enumerate() {
            let val = match counter[i] {
                0 => FalseV,
                1 => TrueV,
                _ => NoneV, // the glut value in this scan
            };
            v.set(name, val);
        }
        // a definition holds in LP when the biconditional is designated:
        // its value is TrueV or the glut value
        let mut holds = true;
        for (name, formula) in &sys.definitions {
            let lhs = v.get(name).unwrap();
            let rhs = kleene_eval(sys, formula, &v)?;
            if lhs.iff(rhs) == FalseV {
                holds = false;
                break;
            }
        }
        if holds {
            let gluts = v.values().values().filter(|x| **x == NoneV).count();
            match gluts.cmp(&min_gluts) {
                std::cmp::Ordering::Less => {
                    min_gluts = gluts;
                    branches = vec![v];
                }
                std::cmp::Ordering::Equal => branches.push(v),
                std::cmp::Ordering::Greater => {}
            }
        }
        // advance the base-3 counter
        let mut i = 0;
        loop {
            if i == n {
                break;
            }
            counter[i] += 1;
            if counter[i] < 3 {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }

    let mut valuation = LPValuation::default();
    for (name, value) in &sys.ground_atoms {
        if *value {
            valuation.designated_true.insert(name.clone());
        } else {
            valuation.designated_false.insert(name.clone());
        }
    }
    for branch in &branches {
        for (name, value) in branch.values() {
            if lp_designated(*value, true) {
                valuation.designated_true.insert(name.clone());
            }
            if lp_designated(*value, false) {
                valuation.designated_false.insert(name.clone());
            }
        }
    }

    let gluts = valuation.gluts();
    let witness = sys
        .ground_atoms
        .keys()
        .chain(sys.definitions.keys())
        .filter(|n| !gluts.contains(*n))
        .min()
        .cloned();
    Ok((valuation, witness))
}

/// Parses the prefix sentence grammar: `not(f)`, `and(f,g)`, `or(f,g)`,
/// `implies(f,g)`, `iff(f,g)`, `trans(name)`, `ref(name)`,
/// `atom(name,true|false)`.
pub fn parse_sentence(text: &str) -> Result<SentenceFormula, TruthError> {
    let mut parser = SentenceParser { text, pos: 0 };
    let formula = parser.formula()?;
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(formula)
}

struct SentenceParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> SentenceParser<'a> {
    fn error(&self, message: &str) -> TruthError {
        TruthError::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        let skipped: usize = rest
            .chars()
            .take_while(|c| c.is_ascii_whitespace())
            .map(char::len_utf8)
            .sum();
        self.pos += skipped;
    }

    fn expect(&mut self, token: char) -> Result<(), TruthError> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len_utf8();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn ident(&mut self) -> Result<String, TruthError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .take_while(|(i, c)| {
                c.is_ascii_alphanumeric() || *c == '_' || (*i > 0 && *c == '\'')
            })
            .count();
        if len == 0 || rest.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(self.error("expected an identifier"));
        }
        let ident = rest[..len].to_string();
        self.pos += len;
        Ok(ident)
    }

    fn formula(&mut self) -> Result<SentenceFormula, TruthError> {
        let head = self.ident()?;
        let binary = |this: &mut Self,
                          ctor: fn(Box<SentenceFormula>, Box<SentenceFormula>) -> SentenceFormula|
         -> Result<SentenceFormula, TruthError> {
            this.expect('(')?;
            let a = this.formula()?;
            this.expect(',')?;
            let b = this.formula()?;
            this.expect(')')?;
            Ok(ctor(Box::new(a), Box::new(b)))
        };
        match head.as_str() {
            "not" => {
                self.expect('(')?;
                let a = self.formula()?;
                self.expect(')')?;
                Ok(SentenceFormula::not(a))
            }
            "and" => binary(self, SentenceFormula::And),
            "or" => binary(self, SentenceFormula::Or),
            "implies" => binary(self, SentenceFormula::Implies),
            "iff" => binary(self, SentenceFormula::Iff),
            "trans" => {
                self.expect('(')?;
                let name = self.ident()?;
                self.expect(')')?;
                Ok(SentenceFormula::Trans(name))
            }
            "ref" => {
                self.expect('(')?;
                let name = self.ident()?;
                self.expect(')')?;
                Ok(SentenceFormula::Ref(name))
            }
            "atom" => {
                self.expect('(')?;
                let name = self.ident()?;
                self.expect(',')?;
                let value = self.ident()?;
                let value = match value.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(self.error("atom value must be `true` or `false`")),
                };
                self.expect(')')?;
                Ok(SentenceFormula::GroundAtom(name, value))
            }
            other => Err(self.error(&format!("unknown connective `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(entries: &[(&str, &str)], atoms: &[(&str, bool)]) -> SentenceSystem {
        let definitions = entries
            .iter()
            .map(|(n, f)| (n.to_string(), parse_sentence(f).unwrap()))
            .collect();
        let ground = atoms.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        SentenceSystem::new(definitions, ground).unwrap()
    }

    #[test]
    fn kleene_tables() {
        assert_eq!(NoneV.not(), NoneV);
        assert_eq!(TrueV.and(FalseV), FalseV);
        assert_eq!(NoneV.or(TrueV), TrueV);
        assert_eq!(NoneV.and(TrueV), NoneV);
        assert_eq!(NoneV.implies(FalseV), NoneV);
        assert_eq!(FalseV.implies(NoneV), TrueV);
        assert_eq!(NoneV.iff(NoneV), NoneV);
    }

    #[test]
    fn eval_trans_of_ground_atom() {
        let sys = system(&[("m", "trans(a)")], &[("a", true)]);
        let v = ThreeValuation::all_none(&sys);
        let formula = parse_sentence("trans(a)").unwrap();
        assert_eq!(kleene_eval(&sys, &formula, &v).unwrap(), TrueV);
    }

    #[test]
    fn eval_unresolved_name_is_an_error() {
        let sys = SentenceSystem::empty();
        let v = ThreeValuation { values: BTreeMap::new() };
        let formula = parse_sentence("trans(ghost)").unwrap();
        assert_eq!(
            kleene_eval(&sys, &formula, &v),
            Err(TruthError::UnresolvedName("ghost".into()))
        );
    }

    #[test]
    fn liar_stays_ungrounded() {
        let sys = make_transparency_liar();
        let (fixed, trace) = kripke_lfp(&sys, default_jump_fuel(&sys)).unwrap();
        assert_eq!(fixed.get(LIAR_NAME), Some(NoneV));
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn grounded_sentence_promoted_at_stage_one() {
        let sys = system(&[("m", "trans(a)")], &[("a", true)]);
        let (fixed, trace) = kripke_lfp(&sys, default_jump_fuel(&sys)).unwrap();
        assert_eq!(fixed.get("m"), Some(TrueV));
        assert_eq!(trace.len(), 2);
        assert_eq!(trace[1].get("m"), Some(TrueV));
    }

    #[test]
    fn truth_teller_stays_ungrounded() {
        let sys = system(&[("k", "trans(k)")], &[]);
        let (fixed, _) = kripke_lfp(&sys, default_jump_fuel(&sys)).unwrap();
        assert_eq!(fixed.get("k"), Some(NoneV));
    }

    #[test]
    fn closed_false_reading_grounds_the_liar_true() {
        // under the closed reading trans(liar) is false at stage one, so the
        // liar itself is promoted to true; the flag exists precisely to
        // exhibit this alternative
        let sys = make_transparency_liar();
        let (fixed, _) =
            kripke_lfp_with(&sys, default_jump_fuel(&sys), TransReading::ClosedFalse).unwrap();
        assert_eq!(fixed.get(LIAR_NAME), Some(TrueV));
    }

    #[test]
    fn classify_mixed_system() {
        let sys = system(
            &[("m", "trans(a)"), ("p", "not(trans(a))")],
            &[("a", true)],
        );
        let classes = classify(&sys).unwrap();
        assert_eq!(classes["m"], Grounding::GroundedTrue);
        assert_eq!(classes["p"], Grounding::GroundedFalse);
    }

    #[test]
    fn classify_empty_system() {
        assert!(classify(&SentenceSystem::empty()).unwrap().is_empty());
    }

    #[test]
    fn classical_search_rejects_liar() {
        assert_eq!(total_classical_search(&make_transparency_liar()).unwrap(), None);
    }

    #[test]
    fn classical_search_single_constraint() {
        let sys = system(&[("m", "trans(mprime)")], &[("mprime", true)]);
        let witness = total_classical_search(&sys).unwrap().unwrap();
        assert!(witness["m"]);
    }

    #[test]
    fn classical_search_truth_teller_prefers_false() {
        let sys = system(&[("k", "trans(k)")], &[]);
        let witness = total_classical_search(&sys).unwrap().unwrap();
        // both assignments satisfy the constraints; false-before-true wins
        assert!(!witness["k"]);
    }

    #[test]
    fn liar_system_shape() {
        let sys = make_transparency_liar();
        assert_eq!(sys.len(), 1);
        assert_eq!(
            sys.definitions()[LIAR_NAME],
            SentenceFormula::not(SentenceFormula::trans(LIAR_NAME))
        );
    }

    #[test]
    fn lp_liar_with_spectator() {
        let mut definitions = BTreeMap::new();
        definitions.insert(
            LIAR_NAME.to_string(),
            parse_sentence("not(trans(liar))").unwrap(),
        );
        let atoms = [("rho".to_string(), false)].into_iter().collect();
        let sys = SentenceSystem::new(definitions, atoms).unwrap();
        let (valuation, witness) = lp_model(&sys).unwrap();
        assert!(valuation.designated_true.contains(LIAR_NAME));
        assert!(valuation.designated_false.contains(LIAR_NAME));
        assert!(!valuation.designated_true.contains("rho"));
        assert!(valuation.designated_false.contains("rho"));
        assert_eq!(witness, Some("rho".into()));
    }

    #[test]
    fn lp_matches_classical_witness_without_paradox() {
        let sys = system(
            &[("m", "trans(a)"), ("p", "not(trans(a))")],
            &[("a", true)],
        );
        let (valuation, witness) = lp_model(&sys).unwrap();
        assert!(valuation.gluts().is_empty());
        let classical = total_classical_search(&sys).unwrap().unwrap();
        for (name, value) in &classical {
            assert_eq!(valuation.designated_true.contains(name), *value);
            assert_eq!(valuation.designated_false.contains(name), !*value);
        }
        assert!(witness.is_some());
    }

    #[test]
    fn lp_empty_system() {
        let (valuation, witness) = lp_model(&SentenceSystem::empty()).unwrap();
        assert!(valuation.designated_true.is_empty());
        assert!(valuation.designated_false.is_empty());
        assert_eq!(witness, None);
    }

    #[test]
    fn parser_round_trips() {
        let text = "and(not(trans(liar)),or(ref(k),atom(a,true)))";
        let formula = parse_sentence(text).unwrap();
        assert_eq!(formula.to_string(), text);
    }

    #[test]
    fn parser_rejects_trailing_garbage() {
        assert!(matches!(
            parse_sentence("trans(a))"),
            Err(TruthError::Parse { .. })
        ));
    }

    #[test]
    fn system_rejects_ground_and_defined_collision() {
        let mut definitions = BTreeMap::new();
        definitions.insert("a".to_string(), parse_sentence("atom(a,true)").unwrap());
        let err = SentenceSystem::new(definitions, BTreeMap::new()).unwrap_err();
        assert_eq!(err, TruthError::NameCollision("a".into()));
    }

    #[test]
    fn system_rejects_conflicting_atoms() {
        let mut definitions = BTreeMap::new();
        definitions.insert(
            "m".to_string(),
            parse_sentence("and(atom(a,true),atom(a,false))").unwrap(),
        );
        let err = SentenceSystem::new(definitions, BTreeMap::new()).unwrap_err();
        assert_eq!(err, TruthError::ConflictingAtom("a".into()));
    }
}
