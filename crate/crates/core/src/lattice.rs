//! Finite powerset lattices and monotone operators.
//!
//! A [`Universe`] fixes an ordered set of item identifiers; a
//! [`LatticeElement`] is a subset of those items with bitset semantics. An
//! [`OperatorSpec`] is either a Horn-rule operator (monotone by construction)
//! or an explicit lookup table (monotonicity checked after the fact). Kleene
//! iteration from bottom/top computes least/greatest fixed points with a fuel
//! bound standing in for transfinite iteration, and [`enumerate_fixpoints`]
//! provides the exact brute-force oracle used by the other modules.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Universe sizes accepted by the exhaustive 2^n scans.
pub const ENUMERATION_BOUND: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("duplicate item identifier `{0}` in universe")]
    DuplicateItem(String),
    #[error("item identifier `{0}` is not in the universe")]
    UnknownItem(String),
    #[error("element is over a universe of size {element}, operator expects {expected}")]
    UniverseMismatch { element: usize, expected: usize },
    #[error("universe of {size} items exceeds the exhaustive bound of {bound}")]
    CapacityExceeded { size: usize, bound: usize },
    #[error("operator is not monotone: iteration chain broke {direction} order at step {step}")]
    NonMonotone { direction: &'static str, step: usize },
    #[error("fuel must be at least 1")]
    ZeroFuel,
}

/// An ordered set of distinct item identifiers. The position of an item in
/// the list is its canonical bit position for the lifetime of the universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    items: Vec<String>,
}

impl Universe {
    pub fn new<I, S>(items: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let items: Vec<String> = items.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.clone()) {
                return Err(LatticeError::DuplicateItem(item.clone()));
            }
        }
        Ok(Universe { items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn item(&self, index: usize) -> &str {
        &self.items[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|i| i == name)
    }

    /// The bottom element: nothing disclosed.
    pub fn bottom(&self) -> LatticeElement {
        LatticeElement::empty(self.len())
    }

    /// The top element: everything disclosed.
    pub fn top(&self) -> LatticeElement {
        let mut e = LatticeElement::empty(self.len());
        for i in 0..self.len() {
            e.insert(i);
        }
        e
    }

    /// Builds an element from item names, rejecting names outside the universe.
    pub fn element<'a, I>(&self, names: I) -> Result<LatticeElement, LatticeError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut e = self.bottom();
        for name in names {
            let idx = self
                .index_of(name)
                .ok_or_else(|| LatticeError::UnknownItem(name.to_string()))?;
            e.insert(idx);
        }
        Ok(e)
    }

    /// Builds an element from the low bits of `mask`. Only valid when the
    /// universe fits the enumeration bound.
    pub fn element_from_mask(&self, mask: usize) -> Result<LatticeElement, LatticeError> {
        if self.len() > ENUMERATION_BOUND {
            return Err(LatticeError::CapacityExceeded {
                size: self.len(),
                bound: ENUMERATION_BOUND,
            });
        }
        let mut e = self.bottom();
        for i in 0..self.len() {
            if mask & (1 << i) != 0 {
                e.insert(i);
            }
        }
        Ok(e)
    }

    /// Item names of an element, in canonical order.
    pub fn names_of<'u>(&'u self, e: &LatticeElement) -> Vec<&'u str> {
        e.indices().map(|i| self.item(i)).collect()
    }

    /// Renders an element as `{a, b}` using this universe's names.
    pub fn format_element(&self, e: &LatticeElement) -> String {
        format!("{{{}}}", self.names_of(e).join(", "))
    }
}

/// A subset of a universe's items, stored as packed bits. Two elements are
/// equal iff they denote the same set over the same-size universe.
///
/// The derived `Ord` is a canonical storage order (word-lexicographic), not
/// the lattice order; use [`LatticeElement::is_subset_of`] for inclusion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeElement {
    size: usize,
    bits: Vec<u64>,
}

impl LatticeElement {
    pub fn empty(size: usize) -> Self {
        LatticeElement {
            size,
            bits: vec![0; size.div_ceil(64)],
        }
    }

    pub fn universe_size(&self) -> usize {
        self.size
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.size, "index {index} outside universe of {}", self.size);
        self.bits[index / 64] |= 1 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        assert!(index < self.size, "index {index} outside universe of {}", self.size);
        self.bits[index / 64] &= !(1 << (index % 64));
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.size && self.bits[index / 64] & (1 << (index % 64)) != 0
    }

    pub fn with(&self, index: usize) -> Self {
        let mut e = self.clone();
        e.insert(index);
        e
    }

    pub fn without(&self, index: usize) -> Self {
        let mut e = self.clone();
        e.remove(index);
        e
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.size, other.size);
        let mut e = self.clone();
        e.union_in_place(other);
        e
    }

    pub fn union_in_place(&mut self, other: &Self) {
        for (w, o) in self.bits.iter_mut().zip(&other.bits) {
            *w |= o;
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.size, other.size);
        let mut e = self.clone();
        for (w, o) in e.bits.iter_mut().zip(&other.bits) {
            *w &= o;
        }
        e
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(w, o)| w & !o == 0)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.size).filter(move |i| self.contains(*i))
    }

    /// The element as a mask; only meaningful within the enumeration bound.
    pub fn mask(&self) -> usize {
        debug_assert!(self.size <= ENUMERATION_BOUND);
        self.bits.first().copied().unwrap_or(0) as usize
    }
}

impl fmt::Display for LatticeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in self.indices() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "#{i}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

/// One Horn rule: when every premise item is present, the conclusion items
/// are disclosed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub premise: LatticeElement,
    pub conclusions: LatticeElement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum OpKind {
    Rules { rules: Vec<Rule>, inflationary: bool },
    /// Total lookup table indexed by element mask. Only constructible within
    /// the enumeration bound.
    Table { map: Vec<LatticeElement> },
}

/// A disclosure operator on the powerset lattice of a universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    universe: Universe,
    kind: OpKind,
}

impl OperatorSpec {
    /// Rule-based operator. Monotone by construction; inflationary when the
    /// flag is set (the result always contains the input).
    pub fn from_rules(
        universe: Universe,
        rules: Vec<Rule>,
        inflationary: bool,
    ) -> Result<Self, LatticeError> {
        for rule in &rules {
            for part in [&rule.premise, &rule.conclusions] {
                if part.universe_size() != universe.len() {
                    return Err(LatticeError::UniverseMismatch {
                        element: part.universe_size(),
                        expected: universe.len(),
                    });
                }
            }
        }
        Ok(OperatorSpec {
            universe,
            kind: OpKind::Rules { rules, inflationary },
        })
    }

    /// Rule-based operator with rules written as (premise names, conclusion names).
    pub fn from_named_rules(
        universe: Universe,
        rules: &[(&[&str], &[&str])],
        inflationary: bool,
    ) -> Result<Self, LatticeError> {
        let built = rules
            .iter()
            .map(|(premise, conclusions)| {
                Ok(Rule {
                    premise: universe.element(premise.iter().copied())?,
                    conclusions: universe.element(conclusions.iter().copied())?,
                })
            })
            .collect::<Result<Vec<_>, LatticeError>>()?;
        Self::from_rules(universe, built, inflationary)
    }

    /// Explicit table operator, materialized over every subset. Monotonicity
    /// is the caller's problem; [`check_monotone`] will find violations.
    pub fn table<F>(universe: Universe, f: F) -> Result<Self, LatticeError>
    where
        F: Fn(&LatticeElement) -> LatticeElement,
    {
        let n = universe.len();
        if n > ENUMERATION_BOUND {
            return Err(LatticeError::CapacityExceeded {
                size: n,
                bound: ENUMERATION_BOUND,
            });
        }
        let mut map = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let x = universe.element_from_mask(mask)?;
            let y = f(&x);
            if y.universe_size() != n {
                return Err(LatticeError::UniverseMismatch {
                    element: y.universe_size(),
                    expected: n,
                });
            }
            map.push(y);
        }
        Ok(OperatorSpec {
            universe,
            kind: OpKind::Table { map },
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn is_inflationary(&self) -> bool {
        matches!(self.kind, OpKind::Rules { inflationary: true, .. })
    }

    pub fn rules(&self) -> Option<&[Rule]> {
        match &self.kind {
            OpKind::Rules { rules, .. } => Some(rules),
            OpKind::Table { .. } => None,
        }
    }
}

/// Applies the operator to an element of its universe.
pub fn apply(op: &OperatorSpec, x: &LatticeElement) -> Result<LatticeElement, LatticeError> {
    if x.universe_size() != op.universe.len() {
        return Err(LatticeError::UniverseMismatch {
            element: x.universe_size(),
            expected: op.universe.len(),
        });
    }
    match &op.kind {
        OpKind::Rules { rules, inflationary } => {
            let mut out = if *inflationary {
                x.clone()
            } else {
                op.universe.bottom()
            };
            for rule in rules {
                if rule.premise.is_subset_of(x) {
                    out.union_in_place(&rule.conclusions);
                }
            }
            Ok(out)
        }
        OpKind::Table { map } => Ok(map[x.mask()].clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixpointStatus {
    Converged,
    FuelExhausted,
}

/// Result of a fuel-bounded Kleene iteration. `trace` is the chain of
/// distinct iterates starting at bottom (for lfp) or top (for gfp);
/// `steps` counts operator applications including the one that confirmed
/// convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixpointResult {
    pub value: LatticeElement,
    pub trace: Vec<LatticeElement>,
    pub status: FixpointStatus,
    pub steps: usize,
}

impl FixpointResult {
    pub fn converged(&self) -> bool {
        self.status == FixpointStatus::Converged
    }
}

enum Direction {
    Ascending,
    Descending,
}

fn iterate(
    op: &OperatorSpec,
    start: LatticeElement,
    fuel: usize,
    direction: Direction,
) -> Result<FixpointResult, LatticeError> {
    if fuel == 0 {
        return Err(LatticeError::ZeroFuel);
    }
    let mut current = start;
    let mut trace = vec![current.clone()];
    for step in 1..=fuel {
        let next = apply(op, &current)?;
        if next == current {
            return Ok(FixpointResult {
                value: current,
                trace,
                status: FixpointStatus::Converged,
                steps: step,
            });
        }
        let ordered = match direction {
            Direction::Ascending => current.is_subset_of(&next),
            Direction::Descending => next.is_subset_of(&current),
        };
        if !ordered {
            return Err(LatticeError::NonMonotone {
                direction: match direction {
                    Direction::Ascending => "ascending",
                    Direction::Descending => "descending",
                },
                step,
            });
        }
        trace.push(next.clone());
        current = next;
    }
    Ok(FixpointResult {
        value: current,
        trace,
        status: FixpointStatus::FuelExhausted,
        steps: fuel,
    })
}

/// Least fixed point by ascending iteration from bottom.
pub fn lfp(op: &OperatorSpec, fuel: usize) -> Result<FixpointResult, LatticeError> {
    iterate(op, op.universe.bottom(), fuel, Direction::Ascending)
}

/// Greatest fixed point by descending iteration from top.
pub fn gfp(op: &OperatorSpec, fuel: usize) -> Result<FixpointResult, LatticeError> {
    iterate(op, op.universe.top(), fuel, Direction::Descending)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneMode {
    /// Every comparable pair is scanned (3^n pairs).
    Exhaustive,
    /// Random comparable pairs drawn from a seeded generator.
    Sampled { seed: u64, pairs: usize },
}

/// Monotonicity scan outcome: the comparable pairs found with
/// `T(x) not a subset of T(y)` despite `x` being a subset of `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub mode: MonotoneMode,
    pub violations: Vec<(LatticeElement, LatticeElement)>,
}

impl MonotoneReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks monotonicity, choosing exhaustive mode within the enumeration
/// bound and a 10^4-pair seeded sample (seed 0) above it.
pub fn check_monotone(op: &OperatorSpec) -> MonotoneReport {
    let mode = if op.universe.len() <= ENUMERATION_BOUND {
        MonotoneMode::Exhaustive
    } else {
        MonotoneMode::Sampled { seed: 0, pairs: 10_000 }
    };
    check_monotone_with(op, mode).expect("mode chosen within capacity")
}

pub fn check_monotone_with(
    op: &OperatorSpec,
    mode: MonotoneMode,
) -> Result<MonotoneReport, LatticeError> {
    let n = op.universe.len();
    let mut violations = Vec::new();
    match &mode {
        MonotoneMode::Exhaustive => {
            if n > ENUMERATION_BOUND {
                return Err(LatticeError::CapacityExceeded {
                    size: n,
                    bound: ENUMERATION_BOUND,
                });
            }
            for y_mask in 0..(1usize << n) {
                let y = op.universe.element_from_mask(y_mask)?;
                let ty = apply(op, &y)?;
                // enumerate all submasks of y_mask, including 0 and y_mask
                let mut x_mask = y_mask;
                loop {
                    let x = op.universe.element_from_mask(x_mask)?;
                    let tx = apply(op, &x)?;
                    if !tx.is_subset_of(&ty) {
                        violations.push((x, y.clone()));
                    }
                    if x_mask == 0 {
                        break;
                    }
                    x_mask = (x_mask - 1) & y_mask;
                }
            }
        }
        MonotoneMode::Sampled { seed, pairs } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*pairs {
                let mut y = op.universe.bottom();
                let mut x = op.universe.bottom();
                for i in 0..n {
                    if rng.gen_bool(0.5) {
                        y.insert(i);
                        if rng.gen_bool(0.5) {
                            x.insert(i);
                        }
                    }
                }
                let tx = apply(op, &x)?;
                let ty = apply(op, &y)?;
                if !tx.is_subset_of(&ty) {
                    violations.push((x, y));
                }
            }
        }
    }
    violations.sort();
    violations.dedup();
    Ok(MonotoneReport { mode, violations })
}

/// The exact set of fixed points, by scanning all 2^n subsets.
pub fn enumerate_fixpoints(
    op: &OperatorSpec,
) -> Result<BTreeSet<LatticeElement>, LatticeError> {
    let n = op.universe.len();
    if n > ENUMERATION_BOUND {
        return Err(LatticeError::CapacityExceeded {
            size: n,
            bound: ENUMERATION_BOUND,
        });
    }
    let mut fixed = BTreeSet::new();
    for mask in 0..(1usize << n) {
        let x = op.universe.element_from_mask(mask)?;
        if apply(op, &x)? == x {
            fixed.insert(x);
        }
    }
    Ok(fixed)
}
