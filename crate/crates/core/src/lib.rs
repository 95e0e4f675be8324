//! Fixed-point calculus for disclosure policies at desk scale.
//!
//! The crate is organized around one structural idea: a disclosure policy is a
//! monotone operator on the powerset lattice of information items, and every
//! question worth asking about it (equilibria, safety, gaming, optimal
//! disclosure levels) is a question about its fixed points. Each module owns
//! one slice of that story:
//!
//! - [`lattice`]: finite powerset lattices, monotone operators, Kleene
//!   iteration to least/greatest fixed points, brute-force fixpoint
//!   enumeration (the oracle everything else leans on).
//! - [`truth`]: self-referential sentence systems over a `trans` predicate;
//!   strong-Kleene evaluation, the Kripke least-fixed-point jump, exhaustive
//!   classical-model search, and a paraconsistent (LP) model.
//! - [`mucalc`]: modal mu-calculus parsing and model checking over finite
//!   Kripke frames, with a naive subset-scan oracle and a safety-preservation
//!   report for iterated disclosure.
//! - [`gl`]: provability-logic frame semantics, exhaustive validity checking
//!   of the Loeb schema, and a checked replay of the self-endorsement
//!   derivation.
//! - [`gaming`]: a deterministic toy program model in which any fully
//!   published audit can be gamed by a self-inspecting program.
//! - [`design`]: the risk functional, accountability-constrained greedy
//!   minimization, KKT slackness reporting, garbling comparisons, equilibrium
//!   enumeration, and the finite Lawvere/Cantor check.
//!
//! Everything is pure and deterministic: no operation holds mutable shared
//! state, and all randomized checks take explicit seeds.

pub mod design;
pub mod gaming;
pub mod gl;
pub mod lattice;
pub mod mucalc;
pub mod suites;
pub mod truth;
