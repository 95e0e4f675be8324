//! Seeded instance generators for the randomized check suites.
//!
//! Everything here is deterministic in the seed; the suites that quantify
//! over "N seeded instances" draw instance k from seed `base + k`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design::{AccountabilityModel, BestResponseTable, RiskModel};
use crate::gl::ModalFormula;
use crate::lattice::{OperatorSpec, Rule, Universe};
use crate::mucalc::{KripkeFrame, MuFormula};
use crate::truth::{SentenceFormula, SentenceSystem, ThreeVal, ThreeValuation, LIAR_NAME};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// sentence systems
// ---------------------------------------------------------------------------

fn random_sentence_formula(
    rng: &mut ChaCha8Rng,
    names: &[String],
    atoms: &[(String, bool)],
    depth: usize,
) -> SentenceFormula {
    if depth == 0 || rng.gen_bool(0.35) {
        // leaf
        return match rng.gen_range(0..4) {
            0 => SentenceFormula::Trans(names[rng.gen_range(0..names.len())].clone()),
            1 => SentenceFormula::Ref(names[rng.gen_range(0..names.len())].clone()),
            2 => {
                let (name, value) = &atoms[rng.gen_range(0..atoms.len())];
                SentenceFormula::GroundAtom(name.clone(), *value)
            }
            _ => {
                let (name, _) = &atoms[rng.gen_range(0..atoms.len())];
                SentenceFormula::Trans(name.clone())
            }
        };
    }
    let a = random_sentence_formula(rng, names, atoms, depth - 1);
    match rng.gen_range(0..5) {
        0 => SentenceFormula::not(a),
        1 => SentenceFormula::And(Box::new(a), Box::new(random_sentence_formula(rng, names, atoms, depth - 1))),
        2 => SentenceFormula::Or(Box::new(a), Box::new(random_sentence_formula(rng, names, atoms, depth - 1))),
        3 => SentenceFormula::Implies(Box::new(a), Box::new(random_sentence_formula(rng, names, atoms, depth - 1))),
        _ => SentenceFormula::Iff(Box::new(a), Box::new(random_sentence_formula(rng, names, atoms, depth - 1))),
    }
}

/// A random sentence system with up to `max_names` defined names over two
/// ground atoms; with `embed_liar` the transparency-liar definition is
/// included (and other sentences may reference it).
pub fn random_sentence_system(seed: u64, max_names: usize, embed_liar: bool) -> SentenceSystem {
    let mut rng = rng(seed);
    let count = rng.gen_range(1..=max_names.max(1));
    let mut names: Vec<String> = (0..count).map(|i| format!("s{i}")).collect();
    if embed_liar {
        names.push(LIAR_NAME.to_string());
    }
    let atoms = vec![("g_true".to_string(), true), ("g_false".to_string(), false)];
    let mut definitions = BTreeMap::new();
    for name in &names {
        if name == LIAR_NAME {
            definitions.insert(
                name.clone(),
                SentenceFormula::not(SentenceFormula::trans(LIAR_NAME)),
            );
        } else {
            definitions.insert(
                name.clone(),
                random_sentence_formula(&mut rng, &names, &atoms, 3),
            );
        }
    }
    SentenceSystem::new(definitions, atoms.into_iter().collect())
        .expect("generated system is well formed")
}

/// A pair of valuations over the system's names with `lower <= upper` in the
/// information order: `upper` is `lower` with some undetermined names
/// promoted.
pub fn random_valuation_pair(
    seed: u64,
    sys: &SentenceSystem,
) -> (ThreeValuation, ThreeValuation) {
    let mut rng = rng(seed);
    let mut lower = BTreeMap::new();
    let mut upper = BTreeMap::new();
    for name in sys.names() {
        let low = match rng.gen_range(0..3) {
            0 => ThreeVal::TrueV,
            1 => ThreeVal::FalseV,
            _ => ThreeVal::NoneV,
        };
        let high = if low == ThreeVal::NoneV && rng.gen_bool(0.5) {
            if rng.gen_bool(0.5) {
                ThreeVal::TrueV
            } else {
                ThreeVal::FalseV
            }
        } else {
            low
        };
        lower.insert(name.to_string(), low);
        upper.insert(name.to_string(), high);
    }
    (ThreeValuation::from_map(lower), ThreeValuation::from_map(upper))
}

// ---------------------------------------------------------------------------
// mu-calculus formulas and frames
// ---------------------------------------------------------------------------

fn random_mu_inner(
    rng: &mut ChaCha8Rng,
    depth: usize,
    scope: &mut Vec<String>,
    binders_left: &mut usize,
) -> MuFormula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        let candidates = 2 + usize::from(!scope.is_empty());
        return match rng.gen_range(0..candidates) {
            0 => MuFormula::prop(if rng.gen_bool(0.5) { "p" } else { "q" }),
            1 => MuFormula::negated(MuFormula::prop(if rng.gen_bool(0.5) { "p" } else { "q" })),
            _ => MuFormula::var(&scope[rng.gen_range(0..scope.len())]),
        };
    }
    let can_bind = *binders_left > 0;
    match rng.gen_range(0..if can_bind { 6 } else { 4 }) {
        0 => MuFormula::and(
            random_mu_inner(rng, depth - 1, scope, binders_left),
            random_mu_inner(rng, depth - 1, scope, binders_left),
        ),
        1 => MuFormula::or(
            random_mu_inner(rng, depth - 1, scope, binders_left),
            random_mu_inner(rng, depth - 1, scope, binders_left),
        ),
        2 => MuFormula::boxed(random_mu_inner(rng, depth - 1, scope, binders_left)),
        3 => MuFormula::diamond(random_mu_inner(rng, depth - 1, scope, binders_left)),
        kind => {
            *binders_left -= 1;
            let var = format!("V{}", scope.len());
            scope.push(var.clone());
            let body = random_mu_inner(rng, depth - 1, scope, binders_left);
            scope.pop();
            if kind == 4 {
                MuFormula::mu(&var, body)
            } else {
                MuFormula::nu(&var, body)
            }
        }
    }
}

/// A random well-formed formula in negation normal form over propositions
/// `p`, `q`, of the given depth with at most `max_binders` fixpoint binders.
pub fn random_mu_formula(seed: u64, depth: usize, max_binders: usize) -> MuFormula {
    let mut rng = rng(seed);
    let mut binders = max_binders;
    random_mu_inner(&mut rng, depth, &mut Vec::new(), &mut binders)
}

/// A random frame with the given number of states, edge density about a
/// third, and random labelings of `p` and `q`.
pub fn random_frame(seed: u64, states: usize) -> KripkeFrame {
    let mut rng = rng(seed);
    let names: Vec<String> = (0..states).map(|i| format!("s{i}")).collect();
    let mut frame = KripkeFrame::new(names).expect("state count within bound");
    for from in 0..states {
        for to in 0..states {
            if rng.gen_bool(0.35) {
                frame.add_edge_by_index(from, to);
            }
        }
    }
    for prop in ["p", "q"] {
        let chosen: Vec<String> = (0..states)
            .filter(|_| rng.gen_bool(0.5))
            .map(|i| format!("s{i}"))
            .collect();
        frame
            .label(prop, chosen.iter().map(String::as_str))
            .expect("states exist");
    }
    frame
}

// ---------------------------------------------------------------------------
// modal formulas
// ---------------------------------------------------------------------------

fn random_modal_inner(rng: &mut ChaCha8Rng, depth: usize) -> ModalFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return ModalFormula::prop(if rng.gen_bool(0.5) { "p" } else { "q" });
    }
    match rng.gen_range(0..6) {
        0 => ModalFormula::not(random_modal_inner(rng, depth - 1)),
        1 => ModalFormula::and(
            random_modal_inner(rng, depth - 1),
            random_modal_inner(rng, depth - 1),
        ),
        2 => ModalFormula::or(
            random_modal_inner(rng, depth - 1),
            random_modal_inner(rng, depth - 1),
        ),
        3 => ModalFormula::implies(
            random_modal_inner(rng, depth - 1),
            random_modal_inner(rng, depth - 1),
        ),
        4 => ModalFormula::boxed(random_modal_inner(rng, depth - 1)),
        _ => ModalFormula::diamond(random_modal_inner(rng, depth - 1)),
    }
}

/// A random modal formula of the given depth over propositions `p`, `q`.
pub fn random_modal_formula(seed: u64, depth: usize) -> ModalFormula {
    random_modal_inner(&mut rng(seed), depth)
}

// ---------------------------------------------------------------------------
// policies and models
// ---------------------------------------------------------------------------

fn universe_of(n: usize) -> Universe {
    Universe::new((0..n).map(|i| format!("x{i}"))).expect("distinct names")
}

fn random_subset(rng: &mut ChaCha8Rng, universe: &Universe, density: f64) -> crate::lattice::LatticeElement {
    let mut e = universe.bottom();
    for i in 0..universe.len() {
        if rng.gen_bool(density) {
            e.insert(i);
        }
    }
    e
}

/// A random inflationary rule policy on `items` items.
pub fn random_rule_policy(seed: u64, items: usize) -> OperatorSpec {
    let mut rng = rng(seed);
    let universe = universe_of(items);
    let rule_count = rng.gen_range(1..=items.max(2));
    let rules: Vec<Rule> = (0..rule_count)
        .map(|_| Rule {
            premise: random_subset(&mut rng, &universe, 0.25),
            conclusions: random_subset(&mut rng, &universe, 0.35),
        })
        .collect();
    OperatorSpec::from_rules(universe, rules, true).expect("rules over own universe")
}

/// A pointwise-coarser copy of a rule policy: random rules are dropped
/// entirely and random conclusion items are removed from the kept rules, so
/// the garbled policy discloses a subset of the original at every state.
pub fn garbled_copy(seed: u64, policy: &OperatorSpec) -> OperatorSpec {
    let mut rng = rng(seed);
    let universe = policy.universe().clone();
    let rules = policy.rules().expect("garbling applies to rule policies");
    let mut garbled = Vec::new();
    for rule in rules {
        if !rng.gen_bool(0.7) {
            continue;
        }
        let mut conclusions = universe.bottom();
        for i in rule.conclusions.indices() {
            if rng.gen_bool(0.7) {
                conclusions.insert(i);
            }
        }
        garbled.push(Rule { premise: rule.premise.clone(), conclusions });
    }
    OperatorSpec::from_rules(universe, garbled, true).expect("subset of a valid policy")
}

/// A random risk model with nonnegative scores and a couple of pairwise
/// interactions.
pub fn random_risk_model(seed: u64, universe: &Universe) -> RiskModel {
    let mut rng = rng(seed);
    let names: Vec<&str> = universe.items().iter().map(String::as_str).collect();
    let mut score_table = |max: f64| -> Vec<(&str, f64)> {
        names.iter().map(|n| (*n, rng.gen_range(0.0..max))).collect()
    };
    let paradox = score_table(1.0);
    let leakage = score_table(2.0);
    let fairness = score_table(1.0);
    let gaming = score_table(3.0);
    let mut interactions = Vec::new();
    if names.len() >= 2 {
        for _ in 0..2 {
            let a = rng.gen_range(0..names.len());
            let mut b = rng.gen_range(0..names.len());
            if a == b {
                b = (b + 1) % names.len();
            }
            interactions.push((names[a], names[b], rng.gen_range(0.0..1.0)));
        }
    }
    RiskModel::new(
        universe,
        (
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
        ),
        &paradox,
        &leakage,
        &fairness,
        &gaming,
        &interactions,
    )
    .expect("generated scores are nonnegative")
}

/// One instance for the greedy/KKT suite: a policy, an equal-gain
/// accountability model, a feasible floor, and a risk model. Instances with
/// rules use a floor of zero (the pure least-fixed-point path); rule-free
/// instances draw a random feasible floor and exercise the forced-add path.
pub struct GreedyInstance {
    pub policy: OperatorSpec,
    pub accountability: AccountabilityModel,
    pub floor: f64,
    pub risk: RiskModel,
}

pub fn greedy_instance(seed: u64) -> GreedyInstance {
    let mut rng = rng(seed);
    let items = rng.gen_range(3..=8);
    let with_rules = seed.is_multiple_of(2);
    let policy = if with_rules {
        random_rule_policy(seed.wrapping_add(101), items)
    } else {
        let universe = universe_of(items);
        OperatorSpec::from_rules(universe, Vec::new(), true).expect("empty rules")
    };
    let universe = policy.universe().clone();
    let gain = rng.gen_range(0.5..2.0);
    let accountability = AccountabilityModel::uniform(&universe, gain);
    let floor = if with_rules {
        0.0
    } else {
        rng.gen_range(0.0..=gain * items as f64)
    };
    let risk = random_risk_model(seed.wrapping_add(202), &universe);
    GreedyInstance { policy, accountability, floor, risk }
}

/// A random total best-response table over the policy's universe, with one
/// to three responses per state.
pub fn random_best_response(seed: u64, universe: &Universe) -> BestResponseTable {
    let mut seeds = rng(seed);
    let per_state: Vec<u64> = (0..(1usize << universe.len())).map(|_| seeds.gen()).collect();
    BestResponseTable::from_fn(universe, |x| {
        let mut local = rng(per_state[x.mask()]);
        let count = local.gen_range(1..=3);
        (0..count)
            .map(|_| random_subset(&mut local, universe, 0.5))
            .collect()
    })
    .expect("universe within bound")
}
