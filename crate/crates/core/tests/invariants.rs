//! Property suites for the module invariants: extremality of iterated fixed
//! points, jump monotonicity, oracle agreements, schema validity over frame
//! enumerations, and monotonicity of the risk calculus.

use std::collections::BTreeMap;

use proptest::prelude::*;

use aperture_core::design::{
    greedy_min_transparency, lawvere_check, risk, GreedyStatus,
};
use aperture_core::gl::{enumerate_gl_frames, valid_in_frame, GlFrame, ModalFormula};
use aperture_core::lattice::{apply, enumerate_fixpoints, gfp, lfp, ENUMERATION_BOUND};
use aperture_core::mucalc::{mc_eval, mc_eval_env, MuFormula, StateSet};
use aperture_core::suites::{
    garbled_copy, greedy_instance, random_frame, random_modal_formula, random_mu_formula,
    random_risk_model, random_rule_policy, random_sentence_system, random_valuation_pair,
};
use aperture_core::truth::{
    classify, default_jump_fuel, jump, kripke_lfp, total_classical_search, Grounding, ThreeVal,
    TransReading, LIAR_NAME,
};

// ---------------------------------------------------------------------------
// lattice
// ---------------------------------------------------------------------------

#[test]
fn iterated_fixed_points_are_extremal() {
    for seed in 0..60 {
        let policy = random_rule_policy(seed, 3 + (seed as usize % 8));
        let n = policy.universe().len();
        assert!(n <= ENUMERATION_BOUND);
        let least = lfp(&policy, n + 2).unwrap();
        let greatest = gfp(&policy, n + 2).unwrap();
        assert!(least.converged());
        assert!(greatest.converged());
        for fixed in enumerate_fixpoints(&policy).unwrap() {
            assert!(least.value.is_subset_of(&fixed), "seed {seed}");
            assert!(fixed.is_subset_of(&greatest.value), "seed {seed}");
        }
    }
}

#[test]
fn lfp_trace_is_strictly_ascending_and_short() {
    for seed in 0..60 {
        let policy = random_rule_policy(seed, 3 + (seed as usize % 8));
        let n = policy.universe().len();
        let result = lfp(&policy, n + 2).unwrap();
        assert!(result.converged());
        assert!(result.trace.len() <= n + 1, "seed {seed}");
        for pair in result.trace.windows(2) {
            assert!(pair[0].is_subset_of(&pair[1]) && pair[0] != pair[1], "seed {seed}");
        }
    }
}

#[test]
fn lfp_is_below_every_post_fixed_point() {
    for seed in 0..40 {
        let policy = random_rule_policy(seed, 3 + (seed as usize % 6));
        let n = policy.universe().len();
        let least = lfp(&policy, n + 2).unwrap();
        for mask in 0..(1usize << n) {
            let x = policy.universe().element_from_mask(mask).unwrap();
            let tx = apply(&policy, &x).unwrap();
            if tx.is_subset_of(&x) {
                assert!(least.value.is_subset_of(&x), "seed {seed}");
            }
        }
    }
}

proptest! {
    #[test]
    fn apply_is_deterministic(seed in 0u64..500, mask in 0usize..256) {
        let policy = random_rule_policy(seed, 8);
        let x = policy.universe().element_from_mask(mask).unwrap();
        prop_assert_eq!(apply(&policy, &x).unwrap(), apply(&policy, &x).unwrap());
    }
}

// ---------------------------------------------------------------------------
// truth
// ---------------------------------------------------------------------------

#[test]
fn jump_is_monotone_on_random_pairs() {
    let mut checked = 0usize;
    for seed in 0..1000 {
        let sys = random_sentence_system(seed, 8, false);
        let (lower, upper) = random_valuation_pair(seed.wrapping_add(1), &sys);
        assert!(lower.info_leq(&upper));
        let jump_lower = jump(&sys, &lower, TransReading::StrongKleene).unwrap();
        let jump_upper = jump(&sys, &upper, TransReading::StrongKleene).unwrap();
        assert!(jump_lower.info_leq(&jump_upper), "seed {seed}");
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

#[test]
fn kripke_stages_ascend_and_stabilize_quickly() {
    for seed in 0..100 {
        let sys = random_sentence_system(seed, 8, false);
        let fuel = default_jump_fuel(&sys);
        let (_, trace) = kripke_lfp(&sys, fuel).unwrap();
        assert!(trace.len() <= 2 * sys.len() + 1, "seed {seed}");
        for pair in trace.windows(2) {
            assert!(pair[0].info_leq(&pair[1]), "seed {seed}");
        }
    }
}

#[test]
fn groundings_agree_with_every_classical_witness() {
    for seed in 0..100 {
        let sys = random_sentence_system(seed, 8, false);
        let classes = classify(&sys).unwrap();
        if let Some(witness) = total_classical_search(&sys).unwrap() {
            for (name, grounding) in &classes {
                match grounding {
                    Grounding::GroundedTrue => assert!(witness[name], "seed {seed} name {name}"),
                    Grounding::GroundedFalse => assert!(!witness[name], "seed {seed} name {name}"),
                    Grounding::Ungrounded => {}
                }
            }
        }
    }
}

#[test]
fn systems_with_ground_atoms_always_witness_non_explosion() {
    use aperture_core::truth::lp_model;
    for seed in 0..40 {
        let sys = random_sentence_system(seed, 5, seed % 2 == 0);
        let (valuation, witness) = lp_model(&sys).unwrap();
        // the generator always installs ground atoms, which never glut, so a
        // witness must exist and must sit outside the glut set
        let witness = witness.expect("ground atoms guarantee a witness");
        assert!(!valuation.gluts().contains(&witness), "seed {seed}");
    }
}

#[test]
fn liar_embeddings_have_no_classical_model() {
    for seed in 0..50 {
        let sys = random_sentence_system(seed, 6, true);
        assert_eq!(total_classical_search(&sys).unwrap(), None, "seed {seed}");
        let classes = classify(&sys).unwrap();
        assert_eq!(classes[LIAR_NAME], Grounding::Ungrounded, "seed {seed}");
    }
}

proptest! {
    #[test]
    fn kleene_connectives_respect_information_order(a in 0u8..3, b in 0u8..3, c in 0u8..3) {
        let decode = |x: u8| match x {
            0 => ThreeVal::TrueV,
            1 => ThreeVal::FalseV,
            _ => ThreeVal::NoneV,
        };
        let (a, b, c) = (decode(a), decode(b), decode(c));
        // refining an input never flips a classical output
        if a.info_leq(b) {
            prop_assert!(a.not().info_leq(b.not()));
            prop_assert!(a.and(c).info_leq(b.and(c)));
            prop_assert!(a.or(c).info_leq(b.or(c)));
            prop_assert!(a.implies(c).info_leq(b.implies(c)));
            prop_assert!(a.iff(c).info_leq(b.iff(c)));
        }
    }
}

// ---------------------------------------------------------------------------
// mu-calculus
// ---------------------------------------------------------------------------

#[test]
fn fixpoints_satisfy_their_defining_equation() {
    for seed in 0..80 {
        let frame = random_frame(seed, 2 + (seed as usize % 4));
        for (var, make) in [
            ("X", MuFormula::mu as fn(&str, MuFormula) -> MuFormula),
            ("X", MuFormula::nu),
        ] {
            let body = random_mu_formula(seed.wrapping_add(7), 3, 1);
            let formula = make(var, MuFormula::or(body.clone(), MuFormula::var(var)));
            let value = mc_eval(&formula, &frame).unwrap();
            let env: BTreeMap<String, StateSet> = [(var.to_string(), value)].into();
            let reapplied =
                mc_eval_env(&MuFormula::or(body, MuFormula::var(var)), &frame, &env).unwrap();
            assert_eq!(reapplied, value, "seed {seed}");
        }
    }
}

#[test]
fn mu_is_contained_in_nu() {
    for seed in 0..100 {
        let frame = random_frame(seed, 2 + (seed as usize % 4));
        let body = random_mu_formula(seed.wrapping_add(13), 3, 1);
        let mu_set = mc_eval(
            &MuFormula::mu("Z", MuFormula::or(body.clone(), MuFormula::var("Z"))),
            &frame,
        )
        .unwrap();
        let nu_set = mc_eval(
            &MuFormula::nu("Z", MuFormula::or(body, MuFormula::var("Z"))),
            &frame,
        )
        .unwrap();
        assert!(mu_set.is_subset_of(nu_set), "seed {seed}");
    }
}

#[test]
fn positive_bodies_are_monotone_in_the_variable() {
    for seed in 0..100 {
        let states = 2 + (seed as usize % 4);
        let frame = random_frame(seed, states);
        let body = MuFormula::or(random_mu_formula(seed.wrapping_add(3), 3, 0), MuFormula::var("Z"));
        for small_mask in 0..(1u64 << states) {
            let large_mask = small_mask | (seed % (1 << states));
            let small_env: BTreeMap<String, StateSet> =
                [("Z".to_string(), StateSet(small_mask))].into();
            let large_env: BTreeMap<String, StateSet> =
                [("Z".to_string(), StateSet(large_mask))].into();
            let small = mc_eval_env(&body, &frame, &small_env).unwrap();
            let large = mc_eval_env(&body, &frame, &large_env).unwrap();
            assert!(small.is_subset_of(large), "seed {seed}");
        }
    }
}

// ---------------------------------------------------------------------------
// provability logic
// ---------------------------------------------------------------------------

#[test]
fn loeb_schema_valid_for_sampled_instances() {
    let frames: Vec<GlFrame> = (1..=3)
        .flat_map(|n| enumerate_gl_frames(n).unwrap())
        .collect();
    for seed in 0..50 {
        let inner = random_modal_formula(seed, 2);
        let instance = ModalFormula::loeb(inner);
        for frame in &frames {
            assert!(
                valid_in_frame(&instance, frame).unwrap(),
                "seed {seed} frame {frame:?}"
            );
        }
    }
}

#[test]
fn transitivity_axiom_valid_on_gl_frames() {
    let four = ModalFormula::four_axiom(ModalFormula::prop("p"));
    for n in 1..=4 {
        for frame in enumerate_gl_frames(n).unwrap() {
            assert!(valid_in_frame(&four, &frame).unwrap());
        }
    }
}

#[test]
fn loeb_failures_are_cyclic_or_intransitive() {
    // exhaustive over every raw relation on up to 3 states
    let loeb = ModalFormula::loeb(ModalFormula::prop("p"));
    for n in 1..=3usize {
        for mask in 0..(1u64 << (n * n)) {
            let relation: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|(a, b)| mask & (1 << (a * n + b)) != 0)
                .collect();
            let frame = GlFrame::raw(n, relation).unwrap();
            if !valid_in_frame(&loeb, &frame).unwrap() {
                assert!(
                    !frame.is_transitive() || frame.has_cycle(),
                    "frame {frame:?} fails the schema while transitive and acyclic"
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// design calculus
// ---------------------------------------------------------------------------

#[test]
fn risk_is_monotone_on_ten_thousand_sampled_pairs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let policy = random_rule_policy(9, 8);
    let universe = policy.universe();
    let model = random_risk_model(11, universe);
    for _ in 0..10_000 {
        let y_mask: usize = rng.gen_range(0..256);
        let x_mask = y_mask & rng.gen_range(0..256);
        let x = universe.element_from_mask(x_mask).unwrap();
        let y = universe.element_from_mask(y_mask).unwrap();
        assert!(risk(&x, &model).unwrap() <= risk(&y, &model).unwrap() + 1e-12);
    }
}

#[test]
fn greedy_results_are_feasible_and_post_fixed() {
    for seed in 0..50 {
        let instance = greedy_instance(seed);
        let outcome = greedy_min_transparency(
            &instance.policy,
            &instance.accountability,
            instance.floor,
            &instance.risk,
            1000,
        )
        .unwrap();
        assert_eq!(outcome.status, GreedyStatus::Converged, "seed {seed}");
        assert!(
            instance.accountability.value(&outcome.state).unwrap() >= instance.floor,
            "seed {seed}"
        );
        let applied = apply(&instance.policy, &outcome.state).unwrap();
        assert!(applied.is_subset_of(&outcome.state), "seed {seed}");
    }
}

#[test]
fn garbled_policies_stay_pointwise_below() {
    for seed in 0..50 {
        let policy = random_rule_policy(seed, 3 + (seed as usize % 6));
        let coarse = garbled_copy(seed.wrapping_add(77), &policy);
        let n = policy.universe().len();
        for mask in 0..(1usize << n) {
            let x = policy.universe().element_from_mask(mask).unwrap();
            assert!(
                apply(&coarse, &x).unwrap().is_subset_of(&apply(&policy, &x).unwrap()),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn equilibrium_scan_agrees_with_independent_implementation() {
    use aperture_core::design::equilibrium_enumerate;
    use aperture_core::lattice::LatticeElement;
    use aperture_core::suites::random_best_response;
    use std::collections::BTreeSet;

    // second implementation: name-set representation with its own
    // rule-firing loop, no shared lattice machinery
    fn slow_equilibria(
        policy: &aperture_core::lattice::OperatorSpec,
        table: &aperture_core::design::BestResponseTable,
    ) -> BTreeSet<LatticeElement> {
        let universe = policy.universe();
        let names: Vec<&str> = universe.items().iter().map(String::as_str).collect();
        let rules = policy.rules().unwrap();
        let mut found = BTreeSet::new();
        for mask in 0..(1usize << names.len()) {
            let x: BTreeSet<&str> = names
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, n)| *n)
                .collect();
            // fire every rule whose premise names are all present
            let mut image: BTreeSet<&str> = x.clone();
            for rule in rules {
                let premise: Vec<&str> = universe.names_of(&rule.premise);
                if premise.iter().all(|p| x.contains(p)) {
                    image.extend(universe.names_of(&rule.conclusions));
                }
            }
            let image_element = universe.element(image.iter().copied()).unwrap();
            let x_element = universe.element(x.iter().copied()).unwrap();
            if table
                .responses(&image_element)
                .is_some_and(|r| r.contains(&x_element))
            {
                found.insert(x_element);
            }
        }
        found
    }

    for seed in 0..25 {
        let policy = random_rule_policy(seed, 6);
        let table = random_best_response(seed.wrapping_add(50), policy.universe());
        let fast = equilibrium_enumerate(&policy, &table).unwrap();
        let slow = slow_equilibria(&policy, &table);
        assert_eq!(fast, slow, "seed {seed}");
    }
}

#[test]
fn cantor_diagonal_always_escapes_the_image() {
    // every assignment of self-maps to points, exhaustively, at two and
    // three points
    for n in [2usize, 3] {
        let maps: Vec<Vec<usize>> = {
            let count = n.pow(n as u32);
            (0..count)
                .map(|code| {
                    let mut rest = code;
                    (0..n)
                        .map(|_| {
                            let v = rest % n;
                            rest /= n;
                            v
                        })
                        .collect()
                })
                .collect()
        };
        let assignments = maps.len().pow(n as u32);
        for code in 0..assignments {
            let mut rest = code;
            let e: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let row = maps[rest % maps.len()].clone();
                    rest /= maps.len();
                    row
                })
                .collect();
            let report = lawvere_check(n, &e).unwrap();
            assert!(!report.surjective);
            assert!(report.witness_outside_image, "n {n} e {e:?}");
        }
    }
}
