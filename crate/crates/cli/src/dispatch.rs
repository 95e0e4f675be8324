//! Turns a validated scenario into a report by dispatching to the owning
//! module and recording one check per operation.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use aperture_core::design::{
    breach_bound, equilibrium_enumerate, garble_compare, greedy_min_transparency,
    iterative_risk_convergence, kkt_report, lawvere_check, least_risk_fixedpoint_check,
    mixture_gaming_eval, process_outcome_compare, risk, stratify_compare, AccountabilityModel,
    BestResponseTable, GainModel, GreedyStatus, RiskModel,
};
use aperture_core::gaming::{verify_gaming, ActionSpec, AuditPredicate, GamingOutcome};
use aperture_core::gl::{
    enumerate_gl_frames, lob_hazard_replay, parse_modal, valid_in_frame, GlFrame, ModalFormula,
};
use aperture_core::lattice::{
    check_monotone_with, enumerate_fixpoints, gfp, lfp, FixpointStatus, LatticeElement,
    MonotoneMode, OperatorSpec, Rule, Universe,
};
use aperture_core::mucalc::{
    commute_experiment, mc_eval, naive_eval, parse_mu, safety_preservation_check, KripkeFrame,
    StateSet, NAIVE_STATE_BOUND,
};
use aperture_core::truth::{
    default_jump_fuel, kripke_lfp_with, lp_model, parse_sentence, total_classical_search,
    Grounding, SentenceSystem,
};

use crate::report::{Check, CheckStatus, Report};
use crate::scenario::{
    FormulaSpec, GamingSection, GlSection, LatticeSection, MucalcSection, OptimizeOp,
    OptimizeSection, RuleSpec, ScenarioFile, TruthSection,
};

/// Command-line overrides applied on top of scenario fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub fuel: Option<usize>,
    pub seed: Option<u64>,
    pub bound: Option<usize>,
    pub raw_relation: bool,
}

pub struct Settings {
    pub seed: u64,
    pub fuel: usize,
    pub bound: Option<usize>,
    pub raw_relation: bool,
}

impl Settings {
    fn resolve(scenario: &ScenarioFile, overrides: &Overrides) -> Self {
        Settings {
            seed: overrides.seed.or(scenario.seed).unwrap_or(0),
            fuel: overrides.fuel.or(scenario.fuel).unwrap_or(10_000),
            bound: overrides.bound.or(scenario.bound),
            raw_relation: overrides.raw_relation,
        }
    }
}

/// Runs a single scenario file. Input errors come back as `Err` (exit 2);
/// failing checks are recorded in the report (exit 1).
pub fn run_scenario(path: &Path, overrides: &Overrides) -> Result<Report> {
    let scenario = ScenarioFile::load(path)?;
    let id = scenario.scenario_id(path);
    let settings = Settings::resolve(&scenario, overrides);
    let checks = match scenario.kind.as_str() {
        "lattice" => run_lattice(scenario.lattice.as_ref().unwrap(), &settings)?,
        "truth" => run_truth(scenario.truth.as_ref().unwrap(), &settings)?,
        "mucalc" => run_mucalc(scenario.mucalc.as_ref().unwrap(), &settings)?,
        "gl" => run_gl(scenario.gl.as_ref().unwrap(), &settings)?,
        "gaming" => run_gaming(scenario.gaming.as_ref().unwrap())?,
        "optimize" => run_optimize(scenario.optimize.as_ref().unwrap(), &settings)?,
        "suite" => bail!("suite scenarios must be run with the `suite` subcommand"),
        other => bail!("unknown scenario kind `{other}`"),
    };
    Ok(Report::new(id, scenario.kind, settings.seed, checks))
}

fn names_json(universe: &Universe, element: &LatticeElement) -> Value {
    Value::Array(
        universe
            .names_of(element)
            .into_iter()
            .map(|n| Value::String(n.to_string()))
            .collect(),
    )
}

fn build_operator(
    universe: &Universe,
    rules: &[RuleSpec],
    inflationary: bool,
) -> Result<OperatorSpec> {
    let built: Vec<Rule> = rules
        .iter()
        .map(|spec| {
            Ok(Rule {
                premise: universe.element(spec.when.iter().map(String::as_str))?,
                conclusions: universe.element(spec.then.iter().map(String::as_str))?,
            })
        })
        .collect::<Result<_, aperture_core::lattice::LatticeError>>()?;
    Ok(OperatorSpec::from_rules(universe.clone(), built, inflationary)?)
}

fn check_capacity(name: &str, size: usize, bound: Option<usize>) -> Option<Check> {
    match bound {
        Some(bound) if size > bound => Some(Check::new(
            name,
            CheckStatus::Capacity,
            json!({ "size": size, "bound": bound }),
        )),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// lattice
// ---------------------------------------------------------------------------

fn run_lattice(section: &LatticeSection, settings: &Settings) -> Result<Vec<Check>> {
    let universe = Universe::new(section.universe.clone())?;
    let op = build_operator(&universe, &section.rules, section.inflationary)?;
    let run: Vec<String> = section.run.clone().unwrap_or_else(|| {
        ["lfp", "gfp", "monotone", "fixpoints"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    });
    let expect = &section.expect;
    let mut checks = Vec::new();

    for step in &run {
        match step.as_str() {
            "lfp" => {
                let result = lfp(&op, settings.fuel)?;
                let expected_status = expect.lfp_status.as_deref().unwrap_or("converged");
                let status_ok = match result.status {
                    FixpointStatus::Converged => expected_status == "converged",
                    FixpointStatus::FuelExhausted => expected_status == "fuel_exhausted",
                };
                let value_ok = match &expect.lfp {
                    Some(names) => result.value == universe.element(names.iter().map(String::as_str))?,
                    None => true,
                };
                let steps_ok = expect.lfp_steps.is_none_or(|s| s == result.steps);
                checks.push(Check::verdict(
                    "lfp",
                    status_ok && value_ok && steps_ok,
                    json!({
                        "value": names_json(&universe, &result.value),
                        "status": result.status,
                        "steps": result.steps,
                        "chain_length": result.trace.len(),
                    }),
                ));
            }
            "gfp" => {
                let result = gfp(&op, settings.fuel)?;
                let value_ok = match &expect.gfp {
                    Some(names) => result.value == universe.element(names.iter().map(String::as_str))?,
                    None => true,
                };
                checks.push(Check::verdict(
                    "gfp",
                    result.converged() && value_ok,
                    json!({
                        "value": names_json(&universe, &result.value),
                        "status": result.status,
                        "steps": result.steps,
                    }),
                ));
            }
            "monotone" => {
                let mode = if universe.len() <= 16 {
                    MonotoneMode::Exhaustive
                } else {
                    MonotoneMode::Sampled { seed: settings.seed, pairs: 10_000 }
                };
                let report = check_monotone_with(&op, mode)?;
                let expected = expect.monotone.unwrap_or(true);
                checks.push(Check::verdict(
                    "monotone",
                    report.is_monotone() == expected,
                    json!({
                        "mode": report.mode,
                        "violations": report.violations.len(),
                    }),
                ));
            }
            "fixpoints" => {
                if let Some(check) =
                    check_capacity("fixpoints", universe.len(), settings.bound.or(Some(16)))
                {
                    checks.push(check);
                    continue;
                }
                let fixed = enumerate_fixpoints(&op)?;
                let count_ok = expect.fixpoint_count.is_none_or(|c| c == fixed.len());
                // extremality against the iterated fixed points
                let lfp_result = lfp(&op, settings.fuel)?;
                let gfp_result = gfp(&op, settings.fuel)?;
                let extremal = (!lfp_result.converged()
                    || fixed.iter().all(|f| lfp_result.value.is_subset_of(f)))
                    && (!gfp_result.converged()
                        || fixed.iter().all(|f| f.is_subset_of(&gfp_result.value)));
                checks.push(Check::verdict(
                    "fixpoints",
                    count_ok && extremal,
                    json!({
                        "count": fixed.len(),
                        "extremal": extremal,
                    }),
                ));
            }
            other => bail!("unknown lattice check `{other}`"),
        }
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// truth
// ---------------------------------------------------------------------------

fn grounding_word(grounding: Grounding) -> &'static str {
    match grounding {
        Grounding::GroundedTrue => "grounded_true",
        Grounding::GroundedFalse => "grounded_false",
        Grounding::Ungrounded => "ungrounded",
    }
}

fn run_truth(section: &TruthSection, _settings: &Settings) -> Result<Vec<Check>> {
    let definitions = section
        .sentences
        .iter()
        .map(|(name, text)| {
            let formula = parse_sentence(text)
                .with_context(|| format!("sentence `{name}`"))?;
            Ok((name.clone(), formula))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    let system = SentenceSystem::new(definitions, section.atoms.clone())?;
    let run: Vec<String> = section
        .run
        .clone()
        .unwrap_or_else(|| ["kripke", "classical", "lp"].iter().map(|s| s.to_string()).collect());
    let expect = &section.expect;
    let mut checks = Vec::new();

    for step in &run {
        match step.as_str() {
            "kripke" => {
                let (fixed, trace) =
                    kripke_lfp_with(&system, default_jump_fuel(&system), section.trans_reading)?;
                let classes: BTreeMap<String, Grounding> = fixed
                    .values()
                    .iter()
                    .map(|(n, v)| {
                        let g = match v {
                            aperture_core::truth::ThreeVal::TrueV => Grounding::GroundedTrue,
                            aperture_core::truth::ThreeVal::FalseV => Grounding::GroundedFalse,
                            aperture_core::truth::ThreeVal::NoneV => Grounding::Ungrounded,
                        };
                        (n.clone(), g)
                    })
                    .collect();
                let mut ok = true;
                for (name, expected) in &expect.classify {
                    let actual = classes
                        .get(name)
                        .map(|g| grounding_word(*g))
                        .ok_or_else(|| anyhow!("expectation names unknown sentence `{name}`"))?;
                    if actual != expected {
                        ok = false;
                    }
                }
                let class_json: BTreeMap<&String, &str> =
                    classes.iter().map(|(n, g)| (n, grounding_word(*g))).collect();
                checks.push(Check::verdict(
                    "kripke_lfp",
                    ok,
                    json!({
                        "stages": trace.len(),
                        "classification": class_json,
                    }),
                ));
            }
            "classical" => {
                let witness = total_classical_search(&system)?;
                let ok = match expect.classical.as_deref() {
                    Some("none") => witness.is_none(),
                    Some("witness") => witness.is_some(),
                    Some(other) => bail!("classical expectation must be `none` or `witness`, got `{other}`"),
                    None => true,
                } && expect
                    .witness
                    .iter()
                    .all(|(name, value)| {
                        witness
                            .as_ref()
                            .and_then(|w| w.get(name))
                            .is_some_and(|v| v == value)
                    });
                checks.push(Check::verdict(
                    "classical_search",
                    ok,
                    json!({ "witness": witness }),
                ));
            }
            "lp" => {
                let (valuation, witness) = lp_model(&system)?;
                let gluts = valuation.gluts();
                let mut ok = true;
                if let Some(expected_gluts) = &expect.lp_gluts {
                    let expected: std::collections::BTreeSet<String> =
                        expected_gluts.iter().cloned().collect();
                    ok &= gluts == expected;
                }
                if let Some(expected_witness) = &expect.lp_witness {
                    ok &= witness.as_deref() == Some(expected_witness.as_str());
                }
                for name in &expect.lp_undesignated_true {
                    ok &= !valuation.designated_true.contains(name);
                }
                checks.push(Check::verdict(
                    "lp_model",
                    ok,
                    json!({
                        "designated_true": valuation.designated_true,
                        "designated_false": valuation.designated_false,
                        "gluts": gluts,
                        "non_explosion_witness": witness,
                    }),
                ));
            }
            other => bail!("unknown truth check `{other}`"),
        }
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// mucalc
// ---------------------------------------------------------------------------

fn build_frame(section: &MucalcSection) -> Result<KripkeFrame> {
    let mut frame = KripkeFrame::new(section.states.clone())?;
    for (from, to) in &section.edges {
        frame.add_edge(from, to)?;
    }
    for (prop, states) in &section.labels {
        frame.label(prop, states.iter().map(String::as_str))?;
    }
    Ok(frame)
}

fn states_json(frame: &KripkeFrame, set: StateSet) -> Value {
    Value::Array(
        set.iter(frame.state_count())
            .map(|i| Value::String(frame.states()[i].clone()))
            .collect(),
    )
}

fn run_mucalc(section: &MucalcSection, _settings: &Settings) -> Result<Vec<Check>> {
    let frame = build_frame(section)?;
    let mut checks = Vec::new();

    for (index, FormulaSpec { text, expect }) in section.formulas.iter().enumerate() {
        let name = format!("formula_{index}");
        let formula = parse_mu(text).with_context(|| format!("formula `{text}`"))?;
        let states = mc_eval(&formula, &frame)?;
        let mut ok = match expect {
            Some(expected) => {
                let mut expected_set = StateSet::empty();
                for s in expected {
                    expected_set.insert(frame.state_index(s)?);
                }
                expected_set == states
            }
            None => true,
        };
        let mut data = json!({
            "formula": formula.to_string(),
            "states": states_json(&frame, states),
        });
        if section.oracle && frame.state_count() <= NAIVE_STATE_BOUND {
            let oracle = naive_eval(&formula, &frame)?;
            ok &= oracle == states;
            data["oracle_agrees"] = Value::Bool(oracle == states);
        }
        checks.push(Check::verdict(name, ok, data));
    }

    if let Some(spec) = &section.safety {
        let report = safety_preservation_check(&frame, &spec.invariant, &spec.event)?;
        let hypothesis_ok = spec
            .expect_hypothesis
            .is_none_or(|e| e == report.hypothesis_holds);
        let conclusion_ok = spec
            .expect_conclusion
            .is_none_or(|e| e == report.conclusion_holds);
        checks.push(Check::verdict(
            "safety_preservation",
            hypothesis_ok && conclusion_ok && report.failures_consistent,
            json!({
                "hypothesis_holds": report.hypothesis_holds,
                "conclusion_holds": report.conclusion_holds,
                "failures_consistent": report.failures_consistent,
                "always_invariant": states_json(&frame, report.always_invariant),
                "eventually_event": states_json(&frame, report.eventually_event),
                "witness_paths": report
                    .witness_paths
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|s| frame.states()[*s].clone())
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>(),
                "counterexamples": report
                    .counterexamples
                    .iter()
                    .map(|s| frame.states()[*s].clone())
                    .collect::<Vec<_>>(),
            }),
        ));
    }

    if let Some(spec) = &section.commute {
        let report = commute_experiment(&frame, &spec.body)?;
        // exploratory: the report never fails the scenario
        checks.push(Check::pass(
            "commute_experiment",
            json!({
                "nu_mu": states_json(&frame, report.nu_mu),
                "mu_nu": states_json(&frame, report.mu_nu),
                "equal": report.equal,
            }),
        ));
    }

    Ok(checks)
}

// ---------------------------------------------------------------------------
// gl
// ---------------------------------------------------------------------------

fn named_schema(text: &str) -> Result<ModalFormula> {
    Ok(match text {
        "lob" => ModalFormula::loeb(ModalFormula::prop("p")),
        "k" => ModalFormula::k_axiom(ModalFormula::prop("p"), ModalFormula::prop("q")),
        "four" => ModalFormula::four_axiom(ModalFormula::prop("p")),
        other => parse_modal(other)?,
    })
}

/// Independent count of transitive irreflexive relations on n states by
/// scanning the full 2^(n*n) relation space with a matrix-style check.
fn brute_force_gl_count(n: usize) -> usize {
    let mut count = 0usize;
    for mask in 0..(1u64 << (n * n)) {
        let rel = |a: usize, b: usize| mask & (1 << (a * n + b)) != 0;
        let irreflexive = (0..n).all(|s| !rel(s, s));
        let transitive = (0..n)
            .all(|a| (0..n).all(|b| (0..n).all(|c| !(rel(a, b) && rel(b, c)) || rel(a, c))));
        if irreflexive && transitive {
            count += 1;
        }
    }
    count
}

fn run_gl(section: &GlSection, settings: &Settings) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    for &n in &section.enumerate {
        let frames = enumerate_gl_frames(n)?;
        let oracle = brute_force_gl_count(n);
        checks.push(Check::verdict(
            format!("enumerate_{n}"),
            frames.len() == oracle,
            json!({ "frames": frames.len(), "oracle": oracle }),
        ));
    }

    for (index, spec) in section.schema_checks.iter().enumerate() {
        let formula = named_schema(&spec.formula)?;
        let mut all_valid = true;
        let mut frames_checked = 0usize;
        for n in 1..=spec.states {
            for frame in enumerate_gl_frames(n)? {
                frames_checked += 1;
                if !valid_in_frame(&formula, &frame)? {
                    all_valid = false;
                }
            }
        }
        checks.push(Check::verdict(
            format!("validity_{index}_{}", spec.formula),
            all_valid == spec.expect_valid,
            json!({
                "formula": formula.to_string(),
                "frames_checked": frames_checked,
                "valid_on_all": all_valid,
            }),
        ));
    }

    for (index, spec) in section.raw_frames.iter().enumerate() {
        if !settings.raw_relation {
            bail!("scenario uses raw_frames; pass --raw-relation to allow non-GL frames");
        }
        let frame = GlFrame::raw(spec.states, spec.edges.clone())?;
        let formula = named_schema(&spec.formula)?;
        let valid = valid_in_frame(&formula, &frame)?;
        checks.push(Check::verdict(
            format!("raw_frame_{index}"),
            valid == spec.expect_valid,
            json!({
                "valid": valid,
                "transitive": frame.is_transitive(),
                "irreflexive": frame.is_irreflexive(),
                "cyclic": frame.has_cycle(),
            }),
        ));
    }

    if let Some(prop) = &section.replay {
        let trace = lob_hazard_replay(prop);
        checks.push(Check::pass(
            "lob_replay",
            json!({
                "lines": trace
                    .steps
                    .iter()
                    .map(|s| format!("{:?}", s.rule))
                    .collect::<Vec<_>>(),
                "rendered": trace.to_string(),
            }),
        ));
    }

    Ok(checks)
}

// ---------------------------------------------------------------------------
// gaming
// ---------------------------------------------------------------------------

fn outcome_word(outcome: GamingOutcome) -> &'static str {
    match outcome {
        GamingOutcome::PassAndHarm => "pass_and_harm",
        GamingOutcome::AuditCompleteNoStableExploit => "audit_complete_no_stable_exploit",
        GamingOutcome::BadOutputsRejected => "bad_outputs_rejected",
        GamingOutcome::Inconclusive => "inconclusive",
    }
}

fn run_gaming(section: &GamingSection) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    if section.bundled {
        for (audit, bad, good) in aperture_core::gaming::bundled_suite() {
            let report = verify_gaming(&audit, &bad, &good)?;
            let expected = if audit.sees_harm() {
                GamingOutcome::AuditCompleteNoStableExploit
            } else {
                GamingOutcome::PassAndHarm
            };
            checks.push(Check::verdict(
                format!("gaming_{}", audit.name),
                report.outcome == expected,
                json!({
                    "audit_pass": report.audit_pass,
                    "harm": report.harm,
                    "outcome": outcome_word(report.outcome),
                    "self_reference_consistent": report.self_reference_consistent,
                }),
            ));
        }
    }

    for spec in &section.audits {
        let audit = AuditPredicate {
            name: spec.name.clone(),
            checks: spec.checks.clone(),
            observability: spec.observability,
            budget: spec.budget,
        };
        let report = verify_gaming(
            &audit,
            &ActionSpec::bad(spec.bad_outputs.clone()),
            &ActionSpec::good(spec.good_outputs.clone()),
        )?;
        let ok = match &spec.expect {
            Some(expected) => outcome_word(report.outcome) == expected,
            None => report.outcome == GamingOutcome::PassAndHarm,
        };
        checks.push(Check::verdict(
            format!("gaming_{}", spec.name),
            ok,
            json!({
                "audit_pass": report.audit_pass,
                "harm": report.harm,
                "outcome": outcome_word(report.outcome),
                "outputs": report.trace.outputs,
            }),
        ));
    }

    Ok(checks)
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

fn run_optimize(section: &OptimizeSection, settings: &Settings) -> Result<Vec<Check>> {
    let universe = Universe::new(section.universe.clone())?;
    let policy = build_operator(&universe, &section.rules, section.inflationary)?;

    fn table(map: &BTreeMap<String, f64>) -> Vec<(&str, f64)> {
        map.iter().map(|(k, v)| (k.as_str(), *v)).collect()
    }
    let interactions: Vec<(&str, &str, f64)> = section
        .risk
        .interactions
        .iter()
        .map(|spec| (spec.pair.0.as_str(), spec.pair.1.as_str(), spec.weight))
        .collect();
    let model = RiskModel::new(
        &universe,
        (
            section.risk.weights.alpha,
            section.risk.weights.beta,
            section.risk.weights.gamma,
            section.risk.weights.delta,
        ),
        &table(&section.risk.paradox),
        &table(&section.risk.leakage),
        &table(&section.risk.fairness),
        &table(&section.risk.gaming),
        &interactions,
    )?;
    let accountability =
        AccountabilityModel::new(&universe, &table(&section.accountability.gains), section.accountability.cap)?;
    let gain = GainModel::new(&universe, &table(&section.gain.utilities), section.gain.lambda)?;

    let mut checks = Vec::new();
    for (index, op) in section.ops.iter().enumerate() {
        match op {
            OptimizeOp::LfpRisk { expect_minimal } => {
                let report = least_risk_fixedpoint_check(&policy, &model)?;
                let ok = report.subset_least
                    && report.risk_minimal
                    && expect_minimal.is_none_or(|e| e == report.risk_minimal);
                checks.push(Check::verdict(
                    format!("op_{index}_lfp_risk"),
                    ok,
                    json!({
                        "lfp": names_json(&universe, &report.lfp),
                        "lfp_risk": report.lfp_risk,
                        "fixed_points": report.fixed_points.len(),
                        "subset_least": report.subset_least,
                        "risk_minimal": report.risk_minimal,
                    }),
                ));
            }
            OptimizeOp::Greedy { a0, expect_state } => {
                let outcome =
                    greedy_min_transparency(&policy, &accountability, *a0, &model, settings.fuel)?;
                let status = match outcome.status {
                    GreedyStatus::Converged => CheckStatus::Pass,
                    GreedyStatus::Infeasible => CheckStatus::Infeasible,
                    GreedyStatus::FuelExhausted => CheckStatus::Fail,
                };
                let state_ok = match expect_state {
                    Some(names) => {
                        outcome.state == universe.element(names.iter().map(String::as_str))?
                    }
                    None => true,
                };
                let status = if status == CheckStatus::Pass && !state_ok {
                    CheckStatus::Fail
                } else {
                    status
                };
                checks.push(Check::new(
                    format!("op_{index}_greedy"),
                    status,
                    json!({
                        "state": names_json(&universe, &outcome.state),
                        "status": outcome.status,
                        "accountability": accountability.value(&outcome.state)?,
                        "risk": risk(&outcome.state, &model)?,
                        "rounds": outcome.trace.len(),
                    }),
                ));
            }
            OptimizeOp::Kkt { a0, state, respect_policy } => {
                let x_star = match state {
                    Some(names) => universe.element(names.iter().map(String::as_str))?,
                    None => {
                        let outcome = greedy_min_transparency(
                            &policy,
                            &accountability,
                            *a0,
                            &model,
                            settings.fuel,
                        )?;
                        if outcome.status != GreedyStatus::Converged {
                            bail!("kkt op without explicit state requires a feasible greedy run");
                        }
                        outcome.state
                    }
                };
                let policy_ref = if *respect_policy { Some(&policy) } else { None };
                let report = kkt_report(&x_star, &accountability, *a0, &model, &gain, policy_ref)?;
                checks.push(Check::verdict(
                    format!("op_{index}_kkt"),
                    report.stationary && report.slackness_product.abs() <= 1e-9,
                    json!({
                        "eta": report.eta,
                        "slack": report.slack,
                        "slackness_product": report.slackness_product,
                        "binding": report.binding,
                        "stationary": report.stationary,
                    }),
                ));
            }
            OptimizeOp::Garble { coarse_rules, a0, expect_hypothesis } => {
                let coarse = build_operator(&universe, coarse_rules, section.inflationary)?;
                let report = garble_compare(&policy, &coarse, &model, &accountability, *a0)?;
                let hypothesis_ok =
                    expect_hypothesis.map_or(report.hypothesis_ok, |e| e == report.hypothesis_ok);
                let ordered = !report.hypothesis_ok
                    || (report.coarse_below_fine && report.risk_ordered);
                checks.push(Check::verdict(
                    format!("op_{index}_garble"),
                    hypothesis_ok && ordered,
                    json!({
                        "hypothesis_ok": report.hypothesis_ok,
                        "fine_risk": report.fine_risk,
                        "coarse_risk": report.coarse_risk,
                        "risk_ordered": report.risk_ordered,
                        "feasibility": report.feasibility,
                    }),
                ));
            }
            OptimizeOp::ProcessOutcome { outcome_rules } => {
                let outcome_op = build_operator(&universe, outcome_rules, section.inflationary)?;
                let report = process_outcome_compare(&policy, &outcome_op, &model)?;
                checks.push(Check::verdict(
                    format!("op_{index}_process_outcome"),
                    report.hypothesis_ok && report.risk_ordered,
                    json!({
                        "hypothesis_ok": report.hypothesis_ok,
                        "process_risk": report.fine_risk,
                        "outcome_risk": report.coarse_risk,
                    }),
                ));
            }
            OptimizeOp::Equilibrium { response, expect_count } => {
                let table = match response.as_str() {
                    "identity" => BestResponseTable::identity(&universe)?,
                    "constant_bottom" => BestResponseTable::constant(&universe, universe.bottom())?,
                    other => bail!("unknown best-response table `{other}`"),
                };
                let equilibria = equilibrium_enumerate(&policy, &table)?;
                let ok = expect_count.is_none_or(|c| c == equilibria.len());
                checks.push(Check::verdict(
                    format!("op_{index}_equilibrium"),
                    ok,
                    json!({
                        "count": equilibria.len(),
                        "states": equilibria
                            .iter()
                            .map(|e| names_json(&universe, e))
                            .collect::<Vec<_>>(),
                    }),
                ));
            }
            OptimizeOp::Lawvere { n, e } => {
                let report = lawvere_check(*n, e)?;
                let ok = if report.surjective {
                    report.all_endomaps_have_fixed_points == Some(true)
                } else {
                    report.witness_outside_image
                };
                checks.push(Check::verdict(
                    format!("op_{index}_lawvere"),
                    ok,
                    json!({
                        "surjective": report.surjective,
                        "image_size": report.image_size,
                        "diagonal_witness": report.diagonal_witness,
                        "fixed_point_free": report.fixed_point_free,
                    }),
                ));
            }
            OptimizeOp::Breach { coverage, expect } => {
                let bound = breach_bound(*coverage)?;
                let ok = expect.is_none_or(|e| (bound - e).abs() <= 1e-12);
                checks.push(Check::verdict(
                    format!("op_{index}_breach"),
                    ok,
                    json!({ "coverage": coverage, "bound": bound }),
                ));
            }
            OptimizeOp::Convergence { epsilon, expect } => {
                let n = iterative_risk_convergence(&policy, &model, *epsilon)?;
                let ok = expect.is_none_or(|e| e == n);
                checks.push(Check::verdict(
                    format!("op_{index}_convergence"),
                    ok,
                    json!({ "epsilon": epsilon, "steps": n }),
                ));
            }
            OptimizeOp::Stratify { first, second, expect_gap } => {
                let first = universe.element(first.iter().map(String::as_str))?;
                let second = universe.element(second.iter().map(String::as_str))?;
                let report = stratify_compare(&first, &second, &model, &universe)?;
                let ok = expect_gap.is_none_or(|e| (report.superadditivity_gap - e).abs() <= 1e-9);
                checks.push(Check::verdict(
                    format!("op_{index}_stratify"),
                    ok,
                    json!({
                        "combined_risk": report.combined_risk,
                        "gap": report.superadditivity_gap,
                        "superadditive": report.superadditive,
                    }),
                ));
            }
            OptimizeOp::Mixture { levels, p, expect_gap } => {
                let report = mixture_gaming_eval(levels, *p)?;
                let gap_ok = expect_gap.is_none_or(|e| (report.jensen_gap - e).abs() <= 1e-9);
                let sign_ok = !report.scores_convex || report.jensen_gap >= -1e-9;
                checks.push(Check::verdict(
                    format!("op_{index}_mixture"),
                    gap_ok && sign_ok,
                    json!({
                        "mixture_expected": report.mixture_expected,
                        "at_expected_precision": report.at_expected_precision,
                        "jensen_gap": report.jensen_gap,
                        "scores_convex": report.scores_convex,
                    }),
                ));
            }
        }
    }
    Ok(checks)
}
