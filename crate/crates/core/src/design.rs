//! The disclosure design calculus.
//!
//! Risk is a weighted sum of four monotone per-item components (paradox,
//! leakage, fairness, gaming) plus optional pairwise gaming interactions;
//! accountability is a capped sum of per-item gains. On top of these the
//! module provides the executable checks for the design theorems: least
//! fixed points minimize risk among all fixed points, coarser policies reach
//! cheaper equilibria, the greedy loop finds a minimal accountable
//! disclosure state, and complementary slackness holds at its output.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    apply, enumerate_fixpoints, lfp, LatticeElement, LatticeError, OperatorSpec, Universe,
};

/// Universe bound for the enumeration-backed suites.
pub const ORACLE_BOUND: usize = 12;

/// Tolerance used by the complementary-slackness check.
pub const SLACKNESS_TOLERANCE: f64 = 1e-9;

/// A disclosure state is an element of the item lattice.
pub type DisclosureState = LatticeElement;

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("item `{0}` is not in the universe")]
    UnknownItem(String),
    #[error("score for item `{item}` must be a finite nonnegative number, got {value}")]
    InvalidScore { item: String, value: f64 },
    #[error("weight `{name}` must be a finite nonnegative number, got {value}")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("universe of {size} items exceeds the oracle bound of {bound}")]
    OracleBound { size: usize, bound: usize },
    #[error("least fixed point did not converge within fuel")]
    LfpNotConverged,
    #[error("best-response table is not total: state {0} is missing")]
    PartialBestResponse(String),
    #[error("coverage must lie in [0,1], got {0}")]
    CoverageOutOfRange(f64),
    #[error("item sets overlap on `{0}`")]
    OverlappingSets(String),
    #[error("mixture needs at least two precision levels")]
    TooFewLevels,
    #[error("mixture probability must lie in [0,1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("risk sequence decreased at step {0}; risk model is not monotone")]
    RiskSequenceDecreased(usize),
    #[error("lawvere check supports at most {bound} points, got {n}")]
    LawvereBound { n: usize, bound: usize },
    #[error("self-map table is malformed: {0}")]
    MalformedSelfMap(String),
}

fn check_score(item: &str, value: f64) -> Result<f64, DesignError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(DesignError::InvalidScore { item: item.to_string(), value })
    }
}

fn check_weight(name: &'static str, value: f64) -> Result<f64, DesignError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(DesignError::InvalidWeight { name, value })
    }
}

/// Weighted monotone risk functional over disclosure states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    paradox: Vec<f64>,
    leakage: Vec<f64>,
    fairness: Vec<f64>,
    gaming: Vec<f64>,
    /// Unordered item pairs whose joint disclosure adds to the gaming term.
    interactions: Vec<(usize, usize, f64)>,
}

/// Named per-item scores for one risk component; items not mentioned score 0.
pub type ScoreTable<'a> = &'a [(&'a str, f64)];

impl RiskModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        universe: &Universe,
        weights: (f64, f64, f64, f64),
        paradox: ScoreTable,
        leakage: ScoreTable,
        fairness: ScoreTable,
        gaming: ScoreTable,
        interactions: &[(&str, &str, f64)],
    ) -> Result<Self, DesignError> {
        let build = |table: ScoreTable| -> Result<Vec<f64>, DesignError> {
            let mut scores = vec![0.0; universe.len()];
            for (name, value) in table {
                let idx = universe
                    .index_of(name)
                    .ok_or_else(|| DesignError::UnknownItem(name.to_string()))?;
                scores[idx] = check_score(name, *value)?;
            }
            Ok(scores)
        };
        let mut pair_list = Vec::new();
        for (a, b, w) in interactions {
            let ia = universe
                .index_of(a)
                .ok_or_else(|| DesignError::UnknownItem(a.to_string()))?;
            let ib = universe
                .index_of(b)
                .ok_or_else(|| DesignError::UnknownItem(b.to_string()))?;
            pair_list.push((ia.min(ib), ia.max(ib), check_score(a, *w)?));
        }
        Ok(RiskModel {
            alpha: check_weight("alpha", weights.0)?,
            beta: check_weight("beta", weights.1)?,
            gamma: check_weight("gamma", weights.2)?,
            delta: check_weight("delta", weights.3)?,
            paradox: build(paradox)?,
            leakage: build(leakage)?,
            fairness: build(fairness)?,
            gaming: build(gaming)?,
            interactions: pair_list,
        })
    }

    /// Uniform unit gaming scores with the given delta, other components zero.
    pub fn unit(universe: &Universe) -> Self {
        RiskModel {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 1.0,
            paradox: vec![0.0; universe.len()],
            leakage: vec![0.0; universe.len()],
            fairness: vec![0.0; universe.len()],
            gaming: vec![1.0; universe.len()],
            interactions: Vec::new(),
        }
    }

    fn item_count(&self) -> usize {
        self.paradox.len()
    }

    /// The decomposed risk of a disclosure state.
    pub fn risk(&self, x: &DisclosureState) -> Result<f64, DesignError> {
        if x.universe_size() != self.item_count() {
            return Err(LatticeError::UniverseMismatch {
                element: x.universe_size(),
                expected: self.item_count(),
            }
            .into());
        }
        let sum = |scores: &[f64]| -> f64 { x.indices().map(|i| scores[i]).sum() };
        let mut gaming = sum(&self.gaming);
        for &(a, b, w) in &self.interactions {
            if x.contains(a) && x.contains(b) {
                gaming += w;
            }
        }
        Ok(self.alpha * sum(&self.paradox)
            + self.beta * sum(&self.leakage)
            + self.gamma * sum(&self.fairness)
            + self.delta * gaming)
    }
}

/// Monotone accountability measure: capped sum of per-item gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountabilityModel {
    gains: Vec<f64>,
    pub cap: Option<f64>,
}

impl AccountabilityModel {
    pub fn new(
        universe: &Universe,
        gains: ScoreTable,
        cap: Option<f64>,
    ) -> Result<Self, DesignError> {
        let mut table = vec![0.0; universe.len()];
        for (name, value) in gains {
            let idx = universe
                .index_of(name)
                .ok_or_else(|| DesignError::UnknownItem(name.to_string()))?;
            table[idx] = check_score(name, *value)?;
        }
        if let Some(cap) = cap {
            check_weight("cap", cap)?;
        }
        Ok(AccountabilityModel { gains: table, cap })
    }

    pub fn uniform(universe: &Universe, gain: f64) -> Self {
        AccountabilityModel {
            gains: vec![gain; universe.len()],
            cap: None,
        }
    }

    pub fn value(&self, x: &DisclosureState) -> Result<f64, DesignError> {
        if x.universe_size() != self.gains.len() {
            return Err(LatticeError::UniverseMismatch {
                element: x.universe_size(),
                expected: self.gains.len(),
            }
            .into());
        }
        let total: f64 = x.indices().map(|i| self.gains[i]).sum();
        Ok(match self.cap {
            Some(cap) => total.min(cap),
            None => total,
        })
    }
}

/// Monotone gain (utility) measure with its tradeoff weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    utilities: Vec<f64>,
    pub lambda: f64,
}

impl GainModel {
    pub fn new(universe: &Universe, utilities: ScoreTable, lambda: f64) -> Result<Self, DesignError> {
        let mut table = vec![0.0; universe.len()];
        for (name, value) in utilities {
            let idx = universe
                .index_of(name)
                .ok_or_else(|| DesignError::UnknownItem(name.to_string()))?;
            table[idx] = check_score(name, *value)?;
        }
        Ok(GainModel {
            utilities: table,
            lambda: check_weight("lambda", lambda)?,
        })
    }

    pub fn zero(universe: &Universe) -> Self {
        GainModel {
            utilities: vec![0.0; universe.len()],
            lambda: 0.0,
        }
    }

    pub fn value(&self, x: &DisclosureState) -> f64 {
        x.indices().map(|i| self.utilities[i]).sum()
    }

    /// The design objective risk minus lambda times gain.
    pub fn objective(&self, risk_model: &RiskModel, x: &DisclosureState) -> Result<f64, DesignError> {
        Ok(risk_model.risk(x)? - self.lambda * self.value(x))
    }
}

/// Convenience free function matching the operation vocabulary.
pub fn risk(x: &DisclosureState, model: &RiskModel) -> Result<f64, DesignError> {
    model.risk(x)
}

// ---------------------------------------------------------------------------
// Least fixed point minimizes risk
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfpRiskReport {
    pub lfp: DisclosureState,
    pub lfp_risk: f64,
    /// Every fixed point with its risk, in canonical element order.
    pub fixed_points: Vec<(DisclosureState, f64)>,
    /// lfp is a subset of every enumerated fixed point.
    pub subset_least: bool,
    /// risk(lfp) is minimal among the enumerated fixed points.
    pub risk_minimal: bool,
}

/// Enumerates all fixed points and verifies that the iterated least fixed
/// point is subset-least and risk-minimal among them.
pub fn least_risk_fixedpoint_check(
    policy: &OperatorSpec,
    model: &RiskModel,
) -> Result<LfpRiskReport, DesignError> {
    let n = policy.universe().len();
    if n > ORACLE_BOUND {
        return Err(DesignError::OracleBound { size: n, bound: ORACLE_BOUND });
    }
    let result = lfp(policy, (1 << n) + 1)?;
    if !result.converged() {
        return Err(DesignError::LfpNotConverged);
    }
    let least = result.value;
    let lfp_risk = model.risk(&least)?;
    let mut fixed_points = Vec::new();
    let mut subset_least = true;
    let mut risk_minimal = true;
    for f in enumerate_fixpoints(policy)? {
        let r = model.risk(&f)?;
        if !least.is_subset_of(&f) {
            subset_least = false;
        }
        if lfp_risk > r + SLACKNESS_TOLERANCE {
            risk_minimal = false;
        }
        fixed_points.push((f, r));
    }
    Ok(LfpRiskReport { lfp: least, lfp_risk, fixed_points, subset_least, risk_minimal })
}

// ---------------------------------------------------------------------------
// Greedy minimal accountable transparency
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyStatus {
    Converged,
    Infeasible,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub after_policy: DisclosureState,
    /// Item force-added this round to raise accountability, if any.
    pub forced_add: Option<usize>,
    pub accountability: f64,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub state: DisclosureState,
    pub status: GreedyStatus,
    pub trace: Vec<GreedyStep>,
}

/// The minimal-transparency loop: apply the policy; while accountability is
/// below the floor, force-add the item with the best marginal accountability
/// per marginal risk; stop at a policy fixed point that meets the floor.
///
/// Zero marginal risk counts as an infinite ratio with the accountability
/// gain as secondary key; remaining ties break in item order. With a floor
/// of zero the add branch never fires and the result is exactly the
/// lattice least fixed point.
pub fn greedy_min_transparency(
    policy: &OperatorSpec,
    accountability: &AccountabilityModel,
    a0: f64,
    model: &RiskModel,
    fuel: usize,
) -> Result<GreedyOutcome, DesignError> {
    let universe = policy.universe();
    if accountability.value(&universe.top())? < a0 {
        return Ok(GreedyOutcome {
            state: universe.bottom(),
            status: GreedyStatus::Infeasible,
            trace: Vec::new(),
        });
    }
    let mut state = universe.bottom();
    let mut trace = Vec::new();
    for _ in 0..fuel {
        let previous = state.clone();
        state = apply(policy, &state)?;
        let mut forced_add = None;
        if accountability.value(&state)? < a0 {
            if let Some(best) = pick_greedy_item(&state, universe, accountability, model)? {
                state.insert(best);
                forced_add = Some(best);
            }
        }
        let a = accountability.value(&state)?;
        let r = model.risk(&state)?;
        trace.push(GreedyStep {
            after_policy: state.clone(),
            forced_add,
            accountability: a,
            risk: r,
        });
        if state == previous && a >= a0 {
            return Ok(GreedyOutcome { state, status: GreedyStatus::Converged, trace });
        }
    }
    Ok(GreedyOutcome { state, status: GreedyStatus::FuelExhausted, trace })
}

fn pick_greedy_item(
    state: &DisclosureState,
    universe: &Universe,
    accountability: &AccountabilityModel,
    model: &RiskModel,
) -> Result<Option<usize>, DesignError> {
    let base_a = accountability.value(state)?;
    let base_r = model.risk(state)?;
    let mut best: Option<(f64, f64, usize)> = None; // (ratio, a_gain, item)
    for i in 0..universe.len() {
        if state.contains(i) {
            continue;
        }
        let candidate = state.with(i);
        let a_gain = accountability.value(&candidate)? - base_a;
        let r_gain = model.risk(&candidate)? - base_r;
        let ratio = if r_gain <= 0.0 { f64::INFINITY } else { a_gain / r_gain };
        let better = match &best {
            None => true,
            Some((best_ratio, best_gain, _)) => {
                ratio > *best_ratio || (ratio == *best_ratio && a_gain > *best_gain)
            }
        };
        if better {
            best = Some((ratio, a_gain, i));
        }
    }
    Ok(best.map(|(_, _, i)| i))
}

// ---------------------------------------------------------------------------
// KKT slackness report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    /// Minimal nonnegative dual price under which no single-item swap
    /// improves the penalized objective.
    pub eta: f64,
    /// Floor minus attained accountability (nonpositive when feasible).
    pub slack: f64,
    pub slackness_product: f64,
    pub binding: bool,
    /// Whether such a price exists at all for this state.
    pub stationary: bool,
}

/// Estimates the dual price by single-item swap stationarity and reports
/// complementary slackness.
///
/// A swap is admissible when the swapped state stays accountable (at least
/// the floor) and, if a policy is supplied, remains one of its fixed points
/// — the design problem only ranges over fixed points, so swaps that leave
/// that set say nothing about optimality.
pub fn kkt_report(
    x_star: &DisclosureState,
    accountability: &AccountabilityModel,
    a0: f64,
    model: &RiskModel,
    gain: &GainModel,
    policy: Option<&OperatorSpec>,
) -> Result<DualReport, DesignError> {
    let n = x_star.universe_size();
    let base_objective = gain.objective(model, x_star)?;
    let base_a = accountability.value(x_star)?;

    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    let mut unpriceable = false;

    let mut consider = |candidate: DisclosureState| -> Result<(), DesignError> {
        if accountability.value(&candidate)? < a0 - SLACKNESS_TOLERANCE {
            return Ok(());
        }
        if let Some(policy) = policy {
            if apply(policy, &candidate)? != candidate {
                return Ok(());
            }
        }
        let d_objective = gain.objective(model, &candidate)? - base_objective;
        let d_a = accountability.value(&candidate)? - base_a;
        if d_a > SLACKNESS_TOLERANCE {
            upper = upper.min(d_objective / d_a);
        } else if d_a < -SLACKNESS_TOLERANCE {
            lower = lower.max(d_objective / d_a);
        } else if d_objective < -SLACKNESS_TOLERANCE {
            // an accountability-neutral swap strictly improves the
            // objective: no price makes this state stationary
            unpriceable = true;
        }
        Ok(())
    };

    for i in 0..n {
        let candidate = if x_star.contains(i) {
            x_star.without(i)
        } else {
            x_star.with(i)
        };
        consider(candidate)?;
    }

    let eta = lower.max(0.0);
    let slack = a0 - base_a;
    Ok(DualReport {
        eta,
        slack,
        slackness_product: eta * slack,
        binding: (base_a - a0).abs() <= SLACKNESS_TOLERANCE,
        stationary: !unpriceable && eta <= upper + SLACKNESS_TOLERANCE,
    })
}

// ---------------------------------------------------------------------------
// Garbling / coarsening comparisons
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarsenContext {
    Garbling,
    OutcomeVsProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarsenReport {
    pub context: CoarsenContext,
    /// The coarser policy discloses a subset of the finer one at every state.
    pub hypothesis_ok: bool,
    pub hypothesis_witness: Option<DisclosureState>,
    pub fine_lfp: Option<DisclosureState>,
    pub coarse_lfp: Option<DisclosureState>,
    pub coarse_below_fine: bool,
    pub fine_risk: f64,
    pub coarse_risk: f64,
    pub risk_ordered: bool,
    /// Accountability feasibility of (fine, coarse) equilibria, when a floor
    /// was supplied.
    pub feasibility: Option<(bool, bool)>,
}

fn coarsen_compare(
    fine: &OperatorSpec,
    coarse: &OperatorSpec,
    model: &RiskModel,
    floor: Option<(&AccountabilityModel, f64)>,
    context: CoarsenContext,
) -> Result<CoarsenReport, DesignError> {
    let universe = fine.universe();
    let n = universe.len();
    if n > ORACLE_BOUND {
        return Err(DesignError::OracleBound { size: n, bound: ORACLE_BOUND });
    }
    let mut hypothesis_witness = None;
    for mask in 0..(1usize << n) {
        let x = universe.element_from_mask(mask)?;
        if !apply(coarse, &x)?.is_subset_of(&apply(fine, &x)?) {
            hypothesis_witness = Some(x);
            break;
        }
    }
    let hypothesis_ok = hypothesis_witness.is_none();
    if !hypothesis_ok {
        return Ok(CoarsenReport {
            context,
            hypothesis_ok,
            hypothesis_witness,
            fine_lfp: None,
            coarse_lfp: None,
            coarse_below_fine: false,
            fine_risk: f64::NAN,
            coarse_risk: f64::NAN,
            risk_ordered: false,
            feasibility: None,
        });
    }
    let fuel = (1 << n) + 1;
    let fine_fix = lfp(fine, fuel)?;
    let coarse_fix = lfp(coarse, fuel)?;
    if !fine_fix.converged() || !coarse_fix.converged() {
        return Err(DesignError::LfpNotConverged);
    }
    let fine_risk = model.risk(&fine_fix.value)?;
    let coarse_risk = model.risk(&coarse_fix.value)?;
    let feasibility = match floor {
        Some((acct, a0)) => Some((
            acct.value(&fine_fix.value)? >= a0,
            acct.value(&coarse_fix.value)? >= a0,
        )),
        None => None,
    };
    Ok(CoarsenReport {
        context,
        hypothesis_ok,
        hypothesis_witness,
        coarse_below_fine: coarse_fix.value.is_subset_of(&fine_fix.value),
        fine_lfp: Some(fine_fix.value),
        coarse_lfp: Some(coarse_fix.value),
        fine_risk,
        coarse_risk,
        risk_ordered: coarse_risk <= fine_risk + SLACKNESS_TOLERANCE,
        feasibility,
    })
}

/// Welfare-by-coarsening check: verifies the pointwise garbling hypothesis,
/// then compares least fixed points and their risks, reporting
/// accountability feasibility of both.
pub fn garble_compare(
    finer: &OperatorSpec,
    coarser: &OperatorSpec,
    model: &RiskModel,
    accountability: &AccountabilityModel,
    a0: f64,
) -> Result<CoarsenReport, DesignError> {
    coarsen_compare(
        finer,
        coarser,
        model,
        Some((accountability, a0)),
        CoarsenContext::Garbling,
    )
}

/// Outcome-vs-process specialization: outcome transparency discloses a
/// subset of process transparency at every state, so its equilibrium is
/// cheaper.
pub fn process_outcome_compare(
    process: &OperatorSpec,
    outcome: &OperatorSpec,
    model: &RiskModel,
) -> Result<CoarsenReport, DesignError> {
    coarsen_compare(process, outcome, model, None, CoarsenContext::OutcomeVsProcess)
}

// ---------------------------------------------------------------------------
// Equilibria
// ---------------------------------------------------------------------------

/// Best-response correspondence as an explicit table over all states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseTable {
    map: BTreeMap<DisclosureState, BTreeSet<DisclosureState>>,
}

impl BestResponseTable {
    pub fn new(map: BTreeMap<DisclosureState, BTreeSet<DisclosureState>>) -> Self {
        BestResponseTable { map }
    }

    /// The identity correspondence over every subset of the universe.
    pub fn identity(universe: &Universe) -> Result<Self, DesignError> {
        Self::from_fn(universe, |x| [x.clone()].into_iter().collect())
    }

    /// Maps every state to the same singleton response.
    pub fn constant(universe: &Universe, target: DisclosureState) -> Result<Self, DesignError> {
        Self::from_fn(universe, |_| [target.clone()].into_iter().collect())
    }

    pub fn from_fn<F>(universe: &Universe, f: F) -> Result<Self, DesignError>
    where
        F: Fn(&DisclosureState) -> BTreeSet<DisclosureState>,
    {
        let n = universe.len();
        if n > ORACLE_BOUND {
            return Err(DesignError::OracleBound { size: n, bound: ORACLE_BOUND });
        }
        let mut map = BTreeMap::new();
        for mask in 0..(1usize << n) {
            let x = universe.element_from_mask(mask)?;
            let responses = f(&x);
            map.insert(x, responses);
        }
        Ok(BestResponseTable { map })
    }

    pub fn responses(&self, x: &DisclosureState) -> Option<&BTreeSet<DisclosureState>> {
        self.map.get(x)
    }
}

/// Exact scan for equilibria: states x with x in B(T(x)).
pub fn equilibrium_enumerate(
    policy: &OperatorSpec,
    table: &BestResponseTable,
) -> Result<BTreeSet<DisclosureState>, DesignError> {
    let universe = policy.universe();
    let n = universe.len();
    if n > ORACLE_BOUND {
        return Err(DesignError::OracleBound { size: n, bound: ORACLE_BOUND });
    }
    let mut equilibria = BTreeSet::new();
    for mask in 0..(1usize << n) {
        let x = universe.element_from_mask(mask)?;
        let disclosed = apply(policy, &x)?;
        let responses = table
            .responses(&disclosed)
            .ok_or_else(|| DesignError::PartialBestResponse(disclosed.to_string()))?;
        if responses.contains(&x) {
            equilibria.insert(x);
        }
    }
    Ok(equilibria)
}

// ---------------------------------------------------------------------------
// Finite Lawvere / Cantor check
// ---------------------------------------------------------------------------

pub const LAWVERE_BOUND: usize = 4;

/// A self-map on {0..n-1} as its image vector.
pub type SelfMap = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawvereReport {
    pub n: usize,
    /// Whether the point-to-self-map assignment hits every self-map.
    pub surjective: bool,
    pub image_size: usize,
    /// When surjective: every endomap has a fixed point.
    pub all_endomaps_have_fixed_points: Option<bool>,
    /// When not surjective: the diagonal self-map, provably outside the image.
    pub diagonal_witness: Option<SelfMap>,
    pub witness_outside_image: bool,
    /// A fixed-point-free endomap, when one exists.
    pub fixed_point_free: Option<SelfMap>,
}

/// Tests weak point-surjectivity of `e : X -> X^X` on a finite set and
/// reports either the fixed-point property (surjective case) or the Cantor
/// diagonal witness `d(x) = e(x)(x) + 1 mod n` outside the image.
pub fn lawvere_check(n: usize, e: &[SelfMap]) -> Result<LawvereReport, DesignError> {
    if n == 0 || n > LAWVERE_BOUND {
        return Err(DesignError::LawvereBound { n, bound: LAWVERE_BOUND });
    }
    if e.len() != n {
        return Err(DesignError::MalformedSelfMap(format!(
            "expected {n} rows, got {}",
            e.len()
        )));
    }
    for (x, row) in e.iter().enumerate() {
        if row.len() != n || row.iter().any(|v| *v >= n) {
            return Err(DesignError::MalformedSelfMap(format!("row {x} is not a self-map")));
        }
    }

    let all_maps = enumerate_self_maps(n);
    let image: BTreeSet<&SelfMap> = e.iter().collect();
    let surjective = image.len() == all_maps.len();

    let fixed_point_free = all_maps
        .iter()
        .find(|f| (0..n).all(|x| f[x] != x))
        .cloned();

    if surjective {
        let all_have = all_maps.iter().all(|f| (0..n).any(|x| f[x] == x));
        Ok(LawvereReport {
            n,
            surjective,
            image_size: image.len(),
            all_endomaps_have_fixed_points: Some(all_have),
            diagonal_witness: None,
            witness_outside_image: false,
            fixed_point_free,
        })
    } else {
        let diagonal: SelfMap = (0..n).map(|x| (e[x][x] + 1) % n).collect();
        let outside = !image.contains(&diagonal);
        Ok(LawvereReport {
            n,
            surjective,
            image_size: image.len(),
            all_endomaps_have_fixed_points: None,
            diagonal_witness: Some(diagonal),
            witness_outside_image: outside,
            fixed_point_free,
        })
    }
}

fn enumerate_self_maps(n: usize) -> Vec<SelfMap> {
    let count = n.pow(n as u32);
    let mut maps = Vec::with_capacity(count);
    for code in 0..count {
        let mut map = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            map.push(rest % n);
            rest /= n;
        }
        maps.push(map);
    }
    maps
}

// ---------------------------------------------------------------------------
// Small quantitative checks
// ---------------------------------------------------------------------------

/// Lower bound on breach risk given audit coverage of the attack space.
pub fn breach_bound(coverage: f64) -> Result<f64, DesignError> {
    if !(0.0..=1.0).contains(&coverage) {
        return Err(DesignError::CoverageOutOfRange(coverage));
    }
    Ok(1.0 - coverage)
}

/// Least iteration index from which the risk of the ascending chain stays
/// within epsilon of the least fixed point's risk. The chain's risk sequence
/// is verified non-decreasing on the way.
pub fn iterative_risk_convergence(
    policy: &OperatorSpec,
    model: &RiskModel,
    epsilon: f64,
) -> Result<usize, DesignError> {
    let n = policy.universe().len();
    let result = lfp(policy, n + 2)?;
    if !result.converged() {
        return Err(DesignError::LfpNotConverged);
    }
    let risks: Vec<f64> = result
        .trace
        .iter()
        .map(|x| model.risk(x))
        .collect::<Result<_, _>>()?;
    for (i, window) in risks.windows(2).enumerate() {
        if window[1] < window[0] - SLACKNESS_TOLERANCE {
            return Err(DesignError::RiskSequenceDecreased(i + 1));
        }
    }
    let target = risks.last().copied().unwrap_or(0.0) - epsilon;
    Ok(risks.iter().position(|r| *r >= target).unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifyReport {
    pub combined_risk: f64,
    pub first_risk: f64,
    pub second_risk: f64,
    /// combined minus the sum of the parts; positive means the joint release
    /// is superadditive.
    pub superadditivity_gap: f64,
    pub superadditive: bool,
}

/// Compares the risk of a combined release against the sum of the separate
/// releases. Pair interactions across the two sets are exactly the gap.
pub fn stratify_compare(
    first: &DisclosureState,
    second: &DisclosureState,
    model: &RiskModel,
    universe: &Universe,
) -> Result<StratifyReport, DesignError> {
    if let Some(shared) = first.indices().find(|i| second.contains(*i)) {
        return Err(DesignError::OverlappingSets(universe.item(shared).to_string()));
    }
    let combined_risk = model.risk(&first.union(second))?;
    let first_risk = model.risk(first)?;
    let second_risk = model.risk(second)?;
    let gap = combined_risk - first_risk - second_risk;
    Ok(StratifyReport {
        combined_risk,
        first_risk,
        second_risk,
        superadditivity_gap: gap,
        superadditive: gap > SLACKNESS_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    /// Expected gaming score of the random mixture of the two extreme forms.
    pub mixture_expected: f64,
    /// Gaming score at the mixture's expected precision, interpolated from
    /// the supplied table.
    pub at_expected_precision: f64,
    /// mixture_expected minus at_expected_precision; nonnegative for convex
    /// score tables.
    pub jensen_gap: f64,
    pub scores_convex: bool,
}

/// Evaluates randomized disclosure: with probability `p` use the most
/// precise form, else the least precise, and compare the expected gaming
/// score against the score of the deterministic policy at the same expected
/// precision.
pub fn mixture_gaming_eval(
    levels: &[(f64, f64)],
    p: f64,
) -> Result<MixtureReport, DesignError> {
    if levels.len() < 2 {
        return Err(DesignError::TooFewLevels);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(DesignError::ProbabilityOutOfRange(p));
    }
    let mut sorted: Vec<(f64, f64)> = levels.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("levels must not be NaN"));
    let (lo_level, lo_score) = sorted[0];
    let (hi_level, hi_score) = *sorted.last().unwrap();

    let mixture_expected = p * hi_score + (1.0 - p) * lo_score;
    let expected_precision = p * hi_level + (1.0 - p) * lo_level;
    let at_expected_precision = interpolate(&sorted, expected_precision);

    let scores_convex = sorted.windows(3).all(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let (x2, y2) = w[2];
        // y1 at most the chord between its neighbors
        let t = if x2 > x0 { (x1 - x0) / (x2 - x0) } else { 0.0 };
        y1 <= y0 + t * (y2 - y0) + SLACKNESS_TOLERANCE
    });

    Ok(MixtureReport {
        mixture_expected,
        at_expected_precision,
        jensen_gap: mixture_expected - at_expected_precision,
        scores_convex,
    })
}

fn interpolate(sorted: &[(f64, f64)], x: f64) -> f64 {
    if x <= sorted[0].0 {
        return sorted[0].1;
    }
    for w in sorted.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x <= x1 {
            if x1 == x0 {
                return y1;
            }
            let t = (x - x0) / (x1 - x0);
            return y0 + t * (y1 - y0);
        }
    }
    sorted.last().unwrap().1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Universe {
        Universe::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn risk_of_empty_state_is_zero() {
        let u = abc();
        let model = RiskModel::unit(&u);
        assert_eq!(model.risk(&u.bottom()).unwrap(), 0.0);
    }

    #[test]
    fn risk_single_term() {
        let u = abc();
        let model = RiskModel::new(
            &u,
            (2.0, 0.0, 0.0, 0.0),
            &[("a", 1.0)],
            &[],
            &[],
            &[],
            &[],
        )
        .unwrap();
        assert_eq!(model.risk(&u.element(["a"]).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn risk_is_monotone_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let u = abc();
        let model = RiskModel::new(
            &u,
            (1.0, 2.0, 0.5, 1.5),
            &[("a", 0.3)],
            &[("b", 1.1)],
            &[("c", 0.7)],
            &[("a", 0.2), ("c", 0.9)],
            &[("a", "b", 0.4)],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let y_mask: usize = rng.gen_range(0..8);
            let x_mask = y_mask & rng.gen_range(0..8);
            let x = u.element_from_mask(x_mask).unwrap();
            let y = u.element_from_mask(y_mask).unwrap();
            assert!(model.risk(&x).unwrap() <= model.risk(&y).unwrap() + 1e-12);
        }
    }

    #[test]
    fn risk_rejects_negative_scores() {
        let u = abc();
        assert!(matches!(
            RiskModel::new(&u, (1.0, 0.0, 0.0, 0.0), &[("a", -1.0)], &[], &[], &[], &[]),
            Err(DesignError::InvalidScore { .. })
        ));
    }

    #[test]
    fn lfp_risk_check_identity_policy() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let model = RiskModel::unit(&u);
        let report = least_risk_fixedpoint_check(&policy, &model).unwrap();
        assert_eq!(report.lfp, u.bottom());
        assert_eq!(report.lfp_risk, 0.0);
        assert_eq!(report.fixed_points.len(), 8);
        assert!(report.subset_least);
        assert!(report.risk_minimal);
    }

    #[test]
    fn lfp_risk_check_constant_policy() {
        let u = abc();
        let c = u.element(["a", "b"]).unwrap();
        let policy = OperatorSpec::table(u.clone(), |_| c.clone()).unwrap();
        let model = RiskModel::unit(&u);
        let report = least_risk_fixedpoint_check(&policy, &model).unwrap();
        assert_eq!(report.fixed_points.len(), 1);
        assert_eq!(report.lfp, c);
        assert!(report.subset_least && report.risk_minimal);
    }

    #[test]
    fn greedy_zero_floor_is_exactly_lfp() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(
            u.clone(),
            &[(&[], &["a"]), (&["a"], &["b"])],
            true,
        )
        .unwrap();
        let acct = AccountabilityModel::uniform(&u, 1.0);
        let model = RiskModel::unit(&u);
        let outcome = greedy_min_transparency(&policy, &acct, 0.0, &model, 50).unwrap();
        assert_eq!(outcome.status, GreedyStatus::Converged);
        let fix = lfp(&policy, 50).unwrap();
        assert_eq!(outcome.state, fix.value);
        assert!(outcome.trace.iter().all(|s| s.forced_add.is_none()));
    }

    #[test]
    fn greedy_prefers_better_ratio() {
        let u = Universe::new(["a", "b"]).unwrap();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let acct = AccountabilityModel::new(&u, &[("a", 2.0), ("b", 1.0)], None).unwrap();
        let model = RiskModel::new(
            &u,
            (0.0, 0.0, 0.0, 1.0),
            &[],
            &[],
            &[],
            &[("a", 1.0), ("b", 1.0)],
            &[],
        )
        .unwrap();
        let outcome = greedy_min_transparency(&policy, &acct, 2.0, &model, 50).unwrap();
        assert_eq!(outcome.status, GreedyStatus::Converged);
        assert_eq!(outcome.state, u.element(["a"]).unwrap());
    }

    #[test]
    fn greedy_reports_infeasible_floor() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let acct = AccountabilityModel::uniform(&u, 1.0);
        let model = RiskModel::unit(&u);
        let outcome = greedy_min_transparency(&policy, &acct, 10.0, &model, 50).unwrap();
        assert_eq!(outcome.status, GreedyStatus::Infeasible);
    }

    #[test]
    fn greedy_respects_accountability_cap() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let acct = AccountabilityModel::new(
            &u,
            &[("a", 1.0), ("b", 1.0), ("c", 1.0)],
            Some(2.0),
        )
        .unwrap();
        let model = RiskModel::unit(&u);
        let outcome = greedy_min_transparency(&policy, &acct, 3.0, &model, 50).unwrap();
        assert_eq!(outcome.status, GreedyStatus::Infeasible);
    }

    #[test]
    fn kkt_binding_constraint() {
        let u = Universe::new(["a", "b"]).unwrap();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let acct = AccountabilityModel::new(&u, &[("a", 2.0), ("b", 1.0)], None).unwrap();
        let model = RiskModel::new(
            &u,
            (0.0, 0.0, 0.0, 1.0),
            &[],
            &[],
            &[],
            &[("a", 1.0), ("b", 1.0)],
            &[],
        )
        .unwrap();
        let gain = GainModel::zero(&u);
        let x = u.element(["a"]).unwrap();
        let report = kkt_report(&x, &acct, 2.0, &model, &gain, Some(&policy)).unwrap();
        assert!(report.binding);
        assert!(report.slackness_product.abs() <= SLACKNESS_TOLERANCE);
        assert!(report.stationary);
    }

    #[test]
    fn kkt_slack_constraint_zero_eta() {
        // lfp forces all of {a,b}; removing either breaks fixed-pointness,
        // so with the floor slack the dual price is zero
        let u = Universe::new(["a", "b"]).unwrap();
        let policy =
            OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a", "b"])], true).unwrap();
        let acct = AccountabilityModel::uniform(&u, 1.0);
        let model = RiskModel::unit(&u);
        let gain = GainModel::zero(&u);
        let x = u.top();
        let report = kkt_report(&x, &acct, 1.0, &model, &gain, Some(&policy)).unwrap();
        assert_eq!(report.eta, 0.0);
        assert_eq!(report.slackness_product, 0.0);
        assert!(!report.binding);
        assert!(report.stationary);
    }

    #[test]
    fn kkt_empty_state_zero_floor() {
        let u = abc();
        let acct = AccountabilityModel::uniform(&u, 1.0);
        let model = RiskModel::unit(&u);
        let gain = GainModel::zero(&u);
        let report = kkt_report(&u.bottom(), &acct, 0.0, &model, &gain, None).unwrap();
        assert_eq!(report.eta, 0.0);
        assert_eq!(report.slackness_product, 0.0);
    }

    #[test]
    fn garble_equal_policies() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a"])], true).unwrap();
        let acct = AccountabilityModel::uniform(&u, 1.0);
        let model = RiskModel::unit(&u);
        let report = garble_compare(&policy, &policy, &model, &acct, 0.0).unwrap();
        assert!(report.hypothesis_ok);
        assert_eq!(report.fine_lfp, report.coarse_lfp);
        assert_eq!(report.fine_risk, report.coarse_risk);
        assert!(report.risk_ordered);
        assert_eq!(report.feasibility, Some((true, true)));
    }

    #[test]
    fn garble_strictly_coarser_policy_is_cheaper() {
        let u = abc();
        let fine =
            OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a", "b"])], true).unwrap();
        let coarse = OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a"])], true).unwrap();
        let model = RiskModel::new(
            &u,
            (0.0, 0.0, 0.0, 1.0),
            &[],
            &[],
            &[],
            &[("b", 5.0)],
            &[],
        )
        .unwrap();
        let acct = AccountabilityModel::uniform(&u, 1.0);
        let report = garble_compare(&fine, &coarse, &model, &acct, 1.0).unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.coarse_below_fine);
        assert!(report.coarse_risk < report.fine_risk);
        assert_eq!(report.feasibility, Some((true, true)));
    }

    #[test]
    fn garble_hypothesis_violation_names_witness() {
        let u = abc();
        let fine = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let coarse = OperatorSpec::from_named_rules(u.clone(), &[(&[], &["c"])], true).unwrap();
        let report = garble_compare(
            &fine,
            &coarse,
            &RiskModel::unit(&u),
            &AccountabilityModel::uniform(&u, 1.0),
            0.0,
        )
        .unwrap();
        assert!(!report.hypothesis_ok);
        assert!(report.hypothesis_witness.is_some());
    }

    #[test]
    fn process_outcome_delegates() {
        let u = abc();
        let process =
            OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a", "b", "c"])], true).unwrap();
        let outcome = OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a"])], true).unwrap();
        let report = process_outcome_compare(&process, &outcome, &RiskModel::unit(&u)).unwrap();
        assert_eq!(report.context, CoarsenContext::OutcomeVsProcess);
        assert!(report.hypothesis_ok);
        assert!(report.coarse_risk <= report.fine_risk);
        assert_eq!(report.feasibility, None);
    }

    #[test]
    fn equilibria_under_identity_response_are_fixed_points() {
        let u = Universe::new(["a", "b"]).unwrap();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[(&[], &["a"])], true).unwrap();
        let table = BestResponseTable::identity(&u).unwrap();
        let equilibria = equilibrium_enumerate(&policy, &table).unwrap();
        assert_eq!(equilibria, enumerate_fixpoints(&policy).unwrap());
    }

    #[test]
    fn equilibria_under_constant_bottom_response() {
        let u = Universe::new(["a", "b"]).unwrap();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let table = BestResponseTable::constant(&u, u.bottom()).unwrap();
        let equilibria = equilibrium_enumerate(&policy, &table).unwrap();
        assert_eq!(equilibria.len(), 1);
        assert!(equilibria.contains(&u.bottom()));
    }

    #[test]
    fn lawvere_singleton_is_surjective() {
        let report = lawvere_check(1, &[vec![0]]).unwrap();
        assert!(report.surjective);
        assert_eq!(report.all_endomaps_have_fixed_points, Some(true));
        assert_eq!(report.fixed_point_free, None);
    }

    #[test]
    fn lawvere_two_points_never_surjective() {
        let e = vec![vec![0, 1], vec![1, 0]];
        let report = lawvere_check(2, &e).unwrap();
        assert!(!report.surjective);
        assert!(report.witness_outside_image);
        let d = report.diagonal_witness.unwrap();
        for (x, row) in e.iter().enumerate() {
            assert_ne!(d[x], row[x]);
        }
        // the swap map has no fixed point
        assert_eq!(report.fixed_point_free, Some(vec![1, 0]));
    }

    #[test]
    fn lawvere_constant_assignment() {
        let e = vec![vec![0, 0, 0]; 3];
        let report = lawvere_check(3, &e).unwrap();
        assert_eq!(report.image_size, 1);
        assert!(report.witness_outside_image);
    }

    #[test]
    fn breach_bound_values() {
        assert_eq!(breach_bound(1.0).unwrap(), 0.0);
        assert_eq!(breach_bound(0.0).unwrap(), 1.0);
        assert_eq!(breach_bound(0.75).unwrap(), 0.25);
        assert!(matches!(
            breach_bound(1.5),
            Err(DesignError::CoverageOutOfRange(_))
        ));
    }

    #[test]
    fn convergence_count_on_three_stage_chain() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(
            u.clone(),
            &[(&["a"], &["b"]), (&["b"], &["c"]), (&[], &["a"])],
            true,
        )
        .unwrap();
        let model = RiskModel::unit(&u);
        assert_eq!(iterative_risk_convergence(&policy, &model, 0.5).unwrap(), 3);
        assert_eq!(iterative_risk_convergence(&policy, &model, 10.0).unwrap(), 0);
    }

    #[test]
    fn convergence_count_identity_policy() {
        let u = abc();
        let policy = OperatorSpec::from_named_rules(u.clone(), &[], true).unwrap();
        let model = RiskModel::unit(&u);
        assert_eq!(iterative_risk_convergence(&policy, &model, 0.1).unwrap(), 0);
    }

    #[test]
    fn stratify_additive_without_interactions() {
        let u = abc();
        let model = RiskModel::unit(&u);
        let report = stratify_compare(
            &u.element(["a"]).unwrap(),
            &u.element(["b"]).unwrap(),
            &model,
            &u,
        )
        .unwrap();
        assert_eq!(report.superadditivity_gap, 0.0);
        assert!(!report.superadditive);
    }

    #[test]
    fn stratify_cross_interaction_is_the_gap() {
        let u = abc();
        let model = RiskModel::new(
            &u,
            (0.0, 0.0, 0.0, 2.0),
            &[],
            &[],
            &[],
            &[("a", 1.0), ("b", 1.0)],
            &[("a", "b", 0.5)],
        )
        .unwrap();
        let report = stratify_compare(
            &u.element(["a"]).unwrap(),
            &u.element(["b"]).unwrap(),
            &model,
            &u,
        )
        .unwrap();
        // delta * w = 2.0 * 0.5
        assert!((report.superadditivity_gap - 1.0).abs() < 1e-12);
        assert!(report.superadditive);
    }

    #[test]
    fn stratify_empty_second_set() {
        let u = abc();
        let model = RiskModel::unit(&u);
        let report =
            stratify_compare(&u.element(["a"]).unwrap(), &u.bottom(), &model, &u).unwrap();
        assert_eq!(report.superadditivity_gap, 0.0);
    }

    #[test]
    fn stratify_rejects_overlap() {
        let u = abc();
        let model = RiskModel::unit(&u);
        assert!(matches!(
            stratify_compare(
                &u.element(["a"]).unwrap(),
                &u.element(["a", "b"]).unwrap(),
                &model,
                &u,
            ),
            Err(DesignError::OverlappingSets(item)) if item == "a"
        ));
    }

    #[test]
    fn mixture_linear_scores_have_no_gap() {
        let report = mixture_gaming_eval(&[(0.0, 0.0), (1.0, 1.0)], 0.5).unwrap();
        assert!(report.jensen_gap.abs() < 1e-12);
        assert!(report.scores_convex);
    }

    #[test]
    fn mixture_square_scores_gap() {
        let levels = [(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)];
        let report = mixture_gaming_eval(&levels, 0.5).unwrap();
        assert!((report.mixture_expected - 0.5).abs() < 1e-12);
        assert!((report.at_expected_precision - 0.25).abs() < 1e-12);
        assert!((report.jensen_gap - 0.25).abs() < 1e-12);
        assert!(report.scores_convex);
    }

    #[test]
    fn mixture_degenerate_probability() {
        for p in [0.0, 1.0] {
            let report = mixture_gaming_eval(&[(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)], p).unwrap();
            assert!(report.jensen_gap.abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn mixture_needs_two_levels() {
        assert!(matches!(
            mixture_gaming_eval(&[(0.0, 0.0)], 0.5),
            Err(DesignError::TooFewLevels)
        ));
    }
}
