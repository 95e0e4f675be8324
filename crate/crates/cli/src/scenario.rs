//! Scenario file schema. Scenarios are TOML documents with a `kind` field
//! and one kind-specific section; payloads validate against the schema here
//! before dispatch.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use aperture_core::gaming::{AuditCheck, Observability};
use aperture_core::truth::TransReading;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub kind: String,
    pub id: Option<String>,
    pub seed: Option<u64>,
    pub fuel: Option<usize>,
    pub bound: Option<usize>,
    pub lattice: Option<LatticeSection>,
    pub truth: Option<TruthSection>,
    pub mucalc: Option<MucalcSection>,
    pub gl: Option<GlSection>,
    pub gaming: Option<GamingSection>,
    pub optimize: Option<OptimizeSection>,
    pub suite: Option<SuiteSection>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        let scenario: ScenarioFile = toml::from_str(&text)
            .with_context(|| format!("cannot parse scenario file {}", path.display()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn scenario_id(&self, path: &Path) -> String {
        self.id.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".to_string())
        })
    }

    fn validate(&self) -> Result<()> {
        let expected_section = match self.kind.as_str() {
            "lattice" => self.lattice.is_some(),
            "truth" => self.truth.is_some(),
            "mucalc" => self.mucalc.is_some(),
            "gl" => self.gl.is_some(),
            "gaming" => self.gaming.is_some(),
            "optimize" => self.optimize.is_some(),
            "suite" => self.suite.is_some(),
            other => bail!("unknown scenario kind `{other}`"),
        };
        if !expected_section {
            bail!("scenario kind `{}` requires a [{}] section", self.kind, self.kind);
        }
        let sections = [
            self.lattice.is_some(),
            self.truth.is_some(),
            self.mucalc.is_some(),
            self.gl.is_some(),
            self.gaming.is_some(),
            self.optimize.is_some(),
            self.suite.is_some(),
        ]
        .iter()
        .filter(|s| **s)
        .count();
        if sections != 1 {
            bail!("scenario must contain exactly one payload section");
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    #[serde(default)]
    pub when: Vec<String>,
    pub then: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub universe: Vec<String>,
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    #[serde(default = "default_true")]
    pub inflationary: bool,
    /// Which checks to run, default all of lfp/gfp/monotone/fixpoints.
    pub run: Option<Vec<String>>,
    #[serde(default)]
    pub expect: LatticeExpect,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeExpect {
    pub lfp: Option<Vec<String>>,
    pub lfp_steps: Option<usize>,
    /// "converged" (default) or "fuel_exhausted"
    pub lfp_status: Option<String>,
    pub gfp: Option<Vec<String>>,
    pub fixpoint_count: Option<usize>,
    pub monotone: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSection {
    pub sentences: BTreeMap<String, String>,
    #[serde(default)]
    pub atoms: BTreeMap<String, bool>,
    /// `trans` reading for undetermined names: "strong_kleene" (default)
    /// leaves them at the third value, "closed_false" declares them false.
    #[serde(default)]
    pub trans_reading: TransReading,
    pub run: Option<Vec<String>>,
    #[serde(default)]
    pub expect: TruthExpect,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthExpect {
    /// name -> "grounded_true" | "grounded_false" | "ungrounded"
    #[serde(default)]
    pub classify: BTreeMap<String, String>,
    /// "none" or "witness"
    pub classical: Option<String>,
    /// exact expected witness values
    #[serde(default)]
    pub witness: BTreeMap<String, bool>,
    pub lp_gluts: Option<Vec<String>>,
    pub lp_witness: Option<String>,
    /// names expected to not be designated true
    #[serde(default)]
    pub lp_undesignated_true: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MucalcSection {
    pub states: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub formulas: Vec<FormulaSpec>,
    /// Cross-check each formula against the subset-scan oracle.
    #[serde(default)]
    pub oracle: bool,
    pub safety: Option<SafetySpec>,
    pub commute: Option<CommuteSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaSpec {
    pub text: String,
    pub expect: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetySpec {
    pub invariant: String,
    pub event: String,
    pub expect_hypothesis: Option<bool>,
    pub expect_conclusion: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommuteSpec {
    pub body: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlSection {
    /// State counts whose GL frames are enumerated and cross-checked.
    #[serde(default)]
    pub enumerate: Vec<usize>,
    #[serde(default)]
    pub schema_checks: Vec<SchemaCheck>,
    #[serde(default)]
    pub raw_frames: Vec<RawFrameCheck>,
    /// Run the self-endorsement replay at this proposition.
    pub replay: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaCheck {
    /// "lob", "k", "four", or arbitrary text in the modal grammar.
    pub formula: String,
    /// Check validity on every GL frame with up to this many states.
    pub states: usize,
    #[serde(default = "default_true")]
    pub expect_valid: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFrameCheck {
    pub states: usize,
    pub edges: Vec<(usize, usize)>,
    pub formula: String,
    pub expect_valid: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GamingSection {
    /// Run the bundled audit suite with its standard expectations.
    #[serde(default)]
    pub bundled: bool,
    #[serde(default)]
    pub audits: Vec<AuditSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSpec {
    pub name: String,
    pub observability: Observability,
    #[serde(default = "default_budget")]
    pub budget: usize,
    pub checks: Vec<AuditCheck>,
    pub bad_outputs: Vec<i64>,
    pub good_outputs: Vec<i64>,
    /// "pass_and_harm", "audit_complete_no_stable_exploit",
    /// "bad_outputs_rejected", "inconclusive"
    pub expect: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub universe: Vec<String>,
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    #[serde(default = "default_true")]
    pub inflationary: bool,
    #[serde(default)]
    pub risk: RiskSpec,
    #[serde(default)]
    pub accountability: AccountabilitySpec,
    #[serde(default)]
    pub gain: GainSpec,
    #[serde(default)]
    pub ops: Vec<OptimizeOp>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskSpec {
    #[serde(default)]
    pub weights: WeightsSpec,
    #[serde(default)]
    pub paradox: BTreeMap<String, f64>,
    #[serde(default)]
    pub leakage: BTreeMap<String, f64>,
    #[serde(default)]
    pub fairness: BTreeMap<String, f64>,
    #[serde(default)]
    pub gaming: BTreeMap<String, f64>,
    #[serde(default)]
    pub interactions: Vec<InteractionSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec { alpha: 1.0, beta: 1.0, gamma: 1.0, delta: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSpec {
    pub pair: (String, String),
    pub weight: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountabilitySpec {
    #[serde(default)]
    pub gains: BTreeMap<String, f64>,
    pub cap: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSpec {
    #[serde(default)]
    pub utilities: BTreeMap<String, f64>,
    #[serde(default)]
    pub lambda: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizeOp {
    LfpRisk {
        expect_minimal: Option<bool>,
    },
    Greedy {
        a0: f64,
        expect_state: Option<Vec<String>>,
    },
    Kkt {
        a0: f64,
        /// Explicit state; when omitted the greedy result at the same floor
        /// is analyzed.
        state: Option<Vec<String>>,
        /// Restrict swaps to policy fixed points (default true).
        #[serde(default = "default_true")]
        respect_policy: bool,
    },
    Garble {
        coarse_rules: Vec<RuleSpec>,
        #[serde(default)]
        a0: f64,
        expect_hypothesis: Option<bool>,
    },
    ProcessOutcome {
        outcome_rules: Vec<RuleSpec>,
    },
    Equilibrium {
        /// "identity" or "constant_bottom"
        response: String,
        expect_count: Option<usize>,
    },
    Lawvere {
        n: usize,
        e: Vec<Vec<usize>>,
    },
    Breach {
        coverage: f64,
        expect: Option<f64>,
    },
    Convergence {
        epsilon: f64,
        expect: Option<usize>,
    },
    Stratify {
        first: Vec<String>,
        second: Vec<String>,
        expect_gap: Option<f64>,
    },
    Mixture {
        levels: Vec<(f64, f64)>,
        p: f64,
        expect_gap: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    pub directory: String,
}

fn default_true() -> bool {
    true
}

fn default_budget() -> usize {
    1000
}
