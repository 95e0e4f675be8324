//! Audit gaming via the recursion theorem, at toy scale.
//!
//! Programs in the mini-language run deterministically within a step budget
//! and expose a trace of emitted outputs plus a hidden harm flag — the "real
//! objective" is simply that the flag stays clear. An [`AuditPredicate`] is a
//! total, budget-bounded decision over the observable part of a trace.
//!
//! [`construct_gamer`] builds the self-referential program "evaluate the
//! published audit on my own code; if it passes, do the bad action, else do
//! the good one". Self-reference is realized by an own-code register filled
//! by the loader rather than quine-style reproduction: when the program
//! evaluates the audit on itself, the runner resolves the verdict to the
//! consistent fixed point of that self-application (simulating each branch
//! and asking the audit about the resulting trace). For any audit that is
//! blind to the harm flag and satisfied by the bad action's outputs, the
//! gamer passes the audit while setting the flag.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GamingError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("bad action must set the harm flag and good action must not")]
    MisconfiguredActions,
}

/// Instructions of the toy mini-language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instr {
    /// Populate the own-code register with this program (loader-style).
    LoadSelf,
    /// Evaluate the embedded audit on the program in the own-code register,
    /// leaving the verdict in the audit flag.
    EvalAudit(AuditPredicate),
    /// Jump to the given instruction index when the audit flag is set.
    BranchIfPass(usize),
    Emit(i64),
    SetHarm,
    Halt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyProgram {
    pub instructions: Vec<Instr>,
}

/// What the audit gets to see of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observability {
    OutputsOnly,
    FullTrace,
}

/// A single total check over the observable projection of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditCheck {
    AllOutputsAtMost(i64),
    AllOutputsAtLeast(i64),
    SomeOutputAtMost(i64),
    SomeOutputEquals(i64),
    OutputsNonEmpty,
    OutputCountAtMost(usize),
    /// Requires [`Observability::FullTrace`]; always passes when the audit
    /// only sees outputs.
    HarmFlagClear,
    ConstTrue,
    ConstFalse,
}

/// A total, budget-bounded decision procedure over observable traces. The
/// verdict is the conjunction of all checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPredicate {
    pub name: String,
    pub checks: Vec<AuditCheck>,
    pub observability: Observability,
    pub budget: usize,
}

impl AuditPredicate {
    pub fn outputs_only(name: &str, checks: Vec<AuditCheck>) -> Self {
        AuditPredicate {
            name: name.to_string(),
            checks,
            observability: Observability::OutputsOnly,
            budget: 1000,
        }
    }

    pub fn full_trace(name: &str, checks: Vec<AuditCheck>) -> Self {
        AuditPredicate {
            name: name.to_string(),
            checks,
            observability: Observability::FullTrace,
            budget: 1000,
        }
    }

    /// Whether the audit can observe the harm flag at all.
    pub fn sees_harm(&self) -> bool {
        self.observability == Observability::FullTrace
            && self.checks.iter().any(|c| matches!(c, AuditCheck::HarmFlagClear))
    }

    fn decide(&self, trace: &Trace) -> bool {
        self.checks.iter().all(|check| match check {
            AuditCheck::AllOutputsAtMost(k) => trace.outputs.iter().all(|o| o <= k),
            AuditCheck::AllOutputsAtLeast(k) => trace.outputs.iter().all(|o| o >= k),
            AuditCheck::SomeOutputAtMost(k) => trace.outputs.iter().any(|o| o <= k),
            AuditCheck::SomeOutputEquals(k) => trace.outputs.iter().any(|o| o == k),
            AuditCheck::OutputsNonEmpty => !trace.outputs.is_empty(),
            AuditCheck::OutputCountAtMost(k) => trace.outputs.len() <= *k,
            AuditCheck::HarmFlagClear => match self.observability {
                Observability::FullTrace => !trace.harm_flag,
                Observability::OutputsOnly => true,
            },
            AuditCheck::ConstTrue => true,
            AuditCheck::ConstFalse => false,
        })
    }
}

/// Execution record of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub outputs: Vec<i64>,
    pub harm_flag: bool,
    pub steps: usize,
    pub halted: bool,
}

/// Nesting cap on audit self-application. Programs that loop back into
/// their own audit evaluation bottom out at a failing verdict instead of
/// recursing forever.
const SELF_AUDIT_DEPTH: usize = 8;

struct Machine<'p> {
    program: &'p ToyProgram,
    pc: usize,
    outputs: Vec<i64>,
    harm: bool,
    steps: usize,
    budget: usize,
    code_loaded: bool,
    audit_flag: bool,
    depth: usize,
}

impl<'p> Machine<'p> {
    fn new(program: &'p ToyProgram, budget: usize) -> Self {
        Machine {
            program,
            pc: 0,
            outputs: Vec::new(),
            harm: false,
            steps: 0,
            budget,
            code_loaded: false,
            audit_flag: false,
            depth: 0,
        }
    }

    fn finish(self, halted: bool) -> Trace {
        Trace {
            outputs: self.outputs,
            harm_flag: self.harm,
            steps: self.steps,
            halted,
        }
    }

    fn run(mut self) -> Trace {
        while self.pc < self.program.instructions.len() {
            if self.steps == self.budget {
                return self.finish(false);
            }
            self.steps += 1;
            match &self.program.instructions[self.pc] {
                Instr::LoadSelf => {
                    self.code_loaded = true;
                    self.pc += 1;
                }
                Instr::EvalAudit(audit) => {
                    self.audit_flag = if self.code_loaded && self.depth < SELF_AUDIT_DEPTH {
                        resolve_self_audit(self.program, self.pc, audit, self.depth)
                    } else {
                        // nothing in the own-code register to audit, or the
                        // self-application is nested too deep to settle
                        false
                    };
                    self.pc += 1;
                }
                Instr::BranchIfPass(target) => {
                    if self.audit_flag {
                        self.pc = *target;
                    } else {
                        self.pc += 1;
                    }
                }
                Instr::Emit(v) => {
                    self.outputs.push(*v);
                    self.pc += 1;
                }
                Instr::SetHarm => {
                    self.harm = true;
                    self.pc += 1;
                }
                Instr::Halt => return self.finish(true),
            }
        }
        // fell off the end of the program
        self.finish(true)
    }
}

/// Resolves the verdict of an audit applied to the running program itself.
///
/// The self-application is a fixed-point equation: the verdict steers the
/// branch taken, and the branch taken determines the trace the audit judges.
/// Each candidate verdict is simulated from just after the eval instruction;
/// a verdict is consistent when judging the resulting full trace reproduces
/// it. When only one verdict is consistent it is returned; when both are, or
/// neither is, the passing verdict is preferred (the adversarial choice, and
/// on audits with no fixed point it exposes the disagreement between the
/// program's branch and the external audit).
fn resolve_self_audit(
    program: &ToyProgram,
    eval_pc: usize,
    audit: &AuditPredicate,
    depth: usize,
) -> bool {
    let pass_trace = simulate_with_flag(program, eval_pc + 1, true, audit.budget, depth + 1);
    if audit.decide(&pass_trace) {
        return true;
    }
    let fail_trace = simulate_with_flag(program, eval_pc + 1, false, audit.budget, depth + 1);
    if !audit.decide(&fail_trace) {
        return false;
    }
    true
}

/// Pure simulation of the program from an arbitrary pc with the audit flag
/// pinned to `flag`. Later `EvalAudit` instructions re-resolve recursively.
fn simulate_with_flag(
    program: &ToyProgram,
    start_pc: usize,
    flag: bool,
    budget: usize,
    depth: usize,
) -> Trace {
    let mut machine = Machine::new(program, budget);
    machine.pc = start_pc;
    machine.code_loaded = true;
    machine.audit_flag = flag;
    machine.depth = depth;
    machine.run()
}

/// Runs a program to completion within the step budget. Deterministic:
/// identical inputs produce identical traces. A program that does not halt
/// within the budget yields a trace with `halted == false`.
pub fn run(program: &ToyProgram, budget: usize) -> Result<Trace, GamingError> {
    if budget == 0 {
        return Err(GamingError::ZeroBudget);
    }
    Ok(Machine::new(program, budget).run())
}

/// Applies the audit to the observable projection of the program's trace.
pub fn audit(m: &AuditPredicate, program: &ToyProgram) -> Result<bool, GamingError> {
    let trace = run(program, m.budget)?;
    Ok(m.decide(&trace))
}

/// A straight-line behavior: the outputs it emits and whether it sets the
/// harm flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub outputs: Vec<i64>,
    pub sets_harm: bool,
}

impl ActionSpec {
    pub fn bad(outputs: Vec<i64>) -> Self {
        ActionSpec { outputs, sets_harm: true }
    }

    pub fn good(outputs: Vec<i64>) -> Self {
        ActionSpec { outputs, sets_harm: false }
    }

    fn emit_block(&self, program: &mut Vec<Instr>) {
        if self.sets_harm {
            program.push(Instr::SetHarm);
        }
        for v in &self.outputs {
            program.push(Instr::Emit(*v));
        }
        program.push(Instr::Halt);
    }
}

/// Builds the gamer: evaluate the audit on own code; on pass perform the bad
/// action, otherwise the good one.
pub fn construct_gamer(
    m: &AuditPredicate,
    bad: &ActionSpec,
    good: &ActionSpec,
) -> Result<ToyProgram, GamingError> {
    if !bad.sets_harm || good.sets_harm {
        return Err(GamingError::MisconfiguredActions);
    }
    let mut instructions = vec![
        Instr::LoadSelf,
        Instr::EvalAudit(m.clone()),
        Instr::BranchIfPass(0), // patched below
    ];
    good.emit_block(&mut instructions);
    let bad_start = instructions.len();
    instructions[2] = Instr::BranchIfPass(bad_start);
    bad.emit_block(&mut instructions);
    Ok(ToyProgram { instructions })
}

/// Outcome classification of a gaming attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GamingOutcome {
    /// The audit passes and the harm flag is set: the exploit certificate.
    PassAndHarm,
    /// The audit observes the harm flag, so no stable exploit exists: the
    /// incompleteness hypothesis fails.
    AuditCompleteNoStableExploit,
    /// The audit rejects even the bad action's outputs, so the hypothesis
    /// that the bad program might pass the audit fails; the gamer falls back
    /// to the good behavior.
    BadOutputsRejected,
    /// Anything else (the gamer passed without harming, which the
    /// construction does not produce for well-formed inputs).
    Inconclusive,
}

impl fmt::Display for GamingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            GamingOutcome::PassAndHarm => "audit passed and harm done",
            GamingOutcome::AuditCompleteNoStableExploit => {
                "audit complete w.r.t. objective - no stable exploit"
            }
            GamingOutcome::BadOutputsRejected => {
                "audit rejects the bad outputs - gamer stays benign"
            }
            GamingOutcome::Inconclusive => "inconclusive",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamingReport {
    pub audit_name: String,
    pub audit_pass: bool,
    pub harm: bool,
    pub outcome: GamingOutcome,
    /// Whether the gamer's internal verdict agrees with the external audit.
    pub self_reference_consistent: bool,
    pub trace: Trace,
}

/// Builds the gamer, runs and audits it, and classifies the outcome against
/// the gaming theorem's hypotheses.
pub fn verify_gaming(
    m: &AuditPredicate,
    bad: &ActionSpec,
    good: &ActionSpec,
) -> Result<GamingReport, GamingError> {
    let gamer = construct_gamer(m, bad, good)?;
    let trace = run(&gamer, m.budget)?;
    let audit_pass = audit(m, &gamer)?;
    // the branch actually taken is visible in the trace: only the bad block
    // sets the harm flag
    let internal_verdict = trace.harm_flag;
    let outcome = match (audit_pass, trace.harm_flag) {
        (true, true) => GamingOutcome::PassAndHarm,
        (false, true) => GamingOutcome::AuditCompleteNoStableExploit,
        (false, false) => GamingOutcome::BadOutputsRejected,
        (true, false) => GamingOutcome::Inconclusive,
    };
    Ok(GamingReport {
        audit_name: m.name.clone(),
        audit_pass,
        harm: trace.harm_flag,
        outcome,
        self_reference_consistent: internal_verdict == audit_pass,
        trace,
    })
}

/// The bundled audit suite: outputs-blind audits satisfiable by the paired
/// bad action (the gaming theorem's hypotheses hold), plus harm-aware audits
/// for which they fail.
pub fn bundled_suite() -> Vec<(AuditPredicate, ActionSpec, ActionSpec)> {
    use AuditCheck::*;
    let mut suite = Vec::new();
    let blind: Vec<(&str, Vec<AuditCheck>, Vec<i64>)> = vec![
        ("output-at-most-10", vec![AllOutputsAtMost(10)], vec![5]),
        ("output-at-least-3", vec![AllOutputsAtLeast(3)], vec![4, 7]),
        ("some-output-small", vec![SomeOutputAtMost(1)], vec![0, 50]),
        ("exact-output-42", vec![SomeOutputEquals(42)], vec![42]),
        ("nonempty-output", vec![OutputsNonEmpty], vec![9]),
        ("short-output", vec![OutputCountAtMost(2)], vec![1, 2]),
        ("band-5-to-9", vec![AllOutputsAtLeast(5), AllOutputsAtMost(9)], vec![6, 8]),
        ("always-pass", vec![ConstTrue], vec![13]),
        ("pair-with-zero", vec![SomeOutputEquals(0), OutputCountAtMost(3)], vec![0, 1]),
        ("bounded-and-nonempty", vec![OutputsNonEmpty, AllOutputsAtMost(100)], vec![99]),
        ("single-even", vec![SomeOutputEquals(2), OutputCountAtMost(1)], vec![2]),
    ];
    for (name, checks, bad_outputs) in blind {
        suite.push((
            AuditPredicate::outputs_only(name, checks),
            ActionSpec::bad(bad_outputs.clone()),
            ActionSpec::good(bad_outputs),
        ));
    }
    let aware: Vec<(&str, Vec<AuditCheck>, Vec<i64>)> = vec![
        ("harm-flag-only", vec![HarmFlagClear], vec![5]),
        ("harm-and-bounds", vec![HarmFlagClear, AllOutputsAtMost(10)], vec![5]),
        ("harm-and-exact", vec![HarmFlagClear, SomeOutputEquals(7)], vec![7]),
    ];
    for (name, checks, outputs) in aware {
        suite.push((
            AuditPredicate::full_trace(name, checks),
            ActionSpec::bad(outputs.clone()),
            ActionSpec::good(outputs),
        ));
    }
    suite
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emit_and_halt() {
        let p = ToyProgram { instructions: vec![Instr::Emit(5), Instr::Halt] };
        let t = run(&p, 10).unwrap();
        assert_eq!(t.outputs, vec![5]);
        assert!(!t.harm_flag);
        assert!(t.halted);
    }

    #[test]
    fn harm_then_emit() {
        let p = ToyProgram {
            instructions: vec![Instr::SetHarm, Instr::Emit(5), Instr::Halt],
        };
        let t = run(&p, 10).unwrap();
        assert_eq!(t.outputs, vec![5]);
        assert!(t.harm_flag);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = ToyProgram {
            instructions: vec![Instr::Emit(1), Instr::Emit(2), Instr::Halt],
        };
        assert_eq!(run(&p, 10).unwrap(), run(&p, 10).unwrap());
    }

    #[test]
    fn budget_exhaustion_reports_not_halted() {
        let p = ToyProgram {
            instructions: vec![Instr::Emit(1), Instr::Emit(2), Instr::Emit(3), Instr::Halt],
        };
        let t = run(&p, 2).unwrap();
        assert!(!t.halted);
        assert_eq!(t.outputs, vec![1, 2]);
    }

    #[test]
    fn zero_budget_rejected() {
        let p = ToyProgram { instructions: vec![Instr::Halt] };
        assert_eq!(run(&p, 0).unwrap_err(), GamingError::ZeroBudget);
    }

    #[test]
    fn audit_sees_outputs() {
        let m = AuditPredicate::outputs_only("small", vec![AuditCheck::SomeOutputAtMost(10)]);
        let p5 = ToyProgram { instructions: vec![Instr::Emit(5), Instr::Halt] };
        let p99 = ToyProgram { instructions: vec![Instr::Emit(99), Instr::Halt] };
        assert!(audit(&m, &p5).unwrap());
        assert!(!audit(&m, &p99).unwrap());
    }

    #[test]
    fn full_trace_audit_sees_harm() {
        let m = AuditPredicate::full_trace("clean", vec![AuditCheck::HarmFlagClear]);
        let p = ToyProgram {
            instructions: vec![Instr::SetHarm, Instr::Emit(5), Instr::Halt],
        };
        assert!(!audit(&m, &p).unwrap());
    }

    #[test]
    fn gamer_passes_blind_audit_while_harming() {
        let m = AuditPredicate::outputs_only("leq10", vec![AuditCheck::AllOutputsAtMost(10)]);
        let report =
            verify_gaming(&m, &ActionSpec::bad(vec![5]), &ActionSpec::good(vec![5])).unwrap();
        assert!(report.audit_pass);
        assert!(report.harm);
        assert_eq!(report.outcome, GamingOutcome::PassAndHarm);
        assert!(report.self_reference_consistent);
        assert_eq!(report.trace.outputs, vec![5]);
    }

    #[test]
    fn constant_false_audit_keeps_gamer_benign() {
        let m = AuditPredicate::outputs_only("never", vec![AuditCheck::ConstFalse]);
        let report =
            verify_gaming(&m, &ActionSpec::bad(vec![5]), &ActionSpec::good(vec![5])).unwrap();
        assert!(!report.audit_pass);
        assert!(!report.harm);
        assert_eq!(report.outcome, GamingOutcome::BadOutputsRejected);
        assert!(report.self_reference_consistent);
    }

    #[test]
    fn constant_true_audit_is_gamed() {
        let m = AuditPredicate::outputs_only("always", vec![AuditCheck::ConstTrue]);
        let report =
            verify_gaming(&m, &ActionSpec::bad(vec![77]), &ActionSpec::good(vec![1])).unwrap();
        assert_eq!(report.outcome, GamingOutcome::PassAndHarm);
    }

    #[test]
    fn harm_aware_audit_has_no_stable_exploit() {
        let m = AuditPredicate::full_trace(
            "sees-harm",
            vec![AuditCheck::HarmFlagClear, AuditCheck::AllOutputsAtMost(10)],
        );
        let report =
            verify_gaming(&m, &ActionSpec::bad(vec![5]), &ActionSpec::good(vec![5])).unwrap();
        assert!(!report.audit_pass);
        assert!(report.harm);
        assert_eq!(report.outcome, GamingOutcome::AuditCompleteNoStableExploit);
        // the audit's verdict on the gamer disagrees with the branch taken:
        // the fixed-point equation has no solution
        assert!(!report.self_reference_consistent);
    }

    #[test]
    fn gamer_branch_matches_external_audit_when_blind() {
        for (m, bad, good) in bundled_suite() {
            if m.observability == Observability::OutputsOnly {
                let report = verify_gaming(&m, &bad, &good).unwrap();
                assert!(report.self_reference_consistent, "audit {}", m.name);
            }
        }
    }

    #[test]
    fn misconfigured_actions_rejected() {
        let m = AuditPredicate::outputs_only("x", vec![AuditCheck::ConstTrue]);
        assert_eq!(
            construct_gamer(&m, &ActionSpec::good(vec![1]), &ActionSpec::good(vec![1]))
                .unwrap_err(),
            GamingError::MisconfiguredActions
        );
    }

    #[test]
    fn self_looping_audit_evaluation_terminates() {
        // branch jumps back into the eval: the nesting cap bottoms out
        let m = AuditPredicate::outputs_only("x", vec![AuditCheck::OutputsNonEmpty]);
        let p = ToyProgram {
            instructions: vec![
                Instr::LoadSelf,
                Instr::EvalAudit(m),
                Instr::BranchIfPass(1),
                Instr::Halt,
            ],
        };
        let t = run(&p, 100).unwrap();
        assert!(t.halted);
    }

    #[test]
    fn eval_audit_without_load_fails_closed() {
        let m = AuditPredicate::outputs_only("x", vec![AuditCheck::ConstTrue]);
        let p = ToyProgram {
            instructions: vec![
                Instr::EvalAudit(m),
                Instr::BranchIfPass(3),
                Instr::Halt,
                Instr::Emit(1),
                Instr::Halt,
            ],
        };
        let t = run(&p, 10).unwrap();
        assert!(t.outputs.is_empty());
    }
}
