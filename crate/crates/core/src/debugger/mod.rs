//! Verification of a program against its specification: every intended
//! cliché is either recognized, diagnosed as buggy (a bug cliché or a near
//! miss), or reported missing. Findings are pinpointed to source spans.

mod spec;

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

pub use spec::{parse_spec, parse_spec_file, Goal, ProgramSpec};

use crate::flowgraph::{FlowGraph, NodeId, UnboundRead};
use crate::matcher::{doc_text, recognize, MatchResult, Recognition, SearchBudget};
use crate::planlib::template::TemplateError;
use crate::planlib::{PShape, Plan, PlanBase, PlanError, PlanKind};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DebugError {
    #[error("{span}: spec syntax error: {message}")]
    SpecSyntax { span: SourceSpan, message: String },
    #[error("goal `{0}` is not a plan in the plan base")]
    UnknownGoal(String),
    #[error("goal `{0}` names a bug plan; goals must be clichés")]
    BugGoal(String),
    #[error("plan `{plan}`: {source}")]
    Template { plan: String, source: TemplateError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Recognized,
    Buggy,
    Missing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingKind {
    BugCliche,
    ConstraintViolation,
    MissingGoal,
    UnboundVariable,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::BugCliche => "BUG_CLICHE",
            FindingKind::ConstraintViolation => "CONSTRAINT_VIOLATION",
            FindingKind::MissingGoal => "MISSING_GOAL",
            FindingKind::UnboundVariable => "UNBOUND_VARIABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub goal: String,
    pub bug_plan: Option<String>,
    pub span: SourceSpan,
    pub evidence: String,
    pub confidence: f64,
    /// The plan whose match produced the finding (bug plan, goal, or the
    /// sub-plan a near miss was localized to).
    #[serde(skip)]
    pub plan: Option<String>,
    #[serde(skip)]
    pub matched: Option<MatchResult>,
    /// Graph nodes the span was computed from.
    #[serde(skip)]
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeaningLine {
    pub plan: String,
    pub depth: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub program: String,
    pub spec: String,
    pub verdicts: IndexMap<String, Verdict>,
    pub findings: Vec<Finding>,
    pub recognized: Vec<MatchResult>,
    pub meaning: Option<Vec<MeaningLine>>,
    pub budget_truncated: bool,
}

impl DiagnosticReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Default)]
pub struct DiagnoseOptions {
    /// Program path recorded in the report.
    pub program: String,
    /// Worker threads for plan matching; results do not depend on it.
    pub jobs: usize,
    /// Reads of variables with no reaching definition, from a lenient build.
    pub unbound_reads: Vec<UnboundRead>,
}

/// Minimal span covering every annotation of `nodes`.
pub fn pinpoint(nodes: &[NodeId], g: &FlowGraph) -> Option<SourceSpan> {
    nodes.iter().map(|&id| g.node(id).ann.span.clone()).reduce(|a, b| a.hull(&b))
}

/// Checks the program graph against every goal of `spec`.
pub fn diagnose(
    g: &FlowGraph,
    spec: &ProgramSpec,
    base: &PlanBase,
    budget: &SearchBudget,
    opts: &DiagnoseOptions,
) -> Result<DiagnosticReport, DebugError> {
    for goal in &spec.goals {
        match base.get(&goal.name) {
            None => return Err(DebugError::UnknownGoal(goal.name.clone())),
            Some(p) if p.kind == PlanKind::Bug => return Err(DebugError::BugGoal(goal.name.clone())),
            _ => {}
        }
    }
    let goals = spec.goal_names();
    let rec = recognize(g, base, Some(&goals), budget, opts.jobs.max(1)).map_err(|e| match e {
        PlanError::UnknownPlan(n) => DebugError::UnknownGoal(n),
        other => DebugError::UnknownGoal(other.to_string()),
    })?;
    let budget_truncated = rec.values().any(|o| o.truncated);
    let whole_function = pinpoint(&[g.entry(), g.exit()], g).expect("entry and exit exist");

    let mut findings = Vec::new();
    let mut recognized = Vec::new();
    for goal in &spec.goals {
        let outcome = &rec[&goal.name];
        if let Some(m) = outcome.accepted().next() {
            recognized.extend(outcome.accepted().cloned());
            let _ = m;
            continue;
        }
        let bug = bug_findings(g, base, &rec, &goal.name);
        if !bug.is_empty() {
            findings.extend(bug);
            continue;
        }
        if let Some(f) = near_miss_finding(g, base, &rec, &goal.name, budget.theta) {
            findings.push(f);
            continue;
        }
        if goal.required {
            findings.push(Finding {
                kind: FindingKind::MissingGoal,
                goal: goal.name.clone(),
                bug_plan: None,
                span: whole_function.clone(),
                evidence: format!("no code resembling `{}` was found", goal.name),
                confidence: 1.0,
                plan: Some(goal.name.clone()),
                matched: None,
                nodes: Vec::new(),
            });
        }
    }

    if let Some(first) = spec.required_goals().next().or(spec.goals.first()) {
        for u in &opts.unbound_reads {
            findings.push(Finding {
                kind: FindingKind::UnboundVariable,
                goal: first.name.clone(),
                bug_plan: None,
                span: u.span.clone(),
                evidence: format!("`{}` is read before any value is assigned to it", u.name),
                confidence: 1.0,
                plan: None,
                matched: None,
                nodes: vec![u.node],
            });
        }
    }
    findings.sort_by_key(|f| (f.span.line_start, f.kind));

    let targeted: BTreeSet<&str> = findings.iter().map(|f| f.goal.as_str()).collect();
    let mut verdicts = IndexMap::new();
    for goal in &spec.goals {
        let accepted = rec[&goal.name].is_recognized();
        let faulty = findings.iter().any(|f| f.goal == goal.name && f.kind != FindingKind::MissingGoal);
        let v = if accepted && !targeted.contains(goal.name.as_str()) {
            Verdict::Recognized
        } else if accepted || faulty {
            Verdict::Buggy
        } else {
            Verdict::Missing
        };
        verdicts.insert(goal.name.clone(), v);
    }

    let all_required = spec.required_goals().all(|goal| verdicts[&goal.name] == Verdict::Recognized);
    let meaning = if all_required {
        let mut lines = Vec::new();
        for goal in &spec.goals {
            if verdicts[&goal.name] == Verdict::Recognized {
                let m = rec[&goal.name].accepted().next().expect("recognized goal has a match");
                meaning_lines(g, base, &rec, &goal.name, m, 0, &mut lines)?;
            }
        }
        Some(lines)
    } else {
        None
    };

    Ok(DiagnosticReport {
        program: opts.program.clone(),
        spec: spec.title.clone(),
        verdicts,
        findings,
        recognized,
        meaning,
        budget_truncated,
    })
}

fn meaning_lines(
    g: &FlowGraph,
    base: &PlanBase,
    rec: &Recognition,
    name: &str,
    m: &MatchResult,
    depth: usize,
    out: &mut Vec<MeaningLine>,
) -> Result<(), DebugError> {
    let plan = base.get(name).expect("plan in base");
    let text = doc_text(plan, m, g).map_err(|source| DebugError::Template { plan: name.to_string(), source })?;
    out.push(MeaningLine { plan: name.to_string(), depth, text });
    let covered: BTreeSet<NodeId> = m.nodes.iter().copied().collect();
    for p in &plan.pnodes {
        let PShape::Sub { plan: sub } = &p.shape else { continue };
        let Some(anchor) = m.binding.get(&p.pid) else { continue };
        let Some(outcome) = rec.get(sub) else { continue };
        let inner =
            outcome.accepted().find(|r| r.nodes.contains(anchor) && r.nodes.iter().all(|n| covered.contains(n)));
        if let Some(inner) = inner {
            meaning_lines(g, base, rec, sub, inner, depth + 1, out)?;
        }
    }
    Ok(())
}

/// Bug plans that corrupt the goal or one of its sub-plans.
fn relevant_bug_plans<'b>(base: &'b PlanBase, goal: &str) -> Vec<&'b Plan> {
    let mut targets = base.sub_closure(goal);
    targets.push(goal.to_string());
    base.plans()
        .filter(|p| p.kind == PlanKind::Bug && p.corrupts.as_ref().is_some_and(|c| targets.contains(c)))
        .collect()
}

fn bug_findings(g: &FlowGraph, base: &PlanBase, rec: &Recognition, goal: &str) -> Vec<Finding> {
    let mut out = Vec::new();
    for bug in relevant_bug_plans(base, goal) {
        let Some(outcome) = rec.get(&bug.name) else { continue };
        let mut seen = BTreeSet::new();
        for m in outcome.accepted() {
            let fault: Vec<NodeId> = bug.fault_pids().iter().filter_map(|p| m.binding.get(*p).copied()).collect();
            let nodes = if fault.is_empty() { m.nodes.clone() } else { fault };
            let span = pinpoint(&nodes, g).expect("accepted match binds nodes");
            if !seen.insert(span.clone()) {
                continue;
            }
            out.push(Finding {
                kind: FindingKind::BugCliche,
                goal: goal.to_string(),
                bug_plan: Some(bug.name.clone()),
                span,
                evidence: format!(
                    "matches bug cliché `{}`, a faulty form of `{}`",
                    bug.name,
                    bug.corrupts.as_deref().unwrap_or(goal)
                ),
                confidence: m.score,
                plan: Some(bug.name.clone()),
                matched: Some(m.clone()),
                nodes,
            });
        }
    }
    out
}

/// The most convincing non-accepted result: highest score, then the most
/// program covered, then the most constraints passing.
fn best_near_miss<'r>(rec: &'r Recognition, plan: &str, theta: f64) -> Option<&'r MatchResult> {
    let outcome = rec.get(plan)?;
    let mut best: Option<&MatchResult> = None;
    for r in outcome.results.iter().filter(|r| !r.accepted && r.score + 1e-9 >= theta) {
        let better = match best {
            None => true,
            Some(b) => {
                (r.matched, r.nodes.len(), r.passing_constraints())
                    > (b.matched, b.nodes.len(), b.passing_constraints())
            }
        };
        if better {
            best = Some(r);
        }
    }
    best
}

fn near_miss_finding(g: &FlowGraph, base: &PlanBase, rec: &Recognition, goal: &str, theta: f64) -> Option<Finding> {
    let (plan_name, m) = localize(base, rec, goal, theta, 0)?;
    let plan = base.get(&plan_name).expect("plan in base");
    let failed: Vec<_> = m.failed_constraints().collect();
    let (nodes, evidence) = if !failed.is_empty() {
        let nodes: BTreeSet<NodeId> =
            failed.iter().flat_map(|o| o.pids.iter()).filter_map(|p| m.binding.get(p).copied()).collect();
        let evidence =
            failed.iter().map(|o| o.detail.clone().unwrap_or_else(|| o.predicate.clone())).collect::<Vec<_>>();
        (nodes.into_iter().collect::<Vec<_>>(), evidence.join("; "))
    } else {
        let mut evidence = format!("no match for {}", m.unbound.join(", "));
        if plan_name != goal {
            evidence = format!("{evidence} in `{plan_name}`");
        }
        (structural_delta(g, plan, m), evidence)
    };
    let nodes = if nodes.is_empty() { m.nodes.clone() } else { nodes };
    let span = pinpoint(&nodes, g)?;
    let total = m.constraint_outcomes.len() as f64;
    let confidence = m.score * (m.passing_constraints() as f64 + 1.0) / (total + 1.0);
    Some(Finding {
        kind: FindingKind::ConstraintViolation,
        goal: goal.to_string(),
        bug_plan: None,
        span,
        evidence,
        confidence,
        plan: Some(plan_name),
        matched: Some(m.clone()),
        nodes,
    })
}

/// The near miss to report for `plan`; when it fails only because a
/// sub-plan is absent, the sub-plan's own near miss localizes better.
fn localize<'r>(
    base: &PlanBase,
    rec: &'r Recognition,
    plan: &str,
    theta: f64,
    depth: usize,
) -> Option<(String, &'r MatchResult)> {
    let m = best_near_miss(rec, plan, theta)?;
    if depth < 8 && m.failed_constraints().next().is_none() {
        let p = base.get(plan)?;
        for pid in &m.unbound {
            if let Some(sub) = p.pnode(pid).and_then(|n| n.sub_plan()) {
                if let Some(found) = localize(base, rec, sub, theta, depth + 1) {
                    return Some(found);
                }
            }
        }
    }
    Some((plan.to_string(), m))
}

/// Graph nodes next to the unbound pattern nodes of a structural near
/// miss. A bound node that should have read an unbound one is where the
/// wrong value is used; failing that, the graph nodes a bound source feeds
/// that look like the missing node.
fn structural_delta(g: &FlowGraph, plan: &Plan, m: &MatchResult) -> Vec<NodeId> {
    let unbound: BTreeSet<&str> = m.unbound.iter().map(String::as_str).collect();
    let is_sub = |pid: &str| plan.pnode(pid).is_some_and(|n| n.sub_plan().is_some());
    let consumers: BTreeSet<NodeId> = plan
        .data
        .iter()
        .filter(|e| unbound.contains(e.from.as_str()) && !is_sub(&e.to))
        .filter_map(|e| m.binding.get(&e.to).copied())
        .collect();
    if !consumers.is_empty() {
        return consumers.into_iter().collect();
    }
    let mut out = BTreeSet::new();
    for e in plan.data.iter().filter(|e| unbound.contains(e.to.as_str())) {
        let Some(&q) = m.binding.get(&e.from) else { continue };
        let port = if is_sub(&e.from) { 0 } else { e.out_port };
        let Some(PShape::Node { kind, op, .. }) = plan.pnode(&e.to).map(|n| &n.shape) else { continue };
        for d in g.data_out(q).iter().filter(|d| d.out_port == port) {
            let n = g.node(d.to);
            if kind.is_none_or(|k| n.kind == k) && op.is_none_or(|o| n.op == Some(o)) {
                out.insert(d.to);
            }
        }
    }
    out.into_iter().collect()
}
