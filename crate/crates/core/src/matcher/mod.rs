//! Plan recognition: budgeted backtracking unification of a flow graph
//! against plan pattern graphs, followed by constraint testing.
//!
//! Results include near misses (partial bindings scoring at least `theta`),
//! because verification needs to know where a cliché almost matched.

mod constraints;
mod describe;
mod recognize;
mod search;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

pub use constraints::{check_constraints, slot_value};
pub use describe::doc_text;
pub use recognize::{recognize, PlanOutcome, Recognition};
pub use search::{unify, unify_with, SubMatches};

use crate::flowgraph::{NodeId, VarId};
use crate::span::SourceSpan;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
pub const DEFAULT_THETA: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBudget {
    /// Candidate trials allowed per plan.
    pub max_extension_steps: u64,
    /// Minimum score for a partial result to be reported.
    pub theta: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_extension_steps: DEFAULT_MAX_STEPS, theta: DEFAULT_THETA }
    }
}

impl SearchBudget {
    pub fn new(max_extension_steps: u64, theta: f64) -> Result<Self, String> {
        if max_extension_steps == 0 {
            return Err("budget must be a positive number of steps".into());
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(format!("theta must lie in (0, 1], got {theta}"));
        }
        Ok(SearchBudget { max_extension_steps, theta })
    }
}

/// The value a slot takes under a binding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum SlotValue {
    Int(i64),
    Var { var: String, var_id: VarId },
    Node { node: NodeId },
}

impl SlotValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            SlotValue::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Text for explanations: the literal, the variable name, or a placeholder.
    pub fn describe(&self) -> String {
        match self {
            SlotValue::Int(n) => n.to_string(),
            SlotValue::Var { var, .. } => var.clone(),
            SlotValue::Node { node } => format!("node {node}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A referenced pattern node is unbound.
    Unbound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintOutcome {
    pub predicate: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Pattern nodes the predicate refers to.
    #[serde(skip)]
    pub pids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub plan: String,
    /// Bound pattern nodes in declaration order. A sub-plan node maps to the
    /// first exported node of the sub-match it is bound to.
    pub binding: IndexMap<String, NodeId>,
    pub unbound: Vec<String>,
    /// Every graph node covered by the match, sub-matches included, sorted.
    pub nodes: Vec<NodeId>,
    /// Covered nodes bound only through ANY wildcards: values the match
    /// reads but does not compute, which a parent plan may bind again.
    #[serde(skip)]
    pub shared: Vec<NodeId>,
    pub slots: IndexMap<String, SlotValue>,
    pub matched: u32,
    pub total: u32,
    pub score: f64,
    pub constraint_outcomes: Vec<ConstraintOutcome>,
    pub accepted: bool,
    pub spans: Vec<SourceSpan>,
}

impl MatchResult {
    pub fn is_complete(&self) -> bool {
        self.matched == self.total
    }

    pub fn failed_constraints(&self) -> impl Iterator<Item = &ConstraintOutcome> {
        self.constraint_outcomes.iter().filter(|o| o.status == Status::Fail)
    }

    pub fn passing_constraints(&self) -> usize {
        self.constraint_outcomes.iter().filter(|o| o.status == Status::Pass).count()
    }

    pub fn lowest_node(&self) -> Option<NodeId> {
        self.nodes.first().copied()
    }
}

#[derive(Debug, Clone, Error)]
pub enum MatchError {
    #[error("search budget of {budget} steps exceeded for plan `{plan}` ({} partial results kept)", partial.len())]
    BudgetExceeded { plan: String, budget: u64, partial: Vec<MatchResult> },
}
