//! The plan knowledge base: a line-oriented formalism for clichés and bug
//! clichés, its parser and canonical printer, and the plan-base manager.
//!
//! ```text
//! plan "<name>" kind=(cliche|bug) [corrupts="<name>"] category=(pl|pe|cbt)
//! doc "<template with $slot and @role interpolation>"
//! node <pid> kind=<NodeKind|ANY> [op=<OpCode>] [const=<int> | slot=$<ident>]
//! sub  <pid> plan="<name>"
//! data <pid>:<out_port> -> <pid>:<in_port>
//! ctrl <pid> -> <pid> [label=(seq|true|false|back)]
//! constraint <predicate>
//! export <role> = <pid>
//! end
//! ```
//!
//! A `sub` pattern node stands for an accepted match of another plan. Its
//! data ports are the sub-plan's exports, numbered in declaration order.

mod base;
mod parse;
mod print;
pub mod template;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use base::{Diagnostic, PlanBase};
pub use parse::{check_plan, parse_plan, parse_plans, parse_plans_file};
pub use print::{print_plan, print_plans};

use crate::flowgraph::{CtrlLabel, NodeKind, OpCode};
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    Cliche,
    Bug,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    /// Programming-language knowledge.
    Pl,
    /// Programming expertise.
    Pe,
    /// Common bug types.
    Cbt,
}

impl PlanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlanKind::Cliche => "cliche",
            PlanKind::Bug => "bug",
        }
    }
}

impl FromStr for PlanKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cliche" => Ok(PlanKind::Cliche),
            "bug" => Ok(PlanKind::Bug),
            _ => Err(format!("unknown plan kind `{s}` (expected cliche or bug)")),
        }
    }
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Pl => "pl",
            Category::Pe => "pe",
            Category::Cbt => "cbt",
        }
    }
}

impl FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pl" => Ok(Category::Pl),
            "pe" => Ok(Category::Pe),
            "cbt" => Ok(Category::Cbt),
            _ => Err(format!("unknown category `{s}` (expected pl, pe or cbt)")),
        }
    }
}

/// What a pattern node binds besides its kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binder {
    /// The bound CONST must carry exactly this literal.
    Const(i64),
    /// Binds the node's value (literal or variable identity) to a named slot.
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PShape {
    /// `kind: None` is the ANY wildcard.
    Node {
        kind: Option<NodeKind>,
        op: Option<OpCode>,
        binder: Option<Binder>,
    },
    Sub {
        plan: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PNode {
    pub pid: String,
    pub shape: PShape,
}

impl PNode {
    pub fn slot(&self) -> Option<&str> {
        match &self.shape {
            PShape::Node { binder: Some(Binder::Slot(s)), .. } => Some(s),
            _ => None,
        }
    }

    pub fn sub_plan(&self) -> Option<&str> {
        match &self.shape {
            PShape::Sub { plan } => Some(plan),
            PShape::Node { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PDataEdge {
    pub from: String,
    pub out_port: u32,
    pub to: String,
    pub in_port: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PCtrlEdge {
    pub from: String,
    pub to: String,
    /// `None` accepts any label.
    pub label: Option<CtrlLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Eq => "eq",
            CmpOp::Ne => "ne",
            CmpOp::Lt => "lt",
            CmpOp::Le => "le",
            CmpOp::Gt => "gt",
            CmpOp::Ge => "ge",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "",
            CmpOp::Ne => "!= ",
            CmpOp::Lt => "< ",
            CmpOp::Le => "<= ",
            CmpOp::Gt => "> ",
            CmpOp::Ge => ">= ",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Int(i64),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Cmp { op: CmpOp, slot: String, rhs: Operand },
    SameVar(String, String),
    DistinctVar(String, String),
    Commutable(String),
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Cmp { op, slot, rhs } => {
                let rhs = match rhs {
                    Operand::Int(n) => n.to_string(),
                    Operand::Slot(s) => format!("${s}"),
                };
                write!(f, "{}(${}, {})", op.name(), slot, rhs)
            }
            Predicate::SameVar(a, b) => write!(f, "samevar({a}, {b})"),
            Predicate::DistinctVar(a, b) => write!(f, "distinctvar({a}, {b})"),
            Predicate::Commutable(p) => write!(f, "commutable({p})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub name: String,
    pub kind: PlanKind,
    pub corrupts: Option<String>,
    pub category: Category,
    pub doc: String,
    pub pnodes: Vec<PNode>,
    pub data: Vec<PDataEdge>,
    pub ctrl: Vec<PCtrlEdge>,
    pub constraints: Vec<Predicate>,
    /// Role name to pid, in declaration order.
    pub exports: Vec<(String, String)>,
}

impl Plan {
    pub fn pnode(&self, pid: &str) -> Option<&PNode> {
        self.pnodes.iter().find(|p| p.pid == pid)
    }

    pub fn pid_index(&self, pid: &str) -> Option<usize> {
        self.pnodes.iter().position(|p| p.pid == pid)
    }

    pub fn export(&self, role: &str) -> Option<&str> {
        self.exports.iter().find(|(r, _)| r == role).map(|(_, p)| p.as_str())
    }

    pub fn sub_plans(&self) -> impl Iterator<Item = &str> {
        self.pnodes.iter().filter_map(PNode::sub_plan)
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.pnodes.iter().filter_map(PNode::slot)
    }

    /// Pids whose matched nodes mark the fault location of a bug plan.
    pub fn fault_pids(&self) -> Vec<&str> {
        self.exports.iter().filter(|(r, _)| r.starts_with("fault")).map(|(_, p)| p.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("{span}: plan syntax error: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("plan `{plan}`: {message}")]
    Semantic { plan: String, message: String },
    #[error("duplicate plan `{0}`")]
    DuplicatePlan(String),
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
