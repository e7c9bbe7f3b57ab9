//! Draft plans generalized from an exemplar program, for an instructor to
//! review before they enter the plan base.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::flowgraph::{build_flow_graph, FlowError, FlowGraph, NodeKind, OpCode, VarId};
use crate::frontend::Ast;
use crate::planlib::{
    check_plan, print_plan, Binder, Category, PCtrlEdge, PDataEdge, PNode, PShape, Plan, PlanError, PlanKind, Predicate,
};

pub const DEFAULT_MAX_NODES: usize = 64;

#[derive(Debug, PartialEq, Error)]
pub enum AcquireError {
    #[error("exemplar graph has {nodes} nodes; drafts are limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("draft is not a valid plan: {0}")]
    Invalid(#[from] PlanError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquireOptions {
    /// Constants kept literal; every other constant becomes a free slot.
    pub keep_literals: Vec<i64>,
    pub max_nodes: usize,
    pub category: Category,
}

impl Default for AcquireOptions {
    fn default() -> Self {
        AcquireOptions { keep_literals: vec![0, 1], max_nodes: DEFAULT_MAX_NODES, category: Category::Pe }
    }
}

pub fn acquire_plan(exemplar: &Ast, name: &str, opts: &AcquireOptions) -> Result<Plan, AcquireError> {
    let g = build_flow_graph(exemplar)?;
    acquire_from_graph(&g, name, opts)
}

pub fn acquire_from_graph(g: &FlowGraph, name: &str, opts: &AcquireOptions) -> Result<Plan, AcquireError> {
    if g.len() > opts.max_nodes {
        return Err(AcquireError::TooLarge { nodes: g.len(), limit: opts.max_nodes });
    }
    let pid = |id: crate::flowgraph::NodeId| {
        let n = g.node(id);
        let stem = match n.op {
            Some(op) => op.as_str(),
            None => n.kind.as_str(),
        };
        format!("{}{}", stem.to_ascii_lowercase(), id.0)
    };

    let mut pnodes = Vec::new();
    let mut constraints = Vec::new();
    let mut next_slot = 0;
    let mut chains: BTreeMap<VarId, Vec<String>> = BTreeMap::new();
    for n in g.nodes() {
        let binder = match (n.kind, n.value) {
            (NodeKind::Const, Some(v)) if opts.keep_literals.contains(&v) => Some(Binder::Const(v)),
            (NodeKind::Const, _) => {
                next_slot += 1;
                Some(Binder::Slot(format!("c{next_slot}")))
            }
            _ => None,
        };
        let p = pid(n.id);
        if matches!(n.op, Some(OpCode::Add | OpCode::Mul)) {
            constraints.push(Predicate::Commutable(p.clone()));
        }
        if let Some(v) = n.ann.var_id {
            chains.entry(v).or_default().push(p.clone());
        }
        pnodes.push(PNode { pid: p, shape: PShape::Node { kind: Some(n.kind), op: n.op, binder } });
    }
    for chain in chains.values() {
        for w in chain.windows(2) {
            constraints.push(Predicate::SameVar(w[0].clone(), w[1].clone()));
        }
    }
    let data = g
        .data_edges()
        .iter()
        .map(|e| PDataEdge { from: pid(e.from), out_port: e.out_port, to: pid(e.to), in_port: e.in_port })
        .collect();
    let ctrl =
        g.ctrl_edges().iter().map(|e| PCtrlEdge { from: pid(e.from), to: pid(e.to), label: Some(e.label) }).collect();

    let plan = Plan {
        name: name.to_string(),
        kind: PlanKind::Cliche,
        corrupts: None,
        category: opts.category,
        doc: format!("TODO: describe {name}"),
        pnodes,
        data,
        ctrl,
        constraints,
        exports: Vec::new(),
    };
    check_plan(&plan)?;
    Ok(plan)
}

/// Canonical plan text with a `; REVIEW:` comment above the doc line and
/// above every node that binds a slot.
pub fn review_stub(p: &Plan) -> String {
    let mut out = String::new();
    for line in print_plan(p).lines() {
        let t = line.trim_start();
        if t.starts_with("doc ") {
            out.push_str("; REVIEW: replace the doc stub with a description; $slot and @role markers are allowed\n");
        } else if t.starts_with("node ") {
            if let Some(slot) = t.split_whitespace().find_map(|w| w.strip_prefix("slot=")) {
                out.push_str(&format!(
                    "; REVIEW: {slot} was generalized from a constant; add a constraint if its value matters\n"
                ));
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}
