use indexmap::IndexMap;

use super::{ConstraintOutcome, MatchResult, SlotValue, Status};
use crate::flowgraph::{FlowGraph, NodeId, NodeKind};
use crate::planlib::{Binder, Operand, PShape, Plan, Predicate};

/// Slot value of a bound node: its literal for CONSTs, else its variable,
/// else the node itself.
pub fn slot_value(g: &FlowGraph, id: NodeId) -> SlotValue {
    let n = g.node(id);
    match (n.kind, n.value, &n.ann.var_name, n.ann.var_id) {
        (NodeKind::Const, Some(v), _, _) => SlotValue::Int(v),
        (_, _, Some(name), Some(var_id)) => SlotValue::Var { var: name.clone(), var_id },
        _ => SlotValue::Node { node: id },
    }
}

fn same_identity(a: &SlotValue, b: &SlotValue) -> bool {
    match (a, b) {
        (SlotValue::Var { var_id: x, .. }, SlotValue::Var { var_id: y, .. }) => x == y,
        _ => a == b,
    }
}

fn describe_node(g: &FlowGraph, id: NodeId) -> String {
    match &g.node(id).ann.var_name {
        Some(v) => v.clone(),
        None => format!("node {id}"),
    }
}

/// Recomputes slot values, constraint outcomes and acceptance of `m`.
pub fn check_constraints(mut m: MatchResult, plan: &Plan, g: &FlowGraph) -> MatchResult {
    let mut slots = IndexMap::new();
    let mut slot_pid = IndexMap::new();
    for p in &plan.pnodes {
        if let PShape::Node { binder: Some(Binder::Slot(s)), .. } = &p.shape {
            slot_pid.insert(s.clone(), p.pid.clone());
            if let Some(&id) = m.binding.get(&p.pid) {
                slots.insert(s.clone(), slot_value(g, id));
            }
        }
    }

    let mut outcomes = Vec::with_capacity(plan.constraints.len());
    for c in &plan.constraints {
        let (status, detail, pids) = match c {
            Predicate::Cmp { op, slot, rhs } => {
                let mut pids = vec![slot_pid[slot].clone()];
                if let Operand::Slot(r) = rhs {
                    pids.push(slot_pid[r].clone());
                }
                let lhs = slots.get(slot);
                let rhs_val = match rhs {
                    Operand::Int(n) => Some(SlotValue::Int(*n)),
                    Operand::Slot(r) => slots.get(r).cloned(),
                };
                let (status, detail) = match (lhs, rhs_val) {
                    (Some(l), Some(r)) => {
                        let holds = match (l.as_int(), r.as_int()) {
                            (Some(a), Some(b)) => op.holds(a, b),
                            _ => match op {
                                crate::planlib::CmpOp::Eq => same_identity(l, &r),
                                crate::planlib::CmpOp::Ne => !same_identity(l, &r),
                                _ => false,
                            },
                        };
                        if holds {
                            (Status::Pass, None)
                        } else {
                            let expected = match rhs {
                                Operand::Int(n) => n.to_string(),
                                Operand::Slot(r_name) => format!("{r_name}={}", r.describe()),
                            };
                            (Status::Fail, Some(format!("{slot}={}, expected {}{expected}", l.describe(), op.symbol())))
                        }
                    }
                    _ => (Status::Unbound, None),
                };
                (status, detail, pids)
            }
            Predicate::SameVar(a, b) | Predicate::DistinctVar(a, b) => {
                let pids = vec![a.clone(), b.clone()];
                match (m.binding.get(a), m.binding.get(b)) {
                    (Some(&x), Some(&y)) => {
                        let (vx, vy) = (g.node(x).ann.var_id, g.node(y).ann.var_id);
                        let same = x == y || (vx.is_some() && vx == vy);
                        let want_same = matches!(c, Predicate::SameVar(..));
                        if same == want_same {
                            (Status::Pass, None, pids)
                        } else {
                            let detail = if want_same {
                                format!("{a} is {}, {b} is {}", describe_node(g, x), describe_node(g, y))
                            } else {
                                format!("{a} and {b} are both {}", describe_node(g, x))
                            };
                            (Status::Fail, Some(detail), pids)
                        }
                    }
                    _ => (Status::Unbound, None, pids),
                }
            }
            Predicate::Commutable(p) => {
                let status = if m.binding.contains_key(p) { Status::Pass } else { Status::Unbound };
                (status, None, vec![p.clone()])
            }
        };
        outcomes.push(ConstraintOutcome { predicate: c.to_string(), status, detail, pids });
    }

    m.accepted = m.is_complete() && outcomes.iter().all(|o| o.status == Status::Pass);
    m.slots = slots;
    m.constraint_outcomes = outcomes;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::build_flow_graph;
    use crate::frontend::{parse_fragment, CSubsetConfig};
    use crate::planlib::parse_plan;

    fn result_for(plan: &Plan, binding: &[(&str, NodeId)]) -> MatchResult {
        MatchResult {
            plan: plan.name.clone(),
            binding: binding.iter().map(|(p, n)| (p.to_string(), *n)).collect(),
            unbound: Vec::new(),
            nodes: binding.iter().map(|(_, n)| *n).collect(),
            shared: Vec::new(),
            slots: IndexMap::new(),
            matched: binding.len() as u32,
            total: plan.pnodes.len() as u32,
            score: binding.len() as f64 / plan.pnodes.len() as f64,
            constraint_outcomes: Vec::new(),
            accepted: false,
            spans: Vec::new(),
        }
    }

    fn first(g: &FlowGraph, f: impl Fn(&crate::flowgraph::GraphNode) -> bool) -> NodeId {
        g.nodes().iter().find(|n| f(n)).unwrap().id
    }

    const INIT: &str =
        "plan \"z\" kind=cliche category=pl\nnode c kind=CONST slot=$init\nconstraint eq($init, 0)\nend\n";

    #[test]
    fn eq_passes_and_fails_with_detail() {
        let plan = parse_plan(INIT).unwrap();
        for (src, want) in [("x=0;", None), ("x=1;", Some("init=1, expected 0"))] {
            let g = build_flow_graph(&parse_fragment(src, &CSubsetConfig::default()).unwrap()).unwrap();
            let c = first(&g, |n| n.kind == NodeKind::Const);
            let m = check_constraints(result_for(&plan, &[("c", c)]), &plan, &g);
            assert_eq!(m.accepted, want.is_none());
            assert_eq!(m.constraint_outcomes[0].detail.as_deref(), want);
        }
    }

    #[test]
    fn samevar_follows_value_chain() {
        let src = "s=0; i=0; while(i<n){s=s+a[i]; i=i+1;}";
        let g = build_flow_graph(&parse_fragment(src, &CSubsetConfig::default()).unwrap()).unwrap();
        let join = |name: &str| first(&g, |n| n.kind == NodeKind::Join && n.ann.var_name.as_deref() == Some(name));
        let step = first(&g, |n| n.op == Some(crate::flowgraph::OpCode::Add) && n.ann.var_name.as_deref() == Some("i"));
        let text = "plan \"v\" kind=cliche category=pl\nnode a kind=ANY\nnode b kind=ANY\nctrl a -> b\nconstraint samevar(a, b)\nend\n";
        let plan = parse_plan(text).unwrap();
        let ok = check_constraints(result_for(&plan, &[("a", join("i")), ("b", step)]), &plan, &g);
        assert_eq!(ok.constraint_outcomes[0].status, Status::Pass);
        let bad = check_constraints(result_for(&plan, &[("a", join("i")), ("b", join("s"))]), &plan, &g);
        assert_eq!(bad.constraint_outcomes[0].status, Status::Fail);
        assert_eq!(bad.constraint_outcomes[0].detail.as_deref(), Some("a is i, b is s"));
    }

    #[test]
    fn unbound_slot_is_not_a_failure() {
        let plan = parse_plan(INIT).unwrap();
        let g = build_flow_graph(&parse_fragment("x=0;", &CSubsetConfig::default()).unwrap()).unwrap();
        let m = check_constraints(result_for(&plan, &[]), &plan, &g);
        assert_eq!(m.constraint_outcomes[0].status, Status::Unbound);
        assert!(!m.accepted);
    }
}
