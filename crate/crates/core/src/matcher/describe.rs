use super::{MatchResult, SlotValue};
use crate::flowgraph::{FlowGraph, NodeKind};
use crate::planlib::template::{interpolate, Marker, TemplateError};
use crate::planlib::Plan;

const UNMATCHED: &str = "(unmatched)";

/// The plan's doc template with `$slot` and `@role` markers filled in from
/// the match: variable names where there are any, literals for constants.
pub fn doc_text(plan: &Plan, m: &MatchResult, g: &FlowGraph) -> Result<String, TemplateError> {
    let slots: Vec<&str> = plan.slots().collect();
    interpolate(&plan.doc, |marker| match marker {
        Marker::Slot(s) => {
            if !slots.contains(&s.as_str()) {
                return None;
            }
            Some(match m.slots.get(s) {
                Some(SlotValue::Int(n)) => n.to_string(),
                Some(SlotValue::Var { var, .. }) => var.clone(),
                Some(SlotValue::Node { .. }) => "an intermediate value".to_string(),
                None => UNMATCHED.to_string(),
            })
        }
        Marker::Role(r) => {
            let pid = plan.export(r)?;
            Some(match m.binding.get(pid) {
                Some(&id) => {
                    let n = g.node(id);
                    match (&n.ann.var_name, n.kind, n.value) {
                        (Some(v), _, _) => v.clone(),
                        (None, NodeKind::Const, Some(v)) => v.to_string(),
                        _ => "an intermediate value".to_string(),
                    }
                }
                None => UNMATCHED.to_string(),
            })
        }
    })
}
