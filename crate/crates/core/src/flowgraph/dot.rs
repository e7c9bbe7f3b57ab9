use std::fmt::Write;

use super::FlowGraph;

/// Graphviz rendering, one line per node and per edge, ordered by node id.
pub fn to_dot(g: &FlowGraph) -> String {
    let mut out = String::from("digraph flow {\n");
    for n in g.nodes() {
        let mut label = format!("{}: {}", n.id, n.kind);
        if let Some(op) = n.op {
            let _ = write!(label, " {op}");
        }
        if let Some(v) = n.value {
            let _ = write!(label, " {v}");
        }
        if let Some(name) = &n.ann.var_name {
            let _ = write!(label, " [{name}]");
        }
        let _ = write!(label, " L{}", n.ann.span.line_start);
        let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, escape(&label));
    }
    for e in g.data_edges() {
        let _ = writeln!(out, "  n{} -> n{} [label=\"{}:{}\"];", e.from, e.to, e.out_port, e.in_port);
    }
    for e in g.ctrl_edges() {
        let _ = writeln!(out, "  n{} -> n{} [style=dashed, label=\"{}\"];", e.from, e.to, e.label);
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Structured dump: nodes, data edges and control edges in id order.
pub fn to_json(g: &FlowGraph) -> String {
    serde_json::to_string_pretty(g).expect("graph serialization cannot fail")
}
