//! The annotated flow graph: operation nodes connected by ported data edges,
//! threaded on a labelled control skeleton, each node annotated with the
//! source span (and variable, when there is one) it came from.

mod build;
mod dot;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use build::{build_flow_graph, build_flow_graph_lenient, build_function_graph, UnboundRead};
pub use dot::{to_dot, to_json};

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identity of a declared program variable. Stable under consistent renaming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

macro_rules! name_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),* }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),* }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)*
                    _ => Err(format!("unknown {} `{}`", stringify!($name), s)),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
    };
}

name_enum!(NodeKind {
    Entry => "ENTRY",
    Exit => "EXIT",
    Const => "CONST",
    Param => "PARAM",
    Op => "OP",
    Test => "TEST",
    Join => "JOIN",
    LoopHead => "LOOPHEAD",
    Input => "INPUT",
    Output => "OUTPUT",
    ARead => "AREAD",
    AWrite => "AWRITE",
    Call => "CALL",
});

name_enum!(OpCode {
    Add => "ADD",
    Sub => "SUB",
    Mul => "MUL",
    Div => "DIV",
    Mod => "MOD",
    Lt => "LT",
    Le => "LE",
    Gt => "GT",
    Ge => "GE",
    Eq => "EQ",
    Ne => "NE",
    And => "AND",
    Or => "OR",
    Not => "NOT",
    Neg => "NEG",
});

impl OpCode {
    pub fn arity(self) -> u32 {
        match self {
            OpCode::Not | OpCode::Neg => 1,
            _ => 2,
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, OpCode::Add | OpCode::Mul | OpCode::Eq | OpCode::Ne | OpCode::And | OpCode::Or)
    }
}

name_enum!(CtrlLabel {
    Seq => "seq",
    True => "true",
    False => "false",
    Back => "back",
});

impl NodeKind {
    /// Fixed (in, out) data arity; `None` for kinds whose input count varies
    /// with the call site (OUTPUT, CALL) or with the opcode (OP).
    pub fn fixed_arity(self) -> Option<(u32, u32)> {
        match self {
            NodeKind::Entry | NodeKind::Exit => Some((0, 0)),
            NodeKind::Const | NodeKind::Param | NodeKind::Input => Some((0, 1)),
            NodeKind::Test => Some((1, 0)),
            NodeKind::LoopHead => Some((1, 0)),
            NodeKind::Join => Some((2, 1)),
            NodeKind::ARead => Some((2, 1)),
            NodeKind::AWrite => Some((3, 1)),
            NodeKind::Op | NodeKind::Output | NodeKind::Call => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Annotation {
    pub span: SourceSpan,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_id: Option<VarId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<OpCode>,
    /// Literal value of CONST nodes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
    pub in_ports: u32,
    pub out_ports: u32,
    pub ann: Annotation,
}

impl GraphNode {
    pub fn key(&self) -> NodeKey {
        NodeKey { kind: self.kind, op: self.op }
    }
}

/// Index key used to seed pattern matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub kind: NodeKind,
    pub op: Option<OpCode>,
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Some(op) => write!(f, "{}({})", self.kind, op),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DataEdge {
    pub from: NodeId,
    pub out_port: u32,
    pub to: NodeId,
    pub in_port: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CtrlEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: CtrlLabel,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {node} has no {dir} port {port}")]
    BadPort { node: NodeId, dir: &'static str, port: u32 },
    #[error("node {node} input port {port} is bound twice")]
    DoubleBound { node: NodeId, port: u32 },
    #[error("node ids must be dense and ordered (found {0} out of place)")]
    BadIds(NodeId),
}

/// A finalized, immutable flow graph.
#[derive(Debug, Clone, Serialize)]
pub struct FlowGraph {
    nodes: Vec<GraphNode>,
    data_edges: Vec<DataEdge>,
    ctrl_edges: Vec<CtrlEdge>,
    entry: NodeId,
    exit: NodeId,
    #[serde(skip)]
    data_in: Vec<Vec<Option<(NodeId, u32)>>>,
    #[serde(skip)]
    data_out: Vec<Vec<DataEdge>>,
    #[serde(skip)]
    ctrl_out: Vec<Vec<CtrlEdge>>,
    #[serde(skip)]
    ctrl_in: Vec<Vec<CtrlEdge>>,
}

impl FlowGraph {
    /// Assembles a graph from raw parts, checking ids and port ranges only.
    /// Structural well-formedness is reported separately by [`FlowGraph::check_well_formed`].
    pub fn from_parts(
        nodes: Vec<GraphNode>,
        mut data_edges: Vec<DataEdge>,
        mut ctrl_edges: Vec<CtrlEdge>,
        entry: NodeId,
        exit: NodeId,
    ) -> Result<FlowGraph, GraphError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id.index() != i {
                return Err(GraphError::BadIds(n.id));
            }
        }
        let known = |id: NodeId| if id.index() < nodes.len() { Ok(()) } else { Err(GraphError::UnknownNode(id)) };
        known(entry)?;
        known(exit)?;
        data_edges.sort();
        data_edges.dedup();
        ctrl_edges.sort();
        ctrl_edges.dedup();
        let mut data_in: Vec<Vec<Option<(NodeId, u32)>>> =
            nodes.iter().map(|n| vec![None; n.in_ports as usize]).collect();
        let mut data_out = vec![Vec::new(); nodes.len()];
        for e in &data_edges {
            known(e.from)?;
            known(e.to)?;
            if e.out_port >= nodes[e.from.index()].out_ports {
                return Err(GraphError::BadPort { node: e.from, dir: "output", port: e.out_port });
            }
            let slot = data_in[e.to.index()].get_mut(e.in_port as usize).ok_or(GraphError::BadPort {
                node: e.to,
                dir: "input",
                port: e.in_port,
            })?;
            if slot.is_some() {
                return Err(GraphError::DoubleBound { node: e.to, port: e.in_port });
            }
            *slot = Some((e.from, e.out_port));
            data_out[e.from.index()].push(*e);
        }
        let mut ctrl_out = vec![Vec::new(); nodes.len()];
        let mut ctrl_in = vec![Vec::new(); nodes.len()];
        for e in &ctrl_edges {
            known(e.from)?;
            known(e.to)?;
            ctrl_out[e.from.index()].push(*e);
            ctrl_in[e.to.index()].push(*e);
        }
        Ok(FlowGraph { nodes, data_edges, ctrl_edges, entry, exit, data_in, data_out, ctrl_out, ctrl_in })
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &GraphNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn data_edges(&self) -> &[DataEdge] {
        &self.data_edges
    }

    pub fn ctrl_edges(&self) -> &[CtrlEdge] {
        &self.ctrl_edges
    }

    pub fn entry(&self) -> NodeId {
        self.entry
    }

    pub fn exit(&self) -> NodeId {
        self.exit
    }

    /// Source feeding `node`'s input `port`.
    pub fn feeder(&self, node: NodeId, port: u32) -> Option<(NodeId, u32)> {
        self.data_in[node.index()].get(port as usize).copied().flatten()
    }

    /// Outgoing data edges of `node`, sorted.
    pub fn data_out(&self, node: NodeId) -> &[DataEdge] {
        &self.data_out[node.index()]
    }

    pub fn has_data_edge(&self, from: NodeId, out_port: u32, to: NodeId, in_port: u32) -> bool {
        self.feeder(to, in_port) == Some((from, out_port))
    }

    pub fn ctrl_out(&self, node: NodeId) -> &[CtrlEdge] {
        &self.ctrl_out[node.index()]
    }

    pub fn ctrl_in(&self, node: NodeId) -> &[CtrlEdge] {
        &self.ctrl_in[node.index()]
    }

    pub fn has_ctrl_edge(&self, from: NodeId, to: NodeId, label: Option<CtrlLabel>) -> bool {
        self.ctrl_out[from.index()].iter().any(|e| e.to == to && label.is_none_or(|l| l == e.label))
    }

    /// Index from node key to ascending node ids. Every node appears under
    /// exactly one key.
    pub fn node_index(&self) -> BTreeMap<NodeKey, Vec<NodeId>> {
        let mut idx: BTreeMap<NodeKey, Vec<NodeId>> = BTreeMap::new();
        for n in &self.nodes {
            idx.entry(n.key()).or_default().push(n.id);
        }
        idx
    }

    /// Lists every violated well-formedness invariant; empty for a finalized graph.
    pub fn check_well_formed(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for n in &self.nodes {
            let expected = match (n.kind.fixed_arity(), n.op) {
                (Some(a), _) => Some(a),
                (None, Some(op)) if n.kind == NodeKind::Op => Some((op.arity(), 1)),
                (None, _) if n.kind == NodeKind::Op => None,
                (None, _) if n.kind == NodeKind::Output => Some((n.in_ports, 0)),
                (None, _) => Some((n.in_ports, 1)),
            };
            if expected != Some((n.in_ports, n.out_ports)) {
                problems.push(format!("node {} ({}) has arity {}/{}", n.id, n.kind, n.in_ports, n.out_ports));
            }
            if (n.kind == NodeKind::Op) != n.op.is_some() {
                problems.push(format!("node {} opcode presence does not match kind {}", n.id, n.kind));
            }
            if (n.kind == NodeKind::Const) != n.value.is_some() {
                problems.push(format!("node {} literal presence does not match kind {}", n.id, n.kind));
            }
            for (port, src) in self.data_in[n.id.index()].iter().enumerate() {
                if src.is_none() {
                    problems.push(format!("node {} input {} is unbound", n.id, port));
                }
            }
        }

        // Data cycles must go through a loop JOIN's back input.
        let is_loop_join = |id: NodeId| {
            self.node(id).kind == NodeKind::Join
                && self.ctrl_in(id).iter().any(|e| self.node(e.from).kind == NodeKind::LoopHead)
        };
        let mut indeg = vec![0usize; self.nodes.len()];
        let forward: Vec<&DataEdge> =
            self.data_edges.iter().filter(|e| !(e.in_port == 1 && is_loop_join(e.to))).collect();
        for e in &forward {
            indeg[e.to.index()] += 1;
        }
        let mut queue: VecDeque<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for e in forward.iter().filter(|e| e.from.index() == i) {
                indeg[e.to.index()] -= 1;
                if indeg[e.to.index()] == 0 {
                    queue.push_back(e.to.index());
                }
            }
        }
        if seen != self.nodes.len() {
            problems.push("data edges contain a cycle not closed by a loop JOIN".into());
        }

        let reach = |start: NodeId, forward: bool| {
            let mut seen = vec![false; self.nodes.len()];
            let mut stack = vec![start];
            seen[start.index()] = true;
            while let Some(n) = stack.pop() {
                let next: Vec<NodeId> = if forward {
                    self.ctrl_out(n).iter().map(|e| e.to).collect()
                } else {
                    self.ctrl_in(n).iter().map(|e| e.from).collect()
                };
                for m in next {
                    if !seen[m.index()] {
                        seen[m.index()] = true;
                        stack.push(m);
                    }
                }
            }
            seen
        };
        let from_entry = reach(self.entry, true);
        let to_exit = reach(self.exit, false);
        for n in &self.nodes {
            if !from_entry[n.id.index()] {
                problems.push(format!("node {} unreachable from entry", n.id));
            }
            if !to_exit[n.id.index()] {
                problems.push(format!("exit unreachable from node {}", n.id));
            }
        }

        for n in self.nodes.iter().filter(|n| n.kind == NodeKind::LoopHead) {
            let backs = self.ctrl_in(n.id).iter().filter(|e| e.label == CtrlLabel::Back).count();
            if backs != 1 {
                problems.push(format!("loop head {} has {} back edges", n.id, backs));
            }
        }
        for e in self.ctrl_edges.iter().filter(|e| e.label == CtrlLabel::Back) {
            if self.node(e.to).kind != NodeKind::LoopHead {
                problems.push(format!("back edge {} -> {} does not target a loop head", e.from, e.to));
            }
        }
        problems
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("{span}: variable `{name}` may be read before it is assigned")]
    UnboundVariable { name: String, span: SourceSpan },
    #[error("{0}: `for` loops must be desugared before graph construction")]
    NotDesugared(SourceSpan),
    #[error("no function named `{0}`")]
    NoFunction(String),
}
