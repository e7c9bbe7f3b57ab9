#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use adil::flowgraph::{
    Annotation, CtrlEdge, CtrlLabel, DataEdge, FlowGraph, GraphNode, NodeId, NodeKind, OpCode, VarId,
};
use adil::planlib::{
    check_plan, Binder, Category, CmpOp, Operand, PCtrlEdge, PDataEdge, PNode, PShape, Plan, PlanKind, Predicate,
};
use adil::SourceSpan;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn plans_dir() -> PathBuf {
    workspace_root().join("plans")
}

pub fn corpus_dir() -> PathBuf {
    workspace_root().join("corpus")
}

const KINDS: [NodeKind; 6] =
    [NodeKind::Const, NodeKind::Op, NodeKind::Join, NodeKind::ARead, NodeKind::Input, NodeKind::Test];
const OPS: [OpCode; 4] = [OpCode::Add, OpCode::Sub, OpCode::Mul, OpCode::Lt];
const LABELS: [CtrlLabel; 4] = [CtrlLabel::Seq, CtrlLabel::True, CtrlLabel::False, CtrlLabel::Back];

fn arity(kind: NodeKind, op: Option<OpCode>) -> (u32, u32) {
    match (kind.fixed_arity(), op) {
        (Some(a), _) => a,
        (None, Some(op)) => (op.arity(), 1),
        (None, None) => (2, 1),
    }
}

/// A random graph with a small node alphabet so that patterns match often.
/// It only satisfies the port invariants, which is all the matcher needs.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> FlowGraph {
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let kind = *KINDS.choose(rng).unwrap();
        let op = (kind == NodeKind::Op).then(|| *OPS.choose(rng).unwrap());
        let value = (kind == NodeKind::Const).then(|| rng.gen_range(0..3));
        let (in_ports, out_ports) = arity(kind, op);
        let var = rng.gen_bool(0.5).then(|| rng.gen_range(0..3u32));
        let line = i as u32 + 1;
        nodes.push(GraphNode {
            id: NodeId(i as u32),
            kind,
            op,
            value,
            in_ports,
            out_ports,
            ann: Annotation {
                span: SourceSpan::new("gen.c".into(), line, 1, line, 1),
                var_name: var.map(|v| format!("v{v}")),
                var_id: var.map(VarId),
                role: None,
            },
        });
    }
    let sources: Vec<u32> = nodes.iter().filter(|n| n.out_ports > 0).map(|n| n.id.0).collect();
    let mut data = Vec::new();
    if !sources.is_empty() {
        for node in &nodes {
            for port in 0..node.in_ports {
                if rng.gen_bool(0.85) {
                    let from = *sources.choose(rng).unwrap();
                    data.push(DataEdge { from: NodeId(from), out_port: 0, to: node.id, in_port: port });
                }
            }
        }
    }
    let mut ctrl = Vec::new();
    for _ in 0..n {
        let from = NodeId(rng.gen_range(0..n as u32));
        let to = NodeId(rng.gen_range(0..n as u32));
        ctrl.push(CtrlEdge { from, to, label: *LABELS.choose(rng).unwrap() });
    }
    FlowGraph::from_parts(nodes, data, ctrl, NodeId(0), NodeId(n as u32 - 1)).unwrap()
}

fn neighbours(g: &FlowGraph, id: NodeId) -> Vec<NodeId> {
    let mut v: Vec<NodeId> = g.data_out(id).iter().map(|e| e.to).collect();
    v.extend((0..g.node(id).in_ports).filter_map(|p| g.feeder(id, p)).map(|(f, _)| f));
    v.extend(g.ctrl_out(id).iter().map(|e| e.to));
    v.extend(g.ctrl_in(id).iter().map(|e| e.from));
    v.sort();
    v.dedup();
    v
}

/// A plan without sub-plans, abstracted from a random connected piece of
/// `g` and then randomly loosened or perturbed.
pub fn random_plan(rng: &mut ChaCha8Rng, g: &FlowGraph, max_pnodes: usize, name: &str) -> Option<Plan> {
    let target = rng.gen_range(1..=max_pnodes);
    let mut picked = vec![NodeId(rng.gen_range(0..g.len() as u32))];
    while picked.len() < target {
        let frontier: Vec<NodeId> =
            picked.iter().flat_map(|&p| neighbours(g, p)).filter(|n| !picked.contains(n)).collect();
        match frontier.choose(rng) {
            Some(&n) => picked.push(n),
            None => break,
        }
    }
    let pid = |id: NodeId| format!("p{}", id.0);
    let mut pnodes = Vec::new();
    let mut slot_of = BTreeMap::new();
    for &id in &picked {
        let n = g.node(id);
        let mut kind = rng.gen_bool(0.85).then_some(n.kind);
        if rng.gen_bool(0.05) {
            kind = Some(*KINDS.choose(rng).unwrap());
        }
        let op = match kind {
            Some(NodeKind::Op) if n.op.is_some() && rng.gen_bool(0.85) => n.op,
            Some(NodeKind::Op) => Some(*OPS.choose(rng).unwrap()),
            None if rng.gen_bool(0.1) => Some(*OPS.choose(rng).unwrap()),
            _ => None,
        };
        let binder = if (kind == Some(NodeKind::Const) || kind.is_none()) && rng.gen_bool(0.35) {
            Some(Binder::Const(n.value.unwrap_or(0) + i64::from(rng.gen_bool(0.15))))
        } else if rng.gen_bool(0.3) {
            let s = format!("s{}", slot_of.len());
            slot_of.insert(pid(id), s.clone());
            Some(Binder::Slot(s))
        } else {
            None
        };
        pnodes.push(PNode { pid: pid(id), shape: PShape::Node { kind, op, binder } });
    }
    let set: BTreeSet<NodeId> = picked.iter().copied().collect();
    let mut data = Vec::new();
    for e in g.data_edges() {
        if set.contains(&e.from) && set.contains(&e.to) && rng.gen_bool(0.8) {
            data.push(PDataEdge { from: pid(e.from), out_port: e.out_port, to: pid(e.to), in_port: e.in_port });
        }
    }
    let mut ctrl = Vec::new();
    for e in g.ctrl_edges() {
        if set.contains(&e.from) && set.contains(&e.to) && rng.gen_bool(0.6) {
            let label = rng.gen_bool(0.7).then_some(e.label);
            ctrl.push(PCtrlEdge { from: pid(e.from), to: pid(e.to), label });
        }
    }
    let mut constraints = Vec::new();
    let slots: Vec<String> = slot_of.values().cloned().collect();
    for s in &slots {
        if rng.gen_bool(0.4) {
            let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).unwrap();
            let rhs = if slots.len() > 1 && rng.gen_bool(0.3) {
                Operand::Slot(slots.choose(rng).unwrap().clone())
            } else {
                Operand::Int(rng.gen_range(0..3))
            };
            constraints.push(Predicate::Cmp { op, slot: s.clone(), rhs });
        }
    }
    let pids: Vec<String> = pnodes.iter().map(|p| p.pid.clone()).collect();
    if pids.len() > 1 && rng.gen_bool(0.4) {
        let a = pids.choose(rng).unwrap().clone();
        let b = pids.choose(rng).unwrap().clone();
        constraints.push(if rng.gen_bool(0.5) { Predicate::SameVar(a, b) } else { Predicate::DistinctVar(a, b) });
    }
    for p in &pnodes {
        if let PShape::Node { kind: Some(NodeKind::Op) | None, .. } = p.shape {
            if rng.gen_bool(0.5) {
                constraints.push(Predicate::Commutable(p.pid.clone()));
            }
        }
    }
    let plan = Plan {
        name: name.to_string(),
        kind: PlanKind::Cliche,
        corrupts: None,
        category: Category::Pe,
        doc: String::new(),
        pnodes,
        data,
        ctrl,
        constraints,
        exports: Vec::new(),
    };
    check_plan(&plan).ok().map(|_| plan)
}

/// `random_plan` plus the metadata a shipped plan carries: kind, category,
/// doc markers, exports and a sub-plan node.
pub fn random_decorated_plan(rng: &mut ChaCha8Rng, g: &FlowGraph, name: &str) -> Option<Plan> {
    let mut p = random_plan(rng, g, 6, name)?;
    p.category = *[Category::Pl, Category::Pe, Category::Cbt].choose(rng).unwrap();
    if rng.gen_bool(0.4) {
        p.kind = PlanKind::Bug;
        p.corrupts = Some("some-cliche".into());
    }
    let pids: Vec<String> = p.pnodes.iter().map(|n| n.pid.clone()).collect();
    let roles = ["result", "fault", "counter"];
    for (i, role) in roles.iter().enumerate().take(rng.gen_range(0..=pids.len().min(3))) {
        p.exports.push((role.to_string(), pids[i].clone()));
    }
    let mut doc = String::from("a \"quoted\" description");
    if let Some(s) = p.slots().next() {
        doc.push_str(&format!(" with ${s}"));
    }
    if let Some((r, _)) = p.exports.first() {
        doc.push_str(&format!(" of @{r}"));
    }
    p.doc = doc;
    if rng.gen_bool(0.5) {
        p.pnodes.push(PNode { pid: "inner".into(), shape: PShape::Sub { plan: "other-plan".into() } });
        p.ctrl.push(PCtrlEdge { from: "inner".into(), to: pids[0].clone(), label: None });
    }
    check_plan(&p).ok().map(|_| p)
}

/// Every injective assignment of the plan's pattern nodes to graph nodes
/// that preserves node shape, data and control edges and satisfies every
/// constraint, found by exhaustive enumeration.
pub fn brute_force_matches(g: &FlowGraph, plan: &Plan) -> BTreeSet<Vec<(String, NodeId)>> {
    let fits: Vec<Vec<NodeId>> =
        plan.pnodes.iter().map(|p| g.nodes().iter().filter(|n| fits(n, &p.shape)).map(|n| n.id).collect()).collect();
    let mut out = BTreeSet::new();
    let mut assign = Vec::new();
    enumerate(g, plan, &fits, &mut assign, &mut out);
    out
}

fn fits(n: &GraphNode, shape: &PShape) -> bool {
    let PShape::Node { kind, op, binder } = shape else { return false };
    if let Some(k) = kind {
        if n.kind != *k {
            return false;
        }
    }
    if let Some(o) = op {
        if n.op != Some(*o) {
            return false;
        }
    }
    match binder {
        Some(Binder::Const(v)) => n.kind == NodeKind::Const && n.value == Some(*v),
        _ => true,
    }
}

fn enumerate(
    g: &FlowGraph,
    plan: &Plan,
    fits: &[Vec<NodeId>],
    assign: &mut Vec<NodeId>,
    out: &mut BTreeSet<Vec<(String, NodeId)>>,
) {
    let i = assign.len();
    if i == plan.pnodes.len() {
        let m: BTreeMap<&str, NodeId> =
            plan.pnodes.iter().map(|p| p.pid.as_str()).zip(assign.iter().copied()).collect();
        if edges_hold(g, plan, &m) && constraints_hold(g, plan, &m) {
            out.insert(m.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
        }
        return;
    }
    for &c in &fits[i] {
        if assign.contains(&c) {
            continue;
        }
        assign.push(c);
        enumerate(g, plan, fits, assign, out);
        assign.pop();
    }
}

fn edges_hold(g: &FlowGraph, plan: &Plan, m: &BTreeMap<&str, NodeId>) -> bool {
    let commutable: BTreeSet<&str> = plan
        .constraints
        .iter()
        .filter_map(|c| match c {
            Predicate::Commutable(p) => Some(p.as_str()),
            _ => None,
        })
        .collect();
    // Edges into one node must all hold under the same operand order.
    for p in &plan.pnodes {
        let into: Vec<&PDataEdge> = plan.data.iter().filter(|e| e.to == p.pid).collect();
        let dst = m[p.pid.as_str()];
        let node = g.node(dst);
        let direct = into.iter().all(|e| g.has_data_edge(m[e.from.as_str()], e.out_port, dst, e.in_port));
        let may_swap = commutable.contains(p.pid.as_str())
            && node.in_ports == 2
            && matches!(node.op, Some(OpCode::Add | OpCode::Mul | OpCode::Eq | OpCode::Ne | OpCode::And | OpCode::Or));
        let swapped = may_swap
            && into
                .iter()
                .all(|e| e.in_port < 2 && g.has_data_edge(m[e.from.as_str()], e.out_port, dst, 1 - e.in_port));
        if !direct && !swapped {
            return false;
        }
    }
    plan.ctrl.iter().all(|e| {
        let (a, b) = (m[e.from.as_str()], m[e.to.as_str()]);
        g.ctrl_out(a).iter().any(|c| c.to == b && e.label.is_none_or(|l| l == c.label))
    })
}

#[derive(PartialEq)]
enum Val {
    Int(i64),
    Var(VarId),
    Node(NodeId),
}

fn val(g: &FlowGraph, id: NodeId) -> Val {
    let n = g.node(id);
    if n.kind == NodeKind::Const {
        return Val::Int(n.value.unwrap());
    }
    match (&n.ann.var_name, n.ann.var_id) {
        (Some(_), Some(v)) => Val::Var(v),
        _ => Val::Node(id),
    }
}

fn constraints_hold(g: &FlowGraph, plan: &Plan, m: &BTreeMap<&str, NodeId>) -> bool {
    let slot_node: BTreeMap<&str, NodeId> = plan
        .pnodes
        .iter()
        .filter_map(|p| match &p.shape {
            PShape::Node { binder: Some(Binder::Slot(s)), .. } => Some((s.as_str(), m[p.pid.as_str()])),
            _ => None,
        })
        .collect();
    plan.constraints.iter().all(|c| match c {
        Predicate::Cmp { op, slot, rhs } => {
            let l = val(g, slot_node[slot.as_str()]);
            let r = match rhs {
                Operand::Int(n) => Val::Int(*n),
                Operand::Slot(s) => val(g, slot_node[s.as_str()]),
            };
            match (&l, &r, op) {
                (Val::Int(a), Val::Int(b), _) => match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                },
                (_, _, CmpOp::Eq) => l == r,
                (_, _, CmpOp::Ne) => l != r,
                _ => false,
            }
        }
        Predicate::SameVar(a, b) | Predicate::DistinctVar(a, b) => {
            let (x, y) = (m[a.as_str()], m[b.as_str()]);
            let (vx, vy) = (g.node(x).ann.var_id, g.node(y).ann.var_id);
            let same = x == y || (vx.is_some() && vx == vy);
            same == matches!(c, Predicate::SameVar(..))
        }
        Predicate::Commutable(_) => true,
    })
}

/// Consistently renames every identifier of a C program that is not a
/// keyword or library name.
pub fn rename_identifiers(src: &str) -> String {
    const KEEP: [&str; 9] = ["int", "while", "for", "if", "else", "return", "main", "scanf", "printf"];
    let mut out = String::new();
    let mut chars = src.chars().peekable();
    let mut in_string = false;
    let mut in_comment = false;
    while let Some(c) = chars.next() {
        if in_comment {
            out.push(c);
            if c == '*' && chars.peek() == Some(&'/') {
                out.push(chars.next().unwrap());
                in_comment = false;
            }
            continue;
        }
        if in_string {
            out.push(c);
            if c == '\\' {
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            '/' if chars.peek() == Some(&'*') => {
                in_comment = true;
                out.push(c);
            }
            '#' => {
                out.push(c);
                for n in chars.by_ref() {
                    out.push(n);
                    if n == '\n' {
                        break;
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = c.to_string();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        word.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if KEEP.contains(&word.as_str()) {
                    out.push_str(&word);
                } else {
                    out.push_str(&format!("zz_{word}_1"));
                }
            }
            c => out.push(c),
        }
    }
    out
}

/// Changes layout without changing tokens: operators spaced differently,
/// indentation replaced, blank lines added at the end.
pub fn permute_whitespace(src: &str) -> String {
    let mut out = String::new();
    for line in src.lines() {
        let t = line.trim_start();
        let depth = (line.len() - t.len()) / 4;
        let body = if t.starts_with('#') || t.contains('"') {
            t.to_string()
        } else {
            t.replace(" = ", "=").replace(" + ", "  +  ").replace(" < ", "<").replace(", ", " ,")
        };
        out.push_str(&"\t".repeat(depth));
        out.push_str(&body);
        out.push_str("   \n");
    }
    out.push_str("\n\n");
    out
}

pub fn load_base() -> adil::planlib::PlanBase {
    adil::planlib::PlanBase::load_dir(&plans_dir()).unwrap()
}

/// Runs the whole pipeline on program text, as `adil analyze` does.
pub fn analyze_source(
    src: &str,
    file: &str,
    spec: &adil::debugger::ProgramSpec,
    base: &adil::planlib::PlanBase,
    budget: &adil::matcher::SearchBudget,
    jobs: usize,
) -> adil::debugger::DiagnosticReport {
    use adil::frontend::{desugar, parse_c_file, CSubsetConfig};
    let ast = desugar(&parse_c_file(src, file, &CSubsetConfig::default()).unwrap());
    let (g, unbound_reads) = adil::flowgraph::build_flow_graph_lenient(&ast).unwrap();
    let opts = adil::debugger::DiagnoseOptions { program: file.to_string(), jobs, unbound_reads };
    adil::debugger::diagnose(&g, spec, base, budget, &opts).unwrap()
}

/// Seeded-bug manifest entry.
#[derive(Debug, Clone)]
pub struct Seed {
    pub program: PathBuf,
    pub correct: PathBuf,
    pub spec: PathBuf,
    pub line: u32,
    pub edit: String,
}

pub fn manifest() -> Vec<Seed> {
    let dir = corpus_dir();
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_array()
        .unwrap()
        .iter()
        .map(|e| Seed {
            program: dir.join(e["program"].as_str().unwrap()),
            correct: dir.join(e["correct"].as_str().unwrap()),
            spec: dir.join(e["spec"].as_str().unwrap()),
            line: e["line"].as_u64().unwrap() as u32,
            edit: e["edit"].as_str().unwrap().to_string(),
        })
        .collect()
}

/// Correct corpus programs paired with their specs, sorted.
pub fn correct_programs() -> Vec<(PathBuf, PathBuf)> {
    let dir = corpus_dir().join("correct");
    let mut v: Vec<(PathBuf, PathBuf)> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .map(|p| {
            let spec = p.with_extension("spec");
            (p, spec)
        })
        .collect();
    v.sort();
    v
}

pub fn read_spec(path: &Path) -> adil::debugger::ProgramSpec {
    adil::debugger::parse_spec_file(&std::fs::read_to_string(path).unwrap(), &path.display().to_string()).unwrap()
}

/// Straight-line program with `n` four-term sums: many ADD nodes over
/// many interchangeable operands.
pub fn dense_program(n: usize) -> String {
    let mut s = String::from("int main() {\n    int r;\n    r = 0;\n");
    for i in 0..n {
        s.push_str(&format!("    r = r + {} + {} + {} + {};\n", i * 4 + 2, i * 4 + 3, i * 4 + 4, i * 4 + 5));
    }
    s.push_str("    return r;\n}\n");
    s
}

/// Chain of commutable additions over wildcard operands.
pub const DENSE_PLAN: &str = r#"
plan "add-chain" kind=cliche category=pe
node x kind=ANY
node y kind=ANY
node a kind=OP op=ADD
node z kind=ANY
node b kind=OP op=ADD
node w kind=ANY
node c kind=OP op=ADD
data x:0 -> a:0
data y:0 -> a:1
data a:0 -> b:0
data z:0 -> b:1
data b:0 -> c:0
data w:0 -> c:1
constraint commutable(a)
constraint commutable(b)
constraint commutable(c)
end
"#;
