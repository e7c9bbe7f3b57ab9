//! Lowering of a while-normal AST to the flow graph.
//!
//! Values are threaded SSA-style: an assignment rebinds the variable to the
//! node computing its value, branches merge through JOIN nodes, and loops get a
//! LOOPHEAD followed by one JOIN per loop-carried variable. Every node is
//! placed on the control skeleton in evaluation order.

use std::collections::HashSet;

use super::*;
use crate::frontend::ast::*;

/// A read of a variable that is unassigned on some path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnboundRead {
    pub name: String,
    pub span: SourceSpan,
    /// Placeholder node standing in for the missing value.
    pub node: NodeId,
}

/// Builds the graph of `main`, failing on the first possibly-unbound read.
pub fn build_flow_graph(ast: &Ast) -> Result<FlowGraph, FlowError> {
    build_function_graph(ast, "main", false).map(|(g, _)| g)
}

/// Builds the graph of `main`, materialising possibly-unbound reads as
/// placeholder PARAM nodes (role `undefined`) and reporting them.
pub fn build_flow_graph_lenient(ast: &Ast) -> Result<(FlowGraph, Vec<UnboundRead>), FlowError> {
    build_function_graph(ast, "main", true)
}

pub fn build_function_graph(ast: &Ast, name: &str, lenient: bool) -> Result<(FlowGraph, Vec<UnboundRead>), FlowError> {
    let func = ast.function(name).ok_or_else(|| FlowError::NoFunction(name.to_string()))?;
    let mut b = Builder {
        nodes: Vec::new(),
        data: Vec::new(),
        ctrl: Vec::new(),
        pending: Vec::new(),
        scopes: vec![Vec::new()],
        env: Vec::new(),
        lenient,
        unbound: Vec::new(),
    };
    let entry = b.node(NodeKind::Entry, None, None, 0, 0, func.name_span.clone(), None);
    for p in &func.params {
        let var = b.declare(&p.name);
        let id = b.node(NodeKind::Param, None, None, 0, 1, p.span.clone(), Some("param".into()));
        b.bind(var, &p.name, id);
    }
    b.block(&func.body)?;
    let close = func.body.span.clone();
    let exit_span = SourceSpan::new(close.file.clone(), close.line_end, close.col_end, close.line_end, close.col_end);
    let exit = b.node(NodeKind::Exit, None, None, 0, 0, exit_span, None);
    let graph =
        FlowGraph::from_parts(b.nodes, b.data, b.ctrl, entry, exit).expect("builder produced an inconsistent graph");
    Ok((graph, b.unbound))
}

struct Builder {
    nodes: Vec<GraphNode>,
    data: Vec<DataEdge>,
    ctrl: Vec<CtrlEdge>,
    /// Control predecessors of the next node.
    pending: Vec<(NodeId, CtrlLabel)>,
    scopes: Vec<Vec<(String, VarId)>>,
    /// Current value of each variable; `None` when unassigned on some path.
    env: Vec<Option<NodeId>>,
    lenient: bool,
    unbound: Vec<UnboundRead>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn node(
        &mut self,
        kind: NodeKind,
        op: Option<OpCode>,
        value: Option<i64>,
        in_ports: u32,
        out_ports: u32,
        span: SourceSpan,
        role: Option<String>,
    ) -> NodeId {
        let preds = std::mem::take(&mut self.pending);
        let id = self.detached(kind, op, value, in_ports, out_ports, span, role, &preds);
        self.pending = vec![(id, CtrlLabel::Seq)];
        id
    }

    /// Creates a node with explicit control predecessors, leaving `pending` alone.
    #[allow(clippy::too_many_arguments)]
    fn detached(
        &mut self,
        kind: NodeKind,
        op: Option<OpCode>,
        value: Option<i64>,
        in_ports: u32,
        out_ports: u32,
        span: SourceSpan,
        role: Option<String>,
        preds: &[(NodeId, CtrlLabel)],
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(GraphNode {
            id,
            kind,
            op,
            value,
            in_ports,
            out_ports,
            ann: Annotation { span, var_name: None, var_id: None, role },
        });
        for &(from, label) in preds {
            self.ctrl.push(CtrlEdge { from, to: id, label });
        }
        id
    }

    fn edge(&mut self, from: NodeId, to: NodeId, in_port: u32) {
        self.data.push(DataEdge { from, out_port: 0, to, in_port });
    }

    fn declare(&mut self, name: &str) -> VarId {
        let id = VarId(self.env.len() as u32);
        self.env.push(None);
        self.scopes.last_mut().unwrap().push((name.to_string(), id));
        id
    }

    fn resolve(&self, name: &str) -> VarId {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v))
            .expect("parser guarantees declared identifiers")
    }

    fn bind(&mut self, var: VarId, name: &str, node: NodeId) {
        self.env[var.0 as usize] = Some(node);
        let ann = &mut self.nodes[node.index()].ann;
        if ann.var_name.is_none() {
            ann.var_name = Some(name.to_string());
            ann.var_id = Some(var);
        }
    }

    fn read(&mut self, name: &str, span: &SourceSpan) -> Result<NodeId, FlowError> {
        let var = self.resolve(name);
        if let Some(n) = self.env[var.0 as usize] {
            return Ok(n);
        }
        if !self.lenient {
            return Err(FlowError::UnboundVariable { name: name.to_string(), span: span.clone() });
        }
        let node = self.node(NodeKind::Param, None, None, 0, 1, span.clone(), Some("undefined".into()));
        self.bind(var, name, node);
        self.unbound.push(UnboundRead { name: name.to_string(), span: span.clone(), node });
        Ok(node)
    }

    fn block(&mut self, b: &Block) -> Result<(), FlowError> {
        self.scopes.push(Vec::new());
        for s in &b.stmts {
            self.stmt(s)?;
        }
        self.scopes.pop();
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), FlowError> {
        match &s.kind {
            StmtKind::Decl(ds) => {
                for d in ds {
                    if let Some(init) = &d.init {
                        // The initializer is evaluated before the name is in scope.
                        let v = self.expr(init)?;
                        let var = self.declare(&d.name);
                        self.bind(var, &d.name, v);
                    } else {
                        let var = self.declare(&d.name);
                        if let Some(&size) = d.sizes.first() {
                            let n = self.node(
                                NodeKind::Const,
                                None,
                                Some(size),
                                0,
                                1,
                                d.span.clone(),
                                Some("array".into()),
                            );
                            self.bind(var, &d.name, n);
                        }
                    }
                }
            }
            StmtKind::Assign { target, value } => {
                if target.indices.is_empty() {
                    let v = self.expr(value)?;
                    let var = self.resolve(&target.name);
                    self.bind(var, &target.name, v);
                } else {
                    let idx = self.exprs(&target.indices)?;
                    let v = self.expr(value)?;
                    self.store(target, idx, v)?;
                }
            }
            StmtKind::If { cond, then_branch, else_branch } => self.if_stmt(cond, then_branch, else_branch.as_ref())?,
            StmtKind::While { keyword, cond, body } => self.while_stmt(keyword, cond, body)?,
            StmtKind::For { .. } => return Err(FlowError::NotDesugared(s.span.clone())),
            StmtKind::Return(value) => {
                if let Some(e) = value {
                    let v = self.expr(e)?;
                    let ann = &mut self.nodes[v.index()].ann;
                    if ann.role.is_none() {
                        ann.role = Some("return".into());
                    }
                }
            }
            StmtKind::Call(e) => {
                self.expr(e)?;
            }
            StmtKind::Input { format, targets } => {
                for t in targets {
                    if t.indices.is_empty() {
                        let n = self.node(NodeKind::Input, None, None, 0, 1, t.span.clone(), Some(format.clone()));
                        let var = self.resolve(&t.name);
                        self.bind(var, &t.name, n);
                    } else {
                        let idx = self.exprs(&t.indices)?;
                        let n = self.node(NodeKind::Input, None, None, 0, 1, t.span.clone(), Some(format.clone()));
                        self.store(t, idx, n)?;
                    }
                }
            }
            StmtKind::Output { format, args } => {
                let vals = self.exprs(args)?;
                let n =
                    self.node(NodeKind::Output, None, None, vals.len() as u32, 0, s.span.clone(), Some(format.clone()));
                for (port, v) in vals.into_iter().enumerate() {
                    self.edge(v, n, port as u32);
                }
            }
            StmtKind::Block(b) => self.block(b)?,
            StmtKind::Empty => {}
        }
        Ok(())
    }

    /// Element store `target[idx...] = value`, threading a new array value.
    fn store(&mut self, target: &LValue, idx: Vec<NodeId>, value: NodeId) -> Result<(), FlowError> {
        let base = self.read(&target.name, &target.span)?;
        let mut rows = vec![base];
        for &i in &idx[..idx.len() - 1] {
            let row = *rows.last().unwrap();
            let r = self.node(NodeKind::ARead, None, None, 2, 1, target.span.clone(), None);
            self.edge(row, r, 0);
            self.edge(i, r, 1);
            rows.push(r);
        }
        let mut written = value;
        for (row, &i) in rows.iter().zip(&idx).rev() {
            let w = self.node(NodeKind::AWrite, None, None, 3, 1, target.span.clone(), None);
            self.edge(*row, w, 0);
            self.edge(i, w, 1);
            self.edge(written, w, 2);
            written = w;
        }
        let var = self.resolve(&target.name);
        self.bind(var, &target.name, written);
        Ok(())
    }

    fn if_stmt(&mut self, cond: &Expr, then_branch: &Block, else_branch: Option<&Block>) -> Result<(), FlowError> {
        let c = self.expr(cond)?;
        let test = self.node(NodeKind::Test, None, None, 1, 0, cond.span.clone(), None);
        self.edge(c, test, 0);
        let before = self.env.clone();

        self.pending = vec![(test, CtrlLabel::True)];
        self.block(then_branch)?;
        let then_env = std::mem::replace(&mut self.env, before.clone());
        self.env.resize(then_env.len(), None);
        let mut preds = std::mem::take(&mut self.pending);

        self.pending = vec![(test, CtrlLabel::False)];
        if let Some(e) = else_branch {
            self.block(e)?;
        }
        let else_env = std::mem::take(&mut self.env);
        preds.extend(std::mem::take(&mut self.pending));

        // Variables declared inside a branch are out of scope here; their ids stay reserved.
        let width = else_env.len();
        self.env = before;
        let scope_width = self.env.len();
        self.env.resize(width, None);
        let mut joins = Vec::new();
        for v in 0..scope_width {
            let (a, b) = (then_env[v], else_env[v]);
            if a == b {
                self.env[v] = a;
                continue;
            }
            match (a, b) {
                (Some(a), Some(b)) => {
                    let j = self.detached(NodeKind::Join, None, None, 2, 1, cond.span.clone(), None, &preds);
                    self.edge(a, j, 0);
                    self.edge(b, j, 1);
                    let name = self.var_name(VarId(v as u32));
                    self.bind(VarId(v as u32), &name, j);
                    joins.push((j, CtrlLabel::Seq));
                }
                _ => self.env[v] = None,
            }
        }
        self.pending = if joins.is_empty() { preds } else { joins };
        Ok(())
    }

    fn var_name(&self, var: VarId) -> String {
        self.scopes.iter().flatten().find(|(_, v)| *v == var).map(|(n, _)| n.clone()).expect("variable in scope")
    }

    fn while_stmt(&mut self, keyword: &SourceSpan, cond: &Expr, body: &Block) -> Result<(), FlowError> {
        let head = self.node(NodeKind::LoopHead, None, None, 1, 0, keyword.clone(), None);
        let mut assigned: Vec<VarId> = self.assigned_in(body).into_iter().collect();
        assigned.sort();
        let mut loop_joins = Vec::new();
        let mut fresh = Vec::new();
        for var in assigned {
            match self.env[var.0 as usize] {
                Some(init) => {
                    let j = self.detached(
                        NodeKind::Join,
                        None,
                        None,
                        2,
                        1,
                        keyword.clone(),
                        None,
                        &[(head, CtrlLabel::Seq)],
                    );
                    self.edge(init, j, 0);
                    let name = self.var_name(var);
                    self.bind(var, &name, j);
                    loop_joins.push((var, j));
                }
                None => fresh.push(var),
            }
        }
        if !loop_joins.is_empty() {
            self.pending = loop_joins.iter().map(|&(_, j)| (j, CtrlLabel::Seq)).collect();
        }
        let entry_env = self.env.clone();

        let c = self.expr(cond)?;
        self.edge(c, head, 0);
        let test = self.node(NodeKind::Test, None, None, 1, 0, cond.span.clone(), None);
        self.edge(c, test, 0);

        self.pending = vec![(test, CtrlLabel::True)];
        self.block(body)?;
        let tails = std::mem::take(&mut self.pending);
        let last = tails.len() - 1;
        for (i, &(from, _)) in tails.iter().enumerate() {
            let label = if i == last { CtrlLabel::Back } else { CtrlLabel::Seq };
            self.ctrl.push(CtrlEdge { from, to: head, label });
        }
        for &(var, j) in &loop_joins {
            let back = self.env[var.0 as usize].expect("loop-carried variable stays assigned");
            self.edge(back, j, 1);
        }
        let width = self.env.len();
        self.env = entry_env;
        self.env.resize(width, None);
        for var in fresh {
            self.env[var.0 as usize] = None;
        }
        self.pending = vec![(test, CtrlLabel::False)];
        Ok(())
    }

    /// Outer variables assigned anywhere in `body`.
    fn assigned_in(&self, body: &Block) -> HashSet<VarId> {
        let mut out = HashSet::new();
        let mut shadow: Vec<HashSet<String>> = Vec::new();
        self.collect_block(body, &mut shadow, &mut out);
        out
    }

    fn collect_block(&self, b: &Block, shadow: &mut Vec<HashSet<String>>, out: &mut HashSet<VarId>) {
        shadow.push(HashSet::new());
        for s in &b.stmts {
            self.collect_stmt(s, shadow, out);
        }
        shadow.pop();
    }

    fn collect_stmt(&self, s: &Stmt, shadow: &mut Vec<HashSet<String>>, out: &mut HashSet<VarId>) {
        let mut target = |name: &str, shadow: &Vec<HashSet<String>>| {
            if !shadow.iter().any(|set| set.contains(name)) {
                out.insert(self.resolve(name));
            }
        };
        match &s.kind {
            StmtKind::Decl(ds) => {
                for d in ds {
                    shadow.last_mut().unwrap().insert(d.name.clone());
                }
            }
            StmtKind::Assign { target: t, .. } => target(&t.name, shadow),
            StmtKind::Input { targets, .. } => {
                for t in targets {
                    target(&t.name, shadow);
                }
            }
            StmtKind::If { then_branch, else_branch, .. } => {
                self.collect_block(then_branch, shadow, out);
                if let Some(e) = else_branch {
                    self.collect_block(e, shadow, out);
                }
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => self.collect_block(body, shadow, out),
            StmtKind::Block(b) => self.collect_block(b, shadow, out),
            _ => {}
        }
    }

    fn exprs(&mut self, es: &[Expr]) -> Result<Vec<NodeId>, FlowError> {
        es.iter().map(|e| self.expr(e)).collect()
    }

    fn expr(&mut self, e: &Expr) -> Result<NodeId, FlowError> {
        Ok(match &e.kind {
            ExprKind::Int(n) => self.node(NodeKind::Const, None, Some(*n), 0, 1, e.span.clone(), None),
            ExprKind::Unary { op: UnOp::Neg, operand, .. } if matches!(operand.kind, ExprKind::Int(_)) => {
                let ExprKind::Int(n) = operand.kind else { unreachable!() };
                self.node(NodeKind::Const, None, Some(-n), 0, 1, e.span.clone(), None)
            }
            ExprKind::Var(name) => self.read(name, &e.span)?,
            ExprKind::Index { name, indices } => {
                let mut arr = self.read(name, &e.span)?;
                for i in indices {
                    let iv = self.expr(i)?;
                    let r = self.node(NodeKind::ARead, None, None, 2, 1, e.span.clone(), None);
                    self.edge(arr, r, 0);
                    self.edge(iv, r, 1);
                    arr = r;
                }
                arr
            }
            ExprKind::Unary { op, op_span, operand } => {
                let v = self.expr(operand)?;
                let code = match op {
                    UnOp::Neg => OpCode::Neg,
                    UnOp::Not => OpCode::Not,
                };
                let n = self.node(NodeKind::Op, Some(code), None, 1, 1, op_span.clone(), None);
                self.edge(v, n, 0);
                n
            }
            ExprKind::Binary { op, op_span, lhs, rhs } => {
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                let n = self.node(NodeKind::Op, Some(opcode(*op)), None, 2, 1, op_span.clone(), None);
                self.edge(l, n, 0);
                self.edge(r, n, 1);
                n
            }
            ExprKind::Call { name, args } => {
                let vals = self.exprs(args)?;
                let n = self.node(NodeKind::Call, None, None, vals.len() as u32, 1, e.span.clone(), Some(name.clone()));
                for (port, v) in vals.into_iter().enumerate() {
                    self.edge(v, n, port as u32);
                }
                n
            }
        })
    }
}

fn opcode(op: BinOp) -> OpCode {
    match op {
        BinOp::Add => OpCode::Add,
        BinOp::Sub => OpCode::Sub,
        BinOp::Mul => OpCode::Mul,
        BinOp::Div => OpCode::Div,
        BinOp::Mod => OpCode::Mod,
        BinOp::Lt => OpCode::Lt,
        BinOp::Le => OpCode::Le,
        BinOp::Gt => OpCode::Gt,
        BinOp::Ge => OpCode::Ge,
        BinOp::Eq => OpCode::Eq,
        BinOp::Ne => OpCode::Ne,
        BinOp::And => OpCode::And,
        BinOp::Or => OpCode::Or,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{desugar, parse_c, parse_fragment, CSubsetConfig};

    fn frag(src: &str) -> FlowGraph {
        build_flow_graph(&parse_fragment(src, &CSubsetConfig::default()).unwrap()).unwrap()
    }

    fn prog(src: &str) -> FlowGraph {
        build_flow_graph(&desugar(&parse_c(src, &CSubsetConfig::default()).unwrap())).unwrap()
    }

    fn count(g: &FlowGraph, kind: NodeKind, op: Option<OpCode>) -> usize {
        g.nodes().iter().filter(|n| n.kind == kind && n.op == op).count()
    }

    pub(crate) const SUM: &str = "s=0; i=0; while(i<n){s=s+a[i]; i=i+1;}";

    #[test]
    fn empty_main_is_entry_to_exit() {
        let g = prog("int main(){}");
        assert_eq!(g.len(), 2);
        assert!(g.data_edges().is_empty());
        assert_eq!(g.ctrl_edges(), &[CtrlEdge { from: g.entry(), to: g.exit(), label: CtrlLabel::Seq }]);
        assert!(g.check_well_formed().is_empty());
    }

    #[test]
    fn straight_line_values() {
        let g = frag("x=1;y=x+2;");
        let kinds: Vec<_> = g.nodes().iter().map(|n| n.key().to_string()).collect();
        assert_eq!(kinds, ["ENTRY", "CONST", "CONST", "OP(ADD)", "EXIT"]);
        assert_eq!(g.node(NodeId(1)).value, Some(1));
        assert_eq!(g.node(NodeId(2)).value, Some(2));
        assert!(g.has_data_edge(NodeId(1), 0, NodeId(3), 0));
        assert!(g.has_data_edge(NodeId(2), 0, NodeId(3), 1));
        assert_eq!(g.data_edges().len(), 2);
        assert_eq!(g.node(NodeId(3)).ann.var_name.as_deref(), Some("y"));
        assert_eq!(g.node(NodeId(1)).ann.var_name.as_deref(), Some("x"));
        assert!(g.check_well_formed().is_empty());
    }

    #[test]
    fn sum_loop_shape() {
        let g = frag(SUM);
        assert_eq!(count(&g, NodeKind::LoopHead, None), 1);
        assert_eq!(count(&g, NodeKind::Join, None), 2);
        assert_eq!(count(&g, NodeKind::Test, None), 1);
        assert_eq!(count(&g, NodeKind::Op, Some(OpCode::Lt)), 1);
        assert_eq!(count(&g, NodeKind::ARead, None), 1);
        assert_eq!(count(&g, NodeKind::Op, Some(OpCode::Add)), 2);
        assert!(g.check_well_formed().is_empty(), "{:?}", g.check_well_formed());
        let joins: Vec<_> = g.nodes().iter().filter(|n| n.kind == NodeKind::Join).collect();
        let names: Vec<_> = joins.iter().map(|j| j.ann.var_name.as_deref().unwrap()).collect();
        assert_eq!(names, ["s", "i"]);
        // The counter JOIN feeds the comparison that guards the loop.
        let lt = g.nodes().iter().find(|n| n.op == Some(OpCode::Lt)).unwrap();
        assert_eq!(g.feeder(lt.id, 0).unwrap().0, joins[1].id);
        let head = g.nodes().iter().find(|n| n.kind == NodeKind::LoopHead).unwrap();
        assert_eq!(g.feeder(head.id, 0).unwrap().0, lt.id);
        let backs: Vec<_> = g.ctrl_edges().iter().filter(|e| e.label == CtrlLabel::Back).collect();
        assert_eq!(backs.len(), 1);
    }

    #[test]
    fn if_merge_creates_join_only_for_changed_vars() {
        let g = prog("int main(){int x; int y; int c; x = 1; y = 2; c = 0; if (c) { x = 3; } else { x = 4; y = 2; } return x + y;}");
        assert_eq!(count(&g, NodeKind::Join, None), 2);
        let g = prog("int main(){int x; int c; x = 1; c = 0; if (c) { x = x; } return x;}");
        assert_eq!(count(&g, NodeKind::Join, None), 0);
        assert!(g.check_well_formed().is_empty());
    }

    #[test]
    fn unbound_reads() {
        let ast =
            parse_c("int main(){int x; int c; c = 1; if (c) { x = 1; } return x;}", &CSubsetConfig::default()).unwrap();
        match build_flow_graph(&ast).unwrap_err() {
            FlowError::UnboundVariable { name, span } => {
                assert_eq!(name, "x");
                assert_eq!(span.col_start, 58);
            }
            e => panic!("{e:?}"),
        }
        let (g, unbound) = build_flow_graph_lenient(&ast).unwrap();
        assert_eq!(unbound.len(), 1);
        assert_eq!(g.node(unbound[0].node).ann.role.as_deref(), Some("undefined"));
        assert!(g.check_well_formed().is_empty());
        // Assigned only inside a loop body: unbound after the loop.
        let ast = parse_c(
            "int main(){int x; int i; i = 0; while (i < 3) { x = i; i = i + 1; } return x;}",
            &CSubsetConfig::default(),
        )
        .unwrap();
        assert!(build_flow_graph(&ast).is_err());
    }

    #[test]
    fn for_loops_must_be_desugared() {
        let ast = parse_c("int main(){int i; for(i=0;i<2;i=i+1){} return 0;}", &CSubsetConfig::default()).unwrap();
        assert!(matches!(build_flow_graph(&ast), Err(FlowError::NotDesugared(_))));
        assert!(build_flow_graph(&desugar(&ast)).is_ok());
    }

    #[test]
    fn array_writes_and_io() {
        let g = prog("int main(){int a[5]; int n; int i; scanf(\"%d\", &n); i = 0; while (i < n) { scanf(\"%d\", &a[i]); i = i + 1; } printf(\"%d\", a[0]); return 0;}");
        assert_eq!(count(&g, NodeKind::Input, None), 2);
        assert_eq!(count(&g, NodeKind::AWrite, None), 1);
        assert_eq!(count(&g, NodeKind::Output, None), 1);
        // a and i are loop-carried
        assert_eq!(count(&g, NodeKind::Join, None), 2);
        assert!(g.check_well_formed().is_empty(), "{:?}", g.check_well_formed());
    }

    #[test]
    fn body_ending_in_branch_keeps_single_back_edge() {
        let g = prog("int main(){int i; int c; i = 0; c = 0; while (i < 3) { i = i + 1; if (i > 1) { printf(\"x\"); } } return c;}");
        assert!(g.check_well_formed().is_empty(), "{:?}", g.check_well_formed());
    }

    #[test]
    fn calls_and_multi_dim() {
        let g = prog("int sq(int v){return v * v;} int main(){int x; x = sq(3); return x;}");
        assert_eq!(count(&g, NodeKind::Call, None), 1);
        let cfg = CSubsetConfig { max_array_dims: 2, ..CSubsetConfig::default() };
        let ast = parse_c("int main(){int m[2][2]; m[1][0] = 5; return m[1][0];}", &cfg).unwrap();
        let g = build_flow_graph(&ast).unwrap();
        assert_eq!(count(&g, NodeKind::AWrite, None), 2);
        assert_eq!(count(&g, NodeKind::ARead, None), 3);
        assert!(g.check_well_formed().is_empty());
    }

    #[test]
    fn node_index_groups_by_key() {
        let g = prog("int main(){}");
        let idx = g.node_index();
        assert_eq!(idx.len(), 2);
        assert_eq!(idx[&NodeKey { kind: NodeKind::Entry, op: None }], vec![g.entry()]);
        assert_eq!(idx[&NodeKey { kind: NodeKind::Exit, op: None }], vec![g.exit()]);

        let g = frag("x=1;y=x+2;");
        assert_eq!(g.node_index()[&NodeKey { kind: NodeKind::Op, op: Some(OpCode::Add) }].len(), 1);

        let g = frag(SUM);
        let idx = g.node_index();
        let adds = &idx[&NodeKey { kind: NodeKind::Op, op: Some(OpCode::Add) }];
        assert_eq!(adds.len(), 2);
        assert!(adds[0] < adds[1]);
        assert_eq!(idx.values().map(Vec::len).sum::<usize>(), g.len());
    }
}
