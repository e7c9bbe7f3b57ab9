use super::ast::*;

/// Rewrites every `for` loop into `init; while (cond) { body; step; }`.
///
/// The init statement is spliced into the enclosing block. A missing condition
/// becomes the literal `1`. Already-normal trees are returned unchanged.
pub fn desugar(ast: &Ast) -> Ast {
    let mut out = ast.clone();
    for f in &mut out.functions {
        desugar_block(&mut f.body);
    }
    out
}

fn desugar_block(block: &mut Block) {
    let stmts = std::mem::take(&mut block.stmts);
    for s in stmts {
        desugar_stmt(s, &mut block.stmts);
    }
}

fn desugar_stmt(mut s: Stmt, out: &mut Vec<Stmt>) {
    match s.kind {
        StmtKind::For { keyword, init, cond, step, mut body } => {
            if let Some(init) = init {
                desugar_stmt(*init, out);
            }
            desugar_block(&mut body);
            let cond = cond.unwrap_or_else(|| Expr { kind: ExprKind::Int(1), span: keyword.clone() });
            if let Some(step) = step {
                body.span = body.span.hull(&step.span);
                body.stmts.push(*step);
            }
            out.push(Stmt { kind: StmtKind::While { keyword, cond, body }, span: s.span });
        }
        StmtKind::While { ref mut body, .. } => {
            desugar_block(body);
            out.push(s);
        }
        StmtKind::If { ref mut then_branch, ref mut else_branch, .. } => {
            desugar_block(then_branch);
            if let Some(e) = else_branch {
                desugar_block(e);
            }
            out.push(s);
        }
        StmtKind::Block(ref mut b) => {
            desugar_block(b);
            out.push(s);
        }
        _ => out.push(s),
    }
}

/// True when the tree contains no `for` loops.
pub fn is_while_normal(ast: &Ast) -> bool {
    fn block(b: &Block) -> bool {
        b.stmts.iter().all(stmt)
    }
    fn stmt(s: &Stmt) -> bool {
        match &s.kind {
            StmtKind::For { .. } => false,
            StmtKind::While { body, .. } => block(body),
            StmtKind::If { then_branch, else_branch, .. } => {
                block(then_branch) && else_branch.as_ref().is_none_or(block)
            }
            StmtKind::Block(b) => block(b),
            _ => true,
        }
    }
    ast.functions.iter().all(|f| block(&f.body))
}
