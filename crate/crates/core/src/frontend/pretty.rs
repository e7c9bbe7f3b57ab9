use std::fmt::Write;

use super::ast::*;

/// Canonical source rendering. Reparsing the output yields a tree that prints
/// identically.
pub fn pretty_print(ast: &Ast) -> String {
    let mut out = String::new();
    for (i, f) in ast.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| {
                let mut s = format!("int {}", p.name);
                for d in 0..p.dims {
                    // Only the first dimension of a parameter may be unsized.
                    s.push_str(if d == 0 { "[]" } else { "[1]" });
                }
                s
            })
            .collect();
        let _ = writeln!(out, "int {}({}) {{", f.name, params.join(", "));
        block_body(&mut out, &f.body, 1);
        out.push_str("}\n");
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block_body(out: &mut String, b: &Block, depth: usize) {
    for s in &b.stmts {
        stmt(out, s, depth);
    }
}

fn braced(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    block_body(out, b, depth + 1);
    indent(out, depth);
    out.push('}');
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Decl(ds) => {
            let parts: Vec<String> = ds
                .iter()
                .map(|d| {
                    let mut p = d.name.clone();
                    for n in &d.sizes {
                        let _ = write!(p, "[{n}]");
                    }
                    if let Some(e) = &d.init {
                        let _ = write!(p, " = {}", expr(e));
                    }
                    p
                })
                .collect();
            let _ = write!(out, "int {};", parts.join(", "));
        }
        StmtKind::Assign { target, value } => {
            let _ = write!(out, "{} = {};", lvalue(target), expr(value));
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            let _ = write!(out, "if ({}) ", expr(cond));
            braced(out, then_branch, depth);
            if let Some(e) = else_branch {
                out.push_str(" else ");
                braced(out, e, depth);
            }
        }
        StmtKind::While { cond, body, .. } => {
            let _ = write!(out, "while ({}) ", expr(cond));
            braced(out, body, depth);
        }
        StmtKind::For { init, cond, step, body, .. } => {
            let simple = |s: &Option<Box<Stmt>>| match s.as_deref() {
                Some(Stmt { kind: StmtKind::Assign { target, value }, .. }) => {
                    format!("{} = {}", lvalue(target), expr(value))
                }
                Some(Stmt { kind: StmtKind::Call(e), .. }) => expr(e),
                _ => String::new(),
            };
            let c = cond.as_ref().map(expr).unwrap_or_default();
            let _ = write!(out, "for ({}; {}; {}) ", simple(init), c, simple(step));
            braced(out, body, depth);
        }
        StmtKind::Return(e) => match e {
            Some(e) => {
                let _ = write!(out, "return {};", expr(e));
            }
            None => out.push_str("return;"),
        },
        StmtKind::Call(e) => {
            let _ = write!(out, "{};", expr(e));
        }
        StmtKind::Input { format, targets } => {
            let _ = write!(out, "scanf(\"{format}\"");
            for t in targets {
                let _ = write!(out, ", &{}", lvalue(t));
            }
            out.push_str(");");
        }
        StmtKind::Output { format, args } => {
            let _ = write!(out, "printf(\"{format}\"");
            for a in args {
                let _ = write!(out, ", {}", expr(a));
            }
            out.push_str(");");
        }
        StmtKind::Block(b) => braced(out, b, depth),
        StmtKind::Empty => out.push(';'),
    }
    out.push('\n');
}

fn lvalue(lv: &LValue) -> String {
    let mut s = lv.name.clone();
    for i in &lv.indices {
        let _ = write!(s, "[{}]", expr(i));
    }
    s
}

pub(crate) fn expr(e: &Expr) -> String {
    expr_prec(e, 0)
}

fn expr_prec(e: &Expr, ctx: u8) -> String {
    match &e.kind {
        ExprKind::Int(n) if *n < 0 => format!("({n})"),
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Index { name, indices } => {
            let mut s = name.clone();
            for i in indices {
                let _ = write!(s, "[{}]", expr(i));
            }
            s
        }
        ExprKind::Unary { op, operand, .. } => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            format!("{sym}{}", expr_prec(operand, 7))
        }
        ExprKind::Binary { op, lhs, rhs, .. } => {
            let p = op.precedence();
            // Left-associative: the right operand needs strictly higher precedence.
            let s = format!("{} {} {}", expr_prec(lhs, p), op.symbol(), expr_prec(rhs, p + 1));
            if p < ctx {
                format!("({s})")
            } else {
                s
            }
        }
        ExprKind::Call { name, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{name}({})", args.join(", "))
        }
    }
}
