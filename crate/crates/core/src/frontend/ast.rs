//! Parse tree of the accepted C subset. Every node carries its source span.

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    pub functions: Vec<FunctionDecl>,
    pub span: SourceSpan,
}

impl Ast {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn main(&self) -> Option<&FunctionDecl> {
        self.function("main")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub name_span: SourceSpan,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    /// Number of array dimensions; 0 for an int scalar.
    pub dims: usize,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declarator {
    pub name: String,
    /// Declared sizes, one per dimension; empty for scalars.
    pub sizes: Vec<i64>,
    pub init: Option<Expr>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LValue {
    pub name: String,
    pub indices: Vec<Expr>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl(Vec<Declarator>),
    Assign {
        target: LValue,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Block,
        else_branch: Option<Block>,
    },
    /// `keyword` is the span of the `while` (or original `for`) keyword.
    While {
        keyword: SourceSpan,
        cond: Expr,
        body: Block,
    },
    For {
        keyword: SourceSpan,
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Box<Stmt>>,
        body: Block,
    },
    Return(Option<Expr>),
    /// A call evaluated for its effect.
    Call(Expr),
    /// `scanf(format, &v, ...)`
    Input {
        format: String,
        targets: Vec<LValue>,
    },
    /// `printf(format, args...)`
    Output {
        format: String,
        args: Vec<Expr>,
    },
    Block(Block),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Var(String),
    Index {
        name: String,
        indices: Vec<Expr>,
    },
    /// `op_span` locates the operator token.
    Unary {
        op: UnOp,
        op_span: SourceSpan,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        op_span: SourceSpan,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

/// Visits every node span in the tree together with its parent's span.
pub fn for_each_span_pair(ast: &Ast, f: &mut dyn FnMut(&SourceSpan, &SourceSpan)) {
    for func in &ast.functions {
        f(&ast.span, &func.span);
        f(&func.span, &func.name_span);
        for p in &func.params {
            f(&func.span, &p.span);
        }
        f(&func.span, &func.body.span);
        block_spans(&func.body, f);
    }
}

fn block_spans(b: &Block, f: &mut dyn FnMut(&SourceSpan, &SourceSpan)) {
    for s in &b.stmts {
        f(&b.span, &s.span);
        stmt_spans(s, f);
    }
}

fn stmt_spans(s: &Stmt, f: &mut dyn FnMut(&SourceSpan, &SourceSpan)) {
    let sp = &s.span;
    match &s.kind {
        StmtKind::Decl(ds) => {
            for d in ds {
                f(sp, &d.span);
                if let Some(e) = &d.init {
                    f(&d.span, &e.span);
                    expr_spans(e, f);
                }
            }
        }
        StmtKind::Assign { target, value } => {
            lvalue_spans(sp, target, f);
            f(sp, &value.span);
            expr_spans(value, f);
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            f(sp, &cond.span);
            expr_spans(cond, f);
            f(sp, &then_branch.span);
            block_spans(then_branch, f);
            if let Some(e) = else_branch {
                f(sp, &e.span);
                block_spans(e, f);
            }
        }
        StmtKind::While { keyword, cond, body } => {
            f(sp, keyword);
            f(sp, &cond.span);
            expr_spans(cond, f);
            f(sp, &body.span);
            block_spans(body, f);
        }
        StmtKind::For { keyword, init, cond, step, body } => {
            f(sp, keyword);
            for s in init.iter().chain(step.iter()) {
                f(sp, &s.span);
                stmt_spans(s, f);
            }
            if let Some(c) = cond {
                f(sp, &c.span);
                expr_spans(c, f);
            }
            f(sp, &body.span);
            block_spans(body, f);
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                f(sp, &e.span);
                expr_spans(e, f);
            }
        }
        StmtKind::Call(e) => {
            f(sp, &e.span);
            expr_spans(e, f);
        }
        StmtKind::Input { targets, .. } => {
            for t in targets {
                lvalue_spans(sp, t, f);
            }
        }
        StmtKind::Output { args, .. } => {
            for a in args {
                f(sp, &a.span);
                expr_spans(a, f);
            }
        }
        StmtKind::Block(b) => {
            f(sp, &b.span);
            block_spans(b, f);
        }
        StmtKind::Empty => {}
    }
}

fn lvalue_spans(parent: &SourceSpan, lv: &LValue, f: &mut dyn FnMut(&SourceSpan, &SourceSpan)) {
    f(parent, &lv.span);
    for i in &lv.indices {
        f(&lv.span, &i.span);
        expr_spans(i, f);
    }
}

fn expr_spans(e: &Expr, f: &mut dyn FnMut(&SourceSpan, &SourceSpan)) {
    let sp = &e.span;
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Var(_) => {}
        ExprKind::Index { indices, .. } => {
            for i in indices {
                f(sp, &i.span);
                expr_spans(i, f);
            }
        }
        ExprKind::Unary { op_span, operand, .. } => {
            f(sp, op_span);
            f(sp, &operand.span);
            expr_spans(operand, f);
        }
        ExprKind::Binary { op_span, lhs, rhs, .. } => {
            f(sp, op_span);
            for side in [lhs, rhs] {
                f(sp, &side.span);
                expr_spans(side, f);
            }
        }
        ExprKind::Call { args, .. } => {
            for a in args {
                f(sp, &a.span);
                expr_spans(a, f);
            }
        }
    }
}

/// Number of statement and expression nodes (declarators and lvalues included).
pub fn node_count(ast: &Ast) -> usize {
    let mut n = 0;
    for_each_span_pair(ast, &mut |_, _| n += 1);
    n
}
