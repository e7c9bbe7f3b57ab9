//! Recursive-descent parser with one token of lookahead. The first error aborts.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::ast::*;
use super::lexer::{tokenize_file, Token, TokenKind};
use super::{CSubsetConfig, FrontendError};
use crate::span::SourceSpan;

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarClass {
    Scalar,
    Array(usize),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    cfg: &'a CSubsetConfig,
    /// Offset of the token just past the end of input, for EOF diagnostics.
    eof: SourceSpan,
    scopes: Vec<HashMap<String, VarClass>>,
    /// Fragment mode: undeclared names become implicit parameters (read first)
    /// or implicit locals (assigned first).
    fragment: bool,
    implicit_params: Vec<(String, usize, SourceSpan)>,
    implicit_locals: Vec<(String, SourceSpan)>,
    calls: Vec<(String, SourceSpan)>,
}

type PResult<T> = Result<T, FrontendError>;

pub(super) fn parse_program(source: &str, file: &Arc<str>, cfg: &CSubsetConfig) -> PResult<Ast> {
    let mut p = Parser::new(source, file, cfg, false)?;
    let mut functions = Vec::new();
    while p.peek().is_some() {
        functions.push(p.function()?);
    }
    let ast_span = p.whole_span(&functions);
    let mains = functions.iter().filter(|f| f.name == "main").count();
    if mains != 1 {
        return Err(FrontendError::Syntax {
            span: ast_span,
            expected: "exactly one function named `main`".into(),
            found: format!("{mains}"),
        });
    }
    if !cfg.allow_functions && functions.len() > 1 {
        let extra = functions.iter().find(|f| f.name != "main").unwrap();
        return Err(FrontendError::Syntax {
            span: extra.name_span.clone(),
            expected: "only `main` (functions disabled)".into(),
            found: format!("function `{}`", extra.name),
        });
    }
    let mut names = BTreeSet::new();
    for f in &functions {
        if !names.insert(f.name.as_str()) {
            return Err(FrontendError::Syntax {
                span: f.name_span.clone(),
                expected: "a fresh function name".into(),
                found: format!("redefinition of `{}`", f.name),
            });
        }
    }
    p.check_calls(&functions)?;
    Ok(Ast { functions, span: ast_span })
}

pub(super) fn parse_fragment_program(source: &str, file: &Arc<str>, cfg: &CSubsetConfig) -> PResult<Ast> {
    let mut p = Parser::new(source, file, cfg, true)?;
    p.scopes.push(HashMap::new());
    let mut stmts = Vec::new();
    while p.peek().is_some() {
        stmts.push(p.statement()?);
    }
    p.scopes.pop();
    check_return_placement(&stmts)?;
    let span = match (stmts.first(), stmts.last()) {
        (Some(a), Some(b)) => a.span.hull(&b.span),
        _ => SourceSpan::new(file.clone(), 1, 1, 1, 1),
    };
    let mut body_stmts: Vec<Stmt> = p
        .implicit_locals
        .iter()
        .map(|(name, sp)| Stmt {
            kind: StmtKind::Decl(vec![Declarator { name: name.clone(), sizes: vec![], init: None, span: sp.clone() }]),
            span: sp.clone(),
        })
        .collect();
    body_stmts.extend(stmts);
    let params = p
        .implicit_params
        .iter()
        .map(|(name, dims, sp)| Param { name: name.clone(), dims: *dims, span: sp.clone() })
        .collect();
    let main = FunctionDecl {
        name: "main".into(),
        name_span: span.clone(),
        params,
        body: Block { stmts: body_stmts, span: span.clone() },
        span: span.clone(),
    };
    p.check_calls(std::slice::from_ref(&main))?;
    Ok(Ast { functions: vec![main], span })
}

fn check_return_placement(stmts: &[Stmt]) -> PResult<()> {
    fn visit(s: &Stmt, tail_ok: bool) -> PResult<()> {
        match &s.kind {
            StmtKind::Return(_) if !tail_ok => Err(FrontendError::Syntax {
                span: s.span.clone(),
                expected: "`return` only as the last statement of a function".into(),
                found: "`return`".into(),
            }),
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.stmts.iter().try_for_each(|s| visit(s, false))?;
                else_branch.iter().flat_map(|b| &b.stmts).try_for_each(|s| visit(s, false))
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => {
                body.stmts.iter().try_for_each(|s| visit(s, false))
            }
            StmtKind::Block(b) => b.stmts.iter().try_for_each(|s| visit(s, false)),
            _ => Ok(()),
        }
    }
    let n = stmts.len();
    stmts.iter().enumerate().try_for_each(|(i, s)| visit(s, i + 1 == n))
}

impl<'a> Parser<'a> {
    fn new(source: &str, file: &Arc<str>, cfg: &'a CSubsetConfig, fragment: bool) -> PResult<Self> {
        let toks = tokenize_file(source, file)?;
        let (line, col) =
            source.lines().enumerate().last().map_or((1, 1), |(i, l)| (i as u32 + 1, l.chars().count() as u32 + 1));
        Ok(Parser {
            toks,
            pos: 0,
            cfg,
            eof: SourceSpan::new(file.clone(), line, col, line, col),
            scopes: Vec::new(),
            fragment,
            implicit_params: Vec::new(),
            implicit_locals: Vec::new(),
            calls: Vec::new(),
        })
    }

    fn whole_span(&self, functions: &[FunctionDecl]) -> SourceSpan {
        match (functions.first(), functions.last()) {
            (Some(a), Some(b)) => a.span.hull(&b.span),
            _ => self.eof.clone(),
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek2(&self) -> Option<&TokenKind> {
        self.toks.get(self.pos + 1).map(|t| &t.kind)
    }

    fn cur_span(&self) -> SourceSpan {
        self.toks.get(self.pos).map_or_else(|| self.eof.clone(), |t| t.span.clone())
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos - 1].span.clone()
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let found = self.peek().map_or_else(|| "end of input".to_string(), |k| k.to_string());
        Err(FrontendError::Syntax { span: self.cur_span(), expected: expected.into(), found })
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<SourceSpan> {
        if self.eat(&kind) {
            Ok(self.prev_span())
        } else {
            self.error(kind.to_string())
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok((name, self.prev_span()))
            }
            _ => self.error("identifier"),
        }
    }

    fn number(&mut self) -> PResult<i64> {
        match self.peek() {
            Some(TokenKind::Number(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("integer literal"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek() {
            Some(TokenKind::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("string literal"),
        }
    }

    fn declare(&mut self, name: &str, class: VarClass, span: &SourceSpan) -> PResult<()> {
        let scope = self.scopes.last_mut().expect("declaration outside any scope");
        if scope.insert(name.to_string(), class).is_some() {
            return Err(FrontendError::Syntax {
                span: span.clone(),
                expected: "a fresh name in this scope".into(),
                found: format!("redeclaration of `{name}`"),
            });
        }
        Ok(())
    }

    fn lookup(&mut self, name: &str, span: &SourceSpan, dims_used: usize, assigning: bool) -> PResult<VarClass> {
        if let Some(c) = self.scopes.iter().rev().find_map(|s| s.get(name)) {
            return Ok(*c);
        }
        if self.fragment {
            let class = if dims_used > 0 { VarClass::Array(dims_used) } else { VarClass::Scalar };
            if assigning && dims_used == 0 {
                self.implicit_locals.push((name.to_string(), span.clone()));
            } else {
                self.implicit_params.push((name.to_string(), dims_used, span.clone()));
            }
            self.scopes[0].insert(name.to_string(), class);
            return Ok(class);
        }
        Err(FrontendError::Syntax {
            span: span.clone(),
            expected: "a declared identifier".into(),
            found: format!("identifier `{name}`"),
        })
    }

    fn check_calls(&self, functions: &[FunctionDecl]) -> PResult<()> {
        for (name, span) in &self.calls {
            match functions.iter().find(|f| &f.name == name) {
                None => {
                    return Err(FrontendError::Syntax {
                        span: span.clone(),
                        expected: "a call to a declared function".into(),
                        found: format!("call to `{name}`"),
                    })
                }
                Some(_) if name == "main" => {
                    return Err(FrontendError::Syntax {
                        span: span.clone(),
                        expected: "a call to a function other than `main`".into(),
                        found: "call to `main`".into(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    fn function(&mut self) -> PResult<FunctionDecl> {
        let start = self.expect(TokenKind::Int)?;
        let (name, name_span) = self.ident()?;
        self.expect(TokenKind::LParen)?;
        self.scopes.push(HashMap::new());
        let mut params = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                let pstart = self.expect(TokenKind::Int)?;
                let (pname, _) = self.ident()?;
                let mut dims = 0;
                while self.eat(&TokenKind::LBracket) {
                    if dims > 0 {
                        self.number()?;
                    }
                    self.expect(TokenKind::RBracket)?;
                    dims += 1;
                }
                let pspan = pstart.hull(&self.prev_span());
                self.check_dims(dims, &pspan)?;
                let class = if dims == 0 { VarClass::Scalar } else { VarClass::Array(dims) };
                self.declare(&pname, class, &pspan)?;
                params.push(Param { name: pname, dims, span: pspan });
                if self.eat(&TokenKind::RParen) {
                    break;
                }
                self.expect(TokenKind::Comma)?;
            }
        }
        let body = self.block()?;
        self.scopes.pop();
        check_return_placement(&body.stmts)?;
        let span = start.hull(&body.span);
        Ok(FunctionDecl { name, name_span, params, body, span })
    }

    fn check_dims(&self, dims: usize, span: &SourceSpan) -> PResult<()> {
        if dims > self.cfg.max_array_dims {
            return Err(FrontendError::Syntax {
                span: span.clone(),
                expected: format!("at most {} array dimension(s)", self.cfg.max_array_dims),
                found: format!("{dims} dimensions"),
            });
        }
        Ok(())
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect(TokenKind::LBrace)?;
        self.scopes.push(HashMap::new());
        let mut stmts = Vec::new();
        while self.peek() != Some(&TokenKind::RBrace) {
            if self.peek().is_none() {
                return self.error("`}`");
            }
            stmts.push(self.statement()?);
        }
        let end = self.expect(TokenKind::RBrace)?;
        self.scopes.pop();
        Ok(Block { stmts, span: start.hull(&end) })
    }

    /// A statement used as a branch or loop body, always wrapped in a block.
    fn body(&mut self) -> PResult<Block> {
        if self.peek() == Some(&TokenKind::LBrace) {
            return self.block();
        }
        self.scopes.push(HashMap::new());
        let s = self.statement()?;
        self.scopes.pop();
        Ok(Block { span: s.span.clone(), stmts: vec![s] })
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.cur_span();
        let kind = match self.peek() {
            Some(TokenKind::Int) => {
                self.pos += 1;
                let mut decls = Vec::new();
                loop {
                    decls.push(self.declarator()?);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                self.expect(TokenKind::Semi)?;
                StmtKind::Decl(decls)
            }
            Some(TokenKind::If) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let then_branch = self.body()?;
                let else_branch = if self.eat(&TokenKind::Else) { Some(self.body()?) } else { None };
                StmtKind::If { cond, then_branch, else_branch }
            }
            Some(TokenKind::While) => {
                self.pos += 1;
                let keyword = self.prev_span();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let body = self.body()?;
                StmtKind::While { keyword, cond, body }
            }
            Some(TokenKind::For) => {
                if !self.cfg.allow_for {
                    return self.error("a statement (`for` disabled)");
                }
                self.pos += 1;
                let keyword = self.prev_span();
                self.expect(TokenKind::LParen)?;
                let init = if self.peek() == Some(&TokenKind::Semi) { None } else { Some(Box::new(self.simple()?)) };
                self.expect(TokenKind::Semi)?;
                let cond = if self.peek() == Some(&TokenKind::Semi) { None } else { Some(self.expr()?) };
                self.expect(TokenKind::Semi)?;
                let step = if self.peek() == Some(&TokenKind::RParen) { None } else { Some(Box::new(self.simple()?)) };
                self.expect(TokenKind::RParen)?;
                let body = self.body()?;
                StmtKind::For { keyword, init, cond, step, body }
            }
            Some(TokenKind::Return) => {
                self.pos += 1;
                let value = if self.peek() == Some(&TokenKind::Semi) { None } else { Some(self.expr()?) };
                self.expect(TokenKind::Semi)?;
                StmtKind::Return(value)
            }
            Some(TokenKind::LBrace) => StmtKind::Block(self.block()?),
            Some(TokenKind::Semi) => {
                self.pos += 1;
                StmtKind::Empty
            }
            Some(TokenKind::Scanf) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let format = self.string()?;
                let mut targets = Vec::new();
                while self.eat(&TokenKind::Comma) {
                    self.expect(TokenKind::Amp)?;
                    targets.push(self.lvalue()?);
                }
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Input { format, targets }
            }
            Some(TokenKind::Printf) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let format = self.string()?;
                let mut args = Vec::new();
                while self.eat(&TokenKind::Comma) {
                    args.push(self.expr()?);
                }
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Output { format, args }
            }
            Some(TokenKind::Ident(_)) => {
                let s = self.simple()?;
                self.expect(TokenKind::Semi)?;
                s.kind
            }
            _ => return self.error("a statement"),
        };
        Ok(Stmt { kind, span: start.hull(&self.prev_span()) })
    }

    fn declarator(&mut self) -> PResult<Declarator> {
        let (name, start) = self.ident()?;
        let mut sizes = Vec::new();
        while self.eat(&TokenKind::LBracket) {
            let n = self.number()?;
            if n <= 0 {
                return Err(FrontendError::Syntax {
                    span: self.prev_span(),
                    expected: "a positive array size".into(),
                    found: n.to_string(),
                });
            }
            sizes.push(n);
            self.expect(TokenKind::RBracket)?;
        }
        self.check_dims(sizes.len(), &start.hull(&self.prev_span()))?;
        let init = if self.eat(&TokenKind::Assign) {
            if !sizes.is_empty() {
                return self.error("`;` (array initializers are not supported)");
            }
            Some(self.expr()?)
        } else {
            None
        };
        // Declared after the initializer so `int x = x;` is rejected.
        let span = start.hull(&self.prev_span());
        let class = if sizes.is_empty() { VarClass::Scalar } else { VarClass::Array(sizes.len()) };
        self.declare(&name, class, &span)?;
        Ok(Declarator { name, sizes, init, span })
    }

    /// Assignment or call statement without the trailing `;`.
    fn simple(&mut self) -> PResult<Stmt> {
        let start = self.cur_span();
        if matches!(self.peek(), Some(TokenKind::Ident(_))) && self.peek2() == Some(&TokenKind::LParen) {
            let call = self.primary()?;
            return Ok(Stmt { span: call.span.clone(), kind: StmtKind::Call(call) });
        }
        let target = self.lvalue()?;
        self.expect(TokenKind::Assign)?;
        let value = self.expr()?;
        Ok(Stmt { span: start.hull(&value.span), kind: StmtKind::Assign { target, value } })
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let (name, span) = self.ident()?;
        let indices = self.indices()?;
        let class = self.lookup(&name, &span, indices.len(), true)?;
        self.check_use(&name, class, indices.len(), &span, false)?;
        Ok(LValue { name, span: span.hull(&self.prev_span()), indices })
    }

    fn indices(&mut self) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        while self.eat(&TokenKind::LBracket) {
            out.push(self.expr()?);
            self.expect(TokenKind::RBracket)?;
        }
        Ok(out)
    }

    fn check_use(
        &self,
        name: &str,
        class: VarClass,
        used: usize,
        span: &SourceSpan,
        whole_array_ok: bool,
    ) -> PResult<()> {
        let ok = match class {
            VarClass::Scalar => used == 0,
            VarClass::Array(d) => used == d || (used == 0 && whole_array_ok),
        };
        if ok {
            return Ok(());
        }
        let expected = match class {
            VarClass::Scalar => format!("`{name}` used as a scalar"),
            VarClass::Array(d) => format!("`{name}` indexed with {d} subscript(s)"),
        };
        Err(FrontendError::Syntax { span: span.clone(), expected, found: format!("{used} subscript(s)") })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::OrOr) => BinOp::Or,
                Some(TokenKind::AndAnd) => BinOp::And,
                Some(TokenKind::EqEq) => BinOp::Eq,
                Some(TokenKind::Ne) => BinOp::Ne,
                Some(TokenKind::Lt) => BinOp::Lt,
                Some(TokenKind::Le) => BinOp::Le,
                Some(TokenKind::Gt) => BinOp::Gt,
                Some(TokenKind::Ge) => BinOp::Ge,
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                Some(TokenKind::Percent) => BinOp::Mod,
                _ => break,
            };
            if op.precedence() < min_prec {
                break;
            }
            self.pos += 1;
            let op_span = self.prev_span();
            let rhs = self.binary(op.precedence() + 1)?;
            let span = lhs.span.hull(&rhs.span);
            lhs = Expr { kind: ExprKind::Binary { op, op_span, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Some(TokenKind::Minus) => UnOp::Neg,
            Some(TokenKind::Not) => UnOp::Not,
            _ => return self.primary(),
        };
        self.pos += 1;
        let op_span = self.prev_span();
        let operand = self.unary()?;
        let span = op_span.hull(&operand.span);
        Ok(Expr { kind: ExprKind::Unary { op, op_span, operand: Box::new(operand) }, span })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.cur_span();
        match self.peek() {
            Some(TokenKind::Number(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(Expr { kind: ExprKind::Int(n), span: start })
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                // Parentheses are not kept; the node keeps the inner span so that
                // printing and reparsing is a fixed point.
                Ok(inner)
            }
            Some(TokenKind::Ident(_)) => {
                let (name, span) = self.ident()?;
                if self.eat(&TokenKind::LParen) {
                    if !self.cfg.allow_functions {
                        return Err(FrontendError::Syntax {
                            span,
                            expected: "an expression (calls disabled)".into(),
                            found: format!("call to `{name}`"),
                        });
                    }
                    let mut args = Vec::new();
                    if !self.eat(&TokenKind::RParen) {
                        loop {
                            args.push(self.call_arg()?);
                            if self.eat(&TokenKind::RParen) {
                                break;
                            }
                            self.expect(TokenKind::Comma)?;
                        }
                    }
                    self.calls.push((name.clone(), span.clone()));
                    return Ok(Expr { kind: ExprKind::Call { name, args }, span: span.hull(&self.prev_span()) });
                }
                let indices = self.indices()?;
                let class = self.lookup(&name, &span, indices.len(), false)?;
                self.check_use(&name, class, indices.len(), &span, false)?;
                if indices.is_empty() {
                    Ok(Expr { kind: ExprKind::Var(name), span })
                } else {
                    Ok(Expr { kind: ExprKind::Index { name, indices }, span: span.hull(&self.prev_span()) })
                }
            }
            _ => self.error("an expression"),
        }
    }

    /// Call arguments may name a whole array.
    fn call_arg(&mut self) -> PResult<Expr> {
        if let (Some(TokenKind::Ident(name)), Some(TokenKind::Comma | TokenKind::RParen)) = (self.peek(), self.peek2())
        {
            let name = name.clone();
            let span = self.cur_span();
            if let Some(VarClass::Array(_)) = self.scopes.iter().rev().find_map(|s| s.get(&name)).copied() {
                self.pos += 1;
                return Ok(Expr { kind: ExprKind::Var(name), span });
            }
        }
        self.expr()
    }
}
