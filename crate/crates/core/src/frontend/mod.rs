//! Lexing and parsing of the accepted C subset: int scalars, int arrays,
//! assignment, if/else, while, for, return, calls, and `scanf`/`printf` as
//! abstract input/output.

pub mod ast;
mod desugar;
pub mod lexer;
mod parser;
mod pretty;

use std::sync::Arc;

use thiserror::Error;

pub use ast::Ast;
pub use desugar::{desugar, is_while_normal};
pub use lexer::{tokenize, tokenize_file, Token, TokenKind};
pub use pretty::pretty_print;

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CSubsetConfig {
    pub allow_for: bool,
    pub allow_functions: bool,
    pub max_array_dims: usize,
}

impl Default for CSubsetConfig {
    fn default() -> Self {
        CSubsetConfig { allow_for: true, allow_functions: true, max_array_dims: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{span}: lex error: {message}")]
    Lex { span: SourceSpan, message: String },
    #[error("{span}: syntax error: expected {expected}, found {found}")]
    Syntax { span: SourceSpan, expected: String, found: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl FrontendError {
    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            FrontendError::Lex { span, .. } | FrontendError::Syntax { span, .. } => Some(span),
            FrontendError::Config(_) => None,
        }
    }
}

fn check_cfg(cfg: &CSubsetConfig) -> Result<(), FrontendError> {
    if cfg.max_array_dims == 0 {
        return Err(FrontendError::Config("max_array_dims must be at least 1".into()));
    }
    Ok(())
}

/// Parses a whole program (exactly one `main`).
pub fn parse_c(source: &str, cfg: &CSubsetConfig) -> Result<Ast, FrontendError> {
    parse_c_file(source, "<input>", cfg)
}

pub fn parse_c_file(source: &str, file: &str, cfg: &CSubsetConfig) -> Result<Ast, FrontendError> {
    check_cfg(cfg)?;
    parser::parse_program(source, &Arc::from(file), cfg)
}

/// Parses a bare statement sequence as the body of a synthetic `main`.
///
/// Undeclared names read before being assigned become parameters; names
/// assigned first become locals.
pub fn parse_fragment(source: &str, cfg: &CSubsetConfig) -> Result<Ast, FrontendError> {
    check_cfg(cfg)?;
    parser::parse_fragment_program(source, &Arc::from("<fragment>"), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLES: &[&str] = &[
        "int main(){return 0;}",
        "int main(){int s; int i; int n; int a[10]; scanf(\"%d\", &n); s = 0; for (i = 0; i < n; i = i + 1) { s = s + a[i]; } printf(\"%d\\n\", s); return 0;}",
        "int f(int a[], int n){ int k; k = n - (1 - n) * -a[0]; return k % 3; } int main(){ int b[2]; int r; b[0] = 4; r = f(b, 2); if (!(r > 1) || r == 2 && r != 3) { r = 1; } else { r = 0; } return r; }",
    ];

    #[test]
    fn pretty_print_is_a_fixed_point() {
        for src in SAMPLES {
            let a = parse_c(src, &CSubsetConfig::default()).unwrap();
            let printed = pretty_print(&a);
            let b = parse_c(&printed, &CSubsetConfig::default()).unwrap();
            assert_eq!(pretty_print(&b), printed, "{src}");
        }
    }

    #[test]
    fn zero_dims_config_is_rejected() {
        let cfg = CSubsetConfig { max_array_dims: 0, ..CSubsetConfig::default() };
        assert!(matches!(parse_c("int main(){return 0;}", &cfg), Err(FrontendError::Config(_))));
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0i64..100).prop_map(|n| n.to_string()),
            prop::sample::select(vec!["x", "y", "a[x]"]).prop_map(String::from),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/", "<", "<=", "==", "&&", "||", "%"]),
                inner.clone(),
                any::<bool>(),
            )
                .prop_map(|(l, op, r, paren)| if paren { format!("({l} {op} {r})") } else { format!("{l} {op} {r}") })
        })
    }

    proptest! {
        #[test]
        fn expressions_round_trip(e in arb_expr(), f in arb_expr()) {
            let src = format!("int main(){{int x; int y; int a[4]; x = {e}; y = {f}; if (x < y) {{ a[0] = {e}; }} return y;}}");
            let a = parse_c(&src, &CSubsetConfig::default()).unwrap();
            let p = pretty_print(&a);
            let b = parse_c(&p, &CSubsetConfig::default()).unwrap();
            prop_assert_eq!(pretty_print(&b), p);
            // Determinism.
            prop_assert_eq!(parse_c(&src, &CSubsetConfig::default()).unwrap(), a);
        }

        #[test]
        fn child_spans_nest(e in arb_expr()) {
            let src = format!("int main(){{int x; int y; int a[4];\n x = 1; y = 2;\n while (x < 3) {{ x = {e}; }}\n return x;}}");
            let a = parse_c(&src, &CSubsetConfig::default()).unwrap();
            ast::for_each_span_pair(&a, &mut |p, c| assert!(p.contains(c), "{p:?} !> {c:?}"));
        }
    }
}
