use std::fmt;
use std::sync::Arc;

use super::FrontendError;
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Int,
    If,
    Else,
    While,
    For,
    Return,
    Scanf,
    Printf,
    Ident(String),
    Number(i64),
    /// Raw string literal contents, escapes left as written.
    Str(String),
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Not,
    Assign,
    Amp,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
}

impl TokenKind {
    /// Source text that lexes back to this token.
    pub fn text(&self) -> String {
        let s = match self {
            TokenKind::Int => "int",
            TokenKind::If => "if",
            TokenKind::Else => "else",
            TokenKind::While => "while",
            TokenKind::For => "for",
            TokenKind::Return => "return",
            TokenKind::Scanf => "scanf",
            TokenKind::Printf => "printf",
            TokenKind::Ident(name) => return name.clone(),
            TokenKind::Number(n) => return n.to_string(),
            TokenKind::Str(raw) => return format!("\"{raw}\""),
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Percent => "%",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::EqEq => "==",
            TokenKind::Ne => "!=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Not => "!",
            TokenKind::Assign => "=",
            TokenKind::Amp => "&",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
        };
        s.to_string()
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(name) => write!(f, "identifier `{name}`"),
            TokenKind::Number(n) => write!(f, "integer `{n}`"),
            TokenKind::Str(_) => write!(f, "string literal"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a Arc<str>,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, line: u32, col: u32) -> SourceSpan {
        // Tokens never cross a newline; the cursor sits one past the last consumed char.
        SourceSpan::new(self.file.clone(), line, col, line, (self.col - 1).max(col))
    }

    fn point(&self) -> SourceSpan {
        SourceSpan::new(self.file.clone(), self.line, self.col, self.line, self.col)
    }
}

/// Lex `source` with spans attributed to an anonymous file.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    tokenize_file(source, &Arc::from("<input>"))
}

pub fn tokenize_file(source: &str, file: &Arc<str>) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor { chars: source.chars().collect(), pos: 0, line: 1, col: 1, file };
    let mut out = Vec::new();
    let mut at_line_start = true;

    while let Some(c) = cur.peek() {
        if c == '\n' {
            cur.bump();
            at_line_start = true;
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' && at_line_start {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        at_line_start = false;
        if c == '/' && cur.peek_at(1) == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('*') {
            let start = cur.point();
            cur.bump();
            cur.bump();
            loop {
                match cur.peek() {
                    None => return Err(FrontendError::Lex { span: start, message: "unterminated comment".into() }),
                    Some('*') if cur.peek_at(1) == Some('/') => {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            continue;
        }

        let (line, col) = (cur.line, cur.col);
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                word.push(c);
                cur.bump();
            }
            match word.as_str() {
                "int" => TokenKind::Int,
                "if" => TokenKind::If,
                "else" => TokenKind::Else,
                "while" => TokenKind::While,
                "for" => TokenKind::For,
                "return" => TokenKind::Return,
                "scanf" => TokenKind::Scanf,
                "printf" => TokenKind::Printf,
                _ => TokenKind::Ident(word),
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                digits.push(c);
                cur.bump();
            }
            match digits.parse::<i64>() {
                Ok(n) => TokenKind::Number(n),
                Err(_) => {
                    return Err(FrontendError::Lex {
                        span: cur.span_from(line, col),
                        message: format!("integer literal `{digits}` out of range"),
                    })
                }
            }
        } else if c == '"' {
            cur.bump();
            let mut raw = String::new();
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        return Err(FrontendError::Lex {
                            span: cur.span_from(line, col),
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        cur.bump();
                        break;
                    }
                    Some('\\') => {
                        raw.push('\\');
                        cur.bump();
                        if let Some(e) = cur.bump() {
                            raw.push(e);
                        }
                    }
                    Some(ch) => {
                        raw.push(ch);
                        cur.bump();
                    }
                }
            }
            TokenKind::Str(raw)
        } else {
            let two = cur.peek_at(1);
            let (kind, len) = match (c, two) {
                ('<', Some('=')) => (TokenKind::Le, 2),
                ('>', Some('=')) => (TokenKind::Ge, 2),
                ('=', Some('=')) => (TokenKind::EqEq, 2),
                ('!', Some('=')) => (TokenKind::Ne, 2),
                ('&', Some('&')) => (TokenKind::AndAnd, 2),
                ('|', Some('|')) => (TokenKind::OrOr, 2),
                ('+', _) => (TokenKind::Plus, 1),
                ('-', _) => (TokenKind::Minus, 1),
                ('*', _) => (TokenKind::Star, 1),
                ('/', _) => (TokenKind::Slash, 1),
                ('%', _) => (TokenKind::Percent, 1),
                ('<', _) => (TokenKind::Lt, 1),
                ('>', _) => (TokenKind::Gt, 1),
                ('!', _) => (TokenKind::Not, 1),
                ('=', _) => (TokenKind::Assign, 1),
                ('&', _) => (TokenKind::Amp, 1),
                (',', _) => (TokenKind::Comma, 1),
                (';', _) => (TokenKind::Semi, 1),
                ('(', _) => (TokenKind::LParen, 1),
                (')', _) => (TokenKind::RParen, 1),
                ('{', _) => (TokenKind::LBrace, 1),
                ('}', _) => (TokenKind::RBrace, 1),
                ('[', _) => (TokenKind::LBracket, 1),
                (']', _) => (TokenKind::RBracket, 1),
                _ => {
                    return Err(FrontendError::Lex {
                        span: cur.point(),
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            for _ in 0..len {
                cur.bump();
            }
            kind
        };
        out.push(Token { kind, span: cur.span_from(line, col) });
    }
    Ok(out)
}
