use std::sync::Arc;

use serde::Serialize;

use super::DebugError;
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Goal {
    pub name: String,
    pub required: bool,
}

/// The intended implementation: which clichés the program should contain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramSpec {
    pub title: String,
    pub goals: Vec<Goal>,
    pub notes: Vec<String>,
}

impl ProgramSpec {
    pub fn required_goals(&self) -> impl Iterator<Item = &Goal> {
        self.goals.iter().filter(|g| g.required)
    }

    pub fn goal_names(&self) -> Vec<String> {
        self.goals.iter().map(|g| g.name.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
}

struct Lexed {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str, file: &Arc<str>) -> Result<Vec<Lexed>, DebugError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln as u32 + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == ';' {
                break;
            } else if c == '"' {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => {
                            let span = SourceSpan::new(file.clone(), ln, start as u32 + 1, ln, chars.len() as u32);
                            return Err(DebugError::SpecSyntax { span, message: "unterminated string".into() });
                        }
                        Some('"') => break,
                        Some('\\') if i + 1 < chars.len() => {
                            s.push(chars[i + 1]);
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                let span = SourceSpan::new(file.clone(), ln, start as u32 + 1, ln, i as u32);
                out.push(Lexed { tok: Tok::Str(s), span });
            } else {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' && chars[i] != ';' {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let span = SourceSpan::new(file.clone(), ln, start as u32 + 1, ln, i as u32);
                out.push(Lexed { tok: Tok::Word(word), span });
            }
        }
    }
    Ok(out)
}

/// Parses the `.spec` format:
///
/// ```text
/// spec "<title>"
/// goal "<plan>" (required|optional)
/// note "<text>"
/// end
/// ```
///
/// Line breaks are not significant.
pub fn parse_spec(text: &str) -> Result<ProgramSpec, DebugError> {
    parse_spec_file(text, "<spec>")
}

pub fn parse_spec_file(text: &str, file: &str) -> Result<ProgramSpec, DebugError> {
    let file: Arc<str> = Arc::from(file);
    let toks = lex(text, &file)?;
    let eof = {
        let line = text.lines().count().max(1) as u32;
        let col = text.lines().last().map_or(0, |l| l.chars().count()) as u32 + 1;
        SourceSpan::new(file.clone(), line, col, line, col)
    };
    let mut pos = 0;
    let err = |span: &SourceSpan, message: String| DebugError::SpecSyntax { span: span.clone(), message };
    let found = |t: Option<&Lexed>| match t {
        None => "end of input".to_string(),
        Some(Lexed { tok: Tok::Word(w), .. }) => format!("`{w}`"),
        Some(Lexed { tok: Tok::Str(s), .. }) => format!("string \"{s}\""),
    };
    let span_at = |i: usize| toks.get(i).map_or(&eof, |t| &t.span);

    let string_arg = |pos: &mut usize, what: &str| -> Result<String, DebugError> {
        match toks.get(*pos) {
            Some(Lexed { tok: Tok::Str(s), .. }) => {
                *pos += 1;
                Ok(s.clone())
            }
            other => Err(err(span_at(*pos), format!("expected quoted {what}, found {}", found(other)))),
        }
    };

    match toks.first() {
        Some(Lexed { tok: Tok::Word(w), .. }) if w == "spec" => pos += 1,
        other => return Err(err(span_at(0), format!("expected `spec`, found {}", found(other)))),
    }
    let title = string_arg(&mut pos, "title")?;
    let mut goals = Vec::new();
    let mut notes = Vec::new();
    loop {
        let here = pos;
        let word = match toks.get(pos) {
            Some(Lexed { tok: Tok::Word(w), .. }) => w.as_str(),
            other => {
                return Err(err(span_at(pos), format!("expected `goal`, `note` or `end`, found {}", found(other))))
            }
        };
        pos += 1;
        match word {
            "goal" => {
                let name = string_arg(&mut pos, "plan name")?;
                let required = match toks.get(pos) {
                    Some(Lexed { tok: Tok::Word(w), .. }) if w == "required" => true,
                    Some(Lexed { tok: Tok::Word(w), .. }) if w == "optional" => false,
                    other => {
                        return Err(err(
                            span_at(pos),
                            format!("expected `required` or `optional`, found {}", found(other)),
                        ))
                    }
                };
                pos += 1;
                if goals.iter().any(|g: &Goal| g.name == name) {
                    return Err(err(span_at(here), format!("goal \"{name}\" is listed twice")));
                }
                goals.push(Goal { name, required });
            }
            "note" => notes.push(string_arg(&mut pos, "note")?),
            "end" => {
                if goals.is_empty() {
                    return Err(err(span_at(here), "a spec needs at least one goal".into()));
                }
                if let Some(t) = toks.get(pos) {
                    return Err(err(&t.span, format!("unexpected {} after `end`", found(Some(t)))));
                }
                return Ok(ProgramSpec { title, goals, notes });
            }
            _ => return Err(err(span_at(here), format!("expected `goal`, `note` or `end`, found `{word}`"))),
        }
    }
}
