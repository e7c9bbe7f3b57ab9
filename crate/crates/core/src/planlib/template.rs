//! `$slot` and `@role` interpolation in plan doc templates.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Marker {
    Slot(String),
    Role(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template refers to unknown {}", match .0 { Marker::Slot(s) => format!("slot `${s}`"), Marker::Role(r) => format!("role `@{r}`") })]
pub struct TemplateError(pub Marker);

enum Piece<'a> {
    Text(&'a str),
    Mark(Marker),
}

fn pieces(template: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let bytes = template.as_bytes();
    let mut last = 0;
    let mut i = 0;
    while i < bytes.len() {
        let sigil = bytes[i];
        if sigil == b'$' || sigil == b'@' {
            let start = i + 1;
            let mut end = start;
            if end < bytes.len() && (bytes[end].is_ascii_alphabetic() || bytes[end] == b'_') {
                end += 1;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
            }
            if end > start {
                if last < i {
                    out.push(Piece::Text(&template[last..i]));
                }
                let name = template[start..end].to_string();
                out.push(Piece::Mark(if sigil == b'$' { Marker::Slot(name) } else { Marker::Role(name) }));
                last = end;
                i = end;
                continue;
            }
        }
        i += 1;
    }
    if last < template.len() {
        out.push(Piece::Text(&template[last..]));
    }
    out
}

/// Markers in order of appearance. A sigil not followed by an identifier is
/// plain text.
pub fn markers(template: &str) -> Vec<Marker> {
    pieces(template)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Mark(m) => Some(m),
            Piece::Text(_) => None,
        })
        .collect()
}

/// Replaces each marker with `resolve(marker)`; `None` means the marker is
/// not declared and is an error.
pub fn interpolate(
    template: &str,
    mut resolve: impl FnMut(&Marker) -> Option<String>,
) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    for p in pieces(template) {
        match p {
            Piece::Text(t) => out.push_str(t),
            Piece::Mark(m) => match resolve(&m) {
                Some(v) => out.push_str(&v),
                None => return Err(TemplateError(m)),
            },
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_markers() {
        assert_eq!(
            markers("sum @acc from $init, costs $5 @ noon"),
            vec![Marker::Role("acc".into()), Marker::Slot("init".into())]
        );
    }

    #[test]
    fn interpolates() {
        let out = interpolate("@acc starts at $init.", |m| match m {
            Marker::Role(r) if r == "acc" => Some("s".into()),
            Marker::Slot(s) if s == "init" => Some("0".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(out, "s starts at 0.");
        let err = interpolate("$nope", |_| None).unwrap_err();
        assert_eq!(err.to_string(), "template refers to unknown slot `$nope`");
    }
}
