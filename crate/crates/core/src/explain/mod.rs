//! Student-facing explanations of a diagnostic report.

use serde::Serialize;
use thiserror::Error;

use crate::debugger::{DiagnosticReport, Finding, FindingKind, Verdict};
use crate::flowgraph::FlowGraph;
use crate::matcher::doc_text;
use crate::planlib::template::TemplateError;
use crate::planlib::PlanBase;
use crate::span::SourceSpan;

pub const TEXT_WIDTH: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("plan `{plan}`: {source}")]
pub struct ExplainError {
    pub plan: String,
    pub source: TemplateError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl Severity {
    pub fn of(kind: FindingKind) -> Severity {
        match kind {
            FindingKind::MissingGoal => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        }
    }
}

/// Source lines quoted for a span, with a caret line for one-line spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Excerpt {
    pub span: SourceSpan,
    pub lines: Vec<(u32, String)>,
    pub caret: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Section {
    pub severity: Severity,
    pub heading: String,
    pub body: Vec<String>,
    pub excerpt: Option<Excerpt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub audience: &'static str,
    pub title: String,
    pub summary: Vec<String>,
    pub sections: Vec<Section>,
}

pub fn excerpt(source: &str, span: &SourceSpan) -> Excerpt {
    let lines: Vec<(u32, String)> = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u32 + 1, l.to_string()))
        .filter(|(n, _)| *n >= span.line_start && *n <= span.line_end)
        .collect();
    let caret = (span.is_single_line() && span.col_start >= 1 && span.col_end >= span.col_start).then(|| {
        let pad = " ".repeat(span.col_start as usize - 1);
        format!("{pad}{}", "^".repeat((span.col_end - span.col_start + 1) as usize))
    });
    Excerpt { span: span.clone(), lines, caret }
}

/// Builds the explanation of `report`. `g` is the graph the report was
/// computed from; bound variable names are read from it.
pub fn render(
    report: &DiagnosticReport,
    source: &str,
    base: &PlanBase,
    g: &FlowGraph,
) -> Result<Explanation, ExplainError> {
    let mut summary = Vec::new();
    for (goal, v) in &report.verdicts {
        let word = match v {
            Verdict::Recognized => "recognized",
            Verdict::Buggy => "buggy",
            Verdict::Missing => "missing",
        };
        summary.push(format!("{goal}: {word}"));
    }
    let mut sections = Vec::new();
    for f in &report.findings {
        sections.push(finding_section(f, source, base, g)?);
    }
    if let Some(meaning) = &report.meaning {
        let body = meaning.iter().map(|m| format!("{}{}", "  ".repeat(m.depth), sentence(&m.text))).collect();
        sections.push(Section { severity: Severity::Note, heading: "Program meaning".into(), body, excerpt: None });
    }
    if report.budget_truncated {
        sections.push(Section {
            severity: Severity::Warning,
            heading: "Analysis truncated".into(),
            body: vec!["The search budget ran out before every cliché was examined, so some findings may be \
                        missing. Run again with a larger --budget."
                .into()],
            excerpt: None,
        });
    }
    Ok(Explanation {
        audience: "student",
        title: format!("{} (spec \"{}\")", report.program, report.spec),
        summary,
        sections,
    })
}

fn finding_section(f: &Finding, source: &str, base: &PlanBase, g: &FlowGraph) -> Result<Section, ExplainError> {
    let doc = |name: &str| -> Result<Option<String>, ExplainError> {
        let (Some(plan), Some(m)) = (base.get(name), f.matched.as_ref()) else { return Ok(None) };
        if plan.doc.is_empty() || m.plan != name {
            return Ok(None);
        }
        doc_text(plan, m, g).map(Some).map_err(|source| ExplainError { plan: name.to_string(), source })
    };
    let line = f.span.line_start;
    let (heading, mut body) = match f.kind {
        FindingKind::BugCliche => {
            let bug = f.bug_plan.as_deref().unwrap_or("?");
            let mut body = Vec::new();
            if let Some(text) = doc(bug)? {
                body.push(sentence(&capitalize(&text)));
            }
            body.push(format!("This is a known faulty form of the `{}` cliché.", f.goal));
            (format!("bug cliché `{bug}` in `{}` at line {line}", f.goal), body)
        }
        FindingKind::ConstraintViolation => {
            let plan = f.plan.as_deref().unwrap_or(&f.goal);
            let mut body = Vec::new();
            let what = if plan == f.goal { format!("`{plan}`") } else { format!("`{plan}`, part of `{}`,", f.goal) };
            body.push(sentence(&format!("This code looks like {what} but does not quite fit: {}", f.evidence)));
            if let Some(text) = doc(plan)? {
                body.push(sentence(&format!("Intended: {text}")));
            }
            (format!("`{}` almost matches at line {line}", f.goal), body)
        }
        FindingKind::MissingGoal => (
            format!("`{}` not found", f.goal),
            vec![format!("The program should contain the `{}` cliché, but no code resembling it was found.", f.goal)],
        ),
        FindingKind::UnboundVariable => {
            (format!("variable used before assignment at line {line}"), vec![sentence(&capitalize(&f.evidence))])
        }
    };
    if f.kind != FindingKind::MissingGoal {
        body.push(format!("Confidence {:.2}.", f.confidence));
    }
    let excerpt = (f.kind != FindingKind::MissingGoal).then(|| excerpt(source, &f.span));
    Ok(Section { severity: Severity::of(f.kind), heading, body, excerpt })
}

/// `s` with a closing full stop unless it already ends a sentence.
fn sentence(s: &str) -> String {
    if s.ends_with(['.', '!', '?']) {
        s.to_string()
    } else {
        format!("{s}.")
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn render_text(e: &Explanation) -> String {
    let mut out = String::new();
    out.push_str(&format!("adil report: {}\n", e.title));
    for s in &e.summary {
        out.push_str(&format!("  {s}\n"));
    }
    for s in &e.sections {
        out.push('\n');
        out.push_str(&format!("{}: {}\n", s.severity.as_str(), s.heading));
        if let Some(x) = &s.excerpt {
            out.push_str(&format!("  --> {}:{}:{}\n", x.span.file, x.span.line_start, x.span.col_start));
            let width = x.lines.last().map_or(1, |(n, _)| n.to_string().len());
            for (n, text) in &x.lines {
                out.push_str(&format!("{n:>width$} | {text}\n"));
            }
            if let Some(c) = &x.caret {
                out.push_str(&format!("{:>width$} | {c}\n", ""));
            }
        }
        for para in &s.body {
            let indent = para.len() - para.trim_start().len();
            let lead = " ".repeat(2 + indent);
            let opts = textwrap::Options::new(TEXT_WIDTH).initial_indent(&lead).subsequent_indent(&lead);
            for l in textwrap::wrap(para.trim_start(), opts) {
                out.push_str(&l);
                out.push('\n');
            }
        }
    }
    out
}

pub fn render_json(e: &Explanation) -> String {
    serde_json::to_string_pretty(e).expect("explanation serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debugger::{diagnose, parse_spec, DiagnoseOptions};
    use crate::flowgraph::build_flow_graph;
    use crate::frontend::{desugar, parse_c, CSubsetConfig};
    use crate::matcher::SearchBudget;
    use crate::planlib::parse_plans;
    use indexmap::IndexMap;

    const BASE: &str = r#"
plan "counted-loop" kind=cliche category=pl
doc "@counter counts up to $bound"
node init kind=ANY
node cnt kind=JOIN
node cmp kind=OP op=LT
node bnd kind=ANY slot=$bound
node lh kind=LOOPHEAD
node step kind=OP op=ADD
node one kind=CONST const=1
data init:0 -> cnt:0
data cnt:0 -> cmp:0
data bnd:0 -> cmp:1
data cmp:0 -> lh:0
data cnt:0 -> step:0
data one:0 -> step:1
data step:0 -> cnt:1
export counter = cnt
end
plan "off-by-one" kind=bug corrupts="counted-loop" category=cbt
doc "@counter runs up to and including $bound, one step too far"
node init kind=ANY
node cnt kind=JOIN
node cmp kind=OP op=LE
node bnd kind=ANY slot=$bound
node lh kind=LOOPHEAD
node step kind=OP op=ADD
node one kind=CONST const=1
data init:0 -> cnt:0
data cnt:0 -> cmp:0
data bnd:0 -> cmp:1
data cmp:0 -> lh:0
data cnt:0 -> step:0
data one:0 -> step:1
data step:0 -> cnt:1
export counter = cnt
export fault = cmp
end
plan "running-total" kind=cliche category=pe
doc "@acc holds the sum of the array elements, starting from $init"
sub loop plan="counted-loop"
node init kind=CONST slot=$init
node acc kind=JOIN
node add kind=OP op=ADD
node elem kind=AREAD
data init:0 -> acc:0
data acc:0 -> add:0
data elem:0 -> add:1
data add:0 -> acc:1
data loop:0 -> elem:1
constraint eq($init, 0)
constraint commutable(add)
export acc = acc
end
"#;

    const SUM: &str = "int main() {\n    int a[10];\n    int n;\n    int i;\n    int s;\n    n = 10;\n    s = 0;\n    i = 0;\n    while (i < n) {\n        s = s + a[i];\n        i = i + 1;\n    }\n    return s;\n}\n";

    fn explain(src: &str) -> Explanation {
        let base = PlanBase::from_plans(parse_plans(BASE).unwrap()).unwrap();
        let g = build_flow_graph(&desugar(&parse_c(src, &CSubsetConfig::default()).unwrap())).unwrap();
        let spec = parse_spec("spec \"sum\" goal \"running-total\" required end").unwrap();
        let opts = DiagnoseOptions { program: "sum.c".into(), ..Default::default() };
        let report = diagnose(&g, &spec, &base, &SearchBudget::default(), &opts).unwrap();
        render(&report, src, &base, &g).unwrap()
    }

    #[test]
    fn correct_program_gets_meaning_section() {
        let e = explain(SUM);
        assert_eq!(e.sections.len(), 1);
        assert_eq!(e.sections[0].heading, "Program meaning");
        assert_eq!(e.sections[0].body[0], "s holds the sum of the array elements, starting from 0.");
        assert_eq!(e.sections[0].body[1], "  i counts up to 10.");
    }

    #[test]
    fn off_by_one_quotes_loop_test() {
        let src = SUM.replace("i < n", "i <= n");
        let e = explain(&src);
        assert_eq!(e.sections.len(), 1);
        let s = &e.sections[0];
        assert_eq!(s.severity, Severity::Error);
        let x = s.excerpt.as_ref().unwrap();
        assert_eq!(x.lines, vec![(9, "    while (i <= n) {".to_string())]);
        assert_eq!(x.caret.as_deref(), Some("             ^^"));
        assert!(s.body[0].contains("including 10"), "{:?}", s.body);
        assert!(s.body[1].contains("`running-total`"));
        let text = render_text(&e);
        assert!(!text.contains('$') && !text.contains('@'));
        assert!(text.lines().all(|l| l.chars().count() <= TEXT_WIDTH));
    }

    #[test]
    fn constraint_violation_section() {
        let e = explain(&SUM.replace("s = 0;", "s = 1;"));
        let s = &e.sections[0];
        assert!(s.body[0].contains("init=1, expected 0"));
        assert_eq!(s.excerpt.as_ref().unwrap().lines[0].1, "    s = 1;");
    }

    fn empty_report() -> DiagnosticReport {
        DiagnosticReport {
            program: "p.c".into(),
            spec: "t".into(),
            verdicts: IndexMap::new(),
            findings: vec![],
            recognized: vec![],
            meaning: None,
            budget_truncated: false,
        }
    }

    #[test]
    fn header_only_and_truncation() {
        let g = build_flow_graph(&parse_c("int main() { return 0; }", &CSubsetConfig::default()).unwrap()).unwrap();
        let base = PlanBase::new();
        let e = render(&empty_report(), "", &base, &g).unwrap();
        assert!(e.sections.is_empty());
        assert_eq!(render_text(&e), "adil report: p.c (spec \"t\")\n");
        let mut r = empty_report();
        r.budget_truncated = true;
        let e = render(&r, "", &base, &g).unwrap();
        assert_eq!(e.sections.len(), 1);
        assert_eq!(e.sections[0].severity, Severity::Warning);
    }

    #[test]
    fn rendering_is_deterministic() {
        let e = explain(&SUM.replace("i < n", "i <= n"));
        assert_eq!(render_text(&e), render_text(&e.clone()));
        assert_eq!(render_json(&e), render_json(&e.clone()));
    }

    #[test]
    fn multi_line_excerpt_has_no_caret() {
        let span = SourceSpan::new("f".into(), 2, 1, 3, 4);
        let x = excerpt("a\nbb\nccc\ndddd\n", &span);
        assert_eq!(x.lines, vec![(2, "bb".into()), (3, "ccc".into())]);
        assert!(x.caret.is_none());
    }
}
