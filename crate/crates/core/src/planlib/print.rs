use std::fmt::Write;

use super::{Binder, PShape, Plan, PlanKind};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text of a plan. Parsing the output yields an equal plan.
pub fn print_plan(plan: &Plan) -> String {
    let mut s = String::new();
    write!(s, "plan {} kind={}", quote(&plan.name), plan.kind.as_str()).unwrap();
    if let (PlanKind::Bug, Some(c)) = (plan.kind, &plan.corrupts) {
        write!(s, " corrupts={}", quote(c)).unwrap();
    }
    writeln!(s, " category={}", plan.category.as_str()).unwrap();
    writeln!(s, "doc {}", quote(&plan.doc)).unwrap();
    for p in &plan.pnodes {
        match &p.shape {
            PShape::Node { kind, op, binder } => {
                let kind = kind.map_or("ANY", |k| k.as_str());
                write!(s, "node {} kind={kind}", p.pid).unwrap();
                if let Some(op) = op {
                    write!(s, " op={op}").unwrap();
                }
                match binder {
                    Some(Binder::Const(n)) => write!(s, " const={n}").unwrap(),
                    Some(Binder::Slot(name)) => write!(s, " slot=${name}").unwrap(),
                    None => {}
                }
                s.push('\n');
            }
            PShape::Sub { plan } => writeln!(s, "sub {} plan={}", p.pid, quote(plan)).unwrap(),
        }
    }
    for e in &plan.data {
        writeln!(s, "data {}:{} -> {}:{}", e.from, e.out_port, e.to, e.in_port).unwrap();
    }
    for e in &plan.ctrl {
        write!(s, "ctrl {} -> {}", e.from, e.to).unwrap();
        if let Some(l) = e.label {
            write!(s, " label={l}").unwrap();
        }
        s.push('\n');
    }
    for c in &plan.constraints {
        writeln!(s, "constraint {c}").unwrap();
    }
    for (role, pid) in &plan.exports {
        writeln!(s, "export {role} = {pid}").unwrap();
    }
    s.push_str("end\n");
    s
}

/// Plans separated by blank lines.
pub fn print_plans<'a>(plans: impl IntoIterator<Item = &'a Plan>) -> String {
    plans.into_iter().map(print_plan).collect::<Vec<_>>().join("\n")
}
