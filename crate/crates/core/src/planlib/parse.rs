use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::template::{markers, Marker};
use super::{
    Binder, Category, CmpOp, Operand, PCtrlEdge, PDataEdge, PNode, PShape, Plan, PlanError, PlanKind, Predicate,
};
use crate::flowgraph::{CtrlLabel, NodeKind, OpCode};
use crate::span::SourceSpan;

/// Parses a text holding exactly one plan.
pub fn parse_plan(text: &str) -> Result<Plan, PlanError> {
    let mut plans = parse_plans(text)?;
    match plans.len() {
        1 => Ok(plans.pop().unwrap()),
        0 => Err(syntax(&Arc::from("<plan>"), 1, 1, 1, "expected `plan`, found end of input")),
        n => Err(PlanError::Semantic {
            plan: plans[1].name.clone(),
            message: format!("expected exactly one plan, found {n}"),
        }),
    }
}

pub fn parse_plans(text: &str) -> Result<Vec<Plan>, PlanError> {
    parse_plans_file(text, "<plan>")
}

/// Parses every plan in `text`; spans in errors name `file`.
pub fn parse_plans_file(text: &str, file: &str) -> Result<Vec<Plan>, PlanError> {
    let file: Arc<str> = Arc::from(file);
    let mut plans = Vec::new();
    let mut current: Option<(Plan, u32)> = None;
    let mut last_line = 1u32;
    let mut last_col = 1u32;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u32 + 1;
        last_line = line_no;
        last_col = raw.chars().count() as u32 + 1;
        let words = split_line(raw, line_no, &file)?;
        let Some(first) = words.first() else { continue };
        let head = first.text.as_str();

        if head == "plan" && !first.quoted {
            if let Some((p, start)) = &current {
                return Err(syntax(
                    &file,
                    line_no,
                    first.col,
                    first.end(),
                    &format!("plan `{}` opened on line {start} is missing `end`", p.name),
                ));
            }
            current = Some((parse_header(&words, &file)?, line_no));
            continue;
        }

        let Some((plan, _)) = current.as_mut() else {
            return Err(word_err(&file, first, &format!("expected `plan`, found `{}`", first.text)));
        };
        if first.quoted {
            return Err(word_err(&file, first, "expected a directive, found a string"));
        }
        match head {
            "end" => {
                expect_len(&words, 1, &file)?;
                let (plan, _) = current.take().unwrap();
                check_plan(&plan)?;
                plans.push(plan);
            }
            "doc" => {
                expect_len(&words, 2, &file)?;
                let w = &words[1];
                if !w.quoted {
                    return Err(word_err(&file, w, "doc text must be a quoted string"));
                }
                plan.doc = w.text.clone();
            }
            "node" => plan.pnodes.push(parse_node(&words, &file)?),
            "sub" => {
                expect_len(&words, 3, &file)?;
                let pid = ident(&words[1], &file)?;
                let plan_name = attr_string(&words[2], "plan", &file)?;
                plan.pnodes.push(PNode { pid, shape: PShape::Sub { plan: plan_name } });
            }
            "data" => {
                expect_len(&words, 4, &file)?;
                arrow(&words[2], &file)?;
                let (from, out_port) = port_ref(&words[1], &file)?;
                let (to, in_port) = port_ref(&words[3], &file)?;
                plan.data.push(PDataEdge { from, out_port, to, in_port });
            }
            "ctrl" => {
                if words.len() != 4 && words.len() != 5 {
                    return Err(word_err(&file, first, "expected `ctrl <pid> -> <pid> [label=<label>]`"));
                }
                arrow(&words[2], &file)?;
                let from = ident(&words[1], &file)?;
                let to = ident(&words[3], &file)?;
                let label = match words.get(4) {
                    Some(w) => {
                        let v = attr_bare(w, "label", &file)?;
                        Some(v.parse::<CtrlLabel>().map_err(|e| word_err(&file, w, &e))?)
                    }
                    None => None,
                };
                plan.ctrl.push(PCtrlEdge { from, to, label });
            }
            "constraint" => {
                let rest: String = words[1..].iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
                let pred = parse_predicate(&rest).map_err(|m| word_err(&file, first, &m))?;
                plan.constraints.push(pred);
            }
            "export" => {
                let (role, pid) = match words.len() {
                    4 if words[2].text == "=" && !words[2].quoted => {
                        (ident(&words[1], &file)?, ident(&words[3], &file)?)
                    }
                    2 => {
                        let w = &words[1];
                        let (r, p) = w
                            .text
                            .split_once('=')
                            .ok_or_else(|| word_err(&file, w, "expected `export <role> = <pid>`"))?;
                        if !is_ident(r) || !is_ident(p) {
                            return Err(word_err(&file, w, "expected `export <role> = <pid>`"));
                        }
                        (r.to_string(), p.to_string())
                    }
                    _ => return Err(word_err(&file, first, "expected `export <role> = <pid>`")),
                };
                plan.exports.push((role, pid));
            }
            other => {
                return Err(word_err(&file, first, &format!("unknown directive `{other}`")));
            }
        }
    }

    if let Some((p, start)) = current {
        return Err(syntax(
            &file,
            last_line,
            last_col,
            last_col,
            &format!("expected `end` for plan `{}` opened on line {start}, found end of input", p.name),
        ));
    }
    Ok(plans)
}

#[derive(Debug)]
struct Word {
    text: String,
    quoted: bool,
    /// For `key="value"`, the key including `=`; `text` then holds the value.
    key: Option<String>,
    line: u32,
    col: u32,
    width: u32,
}

impl Word {
    fn end(&self) -> u32 {
        self.col + self.width.saturating_sub(1)
    }
}

fn split_line(raw: &str, line: u32, file: &Arc<str>) -> Result<Vec<Word>, PlanError> {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == ';' {
            break;
        }
        let start = i;
        let mut bare = String::new();
        while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' && chars[i] != ';' {
            bare.push(chars[i]);
            i += 1;
        }
        if i < chars.len() && chars[i] == '"' && (bare.is_empty() || bare.ends_with('=')) {
            i += 1;
            let mut s = String::new();
            let mut closed = false;
            while i < chars.len() {
                match chars[i] {
                    '"' => {
                        closed = true;
                        i += 1;
                        break;
                    }
                    '\\' if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    ch => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            if !closed {
                let col = start as u32 + 1;
                return Err(syntax(file, line, col, chars.len() as u32, "unterminated string"));
            }
            let key = if bare.is_empty() { None } else { Some(bare) };
            out.push(Word { text: s, quoted: true, key, line, col: start as u32 + 1, width: (i - start) as u32 });
        } else {
            out.push(Word {
                text: bare,
                quoted: false,
                key: None,
                line,
                col: start as u32 + 1,
                width: (i - start) as u32,
            });
        }
    }
    Ok(out)
}

fn syntax(file: &Arc<str>, line: u32, c0: u32, c1: u32, msg: &str) -> PlanError {
    PlanError::Syntax { span: SourceSpan::new(file.clone(), line, c0, line, c1.max(c0)), message: msg.to_string() }
}

fn word_err(file: &Arc<str>, w: &Word, msg: &str) -> PlanError {
    syntax(file, w.line, w.col, w.end(), msg)
}

fn expect_len(words: &[Word], n: usize, file: &Arc<str>) -> Result<(), PlanError> {
    if words.len() == n {
        return Ok(());
    }
    if words.len() > n {
        let w = &words[n];
        Err(word_err(file, w, &format!("unexpected `{}` after `{}` directive", w.text, words[0].text)))
    } else {
        let last = words.last().unwrap();
        Err(syntax(
            file,
            last.line,
            last.end() + 1,
            last.end() + 1,
            &format!("`{}` directive is incomplete", words[0].text),
        ))
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn ident(w: &Word, file: &Arc<str>) -> Result<String, PlanError> {
    if !w.quoted && is_ident(&w.text) {
        Ok(w.text.clone())
    } else {
        Err(word_err(file, w, &format!("expected an identifier, found `{}`", w.text)))
    }
}

fn arrow(w: &Word, file: &Arc<str>) -> Result<(), PlanError> {
    if !w.quoted && w.text == "->" {
        Ok(())
    } else {
        Err(word_err(file, w, &format!("expected `->`, found `{}`", w.text)))
    }
}

fn port_ref(w: &Word, file: &Arc<str>) -> Result<(String, u32), PlanError> {
    let bad = || word_err(file, w, &format!("expected `<pid>:<port>`, found `{}`", w.text));
    if w.quoted {
        return Err(bad());
    }
    let (pid, port) = w.text.rsplit_once(':').ok_or_else(bad)?;
    if !is_ident(pid) {
        return Err(bad());
    }
    let port = port.parse::<u32>().map_err(|_| bad())?;
    Ok((pid.to_string(), port))
}

fn attr_bare<'w>(w: &'w Word, key: &str, file: &Arc<str>) -> Result<&'w str, PlanError> {
    if !w.quoted {
        if let Some((k, v)) = w.text.split_once('=') {
            if k == key && !v.is_empty() {
                return Ok(v);
            }
        }
    }
    Err(word_err(file, w, &format!("expected `{key}=...`, found `{}`", w.text)))
}

fn attr_string(w: &Word, key: &str, file: &Arc<str>) -> Result<String, PlanError> {
    match &w.key {
        Some(k) if w.quoted && k.strip_suffix('=') == Some(key) => Ok(w.text.clone()),
        _ => Err(word_err(file, w, &format!("expected `{key}=\"...\"`"))),
    }
}

fn parse_header(words: &[Word], file: &Arc<str>) -> Result<Plan, PlanError> {
    let head = &words[0];
    let name_w = words
        .get(1)
        .ok_or_else(|| syntax(file, head.line, head.end() + 1, head.end() + 1, "expected a quoted plan name"))?;
    if !name_w.quoted || name_w.key.is_some() {
        return Err(word_err(file, name_w, "expected a quoted plan name"));
    }
    if name_w.text.is_empty() {
        return Err(word_err(file, name_w, "plan name is empty"));
    }
    let mut kind = None;
    let mut corrupts = None;
    let mut category = None;
    for w in &words[2..] {
        if w.quoted {
            if w.key.as_deref() == Some("corrupts=") && corrupts.is_none() {
                corrupts = Some(w.text.clone());
                continue;
            }
            return Err(word_err(file, w, "unexpected string in plan header"));
        }
        match w.text.split_once('=') {
            Some(("kind", v)) if kind.is_none() => {
                kind = Some(v.parse::<PlanKind>().map_err(|e| word_err(file, w, &e))?)
            }
            Some(("category", v)) if category.is_none() => {
                category = Some(v.parse::<Category>().map_err(|e| word_err(file, w, &e))?)
            }
            _ => return Err(word_err(file, w, &format!("unexpected `{}` in plan header", w.text))),
        }
    }
    let kind = kind.ok_or_else(|| word_err(file, head, "plan header is missing kind="))?;
    let category = category.ok_or_else(|| word_err(file, head, "plan header is missing category="))?;
    match (kind, &corrupts) {
        (PlanKind::Bug, None) => return Err(word_err(file, head, "a bug plan needs corrupts=\"<plan>\"")),
        (PlanKind::Cliche, Some(_)) => return Err(word_err(file, head, "only bug plans may declare corrupts=")),
        _ => {}
    }
    Ok(Plan {
        name: name_w.text.clone(),
        kind,
        corrupts,
        category,
        doc: String::new(),
        pnodes: Vec::new(),
        data: Vec::new(),
        ctrl: Vec::new(),
        constraints: Vec::new(),
        exports: Vec::new(),
    })
}

fn parse_node(words: &[Word], file: &Arc<str>) -> Result<PNode, PlanError> {
    if words.len() < 3 {
        return expect_len(words, 3, file).map(|_| unreachable!());
    }
    let pid = ident(&words[1], file)?;
    let kind_text = attr_bare(&words[2], "kind", file)?;
    let kind = if kind_text == "ANY" {
        None
    } else {
        Some(kind_text.parse::<NodeKind>().map_err(|e| word_err(file, &words[2], &e))?)
    };
    let mut op = None;
    let mut binder = None;
    for w in &words[3..] {
        let text = if w.quoted { "" } else { w.text.as_str() };
        match text.split_once('=') {
            Some(("op", v)) if op.is_none() => {
                op = Some(v.parse::<OpCode>().map_err(|e| word_err(file, w, &e))?);
            }
            Some(("const", v)) if binder.is_none() => {
                let n = v.parse::<i64>().map_err(|_| word_err(file, w, &format!("bad integer `{v}`")))?;
                binder = Some(Binder::Const(n));
            }
            Some(("slot", v)) if binder.is_none() => {
                let name = v
                    .strip_prefix('$')
                    .filter(|s| is_ident(s))
                    .ok_or_else(|| word_err(file, w, "expected `slot=$<ident>`"))?;
                binder = Some(Binder::Slot(name.to_string()));
            }
            _ => return Err(word_err(file, w, &format!("unexpected `{}` in node declaration", w.text))),
        }
    }
    Ok(PNode { pid, shape: PShape::Node { kind, op, binder } })
}

/// Parses `name(arg, arg)`; whitespace is insignificant.
pub(crate) fn parse_predicate(text: &str) -> Result<Predicate, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (name, rest) = compact.split_once('(').ok_or_else(|| format!("expected `<predicate>(...)`, found `{text}`"))?;
    let args = rest.strip_suffix(')').ok_or_else(|| format!("missing `)` in `{text}`"))?;
    let args: Vec<&str> = if args.is_empty() { Vec::new() } else { args.split(',').collect() };
    let want = |n: usize| -> Result<(), String> {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("`{name}` takes {n} argument(s), found {}", args.len()))
        }
    };
    let pid = |s: &str| -> Result<String, String> {
        if is_ident(s) {
            Ok(s.to_string())
        } else {
            Err(format!("expected a pattern node id, found `{s}`"))
        }
    };
    let slot = |s: &str| -> Result<String, String> {
        s.strip_prefix('$')
            .filter(|n| is_ident(n))
            .map(str::to_string)
            .ok_or_else(|| format!("expected `$<slot>`, found `{s}`"))
    };
    if let Some(op) = CmpOp::ALL.into_iter().find(|o| o.name() == name) {
        want(2)?;
        let lhs = slot(args[0])?;
        let rhs = if args[1].starts_with('$') {
            Operand::Slot(slot(args[1])?)
        } else {
            Operand::Int(
                args[1].parse::<i64>().map_err(|_| format!("expected an integer or `$<slot>`, found `{}`", args[1]))?,
            )
        };
        return Ok(Predicate::Cmp { op, slot: lhs, rhs });
    }
    match name {
        "samevar" => {
            want(2)?;
            Ok(Predicate::SameVar(pid(args[0])?, pid(args[1])?))
        }
        "distinctvar" => {
            want(2)?;
            Ok(Predicate::DistinctVar(pid(args[0])?, pid(args[1])?))
        }
        "commutable" => {
            want(1)?;
            Ok(Predicate::Commutable(pid(args[0])?))
        }
        _ => Err(format!("unknown predicate `{name}`")),
    }
}

fn sem(plan: &Plan, message: String) -> PlanError {
    PlanError::Semantic { plan: plan.name.clone(), message }
}

/// Checks everything that can be checked without the rest of the plan base.
pub fn check_plan(plan: &Plan) -> Result<(), PlanError> {
    if plan.pnodes.is_empty() {
        return Err(sem(plan, "a plan needs at least one pattern node".into()));
    }
    let mut pids = BTreeMap::new();
    let mut slots = BTreeSet::new();
    for (i, p) in plan.pnodes.iter().enumerate() {
        if pids.insert(p.pid.as_str(), i).is_some() {
            return Err(sem(plan, format!("duplicate pattern node `{}`", p.pid)));
        }
        if let PShape::Node { kind, op, binder } = &p.shape {
            if op.is_some() && !matches!(kind, Some(NodeKind::Op) | None) {
                return Err(sem(plan, format!("`{}`: op= is only allowed on OP or ANY nodes", p.pid)));
            }
            match binder {
                Some(Binder::Const(_)) if !matches!(kind, Some(NodeKind::Const) | None) => {
                    return Err(sem(plan, format!("`{}`: const= is only allowed on CONST or ANY nodes", p.pid)));
                }
                Some(Binder::Slot(s)) if !slots.insert(s.as_str()) => {
                    return Err(sem(plan, format!("slot `${s}` is bound twice")));
                }
                _ => {}
            }
        }
    }
    let known = |pid: &str| -> Result<&PNode, PlanError> {
        pids.get(pid).map(|&i| &plan.pnodes[i]).ok_or_else(|| sem(plan, format!("unknown pattern node `{pid}`")))
    };
    for e in &plan.data {
        let from = known(&e.from)?;
        let to = known(&e.to)?;
        if let Some(max) = out_ports(from) {
            if e.out_port >= max {
                return Err(sem(plan, format!("`{}` has no output port {}", e.from, e.out_port)));
            }
        }
        if let Some(max) = in_ports(to) {
            if e.in_port >= max {
                return Err(sem(plan, format!("`{}` has no input port {}", e.to, e.in_port)));
            }
        }
    }
    for e in &plan.ctrl {
        known(&e.from)?;
        known(&e.to)?;
    }
    let mut roles = BTreeSet::new();
    for (role, pid) in &plan.exports {
        known(pid)?;
        if !roles.insert(role.as_str()) {
            return Err(sem(plan, format!("role `{role}` is exported twice")));
        }
    }
    let has_slot = |s: &str| -> Result<(), PlanError> {
        if slots.contains(s) {
            Ok(())
        } else {
            Err(sem(plan, format!("unknown slot `${s}`")))
        }
    };
    for c in &plan.constraints {
        match c {
            Predicate::Cmp { slot, rhs, .. } => {
                has_slot(slot)?;
                if let Operand::Slot(s) = rhs {
                    has_slot(s)?;
                }
            }
            Predicate::SameVar(a, b) | Predicate::DistinctVar(a, b) => {
                for pid in [a, b] {
                    if known(pid)?.sub_plan().is_some() {
                        return Err(sem(plan, format!("`{pid}` is a sub-plan node and has no variable")));
                    }
                }
            }
            Predicate::Commutable(p) => match &known(p)?.shape {
                PShape::Node { kind: Some(NodeKind::Op) | None, .. } => {}
                _ => return Err(sem(plan, format!("commutable(`{p}`) needs an OP node"))),
            },
        }
    }
    for m in markers(&plan.doc) {
        match m {
            Marker::Slot(s) => has_slot(&s)?,
            Marker::Role(r) if !roles.contains(r.as_str()) => {
                return Err(sem(plan, format!("doc refers to unexported role `@{r}`")));
            }
            Marker::Role(_) => {}
        }
    }
    check_connected(plan, &pids)
}

fn out_ports(p: &PNode) -> Option<u32> {
    match &p.shape {
        PShape::Node { kind: Some(k), .. } => match k.fixed_arity() {
            Some((_, outs)) => Some(outs),
            None => Some(1),
        },
        _ => None,
    }
}

fn in_ports(p: &PNode) -> Option<u32> {
    match &p.shape {
        PShape::Node { kind: Some(NodeKind::Op), op: Some(op), .. } => Some(op.arity()),
        PShape::Node { kind: Some(NodeKind::Op), op: None, .. } => Some(2),
        PShape::Node { kind: Some(k), .. } => k.fixed_arity().map(|(ins, _)| ins),
        _ => None,
    }
}

fn check_connected(plan: &Plan, pids: &BTreeMap<&str, usize>) -> Result<(), PlanError> {
    let n = plan.pnodes.len();
    let mut adj = vec![Vec::new(); n];
    let edges = plan.data.iter().map(|e| (&e.from, &e.to)).chain(plan.ctrl.iter().map(|e| (&e.from, &e.to)));
    for (a, b) in edges {
        let (a, b) = (pids[a.as_str()], pids[b.as_str()]);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(sem(
            plan,
            format!("pattern is not connected: `{}` is unreachable from `{}`", plan.pnodes[i].pid, plan.pnodes[0].pid),
        )),
        None => Ok(()),
    }
}
