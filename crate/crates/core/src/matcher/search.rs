use std::collections::{BTreeMap, HashMap, HashSet};

use indexmap::IndexMap;

use super::{check_constraints, MatchError, MatchResult, SearchBudget};
use crate::flowgraph::{CtrlLabel, FlowGraph, NodeId, NodeKind, OpCode};
use crate::planlib::{Binder, PShape, Plan, Predicate};

/// An accepted match of a sub-plan, usable as a pseudo-node.
#[derive(Debug, Clone, PartialEq, Eq)]
struct SubMatch {
    nodes: Vec<NodeId>,
    /// Covered nodes not bound only through wildcards; no other pattern
    /// node may take these.
    owned: Vec<NodeId>,
    /// Node of each export of the sub-plan, in export order.
    exports: Vec<NodeId>,
}

/// Accepted matches of already-recognized plans, keyed by plan name.
#[derive(Debug, Clone, Default)]
pub struct SubMatches {
    by_plan: BTreeMap<String, Vec<SubMatch>>,
}

impl SubMatches {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the accepted results of `plan`; others are ignored.
    pub fn insert(&mut self, plan: &Plan, results: &[MatchResult]) {
        let list = results
            .iter()
            .filter(|r| r.accepted)
            .filter_map(|r| {
                let exports =
                    plan.exports.iter().map(|(_, pid)| r.binding.get(pid).copied()).collect::<Option<Vec<_>>>()?;
                let owned = r.nodes.iter().copied().filter(|id| !r.shared.contains(id)).collect();
                Some(SubMatch { nodes: r.nodes.clone(), owned, exports })
            })
            .collect();
        self.by_plan.insert(plan.name.clone(), list);
    }

    pub fn contains(&self, plan: &str) -> bool {
        self.by_plan.contains_key(plan)
    }
}

/// Unifies a plan without sub-plan nodes against `g`.
pub fn unify(g: &FlowGraph, plan: &Plan, budget: &SearchBudget) -> Result<Vec<MatchResult>, MatchError> {
    unify_with(g, plan, &SubMatches::new(), budget)
}

/// Unifies `plan` against `g`, binding sub-plan nodes to the accepted
/// matches in `subs`. Returns every complete match found plus maximal
/// partial matches scoring at least `budget.theta`, best first.
pub fn unify_with(
    g: &FlowGraph,
    plan: &Plan,
    subs: &SubMatches,
    budget: &SearchBudget,
) -> Result<Vec<MatchResult>, MatchError> {
    if plan.pnodes.len() > g.len() {
        return Ok(Vec::new());
    }
    let compiled = Compiled::new(g, plan, subs);
    let n = compiled.pids.len();
    let max_skips = {
        let need = budget.theta * n as f64 - 1e-9;
        (0..=n).rev().find(|&k| (n - k) as f64 >= need).unwrap_or(0)
    };
    let mut st = State {
        c: &compiled,
        g,
        order: compiled.search_order(None),
        assign: vec![Bind::Free; n],
        used: vec![false; g.len()],
        skipped: 0,
        max_skips,
        steps: 0,
        max_steps: budget.max_extension_steps,
        truncated: false,
        seen: HashSet::new(),
        raw: Vec::new(),
    };
    st.search(0);
    // Near misses depend on where the search starts, so grow one from every
    // pattern node in turn. Complete matches were all found above.
    if max_skips > 0 {
        for seed in 0..n {
            if st.truncated {
                break;
            }
            st.order = compiled.search_order(Some(seed));
            st.search(0);
        }
    }

    let truncated = st.truncated;
    let raw = std::mem::take(&mut st.raw);
    let results = finish(g, plan, &compiled, raw);
    if truncated {
        Err(MatchError::BudgetExceeded {
            plan: plan.name.clone(),
            budget: budget.max_extension_steps,
            partial: results,
        })
    } else {
        Ok(results)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Bind {
    Free,
    Skipped,
    Node(NodeId),
    /// Index into the pseudo-node list of the pattern node's sub-plan.
    Sub(u32),
}

struct PEdge {
    from: usize,
    out_port: u32,
    to: usize,
    in_port: u32,
}

struct CEdge {
    from: usize,
    to: usize,
    label: Option<CtrlLabel>,
}

struct Compiled<'a> {
    pids: Vec<&'a str>,
    /// Pseudo-node list for sub-plan pattern nodes; `None` for plain ones.
    sub_list: Vec<Option<&'a [SubMatch]>>,
    /// Membership of each graph node in a plain pattern node's domain.
    in_domain: Vec<Vec<bool>>,
    domain_size: Vec<usize>,
    commutable: Vec<bool>,
    /// Pattern node is the ANY wildcard.
    wildcard: Vec<bool>,
    /// Pattern node matches only constants.
    constant: Vec<bool>,
    data: Vec<PEdge>,
    data_in: Vec<Vec<usize>>,
    data_out: Vec<Vec<usize>>,
    ctrl: Vec<CEdge>,
    ctrl_at: Vec<Vec<usize>>,
}

fn node_fits(g: &FlowGraph, id: NodeId, kind: Option<NodeKind>, op: Option<OpCode>, binder: &Option<Binder>) -> bool {
    let n = g.node(id);
    kind.is_none_or(|k| n.kind == k)
        && op.is_none_or(|o| n.op == Some(o))
        && match binder {
            Some(Binder::Const(v)) => n.kind == NodeKind::Const && n.value == Some(*v),
            _ => true,
        }
}

impl<'a> Compiled<'a> {
    fn new(g: &FlowGraph, plan: &'a Plan, subs: &'a SubMatches) -> Self {
        let n = plan.pnodes.len();
        let idx = |pid: &str| plan.pid_index(pid).expect("validated plan");
        let mut sub_list = Vec::with_capacity(n);
        let mut in_domain = Vec::with_capacity(n);
        let mut domain_size = Vec::with_capacity(n);
        for p in &plan.pnodes {
            match &p.shape {
                PShape::Node { kind, op, binder } => {
                    let dom: Vec<bool> = g.nodes().iter().map(|gn| node_fits(g, gn.id, *kind, *op, binder)).collect();
                    domain_size.push(dom.iter().filter(|b| **b).count());
                    in_domain.push(dom);
                    sub_list.push(None);
                }
                PShape::Sub { plan: sp } => {
                    let list: &[SubMatch] = subs.by_plan.get(sp).map(Vec::as_slice).unwrap_or(&[]);
                    domain_size.push(list.len());
                    in_domain.push(Vec::new());
                    sub_list.push(Some(list));
                }
            }
        }
        let mut commutable = vec![false; n];
        for c in &plan.constraints {
            if let Predicate::Commutable(p) = c {
                commutable[idx(p)] = true;
            }
        }
        let data: Vec<PEdge> = plan
            .data
            .iter()
            .map(|e| PEdge { from: idx(&e.from), out_port: e.out_port, to: idx(&e.to), in_port: e.in_port })
            .collect();
        let ctrl: Vec<CEdge> =
            plan.ctrl.iter().map(|e| CEdge { from: idx(&e.from), to: idx(&e.to), label: e.label }).collect();
        let mut data_in = vec![Vec::new(); n];
        let mut data_out = vec![Vec::new(); n];
        for (i, e) in data.iter().enumerate() {
            data_in[e.to].push(i);
            data_out[e.from].push(i);
        }
        let mut ctrl_at = vec![Vec::new(); n];
        for (i, e) in ctrl.iter().enumerate() {
            ctrl_at[e.from].push(i);
            if e.to != e.from {
                ctrl_at[e.to].push(i);
            }
        }
        Compiled {
            pids: plan.pnodes.iter().map(|p| p.pid.as_str()).collect(),
            sub_list,
            in_domain,
            domain_size,
            commutable,
            wildcard: plan.pnodes.iter().map(|p| matches!(p.shape, PShape::Node { kind: None, .. })).collect(),
            constant: plan
                .pnodes
                .iter()
                .map(|p| matches!(p.shape, PShape::Node { kind: Some(NodeKind::Const), .. }))
                .collect(),
            data,
            data_in,
            data_out,
            ctrl,
            ctrl_at,
        }
    }

    /// `seed` (default: the rarest pattern node) first, then grow along data
    /// edges, then control edges; ties go to the rarer node, then to
    /// declaration order.
    fn search_order(&self, seed: Option<usize>) -> Vec<usize> {
        let n = self.pids.len();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        if let Some(s) = seed {
            placed[s] = true;
            order.push(s);
        }
        let rarest = |cands: &mut dyn Iterator<Item = usize>| cands.min_by_key(|&i| (self.domain_size[i], i));
        while order.len() < n {
            let data_adj = (0..n).filter(|&i| {
                !placed[i]
                    && self.data_in[i].iter().chain(&self.data_out[i]).any(|&e| {
                        let e = &self.data[e];
                        placed[e.from] || placed[e.to]
                    })
            });
            let next = rarest(&mut data_adj.into_iter())
                .or_else(|| {
                    let ctrl_adj = (0..n).filter(|&i| {
                        !placed[i]
                            && self.ctrl_at[i].iter().any(|&e| placed[self.ctrl[e].from] || placed[self.ctrl[e].to])
                    });
                    rarest(&mut ctrl_adj.into_iter())
                })
                .or_else(|| rarest(&mut (0..n).filter(|&i| !placed[i])))
                .unwrap();
            placed[next] = true;
            order.push(next);
        }
        order
    }
}

struct State<'a, 'c> {
    c: &'c Compiled<'a>,
    g: &'c FlowGraph,
    order: Vec<usize>,
    assign: Vec<Bind>,
    used: Vec<bool>,
    skipped: usize,
    max_skips: usize,
    steps: u64,
    max_steps: u64,
    truncated: bool,
    seen: HashSet<Vec<Bind>>,
    raw: Vec<Vec<Bind>>,
}

impl State<'_, '_> {
    fn search(&mut self, depth: usize) {
        if depth == self.assign.len() {
            if self.seen.insert(self.assign.clone()) {
                self.raw.push(self.assign.clone());
            }
            return;
        }
        let swap = self.deferral(depth);
        if let Some(j) = swap {
            self.order.swap(depth, j);
        }
        self.extend(depth);
        if let Some(j) = swap {
            self.order.swap(depth, j);
        }
    }

    /// A later position to visit first when the node due at `depth` has no
    /// bound neighbour yet but some other pending node does.
    fn deferral(&self, depth: usize) -> Option<usize> {
        let x = self.order[depth];
        if depth == 0 || self.c.sub_list[x].is_some() || self.c.constant[x] || self.anchored(x) {
            return None;
        }
        (depth + 1..self.order.len()).find(|&j| self.anchored(self.order[j]))
    }

    fn extend(&mut self, depth: usize) {
        let x = self.order[depth];
        let mut any = false;
        for cand in self.candidates(x) {
            if self.steps >= self.max_steps {
                self.truncated = true;
                return;
            }
            self.steps += 1;
            if !self.available(x, cand) {
                continue;
            }
            self.assign[x] = cand;
            if self.consistent(x) {
                any = true;
                self.occupy(x, cand, true);
                self.search(depth + 1);
                self.occupy(x, cand, false);
            }
            self.assign[x] = Bind::Free;
            if self.truncated {
                return;
            }
        }
        if !any && self.skipped < self.max_skips {
            self.assign[x] = Bind::Skipped;
            self.skipped += 1;
            self.search(depth + 1);
            self.skipped -= 1;
            self.assign[x] = Bind::Free;
        }
    }

    fn sub(&self, p: usize, k: u32) -> &SubMatch {
        &self.c.sub_list[p].expect("sub pattern node")[k as usize]
    }

    fn covered(&self, b: Bind, p: usize) -> Vec<NodeId> {
        match b {
            Bind::Node(id) => vec![id],
            Bind::Sub(k) => self.sub(p, k).nodes.clone(),
            _ => Vec::new(),
        }
    }

    fn occupy(&mut self, x: usize, b: Bind, on: bool) {
        let ids = match b {
            Bind::Sub(k) => self.sub(x, k).owned.clone(),
            _ => self.covered(b, x),
        };
        for id in ids {
            self.used[id.index()] = on;
        }
    }

    fn available(&self, x: usize, b: Bind) -> bool {
        match b {
            Bind::Node(id) => !self.used[id.index()],
            Bind::Sub(k) => self.sub(x, k).owned.iter().all(|id| !self.used[id.index()]),
            _ => false,
        }
    }

    fn is_bound(&self, p: usize) -> bool {
        matches!(self.assign[p], Bind::Node(_) | Bind::Sub(_))
    }

    /// Graph output `(node, port)` standing for pattern output `p:out_port`.
    fn source(&self, p: usize, out_port: u32) -> Option<(NodeId, u32)> {
        match self.assign[p] {
            Bind::Node(id) => Some((id, out_port)),
            Bind::Sub(k) => self.sub(p, k).exports.get(out_port as usize).map(|&id| (id, 0)),
            _ => None,
        }
    }

    fn candidates(&self, x: usize) -> Vec<Bind> {
        if let Some(list) = self.c.sub_list[x] {
            return (0..list.len() as u32).map(Bind::Sub).collect();
        }
        let g = self.g;
        let dom = &self.c.in_domain[x];
        let mut best: Option<Vec<NodeId>> = None;
        let offer = |best: &mut Option<Vec<NodeId>>, mut v: Vec<NodeId>| {
            v.retain(|id| dom[id.index()]);
            v.sort();
            v.dedup();
            if best.as_ref().is_none_or(|b| v.len() < b.len()) {
                *best = Some(v);
            }
        };
        for &e in &self.c.data_in[x] {
            let e = &self.c.data[e];
            if let Some((src, port)) = self.source(e.from, e.out_port) {
                offer(&mut best, g.data_out(src).iter().filter(|d| d.out_port == port).map(|d| d.to).collect());
            }
        }
        for &e in &self.c.data_out[x] {
            let e = &self.c.data[e];
            if let Bind::Node(dst) = self.assign[e.to] {
                let ins = g.node(dst).in_ports;
                offer(&mut best, (0..ins).filter_map(|p| g.feeder(dst, p)).map(|(f, _)| f).collect());
            }
        }
        if best.is_none() {
            for &e in &self.c.ctrl_at[x] {
                let e = &self.c.ctrl[e];
                if e.from == x {
                    if let Bind::Node(dst) = self.assign[e.to] {
                        offer(&mut best, g.ctrl_in(dst).iter().map(|c| c.from).collect());
                    }
                } else if let Bind::Node(src) = self.assign[e.from] {
                    offer(&mut best, g.ctrl_out(src).iter().map(|c| c.to).collect());
                }
            }
        }
        if best.is_none() && !self.c.constant[x] && x != self.order[0] && !self.anchored(x) {
            // Only skipped neighbours: anything bound here would be
            // disconnected from the rest of the partial match. Constants
            // are the exception, since their value alone is evidence.
            return Vec::new();
        }
        let ids = best.unwrap_or_else(|| (0..g.len() as u32).map(NodeId).filter(|id| dom[id.index()]).collect());
        ids.into_iter().map(Bind::Node).collect()
    }

    fn anchored(&self, x: usize) -> bool {
        let data =
            self.c.data_in[x].iter().chain(&self.c.data_out[x]).map(|&e| &self.c.data[e]).map(|e| (e.from, e.to));
        let ctrl = self.c.ctrl_at[x].iter().map(|&e| &self.c.ctrl[e]).map(|e| (e.from, e.to));
        data.chain(ctrl).any(|(a, b)| (a != x && self.is_bound(a)) || (b != x && self.is_bound(b)))
    }

    /// Checks every pattern edge between `x` and bound pattern nodes.
    fn consistent(&self, x: usize) -> bool {
        if !self.inputs_ok(x) {
            return false;
        }
        for &e in &self.c.data_out[x] {
            let to = self.c.data[e].to;
            if to != x && self.is_bound(to) && !self.inputs_ok(to) {
                return false;
            }
        }
        self.c.ctrl_at[x].iter().all(|&e| {
            let e = &self.c.ctrl[e];
            !(self.is_bound(e.from) && self.is_bound(e.to)) || self.ctrl_ok(e)
        })
    }

    /// All pattern data edges into `y` from bound sources hold, under some
    /// admissible operand order of `y`.
    fn inputs_ok(&self, y: usize) -> bool {
        let g = self.g;
        let edges: Vec<&PEdge> =
            self.c.data_in[y].iter().map(|&e| &self.c.data[e]).filter(|e| self.is_bound(e.from)).collect();
        match self.assign[y] {
            Bind::Node(dst) => {
                let node = g.node(dst);
                let swap = self.c.commutable[y] && node.in_ports == 2 && node.op.is_some_and(OpCode::is_commutative);
                let holds = |perm: fn(u32) -> u32| {
                    edges.iter().all(|e| match self.source(e.from, e.out_port) {
                        Some((src, port)) => g.has_data_edge(src, port, dst, perm(e.in_port)),
                        None => false,
                    })
                };
                holds(|p| p) || (swap && holds(|p| 1 - p.min(1)))
            }
            Bind::Sub(k) => {
                let sub = self.sub(y, k);
                edges.iter().all(|e| {
                    let (Some((src, port)), Some(&dst)) =
                        (self.source(e.from, e.out_port), sub.exports.get(e.in_port as usize))
                    else {
                        return false;
                    };
                    g.data_out(src).iter().any(|d| d.out_port == port && d.to == dst)
                })
            }
            _ => true,
        }
    }

    fn ctrl_ok(&self, e: &CEdge) -> bool {
        let from = self.covered(self.assign[e.from], e.from);
        let to = self.covered(self.assign[e.to], e.to);
        from.iter().any(|&a| to.iter().any(|&b| self.g.has_ctrl_edge(a, b, e.label)))
    }
}

fn finish(g: &FlowGraph, plan: &Plan, c: &Compiled, raw: Vec<Vec<Bind>>) -> Vec<MatchResult> {
    let total = c.pids.len() as u32;
    let mut results: Vec<(Vec<Bind>, MatchResult)> = raw
        .into_iter()
        .map(|assign| {
            let mut binding = IndexMap::new();
            let mut unbound = Vec::new();
            let mut nodes = Vec::new();
            let mut owned = Vec::new();
            for (p, b) in assign.iter().enumerate() {
                match *b {
                    Bind::Node(id) => {
                        binding.insert(c.pids[p].to_string(), id);
                        nodes.push(id);
                        if !c.wildcard[p] {
                            owned.push(id);
                        }
                    }
                    Bind::Sub(k) => {
                        let sm = &c.sub_list[p].unwrap()[k as usize];
                        let anchor = sm.exports.first().or(sm.nodes.first()).copied().expect("non-empty sub-match");
                        binding.insert(c.pids[p].to_string(), anchor);
                        nodes.extend(&sm.nodes);
                        owned.extend(&sm.owned);
                    }
                    _ => unbound.push(c.pids[p].to_string()),
                }
            }
            nodes.sort();
            nodes.dedup();
            let shared = nodes.iter().copied().filter(|id| !owned.contains(id)).collect();
            let mut spans: Vec<_> = nodes.iter().map(|&id| g.node(id).ann.span.clone()).collect();
            spans.sort();
            spans.dedup();
            let matched = binding.len() as u32;
            let m = MatchResult {
                plan: plan.name.clone(),
                binding,
                unbound,
                nodes,
                shared,
                slots: IndexMap::new(),
                matched,
                total,
                score: matched as f64 / total as f64,
                constraint_outcomes: Vec::new(),
                accepted: false,
                spans,
            };
            (assign, check_constraints(m, plan, g))
        })
        .collect();

    // Drop partial results whose binding extends to a larger result. Each
    // candidate superset shares every binding, so scanning the shortest
    // posting list among them suffices.
    let bound = |a: &[Bind]| -> Vec<(usize, Bind)> {
        a.iter().enumerate().filter(|(_, b)| matches!(b, Bind::Node(_) | Bind::Sub(_))).map(|(p, b)| (p, *b)).collect()
    };
    let mut postings: HashMap<(usize, Bind), Vec<usize>> = HashMap::new();
    for (i, (a, _)) in results.iter().enumerate() {
        for key in bound(a) {
            postings.entry(key).or_default().push(i);
        }
    }
    let keep: Vec<bool> = results
        .iter()
        .map(|(a, m)| {
            if m.is_complete() {
                return true;
            }
            let entries = bound(a);
            let Some(shortest) = entries.iter().map(|k| &postings[k]).min_by_key(|l| l.len()) else { return true };
            !shortest.iter().any(|&j| {
                let (other, om) = &results[j];
                om.matched > m.matched && entries.iter().all(|&(p, b)| other[p] == b)
            })
        })
        .collect();
    let mut it = keep.iter();
    results.retain(|_| *it.next().unwrap());

    results.sort_by(|(a, ma), (b, mb)| {
        let key = |v: &Vec<Bind>| -> Vec<u64> {
            v.iter()
                .map(|b| match b {
                    Bind::Node(id) => id.0 as u64,
                    Bind::Sub(k) => (1u64 << 32) + *k as u64,
                    _ => u64::MAX,
                })
                .collect()
        };
        mb.matched.cmp(&ma.matched).then(ma.lowest_node().cmp(&mb.lowest_node())).then_with(|| key(a).cmp(&key(b)))
    });
    results.into_iter().map(|(_, m)| m).collect()
}
