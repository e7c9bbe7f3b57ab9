use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use super::{parse_plans_file, Category, PShape, Plan, PlanError, PlanKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub plan: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "plan `{}`: {}", self.plan, self.message)
    }
}

/// A named collection of plans.
#[derive(Debug, Clone, Default)]
pub struct PlanBase {
    plans: BTreeMap<String, Plan>,
}

impl PlanBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_plans(plans: impl IntoIterator<Item = Plan>) -> Result<Self, PlanError> {
        let mut base = Self::new();
        for p in plans {
            base.add(p)?;
        }
        Ok(base)
    }

    /// Loads every `*.plan` file of `dir` in file-name order.
    pub fn load_dir(dir: &Path) -> Result<Self, PlanError> {
        let io = |e: std::io::Error| PlanError::Io { path: dir.display().to_string(), message: e.to_string() };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "plan") && p.is_file())
            .collect();
        files.sort();
        let mut base = Self::new();
        for f in files {
            let text = std::fs::read_to_string(&f)
                .map_err(|e| PlanError::Io { path: f.display().to_string(), message: e.to_string() })?;
            for p in parse_plans_file(&text, &f.display().to_string())? {
                base.add(p)?;
            }
        }
        Ok(base)
    }

    pub fn add(&mut self, plan: Plan) -> Result<(), PlanError> {
        if self.plans.contains_key(&plan.name) {
            return Err(PlanError::DuplicatePlan(plan.name));
        }
        self.plans.insert(plan.name.clone(), plan);
        Ok(())
    }

    pub fn remove(&mut self, name: &str) -> Result<Plan, PlanError> {
        self.plans.remove(name).ok_or_else(|| PlanError::UnknownPlan(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&Plan> {
        self.plans.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.plans.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// Plans in name order.
    pub fn plans(&self) -> impl Iterator<Item = &Plan> {
        self.plans.values()
    }

    /// Sorted names, optionally filtered by kind and category.
    pub fn list(&self, kind: Option<PlanKind>, category: Option<Category>) -> Vec<String> {
        self.plans
            .values()
            .filter(|p| kind.is_none_or(|k| p.kind == k) && category.is_none_or(|c| p.category == c))
            .map(|p| p.name.clone())
            .collect()
    }

    /// Bug plans that declare they corrupt `name`, sorted.
    pub fn corrupters(&self, name: &str) -> Vec<&str> {
        self.plans.values().filter(|p| p.corrupts.as_deref() == Some(name)).map(|p| p.name.as_str()).collect()
    }

    /// Cross-plan diagnostics; empty means the base is consistent.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let diag = |plan: &str, message: String| Diagnostic { plan: plan.to_string(), message };
        for p in self.plans.values() {
            if let Some(target) = &p.corrupts {
                match self.plans.get(target) {
                    None => out.push(diag(&p.name, format!("corrupts unknown plan `{target}`"))),
                    Some(t) if t.kind != PlanKind::Cliche => {
                        out.push(diag(&p.name, format!("corrupts `{target}`, which is not a cliche")))
                    }
                    _ => {}
                }
            }
            for node in &p.pnodes {
                let PShape::Sub { plan: sub } = &node.shape else { continue };
                let Some(sp) = self.plans.get(sub) else {
                    out.push(diag(&p.name, format!("sub `{}` refers to unknown plan `{sub}`", node.pid)));
                    continue;
                };
                let width = sp.exports.len() as u32;
                for e in &p.data {
                    if e.from == node.pid && e.out_port >= width {
                        out.push(diag(
                            &p.name,
                            format!("`{}` uses port {} but `{sub}` exports only {width} role(s)", node.pid, e.out_port),
                        ));
                    }
                    if e.to == node.pid && e.in_port >= width {
                        out.push(diag(
                            &p.name,
                            format!("`{}` uses port {} but `{sub}` exports only {width} role(s)", node.pid, e.in_port),
                        ));
                    }
                }
            }
        }
        for cycle in self.sub_cycles() {
            out.push(diag(&cycle[0], format!("sub-plan cycle: {}", cycle.join(" -> "))));
        }
        out.sort();
        out
    }

    /// Each elementary cycle of the sub-plan relation reported once, rotated
    /// to start at its smallest name and closed (first name repeated).
    fn sub_cycles(&self) -> Vec<Vec<String>> {
        let mut cycles = BTreeSet::new();
        let mut path: Vec<&str> = Vec::new();
        for start in self.plans.keys() {
            self.cycle_dfs(start, start, &mut path, &mut cycles);
        }
        cycles.into_iter().collect()
    }

    fn cycle_dfs<'a>(&'a self, start: &'a str, at: &'a str, path: &mut Vec<&'a str>, out: &mut BTreeSet<Vec<String>>) {
        path.push(at);
        if let Some(p) = self.plans.get(at) {
            for sub in p.sub_plans() {
                if sub == start {
                    let mut cyc: Vec<String> = path.iter().map(|s| s.to_string()).collect();
                    let min = cyc.iter().enumerate().min_by_key(|(_, s)| s.as_str()).map(|(i, _)| i).unwrap();
                    cyc.rotate_left(min);
                    cyc.push(cyc[0].clone());
                    out.insert(cyc);
                } else if sub > start && !path.contains(&sub) && self.plans.contains_key(sub) {
                    self.cycle_dfs(start, sub, path, out);
                }
            }
        }
        path.pop();
    }

    /// The goals plus every plan needed to recognize or diagnose them: their
    /// transitive sub-plans, and bug plans corrupting any of those together
    /// with the bug plans' own sub-plans. Sorted by name.
    pub fn closure<S: AsRef<str>>(&self, goals: &[S]) -> Result<Vec<String>, PlanError> {
        let mut set = BTreeSet::new();
        let mut work: Vec<String> = Vec::new();
        for g in goals {
            let g = g.as_ref();
            if !self.plans.contains_key(g) {
                return Err(PlanError::UnknownPlan(g.to_string()));
            }
            work.push(g.to_string());
        }
        while let Some(name) = work.pop() {
            if !set.insert(name.clone()) {
                continue;
            }
            let Some(p) = self.plans.get(&name) else { continue };
            work.extend(p.sub_plans().filter(|s| self.plans.contains_key(*s)).map(str::to_string));
            work.extend(self.corrupters(&name).into_iter().map(str::to_string));
        }
        Ok(set.into_iter().collect())
    }

    /// Transitive sub-plans of `name`, excluding itself, sorted.
    pub fn sub_closure(&self, name: &str) -> Vec<String> {
        let mut set = BTreeSet::new();
        let mut work: Vec<&str> = self.plans.get(name).map(|p| p.sub_plans().collect()).unwrap_or_default();
        while let Some(n) = work.pop() {
            if n != name && set.insert(n.to_string()) {
                if let Some(p) = self.plans.get(n) {
                    work.extend(p.sub_plans());
                }
            }
        }
        set.into_iter().collect()
    }

    /// Orders `names` so every plan follows the sub-plans it uses; ties are
    /// broken by name. Plans on a sub-plan cycle are appended last.
    pub fn dependency_order<S: AsRef<str>>(&self, names: &[S]) -> Vec<String> {
        let wanted: BTreeSet<&str> = names.iter().map(|s| s.as_ref()).collect();
        let mut indeg: BTreeMap<&str, usize> = wanted.iter().map(|n| (*n, 0)).collect();
        let mut users: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for &n in &wanted {
            let Some(p) = self.plans.get(n) else { continue };
            let subs: BTreeSet<&str> = p.sub_plans().filter(|s| wanted.contains(s)).collect();
            for s in subs {
                *indeg.get_mut(n).unwrap() += 1;
                users.entry(s).or_default().push(n);
            }
        }
        let mut ready: BTreeSet<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut out = Vec::new();
        while let Some(n) = ready.pop_first() {
            out.push(n.to_string());
            for &u in users.get(n).map(Vec::as_slice).unwrap_or(&[]) {
                let d = indeg.get_mut(u).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(u);
                }
            }
        }
        for (n, d) in indeg {
            if d > 0 {
                out.push(n.to_string());
            }
        }
        out
    }
}
