use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::{unify_with, MatchError, MatchResult, SearchBudget, SubMatches};
use crate::flowgraph::FlowGraph;
use crate::planlib::{PlanBase, PlanError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanOutcome {
    pub results: Vec<MatchResult>,
    /// The search hit its step budget; `results` may be incomplete.
    pub truncated: bool,
}

impl PlanOutcome {
    pub fn accepted(&self) -> impl Iterator<Item = &MatchResult> {
        self.results.iter().filter(|r| r.accepted)
    }

    pub fn is_recognized(&self) -> bool {
        self.results.iter().any(|r| r.accepted)
    }
}

/// Per-plan outcomes keyed by plan name.
pub type Recognition = BTreeMap<String, PlanOutcome>;

/// Matches every plan of the goal closure (or the whole base when `goals`
/// is `None`) against `g`, sub-plans before the plans using them. `jobs`
/// worker threads share each dependency wave; the outcome does not depend
/// on `jobs`.
pub fn recognize(
    g: &FlowGraph,
    base: &PlanBase,
    goals: Option<&[String]>,
    budget: &SearchBudget,
    jobs: usize,
) -> Result<Recognition, PlanError> {
    let names = match goals {
        Some(gs) => base.closure(gs)?,
        None => base.list(None, None),
    };
    let order = base.dependency_order(&names);
    let mut pending: BTreeSet<&str> = order.iter().map(String::as_str).collect();
    let mut out = Recognition::new();
    let mut subs = SubMatches::new();

    while !pending.is_empty() {
        // A wave is every pending plan whose sub-plans are all done.
        let mut wave: Vec<&str> = order
            .iter()
            .map(String::as_str)
            .filter(|n| pending.contains(n))
            .filter(|n| base.get(n).is_some_and(|p| p.sub_plans().all(|s| !pending.contains(s) || s == *n)))
            .collect();
        if wave.is_empty() {
            // Sub-plan cycle: fall back to dependency order, one at a time.
            wave.push(order.iter().map(String::as_str).find(|n| pending.contains(n)).unwrap());
        }
        let outcomes = run_wave(g, base, &wave, &subs, budget, jobs);
        for (name, outcome) in wave.iter().zip(outcomes) {
            pending.remove(name);
            subs.insert(base.get(name).unwrap(), &outcome.results);
            out.insert(name.to_string(), outcome);
        }
    }
    Ok(out)
}

fn run_one(g: &FlowGraph, base: &PlanBase, name: &str, subs: &SubMatches, budget: &SearchBudget) -> PlanOutcome {
    let plan = base.get(name).expect("plan in base");
    match unify_with(g, plan, subs, budget) {
        Ok(results) => PlanOutcome { results, truncated: false },
        Err(MatchError::BudgetExceeded { partial, .. }) => PlanOutcome { results: partial, truncated: true },
    }
}

fn run_wave(
    g: &FlowGraph,
    base: &PlanBase,
    wave: &[&str],
    subs: &SubMatches,
    budget: &SearchBudget,
    jobs: usize,
) -> Vec<PlanOutcome> {
    let workers = jobs.max(1).min(wave.len());
    if workers <= 1 {
        return wave.iter().map(|n| run_one(g, base, n, subs, budget)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<PlanOutcome>>> = Mutex::new(vec![None; wave.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= wave.len() {
                    break;
                }
                let outcome = run_one(g, base, wave[i], subs, budget);
                slots.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|o| o.expect("every plan ran")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::build_flow_graph;
    use crate::frontend::{parse_fragment, CSubsetConfig};
    use crate::planlib::parse_plans;

    const BASE: &str = r#"
plan "counted-loop" kind=cliche category=pl
node lh kind=LOOPHEAD
node cmp kind=OP op=LT
node cnt kind=JOIN
data cnt:0 -> cmp:0
data cmp:0 -> lh:0
export counter = cnt
end
plan "running-total" kind=cliche category=pe
sub loop plan="counted-loop"
node init kind=CONST slot=$init
node acc kind=JOIN
node add kind=OP op=ADD
data init:0 -> acc:0
data acc:0 -> add:0
data add:0 -> acc:1
ctrl loop -> acc
constraint eq($init, 0)
constraint commutable(add)
export acc = acc
end
plan "off-by-one" kind=bug corrupts="counted-loop" category=cbt
node lh kind=LOOPHEAD
node cmp kind=OP op=LE
node cnt kind=JOIN
data cnt:0 -> cmp:0
data cmp:0 -> lh:0
export fault = cmp
end
"#;

    fn run(src: &str, jobs: usize) -> Recognition {
        let base = PlanBase::from_plans(parse_plans(BASE).unwrap()).unwrap();
        let g = build_flow_graph(&parse_fragment(src, &CSubsetConfig::default()).unwrap()).unwrap();
        recognize(&g, &base, Some(&["running-total".to_string()]), &SearchBudget::default(), jobs).unwrap()
    }

    #[test]
    fn empty_base() {
        let g = build_flow_graph(&parse_fragment("x=0;", &CSubsetConfig::default()).unwrap()).unwrap();
        let r = recognize(&g, &PlanBase::new(), None, &SearchBudget::default(), 1).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn correct_program() {
        let r = run("s=0; i=0; while(i<n){s=s+a[i]; i=i+1;}", 1);
        assert_eq!(r.len(), 3);
        assert!(r["running-total"].is_recognized());
        assert!(!r["off-by-one"].is_recognized());
    }

    #[test]
    fn off_by_one_program() {
        let r = run("s=0; i=0; while(i<=n){s=s+a[i]; i=i+1;}", 1);
        assert!(r["off-by-one"].is_recognized());
        assert!(!r["running-total"].is_recognized());
        assert!(r["running-total"].results[0].score >= SearchBudget::default().theta);
    }

    #[test]
    fn jobs_do_not_change_outcome() {
        let src = "s=0; i=0; while(i<n){s=s+a[i]; i=i+1;}";
        assert_eq!(run(src, 1), run(src, 4));
    }
}
