//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use adil::acquire::{acquire_plan, AcquireOptions};
use adil::debugger::{parse_spec, DiagnosticReport, Verdict};
use adil::flowgraph::{build_flow_graph, NodeId};
use adil::frontend::{desugar, parse_c_file, Ast, CSubsetConfig};
use adil::matcher::{unify, MatchError, MatchResult, SearchBudget};
use adil::planlib::{parse_plan, print_plan, PlanBase};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Summary = (Vec<(String, Verdict)>, Vec<(String, &'static str)>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn binding_key(r: &MatchResult) -> Vec<(String, NodeId)> {
    let mut v: Vec<(String, NodeId)> = r.binding.iter().map(|(k, &v)| (k.clone(), v)).collect();
    v.sort();
    v
}

fn ast_of(path: &Path) -> Ast {
    let src = std::fs::read_to_string(path).unwrap();
    ast_of_source(&src, &path.display().to_string())
}

fn ast_of_source(src: &str, file: &str) -> Ast {
    desugar(&parse_c_file(src, file, &CSubsetConfig::default()).unwrap())
}

fn analyze_path(path: &Path, spec: &Path, base: &PlanBase) -> DiagnosticReport {
    let src = std::fs::read_to_string(path).unwrap();
    analyze_source(&src, &path.display().to_string(), &read_spec(spec), base, &SearchBudget::default(), 1)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd1);
    let budget = SearchBudget::new(1_000_000, 0.6).unwrap();
    let (mut instances, mut nonempty) = (0, 0);
    while instances < 250 {
        let n = rng.gen_range(2..=12);
        let g = random_graph(&mut rng, n);
        let Some(plan) = random_plan(&mut rng, &g, 5, "gen") else { continue };
        instances += 1;
        let expected = brute_force_matches(&g, &plan);
        let got = unify(&g, &plan, &budget).map_err(|e| format!("instance {instances}: {e}"))?;
        let accepted: Vec<_> = got.iter().filter(|r| r.accepted).map(binding_key).collect();
        let set: BTreeSet<_> = accepted.iter().cloned().collect();
        ensure(set.len() == accepted.len(), || format!("instance {instances}: duplicate accepted bindings"))?;
        ensure(set == expected, || {
            format!("instance {instances}: matcher {set:?} vs brute force {expected:?}\n{}", print_plan(&plan))
        })?;
        nonempty += usize::from(!expected.is_empty());
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{instances} instances ({nonempty} with matches), 0 discrepancies, {:.1}s", took.as_secs_f64()))
}

fn bug_free_corpus() -> Outcome {
    let base = load_base();
    let programs = correct_programs();
    ensure(programs.len() >= 10, || format!("only {} correct programs", programs.len()))?;
    for (prog, spec) in &programs {
        let r = analyze_path(prog, spec, &base);
        let name = prog.display();
        for goal in read_spec(spec).required_goals() {
            let v = r.verdicts.get(&goal.name);
            ensure(v == Some(&Verdict::Recognized), || format!("{name}: `{}` is {v:?}", goal.name))?;
        }
        ensure(r.findings.is_empty(), || format!("{name}: {} findings: {:?}", r.findings.len(), r.findings))?;
        ensure(r.meaning.as_ref().is_some_and(|m| !m.is_empty()), || format!("{name}: empty meaning"))?;
    }
    Ok(format!("{} programs recognized with 0 findings", programs.len()))
}

fn seeded_corpus() -> Outcome {
    let base = load_base();
    let seeds = manifest();
    ensure(seeds.len() >= 10, || format!("only {} seeded programs", seeds.len()))?;
    let mut paired = BTreeSet::new();
    for s in &seeds {
        let r = analyze_path(&s.program, &s.spec, &base);
        let hit = r.findings.iter().any(|f| f.span.line_start <= s.line && s.line <= f.span.line_end);
        ensure(hit, || {
            let got: Vec<_> =
                r.findings.iter().map(|f| (f.kind.as_str(), f.span.line_start, f.span.line_end)).collect();
            format!("{}: edit `{}` on line {} not pinpointed; findings {got:?}", s.program.display(), s.edit, s.line)
        })?;
        paired.insert((s.correct.clone(), s.spec.clone()));
    }
    for (prog, spec) in &paired {
        let r = analyze_path(prog, spec, &base);
        ensure(r.findings.is_empty(), || format!("{}: false positives {:?}", prog.display(), r.findings))?;
    }
    Ok(format!(
        "{}/{} seeded bugs pinpointed, 0 findings on {} paired programs",
        seeds.len(),
        seeds.len(),
        paired.len()
    ))
}

fn all_corpus_programs() -> Vec<(std::path::PathBuf, std::path::PathBuf)> {
    let mut v = correct_programs();
    v.extend(manifest().into_iter().map(|s| (s.program, s.spec)));
    v
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let root = workspace_root();
    let programs = all_corpus_programs();
    let run = |prog: &Path, spec: &Path, jobs: &str, out: &Path| -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_adil"))
            .current_dir(&root)
            .arg("analyze")
            .arg(prog.strip_prefix(&root).unwrap())
            .arg("--spec")
            .arg(spec.strip_prefix(&root).unwrap())
            .args(["--plans", "plans", "--jobs", jobs, "--report-json"])
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(matches!(status.code(), Some(0 | 1)), || format!("{}: exit {status}", prog.display()))?;
        std::fs::read(out).map_err(|e| e.to_string())
    };
    for (i, (prog, spec)) in programs.iter().enumerate() {
        let reports = [("1", "a"), ("1", "b"), ("4", "c"), ("4", "d")]
            .iter()
            .map(|(jobs, tag)| run(prog, spec, jobs, &dir.path().join(format!("{i}{tag}.json"))))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(reports.windows(2).all(|w| w[0] == w[1]), || format!("{}: reports differ", prog.display()))?;
    }
    Ok(format!("{} programs, 4 runs each (--jobs 1 and 4), byte-identical", programs.len()))
}

fn budget_guard() -> Outcome {
    let src = dense_program(40);
    let g = build_flow_graph(&ast_of_source(&src, "dense.c")).unwrap();
    let plan = parse_plan(DENSE_PLAN).unwrap();
    let small = SearchBudget::new(1_000, 0.6).unwrap();
    let large = SearchBudget::new(1_000_000, 0.6).unwrap();
    let partial = match unify(&g, &plan, &small) {
        Err(MatchError::BudgetExceeded { partial, .. }) => partial,
        Ok(r) => return Err(format!("10^3 steps sufficed ({} results)", r.len())),
    };
    let full = unify(&g, &plan, &large).map_err(|e| format!("10^6 steps: {e}"))?;
    let full_keys: BTreeSet<_> = full.iter().map(binding_key).collect();
    let missing = partial.iter().filter(|r| !full_keys.contains(&binding_key(r))).count();
    ensure(missing == 0, || format!("{missing} of {} partial results absent under 10^6", partial.len()))?;
    let part_acc: BTreeSet<_> = partial.iter().filter(|r| r.accepted).map(binding_key).collect();
    let full_acc: BTreeSet<_> = full.iter().filter(|r| r.accepted).map(binding_key).collect();
    ensure(part_acc.is_subset(&full_acc), || "accepted set at 10^3 not within 10^6".into())?;

    let base = PlanBase::from_plans([plan]).unwrap();
    let spec = parse_spec("spec \"dense\" goal \"add-chain\" required end").unwrap();
    let report = |b: &SearchBudget| analyze_source(&src, "dense.c", &spec, &base, b, 1);
    ensure(report(&small).budget_truncated, || "report at 10^3 not marked truncated".into())?;
    ensure(!report(&large).budget_truncated, || "report at 10^6 marked truncated".into())?;
    Ok(format!(
        "{} nodes: 10^3 exceeded with {} partial results ({} accepted), 10^6 complete with {} ({} accepted), subset holds",
        g.len(),
        partial.len(),
        part_acc.len(),
        full.len(),
        full_acc.len()
    ))
}

fn round_trip() -> Outcome {
    let base = load_base();
    let fixed = |p: &adil::planlib::Plan| -> Result<(), String> {
        let text = print_plan(p);
        let back = parse_plan(&text).map_err(|e| format!("`{}`: {e}\n{text}", p.name))?;
        ensure(&back == p, || format!("`{}` changed on reparse", p.name))?;
        ensure(print_plan(&back) == text, || format!("`{}` prints differently", p.name))
    };
    for p in base.plans() {
        fixed(p)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a7);
    let mut generated = 0;
    while generated < 100 {
        let n = rng.gen_range(3..=12);
        let g = random_graph(&mut rng, n);
        if let Some(p) = random_decorated_plan(&mut rng, &g, &format!("gen-{generated}")) {
            fixed(&p)?;
            generated += 1;
        }
    }
    Ok(format!("{} shipped plans and {generated} generated plans are fixed points", base.len()))
}

fn acquisition() -> Outcome {
    let budget = SearchBudget::default();
    let opts = AcquireOptions::default();
    let programs = correct_programs();
    for (prog, _) in &programs {
        let name = prog.file_stem().unwrap().to_string_lossy().into_owned();
        let plan = acquire_plan(&ast_of(prog), &name, &opts).map_err(|e| format!("{name}: {e}"))?;
        let own = build_flow_graph(&ast_of(prog)).unwrap();
        let rs = unify(&own, &plan, &budget).map_err(|e| format!("{name}: {e}"))?;
        ensure(rs.iter().any(|r| r.accepted && r.score == 1.0), || format!("{name}: exemplar not recognized"))?;
        let renamed = rename_identifiers(&std::fs::read_to_string(prog).unwrap());
        let g = build_flow_graph(&ast_of_source(&renamed, "renamed.c")).unwrap();
        let rs = unify(&g, &plan, &budget).map_err(|e| format!("{name} renamed: {e}"))?;
        ensure(rs.iter().any(|r| r.accepted), || format!("{name}: renamed variant not recognized"))?;
    }
    Ok(format!("{} drafts accept their exemplar (score 1) and a renamed variant", programs.len()))
}

fn summary(r: &DiagnosticReport) -> Summary {
    let verdicts = r.verdicts.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let mut kinds: Vec<_> = r.findings.iter().map(|f| (f.goal.clone(), f.kind.as_str())).collect();
    kinds.sort();
    (verdicts, kinds)
}

fn language_independence() -> Outcome {
    let base = load_base();
    let budget = SearchBudget::default();
    let programs = all_corpus_programs();
    for (prog, spec) in &programs {
        let spec = read_spec(spec);
        let src = std::fs::read_to_string(prog).unwrap();
        let file = prog.display().to_string();
        let want = summary(&analyze_source(&src, &file, &spec, &base, &budget, 1));
        for (variant, text) in [("renamed", rename_identifiers(&src)), ("reformatted", permute_whitespace(&src))] {
            let got = summary(&analyze_source(&text, &file, &spec, &base, &budget, 1));
            ensure(got == want, || format!("{file} {variant}: {got:?} vs {want:?}"))?;
        }
    }
    Ok(format!("{} programs: renamed and reformatted variants agree", programs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("bug-free corpus", bug_free_corpus),
        ("seeded-bug corpus", seeded_corpus),
        ("determinism", determinism),
        ("budget guard", budget_guard),
        ("plan round trip", round_trip),
        ("acquisition self-recognition", acquisition),
        ("renaming and layout independence", language_independence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
