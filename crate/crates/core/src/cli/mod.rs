//! The `adil` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::acquire::{acquire_plan, review_stub, AcquireOptions};
use crate::debugger::{diagnose, parse_spec_file, DiagnoseOptions};
use crate::explain::{render, render_text};
use crate::flowgraph::{build_flow_graph, build_flow_graph_lenient, to_dot, to_json};
use crate::frontend::{desugar, parse_c_file, Ast, CSubsetConfig};
use crate::matcher::{SearchBudget, DEFAULT_MAX_STEPS, DEFAULT_THETA};
use crate::planlib::{parse_plans_file, print_plan, Category, PlanBase, PlanKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "adil", version, about = "Knowledge-based debugger for a small C subset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a program against its spec and explain the findings
    Analyze(AnalyzeArgs),
    /// Print the annotated flow graph of a program
    Graph {
        program: PathBuf,
        /// JSON instead of DOT
        #[arg(long)]
        json: bool,
    },
    /// Manage the plan base
    Plan {
        #[command(flatten)]
        base: PlansArg,
        #[command(subcommand)]
        action: PlanAction,
    },
    /// Draft a plan from an exemplar program
    Acquire(AcquireArgs),
}

#[derive(Args, Debug)]
struct PlansArg {
    /// Plan directory
    #[arg(long, env = "ADIL_PLANS", default_value = "plans", global = true)]
    plans: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    program: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    base: PlansArg,
    /// Candidate trials allowed per plan
    #[arg(long, env = "ADIL_BUDGET", default_value_t = DEFAULT_MAX_STEPS)]
    budget: u64,
    /// Minimum near-miss score
    #[arg(long, env = "ADIL_THETA", default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Also write the report as JSON
    #[arg(long, value_name = "PATH")]
    report_json: Option<PathBuf>,
    /// Show at most this many findings in the text report
    #[arg(long)]
    max_findings: Option<usize>,
    /// Matcher worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum PlanAction {
    /// Parse and cross-check every plan
    Check,
    /// List plan names
    List {
        #[arg(long)]
        kind: Option<KindArg>,
        #[arg(long)]
        category: Option<CategoryArg>,
    },
    /// Copy a plan file into the base
    Add { file: PathBuf },
    /// Remove a plan from the base
    Rm { name: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Cliche,
    Bug,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CategoryArg {
    Pl,
    Pe,
    Cbt,
}

#[derive(Args, Debug)]
struct AcquireArgs {
    program: PathBuf,
    #[arg(long)]
    name: String,
    /// Draft file (default: <name>.draft.plan)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Install the reviewed draft into the plan base
    #[arg(long)]
    accept: bool,
    #[command(flatten)]
    base: PlansArg,
}

/// A failure with the exit code it maps to.
struct Fail(i32, String);

type CmdResult = Result<i32, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(EXIT_USAGE, msg.into())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(&a, out),
        Command::Graph { program, json } => graph(&program, json, out),
        Command::Plan { base, action } => plan(&base.plans, action, out),
        Command::Acquire(a) => acquire(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "adil: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<(String, Ast), Fail> {
    let src = read(path)?;
    let ast =
        parse_c_file(&src, &path.display().to_string(), &CSubsetConfig::default()).map_err(|e| usage(e.to_string()))?;
    Ok((src, desugar(&ast)))
}

fn load_base(dir: &Path) -> Result<PlanBase, Fail> {
    let base = PlanBase::load_dir(dir).map_err(|e| usage(e.to_string()))?;
    let diags = base.validate();
    if let Some(d) = diags.first() {
        return Err(usage(format!("plan base {} is inconsistent: {}: {}", dir.display(), d.plan, d.message)));
    }
    Ok(base)
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CmdResult {
    let budget = SearchBudget::new(a.budget, a.theta).map_err(usage)?;
    let spec_text = read(&a.spec)?;
    let spec = parse_spec_file(&spec_text, &a.spec.display().to_string()).map_err(|e| usage(e.to_string()))?;
    let base = load_base(&a.base.plans)?;
    let (src, ast) = load_program(&a.program)?;
    let (g, unbound) = build_flow_graph_lenient(&ast).map_err(|e| usage(e.to_string()))?;
    let opts = DiagnoseOptions { program: a.program.display().to_string(), jobs: a.jobs, unbound_reads: unbound };
    let report = diagnose(&g, &spec, &base, &budget, &opts).map_err(|e| usage(e.to_string()))?;
    if let Some(path) = &a.report_json {
        std::fs::write(path, report.to_json() + "\n").map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let mut shown = report.clone();
    if let Some(n) = a.max_findings {
        shown.findings.truncate(n);
    }
    let explanation = render(&shown, &src, &base, &g).map_err(|e| usage(e.to_string()))?;
    let _ = out.write_all(render_text(&explanation).as_bytes());
    Ok(if !report.findings.is_empty() {
        EXIT_FINDINGS
    } else if report.budget_truncated {
        EXIT_TRUNCATED
    } else {
        EXIT_OK
    })
}

fn graph(program: &Path, json: bool, out: &mut dyn Write) -> CmdResult {
    let (_, ast) = load_program(program)?;
    let g = build_flow_graph(&ast).map_err(|e| usage(e.to_string()))?;
    let text = if json { to_json(&g) + "\n" } else { to_dot(&g) };
    let _ = out.write_all(text.as_bytes());
    Ok(EXIT_OK)
}

fn plan_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.plan"))
}

fn plan(dir: &Path, action: PlanAction, out: &mut dyn Write) -> CmdResult {
    match action {
        PlanAction::Check => {
            let base = PlanBase::load_dir(dir).map_err(|e| usage(e.to_string()))?;
            let diags = base.validate();
            for d in &diags {
                let _ = writeln!(out, "{}: {}", d.plan, d.message);
            }
            let _ = writeln!(out, "{} plans, {} diagnostics", base.len(), diags.len());
            Ok(if diags.is_empty() { EXIT_OK } else { EXIT_FINDINGS })
        }
        PlanAction::List { kind, category } => {
            let base = PlanBase::load_dir(dir).map_err(|e| usage(e.to_string()))?;
            let kind = kind.map(|k| match k {
                KindArg::Cliche => PlanKind::Cliche,
                KindArg::Bug => PlanKind::Bug,
            });
            let category = category.map(|c| match c {
                CategoryArg::Pl => Category::Pl,
                CategoryArg::Pe => Category::Pe,
                CategoryArg::Cbt => Category::Cbt,
            });
            for name in base.list(kind, category) {
                let _ = writeln!(out, "{name}");
            }
            Ok(EXIT_OK)
        }
        PlanAction::Add { file } => {
            let text = read(&file)?;
            let plans = parse_plans_file(&text, &file.display().to_string()).map_err(|e| usage(e.to_string()))?;
            install(dir, plans, out)
        }
        PlanAction::Rm { name } => {
            let mut base = PlanBase::load_dir(dir).map_err(|e| usage(e.to_string()))?;
            base.remove(&name).map_err(|e| Fail(EXIT_FINDINGS, e.to_string()))?;
            if let Some(d) = base.validate().into_iter().next() {
                return Err(Fail(EXIT_FINDINGS, format!("removing `{name}` would break `{}`: {}", d.plan, d.message)));
            }
            let file = find_plan_file(dir, &name)?;
            let text = read(&file)?;
            let rest: Vec<_> = parse_plans_file(&text, &file.display().to_string())
                .map_err(|e| usage(e.to_string()))?
                .into_iter()
                .filter(|p| p.name != name)
                .collect();
            let io = |e: std::io::Error| usage(format!("{}: {e}", file.display()));
            if rest.is_empty() {
                std::fs::remove_file(&file).map_err(io)?;
            } else {
                std::fs::write(&file, crate::planlib::print_plans(&rest)).map_err(io)?;
            }
            let _ = writeln!(out, "removed {name}");
            Ok(EXIT_OK)
        }
    }
}

fn find_plan_file(dir: &Path, name: &str) -> Result<PathBuf, Fail> {
    let entries = std::fs::read_dir(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "plan"))
        .collect();
    files.sort();
    for f in files {
        let text = read(&f)?;
        if let Ok(plans) = parse_plans_file(&text, &f.display().to_string()) {
            if plans.iter().any(|p| p.name == name) {
                return Ok(f);
            }
        }
    }
    Err(Fail(EXIT_FINDINGS, format!("no file in {} defines `{name}`", dir.display())))
}

/// Adds `plans` to the base in `dir`, refusing duplicates and anything
/// that leaves the base inconsistent.
fn install(dir: &Path, plans: Vec<crate::planlib::Plan>, out: &mut dyn Write) -> CmdResult {
    let mut base = PlanBase::load_dir(dir).map_err(|e| usage(e.to_string()))?;
    for p in &plans {
        base.add(p.clone()).map_err(|e| Fail(EXIT_FINDINGS, e.to_string()))?;
    }
    if let Some(d) = base.validate().into_iter().find(|d| plans.iter().any(|p| p.name == d.plan)) {
        return Err(Fail(EXIT_FINDINGS, format!("{}: {}", d.plan, d.message)));
    }
    for p in &plans {
        let file = plan_file(dir, &p.name);
        if file.exists() {
            return Err(Fail(EXIT_FINDINGS, format!("{} already exists", file.display())));
        }
        std::fs::write(&file, print_plan(p)).map_err(|e| usage(format!("{}: {e}", file.display())))?;
        let _ = writeln!(out, "added {} ({})", p.name, file.display());
    }
    Ok(EXIT_OK)
}

fn acquire(a: &AcquireArgs, out: &mut dyn Write) -> CmdResult {
    let draft = a.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.draft.plan", a.name)));
    if a.accept {
        if !draft.is_file() {
            return Err(usage(format!("no draft at {}; run without --accept first", draft.display())));
        }
        let text = read(&draft)?;
        let plans = parse_plans_file(&text, &draft.display().to_string()).map_err(|e| usage(e.to_string()))?;
        if plans.len() != 1 || plans[0].name != a.name {
            return Err(usage(format!("{} must hold exactly the plan `{}`", draft.display(), a.name)));
        }
        return install(&a.base.plans, plans, out);
    }
    let (_, ast) = load_program(&a.program)?;
    let plan =
        acquire_plan(&ast, &a.name, &AcquireOptions::default()).map_err(|e| Fail(EXIT_FINDINGS, e.to_string()))?;
    std::fs::write(&draft, review_stub(&plan)).map_err(|e| usage(format!("{}: {e}", draft.display())))?;
    let _ = writeln!(out, "draft written to {}; review it, then rerun with --accept", draft.display());
    Ok(EXIT_OK)
}
