//! cckit: batch commands over workbench source files and model files.
//! Exit codes: 0 all checks passed, 1 a check failed (witness printed),
//! 2 usage, parse, or model-loading error.

use cckit_cli::dsl::{analyze, parse_source, Analysis, DslError};
use cckit_core::{
    key_digest, model_from_json_file_auto, model_from_json_str_tol, model_teleport_verify,
    render_dot, teleport_derivation, teleport_model, term_key, to_diagram, CheckReport,
    DerivationReport, FamilyKind, Model, ProtocolError,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "cckit", version, about = "A workbench for compact closed categories")]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck every declaration in a source file
    Check { file: PathBuf },
    /// Decide whether two expressions denote the same diagram
    Equal {
        file: PathBuf,
        /// A term name or expression
        lhs: String,
        /// A term name or expression
        rhs: String,
    },
    /// Evaluate a term to its matrix in a model
    Eval {
        file: PathBuf,
        /// A term name or expression
        term: String,
        /// Model file (JSON); bare names resolve against CCKIT_MODEL_DIR
        #[arg(long)]
        model: String,
        /// Comparison tolerance for float algebras
        #[arg(long, value_parser = parse_tolerance)]
        tolerance: Option<f64>,
    },
    /// Render a term's diagram as Graphviz dot
    Render {
        file: PathBuf,
        /// A term name or expression
        term: String,
        /// Output path; stdout when omitted
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite, optionally against a model
    Verify {
        suite: Suite,
        /// Standalone model file (JSON with its signature section)
        #[arg(long)]
        model: Option<String>,
        /// Candidate budget for counterexample searches
        #[arg(long, default_value_t = 100, value_parser = parse_budget)]
        budget: usize,
        /// Seed for randomized sampling
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comparison tolerance for float algebras
        #[arg(long, value_parser = parse_tolerance)]
        tolerance: Option<f64>,
    },
    /// Built-in demonstrations
    Demo {
        #[command(subcommand)]
        what: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Four-branch qubit teleportation over the built-in model
    Teleport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Scalars,
    Dagger,
    Cloning,
    Collapse,
    Deleting,
    Product,
    Teleport,
    All,
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("tolerance must be a finite nonnegative number".to_string())
    }
}

fn parse_budget(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("budget must be at least 1".to_string())
    }
}

/// Early exits: `Usage` goes to stderr with code 2; `Failed` is a check
/// that ran and lost, printed to stdout with code 1.
enum Stop {
    Usage(String),
    Failed(String),
}

impl<E: std::fmt::Display> From<E> for Stop {
    fn from(e: E) -> Stop {
        Stop::Usage(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(Stop::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Stop::Failed(msg)) => {
            println!("{msg}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Stop> {
    let format = cli.format;
    match cli.command {
        Command::Check { file } => cmd_check(&file, format),
        Command::Equal { file, lhs, rhs } => cmd_equal(&file, &lhs, &rhs, format),
        Command::Eval { file, term, model, tolerance } => {
            cmd_eval(&file, &term, &model, tolerance, format)
        }
        Command::Render { file, term, out } => cmd_render(&file, &term, out.as_deref(), format),
        Command::Verify { suite, model, budget, seed, tolerance } => {
            cmd_verify(suite, model.as_deref(), budget, seed, tolerance, format)
        }
        Command::Demo { what: Demo::Teleport } => cmd_demo_teleport(format),
    }
}

/// Parse and analyze a source file; syntax and resolution errors are
/// usage errors, type errors stay in the analysis entries.
fn load_file(path: &Path) -> Result<Analysis, Stop> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Stop::Usage(format!("{}: {e}", path.display())))?;
    let parsed = parse_source(&src).map_err(|e| Stop::Usage(format!("{}:{e}", path.display())))?;
    analyze(&parsed).map_err(|e| Stop::Usage(format!("{}:{e}", path.display())))
}

/// As `load_file`, but a declaration that fails to typecheck is a failed
/// check (exit 1), not a usage error.
fn load_file_strict(path: &Path) -> Result<Analysis, Stop> {
    let a = load_file(path)?;
    if let Some(bad) = a.entries.iter().find(|e| !e.ok) {
        return Err(Stop::Failed(format!("{}: {}", path.display(), bad.summary)));
    }
    Ok(a)
}

/// Lower a term name or inline expression; type errors are failed
/// checks, malformed input is a usage error.
fn lower_operand(a: &Analysis, src: &str) -> Result<cckit_core::TypedTerm, Stop> {
    a.lower_snippet(src).map_err(|e| match e {
        DslError::Type { .. } => Stop::Failed(format!("`{src}`: {e}")),
        other => Stop::Usage(format!("`{src}`: {other}")),
    })
}

fn cmd_check(file: &Path, format: Format) -> Result<i32, Stop> {
    let a = load_file(file)?;
    let ok = a.all_ok();
    match format {
        Format::Text => {
            for e in &a.entries {
                let mark = if e.ok { "ok" } else { "FAIL" };
                println!("{:4}  {}", mark, e.summary);
            }
            println!("{}", if ok { "all declarations check" } else { "checking FAILED" });
        }
        Format::Json => print_json(json!({
            "command": "check",
            "file": file.display().to_string(),
            "ok": ok,
            "declarations": a.entries.iter().map(|e| json!({
                "name": e.name,
                "summary": e.summary,
                "ok": e.ok,
            })).collect::<Vec<_>>(),
        })),
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_equal(file: &Path, lhs: &str, rhs: &str, format: Format) -> Result<i32, Stop> {
    let a = load_file_strict(file)?;
    let (l, r) = (lower_operand(&a, lhs)?, lower_operand(&a, rhs)?);
    if l.dom() != r.dom() || l.cod() != r.cod() {
        let msg = format!(
            "type mismatch: `{lhs}` : {} -> {} but `{rhs}` : {} -> {}",
            l.dom(),
            l.cod(),
            r.dom(),
            r.cod()
        );
        match format {
            Format::Text => println!("not equal\n{msg}"),
            Format::Json => print_json(json!({
                "command": "equal", "equal": false, "reason": msg,
            })),
        }
        return Ok(1);
    }
    let (lk, rk) = (term_key(&l), term_key(&r));
    let equal = lk == rk;
    match format {
        Format::Text => {
            println!("{}", if equal { "equal" } else { "not equal" });
            println!("  {lhs}  [{}]", key_digest(&lk));
            println!("  {rhs}  [{}]", key_digest(&rk));
        }
        Format::Json => print_json(json!({
            "command": "equal",
            "equal": equal,
            "lhs": { "source": lhs, "key": key_digest(&lk) },
            "rhs": { "source": rhs, "key": key_digest(&rk) },
        })),
    }
    Ok(if equal { 0 } else { 1 })
}

/// Bare model names resolve against the current directory first, then
/// `CCKIT_MODEL_DIR`.
fn resolve_model_path(name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.exists() {
        return p.to_path_buf();
    }
    if let Ok(dir) = std::env::var("CCKIT_MODEL_DIR") {
        let q = Path::new(&dir).join(name);
        if q.exists() {
            return q;
        }
    }
    p.to_path_buf()
}

fn cmd_eval(
    file: &Path,
    term: &str,
    model: &str,
    tolerance: Option<f64>,
    format: Format,
) -> Result<i32, Stop> {
    let a = load_file_strict(file)?;
    let t = lower_operand(&a, term)?;
    let path = resolve_model_path(model);
    let src = std::fs::read_to_string(&path)
        .map_err(|e| Stop::Usage(format!("{}: {e}", path.display())))?;
    let m = model_from_json_str_tol(&src, &a.sig, tolerance)?;
    let rendered = m.eval_render(&t)?;
    match format {
        Format::Text => {
            println!("{term} : {} -> {}", t.dom(), t.cod());
            println!("{rendered}");
        }
        Format::Json => print_json(json!({
            "command": "eval",
            "term": term,
            "model": path.display().to_string(),
            "scalars": m.scalars_label(),
            "dom": t.dom().to_string(),
            "cod": t.cod().to_string(),
            "matrix": rendered,
        })),
    }
    Ok(0)
}

fn cmd_render(
    file: &Path,
    term: &str,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, Stop> {
    let a = load_file_strict(file)?;
    let t = lower_operand(&a, term)?;
    let dot = render_dot(&to_diagram(&t));
    match (out, format) {
        (Some(path), _) => {
            std::fs::write(path, &dot).map_err(|e| Stop::Usage(format!("{}: {e}", path.display())))?;
            if format == Format::Json {
                print_json(json!({
                    "command": "render",
                    "term": term,
                    "out": path.display().to_string(),
                }));
            }
        }
        (None, Format::Text) => print!("{dot}"),
        (None, Format::Json) => print_json(json!({
            "command": "render",
            "term": term,
            "dot": dot,
        })),
    }
    Ok(0)
}

/// Everything a suite run produced, in declaration order.
struct SuiteOutcome {
    reports: Vec<CheckReport>,
    derivations: Vec<DerivationReport>,
    skipped: Vec<String>,
}

impl SuiteOutcome {
    fn new() -> SuiteOutcome {
        SuiteOutcome { reports: Vec::new(), derivations: Vec::new(), skipped: Vec::new() }
    }

    fn ok(&self) -> bool {
        self.reports.iter().all(|r| r.passed()) && self.derivations.iter().all(|d| d.passed())
    }
}

fn families_of_kind(m: &Model, kind: FamilyKind) -> Vec<String> {
    m.family_names()
        .into_iter()
        .filter(|n| m.family_kind(n) == Some(kind))
        .collect()
}

fn cmd_verify(
    suite: Suite,
    model: Option<&str>,
    budget: usize,
    seed: u64,
    tolerance: Option<f64>,
    format: Format,
) -> Result<i32, Stop> {
    let loaded = match model {
        Some(name) => {
            let path = resolve_model_path(name);
            let (m, _sig) = model_from_json_file_auto(&path, tolerance)?;
            Some((m, path))
        }
        None => None,
    };
    let m = loaded.as_ref().map(|(m, _)| m);
    let mut out = SuiteOutcome::new();
    // In a single suite a missing prerequisite is an error; under `all`
    // it is recorded as a skip.
    let strict = suite != Suite::All;
    let run = |s: Suite| suite == s || suite == Suite::All;
    if run(Suite::Scalars) {
        verify_scalars(&mut out, m, budget, seed, strict)?;
    }
    if run(Suite::Dagger) {
        verify_dagger(&mut out, m, strict)?;
    }
    if run(Suite::Cloning) {
        verify_cloning(&mut out, m, budget, seed, strict)?;
    }
    if run(Suite::Collapse) {
        verify_collapse(&mut out, m)?;
    }
    if run(Suite::Deleting) {
        verify_deleting(&mut out, m, budget, seed)?;
    }
    if run(Suite::Product) {
        verify_product(&mut out, m, strict)?;
    }
    if run(Suite::Teleport) {
        verify_teleport(&mut out, m, strict)?;
    }
    let ok = out.ok();
    let suite_name = format!("{:?}", suite).to_lowercase();
    match format {
        Format::Text => {
            for r in &out.reports {
                print!("{}", r.render_text());
            }
            for d in &out.derivations {
                print!("{}", d.render_text());
            }
            for s in &out.skipped {
                println!("skipped: {s}");
            }
            println!("suite {suite_name}: {}", if ok { "pass" } else { "FAIL" });
        }
        Format::Json => print_json(json!({
            "command": "verify",
            "suite": suite_name,
            "model": loaded.as_ref().map(|(_, p)| p.display().to_string()),
            "ok": ok,
            "reports": out.reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "derivations": out.derivations.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
            "skipped": out.skipped,
        })),
    }
    Ok(if ok { 0 } else { 1 })
}

fn need_model<'m>(
    m: Option<&'m Model>,
    out: &mut SuiteOutcome,
    suite: &str,
    strict: bool,
) -> Result<Option<&'m Model>, Stop> {
    match m {
        Some(m) => Ok(Some(m)),
        None if strict => Err(Stop::Usage(format!("the {suite} suite needs --model"))),
        None => {
            out.skipped.push(format!("{suite} (needs --model)"));
            Ok(None)
        }
    }
}

fn verify_scalars(
    out: &mut SuiteOutcome,
    m: Option<&Model>,
    budget: usize,
    seed: u64,
    strict: bool,
) -> Result<(), Stop> {
    let Some(m) = need_model(m, out, "scalars", strict)? else { return Ok(()) };
    out.reports.push(cckit_core::scalar_laws_check(m, budget, seed));
    for fam in families_of_kind(m, FamilyKind::Diagonal) {
        out.reports.push(cckit_core::model_idempotent_scalars(m, &fam)?);
    }
    Ok(())
}

fn verify_dagger(out: &mut SuiteOutcome, m: Option<&Model>, strict: bool) -> Result<(), Stop> {
    let Some(m) = need_model(m, out, "dagger", strict)? else { return Ok(()) };
    out.reports.push(m.dagger_compact_check()?);
    Ok(())
}

fn verify_cloning(
    out: &mut SuiteOutcome,
    m: Option<&Model>,
    budget: usize,
    seed: u64,
    strict: bool,
) -> Result<(), Stop> {
    let Some(m) = need_model(m, out, "cloning", strict)? else { return Ok(()) };
    let fams = families_of_kind(m, FamilyKind::Diagonal);
    if fams.is_empty() {
        return Err(Stop::Usage("the cloning suite needs a diagonal family in the model".into()));
    }
    for fam in fams {
        out.reports.push(cckit_core::model_cloning_axioms(m, &fam)?);
        out.reports.push(cckit_core::model_delta_unit(m, &fam)?);
        out.reports.push(cckit_core::model_naturality_search(m, &fam, budget, seed)?);
    }
    Ok(())
}

fn verify_collapse(out: &mut SuiteOutcome, m: Option<&Model>) -> Result<(), Stop> {
    let derivation = cckit_core::derive_collapse("A")?;
    out.reports.push(derivation.replay()?);
    out.derivations.push(derivation);
    if let Some(m) = m {
        let base = m
            .signature()
            .base_objects()
            .first()
            .cloned()
            .ok_or_else(|| Stop::Usage("the model has no base objects".into()))?;
        for fam in families_of_kind(m, FamilyKind::Diagonal) {
            out.reports.push(cckit_core::model_cap_swap(m, &fam, &base)?);
        }
    }
    Ok(())
}

fn verify_deleting(
    out: &mut SuiteOutcome,
    m: Option<&Model>,
    budget: usize,
    seed: u64,
) -> Result<(), Stop> {
    // Without a model (or when the model's signature has no parallel
    // pair of generators), the derivation runs over a canonical free
    // signature with one.
    let sig = match m {
        Some(m) => m.signature().clone(),
        None => free_parallel_pair_signature(),
    };
    let derivation = match cckit_core::deleting_collapse_derivation(&sig) {
        Ok(d) => d,
        Err(cckit_core::NogoError::PreconditionUnmet(_)) if m.is_some() => {
            cckit_core::deleting_collapse_derivation(&free_parallel_pair_signature())?
        }
        Err(e) => return Err(e.into()),
    };
    out.reports.push(derivation.replay()?);
    out.derivations.push(derivation);
    if let Some(m) = m {
        for fam in families_of_kind(m, FamilyKind::Deleting) {
            out.reports.push(cckit_core::model_naturality_search(m, &fam, budget, seed)?);
        }
    }
    Ok(())
}

fn free_parallel_pair_signature() -> std::sync::Arc<cckit_core::Signature> {
    let mut sig = cckit_core::Signature::new(true);
    sig.add_base_object("A").unwrap();
    sig.add_base_object("B").unwrap();
    let (a, b) = (cckit_core::ObjectExpr::base("A"), cckit_core::ObjectExpr::base("B"));
    sig.add_generator("f", a.clone(), b.clone()).unwrap();
    sig.add_generator("g", a, b).unwrap();
    std::sync::Arc::new(sig)
}

fn verify_product(out: &mut SuiteOutcome, m: Option<&Model>, strict: bool) -> Result<(), Stop> {
    let Some(m) = need_model(m, out, "product", strict)? else { return Ok(()) };
    let delta = families_of_kind(m, FamilyKind::Diagonal);
    let p = families_of_kind(m, FamilyKind::ProjLeft);
    let q = families_of_kind(m, FamilyKind::ProjRight);
    match (delta.first(), p.first(), q.first()) {
        (Some(d), Some(p), Some(q)) => {
            out.reports.push(cckit_core::model_product_structure(m, d, p, q)?);
            Ok(())
        }
        _ if strict => Err(Stop::Usage(
            "the product suite needs diagonal, proj-left, and proj-right families".into(),
        )),
        _ => {
            out.skipped
                .push("product (needs diagonal, proj-left, and proj-right families)".into());
            Ok(())
        }
    }
}

fn verify_teleport(out: &mut SuiteOutcome, m: Option<&Model>, strict: bool) -> Result<(), Stop> {
    out.derivations.push(teleport_derivation()?);
    match m {
        Some(m) if m.has_teleport() => {
            out.reports.push(model_teleport_verify(m).map_err(usage_from_protocol)?)
        }
        Some(_) if strict => {
            return Err(Stop::Usage("the model has no protocols.teleport section".into()))
        }
        Some(_) => out.skipped.push("teleport verification (no protocols.teleport)".into()),
        None => out.skipped.push("teleport verification (needs --model)".into()),
    }
    Ok(())
}

fn usage_from_protocol(e: ProtocolError) -> Stop {
    Stop::Usage(e.to_string())
}

fn cmd_demo_teleport(format: Format) -> Result<i32, Stop> {
    let m = Model::CRat(teleport_model());
    let report = model_teleport_verify(&m).map_err(usage_from_protocol)?;
    let derivation = teleport_derivation()?;
    let ok = report.passed() && derivation.passed();
    match format {
        Format::Text => {
            for item in &report.items {
                if let Some(label) = item
                    .condition
                    .strip_prefix("branch ")
                    .and_then(|s| s.strip_suffix(" composes to the identity"))
                {
                    println!("branch {label}: {}", if item.passed { "ok" } else { "FAIL" });
                }
            }
            print!("{}", report.render_text());
            print!("{}", derivation.render_text());
        }
        Format::Json => print_json(json!({
            "command": "demo",
            "what": "teleport",
            "ok": ok,
            "report": report.to_json(),
            "derivation": derivation.to_json(),
        })),
    }
    Ok(if ok { 0 } else { 1 })
}

fn print_json(v: Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
}
