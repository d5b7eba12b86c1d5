use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};
use ssiforge_core::dot::{export_dot, export_labelled, DotView};
use ssiforge_core::model::Issue;
use ssiforge_core::overlay::{parse_trust_file, LintCode, OverlayError, SsiWarning};
use ssiforge_core::pistar::parse_document;
use ssiforge_core::sim::{Event, Ratio, SimError, Termination};
use ssiforge_core::{
    derive_flows, infer_roles, lint_ssi, validate as validate_model, Evidence, LabelState, Model, Scenario, SimConfig,
    Trace, ValidationReport, VerbLexicon,
};

use crate::style::Style;
use crate::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Findings = 1,
    Usage = 2,
}

pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Usage,
            message: message.into(),
        }
    }

    fn findings(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Findings,
            message: message.into(),
        }
    }
}

type Outcome = Result<Status, Failure>;

#[derive(Args)]
pub struct SimulateArgs {
    model: PathBuf,
    /// Seed for keys, nonces and message loss; never taken from the clock
    #[arg(long)]
    seed: Option<u64>,
    /// JSON trust-policy overrides
    #[arg(long)]
    trust: Option<PathBuf>,
    /// Message drop probability, as a/b or a decimal
    #[arg(long)]
    drop: Option<Ratio>,
    /// Stop after this many ticks
    #[arg(long)]
    max_ticks: Option<u64>,
    /// Full SimConfig as JSON; the flags above override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON verb lexicon
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Write the event trace as JSON Lines
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the rationale view coloured by final labels
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Skip dependencies whose flow direction is unresolved instead of failing
    #[arg(long)]
    allow_ambiguous: bool,
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::usage(format!("error: cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("error: cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Model, Failure> {
    let bytes = read(path)?;
    let doc = parse_document(&bytes).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("error: {e}")).collect();
        Failure::usage(lines.join("\n"))
    })?;
    for warning in &doc.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(doc.model)
}

fn issue_line(severity: &str, issue: &Issue) -> String {
    format!("{severity} {} {}: {}", issue.code, issue.offending_id, issue.message)
}

/// Loads a model that commands beyond `validate` require to be well formed.
fn load_valid(path: &Path) -> Result<Model, Failure> {
    let model = load(path)?;
    let report = validate_model(&model);
    if !report.is_valid() {
        let lines: Vec<String> = report.errors.iter().map(|i| issue_line("error", i)).collect();
        return Err(Failure::findings(format!(
            "{}\n{}: model is not valid",
            lines.join("\n"),
            path.display()
        )));
    }
    Ok(model)
}

fn load_lexicon(path: Option<&Path>) -> Result<VerbLexicon, Failure> {
    let Some(path) = path else {
        return Ok(VerbLexicon::default());
    };
    serde_json::from_slice(&read(path)?)
        .map_err(|e| Failure::usage(format!("error: invalid lexicon {}: {e}", path.display())))
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("values serialize"));
}

pub fn validate(path: &Path, format: Format) -> Outcome {
    let model = load(path)?;
    let report: ValidationReport = validate_model(&model);
    match format {
        Format::Json => print_json(&json!(report)),
        Format::Text => {
            let style = Style::detect();
            for issue in &report.errors {
                println!("{}", style.red(&issue_line("error", issue)));
            }
            for issue in &report.warnings {
                println!("{}", style.yellow(&issue_line("warning", issue)));
            }
            println!(
                "{}: {} error(s), {} warning(s)",
                path.display(),
                report.errors.len(),
                report.warnings.len()
            );
        }
    }
    Ok(if report.is_valid() {
        Status::Success
    } else {
        Status::Findings
    })
}

fn evidence_text(evidence: &Evidence) -> String {
    match evidence {
        Evidence::Annotation => "annotation".into(),
        Evidence::Verb(task) => format!("verb of {task}"),
        Evidence::Unresolved => "unresolved".into(),
    }
}

pub fn roles(path: &Path, lexicon: Option<&Path>, strict: bool, format: Format) -> Outcome {
    let model = load_valid(path)?;
    let lexicon = load_lexicon(lexicon)?;
    let roles = infer_roles(&model, &lexicon);
    let flows = derive_flows(&model, &roles, &lexicon);
    let warnings = lint_ssi(&model, &roles, &flows);
    match format {
        Format::Json => print_json(&json!({ "roles": roles, "flows": flows, "warnings": warnings })),
        Format::Text => {
            let style = Style::detect();
            println!("{}", style.bold("Roles"));
            for r in &roles {
                println!(
                    "  {:<12} {:<9} {}",
                    r.actor.as_str(),
                    format!("{:?}", r.role),
                    r.credential_type
                );
            }
            println!("{}", style.bold("Flows"));
            for f in &flows {
                println!(
                    "  {:<16} {:<13} {} -> {}  {}  ({})",
                    f.dependency.as_str(),
                    format!("{:?}", f.kind),
                    f.from.as_str(),
                    f.to.as_str(),
                    f.credential_type,
                    evidence_text(&f.evidence)
                );
            }
            if !warnings.is_empty() {
                println!("{}", style.bold("Warnings"));
            }
            for w in &warnings {
                println!(
                    "  {}",
                    style.yellow(&format!("{} {}: {}", w.code.as_str(), w.subject, w.message))
                );
            }
        }
    }
    Ok(if strict && !warnings.is_empty() {
        Status::Findings
    } else {
        Status::Success
    })
}

fn sim_failure(error: SimError, warnings: &[SsiWarning]) -> Failure {
    let mut message = format!("error[{}]: {error}", error.code());
    let status = match &error {
        SimError::Config(_) | SimError::Overlay(OverlayError::TrustFile(_) | OverlayError::Lexicon(_)) => Status::Usage,
        SimError::Ambiguous(_) => {
            for w in warnings.iter().filter(|w| w.code == LintCode::FlowAmbiguous) {
                message.push_str(&format!("\n{} {}: {}", w.code.as_str(), w.subject, w.message));
            }
            message.push_str("\n(pass --allow-ambiguous to skip these dependencies)");
            Status::Findings
        }
        _ => Status::Findings,
    };
    Failure { status, message }
}

fn config(args: &SimulateArgs) -> Result<SimConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => serde_json::from_slice(&read(path)?)
            .map_err(|e| Failure::usage(format!("error: invalid config {}: {e}", path.display())))?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(drop) = args.drop {
        config.drop_probability = drop;
    }
    if let Some(max_ticks) = args.max_ticks {
        config.max_ticks = max_ticks;
    }
    Ok(config)
}

const FLAGS: [&str; 5] = [
    "integrity",
    "issuerSignature",
    "subjectBinding",
    "issuerTrusted",
    "copyCheck",
];

/// (flag, passed, failed) over every Verify event; `copyCheck` only counts
/// verifications that compared against an office copy.
fn check_counts(trace: &Trace) -> Vec<(&'static str, usize, usize)> {
    let failures = trace.flag_failures();
    let verifies = trace.verifications().count();
    let copy_checked = trace
        .verifications()
        .filter(|e| {
            matches!(
                e,
                Event::Verify {
                    copy_check: Some(_),
                    ..
                }
            )
        })
        .count();
    FLAGS
        .iter()
        .map(|&flag| {
            let applicable = if flag == "copyCheck" { copy_checked } else { verifies };
            let failed = failures.get(flag).copied().unwrap_or(0);
            (flag, applicable - failed, failed)
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs, format: Format) -> Outcome {
    let model = load_valid(&args.model)?;
    let lexicon = load_lexicon(args.lexicon.as_deref())?;
    let entries = match &args.trust {
        Some(path) => {
            let text = String::from_utf8_lossy(&read(path)?).into_owned();
            parse_trust_file(&text).map_err(|e| Failure::usage(format!("error[{}]: {e}", e.code())))?
        }
        None => Vec::new(),
    };
    let config = config(args)?;
    let mut scenario = Scenario::with_trust(model, &lexicon, &entries, config).map_err(|e| sim_failure(e, &[]))?;
    scenario.allow_ambiguous = args.allow_ambiguous;
    let trace = scenario.run().map_err(|e| sim_failure(e, &scenario.warnings))?;

    if let Some(path) = &args.trace {
        write(path, &trace.to_jsonl())?;
    }
    if let Some(path) = &args.dot {
        write(path, &export_labelled(&scenario.model, &trace.final_labels))?;
    }

    let roots = scenario.root_labels(&trace);
    let checks = check_counts(&trace);
    match format {
        Format::Json => {
            let events: serde_json::Map<String, Value> = ["Send", "Deliver", "Drop", "Issue", "Verify", "GoalUpdate"]
                .iter()
                .map(|kind| (kind.to_string(), json!(trace.count(kind))))
                .collect();
            print_json(&json!({
                "seed": trace.config.seed,
                "termination": trace.termination,
                "endTick": trace.end_tick,
                "events": events,
                "rootGoals": roots.iter().map(|(id, name, label)| json!({"id": id, "name": name, "label": label})).collect::<Vec<_>>(),
                "checks": checks.iter().map(|(flag, passed, failed)| (flag.to_string(), json!({"passed": passed, "failed": failed}))).collect::<serde_json::Map<_, _>>(),
                "trace": args.trace.as_ref().map(|p| p.display().to_string()),
            }));
        }
        Format::Text => {
            let style = Style::detect();
            println!(
                "seed {}: {} at tick {}; {} sent, {} delivered, {} dropped",
                trace.config.seed,
                match trace.termination {
                    Termination::Quiescence => "quiescence",
                    Termination::Timeout => "timeout",
                },
                trace.end_tick,
                trace.count("Send"),
                trace.count("Deliver"),
                trace.count("Drop"),
            );
            println!();
            println!("{}", style.bold("Root goals"));
            for (_, name, label) in &roots {
                println!("  {name}: {}", style.label(*label));
            }
            println!();
            println!(
                "{}",
                style.bold(&format!("{:<20} {:>6} {:>6}", "Checks", "passed", "failed"))
            );
            for (flag, passed, failed) in &checks {
                let failed_text = format!("{failed:>6}");
                let failed_text = if *failed > 0 {
                    style.red(&failed_text)
                } else {
                    failed_text
                };
                println!("  {flag:<18} {passed:>6} {failed_text}");
            }
        }
    }
    let all_satisfied = roots.iter().all(|(_, _, label)| *label == LabelState::Satisfied);
    Ok(if all_satisfied {
        Status::Success
    } else {
        Status::Findings
    })
}

pub fn export(path: &Path, view: DotView, out: Option<&Path>) -> Outcome {
    let model = load_valid(path)?;
    let dot = export_dot(&model, view);
    match out {
        Some(out) => write(out, &dot)?,
        None => print!("{dot}"),
    }
    Ok(Status::Success)
}
