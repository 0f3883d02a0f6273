//! `morphsynth` command line. Every command is a thin adapter over library
//! calls; [`run`] returns the rendered output so it can be tested in-process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::aggregation::{extend_kernel, subsolution, supersolution, AggregationDocument, SolutionSet};
use crate::estimates::{
    covering_relations, enumerate_scale, generalized_median, parse_estimate_list, set_median, Scale,
};
use crate::golden::{run_golden, Topic};
use crate::improvement::{find_bottlenecks, plan_from_document, ActionsDocument};
use crate::model::{builtin_dataset, parse_model, MorphModel};
use crate::synthesis::{bottom_up, synthesize_component, ParetoFront};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "morphsynth",
    version,
    about = "Hierarchical morphological synthesis with interval multiset estimates"
)]
struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Use the embedded on-board telemetry dataset.
    #[arg(long, global = true)]
    builtin: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the interval estimates of a scale, best first.
    Scale {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        eta: usize,
        /// Also list covering relations.
        #[arg(long)]
        hasse: bool,
    },
    /// Generalized and set medians of `;`-separated estimates.
    Median {
        #[arg(long)]
        estimates: String,
    },
    /// Pareto fronts, leaf-to-root.
    Synth {
        #[command(flatten)]
        model: ModelArg,
        /// Only this composite (and what lies below it).
        #[arg(long)]
        component: Option<String>,
    },
    /// Bottlenecks and a budgeted improvement plan.
    Improve {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        actions: Option<PathBuf>,
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Supersolution, kernel and kernel extension.
    Aggregate {
        #[arg(long)]
        solutions: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Golden checks on the embedded dataset.
    Check,
}

#[derive(Debug, Args)]
struct ModelArg {
    #[arg(long)]
    model: Option<PathBuf>,
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<String>,
    pub results: Value,
    /// Differences from reference annotations; bundled data only.
    pub deviations: Vec<String>,
}

enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Lib(e.into())
    }
}

struct Rendered {
    report: RunReport,
    text: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(r) => {
            let stdout = if cli.json {
                let mut s = serde_json::to_string_pretty(&r.report).expect("report serializes");
                s.push('\n');
                s
            } else {
                r.text
            };
            Outcome {
                code: 0,
                stdout,
                stderr: String::new(),
            }
        }
        Err(Failure::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Io(msg)) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error[cli::Io]: {msg}\n"),
        },
        Err(Failure::Lib(e)) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error[{}]: {e}\n", e.name()),
        },
    }
}

fn dispatch(cli: &Cli) -> Result<Rendered, Failure> {
    match &cli.command {
        Command::Scale { l, eta, hasse } => cmd_scale(*l, *eta, *hasse),
        Command::Median { estimates } => cmd_median(estimates),
        Command::Synth { model, component } => cmd_synth(cli.builtin, model, component.as_deref()),
        Command::Improve { model, actions, budget } => cmd_improve(cli.builtin, model, actions.as_deref(), *budget),
        Command::Aggregate {
            solutions,
            candidates,
            budget,
        } => cmd_aggregate(cli.builtin, solutions.as_deref(), candidates.as_deref(), *budget),
        Command::Check => cmd_check(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_model(builtin: bool, arg: &ModelArg) -> Result<(MorphModel, String, bool), Failure> {
    match &arg.model {
        Some(p) => Ok((parse_model(&read(p)?)?, format!("model={}", p.display()), false)),
        None if builtin => Ok((builtin_dataset(), "model=builtin".to_string(), true)),
        None => Err(Failure::Usage("--model FILE or --builtin is required".into())),
    }
}

fn report(command: &str, inputs: Vec<String>, results: Value, deviations: Vec<String>, text: String) -> Rendered {
    Rendered {
        report: RunReport {
            command: command.to_string(),
            inputs,
            results,
            deviations,
        },
        text,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn cmd_scale(l: usize, eta: usize, hasse: bool) -> Result<Rendered, Failure> {
    let scale = Scale::new(l, eta)?;
    let all = enumerate_scale(scale);
    let mut text = String::new();
    for e in &all {
        writeln!(text, "{e}").unwrap();
    }
    let mut results =
        json!({ "scale": scale.to_string(), "estimates": all.iter().map(|e| e.to_string()).collect::<Vec<_>>() });
    if hasse {
        let covers = covering_relations(scale);
        text.push_str("covers:\n");
        for (hi, lo) in &covers {
            writeln!(text, "{} > {}", all[*hi], all[*lo]).unwrap();
        }
        results["covers"] = to_value(&covers);
    }
    let inputs = vec![format!("l={l}"), format!("eta={eta}"), format!("hasse={hasse}")];
    Ok(report("scale", inputs, results, Vec::new(), text))
}

fn cmd_median(estimates: &str) -> Result<Rendered, Failure> {
    let list = parse_estimate_list(estimates)?;
    let scale = list
        .first()
        .map(|e| e.scale())
        .ok_or(crate::estimates::EstimateError::EmptyInput)?;
    let general = generalized_median(&list, scale)?;
    let set = set_median(&list)?;
    let ties =
        |m: &crate::estimates::MedianResult| m.medians.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
    let text = format!(
        "generalized: {} deviation {} ties {}\nset: {} deviation {} ties {}\n",
        general.representative(),
        general.deviation,
        ties(&general),
        set.representative(),
        set.deviation,
        ties(&set),
    );
    let results = json!({ "generalized": general, "set": set });
    Ok(report(
        "median",
        vec![format!("estimates={estimates}")],
        results,
        Vec::new(),
        text,
    ))
}

fn front_table(front: &ParetoFront, text: &mut String) {
    writeln!(text, "{}:", front.component).unwrap();
    for s in &front.solutions {
        let sel = s.selection.values().cloned().collect::<Vec<_>>().join("*");
        let ties = if s.e_ties.len() > 1 {
            format!(
                " ties {}",
                s.e_ties.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
            )
        } else {
            String::new()
        };
        writeln!(
            text,
            "  {:<4} {:<12} N={} deviation {}{ties}",
            s.id.as_deref().unwrap_or("-"),
            sel,
            s.quality_label(),
            s.deviation
        )
        .unwrap();
    }
}

fn cmd_synth(builtin: bool, arg: &ModelArg, component: Option<&str>) -> Result<Rendered, Failure> {
    let (model, input, bundled) = load_model(builtin, arg)?;
    let fronts: Vec<ParetoFront> = match component {
        Some(c) => vec![synthesize_component(&model, c)?],
        None => bottom_up(&model)?.fronts.into_values().collect(),
    };
    let mut text = String::new();
    for f in &fronts {
        front_table(f, &mut text);
    }
    let deviations = if bundled {
        run_golden().deviations_for(Topic::Synthesis)
    } else {
        Vec::new()
    };
    let mut inputs = vec![input];
    if let Some(c) = component {
        inputs.push(format!("component={c}"));
    }
    Ok(report("synth", inputs, to_value(&fronts), deviations, text))
}

fn cmd_improve(
    builtin: bool,
    arg: &ModelArg,
    actions: Option<&Path>,
    budget: Option<f64>,
) -> Result<Rendered, Failure> {
    let (model, model_input, bundled) = load_model(builtin, arg)?;
    let (doc, actions_input) = match actions {
        Some(p) => (ActionsDocument::parse(&read(p)?)?, format!("actions={}", p.display())),
        None if builtin => (ActionsDocument::builtin(), "actions=builtin".to_string()),
        None => return Err(Failure::Usage("--actions FILE or --builtin is required".into())),
    };
    let plan = plan_from_document(&model, &doc, budget)?;
    let bottlenecks = find_bottlenecks(&model, &plan.before)?;

    let mut text = String::new();
    let name = plan.before.selection.values().cloned().collect::<Vec<_>>().join("*");
    writeln!(text, "{:<12} {:<10} w/e", "Composite", "DA/IC").unwrap();
    for b in &bottlenecks {
        writeln!(
            text,
            "{:<12} {:<10} {} => {}",
            name,
            b.subject_label(),
            b.current,
            b.proposed
        )
        .unwrap();
    }
    writeln!(
        text,
        "budget {}: {} cost {}",
        plan.budget,
        plan.choice.selection.join(","),
        plan.choice.total_cost
    )
    .unwrap();
    writeln!(text, "before N={}", plan.before.quality_label()).unwrap();
    writeln!(text, "after  N={}", plan.after.quality_label()).unwrap();

    let results = json!({
        "composite": plan.composite,
        "solution": name,
        "bottlenecks": bottlenecks,
        "budget": plan.budget,
        "actions": plan.choice.selection,
        "applied": plan.applied,
        "total_cost": plan.choice.total_cost,
        "before": plan.before,
        "after": plan.after,
    });
    let deviations = if bundled {
        run_golden().deviations_for(Topic::Improvement)
    } else {
        Vec::new()
    };
    let inputs = vec![model_input, actions_input, format!("budget={}", plan.budget)];
    Ok(report("improve", inputs, results, deviations, text))
}

fn cmd_aggregate(
    builtin: bool,
    solutions: Option<&Path>,
    candidates: Option<&Path>,
    budget: Option<f64>,
) -> Result<Rendered, Failure> {
    let load = |p: &Path| -> Result<AggregationDocument, Failure> { Ok(AggregationDocument::parse(&read(p)?)?) };
    let (sol_doc, sol_input) = match solutions {
        Some(p) => (load(p)?, format!("solutions={}", p.display())),
        None if builtin => (AggregationDocument::builtin(), "solutions=builtin".to_string()),
        None => return Err(Failure::Usage("--solutions FILE or --builtin is required".into())),
    };
    let (cand_doc, cand_input) = match candidates {
        Some(p) => (Some(load(p)?), format!("candidates={}", p.display())),
        None if builtin && solutions.is_none() => (None, "candidates=builtin".to_string()),
        None => (None, "candidates=solutions document".to_string()),
    };
    let bundled = solutions.is_none() && candidates.is_none();
    let budget = budget
        .or(cand_doc.as_ref().and_then(|d| d.budget))
        .or(sol_doc.budget)
        .ok_or_else(|| Failure::Usage("--budget is required".into()))?;
    let candidates = cand_doc
        .map(|d| d.candidates)
        .unwrap_or_else(|| sol_doc.candidates.clone());

    let set = SolutionSet::new(sol_doc.solutions)?;
    let sup = supersolution(&set);
    let kernel = subsolution(&set);
    let out = extend_kernel(&kernel, &candidates, budget)?;

    let braces =
        |v: &std::collections::BTreeSet<String>| format!("{{{}}}", v.iter().cloned().collect::<Vec<_>>().join(","));
    let mut text = String::new();
    writeln!(text, "supersolution:").unwrap();
    for (c, v) in &sup {
        writeln!(text, "  {c}: {}", braces(v)).unwrap();
    }
    writeln!(
        text,
        "kernel: {}",
        kernel
            .fixed
            .iter()
            .map(|(c, d)| format!("{c}={d}"))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    writeln!(
        text,
        "open: {}",
        kernel
            .open
            .iter()
            .map(|(c, v)| format!("{c}={}", braces(v)))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    let c = &out.choice;
    writeln!(
        text,
        "budget {budget}: {} cost {} e={} deviation {}",
        out.selection.values().cloned().collect::<Vec<_>>().join("*"),
        c.total_cost,
        c.median,
        c.deviation
    )
    .unwrap();
    if c.median_ties.len() > 1 {
        writeln!(
            text,
            "  median ties {}",
            c.median_ties
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )
        .unwrap();
    }
    for alt in &out.alternatives {
        writeln!(
            text,
            "  incomparable: {} cost {} e={}",
            alt.selection.join(","),
            alt.total_cost,
            alt.median
        )
        .unwrap();
    }

    let results = json!({ "supersolution": sup, "kernel": kernel, "budget": budget, "aggregate": out });
    let deviations = if bundled {
        run_golden().deviations_for(Topic::Aggregation)
    } else {
        Vec::new()
    };
    Ok(report(
        "aggregate",
        vec![sol_input, cand_input, format!("budget={budget}")],
        results,
        deviations,
        text,
    ))
}

fn cmd_check() -> Result<Rendered, Failure> {
    let golden = run_golden();
    let mut text = String::new();
    for c in &golden.checks {
        let status = if c.matches { "ok" } else { "DEVIATION" };
        writeln!(text, "{status:<9} {}: {}", c.subject, c.computed).unwrap();
    }
    let deviations: Vec<String> = golden.deviations().map(|c| c.note()).collect();
    writeln!(text, "deviations ({}):", deviations.len()).unwrap();
    for d in &deviations {
        writeln!(text, "  {d}").unwrap();
    }
    Ok(report(
        "check",
        vec!["builtin".into()],
        to_value(&golden),
        deviations,
        text,
    ))
}
