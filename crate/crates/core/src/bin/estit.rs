//! Command-line surface: batch model checking, validation, translation,
//! soundness sweeps, and the bundled puzzle fixtures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use estit::axioms::{
    random_formulas, soundness_sweep, GeneratorParams, SweepSemantics,
};
use estit::btmodel::{BTModel, BtModelFile, Situation};
use estit::formula::parse;
use estit::kripke::{associated_bt, verify_truth_preservation, KripkeFile, KripkeModel};
use estit::puzzles::{build_puzzle, verify_puzzle, PuzzleSpec, Variant};
use estit::semantics::{EvalMode, EvalOptions, Evaluator, Judgment};

/// Model checker for an epistemic act-utilitarian stit logic of objective
/// and subjective oughts.
#[derive(Parser)]
#[command(name = "estit", version, about)]
struct Cli {
    /// Emit every report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula over a branching-time model.
    Check(CheckArgs),
    /// Check a model file against the frame constraints.
    Validate(ValidateArgs),
    /// Write the associated branching-time model of a Kripke model.
    Translate(TranslateArgs),
    /// Sweep the axiom catalog over randomly generated models.
    Axioms(AxiomsArgs),
    /// Run or export the bundled coin puzzles.
    Puzzle {
        #[command(subcommand)]
        command: PuzzleCommand,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Branching-time model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Formula, e.g. "O[a] p -> <> [a] p".
    #[arg(long)]
    formula: String,
    /// Situation to evaluate at, as moment/history.
    #[arg(long)]
    at: Option<String>,
    /// optimal or dominance.
    #[arg(long, default_value = "optimal")]
    mode: String,
    /// Print a judgment for every situation instead of the first failure.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// bt or kripke.
    #[arg(long, default_value = "bt")]
    kind: String,
}

#[derive(Args)]
struct TranslateArgs {
    /// Kripke model file (JSON).
    #[arg(long)]
    kripke: PathBuf,
    /// Where to write the associated branching-time model.
    #[arg(long)]
    out: PathBuf,
    /// Also check truth preservation on N random formulas.
    #[arg(long)]
    verify: Option<usize>,
    /// optimal or dominance, for --verify.
    #[arg(long, default_value = "optimal")]
    mode: String,
    /// Seed for --verify formula generation.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct AxiomsArgs {
    /// Base seed; model i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of generated models.
    #[arg(long, default_value_t = 200)]
    models: usize,
    /// Schema instances per schema per model.
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// optimal or dominance.
    #[arg(long, default_value = "dominance")]
    mode: String,
    /// kripke, bt, or both.
    #[arg(long, default_value = "both")]
    semantics: String,
}

#[derive(Subcommand)]
enum PuzzleCommand {
    /// Re-derive a puzzle's verdict table and report mismatches.
    Run {
        /// Puzzle number, 1..=3.
        id: u8,
        /// moment or situation.
        #[arg(long, default_value = "situation")]
        variant: String,
        /// optimal or dominance.
        #[arg(long, default_value = "optimal")]
        mode: String,
    },
    /// Write a puzzle's model file in the branching-time JSON format.
    Export {
        /// Puzzle number, 1..=3.
        id: u8,
        /// moment or situation.
        variant: String,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    stage: &'static str,
    message: String,
}

impl Failure {
    fn new(stage: &'static str, message: impl ToString) -> Failure {
        Failure {
            stage,
            message: message.to_string(),
        }
    }
}

fn parse_mode(s: &str) -> Result<EvalMode, Failure> {
    s.parse().map_err(|e: String| Failure::new("parse", e))
}

fn parse_situation(s: &str) -> Result<Situation, Failure> {
    match s.split_once('/') {
        Some((m, h)) if !m.is_empty() && !h.is_empty() => Ok(Situation::new(m, h)),
        _ => Err(Failure::new(
            "parse",
            format!("situation {s:?} is not of the form moment/history"),
        )),
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))
}

fn load_bt(path: &PathBuf) -> Result<BTModel, Failure> {
    let text = read_file(path)?;
    let file: BtModelFile = serde_json::from_str(&text)
        .map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))?;
    BTModel::from_file(file).map_err(|e| Failure::new("validate", e))
}

fn load_kripke(path: &PathBuf) -> Result<KripkeModel, Failure> {
    let text = read_file(path)?;
    let file: KripkeFile = serde_json::from_str(&text)
        .map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))?;
    KripkeModel::from_file(file).map_err(|e| Failure::new("validate", e))
}

fn judgment_json(j: &Judgment) -> serde_json::Value {
    json!({
        "moment": j.situation.moment.0,
        "history": j.situation.history.0,
        "mode": j.mode,
        "value": j.value,
        "formula": j.formula.to_string(),
    })
}

fn run_check(args: &CheckArgs, as_json: bool) -> Result<u8, Failure> {
    let mode = parse_mode(&args.mode)?;
    let model = load_bt(&args.model)?;
    let formula = parse(&args.formula).map_err(|e| Failure::new("parse", e))?;
    let eval = Evaluator::new(&model, EvalOptions::new(mode));

    let mut judgments = Vec::new();
    if let Some(at) = &args.at {
        let s = parse_situation(at)?;
        let value = eval
            .evaluate(&s, &formula)
            .map_err(|e| Failure::new("evaluate", e))?;
        judgments.push(Judgment {
            situation: s,
            formula: formula.clone(),
            mode,
            value,
        });
    } else if args.all {
        for s in model.situations() {
            let value = eval
                .evaluate(&s, &formula)
                .map_err(|e| Failure::new("evaluate", e))?;
            judgments.push(Judgment {
                situation: s,
                formula: formula.clone(),
                mode,
                value,
            });
        }
    } else {
        match eval
            .check_validity(&formula)
            .map_err(|e| Failure::new("evaluate", e))?
        {
            Some(s) => judgments.push(Judgment {
                situation: s,
                formula: formula.clone(),
                mode,
                value: false,
            }),
            None => {
                if as_json {
                    println!("{}", json!({ "valid": true, "judgments": [] }));
                } else {
                    println!("valid in this model ({mode})");
                }
                return Ok(0);
            }
        }
    }

    let all_true = judgments.iter().all(|j| j.value);
    if as_json {
        let rows: Vec<_> = judgments.iter().map(judgment_json).collect();
        println!(
            "{}",
            json!({ "valid": all_true, "judgments": rows, "warnings": eval.warnings() })
        );
    } else {
        for j in &judgments {
            println!("{j}");
        }
        for w in eval.warnings() {
            eprintln!("warning: atom {w:?} does not occur in the model");
        }
    }
    Ok(if all_true { 0 } else { 1 })
}

fn run_validate(args: &ValidateArgs, as_json: bool) -> Result<u8, Failure> {
    let violations: Vec<String> = match args.kind.as_str() {
        "bt" => load_bt(&args.model)?
            .validate()
            .iter()
            .map(|v| v.to_string())
            .collect(),
        "kripke" => load_kripke(&args.model)?
            .validate()
            .iter()
            .map(|v| v.to_string())
            .collect(),
        other => {
            return Err(Failure::new(
                "parse",
                format!("unknown model kind {other:?} (expected bt or kripke)"),
            ))
        }
    };
    if as_json {
        println!(
            "{}",
            json!({ "valid": violations.is_empty(), "violations": violations })
        );
    } else if violations.is_empty() {
        println!("ok: every frame constraint holds");
    } else {
        for v in &violations {
            println!("{v}");
        }
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn run_translate(args: &TranslateArgs, as_json: bool) -> Result<u8, Failure> {
    let mode = parse_mode(&args.mode)?;
    let kripke = load_kripke(&args.kripke)?;
    let bt = associated_bt(&kripke).map_err(|e| Failure::new("validate", e))?;
    let file = bt.to_file();
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Failure::new("evaluate", e))?;
    fs::write(&args.out, text)
        .map_err(|e| Failure::new("evaluate", format!("{}: {e}", args.out.display())))?;

    let mut mismatches = Vec::new();
    let verified = args.verify.unwrap_or(0);
    if verified > 0 {
        let atoms: Vec<String> = kripke.to_file().valuation.keys().cloned().collect();
        let formulas =
            random_formulas(args.seed, verified, 3, &atoms, kripke.agents());
        mismatches = verify_truth_preservation(&kripke, &formulas, EvalOptions::new(mode));
    }

    if as_json {
        let rows: Vec<String> = mismatches.iter().map(|m| m.to_string()).collect();
        println!(
            "{}",
            json!({
                "out": args.out.display().to_string(),
                "moments": bt.moments().len(),
                "histories": bt.histories().count(),
                "verified": verified,
                "mismatches": rows,
            })
        );
    } else {
        println!(
            "wrote {} ({} moments, {} histories)",
            args.out.display(),
            bt.moments().len(),
            bt.histories().count()
        );
        if verified > 0 {
            println!(
                "truth preservation: {} formulas, {} mismatches",
                verified,
                mismatches.len()
            );
            for m in &mismatches {
                println!("  {m}");
            }
        }
    }
    Ok(if mismatches.is_empty() { 0 } else { 1 })
}

fn run_axioms(args: &AxiomsArgs, as_json: bool) -> Result<u8, Failure> {
    let mode = parse_mode(&args.mode)?;
    let semantics: SweepSemantics = args
        .semantics
        .parse()
        .map_err(|e: String| Failure::new("parse", e))?;
    let params = GeneratorParams {
        seed: args.seed,
        ..Default::default()
    };
    let report = soundness_sweep(&params, args.models, args.instances, semantics, mode);
    if as_json {
        println!(
            "{}",
            serde_json::to_string(&report).map_err(|e| Failure::new("evaluate", e))?
        );
    } else {
        print!("{report}");
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn puzzle_spec(id: u8, variant: &str) -> Result<PuzzleSpec, Failure> {
    if !(1..=3).contains(&id) {
        return Err(Failure::new("parse", format!("puzzle id {id} out of range 1..=3")));
    }
    let variant: Variant = variant
        .parse()
        .map_err(|e: String| Failure::new("parse", e))?;
    Ok(PuzzleSpec::new(id, variant))
}

fn run_puzzle(command: &PuzzleCommand, as_json: bool) -> Result<u8, Failure> {
    match command {
        PuzzleCommand::Run { id, variant, mode } => {
            let spec = puzzle_spec(*id, variant)?;
            let mode = parse_mode(mode)?;
            let mismatches = verify_puzzle(spec, mode);
            if as_json {
                let rows: Vec<_> = mismatches
                    .iter()
                    .map(|m| {
                        json!({
                            "expected": judgment_json(&m.expected),
                            "got": m.got,
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    json!({
                        "puzzle": id,
                        "variant": variant,
                        "mode": mode,
                        "mismatches": rows,
                    })
                );
            } else {
                println!(
                    "puzzle {id} ({variant}, {mode}): {} mismatches",
                    mismatches.len()
                );
                for m in &mismatches {
                    println!("  {m}");
                }
            }
            Ok(if mismatches.is_empty() { 0 } else { 1 })
        }
        PuzzleCommand::Export { id, variant, out } => {
            let spec = puzzle_spec(*id, variant)?;
            let model = build_puzzle(spec);
            let text = serde_json::to_string_pretty(&model.to_file())
                .map_err(|e| Failure::new("evaluate", e))?;
            match out {
                Some(path) => {
                    fs::write(path, text).map_err(|e| {
                        Failure::new("evaluate", format!("{}: {e}", path.display()))
                    })?;
                    if as_json {
                        println!("{}", json!({ "out": path.display().to_string() }));
                    } else {
                        println!("wrote {}", path.display());
                    }
                }
                None => println!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => run_check(args, cli.json),
        Command::Validate(args) => run_validate(args, cli.json),
        Command::Translate(args) => run_translate(args, cli.json),
        Command::Axioms(args) => run_axioms(args, cli.json),
        Command::Puzzle { command } => run_puzzle(command, cli.json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(fail) => {
            if cli.json {
                eprintln!(
                    "{}",
                    json!({ "error": { "stage": fail.stage, "message": fail.message } })
                );
            } else {
                eprintln!("error ({}): {}", fail.stage, fail.message);
            }
            ExitCode::from(2)
        }
    }
}
