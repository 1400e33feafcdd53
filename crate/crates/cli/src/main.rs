use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use qtmb_core::circuit::{build_deutsch, build_dj, Circuit};
use qtmb_core::equivalence::{check_function, deutsch_suite, dj_suite, CaseReport, SuiteReport};
use qtmb_core::linalg::TOLERANCE;
use qtmb_core::oracle::{classify, enumerate_promise_functions, BooleanFunction, Classification};
use qtmb_core::qtm::{
    build_deutsch_qtm, build_dj_qtm, compact_rules, delta_text, run, trace_to_json, DEFAULT_MAX_STEPS,
};
use qtmb_core::translator::{translate, verify_induction, InductionReport};

const TOLERANCE_VAR: &str = "QTMB_TOLERANCE";

#[derive(Parser)]
#[command(name = "qtmb", version, about = "Circuit to quantum Turing machine translator and checker")]
struct Cli {
    /// Print reports as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Deutsch's algorithm on a two-entry truth table.
    Deutsch {
        #[arg(long)]
        f: BooleanFunction,
        /// Dump the QTM superposition trace as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Run Deutsch–Jozsa on a truth table or a seeded random promise function.
    Dj {
        #[command(flatten)]
        source: DjSource,
        #[arg(long, value_enum, default_value_t = Kind::Balanced)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dump the QTM superposition trace as JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Translate a circuit into a QTM rule file.
    Translate {
        #[command(flatten)]
        source: TranslateSource,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
        /// Group branches that differ only in the written register.
        #[arg(long)]
        compact: bool,
        /// Write to a file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the equivalence or induction suites.
    Verify {
        #[command(flatten)]
        what: VerifyTarget,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
    /// List every constant and balanced function of an arity.
    Enumerate {
        #[arg(long)]
        arity: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DjSource {
    #[arg(long)]
    f: Option<BooleanFunction>,
    /// Arity of a random promise function.
    #[arg(long)]
    random: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TranslateSource {
    /// Circuit JSON file.
    file: Option<PathBuf>,
    #[arg(long)]
    deutsch: Option<BooleanFunction>,
    #[arg(long)]
    dj: Option<BooleanFunction>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifyTarget {
    #[arg(long, value_enum)]
    suite: Option<SuiteName>,
    /// Largest register width for the induction check.
    #[arg(long)]
    induction: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Balanced,
    Constant,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Json,
    #[value(alias = "paper-text")]
    Delta,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Deutsch,
    Dj,
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<qtmb_core::Error> for Failure {
    fn from(e: qtmb_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn tolerance() -> Result<f64, Failure> {
    match std::env::var(TOLERANCE_VAR) {
        Err(_) => Ok(TOLERANCE),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
            _ => Err(Failure::Usage(format!("{TOLERANCE_VAR}={s:?} is not a non-negative number"))),
        },
    }
}

fn dispatch(cli: Cli) -> Outcome {
    let tol = tolerance()?;
    match cli.command {
        Command::Deutsch { f, trace } => {
            if f.arity() != 1 {
                return Err(Failure::Usage(format!("deutsch needs a 2-entry table, got {} entries", f.table().len())));
            }
            if trace {
                return emit_trace(&f, check_function(&f, tol)?);
            }
            let report = check_function(&f, tol)?;
            if cli.json {
                print_json(&report);
            } else {
                print!("{}", distributions(&report));
                let measured = report.top_register.as_deref().unwrap_or("?");
                println!("{}, measured {measured}, {}", report.classification, agreement(&report));
            }
            verdict(report.pass)
        }
        Command::Dj { source, kind, seed, trace } => {
            let f = match (source.f, source.random) {
                (Some(f), _) => f,
                (None, Some(m)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    match kind {
                        Kind::Balanced => BooleanFunction::random_balanced(m, &mut rng)?,
                        Kind::Constant => BooleanFunction::random_constant(m, &mut rng)?,
                    }
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let report = check_function(&f, tol)?;
            if trace {
                return emit_trace(&f, report);
            }
            if cli.json {
                print_json(&report);
            } else {
                println!("f = {f}");
                print_dj(&report);
            }
            verdict(report.pass)
        }
        Command::Translate { source, emit, compact, output } => {
            let circuit = if let Some(path) = source.file {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                Circuit::from_json(&text)?
            } else if let Some(f) = source.deutsch {
                build_deutsch(&f)?
            } else if let Some(f) = source.dj {
                build_dj(&f)?
            } else {
                unreachable!("clap requires one source")
            };
            let mut m = translate(&circuit)?;
            if compact {
                m = compact_rules(&m);
            }
            let text = match emit {
                Emit::Json => m.to_rule_json() + "\n",
                Emit::Delta => delta_text(&m),
            };
            match output {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Verify { what, max_arity } => {
            if let Some(n) = what.induction {
                let report = verify_induction(n)?;
                if cli.json {
                    print_json(&report);
                } else {
                    print!("{}", induction_text(&report));
                }
                return verdict(report.pass);
            }
            let report = match what.suite.expect("clap requires one target") {
                SuiteName::Deutsch => deutsch_suite(tol)?,
                SuiteName::Dj => dj_suite(max_arity, tol)?,
            };
            if cli.json {
                print_json(&report);
            } else {
                print!("{}", suite_text(&report));
            }
            verdict(report.pass)
        }
        Command::Enumerate { arity } => {
            let fs = enumerate_promise_functions(arity)?;
            if cli.json {
                let rows: Vec<Value> = fs
                    .iter()
                    .map(|f| serde_json::json!({ "function": f.to_string(), "classification": classify(f) }))
                    .collect();
                print_json(&rows);
            } else {
                for f in &fs {
                    println!("{f} {}", classify(f));
                }
            }
            Ok(())
        }
    }
}

fn verdict(pass: bool) -> Outcome {
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    let v = serde_json::to_value(value).expect("report serializes");
    println!("{}", serde_json::to_string_pretty(&v).expect("value serializes"));
}

fn emit_trace(f: &BooleanFunction, report: CaseReport) -> Outcome {
    let m = if f.arity() == 1 { build_deutsch_qtm(f)? } else { build_dj_qtm(f)? };
    let r = run(&m, DEFAULT_MAX_STEPS)?;
    println!("{}", trace_to_json(&r.trace));
    verdict(report.pass)
}

fn agreement(r: &CaseReport) -> &'static str {
    if r.models_agree && r.lockstep_hand_written.pass && r.lockstep_translated.pass {
        "models agree"
    } else {
        "models disagree"
    }
}

fn format_dist(d: &std::collections::BTreeMap<String, f64>) -> String {
    d.iter().map(|(b, p)| format!("{b}: {p:.6}")).collect::<Vec<_>>().join(", ")
}

fn distributions(r: &CaseReport) -> String {
    format!("circuit  {}\nqtm      {}\n", format_dist(&r.circuit_distribution), format_dist(&r.qtm_distribution))
}

fn print_dj(r: &CaseReport) {
    match (r.classification, &r.top_register) {
        (Classification::Neither, _) => {
            eprintln!("warning: {} is neither constant nor balanced", r.function);
            println!("promise violated: neither");
            print!("{}", distributions(r));
        }
        (class, Some(top)) => println!("{class}, top register {top}"),
        (class, None) => {
            println!("{class}, top register spread");
            print!("{}", distributions(r));
        }
    }
    println!("{}", agreement(r));
}

fn suite_text(r: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &r.cases {
        let dev = c.lockstep_hand_written.max_deviation.max(c.lockstep_translated.max_deviation);
        let status = if c.pass { "pass" } else { "FAIL" };
        let _ = writeln!(out, "{:<10} {:<9} deviation {dev:.3e}  {status}", c.function.to_string(), c.classification);
    }
    let _ = writeln!(out, "{}/{} pass, max deviation {:.3e}", r.passed, r.total, r.max_deviation);
    out
}

fn induction_text(r: &InductionReport) -> String {
    let mut out = String::new();
    let base_ok = r.base.iter().filter(|c| c.equal).count();
    let _ = writeln!(out, "base n=2: {base_ok}/{} equal to the Deutsch machine", r.base.len());
    for s in &r.steps {
        let mode = if s.exhaustive { "exhaustive" } else { "sampled" };
        let _ = writeln!(out, "step {}→{}: {}/{} equal ({mode})", s.from_width, s.to_width, s.passed(), s.cases.len());
        for c in s.cases.iter().filter(|c| !c.equal) {
            if let Some(d) = &c.first_difference {
                let _ = writeln!(out, "  {}: {d}", c.function);
            }
        }
    }
    let _ = writeln!(out, "{}", if r.pass { "induction holds" } else { "induction FAILED" });
    out
}
