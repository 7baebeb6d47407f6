//! Command-line surface for the rewriting engine: parsing, reduction,
//! traces, developments, confluence joins, standardization, NbE, the
//! self-encoding and the property suites.
//!
//! Exit codes: 0 on success, 1 on a suite failure or rejected check,
//! 2 on usage or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use lambda_core::cbn::{
    cdev, is_srs, join_multi, replay_derivation, standardize, step_cbn, step_left_with_path,
    step_par, ParDerivation, Trace,
};
use lambda_core::cbv::{
    cdev_cbv, from_unsorted, is_srs_cbv, join_multi_cbv, replay_derivation_cbv,
    standardize_cbv, step_cbv, step_left_cbv_with_path, step_par_cbv, DeltaTableV,
    ParDerivationV, TraceV,
};
use lambda_core::hoas::{check_adequacy_step, dec, enc, extend_delta};
use lambda_core::semantics::{normalize_nbe, Fuel};
use lambda_core::{DeltaTable, Term};

use lambda_harness::gen::{corpus_rng, Calculus, CorpusSpec};
use lambda_harness::json;
use lambda_harness::parse::{parse_term, parse_term_prime};
use lambda_harness::print::{print_term, PrintStyle};
use lambda_harness::suites::{run_all, run_suite, SuiteReport, SUITE_NAMES};

#[derive(Parser)]
#[command(
    name = "lambda",
    about = "Lambda-calculus rewriting engine and verification harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Calculus flavor for reduction commands.
    #[arg(long, global = true, value_enum, default_value_t = CalculusArg::Cbn)]
    calculus: CalculusArg,

    /// Delta-rule table (JSON file); `sample` loads the built-in successor
    /// table.
    #[arg(long, global = true)]
    delta: Option<String>,

    /// Bound on iterated reduction steps.
    #[arg(long, global = true, default_value_t = 64)]
    max_steps: u64,

    /// Evaluation fuel for normalization and adequacy checking.
    #[arg(long, global = true, default_value_t = 256)]
    fuel: u64,

    /// Random seed for generated material.
    #[arg(long, global = true, default_value_t = 0xace0f5eed)]
    seed: u64,

    /// Size bound for generated terms.
    #[arg(long, global = true, default_value_t = 9)]
    max_nodes: usize,

    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CalculusArg {
    Cbn,
    Cbv,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print it back.
    Parse { term: String },
    /// Enumerate the one-step reducts of a term.
    Reduce { term: String },
    /// Iterate left reduction and print the trace.
    Trace { term: String },
    /// Print the complete parallel development.
    Cdev { term: String },
    /// Build two random parallel chains out of a term and join them.
    Join { term: String },
    /// Reduce randomly, then standardize the reduction into a standard
    /// sequence.
    Standardize { term: String },
    /// Check a standard-sequence JSON file ('-' reads stdin).
    CheckSrs { file: PathBuf },
    /// Normalize by evaluation.
    Nbe { term: String },
    /// Encode a term into the tagged self-encoding.
    Enc { term: String },
    /// Decode a tagged term back, if it is an encoder image.
    Dec { term: String },
    /// Check one left step through the encoded reduction relation.
    AdequacyCheck { term: String },
    /// Run one registered property suite, or `all`.
    Suite { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_delta(cli: &Cli) -> anyhow::Result<DeltaTable> {
    match cli.delta.as_deref() {
        None => Ok(DeltaTable::new()),
        Some("sample") => Ok(DeltaTable::sample_succ(8)),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            Ok(json::delta_from_json(&v)?)
        }
    }
}

fn load_delta_v(cli: &Cli) -> anyhow::Result<DeltaTableV> {
    match cli.delta.as_deref() {
        None => Ok(DeltaTableV::new()),
        Some("sample") => Ok(DeltaTableV::sample_succ(8)),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v: serde_json::Value = serde_json::from_str(&text)?;
            Ok(json::delta_v_from_json(&v)?)
        }
    }
}

fn parse_input(src: &str) -> anyhow::Result<Term> {
    parse_term(src).map_err(|e| anyhow::anyhow!("{e}"))
}

fn spec_from(cli: &Cli) -> CorpusSpec {
    CorpusSpec {
        max_nodes: cli.max_nodes,
        seed: cli.seed,
        calculus: match cli.calculus {
            CalculusArg::Cbn => Calculus::Cbn,
            CalculusArg::Cbv => Calculus::Cbv,
        },
        ..CorpusSpec::default()
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Parse { term } => {
            let t = parse_input(term)?;
            let style = if cli.json { PrintStyle::Json } else { PrintStyle::Named };
            println!("{}", print_term(&t, style));
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { term } => match cli.calculus {
            CalculusArg::Cbn => {
                let delta = load_delta(&cli)?;
                let t = parse_input(term)?;
                for (path, u) in step_cbn(&t, &delta) {
                    if cli.json {
                        let (p, k) = json::path_to_json(&path);
                        println!(
                            "{}",
                            serde_json::json!({"path": p, "kind": k, "to": json::term_to_json(&u)})
                        );
                    } else {
                        println!("{path}: {u}");
                    }
                }
                Ok(ExitCode::SUCCESS)
            }
            CalculusArg::Cbv => {
                let delta = load_delta_v(&cli)?;
                let t = from_unsorted(&parse_input(term)?);
                for (path, u) in step_cbv(&t, &delta) {
                    if cli.json {
                        let (p, k) = json::path_to_json(&path);
                        println!(
                            "{}",
                            serde_json::json!({"path": p, "kind": k,
                                               "to": json::term_to_json(&u.to_unsorted())})
                        );
                    } else {
                        println!("{path}: {u}");
                    }
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Trace { term } => match cli.calculus {
            CalculusArg::Cbn => {
                let delta = load_delta(&cli)?;
                let t = parse_input(term)?;
                let mut trace = Trace::empty(t);
                for _ in 0..cli.max_steps {
                    match step_left_with_path(trace.end(), &delta) {
                        Some((p, u)) => trace.push(p, u),
                        None => break,
                    }
                }
                trace.validate(&delta).map_err(|e| anyhow::anyhow!("{e}"))?;
                if cli.json {
                    println!("{}", json::trace_to_json(&trace));
                } else {
                    for t in trace.terms() {
                        println!("{t}");
                    }
                }
                Ok(ExitCode::SUCCESS)
            }
            CalculusArg::Cbv => {
                let delta = load_delta_v(&cli)?;
                let t = from_unsorted(&parse_input(term)?);
                let mut trace = TraceV::empty(t);
                for _ in 0..cli.max_steps {
                    match step_left_cbv_with_path(trace.end(), &delta) {
                        Some((p, u)) => trace.push(p, u),
                        None => break,
                    }
                }
                trace.validate(&delta).map_err(|e| anyhow::anyhow!("{e}"))?;
                for t in trace.terms() {
                    println!("{t}");
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Cdev { term } => match cli.calculus {
            CalculusArg::Cbn => {
                let delta = load_delta(&cli)?;
                let t = parse_input(term)?;
                let d = cdev(&t, &delta);
                let style = if cli.json { PrintStyle::Json } else { PrintStyle::Named };
                println!("{}", print_term(&d, style));
                Ok(ExitCode::SUCCESS)
            }
            CalculusArg::Cbv => {
                let delta = load_delta_v(&cli)?;
                let t = from_unsorted(&parse_input(term)?);
                println!("{}", cdev_cbv(&t, &delta));
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Join { term } => join_command(&cli, term),
        Command::Standardize { term } => standardize_command(&cli, term),
        Command::CheckSrs { file } => {
            let text = if file.as_os_str() == "-" {
                use std::io::Read;
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                s
            } else {
                std::fs::read_to_string(file)?
            };
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let terms = json::srs_from_json(&v)?;
            let accepted = match cli.calculus {
                CalculusArg::Cbn => {
                    let delta = load_delta(&cli)?;
                    is_srs(&terms, &delta)
                }
                CalculusArg::Cbv => {
                    let delta = load_delta_v(&cli)?;
                    let sorted: Vec<_> = terms.iter().map(from_unsorted).collect();
                    is_srs_cbv(&sorted, &delta)
                }
            };
            println!("{}", if accepted { "standard" } else { "not standard" });
            Ok(if accepted {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Nbe { term } => {
            let delta = load_delta(&cli)?;
            let t = parse_input(term)?;
            let mut fuel = Fuel::new(cli.fuel);
            match normalize_nbe(&t, &delta, &mut fuel) {
                Ok(n) => {
                    let style = if cli.json { PrintStyle::Json } else { PrintStyle::Named };
                    println!("{}", print_term(&n, style));
                    Ok(ExitCode::SUCCESS)
                }
                Err(_) => {
                    println!("indeterminate (fuel {} exhausted)", cli.fuel);
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Enc { term } => {
            let t = parse_input(term)?;
            let e = enc(&t);
            let style = if cli.json { PrintStyle::Json } else { PrintStyle::Named };
            println!("{}", print_term(&e, style));
            Ok(ExitCode::SUCCESS)
        }
        Command::Dec { term } => {
            let t = parse_term_prime(term).map_err(|e| anyhow::anyhow!("{e}"))?;
            match dec(&t) {
                Some(b) => {
                    let style = if cli.json { PrintStyle::Json } else { PrintStyle::Named };
                    println!("{}", print_term(&b, style));
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("not an encoder image");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::AdequacyCheck { term } => {
            let delta = load_delta(&cli)?;
            let delta_prime = extend_delta(&delta);
            let t = parse_input(term)?;
            let Some(y) = lambda_core::cbn::step_left(&t, &delta) else {
                anyhow::bail!("{t} has no left reduct");
            };
            let verdict = check_adequacy_step(&t, &y, &delta, &delta_prime, cli.fuel)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            println!("{t} -L-> {y}: {verdict:?}");
            Ok(match verdict {
                lambda_core::hoas::Adequacy::Confirmed => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            })
        }
        Command::Suite { name } => {
            let spec = spec_from(&cli);
            let reports: Vec<SuiteReport> = if name == "all" {
                run_all(&spec)
            } else {
                vec![run_suite(name, &spec).map_err(|e| anyhow::anyhow!("{e}"))?]
            };
            let mut ok = true;
            for r in &reports {
                println!("{}", r.summary_line());
                for f in r.failures.iter().take(5) {
                    println!("    {}: {} ({})", f.law, f.input, f.witness);
                }
                ok &= r.passed();
            }
            if name == "all" {
                println!(
                    "{} of {} suites passed",
                    reports.iter().filter(|r| r.passed()).count(),
                    SUITE_NAMES.len()
                );
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn random_par_chain(
    start: &Term,
    len: usize,
    delta: &DeltaTable,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Vec<ParDerivation> {
    let mut out = Vec::new();
    let mut cur = start.clone();
    for _ in 0..len {
        let ds = step_par(&cur, delta);
        if ds.is_empty() {
            break;
        }
        let d = ds[rng.gen_range(0..ds.len())].clone();
        cur = d.replay().expect("enumerated derivation").target;
        out.push(d);
    }
    out
}

fn join_command(cli: &Cli, term: &str) -> anyhow::Result<ExitCode> {
    let spec = spec_from(cli);
    let mut rng = corpus_rng(&spec);
    let len = (cli.max_steps as usize).clamp(1, 4);
    match cli.calculus {
        CalculusArg::Cbn => {
            let delta = load_delta(cli)?;
            let t = parse_input(term)?;
            let c1 = random_par_chain(&t, len, &delta, &mut rng);
            let c2 = random_par_chain(&t, len, &delta, &mut rng);
            let (z, e1, e2) =
                join_multi(&t, &c1, &c2, &delta).map_err(|e| anyhow::anyhow!("{e}"))?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "start": json::term_to_json(&t),
                        "left": c1.iter().map(json::derivation_to_json).collect::<Vec<_>>(),
                        "right": c2.iter().map(json::derivation_to_json).collect::<Vec<_>>(),
                        "join": json::term_to_json(&z),
                        "left_ext": e1.iter().map(json::derivation_to_json).collect::<Vec<_>>(),
                        "right_ext": e2.iter().map(json::derivation_to_json).collect::<Vec<_>>(),
                    })
                );
            } else {
                let end = |chain: &[ParDerivation]| {
                    chain
                        .last()
                        .map(|d| replay_derivation(d, &delta).expect("valid").1.to_string())
                        .unwrap_or_else(|| t.to_string())
                };
                println!("left  ({} steps) reaches {}", c1.len(), end(&c1));
                println!("right ({} steps) reaches {}", c2.len(), end(&c2));
                println!("join: {z}");
            }
            Ok(ExitCode::SUCCESS)
        }
        CalculusArg::Cbv => {
            let delta = load_delta_v(cli)?;
            let t = from_unsorted(&parse_input(term)?);
            let chain = |rng: &mut rand_chacha::ChaCha12Rng| {
                let mut out: Vec<ParDerivationV> = Vec::new();
                let mut cur = t.clone();
                for _ in 0..len {
                    let ds = step_par_cbv(&cur, &delta);
                    if ds.is_empty() {
                        break;
                    }
                    let d = ds[rng.gen_range(0..ds.len())].clone();
                    cur = d.replay().expect("enumerated derivation").target;
                    out.push(d);
                }
                out
            };
            let c1 = chain(&mut rng);
            let c2 = chain(&mut rng);
            let (z, _e1, _e2) =
                join_multi_cbv(&t, &c1, &c2, &delta).map_err(|e| anyhow::anyhow!("{e}"))?;
            let end = |chain: &[ParDerivationV]| {
                chain
                    .last()
                    .map(|d| replay_derivation_cbv(d, &delta).expect("valid").1.to_string())
                    .unwrap_or_else(|| t.to_string())
            };
            println!("left  ({} steps) reaches {}", c1.len(), end(&c1));
            println!("right ({} steps) reaches {}", c2.len(), end(&c2));
            println!("join: {z}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn standardize_command(cli: &Cli, term: &str) -> anyhow::Result<ExitCode> {
    let spec = spec_from(cli);
    let mut rng = corpus_rng(&spec);
    let len = (cli.max_steps as usize).clamp(1, 6);
    match cli.calculus {
        CalculusArg::Cbn => {
            let delta = load_delta(cli)?;
            let t = parse_input(term)?;
            let chain = random_par_chain(&t, len, &delta, &mut rng);
            let xs = standardize(&t, &chain, &delta).map_err(|e| anyhow::anyhow!("{e}"))?;
            if cli.json {
                println!("{}", json::srs_to_json(&xs));
            } else {
                for x in &xs {
                    println!("{x}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        CalculusArg::Cbv => {
            let delta = load_delta_v(cli)?;
            let t = from_unsorted(&parse_input(term)?);
            let mut chain = Vec::new();
            let mut cur = t.clone();
            for _ in 0..len {
                let ds = step_par_cbv(&cur, &delta);
                if ds.is_empty() {
                    break;
                }
                let d = ds[rng.gen_range(0..ds.len())].clone();
                cur = d.replay().expect("enumerated derivation").target;
                chain.push(d);
            }
            let xs =
                standardize_cbv(&t, &chain, &delta).map_err(|e| anyhow::anyhow!("{e}"))?;
            if cli.json {
                println!("{}", json::srs_v_to_json(&xs));
            } else {
                for x in &xs {
                    println!("{x}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
