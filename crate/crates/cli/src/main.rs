use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use bhcycle::faults::{build_optimality_counterexample, is_conditional, random_conditional_faults};
use bhcycle::io::{self, CycleJson};
use bhcycle::pathfinder::{ham_cycle_search, SearchBudget, SearchError};
use bhcycle::stress::{error_kind, free_edges, run_stress, trial_seed, StressConfig};
use bhcycle::topology::{build_def1, build_def2, Edge, Topology};
use bhcycle::verify::{certify_no_ham_cycle, verify_defs_equivalent, verify_ham_cycle, AbsenceVerdict};
use bhcycle::{Constructor, FaultSet};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "bhcycle", version, about = "Fault-free Hamiltonian cycles in balanced hypercubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate BHn and write it as JSON or DOT.
    Gen {
        n: usize,
        #[arg(long, value_enum, default_value = "1")]
        def: Def,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a seeded conditional fault set.
    Faults {
        n: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a fault-free Hamiltonian cycle through an edge.
    Construct {
        n: usize,
        /// A fault JSON file, or `random:SIZE:SEED`.
        #[arg(long, default_value = "random:0:0")]
        faults: String,
        /// `U-V` with comma-separated digits (e.g. `0,0-1,0`), or `random:SEED`.
        #[arg(long, default_value = "random:0")]
        edge: String,
        #[arg(long, value_enum, default_value = "theorem")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a cycle document against a fault set.
    Verify {
        n: usize,
        #[arg(long)]
        faults: String,
        #[arg(long)]
        cycle: PathBuf,
    },
    /// Run seeded constructions and report coverage and failures.
    Stress {
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Defaults to 4n-5.
        #[arg(long)]
        fault_size: Option<usize>,
        #[arg(long, default_value_t = 1)]
        edges_per_trial: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw fault sets from a mixture aimed at the rarer subcases.
        #[arg(long)]
        biased: bool,
        /// Search this hard for every leaf subcase the trials missed.
        #[arg(long, default_value_t = 0)]
        target_attempts: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build the 4n-4 fault set that admits no Hamiltonian cycle.
    Counterexample { n: usize },
}

#[derive(Clone, Copy, ValueEnum)]
enum Def {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Theorem,
    Search,
}

/// A run that finished with a classified failure.
struct Exit(u8, String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Exit(code, msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<Result<(), Exit>> {
    match cmd {
        Command::Gen { n, def, format, out } => gen(n, def, format, out.as_deref()),
        Command::Faults { n, size, seed, out } => {
            let t = topology(n)?;
            let f = match random_conditional_faults(&t, size, seed) {
                Ok(f) => f,
                Err(e) => return Ok(Err(Exit(EXIT_PRECONDITION, e.to_string()))),
            };
            emit(out.as_deref(), &json(&io::faults_json(&f, Some(seed)))?)?;
            Ok(Ok(()))
        }
        Command::Construct { n, faults, edge, mode, out } => construct(n, &faults, &edge, mode, out.as_deref()),
        Command::Verify { n, faults, cycle } => verify(n, &faults, &cycle),
        Command::Stress { n, trials, fault_size, edges_per_trial, seed, biased, target_attempts, report } => {
            let t = topology(n)?;
            let cfg = StressConfig {
                n,
                trials,
                fault_size: fault_size.unwrap_or((4 * n).saturating_sub(5)),
                edges_per_trial,
                seed,
                biased,
                target_attempts,
                budget: SearchBudget::from_env(),
            };
            let r = run_stress(&t, &cfg);
            info!("{} of {} constructions passed", r.passed, r.constructions);
            emit(report.as_deref(), &json(&r)?)?;
            Ok(match r.exit_code() {
                0 => Ok(()),
                code => Err(Exit(
                    cli_code(code),
                    format!("{} of {} constructions failed", r.failures.len(), r.constructions),
                )),
            })
        }
        Command::Counterexample { n } => counterexample(n),
    }
}

fn topology(n: usize) -> Result<Topology> {
    build_def1(n).map_err(|e| anyhow!("cannot build BH{n}: {e}"))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(n: usize, def: Def, format: Format, out: Option<&Path>) -> Result<Result<(), Exit>> {
    let t = match def {
        Def::Two => build_def2(n),
        _ => build_def1(n),
    }
    .map_err(|e| anyhow!("cannot build BH{n}: {e}"))?;
    let text = match format {
        Format::Json => json(&io::topology_json(&t))?,
        Format::Dot => io::topology_dot(&t),
    };
    if let Def::Both = def {
        let eq = verify_defs_equivalent(n);
        println!("equivalent: {eq}");
        if let Some(p) = out {
            emit(Some(p), &text)?;
        }
        if !eq {
            return Ok(Err(Exit(EXIT_VERIFICATION, "the two definitions disagree".into())));
        }
        return Ok(Ok(()));
    }
    emit(out, &text)?;
    Ok(Ok(()))
}

fn load_faults(t: &Topology, spec: &str) -> Result<Result<FaultSet, Exit>> {
    if let Some(rest) = spec.strip_prefix("random:") {
        let (size, seed) = rest.split_once(':').ok_or_else(|| anyhow!("expected random:SIZE:SEED, got '{spec}'"))?;
        let size: usize = size.parse().context("fault count")?;
        let seed: u64 = seed.parse().context("fault seed")?;
        return Ok(random_conditional_faults(t, size, seed).map_err(|e| Exit(EXIT_PRECONDITION, e.to_string())));
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    Ok(io::parse_faults(t, &text).map(|(f, _)| f).map_err(|e| Exit(EXIT_PRECONDITION, e.to_string())))
}

fn parse_edge(t: &Topology, f: &FaultSet, spec: &str) -> Result<Result<Edge, Exit>> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed.parse().context("edge seed")?;
        let free = free_edges(t, f);
        if free.is_empty() {
            return Ok(Err(Exit(EXIT_PRECONDITION, "no fault-free edge to choose".into())));
        }
        return Ok(Ok(free[(trial_seed(seed, 0) % free.len() as u64) as usize]));
    }
    let clean: String = spec.chars().filter(|c| !"() ".contains(*c)).collect();
    let (a, b) = match clean.split_once('-') {
        Some(pair) => pair,
        None if t.n() == 1 => clean.split_once(',').ok_or_else(|| anyhow!("expected U-V, got '{spec}'"))?,
        None => bail!("expected U-V, got '{spec}'"),
    };
    let (u, v) = (io::parse_vertex(a)?, io::parse_vertex(b)?);
    Ok(t.edge(u, v).map_err(|e| Exit(EXIT_PRECONDITION, e.to_string())))
}

fn construct(n: usize, faults: &str, edge: &str, mode: Mode, out: Option<&Path>) -> Result<Result<(), Exit>> {
    let t = topology(n)?;
    let f = match load_faults(&t, faults)? {
        Ok(f) => f,
        Err(x) => return Ok(Err(x)),
    };
    let e = match parse_edge(&t, &f, edge)? {
        Ok(e) => e,
        Err(x) => return Ok(Err(x)),
    };
    let budget = SearchBudget::from_env();
    let (cycle, labels) = match mode {
        Mode::Theorem => match Constructor::new(&t, budget).build(&f, e) {
            Ok((c, trace)) => (c.into_vertices(), trace.labels()),
            Err(err) => return Ok(Err(Exit(cli_code(error_kind(&err)), err.to_string()))),
        },
        Mode::Search => match ham_cycle_search(&t, &f, Some(e), budget) {
            Ok(c) => (c.into_vertices(), vec![]),
            Err(err) => {
                let code = match err {
                    SearchError::Precondition(_) => EXIT_PRECONDITION,
                    SearchError::BudgetExceeded => EXIT_BUDGET,
                    SearchError::NotFound | SearchError::SelfCheck(_) => EXIT_VERIFICATION,
                };
                return Ok(Err(Exit(code, err.to_string())));
            }
        },
    };
    let v = verify_ham_cycle(&t, &f, &cycle, Some(e));
    if !v.ok {
        return Ok(Err(Exit(EXIT_VERIFICATION, v.diagnostic.unwrap_or_default())));
    }
    emit(out, &json(&io::cycle_json(n, &cycle, Some(e), &labels))?)?;
    Ok(Ok(()))
}

fn verify(n: usize, faults: &str, cycle: &Path) -> Result<Result<(), Exit>> {
    let t = topology(n)?;
    let f = match load_faults(&t, faults)? {
        Ok(f) => f,
        Err(x) => return Ok(Err(x)),
    };
    let text = fs::read_to_string(cycle).with_context(|| format!("reading {}", cycle.display()))?;
    let doc: CycleJson = serde_json::from_str(&text).context("parsing cycle document")?;
    if doc.n != n {
        return Ok(Err(Exit(EXIT_PRECONDITION, format!("cycle is for BH{}, expected BH{n}", doc.n))));
    }
    let through = match doc.through {
        Some(e) => match t.edge(e.u, e.v) {
            Ok(e) => Some(e),
            Err(err) => return Ok(Err(Exit(EXIT_VERIFICATION, err.to_string()))),
        },
        None => None,
    };
    let v = verify_ham_cycle(&t, &f, &doc.cycle, through);
    println!("{}", json(&v)?.trim_end());
    Ok(if v.ok { Ok(()) } else { Err(Exit(EXIT_VERIFICATION, v.diagnostic.unwrap_or_default())) })
}

#[derive(Serialize)]
struct CounterexampleReport {
    n: usize,
    fault_count: usize,
    is_conditional: bool,
    faults: io::FaultsJson,
    absence: AbsenceVerdict,
}

fn counterexample(n: usize) -> Result<Result<(), Exit>> {
    if n < 2 {
        return Ok(Err(Exit(EXIT_PRECONDITION, format!("the bound is stated for n >= 2, got n = {n}"))));
    }
    let t = topology(n)?;
    let c = match build_optimality_counterexample(&t) {
        Ok(c) => c,
        Err(e) => return Ok(Err(Exit(EXIT_PRECONDITION, e.to_string()))),
    };
    let absence = certify_no_ham_cycle(&t, &c.faults);
    let report = CounterexampleReport {
        n,
        fault_count: c.faults.len(),
        is_conditional: is_conditional(&t, &c.faults),
        faults: io::faults_json(&c.faults, None),
        absence,
    };
    print!("{}", json(&report)?);
    Ok(match report.absence {
        AbsenceVerdict::ConclusiveAbsent | AbsenceVerdict::StructuralAbsent { .. } => Ok(()),
        _ => Err(Exit(EXIT_VERIFICATION, "absence was not certified".into())),
    })
}

/// Oracle failures inside the constructor surface as verification failures.
fn cli_code(kind: u8) -> u8 {
    match kind {
        EXIT_PRECONDITION | EXIT_BUDGET => kind,
        _ => EXIT_VERIFICATION,
    }
}
