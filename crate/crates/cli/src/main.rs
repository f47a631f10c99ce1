mod bench;
mod output;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncdc3d::asp::{emit_facts, emit_program, Mode};
use ncdc3d::oracle::{self, OracleError};
use ncdc3d::solver::{
    check_with_stats, explain_with_stats, grid_for, infer_with_stats, ExplainOutcome, InferOutcome, SolveError,
    SolverConfig, Verdict,
};
use ncdc3d::{parse_network, GridSpec, Network};

use output::Report;

#[derive(Parser)]
#[command(name = "ncdc3d", version)]
#[command(about = "Consistency, explanation and inference for 3D cardinal direction constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide consistency and print a witness
    Check(Common),
    /// Find the fewest constraints to give up
    Explain(Common),
    /// Relations for the network's `infer` pairs
    Infer {
        #[command(flatten)]
        common: Common,
        /// Collect every relation some optimal solution realizes
        #[arg(long)]
        enumerate: bool,
        /// Extra pair to infer, as TARGET:REFERENCE
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(String, String)>,
    },
    /// Print the answer-set encoding
    Emit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = EmitMode::Check)]
        mode: EmitMode,
        /// Only the facts, no rules
        #[arg(long)]
        facts_only: bool,
    },
    /// Exhaustive ground truth on a tiny grid
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Report every optimal explanation instead of a verdict
        #[arg(long)]
        explain: bool,
    },
    /// Search effort over replicated scenarios
    Bench {
        /// Largest number of marine copies
        #[arg(long, default_value_t = 4)]
        copies: usize,
        #[command(flatten)]
        budget: Budget,
        #[arg(long)]
        structured: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Network file; standard input when absent or `-`
    input: Option<PathBuf>,
    /// Grid as N or MxNxP, overriding the file
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Require constrained objects to be connected
    #[arg(long)]
    connected: bool,
    /// Machine-readable output
    #[arg(long)]
    structured: bool,
    #[command(flatten)]
    budget: Budget,
}

#[derive(Args)]
struct Budget {
    /// Search node limit
    #[arg(long)]
    nodes: Option<u64>,
    /// Wall-clock limit in seconds
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitMode {
    Check,
    Explain,
    Infer,
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let dims: Vec<u32> = s
        .split(['x', 'X'])
        .map(|d| d.trim().parse::<u32>().map_err(|_| format!("bad grid dimension `{d}`")))
        .collect::<Result<_, _>>()?;
    let spec = match dims[..] {
        [n] => GridSpec::cube(n),
        [m, n, p] => GridSpec::new(m, n, p),
        _ => return Err("expected N or MxNxP".into()),
    };
    if spec.dims().contains(&0) {
        return Err("grid dimensions must be positive".into());
    }
    Ok(spec)
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once(':') {
        Some((t, r)) if !t.is_empty() && !r.is_empty() => Ok((t.to_string(), r.to_string())),
        _ => Err("expected TARGET:REFERENCE".into()),
    }
}

const EXIT_OK: u8 = 0;
const EXIT_INCONSISTENT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

enum Failure {
    Usage(String),
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl Budget {
    fn config(&self, grid: Option<GridSpec>) -> Result<SolverConfig, Failure> {
        let time_budget = match self.timeout {
            Some(t) if t.is_nan() || t <= 0.0 || t.is_infinite() => return Err(Failure::Usage("timeout must be positive".into())),
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        if self.nodes == Some(0) {
            return Err(Failure::Usage("node budget must be positive".into()));
        }
        Ok(SolverConfig {
            grid,
            node_budget: self.nodes,
            time_budget,
            workers: self.workers.max(1),
            ..SolverConfig::default()
        })
    }
}

impl Common {
    fn load(&self) -> Result<Network, Failure> {
        let (label, text) = match &self.input {
            Some(p) if p.as_os_str() != "-" => {
                let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
                (p.display().to_string(), text)
            }
            _ => {
                let mut text = String::new();
                io::stdin()
                    .read_to_string(&mut text)
                    .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
                ("<stdin>".to_string(), text)
            }
        };
        let mut net = parse_network(&text).map_err(|e| Failure::Usage(format!("{label}:{e}")))?;
        if self.connected {
            net.connected = true;
        }
        if let Some(g) = self.grid {
            net.grid = Some(g);
        }
        Ok(net)
    }

    fn emit(&self, report: &Report) {
        if self.structured {
            out(&format!("{}\n", serde_json::to_string_pretty(&report.structured()).expect("json")));
        } else {
            out(&report.human());
        }
    }
}

const NOT_FOUND: &str = "no solution at this grid; it is below the size that makes the answer definitive";

/// Exit code for an outcome that found nothing, by grid completeness.
fn nothing_found(report: &mut Report, net: &Network) -> u8 {
    if report.grid.is_complete_for(net.objects.len()) {
        EXIT_INCONSISTENT
    } else {
        report.verdict = "not-found";
        report.note = Some(NOT_FOUND.to_string());
        EXIT_UNKNOWN
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check(common) => {
            let net = common.load()?;
            let grid = grid_for(&net);
            let (verdict, _) = check_with_stats(&net, &common.budget.config(None)?)?;
            let (report, code) = match verdict {
                Verdict::Consistent(sol) => (Report::new("consistent", grid).with_witness(sol), EXIT_OK),
                Verdict::Inconsistent | Verdict::NotFound => {
                    let mut r = Report::new("inconsistent", grid);
                    let code = nothing_found(&mut r, &net);
                    (r, code)
                }
                Verdict::Unknown => (exhausted(grid), EXIT_UNKNOWN),
            };
            common.emit(&report);
            Ok(code)
        }
        Command::Explain(common) => {
            let net = common.load()?;
            let grid = grid_for(&net);
            let (outcome, _) = explain_with_stats(&net, &common.budget.config(None)?)?;
            let (report, code) = match outcome {
                ExplainOutcome::Explained(e) => {
                    let verdict = if e.violated.is_empty() { "consistent" } else { "inconsistent" };
                    (Report::new(verdict, grid).with_witness(e.witness), EXIT_OK)
                }
                ExplainOutcome::NoExplanation | ExplainOutcome::NotFound => {
                    let mut r = Report::new("inconsistent", grid);
                    r.note = Some("the mandatory constraints alone have no solution".into());
                    let code = nothing_found(&mut r, &net);
                    (r, code)
                }
                ExplainOutcome::Unknown => (exhausted(grid), EXIT_UNKNOWN),
            };
            common.emit(&report);
            Ok(code)
        }
        Command::Infer { common, enumerate, pairs } => {
            let mut net = common.load()?;
            for p in pairs {
                if !net.infer_requests.contains(&p) {
                    net.infer_requests.push(p);
                }
            }
            if net.infer_requests.is_empty() {
                return Err(Failure::Usage("no pairs to infer; add `infer` lines or --pair".into()));
            }
            let grid = grid_for(&net);
            let (outcome, _) = infer_with_stats(&net, &common.budget.config(None)?, enumerate)?;
            let (report, code) = match outcome {
                InferOutcome::Inferred { witness, relations } => {
                    let mut r = Report::new("consistent", grid).with_witness(witness);
                    r.inferred = relations;
                    (r, EXIT_OK)
                }
                InferOutcome::Inconsistent | InferOutcome::NotFound => {
                    let mut r = Report::new("inconsistent", grid);
                    let code = nothing_found(&mut r, &net);
                    (r, code)
                }
                InferOutcome::Unknown => (exhausted(grid), EXIT_UNKNOWN),
            };
            common.emit(&report);
            Ok(code)
        }
        Command::Emit { common, mode, facts_only } => {
            let net = common.load()?;
            net.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let mut text = emit_facts(&net);
            if !facts_only {
                let mode = match mode {
                    EmitMode::Check => Mode::Check,
                    EmitMode::Explain => Mode::Explain,
                    EmitMode::Infer => Mode::Infer,
                };
                text.push('\n');
                text.push_str(&emit_program(&net, grid_for(&net), mode));
            }
            out(&text);
            Ok(EXIT_OK)
        }
        Command::Oracle { common, explain } => {
            let net = common.load()?;
            let grid = grid_for(&net);
            if explain {
                let (k, sets) = oracle::oracle_optimal_explanation(&net, grid)?;
                if common.structured {
                    let sets: Vec<Vec<[&str; 2]>> = sets
                        .iter()
                        .map(|s| s.iter().map(|(a, b)| [a.as_str(), b.as_str()]).collect())
                        .collect();
                    let v = serde_json::json!({ "grid": grid.dims(), "violations": k, "explanations": sets });
                    out(&format!("{}\n", serde_json::to_string_pretty(&v).expect("json")));
                } else {
                    let mut text = format!("{k} violated at best on {grid}\n");
                    for s in sets {
                        let names: Vec<String> = s.iter().map(|(a, b)| format!("{a} {b}")).collect();
                        text.push_str(&format!("  {{{}}}\n", names.join(", ")));
                    }
                    out(&text);
                }
                return Ok(EXIT_OK);
            }
            let report = match oracle::oracle_check(&net, grid)? {
                Verdict::Consistent(sol) => Report::new("consistent", grid).with_witness(sol),
                _ => Report::new("inconsistent", grid),
            };
            common.emit(&report);
            // the oracle answers for this grid only
            Ok(if report.witness.is_some() { EXIT_OK } else { EXIT_INCONSISTENT })
        }
        Command::Bench {
            copies,
            budget,
            structured,
        } => {
            let rows = bench::run(&bench::instances(copies.max(1)), &budget.config(None)?)?;
            if structured {
                out(&format!("{}\n", serde_json::to_string_pretty(&bench::structured(&rows)).expect("json")));
            } else {
                out(&bench::table(&rows));
            }
            Ok(EXIT_OK)
        }
    }
}

/// Writes to stdout; a reader that went away is not an error worth a panic.
fn out(text: &str) {
    let mut stdout = io::stdout().lock();
    if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
        std::process::exit(0);
    }
}

fn exhausted(grid: GridSpec) -> Report {
    let mut r = Report::new("unknown", grid);
    r.budget_exhausted = true;
    r.note = Some("search budget exhausted".into());
    r
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
