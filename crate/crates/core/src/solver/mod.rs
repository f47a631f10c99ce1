//! Native consistency checking, explanation and inference.
//!
//! Constraint choices (disjuncts, violations, default drops) are decided
//! depth-first with iterative deepening on the lexicographic cost. Under a
//! complete set of choices, box endpoints are ordered per axis through a
//! point-algebra network, and cells are built last.

pub mod kernel;
pub mod pa;

mod infer;
mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use thiserror::Error;

pub use infer::InferredRelation;
pub use kernel::{allowed_cells, feasible_object};

use crate::model::{Cost, GridSpec, Network, Pair, Solution, ValidationReport};
use crate::semantics::{verify_solution, VerifyError};
use search::{initial_state, Budget, Choice, Decision, Found, Problem, SearchResult};

/// Knobs shared by every solver entry point.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Overrides both the network's `grid` line and the default bound.
    pub grid: Option<GridSpec>,
    pub node_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    pub workers: usize,
    /// Upper bound on relations collected per pair by enumerating inference.
    pub infer_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: None,
            node_budget: None,
            time_budget: None,
            workers: 1,
            infer_cap: 4096,
        }
    }
}

/// The grid a network is solved on: an explicit override, or the cube of
/// side `2|V| - 1`.
pub fn grid_for(net: &Network) -> GridSpec {
    net.grid
        .unwrap_or_else(|| GridSpec::cube(GridSpec::bound_for(net.objects.len())))
}

fn effective_grid(net: &Network, cfg: &SolverConfig) -> GridSpec {
    cfg.grid.unwrap_or_else(|| grid_for(net))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent(Solution),
    Inconsistent,
    /// No solution on a grid below the completeness bound.
    NotFound,
    /// The node or time budget ran out.
    Unknown,
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent(_))
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            Verdict::Consistent(s) => Some(s),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Consistent(_) => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::NotFound => "not-found",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub violated: BTreeSet<Pair>,
    pub cost: Cost,
    pub witness: Solution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExplainOutcome {
    Explained(Explanation),
    /// Even with every non-mandatory constraint given up there is no solution.
    NoExplanation,
    NotFound,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InferOutcome {
    Inferred {
        witness: Solution,
        relations: BTreeMap<Pair, InferredRelation>,
    },
    Inconsistent,
    NotFound,
    Unknown,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] ValidationReport),
    #[error("internal error: witness failed re-check: {0}")]
    Unsound(#[from] VerifyError),
}

pub(crate) struct Run {
    pub problem: Problem,
    pub budget: Budget,
    pub workers: usize,
    pub started: Instant,
}

impl Run {
    fn new(net: &Network, cfg: &SolverConfig, explain: bool) -> Result<Self, SolveError> {
        net.validate()?;
        let started = Instant::now();
        Ok(Run {
            problem: Problem::new(net, effective_grid(net, cfg), explain),
            budget: Budget::new(cfg.node_budget, cfg.time_budget.map(|d| started + d)),
            workers: cfg.workers.max(1),
            started,
        })
    }

    fn stats(&self) -> Stats {
        Stats {
            nodes: self.budget.nodes(),
            elapsed: self.started.elapsed(),
        }
    }
}

pub(crate) enum Optimum {
    Found(Found, Cost),
    None,
    Aborted,
}

/// Lexicographically cheapest solution: violations first, then drops.
pub(crate) fn optimize(run: &Run) -> Optimum {
    let p = &run.problem;
    let Some(root) = initial_state(p) else {
        return Optimum::None;
    };
    let max_k = if p.explain {
        p.hard.iter().filter(|h| !h.mandatory).count()
    } else {
        0
    };
    let max_d = p.defaults.iter().filter(|d| !d.ab).count();
    let solve = |lim: Cost| search::solve(p, &root, lim, &run.budget, run.workers);
    match solve(Cost::new(max_k, max_d)) {
        SearchResult::Exhausted => return Optimum::None,
        SearchResult::Aborted => return Optimum::Aborted,
        SearchResult::Found(f) if max_k == 0 && max_d == 0 => return Optimum::Found(f, Cost::default()),
        SearchResult::Found(_) => {}
    }
    for k in 0..=max_k {
        if k < max_k {
            match solve(Cost::new(k, max_d)) {
                SearchResult::Exhausted => continue,
                SearchResult::Aborted => return Optimum::Aborted,
                SearchResult::Found(_) => {}
            }
        }
        for d in 0..=max_d {
            match solve(Cost::new(k, d)) {
                SearchResult::Exhausted => continue,
                SearchResult::Aborted => return Optimum::Aborted,
                SearchResult::Found(f) => return Optimum::Found(f, Cost::new(k, d)),
            }
        }
    }
    unreachable!("a solution exists at the maximal budget")
}

pub(crate) fn to_solution(p: &Problem, found: &Found) -> Solution {
    let mut dropped = BTreeSet::new();
    let mut ab_dropped = BTreeSet::new();
    let mut violated = BTreeSet::new();
    for d in p.defaults.iter().filter(|d| d.ab) {
        let pair = search::pair_names(p, d.t, d.r);
        dropped.insert(pair.clone());
        ab_dropped.insert(pair);
    }
    for (di, &choice) in found.choices.iter().enumerate() {
        match (p.decisions[di], choice) {
            (Decision::Hard(h), Choice::Violated) => {
                violated.insert(search::pair_names(p, p.hard[h].t, p.hard[h].r));
            }
            (Decision::Default(i), Choice::Drop) => {
                dropped.insert(search::pair_names(p, p.defaults[i].t, p.defaults[i].r));
            }
            _ => {}
        }
    }
    let cost = Cost::new(violated.len(), dropped.len() - ab_dropped.len());
    Solution {
        grid: p.grid,
        assignment: p
            .names
            .iter()
            .cloned()
            .zip(found.placement.objects.iter().cloned())
            .collect(),
        dropped_defaults: dropped,
        ab_dropped,
        violated,
        cost,
    }
}

fn checked_solution(net: &Network, p: &Problem, found: &Found) -> Result<Solution, SolveError> {
    let sol = to_solution(p, found);
    verify_solution(net, &sol)?;
    Ok(sol)
}

/// Consistency check. Defaults may be dropped at a cost; other constraints
/// are hard.
pub fn check(net: &Network, cfg: &SolverConfig) -> Result<Verdict, SolveError> {
    check_with_stats(net, cfg).map(|(v, _)| v)
}

pub fn check_with_stats(net: &Network, cfg: &SolverConfig) -> Result<(Verdict, Stats), SolveError> {
    let run = Run::new(net, cfg, false)?;
    let verdict = match optimize(&run) {
        Optimum::Found(f, _) => Verdict::Consistent(checked_solution(net, &run.problem, &f)?),
        Optimum::None if run.problem.complete => Verdict::Inconsistent,
        Optimum::None => Verdict::NotFound,
        Optimum::Aborted => Verdict::Unknown,
    };
    Ok((verdict, run.stats()))
}

/// Smallest set of non-mandatory constraints whose removal restores
/// consistency, then fewest dropped defaults.
pub fn explain(net: &Network, cfg: &SolverConfig) -> Result<ExplainOutcome, SolveError> {
    explain_with_stats(net, cfg).map(|(o, _)| o)
}

pub fn explain_with_stats(net: &Network, cfg: &SolverConfig) -> Result<(ExplainOutcome, Stats), SolveError> {
    let run = Run::new(net, cfg, true)?;
    let outcome = match optimize(&run) {
        Optimum::Found(f, cost) => {
            let witness = checked_solution(net, &run.problem, &f)?;
            ExplainOutcome::Explained(Explanation {
                violated: witness.violated.clone(),
                cost,
                witness,
            })
        }
        Optimum::None if run.problem.complete => ExplainOutcome::NoExplanation,
        Optimum::None => ExplainOutcome::NotFound,
        Optimum::Aborted => ExplainOutcome::Unknown,
    };
    Ok((outcome, run.stats()))
}

/// Relations for the network's inference requests. With `enumerate`, every
/// relation realizable by some optimal solution is collected; otherwise the
/// one found in a single witness.
pub fn infer(net: &Network, cfg: &SolverConfig, enumerate: bool) -> Result<InferOutcome, SolveError> {
    infer_with_stats(net, cfg, enumerate).map(|(o, _)| o)
}

pub fn infer_with_stats(
    net: &Network,
    cfg: &SolverConfig,
    enumerate: bool,
) -> Result<(InferOutcome, Stats), SolveError> {
    let run = Run::new(net, cfg, false)?;
    let outcome = match optimize(&run) {
        Optimum::Found(f, cost) => {
            let witness = checked_solution(net, &run.problem, &f)?;
            match infer::infer_all(net, &run, &witness, cost, enumerate, cfg.infer_cap) {
                Some(relations) => InferOutcome::Inferred { witness, relations },
                None => InferOutcome::Unknown,
            }
        }
        Optimum::None if run.problem.complete => InferOutcome::Inconsistent,
        Optimum::None => InferOutcome::NotFound,
        Optimum::Aborted => InferOutcome::Unknown,
    };
    Ok((outcome, run.stats()))
}
