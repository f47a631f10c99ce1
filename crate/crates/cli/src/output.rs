use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use ncdc3d::semantics::mbb_of;
use ncdc3d::solver::InferredRelation;
use ncdc3d::{Cost, GridSpec, Pair, Solution};
use serde_json::{json, Value};

/// Everything a subcommand reports, in either rendering.
#[derive(Debug)]
pub struct Report {
    pub verdict: &'static str,
    pub grid: GridSpec,
    pub witness: Option<Solution>,
    pub violated: BTreeSet<Pair>,
    pub inferred: BTreeMap<Pair, InferredRelation>,
    pub cost: Option<Cost>,
    pub budget_exhausted: bool,
    /// Extra line for the human rendering.
    pub note: Option<String>,
}

impl Report {
    pub fn new(verdict: &'static str, grid: GridSpec) -> Self {
        Report {
            verdict,
            grid,
            witness: None,
            violated: BTreeSet::new(),
            inferred: BTreeMap::new(),
            cost: None,
            budget_exhausted: false,
            note: None,
        }
    }

    pub fn with_witness(mut self, sol: Solution) -> Self {
        self.cost = Some(sol.cost);
        self.violated = sol.violated.clone();
        self.witness = Some(sol);
        self
    }

    fn dropped(&self) -> BTreeSet<Pair> {
        self.witness.as_ref().map(|w| w.dropped_defaults.clone()).unwrap_or_default()
    }

    pub fn structured(&self) -> Value {
        let pairs = |set: &BTreeSet<Pair>| -> Value { set.iter().map(|(a, b)| json!([a, b])).collect() };
        let objects = self.witness.as_ref().map(|w| {
            w.assignment
                .iter()
                .map(|(name, obj)| {
                    let cells: Vec<Value> = obj.cells().iter().map(|c| json!(c)).collect();
                    (name.clone(), Value::Array(cells))
                })
                .collect::<serde_json::Map<_, _>>()
        });
        let inferred: Vec<Value> = self
            .inferred
            .iter()
            .map(|((t, r), inf)| {
                json!({
                    "target": t,
                    "reference": r,
                    "known": inf.known,
                    "relations": inf.relations.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "truncated": inf.truncated,
                })
            })
            .collect();
        json!({
            "verdict": self.verdict,
            "grid": self.grid.dims(),
            "objects": objects,
            "dropped_defaults": pairs(&self.dropped()),
            "violated": pairs(&self.violated),
            "inferred": inferred,
            "cost": self.cost.map(|c| json!([c.violations, c.drops])),
            "budget_exhausted": self.budget_exhausted,
        })
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} on {}", self.verdict, self.grid);
        if let Some(note) = &self.note {
            let _ = writeln!(out, "{note}");
        }
        if let Some(c) = self.cost {
            let _ = writeln!(out, "cost: {} violated, {} defaults dropped", c.violations, c.drops);
        }
        for (t, r) in &self.violated {
            let _ = writeln!(out, "violated: {t} {r}");
        }
        let ab = self.witness.as_ref().map(|w| w.ab_dropped.clone()).unwrap_or_default();
        for pair in self.dropped() {
            let why = if ab.contains(&pair) { " (exception)" } else { "" };
            let _ = writeln!(out, "dropped default: {} {}{why}", pair.0, pair.1);
        }
        for ((t, r), inf) in &self.inferred {
            let rels: Vec<String> = inf.relations.iter().map(|x| x.to_string()).collect();
            let mut line = format!("{t} {r}: {}", rels.join(" | "));
            if inf.known {
                line.push_str(" (known)");
            }
            if inf.truncated {
                line.push_str(" (truncated)");
            }
            let _ = writeln!(out, "{line}");
        }
        if let Some(w) = &self.witness {
            let width = w.assignment.keys().map(String::len).max().unwrap_or(0);
            for (name, obj) in &w.assignment {
                let b = mbb_of(obj);
                let _ = writeln!(
                    out,
                    "  {name:width$}  x {}..{}  y {}..{}  z {}..{}  {} cells",
                    b.inf[0],
                    b.sup[0],
                    b.inf[1],
                    b.sup[1],
                    b.inf[2],
                    b.sup[2],
                    obj.len()
                );
            }
        }
        out
    }
}
