//! Scaling runs over replicated copies of the bundled scenarios.

use std::fmt::Write as _;

use ncdc3d::fixtures;
use ncdc3d::solver::{check_with_stats, explain_with_stats, grid_for, ExplainOutcome, SolveError, SolverConfig};
use ncdc3d::Network;
use serde_json::{json, Value};

pub struct Row {
    pub name: String,
    pub objects: usize,
    pub constraints: usize,
    pub grid: String,
    pub verdict: &'static str,
    /// Nodes to decide consistency alone.
    pub check_nodes: u64,
    /// Nodes to find an optimal solution and prove it optimal. The encoded
    /// program always minimizes, so this is the figure comparable to an
    /// answer-set solver's run.
    pub nodes: u64,
    pub violations: Option<usize>,
    pub millis: f64,
}

/// The instance list: marine with 1..=`copies` copies, the building pair
/// with one and two copies, and both forensics statements.
pub fn instances(copies: usize) -> Vec<(String, Network)> {
    let marine = fixtures::load(fixtures::MARINE);
    let b1 = fixtures::load(fixtures::BUILDING_B1);
    let b1p = fixtures::load(fixtures::BUILDING_B1P);
    let mut out: Vec<(String, Network)> = (1..=copies).map(|k| (format!("M{k}"), marine.replicate(k))).collect();
    for k in 1..=2 {
        out.push((format!("B{k}"), b1.replicate(k)));
        out.push((format!("B{k}'"), b1p.replicate(k)));
    }
    out.push(("D1".into(), fixtures::load(fixtures::FORENSICS_D1)));
    out.push(("D2".into(), fixtures::load(fixtures::FORENSICS_D2)));
    out
}

pub fn run(instances: &[(String, Network)], cfg: &SolverConfig) -> Result<Vec<Row>, SolveError> {
    instances
        .iter()
        .map(|(name, net)| {
            let (verdict, checked) = check_with_stats(net, cfg)?;
            let (outcome, stats) = explain_with_stats(net, cfg)?;
            let violations = match outcome {
                ExplainOutcome::Explained(e) => Some(e.cost.violations),
                _ => None,
            };
            Ok(Row {
                name: name.clone(),
                objects: net.objects.len(),
                constraints: net.constraints.len() + net.infer_requests.len(),
                grid: cfg.grid.unwrap_or_else(|| grid_for(net)).to_string(),
                verdict: verdict.label(),
                check_nodes: checked.nodes,
                nodes: stats.nodes,
                violations,
                millis: (checked.elapsed + stats.elapsed).as_secs_f64() * 1e3,
            })
        })
        .collect()
}

pub fn table(rows: &[Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9} {:>4} {:>4} {:>10} {:<13} {:>5} {:>11} {:>10} {:>10}",
        "instance", "|V|", "|C|", "grid", "verdict", "viol", "check nodes", "nodes", "ms"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<9} {:>4} {:>4} {:>10} {:<13} {:>5} {:>11} {:>10} {:>10.2}",
            r.name,
            r.objects,
            r.constraints,
            r.grid,
            r.verdict,
            r.violations.map_or("-".to_string(), |v| v.to_string()),
            r.check_nodes,
            r.nodes,
            r.millis
        );
    }
    out
}

pub fn structured(rows: &[Row]) -> Value {
    let list: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "instance": r.name,
                "objects": r.objects,
                "constraints": r.constraints,
                "grid": r.grid,
                "verdict": r.verdict,
                "check_nodes": r.check_nodes,
                "nodes": r.nodes,
                "violations": r.violations,
                "millis": r.millis,
            })
        })
        .collect();
    json!({ "instances": list })
}
