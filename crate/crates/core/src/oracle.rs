//! Exhaustive reference answers on tiny grids.
//!
//! Every object ranges over all non-empty subsets of the grid's cells, in
//! increasing bitmask order. Caps keep this below about 10^8 checks.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{BasicRelation, Cell, Cost, GridSpec, Mbb, Network, Pair, Relation, Solution, SpatialObject, ValidationReport};
use crate::semantics::{is_connected, mbb_of_cells, relation_of_cells};
use crate::solver::Verdict;

pub const MAX_OBJECTS: usize = 3;
pub const MAX_CELLS: u64 = 8;
pub const MAX_SOFT_CONSTRAINTS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive enumeration ({objects} objects, {cells} cells)")]
    CapExceeded { objects: usize, cells: u64 },
    #[error("no solution even with every non-mandatory constraint removed")]
    NoExplanation,
    #[error(transparent)]
    Invalid(#[from] ValidationReport),
}

struct Hard {
    t: usize,
    r: usize,
    allowed: Vec<u32>,
    mandatory: bool,
}

struct Soft {
    t: usize,
    r: usize,
    rel: u32,
    ab: bool,
}

struct Tables {
    grid: GridSpec,
    cells: Vec<Cell>,
    /// relation bits of mask `a` against mask `b`, indexed `a * size + b`
    rel: Vec<u32>,
    connected: Vec<bool>,
    size: usize,
    hard: Vec<Hard>,
    soft: Vec<Soft>,
    is_trg: Vec<bool>,
    connected_mode: bool,
    names: Vec<String>,
}

impl Tables {
    fn new(net: &Network, grid: GridSpec) -> Result<Self, OracleError> {
        net.validate()?;
        let cell_count = grid.cell_count();
        if net.objects.len() > MAX_OBJECTS || cell_count > MAX_CELLS {
            return Err(OracleError::CapExceeded {
                objects: net.objects.len(),
                cells: cell_count,
            });
        }
        let cells: Vec<Cell> = Mbb::whole(grid).cells().collect();
        let size = 1usize << cells.len();
        let cells_of = |mask: usize| (0..cells.len()).filter(move |i| mask & (1 << i) != 0).map(|i| cells[i]);
        let mbbs: Vec<Option<Mbb>> = (0..size).map(|m| mbb_of_cells(cells_of(m))).collect();
        let mut rel = vec![0u32; size * size];
        for a in 1..size {
            for b in 1..size {
                rel[a * size + b] = relation_of_cells(cells_of(a), mbbs[b].as_ref().expect("non-empty")).bits();
            }
        }
        let connected = (0..size)
            .map(|m| m != 0 && is_connected(&SpatialObject::new(cells_of(m)).expect("non-empty")))
            .collect();
        let idx = |s: &str| net.index_of(s).expect("validated");
        let mut hard = Vec::new();
        let mut soft = Vec::new();
        let mut is_trg = vec![false; net.objects.len()];
        for c in &net.constraints {
            let (t, r) = (idx(&c.target), idx(&c.reference));
            is_trg[t] = true;
            match &c.relation {
                Relation::Default(d) => soft.push(Soft {
                    t,
                    r,
                    rel: d.bits(),
                    ab: net.ab_marks.contains(&c.target) || net.ab_marks.contains(&c.reference),
                }),
                other => hard.push(Hard {
                    t,
                    r,
                    allowed: other.disjuncts().iter().map(|d| d.bits()).collect(),
                    mandatory: c.mandatory,
                }),
            }
        }
        Ok(Tables {
            grid,
            cells,
            rel,
            connected,
            size,
            hard,
            soft,
            is_trg,
            connected_mode: net.connected,
            names: net.objects.clone(),
        })
    }

    fn rel(&self, a: usize, b: usize) -> u32 {
        self.rel[a * self.size + b]
    }

    fn object(&self, mask: usize) -> SpatialObject {
        SpatialObject::new((0..self.cells.len()).filter(|i| mask & (1 << i) != 0).map(|i| self.cells[i]))
            .expect("non-empty")
    }

    /// Calls `visit` on every assignment in lexicographic mask order. With
    /// `prune`, hard constraints are checked as soon as both ends are set.
    fn each(&self, prune: bool, visit: &mut dyn FnMut(&[usize])) {
        let n = self.names.len();
        let mut masks = vec![0usize; n];
        self.assign(0, &mut masks, prune, visit);
    }

    fn assign(&self, i: usize, masks: &mut Vec<usize>, prune: bool, visit: &mut dyn FnMut(&[usize])) {
        if i == masks.len() {
            visit(masks);
            return;
        }
        for m in 1..self.size {
            if self.connected_mode && self.is_trg[i] && !self.connected[m] {
                continue;
            }
            masks[i] = m;
            if prune {
                let bad = self.hard.iter().any(|h| {
                    h.t.max(h.r) == i && !h.allowed.contains(&self.rel(masks[h.t], masks[h.r]))
                });
                if bad {
                    continue;
                }
            }
            self.assign(i + 1, masks, prune, visit);
        }
    }

    fn violated(&self, masks: &[usize]) -> Vec<usize> {
        (0..self.hard.len())
            .filter(|&k| {
                let h = &self.hard[k];
                !h.allowed.contains(&self.rel(masks[h.t], masks[h.r]))
            })
            .collect()
    }

    fn dropped(&self, masks: &[usize]) -> (BTreeSet<Pair>, BTreeSet<Pair>) {
        let mut dropped = BTreeSet::new();
        let mut ab = BTreeSet::new();
        for s in &self.soft {
            let pair = (self.names[s.t].clone(), self.names[s.r].clone());
            if s.ab {
                ab.insert(pair.clone());
                dropped.insert(pair);
            } else if self.rel(masks[s.t], masks[s.r]) != s.rel {
                dropped.insert(pair);
            }
        }
        (dropped, ab)
    }

    fn solution(&self, masks: &[usize], violated: &[usize]) -> Solution {
        let (dropped_defaults, ab_dropped) = self.dropped(masks);
        let violated: BTreeSet<Pair> = violated
            .iter()
            .map(|&k| (self.names[self.hard[k].t].clone(), self.names[self.hard[k].r].clone()))
            .collect();
        Solution {
            grid: self.grid,
            assignment: self.names.iter().cloned().zip(masks.iter().map(|&m| self.object(m))).collect(),
            cost: Cost::new(violated.len(), dropped_defaults.len() - ab_dropped.len()),
            dropped_defaults,
            ab_dropped,
            violated,
        }
    }

    fn drops(&self, masks: &[usize]) -> usize {
        self.soft
            .iter()
            .filter(|s| !s.ab && self.rel(masks[s.t], masks[s.r]) != s.rel)
            .count()
    }
}

/// Exhaustive consistency check on exactly this grid. The witness is the
/// first assignment with the fewest dropped defaults.
pub fn oracle_check(net: &Network, grid: GridSpec) -> Result<Verdict, OracleError> {
    let t = Tables::new(net, grid)?;
    let mut best: Option<(usize, Vec<usize>)> = None;
    t.each(true, &mut |masks| {
        let d = t.drops(masks);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, masks.to_vec()));
        }
    });
    Ok(match best {
        Some((_, masks)) => Verdict::Consistent(t.solution(&masks, &[])),
        None => Verdict::Inconsistent,
    })
}

/// Minimum number of non-mandatory constraints to give up, and every set of
/// that size some assignment leaves violated.
pub fn oracle_optimal_explanation(net: &Network, grid: GridSpec) -> Result<(usize, BTreeSet<BTreeSet<Pair>>), OracleError> {
    let t = Tables::new(net, grid)?;
    let soft_count = t.hard.iter().filter(|h| !h.mandatory).count();
    if soft_count > MAX_SOFT_CONSTRAINTS {
        return Err(OracleError::CapExceeded {
            objects: net.objects.len(),
            cells: grid.cell_count(),
        });
    }
    let mut best = usize::MAX;
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    t.each(false, &mut |masks| {
        let v = t.violated(masks);
        if v.iter().any(|&k| t.hard[k].mandatory) || v.len() > best {
            return;
        }
        if v.len() < best {
            best = v.len();
            sets.clear();
        }
        sets.insert(v);
    });
    if best == usize::MAX {
        return Err(OracleError::NoExplanation);
    }
    let named = sets
        .into_iter()
        .map(|v| {
            v.into_iter()
                .map(|k| (t.names[t.hard[k].t].clone(), t.names[t.hard[k].r].clone()))
                .collect()
        })
        .collect();
    Ok((best, named))
}

/// Lowest cost `(violations, drops)` over all assignments when every
/// non-mandatory constraint may be violated.
pub fn oracle_optimal_cost(net: &Network, grid: GridSpec) -> Result<Option<Cost>, OracleError> {
    let t = Tables::new(net, grid)?;
    let mut best: Option<Cost> = None;
    t.each(false, &mut |masks| {
        let v = t.violated(masks);
        if v.iter().any(|&k| t.hard[k].mandatory) {
            return;
        }
        let c = Cost::new(v.len(), t.drops(masks));
        if best.is_none_or(|b| c < b) {
            best = Some(c);
        }
    });
    Ok(best)
}

/// Every relation between `pair` realized by some solution with the fewest
/// dropped defaults. Empty when the network has no solution on this grid.
pub fn oracle_infer_all(net: &Network, grid: GridSpec, pair: &Pair) -> Result<BTreeSet<BasicRelation>, OracleError> {
    let t = Tables::new(net, grid)?;
    let u = net.index_of(&pair.0).ok_or_else(|| report(&pair.0))?;
    let v = net.index_of(&pair.1).ok_or_else(|| report(&pair.1))?;
    let mut by_cost: BTreeMap<usize, BTreeSet<u32>> = BTreeMap::new();
    t.each(true, &mut |masks| {
        let d = t.drops(masks);
        if by_cost.keys().next().is_some_and(|&best| d > best) {
            return;
        }
        by_cost.retain(|&k, _| k <= d);
        by_cost.entry(d).or_default().insert(t.rel(masks[u], masks[v]));
    });
    Ok(by_cost
        .into_iter()
        .next()
        .map(|(_, rels)| rels.into_iter().filter_map(BasicRelation::from_bits).collect())
        .unwrap_or_default())
}

fn report(name: &str) -> OracleError {
    OracleError::Invalid(ValidationReport {
        errors: vec![crate::model::ValidationError::UnknownName(name.to_string())],
    })
}
