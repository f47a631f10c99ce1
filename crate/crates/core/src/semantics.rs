//! Discretized tile semantics over an `m × n × p` grid.
//!
//! A cell's tile relative to a reference box is decided per axis: strictly
//! below the box, inside the closed interval, or strictly above it.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{BasicRelation, Cell, GridSpec, Mbb, Network, Relation, SingleTile, Solution, SpatialObject};

/// Per-axis class of coordinate `c` against the closed interval `[lo, hi]`.
#[inline]
pub fn axis_class(c: u32, lo: u32, hi: u32) -> u8 {
    if c < lo {
        0
    } else if c <= hi {
        1
    } else {
        2
    }
}

pub fn mbb_of(obj: &SpatialObject) -> Mbb {
    mbb_of_cells(obj.cells().iter().copied()).expect("spatial objects are non-empty")
}

pub(crate) fn mbb_of_cells<I: IntoIterator<Item = Cell>>(cells: I) -> Option<Mbb> {
    let mut it = cells.into_iter();
    let first = it.next()?;
    let (mut inf, mut sup) = (first, first);
    for c in it {
        for a in 0..3 {
            inf[a] = inf[a].min(c[a]);
            sup[a] = sup[a].max(c[a]);
        }
    }
    Some(Mbb::new(inf, sup))
}

pub fn tile_of(cell: Cell, reference: &Mbb) -> SingleTile {
    SingleTile::from_classes(
        axis_class(cell[0], reference.inf[0], reference.sup[0]),
        axis_class(cell[1], reference.inf[1], reference.sup[1]),
        axis_class(cell[2], reference.inf[2], reference.sup[2]),
    )
}

/// The cells of one tile of a reference box, as per-axis closed ranges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileRegion {
    pub ranges: [(u32, u32); 3],
}

impl TileRegion {
    pub fn is_empty(&self) -> bool {
        self.ranges.iter().any(|&(lo, hi)| lo > hi)
    }

    pub fn cell_count(&self) -> u64 {
        if self.is_empty() {
            return 0;
        }
        self.ranges.iter().map(|&(lo, hi)| (hi - lo + 1) as u64).product()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (0..3).all(|a| self.ranges[a].0 <= cell[a] && cell[a] <= self.ranges[a].1)
    }
}

pub fn tile_region(tile: SingleTile, reference: &Mbb, grid: GridSpec) -> TileRegion {
    let dims = grid.dims();
    let classes = tile.classes();
    let mut ranges = [(1, 0); 3];
    for a in 0..3 {
        let (lo, hi) = (reference.inf[a], reference.sup[a]);
        ranges[a] = match classes[a] {
            0 => (1, lo.saturating_sub(1)),
            1 => (lo, hi),
            _ => (hi + 1, dims[a]),
        };
    }
    TileRegion { ranges }
}

pub fn relation_of(a: &SpatialObject, b: &SpatialObject) -> BasicRelation {
    let reference = mbb_of(b);
    relation_of_cells(a.cells().iter().copied(), &reference)
}

pub(crate) fn relation_of_cells<I: IntoIterator<Item = Cell>>(cells: I, reference: &Mbb) -> BasicRelation {
    let bits = cells
        .into_iter()
        .fold(0u32, |acc, c| acc | 1 << tile_of(c, reference).index());
    BasicRelation::from_bits(bits).expect("non-empty cell set")
}

/// (C1) and (C2) together: the tiles `a` meets are exactly `delta`.
pub fn satisfies_basic(a: &SpatialObject, b: &SpatialObject, delta: BasicRelation) -> bool {
    relation_of(a, b) == delta
}

/// Index of the disjunct that holds, if any.
pub fn satisfies_disjunctive(a: &SpatialObject, b: &SpatialObject, disjuncts: &[BasicRelation]) -> Option<usize> {
    let actual = relation_of(a, b);
    disjuncts.iter().position(|&d| d == actual)
}

pub fn satisfies(a: &SpatialObject, b: &SpatialObject, relation: &Relation) -> bool {
    satisfies_disjunctive(a, b, relation.disjuncts()).is_some()
}

const NEIGHBOURS: [[i64; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

fn neighbours(c: Cell) -> impl Iterator<Item = Cell> {
    NEIGHBOURS.iter().filter_map(move |d| {
        let x = c[0] as i64 + d[0];
        let y = c[1] as i64 + d[1];
        let z = c[2] as i64 + d[2];
        (x >= 0 && y >= 0 && z >= 0).then_some([x as u32, y as u32, z as u32])
    })
}

/// Face-adjacent components, each sorted, listed by their smallest cell.
pub fn components(cells: &BTreeSet<Cell>) -> Vec<BTreeSet<Cell>> {
    let mut seen: BTreeSet<Cell> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in cells {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(c) = queue.pop_front() {
            comp.insert(c);
            for nb in neighbours(c) {
                if cells.contains(&nb) && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        out.push(comp);
    }
    out
}

pub fn is_connected(obj: &SpatialObject) -> bool {
    components(obj.cells()).len() == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("object `{0}` has no assignment")]
    Missing(String),
    #[error("object `{0}` leaves the grid")]
    OutOfGrid(String),
    #[error("constraint ({0}, {1}) does not hold")]
    Unsatisfied(String, String),
    #[error("default ({0}, {1}) is applied but does not hold")]
    DefaultUnsatisfied(String, String),
    #[error("mandatory constraint ({0}, {1}) reported as violated")]
    MandatoryViolated(String, String),
    #[error("object `{0}` is not connected")]
    Disconnected(String),
    #[error("reported cost does not match the dropped and violated sets")]
    CostMismatch,
}

/// Independent re-check of a solution against a network: every constraint not
/// reported violated holds, and every default not reported dropped holds.
pub fn verify_solution(net: &Network, sol: &Solution) -> Result<(), VerifyError> {
    for name in &net.objects {
        let obj = sol.assignment.get(name).ok_or_else(|| VerifyError::Missing(name.clone()))?;
        if !obj.within(sol.grid) {
            return Err(VerifyError::OutOfGrid(name.clone()));
        }
    }
    let get = |n: &str| &sol.assignment[n];
    let mut targets = BTreeSet::new();
    for c in &net.constraints {
        targets.insert(c.target.as_str());
        let pair = c.pair();
        let holds = satisfies(get(&c.target), get(&c.reference), &c.relation);
        if c.relation.is_default() {
            if !sol.dropped_defaults.contains(&pair) && !holds {
                return Err(VerifyError::DefaultUnsatisfied(pair.0, pair.1));
            }
        } else if sol.violated.contains(&pair) {
            if c.mandatory {
                return Err(VerifyError::MandatoryViolated(pair.0, pair.1));
            }
        } else if !holds {
            return Err(VerifyError::Unsatisfied(pair.0, pair.1));
        }
    }
    if net.connected {
        for t in targets {
            if !is_connected(get(t)) {
                return Err(VerifyError::Disconnected(t.to_string()));
            }
        }
    }
    let drops = sol.dropped_defaults.len() - sol.ab_dropped.len();
    if sol.cost.violations != sol.violated.len() || sol.cost.drops != drops {
        return Err(VerifyError::CostMismatch);
    }
    Ok(())
}
