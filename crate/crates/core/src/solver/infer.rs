//! Missing-relation inference.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::kernel::allowed_cells;
use super::pa::{Pa, EQ, GT, LT};
use super::search::{local_boxes, scope_points, Abort, Flow, PointSearch};
use super::Run;
use crate::model::{BasicRelation, Cell, Cost, Mbb, Network, Pair, Solution};
use crate::semantics::{components, relation_of, tile_of};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferredRelation {
    /// The pair already carries a constraint or an applied default.
    pub known: bool,
    pub relations: BTreeSet<BasicRelation>,
    /// Enumeration stopped at the cap; `relations` is a subset.
    pub truncated: bool,
}

/// `None` when the budget ran out.
pub(crate) fn infer_all(
    net: &Network,
    run: &Run,
    witness: &Solution,
    cost: Cost,
    enumerate: bool,
    cap: usize,
) -> Option<BTreeMap<Pair, InferredRelation>> {
    let mut out = BTreeMap::new();
    for pair in &net.infer_requests {
        let (t, r) = (&pair.0, &pair.1);
        let known = net.hard_constraint(t, r).is_some()
            || (net.default_constraint(t, r).is_some() && !witness.dropped_defaults.contains(pair));
        let seen = relation_of(&witness.assignment[t], &witness.assignment[r]);
        let entry = if known || !enumerate {
            InferredRelation {
                known,
                relations: BTreeSet::from([seen]),
                truncated: false,
            }
        } else {
            let u = net.index_of(t).expect("validated");
            let v = net.index_of(r).expect("validated");
            let (mut relations, truncated) = enumerate_pair(run, cost, u, v, cap).ok()?;
            relations.insert(seen);
            InferredRelation {
                known,
                relations,
                truncated,
            }
        };
        out.insert(pair.clone(), entry);
    }
    Some(out)
}

fn enumerate_pair(run: &Run, cost: Cost, u: usize, v: usize, cap: usize) -> Result<(BTreeSet<BasicRelation>, bool), Abort> {
    let p = &run.problem;
    let budget = &run.budget;
    let Some(root) = super::search::initial_state(p) else {
        return Ok((BTreeSet::new(), false));
    };
    let mut found = BTreeSet::new();
    let mut truncated = false;
    p.walk_decisions(&root, 0, cost, budget, &mut |leaf| {
        let mut ps = PointSearch::new(p, budget, &leaf.choices);
        let points = scope_points(u, &ps.enforced[u], Some(v));
        let connected = p.connected && p.is_trg[u];
        let mut ctx = Enum {
            ps: &mut ps,
            u,
            v,
            points: &points,
            connected,
            cap,
            found: &mut found,
            truncated: &mut truncated,
        };
        ctx.orders(leaf.pa.clone())?;
        Ok(if truncated { Flow::Stop } else { Flow::Continue })
    })?;
    Ok((found, truncated))
}

struct Enum<'a, 'b> {
    ps: &'a mut PointSearch<'b>,
    u: usize,
    v: usize,
    points: &'a [usize],
    connected: bool,
    cap: usize,
    found: &'a mut BTreeSet<BasicRelation>,
    truncated: &'a mut bool,
}

impl Enum<'_, '_> {
    /// Every weak order of the target, its references and `v`.
    fn orders(&mut self, pa: [Pa; 3]) -> Result<(), Abort> {
        self.ps.budget.tick()?;
        if *self.truncated {
            return Ok(());
        }
        for axis in 0..3 {
            if let Some((i, j)) = pa[axis].first_open(self.points) {
                let label = pa[axis].get(i, j);
                for l in [LT, EQ, GT] {
                    if label & l == 0 {
                        continue;
                    }
                    let mut refined = pa.clone();
                    if refined[axis].add(i, j, l) && self.ps.p.height_ok(&refined) {
                        self.orders(refined)?;
                    }
                }
                return Ok(());
            }
        }
        let boxes = local_boxes(&pa, self.points);
        let refs: Vec<(Mbb, BasicRelation)> = self.ps.enforced[self.u]
            .iter()
            .map(|&(r, rel)| (boxes[&r], rel))
            .collect();
        let (here, cut) = realizable(&boxes[&self.u], &refs, &boxes[&self.v], self.connected, self.cap);
        if here.is_subset(self.found) {
            return Ok(());
        }
        // The target's cells are invisible to everyone else, so one full
        // extension of this order covers every relation realizable here.
        if self.ps.run(pa, 0)?.is_some() {
            self.found.extend(here);
            if cut || self.found.len() >= self.cap {
                *self.truncated = true;
            }
        }
        Ok(())
    }
}

const SUBSET_LIMIT: u64 = 1 << 22;

/// Relations to `v_box` of the cell sets admissible for a target with box
/// `bbox` under `enforced`, and whether the list was cut short.
pub(crate) fn realizable(
    bbox: &Mbb,
    enforced: &[(Mbb, BasicRelation)],
    v_box: &Mbb,
    connected: bool,
    cap: usize,
) -> (BTreeSet<BasicRelation>, bool) {
    let allowed = allowed_cells(bbox, enforced);
    let tv = |c: Cell| 1u32 << tile_of(c, v_box).index();
    let mut present = 0u32;
    // each condition is the set of v-tiles of the cells that satisfy it
    let mut conditions: Vec<u32> = vec![0; 6];
    for (_, rel) in enforced {
        conditions.extend(std::iter::repeat_n(0, rel.len()));
    }
    for &c in &allowed {
        let t = tv(c);
        present |= t;
        for a in 0..3 {
            if c[a] == bbox.inf[a] {
                conditions[2 * a] |= t;
            }
            if c[a] == bbox.sup[a] {
                conditions[2 * a + 1] |= t;
            }
        }
        let mut k = 6;
        for (r, rel) in enforced {
            let tile = tile_of(c, r);
            for (off, rt) in rel.tiles().enumerate() {
                if rt == tile {
                    conditions[k + off] |= t;
                }
            }
            k += rel.len();
        }
    }
    let mut out = BTreeSet::new();
    if conditions.contains(&0) {
        return (out, false);
    }
    let mut sub = present;
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps > SUBSET_LIMIT || out.len() >= cap {
            return (out, true);
        }
        if sub != 0 && conditions.iter().all(|&c| c & sub != 0) {
            let ok = !connected || connected_witness(&allowed, sub, bbox, enforced, v_box);
            if ok {
                out.insert(BasicRelation::from_bits(sub).expect("non-empty"));
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & present;
    }
    (out, false)
}

fn connected_witness(allowed: &BTreeSet<Cell>, sub: u32, bbox: &Mbb, enforced: &[(Mbb, BasicRelation)], v_box: &Mbb) -> bool {
    let cells: BTreeSet<Cell> = allowed
        .iter()
        .copied()
        .filter(|&c| sub & (1 << tile_of(c, v_box).index()) != 0)
        .collect();
    components(&cells).into_iter().any(|comp| {
        let faces = (0..3).all(|a| {
            comp.iter().any(|c| c[a] == bbox.inf[a]) && comp.iter().any(|c| c[a] == bbox.sup[a])
        });
        let tiles_v = comp.iter().fold(0u32, |acc, &c| acc | 1 << tile_of(c, v_box).index());
        let refs_ok = enforced.iter().all(|(r, rel)| {
            comp.iter().fold(0u32, |acc, &c| acc | 1 << tile_of(c, r).index()) == rel.bits()
        });
        faces && tiles_v == sub && refs_ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_single_cell() {
        let u = Mbb::new([1, 1, 1], [1, 1, 1]);
        let v = Mbb::new([2, 2, 2], [2, 2, 2]);
        let (rels, cut) = realizable(&u, &[], &v, false, 100);
        assert!(!cut);
        assert_eq!(rels.into_iter().map(|r| r.to_string()).collect::<Vec<_>>(), vec!["SWB"]);
    }

    #[test]
    fn two_cells_two_tiles() {
        let u = Mbb::new([1, 1, 1], [2, 1, 1]);
        let v = Mbb::new([2, 2, 2], [2, 2, 2]);
        let (rels, _) = realizable(&u, &[], &v, false, 100);
        assert_eq!(rels.len(), 1);
        assert_eq!(rels.iter().next().unwrap().to_string(), "SWB:SB");
    }
}
