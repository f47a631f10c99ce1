//! Cell-level feasibility of one object once every box is fixed.
//!
//! Other objects only see a target through its bounding box, so each target
//! can be built on its own: the largest admissible cell set (or, when
//! connectedness is required, one of its components) is a canonical witness.

use std::collections::BTreeSet;

use crate::model::{BasicRelation, Cell, Mbb, SpatialObject};
use crate::semantics::{components, tile_of};

/// Cells of `bbox` whose tile against every enforced reference box is listed
/// in that constraint's relation.
pub fn allowed_cells(bbox: &Mbb, enforced: &[(Mbb, BasicRelation)]) -> BTreeSet<Cell> {
    bbox.cells()
        .filter(|&c| enforced.iter().all(|(r, rel)| rel.contains(tile_of(c, r))))
        .collect()
}

fn touches_faces(cells: &BTreeSet<Cell>, bbox: &Mbb) -> bool {
    let mut seen = [[false; 2]; 3];
    for c in cells {
        for a in 0..3 {
            seen[a][0] |= c[a] == bbox.inf[a];
            seen[a][1] |= c[a] == bbox.sup[a];
        }
    }
    seen.iter().all(|s| s[0] && s[1])
}

fn meets_all_tiles(cells: &BTreeSet<Cell>, enforced: &[(Mbb, BasicRelation)]) -> bool {
    enforced.iter().all(|(r, rel)| {
        let hit = cells.iter().fold(0u32, |acc, &c| acc | 1 << tile_of(c, r).index());
        hit == rel.bits()
    })
}

/// A witness for one object inside `bbox`, or `None` when no cell set with
/// exactly this bounding box satisfies the enforced constraints.
pub fn feasible_object(
    bbox: &Mbb,
    enforced: &[(Mbb, BasicRelation)],
    connected_mode: bool,
    is_target: bool,
) -> Option<SpatialObject> {
    if !is_target || enforced.is_empty() {
        return SpatialObject::new(bbox.cells());
    }
    let allowed = allowed_cells(bbox, enforced);
    let ok = |s: &BTreeSet<Cell>| touches_faces(s, bbox) && meets_all_tiles(s, enforced);
    if !connected_mode {
        return if ok(&allowed) { SpatialObject::new(allowed) } else { None };
    }
    if !ok(&allowed) {
        return None;
    }
    components(&allowed)
        .into_iter()
        .find(|comp| ok(comp))
        .and_then(SpatialObject::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::is_connected;

    fn rel(s: &str) -> BasicRelation {
        s.parse().unwrap()
    }

    #[test]
    fn unconstrained_gets_full_box() {
        let b = Mbb::new([1, 2, 1], [2, 3, 3]);
        let obj = feasible_object(&b, &[], true, true).unwrap();
        assert_eq!(obj.len(), 12);
        assert_eq!(allowed_cells(&b, &[]).len(), 12);
    }

    #[test]
    fn om_against_whole_grid() {
        let whole = Mbb::new([1, 1, 1], [3, 3, 3]);
        assert_eq!(allowed_cells(&whole, &[(whole, rel("OM"))]).len(), 27);
    }

    #[test]
    fn north_half() {
        let v = Mbb::new([1, 1, 1], [3, 1, 3]);
        let u = Mbb::new([1, 2, 1], [3, 3, 3]);
        let cells = allowed_cells(&u, &[(v, rel("NM"))]);
        assert_eq!(cells.len(), 18);
        assert!(cells.iter().all(|c| c[1] >= 2));
    }

    #[test]
    fn missing_witness_tile() {
        let v = Mbb::new([2, 2, 2], [2, 2, 2]);
        let u = Mbb::new([2, 2, 1], [2, 3, 3]);
        // u never reaches the NE column of v, so NEA has no cell
        assert!(feasible_object(&u, &[(v, rel("NEA:SWB"))], false, true).is_none());
    }

    #[test]
    fn split_allowed_set() {
        // 5x5x3 grid: u spans x 1..5; v is the middle column x=3.
        // u W:E of v leaves two slabs, each touching only one x face.
        let v = Mbb::new([3, 1, 1], [3, 5, 3]);
        let u = Mbb::new([1, 1, 1], [5, 5, 3]);
        let enforced = [(v, rel("WM:EM"))];
        let loose = feasible_object(&u, &enforced, false, true).unwrap();
        assert_eq!(loose.len(), 60);
        assert!(!is_connected(&loose));
        assert!(feasible_object(&u, &enforced, true, true).is_none());
    }
}
