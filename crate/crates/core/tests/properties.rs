use std::collections::BTreeSet;

use ncdc3d::semantics::{
    is_connected, mbb_of, relation_of, satisfies_basic, satisfies_disjunctive, tile_of, tile_region,
};
use ncdc3d::{parse_network, serialize_network, BasicRelation, Cell, Constraint, GridSpec, Mbb, Network, SingleTile, SpatialObject};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tiles_partition_small_grids() {
    for m in 1..=6 {
        for n in 1..=6 {
            for p in 1..=6 {
                let grid = GridSpec::new(m, n, p);
                let spans = |d: u32| (1..=d).flat_map(move |lo| (lo..=d).map(move |hi| (lo, hi)));
                for (xl, xh) in spans(m) {
                    for (yl, yh) in spans(n) {
                        for (zl, zh) in spans(p) {
                            let mbb = Mbb::new([xl, yl, zl], [xh, yh, zh]);
                            let regions: Vec<_> = SingleTile::all().map(|t| tile_region(t, &mbb, grid)).collect();
                            let total: u64 = regions.iter().map(|r| r.cell_count()).sum();
                            assert_eq!(total, grid.cell_count());
                            for cell in Mbb::whole(grid).cells() {
                                let hits: Vec<usize> =
                                    (0..27).filter(|&i| regions[i].contains(cell)).collect();
                                assert_eq!(hits, vec![tile_of(cell, &mbb).index()]);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn random_object(rng: &mut ChaCha8Rng, side: u32) -> SpatialObject {
    let k = rng.gen_range(1..=12);
    SpatialObject::new((0..k).map(|_| {
        [
            rng.gen_range(1..=side),
            rng.gen_range(1..=side),
            rng.gen_range(1..=side),
        ]
    }))
    .unwrap()
}

#[test]
fn mbb_is_componentwise_extent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let obj = random_object(&mut rng, 9);
        let mut inf = [u32::MAX; 3];
        let mut sup = [0; 3];
        for c in obj.cells() {
            for a in 0..3 {
                inf[a] = inf[a].min(c[a]);
                sup[a] = sup[a].max(c[a]);
            }
        }
        assert_eq!(mbb_of(&obj), Mbb::new(inf, sup));
    }
}

/// Tiles hit by `a` relative to `b`, from plain coordinate comparisons.
fn tile_histogram(a: &SpatialObject, b: &SpatialObject) -> BasicRelation {
    let lo: Vec<u32> = (0..3).map(|i| b.cells().iter().map(|c| c[i]).min().unwrap()).collect();
    let hi: Vec<u32> = (0..3).map(|i| b.cells().iter().map(|c| c[i]).max().unwrap()).collect();
    let mut count = [0usize; 27];
    for c in a.cells() {
        let class = |i: usize| {
            if c[i] < lo[i] {
                0
            } else if c[i] > hi[i] {
                2
            } else {
                1
            }
        };
        count[SingleTile::from_classes(class(0), class(1), class(2)).index()] += 1;
    }
    BasicRelation::from_tiles((0..27).filter(|&i| count[i] > 0).map(SingleTile::from_index)).unwrap()
}

#[test]
fn satisfaction_is_relation_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let a = random_object(&mut rng, 4);
        let b = random_object(&mut rng, 4);
        let r = relation_of(&a, &b);
        assert_eq!(r, tile_histogram(&a, &b));
        assert!(satisfies_basic(&a, &b, r));
        let flip = SingleTile::from_index(rng.gen_range(0..27));
        if let Some(other) = BasicRelation::from_bits(r.bits() ^ (1 << flip.index())) {
            assert!(!satisfies_basic(&a, &b, other));
        }
        let decoy = BasicRelation::from_bits(rng.gen_range(1..(1u32 << 27))).unwrap();
        assert_eq!(satisfies_basic(&a, &b, decoy), decoy == r);
        let disjuncts = [decoy, r];
        let expect = if decoy == r { Some(0) } else { Some(1) };
        assert_eq!(satisfies_disjunctive(&a, &b, &disjuncts), expect);
        assert_eq!(satisfies_disjunctive(&a, &b, &disjuncts[..1]), (decoy == r).then_some(0));
    }
}

fn cells_in(side: u32) -> impl Strategy<Value = BTreeSet<Cell>> {
    prop::collection::btree_set([1..=side, 1..=side, 1..=side], 1..10)
}

proptest! {
    #[test]
    fn connectivity_ignores_translation(cells in cells_in(4), dx in 0u32..3, dy in 0u32..3, dz in 0u32..3) {
        let a = SpatialObject::new(cells.iter().copied()).unwrap();
        let b = SpatialObject::new(cells.iter().map(|c| [c[0] + dx, c[1] + dy, c[2] + dz])).unwrap();
        prop_assert_eq!(is_connected(&a), is_connected(&b));
    }

    #[test]
    fn serialization_is_a_fixed_point(net in network()) {
        let text = serialize_network(&net);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(serialize_network(&back), text);
    }
}

fn relation() -> impl Strategy<Value = BasicRelation> {
    (1u32..(1 << 27)).prop_map(|b| BasicRelation::from_bits(b).unwrap())
}

const POOL: [&str; 5] = ["Alpha", "b", "c_2", "D", "_e"];

fn network() -> impl Strategy<Value = Network> {
    let entry = (0usize..5, 0usize..5, 0u8..3, prop::collection::vec(relation(), 2..4), any::<bool>());
    (
        2usize..=5,
        prop::collection::vec(entry, 0..12),
        prop::collection::btree_set(0usize..5, 0..2),
        prop::collection::vec((0usize..5, 0usize..5), 0..3),
        any::<bool>(),
        prop::option::of((1u32..20, 1u32..20, 1u32..20)),
    )
        .prop_map(|(n, entries, ab, infer, connected, grid)| {
            let mut net = Network::new(&POOL[..n]);
            for (t, r, kind, rels, mandatory) in entries {
                let (t, r) = (POOL[t % n], POOL[r % n]);
                if t == r {
                    continue;
                }
                let c = match kind {
                    0 => Constraint { mandatory, ..Constraint::basic(t, r, rels[0]) },
                    1 => {
                        let distinct: BTreeSet<BasicRelation> = rels.into_iter().collect();
                        if distinct.len() < 2 {
                            continue;
                        }
                        Constraint { mandatory, ..Constraint::disjunctive(t, r, distinct.into_iter().collect()) }
                    }
                    _ => Constraint::default_rel(t, r, rels[0]),
                };
                let taken = if c.relation.is_default() {
                    net.default_constraint(t, r).is_some()
                } else {
                    net.hard_constraint(t, r).is_some()
                };
                if !taken {
                    net.constraints.push(c);
                }
            }
            net.ab_marks = ab.into_iter().map(|i| POOL[i % n].to_string()).collect();
            for (t, r) in infer {
                let pair = (POOL[t % n].to_string(), POOL[r % n].to_string());
                if pair.0 != pair.1 && !net.infer_requests.contains(&pair) {
                    net.infer_requests.push(pair);
                }
            }
            net.connected = connected;
            net.grid = grid.map(|(m, n, p)| GridSpec::new(m, n, p));
            net
        })
}
