//! The native solver against exhaustive enumeration on tiny grids. The
//! oracle answers relative to its grid, so the solver's not-found on an
//! undersized grid counts as inconsistent here.

use std::collections::BTreeSet;

use ncdc3d::oracle::{oracle_check, oracle_infer_all, oracle_optimal_cost, oracle_optimal_explanation};
use ncdc3d::solver::{check, explain, infer, ExplainOutcome, InferOutcome, SolverConfig, Verdict};
use ncdc3d::{BasicRelation, Constraint, Cost, GridSpec, Network, Relation, SingleTile};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn on(grid: GridSpec) -> SolverConfig {
    SolverConfig {
        grid: Some(grid),
        ..SolverConfig::default()
    }
}

fn found(v: &Verdict) -> bool {
    assert_ne!(*v, Verdict::Unknown);
    v.is_consistent()
}

fn rel(s: &str) -> BasicRelation {
    s.parse().unwrap()
}

#[test]
fn single_constraint_family() {
    // 200 distinct relations: all 27 single tiles, then random multi-tile sets
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rels: Vec<BasicRelation> = SingleTile::all().map(BasicRelation::single).collect();
    let mut seen: BTreeSet<u32> = rels.iter().map(|r| r.bits()).collect();
    while rels.len() < 200 {
        let k = rng.gen_range(2..=8);
        let mut tiles: Vec<SingleTile> = SingleTile::all().collect();
        tiles.shuffle(&mut rng);
        let r = BasicRelation::from_tiles(tiles.into_iter().take(k)).unwrap();
        if seen.insert(r.bits()) {
            rels.push(r);
        }
    }
    let grid = GridSpec::cube(2);
    let mut consistent = 0;
    for r in rels {
        let net = Network::new(&["a", "b"]).with(Constraint::basic("a", "b", r));
        let ours = found(&check(&net, &on(grid)).unwrap());
        let truth = oracle_check(&net, grid).unwrap().is_consistent();
        assert_eq!(ours, truth, "{r}");
        consistent += usize::from(truth);
    }
    // the family is not degenerate
    assert!(consistent > 20 && consistent < 200);
}

#[test]
fn forced_chain_inference() {
    let mut net = Network::new(&["a", "b", "c"])
        .with(Constraint::basic("a", "b", rel("NM")))
        .with(Constraint::basic("b", "c", rel("NM")));
    net.infer_requests = vec![("a".into(), "c".into())];
    let pair = ("a".to_string(), "c".to_string());
    let truth = oracle_infer_all(&net, GridSpec::new(2, 3, 1), &pair).unwrap();
    assert_eq!(truth, BTreeSet::from([rel("NM")]));
    let InferOutcome::Inferred { relations, .. } = infer(&net, &on(GridSpec::cube(5)), true).unwrap() else {
        panic!("consistent");
    };
    assert_eq!(relations[&pair].relations, truth);
}

fn tile() -> impl Strategy<Value = SingleTile> {
    (0usize..27).prop_map(SingleTile::from_index)
}

fn relation() -> impl Strategy<Value = BasicRelation> {
    prop::collection::btree_set(tile(), 1..4).prop_map(|t| BasicRelation::from_tiles(t).unwrap())
}

#[derive(Clone, Debug)]
enum Kind {
    None,
    Basic(BasicRelation),
    Disj(BasicRelation, BasicRelation),
    Default(BasicRelation),
    BasicAndDefault(BasicRelation, BasicRelation),
}

fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![
        3 => Just(Kind::None),
        3 => relation().prop_map(Kind::Basic),
        1 => (relation(), relation()).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Kind::Disj(a, b)),
        2 => relation().prop_map(Kind::Default),
        1 => (relation(), relation()).prop_map(|(a, b)| Kind::BasicAndDefault(a, b)),
    ]
}

const NAMES: [&str; 3] = ["a", "b", "c"];

fn build(n: usize, kinds: &[Kind], mandatory: &[bool], ab: Option<usize>, connected: bool) -> Network {
    let mut net = Network::new(&NAMES[..n]);
    let mut k = 0;
    for t in 0..n {
        for r in 0..n {
            if t == r {
                continue;
            }
            let (tn, rn) = (NAMES[t], NAMES[r]);
            let m = mandatory[k];
            match &kinds[k] {
                Kind::None => {}
                Kind::Basic(d) => net.constraints.push(Constraint { mandatory: m, ..Constraint::basic(tn, rn, *d) }),
                Kind::Disj(a, b) => net
                    .constraints
                    .push(Constraint { mandatory: m, ..Constraint::disjunctive(tn, rn, vec![*a, *b]) }),
                Kind::Default(d) => net.constraints.push(Constraint::default_rel(tn, rn, *d)),
                Kind::BasicAndDefault(a, d) => {
                    net.constraints.push(Constraint { mandatory: m, ..Constraint::basic(tn, rn, *a) });
                    net.constraints.push(Constraint::default_rel(tn, rn, *d));
                }
            }
            k += 1;
        }
    }
    if let Some(i) = ab {
        net.ab_marks.insert(NAMES[i % n].to_string());
    }
    net.connected = connected;
    net
}

/// Networks of two objects on 2x2x2 or three objects on 2x2x1.
fn tiny() -> impl Strategy<Value = (Network, GridSpec)> {
    (2usize..=3, prop::collection::vec(kind(), 6), prop::collection::vec(prop::bool::weighted(0.2), 6), prop::option::weighted(0.2, 0usize..3), prop::bool::weighted(0.25), 1u32..=2)
        .prop_map(|(n, kinds, mandatory, ab, connected, zdim)| {
            let grid = if n == 2 { GridSpec::new(2, 2, zdim) } else { GridSpec::new(2, 2, 1) };
            (build(n, &kinds, &mandatory, ab, connected), grid)
        })
}

fn solver_cost(net: &Network, grid: GridSpec) -> Option<Cost> {
    match explain(net, &on(grid)).unwrap() {
        ExplainOutcome::Explained(e) => Some(e.cost),
        ExplainOutcome::NoExplanation | ExplainOutcome::NotFound => None,
        ExplainOutcome::Unknown => panic!("budget"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn check_agrees((net, grid) in tiny()) {
        let ours = check(&net, &on(grid)).unwrap();
        let truth = oracle_check(&net, grid).unwrap();
        prop_assert_eq!(found(&ours), truth.is_consistent());
        if let (Some(a), Some(b)) = (ours.solution(), truth.solution()) {
            prop_assert_eq!(a.cost, b.cost);
            ncdc3d::semantics::verify_solution(&net, a).unwrap();
        }
    }

    #[test]
    fn explanations_are_minimal((net, grid) in tiny()) {
        let truth = oracle_optimal_cost(&net, grid).unwrap();
        prop_assert_eq!(solver_cost(&net, grid), truth);
        if let ExplainOutcome::Explained(e) = explain(&net, &on(grid)).unwrap() {
            let (k, sets) = oracle_optimal_explanation(&net, grid).unwrap();
            prop_assert_eq!(e.violated.len(), k);
            prop_assert!(sets.contains(&e.violated));
            let rest = net.without_constraints(&e.violated);
            prop_assert!(oracle_check(&rest, grid).unwrap().is_consistent());
        }
    }

    #[test]
    fn defaults_never_break_consistency((net, grid) in tiny(), extra in relation(), t in 0usize..3, r in 0usize..2) {
        let n = net.objects.len();
        let (t, r) = (t % n, (t + 1 + r % (n - 1)) % n);
        let (tn, rn) = (NAMES[t], NAMES[r]);
        let mut net = net;
        net.constraints.retain(|c| !(c.relation.is_default() && c.pair() == (tn.to_string(), rn.to_string())));
        let before = found(&check(&net, &on(grid)).unwrap());
        let more = net.clone().with(Constraint::default_rel(tn, rn, extra));
        let after = found(&check(&more, &on(grid)).unwrap());
        prop_assert!(!before || after);
        prop_assert_eq!(after, oracle_check(&more, grid).unwrap().is_consistent());
    }

    #[test]
    fn ab_drops_are_a_constant_offset((net, grid) in tiny()) {
        // dropping the exempted defaults outright leaves the optimum unchanged
        let exempt: BTreeSet<(String, String)> = net
            .constraints
            .iter()
            .filter(|c| c.relation.is_default())
            .filter(|c| net.ab_marks.contains(&c.target) || net.ab_marks.contains(&c.reference))
            .map(|c| c.pair())
            .collect();
        let mut stripped = net.clone();
        stripped.constraints.retain(|c| !(c.relation.is_default() && exempt.contains(&c.pair())));
        stripped.ab_marks.clear();
        let with = check(&net, &on(grid)).unwrap();
        let without = check(&stripped, &on(grid)).unwrap();
        prop_assert_eq!(found(&with), found(&without));
        if let (Some(a), Some(b)) = (with.solution(), without.solution()) {
            prop_assert_eq!(a.cost, b.cost);
            prop_assert_eq!(&a.ab_dropped, &exempt);
        }
        prop_assert_eq!(oracle_optimal_cost(&net, grid).unwrap(), oracle_optimal_cost(&stripped, grid).unwrap());
    }

    #[test]
    fn enumerated_inference_agrees((net, grid) in tiny(), t in 0usize..3, r in 0usize..2) {
        let n = net.objects.len();
        let (t, r) = (t % n, (t + 1 + r % (n - 1)) % n);
        let pair = (NAMES[t].to_string(), NAMES[r].to_string());
        let mut net = net;
        net.constraints.retain(|c| c.pair() != pair);
        net.infer_requests = vec![pair.clone()];
        let truth = oracle_infer_all(&net, grid, &pair).unwrap();
        match infer(&net, &on(grid), true).unwrap() {
            InferOutcome::Inferred { relations, .. } => {
                let got = &relations[&pair];
                prop_assert!(!got.truncated);
                prop_assert_eq!(&got.relations, &truth);
            }
            InferOutcome::NotFound | InferOutcome::Inconsistent => prop_assert!(truth.is_empty()),
            InferOutcome::Unknown => panic!("budget"),
        }
    }
}

#[test]
fn disjunction_and_default_interplay() {
    // a must be north or south of b; the default pushes it south
    let net = Network::new(&["a", "b"])
        .with(Constraint::disjunctive("a", "b", vec![rel("NM"), rel("SM")]))
        .with(Constraint::default_rel("a", "b", rel("SM")));
    let grid = GridSpec::new(1, 3, 1);
    let ours = check(&net, &on(grid)).unwrap();
    let truth = oracle_check(&net, grid).unwrap();
    assert_eq!(ours.solution().unwrap().cost, truth.solution().unwrap().cost);
    assert_eq!(ours.solution().unwrap().cost, Cost::default());
    assert!(matches!(net.constraints[1].relation, Relation::Default(_)));
}
