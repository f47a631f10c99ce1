//! Complete search: constraint choices first, then a weak order of box
//! endpoints per axis, then cells.
//!
//! Each endpoint is a point `2u` (infimum) or `2u + 1` (supremum). A weak order
//! with `h` distinct levels is realized on the grid by giving a point of rank
//! `r` the coordinate `r + 1` as an infimum and `r` as a supremum, so an
//! object with infimum rank `i` and supremum rank `s` covers cells `i+1..=s`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::kernel::feasible_object;
use super::pa::{Pa, EQ, GE, GT, LE, LT};
use crate::model::{BasicRelation, Cost, GridSpec, Mbb, Network, Pair, Relation, SpatialObject};

#[derive(Clone, Debug)]
pub(crate) struct Hard {
    pub t: usize,
    pub r: usize,
    pub disjuncts: Vec<BasicRelation>,
    pub mandatory: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct Def {
    pub t: usize,
    pub r: usize,
    pub rel: BasicRelation,
    pub ab: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Decision {
    Hard(usize),
    Default(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Choice {
    Unset,
    Violated,
    Disjunct(usize),
    Drop,
    Apply,
}

/// A network lowered to indices.
#[derive(Clone, Debug)]
pub(crate) struct Problem {
    pub names: Vec<String>,
    pub n: usize,
    pub grid: GridSpec,
    pub complete: bool,
    pub connected: bool,
    pub hard: Vec<Hard>,
    pub defaults: Vec<Def>,
    pub decisions: Vec<Decision>,
    pub is_trg: Vec<bool>,
    pub explain: bool,
}

impl Problem {
    pub fn new(net: &Network, grid: GridSpec, explain: bool) -> Self {
        let idx = |s: &str| net.index_of(s).expect("validated network");
        let n = net.objects.len();
        let mut hard = Vec::new();
        let mut defaults = Vec::new();
        let mut is_trg = vec![false; n];
        for c in &net.constraints {
            let (t, r) = (idx(&c.target), idx(&c.reference));
            is_trg[t] = true;
            match &c.relation {
                Relation::Default(rel) => defaults.push(Def {
                    t,
                    r,
                    rel: *rel,
                    ab: net.ab_marks.contains(&c.target) || net.ab_marks.contains(&c.reference),
                }),
                other => hard.push(Hard {
                    t,
                    r,
                    disjuncts: other.disjuncts().to_vec(),
                    mandatory: c.mandatory,
                }),
            }
        }
        // Later-declared pairs are decided first, so the explanation found first
        // is the lexicographically greatest one by declaration index.
        let mut order: Vec<usize> = (0..hard.len()).collect();
        order.sort_by(|&a, &b| (hard[b].t, hard[b].r).cmp(&(hard[a].t, hard[a].r)));
        let mut decisions: Vec<Decision> = order.into_iter().map(Decision::Hard).collect();
        decisions.extend(
            defaults
                .iter()
                .enumerate()
                .filter(|(_, d)| !d.ab)
                .map(|(i, _)| Decision::Default(i)),
        );
        Problem {
            names: net.objects.clone(),
            n,
            grid,
            complete: grid.is_complete_for(n),
            connected: net.connected,
            hard,
            defaults,
            decisions,
            is_trg,
            explain,
        }
    }

    pub fn dims(&self) -> [u32; 3] {
        self.grid.dims()
    }
}

/// Shared node and time budget.
pub(crate) struct Budget {
    nodes: AtomicU64,
    limit: Option<u64>,
    deadline: Option<Instant>,
    aborted: AtomicBool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Abort;

impl Budget {
    pub fn new(limit: Option<u64>, deadline: Option<Instant>) -> Self {
        Budget {
            nodes: AtomicU64::new(0),
            limit,
            deadline,
            aborted: AtomicBool::new(false),
        }
    }

    pub fn tick(&self) -> Result<(), Abort> {
        if self.aborted.load(Ordering::Relaxed) {
            return Err(Abort);
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_nodes = self.limit.is_some_and(|l| n > l);
        let over_time = n.is_multiple_of(256) && self.deadline.is_some_and(|d| Instant::now() > d);
        if over_nodes || over_time {
            self.aborted.store(true, Ordering::Relaxed);
            return Err(Abort);
        }
        Ok(())
    }

    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct State {
    pub pa: [Pa; 3],
    pub choices: Vec<Choice>,
    pub k: usize,
    pub d: usize,
}

#[inline]
fn inf(u: usize) -> usize {
    2 * u
}

#[inline]
fn sup(u: usize) -> usize {
    2 * u + 1
}

/// Endpoint order constraints implied by `u rel v`, per axis.
pub(crate) fn relation_labels(u: usize, v: usize, rel: BasicRelation) -> Vec<(usize, usize, usize, u8)> {
    let mut out = Vec::with_capacity(18);
    for (axis, x) in rel.axis_classes().into_iter().enumerate() {
        let (iu, su, iv, sv) = (inf(u), sup(u), inf(v), sup(v));
        let below = x & 1 != 0;
        let within = x & 2 != 0;
        let above = x & 4 != 0;
        out.push((axis, iu, iv, if below { LT } else { GE }));
        out.push((axis, su, sv, if above { GT } else { LE }));
        if within {
            out.push((axis, iu, sv, LT));
            out.push((axis, su, iv, GT));
        }
        if x == 1 {
            out.push((axis, su, iv, LE));
        }
        if x == 4 {
            out.push((axis, iu, sv, GE));
        }
    }
    out
}

pub(crate) fn initial_state(p: &Problem) -> Option<State> {
    let mut pa = [Pa::new(2 * p.n), Pa::new(2 * p.n), Pa::new(2 * p.n)];
    for u in 0..p.n {
        for axis_pa in pa.iter_mut() {
            if !axis_pa.add(inf(u), sup(u), LT) {
                return None;
            }
        }
    }
    let st = State {
        pa,
        choices: vec![Choice::Unset; p.decisions.len()],
        k: 0,
        d: 0,
    };
    p.height_ok(&st.pa).then_some(st)
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

impl Problem {
    fn add_relation(&self, st: &mut State, u: usize, v: usize, rel: BasicRelation) -> bool {
        for (axis, i, j, l) in relation_labels(u, v, rel) {
            if !st.pa[axis].add(i, j, l) {
                return false;
            }
        }
        self.height_ok(&st.pa)
    }

    /// On incomplete grids, the longest strict chain must fit each axis.
    pub fn height_ok(&self, pa: &[Pa; 3]) -> bool {
        if self.complete {
            return true;
        }
        let all: Vec<usize> = (0..2 * self.n).collect();
        let dims = self.dims();
        (0..3).all(|a| pa[a].ranks(&all).into_iter().max().unwrap_or(0) <= dims[a])
    }

    pub fn options(&self, di: usize, st: &State, lim: Cost) -> Vec<Choice> {
        match self.decisions[di] {
            Decision::Hard(h) => {
                let c = &self.hard[h];
                let mut out = Vec::with_capacity(c.disjuncts.len() + 1);
                if self.explain && !c.mandatory && st.k < lim.violations {
                    out.push(Choice::Violated);
                }
                out.extend((0..c.disjuncts.len()).map(Choice::Disjunct));
                out
            }
            Decision::Default(_) => {
                let mut out = vec![Choice::Apply];
                if st.d < lim.drops {
                    out.push(Choice::Drop);
                }
                out
            }
        }
    }

    /// Applies one decision; false when it contradicts the state.
    pub fn apply(&self, st: &mut State, di: usize, choice: Choice) -> bool {
        st.choices[di] = choice;
        match (self.decisions[di], choice) {
            (_, Choice::Violated) => {
                st.k += 1;
                true
            }
            (_, Choice::Drop) => {
                st.d += 1;
                true
            }
            (Decision::Hard(h), Choice::Disjunct(i)) => {
                let c = &self.hard[h];
                self.add_relation(st, c.t, c.r, c.disjuncts[i])
            }
            (Decision::Default(i), Choice::Apply) => {
                let c = &self.defaults[i];
                self.add_relation(st, c.t, c.r, c.rel)
            }
            _ => unreachable!("choice does not fit decision"),
        }
    }

    /// Depth-first over decisions from `di`, calling `leaf` on every complete,
    /// propagation-consistent assignment within `lim`.
    pub fn walk_decisions(
        &self,
        st: &State,
        di: usize,
        lim: Cost,
        budget: &Budget,
        leaf: &mut dyn FnMut(&State) -> Result<Flow, Abort>,
    ) -> Result<Flow, Abort> {
        budget.tick()?;
        if di == self.decisions.len() {
            return leaf(st);
        }
        for choice in self.options(di, st, lim) {
            let mut next = st.clone();
            if !self.apply(&mut next, di, choice) {
                continue;
            }
            if let Flow::Stop = self.walk_decisions(&next, di + 1, lim, budget, leaf)? {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }

    /// Decision prefixes of length `depth`, in depth-first order.
    fn prefixes(&self, st: &State, di: usize, depth: usize, lim: Cost, out: &mut Vec<State>) {
        if di == depth {
            out.push(st.clone());
            return;
        }
        for choice in self.options(di, st, lim) {
            let mut next = st.clone();
            if self.apply(&mut next, di, choice) {
                self.prefixes(&next, di + 1, depth, lim, out);
            }
        }
    }

    /// Enforced `(reference, relation)` lists per target for a full assignment.
    pub fn enforced(&self, choices: &[Choice]) -> Vec<Vec<(usize, BasicRelation)>> {
        let mut out = vec![Vec::new(); self.n];
        for (di, &choice) in choices.iter().enumerate() {
            match (self.decisions[di], choice) {
                (Decision::Hard(h), Choice::Disjunct(i)) => {
                    let c = &self.hard[h];
                    out[c.t].push((c.r, c.disjuncts[i]));
                }
                (Decision::Default(i), Choice::Apply) => {
                    let c = &self.defaults[i];
                    out[c.t].push((c.r, c.rel));
                }
                _ => {}
            }
        }
        out
    }
}

/// The endpoints of `u` and of its enforced references.
pub(crate) fn scope_points(u: usize, enforced: &[(usize, BasicRelation)], extra: Option<usize>) -> Vec<usize> {
    let mut objs = vec![u];
    objs.extend(enforced.iter().map(|&(r, _)| r));
    objs.extend(extra);
    objs.sort_unstable();
    objs.dedup();
    objs.into_iter().flat_map(|o| [inf(o), sup(o)]).collect()
}

/// Boxes of the objects in `points` on the zone grid of their weak order.
pub(crate) fn local_boxes(pa: &[Pa; 3], points: &[usize]) -> HashMap<usize, Mbb> {
    let ranks: Vec<Vec<u32>> = (0..3).map(|a| pa[a].ranks(points)).collect();
    let mut lo: HashMap<usize, [u32; 3]> = HashMap::new();
    let mut hi: HashMap<usize, [u32; 3]> = HashMap::new();
    for (k, &pt) in points.iter().enumerate() {
        let r = [ranks[0][k], ranks[1][k], ranks[2][k]];
        if pt % 2 == 0 {
            lo.insert(pt / 2, [r[0] + 1, r[1] + 1, r[2] + 1]);
        } else {
            hi.insert(pt / 2, r);
        }
    }
    lo.into_iter().map(|(o, l)| (o, Mbb::new(l, hi[&o]))).collect()
}

pub(crate) type KernelCache = HashMap<(usize, Vec<u8>), bool>;

fn order_key(pa: &[Pa; 3], points: &[usize]) -> Vec<u8> {
    let mut key = Vec::with_capacity(3 * points.len() * points.len() / 2);
    for axis in pa {
        for (a, &i) in points.iter().enumerate() {
            for &j in &points[a + 1..] {
                key.push(axis.get(i, j));
            }
        }
    }
    key
}

/// A point-order search context for one complete decision assignment.
pub(crate) struct PointSearch<'a> {
    pub p: &'a Problem,
    pub budget: &'a Budget,
    pub enforced: Vec<Vec<(usize, BasicRelation)>>,
    pub targets: Vec<usize>,
    pub cache: KernelCache,
}

pub(crate) struct Placement {
    pub objects: Vec<SpatialObject>,
}

type Step = Result<Option<Placement>, Abort>;

impl<'a> PointSearch<'a> {
    pub fn new(p: &'a Problem, budget: &'a Budget, choices: &[Choice]) -> Self {
        let enforced = p.enforced(choices);
        let targets = (0..p.n).filter(|&u| !enforced[u].is_empty()).collect();
        PointSearch {
            p,
            budget,
            enforced,
            targets,
            cache: HashMap::new(),
        }
    }

    /// Whether target `u` has a cell witness under the current order of its scope.
    pub fn local_ok(&mut self, pa: &[Pa; 3], u: usize, points: &[usize]) -> bool {
        let key = (u, order_key(pa, points));
        if let Some(&hit) = self.cache.get(&key) {
            return hit;
        }
        let boxes = local_boxes(pa, points);
        let refs: Vec<(Mbb, BasicRelation)> = self.enforced[u].iter().map(|&(r, rel)| (boxes[&r], rel)).collect();
        let ok = feasible_object(&boxes[&u], &refs, self.p.connected, true).is_some();
        self.cache.insert(key, ok);
        ok
    }

    /// Branches on the first open pair among `points`, calling `next` on each
    /// refined network. Returns `None` if every pair is already atomic.
    fn branch(
        &mut self,
        pa: &[Pa; 3],
        points: &[usize],
        next: &mut dyn FnMut(&mut Self, [Pa; 3]) -> Step,
    ) -> Option<Step> {
        for axis in 0..3 {
            if let Some((i, j)) = pa[axis].first_open(points) {
                let label = pa[axis].get(i, j);
                for l in [LT, EQ, GT] {
                    if label & l == 0 {
                        continue;
                    }
                    let mut refined = pa.clone();
                    if !refined[axis].add(i, j, l) || !self.p.height_ok(&refined) {
                        continue;
                    }
                    match next(self, refined) {
                        Ok(None) => {}
                        other => return Some(other),
                    }
                }
                return Some(Ok(None));
            }
        }
        None
    }

    /// Orders the scope of each target in turn, then the rest, then builds cells.
    pub fn run(&mut self, pa: [Pa; 3], ti: usize) -> Result<Option<Placement>, Abort> {
        self.budget.tick()?;
        if ti == self.targets.len() {
            return self.finish(pa);
        }
        let u = self.targets[ti];
        let points = scope_points(u, &self.enforced[u], None);
        if let Some(r) = self.branch(&pa, &points, &mut |s, refined| s.run(refined, ti)) {
            return r;
        }
        if !self.local_ok(&pa, u, &points) {
            return Ok(None);
        }
        self.run(pa, ti + 1)
    }

    fn finish(&mut self, pa: [Pa; 3]) -> Result<Option<Placement>, Abort> {
        self.budget.tick()?;
        let all: Vec<usize> = (0..2 * self.p.n).collect();
        if let Some(r) = self.branch(&pa, &all, &mut |s, refined| s.finish(refined)) {
            return r;
        }
        let boxes = local_boxes(&pa, &all);
        let dims = self.p.dims();
        if boxes.values().any(|b| (0..3).any(|a| b.sup[a] > dims[a])) {
            return Ok(None);
        }
        let mut objects = Vec::with_capacity(self.p.n);
        for u in 0..self.p.n {
            let refs: Vec<(Mbb, BasicRelation)> = self.enforced[u].iter().map(|&(r, rel)| (boxes[&r], rel)).collect();
            match feasible_object(&boxes[&u], &refs, self.p.connected, self.p.is_trg[u]) {
                Some(o) => objects.push(o),
                None => return Ok(None),
            }
        }
        Ok(Some(Placement { objects }))
    }
}

/// A solution with the decision assignment that produced it.
pub(crate) struct Found {
    pub choices: Vec<Choice>,
    pub placement: Placement,
}

pub(crate) enum SearchResult {
    Found(Found),
    Exhausted,
    Aborted,
}

fn solve_subtree(p: &Problem, st: &State, di: usize, lim: Cost, budget: &Budget) -> SearchResult {
    let mut found = None;
    let walk = p.walk_decisions(st, di, lim, budget, &mut |leaf| {
        let mut ps = PointSearch::new(p, budget, &leaf.choices);
        match ps.run(leaf.pa.clone(), 0)? {
            Some(placement) => {
                found = Some(Found {
                    choices: leaf.choices.clone(),
                    placement,
                });
                Ok(Flow::Stop)
            }
            None => Ok(Flow::Continue),
        }
    });
    match (walk, found) {
        (_, Some(f)) => SearchResult::Found(f),
        (Err(Abort), None) => SearchResult::Aborted,
        (Ok(_), None) => SearchResult::Exhausted,
    }
}

/// First solution in depth-first order within `lim`, splitting the top of the
/// decision tree across `workers` threads. The earliest prefix with a
/// solution wins, so the answer does not depend on the worker count.
pub(crate) fn solve(p: &Problem, root: &State, lim: Cost, budget: &Budget, workers: usize) -> SearchResult {
    if workers <= 1 || p.decisions.is_empty() {
        return solve_subtree(p, root, 0, lim, budget);
    }
    let mut depth = 0;
    let mut prefixes = vec![root.clone()];
    while depth < p.decisions.len() && prefixes.len() < 4 * workers {
        depth += 1;
        prefixes.clear();
        p.prefixes(root, 0, depth, lim, &mut prefixes);
    }
    let best = AtomicUsize::new(usize::MAX);
    let run = || {
        prefixes
            .par_iter()
            .enumerate()
            .map(|(i, st)| {
                if i > best.load(Ordering::Acquire) {
                    return None;
                }
                let r = solve_subtree(p, st, depth, lim, budget);
                if let SearchResult::Found(_) = r {
                    best.fetch_min(i, Ordering::AcqRel);
                }
                Some(r)
            })
            .collect::<Vec<_>>()
    };
    let results = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    for r in results.into_iter().flatten() {
        match r {
            SearchResult::Exhausted => continue,
            other => return other,
        }
    }
    SearchResult::Exhausted
}

/// Ordered pair names for reporting.
pub(crate) fn pair_names(p: &Problem, t: usize, r: usize) -> Pair {
    (p.names[t].clone(), p.names[r].clone())
}

#[allow(dead_code)]
#[cfg(test)]
mod tests {
    use super::*;

    fn rel(s: &str) -> BasicRelation {
        s.parse().unwrap()
    }

    #[test]
    fn labels_for_north() {
        // u N^M v: x within, y above, z within
        let labels = relation_labels(0, 1, rel("NM"));
        assert!(labels.contains(&(1, 0, 3, GE)));
        assert!(labels.contains(&(0, 0, 2, GE)));
        assert!(labels.contains(&(0, 1, 3, LE)));
    }
}
