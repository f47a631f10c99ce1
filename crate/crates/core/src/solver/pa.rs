//! Point-algebra network over box endpoints, one per axis.
//!
//! Labels are subsets of {<, =, >}. Only convex labels ever occur, so path
//! consistency decides satisfiability exactly.

pub const LT: u8 = 1;
pub const EQ: u8 = 2;
pub const GT: u8 = 4;
pub const ALL: u8 = LT | EQ | GT;
pub const LE: u8 = LT | EQ;
pub const GE: u8 = GT | EQ;

#[inline]
pub fn converse(l: u8) -> u8 {
    (l & EQ) | ((l & LT) << 2) | ((l & GT) >> 2)
}

const fn compose_atomic(a: u8, b: u8) -> u8 {
    match (a, b) {
        (EQ, x) | (x, EQ) => x,
        (LT, LT) => LT,
        (GT, GT) => GT,
        _ => ALL,
    }
}

const fn build_table() -> [[u8; 8]; 8] {
    let mut t = [[0u8; 8]; 8];
    let mut a = 0;
    while a < 8 {
        let mut b = 0;
        while b < 8 {
            let mut out = 0;
            let mut i = 0;
            while i < 3 {
                let mut j = 0;
                while j < 3 {
                    if a & (1 << i) != 0 && b & (1 << j) != 0 {
                        out |= compose_atomic(1 << i, 1 << j);
                    }
                    j += 1;
                }
                i += 1;
            }
            t[a as usize][b as usize] = out;
            b += 1;
        }
        a += 1;
    }
    t
}

static COMPOSE: [[u8; 8]; 8] = build_table();

#[inline]
pub fn compose(a: u8, b: u8) -> u8 {
    COMPOSE[a as usize][b as usize]
}

#[inline]
pub fn is_atomic(l: u8) -> bool {
    l.count_ones() == 1
}

/// Row-major label matrix over `n` points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pa {
    n: usize,
    lab: Vec<u8>,
}

impl Pa {
    pub fn new(n: usize) -> Self {
        let mut lab = vec![ALL; n * n];
        for i in 0..n {
            lab[i * n + i] = EQ;
        }
        Pa { n, lab }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.lab[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Intersects `(i, j)` with `l` and restores path consistency.
    /// Returns false on an empty label; the network is then garbage.
    pub fn add(&mut self, i: usize, j: usize, l: u8) -> bool {
        let mut queue = Vec::new();
        if !self.refine(i, j, l, &mut queue) {
            return false;
        }
        self.propagate(queue)
    }

    fn refine(&mut self, i: usize, j: usize, l: u8, queue: &mut Vec<(usize, usize)>) -> bool {
        let n = self.n;
        let old = self.lab[i * n + j];
        let new = old & l;
        if new == 0 {
            return false;
        }
        if new != old {
            self.lab[i * n + j] = new;
            self.lab[j * n + i] = converse(new);
            queue.push((i, j));
        }
        true
    }

    fn propagate(&mut self, mut queue: Vec<(usize, usize)>) -> bool {
        let n = self.n;
        while let Some((i, j)) = queue.pop() {
            let ij = self.lab[i * n + j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                // i -> k through j
                let c = compose(ij, self.lab[j * n + k]);
                if c != ALL && !self.refine(i, k, c, &mut queue) {
                    return false;
                }
                // k -> j through i
                let c = compose(self.lab[k * n + i], self.lab[i * n + j]);
                if c != ALL && !self.refine(k, j, c, &mut queue) {
                    return false;
                }
            }
        }
        true
    }

    /// Longest chain of strict `<` edges ending at each point.
    /// Ignores non-strict labels, so on an all-atomic network this is the rank
    /// of each point's equivalence class.
    pub fn ranks(&self, points: &[usize]) -> Vec<u32> {
        let mut order: Vec<usize> = (0..points.len()).collect();
        // number of points strictly below is a topological key for the strict DAG
        let below: Vec<usize> = points
            .iter()
            .map(|&p| points.iter().filter(|&&q| self.get(q, p) == LT).count())
            .collect();
        order.sort_by_key(|&i| below[i]);
        let mut rank = vec![0u32; points.len()];
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[..pos] {
                if self.get(points[j], points[i]) == LT {
                    rank[i] = rank[i].max(rank[j] + 1);
                }
            }
        }
        rank
    }

    /// First pair among `points` whose label is not atomic.
    pub fn first_open(&self, points: &[usize]) -> Option<(usize, usize)> {
        for (a, &i) in points.iter().enumerate() {
            for &j in &points[a + 1..] {
                if !is_atomic(self.get(i, j)) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}
