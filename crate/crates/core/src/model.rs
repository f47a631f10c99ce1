//! Domain types shared by every other module: tiles, relations, constraints,
//! networks, grids, spatial objects and solutions.
//!
//! Everything here is immutable after construction and `Send + Sync`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A grid cell, 1-based `[x, y, z]`.
pub type Cell = [u32; 3];

/// The nine planar directions of a reference object's bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Planar {
    NW,
    N,
    NE,
    W,
    O,
    E,
    SW,
    S,
    SE,
}

impl Planar {
    pub const ALL: [Planar; 9] = [
        Planar::NW,
        Planar::N,
        Planar::NE,
        Planar::W,
        Planar::O,
        Planar::E,
        Planar::SW,
        Planar::S,
        Planar::SE,
    ];

    /// `(x_class, y_class)`: 0 = below the box, 1 = within, 2 = above.
    pub fn classes(self) -> (u8, u8) {
        match self {
            Planar::SW => (0, 0),
            Planar::S => (1, 0),
            Planar::SE => (2, 0),
            Planar::W => (0, 1),
            Planar::O => (1, 1),
            Planar::E => (2, 1),
            Planar::NW => (0, 2),
            Planar::N => (1, 2),
            Planar::NE => (2, 2),
        }
    }

    pub fn from_classes(x: u8, y: u8) -> Planar {
        const TABLE: [[Planar; 3]; 3] = [
            [Planar::SW, Planar::S, Planar::SE],
            [Planar::W, Planar::O, Planar::E],
            [Planar::NW, Planar::N, Planar::NE],
        ];
        TABLE[y as usize][x as usize]
    }

    pub fn token(self) -> &'static str {
        match self {
            Planar::NW => "NW",
            Planar::N => "N",
            Planar::NE => "NE",
            Planar::W => "W",
            Planar::O => "O",
            Planar::E => "E",
            Planar::SW => "SW",
            Planar::S => "S",
            Planar::SE => "SE",
        }
    }
}

/// Vertical level relative to the reference box: above, middle, below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    A,
    M,
    B,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::A, Level::M, Level::B];

    pub fn class(self) -> u8 {
        match self {
            Level::B => 0,
            Level::M => 1,
            Level::A => 2,
        }
    }

    pub fn from_class(z: u8) -> Level {
        match z {
            0 => Level::B,
            1 => Level::M,
            _ => Level::A,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Level::A => "A",
            Level::M => "M",
            Level::B => "B",
        }
    }
}

/// One of the 27 direction tiles around a reference bounding box.
///
/// Tiles are totally ordered by [`SingleTile::index`], which is also the
/// order used when relations are printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingleTile {
    pub planar: Planar,
    pub level: Level,
}

impl SingleTile {
    pub const COUNT: usize = 27;

    pub fn new(planar: Planar, level: Level) -> Self {
        SingleTile { planar, level }
    }

    /// Builds a tile from per-axis classes (0 = below, 1 = within, 2 = above).
    pub fn from_classes(x: u8, y: u8, z: u8) -> Self {
        SingleTile {
            planar: Planar::from_classes(x, y),
            level: Level::from_class(z),
        }
    }

    /// `[x, y, z]` classes of this tile.
    pub fn classes(self) -> [u8; 3] {
        let (x, y) = self.planar.classes();
        [x, y, self.level.class()]
    }

    /// Dense index in `0..27`: `z * 9 + y * 3 + x` over the axis classes.
    pub fn index(self) -> usize {
        let [x, y, z] = self.classes();
        z as usize * 9 + y as usize * 3 + x as usize
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "tile index out of range: {index}");
        Self::from_classes((index % 3) as u8, ((index / 3) % 3) as u8, (index / 9) as u8)
    }

    pub fn all() -> impl Iterator<Item = SingleTile> {
        (0..Self::COUNT).map(SingleTile::from_index)
    }

    /// Canonical uppercase token, e.g. `SWB` or `OM`.
    pub fn token(self) -> String {
        format!("{}{}", self.planar.token(), self.level.token())
    }

    /// Lowercase token used in answer-set facts, e.g. `swb`.
    pub fn asp_token(self) -> String {
        self.token().to_ascii_lowercase()
    }
}

impl PartialOrd for SingleTile {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SingleTile {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index().cmp(&other.index())
    }
}

impl fmt::Display for SingleTile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.planar.token(), self.level.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown tile token `{0}`")]
pub struct UnknownTile(pub String);

impl FromStr for SingleTile {
    type Err = UnknownTile;

    /// Case-insensitive: `swb`, `SWB` and `SwB` all parse.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        if upper.len() < 2 || !upper.is_ascii() {
            return Err(UnknownTile(s.to_string()));
        }
        let (planar, level) = upper.split_at(upper.len() - 1);
        let level = Level::ALL
            .into_iter()
            .find(|l| l.token() == level)
            .ok_or_else(|| UnknownTile(s.to_string()))?;
        let planar = Planar::ALL
            .into_iter()
            .find(|p| p.token() == planar)
            .ok_or_else(|| UnknownTile(s.to_string()))?;
        Ok(SingleTile { planar, level })
    }
}

/// A basic relation `R1:...:Rk`: a non-empty set of tiles, stored as a
/// 27-bit mask indexed by [`SingleTile::index`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasicRelation(u32);

impl BasicRelation {
    pub const ALL_BITS: u32 = (1 << SingleTile::COUNT) - 1;

    /// `None` when `bits` is zero or has bits beyond the 27 tiles.
    pub fn from_bits(bits: u32) -> Option<Self> {
        (bits != 0 && bits & !Self::ALL_BITS == 0).then_some(BasicRelation(bits))
    }

    /// `None` for an empty iterator.
    pub fn from_tiles<I: IntoIterator<Item = SingleTile>>(tiles: I) -> Option<Self> {
        Self::from_bits(tiles.into_iter().fold(0, |acc, t| acc | 1 << t.index()))
    }

    pub fn single(tile: SingleTile) -> Self {
        BasicRelation(1 << tile.index())
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, tile: SingleTile) -> bool {
        self.0 & (1 << tile.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Always false; present for API symmetry with `len`.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_single_tile(self) -> bool {
        self.len() == 1
    }

    /// Tiles in index order.
    pub fn tiles(self) -> impl Iterator<Item = SingleTile> {
        let bits = self.0;
        (0..SingleTile::COUNT)
            .filter(move |i| bits & (1 << i) != 0)
            .map(SingleTile::from_index)
    }

    /// Per-axis class sets (bit `c` set when class `c` occurs on that axis).
    pub fn axis_classes(self) -> [u8; 3] {
        let mut out = [0u8; 3];
        for t in self.tiles() {
            for (axis, c) in t.classes().into_iter().enumerate() {
                out[axis] |= 1 << c;
            }
        }
        out
    }
}

impl fmt::Display for BasicRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in self.tiles() {
            if !first {
                f.write_str(":")?;
            }
            first = false;
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for BasicRelation {
    type Err = UnknownTile;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = 0;
        for token in s.split(':') {
            bits |= 1 << token.trim().parse::<SingleTile>()?.index();
        }
        BasicRelation::from_bits(bits).ok_or_else(|| UnknownTile(s.to_string()))
    }
}

/// The relation carried by a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Basic(BasicRelation),
    /// Exactly one of the listed (pairwise distinct) basic relations holds.
    Disjunctive(Vec<BasicRelation>),
    /// Holds unless dropped; drops are minimized.
    Default(BasicRelation),
}

impl Relation {
    pub fn is_default(&self) -> bool {
        matches!(self, Relation::Default(_))
    }

    /// The basic relations this relation admits, in declaration order.
    pub fn disjuncts(&self) -> &[BasicRelation] {
        match self {
            Relation::Basic(r) | Relation::Default(r) => std::slice::from_ref(r),
            Relation::Disjunctive(rs) => rs,
        }
    }
}

/// `target relation reference`, with an optional mandatory flag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub target: String,
    pub reference: String,
    pub relation: Relation,
    pub mandatory: bool,
}

impl Constraint {
    pub fn basic(target: &str, reference: &str, rel: BasicRelation) -> Self {
        Constraint {
            target: target.to_string(),
            reference: reference.to_string(),
            relation: Relation::Basic(rel),
            mandatory: false,
        }
    }

    pub fn disjunctive(target: &str, reference: &str, rels: Vec<BasicRelation>) -> Self {
        Constraint {
            target: target.to_string(),
            reference: reference.to_string(),
            relation: Relation::Disjunctive(rels),
            mandatory: false,
        }
    }

    pub fn default_rel(target: &str, reference: &str, rel: BasicRelation) -> Self {
        Constraint {
            target: target.to_string(),
            reference: reference.to_string(),
            relation: Relation::Default(rel),
            mandatory: false,
        }
    }

    pub fn pair(&self) -> (String, String) {
        (self.target.clone(), self.reference.clone())
    }
}

/// Grid size `m × n × p` (cells per axis).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: u32,
    pub n: u32,
    pub p: u32,
}

impl GridSpec {
    pub fn new(m: u32, n: u32, p: u32) -> Self {
        GridSpec { m, n, p }
    }

    pub fn cube(side: u32) -> Self {
        GridSpec::new(side, side, side)
    }

    pub fn dims(self) -> [u32; 3] {
        [self.m, self.n, self.p]
    }

    pub fn cell_count(self) -> u64 {
        self.m as u64 * self.n as u64 * self.p as u64
    }

    /// Side length that is guaranteed to preserve answers for `objects` variables.
    pub fn bound_for(objects: usize) -> u32 {
        (2 * objects as u32).saturating_sub(1).max(1)
    }

    /// True when every dimension meets the `2|V| - 1` bound.
    pub fn is_complete_for(self, objects: usize) -> bool {
        let bound = Self::bound_for(objects);
        self.dims().iter().all(|&d| d >= bound)
    }

    pub fn contains(self, cell: Cell) -> bool {
        cell.iter()
            .zip(self.dims())
            .all(|(&c, d)| c >= 1 && c <= d)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.p)
    }
}

/// A non-empty set of grid cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpatialObject {
    cells: BTreeSet<Cell>,
}

impl SpatialObject {
    /// `None` for an empty cell set.
    pub fn new<I: IntoIterator<Item = Cell>>(cells: I) -> Option<Self> {
        let cells: BTreeSet<Cell> = cells.into_iter().collect();
        (!cells.is_empty()).then_some(SpatialObject { cells })
    }

    pub fn cells(&self) -> &BTreeSet<Cell> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.contains(&cell)
    }

    pub fn within(&self, grid: GridSpec) -> bool {
        self.cells.iter().all(|&c| grid.contains(c))
    }
}

/// Minimum bounding box, inclusive on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mbb {
    pub inf: [u32; 3],
    pub sup: [u32; 3],
}

impl Mbb {
    /// Panics if `inf > sup` on some axis.
    pub fn new(inf: [u32; 3], sup: [u32; 3]) -> Self {
        assert!(
            (0..3).all(|a| inf[a] <= sup[a]),
            "bounding box with inf > sup: {inf:?} {sup:?}"
        );
        Mbb { inf, sup }
    }

    pub fn whole(grid: GridSpec) -> Self {
        Mbb::new([1, 1, 1], grid.dims())
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (0..3).all(|a| self.inf[a] <= cell[a] && cell[a] <= self.sup[a])
    }

    pub fn extent(&self, axis: usize) -> u32 {
        self.sup[axis] - self.inf[axis] + 1
    }

    pub fn volume(&self) -> u64 {
        (0..3).map(|a| self.extent(a) as u64).product()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let (lo, hi) = (self.inf, self.sup);
        (lo[0]..=hi[0]).flat_map(move |x| {
            (lo[1]..=hi[1]).flat_map(move |y| (lo[2]..=hi[2]).map(move |z| [x, y, z]))
        })
    }
}

/// Lexicographic cost: violated constraints first, then dropped defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cost {
    pub violations: usize,
    pub drops: usize,
}

impl Cost {
    pub fn new(violations: usize, drops: usize) -> Self {
        Cost { violations, drops }
    }
}

pub type Pair = (String, String);

/// An assignment of spatial objects to every variable, with the defaults and
/// constraints it gives up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub grid: GridSpec,
    pub assignment: BTreeMap<String, SpatialObject>,
    /// Defaults that do not apply, including those dropped by an `ab` mark.
    pub dropped_defaults: BTreeSet<Pair>,
    /// The subset of `dropped_defaults` forced by `ab` marks (not counted in cost).
    pub ab_dropped: BTreeSet<Pair>,
    /// Non-default constraints given up (explanation mode only).
    pub violated: BTreeSet<Pair>,
    pub cost: Cost,
}

impl Solution {
    pub fn object(&self, name: &str) -> Option<&SpatialObject> {
        self.assignment.get(name)
    }
}

/// A qualitative constraint network.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    /// Declaration order; also the object numbering used by the emitter.
    pub objects: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub ab_marks: BTreeSet<String>,
    pub infer_requests: Vec<Pair>,
    pub connected: bool,
    pub grid: Option<GridSpec>,
}

impl Network {
    pub fn new<S: AsRef<str>>(objects: &[S]) -> Self {
        Network {
            objects: objects.iter().map(|s| s.as_ref().to_string()).collect(),
            ..Network::default()
        }
    }

    pub fn with(mut self, constraint: Constraint) -> Self {
        self.constraints.push(constraint);
        self
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    /// The non-default constraint on `(target, reference)`, if any.
    pub fn hard_constraint(&self, target: &str, reference: &str) -> Option<&Constraint> {
        self.constraints
            .iter()
            .find(|c| !c.relation.is_default() && c.target == target && c.reference == reference)
    }

    /// The default constraint on `(target, reference)`, if any.
    pub fn default_constraint(&self, target: &str, reference: &str) -> Option<&Constraint> {
        self.constraints
            .iter()
            .find(|c| c.relation.is_default() && c.target == target && c.reference == reference)
    }

    /// Copy without the non-default constraints on the given pairs.
    pub fn without_constraints(&self, pairs: &BTreeSet<Pair>) -> Network {
        let mut out = self.clone();
        out.constraints.retain(|c| {
            c.relation.is_default() || !pairs.contains(&(c.target.clone(), c.reference.clone()))
        });
        out
    }

    /// `copies` disjoint copies of the network; copy `i > 1` suffixes every
    /// name with `_i`. A grid override is dropped since the bound grows.
    pub fn replicate(&self, copies: usize) -> Network {
        let rename = |name: &str, i: usize| if i == 1 { name.to_string() } else { format!("{name}_{i}") };
        let mut out = Network {
            connected: self.connected,
            ..Network::default()
        };
        for i in 1..=copies {
            out.objects.extend(self.objects.iter().map(|o| rename(o, i)));
            out.constraints.extend(self.constraints.iter().map(|c| Constraint {
                target: rename(&c.target, i),
                reference: rename(&c.reference, i),
                ..c.clone()
            }));
            out.ab_marks.extend(self.ab_marks.iter().map(|a| rename(a, i)));
            out.infer_requests
                .extend(self.infer_requests.iter().map(|(t, r)| (rename(t, i), rename(r, i))));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut errors = Vec::new();
        let mut seen_objects = HashSet::new();
        for o in &self.objects {
            if !seen_objects.insert(o.as_str()) {
                errors.push(ValidationError::DuplicateObject(o.clone()));
            }
        }
        let known = |name: &str, errors: &mut Vec<ValidationError>| {
            if !seen_objects.contains(name) {
                let e = ValidationError::UnknownName(name.to_string());
                if !errors.contains(&e) {
                    errors.push(e);
                }
            }
        };
        let mut hard_pairs = HashSet::new();
        let mut default_pairs = HashSet::new();
        for c in &self.constraints {
            known(&c.target, &mut errors);
            known(&c.reference, &mut errors);
            let pair = (c.target.clone(), c.reference.clone());
            if c.target == c.reference {
                errors.push(ValidationError::SelfConstraint(c.target.clone()));
            }
            let seen = if c.relation.is_default() {
                &mut default_pairs
            } else {
                &mut hard_pairs
            };
            if !seen.insert(pair.clone()) {
                errors.push(ValidationError::DuplicateConstraint(pair.0.clone(), pair.1.clone()));
            }
            match &c.relation {
                Relation::Disjunctive(ds) if ds.is_empty() => {
                    errors.push(ValidationError::EmptyRelation(pair.0.clone(), pair.1.clone()))
                }
                Relation::Disjunctive(ds) if ds.len() < 2 => {
                    errors.push(ValidationError::TooFewDisjuncts(pair.0.clone(), pair.1.clone()))
                }
                Relation::Disjunctive(ds) => {
                    let distinct: HashSet<_> = ds.iter().collect();
                    if distinct.len() != ds.len() {
                        errors.push(ValidationError::DuplicateDisjunct(pair.0.clone(), pair.1.clone()));
                    }
                }
                Relation::Basic(r) | Relation::Default(r) if r.is_empty() => {
                    errors.push(ValidationError::EmptyRelation(pair.0.clone(), pair.1.clone()))
                }
                _ => {}
            }
            if c.mandatory && c.relation.is_default() {
                errors.push(ValidationError::MandatoryDefault(pair.0, pair.1));
            }
        }
        for name in &self.ab_marks {
            known(name, &mut errors);
        }
        for (t, r) in &self.infer_requests {
            known(t, &mut errors);
            known(r, &mut errors);
            if t == r {
                errors.push(ValidationError::SelfConstraint(t.clone()));
            }
        }
        if let Some(g) = self.grid {
            if g.dims().contains(&0) {
                errors.push(ValidationError::InvalidGrid(g));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { errors })
        }
    }
}

/// Returns the network unchanged when every invariant holds.
pub fn validate_network(raw: Network) -> Result<Network, ValidationReport> {
    raw.validate().map(|()| raw)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("more than one constraint of the same kind on ({0}, {1})")]
    DuplicateConstraint(String, String),
    #[error("constraint relates `{0}` to itself")]
    SelfConstraint(String),
    #[error("undeclared object `{0}`")]
    UnknownName(String),
    #[error("repeated disjunct in the constraint on ({0}, {1})")]
    DuplicateDisjunct(String, String),
    #[error("empty relation on ({0}, {1})")]
    EmptyRelation(String, String),
    #[error("disjunctive constraint on ({0}, {1}) needs at least two disjuncts")]
    TooFewDisjuncts(String, String),
    #[error("object `{0}` declared twice")]
    DuplicateObject(String),
    #[error("default constraint on ({0}, {1}) cannot be mandatory")]
    MandatoryDefault(String, String),
    #[error("grid {0} has a zero dimension")]
    InvalidGrid(GridSpec),
}

/// Every invariant violation found in a network.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.errors.iter().map(|e| e.to_string()).collect();
        write!(f, "invalid network: {}", msgs.join("; "))
    }
}
