//! Reasoning about cardinal-direction constraints between extended 3D
//! objects on a discrete grid, with defaults, explanations and inference.

pub mod asp;
pub mod fixtures;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod semantics;
pub mod solver;

pub use model::{
    validate_network, BasicRelation, Cell, Constraint, Cost, GridSpec, Level, Mbb, Network, Pair, Planar, Relation,
    SingleTile, Solution, SpatialObject, ValidationError, ValidationReport,
};
pub use parser::{parse_network, serialize_network, ParseError, SourceSpan};
pub use solver::{check, explain, grid_for, infer, ExplainOutcome, Explanation, InferOutcome, SolverConfig, Verdict};
