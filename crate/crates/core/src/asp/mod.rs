//! Compilation to the answer-set encoding, and decoding of external answers.

pub mod decode;
pub mod emit;

pub use decode::{decode_answer_set, DecodeError};
pub use emit::{check_syntax, emit_facts, emit_program, listing_tile_order, Mode, ObjectNumbering, SyntaxIssue};
