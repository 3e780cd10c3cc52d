//! Edge-probability matrices, graphons, random streams and samplers.

mod graphon;
mod prob_matrix;
mod rng;
mod sampling;

pub use graphon::{block_of, BlockForm, DegreeFunction, Graphon};
pub use prob_matrix::ProbMatrix;
pub use rng::RngSpec;
pub use sampling::{
    conditional_matrix, sample_eg, sample_eg_degrees, sample_her, sample_her_degrees, sparsify_thin,
    sparsify_vanish, sparsify_vanish_graphon,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("graphon supremum {0} exceeds 1")]
    OutOfRange(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}
