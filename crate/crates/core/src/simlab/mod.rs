//! Simulation laboratory: designs, Monte-Carlo size and power, sparse-regime
//! normality diagnostics and CSV reports.
//!
//! Every replicate draws from its own stream derived from the master seed,
//! the study, the cell and the replicate index; replicates run in parallel
//! and are reduced in index order, so results do not depend on the thread
//! count.

mod design;
mod report;
mod studies;

pub use design::{
    build_eg_design, build_her_design, build_her_design_on, calibrate_intercept, draw_node_covariates,
    edge_covariates, eg_base_graphon, EgDesign, HerDesign, HerDesignSpec, EG_ALPHA, EG_ETA, HER_COVARIATES,
};
pub use report::{
    write_power_csv, write_qq_csv, write_size_csv, POWER_HEADER, QQ_HEADER, SIZE_HEADER,
};
pub use studies::{
    ks_distance, linspace, qq_pairs, run_power_study, run_qq_study, run_size_equivalence, PowerDesign, PowerRow,
    PowerStudy, QqCell, QqStudy, SizeRow, SparseKind, SparseScenario,
};

use thiserror::Error;

use crate::gof::TestError;
use crate::models::ModelError;
use crate::patterns::PatternError;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("design error: {0}")]
    Design(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Test(#[from] TestError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}
