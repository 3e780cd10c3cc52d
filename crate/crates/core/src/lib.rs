//! Degree-based goodness-of-fit tests for heterogeneous (independent-edge)
//! and exchangeable (graphon) random graph models.

pub mod gof;
pub mod graph;
pub mod eg_moments;
pub mod her_moments;
pub mod models;
pub mod numeric;
pub mod patterns;
pub mod simlab;
