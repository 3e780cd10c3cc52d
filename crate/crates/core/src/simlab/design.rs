//! The two simulation designs: a heterogeneous covariate model whose null
//! omits one covariate, and a two-block graphon contaminated by a degree
//! correction.

use rand_distr::{Distribution, StandardNormal};

use super::SimError;
use crate::gof::CovariateTable;
use crate::graph::pairs;
use crate::models::{DegreeFunction, Graphon, ProbMatrix, RngSpec};
use crate::numeric::csum;
use crate::patterns::phi_block_form;

/// Parameters of the covariate design. `d = 3` node covariates; the true
/// model weights the edge covariates by `(1, 1, beta)`, the null drops the
/// last one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HerDesignSpec {
    pub n: usize,
    pub rho_star: f64,
    pub beta: f64,
}

pub const HER_COVARIATES: usize = 3;

#[derive(Debug, Clone)]
pub struct HerDesign {
    pub spec: HerDesignSpec,
    pub node_covariates: Vec<[f64; HER_COVARIATES]>,
    /// `x_ij,k = sqrt(pi) |x_ik - x_jk| / 2`, mean 1 per component.
    pub edge_covariates: CovariateTable,
    pub intercept: f64,
    pub null_intercept: f64,
    pub p: ProbMatrix,
    pub p0: ProbMatrix,
}

impl HerDesign {
    /// True coefficients `(a, 1, 1, beta)` of the full logistic model.
    pub fn true_coefficients(&self) -> [f64; HER_COVARIATES + 1] {
        [self.intercept, 1.0, 1.0, self.spec.beta]
    }
}

/// Node covariates, standard normal, drawn from `rng`.
pub fn draw_node_covariates(n: usize, rng: RngSpec) -> Vec<[f64; HER_COVARIATES]> {
    let mut r = rng.rng();
    (0..n)
        .map(|_| std::array::from_fn(|_| StandardNormal.sample(&mut r)))
        .collect()
}

pub fn edge_covariates(nodes: &[[f64; HER_COVARIATES]]) -> CovariateTable {
    let c = std::f64::consts::PI.sqrt() / 2.0;
    CovariateTable::from_fn(nodes.len(), HER_COVARIATES, |i, j, row| {
        for k in 0..HER_COVARIATES {
            row[k] = c * (nodes[i][k] - nodes[j][k]).abs();
        }
    })
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Intercept `a` with `mean_ij logistic(a + s_ij) = target`, by bisection.
pub fn calibrate_intercept(scores: &[f64], target: f64) -> Result<f64, SimError> {
    if !(target > 0.0 && target < 1.0) || scores.is_empty() {
        return Err(SimError::Design(format!("target density {target} unreachable")));
    }
    let mean = |a: f64| csum(scores.iter().map(|&s| logistic(a + s))) / scores.len() as f64;
    let (mut lo, mut hi) = (-60.0, 60.0);
    if mean(lo) > target || mean(hi) < target {
        return Err(SimError::Design(format!("target density {target} unreachable")));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds the design on node covariates drawn from `rng`.
pub fn build_her_design(spec: HerDesignSpec, rng: RngSpec) -> Result<HerDesign, SimError> {
    build_her_design_on(spec, draw_node_covariates(spec.n, rng))
}

/// Builds the design on given node covariates.
pub fn build_her_design_on(spec: HerDesignSpec, nodes: Vec<[f64; HER_COVARIATES]>) -> Result<HerDesign, SimError> {
    if spec.n < 2 || nodes.len() != spec.n {
        return Err(SimError::Design(format!("need n >= 2 node covariate rows, got {}", nodes.len())));
    }
    if !(spec.beta >= 0.0 && spec.beta.is_finite()) {
        return Err(SimError::Design(format!("departure beta = {} must be >= 0", spec.beta)));
    }
    let x = edge_covariates(&nodes);
    let m = pairs(spec.n).count();
    let full: Vec<f64> = (0..m).map(|k| x.row(k)[0] + x.row(k)[1] + spec.beta * x.row(k)[2]).collect();
    let reduced: Vec<f64> = (0..m).map(|k| x.row(k)[0] + x.row(k)[1]).collect();
    let a = calibrate_intercept(&full, spec.rho_star)?;
    let a0 = calibrate_intercept(&reduced, spec.rho_star)?;
    let p = ProbMatrix::from_upper(spec.n, full.iter().map(|&s| logistic(a + s)).collect())?;
    let p0 = ProbMatrix::from_upper(spec.n, reduced.iter().map(|&s| logistic(a0 + s)).collect())?;
    Ok(HerDesign {
        spec,
        node_covariates: nodes,
        edge_covariates: x,
        intercept: a,
        null_intercept: a0,
        p,
        p0,
    })
}

pub const EG_ALPHA: [f64; 2] = [0.5, 0.5];
pub const EG_ETA: [f64; 2] = [0.4, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct EgDesign {
    pub rho_star: f64,
    pub beta: f64,
    /// Scale `rho` of the alternative.
    pub rho: f64,
    /// `rho * beta^2 u^(beta-1) v^(beta-1) * base(u, v)`.
    pub phi: Graphon,
    /// The base graphon rescaled to edge density `rho_star`; equals `phi`
    /// when `beta = 1`.
    pub phi0: Graphon,
}

/// Unscaled two-block product graphon `eta_k eta_l`.
pub fn eg_base_graphon() -> Graphon {
    Graphon::product_sbm(EG_ALPHA.to_vec(), &EG_ETA).expect("valid base graphon")
}

pub fn build_eg_design(rho_star: f64, beta: f64) -> Result<EgDesign, SimError> {
    if !(1.0..=2.0).contains(&beta) {
        return Err(SimError::Design(format!("beta = {beta} must lie in [1, 2]")));
    }
    if !(rho_star > 0.0 && rho_star <= 1.0) {
        return Err(SimError::Design(format!("rho_star = {rho_star} must lie in (0, 1]")));
    }
    let base = eg_base_graphon();
    let tilted = Graphon::degree_corrected(base.clone(), DegreeFunction::Power { scale: beta, beta })?;
    let unit_density = phi_block_form(&tilted.block_form().expect("block form"), 1)?;
    let rho = rho_star / unit_density;
    let phi = Graphon::scaled(tilted, rho).map_err(|e| SimError::Design(format!("alternative graphon: {e}")))?;
    let base_density = phi_block_form(&base.block_form().expect("block form"), 1)?;
    let phi0 = Graphon::scaled(base, rho_star / base_density)
        .map_err(|e| SimError::Design(format!("null graphon: {e}")))?;
    Ok(EgDesign {
        rho_star,
        beta,
        rho,
        phi,
        phi0,
    })
}
