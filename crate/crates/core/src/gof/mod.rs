//! One-sided z-tests on the degree mean square and degree variance
//! statistics, their asymptotic power, and the logistic null-model fitter.

mod logistic;

pub use logistic::{fit_logistic_null, CovariateTable, FitError, LogisticNull};

use std::collections::HashMap;
use std::sync::RwLock;

use thiserror::Error;

use crate::eg_moments::{w_phi_moments, w_phi_statistic, EgMomentError, EgMomentInputs};
use crate::graph::Graph;
use crate::her_moments::{
    v_moments_er, v_moments_her, v_statistic, w_moments_her, w_moments_null, w_statistic, HerContext, MomentError,
    Moments,
};
use crate::models::{Graphon, ProbMatrix};
use crate::numeric::{normal_quantile, normal_sf};
use crate::patterns::{phi_vector, PatternError, PhiMethod, PhiVector};

#[derive(Debug, Error, PartialEq)]
pub enum TestError {
    #[error("level alpha = {0} must lie in (0, 1)")]
    Alpha(f64),
    #[error("degenerate null: {0}")]
    DegenerateNull(String),
    #[error("degenerate alternative: {0}")]
    DegenerateAlternative(String),
    #[error("dimension mismatch: {0} vs {1} nodes")]
    Dimension(usize, usize),
    #[error("need at least {needed} nodes, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    EgMoment(#[from] EgMomentError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

impl TestResult {
    pub fn new(statistic: f64, null: Moments, alpha: f64) -> Result<Self, TestError> {
        check_alpha(alpha)?;
        let sd = null.sd();
        if !(sd > 0.0) {
            return Err(TestError::DegenerateNull(format!("null standard deviation is {sd}")));
        }
        let z = (statistic - null.mean) / sd;
        Ok(Self {
            statistic,
            null_mean: null.mean,
            null_sd: sd,
            z,
            p_value: normal_sf(z),
            alpha,
            reject: statistic > null.mean + critical_value(alpha) * sd,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<(), TestError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(TestError::Alpha(alpha))
    }
}

/// `t_alpha`, the upper `alpha` quantile of the standard normal.
pub fn critical_value(alpha: f64) -> f64 {
    normal_quantile(1.0 - alpha)
}

/// Degree mean square test of an independent-edge null `p0`.
pub fn test_her(g: &Graph, p0: &ProbMatrix, alpha: f64) -> Result<TestResult, TestError> {
    if g.n() != p0.n() {
        return Err(TestError::Dimension(g.n(), p0.n()));
    }
    TestResult::new(w_statistic(g, p0)?, w_moments_null(p0), alpha)
}

/// Edge density `2 M1 / (n (n-1))`.
pub fn edge_density(g: &Graph) -> f64 {
    let n = g.n() as f64;
    2.0 * g.edge_count() as f64 / (n * (n - 1.0))
}

/// Degree variance test of the Erdos-Renyi null with plug-in density.
pub fn test_dv_er(g: &Graph, alpha: f64) -> Result<TestResult, TestError> {
    if g.n() < 3 {
        return Err(TestError::TooSmall { needed: 3, got: g.n() });
    }
    let p_hat = edge_density(g);
    if p_hat <= 0.0 || p_hat >= 1.0 {
        return Err(TestError::DegenerateNull(format!("edge density {p_hat}")));
    }
    TestResult::new(v_statistic(g), v_moments_er(g.n(), p_hat), alpha)
}

/// Null graphon with its pattern probabilities, and null moments memoized
/// per graph size.
#[derive(Debug)]
pub struct EgNull {
    graphon: Graphon,
    phi: PhiVector,
    cache: RwLock<HashMap<usize, Moments>>,
}

impl EgNull {
    pub fn new(graphon: Graphon) -> Result<Self, TestError> {
        let (phi, _) = phi_vector(&graphon, PhiMethod::DEFAULT_QUADRATURE)?;
        Ok(Self {
            graphon,
            phi,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn graphon(&self) -> &Graphon {
        &self.graphon
    }

    pub fn phi(&self) -> &PhiVector {
        &self.phi
    }

    /// Marginal edge probability `phi_1^0`.
    pub fn phi1(&self) -> f64 {
        self.phi.get(1)
    }

    pub fn moments(&self, n: usize) -> Result<Moments, TestError> {
        if let Some(m) = self.cache.read().expect("cache lock").get(&n) {
            return Ok(*m);
        }
        let m = w_phi_moments(&EgMomentInputs::new(n, self.phi1(), self.phi)?)?;
        self.cache.write().expect("cache lock").insert(n, m);
        Ok(m)
    }

    pub fn test(&self, g: &Graph, alpha: f64) -> Result<TestResult, TestError> {
        check_alpha(alpha)?;
        TestResult::new(w_phi_statistic(g, self.phi1()), self.moments(g.n())?, alpha)
    }

    /// Moments of the statistic built on this null when the graph follows a
    /// model with pattern probabilities `truth`.
    pub fn moments_under(&self, truth: &PhiVector, n: usize) -> Result<Moments, TestError> {
        Ok(w_phi_moments(&EgMomentInputs::new(n, self.phi1(), *truth)?)?)
    }

    pub fn power(&self, truth: &PhiVector, n: usize, alpha: f64) -> Result<f64, TestError> {
        power_formula(self.moments(n)?, self.moments_under(truth, n)?, alpha)
    }
}

/// Degree mean square test of an exchangeable null graphon.
pub fn test_eg(g: &Graph, phi0: &Graphon, alpha: f64) -> Result<TestResult, TestError> {
    EgNull::new(phi0.clone())?.test(g, alpha)
}

/// `1 - Phi((E0 + t_alpha S0 - E1) / S1)`.
pub fn power_formula(null: Moments, alt: Moments, alpha: f64) -> Result<f64, TestError> {
    check_alpha(alpha)?;
    if !(null.sd() > 0.0) {
        return Err(TestError::DegenerateNull(format!("null standard deviation is {}", null.sd())));
    }
    if !(alt.sd() > 0.0) {
        return Err(TestError::DegenerateAlternative(format!(
            "standard deviation under the alternative is {}",
            alt.sd()
        )));
    }
    Ok(normal_sf((null.mean + critical_value(alpha) * null.sd() - alt.mean) / alt.sd()))
}

pub fn power_her(p0: &ProbMatrix, p: &ProbMatrix, alpha: f64) -> Result<f64, TestError> {
    if p.n() != p0.n() {
        return Err(TestError::Dimension(p.n(), p0.n()));
    }
    let alt = w_moments_her(&HerContext::new(p.clone(), p0.clone())?);
    power_formula(w_moments_null(p0), alt, alpha)
}

/// Power of the plug-in degree variance test when edges follow `p`.
pub fn power_dv(p: &ProbMatrix, alpha: f64) -> Result<f64, TestError> {
    if p.n() < 3 {
        return Err(TestError::TooSmall { needed: 3, got: p.n() });
    }
    power_formula(v_moments_er(p.n(), p.mean()), v_moments_her(p), alpha)
}

pub fn power_eg(phi0: &Graphon, phi: &Graphon, n: usize, alpha: f64) -> Result<f64, TestError> {
    let null = EgNull::new(phi0.clone())?;
    let (truth, _) = phi_vector(phi, PhiMethod::DEFAULT_QUADRATURE)?;
    null.power(&truth, n, alpha)
}
