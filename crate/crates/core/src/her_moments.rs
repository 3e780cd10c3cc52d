//! Degree statistics and their exact first two moments under independent-edge
//! models.
//!
//! Every sum over node triples or quadruples is reduced to row sums:
//!
//! * `sum_{i<j<k} (x_ij x_ik + x_ij x_jk + x_ik x_jk) = 1/2 sum_i (r_i^2 - sum_j x_ij^2)`
//!   where `r_i = sum_j x_ij` (pairs of edges sharing node `i`);
//! * the sum over node-disjoint edge pairs is `1/2 (S^2 - sum x^2)` minus the
//!   adjacent-pair sum above, `S = sum_{i<j} x_ij`.
//!
//! so every formula runs in `O(n^2)`.

use thiserror::Error;

use crate::graph::{pairs, Graph};
use crate::models::ProbMatrix;
use crate::numeric::{csum, CompensatedSum};

#[derive(Debug, Error, PartialEq)]
pub enum MomentError {
    #[error("dimension mismatch: graph has {graph} nodes, model has {model}")]
    Dimension { graph: usize, model: usize },
    #[error("assembled variance {0} is negative")]
    NegativeVariance(f64),
}

/// Mean and variance of a statistic under some model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn new(mean: f64, variance: f64) -> Self {
        debug_assert!(variance >= 0.0, "negative variance {variance}");
        Self { mean, variance }
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// True model `p`, null model `p0`, and the row sums the moment formulas
/// need.
#[derive(Debug, Clone)]
pub struct HerContext {
    p: ProbMatrix,
    p0: ProbMatrix,
    /// `Delta_i = sum_j (p_ij - p0_ij)`.
    delta_row: Vec<f64>,
    delta_sq_row: Vec<f64>,
    sigma2_row: Vec<f64>,
    sigma4_row: Vec<f64>,
}

impl HerContext {
    pub fn new(p: ProbMatrix, p0: ProbMatrix) -> Result<Self, MomentError> {
        if p.n() != p0.n() {
            return Err(MomentError::Dimension {
                graph: p.n(),
                model: p0.n(),
            });
        }
        let n = p.n();
        let mut acc = vec![[CompensatedSum::new(); 4]; n];
        for ((i, j), (&pij, &p0ij)) in pairs(n).zip(p.upper().iter().zip(p0.upper())) {
            let (d, s2) = (pij - p0ij, pij * (1.0 - pij));
            for node in [i, j] {
                acc[node][0].add(d);
                acc[node][1].add(d * d);
                acc[node][2].add(s2);
                acc[node][3].add(s2 * s2);
            }
        }
        let col = |c: usize| acc.iter().map(|a| a[c].value()).collect::<Vec<_>>();
        Ok(Self {
            delta_row: col(0),
            delta_sq_row: col(1),
            sigma2_row: col(2),
            sigma4_row: col(3),
            p,
            p0,
        })
    }

    /// Context for the null model itself (`p = p0`).
    pub fn null(p0: ProbMatrix) -> Self {
        Self::new(p0.clone(), p0).expect("same dimension")
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn p(&self) -> &ProbMatrix {
        &self.p
    }

    pub fn p0(&self) -> &ProbMatrix {
        &self.p0
    }

    pub fn delta_row(&self) -> &[f64] {
        &self.delta_row
    }
}

/// `(1/n) sum_i (D_i - mu0_i)^2` with `mu0_i` the expected degrees under the
/// null.
pub fn w_statistic(g: &Graph, p0: &ProbMatrix) -> Result<f64, MomentError> {
    if g.n() != p0.n() {
        return Err(MomentError::Dimension {
            graph: g.n(),
            model: p0.n(),
        });
    }
    let deg: Vec<u32> = g.degrees().into_iter().map(|d| d as u32).collect();
    Ok(w_statistic_from_degrees(&deg, &p0.row_sums()))
}

pub fn w_statistic_from_degrees(degrees: &[u32], expected: &[f64]) -> f64 {
    let n = degrees.len() as f64;
    csum(degrees.iter().zip(expected).map(|(&d, &mu)| {
        let x = f64::from(d) - mu;
        x * x
    })) / n
}

/// Empirical degree variance `(1/n) sum_i (D_i - mean D)^2`.
pub fn v_statistic(g: &Graph) -> f64 {
    let deg: Vec<u32> = g.degrees().into_iter().map(|d| d as u32).collect();
    v_statistic_from_degrees(&deg)
}

pub fn v_statistic_from_degrees(degrees: &[u32]) -> f64 {
    let n = degrees.len() as f64;
    let mean = degrees.iter().map(|&d| f64::from(d)).sum::<f64>() / n;
    csum(degrees.iter().map(|&d| {
        let x = f64::from(d) - mean;
        x * x
    })) / n
}

/// Moments of the degree mean square statistic built on `ctx.p0()` when the
/// graph follows `ctx.p()`.
pub fn w_moments_her(ctx: &HerContext) -> Moments {
    let n = ctx.n();
    if n < 2 {
        return Moments::new(0.0, 0.0);
    }
    let nf = n as f64;
    let (mut first, mut linear) = (CompensatedSum::new(), CompensatedSum::new());
    for ((i, j), (&p, &p0)) in pairs(n).zip(ctx.p.upper().iter().zip(ctx.p0.upper())) {
        let (s2, d) = (p * (1.0 - p), p - p0);
        first.add(s2 + d * d);
        let a = 1.0 - 2.0 * p + ctx.delta_row[i] + ctx.delta_row[j];
        linear.add(s2 * a * a);
    }
    let delta_wedges = 0.5 * csum((0..n).map(|i| ctx.delta_row[i].powi(2) - ctx.delta_sq_row[i]));
    let sigma_wedges = 0.5 * csum((0..n).map(|i| ctx.sigma2_row[i].powi(2) - ctx.sigma4_row[i]));
    Moments::new(
        2.0 / nf * (first.value() + delta_wedges),
        (4.0 / (nf * nf) * (linear.value() + sigma_wedges)).max(0.0),
    )
}

/// Null moments: [`w_moments_her`] with `p = p0`.
pub fn w_moments_null(p0: &ProbMatrix) -> Moments {
    w_moments_her(&HerContext::null(p0.clone()))
}

/// Exact moments of the degree variance under independent edges `p`.
///
/// Written in terms of the centred degrees `Y_i = d_i - dbar`, whose means
/// `E Y_i` sum to zero: `n V = sum_e sum_f G_ef A_e A_f` with
/// `G_ee = 2 - 4/n`, `G_ef = 1 - 4/n` for adjacent and `-4/n` for disjoint
/// edges. No large terms cancel, even for dense `p`.
pub fn v_moments_her(p: &ProbMatrix) -> Moments {
    let n = p.n();
    if n < 2 {
        return Moments::new(0.0, 0.0);
    }
    let nf = n as f64;
    let mut rows = vec![[CompensatedSum::new(); 3]; n];
    let (mut s2, mut q2) = (CompensatedSum::new(), CompensatedSum::new());
    for ((i, j), &x) in pairs(n).zip(p.upper()) {
        let sig = x * (1.0 - x);
        for node in [i, j] {
            rows[node][0].add(x);
            rows[node][1].add(sig);
            rows[node][2].add(sig * sig);
        }
        s2.add(sig);
        q2.add(sig * sig);
    }
    let r: Vec<[f64; 3]> = rows.iter().map(|a| [a[0].value(), a[1].value(), a[2].value()]).collect();
    let (s2, q2) = (s2.value(), q2.value());
    let dbar = csum(r.iter().map(|a| a[0])) / nf;
    let ey: Vec<f64> = r.iter().map(|a| a[0] - dbar).collect();

    let wedge_s = 0.5 * csum(r.iter().map(|a| a[1] * a[1] - a[2]));
    let disjoint_s = 0.5 * (s2 * s2 - q2) - wedge_s;

    let g_self = 2.0 - 4.0 / nf;
    let mean = (csum(ey.iter().map(|y| y * y)) + g_self * s2) / nf;

    let linear = csum(pairs(n).zip(p.upper()).map(|((i, j), &x)| {
        let b = 2.0 * (ey[i] + ey[j]) + g_self * (1.0 - 2.0 * x);
        x * (1.0 - x) * b * b
    }));
    let adjacent = 2.0 - 8.0 / nf;
    let disjoint = 8.0 / nf;
    let variance = (linear + adjacent * adjacent * wedge_s + disjoint * disjoint * disjoint_s) / (nf * nf);
    Moments::new(mean, variance.max(0.0))
}

/// Closed-form degree-variance moments under `ER(p)`.
pub fn v_moments_er(n: usize, p: f64) -> Moments {
    let nf = n as f64;
    let pq = p * (1.0 - p);
    Moments::new(
        (nf - 1.0) * (nf - 2.0) * pq / nf,
        (2.0 * (nf - 1.0) * (nf - 2.0).powi(2) * pq * (1.0 + (nf - 6.0) * pq) / nf.powi(3)).max(0.0),
    )
}
