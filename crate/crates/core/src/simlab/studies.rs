use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use super::design::{build_eg_design, build_her_design_on, draw_node_covariates, HerDesignSpec};
use super::SimError;
use crate::gof::{critical_value, power_her, EgNull, TestResult};
use crate::her_moments::{v_moments_er, v_statistic_from_degrees, w_moments_null, w_statistic_from_degrees};
use crate::models::{
    sample_eg_degrees, sample_her_degrees, sparsify_thin, sparsify_vanish, ProbMatrix, RngSpec,
};
use crate::numeric::{normal_cdf, normal_quantile};
use crate::patterns::{phi_vector, PhiMethod};

const TAG_POWER_HER: u64 = 1;
const TAG_POWER_EG: u64 = 2;
const TAG_QQ: u64 = 3;
const TAG_SIZE: u64 = 4;
const KEY_DESIGN: u64 = 0;
const KEY_REPLICATE: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerDesign {
    /// Covariate model with a dropped covariate; degree mean square test.
    Her,
    /// Degree-corrected two-block graphon; exchangeable test.
    Eg,
}

impl fmt::Display for PowerDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerDesign::Her => "her",
            PowerDesign::Eg => "eg",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudy {
    pub design: PowerDesign,
    pub n_grid: Vec<usize>,
    pub rho_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// `count` evenly spaced points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

impl PowerStudy {
    /// Desk-scale defaults: `n` in {32, 100, 316, 1000}, densities
    /// `10^-1.5` and `10^-1`, 11 departures, 500 replicates.
    pub fn desk_scale(design: PowerDesign, seed: u64) -> Self {
        let beta_grid = match design {
            PowerDesign::Her => linspace(0.0, 2.0, 11),
            PowerDesign::Eg => linspace(1.0, 2.0, 11),
        };
        Self {
            design,
            n_grid: vec![32, 100, 316, 1000],
            rho_grid: vec![10f64.powf(-1.5), 0.1],
            beta_grid,
            replicates: 500,
            alpha: 0.05,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRow {
    pub n: usize,
    pub rho_star: f64,
    pub beta: f64,
    pub power_analytic: f64,
    pub power_empirical: f64,
    /// `1.96 sqrt(pi (1 - pi) / R)` around the analytic power `pi`.
    pub ci_halfwidth: f64,
    pub replicates: usize,
}

fn rejection_rate(rejections: &[bool]) -> f64 {
    rejections.iter().filter(|&&r| r).count() as f64 / rejections.len() as f64
}

fn row(n: usize, rho_star: f64, beta: f64, analytic: f64, rejections: &[bool]) -> PowerRow {
    let r = rejections.len();
    PowerRow {
        n,
        rho_star,
        beta,
        power_analytic: analytic,
        power_empirical: rejection_rate(rejections),
        ci_halfwidth: 1.96 * (analytic * (1.0 - analytic) / r as f64).sqrt(),
        replicates: r,
    }
}

/// Analytic and empirical power on every `(n, rho_star, beta)` cell, rows in
/// grid order (`n` outermost, `beta` innermost).
pub fn run_power_study(study: &PowerStudy) -> Result<Vec<PowerRow>, SimError> {
    if study.replicates == 0 {
        return Err(SimError::Precondition("need at least one replicate".into()));
    }
    if !(study.alpha > 0.0 && study.alpha < 1.0) {
        return Err(SimError::Precondition(format!("alpha = {} outside (0, 1)", study.alpha)));
    }
    let master = RngSpec::new(study.seed, 0);
    let t_alpha = critical_value(study.alpha);
    let mut rows = Vec::new();
    match study.design {
        PowerDesign::Her => {
            for &n in &study.n_grid {
                for &rho in &study.rho_grid {
                    // One covariate draw per (n, rho): curves in beta share it.
                    let nodes = draw_node_covariates(
                        n,
                        master.derive_all(&[TAG_POWER_HER, KEY_DESIGN, n as u64, rho.to_bits()]),
                    );
                    for &beta in &study.beta_grid {
                        let d = build_her_design_on(HerDesignSpec { n, rho_star: rho, beta }, nodes.clone())?;
                        let null = w_moments_null(&d.p0);
                        let threshold = null.mean + t_alpha * null.sd();
                        let analytic = power_her(&d.p0, &d.p, study.alpha)?;
                        let expected = d.p0.row_sums();
                        let cell = master.derive_all(&[TAG_POWER_HER, KEY_REPLICATE, n as u64, rho.to_bits(), beta.to_bits()]);
                        let rejections: Vec<bool> = (0..study.replicates)
                            .into_par_iter()
                            .map(|rep| {
                                let deg = sample_her_degrees(&d.p, cell.derive(rep as u64));
                                w_statistic_from_degrees(&deg, &expected) > threshold
                            })
                            .collect();
                        rows.push(row(n, rho, beta, analytic, &rejections));
                    }
                }
            }
        }
        PowerDesign::Eg => {
            let mut nulls: HashMap<u64, EgNull> = HashMap::new();
            for &n in &study.n_grid {
                for &rho in &study.rho_grid {
                    for &beta in &study.beta_grid {
                        let d = build_eg_design(rho, beta)?;
                        if !nulls.contains_key(&rho.to_bits()) {
                            nulls.insert(rho.to_bits(), EgNull::new(d.phi0.clone())?);
                        }
                        let null = &nulls[&rho.to_bits()];
                        let (truth, _) = phi_vector(&d.phi, PhiMethod::DEFAULT_QUADRATURE)?;
                        let analytic = null.power(&truth, n, study.alpha)?;
                        let m0 = null.moments(n)?;
                        let threshold = m0.mean + t_alpha * m0.sd();
                        let mu = (n as f64 - 1.0) * null.phi1();
                        let expected = vec![mu; n];
                        let cell = master.derive_all(&[TAG_POWER_EG, KEY_REPLICATE, n as u64, rho.to_bits(), beta.to_bits()]);
                        let rejections: Vec<bool> = (0..study.replicates)
                            .into_par_iter()
                            .map(|rep| {
                                let deg = sample_eg_degrees(&d.phi, n, cell.derive(rep as u64));
                                w_statistic_from_degrees(&deg, &expected) > threshold
                            })
                            .collect();
                        rows.push(row(n, rho, beta, analytic, &rejections));
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseKind {
    /// Every probability scaled by `n^-a`.
    Vanish,
    /// Each pair kept with probability `n^-b`, zeroed otherwise.
    Thin,
}

impl fmt::Display for SparseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SparseKind::Vanish => "vanish",
            SparseKind::Thin => "thin",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseScenario {
    pub kind: SparseKind,
    pub exponent: f64,
    /// Density of the base model before sparsification.
    pub rho_star: f64,
}

impl SparseScenario {
    pub fn vanish(a: f64) -> Self {
        Self {
            kind: SparseKind::Vanish,
            exponent: a,
            rho_star: 0.1,
        }
    }

    pub fn thin(b: f64) -> Self {
        Self {
            kind: SparseKind::Thin,
            exponent: b,
            rho_star: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QqStudy {
    pub scenarios: Vec<SparseScenario>,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
}

/// Standardized statistics of one `(n, scenario)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QqCell {
    pub n: usize,
    pub scenario: SparseScenario,
    /// Sorted standardized statistics.
    pub empirical_q: Vec<f64>,
    /// Standard normal quantiles at `(k - 0.5) / R`.
    pub normal_q: Vec<f64>,
    pub ks_distance: f64,
}

/// Kolmogorov-Smirnov distance between the empirical law of sorted `z` and
/// the standard normal.
pub fn ks_distance(sorted: &[f64]) -> f64 {
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let f = normal_cdf(z);
            ((k + 1) as f64 / r - f).max(f - k as f64 / r)
        })
        .fold(0.0, f64::max)
}

/// Sorts `z` and pairs it with standard normal quantiles at `(k - 0.5) / R`.
pub fn qq_pairs(mut z: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    z.sort_by(f64::total_cmp);
    let r = z.len() as f64;
    let q = (1..=z.len()).map(|k| normal_quantile((k as f64 - 0.5) / r)).collect();
    (z, q)
}

/// Standardized degree mean square statistics under sparsified versions of
/// the covariate design's null model, which is built once per `n`.
pub fn run_qq_study(study: &QqStudy) -> Result<Vec<QqCell>, SimError> {
    if study.replicates < 2 {
        return Err(SimError::Precondition("need at least two replicates".into()));
    }
    let master = RngSpec::new(study.seed, 0);
    let mut cells = Vec::new();
    for &n in &study.n_grid {
        let mut bases: HashMap<u64, ProbMatrix> = HashMap::new();
        for (s, scenario) in study.scenarios.iter().enumerate() {
            let key = scenario.rho_star.to_bits();
            if !bases.contains_key(&key) {
                let nodes = draw_node_covariates(n, master.derive_all(&[TAG_QQ, KEY_DESIGN, n as u64, key]));
                let d = build_her_design_on(
                    HerDesignSpec {
                        n,
                        rho_star: scenario.rho_star,
                        beta: 0.0,
                    },
                    nodes,
                )?;
                bases.insert(key, d.p0);
            }
            let base = &bases[&key];
            let cell = master.derive_all(&[TAG_QQ, KEY_REPLICATE, n as u64, s as u64, scenario.exponent.to_bits()]);
            let p = match scenario.kind {
                SparseKind::Vanish => sparsify_vanish(base, scenario.exponent, n)?,
                // Thinning is drawn once per cell, then held fixed.
                SparseKind::Thin => sparsify_thin(base, scenario.exponent, n, cell.derive(u64::MAX))?,
            };
            let null = w_moments_null(&p);
            if !(null.sd() > 0.0) {
                return Err(SimError::Test(crate::gof::TestError::DegenerateNull(format!(
                    "n = {n}, {} exponent {}",
                    scenario.kind, scenario.exponent
                ))));
            }
            let expected = p.row_sums();
            let z: Vec<f64> = (0..study.replicates)
                .into_par_iter()
                .map(|rep| {
                    let deg = sample_her_degrees(&p, cell.derive(rep as u64));
                    (w_statistic_from_degrees(&deg, &expected) - null.mean) / null.sd()
                })
                .collect();
            let (empirical_q, normal_q) = qq_pairs(z);
            let ks = ks_distance(&empirical_q);
            cells.push(QqCell {
                n,
                scenario: *scenario,
                empirical_q,
                normal_q,
                ks_distance: ks,
            });
        }
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeRow {
    pub n: usize,
    pub p: f64,
    /// Mean over replicates of `|z_V - z_W|`.
    pub mean_abs_gap: f64,
    pub size_v: f64,
    pub size_w: f64,
    pub replicates: usize,
}

/// Under `ER(p)`: the plug-in degree variance z-score against the known-`p`
/// degree mean square z-score, replicate by replicate.
pub fn run_size_equivalence(
    n_grid: &[usize],
    p: f64,
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<SizeRow>, SimError> {
    if replicates == 0 {
        return Err(SimError::Precondition("need at least one replicate".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(SimError::Precondition(format!("p = {p} outside (0, 1)")));
    }
    let master = RngSpec::new(seed, 0);
    let mut rows = Vec::new();
    for &n in n_grid {
        if n < 3 {
            return Err(SimError::Precondition(format!("n = {n} below 3")));
        }
        let matrix = ProbMatrix::constant(n, p)?;
        let w_null = w_moments_null(&matrix);
        let expected = vec![(n as f64 - 1.0) * p; n];
        let cell = master.derive_all(&[TAG_SIZE, n as u64, p.to_bits()]);
        let pairs: Vec<Result<(TestResult, TestResult), SimError>> = (0..replicates)
            .into_par_iter()
            .map(|rep| {
                let deg = sample_her_degrees(&matrix, cell.derive(rep as u64));
                let w = TestResult::new(w_statistic_from_degrees(&deg, &expected), w_null, alpha)?;
                let total: u64 = deg.iter().map(|&d| u64::from(d)).sum();
                let p_hat = total as f64 / (n as f64 * (n as f64 - 1.0));
                let v = TestResult::new(v_statistic_from_degrees(&deg), v_moments_er(n, p_hat), alpha)?;
                Ok((v, w))
            })
            .collect();
        let pairs = pairs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let r = pairs.len() as f64;
        rows.push(SizeRow {
            n,
            p,
            mean_abs_gap: pairs.iter().map(|(v, w)| (v.z - w.z).abs()).sum::<f64>() / r,
            size_v: pairs.iter().filter(|(v, _)| v.reject).count() as f64 / r,
            size_w: pairs.iter().filter(|(_, w)| w.reject).count() as f64 / r,
            replicates,
        });
    }
    Ok(rows)
}
