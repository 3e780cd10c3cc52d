use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::numeric::gauss_legendre_unit;

const SUP_TOLERANCE: f64 = 1e-12;

/// A nonnegative function `g` on `[0, 1]` used by product-form graphons
/// `g(u) g(v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeFunction {
    /// `g(u) = scale * u^(beta - 1)`, `beta >= 1`.
    Power { scale: f64, beta: f64 },
    /// Linear interpolation of `values` on the uniform grid `k / (len - 1)`.
    Tabulated { values: Vec<f64> },
}

impl DegreeFunction {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            DegreeFunction::Power { scale, beta } => {
                if *beta == 1.0 {
                    *scale
                } else {
                    scale * u.powf(beta - 1.0)
                }
            }
            DegreeFunction::Tabulated { values } => {
                let last = values.len() - 1;
                let x = u.clamp(0.0, 1.0) * last as f64;
                let k = (x.floor() as usize).min(last - 1);
                let t = x - k as f64;
                values[k] * (1.0 - t) + values[k + 1] * t
            }
        }
    }

    /// Points of `[0, 1]` where `g` may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            DegreeFunction::Power { .. } => vec![0.0, 1.0],
            DegreeFunction::Tabulated { values } => {
                let last = (values.len() - 1) as f64;
                (0..values.len()).map(|k| k as f64 / last).collect()
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            DegreeFunction::Power { scale, .. } => *scale,
            DegreeFunction::Tabulated { values } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Sup of `g` over `[a, b]`.
    pub fn sup_on(&self, a: f64, b: f64) -> f64 {
        match self {
            DegreeFunction::Power { .. } => self.eval(b),
            DegreeFunction::Tabulated { values } => {
                let last = (values.len() - 1) as f64;
                let inner = values
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| {
                        let t = *k as f64 / last;
                        t > a && t < b
                    })
                    .map(|(_, &v)| v);
                inner.fold(self.eval(a).max(self.eval(b)), f64::max)
            }
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match self {
            DegreeFunction::Power { scale, beta } => {
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(ModelError::Invalid(format!("power scale {scale} must be >= 0")));
                }
                if !(beta.is_finite() && *beta >= 1.0) {
                    return Err(ModelError::Invalid(format!(
                        "power exponent beta = {beta} must be >= 1 for a bounded g"
                    )));
                }
            }
            DegreeFunction::Tabulated { values } => {
                if values.len() < 2 {
                    return Err(ModelError::Invalid("tabulated g needs >= 2 values".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(ModelError::Invalid("tabulated g must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// `int_a^b g(x)^k dx`.
    pub fn partial_moment(&self, k: u32, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            DegreeFunction::Power { scale, beta } => {
                let e = f64::from(k) * (beta - 1.0) + 1.0;
                scale.powi(k as i32) * (b.powf(e) - a.powf(e)) / e
            }
            DegreeFunction::Tabulated { values } => {
                // g^k is a polynomial of degree k on each segment; 4 nodes are
                // exact up to degree 7.
                let (nodes, weights) = gauss_legendre_unit(4);
                let last = values.len() - 1;
                let h = 1.0 / last as f64;
                let mut total = 0.0;
                for seg in 0..last {
                    let (s, e) = ((seg as f64 * h).max(a), ((seg + 1) as f64 * h).min(b));
                    if e <= s {
                        continue;
                    }
                    total += nodes
                        .iter()
                        .zip(&weights)
                        .map(|(x, w)| w * self.eval(s + (e - s) * x).powi(k as i32))
                        .sum::<f64>()
                        * (e - s);
                }
                total
            }
        }
    }

    /// `g_k = int_0^1 g(x)^k dx`.
    pub fn moment(&self, k: u32) -> f64 {
        self.partial_moment(k, 0.0, 1.0)
    }
}

/// Symmetric function `[0,1]^2 -> [0,1]` generating exchangeable graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Graphon {
    Constant {
        value: f64,
    },
    /// Stochastic block model: node `u` belongs to the first block `k` with
    /// `u < alpha_1 + ... + alpha_k`.
    BlockConstant {
        alpha: Vec<f64>,
        pi: Vec<Vec<f64>>,
    },
    /// Expected-degree model `g(u) g(v)`.
    Product {
        g: DegreeFunction,
    },
    /// Bilinear interpolation of an `m x m` row-major table sampled at
    /// `(k / (m-1), l / (m-1))`.
    Grid {
        m: usize,
        values: Vec<f64>,
    },
    Scaled {
        base: Box<Graphon>,
        factor: f64,
    },
    /// `base(u, v) g(u) g(v)`.
    DegreeCorrected {
        base: Box<Graphon>,
        g: DegreeFunction,
    },
}

/// Piecewise description `scale * pi[k(u)][k(v)] * g(u) g(v)` shared by every
/// variant except `Grid`; pattern probabilities have closed forms on it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockForm {
    /// Cumulative block boundaries, `0 = b_0 < ... < b_K = 1`.
    pub boundaries: Vec<f64>,
    pub pi: Vec<Vec<f64>>,
    pub g: Option<DegreeFunction>,
    pub scale: f64,
}

impl BlockForm {
    pub fn blocks(&self) -> usize {
        self.pi.len()
    }

    /// `int over block k of g(x)^d dx` (block width when `g` is absent).
    pub fn block_moment(&self, k: usize, d: u32) -> f64 {
        let (a, b) = (self.boundaries[k], self.boundaries[k + 1]);
        match &self.g {
            None => b - a,
            Some(g) => g.partial_moment(d, a, b),
        }
    }
}

impl Graphon {
    pub fn constant(value: f64) -> Result<Self, ModelError> {
        Graphon::Constant { value }.validated()
    }

    pub fn block_constant(alpha: Vec<f64>, pi: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        Graphon::BlockConstant { alpha, pi }.validated()
    }

    /// Two-parameter-per-block SBM with product connectivity `eta_k eta_l`.
    pub fn product_sbm(alpha: Vec<f64>, eta: &[f64]) -> Result<Self, ModelError> {
        let pi = eta.iter().map(|a| eta.iter().map(|b| a * b).collect()).collect();
        Self::block_constant(alpha, pi)
    }

    pub fn product(g: DegreeFunction) -> Result<Self, ModelError> {
        Graphon::Product { g }.validated()
    }

    pub fn grid(m: usize, values: Vec<f64>) -> Result<Self, ModelError> {
        Graphon::Grid { m, values }.validated()
    }

    pub fn scaled(base: Graphon, factor: f64) -> Result<Self, ModelError> {
        Graphon::Scaled {
            base: Box::new(base),
            factor,
        }
        .validated()
    }

    pub fn degree_corrected(base: Graphon, g: DegreeFunction) -> Result<Self, ModelError> {
        Graphon::DegreeCorrected {
            base: Box::new(base),
            g,
        }
        .validated()
    }

    /// Checks structure and that the whole function stays within `[0, 1]`.
    /// Intermediate factors of a composite may exceed one.
    pub fn validated(self) -> Result<Self, ModelError> {
        self.validate_structure()?;
        let sup = self.sup();
        if sup > 1.0 + SUP_TOLERANCE {
            return Err(ModelError::OutOfRange(sup));
        }
        Ok(self)
    }

    fn validate_structure(&self) -> Result<(), ModelError> {
        match self {
            Graphon::Constant { value } => {
                if !(0.0..=1.0).contains(value) {
                    return Err(ModelError::Invalid(format!("constant {value} outside [0,1]")));
                }
            }
            Graphon::BlockConstant { alpha, pi } => {
                let k = alpha.len();
                if k == 0 || alpha.iter().any(|&a| !(a > 0.0)) {
                    return Err(ModelError::Invalid("block weights must be positive".into()));
                }
                if (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(ModelError::Invalid("block weights must sum to 1".into()));
                }
                if pi.len() != k || pi.iter().any(|row| row.len() != k) {
                    return Err(ModelError::Invalid(format!("connectivity must be {k} x {k}")));
                }
                for a in 0..k {
                    for b in 0..k {
                        if !(0.0..=1.0).contains(&pi[a][b]) {
                            return Err(ModelError::Invalid(format!("pi[{a}][{b}] outside [0,1]")));
                        }
                        if (pi[a][b] - pi[b][a]).abs() > 1e-12 {
                            return Err(ModelError::Invalid("connectivity must be symmetric".into()));
                        }
                    }
                }
            }
            Graphon::Product { g } => g.validate()?,
            Graphon::Grid { m, values } => {
                if *m < 2 || values.len() != m * m {
                    return Err(ModelError::Invalid(format!(
                        "grid needs m >= 2 and m*m values (m = {m}, {} values)",
                        values.len()
                    )));
                }
                for a in 0..*m {
                    for b in 0..*m {
                        let v = values[a * m + b];
                        if !(0.0..=1.0).contains(&v) {
                            return Err(ModelError::Invalid(format!("grid value {v} outside [0,1]")));
                        }
                        if (v - values[b * m + a]).abs() > 1e-12 {
                            return Err(ModelError::Invalid("grid must be symmetric".into()));
                        }
                    }
                }
            }
            Graphon::Scaled { base, factor } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(ModelError::Invalid(format!("scale factor {factor} must be > 0")));
                }
                base.validate_structure()?;
            }
            Graphon::DegreeCorrected { base, g } => {
                g.validate()?;
                base.validate_structure()?;
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Graphon::Constant { value } => *value,
            Graphon::BlockConstant { alpha, pi } => pi[block_of(alpha, u)][block_of(alpha, v)],
            Graphon::Product { g } => g.eval(u) * g.eval(v),
            Graphon::Grid { m, values } => {
                let last = (m - 1) as f64;
                let (x, y) = (u.clamp(0.0, 1.0) * last, v.clamp(0.0, 1.0) * last);
                let (i, j) = ((x.floor() as usize).min(m - 2), (y.floor() as usize).min(m - 2));
                let (tx, ty) = (x - i as f64, y - j as f64);
                let at = |a: usize, b: usize| values[a * m + b];
                (1.0 - tx) * ((1.0 - ty) * at(i, j) + ty * at(i, j + 1))
                    + tx * ((1.0 - ty) * at(i + 1, j) + ty * at(i + 1, j + 1))
            }
            Graphon::Scaled { base, factor } => factor * base.eval(u, v),
            Graphon::DegreeCorrected { base, g } => base.eval(u, v) * g.eval(u) * g.eval(v),
        }
    }

    /// Supremum of the graphon; exact for every variant except a
    /// degree-corrected `Grid` base, where it is an upper bound.
    pub fn sup(&self) -> f64 {
        if let Some(form) = self.block_form() {
            let k = form.blocks();
            let g_sup: Vec<f64> = (0..k)
                .map(|b| match &form.g {
                    None => 1.0,
                    Some(g) => g.sup_on(form.boundaries[b], form.boundaries[b + 1]),
                })
                .collect();
            let mut best = 0.0f64;
            for a in 0..k {
                for b in 0..k {
                    best = best.max(form.pi[a][b] * g_sup[a] * g_sup[b]);
                }
            }
            return form.scale * best;
        }
        match self {
            Graphon::Grid { values, .. } => values.iter().copied().fold(0.0, f64::max),
            Graphon::Scaled { base, factor } => factor * base.sup(),
            Graphon::DegreeCorrected { base, g } => base.sup() * g.sup() * g.sup(),
            _ => unreachable!("block-form variants handled above"),
        }
    }

    /// Sorted points of `[0, 1]` splitting it into pieces on which the
    /// graphon is smooth in each argument.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            Graphon::Grid { m, .. } => (0..*m).map(|k| k as f64 / (m - 1) as f64).collect(),
            Graphon::Scaled { base, .. } => base.breakpoints(),
            Graphon::Product { g } => g.breakpoints(),
            Graphon::DegreeCorrected { base, g } => {
                let mut p = base.breakpoints();
                p.extend(g.breakpoints());
                p
            }
            _ => self.block_form().expect("block variant").boundaries,
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        pts
    }

    /// Block description, or `None` when a `Grid` is involved.
    pub fn block_form(&self) -> Option<BlockForm> {
        match self {
            Graphon::Constant { value } => Some(BlockForm {
                boundaries: vec![0.0, 1.0],
                pi: vec![vec![*value]],
                g: None,
                scale: 1.0,
            }),
            Graphon::BlockConstant { alpha, pi } => {
                let mut boundaries = Vec::with_capacity(alpha.len() + 1);
                boundaries.push(0.0);
                let mut acc = 0.0;
                for a in &alpha[..alpha.len() - 1] {
                    acc += a;
                    boundaries.push(acc);
                }
                boundaries.push(1.0);
                Some(BlockForm {
                    boundaries,
                    pi: pi.clone(),
                    g: None,
                    scale: 1.0,
                })
            }
            Graphon::Product { g } => Some(BlockForm {
                boundaries: vec![0.0, 1.0],
                pi: vec![vec![1.0]],
                g: Some(g.clone()),
                scale: 1.0,
            }),
            Graphon::Grid { .. } => None,
            Graphon::Scaled { base, factor } => base.block_form().map(|mut f| {
                f.scale *= factor;
                f
            }),
            Graphon::DegreeCorrected { base, g } => {
                let mut f = base.block_form()?;
                if f.g.is_some() {
                    return None;
                }
                f.g = Some(g.clone());
                Some(f)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let g: Graphon =
            serde_json::from_str(text).map_err(|e| ModelError::Parse { line: e.line(), msg: e.to_string() })?;
        g.validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graphon serializes")
    }
}

/// Block index selected by `u` through the inverse cdf of `alpha`.
pub fn block_of(alpha: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, a) in alpha.iter().enumerate() {
        acc += a;
        if u < acc {
            return k;
        }
    }
    alpha.len() - 1
}
