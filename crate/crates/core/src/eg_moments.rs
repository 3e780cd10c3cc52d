//! Moments of the degree mean square statistic `W_{Phi0}` under an
//! exchangeable graphon model.
//!
//! With `M1` the edge count and `M2` the wedge count,
//! `n W = n (n-1)^2 phi1_0^2 + 2 c M1 + 2 M2`, `c = 1 - 2 (n-1) phi1_0`,
//! so both moments of `W` follow from the first two joint moments of
//! `(M1, M2)`, which are polynomials in the pattern probabilities.

use thiserror::Error;
use twofloat::TwoFloat;

use crate::graph::Graph;
use crate::her_moments::Moments;
use crate::models::Graphon;
use crate::numeric::{csum, falling_factorial};
use crate::patterns::{phi_vector, PatternError, PhiMethod, PhiVector};

#[derive(Debug, Error, PartialEq)]
pub enum EgMomentError {
    #[error("invalid moment inputs: {0}")]
    Invalid(String),
    #[error("variance assemblies disagree: raw {raw}, expanded {expanded}")]
    Inconsistent { raw: f64, expanded: f64 },
    #[error("assembled variance {0} is negative")]
    NegativeVariance(f64),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgMomentInputs {
    n: usize,
    phi1_0: f64,
    phi: PhiVector,
}

impl EgMomentInputs {
    pub fn new(n: usize, phi1_0: f64, phi: PhiVector) -> Result<Self, EgMomentError> {
        if !(0.0..=1.0).contains(&phi1_0) {
            return Err(EgMomentError::Invalid(format!("phi1_0 = {phi1_0} outside [0,1]")));
        }
        if phi.0.iter().any(|x| !(-1e-12..=1.0 + 1e-12).contains(x)) {
            return Err(EgMomentError::Invalid("pattern probability outside [0,1]".into()));
        }
        if !phi.is_monotone() {
            return Err(EgMomentError::Invalid("need phi3 <= phi2 <= phi1".into()));
        }
        Ok(Self { n, phi1_0, phi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi1_0(&self) -> f64 {
        self.phi1_0
    }

    pub fn phi(&self) -> &PhiVector {
        &self.phi
    }

    /// `n_i = n (n-1) ... (n-i)`.
    pub fn falling(&self, i: u32) -> f64 {
        falling_factorial(self.n as u64, i)
    }

    /// `c = 1 - 2 (n-1) phi1_0`.
    pub fn c(&self) -> f64 {
        1.0 - 2.0 * (self.n as f64 - 1.0) * self.phi1_0
    }
}

/// `W_{Phi0} = (1/n) sum_i (D_i - (n-1) phi1_0)^2`.
pub fn w_phi_statistic(g: &Graph, phi1_0: f64) -> f64 {
    let n = g.n();
    if n == 0 {
        return 0.0;
    }
    let mu = (n as f64 - 1.0) * phi1_0;
    csum(g.degrees().into_iter().map(|d| (d as f64 - mu).powi(2))) / n as f64
}

/// Both sides of `n W = n (n-1)^2 phi1_0^2 + 2 c M1 + 2 M2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WDecomposition {
    pub m1: u64,
    pub m2: u64,
    pub direct: f64,
    pub combination: f64,
}

pub fn w_phi_decomposition(g: &Graph, phi1_0: f64) -> WDecomposition {
    let s = g.summarize();
    let nf = g.n() as f64;
    let c = 1.0 - 2.0 * (nf - 1.0) * phi1_0;
    WDecomposition {
        m1: s.m1,
        m2: s.m2,
        direct: nf * w_phi_statistic(g, phi1_0),
        combination: nf * (nf - 1.0).powi(2) * phi1_0 * phi1_0 + 2.0 * c * s.m1 as f64 + 2.0 * s.m2 as f64,
    }
}

/// The identity for rational `phi1_0 = num / den`, scaled by `den^2` so both
/// sides are integers: returns `(den^2 n W, den^2 (n (n-1)^2 phi1_0^2 + 2 c M1 + 2 M2))`.
pub fn w_phi_identity_scaled(g: &Graph, num: u64, den: u64) -> (i128, i128) {
    assert!(den > 0 && num <= den, "phi1_0 must be a fraction in [0,1]");
    let n = g.n() as i128;
    let (a, b) = (num as i128, den as i128);
    let lhs = g
        .degrees()
        .into_iter()
        .map(|d| {
            let x = b * d as i128 - (n - 1) * a;
            x * x
        })
        .sum();
    let s = g.summarize();
    let rhs = n * (n - 1) * (n - 1) * a * a + 2 * (b * b - 2 * (n - 1) * a * b) * s.m1 as i128 + 2 * b * b * s.m2 as i128;
    (lhs, rhs)
}

/// First and second joint moments of edge count `M1` and wedge count `M2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MMoments {
    pub em1: f64,
    pub em2: f64,
    pub em1_sq: f64,
    pub em1m2: f64,
    pub em2_sq: f64,
}

pub fn m_moments(inputs: &EgMomentInputs) -> MMoments {
    let [em1, em2, em1_sq, em1m2, em2_sq] = m_moments_dd(inputs).map(f64::from);
    MMoments {
        em1,
        em2,
        em1_sq,
        em1m2,
        em2_sq,
    }
}

// Double-double evaluation: the raw variance subtracts quantities of order
// n^6 to leave one of order n^3.
fn m_moments_dd(inputs: &EgMomentInputs) -> [TwoFloat; 5] {
    let f = |j| TwoFloat::from(inputs.phi.get(j));
    let n = inputs.n as u128;
    let nn = |i: u128| TwoFloat::from((0..=i).map(|k| n.saturating_sub(k)).product::<u128>());
    let (n1, n2, n3, n4, n5) = (nn(1), nn(2), nn(3), nn(4), nn(5));
    let (two, four, six) = (TwoFloat::from(2.0), TwoFloat::from(4.0), TwoFloat::from(6.0));
    [
        n1 / two * f(1),
        n2 / two * f(2),
        n1 / two * f(1) + n2 * f(2) + n3 / four * f(1) * f(1),
        n2 / two * (two * f(2) + f(3)) + n3 / two * (f(5) + two * f(6)) + n4 / four * f(1) * f(2),
        n2 / six * (TwoFloat::from(3.0) * f(2) + six * f(3))
            + n3 / two * (four * f(4) + two * f(5) + two * f(6) + f(7))
            + n4 / four * (four * f(8) + f(9) + four * f(10))
            + n5 / four * f(2) * f(2),
    ]
}

/// `E W = n^-1 { n (n-1)^2 phi1_0^2 + c n_1 phi_1 + n_2 phi_2 }`.
pub fn w_phi_mean(inputs: &EgMomentInputs) -> f64 {
    let nf = inputs.n as f64;
    if inputs.n == 0 {
        return 0.0;
    }
    (nf * (nf - 1.0).powi(2) * inputs.phi1_0.powi(2)
        + inputs.c() * inputs.falling(1) * inputs.phi.get(1)
        + inputs.falling(2) * inputs.phi.get(2))
        / nf
}

/// `(4 / n^2) Var(c M1 + M2)` from the raw moments, as
/// `E[(c M1 + M2)^2] - (E[c M1 + M2])^2`.
pub fn w_phi_variance_raw(inputs: &EgMomentInputs) -> f64 {
    if inputs.n == 0 {
        return 0.0;
    }
    let [em1, em2, em1_sq, em1m2, em2_sq] = m_moments_dd(inputs);
    let c = TwoFloat::from(1.0) - TwoFloat::new_mul(2.0 * (inputs.n as f64 - 1.0), inputs.phi1_0);
    let mean = c * em1 + em2;
    let second = c * c * em1_sq + TwoFloat::from(2.0) * c * em1m2 + em2_sq;
    let nf = inputs.n as f64;
    4.0 / (nf * nf) * f64::from(second - mean * mean)
}

/// The expanded display: `n^-2 {4 c^2 Var M1 + 8 c Cov(M1, M2) + 4 Var M2}`
/// with each centered moment written out, the leading products cancelled
/// through exact integer coefficients `n_3 - n_1^2`, `n_4 - n_1 n_2`,
/// `n_5 - n_2^2`.
pub fn w_phi_variance_expanded(inputs: &EgMomentInputs) -> f64 {
    expanded_with_magnitude(inputs).0
}

/// The expanded display together with the sum of absolute values of every
/// term it adds, which bounds its f64 rounding error up to a small multiple
/// of machine epsilon. In dense regimes the three blocks cancel from
/// `O(n^4)` to `O(n^2)`, so that bound can exceed a fixed relative tolerance.
fn expanded_with_magnitude(inputs: &EgMomentInputs) -> (f64, f64) {
    let n = inputs.n as i128;
    if n == 0 {
        return (0.0, 0.0);
    }
    let fall = |i: i128| (0..=i).map(|k| (n - k).max(0)).product::<i128>();
    let (n1, n2, n3, n4, n5) = (fall(1), fall(2), fall(3), fall(4), fall(5));
    let f = |j| inputs.phi.get(j);
    let (n1f, n2f, n3f, n4f) = (n1 as f64, n2 as f64, n3 as f64, n4 as f64);
    let with_mag = |terms: &[f64]| (csum(terms.iter().copied()), terms.iter().map(|t| t.abs()).sum::<f64>());
    let (var_m1, mag_m1) = with_mag(&[n1f / 2.0 * f(1), n2f * f(2), (n3 - n1 * n1) as f64 / 4.0 * f(1) * f(1)]);
    let (cov, mag_cov) = with_mag(&[
        n2f / 2.0 * (2.0 * f(2) + f(3)),
        n3f / 2.0 * (f(5) + 2.0 * f(6)),
        (n4 - n1 * n2) as f64 / 4.0 * f(1) * f(2),
    ]);
    let (var_m2, mag_m2) = with_mag(&[
        n2f / 6.0 * (3.0 * f(2) + 6.0 * f(3)),
        n3f / 2.0 * (4.0 * f(4) + 2.0 * f(5) + 2.0 * f(6) + f(7)),
        n4f / 4.0 * (4.0 * f(8) + f(9) + 4.0 * f(10)),
        (n5 - n2 * n2) as f64 / 4.0 * f(2) * f(2),
    ]);
    let c = inputs.c();
    let nf = inputs.n as f64;
    let value = csum([4.0 * c * c * var_m1, 8.0 * c * cov, 4.0 * var_m2]) / (nf * nf);
    let magnitude = (4.0 * c * c * mag_m1 + 8.0 * c.abs() * mag_cov + 4.0 * mag_m2) / (nf * nf);
    (value, magnitude)
}

pub fn w_phi_moments(inputs: &EgMomentInputs) -> Result<Moments, EgMomentError> {
    let raw = w_phi_variance_raw(inputs);
    let (expanded, magnitude) = expanded_with_magnitude(inputs);
    let scale = raw.abs().max(expanded.abs());
    let tol = (1e-9 * scale).max(64.0 * f64::EPSILON * magnitude).max(1e-12);
    if (raw - expanded).abs() > tol {
        return Err(EgMomentError::Inconsistent { raw, expanded });
    }
    if raw < -1e-9 {
        return Err(EgMomentError::NegativeVariance(raw));
    }
    Ok(Moments::new(w_phi_mean(inputs), raw.max(0.0)))
}

/// Null moments: pattern probabilities of `phi0` plugged in as the truth.
pub fn null_moments(phi0: &Graphon, n: usize) -> Result<Moments, EgMomentError> {
    let (phi, _) = phi_vector(phi0, PhiMethod::DEFAULT_QUADRATURE)?;
    w_phi_moments(&EgMomentInputs::new(n, phi.get(1), phi)?)
}
