//! Samplers. Every sampler draws exactly one uniform per unordered pair, in
//! lexicographic pair order, so a given [`RngSpec`] fixes the whole graph.

use rand::Rng;

use super::{Graphon, ModelError, ProbMatrix, RngSpec};
use crate::graph::{pair_count, pairs, Graph};

pub fn sample_her(p: &ProbMatrix, spec: RngSpec) -> Graph {
    let mut rng = spec.rng();
    Graph::from_pair_flags(p.n(), p.upper().iter().map(|&prob| rng.random::<f64>() < prob))
}

/// Degrees of the graph [`sample_her`] would return for the same stream,
/// without materializing the adjacency.
pub fn sample_her_degrees(p: &ProbMatrix, spec: RngSpec) -> Vec<u32> {
    let mut rng = spec.rng();
    let mut deg = vec![0u32; p.n()];
    for ((i, j), &prob) in pairs(p.n()).zip(p.upper()) {
        if rng.random::<f64>() < prob {
            deg[i] += 1;
            deg[j] += 1;
        }
    }
    deg
}

fn draw_latent<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Samples `n` latent positions and then the edges given them.
pub fn sample_eg(phi: &Graphon, n: usize, spec: RngSpec) -> (Graph, Vec<f64>) {
    let mut rng = spec.rng();
    let u = draw_latent(n, &mut rng);
    let flags: Vec<bool> = pairs(n)
        .map(|(i, j)| rng.random::<f64>() < phi.eval(u[i], u[j]))
        .collect();
    (Graph::from_pair_flags(n, flags), u)
}

/// Degrees of the graph [`sample_eg`] would return for the same stream.
pub fn sample_eg_degrees(phi: &Graphon, n: usize, spec: RngSpec) -> Vec<u32> {
    let mut rng = spec.rng();
    let u = draw_latent(n, &mut rng);
    let mut deg = vec![0u32; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < phi.eval(u[i], u[j]) {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }
    deg
}

/// `p_ij = phi(u_i, u_j)`: the independent-edge model obtained by fixing the
/// latent positions.
pub fn conditional_matrix(phi: &Graphon, u: &[f64]) -> Result<ProbMatrix, ModelError> {
    if let Some(bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(ModelError::Invalid(format!("latent position {bad} outside [0,1]")));
    }
    ProbMatrix::from_fn(u.len(), |i, j| phi.eval(u[i], u[j]))
}

fn vanish_factor(a: f64, n: usize) -> Result<f64, ModelError> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(ModelError::Invalid(format!("sparsity exponent {a} must be >= 0")));
    }
    Ok((n as f64).powf(-a))
}

/// Multiplies every probability by `n^(-a)`.
pub fn sparsify_vanish(p: &ProbMatrix, a: f64, n: usize) -> Result<ProbMatrix, ModelError> {
    let f = vanish_factor(a, n)?;
    if f == 1.0 {
        return Ok(p.clone());
    }
    p.map(|x| x * f)
}

/// Graphon counterpart of [`sparsify_vanish`]: wraps in `Scaled`.
pub fn sparsify_vanish_graphon(phi: &Graphon, a: f64, n: usize) -> Result<Graphon, ModelError> {
    let f = vanish_factor(a, n)?;
    if f == 1.0 {
        return Ok(phi.clone());
    }
    Graphon::scaled(phi.clone(), f)
}

/// Keeps each pair's probability with chance `n^(-b)` and zeroes it
/// otherwise; one draw per unordered pair.
pub fn sparsify_thin(p: &ProbMatrix, b: f64, n: usize, spec: RngSpec) -> Result<ProbMatrix, ModelError> {
    let keep = vanish_factor(b, n)?;
    let mut rng = spec.rng();
    let upper = p
        .upper()
        .iter()
        .map(|&x| if rng.random::<f64>() < keep { x } else { 0.0 })
        .collect::<Vec<_>>();
    debug_assert_eq!(upper.len(), pair_count(p.n()));
    ProbMatrix::from_upper(p.n(), upper)
}
