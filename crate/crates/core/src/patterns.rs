//! The ten small patterns entering the second moment of the degree mean
//! square statistic, their probabilities `phi_j` under a graphon, and
//! empirical occurrence counts.
//!
//! `phi_j` is the non-induced probability: all edges of `R_j` are present on
//! `p_j` latent-uniform nodes, other pairs unconstrained.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::models::{BlockForm, Graphon, ModelError, RngSpec};
use crate::numeric::{csum, gauss_legendre_unit};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("unknown pattern R{0}; ids run from 1 to 10")]
    UnknownPattern(usize),
    #[error("pattern R{pattern} needs g moments up to order {needed}, only {supplied} supplied")]
    MissingMoment {
        pattern: usize,
        needed: usize,
        supplied: usize,
    },
    #[error("integration budget too small: {0}")]
    Budget(String),
    #[error("normalizing edge density must be positive")]
    ZeroDensity,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub id: usize,
    pub nodes: usize,
    pub edges: &'static [(usize, usize)],
    pub automorphisms: u64,
}

impl Pattern {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes];
        for &(a, b) in self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// Distinct labelled copies of the pattern on a fixed node set,
    /// `p_j! / |Aut(R_j)|`.
    pub fn labelled_copies(&self) -> u64 {
        (1..=self.nodes as u64).product::<u64>() / self.automorphisms
    }
}

pub const PATTERNS: [Pattern; 10] = [
    Pattern { id: 1, nodes: 2, edges: &[(0, 1)], automorphisms: 2 },
    Pattern { id: 2, nodes: 3, edges: &[(0, 1), (0, 2)], automorphisms: 2 },
    Pattern { id: 3, nodes: 3, edges: &[(0, 1), (0, 2), (1, 2)], automorphisms: 6 },
    Pattern { id: 4, nodes: 4, edges: &[(0, 1), (0, 2), (1, 2), (0, 3)], automorphisms: 2 },
    Pattern { id: 5, nodes: 4, edges: &[(0, 1), (0, 2), (0, 3)], automorphisms: 6 },
    Pattern { id: 6, nodes: 4, edges: &[(0, 1), (1, 2), (2, 3)], automorphisms: 2 },
    Pattern { id: 7, nodes: 4, edges: &[(0, 1), (1, 2), (2, 3), (3, 0)], automorphisms: 8 },
    Pattern { id: 8, nodes: 5, edges: &[(0, 1), (1, 2), (2, 3), (3, 4)], automorphisms: 2 },
    Pattern { id: 9, nodes: 5, edges: &[(0, 1), (0, 2), (0, 3), (0, 4)], automorphisms: 24 },
    Pattern { id: 10, nodes: 5, edges: &[(0, 1), (1, 2), (2, 3), (1, 4)], automorphisms: 2 },
];

pub fn pattern(id: usize) -> Result<&'static Pattern, PatternError> {
    if (1..=10).contains(&id) {
        Ok(&PATTERNS[id - 1])
    } else {
        Err(PatternError::UnknownPattern(id))
    }
}

/// `phi_1 .. phi_10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiVector(pub [f64; 10]);

impl PhiVector {
    pub fn get(&self, id: usize) -> f64 {
        self.0[id - 1]
    }

    /// `phi_3 <= phi_2 <= phi_1`, up to rounding.
    pub fn is_monotone(&self) -> bool {
        let tol = 1e-12;
        self.get(3) <= self.get(2) + tol && self.get(2) <= self.get(1) + tol
    }

    pub fn to_csv_row(&self) -> String {
        self.0
            .iter()
            .map(|&x| crate::numeric::fmt_sig10(x))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Exact `phi_j` for a graphon in block form:
/// `scale^|E| sum_{k} prod_{edges} pi[k_u][k_v] prod_u int_{block k_u} g^{d_u}`.
pub fn phi_block_form(form: &BlockForm, id: usize) -> Result<f64, PatternError> {
    let pat = pattern(id)?;
    let k = form.blocks();
    let degrees = pat.degrees();
    // moments[b][d] = integral of g^d over block b.
    let moments: Vec<Vec<f64>> = (0..k)
        .map(|b| (0..=4).map(|d| form.block_moment(b, d as u32)).collect())
        .collect();
    let mut labels = vec![0usize; pat.nodes];
    let mut total = 0.0;
    loop {
        let mut term: f64 = labels
            .iter()
            .zip(&degrees)
            .map(|(&b, &d)| moments[b][d])
            .product();
        for &(a, b) in pat.edges {
            term *= form.pi[labels[a]][labels[b]];
        }
        total += term;
        // Odometer over K^{p_j} assignments.
        let mut pos = 0;
        loop {
            if pos == labels.len() {
                return Ok(form.scale.powi(pat.edge_count() as i32) * total);
            }
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

/// `phi_j` under a stochastic block model.
pub fn phi_sbm(alpha: &[f64], pi: &[Vec<f64>], id: usize) -> Result<f64, PatternError> {
    let g = Graphon::block_constant(alpha.to_vec(), pi.to_vec())?;
    phi_block_form(&g.block_form().expect("block graphon"), id)
}

/// `phi_j = prod_u g_{d_u}` for a product graphon `g(u) g(v)`, with
/// `g_moments[k - 1] = int g^k`.
pub fn phi_edd(g_moments: &[f64], id: usize) -> Result<f64, PatternError> {
    let pat = pattern(id)?;
    let degrees = pat.degrees();
    let needed = *degrees.iter().max().expect("nonempty pattern");
    if needed > g_moments.len() {
        return Err(PatternError::MissingMoment {
            pattern: id,
            needed,
            supplied: g_moments.len(),
        });
    }
    Ok(degrees.iter().map(|&d| g_moments[d - 1]).product())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiMethod {
    /// Closed form when the graphon has block form. Otherwise every pattern
    /// is integrated against one discrete measure: Gauss-Legendre nodes on
    /// each smooth piece of the graphon, at least `nodes` in total and at
    /// least three per piece. Exact for `Grid` graphons.
    Quadrature { nodes: usize },
    /// Plain Monte-Carlo with antithetic pairs, whatever the graphon.
    MonteCarlo { samples: usize, rng: RngSpec },
}

impl PhiMethod {
    pub const DEFAULT_QUADRATURE: PhiMethod = PhiMethod::Quadrature { nodes: 64 };
}

/// Estimate of `phi_j` and its standard error (zero for deterministic rules).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEstimate {
    pub value: f64,
    pub std_error: f64,
}

fn pattern_integrand(phi: &Graphon, pat: &Pattern, x: &[f64]) -> f64 {
    pat.edges.iter().map(|&(a, b)| phi.eval(x[a], x[b])).product()
}

pub fn phi_graphon(phi: &Graphon, id: usize, method: PhiMethod) -> Result<PhiEstimate, PatternError> {
    let pat = pattern(id)?;
    match method {
        PhiMethod::Quadrature { .. } => {
            if let Some(form) = phi.block_form() {
                return Ok(PhiEstimate {
                    value: phi_block_form(&form, id)?,
                    std_error: 0.0,
                });
            }
            Ok(PhiEstimate {
                value: phi_discrete(phi, method)?[id - 1],
                std_error: 0.0,
            })
        }
        PhiMethod::MonteCarlo { samples, rng } => monte_carlo(phi, pat, samples, rng),
    }
}

const MAX_DISCRETE_NODES: usize = 1536;

/// Quadrature nodes and weights on `[0, 1]`, composite over the graphon's
/// smooth pieces.
pub fn discrete_measure(phi: &Graphon, nodes: usize) -> Result<(Vec<f64>, Vec<f64>), PatternError> {
    if nodes < 2 {
        return Err(PatternError::Budget(format!("{nodes} quadrature nodes")));
    }
    let cuts = phi.breakpoints();
    let pieces = cuts.len() - 1;
    let per_piece = nodes.div_ceil(pieces).max(3);
    if per_piece * pieces > MAX_DISCRETE_NODES {
        return Err(PatternError::Budget(format!(
            "{} quadrature nodes exceed the limit of {MAX_DISCRETE_NODES}",
            per_piece * pieces
        )));
    }
    let (gx, gw) = gauss_legendre_unit(per_piece);
    let mut x = Vec::with_capacity(per_piece * pieces);
    let mut w = Vec::with_capacity(per_piece * pieces);
    for piece in cuts.windows(2) {
        let width = piece[1] - piece[0];
        for (&t, &wt) in gx.iter().zip(&gw) {
            x.push(piece[0] + width * t);
            w.push(width * wt);
        }
    }
    Ok((x, w))
}

/// All ten pattern integrals against the discrete measure of
/// [`discrete_measure`], by contracting the kernel `K_ab = phi(x_a, x_b)`:
/// with `r = K w`, `q = K (w r)` and `P = K diag(w) K`,
/// `phi_1 = sum w r`, `phi_2 = sum w r^2`, `phi_3 = sum_ab w_a w_b K_ab P_ab`, ...
/// The vector is that of a genuine weighted graph model, so moment formulas
/// built on it stay internally consistent.
pub fn phi_discrete(phi: &Graphon, method: PhiMethod) -> Result<[f64; 10], PatternError> {
    let PhiMethod::Quadrature { nodes } = method else {
        return Err(PatternError::Budget("discrete rule needs a quadrature method".into()));
    };
    let (x, w) = discrete_measure(phi, nodes)?;
    let m = x.len();
    let k = DMatrix::from_fn(m, m, |a, b| phi.eval(x[a], x[b]));
    let wv = DVector::from_vec(w.clone());
    let r = &k * &wv;
    let q = &k * wv.component_mul(&r);
    let kw = DMatrix::from_fn(m, m, |a, b| k[(a, b)] * w[b]);
    let p = &kw * &k;
    let sum = |f: &dyn Fn(usize) -> f64| csum((0..m).map(f));
    let pair_sum = |f: &dyn Fn(usize, usize) -> f64| csum((0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| f(a, b)));
    let tri_at = |a: usize| csum((0..m).map(|b| w[b] * k[(a, b)] * p[(b, a)]));
    Ok([
        sum(&|a| w[a] * r[a]),
        sum(&|a| w[a] * r[a] * r[a]),
        sum(&|a| w[a] * tri_at(a)),
        sum(&|a| w[a] * r[a] * tri_at(a)),
        sum(&|a| w[a] * r[a].powi(3)),
        sum(&|a| w[a] * r[a] * q[a]),
        pair_sum(&|a, b| w[a] * w[b] * p[(a, b)] * p[(a, b)]),
        sum(&|a| w[a] * q[a] * q[a]),
        sum(&|a| w[a] * r[a].powi(4)),
        sum(&|a| w[a] * r[a] * r[a] * q[a]),
    ])
}

const MC_BLOCK: usize = 1 << 14;

fn monte_carlo(phi: &Graphon, pat: &Pattern, samples: usize, rng: RngSpec) -> Result<PhiEstimate, PatternError> {
    if samples < 100 {
        return Err(PatternError::Budget(format!("{samples} Monte-Carlo samples")));
    }
    let pairs = samples / 2;
    let blocks = pairs.div_ceil(MC_BLOCK);
    let partial: Vec<(f64, f64, usize)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = MC_BLOCK.min(pairs - b * MC_BLOCK);
            let mut r = rng.derive(b as u64).rng();
            let mut x = vec![0.0; pat.nodes];
            let mut y = vec![0.0; pat.nodes];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
                    *xi = r.random::<f64>();
                    *yi = 1.0 - *xi;
                }
                let v = 0.5 * (pattern_integrand(phi, pat, &x) + pattern_integrand(phi, pat, &y));
                s += v;
                s2 += v * v;
            }
            (s, s2, count)
        })
        .collect();
    let (s, s2, m) = partial
        .iter()
        .fold((0.0, 0.0, 0usize), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let mf = m as f64;
    let mean = s / mf;
    let var = ((s2 / mf - mean * mean) * mf / (mf - 1.0)).max(0.0);
    Ok(PhiEstimate {
        value: mean,
        std_error: (var / mf).sqrt(),
    })
}

/// All ten pattern probabilities, plus their standard errors.
pub fn phi_vector(phi: &Graphon, method: PhiMethod) -> Result<(PhiVector, [f64; 10]), PatternError> {
    match method {
        PhiMethod::Quadrature { .. } => {
            let values = match phi.block_form() {
                Some(form) => {
                    let mut v = [0.0; 10];
                    for (j, slot) in v.iter_mut().enumerate() {
                        *slot = phi_block_form(&form, j + 1)?;
                    }
                    v
                }
                None => phi_discrete(phi, method)?,
            };
            Ok((PhiVector(values), [0.0; 10]))
        }
        PhiMethod::MonteCarlo { samples, rng } => {
            let mut values = [0.0; 10];
            let mut errors = [0.0; 10];
            for id in 1..=10 {
                let est = monte_carlo(phi, pattern(id)?, samples, rng.derive(id as u64))?;
                values[id - 1] = est.value;
                errors[id - 1] = est.std_error;
            }
            Ok((PhiVector(values), errors))
        }
    }
}

/// Non-induced occurrences of `R_j`: node subsets with an edge-preserving
/// placement of the pattern, counted once per labelled copy.
pub fn count_pattern(g: &Graph, id: usize) -> Result<u64, PatternError> {
    let pat = pattern(id)?;
    if g.n() < pat.nodes {
        return Ok(0);
    }
    match id {
        1 => Ok(g.edge_count() as u64),
        2 => Ok(g.summarize().m2),
        3 => Ok(g.summarize().triangles),
        _ => Ok(count_embeddings(g, pat) / pat.automorphisms),
    }
}

/// Injective edge-preserving maps from the pattern into `g`, grown along
/// pattern edges so each new node is drawn from a neighbor list.
fn count_embeddings(g: &Graph, pat: &Pattern) -> u64 {
    // Pattern node order in which every node after the first has an earlier
    // neighbor; the patterns are connected and listed that way already
    // except for the 4-cycle, whose order 0,1,2,3 also qualifies.
    let order: Vec<usize> = (0..pat.nodes).collect();
    let anchor: Vec<Option<usize>> = order
        .iter()
        .map(|&v| {
            pat.edges
                .iter()
                .filter_map(|&(a, b)| match (a == v, b == v) {
                    (true, _) if b < v => Some(b),
                    (_, true) if a < v => Some(a),
                    _ => None,
                })
                .min()
        })
        .collect();
    let adj = g.neighbor_lists();
    let mut image = vec![usize::MAX; pat.nodes];
    let mut used = vec![false; g.n()];
    fn extend(
        depth: usize,
        pat: &Pattern,
        anchor: &[Option<usize>],
        g: &Graph,
        adj: &[Vec<usize>],
        image: &mut [usize],
        used: &mut [bool],
    ) -> u64 {
        if depth == pat.nodes {
            return 1;
        }
        let candidates: Box<dyn Iterator<Item = usize>> = match anchor[depth] {
            None => Box::new(0..g.n()),
            Some(a) => Box::new(adj[image[a]].clone().into_iter()),
        };
        let mut count = 0;
        for c in candidates {
            if used[c] {
                continue;
            }
            let consistent = pat.edges.iter().all(|&(a, b)| {
                let other = if a == depth && b < depth {
                    b
                } else if b == depth && a < depth {
                    a
                } else {
                    return true;
                };
                g.has_edge(c, image[other])
            });
            if !consistent {
                continue;
            }
            image[depth] = c;
            used[c] = true;
            count += extend(depth + 1, pat, anchor, g, adj, image, used);
            used[c] = false;
        }
        count
    }
    extend(0, pat, &anchor, g, &adj, &mut image, &mut used)
}

/// `P_hat(R_j) = count / (C(n, p_j) * copies)`, where `copies = p_j! / |Aut|`
/// is the number of labelled copies of `R_j` on a fixed node set.
pub fn p_hat(g: &Graph, id: usize) -> Result<f64, PatternError> {
    let pat = pattern(id)?;
    let n = g.n() as u64;
    let p = pat.nodes as u64;
    if n < p {
        return Ok(0.0);
    }
    let binom = (0..p).fold(1.0, |acc, k| acc * (n - k) as f64 / (k + 1) as f64);
    Ok(count_pattern(g, id)? as f64 / (binom * pat.labelled_copies() as f64))
}

/// `P_hat(R_j) / phi1_hat^{|E(R_j)|}`.
pub fn p_hat_normalized(g: &Graph, id: usize, phi1_hat: f64) -> Result<f64, PatternError> {
    if !(phi1_hat > 0.0) {
        return Err(PatternError::ZeroDensity);
    }
    let pat = pattern(id)?;
    Ok(p_hat(g, id)? / phi1_hat.powi(pat.edge_count() as i32))
}
