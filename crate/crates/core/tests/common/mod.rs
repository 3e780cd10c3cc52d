//! Reference computations shared by the integration tests: brute-force
//! enumeration over all graphs and moments of quadratic forms in independent
//! Bernoulli edges. None of it uses the library's moment algebra.

#![allow(dead_code)]

use degree_gof::graph::{pairs, Graph};
use degree_gof::models::ProbMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ProbMatrix {
    ProbMatrix::from_fn(n, |_, _| rng.random_range(0.02..0.98)).unwrap()
}

/// Probability-weighted mean and variance of `stat` over all `2^(n choose 2)`
/// graphs on `n` nodes.
pub fn exhaustive(p: &ProbMatrix, stat: impl Fn(&Graph) -> f64) -> (f64, f64) {
    let n = p.n();
    let edge_list: Vec<(usize, usize)> = pairs(n).collect();
    let m = edge_list.len();
    assert!(m <= 20, "enumeration too large");
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for mask in 0u32..(1 << m) {
        let mut weight = 1.0;
        for (k, &x) in p.upper().iter().enumerate() {
            weight *= if mask >> k & 1 == 1 { x } else { 1.0 - x };
        }
        let g = Graph::from_edges(n, (0..m).filter(|&k| mask >> k & 1 == 1).map(|k| edge_list[k]));
        let t = stat(&g);
        s0 += weight;
        s1 += weight * t;
        s2 += weight * t * t;
    }
    assert!((s0 - 1.0).abs() < 1e-12);
    (s1, s2 - s1 * s1)
}

/// `T = c + sum_e b_e A_e + sum_{e<f} c_ef A_e A_f` over independent
/// `A_e ~ Bernoulli(p_e)`; `quad(e, f)` gives `c_ef`. Mean and variance by
/// direct summation over edge pairs, `O(n^4)`.
pub fn quadratic_form_moments(
    p: &[f64],
    constant: f64,
    linear: impl Fn(usize) -> f64,
    quad: impl Fn(usize, usize) -> f64,
) -> (f64, f64) {
    let m = p.len();
    let mut mean = constant;
    let mut var = 0.0;
    // Re-centre: A_e = X_e + p_e.
    let mut centred_linear: Vec<f64> = (0..m).map(&linear).collect();
    for e in 0..m {
        mean += linear(e) * p[e];
        for f in e + 1..m {
            let c = quad(e, f);
            if c != 0.0 {
                mean += c * p[e] * p[f];
                centred_linear[e] += c * p[f];
                centred_linear[f] += c * p[e];
                var += c * c * p[e] * (1.0 - p[e]) * p[f] * (1.0 - p[f]);
            }
        }
    }
    for e in 0..m {
        var += centred_linear[e].powi(2) * p[e] * (1.0 - p[e]);
    }
    (mean, var)
}

fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1
}

/// Naive moments of `W = 1/n sum_i (d_i - mu_i)^2`, `mu_i` the null expected
/// degrees, when the graph follows `p`.
pub fn naive_w_moments(p: &ProbMatrix, mu: &[f64]) -> (f64, f64) {
    let n = p.n();
    let nf = n as f64;
    let e: Vec<(usize, usize)> = pairs(n).collect();
    // n W = sum d_i^2 - 2 sum mu_i d_i + sum mu_i^2, and
    // sum d_i^2 = 2 sum_e A_e + 2 sum_{adjacent e<f} A_e A_f.
    let (mean, var) = quadratic_form_moments(
        p.upper(),
        mu.iter().map(|m| m * m).sum(),
        |k| 2.0 - 2.0 * (mu[e[k].0] + mu[e[k].1]),
        |a, b| if adjacent(e[a], e[b]) { 2.0 } else { 0.0 },
    );
    (mean / nf, var / (nf * nf))
}

/// Naive moments of the degree variance `V = 1/n sum_i (d_i - dbar)^2`.
pub fn naive_v_moments(p: &ProbMatrix) -> (f64, f64) {
    let n = p.n();
    let nf = n as f64;
    let e: Vec<(usize, usize)> = pairs(n).collect();
    // n V = sum d_i^2 - (sum d_i)^2 / n, (sum d_i)^2 = 4 sum_e A_e + 8 sum_{e<f} A_e A_f.
    let (mean, var) = quadratic_form_moments(
        p.upper(),
        0.0,
        |_| 2.0 - 4.0 / nf,
        |a, b| if adjacent(e[a], e[b]) { 2.0 - 8.0 / nf } else { -8.0 / nf },
    );
    (mean / nf, var / (nf * nf))
}

/// Naive `O(n^3)` mean of `W` from the wedge form:
/// `E W = 2/n [sum_{i<j} (s_ij + D_ij^2) + sum_{wedges} D D]`, `D = p - p0`.
pub fn naive_w_mean_cubic(p: &ProbMatrix, p0: &ProbMatrix) -> f64 {
    let n = p.n();
    let d = |i: usize, j: usize| p.get(i, j) - p0.get(i, j);
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let x = p.get(i, j);
            total += x * (1.0 - x) + d(i, j).powi(2);
        }
    }
    for centre in 0..n {
        for j in 0..n {
            for l in j + 1..n {
                if j != centre && l != centre {
                    total += d(centre, j) * d(centre, l);
                }
            }
        }
    }
    2.0 * total / n as f64
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
