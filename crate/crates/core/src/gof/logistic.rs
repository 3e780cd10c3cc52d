//! Logistic regression of edge indicators on edge covariates, fitted by
//! iteratively reweighted least squares.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::graph::{pair_count, pair_index, pairs, Graph};
use crate::models::ProbMatrix;
use crate::numeric::{fmt_sig10, CompensatedSum};

const MAX_ITERATIONS: usize = 50;
const SCORE_TOLERANCE: f64 = 1e-8;
const DIVERGENCE_NORM: f64 = 1e3;
const RIDGE: f64 = 1e-8;
const STEP_TOLERANCE: f64 = 1e-6;
/// Fitted probabilities closer than this to 0 or 1 indicate separation.
const SATURATION: f64 = 1e-7;
/// Probabilities this close to 0 or 1 only arise from a divergent fit.
const HARD_SATURATION: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("covariate table has {found} nodes, graph has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("no covariate row for pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("no convergence: coefficient norm {0} diverges (separation)")]
    Separation(f64),
    #[error("io error: {0}")]
    Io(String),
}

/// One row of `d` covariates per unordered pair, in lexicographic pair
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTable {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl CovariateTable {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self, FitError> {
        if values.len() != pair_count(n) * d {
            return Err(FitError::Dimension {
                expected: pair_count(n) * d,
                found: values.len(),
            });
        }
        Ok(Self { n, d, values })
    }

    /// Intercept-only design.
    pub fn empty(n: usize) -> Self {
        Self { n, d: 0, values: Vec::new() }
    }

    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(usize, usize, &mut [f64])) -> Self {
        let mut values = vec![0.0; pair_count(n) * d];
        if d > 0 {
            for ((i, j), row) in pairs(n).zip(values.chunks_mut(d)) {
                f(i, j, row);
            }
        }
        Self { n, d, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Covariates of the `k`-th pair in lexicographic order.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.d..(k + 1) * self.d]
    }

    /// Reads `i,j,x1,...,xd` CSV. Rows may come in any order but every pair
    /// `i < j` must appear exactly once. `n` defaults to the largest index
    /// plus one.
    pub fn read_csv<R: BufRead>(reader: R, n: Option<usize>) -> Result<Self, FitError> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(FitError::Parse {
            line: 1,
            msg: "empty covariate file".into(),
        })?;
        let header = header.map_err(|e| FitError::Io(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        let d = cols.len().saturating_sub(2);
        let expected: Vec<String> = ["i".to_string(), "j".to_string()]
            .into_iter()
            .chain((1..=d).map(|k| format!("x{k}")))
            .collect();
        if cols.len() < 2 || cols != expected {
            return Err(FitError::Parse {
                line: 1,
                msg: format!("header must be i,j,x1,...,xd; found {header}"),
            });
        }
        let mut rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| FitError::Io(e.to_string()))?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != d + 2 {
                return Err(FitError::Parse {
                    line: lineno,
                    msg: format!("expected {} fields, found {}", d + 2, fields.len()),
                });
            }
            let parse_node = |s: &str| {
                s.parse::<usize>().map_err(|_| FitError::Parse {
                    line: lineno,
                    msg: format!("bad node index '{s}'"),
                })
            };
            let (i, j) = (parse_node(fields[0])?, parse_node(fields[1])?);
            if i >= j {
                return Err(FitError::Parse {
                    line: lineno,
                    msg: format!("pair ({i}, {j}) must satisfy i < j"),
                });
            }
            let x = fields[2..]
                .iter()
                .map(|s| {
                    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| FitError::Parse {
                        line: lineno,
                        msg: format!("bad covariate '{s}'"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((i, j, x));
        }
        let n = n.unwrap_or_else(|| rows.iter().map(|r| r.1 + 1).max().unwrap_or(0));
        let mut values = vec![f64::NAN; pair_count(n) * d];
        let mut seen = vec![false; pair_count(n)];
        for (i, j, x) in rows {
            if j >= n {
                return Err(FitError::Dimension { expected: n, found: j + 1 });
            }
            let k = pair_index(n, i, j);
            if seen[k] {
                return Err(FitError::Parse {
                    line: 0,
                    msg: format!("pair ({i}, {j}) listed twice"),
                });
            }
            seen[k] = true;
            values[k * d..(k + 1) * d].copy_from_slice(&x);
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            let (i, j) = pairs(n).nth(k).expect("pair in range");
            return Err(FitError::MissingPair(i, j));
        }
        Ok(Self { n, d, values })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("i,j");
        for k in 1..=self.d {
            header.push_str(&format!(",x{k}"));
        }
        writeln!(out, "{header}")?;
        for (k, (i, j)) in pairs(self.n).enumerate() {
            write!(out, "{i},{j}")?;
            for x in self.row(k) {
                write!(out, ",{}", fmt_sig10(*x))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Fitted null: `logit p0_ij = b_0 + x_ij' b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticNull {
    /// Intercept first.
    pub coefficients: Vec<f64>,
    /// Square roots of the diagonal of the inverse Fisher information.
    pub std_errors: Vec<f64>,
    pub fitted: ProbMatrix,
    pub iterations: usize,
    /// `max |X' (y - p)|` at the returned coefficients.
    pub score_norm: f64,
    pub converged: bool,
    /// A diagonal ridge was needed to solve some weighted normal equations.
    pub ridge_used: bool,
}

fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

struct Pass {
    score: DVector<f64>,
    information: DMatrix<f64>,
    fitted: Vec<f64>,
}

fn irls_pass(y: &[bool], x: &CovariateTable, beta: &DVector<f64>) -> Pass {
    let p = x.d + 1;
    let mut score = vec![CompensatedSum::new(); p];
    let mut info = vec![0.0; p * p];
    let mut fitted = Vec::with_capacity(y.len());
    let mut row = vec![1.0; p];
    for (k, &edge) in y.iter().enumerate() {
        row[1..].copy_from_slice(x.row(k));
        let eta: f64 = row.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
        let mu = logistic(eta);
        let resid = f64::from(u8::from(edge)) - mu;
        let w = mu * (1.0 - mu);
        for a in 0..p {
            score[a].add(row[a] * resid);
            for b in a..p {
                info[a * p + b] += w * row[a] * row[b];
            }
        }
        fitted.push(mu);
    }
    let information = DMatrix::from_fn(p, p, |a, b| info[a.min(b) * p + a.max(b)]);
    Pass {
        score: DVector::from_iterator(p, score.iter().map(|s| s.value())),
        information,
        fitted,
    }
}

fn check_rank(x: &CovariateTable) -> Result<(), FitError> {
    let p = x.d + 1;
    if pair_count(x.n) < p {
        return Err(FitError::RankDeficient);
    }
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut row = DVector::from_element(p, 1.0);
    for k in 0..pair_count(x.n) {
        row.rows_mut(1, x.d).copy_from_slice(x.row(k));
        gram.ger(1.0, &row, &row, 1.0);
    }
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(hi > 0.0) || lo <= 1e-12 * hi {
        return Err(FitError::RankDeficient);
    }
    Ok(())
}

/// Maximum-likelihood logistic fit of the edges of `g` on the covariate
/// table, with an intercept. Converges once `max |score| < 1e-8` and the
/// Newton step is negligible; stops after 50 iterations otherwise (then
/// `converged` is false, or separation is reported when fitted
/// probabilities have saturated).
pub fn fit_logistic_null(g: &Graph, x: &CovariateTable) -> Result<LogisticNull, FitError> {
    if x.n != g.n() {
        return Err(FitError::Dimension {
            expected: g.n(),
            found: x.n,
        });
    }
    check_rank(x)?;
    let y: Vec<bool> = pairs(g.n()).map(|(i, j)| g.has_edge(i, j)).collect();
    let density = y.iter().filter(|&&e| e).count() as f64 / y.len() as f64;
    if density == 0.0 || density == 1.0 {
        return Err(FitError::Separation(f64::INFINITY));
    }
    let p = x.d + 1;
    let mut beta = DVector::zeros(p);
    beta[0] = (density / (1.0 - density)).ln();
    let mut ridge_used = false;
    let mut iterations = 0;
    loop {
        let pass = irls_pass(&y, x, &beta);
        let score_norm = pass.score.amax();
        let step = match pass.information.clone().cholesky() {
            Some(c) => Some(c.solve(&pass.score)),
            None => {
                ridge_used = true;
                let scale = pass.information.diagonal().amax().max(1.0);
                let ridged = &pass.information + DMatrix::identity(p, p) * (RIDGE * scale);
                ridged.cholesky().map(|c| c.solve(&pass.score))
            }
        };
        let Some(step) = step else {
            return Err(FitError::RankDeficient);
        };
        // Under separation the score vanishes while Newton steps stay O(1).
        let converged = score_norm < SCORE_TOLERANCE && step.norm() < STEP_TOLERANCE * beta.norm().max(1.0);
        if converged || iterations == MAX_ITERATIONS {
            let margin = pass.fitted.iter().fold(1.0f64, |m, &mu| m.min(mu.min(1.0 - mu)));
            if margin < HARD_SATURATION || (!converged && margin < SATURATION) {
                return Err(FitError::Separation(beta.norm()));
            }
            let inverse = pass
                .information
                .clone()
                .cholesky()
                .map(|c| c.inverse())
                .or_else(|| pass.information.clone().try_inverse());
            let std_errors = match inverse {
                Some(inv) => (0..p).map(|a| inv[(a, a)].max(0.0).sqrt()).collect(),
                None => vec![f64::NAN; p],
            };
            let fitted = ProbMatrix::from_upper(g.n(), pass.fitted).expect("probabilities in [0,1]");
            return Ok(LogisticNull {
                coefficients: beta.iter().copied().collect(),
                std_errors,
                fitted,
                iterations,
                score_norm,
                converged,
                ridge_used,
            });
        }
        beta += step;
        iterations += 1;
        let norm = beta.norm();
        if !(norm <= DIVERGENCE_NORM) {
            return Err(FitError::Separation(norm));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_her, RngSpec};
    use approx::assert_relative_eq;

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        sample_her(&ProbMatrix::constant(n, p).unwrap(), RngSpec::new(seed, 0))
    }

    #[test]
    fn intercept_only_recovers_density() {
        let g = random_graph(40, 0.2, 5);
        let fit = fit_logistic_null(&g, &CovariateTable::empty(40)).unwrap();
        let density = g.edge_count() as f64 / pair_count(40) as f64;
        assert!(fit.converged);
        assert_relative_eq!(fit.fitted.get(0, 1), density, max_relative = 1e-10);
        assert_relative_eq!(fit.coefficients[0], (density / (1.0 - density)).ln(), max_relative = 1e-8);
    }

    #[test]
    fn balanced_covariate_gets_zero_slope() {
        // x_ij = +1 on even pair index, -1 on odd; edges placed symmetrically.
        let n = 20;
        let x = CovariateTable::from_fn(n, 1, |i, j, row| row[0] = if (i + j) % 2 == 0 { 1.0 } else { -1.0 });
        let edges: Vec<(usize, usize)> = pairs(n).filter(|&(i, j)| (i * 7 + j * 3) % 5 == 0).collect();
        let g = Graph::from_edges(n, edges);
        let plus: Vec<bool> = pairs(n).map(|(i, j)| (i + j) % 2 == 0).collect();
        let y: Vec<bool> = pairs(n).map(|(i, j)| g.has_edge(i, j)).collect();
        let rate = |sign: bool| {
            let sel: Vec<_> = plus.iter().zip(&y).filter(|(s, _)| **s == sign).collect();
            sel.iter().filter(|(_, e)| **e).count() as f64 / sel.len() as f64
        };
        let fit = fit_logistic_null(&g, &x).unwrap();
        // Slope is half the difference of the two group logits.
        let logit = |q: f64| (q / (1.0 - q)).ln();
        assert_relative_eq!(fit.coefficients[1], 0.5 * (logit(rate(true)) - logit(rate(false))), epsilon = 1e-9);
        let sym = Graph::from_edges(4, [(0, 2), (0, 1), (2, 3)]);
        let xs = CovariateTable::from_fn(4, 1, |i, j, row| row[0] = if (i + j) % 2 == 0 { 1.0 } else { -1.0 });
        let fit = fit_logistic_null(&sym, &xs).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-9);
    }

    #[test]
    fn score_equations_hold() {
        let n = 60;
        let mut rng = RngSpec::new(11, 1).rng();
        use rand::Rng;
        let x = CovariateTable::from_fn(n, 2, |_, _, row| {
            row[0] = rng.random::<f64>();
            row[1] = rng.random::<f64>() * 2.0 - 1.0;
        });
        let p = ProbMatrix::from_fn(n, |i, j| {
            let k = pair_index(n, i, j);
            logistic(-1.5 + 1.0 * x.row(k)[0] - 0.5 * x.row(k)[1])
        })
        .unwrap();
        let g = sample_her(&p, RngSpec::new(11, 2));
        let fit = fit_logistic_null(&g, &x).unwrap();
        assert!(fit.converged && fit.score_norm < 1e-6);
        assert!(fit.std_errors.iter().all(|s| s.is_finite() && *s > 0.0));
        let k = pair_index(n, 3, 9);
        let eta = fit.coefficients[0] + fit.coefficients[1] * x.row(k)[0] + fit.coefficients[2] * x.row(k)[1];
        assert_relative_eq!(fit.fitted.get(3, 9), logistic(eta), max_relative = 1e-12);
    }

    #[test]
    fn failures_are_reported() {
        let g = random_graph(10, 0.3, 1);
        let dup = CovariateTable::from_fn(10, 2, |i, _, row| {
            row[0] = i as f64;
            row[1] = 2.0 * i as f64;
        });
        assert_eq!(fit_logistic_null(&g, &dup), Err(FitError::RankDeficient));
        // Perfect separation: edges exactly where x > 0.
        let x = CovariateTable::from_fn(10, 1, |i, j, row| row[0] = if (i + j) % 3 == 0 { 1.0 } else { -1.0 });
        let sep = Graph::from_edges(10, pairs(10).filter(|&(i, j)| (i + j) % 3 == 0));
        let r = fit_logistic_null(&sep, &x);
        assert!(matches!(r, Err(FitError::Separation(_))), "{r:?}");
        assert!(matches!(
            fit_logistic_null(&g, &CovariateTable::empty(9)),
            Err(FitError::Dimension { .. })
        ));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let x = CovariateTable::from_fn(4, 2, |i, j, row| {
            row[0] = i as f64 + 0.5;
            row[1] = j as f64 * 0.25;
        });
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,x1,x2\n0,1,0.5,0.25\n"));
        assert_eq!(CovariateTable::read_csv(text.as_bytes(), None).unwrap(), x);
        // Shuffled rows are accepted.
        let mut lines: Vec<&str> = text.lines().collect();
        lines[1..].reverse();
        assert_eq!(CovariateTable::read_csv(lines.join("\n").as_bytes(), Some(4)).unwrap(), x);

        let bad_header = "a,b,x1\n0,1,2\n";
        assert!(matches!(CovariateTable::read_csv(bad_header.as_bytes(), None), Err(FitError::Parse { line: 1, .. })));
        let reversed = "i,j,x1\n1,0,2\n";
        assert!(matches!(CovariateTable::read_csv(reversed.as_bytes(), None), Err(FitError::Parse { line: 2, .. })));
        let missing = "i,j,x1\n0,1,2\n0,2,1\n";
        assert_eq!(CovariateTable::read_csv(missing.as_bytes(), None), Err(FitError::MissingPair(1, 2)));
        let junk = "i,j,x1\n0,1,abc\n";
        assert!(matches!(CovariateTable::read_csv(junk.as_bytes(), None), Err(FitError::Parse { line: 2, .. })));
    }
}
