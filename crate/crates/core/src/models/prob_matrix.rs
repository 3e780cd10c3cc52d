use std::io::{BufRead, Write};

use super::ModelError;
use crate::graph::{pair_count, pair_index, pairs};
use crate::numeric::{csum, fmt_sig10};

/// Symmetric matrix of edge probabilities with zero diagonal, stored as the
/// packed strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl ProbMatrix {
    /// From packed upper-triangle values in lexicographic pair order.
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::Invalid("probability matrix needs n >= 1".into()));
        }
        if upper.len() != pair_count(n) {
            return Err(ModelError::Dimension {
                expected: pair_count(n),
                found: upper.len(),
            });
        }
        if let Some((k, &v)) = upper
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            let (i, j) = pairs(n).nth(k).expect("pair index");
            return Err(ModelError::Invalid(format!(
                "p[{i},{j}] = {v} is not a probability"
            )));
        }
        Ok(Self { n, upper })
    }

    /// From a full square matrix; checks symmetry and the zero diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            if row[i] != 0.0 {
                return Err(ModelError::Invalid(format!("diagonal entry {i} is nonzero")));
            }
        }
        let mut upper = Vec::with_capacity(pair_count(n));
        for (i, j) in pairs(n) {
            if (rows[i][j] - rows[j][i]).abs() > 1e-12 {
                return Err(ModelError::Invalid(format!("asymmetric at ({i},{j})")));
            }
            upper.push(rows[i][j]);
        }
        Self::from_upper(n, upper)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, ModelError> {
        Self::from_upper(n, pairs(n).map(|(i, j)| f(i, j)).collect())
    }

    pub fn constant(n: usize, p: f64) -> Result<Self, ModelError> {
        Self::from_upper(n, vec![p; pair_count(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.upper[pair_index(self.n, i.min(j), i.max(j))]
        }
    }

    /// Values in lexicographic pair order.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![crate::numeric::CompensatedSum::new(); self.n];
        for ((i, j), &p) in pairs(self.n).zip(&self.upper) {
            sums[i].add(p);
            sums[j].add(p);
        }
        sums.iter().map(|s| s.value()).collect()
    }

    /// Mean off-diagonal probability.
    pub fn mean(&self) -> f64 {
        if self.upper.is_empty() {
            return 0.0;
        }
        csum(self.upper.iter().copied()) / self.upper.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, ModelError> {
        Self::from_upper(self.n, self.upper.iter().map(|&p| f(p)).collect())
    }

    /// Reads the CSV form: a line holding `n`, then `n` rows of `n` values.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self, ModelError> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(k, l)| l.map(|l| (k + 1, l)).map_err(|e| ModelError::Io(e.to_string())))
            .filter(|r| r.as_ref().map_or(true, |(_, l)| !l.trim().is_empty()));
        let (line, header) = lines
            .next()
            .ok_or_else(|| ModelError::Parse { line: 1, msg: "missing header".into() })??;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| ModelError::Parse { line, msg: format!("bad node count `{}`", header.trim()) })?;
        let mut rows = Vec::with_capacity(n);
        for item in lines {
            let (line, text) = item?;
            let row = text
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| ModelError::Parse {
                        line,
                        msg: format!("bad value `{}`", t.trim()),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        if rows.len() != n {
            return Err(ModelError::Dimension { expected: n, found: rows.len() });
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| fmt_sig10(self.get(i, j))).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_matrices() {
        assert!(ProbMatrix::constant(3, 1.5).is_err());
        assert!(ProbMatrix::from_rows(&[vec![0.0, 0.2], vec![0.3, 0.0]]).is_err());
        assert!(ProbMatrix::from_rows(&[vec![0.1, 0.2], vec![0.2, 0.0]]).is_err());
        assert!(ProbMatrix::from_upper(3, vec![0.1; 2]).is_err());
    }

    #[test]
    fn symmetric_access_and_row_sums() {
        let p = ProbMatrix::from_fn(4, |i, j| 0.1 * (i + j) as f64).unwrap();
        assert_eq!(p.get(2, 1), p.get(1, 2));
        assert_eq!(p.get(3, 3), 0.0);
        let sums = p.row_sums();
        for (i, &s) in sums.iter().enumerate() {
            let direct: f64 = (0..4).map(|j| p.get(i, j)).sum();
            assert!((s - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = ProbMatrix::from_fn(5, |i, j| 0.05 * (i * j) as f64 + 0.01).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = ProbMatrix::read_csv(buf.as_slice()).unwrap();
        for (a, b) in p.upper().iter().zip(back.upper()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = ProbMatrix::read_csv("2\n0,0.5\n0.5,zz\n".as_bytes()).unwrap_err();
        assert_eq!(err, ModelError::Parse { line: 3, msg: "bad value `zz`".into() });
    }
}
