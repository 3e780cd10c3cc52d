//! Small numerical helpers shared by the moment and test modules.

use libm::erfc;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Falling factorial `n (n-1) ... (n-i)` (i + 1 factors), computed exactly in
/// 128-bit integers before conversion. Zero once a factor hits zero.
pub fn falling_factorial(n: u64, i: u32) -> f64 {
    let mut acc: u128 = 1;
    for k in 0..=u64::from(i) {
        if k >= n {
            return 0.0;
        }
        acc *= u128::from(n - k);
    }
    acc as f64
}

/// Standard normal cdf via `erfc`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - cdf(z)` without cancellation for large `z`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile: bisection to bracket, then Newton polishing.
pub fn normal_quantile(prob: f64) -> f64 {
    assert!(prob > 0.0 && prob < 1.0, "quantile level must lie in (0, 1)");
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..3 {
        let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf < 1e-300 {
            break;
        }
        let step = (normal_cdf(z) - prob) / pdf;
        z -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    z
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
///
/// Roots of `P_m` by Newton iteration from the Chebyshev-like initial guess,
/// then mapped from `[-1, 1]`.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for k in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (mf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for l in 2..=m {
                let lf = l as f64;
                let p2 = ((2.0 * lf - 1.0) * x * p1 - (lf - 1.0) * p0) / lf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            deriv = mf * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / deriv;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        if m == 1 {
            deriv = 1.0;
            x = 0.0;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[k] = 0.5 * (1.0 - x);
        nodes[m - 1 - k] = 0.5 * (1.0 + x);
        weights[k] = 0.5 * w;
        weights[m - 1 - k] = 0.5 * w;
    }
    (nodes, weights)
}

/// Formats like C's `%.10g`: ten significant digits, trailing zeros trimmed.
pub fn fmt_sig10(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_owned());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial(5, 1), 20.0);
        assert_eq!(falling_factorial(5, 4), 120.0);
        assert_eq!(falling_factorial(5, 5), 0.0);
        assert_eq!(falling_factorial(2, 2), 0.0);
        // 10^4 * 9999 * ... * 9995 exceeds 2^53; exact integer product first.
        let exact: u128 = (9995..=10_000u128).product();
        assert_eq!(falling_factorial(10_000, 5), exact as f64);
    }

    #[test]
    fn normal_cdf_and_quantile() {
        assert_relative_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_relative_eq!(normal_cdf(1.959963984540054), 0.975, epsilon = 1e-15);
        assert_relative_eq!(normal_quantile(0.95), 1.6448536269514722, epsilon = 1e-13);
        assert_relative_eq!(normal_quantile(0.5), 0.0, epsilon = 1e-14);
        for &p in &[1e-10, 0.01, 0.3, 0.77, 0.999] {
            assert_relative_eq!(normal_cdf(normal_quantile(p)), p, max_relative = 1e-12);
        }
        assert_relative_eq!(normal_sf(8.0), 6.22096057427178e-16, max_relative = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for m in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre_unit(m);
            assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
            let deg = 2 * m - 1;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(integral, 1.0 / (deg as f64 + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn sig10_formatting() {
        assert_eq!(fmt_sig10(0.0), "0");
        assert_eq!(fmt_sig10(0.05), "0.05");
        assert_eq!(fmt_sig10(1.0 / 3.0), "0.3333333333");
        assert_eq!(fmt_sig10(316.0), "316");
        assert_eq!(fmt_sig10(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_sig10(1.23456789012e12), "1.23456789e+12");
        assert_eq!(fmt_sig10(0.0316227766016838), "0.0316227766");
    }
}
