//! Empirical distribution helpers used by the simulator and the oracle tests.

use crate::analytic::TabulatedCdf;
use crate::error::{Error, Result};

/// Right-continuous empirical CDF; ties collapse into a single jump.
pub fn empirical_cdf(samples: &[f64]) -> Result<TabulatedCdf> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("sample", f64::NAN, "not NaN"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut x = Vec::with_capacity(2 * s.len());
    let mut p = Vec::with_capacity(2 * s.len());
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let mut j = i;
        while j < s.len() && s[j] == v {
            j += 1;
        }
        x.push(v);
        p.push(i as f64 / n);
        x.push(v);
        p.push(j as f64 / n);
        i = j;
    }
    TabulatedCdf::new(x, p)
}

/// Empirical quantile: the smallest sample whose rank fraction reaches `q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

pub fn quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&s, q))
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Kolmogorov–Smirnov statistic against a CDF that may jump: compares the
/// empirical CDF with `cdf` and its left limits at every sample.
pub fn ks_statistic_mixed<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let mut j = i;
        while j < s.len() && s[j] == v {
            j += 1;
        }
        let left = cdf(v - v.abs().max(1e-300) * 1e-12);
        d = d
            .max((cdf(v) - j as f64 / n).abs())
            .max((left - i as f64 / n).abs());
        i = j;
    }
    d
}

/// Dvoretzky–Kiefer–Wolfowitz half-width: `P(sup|F_n − F| > ε) ≤ alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Asymptotic one-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    dkw_epsilon(n, alpha)
}

/// `Σ |ΔF_emp − ΔF|` over the cells of `edges`, plus the mass outside them.
pub fn binned_l1<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, edges: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mut counts = vec![0usize; edges.len() + 1];
    for &x in samples {
        let k = edges.partition_point(|&e| e < x);
        counts[k] += 1;
    }
    let mut l1 = 0.0;
    let mut prev = 0.0;
    for (k, &e) in edges.iter().enumerate() {
        let f = cdf(e);
        l1 += (counts[k] as f64 / n - (f - prev)).abs();
        prev = f;
    }
    l1 + (counts[edges.len()] as f64 / n - (1.0 - prev)).abs()
}

/// Sample mean.
pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_step() {
        let c = empirical_cdf(&[2.5]).unwrap();
        assert_eq!(c.eval(2.4), 0.0);
        assert_eq!(c.eval(2.5), 1.0);
    }

    #[test]
    fn order_does_not_matter() {
        let a = empirical_cdf(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        let b = empirical_cdf(&[2.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.eval(2.0), 0.75);
        assert_eq!(a.eval(1.5), 0.25);
    }

    #[test]
    fn deciles_match_sort_oracle() {
        let v: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64).collect();
        let c = empirical_cdf(&v).unwrap();
        for d in 1..10 {
            let q = d as f64 / 10.0;
            assert_eq!(quantile(&v, q).unwrap(), (10 * d - 1) as f64);
            assert!(c.eval(quantile(&v, q).unwrap()) >= q);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(empirical_cdf(&[]).is_err());
        assert!(quantile(&[], 0.5).is_err());
    }

    #[test]
    fn ks_of_perfect_grid_is_small() {
        let n = 1000;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&v, |x| x.clamp(0.0, 1.0)) - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_statistic_mixed(&v, |x| x.clamp(0.0, 1.0)) < 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn dkw_value() {
        assert!((dkw_epsilon(100_000, 0.01) - 0.005_146).abs() < 1e-5);
    }
}
