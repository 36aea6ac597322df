//! Piecewise-linear CDF tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A right-continuous CDF given by nodes `(x_i, p_i)`.
///
/// Zero left of the first node, `p_last` right of the last one, linear in
/// between. Two consecutive equal `x` values encode an exact jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    x: Vec<f64>,
    p: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("tabulated cdf"));
        }
        if x.len() != p.len() {
            return Err(Error::ParameterMismatch(format!(
                "{} abscissae but {} probabilities",
                x.len(),
                p.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || x.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::ParameterMismatch(
                "abscissae must be finite and nondecreasing".into(),
            ));
        }
        if p.iter().any(|v| !(*v >= 0.0 && *v <= 1.0 + 1e-9)) || p.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::ParameterMismatch(
                "probabilities must be nondecreasing in [0, 1]".into(),
            ));
        }
        Ok(Self { x, p })
    }

    pub(crate) fn from_sorted_unchecked(x: Vec<f64>, mut p: Vec<f64>) -> Self {
        // guard against rounding noise
        for i in 1..p.len() {
            if p[i] < p[i - 1] {
                p[i] = p[i - 1];
            }
        }
        Self { x, p }
    }

    /// Unit step at `at`.
    pub fn step(at: f64) -> Self {
        Self {
            x: vec![at, at],
            p: vec![0.0, 1.0],
        }
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ps(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] {
            return 0.0;
        }
        if t >= self.x[n - 1] {
            return self.p[n - 1];
        }
        let k = self.x.partition_point(|&v| v <= t) - 1;
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        let u = (t - x0) / (x1 - x0);
        self.p[k] + (self.p[k + 1] - self.p[k]) * u
    }

    /// Smallest `t` with `eval(t) ≥ q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.x.len();
        if q <= 0.0 {
            return self.x[0];
        }
        let k = self.p.partition_point(|&v| v < q);
        if k >= n {
            return self.x[n - 1];
        }
        if k == 0 {
            return self.x[0];
        }
        let (p0, p1) = (self.p[k - 1], self.p[k]);
        if p1 <= p0 {
            return self.x[k];
        }
        self.x[k - 1] + (self.x[k] - self.x[k - 1]) * (q - p0) / (p1 - p0)
    }

    /// `sup_t |F(t) − G(t)|` over the union of both node sets, including left limits.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for &t in self.x.iter().chain(other.x.iter()) {
            d = d.max((self.eval(t) - other.eval(t)).abs());
            let l = t - t.abs().max(1e-300) * 1e-12;
            d = d.max((self.eval(l) - other.eval(l)).abs());
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_right_continuous() {
        let s = TabulatedCdf::step(2.0);
        assert_eq!(s.eval(1.999), 0.0);
        assert_eq!(s.eval(2.0), 1.0);
        assert_eq!(s.quantile(0.5), 2.0);
    }

    #[test]
    fn linear_interpolation_and_quantile() {
        let c = TabulatedCdf::new(vec![0.0, 1.0, 1.0, 3.0], vec![0.0, 0.2, 0.6, 1.0]).unwrap();
        assert!((c.eval(0.5) - 0.1).abs() < 1e-15);
        assert_eq!(c.eval(1.0), 0.6);
        assert!((c.eval(2.0) - 0.8).abs() < 1e-15);
        assert!((c.quantile(0.8) - 2.0).abs() < 1e-15);
        assert_eq!(c.quantile(0.4), 1.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TabulatedCdf::new(vec![], vec![]).is_err());
        assert!(TabulatedCdf::new(vec![1.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(TabulatedCdf::new(vec![0.0, 1.0], vec![0.5, 0.2]).is_err());
    }

    #[test]
    fn sup_distance_sees_jumps() {
        let a = TabulatedCdf::step(1.0);
        let b = TabulatedCdf::new(vec![0.0, 2.0], vec![0.0, 1.0]).unwrap();
        assert!((a.sup_distance(&b) - 0.5).abs() < 1e-9);
    }
}
