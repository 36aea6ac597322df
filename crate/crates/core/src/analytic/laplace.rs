//! CDF of a sum of i.i.d. interference terms, by grid convolution or by
//! numerical Laplace inversion.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mixed::{GridConfig, MixedDistribution};
use super::ops::convolve;
use super::tabulated::TabulatedCdf;
use crate::error::{Error, Result};

/// Abscissa shift of the Bromwich line; discretization error ≈ e^{−A}.
const EULER_A: f64 = 18.4;
/// Terms before Euler averaging starts.
const EULER_N: usize = 100;
/// Binomial averaging order.
const EULER_M: usize = 20;

/// Points at which the inverted CDF is tabulated.
pub const LAPLACE_POINTS: usize = 512;

/// Largest tolerated disagreement between the two methods.
pub const INVERSION_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    GridConv,
    Laplace,
}

/// Bromwich line used at time `t`: real part, imaginary step, term count.
fn euler_line(t: f64) -> (f64, f64, usize) {
    (
        EULER_A / (2.0 * t),
        std::f64::consts::PI / t,
        EULER_N + EULER_M + 1,
    )
}

/// Euler-accelerated alternating sum of `Re f̂(s_k)` along the line.
fn euler_sum(values: &[Complex64], t: f64) -> f64 {
    let mut partial = Vec::with_capacity(EULER_M + 1);
    let mut s = 0.5 * values[0].re;
    for (k, v) in values.iter().enumerate().skip(1) {
        s += if k % 2 == 0 { v.re } else { -v.re };
        if k >= EULER_N {
            partial.push(s);
        }
    }
    let mut binom = 1.0;
    let mut avg = 0.0;
    for (j, p) in partial.iter().enumerate() {
        avg += binom * p;
        binom = binom * (EULER_M - j) as f64 / (j + 1) as f64;
    }
    avg /= 2f64.powi(EULER_M as i32);
    (EULER_A / 2.0).exp() / t * avg
}

/// Inverts a Laplace transform `f̂` at `t > 0` (Abate–Whitt Euler summation).
pub fn euler_inversion<F>(fhat: F, t: f64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let (a, step, count) = euler_line(t);
    let values: Vec<Complex64> = (0..count)
        .map(|k| fhat(Complex64::new(a, step * k as f64)))
        .collect();
    euler_sum(&values, t)
}

/// `k`-fold convolution power by repeated squaring.
pub fn convolution_power(
    component: &MixedDistribution,
    k: usize,
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    if k == 0 {
        return Ok(MixedDistribution::point_mass(0.0));
    }
    let mut result: Option<MixedDistribution> = None;
    let mut base = component.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve(&r, &base, cfg)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = convolve(&base, &base, cfg)?;
    }
    Ok(result.expect("k > 0"))
}

fn laplace_nodes(component: &MixedDistribution, k: usize) -> Vec<f64> {
    let (lo, hi) = component.support();
    let (lo, hi) = (lo.max(0.0) * k as f64, hi * k as f64);
    let start = if lo > 0.0 { lo } else { hi * 1e-9 };
    super::mixed::geometric_grid(start, hi, LAPLACE_POINTS)
}

/// CDF of the sum via `(L f)^k / s` inverted at [`LAPLACE_POINTS`] abscissae.
pub fn laplace_sum_cdf(component: &MixedDistribution, k: usize) -> Result<TabulatedCdf> {
    if k == 0 {
        return Ok(TabulatedCdf::step(0.0));
    }
    let ts = laplace_nodes(component, k);
    let kk = k as i32;
    let mut ps: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let (a, step, count) = euler_line(t);
            let values: Vec<Complex64> = component
                .laplace_line(a, step, count)
                .into_iter()
                .enumerate()
                .map(|(j, l)| l.powi(kk) / Complex64::new(a, step * j as f64))
                .collect();
            euler_sum(&values, t).clamp(0.0, 1.0)
        })
        .collect();
    for i in 1..ps.len() {
        if ps[i] < ps[i - 1] {
            ps[i] = ps[i - 1];
        }
    }
    let mut x = vec![0.0];
    x.extend_from_slice(&ts);
    let mut p = vec![0.0];
    p.extend(ps);
    TabulatedCdf::new(x, p)
}

/// CDF of the sum of `k` i.i.d. copies of `component`.
///
/// The Laplace route is always checked against grid convolution; a
/// disagreement above [`INVERSION_LIMIT`] is reported as an error.
pub fn sum_interference_cdf(
    component: &MixedDistribution,
    k: usize,
    method: SumMethod,
    cfg: &GridConfig,
) -> Result<TabulatedCdf> {
    if k == 0 {
        return Ok(TabulatedCdf::step(0.0));
    }
    let conv = convolution_power(component, k, cfg)?;
    match method {
        SumMethod::GridConv => Ok(conv.to_cdf_table()),
        SumMethod::Laplace => {
            let lap = laplace_sum_cdf(component, k)?;
            let sup = lap
                .xs()
                .iter()
                .zip(lap.ps())
                .map(|(&t, &p)| (p - conv.cdf(t)).abs())
                .fold(0.0, f64::max);
            if sup > INVERSION_LIMIT {
                return Err(Error::InversionInstability {
                    sup_norm: sup,
                    limit: INVERSION_LIMIT,
                });
            }
            Ok(lap)
        }
    }
}
