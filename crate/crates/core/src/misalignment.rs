//! Zero-mean truncated-normal beam alignment error on `[-θm/2, θm/2]`.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest deviation ratio allowed by the 3σ rule (3σ ≤ θm/2).
pub const RHO_MAX: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentModel {
    pub theta_m: f64,
    /// σ/θm.
    pub rho: f64,
    /// Standard deviation of the untruncated normal, radians.
    pub sigma: f64,
    /// `erf(θm / (2√2 σ))`; `NaN` when `rho == 0`.
    pub normalizer: f64,
}

impl MisalignmentModel {
    pub fn new(theta_m: f64, rho: f64) -> Result<Self> {
        if !(theta_m > 0.0 && theta_m <= PI) {
            return Err(Error::domain("theta_m", theta_m, "(0, pi]"));
        }
        // tiny slack so that 1.0/6.0 computed elsewhere is accepted
        if !(0.0..=RHO_MAX * (1.0 + 1e-12)).contains(&rho) {
            return Err(Error::domain("rho", rho, "[0, 1/6]"));
        }
        let sigma = rho * theta_m;
        let normalizer = if rho > 0.0 {
            libm::erf(theta_m / (2.0 * SQRT_2 * sigma))
        } else {
            f64::NAN
        };
        Ok(Self {
            theta_m,
            rho,
            sigma,
            normalizer,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.rho == 0.0
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.theta_m
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateModel);
        }
        Ok(self.pdf_unchecked(x))
    }

    #[inline]
    pub(crate) fn pdf_unchecked(&self, x: f64) -> f64 {
        if x.abs() > self.half_width() {
            return 0.0;
        }
        let s = self.sigma;
        (-x * x / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt() * self.normalizer)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateModel);
        }
        Ok(self.cdf_unchecked(x))
    }

    /// For the degenerate model this is the unit step at 0.
    #[inline]
    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        let h = self.half_width();
        if x <= -h {
            return 0.0;
        }
        if x >= h {
            return 1.0;
        }
        if self.is_degenerate() {
            return if x >= 0.0 { 1.0 } else { 0.0 };
        }
        let z = libm::erf(x / (SQRT_2 * self.sigma));
        (0.5 * (z + self.normalizer) / self.normalizer).clamp(0.0, 1.0)
    }

    /// `P(a < ε ≤ b)`.
    #[inline]
    pub(crate) fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.cdf_unchecked(b) - self.cdf_unchecked(a)).max(0.0)
    }

    /// Draws one error by rejection from the untruncated normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let h = self.half_width();
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let x = self.sigma * z;
            if x.abs() <= h {
                return x;
            }
        }
    }
}
