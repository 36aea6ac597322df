//! Two-dimensional 3GPP-style radiation pattern.
//!
//! The main lobe is a Gaussian-in-dB taper over `|θ| ≤ θm/2`; outside it the
//! gain is the flat side-lobe level. `Gm` and `Gs` follow from two
//! constraints: the pattern radiates a total of `2π` over the circle, and it
//! is continuous at `θm/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Smallest accepted half-power ratio. Below it `Gm/Gs = 10^{0.3/η²}` leaves
/// the f64 range.
pub const ETA_MIN: f64 = 0.032;

const V_REL_TOL: f64 = 1e-10;

/// dB exponent per unit of `(2θ/ω)²`.
const TAPER: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParameters {
    /// Main-lobe beamwidth θm, radians.
    pub theta_m: f64,
    /// Half-power to main-lobe beamwidth ratio η = ω/θm.
    pub eta: f64,
    /// Half-power beamwidth ω, radians.
    pub omega: f64,
    /// Peak main-lobe gain Gm (linear).
    pub g_main: f64,
    /// Side-lobe gain Gs (linear).
    pub g_side: f64,
    /// V(θm, ω) = ∫_0^{θm} 10^{0.3(θm² − θ²)/ω²} dθ.
    pub v_integral: f64,
}

impl BeamParameters {
    /// Solves the power and continuity constraints for `(theta_m, eta)`.
    pub fn solve(theta_m: f64, eta: f64) -> Result<Self> {
        if !(theta_m > 0.0 && theta_m <= PI) {
            return Err(Error::domain("theta_m", theta_m, "(0, pi]"));
        }
        if !(ETA_MIN..1.0).contains(&eta) {
            return Err(Error::domain("eta", eta, format!("[{ETA_MIN}, 1)")));
        }
        let omega = eta * theta_m;
        let ratio = 10f64.powf(TAPER / (eta * eta));
        // Scaled main-lobe integral S = V / ratio; integrand stays in [1/ratio, 1].
        let scaled = quadrature::integrate(
            |t| 10f64.powf(-TAPER * (t / omega).powi(2)),
            0.0,
            theta_m,
            V_REL_TOL,
            0.0,
        )?
        .value;
        let g_main = 2.0 * PI / (scaled + (2.0 * PI - theta_m) / ratio);
        Ok(Self {
            theta_m,
            eta,
            omega,
            g_main,
            g_side: g_main / ratio,
            v_integral: scaled * ratio,
        })
    }

    /// `Gm / Gs`, which depends on η only.
    pub fn gain_ratio(&self) -> f64 {
        self.g_main / self.g_side
    }

    pub fn half_main_lobe(&self) -> f64 {
        0.5 * self.theta_m
    }

    /// Gain at relative angle `theta`, which must already be wrapped into `[-π, π]`.
    pub fn gain(&self, theta: f64) -> Result<f64> {
        if !(theta.abs() <= PI) {
            return Err(Error::domain("theta", theta, "[-pi, pi]"));
        }
        Ok(self.gain_unchecked(theta))
    }

    #[inline]
    pub(crate) fn gain_unchecked(&self, theta: f64) -> f64 {
        let a = theta.abs();
        if a <= 0.5 * self.theta_m {
            self.g_main * 10f64.powf(-TAPER * (2.0 * a / self.omega).powi(2))
        } else {
            self.g_side
        }
    }

    /// Nonnegative main-lobe angle with `G(θ) = g`, for `g ∈ (Gs, Gm]`.
    pub fn gain_inverse_mainlobe(&self, g: f64) -> Result<f64> {
        if !(g > self.g_side && g <= self.g_main) {
            return Err(Error::domain(
                "gain",
                g,
                format!("({:e}, {:e}]", self.g_side, self.g_main),
            ));
        }
        Ok(self.mainlobe_angle(g).min(0.5 * self.theta_m))
    }

    /// Unchecked inverse of the main-lobe taper; `g ≤ Gm`.
    #[inline]
    pub(crate) fn mainlobe_angle(&self, g: f64) -> f64 {
        let l = (self.g_main / g).log10().max(0.0);
        0.5 * self.omega * (l / TAPER).sqrt()
    }

    /// |dG/dθ| on the main lobe, expressed in terms of the gain value.
    pub(crate) fn mainlobe_slope(&self, g: f64) -> f64 {
        let l = (self.g_main / g).log10().max(0.0);
        2.0 * std::f64::consts::LN_10 / self.omega * g * (4.0 * TAPER * l).sqrt()
    }

    /// Numerical `∫_{-π}^{π} G(θ) dθ`; equals `2π` for a consistent pattern.
    pub fn radiated_power(&self) -> Result<f64> {
        let half = 0.5 * self.theta_m;
        let main = quadrature::integrate(|t| self.gain_unchecked(t), 0.0, half, 1e-13, 0.0)?.value;
        Ok(2.0 * (main + self.g_side * (PI - half)))
    }

    /// `(theta, gain)` samples on `points` equally spaced angles over `[-π, π]`.
    pub fn table(&self, points: usize) -> Vec<(f64, f64)> {
        let n = points.max(2);
        (0..n)
            .map(|i| {
                let t = -PI + 2.0 * PI * i as f64 / (n - 1) as f64;
                (t, self.gain_unchecked(t.clamp(-PI, PI)))
            })
            .collect()
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
