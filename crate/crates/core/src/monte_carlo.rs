//! Direct simulation of the SINR over random deployments and misalignments.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::TabulatedCdf;
use crate::antenna::{BeamParameters, ETA_MIN};
use crate::error::{Error, Result};
use crate::geometry::{
    arrival_angle, arrival_hat, departure_angle, departure_hat, path_loss_with_floor,
    sample_deployment_with_floor, Deployment, OrientationMode,
};
use crate::misalignment::{MisalignmentModel, RHO_MAX};
use crate::params;
use crate::rng::{Role, StreamFactory};

/// Node placement rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Typical receiver at the center of the hall, interferer boresights uniform.
    CenterRx,
    /// All pairs uniform in the hall; link 0 plays the typical link.
    RandomTypical,
}

impl Scenario {
    pub fn orientation_mode(self) -> OrientationMode {
        match self {
            Scenario::CenterRx => OrientationMode::Uniform,
            Scenario::RandomTypical => OrientationMode::Paired,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of simultaneously active links.
    pub n: usize,
    pub theta_m: f64,
    pub eta: f64,
    pub rho: f64,
    /// Transmit power, mW.
    pub pt: f64,
    /// Wavelength, m.
    pub lambda: f64,
    pub alpha: f64,
    /// Noise power, mW.
    pub n0: f64,
    /// Hall radius, m.
    pub r0: f64,
    /// Minimum transmitter/receiver separation, m.
    pub d0: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
    pub scenario: Scenario,
    pub replications: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 11,
            theta_m: PI / 6.0,
            eta: 0.4,
            rho: 0.05,
            pt: params::TRANSMIT_POWER_MW,
            lambda: params::WAVELENGTH_M,
            alpha: params::PATH_LOSS_EXPONENT,
            n0: params::default_noise_mw(),
            r0: params::REGION_RADIUS_M,
            d0: crate::geometry::FAR_FIELD_FLOOR,
            bandwidth: params::BANDWIDTH_HZ,
            scenario: Scenario::CenterRx,
            replications: 10_000,
            seed: 1,
        }
    }
}

fn config_error(field: &str, value: impl std::fmt::Display, admissible: &str) -> Error {
    Error::Config {
        field: field.to_string(),
        message: format!("value {value} is outside the admissible range {admissible}"),
    }
}

impl ScenarioConfig {
    /// Checks every field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_error(name, v, "(0, inf)"))
            }
        };
        if self.n == 0 {
            return Err(config_error("n", self.n, "[1, inf)"));
        }
        if !(self.theta_m > 0.0 && self.theta_m <= PI) {
            return Err(config_error("theta_m", self.theta_m, "(0, pi]"));
        }
        if !(self.eta >= ETA_MIN && self.eta < 1.0) {
            return Err(config_error("eta", self.eta, &format!("[{ETA_MIN}, 1)")));
        }
        if !(self.rho >= 0.0 && self.rho <= RHO_MAX * (1.0 + 1e-12)) {
            return Err(config_error("rho", self.rho, "[0, 1/6]"));
        }
        pos("pt", self.pt)?;
        pos("lambda", self.lambda)?;
        pos("alpha", self.alpha)?;
        pos("n0", self.n0)?;
        pos("d0", self.d0)?;
        pos("bandwidth", self.bandwidth)?;
        if !(self.r0 > self.d0 && self.r0.is_finite()) {
            return Err(config_error(
                "r0",
                self.r0,
                &format!("(d0 = {}, inf)", self.d0),
            ));
        }
        if self.replications == 0 {
            return Err(config_error("replications", self.replications, "[1, inf)"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form; changes iff some field changes.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn beam(&self) -> Result<BeamParameters> {
        BeamParameters::solve(self.theta_m, self.eta)
    }

    pub fn misalignment(&self) -> Result<MisalignmentModel> {
        MisalignmentModel::new(self.theta_m, self.rho)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrSampleSet {
    /// Typical-link SINR per replication, linear.
    pub samples: Vec<f64>,
    /// Shannon rate of every link with a receiver, bit/s, one row per replication.
    pub per_link_rates: Option<Vec<Vec<f64>>>,
    pub config_fingerprint: String,
}

/// Shannon rate `W·log2(1 + γ)`.
pub fn shannon_rate(sinr: f64, bandwidth: f64) -> f64 {
    bandwidth * sinr.ln_1p() / std::f64::consts::LN_2
}

struct Model {
    beam: BeamParameters,
    mis: MisalignmentModel,
    cfg: ScenarioConfig,
}

impl Model {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            beam: cfg.beam()?,
            mis: cfg.misalignment()?,
            cfg: *cfg,
        })
    }

    fn sinr(&self, dep: &Deployment, eps_t: &[f64], eps_r: &[f64], i: usize) -> Result<f64> {
        let c = &self.cfg;
        let g = |a: f64| self.beam.gain_unchecked(a);
        let link = &dep.pairs[i];
        let signal = c.pt
            * path_loss_with_floor(link.link_length(), c.lambda, c.alpha, c.d0)?
            * g(eps_t[i].abs())
            * g(eps_r[i].abs());
        let mut interference = 0.0;
        for (k, other) in dep.pairs.iter().enumerate() {
            if k == i {
                continue;
            }
            let d = other.tx.distance(link.rx);
            let out = departure_angle(departure_hat(other, link)?, eps_t[k]);
            let inn = arrival_angle(arrival_hat(link, other)?, eps_r[i]);
            interference +=
                c.pt * path_loss_with_floor(d, c.lambda, c.alpha, c.d0)? * g(out) * g(inn);
        }
        Ok(signal / (c.n0 + interference))
    }

    fn replication(
        &self,
        streams: &StreamFactory,
        r: u64,
        fixed: Option<&Deployment>,
        all_links: bool,
    ) -> Result<(f64, Option<Vec<f64>>)> {
        let c = &self.cfg;
        let sampled;
        let dep = match fixed {
            Some(d) => d,
            None => {
                let mut rng = streams.for_role(r, Role::Deployment);
                sampled = sample_deployment_with_floor(
                    c.n,
                    c.r0,
                    c.d0,
                    &mut rng,
                    c.scenario.orientation_mode(),
                )?;
                &sampled
            }
        };
        let n = dep.len();
        let mut rng = streams.for_role(r, Role::Misalignment);
        let mut eps_t = Vec::with_capacity(n);
        let mut eps_r = Vec::with_capacity(n);
        for _ in 0..n {
            eps_t.push(self.mis.sample(&mut rng));
            eps_r.push(self.mis.sample(&mut rng));
        }
        let typical = self.sinr(dep, &eps_t, &eps_r, 0)?;
        let rates = if all_links {
            let mut v = vec![shannon_rate(typical, c.bandwidth)];
            for i in 1..n {
                if dep.has_receiver(i) {
                    v.push(shannon_rate(
                        self.sinr(dep, &eps_t, &eps_r, i)?,
                        c.bandwidth,
                    ));
                }
            }
            Some(v)
        } else {
            None
        };
        Ok((typical, rates))
    }
}

fn run(
    config: &ScenarioConfig,
    fixed: Option<&Deployment>,
    all_links: bool,
) -> Result<SinrSampleSet> {
    let model = Model::new(config)?;
    if let Some(d) = fixed {
        d.validate(config.d0)?;
    }
    let streams = StreamFactory::new(config.seed);
    let out: Vec<(f64, Option<Vec<f64>>)> = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| model.replication(&streams, r, fixed, all_links))
        .collect::<Result<_>>()?;
    let (samples, rates): (Vec<f64>, Vec<Option<Vec<f64>>>) = out.into_iter().unzip();
    Ok(SinrSampleSet {
        samples,
        per_link_rates: if all_links {
            rates.into_iter().collect()
        } else {
            None
        },
        config_fingerprint: config.fingerprint(),
    })
}

/// Simulates the typical-link SINR for `config.replications` independent draws.
///
/// Replication `r` draws its deployment and misalignments from streams keyed
/// by `(seed, r)`, so the output does not depend on the thread count.
pub fn simulate(config: &ScenarioConfig) -> Result<SinrSampleSet> {
    run(config, None, false)
}

/// Like [`simulate`], also recording the Shannon rate of every link.
pub fn simulate_with_rates(config: &ScenarioConfig) -> Result<SinrSampleSet> {
    run(config, None, true)
}

/// Keeps `deployment` fixed and redraws only the misalignments.
pub fn simulate_fixed(config: &ScenarioConfig, deployment: &Deployment) -> Result<SinrSampleSet> {
    run(config, Some(deployment), false)
}

pub fn empirical_cdf(samples: &[f64]) -> Result<TabulatedCdf> {
    crate::stats::empirical_cdf(samples)
}

/// Average throughput in bit/s, reported under both averaging conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputSummary {
    /// Mean over replications of the sum rate of all links.
    pub sum_bps: f64,
    /// `sum_bps / n`: average over links and replications.
    pub per_link_bps: f64,
    /// Mean over replications of link 0 only.
    pub typical_link_bps: f64,
    pub replications: usize,
}

/// Average sum throughput over the random-typical scenario.
pub fn sum_throughput(config: &ScenarioConfig) -> Result<ThroughputSummary> {
    if config.scenario != Scenario::RandomTypical {
        return Err(Error::ParameterMismatch(
            "throughput needs the random_typical scenario".into(),
        ));
    }
    let set = simulate_with_rates(config)?;
    let rates = set.per_link_rates.expect("rates requested");
    let r = rates.len() as f64;
    let sum_bps = rates.iter().map(|row| row.iter().sum::<f64>()).sum::<f64>() / r;
    let typical_link_bps = rates.iter().map(|row| row[0]).sum::<f64>() / r;
    Ok(ThroughputSummary {
        sum_bps,
        per_link_bps: sum_bps / config.n as f64,
        typical_link_bps,
        replications: rates.len(),
    })
}

pub fn per_link_average_throughput(config: &ScenarioConfig) -> Result<f64> {
    Ok(sum_throughput(config)?.per_link_bps)
}

/// Fraction of samples whose Shannon rate is below `rate_threshold`.
pub fn outage_estimate(samples: &[f64], rate_threshold: f64, bandwidth: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if !(rate_threshold >= 0.0) {
        return Err(Error::domain("rate_threshold", rate_threshold, "[0, inf)"));
    }
    let below = samples
        .iter()
        .filter(|&&g| shannon_rate(g, bandwidth) < rate_threshold)
        .count();
    Ok(below as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{NodePair, Point};

    fn single_link(d: f64) -> Deployment {
        Deployment {
            pairs: vec![NodePair {
                index: 0,
                tx: Point::new(d, 0.0),
                rx: Point::ORIGIN,
            }],
            region_radius: 15.0,
            orientation_mode: OrientationMode::Uniform,
        }
    }

    #[test]
    fn aligned_single_link_is_deterministic() {
        let cfg = ScenarioConfig {
            n: 1,
            rho: 0.0,
            replications: 50,
            ..Default::default()
        };
        let set = simulate_fixed(&cfg, &single_link(4.0)).unwrap();
        let beam = cfg.beam().unwrap();
        let want = cfg.pt
            * path_loss_with_floor(4.0, cfg.lambda, cfg.alpha, cfg.d0).unwrap()
            * beam.g_main.powi(2)
            / cfg.n0;
        assert!(set.samples.iter().all(|&s| s == want));
    }

    #[test]
    fn same_seed_same_samples() {
        let cfg = ScenarioConfig {
            replications: 200,
            ..Default::default()
        };
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let other = ScenarioConfig { seed: 2, ..cfg };
        assert_ne!(
            simulate(&cfg).unwrap().samples,
            simulate(&other).unwrap().samples
        );
    }

    #[test]
    fn throughput_of_lone_link_is_shannon() {
        let cfg = ScenarioConfig {
            n: 1,
            rho: 0.0,
            scenario: Scenario::RandomTypical,
            replications: 100,
            ..Default::default()
        };
        let t = sum_throughput(&cfg).unwrap();
        let set = simulate(&cfg).unwrap();
        let want = set
            .samples
            .iter()
            .map(|&g| shannon_rate(g, cfg.bandwidth))
            .sum::<f64>()
            / 100.0;
        assert!((t.sum_bps / want - 1.0).abs() < 1e-12);
        assert_eq!(t.sum_bps, t.per_link_bps);
        assert_eq!(t.sum_bps, t.typical_link_bps);
    }

    #[test]
    fn throughput_requires_random_scenario() {
        assert!(sum_throughput(&ScenarioConfig::default()).is_err());
    }

    #[test]
    fn outage_edges() {
        let s = [0.5, 1.0, 3.0];
        assert_eq!(outage_estimate(&s, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(outage_estimate(&s, 1e9, 1.0).unwrap(), 1.0);
        // rates are log2(1.5), 1, 2
        assert!((outage_estimate(&s, 1.5, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(outage_estimate(&[], 1.0, 1.0).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let cfg = ScenarioConfig {
            rho: 0.2,
            ..Default::default()
        };
        match cfg.validate() {
            Err(Error::Config { field, message }) => {
                assert_eq!(field, "rho");
                assert!(message.contains("[0, 1/6]"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fingerprint_tracks_fields() {
        let a = ScenarioConfig::default();
        let b = ScenarioConfig { eta: 0.41, ..a };
        assert_eq!(a.fingerprint(), ScenarioConfig::default().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
