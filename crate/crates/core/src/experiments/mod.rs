//! Named experiment runs that write CSV tables and a JSON manifest.
//!
//! | name   | content |
//! |--------|---------|
//! | fig3   | CDF bounds, analytic and empirical CDFs at the hall center, θm ∈ {π/12, π/6, π/3} |
//! | fig4   | same, η ∈ {0.4, 0.5, 0.6} |
//! | fig5   | empirical CDFs for a random typical receiver, n ∈ {1, 30} |
//! | fig6   | sum throughput against n |
//! | fig7   | per-link throughput against ρ |
//! | custom | one configuration taken from the overrides |

pub mod config;
pub mod table;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{
    apply_overrides, parse_config, parse_config_str, parse_overrides, with_parameter, Overrides,
};
pub use table::{Cell, Table};

use crate::analytic::{CenterReceiverLaws, GridConfig, MixedDistribution, SinrContext};
use crate::antenna::to_db;
use crate::error::{Error, Result};
use crate::misalignment::RHO_MAX;
use crate::monte_carlo::{self, shannon_rate, Scenario, ScenarioConfig, SinrSampleSet};
use crate::stats;

pub const EXPERIMENTS: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "custom"];

/// Percentiles reported in every summary table.
pub const PERCENTILES: [u32; 9] = [1, 5, 10, 25, 50, 75, 90, 95, 99];

/// Misalignment ratios swept by `fig7`.
pub const FIG7_RHOS: [f64; 11] = [
    0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.075, 0.1, 0.125, 0.15, RHO_MAX,
];

/// Half-power ratio used by the throughput experiments.
pub const THROUGHPUT_ETA: f64 = 1.0 / 2.6;

/// SINR grid of the CDF tables, dB.
pub fn sinr_grid_db() -> Vec<f64> {
    (0..=220).map(|i| -30.0 + 0.5 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub overrides: Overrides,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Replaces the per-experiment replication count when set.
    pub replications: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(name: &str, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            name: name.to_string(),
            overrides: Overrides::new(),
            output_dir: output_dir.into(),
            seed: 1,
            replications: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.name.as_str()) {
            return Err(Error::UnknownExperiment(self.name.clone()));
        }
        self.base().map(|_| ())
    }

    /// Configuration shared by every parameter set of the run.
    fn base(&self) -> Result<ScenarioConfig> {
        let mut cfg = apply_overrides(&ScenarioConfig::default(), &self.overrides)?;
        cfg.seed = self.seed;
        Ok(cfg)
    }

    fn replications(&self, default: usize) -> usize {
        self.replications.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSet {
    pub label: String,
    pub config: ScenarioConfig,
    pub fingerprint: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub code_version: String,
    /// Hash over the experiment name and every effective configuration.
    pub fingerprint: String,
    pub parameter_sets: Vec<ParameterSet>,
    pub files: Vec<FileRecord>,
    pub total_seconds: f64,
}

struct Collector {
    sets: Vec<ParameterSet>,
    tables: Vec<(String, Table)>,
}

impl Collector {
    fn record(&mut self, label: String, config: &ScenarioConfig, started: Instant) {
        self.sets.push(ParameterSet {
            label,
            config: *config,
            fingerprint: config.fingerprint(),
            seconds: started.elapsed().as_secs_f64(),
        });
    }
}

/// Runs `spec`, writes its CSV files and `manifest.json` into the output
/// directory, and returns the manifest.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Manifest> {
    spec.validate()?;
    let started = Instant::now();
    let mut out = Collector {
        sets: Vec::new(),
        tables: Vec::new(),
    };
    match spec.name.as_str() {
        "fig3" => fig3(spec, &mut out)?,
        "fig4" => fig4(spec, &mut out)?,
        "fig5" => fig5(spec, &mut out)?,
        "fig6" => fig6(spec, &mut out)?,
        "fig7" => fig7(spec, &mut out)?,
        "custom" => custom(spec, &mut out)?,
        _ => unreachable!("validated"),
    }
    let dir = &spec.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut files = Vec::new();
    for (name, table) in &out.tables {
        let text = table.to_csv();
        let path = dir.join(name);
        std::fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
        files.push(FileRecord {
            name: name.clone(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
    }
    let mut h = Sha256::new();
    h.update(spec.name.as_bytes());
    for s in &out.sets {
        h.update(s.label.as_bytes());
        h.update(s.fingerprint.as_bytes());
    }
    let manifest = Manifest {
        experiment: spec.name.clone(),
        seed: spec.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        fingerprint: hex::encode(h.finalize()),
        parameter_sets: out.sets,
        files,
        total_seconds: started.elapsed().as_secs_f64(),
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(|e| io_error(&path, e))?;
    Ok(manifest)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Analytic context matching a simulation configuration.
pub fn context_for(cfg: &ScenarioConfig, grid: GridConfig) -> Result<SinrContext> {
    let mis = cfg.misalignment()?;
    let mut ctx = SinrContext::new(cfg.beam()?, mis, mis, cfg.pt, cfg.n0, cfg.lambda, cfg.alpha)?;
    ctx.d0 = cfg.d0;
    ctx.region_radius = cfg.r0;
    ctx.grid = grid;
    Ok(ctx)
}

fn percentile_header(prefix: &str) -> Vec<String> {
    PERCENTILES
        .iter()
        .map(|p| format!("{prefix}p{p:02}_db"))
        .collect()
}

fn empirical_percentiles_db(sorted: &[f64]) -> Vec<Cell> {
    PERCENTILES
        .iter()
        .map(|&p| to_db(stats::quantile_sorted(sorted, p as f64 / 100.0)).into())
        .collect()
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Center-receiver run: bounds, exact law and simulation on the dB grid.
fn center_run(cfg: &ScenarioConfig, bounds: &mut Table, summary: &mut Table) -> Result<()> {
    let ctx = context_for(cfg, GridConfig::default())?;
    let laws = CenterReceiverLaws::compute(&ctx, cfg.n)?;
    let law = laws.sinr(cfg.n0, &ctx.grid)?;
    let grid_db = sinr_grid_db();
    let xs: Vec<f64> = grid_db.iter().map(|&d| 10f64.powf(d / 10.0)).collect();
    let b = laws.bounds(cfg.n0, &xs)?;
    let set = monte_carlo::simulate(cfg)?;
    let s = sorted(&set.samples);
    let emp = stats::empirical_cdf(&s)?;
    for (i, &db) in grid_db.iter().enumerate() {
        bounds.push(vec![
            cfg.theta_m.into(),
            cfg.eta.into(),
            cfg.n.into(),
            cfg.rho.into(),
            db.into(),
            b.lower[i].into(),
            b.upper[i].into(),
            emp.eval(xs[i]).into(),
            law.cdf(xs[i]).into(),
        ]);
    }
    let mut row: Vec<Cell> = vec![
        cfg.theta_m.into(),
        cfg.eta.into(),
        cfg.n.into(),
        cfg.rho.into(),
        s.len().into(),
    ];
    row.extend(empirical_percentiles_db(&s));
    row.extend(analytic_percentiles_db(&law));
    row.push(stats::ks_statistic_mixed(&s, |x| law.cdf(x)).into());
    row.push(stats::dkw_epsilon(s.len(), 0.01).into());
    summary.push(row);
    Ok(())
}

fn analytic_percentiles_db(law: &MixedDistribution) -> Vec<Cell> {
    PERCENTILES
        .iter()
        .map(|&p| to_db(law.quantile(p as f64 / 100.0)).into())
        .collect()
}

fn center_tables() -> (Table, Table) {
    let bounds = Table::new(&[
        "theta_m_rad",
        "eta",
        "n",
        "rho",
        "sinr_db",
        "lower_cdf",
        "upper_cdf",
        "empirical_cdf",
        "analytic_cdf",
    ]);
    let mut header: Vec<String> = ["theta_m_rad", "eta", "n", "rho", "replications"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(percentile_header(""));
    header.extend(percentile_header("analytic_"));
    header.push("ks_distance".into());
    header.push("dkw_epsilon_99".into());
    (bounds, Table::new(&header))
}

fn center_family(
    out: &mut Collector,
    name: &str,
    configs: Vec<(String, ScenarioConfig)>,
) -> Result<()> {
    let (mut bounds, mut summary) = center_tables();
    for (label, cfg) in configs {
        let t = Instant::now();
        center_run(&cfg, &mut bounds, &mut summary)?;
        out.record(label, &cfg, t);
    }
    out.tables.push((format!("{name}_bounds.csv"), bounds));
    out.tables.push((format!("{name}_summary.csv"), summary));
    Ok(())
}

fn fig3(spec: &ExperimentSpec, out: &mut Collector) -> Result<()> {
    let base = ScenarioConfig {
        n: 11,
        eta: 0.4,
        rho: 1.0 / 20.0,
        scenario: Scenario::CenterRx,
        replications: spec.replications(100_000),
        ..spec.base()?
    };
    let configs = [PI / 12.0, PI / 6.0, PI / 3.0]
        .iter()
        .map(|&theta_m| {
            (
                format!("theta_m={theta_m}"),
                ScenarioConfig { theta_m, ..base },
            )
        })
        .collect();
    center_family(out, "fig3", configs)
}

fn fig4(spec: &ExperimentSpec, out: &mut Collector) -> Result<()> {
    let base = ScenarioConfig {
        n: 21,
        theta_m: PI / 6.0,
        rho: 1.0 / 20.0,
        scenario: Scenario::CenterRx,
        replications: spec.replications(100_000),
        ..spec.base()?
    };
    let configs = [0.4, 0.5, 0.6]
        .iter()
        .map(|&eta| (format!("eta={eta}"), ScenarioConfig { eta, ..base }))
        .collect();
    center_family(out, "fig4", configs)
}

fn fig5(spec: &ExperimentSpec, out: &mut Collector) -> Result<()> {
    let base = ScenarioConfig {
        rho: 1.0 / 20.0,
        scenario: Scenario::RandomTypical,
        replications: spec.replications(50_000),
        ..spec.base()?
    };
    let mut cdf = Table::new(&["theta_m_rad", "eta", "n", "sinr_db", "empirical_cdf"]);
    let mut header: Vec<String> = ["theta_m_rad", "eta", "n", "replications"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(percentile_header(""));
    let mut pct = Table::new(&header);
    let mut gaps = Table::new(&["theta_m_rad", "eta", "percentile", "gap_db"]);
    let grid_db = sinr_grid_db();
    for theta_m in [PI / 12.0, PI / 2.0] {
        for eta in [0.2, 0.8] {
            let mut q = Vec::new();
            for n in [1usize, 30] {
                let cfg = ScenarioConfig {
                    theta_m,
                    eta,
                    n,
                    ..base
                };
                let t = Instant::now();
                let s = sorted(&monte_carlo::simulate(&cfg)?.samples);
                let emp = stats::empirical_cdf(&s)?;
                for &db in &grid_db {
                    cdf.push(vec![
                        theta_m.into(),
                        eta.into(),
                        n.into(),
                        db.into(),
                        emp.eval(10f64.powf(db / 10.0)).into(),
                    ]);
                }
                let mut row: Vec<Cell> = vec![theta_m.into(), eta.into(), n.into(), s.len().into()];
                row.extend(empirical_percentiles_db(&s));
                pct.push(row);
                q.push(s);
                out.record(format!("theta_m={theta_m},eta={eta},n={n}"), &cfg, t);
            }
            for p in PERCENTILES {
                let f = p as f64 / 100.0;
                let gap = to_db(stats::quantile_sorted(&q[0], f))
                    - to_db(stats::quantile_sorted(&q[1], f));
                gaps.push(vec![
                    theta_m.into(),
                    eta.into(),
                    (p as usize).into(),
                    gap.into(),
                ]);
            }
        }
    }
    out.tables.push(("fig5_cdf.csv".into(), cdf));
    out.tables.push(("fig5_percentiles.csv".into(), pct));
    out.tables.push(("fig5_gaps.csv".into(), gaps));
    Ok(())
}

const THROUGHPUT_HEADER: [&str; 7] = [
    "theta_m_rad",
    "n",
    "rho",
    "sum_rate_bps",
    "per_link_rate_bps",
    "typical_link_rate_bps",
    "replications",
];

fn throughput_row(cfg: &ScenarioConfig) -> Result<Vec<Cell>> {
    let t = monte_carlo::sum_throughput(cfg)?;
    Ok(vec![
        cfg.theta_m.into(),
        cfg.n.into(),
        cfg.rho.into(),
        t.sum_bps.into(),
        t.per_link_bps.into(),
        t.typical_link_bps.into(),
        t.replications.into(),
    ])
}

fn fig6(spec: &ExperimentSpec, out: &mut Collector) -> Result<()> {
    let base = ScenarioConfig {
        eta: THROUGHPUT_ETA,
        rho: 1.0 / 20.0,
        scenario: Scenario::RandomTypical,
        replications: spec.replications(2_000),
        ..spec.base()?
    };
    let mut table = Table::new(&THROUGHPUT_HEADER);
    for theta_m in [PI / 12.0, PI / 6.0, PI / 3.0, PI / 2.0] {
        for n in 1..=30 {
            let cfg = ScenarioConfig { theta_m, n, ..base };
            let t = Instant::now();
            table.push(throughput_row(&cfg)?);
            out.record(format!("theta_m={theta_m},n={n}"), &cfg, t);
        }
    }
    out.tables.push(("fig6_throughput.csv".into(), table));
    Ok(())
}

fn fig7(spec: &ExperimentSpec, out: &mut Collector) -> Result<()> {
    let base = ScenarioConfig {
        eta: THROUGHPUT_ETA,
        scenario: Scenario::RandomTypical,
        replications: spec.replications(4_000),
        ..spec.base()?
    };
    let mut header: Vec<&str> = THROUGHPUT_HEADER.to_vec();
    header.push("change_vs_aligned");
    let mut table = Table::new(&header);
    for theta_m in [PI / 6.0, PI / 3.0] {
        for n in [10usize, 20, 30] {
            let mut aligned = f64::NAN;
            for rho in FIG7_RHOS {
                let cfg = ScenarioConfig {
                    theta_m,
                    n,
                    rho,
                    ..base
                };
                let t = Instant::now();
                let mut row = throughput_row(&cfg)?;
                let per_link = row[4].as_f64().expect("numeric");
                if rho == 0.0 {
                    aligned = per_link;
                }
                row.push((per_link / aligned - 1.0).into());
                table.push(row);
                out.record(format!("theta_m={theta_m},n={n},rho={rho}"), &cfg, t);
            }
        }
    }
    out.tables.push(("fig7_throughput.csv".into(), table));
    Ok(())
}

fn custom(spec: &ExperimentSpec, out: &mut Collector) -> Result<()> {
    let mut cfg = spec.base()?;
    if let Some(r) = spec.replications {
        cfg.replications = r;
    }
    let t = Instant::now();
    match cfg.scenario {
        Scenario::CenterRx => {
            let (mut bounds, mut summary) = center_tables();
            center_run(&cfg, &mut bounds, &mut summary)?;
            out.tables.push(("custom_bounds.csv".into(), bounds));
            out.tables.push(("custom_summary.csv".into(), summary));
        }
        Scenario::RandomTypical => {
            let set = monte_carlo::simulate_with_rates(&cfg)?;
            out.tables.push((
                "custom_summary.csv".into(),
                simulation_summary(&cfg, &set, None)?,
            ));
            let mut t = Table::new(&THROUGHPUT_HEADER);
            t.push(throughput_row(&cfg)?);
            out.tables.push(("custom_throughput.csv".into(), t));
        }
    }
    out.record("custom".into(), &cfg, t);
    Ok(())
}

/// One-row summary of a simulation: SINR percentiles in dB, mean typical
/// rate and, when `rate_threshold` is given, the outage frequency.
pub fn simulation_summary(
    cfg: &ScenarioConfig,
    set: &SinrSampleSet,
    rate_threshold: Option<f64>,
) -> Result<Table> {
    if set.samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut header: Vec<String> = vec![
        "n".into(),
        "theta_m_rad".into(),
        "eta".into(),
        "rho".into(),
        "replications".into(),
    ];
    header.extend(percentile_header(""));
    header.push("mean_rate_bps".into());
    if rate_threshold.is_some() {
        header.push("rate_threshold_bps".into());
        header.push("outage".into());
    }
    let s = sorted(&set.samples);
    let mut row: Vec<Cell> = vec![
        cfg.n.into(),
        cfg.theta_m.into(),
        cfg.eta.into(),
        cfg.rho.into(),
        s.len().into(),
    ];
    row.extend(empirical_percentiles_db(&s));
    row.push(
        stats::mean(
            &s.iter()
                .map(|&g| shannon_rate(g, cfg.bandwidth))
                .collect::<Vec<_>>(),
        )
        .into(),
    );
    if let Some(r) = rate_threshold {
        row.push(r.into());
        row.push(monte_carlo::outage_estimate(&s, r, cfg.bandwidth)?.into());
    }
    let mut t = Table::new(&header);
    t.push(row);
    Ok(t)
}

/// Simulates `base` once per value of parameter `name`.
pub fn sweep(base: &ScenarioConfig, name: &str, values: &[f64]) -> Result<Table> {
    if values.is_empty() {
        return Err(Error::EmptyInput("sweep values"));
    }
    let mut header: Vec<String> = vec!["parameter".into(), "value".into()];
    header.extend(percentile_header(""));
    header.push("typical_rate_bps".into());
    header.push("sum_rate_bps".into());
    let mut t = Table::new(&header);
    for &v in values {
        let cfg = with_parameter(base, name, v)?;
        let set = monte_carlo::simulate_with_rates(&cfg)?;
        let rates = set.per_link_rates.as_ref().expect("rates requested");
        let r = rates.len() as f64;
        let mut row: Vec<Cell> = vec![name.into(), v.into()];
        row.extend(empirical_percentiles_db(&sorted(&set.samples)));
        row.push((rates.iter().map(|x| x[0]).sum::<f64>() / r).into());
        row.push((rates.iter().map(|x| x.iter().sum::<f64>()).sum::<f64>() / r).into());
        t.push(row);
    }
    Ok(t)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ParameterMismatch(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_experiment() {
        let spec = ExperimentSpec::new("fig9", "/tmp/unused");
        assert!(matches!(
            run_experiment(&spec),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn sweep_shape() {
        let base = ScenarioConfig {
            replications: 50,
            ..Default::default()
        };
        let t = sweep(&base, "rho", &[0.0, 0.05]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.values("value").unwrap(), vec![0.0, 0.05]);
        assert!(sweep(&base, "rho", &[0.5]).is_err());
    }
}
