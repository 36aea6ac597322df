use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmwave_misalign::analytic::{
    gain_density, marginal_sinr_density, CenterReceiverLaws, GridConfig, MixedDistribution,
};
use mmwave_misalign::antenna::to_db;
use mmwave_misalign::experiments::{self, ExperimentSpec, Overrides, Table};
use mmwave_misalign::monte_carlo::{self, Scenario, ScenarioConfig};
use mmwave_misalign::{stats, BeamParameters, Error, Result};

#[derive(Parser)]
#[command(
    name = "mmwave",
    version,
    about = "SINR laws and simulation for 60 GHz links with beam misalignment"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with scenario parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (or directory for `run`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    replications: Option<usize>,
    /// Worker threads; all outputs are identical for any value.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args)]
struct Params {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    theta_m: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    pt: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n0: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    CenterRx,
    RandomTypical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    /// SINR at the hall center (exact law).
    Sinr,
    /// SINR averaged over sampled conditions.
    SinrSampled,
    /// Gain of a misaligned boresight.
    Gain,
    /// Received power of the center link.
    Signal,
    /// One interference term at the center.
    Interference,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the antenna gain over [-pi, pi].
    Pattern {
        #[arg(long, default_value_t = PI / 6.0)]
        theta_m: f64,
        #[arg(long, default_value_t = 0.4)]
        eta: f64,
        #[arg(long, default_value_t = 721)]
        points: usize,
    },
    /// Tabulate an analytic law: value, pdf, cdf.
    Analytic {
        #[command(flatten)]
        params: Params,
        #[arg(long, value_enum, default_value = "sinr")]
        law: Law,
        /// Grid points of the distribution engine.
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        /// Conditions drawn for `sinr-sampled`.
        #[arg(long, default_value_t = 64)]
        conditions: usize,
    },
    /// CDF bounds at the hall center next to the empirical CDF.
    Bounds {
        #[command(flatten)]
        params: Params,
    },
    /// Simulate and summarize the typical-link SINR.
    Simulate {
        #[command(flatten)]
        params: Params,
        /// Rate threshold for the outage column, bit/s.
        #[arg(long)]
        rate_threshold: Option<f64>,
        /// Also write raw SINR samples (dB) to this file.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Run a named experiment (fig3 … fig7, custom) into the --out directory.
    Run { name: String },
    /// Simulate once per value of one parameter.
    Sweep {
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn overrides(global: &Global, params: &Params) -> Result<Overrides> {
    let mut o = match &global.config {
        Some(p) => experiments::parse_overrides(p)?,
        None => Overrides::new(),
    };
    let mut set = |k: &str, v: serde_json::Value| {
        o.insert(k.to_string(), v);
    };
    if let Some(v) = params.n {
        set("n", v.into());
    }
    for (k, v) in [
        ("theta_m", params.theta_m),
        ("eta", params.eta),
        ("rho", params.rho),
        ("pt", params.pt),
        ("lambda", params.lambda),
        ("alpha", params.alpha),
        ("n0", params.n0),
        ("r0", params.r0),
        ("d0", params.d0),
        ("bandwidth", params.bandwidth),
    ] {
        if let Some(v) = v {
            set(k, v.into());
        }
    }
    if let Some(s) = params.scenario {
        set(
            "scenario",
            match s {
                ScenarioArg::CenterRx => "center_rx",
                ScenarioArg::RandomTypical => "random_typical",
            }
            .into(),
        );
    }
    if let Some(v) = global.replications {
        set("replications", v.into());
    }
    if let Some(v) = global.seed {
        set("seed", v.into());
    }
    Ok(o)
}

fn scenario_config(global: &Global, params: &Params) -> Result<ScenarioConfig> {
    experiments::apply_overrides(&ScenarioConfig::default(), &overrides(global, params)?)
}

fn emit(global: &Global, table: &Table) -> Result<()> {
    match &global.out {
        Some(p) => table.write(p),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn law_table(d: &MixedDistribution) -> Table {
    let mut t = Table::new(&["value", "pdf", "cdf"]);
    let mut xs: Vec<f64> = d.grid().to_vec();
    xs.extend(d.atoms().iter().map(|a| a.location));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        t.push(vec![x.into(), d.pdf(x).into(), d.cdf(x).into()]);
    }
    t
}

fn center_config(global: &Global, params: &Params) -> Result<ScenarioConfig> {
    let cfg = scenario_config(global, params)?;
    if cfg.scenario != Scenario::CenterRx {
        return Err(Error::ParameterMismatch(
            "analytic laws are available for center_rx only".into(),
        ));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Pattern {
            theta_m,
            eta,
            points,
        } => {
            let beam = BeamParameters::solve(*theta_m, *eta)?;
            let mut t = Table::new(&["theta_rad", "gain_linear", "gain_db"]);
            for (theta, gain) in beam.table(*points) {
                t.push(vec![theta.into(), gain.into(), to_db(gain).into()]);
            }
            emit(g, &t)
        }
        Command::Analytic {
            params,
            law,
            grid,
            conditions,
        } => {
            let cfg = center_config(g, params)?;
            let ctx = experiments::context_for(&cfg, GridConfig::with_points(*grid))?;
            let d = match law {
                Law::Gain => gain_density(&ctx.beam, &ctx.mis_tx, *grid)?,
                Law::Sinr => CenterReceiverLaws::compute(&ctx, cfg.n)?.sinr(cfg.n0, &ctx.grid)?,
                Law::Signal => CenterReceiverLaws::compute(&ctx, 1)?.signal,
                Law::Interference => CenterReceiverLaws::compute(&ctx, 1)?.component,
                Law::SinrSampled => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    marginal_sinr_density(
                        &ctx,
                        cfg.n,
                        *conditions,
                        cfg.scenario.orientation_mode(),
                        &mut rng,
                    )?
                }
            };
            emit(g, &law_table(&d))
        }
        Command::Bounds { params } => {
            let cfg = center_config(g, params)?;
            let ctx = experiments::context_for(&cfg, GridConfig::default())?;
            let laws = CenterReceiverLaws::compute(&ctx, cfg.n)?;
            let grid_db = experiments::sinr_grid_db();
            let xs: Vec<f64> = grid_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
            let b = laws.bounds(cfg.n0, &xs)?;
            let emp = stats::empirical_cdf(&monte_carlo::simulate(&cfg)?.samples)?;
            let mut t = Table::new(&["x_db", "lower", "upper", "empirical"]);
            for (i, &db) in grid_db.iter().enumerate() {
                t.push(vec![
                    db.into(),
                    b.lower[i].into(),
                    b.upper[i].into(),
                    emp.eval(xs[i]).into(),
                ]);
            }
            emit(g, &t)
        }
        Command::Simulate {
            params,
            rate_threshold,
            samples,
        } => {
            let cfg = scenario_config(g, params)?;
            let set = monte_carlo::simulate(&cfg)?;
            if let Some(path) = samples {
                let mut t = Table::new(&["replication", "sinr_db"]);
                for (i, &s) in set.samples.iter().enumerate() {
                    t.push(vec![i.into(), to_db(s).into()]);
                }
                t.write(path)?;
            }
            emit(
                g,
                &experiments::simulation_summary(&cfg, &set, *rate_threshold)?,
            )
        }
        Command::Run { name } => {
            let mut spec = ExperimentSpec::new(
                name,
                g.out.clone().unwrap_or_else(|| PathBuf::from("results")),
            );
            spec.overrides = match &g.config {
                Some(p) => experiments::parse_overrides(p)?,
                None => Overrides::new(),
            };
            spec.seed = g.seed.unwrap_or(1);
            spec.replications = g.replications;
            let m = experiments::run_experiment(&spec)?;
            for f in &m.files {
                println!("{}", Path::new(&spec.output_dir).join(&f.name).display());
            }
            Ok(())
        }
        Command::Sweep {
            params,
            param,
            values,
        } => {
            let cfg = scenario_config(g, params)?;
            emit(g, &experiments::sweep(&cfg, param, values)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!(
                "{}",
                serde_json::json!({ "error": "usage", "message": first })
            );
            return ExitCode::from(2);
        }
    };
    let workers = cli.global.workers;
    let result = match workers {
        Some(w) => experiments::with_workers(w, || run(cli)).and_then(|r| r),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(2)
        }
    }
}
