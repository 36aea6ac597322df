//! CDF bounds on the SINR at the hall center next to the exact law and a simulation.

use mmwave_misalign::analytic::{CenterReceiverLaws, GridConfig};
use mmwave_misalign::antenna::from_db;
use mmwave_misalign::experiments::context_for;
use mmwave_misalign::monte_carlo::{simulate, ScenarioConfig};
use mmwave_misalign::stats;

fn main() -> mmwave_misalign::Result<()> {
    let cfg = ScenarioConfig {
        replications: 20_000,
        ..ScenarioConfig::default()
    };
    let ctx = context_for(&cfg, GridConfig::default())?;
    let laws = CenterReceiverLaws::compute(&ctx, cfg.n)?;
    let exact = laws.sinr(cfg.n0, &ctx.grid)?;
    let db: Vec<f64> = (0..=12).map(|k| -10.0 + 5.0 * k as f64).collect();
    let xs: Vec<f64> = db.iter().map(|&d| from_db(d)).collect();
    let bounds = laws.bounds(cfg.n0, &xs)?;
    let emp = stats::empirical_cdf(&simulate(&cfg)?.samples)?;
    println!("sinr_db  lower   exact   simulated  upper");
    for (k, &x) in xs.iter().enumerate() {
        println!(
            "{:>7.1}  {:.4}  {:.4}  {:.4}     {:.4}",
            db[k],
            bounds.lower[k],
            exact.cdf(x),
            emp.eval(x),
            bounds.upper[k]
        );
    }
    Ok(())
}
