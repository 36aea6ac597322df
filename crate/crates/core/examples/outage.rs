//! Outage probability at a rate threshold, analytic and simulated.

use mmwave_misalign::analytic::{outage_probability, CenterReceiverLaws, GridConfig};
use mmwave_misalign::experiments::context_for;
use mmwave_misalign::monte_carlo::{outage_estimate, simulate, ScenarioConfig};

fn main() -> mmwave_misalign::Result<()> {
    let cfg = ScenarioConfig {
        n: 21,
        replications: 20_000,
        ..ScenarioConfig::default()
    };
    let ctx = context_for(&cfg, GridConfig::default())?;
    let law = CenterReceiverLaws::compute(&ctx, cfg.n)?
        .sinr(cfg.n0, &ctx.grid)?
        .to_cdf_table();
    let samples = simulate(&cfg)?.samples;
    for gbps in [0.5, 1.0, 2.0, 4.0] {
        let r = gbps * 1e9;
        println!(
            "{gbps:>3} Gbit/s: analytic {:.4}, simulated {:.4}",
            outage_probability(&law, r, cfg.bandwidth)?,
            outage_estimate(&samples, r, cfg.bandwidth)?
        );
    }
    Ok(())
}
