//! Average sum throughput as the number of links grows.

use mmwave_misalign::experiments::THROUGHPUT_ETA;
use mmwave_misalign::monte_carlo::{sum_throughput, Scenario, ScenarioConfig};

fn main() -> mmwave_misalign::Result<()> {
    println!(" n   sum Gbit/s  per link Gbit/s");
    for n in [1, 5, 10, 20, 30] {
        let cfg = ScenarioConfig {
            n,
            eta: THROUGHPUT_ETA,
            scenario: Scenario::RandomTypical,
            replications: 1000,
            ..ScenarioConfig::default()
        };
        let t = sum_throughput(&cfg)?;
        println!(
            "{n:>2}   {:>10.2}  {:>15.3}",
            t.sum_bps / 1e9,
            t.per_link_bps / 1e9
        );
    }
    Ok(())
}
