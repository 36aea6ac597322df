//! SINR law of one link for a fixed deployment, averaged over sampled deployments.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmwave_misalign::analytic::{conditional_sinr_density, marginal_sinr_density, SinrContext};
use mmwave_misalign::antenna::to_db;
use mmwave_misalign::geometry::{sample_deployment, OrientationMode};

fn main() -> mmwave_misalign::Result<()> {
    let ctx = SinrContext::with_defaults(PI / 6.0, 0.4, 0.05)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dep = sample_deployment(5, 15.0, &mut rng, OrientationMode::Paired)?;
    let law = conditional_sinr_density(&ctx, &dep, 0.0)?;
    println!(
        "fixed deployment: SINR 10% / 50% / 90% = {:.2} / {:.2} / {:.2} dB",
        to_db(law.quantile(0.1)),
        to_db(law.quantile(0.5)),
        to_db(law.quantile(0.9))
    );

    let marginal = marginal_sinr_density(&ctx, 5, 32, OrientationMode::Paired, &mut rng)?;
    println!(
        "32 sampled deployments: SINR 10% / 50% / 90% = {:.2} / {:.2} / {:.2} dB",
        to_db(marginal.quantile(0.1)),
        to_db(marginal.quantile(0.5)),
        to_db(marginal.quantile(0.9))
    );
    Ok(())
}
