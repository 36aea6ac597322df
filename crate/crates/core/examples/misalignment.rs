//! Draws boresight errors and compares them with the truncated normal law.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmwave_misalign::{stats, MisalignmentModel};

fn main() -> mmwave_misalign::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for rho in [0.01, 0.05, 1.0 / 6.0] {
        let m = MisalignmentModel::new(PI / 6.0, rho)?;
        let draws: Vec<f64> = (0..50_000).map(|_| m.sample(&mut rng)).collect();
        let ks = stats::ks_statistic(&draws, |x| m.cdf(x).unwrap());
        let sd = (draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64).sqrt();
        println!(
            "rho {rho:.3}: sigma {:.3} deg, sample sd {:.3} deg, KS {ks:.4} (1% critical {:.4})",
            m.sigma.to_degrees(),
            sd.to_degrees(),
            stats::ks_critical(draws.len(), 0.01)
        );
    }
    Ok(())
}
