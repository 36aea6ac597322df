//! Aggregate interference at the hall center by grid convolution and by
//! Laplace inversion.

use std::f64::consts::PI;

use mmwave_misalign::analytic::{CenterReceiverLaws, SinrContext, SumMethod};
use mmwave_misalign::antenna::to_db;

fn main() -> mmwave_misalign::Result<()> {
    let ctx = SinrContext::with_defaults(PI / 6.0, 0.4, 0.05)?;
    let laws = CenterReceiverLaws::compute(&ctx, 1)?;
    for k in [1, 5, 10] {
        let grid = laws.interference_cdf(k, SumMethod::GridConv, &ctx.grid)?;
        let laplace = laws.interference_cdf(k, SumMethod::Laplace, &ctx.grid)?;
        println!(
            "{k:>2} interferers: median {:>7.2} dBm, methods differ by {:.1e}",
            to_db(grid.quantile(0.5)),
            grid.sup_distance(&laplace)
        );
    }
    Ok(())
}
