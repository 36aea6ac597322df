//! Law of the gain seen through a misaligned beam, on and off boresight.

use std::f64::consts::PI;

use mmwave_misalign::analytic::{departure_gain_density, gain_density};
use mmwave_misalign::antenna::to_db;
use mmwave_misalign::{BeamParameters, MisalignmentModel};

fn main() -> mmwave_misalign::Result<()> {
    let beam = BeamParameters::solve(PI / 6.0, 0.4)?;
    let mis = MisalignmentModel::new(PI / 6.0, 0.1)?;

    let g = gain_density(&beam, &mis, 4096)?;
    println!("aligned link, Gm = {:.2} dB", to_db(beam.g_main));
    for q in [0.05, 0.5, 0.95] {
        println!(
            "  {:>4.0}% quantile {:>6.2} dB",
            100.0 * q,
            to_db(g.quantile(q))
        );
    }

    for phi_deg in [5.0f64, 12.0, 40.0] {
        let d = departure_gain_density(&beam, &mis, phi_deg.to_radians(), 4096)?;
        let side: f64 = d.atoms().iter().map(|a| a.mass).sum();
        println!(
            "path {phi_deg:>4.0} deg off boresight: side-lobe probability {side:.4}, mean gain {:.2} dB",
            to_db(d.mean())
        );
    }
    Ok(())
}
