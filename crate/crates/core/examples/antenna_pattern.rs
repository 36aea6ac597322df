//! Solves the sectored pattern for a few beamwidths and prints its gains.

use std::f64::consts::PI;

use mmwave_misalign::antenna::to_db;
use mmwave_misalign::BeamParameters;

fn main() -> mmwave_misalign::Result<()> {
    println!("theta_m_deg  eta   Gm_dB   Gs_dB   radiated/2pi");
    for theta_m in [PI / 12.0, PI / 6.0, PI / 3.0] {
        for eta in [0.4, 0.6] {
            let b = BeamParameters::solve(theta_m, eta)?;
            println!(
                "{:>11.1}  {:.1}  {:>6.2}  {:>6.2}   {:.12}",
                theta_m.to_degrees(),
                eta,
                to_db(b.g_main),
                to_db(b.g_side),
                b.radiated_power()? / (2.0 * PI)
            );
        }
    }

    let b = BeamParameters::solve(PI / 6.0, 0.4)?;
    println!("\ngain across the main lobe (theta_m = 30 deg, eta = 0.4):");
    for k in 0..=8 {
        let t = 0.5 * b.theta_m * k as f64 / 6.0;
        println!(
            "  {:>5.2} deg  {:>6.2} dB",
            t.to_degrees(),
            to_db(b.gain(t)?)
        );
    }
    Ok(())
}
