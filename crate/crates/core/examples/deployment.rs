//! Samples a hall deployment and prints its nominal angles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmwave_misalign::geometry::{arrival_hat, departure_hat, sample_deployment, OrientationMode};

fn main() -> mmwave_misalign::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dep = sample_deployment(4, 15.0, &mut rng, OrientationMode::Paired)?;
    print!("{}", dep.to_text());
    let q1 = dep.typical();
    println!("\ntypical link length {:.2} m", q1.link_length());
    for qj in dep.interferers() {
        println!(
            "link {}: {:.2} m from the typical receiver, departure {:>7.2} deg, arrival {:>7.2} deg",
            qj.index,
            qj.tx.distance(q1.rx),
            departure_hat(qj, q1)?.to_degrees(),
            arrival_hat(q1, qj)?.to_degrees()
        );
    }
    Ok(())
}
