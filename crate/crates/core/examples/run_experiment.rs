//! Runs a configured experiment into a directory and a one-parameter sweep.

use mmwave_misalign::experiments::{
    parse_config_str, run_experiment, sweep, ExperimentSpec, Overrides,
};

fn main() -> mmwave_misalign::Result<()> {
    let out = std::env::temp_dir().join("mmwave-example");
    let mut spec = ExperimentSpec::new("custom", &out);
    spec.overrides =
        Overrides::from([("n".to_string(), 8.into()), ("rho".to_string(), 0.1.into())]);
    spec.replications = Some(2000);
    let manifest = run_experiment(&spec)?;
    println!(
        "wrote {} files to {} in {:.1} s",
        manifest.files.len(),
        out.display(),
        manifest.total_seconds
    );
    for f in &manifest.files {
        println!("  {} {}", f.name, f.sha256);
    }

    let base = parse_config_str("replications = 2000\nscenario = \"random_typical\"\n")?;
    print!("{}", sweep(&base, "theta_m", &[0.26, 0.52, 1.05])?.to_csv());
    Ok(())
}
