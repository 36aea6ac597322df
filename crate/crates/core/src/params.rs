//! Default physical parameters of the indoor hall scenario.

use crate::antenna::from_db;

/// Carrier wavelength at 60 GHz, meters.
pub const WAVELENGTH_M: f64 = 5e-3;
pub const BANDWIDTH_HZ: f64 = 500e6;
pub const TRANSMIT_POWER_MW: f64 = 1.0;
pub const NOISE_DENSITY_DBM_PER_MHZ: f64 = -114.0;
/// Radius of the circular hall, meters.
pub const REGION_RADIUS_M: f64 = 15.0;
pub const PATH_LOSS_EXPONENT: f64 = 2.45;
pub const MAX_LINKS: usize = 30;

/// Noise power in milliwatts for a given bandwidth and density.
pub fn noise_power_mw(density_dbm_per_mhz: f64, bandwidth_hz: f64) -> f64 {
    from_db(density_dbm_per_mhz + 10.0 * (bandwidth_hz / 1e6).log10())
}

/// Noise power for the default density and bandwidth (about −87 dBm).
pub fn default_noise_mw() -> f64 {
    noise_power_mw(NOISE_DENSITY_DBM_PER_MHZ, BANDWIDTH_HZ)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_matches_density_times_bandwidth() {
        let n0 = default_noise_mw();
        // −114 dBm/MHz over 500 MHz is −87.01 dBm
        let dbm = -114.0 + 10.0 * 500f64.log10();
        assert!((10.0 * n0.log10() - dbm).abs() < 1e-9);
        assert!((n0 / 1.990_535_852_767_489e-9 - 1.0).abs() < 1e-12);
    }
}
