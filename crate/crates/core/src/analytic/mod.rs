//! Analytic SINR engine built on tabulated mixed distributions.

pub mod laplace;
pub mod mixed;
pub mod ops;
pub mod sinr;
pub mod tabulated;
pub mod transforms;

pub use laplace::{convolution_power, euler_inversion, sum_interference_cdf, SumMethod};
pub use mixed::{Atom, GridConfig, MixedDistribution, Singularity};
pub use ops::{convolve, mixture, product_density, reciprocal_shift};
pub use sinr::{
    conditional_sinr_density, interference_density, marginal_sinr_density, mix_conditions,
    outage_probability, sinr_cdf_bounds, sinr_density_from_laws, sinr_density_via_product,
    CdfBounds, CenterReceiverLaws, SinrContext,
};
pub use tabulated::TabulatedCdf;
pub use transforms::{
    departure_angle_cdf, departure_angle_density, departure_angle_pdf, departure_gain_density,
    gain_density, gain_pdf, interference_component_density, marginal_component_density,
    marginal_received_power_density, position_power_density, received_power_density,
    uniform_orientation_gain_density,
};
