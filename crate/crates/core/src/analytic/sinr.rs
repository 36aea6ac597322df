//! SINR laws: conditional density, marginalization over conditions, CDF
//! bounds from the signal and interference marginals, and outage.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::laplace::{sum_interference_cdf, SumMethod};
use super::mixed::{
    auto_grid, cap_atoms, refine_grid, select_singularities, Atom, GridConfig, MixedDistribution,
    Singularity,
};
use super::ops::{convolve, mixture, product_density, reciprocal_shift};
use super::tabulated::TabulatedCdf;
use super::transforms::{
    interference_component_density, marginal_component_density, marginal_received_power_density,
    received_power_density,
};
use crate::antenna::BeamParameters;
use crate::error::{Error, Result};
use crate::geometry::{
    path_loss_with_floor, sample_deployment_with_floor, Deployment, NodePair, OrientationMode,
    Point,
};
use crate::misalignment::MisalignmentModel;
use crate::params;

/// Everything the analytic engine needs besides the node positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinrContext {
    pub beam: BeamParameters,
    pub mis_tx: MisalignmentModel,
    pub mis_rx: MisalignmentModel,
    /// Transmit power, mW.
    pub pt: f64,
    /// Noise power, mW.
    pub n0: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub d0: f64,
    pub region_radius: f64,
    pub grid: GridConfig,
}

impl SinrContext {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beam: BeamParameters,
        mis_tx: MisalignmentModel,
        mis_rx: MisalignmentModel,
        pt: f64,
        n0: f64,
        lambda: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(pt > 0.0) {
            return Err(Error::domain("pt", pt, "> 0"));
        }
        if !(n0 > 0.0) {
            return Err(Error::domain("n0", n0, "> 0"));
        }
        for m in [&mis_tx, &mis_rx] {
            if (m.theta_m - beam.theta_m).abs() > 1e-12 * beam.theta_m {
                return Err(Error::ParameterMismatch(
                    "misalignment and beam disagree on theta_m".into(),
                ));
            }
        }
        Ok(Self {
            beam,
            mis_tx,
            mis_rx,
            pt,
            n0,
            lambda,
            alpha,
            d0: crate::geometry::FAR_FIELD_FLOOR,
            region_radius: params::REGION_RADIUS_M,
            grid: GridConfig::default(),
        })
    }

    /// Default hall parameters with the given pattern and misalignment ratio.
    pub fn with_defaults(theta_m: f64, eta: f64, rho: f64) -> Result<Self> {
        let beam = BeamParameters::solve(theta_m, eta)?;
        let mis = MisalignmentModel::new(theta_m, rho)?;
        Self::new(
            beam,
            mis,
            mis,
            params::TRANSMIT_POWER_MW,
            params::default_noise_mw(),
            params::WAVELENGTH_M,
            params::PATH_LOSS_EXPONENT,
        )
    }

    pub fn with_grid(mut self, grid: GridConfig) -> Self {
        self.grid = grid;
        self
    }

    pub fn path_loss(&self, d: f64) -> Result<f64> {
        path_loss_with_floor(d, self.lambda, self.alpha, self.d0)
    }
}

/// Piecewise-linear density value inside cell `k`.
#[inline]
fn cell_pdf(grid: &[f64], dens: &[f64], k: usize, x: f64) -> f64 {
    let t = (x - grid[k]) / (grid[k + 1] - grid[k]);
    dens[k] * (1.0 - t) + dens[k + 1] * t
}

/// `∫ y·f_P(xy)·f_I(y − n0) dy` over both densities' common support.
///
/// Both factors are linear between merged breakpoints, so Simpson's rule on
/// each piece is exact.
fn ratio_density_integral(p: &MixedDistribution, i: &MixedDistribution, n0: f64, x: f64) -> f64 {
    let (pg, pd) = (p.grid(), p.density());
    let (ig, id) = (i.grid(), i.density());
    let (np, ni) = (pg.len(), ig.len());
    let lo = (n0 + ig[0]).max(pg[0] / x);
    let hi = (n0 + ig[ni - 1]).min(pg[np - 1] / x);
    if !(hi > lo) {
        return 0.0;
    }
    // cell indices containing the left end
    let mut kp = pg
        .partition_point(|&g| g <= lo * x)
        .saturating_sub(1)
        .min(np - 2);
    let mut ki = ig
        .partition_point(|&g| g <= lo - n0)
        .saturating_sub(1)
        .min(ni - 2);
    let g = |y: f64, kp: usize, ki: usize| {
        y * cell_pdf(pg, pd, kp, x * y) * cell_pdf(ig, id, ki, y - n0)
    };
    let mut acc = 0.0;
    let mut y0 = lo;
    loop {
        let bp = if kp + 1 < np {
            pg[kp + 1] / x
        } else {
            f64::INFINITY
        };
        let bi = if ki + 1 < ni {
            n0 + ig[ki + 1]
        } else {
            f64::INFINITY
        };
        let y1 = bp.min(bi).min(hi);
        if y1 > y0 {
            let ym = 0.5 * (y0 + y1);
            acc += (y1 - y0) / 6.0 * (g(y0, kp, ki) + 4.0 * g(ym, kp, ki) + g(y1, kp, ki));
        }
        if y1 >= hi {
            break;
        }
        if bp <= y1 && kp + 2 < np {
            kp += 1;
        }
        if bi <= y1 && ki + 2 < ni {
            ki += 1;
        }
        y0 = y1;
    }
    acc
}

/// Law of `P / (n0 + I)` for independent signal `P` and interference `I`.
///
/// The density part comes pointwise from `f(x) = ∫_{n0}^{∞} y f_P(xy) f_I(y − n0) dy`;
/// terms with an atom of `P` or `I` are integrated cell by cell from the CDFs.
pub fn sinr_density_from_laws(
    p: &MixedDistribution,
    i: &MixedDistribution,
    n0: f64,
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    if !(n0 > 0.0) {
        return Err(Error::domain("n0", n0, "> 0"));
    }
    if !i.has_density() {
        if let [b] = i.atoms() {
            return p.rescale(1.0 / (n0 + b.location));
        }
        let parts: Vec<MixedDistribution> = i
            .atoms()
            .iter()
            .map(|b| p.rescale(1.0 / (n0 + b.location)))
            .collect::<Result<_>>()?;
        let weighted: Vec<(f64, &MixedDistribution)> =
            i.atoms().iter().map(|b| b.mass).zip(parts.iter()).collect();
        return mixture(&weighted, cfg);
    }
    let mut atoms = Vec::new();
    for a in p.atoms() {
        for b in i.atoms() {
            atoms.push(Atom::new(a.location / (n0 + b.location), a.mass * b.mass));
        }
    }
    let (atoms, spilled) = cap_atoms(atoms, cfg.max_atoms);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let ci = i.continuous_support().expect("checked above");
    if let Some((a, b)) = p.continuous_support() {
        lo = lo.min(a / (n0 + ci.1));
        hi = hi.max(b / (n0 + ci.0));
        for at in i.atoms() {
            lo = lo.min(a / (n0 + at.location));
            hi = hi.max(b / (n0 + at.location));
        }
    }
    for at in p.atoms() {
        lo = lo.min(at.location / (n0 + ci.1));
        hi = hi.max(at.location / (n0 + ci.0));
    }
    for s in &spilled {
        lo = lo.min(s.location);
        hi = hi.max(s.location);
    }
    let mut hints = Vec::new();
    for h in p.singularities() {
        for b in i.atoms() {
            hints.push(Singularity {
                location: h.location / (n0 + b.location),
                weight: h.weight * b.mass,
            });
        }
    }
    for h in p.singularities() {
        for g in i.singularities() {
            hints.push(Singularity {
                location: h.location / (n0 + g.location),
                weight: h.weight * g.weight,
            });
        }
    }
    for g in i.singularities() {
        for a in p.atoms() {
            hints.push(Singularity {
                location: a.location / (n0 + g.location),
                weight: a.mass * g.weight,
            });
        }
    }
    let hints = select_singularities(hints, cfg.max_singularities);
    let grid = refine_grid(auto_grid(lo, hi, cfg.points), &hints);
    let n = grid.len();
    // continuous × continuous part, pointwise
    let dens: Vec<f64> = if p.has_density() {
        grid.par_iter()
            .map(|&x| {
                if x > 0.0 {
                    ratio_density_integral(p, i, n0, x)
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        vec![0.0; n]
    };
    let mut cells: Vec<f64> = (0..n - 1)
        .map(|k| 0.5 * (dens[k] + dens[k + 1]) * (grid[k + 1] - grid[k]))
        .collect();
    let total: f64 = cells.iter().sum();
    if total > 0.0 {
        let s = p.continuous_mass() * i.continuous_mass() / total;
        cells.iter_mut().for_each(|c| *c *= s);
    }
    // terms with an atom on one side enter through exact CDF increments
    let atom_cdf: Vec<f64> = grid
        .par_iter()
        .map(|&x| {
            if x <= 0.0 {
                return 0.0;
            }
            let mut c = 0.0;
            for b in i.atoms() {
                c += b.mass * p.continuous_cdf(x * (n0 + b.location));
            }
            for a in p.atoms() {
                c += a.mass * (i.continuous_mass() - i.continuous_cdf(a.location / x - n0));
            }
            c
        })
        .collect();
    cells[0] += atom_cdf[0].max(0.0);
    for k in 0..n - 1 {
        cells[k] += (atom_cdf[k + 1] - atom_cdf[k]).max(0.0);
    }
    let expected = p.continuous_mass() * i.total_mass() + p.atom_mass() * i.continuous_mass();
    let resid = expected - cells.iter().sum::<f64>();
    if resid > 0.0 {
        cells[n - 2] += resid;
    }
    Ok(MixedDistribution::from_cell_masses(
        grid, &cells, atoms, &spilled, hints,
    ))
}

/// Same law as [`sinr_density_from_laws`], computed as the product of `P`
/// and `1/(n0 + I)`.
pub fn sinr_density_via_product(
    p: &MixedDistribution,
    i: &MixedDistribution,
    n0: f64,
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    let r = reciprocal_shift(i, n0, cfg)?;
    product_density(p, &r, 1.0, cfg)
}

/// Aggregate interference at the typical receiver for a fixed deployment.
pub fn interference_density(
    ctx: &SinrContext,
    deployment: &Deployment,
    e: f64,
) -> Result<MixedDistribution> {
    let q1 = deployment.typical();
    let mut acc = MixedDistribution::point_mass(0.0);
    for qj in deployment.interferers() {
        let c = interference_component_density(ctx, q1, qj, e)?;
        acc = convolve(&acc, &c, &ctx.grid)?;
    }
    Ok(acc)
}

/// SINR law of the typical link given the deployment and its receive-side error `e`.
pub fn conditional_sinr_density(
    ctx: &SinrContext,
    deployment: &Deployment,
    e: f64,
) -> Result<MixedDistribution> {
    let p = received_power_density(ctx, deployment.typical(), e)?;
    let i = interference_density(ctx, deployment, e)?;
    sinr_density_from_laws(&p, &i, ctx.n0, &ctx.grid)
}

/// Weighted average of conditional SINR laws over given conditions `(deployment, e, weight)`.
pub fn mix_conditions(
    ctx: &SinrContext,
    conditions: &[(Deployment, f64, f64)],
) -> Result<MixedDistribution> {
    if conditions.is_empty() {
        return Err(Error::EmptyInput("conditions"));
    }
    let laws: Vec<MixedDistribution> = conditions
        .iter()
        .map(|(d, e, _)| conditional_sinr_density(ctx, d, *e))
        .collect::<Result<_>>()?;
    if laws.len() == 1 {
        return Ok(laws.into_iter().next().expect("one law"));
    }
    let weighted: Vec<(f64, &MixedDistribution)> =
        conditions.iter().map(|c| c.2).zip(laws.iter()).collect();
    mixture(&weighted, &ctx.grid)
}

/// Marginal SINR law of the typical link, averaging conditional laws over
/// `samples` random deployments and receive errors.
pub fn marginal_sinr_density<R: Rng + ?Sized>(
    ctx: &SinrContext,
    n: usize,
    samples: usize,
    mode: OrientationMode,
    rng: &mut R,
) -> Result<MixedDistribution> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    if samples == 0 {
        return Err(Error::EmptyInput("condition samples"));
    }
    let mut conditions = Vec::with_capacity(samples);
    for _ in 0..samples {
        let d = sample_deployment_with_floor(n, ctx.region_radius, ctx.d0, rng, mode)?;
        let e = ctx.mis_rx.sample(rng);
        conditions.push((d, e, 1.0));
    }
    mix_conditions(ctx, &conditions)
}

/// Lower and upper bounds on the SINR CDF at each `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfBounds {
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Bounds on `P(Y/(n0 + W) ≤ x)` from the marginal CDFs of `Y` and `W`.
///
/// `lower(x) = sup_t {F_Y((n0+t)x) − F_W(t)}` and
/// `upper(x) = 1 + inf_t {F_Y((n0+t)x) − F_W(t)}` over `t ≥ 0`, clamped to
/// `[0, 1]`, where the lower bound may use the left limit `F_W(t−)`, so it is
/// exact when `W` is a point mass. Both tables are piecewise linear, so the objective is piecewise
/// linear in `t` and its extremes sit at breakpoints (or their left limits).
/// These are enumerated exactly.
pub fn sinr_cdf_bounds(
    y_cdf: &TabulatedCdf,
    w_cdf: &TabulatedCdf,
    n0: f64,
    x_grid: &[f64],
) -> Result<CdfBounds> {
    if !(n0 > 0.0) {
        return Err(Error::domain("n0", n0, "> 0"));
    }
    let (lower, upper): (Vec<f64>, Vec<f64>) = x_grid
        .par_iter()
        .map(|&x| bounds_at(y_cdf, w_cdf, n0, x))
        .unzip();
    Ok(CdfBounds {
        x: x_grid.to_vec(),
        lower,
        upper,
    })
}

fn bounds_at(y: &TabulatedCdf, w: &TabulatedCdf, n0: f64, x: f64) -> (f64, f64) {
    let obj = |t: f64| y.eval((n0 + t) * x) - w.eval(t);
    let left = |t: f64| {
        let dt = t.abs().max(1e-300) * 1e-12;
        y.eval((n0 + t - dt) * x) - w.eval(t - dt)
    };
    let mut sup = obj(0.0);
    let mut inf = sup;
    let mut visit = |t: f64| {
        if t < 0.0 {
            return;
        }
        let v = obj(t);
        sup = sup.max(v);
        inf = inf.min(v);
        // P(W < t) is enough for the lower bound
        let dt = t.abs().max(1e-300) * 1e-12;
        sup = sup.max(y.eval((n0 + t) * x) - w.eval(t - dt));
        if t > 0.0 {
            let l = left(t);
            sup = sup.max(l);
            inf = inf.min(l);
        }
    };
    visit(0.0);
    for &t in w.xs() {
        visit(t);
    }
    let mut far = w.xs().last().copied().unwrap_or(0.0);
    if x > 0.0 {
        for &v in y.xs() {
            visit(v / x - n0);
        }
        far = far.max(y.xs().last().copied().unwrap_or(0.0) / x);
    }
    // beyond every breakpoint the objective is constant
    visit(2.0 * far + 1.0);
    (sup.clamp(0.0, 1.0), (1.0 + inf).clamp(0.0, 1.0))
}

/// `F_γ(2^{R/W} − 1)`: probability that the Shannon rate falls below `rate_threshold`.
pub fn outage_probability(
    sinr_cdf: &TabulatedCdf,
    rate_threshold: f64,
    bandwidth: f64,
) -> Result<f64> {
    if !(rate_threshold >= 0.0) {
        return Err(Error::domain("rate_threshold", rate_threshold, ">= 0"));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::domain("bandwidth", bandwidth, "> 0"));
    }
    let x = (rate_threshold / bandwidth).exp2() - 1.0;
    if x.is_infinite() {
        return Ok(sinr_cdf.ps().last().copied().unwrap_or(1.0));
    }
    // the SINR is a.s. positive, so no rate is below zero
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(sinr_cdf.eval(x))
}

/// Signal and interference marginals for a receiver at the hall center with
/// `n − 1` uniformly placed, uniformly oriented interferers.
#[derive(Debug, Clone)]
pub struct CenterReceiverLaws {
    pub signal: MixedDistribution,
    pub component: MixedDistribution,
    pub interference: MixedDistribution,
}

impl CenterReceiverLaws {
    pub fn compute(ctx: &SinrContext, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n", 0.0, "n >= 1"));
        }
        let q1 = NodePair {
            index: 0,
            tx: Point::new(1.0, 0.0),
            rx: Point::ORIGIN,
        };
        let signal = marginal_received_power_density(ctx, &q1)?;
        let component = marginal_component_density(ctx, &q1, 0.0)?;
        let interference = super::laplace::convolution_power(&component, n - 1, &ctx.grid)?;
        Ok(Self {
            signal,
            component,
            interference,
        })
    }

    /// CDF of the aggregate interference with the chosen method.
    pub fn interference_cdf(
        &self,
        k: usize,
        method: SumMethod,
        cfg: &GridConfig,
    ) -> Result<TabulatedCdf> {
        sum_interference_cdf(&self.component, k, method, cfg)
    }

    pub fn bounds(&self, n0: f64, x_grid: &[f64]) -> Result<CdfBounds> {
        sinr_cdf_bounds(
            &self.signal.to_cdf_table(),
            &self.interference.to_cdf_table(),
            n0,
            x_grid,
        )
    }

    /// SINR law of the typical link (signal and interference are independent here).
    pub fn sinr(&self, n0: f64, cfg: &GridConfig) -> Result<MixedDistribution> {
        sinr_density_via_product(&self.signal, &self.interference, n0, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::super::mixed::linear_grid;
    use super::*;
    use std::f64::consts::PI;

    fn uniform(lo: f64, hi: f64, n: usize) -> MixedDistribution {
        MixedDistribution::from_parts(linear_grid(lo, hi, n), vec![1.0 / (hi - lo); n], vec![])
            .unwrap()
    }

    #[test]
    fn no_interference_is_a_rescale() {
        let p = uniform(1.0, 2.0, 65);
        let g = sinr_density_from_laws(
            &p,
            &MixedDistribution::point_mass(0.0),
            0.5,
            &GridConfig::with_points(256),
        )
        .unwrap();
        assert!((g.cdf(3.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ratio_density_matches_product_route() {
        let cfg = GridConfig::with_points(2048);
        let p = uniform(1.0, 3.0, 257);
        let i = uniform(0.5, 1.5, 257);
        let a = sinr_density_from_laws(&p, &i, 1.0, &cfg).unwrap();
        let b = sinr_density_via_product(&p, &i, 1.0, &cfg).unwrap();
        let edges = linear_grid(0.3, 1.6, 200);
        assert!(a.binned_l1(&b, &edges) < 1e-3);
        assert!((a.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_with_no_interference_are_tight_above() {
        let y = TabulatedCdf::new(vec![1.0, 2.0], vec![0.0, 1.0]).unwrap();
        let w = TabulatedCdf::step(0.0);
        let b = sinr_cdf_bounds(&y, &w, 1.0, &[0.5, 1.2, 1.5, 3.0]).unwrap();
        for (k, &x) in b.x.iter().enumerate() {
            assert!((b.upper[k] - y.eval(x)).abs() < 1e-12);
            assert!(b.lower[k] <= b.upper[k]);
        }
    }

    #[test]
    fn bounds_sandwich_exact_ratio_law() {
        let cfg = GridConfig::with_points(1024);
        let p = uniform(1.0, 3.0, 129);
        let i = uniform(0.0, 2.0, 129);
        let exact = sinr_density_via_product(&p, &i, 1.0, &cfg).unwrap();
        let xs: Vec<f64> = (1..40).map(|k| 0.1 * k as f64).collect();
        let b = sinr_cdf_bounds(&p.to_cdf_table(), &i.to_cdf_table(), 1.0, &xs).unwrap();
        for (k, &x) in xs.iter().enumerate() {
            let f = exact.cdf(x);
            assert!(
                b.lower[k] <= f + 1e-6 && f <= b.upper[k] + 1e-6,
                "{x}: {} {f} {}",
                b.lower[k],
                b.upper[k]
            );
        }
    }

    #[test]
    fn outage_edges() {
        let c = TabulatedCdf::new(vec![0.0, 10.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(outage_probability(&c, 0.0, 5e8).unwrap(), 0.0);
        assert_eq!(outage_probability(&c, 1e12, 5e8).unwrap(), 1.0);
        assert!((outage_probability(&c, 5e8, 5e8).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_link_without_misalignment_is_a_point_mass() {
        let ctx = SinrContext::with_defaults(PI / 6.0, 0.4, 0.0)
            .unwrap()
            .with_grid(GridConfig::with_points(256));
        let d = Deployment {
            pairs: vec![NodePair {
                index: 0,
                tx: Point::new(3.0, 0.0),
                rx: Point::ORIGIN,
            }],
            region_radius: 15.0,
            orientation_mode: OrientationMode::Paired,
        };
        let g = conditional_sinr_density(&ctx, &d, 0.0).unwrap();
        let expected = ctx.pt * ctx.beam.g_main.powi(2) * ctx.path_loss(3.0).unwrap() / ctx.n0;
        assert_eq!(g.atoms().len(), 1);
        assert!((g.atoms()[0].location / expected - 1.0).abs() < 1e-12);
    }
}
