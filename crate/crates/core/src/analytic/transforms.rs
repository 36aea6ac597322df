//! Laws of gains and powers obtained by pushing angle laws through the pattern.
//!
//! Main-lobe gain laws are tabulated on angle nodes mapped through `G`, which
//! is the substitution `u = sqrt(log10(Gm/g))` in disguise: uniform steps in
//! angle put quadratically clustered nodes next to the `1/sqrt` spike at `Gm`.

use std::f64::consts::PI;

use super::mixed::{Atom, MixedDistribution, Singularity};
use super::ops::{build_from_cdf, product_density};
use super::sinr::SinrContext;
use crate::antenna::BeamParameters;
use crate::error::{Error, Result};
use crate::geometry::{
    arrival_angle, arrival_hat, departure_angle, departure_hat, wrap_angle, NodePair, Point,
};
use crate::misalignment::MisalignmentModel;

/// Geometric refinement depth next to a spike (relative offsets down to 1e-7).
const REFINE_DEPTH: i32 = 28;

/// Angular rays used by the position quadrature.
const RAYS: usize = 2048;

fn check_match(beam: &BeamParameters, mis: &MisalignmentModel) -> Result<()> {
    if (beam.theta_m - mis.theta_m).abs() > 1e-12 * beam.theta_m {
        return Err(Error::ParameterMismatch(format!(
            "beam theta_m = {} but misalignment theta_m = {}",
            beam.theta_m, mis.theta_m
        )));
    }
    Ok(())
}

/// Strictly increasing angle nodes on `[lo, hi]`: a uniform grid, the
/// given breakpoints bracketed by close neighbors, and optional geometric
/// clustering next to `lo`.
fn angle_nodes(lo: f64, hi: f64, points: usize, breaks: &[f64], cluster_at_lo: bool) -> Vec<f64> {
    let n = points.max(8);
    let w = hi - lo;
    let mut v: Vec<f64> = (0..n).map(|i| lo + w * i as f64 / (n - 1) as f64).collect();
    let delta = 1e-9 * w;
    for &b in breaks {
        for x in [b - delta, b, b + delta] {
            if x > lo && x < hi {
                v.push(x);
            }
        }
    }
    if cluster_at_lo {
        for k in 4..=REFINE_DEPTH {
            v.push(lo + w * 10f64.powf(-(k as f64) / 4.0));
        }
    }
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| *a - *b <= 1e-15 * w);
    *v.last_mut().unwrap() = hi;
    v
}

/// Pushes a law on main-lobe angles through the pattern.
///
/// `nodes` are increasing angles in `[0, θm/2]`, `fx` the angle density and
/// `cell_mass(a, b)` the exact angle mass on `[a, b]`. The continuous part
/// is renormalized to `exact_mass`.
fn push_mainlobe<F, M>(
    beam: &BeamParameters,
    nodes: &[f64],
    fx: F,
    cell_mass: M,
    exact_mass: f64,
) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64) -> f64,
    M: Fn(f64, f64) -> f64,
{
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(nodes.len());
    for &x in nodes {
        let g = beam.gain_unchecked(x);
        match kept.last() {
            Some(&(_, gp)) if g >= gp => {}
            _ => kept.push((x, g)),
        }
    }
    if kept.len() < 2 {
        return (Vec::new(), Vec::new());
    }
    let mut dens: Vec<f64> = kept
        .iter()
        .map(|&(x, g)| {
            if g < beam.g_main {
                fx(x) / beam.mainlobe_slope(g)
            } else {
                0.0
            }
        })
        .collect();
    if kept[0].1 >= beam.g_main && fx(kept[0].0) > 0.0 {
        // spike at Gm: pick the top nodal value so the top cell has its exact mass
        let h = kept[0].1 - kept[1].1;
        let m = cell_mass(kept[0].0, kept[1].0);
        dens[0] = (2.0 * m / h - dens[1]).max(0.0);
    }
    let mut grid: Vec<f64> = kept.iter().rev().map(|&(_, g)| g).collect();
    dens.reverse();
    // the side-lobe edge must sit exactly at Gs
    if (grid[0] - beam.g_side).abs() <= 1e-9 * beam.g_side {
        grid[0] = beam.g_side;
    }
    let total: f64 = (0..grid.len() - 1)
        .map(|k| 0.5 * (dens[k] + dens[k + 1]) * (grid[k + 1] - grid[k]))
        .sum();
    if total > 0.0 {
        let s = exact_mass / total;
        dens.iter_mut().for_each(|d| *d *= s);
    }
    (grid, dens)
}

/// Pointwise density of the transmit gain `G(ε)` on `(Gs, Gm)`.
pub fn gain_pdf(beam: &BeamParameters, mis: &MisalignmentModel, g: f64) -> Result<f64> {
    check_match(beam, mis)?;
    if mis.is_degenerate() {
        return Err(Error::DegenerateModel);
    }
    if !(g > beam.g_side && g < beam.g_main) {
        return Ok(0.0);
    }
    let e = beam.mainlobe_angle(g);
    Ok(2.0 * mis.pdf_unchecked(e) / beam.mainlobe_slope(g))
}

/// Law of the gain `G(ε)` seen along a link whose boresight is off by `ε`.
pub fn gain_density(
    beam: &BeamParameters,
    mis: &MisalignmentModel,
    points: usize,
) -> Result<MixedDistribution> {
    check_match(beam, mis)?;
    if mis.is_degenerate() {
        return Ok(MixedDistribution::point_mass(beam.g_main));
    }
    // beyond 9σ the remaining mass is below 1e-18
    let emax = mis.half_width().min(9.0 * mis.sigma);
    let nodes = angle_nodes(0.0, emax, points, &[], true);
    let (grid, dens) = push_mainlobe(
        beam,
        &nodes,
        |x| 2.0 * mis.pdf_unchecked(x),
        |a, b| 2.0 * mis.mass_between(a, b),
        1.0,
    );
    Ok(MixedDistribution::assemble(
        grid,
        dens,
        Vec::new(),
        vec![Singularity {
            location: beam.g_main,
            weight: 1.0,
        }],
    ))
}

/// Density of the folded departure angle `|wrap(φ̂ − ε)|` at `x ∈ [0, π]`.
pub fn departure_angle_pdf(phi_hat: f64, mis: &MisalignmentModel, x: f64) -> Result<f64> {
    if mis.is_degenerate() {
        return Err(Error::DegenerateModel);
    }
    Ok(departure_pdf_unchecked(wrap_angle(phi_hat).abs(), mis, x))
}

fn departure_pdf_unchecked(a: f64, mis: &MisalignmentModel, x: f64) -> f64 {
    if !(0.0..=PI).contains(&x) {
        return 0.0;
    }
    let fz = |u: f64| mis.pdf_unchecked(a + u) + mis.pdf_unchecked(a - u);
    fz(x) + fz(2.0 * PI - x)
}

/// CDF of the folded departure angle.
pub fn departure_angle_cdf(phi_hat: f64, mis: &MisalignmentModel, x: f64) -> f64 {
    let a = wrap_angle(phi_hat).abs();
    if x < 0.0 {
        return 0.0;
    }
    if x >= PI {
        return 1.0;
    }
    if mis.is_degenerate() {
        return if departure_angle(a, 0.0) <= x {
            1.0
        } else {
            0.0
        };
    }
    let h = mis.half_width();
    // ε ∈ [a + 2πk − x, a + 2πk + x] for the three relevant branches
    (-1..=1)
        .map(|k| {
            let c = a + 2.0 * PI * k as f64;
            let lo = (c - x).max(-h);
            let hi = (c + x).min(h);
            mis.mass_between(lo, hi)
        })
        .sum::<f64>()
        .min(1.0)
}

/// Support and kinks of the folded angle `|a − ε|`, with `ε` cut at 9σ.
fn departure_support(a: f64, mis: &MisalignmentModel) -> (f64, f64, Vec<f64>) {
    let r = mis.half_width().min(9.0 * mis.sigma);
    let lo = (a - r).max(0.0);
    let hi = (a + r).min(PI);
    let breaks = vec![(a - r).abs(), a + r, 2.0 * PI - a - r];
    (lo, hi, breaks)
}

/// Law of the folded departure angle for nominal direction `phi_hat`.
pub fn departure_angle_density(
    phi_hat: f64,
    mis: &MisalignmentModel,
    points: usize,
) -> Result<MixedDistribution> {
    let a = wrap_angle(phi_hat).abs();
    if mis.is_degenerate() {
        return Ok(MixedDistribution::point_mass(departure_angle(a, 0.0)));
    }
    let (lo, hi, breaks) = departure_support(a, mis);
    let grid = angle_nodes(lo, hi, points, &breaks, false);
    let mut dens: Vec<f64> = grid
        .iter()
        .map(|&x| departure_pdf_unchecked(a, mis, x))
        .collect();
    let total: f64 = (0..grid.len() - 1)
        .map(|k| 0.5 * (dens[k] + dens[k + 1]) * (grid[k + 1] - grid[k]))
        .sum();
    dens.iter_mut().for_each(|d| *d /= total);
    Ok(MixedDistribution::assemble(
        grid,
        dens,
        Vec::new(),
        Vec::new(),
    ))
}

/// Law of the transmit gain toward a path at nominal angle `phi_hat` from
/// the boresight: an atom at `Gs` for side-lobe departures plus a main-lobe density.
pub fn departure_gain_density(
    beam: &BeamParameters,
    mis: &MisalignmentModel,
    phi_hat: f64,
    points: usize,
) -> Result<MixedDistribution> {
    check_match(beam, mis)?;
    let a = wrap_angle(phi_hat).abs();
    if mis.is_degenerate() {
        return Ok(MixedDistribution::point_mass(
            beam.gain_unchecked(departure_angle(a, 0.0)),
        ));
    }
    let h = mis.half_width();
    let main = departure_angle_cdf(a, mis, h);
    let mut atoms = Vec::new();
    if main < 1.0 {
        atoms.push(Atom::new(beam.g_side, 1.0 - main));
    }
    let (lo, hi, breaks) = departure_support(a, mis);
    let top = hi.min(h);
    if main <= 0.0 || !(top > lo) {
        return Ok(MixedDistribution::assemble(
            Vec::new(),
            Vec::new(),
            atoms,
            Vec::new(),
        ));
    }
    let spike = lo == 0.0;
    let nodes = angle_nodes(lo, top, points, &breaks, spike);
    let (grid, dens) = push_mainlobe(
        beam,
        &nodes,
        |x| departure_pdf_unchecked(a, mis, x),
        |u, v| departure_angle_cdf(a, mis, v) - departure_angle_cdf(a, mis, u),
        main,
    );
    let hints = if spike {
        vec![Singularity {
            location: beam.g_main,
            weight: main,
        }]
    } else {
        Vec::new()
    };
    Ok(MixedDistribution::assemble(grid, dens, atoms, hints))
}

/// Transmit gain toward a fixed point when the boresight is uniform on the circle.
///
/// The departure angle is then uniform on `[0, π]` whatever the misalignment.
pub fn uniform_orientation_gain_density(beam: &BeamParameters, points: usize) -> MixedDistribution {
    let h = beam.half_main_lobe();
    let nodes = angle_nodes(0.0, h, points, &[], true);
    let main = h / PI;
    let (grid, dens) = push_mainlobe(beam, &nodes, |_| 1.0 / PI, |u, v| (v - u) / PI, main);
    MixedDistribution::assemble(
        grid,
        dens,
        vec![Atom::new(beam.g_side, 1.0 - main)],
        vec![Singularity {
            location: beam.g_main,
            weight: main,
        }],
    )
}

fn check_rx_error(ctx: &SinrContext, e: f64) -> Result<()> {
    let h = ctx.beam.half_main_lobe();
    if !(e.abs() <= h) {
        return Err(Error::domain("e", e, format!("[-{h}, {h}]")));
    }
    Ok(())
}

/// Received signal power of the typical link given its receive-side error `e`, mW.
pub fn received_power_density(
    ctx: &SinrContext,
    q1: &NodePair,
    e: f64,
) -> Result<MixedDistribution> {
    check_rx_error(ctx, e)?;
    let c = ctx.pt * ctx.path_loss(q1.link_length())? * ctx.beam.gain_unchecked(e);
    gain_density(&ctx.beam, &ctx.mis_tx, ctx.grid.points)?.rescale(c)
}

/// Power received at the typical receiver from interferer `qj`, mW.
pub fn interference_component_density(
    ctx: &SinrContext,
    q1: &NodePair,
    qj: &NodePair,
    e: f64,
) -> Result<MixedDistribution> {
    check_rx_error(ctx, e)?;
    let loss = ctx.path_loss(qj.tx.distance(q1.rx))?;
    let g_rx = ctx
        .beam
        .gain_unchecked(arrival_angle(arrival_hat(q1, qj)?, e));
    let tx = departure_gain_density(
        &ctx.beam,
        &ctx.mis_tx,
        departure_hat(qj, q1)?,
        ctx.grid.points,
    )?;
    tx.rescale(ctx.pt * loss * g_rx)
}

/// Distance from `p` to the boundary of the disk of radius `r0` along direction `psi`.
fn exit_distance(p: Point, r0: f64, psi: f64) -> f64 {
    let (s, c) = psi.sin_cos();
    let pu = p.x * c + p.y * s;
    let disc = pu * pu - (p.x * p.x + p.y * p.y - r0 * r0);
    (-pu + disc.max(0.0).sqrt()).max(0.0)
}

/// Law of `Pt·L(r)·k(ψ)` for a point uniform in the disk, seen from `center`
/// in polar coordinates `(r, ψ)` with `r ≥ d0`.
///
/// For each of the angular rays the radial law is exact; rays are combined
/// with the midpoint rule in `ψ`.
pub fn position_power_density<K>(
    ctx: &SinrContext,
    center: Point,
    k: K,
) -> Result<MixedDistribution>
where
    K: Fn(f64) -> f64,
{
    let d0 = ctx.d0;
    let base = (ctx.lambda / (4.0 * PI)).powi(2);
    let dpsi = 2.0 * PI / RAYS as f64;
    let mut rays: Vec<(f64, f64, f64)> = Vec::with_capacity(RAYS);
    let mut wsum = 0.0;
    for j in 0..RAYS {
        let psi = -PI + (j as f64 + 0.5) * dpsi;
        let rmax = exit_distance(center, ctx.region_radius, psi);
        if rmax <= d0 {
            continue;
        }
        let w = rmax * rmax - d0 * d0;
        wsum += w;
        rays.push((ctx.pt * k(psi), rmax, w));
    }
    if rays.is_empty() {
        return Err(Error::domain(
            "region_radius",
            ctx.region_radius,
            "larger than the far-field floor around the receiver",
        ));
    }
    let lmax = base * d0.powf(-ctx.alpha);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &(kk, rmax, _) in &rays {
        lo = lo.min(kk * base * rmax.powf(-ctx.alpha));
        hi = hi.max(kk * lmax);
    }
    let alpha = ctx.alpha;
    build_from_cdf(
        lo,
        hi,
        &ctx.grid,
        Vec::new(),
        Vec::new(),
        Vec::new(),
        1.0,
        |c| {
            let mut s = 0.0;
            for &(kk, rmax, w) in &rays {
                let l = c / kk;
                if l >= lmax {
                    s += w;
                    continue;
                }
                let d = (l / base).powf(-1.0 / alpha);
                if d >= rmax {
                    continue;
                }
                s += rmax * rmax - d * d;
            }
            s / wsum
        },
    )
}

/// Interference from one transmitter placed uniformly in the hall with a
/// uniformly oriented boresight, given the typical receiver's error `e`.
pub fn marginal_component_density(
    ctx: &SinrContext,
    q1: &NodePair,
    e: f64,
) -> Result<MixedDistribution> {
    check_rx_error(ctx, e)?;
    let beta = q1.rx_boresight();
    let beam = ctx.beam;
    let rx_gain = position_power_density(ctx, q1.rx, |psi| {
        beam.gain_unchecked(arrival_angle(wrap_angle(psi - beta), e))
    })?;
    let tx_gain = uniform_orientation_gain_density(&ctx.beam, ctx.grid.points);
    product_density(&rx_gain, &tx_gain, 1.0, &ctx.grid)
}

/// Received signal power when the typical transmitter is uniform in the hall
/// and both ends of the link are misaligned.
pub fn marginal_received_power_density(
    ctx: &SinrContext,
    q1: &NodePair,
) -> Result<MixedDistribution> {
    let loss = position_power_density(ctx, q1.rx, |_| 1.0)?;
    let g_tx = gain_density(&ctx.beam, &ctx.mis_tx, ctx.grid.points)?;
    let g_rx = gain_density(&ctx.beam, &ctx.mis_rx, ctx.grid.points)?;
    let gains = product_density(&g_tx, &g_rx, 1.0, &ctx.grid)?;
    product_density(&loss, &gains, 1.0, &ctx.grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> BeamParameters {
        BeamParameters::solve(PI / 6.0, 0.4).unwrap()
    }

    #[test]
    fn gain_density_has_unit_mass_and_support() {
        let b = beam();
        let m = MisalignmentModel::new(b.theta_m, 1.0 / 20.0).unwrap();
        let d = gain_density(&b, &m, 2048).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        let (lo, hi) = d.support();
        assert!(lo >= b.g_side * (1.0 - 1e-12) && hi <= b.g_main);
        assert_eq!(hi, b.g_main);
    }

    #[test]
    fn gain_pdf_integrates_to_one_with_substitution() {
        let b = beam();
        let m = MisalignmentModel::new(b.theta_m, 0.1).unwrap();
        // with g = G(e) the integral becomes ∫ 2 f_ε(e) de over [0, θm/2]
        let r = crate::quadrature::integrate(
            |e| {
                let g = b.gain_unchecked(e);
                if e == 0.0 {
                    2.0 * m.pdf_unchecked(0.0)
                } else {
                    gain_pdf(&b, &m, g).unwrap() * b.mainlobe_slope(g)
                }
            },
            0.0,
            b.half_main_lobe(),
            1e-10,
            0.0,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn departure_density_folds_at_zero() {
        let m = MisalignmentModel::new(PI / 6.0, 0.1).unwrap();
        let d = departure_angle_density(0.0, &m, 1024).unwrap();
        for x in [0.01, 0.05, 0.2] {
            assert!((d.pdf(x) / (2.0 * m.pdf_unchecked(x)) - 1.0).abs() < 1e-4);
        }
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn departure_cdf_matches_density() {
        let m = MisalignmentModel::new(PI / 3.0, 1.0 / 6.0).unwrap();
        for phi in [0.1, 1.0, PI - 0.2, -PI + 0.05] {
            let d = departure_angle_density(phi, &m, 4096).unwrap();
            for x in [0.3, 1.0, 2.9, 3.1] {
                assert!(
                    (d.cdf(x) - departure_angle_cdf(phi, &m, x)).abs() < 1e-5,
                    "{phi} {x}"
                );
            }
        }
    }

    #[test]
    fn side_lobe_atom_is_complementary_mass() {
        let b = beam();
        let m = MisalignmentModel::new(b.theta_m, 1.0 / 6.0).unwrap();
        let phi = b.theta_m * 0.6;
        let g = departure_gain_density(&b, &m, phi, 1024).unwrap();
        let atom = g.atoms()[0];
        assert_eq!(atom.location, b.g_side);
        assert!(
            (atom.mass - (1.0 - departure_angle_cdf(phi, &m, b.half_main_lobe()))).abs() < 1e-12
        );
        assert!((g.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_orientation_mean_gain_is_one() {
        // power conservation: the average gain over all directions is 1
        let b = beam();
        let g = uniform_orientation_gain_density(&b, 4096);
        assert!((g.mean() - 1.0).abs() < 1e-4, "{}", g.mean());
    }

    #[test]
    fn exit_distance_from_center_is_radius() {
        assert!((exit_distance(Point::ORIGIN, 15.0, 0.3) - 15.0).abs() < 1e-12);
        assert!((exit_distance(Point::new(5.0, 0.0), 15.0, 0.0) - 10.0).abs() < 1e-12);
        assert!((exit_distance(Point::new(5.0, 0.0), 15.0, PI) - 20.0).abs() < 1e-12);
    }
}
