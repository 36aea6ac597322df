//! Sums, products and mixtures of independent mixed laws.
//!
//! Each operation evaluates the continuous part of the result's CDF at the
//! nodes of a fresh grid and converts node-to-node increments into a
//! density. Atom-by-atom terms stay atoms. Work is split over output nodes,
//! so results do not depend on the thread count.

use rayon::prelude::*;

use super::mixed::{
    auto_grid, cap_atoms, refine_grid, select_singularities, Atom, GridConfig, MixedDistribution,
    Singularity,
};
use crate::error::{Error, Result};

/// Turns continuous-CDF values at the nodes into a distribution.
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_from_cdf<F>(
    lo: f64,
    hi: f64,
    cfg: &GridConfig,
    hints: Vec<Singularity>,
    atoms: Vec<Atom>,
    spilled: Vec<Atom>,
    expected_continuous: f64,
    cdf: F,
) -> Result<MixedDistribution>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Ok(MixedDistribution::assemble(
            Vec::new(),
            Vec::new(),
            atoms,
            hints,
        ));
    }
    if lo.abs() > cfg.support_limit || hi.abs() > cfg.support_limit {
        return Err(Error::GridOverflow { lo, hi });
    }
    let hi = if hi > lo {
        hi
    } else {
        lo + lo.abs().max(1.0) * 1e-9
    };
    let hints = select_singularities(hints, cfg.max_singularities);
    let grid = refine_grid(auto_grid(lo, hi, cfg.points), &hints);
    let c: Vec<f64> = grid.par_iter().map(|&x| cdf(x)).collect();
    let n = grid.len();
    let mut cells: Vec<f64> = (0..n - 1).map(|k| (c[k + 1] - c[k]).max(0.0)).collect();
    if expected_continuous > 0.0 {
        // mass below the first node or lost at the top goes to the end cells
        cells[0] += c[0].max(0.0);
        let got: f64 = cells.iter().sum();
        let resid = expected_continuous - got;
        if resid > 0.0 {
            cells[n - 2] += resid;
        }
    }
    Ok(MixedDistribution::from_cell_masses(
        grid, &cells, atoms, &spilled, hints,
    ))
}

fn span(lo: &mut f64, hi: &mut f64, a: f64, b: f64) {
    *lo = lo.min(a);
    *hi = hi.max(b);
}

/// Law of `A + B` for independent `A`, `B`.
pub fn convolve(
    a: &MixedDistribution,
    b: &MixedDistribution,
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    let mut atoms = Vec::with_capacity(a.atoms().len() * b.atoms().len());
    for x in a.atoms() {
        for y in b.atoms() {
            atoms.push(Atom::new(x.location + y.location, x.mass * y.mass));
        }
    }
    let (atoms, spilled) = cap_atoms(atoms, cfg.max_atoms);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let ca = a.continuous_support();
    let cb = b.continuous_support();
    if let (Some(ra), Some(rb)) = (ca, cb) {
        span(&mut lo, &mut hi, ra.0 + rb.0, ra.1 + rb.1);
    }
    if let (Some(rb), Some(f), Some(l)) = (cb, a.atoms().first(), a.atoms().last()) {
        span(&mut lo, &mut hi, f.location + rb.0, l.location + rb.1);
    }
    if let (Some(ra), Some(f), Some(l)) = (ca, b.atoms().first(), b.atoms().last()) {
        span(&mut lo, &mut hi, f.location + ra.0, l.location + ra.1);
    }
    for s in &spilled {
        span(&mut lo, &mut hi, s.location, s.location);
    }

    let mut hints = Vec::new();
    for h in a.singularities() {
        for y in b.atoms() {
            hints.push(Singularity {
                location: h.location + y.location,
                weight: h.weight * y.mass,
            });
        }
    }
    for h in b.singularities() {
        for x in a.atoms() {
            hints.push(Singularity {
                location: h.location + x.location,
                weight: h.weight * x.mass,
            });
        }
    }
    for h in a.singularities() {
        for g in b.singularities() {
            hints.push(Singularity {
                location: h.location + g.location,
                weight: h.weight * g.weight,
            });
        }
    }

    let expected = a.continuous_mass() * b.total_mass() + a.atom_mass() * b.continuous_mass();
    let quad = b.centroids();
    let cb_top = b.grid().len().saturating_sub(2);
    let ca_top = a.grid().len().saturating_sub(2);
    build_from_cdf(lo, hi, cfg, hints, atoms, spilled, expected, |z| {
        let mut s = 0.0;
        let mut cur = ca_top;
        for &(y, w) in &quad {
            s += w * a.continuous_cdf_cursor(z - y, &mut cur);
        }
        let mut cur = ca_top;
        for y in b.atoms() {
            s += y.mass * a.continuous_cdf_cursor(z - y.location, &mut cur);
        }
        let mut cur = cb_top;
        for x in a.atoms() {
            s += x.mass * b.continuous_cdf_cursor(z - x.location, &mut cur);
        }
        s
    })
}

/// Law of `c·Y·Z` for independent `Y`, `Z` with nonnegative supports.
pub fn product_density(
    y: &MixedDistribution,
    z: &MixedDistribution,
    c: f64,
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    if !(c.is_finite() && c != 0.0) {
        return Err(Error::domain("c", c, "finite and nonzero"));
    }
    if c < 0.0 {
        return Ok(product_density(y, z, -c, cfg)?.reflect());
    }
    for d in [y, z] {
        if d.support().0 < 0.0 {
            return Err(Error::domain("support", d.support().0, "nonnegative"));
        }
    }
    // a constant factor is an exact rescale
    for (p, q) in [(y, z), (z, y)] {
        if let (false, [a]) = (q.has_density(), q.atoms()) {
            if a.location > 0.0 {
                return p.rescale(c * a.location);
            }
        }
    }
    let mut atoms = Vec::new();
    for a in y.atoms() {
        for b in z.atoms() {
            atoms.push(Atom::new(c * a.location * b.location, a.mass * b.mass));
        }
    }
    // a zero atom annihilates the other factor's density
    for (p, q) in [(y, z), (z, y)] {
        if let Some(a) = p.atoms().iter().find(|a| a.location == 0.0) {
            atoms.push(Atom::new(0.0, a.mass * q.continuous_mass()));
        }
    }
    let (atoms, spilled) = cap_atoms(atoms, cfg.max_atoms);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let cy = y.continuous_support();
    let cz = z.continuous_support();
    if let (Some(ry), Some(rz)) = (cy, cz) {
        span(&mut lo, &mut hi, c * ry.0 * rz.0, c * ry.1 * rz.1);
    }
    let nonzero = |d: &MixedDistribution| -> Vec<Atom> {
        d.atoms()
            .iter()
            .copied()
            .filter(|a| a.location > 0.0)
            .collect()
    };
    let ya = nonzero(y);
    let za = nonzero(z);
    if let (Some(rz), Some(f), Some(l)) = (cz, ya.first(), ya.last()) {
        span(
            &mut lo,
            &mut hi,
            c * f.location * rz.0,
            c * l.location * rz.1,
        );
    }
    if let (Some(ry), Some(f), Some(l)) = (cy, za.first(), za.last()) {
        span(
            &mut lo,
            &mut hi,
            c * f.location * ry.0,
            c * l.location * ry.1,
        );
    }
    for s in &spilled {
        span(&mut lo, &mut hi, s.location, s.location);
    }

    let mut hints = Vec::new();
    for h in y.singularities() {
        for b in &za {
            hints.push(Singularity {
                location: c * h.location * b.location,
                weight: h.weight * b.mass,
            });
        }
    }
    for h in z.singularities() {
        for a in &ya {
            hints.push(Singularity {
                location: c * h.location * a.location,
                weight: h.weight * a.mass,
            });
        }
    }
    for h in y.singularities() {
        for g in z.singularities() {
            hints.push(Singularity {
                location: c * h.location * g.location,
                weight: h.weight * g.weight,
            });
        }
    }

    let za_mass: f64 = za.iter().map(|a| a.mass).sum();
    let ya_mass: f64 = ya.iter().map(|a| a.mass).sum();
    let expected =
        y.continuous_mass() * (z.continuous_mass() + za_mass) + ya_mass * z.continuous_mass();
    let quad: Vec<(f64, f64)> = z
        .gauss_nodes()
        .into_iter()
        .filter(|&(v, _)| v > 0.0)
        .collect();
    let cy_top = y.grid().len().saturating_sub(2);
    let cz_top = z.grid().len().saturating_sub(2);
    build_from_cdf(lo, hi, cfg, hints, atoms, spilled, expected, |x| {
        let mut s = 0.0;
        let mut cur = cy_top;
        for &(v, w) in &quad {
            s += w * y.continuous_cdf_cursor(x / (c * v), &mut cur);
        }
        let mut cur = cy_top;
        for b in &za {
            s += b.mass * y.continuous_cdf_cursor(x / (c * b.location), &mut cur);
        }
        let mut cur = cz_top;
        for a in &ya {
            s += a.mass * z.continuous_cdf_cursor(x / (c * a.location), &mut cur);
        }
        s
    })
}

/// Weighted mixture `Σ w_i·D_i`; weights are normalized to sum to one.
pub fn mixture(
    components: &[(f64, &MixedDistribution)],
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    if components.is_empty() {
        return Err(Error::EmptyInput("mixture components"));
    }
    let total: f64 = components.iter().map(|(w, _)| *w).sum();
    if !(total > 0.0) || components.iter().any(|(w, _)| !(*w >= 0.0)) {
        return Err(Error::domain(
            "mixture weight",
            total,
            "nonnegative with positive sum",
        ));
    }
    let comps: Vec<(f64, &MixedDistribution)> =
        components.iter().map(|(w, d)| (*w / total, *d)).collect();
    let mut atoms = Vec::new();
    let mut hints = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut expected = 0.0;
    for (w, d) in &comps {
        atoms.extend(d.atoms().iter().map(|a| Atom::new(a.location, a.mass * w)));
        hints.extend(d.singularities().iter().map(|h| Singularity {
            location: h.location,
            weight: h.weight * w,
        }));
        if let Some(r) = d.continuous_support() {
            span(&mut lo, &mut hi, r.0, r.1);
        }
        expected += w * d.continuous_mass();
    }
    let (atoms, spilled) = cap_atoms(atoms, cfg.max_atoms);
    for s in &spilled {
        span(&mut lo, &mut hi, s.location, s.location);
    }
    build_from_cdf(lo, hi, cfg, hints, atoms, spilled, expected, |x| {
        comps.iter().map(|(w, d)| w * d.continuous_cdf(x)).sum()
    })
}

/// Law of `1 / (shift + W)` for `W ≥ 0` and `shift > 0`.
pub fn reciprocal_shift(
    w: &MixedDistribution,
    shift: f64,
    cfg: &GridConfig,
) -> Result<MixedDistribution> {
    if !(shift > 0.0) {
        return Err(Error::domain("shift", shift, "> 0"));
    }
    if w.support().0 < 0.0 {
        return Err(Error::domain("support", w.support().0, "nonnegative"));
    }
    let atoms: Vec<Atom> = w
        .atoms()
        .iter()
        .map(|a| Atom::new(1.0 / (shift + a.location), a.mass))
        .collect();
    let (atoms, spilled) = cap_atoms(atoms, cfg.max_atoms);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    if let Some((a, b)) = w.continuous_support() {
        span(&mut lo, &mut hi, 1.0 / (shift + b), 1.0 / (shift + a));
    }
    for s in &spilled {
        span(&mut lo, &mut hi, s.location, s.location);
    }
    let hints = w
        .singularities()
        .iter()
        .filter(|h| h.location > -shift)
        .map(|h| Singularity {
            location: 1.0 / (shift + h.location),
            weight: h.weight,
        })
        .collect();
    let cm = w.continuous_mass();
    build_from_cdf(lo, hi, cfg, hints, atoms, spilled, cm, |v| {
        // P(1/(shift+W_c) ≤ v) = P(W_c ≥ 1/v − shift)
        (cm - w.continuous_cdf(1.0 / v - shift)).max(0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::super::mixed::linear_grid;
    use super::*;

    fn uniform(lo: f64, hi: f64) -> MixedDistribution {
        MixedDistribution::from_parts(linear_grid(lo, hi, 257), vec![1.0 / (hi - lo); 257], vec![])
            .unwrap()
    }

    fn cfg() -> GridConfig {
        GridConfig::with_points(1024)
    }

    #[test]
    fn convolution_identity_and_atoms() {
        let u = uniform(1.0, 2.0);
        let z = MixedDistribution::point_mass(0.0);
        let c = convolve(&u, &z, &cfg()).unwrap();
        for x in [1.1, 1.5, 1.9] {
            assert!((c.cdf(x) - u.cdf(x)).abs() < 1e-9);
        }
        let s = convolve(
            &MixedDistribution::point_mass(2.0),
            &MixedDistribution::point_mass(3.0),
            &cfg(),
        )
        .unwrap();
        assert_eq!(s.atoms(), &[Atom::new(5.0, 1.0)]);
        assert!(!s.has_density());
    }

    #[test]
    fn sum_of_uniforms_is_triangular() {
        let u = uniform(0.0, 1.0);
        let t = convolve(&u, &u, &cfg()).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-12);
        for x in [0.25, 0.5, 1.0, 1.5] {
            let exact = if x <= 1.0 {
                x * x / 2.0
            } else {
                1.0 - (2.0 - x) * (2.0 - x) / 2.0
            };
            assert!(
                (t.cdf(x) - exact).abs() < 2e-4,
                "{x}: {} vs {exact}",
                t.cdf(x)
            );
        }
    }

    #[test]
    fn product_rescale_and_log_density() {
        let u = uniform(0.0, 1.0);
        let r = product_density(&u, &MixedDistribution::point_mass(1.0), 2.0, &cfg()).unwrap();
        assert!((r.cdf(1.0) - 0.5).abs() < 1e-9);
        assert!((r.pdf(1.3) - 0.5).abs() < 1e-6);
        // Y·Z for independent uniforms: F(x) = x − x ln x
        let p = product_density(&u, &u, 1.0, &cfg()).unwrap();
        for x in [0.01, 0.1, 0.5, 0.9] {
            let exact = x - x * f64::ln(x);
            assert!((p.cdf(x) - exact).abs() < 1e-3, "{x}");
        }
        assert!((p.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixture_weights() {
        let m = mixture(
            &[
                (1.0, &uniform(0.0, 1.0)),
                (3.0, &MixedDistribution::point_mass(2.0)),
            ],
            &cfg(),
        )
        .unwrap();
        assert!((m.atom_mass() - 0.75).abs() < 1e-15);
        assert!((m.cdf(0.5) - 0.125).abs() < 1e-6);
    }

    #[test]
    fn reciprocal_shift_of_uniform() {
        let r = reciprocal_shift(&uniform(0.0, 1.0), 1.0, &cfg()).unwrap();
        // 1/(1+U) ≤ v  ⇔  U ≥ 1/v − 1
        for v in [0.55, 0.7, 0.9] {
            assert!(
                (r.cdf(v) - (2.0 - 1.0 / v)).abs() < 1e-5,
                "{v}: {}",
                r.cdf(v)
            );
        }
    }
}
