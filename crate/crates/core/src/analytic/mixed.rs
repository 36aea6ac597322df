//! Tabulated laws with point masses.
//!
//! A [`MixedDistribution`] is a piecewise-linear density on a strictly
//! increasing grid plus a list of atoms. The density integrates by the
//! trapezoid rule, so the continuous mass is exactly `Σ (d_i + d_{i+1}) h_i / 2`.
//!
//! Distributions also carry *singularity hints*: locations where the density
//! blows up like `1/sqrt(|x − s|)` (the image of the main-lobe peak). Every
//! operation that builds a new grid refines it geometrically around the
//! hints it inherits, which keeps the lumped representation accurate where
//! most of the probability mass can sit in a tiny interval.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tabulated::TabulatedCdf;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Self {
        Self { location, mass }
    }
}

/// Where a density has an integrable spike, weighted by the mass it carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub location: f64,
    pub weight: f64,
}

/// Resolution knobs shared by every grid-building operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Base grid points (before refinement around singularities).
    pub points: usize,
    /// Atoms kept exactly; smaller ones are folded into the density.
    pub max_atoms: usize,
    /// Singularity hints propagated per distribution.
    pub max_singularities: usize,
    /// Largest admissible support magnitude.
    pub support_limit: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: 4096,
            max_atoms: 256,
            max_singularities: 8,
            support_limit: 1e30,
        }
    }
}

impl GridConfig {
    pub fn with_points(points: usize) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedDistribution {
    grid: Vec<f64>,
    density: Vec<f64>,
    atoms: Vec<Atom>,
    singular: Vec<Singularity>,
    cum: Vec<f64>,
    atom_cum: Vec<f64>,
}

impl MixedDistribution {
    /// Validates and assembles a distribution from nodal densities and atoms.
    pub fn from_parts(grid: Vec<f64>, density: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        if grid.len() != density.len() {
            return Err(Error::ParameterMismatch(format!(
                "grid has {} points but density has {}",
                grid.len(),
                density.len()
            )));
        }
        if grid.len() == 1 {
            return Err(Error::ParameterMismatch(
                "a density grid needs at least two points".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::ParameterMismatch(
                "grid must be strictly increasing".into(),
            ));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::ParameterMismatch(
                "densities must be finite and nonnegative".into(),
            ));
        }
        if atoms
            .iter()
            .any(|a| !(a.mass >= 0.0 && a.location.is_finite()))
        {
            return Err(Error::ParameterMismatch(
                "atoms need finite locations and nonnegative masses".into(),
            ));
        }
        Ok(Self::assemble(grid, density, atoms, Vec::new()))
    }

    pub(crate) fn assemble(
        grid: Vec<f64>,
        density: Vec<f64>,
        mut atoms: Vec<Atom>,
        singular: Vec<Singularity>,
    ) -> Self {
        atoms.retain(|a| a.mass > 0.0);
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.location == a.location => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        let mut cum = Vec::with_capacity(grid.len());
        if !grid.is_empty() {
            cum.push(0.0);
            for i in 1..grid.len() {
                let h = grid[i] - grid[i - 1];
                cum.push(cum[i - 1] + 0.5 * (density[i - 1] + density[i]) * h);
            }
        }
        let mut atom_cum = Vec::with_capacity(merged.len());
        let mut acc = 0.0;
        for a in &merged {
            acc += a.mass;
            atom_cum.push(acc);
        }
        Self {
            grid,
            density,
            atoms: merged,
            singular,
            cum,
            atom_cum,
        }
    }

    /// Builds a density from per-cell masses by splitting each cell's mass
    /// evenly between its two nodes. Total mass is preserved exactly.
    pub(crate) fn from_cell_masses(
        grid: Vec<f64>,
        cell_masses: &[f64],
        atoms: Vec<Atom>,
        spilled: &[Atom],
        singular: Vec<Singularity>,
    ) -> Self {
        debug_assert_eq!(cell_masses.len() + 1, grid.len().max(1));
        let n = grid.len();
        if n < 2 {
            return Self::assemble(
                Vec::new(),
                Vec::new(),
                atoms.into_iter().chain(spilled.iter().copied()).collect(),
                singular,
            );
        }
        let mut node = vec![0.0; n];
        for (k, &m) in cell_masses.iter().enumerate() {
            let m = m.max(0.0);
            node[k] += 0.5 * m;
            node[k + 1] += 0.5 * m;
        }
        for a in spilled {
            deposit(&grid, &mut node, a.location, a.mass);
        }
        let density = nodal_density(&grid, &node);
        Self::assemble(grid, density, atoms, singular)
    }

    pub fn point_mass(location: f64) -> Self {
        Self::assemble(
            Vec::new(),
            Vec::new(),
            vec![Atom::new(location, 1.0)],
            Vec::new(),
        )
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn singularities(&self) -> &[Singularity] {
        &self.singular
    }

    pub fn has_density(&self) -> bool {
        self.grid.len() >= 2
    }

    pub fn continuous_mass(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    pub fn atom_mass(&self) -> f64 {
        self.atom_cum.last().copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.continuous_mass() + self.atom_mass()
    }

    /// Smallest and largest points carrying mass.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if self.has_density() {
            lo = self.grid[0];
            hi = self.grid[self.grid.len() - 1];
        }
        if let (Some(f), Some(l)) = (self.atoms.first(), self.atoms.last()) {
            lo = lo.min(f.location);
            hi = hi.max(l.location);
        }
        (lo, hi)
    }

    pub(crate) fn continuous_support(&self) -> Option<(f64, f64)> {
        self.has_density()
            .then(|| (self.grid[0], self.grid[self.grid.len() - 1]))
    }

    /// Density part at `x` (atoms excluded).
    pub fn pdf(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if n < 2 || x < self.grid[0] || x > self.grid[n - 1] {
            return 0.0;
        }
        let k = self.cell_of(x);
        let h = self.grid[k + 1] - self.grid[k];
        let t = (x - self.grid[k]) / h;
        self.density[k] * (1.0 - t) + self.density[k + 1] * t
    }

    fn cell_of(&self, x: f64) -> usize {
        let n = self.grid.len();
        self.grid
            .partition_point(|&g| g <= x)
            .saturating_sub(1)
            .min(n - 2)
    }

    #[inline]
    fn cell_cdf(&self, k: usize, x: f64) -> f64 {
        let h = self.grid[k + 1] - self.grid[k];
        let u = x - self.grid[k];
        self.cum[k]
            + self.density[k] * u
            + (self.density[k + 1] - self.density[k]) * u * u / (2.0 * h)
    }

    /// CDF of the density part alone.
    pub fn continuous_cdf(&self, x: f64) -> f64 {
        let n = self.grid.len();
        if n < 2 || x <= self.grid[0] {
            return 0.0;
        }
        if x >= self.grid[n - 1] {
            return self.cum[n - 1];
        }
        self.cell_cdf(self.cell_of(x), x)
    }

    /// [`Self::continuous_cdf`] with a movable cell cursor; amortized O(1)
    /// for monotone sweeps in either direction.
    #[inline]
    pub(crate) fn continuous_cdf_cursor(&self, x: f64, cursor: &mut usize) -> f64 {
        let n = self.grid.len();
        if n < 2 || x <= self.grid[0] {
            return 0.0;
        }
        if x >= self.grid[n - 1] {
            return self.cum[n - 1];
        }
        let mut k = (*cursor).min(n - 2);
        while k + 2 < n && self.grid[k + 1] <= x {
            k += 1;
        }
        while k > 0 && self.grid[k] > x {
            k -= 1;
        }
        *cursor = k;
        self.cell_cdf(k, x)
    }

    /// Mass of atoms located at or below `x`.
    pub fn atom_cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.location <= x);
        if k == 0 {
            0.0
        } else {
            self.atom_cum[k - 1]
        }
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.continuous_cdf(x) + self.atom_cdf(x)
    }

    pub fn mean(&self) -> f64 {
        let mut m: f64 = self.atoms.iter().map(|a| a.location * a.mass).sum();
        for k in 0..self.grid.len().saturating_sub(1) {
            let (a, b) = (self.grid[k], self.grid[k + 1]);
            m += (b - a) / 6.0
                * (self.density[k] * (2.0 * a + b) + self.density[k + 1] * (a + 2.0 * b));
        }
        m
    }

    /// Cell masses and centroids of the density part, as point-mass quadrature nodes.
    pub(crate) fn centroids(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.grid.len().saturating_sub(1));
        for k in 0..self.grid.len().saturating_sub(1) {
            let (a, b) = (self.grid[k], self.grid[k + 1]);
            let (da, db) = (self.density[k], self.density[k + 1]);
            let s = da + db;
            if s <= 0.0 {
                continue;
            }
            let mass = 0.5 * s * (b - a);
            let x = a + (b - a) * (da + 2.0 * db) / (3.0 * s);
            out.push((x, mass));
        }
        out
    }

    /// Two-point Gauss nodes per cell, weighted by the linear density; exact
    /// for integrands that are quadratic on each cell.
    pub(crate) fn gauss_nodes(&self) -> Vec<(f64, f64)> {
        let r = 0.5 / 3f64.sqrt();
        let mut out = Vec::with_capacity(2 * self.grid.len().saturating_sub(1));
        for k in 0..self.grid.len().saturating_sub(1) {
            let (a, b) = (self.grid[k], self.grid[k + 1]);
            let (da, db) = (self.density[k], self.density[k + 1]);
            if da + db <= 0.0 {
                continue;
            }
            for t in [0.5 - r, 0.5 + r] {
                out.push((a + t * (b - a), 0.5 * (b - a) * (da + t * (db - da))));
            }
        }
        out
    }

    /// Law of `c·X`.
    pub fn rescale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c != 0.0) {
            return Err(Error::domain("scale", c, "finite and nonzero"));
        }
        if c < 0.0 {
            return Ok(self.rescale(-c)?.reflect());
        }
        Ok(Self::assemble(
            self.grid.iter().map(|x| x * c).collect(),
            self.density.iter().map(|d| d / c).collect(),
            self.atoms
                .iter()
                .map(|a| Atom::new(a.location * c, a.mass))
                .collect(),
            self.singular
                .iter()
                .map(|s| Singularity {
                    location: s.location * c,
                    weight: s.weight,
                })
                .collect(),
        ))
    }

    /// Law of `−X`.
    pub fn reflect(&self) -> Self {
        Self::assemble(
            self.grid.iter().rev().map(|x| -x).collect(),
            self.density.iter().rev().copied().collect(),
            self.atoms
                .iter()
                .map(|a| Atom::new(-a.location, a.mass))
                .collect(),
            self.singular
                .iter()
                .map(|s| Singularity {
                    location: -s.location,
                    weight: s.weight,
                })
                .collect(),
        )
    }

    /// Scales every mass so the total is one.
    pub fn normalized(&self) -> Self {
        let t = self.total_mass();
        if !(t > 0.0) {
            return self.clone();
        }
        Self::assemble(
            self.grid.clone(),
            self.density.iter().map(|d| d / t).collect(),
            self.atoms
                .iter()
                .map(|a| Atom::new(a.location, a.mass / t))
                .collect(),
            self.singular.clone(),
        )
    }

    /// Smallest `x` with `cdf(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        let target = p.min(self.total_mass());
        let (mut a, mut b) = (lo, hi);
        if self.cdf(a) >= target {
            return a;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if !(m > a && m < b) {
                break;
            }
            if self.cdf(m) >= target {
                b = m;
            } else {
                a = m;
            }
        }
        b
    }

    /// CDF sampled at every grid node, with exact jumps at the atoms.
    pub fn to_cdf_table(&self) -> TabulatedCdf {
        let mut xs: Vec<f64> = self.grid.clone();
        xs.extend(self.atoms.iter().map(|a| a.location));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut x = Vec::with_capacity(xs.len() + self.atoms.len());
        let mut p = Vec::with_capacity(xs.len() + self.atoms.len());
        for &v in &xs {
            let c = self.continuous_cdf(v);
            let jump_at = self
                .atoms
                .binary_search_by(|a| a.location.total_cmp(&v))
                .ok();
            if let Some(j) = jump_at {
                let below = if j == 0 { 0.0 } else { self.atom_cum[j - 1] };
                x.push(v);
                p.push(c + below);
            }
            x.push(v);
            p.push(c + self.atom_cdf(v));
        }
        TabulatedCdf::from_sorted_unchecked(x, p)
    }

    /// `E[e^{-sX}]`, exact for the piecewise-linear density.
    pub fn laplace(&self, s: Complex64) -> Complex64 {
        let mut acc: Complex64 = self
            .atoms
            .iter()
            .map(|a| a.mass * (-s * a.location).exp())
            .sum();
        for k in 0..self.grid.len().saturating_sub(1) {
            let (a, b) = (self.grid[k], self.grid[k + 1]);
            let (da, db) = (self.density[k], self.density[k + 1]);
            if da == 0.0 && db == 0.0 {
                continue;
            }
            let h = b - a;
            let sh = s * h;
            let (i0, i1) = if sh.norm() < 1e-2 {
                // ∫_0^h e^{-su} du and ∫_0^h u e^{-su} du by series
                let z = -sh;
                let i0 =
                    h * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0);
                let i1 = h
                    * h
                    * (0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0 + z * z * z * z / 144.0);
                (i0, i1)
            } else {
                let e = (-sh).exp();
                ((1.0 - e) / s, (1.0 - e * (1.0 + sh)) / (s * s))
            };
            acc += (-s * a).exp() * (da * i0 + (db - da) / h * i1);
        }
        acc
    }

    /// [`Self::laplace`] at `s_k = a + i·k·step` for `k < count`, sharing the
    /// exponentials between abscissae through rotation recurrences.
    pub fn laplace_line(&self, a: f64, step: f64, count: usize) -> Vec<Complex64> {
        let s: Vec<Complex64> = (0..count)
            .map(|k| Complex64::new(a, step * k as f64))
            .collect();
        let inv: Vec<Complex64> = s.iter().map(|&v| 1.0 / v).collect();
        let mut acc: Vec<Complex64> = s
            .iter()
            .map(|&v| {
                self.atoms
                    .iter()
                    .map(|at| at.mass * (-v * at.location).exp())
                    .sum()
            })
            .collect();
        for j in 0..self.grid.len().saturating_sub(1) {
            let (x0, x1) = (self.grid[j], self.grid[j + 1]);
            let (da, db) = (self.density[j], self.density[j + 1]);
            if da == 0.0 && db == 0.0 {
                continue;
            }
            let h = x1 - x0;
            let slope = (db - da) / h;
            let mut start = Complex64::new((-a * x0).exp(), 0.0);
            let turn_start = Complex64::from_polar(1.0, -step * x0);
            let mut cell = Complex64::new((-a * h).exp(), 0.0);
            let turn_cell = Complex64::from_polar(1.0, -step * h);
            for k in 0..count {
                let sh = s[k] * h;
                let (i0, i1) = if sh.norm() < 1e-2 {
                    let z = -sh;
                    (
                        h * (1.0
                            + z / 2.0
                            + z * z / 6.0
                            + z * z * z / 24.0
                            + z * z * z * z / 120.0),
                        h * h
                            * (0.5
                                + z / 3.0
                                + z * z / 8.0
                                + z * z * z / 30.0
                                + z * z * z * z / 144.0),
                    )
                } else {
                    (
                        (1.0 - cell) * inv[k],
                        (1.0 - cell * (1.0 + sh)) * inv[k] * inv[k],
                    )
                };
                acc[k] += start * (da * i0 + slope * i1);
                start *= turn_start;
                cell *= turn_cell;
            }
        }
        acc
    }

    /// Distance `Σ |ΔF₁ − ΔF₂|` over the cells of `edges` (binned total variation).
    pub fn binned_l1(&self, other: &Self, edges: &[f64]) -> f64 {
        binned_l1_by(|x| self.cdf(x), |x| other.cdf(x), edges)
    }
}

pub(crate) fn binned_l1_by<F, G>(f: F, g: G, edges: &[f64]) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut prev = (f(edges[0]), g(edges[0]));
    let mut l1 = prev.0.abs().max(prev.1.abs()).min((prev.0 - prev.1).abs());
    for &e in &edges[1..] {
        let cur = (f(e), g(e));
        l1 += ((cur.0 - prev.0) - (cur.1 - prev.1)).abs();
        prev = cur;
    }
    l1
}

/// Nodal densities from lumped node masses.
pub(crate) fn nodal_density(grid: &[f64], node_mass: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n {
                grid[i + 1] - grid[i]
            } else {
                0.0
            };
            let hat = 0.5 * (left + right);
            if hat > 0.0 {
                node_mass[i] / hat
            } else {
                0.0
            }
        })
        .collect()
}

/// Cloud-in-cell deposit of a point mass onto grid nodes.
pub(crate) fn deposit(grid: &[f64], node: &mut [f64], x: f64, mass: f64) {
    let n = grid.len();
    if x <= grid[0] {
        node[0] += mass;
        return;
    }
    if x >= grid[n - 1] {
        node[n - 1] += mass;
        return;
    }
    let k = grid.partition_point(|&g| g <= x) - 1;
    let t = (x - grid[k]) / (grid[k + 1] - grid[k]);
    node[k] += (1.0 - t) * mass;
    node[k + 1] += t * mass;
}

/// Base grid over `[lo, hi]`: geometric for positive supports, linear otherwise.
pub fn auto_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    if !(hi > lo) {
        return Vec::new();
    }
    if lo > 0.0 {
        geometric_grid(lo, hi, n)
    } else if lo == 0.0 {
        // linear half for absolute resolution, geometric half near zero
        let mut g = linear_grid(0.0, hi, n / 2 + 1);
        g.extend(geometric_grid(hi * 1e-9, hi, n - n / 2));
        g.sort_by(f64::total_cmp);
        g.dedup_by(|a, b| *a - *b <= 1e-13 * a.abs());
        g
    } else {
        linear_grid(lo, hi, n)
    }
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    let mut g: Vec<f64> = (0..n)
        .map(|i| lo * (r * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    g[n - 1] = hi;
    g
}

/// Adds geometrically clustered nodes on both sides of each singularity.
pub fn refine_grid(mut grid: Vec<f64>, singular: &[Singularity]) -> Vec<f64> {
    if grid.len() < 2 || singular.is_empty() {
        return grid;
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    for s in singular {
        let x = s.location;
        if !(x >= lo && x <= hi) {
            continue;
        }
        let scale = if x > 0.0 { x } else { hi - lo };
        grid.push(x);
        // eight nodes per decade from 1e-1 down to 1e-11 relative
        for k in 8..=88 {
            let off = scale * 10f64.powf(-(k as f64) / 8.0);
            for y in [x - off, x + off] {
                if y > lo && y < hi {
                    grid.push(y);
                }
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(grid.len());
    for x in grid {
        match out.last() {
            Some(&p) if x - p <= 1e-13 * p.abs().max(x.abs()) => {}
            _ => out.push(x),
        }
    }
    // keep exact endpoints
    if let Some(l) = out.last_mut() {
        *l = hi;
    }
    out
}

/// Keeps the heaviest `max` hints.
pub(crate) fn select_singularities(mut s: Vec<Singularity>, max: usize) -> Vec<Singularity> {
    s.retain(|h| h.weight > 1e-6 && h.location.is_finite());
    s.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.location.total_cmp(&b.location))
    });
    let mut out: Vec<Singularity> = Vec::new();
    for h in s {
        if let Some(o) = out.iter_mut().find(|o| {
            (o.location - h.location).abs() <= 1e-12 * o.location.abs().max(h.location.abs())
        }) {
            o.weight += h.weight;
        } else if out.len() < max {
            out.push(h);
        }
    }
    out
}

/// Splits atoms into the `max` heaviest (kept) and the rest (spilled into the density).
pub(crate) fn cap_atoms(atoms: Vec<Atom>, max: usize) -> (Vec<Atom>, Vec<Atom>) {
    let merged = MixedDistribution::assemble(Vec::new(), Vec::new(), atoms, Vec::new()).atoms;
    if merged.len() <= max {
        return (merged, Vec::new());
    }
    let mut by_mass = merged;
    by_mass.sort_by(|a, b| {
        b.mass
            .total_cmp(&a.mass)
            .then(a.location.total_cmp(&b.location))
    });
    let spilled = by_mass.split_off(max);
    (by_mass, spilled)
}
