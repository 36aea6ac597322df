//! Node placement, signed angles, departure/arrival angles and path loss.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Far-field floor d0, meters.
pub const FAR_FIELD_FLOOR: f64 = 0.5;

/// Attempts per point before a placement is declared infeasible.
pub const REJECTION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, angle: f64) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Counterclockwise rotation from `from` to `to`, in `[-π, π)`.
pub fn signed_angle(from: Point, to: Point) -> Result<f64> {
    if from.norm() == 0.0 || to.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(wrap_angle(to.arg() - from.arg()))
}

/// Angle between a misaligned boresight and the path, folded into `[0, π]`.
///
/// `phi_hat` is the path direction relative to the nominal boresight and
/// `eps` the alignment error of that boresight.
pub fn departure_angle(phi_hat: f64, eps: f64) -> f64 {
    let z = (phi_hat - eps).abs();
    if z >= PI {
        (2.0 * PI - z).abs()
    } else {
        z
    }
}

/// Same folding as [`departure_angle`], applied at the receiver.
pub fn arrival_angle(phi_hat_r: f64, e: f64) -> f64 {
    departure_angle(phi_hat_r, e)
}

/// Free-space-style loss `(λ/4π)² d^{-α}` with the default far-field floor.
pub fn path_loss(d: f64, lambda: f64, alpha: f64) -> Result<f64> {
    path_loss_with_floor(d, lambda, alpha, FAR_FIELD_FLOOR)
}

pub fn path_loss_with_floor(d: f64, lambda: f64, alpha: f64, d0: f64) -> Result<f64> {
    if !(d >= d0) {
        return Err(Error::NearField {
            distance: d,
            floor: d0,
        });
    }
    Ok((lambda / (4.0 * PI)).powi(2) * d.powf(-alpha))
}

/// How interferer boresights are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationMode {
    /// Each boresight aims at its partner node.
    Paired,
    /// Interferer boresights are uniform on the circle; the typical link stays paired.
    Uniform,
}

impl OrientationMode {
    fn as_str(self) -> &'static str {
        match self {
            OrientationMode::Paired => "paired",
            OrientationMode::Uniform => "uniform",
        }
    }
}

/// One transmitter/receiver pair.
///
/// In [`OrientationMode::Uniform`] deployments the interferers have no
/// receiver inside the region; `rx` is then a unit-distance aim point that
/// fixes the transmitter's boresight and is not a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePair {
    pub index: usize,
    pub tx: Point,
    pub rx: Point,
}

impl NodePair {
    pub fn link_length(&self) -> f64 {
        self.tx.distance(self.rx)
    }

    /// Nominal transmit boresight direction (absolute angle).
    pub fn tx_boresight(&self) -> f64 {
        (self.rx - self.tx).arg()
    }

    /// Nominal receive boresight direction (absolute angle).
    pub fn rx_boresight(&self) -> f64 {
        (self.tx - self.rx).arg()
    }
}

/// Angle of the path `tx_j → rx_i` relative to `tx_j`'s nominal boresight.
pub fn departure_hat(tx_pair: &NodePair, victim: &NodePair) -> Result<f64> {
    signed_angle(tx_pair.rx - tx_pair.tx, victim.rx - tx_pair.tx)
}

/// Angle of the path `tx_j → rx_i` relative to `rx_i`'s nominal boresight.
pub fn arrival_hat(victim: &NodePair, tx_pair: &NodePair) -> Result<f64> {
    signed_angle(victim.tx - victim.rx, tx_pair.tx - victim.rx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    /// `pairs[0]` is the typical link.
    pub pairs: Vec<NodePair>,
    pub region_radius: f64,
    pub orientation_mode: OrientationMode,
}

impl Deployment {
    pub fn typical(&self) -> &NodePair {
        &self.pairs[0]
    }

    pub fn interferers(&self) -> &[NodePair] {
        &self.pairs[1..]
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether `rx` of pair `i` is a real receiver node.
    pub fn has_receiver(&self, i: usize) -> bool {
        i == 0 || self.orientation_mode == OrientationMode::Paired
    }

    /// Checks disk membership and the far-field floors.
    pub fn validate(&self, d0: f64) -> Result<()> {
        let inside = |p: Point| p.norm() <= self.region_radius * (1.0 + 1e-12);
        for (i, p) in self.pairs.iter().enumerate() {
            if !inside(p.tx) || (self.has_receiver(i) && !inside(p.rx)) {
                return Err(Error::domain(
                    "position",
                    p.tx.norm().max(p.rx.norm()),
                    format!("disk of radius {}", self.region_radius),
                ));
            }
        }
        for i in 0..self.len() {
            if !self.has_receiver(i) {
                continue;
            }
            for p in &self.pairs {
                let d = p.tx.distance(self.pairs[i].rx);
                if d < d0 {
                    return Err(Error::NearField {
                        distance: d,
                        floor: d0,
                    });
                }
            }
        }
        Ok(())
    }

    /// Line-oriented text: a `#` metadata line, then `index,tx_x,tx_y,rx_x,rx_y` per pair.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# region_radius={} mode={}\n",
            self.region_radius,
            self.orientation_mode.as_str()
        );
        for p in &self.pairs {
            let _ = writeln!(s, "{},{},{},{},{}", p.index, p.tx.x, p.tx.y, p.rx.x, p.rx.y);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut region_radius = None;
        let mut mode = OrientationMode::Paired;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("region_radius", v)) => {
                            region_radius =
                                Some(v.parse::<f64>().map_err(|e| {
                                    Error::Parse(format!("line {}: {e}", lineno + 1))
                                })?)
                        }
                        Some(("mode", "paired")) => mode = OrientationMode::Paired,
                        Some(("mode", "uniform")) => mode = OrientationMode::Uniform,
                        Some(("mode", other)) => {
                            return Err(Error::Parse(format!(
                                "line {}: unknown mode `{other}`",
                                lineno + 1
                            )))
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!(
                    "line {}: expected 5 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let index = fields[0]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            pairs.push(NodePair {
                index,
                tx: Point::new(num(fields[1])?, num(fields[2])?),
                rx: Point::new(num(fields[3])?, num(fields[4])?),
            });
        }
        if pairs.is_empty() {
            return Err(Error::EmptyInput("deployment has no node pairs"));
        }
        let region_radius =
            region_radius.ok_or_else(|| Error::Parse("missing region_radius metadata".into()))?;
        Ok(Self {
            pairs,
            region_radius,
            orientation_mode: mode,
        })
    }
}

/// Uniform point in the disk of radius `r0` centered at the origin.
pub fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, r0: f64) -> Point {
    let u: f64 = rng.random();
    let a: f64 = rng.random();
    Point::polar(r0 * u.sqrt(), 2.0 * PI * a)
}

fn place<R, F>(rng: &mut R, r0: f64, what: &'static str, ok: F) -> Result<Point>
where
    R: Rng + ?Sized,
    F: Fn(Point) -> bool,
{
    for _ in 0..REJECTION_CAP {
        let p = uniform_in_disk(rng, r0);
        if ok(p) {
            return Ok(p);
        }
    }
    Err(Error::RejectionCap {
        attempts: REJECTION_CAP,
        what,
    })
}

pub fn sample_deployment<R: Rng + ?Sized>(
    n: usize,
    region_radius: f64,
    rng: &mut R,
    mode: OrientationMode,
) -> Result<Deployment> {
    sample_deployment_with_floor(n, region_radius, FAR_FIELD_FLOOR, rng, mode)
}

/// Draws a random deployment of `n` links in the disk of radius `region_radius`.
///
/// `Uniform` (center receiver): the typical receiver sits at the center, its
/// transmitter and the `n − 1` interfering transmitters are uniform in the
/// disk at least `d0` away from it, and interferer boresights are uniform.
///
/// `Paired` (random typical receiver): pairs are placed one after another;
/// each transmitter keeps `d0` from every receiver placed so far and each
/// receiver keeps `d0` from every transmitter placed so far, so all
/// transmitter/receiver distances respect the far-field floor.
pub fn sample_deployment_with_floor<R: Rng + ?Sized>(
    n: usize,
    region_radius: f64,
    d0: f64,
    rng: &mut R,
    mode: OrientationMode,
) -> Result<Deployment> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    if !(region_radius > d0) {
        return Err(Error::domain(
            "region_radius",
            region_radius,
            format!("> d0 = {d0}"),
        ));
    }
    let mut pairs = Vec::with_capacity(n);
    match mode {
        OrientationMode::Uniform => {
            let rx = Point::ORIGIN;
            let tx = place(rng, region_radius, "typical transmitter", |p| {
                p.distance(rx) >= d0
            })?;
            pairs.push(NodePair { index: 0, tx, rx });
            for index in 1..n {
                let tx = place(rng, region_radius, "interfering transmitter", |p| {
                    p.distance(rx) >= d0
                })?;
                let b: f64 = rng.random_range(-PI..PI);
                pairs.push(NodePair {
                    index,
                    tx,
                    rx: tx + Point::polar(1.0, b),
                });
            }
        }
        OrientationMode::Paired => {
            for index in 0..n {
                let tx = place(rng, region_radius, "transmitter", |p| {
                    pairs.iter().all(|q: &NodePair| p.distance(q.rx) >= d0)
                })?;
                let rx = place(rng, region_radius, "receiver", |p| {
                    p.distance(tx) >= d0 && pairs.iter().all(|q: &NodePair| p.distance(q.tx) >= d0)
                })?;
                pairs.push(NodePair { index, tx, rx });
            }
        }
    }
    Ok(Deployment {
        pairs,
        region_radius,
        orientation_mode: mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFactory;

    #[test]
    fn signed_angle_conventions() {
        let e = Point::new(1.0, 0.0);
        assert!((signed_angle(e, Point::new(0.0, 1.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(signed_angle(e, e).unwrap(), 0.0);
        let a = signed_angle(e, Point::new(-1.0, -1e-9)).unwrap();
        assert!((-PI..-PI + 1e-8).contains(&a));
        assert!(matches!(
            signed_angle(Point::ORIGIN, e),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn wrap_stays_half_open() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn departure_angle_examples() {
        assert!((departure_angle(PI - 0.1, -0.2) - (PI - 0.1)).abs() < 1e-14);
        assert!((departure_angle(0.3, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(departure_angle(-PI, 0.0), PI);
        assert!((arrival_angle(PI - 0.1, -0.2) - (PI - 0.1)).abs() < 1e-14);
        assert!((arrival_angle(0.3, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(arrival_angle(-PI, 0.0), PI);
    }

    #[test]
    fn path_loss_examples() {
        let lam = 5e-3;
        let base = (lam / (4.0 * PI)).powi(2);
        assert!((base - 1.583_143_494_411_527e-7).abs() < 1e-20);
        assert_eq!(path_loss(1.0, lam, 2.45).unwrap(), base);
        assert_eq!(path_loss(1.0, lam, 3.0).unwrap(), base);
        let half = path_loss(0.5, lam, 2.45).unwrap();
        assert!((half / (base * 2f64.powf(2.45)) - 1.0).abs() < 1e-14);
        assert!(matches!(
            path_loss(0.49, lam, 2.45),
            Err(Error::NearField { .. })
        ));
    }

    #[test]
    fn deployments_honor_invariants() {
        let f = StreamFactory::new(7);
        for (rep, mode) in [(0, OrientationMode::Uniform), (1, OrientationMode::Paired)] {
            let mut rng = f.stream(rep, 0);
            for _ in 0..50 {
                let d = sample_deployment(30, 15.0, &mut rng, mode).unwrap();
                assert_eq!(d.len(), 30);
                d.validate(FAR_FIELD_FLOOR).unwrap();
                assert!(d.typical().link_length() >= FAR_FIELD_FLOOR);
            }
        }
        let single =
            sample_deployment(1, 15.0, &mut f.stream(2, 0), OrientationMode::Uniform).unwrap();
        assert!(single.interferers().is_empty());
        assert_eq!(single.typical().rx, Point::ORIGIN);
    }

    #[test]
    fn radial_law_passes_chi_square() {
        // 20 equiprobable radial bins under F(r) = r²/R0²; 1% critical value for 19 dof is 36.19
        let mut rng = StreamFactory::new(11).stream(0, 0);
        let bins = 20;
        let n = 100_000;
        let mut counts = vec![0usize; bins];
        for _ in 0..n {
            let p = uniform_in_disk(&mut rng, 15.0);
            let u = (p.norm() / 15.0).powi(2);
            counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn text_format_round_trips() {
        let mut rng = StreamFactory::new(3).stream(0, 0);
        let d = sample_deployment(5, 15.0, &mut rng, OrientationMode::Uniform).unwrap();
        let back = Deployment::from_text(&d.to_text()).unwrap();
        assert_eq!(back, d);
        assert!(Deployment::from_text("# region_radius=15\n0,1,2,3\n").is_err());
        assert!(Deployment::from_text("0,1,2,3,4\n").is_err());
    }
}
