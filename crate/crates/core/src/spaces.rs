//! Compact sets that point configurations live on.
//!
//! Every built-in space is embedded in Euclidean space and uses the induced
//! chord metric. Reference measures are normalized to total mass one, except
//! for subsets (spherical caps), which carry the mass they inherit from the
//! parent sphere so that ratios `mu(A) / mu(K)` stay meaningful.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{adaptive_simpson, dist2, dot, norm};

/// Points closer than this (relative to the diameter) count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-14;

const SURFACE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("points belong to different spaces ({0} vs {1})")]
    Mismatch(SpaceKind, SpaceKind),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid space descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("{0}")]
    Usage(String),
}

/// The shape of a supported space, in its serialized record form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceKind {
    /// Unit sphere `S^d` in `R^{d+1}`.
    Sphere { d: usize },
    /// Unit circle in `R^2`.
    Circle,
    /// Ring torus around the `x3` axis.
    Torus {
        #[serde(rename = "R")]
        major: f64,
        #[serde(rename = "r")]
        minor: f64,
    },
    /// Unit cube `[0, 1]^d`.
    Cube { d: usize },
    /// Spherical cap `{x in S^d : x_{d+1} >= c}`.
    Cap { d: usize, c: f64 },
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Sphere { d } => write!(f, "sphere:{d}"),
            SpaceKind::Circle => write!(f, "circle"),
            SpaceKind::Torus { major, minor } => write!(f, "torus:{major}:{minor}"),
            SpaceKind::Cube { d } => write!(f, "cube:{d}"),
            SpaceKind::Cap { d, c } => write!(f, "cap:{d}:{c}"),
        }
    }
}

/// A validated space. Serializes exactly like its [`SpaceKind`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceKind", into = "SpaceKind")]
pub struct SpaceDescriptor {
    kind: SpaceKind,
}

impl TryFrom<SpaceKind> for SpaceDescriptor {
    type Error = SpaceError;

    fn try_from(kind: SpaceKind) -> Result<Self, Self::Error> {
        SpaceDescriptor::new(kind)
    }
}

impl From<SpaceDescriptor> for SpaceKind {
    fn from(s: SpaceDescriptor) -> Self {
        s.kind
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl std::str::FromStr for SpaceDescriptor {
    type Err = SpaceError;

    /// Parses the compact flag form: `sphere:2`, `circle`, `torus:2.0:0.5`,
    /// `cube:2`, `cap:2:0.0`. A JSON record is accepted as well.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s)
                .map_err(|e| SpaceError::InvalidDescriptor(e.to_string()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || SpaceError::InvalidDescriptor(format!("cannot parse space '{s}'"));
        let int = |x: &str| x.parse::<usize>().map_err(|_| bad());
        let real = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let kind = match parts.as_slice() {
            ["sphere", d] => SpaceKind::Sphere { d: int(d)? },
            ["circle"] => SpaceKind::Circle,
            ["torus", big, small] => SpaceKind::Torus {
                major: real(big)?,
                minor: real(small)?,
            },
            ["cube", d] => SpaceKind::Cube { d: int(d)? },
            ["cap", d, c] => SpaceKind::Cap {
                d: int(d)?,
                c: real(c)?,
            },
            _ => return Err(bad()),
        };
        SpaceDescriptor::new(kind)
    }
}

/// A point of a space, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
    tag: SpaceKind,
}

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn tag(&self) -> SpaceKind {
        self.tag
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Euclidean distance between two points of the same space.
pub fn distance(a: &Point, b: &Point) -> Result<f64, SpaceError> {
    if a.tag != b.tag {
        return Err(SpaceError::Mismatch(a.tag, b.tag));
    }
    Ok(dist2(&a.coords, &b.coords).sqrt())
}

/// One coordinate of a space parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamAxis {
    pub lo: f64,
    pub hi: f64,
    /// `lo` and `hi` describe the same point
    pub periodic: bool,
}

/// Local and global ball-mass regularity constants of a space.
///
/// `upper_local[k]` is `sup { mu(B(x, r)) / r^alpha : r <= radii[k] }` and
/// `lower_local[k]` is the reciprocal of the matching infimum. Both are
/// nondecreasing in the radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub radii: Vec<f64>,
    pub upper_local: Vec<f64>,
    pub lower_local: Vec<f64>,
    pub upper_zero: f64,
    pub lower_zero: f64,
    pub upper_global: f64,
    pub lower_global: f64,
}

impl RegularityProfile {
    /// Upper constant valid for every radius up to `r`. Looks up the smallest
    /// tabulated radius at or above `r`, falling back to the global value.
    pub fn upper_at(&self, r: f64) -> f64 {
        self.lookup(r, &self.upper_local, self.upper_global)
    }

    /// Lower constant valid for every radius up to `r`.
    pub fn lower_at(&self, r: f64) -> f64 {
        self.lookup(r, &self.lower_local, self.lower_global)
    }

    fn lookup(&self, r: f64, table: &[f64], global: f64) -> f64 {
        if r <= 0.0 {
            return table.first().copied().unwrap_or(global);
        }
        self.radii
            .iter()
            .position(|&x| x >= r)
            .map(|k| table[k])
            .unwrap_or(global)
    }
}

impl SpaceDescriptor {
    pub fn new(kind: SpaceKind) -> Result<Self, SpaceError> {
        let invalid = |m: &str| Err(SpaceError::InvalidDescriptor(m.to_string()));
        match kind {
            SpaceKind::Sphere { d } | SpaceKind::Cube { d } if d == 0 => {
                return invalid("dimension must be at least 1");
            }
            SpaceKind::Cap { d, c } => {
                if d == 0 {
                    return invalid("dimension must be at least 1");
                }
                if !(c > -1.0 && c < 1.0) {
                    return invalid("cap height must lie in (-1, 1)");
                }
            }
            SpaceKind::Torus { major, minor }
                if !(minor > 0.0 && major > minor && major.is_finite()) =>
            {
                return invalid("torus needs R > r > 0");
            }
            _ => {}
        }
        Ok(Self { kind })
    }

    pub fn sphere(d: usize) -> Self {
        Self::new(SpaceKind::Sphere { d }).expect("valid sphere dimension")
    }

    pub fn circle() -> Self {
        Self {
            kind: SpaceKind::Circle,
        }
    }

    pub fn cube(d: usize) -> Self {
        Self::new(SpaceKind::Cube { d }).expect("valid cube dimension")
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self, SpaceError> {
        Self::new(SpaceKind::Torus { major, minor })
    }

    pub fn cap(d: usize, c: f64) -> Result<Self, SpaceError> {
        Self::new(SpaceKind::Cap { d, c })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Sphere { d } | SpaceKind::Cap { d, .. } => d + 1,
            SpaceKind::Circle => 2,
            SpaceKind::Torus { .. } => 3,
            SpaceKind::Cube { d } => d,
        }
    }

    /// Dimension `alpha` of the reference measure.
    pub fn intrinsic_dim(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere { d } | SpaceKind::Cube { d } | SpaceKind::Cap { d, .. } => d as f64,
            SpaceKind::Circle => 1.0,
            SpaceKind::Torus { .. } => 2.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            SpaceKind::Sphere { .. } | SpaceKind::Circle => 2.0,
            SpaceKind::Torus { major, minor } => 2.0 * (major + minor),
            SpaceKind::Cube { d } => (d as f64).sqrt(),
            SpaceKind::Cap { c, .. } => {
                if c <= 0.0 {
                    2.0
                } else {
                    2.0 * (1.0 - c * c).sqrt()
                }
            }
        }
    }

    /// Total reference mass: 1 for full spaces, the inherited sphere mass for caps.
    pub fn measure_total(&self) -> f64 {
        match self.kind {
            SpaceKind::Cap { d, c } => sphere_ball_measure(d, (2.0 - 2.0 * c).sqrt()),
            _ => 1.0,
        }
    }

    /// The ambient space a subset was carved from.
    pub fn parent(&self) -> Option<SpaceDescriptor> {
        match self.kind {
            SpaceKind::Cap { d, .. } => Some(SpaceDescriptor::sphere(d)),
            _ => None,
        }
    }

    /// Whether every ball of a given radius has the same mass.
    pub fn is_homogeneous(&self) -> bool {
        matches!(self.kind, SpaceKind::Sphere { .. } | SpaceKind::Circle)
    }

    /// True for the round spheres, including the circle.
    fn round_sphere_dim(&self) -> Option<usize> {
        match self.kind {
            SpaceKind::Sphere { d } => Some(d),
            SpaceKind::Circle => Some(1),
            _ => None,
        }
    }

    /// Wraps coordinates that are already on the space.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point, SpaceError> {
        if coords.len() != self.ambient_dim() {
            return Err(SpaceError::Usage(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                coords.len()
            )));
        }
        Ok(Point {
            coords,
            tag: self.kind,
        })
    }

    /// Distance from `x` to its retraction.
    pub fn surface_residual(&self, x: &[f64]) -> Result<f64, SpaceError> {
        let p = self.retract(x)?;
        Ok(dist2(x, &p.coords).sqrt())
    }

    /// Nearest point of the space to an ambient vector.
    pub fn retract(&self, x: &[f64]) -> Result<Point, SpaceError> {
        if x.len() != self.ambient_dim() {
            return Err(SpaceError::Usage(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                x.len()
            )));
        }
        let coords = match self.kind {
            SpaceKind::Cube { .. } => x.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            SpaceKind::Cap { c, .. } => {
                let mut y = normalize(x)?;
                let last = y.len() - 1;
                if y[last] < c {
                    let horiz = norm(&y[..last]);
                    let ring = (1.0 - c * c).sqrt();
                    if horiz > 0.0 {
                        for v in &mut y[..last] {
                            *v *= ring / horiz;
                        }
                    } else {
                        // antipode of the cap center: every boundary point is nearest
                        y.iter_mut().for_each(|v| *v = 0.0);
                        y[0] = ring;
                    }
                    y[last] = c;
                }
                y
            }
            _ => self.manifold_projection(x)?,
        };
        Ok(Point {
            coords,
            tag: self.kind,
        })
    }

    /// Closest point on the underlying boundaryless manifold (sphere for caps,
    /// the identity for cubes). Used for tangent-plane finite differences.
    pub(crate) fn manifold_projection(&self, x: &[f64]) -> Result<Vec<f64>, SpaceError> {
        match self.kind {
            SpaceKind::Sphere { .. } | SpaceKind::Circle | SpaceKind::Cap { .. } => normalize(x),
            SpaceKind::Cube { .. } => Ok(x.to_vec()),
            SpaceKind::Torus { major, minor } => {
                let rho = x[0].hypot(x[1]);
                if rho < 1e-300 {
                    return Err(SpaceError::Degenerate(
                        "point on the torus axis has no unique nearest point".into(),
                    ));
                }
                let center = [major * x[0] / rho, major * x[1] / rho, 0.0];
                let off = [x[0] - center[0], x[1] - center[1], x[2]];
                let len = norm(&off);
                if len < 1e-300 {
                    return Err(SpaceError::Degenerate(
                        "point on the torus core circle has no unique nearest point".into(),
                    ));
                }
                Ok((0..3).map(|k| center[k] + minor * off[k] / len).collect())
            }
        }
    }

    /// Component of `g` along which a point at `x` may move while staying on
    /// the space. On boundaries (cube faces, cap rim) outward components of
    /// the direction are removed.
    pub fn tangent_project(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        match self.kind {
            SpaceKind::Sphere { .. } | SpaceKind::Circle => {
                let a = dot(g, x);
                g.iter().zip(x).map(|(gi, xi)| gi - a * xi).collect()
            }
            SpaceKind::Cap { c, .. } => {
                let a = dot(g, x);
                let mut v: Vec<f64> = g.iter().zip(x).map(|(gi, xi)| gi - a * xi).collect();
                let last = x.len() - 1;
                if x[last] <= c + SURFACE_TOL {
                    // inward direction along the sphere: tangent part of e_last
                    let mut t: Vec<f64> = x.iter().map(|xi| -x[last] * xi).collect();
                    t[last] += 1.0;
                    let tn = norm(&t);
                    if tn > 0.0 {
                        let along = dot(&v, &t) / tn;
                        if along < 0.0 {
                            for (vi, ti) in v.iter_mut().zip(&t) {
                                *vi -= along * ti / tn;
                            }
                        }
                    }
                }
                v
            }
            SpaceKind::Cube { .. } => g
                .iter()
                .zip(x)
                .map(|(&gi, &xi)| {
                    if (xi <= SURFACE_TOL && gi < 0.0) || (xi >= 1.0 - SURFACE_TOL && gi > 0.0) {
                        0.0
                    } else {
                        gi
                    }
                })
                .collect(),
            SpaceKind::Torus { major, .. } => {
                let rho = x[0].hypot(x[1]).max(1e-300);
                let mut n = [x[0] - major * x[0] / rho, x[1] - major * x[1] / rho, x[2]];
                let len = norm(&n).max(1e-300);
                n.iter_mut().for_each(|v| *v /= len);
                let a = dot(g, &n);
                g.iter().zip(n).map(|(gi, ni)| gi - a * ni).collect()
            }
        }
    }

    /// `n` independent draws from the normalized reference measure.
    pub fn sample_measure(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Point> {
        (0..n)
            .map(|_| Point {
                coords: self.sample_one(rng),
                tag: self.kind,
            })
            .collect()
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let p = self.ambient_dim();
        match self.kind {
            SpaceKind::Sphere { .. } | SpaceKind::Circle => gaussian_direction(rng, p),
            SpaceKind::Cap { c, .. } => loop {
                let x = gaussian_direction(rng, p);
                if x[p - 1] >= c {
                    break x;
                }
            },
            SpaceKind::Cube { d } => (0..d).map(|_| rng.random::<f64>()).collect(),
            SpaceKind::Torus { major, minor } => {
                let u = 2.0 * PI * rng.random::<f64>();
                let v = loop {
                    let v = 2.0 * PI * rng.random::<f64>();
                    if rng.random::<f64>() * (major + minor) <= major + minor * v.cos() {
                        break v;
                    }
                };
                torus_point(major, minor, u, v)
            }
        }
    }

    /// Mass of the closed ball `B(center, r)`.
    ///
    /// Homogeneous spaces (spheres, circle) ignore `center`; every other space
    /// requires one.
    pub fn ball_measure(&self, r: f64, center: Option<&Point>) -> Result<f64, SpaceError> {
        if r.is_nan() || r < 0.0 {
            return Err(SpaceError::Usage(format!("invalid ball radius {r}")));
        }
        if let Some(d) = self.round_sphere_dim() {
            return Ok(sphere_ball_measure(d, r));
        }
        let center = center.ok_or_else(|| {
            SpaceError::Usage(format!(
                "{self} is not homogeneous; ball_measure needs a center point"
            ))
        })?;
        if center.tag != self.kind {
            return Err(SpaceError::Mismatch(center.tag, self.kind));
        }
        if r >= self.farthest_distance(center.coords()) {
            return Ok(self.measure_total());
        }
        Ok(match self.kind {
            SpaceKind::Cube { d: 1 } => {
                let x = center.coords[0];
                (x + r).min(1.0) - (x - r).max(0.0)
            }
            SpaceKind::Cube { d: 2 } => square_ball_area(center.coords(), r),
            _ => self.monte_carlo_ball_measures(center.coords(), &[r])[0],
        })
    }

    /// Largest distance from `x` to any point of the space (an upper bound
    /// for the torus and cap).
    fn farthest_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::Cube { .. } => x
                .iter()
                .map(|&v| {
                    let m = v.max(1.0 - v);
                    m * m
                })
                .sum::<f64>()
                .sqrt(),
            _ => self.diameter(),
        }
    }

    const MC_BALL_SAMPLES: usize = 200_000;
    const MC_BALL_SEED: u64 = 0xB411;

    /// Ball masses for several radii about one center, estimated from a
    /// fixed sample of the reference measure.
    fn monte_carlo_ball_measures(&self, center: &[f64], radii: &[f64]) -> Vec<f64> {
        let (samples, scale) = match self.parent() {
            // cap masses are sphere masses restricted to the cap
            Some(parent) => (
                parent.sample_measure(Self::MC_BALL_SAMPLES, Self::MC_BALL_SEED),
                1.0,
            ),
            None => (
                self.sample_measure(Self::MC_BALL_SAMPLES, Self::MC_BALL_SEED),
                self.measure_total(),
            ),
        };
        let cap_height = match self.kind {
            SpaceKind::Cap { c, .. } => Some(c),
            _ => None,
        };
        let mut dists: Vec<f64> = samples
            .iter()
            .filter(|p| cap_height.is_none_or(|c| *p.coords.last().unwrap() >= c))
            .map(|p| dist2(&p.coords, center).sqrt())
            .collect();
        dists.sort_by(f64::total_cmp);
        let total = samples.len() as f64;
        radii
            .iter()
            .map(|&r| scale * dists.partition_point(|&d| d <= r) as f64 / total)
            .collect()
    }

    /// Regularity constants tabulated at `radii`.
    ///
    /// Round spheres use the exact ball-mass formula; the closed form
    /// `gamma_d / d` for the upper constant is used when `d >= 2`. Other
    /// spaces scan a set of representative centers. The zero-radius limits
    /// take the value at the smallest scanned radius.
    pub fn regularity_profile(&self, radii: &[f64]) -> Result<RegularityProfile, SpaceError> {
        if radii.is_empty() {
            return Err(SpaceError::Usage(
                "regularity profile needs at least one radius".into(),
            ));
        }
        let diam = self.diameter();
        if let Some(&bad) = radii
            .iter()
            .find(|&&r| !(r > 0.0 && r <= diam * (1.0 + 1e-12)))
        {
            return Err(SpaceError::Usage(format!(
                "radius {bad} outside (0, diam = {diam}]"
            )));
        }
        let alpha = self.intrinsic_dim();
        let analytic = self.round_sphere_dim().is_some()
            || matches!(self.kind, SpaceKind::Cube { d } if d <= 2);
        let (lo_frac, count) = if analytic { (1e-4, 400) } else { (0.05, 40) };
        let mut grid: Vec<f64> = (0..count)
            .map(|k| diam * lo_frac * (1.0 / lo_frac).powf(k as f64 / (count - 1) as f64))
            .chain(radii.iter().copied())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let centers = self.representative_centers();
        let mut sup = vec![f64::NEG_INFINITY; grid.len()];
        let mut inf = vec![f64::INFINITY; grid.len()];
        for center in &centers {
            let masses: Vec<f64> = if self.is_homogeneous() || analytic {
                grid.iter()
                    .map(|&r| self.ball_measure(r, Some(center)))
                    .collect::<Result<_, _>>()?
            } else {
                self.monte_carlo_ball_measures(center.coords(), &grid)
            };
            for (k, (&r, m)) in grid.iter().zip(masses).enumerate() {
                let ratio = m / r.powf(alpha);
                sup[k] = sup[k].max(ratio);
                inf[k] = inf[k].min(ratio);
            }
        }
        // running sup/inf over r <= grid[k]
        for k in 1..grid.len() {
            sup[k] = sup[k].max(sup[k - 1]);
            inf[k] = inf[k].min(inf[k - 1]);
        }
        let closed_form_upper = match self.round_sphere_dim() {
            Some(d) if d >= 2 => Some(gamma_d(d) / d as f64),
            _ => None,
        };
        let at = |r: f64| {
            grid.iter()
                .position(|&g| g == r)
                .expect("radius is on the grid")
        };
        let upper = |k: usize| closed_form_upper.unwrap_or(sup[k]);
        let last = grid.len() - 1;
        Ok(RegularityProfile {
            radii: radii.to_vec(),
            upper_local: radii.iter().map(|&r| upper(at(r))).collect(),
            lower_local: radii.iter().map(|&r| 1.0 / inf[at(r)]).collect(),
            upper_zero: upper(0),
            lower_zero: 1.0 / inf[0],
            upper_global: upper(last),
            lower_global: 1.0 / inf[last],
        })
    }

    fn representative_centers(&self) -> Vec<Point> {
        let p = self.ambient_dim();
        let mut pts: Vec<Vec<f64>> = Vec::new();
        match self.kind {
            SpaceKind::Sphere { .. } | SpaceKind::Circle => {
                let mut x = vec![0.0; p];
                x[p - 1] = 1.0;
                pts.push(x);
            }
            SpaceKind::Cube { d } => {
                // corners, face centers, centroid, and a few generic points
                for mask in 0..(1usize << d.min(4)) {
                    pts.push((0..d).map(|k| ((mask >> k) & 1) as f64).collect());
                }
                for k in 0..d {
                    let mut x = vec![0.5; d];
                    x[k] = 0.0;
                    pts.push(x);
                }
                pts.push(vec![0.5; d]);
                pts.extend(
                    self.sample_measure(8, 17)
                        .into_iter()
                        .map(Point::into_coords),
                );
            }
            SpaceKind::Cap { d: _, c } => {
                let mut pole = vec![0.0; p];
                pole[p - 1] = 1.0;
                pts.push(pole);
                let mut rim = vec![0.0; p];
                rim[0] = (1.0 - c * c).sqrt();
                rim[p - 1] = c;
                pts.push(rim);
                pts.extend(
                    self.sample_measure(12, 17)
                        .into_iter()
                        .map(Point::into_coords),
                );
            }
            SpaceKind::Torus { major, minor } => {
                for (u, v) in [(0.0, 0.0), (0.0, PI), (0.0, 0.5 * PI), (0.0, -0.5 * PI)] {
                    pts.push(torus_point(major, minor, u, v));
                }
                pts.extend(
                    self.sample_measure(12, 17)
                        .into_iter()
                        .map(Point::into_coords),
                );
            }
        }
        pts.into_iter()
            .map(|coords| Point {
                coords,
                tag: self.kind,
            })
            .collect()
    }

    /// Axes of a parametrization covering the space, for grid searches.
    /// `None` for spaces without a built-in chart.
    pub fn parameter_box(&self) -> Option<Vec<ParamAxis>> {
        let periodic = ParamAxis {
            lo: 0.0,
            hi: 2.0 * PI,
            periodic: true,
        };
        let interval = |lo: f64, hi: f64| ParamAxis {
            lo,
            hi,
            periodic: false,
        };
        match self.kind {
            SpaceKind::Circle | SpaceKind::Sphere { d: 1 } => Some(vec![periodic]),
            SpaceKind::Sphere { d: 2 } => Some(vec![interval(-1.0, 1.0), periodic]),
            SpaceKind::Cap { d: 2, c } => Some(vec![interval(c, 1.0), periodic]),
            SpaceKind::Cap { d: 1, c } => {
                let a = c.acos();
                Some(vec![interval(-a, a)])
            }
            SpaceKind::Cube { d } => Some(vec![interval(0.0, 1.0); d]),
            SpaceKind::Torus { .. } => Some(vec![periodic, periodic]),
            _ => None,
        }
    }

    /// Chart map matching [`parameter_box`](Self::parameter_box).
    pub fn from_parameters(&self, t: &[f64]) -> Result<Point, SpaceError> {
        let coords = match self.kind {
            SpaceKind::Circle | SpaceKind::Sphere { d: 1 } => vec![t[0].cos(), t[0].sin()],
            SpaceKind::Sphere { d: 2 } | SpaceKind::Cap { d: 2, .. } => {
                let z = t[0].clamp(-1.0, 1.0);
                let rr = (1.0 - z * z).sqrt();
                vec![rr * t[1].cos(), rr * t[1].sin(), z]
            }
            SpaceKind::Cap { d: 1, .. } => vec![t[0].sin(), t[0].cos()],
            SpaceKind::Cube { .. } => t.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            SpaceKind::Torus { major, minor } => torus_point(major, minor, t[0], t[1]),
            _ => {
                return Err(SpaceError::Usage(format!(
                    "{self} has no built-in parametrization"
                )))
            }
        };
        Ok(Point {
            coords,
            tag: self.kind,
        })
    }
}

pub(crate) fn torus_point(major: f64, minor: f64, u: f64, v: f64) -> Vec<f64> {
    let w = major + minor * v.cos();
    vec![w * u.cos(), w * u.sin(), minor * v.sin()]
}

fn normalize(x: &[f64]) -> Result<Vec<f64>, SpaceError> {
    let n = norm(x);
    if !(n > 1e-300) || !n.is_finite() {
        return Err(SpaceError::Degenerate(
            "cannot project the zero vector onto the sphere".into(),
        ));
    }
    Ok(x.iter().map(|v| v / n).collect())
}

fn gaussian_direction<R: Rng + ?Sized>(rng: &mut R, p: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..p)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        if let Ok(y) = normalize(&x) {
            return y;
        }
    }
}

/// `Gamma((d+1)/2) / (Gamma(d/2) Gamma(1/2))`, the normalizing constant of
/// the height marginal of the uniform measure on `S^d`.
pub fn gamma_d(d: usize) -> f64 {
    let d = d as f64;
    (libm::lgamma(0.5 * (d + 1.0)) - libm::lgamma(0.5 * d) - libm::lgamma(0.5)).exp()
}

/// Normalized surface mass of a chord-radius `r` ball on `S^d`.
pub fn sphere_ball_measure(d: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r >= 2.0 {
        return 1.0;
    }
    let t0 = 1.0 - 0.5 * r * r;
    match d {
        1 => t0.acos() / PI,
        2 => 0.25 * r * r,
        _ => {
            // substitute t = cos(phi) to remove the endpoint behaviour
            let phi = t0.acos();
            let k = (d - 1) as i32;
            let integral = adaptive_simpson(&|a: f64| a.sin().powi(k), 0.0, phi, 1e-14);
            (gamma_d(d) * integral).min(1.0)
        }
    }
}

/// Area of `B(center, r) ∩ [0,1]^2`.
fn square_ball_area(center: &[f64], r: f64) -> f64 {
    let (cx, cy) = (center[0], center[1]);
    let a = (cx - r).max(0.0);
    let b = (cx + r).min(1.0);
    if a >= b {
        return 0.0;
    }
    let chord = |x: f64| {
        let h = (r * r - (x - cx) * (x - cx)).max(0.0).sqrt();
        ((cy + h).min(1.0) - (cy - h).max(0.0)).max(0.0)
    };
    // split at kinks where the circle crosses y = 0 or y = 1
    let mut cuts = vec![a, b, cx.clamp(a, b)];
    for y in [0.0, 1.0] {
        let dy = y - cy;
        if dy.abs() < r {
            let w = (r * r - dy * dy).sqrt();
            cuts.push((cx - w).clamp(a, b));
            cuts.push((cx + w).clamp(a, b));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adaptive_simpson(&chord, w[0], w[1], 1e-13))
        .sum()
}
