//! Separation, mesh norm, mesh ratio and density conformance.
//!
//! The mesh norm is a sup over a continuum, so it is reported as a probe
//! estimate `rho_hat` together with a resolution `h`: the true value lies in
//! `[rho_hat, rho_hat + h]`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::Configuration;
use crate::grid::NeighborGrid;
use crate::numeric::{dist2, gauss_legendre_on, CompensatedSum};
use crate::spaces::{torus_point, Point, SpaceDescriptor, SpaceError, SpaceKind};
use crate::weights::DensityField;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("probe count {probes} is below 10*N = {min}; resolution too coarse")]
    CoarseProbes { probes: usize, min: usize },
    #[error("region {0} has zero measure in the space")]
    EmptyRegion(Region),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationMethod {
    Brute,
    #[default]
    Grid,
}

const GRID_MIN_POINTS: usize = 64;
const GRID_MAX_DIM: usize = 4;

/// Nearest-neighbor distance of every point and their minimum.
pub fn separation(
    points: &[Point],
    method: SeparationMethod,
) -> Result<(f64, Vec<f64>), QualityError> {
    let n = points.len();
    if n < 2 {
        return Err(QualityError::TooFewPoints { need: 2, got: n });
    }
    let tag = points[0].tag();
    if let Some(p) = points.iter().find(|p| p.tag() != tag) {
        return Err(SpaceError::Mismatch(p.tag(), tag).into());
    }
    let dim = points[0].coords().len();
    let coords: Vec<f64> = points
        .iter()
        .flat_map(|p| p.coords().iter().copied())
        .collect();
    let use_grid = method == SeparationMethod::Grid && n >= GRID_MIN_POINTS && dim <= GRID_MAX_DIM;
    let nn2: Vec<f64> = if use_grid {
        let grid = NeighborGrid::new(&coords, dim, sample_cell_size(&coords, dim));
        (0..n)
            .into_par_iter()
            .map(|i| {
                grid.nearest(&coords[i * dim..(i + 1) * dim], Some(i))
                    .map_or(f64::INFINITY, |b| b.1)
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = &coords[i * dim..(i + 1) * dim];
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| dist2(xi, &coords[j * dim..(j + 1) * dim]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };
    let nn: Vec<f64> = nn2.into_iter().map(f64::sqrt).collect();
    let delta = nn.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((delta, nn))
}

/// Median nearest-neighbor distance over the first few points.
fn sample_cell_size(coords: &[f64], dim: usize) -> f64 {
    let n = coords.len() / dim;
    let mut sample: Vec<f64> = (0..n.min(32))
        .map(|i| {
            let xi = &coords[i * dim..(i + 1) * dim];
            (0..n)
                .filter(|&j| j != i)
                .map(|j| dist2(xi, &coords[j * dim..(j + 1) * dim]))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    sample.sort_by(f64::total_cmp);
    sample[sample.len() / 2]
}

/// Probe estimate of the mesh norm and the probe resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshNorm {
    pub rho_hat: f64,
    pub h: f64,
    pub probes: usize,
}

/// Default probe count for `n` points.
pub fn default_probe_count(n: usize) -> usize {
    20_000.max(100 * n)
}

/// `rho_hat = max_p min_i |p - x_i|` over a probe set `P` of `K`, and a
/// resolution `h` with `rho_hat <= rho(points, K) <= rho_hat + h`.
pub fn mesh_norm(
    points: &[Point],
    space: &SpaceDescriptor,
    probes: usize,
) -> Result<MeshNorm, QualityError> {
    let n = points.len();
    if n == 0 {
        return Err(QualityError::TooFewPoints { need: 1, got: 0 });
    }
    if let Some(p) = points.iter().find(|p| p.tag() != space.kind()) {
        return Err(SpaceError::Mismatch(p.tag(), space.kind()).into());
    }
    if probes < 10 * n {
        return Err(QualityError::CoarseProbes {
            probes,
            min: 10 * n,
        });
    }
    let dim = space.ambient_dim();
    let probe_set = ProbeSet::build(space, probes)?;
    let coords: Vec<f64> = points
        .iter()
        .flat_map(|p| p.coords().iter().copied())
        .collect();
    let rho2 = max_min_dist2(&probe_set.coords, &coords, dim);
    Ok(MeshNorm {
        rho_hat: rho2.sqrt(),
        h: probe_set.resolution,
        probes: probe_set.coords.len() / dim,
    })
}

/// `max_{q in queries} min_{x in targets} |q - x|^2`.
fn max_min_dist2(queries: &[f64], targets: &[f64], dim: usize) -> f64 {
    let nt = targets.len() / dim;
    let cell = if nt >= GRID_MIN_POINTS && dim <= GRID_MAX_DIM {
        sample_cell_size(targets, dim)
    } else {
        f64::INFINITY
    };
    let grid = NeighborGrid::new(targets, dim, cell);
    queries
        .par_chunks(dim)
        .map(|q| grid.nearest(q, None).map_or(f64::INFINITY, |b| b.1))
        .reduce(|| 0.0, f64::max)
}

struct ProbeSet {
    coords: Vec<f64>,
    resolution: f64,
}

/// Denser lattices used to estimate the covering radius of a probe set.
const CHECK_FACTOR: usize = 10;
const RANDOM_PROBE_SEED: u64 = 0x9e37_79b9;

impl ProbeSet {
    fn build(space: &SpaceDescriptor, m: usize) -> Result<Self, QualityError> {
        Ok(match space.kind() {
            SpaceKind::Circle | SpaceKind::Sphere { d: 1 } => {
                let coords = arc_probes(-PI, PI, m, true);
                Self {
                    coords,
                    resolution: 2.0 * (PI / (2.0 * m as f64)).sin(),
                }
            }
            SpaceKind::Cap { d: 1, c } => {
                let half = c.clamp(-1.0, 1.0).acos();
                let (lo, hi) = (0.5 * PI - half, 0.5 * PI + half);
                let step = (hi - lo) / (m.max(2) - 1) as f64;
                Self {
                    coords: arc_probes(lo, hi, m.max(2), false),
                    resolution: 2.0 * (0.25 * step).sin(),
                }
            }
            SpaceKind::Sphere { d: 2 } => {
                let coords = fibonacci_sphere(m);
                let check = fibonacci_sphere(CHECK_FACTOR * m);
                let resolution = max_min_dist2(&check, &coords, 3).sqrt();
                Self { coords, resolution }
            }
            SpaceKind::Cap { d: 2, c } => {
                let coords = cap_lattice(c, m);
                let check = cap_lattice(c, CHECK_FACTOR * m);
                let resolution = max_min_dist2(&check, &coords, 3).sqrt();
                Self { coords, resolution }
            }
            SpaceKind::Cube { d } => {
                let g = ((m as f64).powf(1.0 / d as f64).round() as usize).max(2);
                let total = g.pow(d as u32);
                let mut coords = Vec::with_capacity(total * d);
                for flat in 0..total {
                    let mut rem = flat;
                    for _ in 0..d {
                        coords.push((rem % g) as f64 / (g - 1) as f64);
                        rem /= g;
                    }
                }
                Self {
                    coords,
                    resolution: 0.5 * (d as f64).sqrt() / (g - 1) as f64,
                }
            }
            SpaceKind::Torus { major, minor } => {
                // cell counts proportional to the two circumferences
                let ratio = (major + minor) / minor;
                let gv = ((m as f64 / ratio).sqrt().round() as usize).max(3);
                let gu = ((m as f64 / gv as f64).round() as usize).max(3);
                let (du, dv) = (2.0 * PI / gu as f64, 2.0 * PI / gv as f64);
                let mut coords = Vec::with_capacity(gu * gv * 3);
                for a in 0..gu {
                    for b in 0..gv {
                        coords.extend(torus_point(major, minor, a as f64 * du, b as f64 * dv));
                    }
                }
                // path along a meridian then a parallel from the nearest probe
                let resolution = (major + minor) * 0.5 * du + minor * 0.5 * dv;
                Self { coords, resolution }
            }
            SpaceKind::Sphere { .. } | SpaceKind::Cap { .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_PROBE_SEED);
                let coords: Vec<f64> = space
                    .sample_with(&mut rng, m)
                    .into_iter()
                    .flat_map(Point::into_coords)
                    .collect();
                let check: Vec<f64> = space
                    .sample_with(&mut rng, CHECK_FACTOR * m)
                    .into_iter()
                    .flat_map(Point::into_coords)
                    .collect();
                let resolution = max_min_dist2(&check, &coords, space.ambient_dim()).sqrt();
                Self { coords, resolution }
            }
        })
    }
}

fn arc_probes(lo: f64, hi: f64, m: usize, periodic: bool) -> Vec<f64> {
    let denom = if periodic { m } else { m - 1 } as f64;
    (0..m)
        .flat_map(|k| {
            let t = lo + (hi - lo) * k as f64 / denom;
            [t.cos(), t.sin()]
        })
        .collect()
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Area-uniform Fibonacci lattice on `S^2`.
pub(crate) fn fibonacci_sphere(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * m);
    for k in 0..m {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = GOLDEN_ANGLE * k as f64;
        out.extend([r * phi.cos(), r * phi.sin(), z]);
    }
    out
}

/// Spiral lattice on the cap `x3 >= c` plus a ring on the rim.
fn cap_lattice(c: f64, m: usize) -> Vec<f64> {
    let rim_radius = (1.0 - c * c).max(0.0).sqrt();
    // rim spacing comparable to the interior spacing
    let area = 2.0 * PI * (1.0 - c);
    let spacing = (area / m as f64).sqrt();
    let rim = ((2.0 * PI * rim_radius / spacing).ceil() as usize).max(3);
    let inner = m.saturating_sub(rim).max(1);
    let mut out = Vec::with_capacity(3 * (inner + rim));
    for k in 0..inner {
        let z = 1.0 - (1.0 - c) * (k as f64 + 0.5) / inner as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = GOLDEN_ANGLE * k as f64;
        out.extend([r * phi.cos(), r * phi.sin(), z]);
    }
    for k in 0..rim {
        let phi = 2.0 * PI * k as f64 / rim as f64;
        out.extend([rim_radius * phi.cos(), rim_radius * phi.sin(), c]);
    }
    out
}

/// `[rho_hat / delta, (rho_hat + h) / delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshRatio {
    pub lo: f64,
    pub hi: f64,
}

impl MeshRatio {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

pub fn mesh_ratio(
    points: &[Point],
    space: &SpaceDescriptor,
    probes: usize,
) -> Result<MeshRatio, QualityError> {
    let (delta, _) = separation(points, SeparationMethod::Grid)?;
    let mn = mesh_norm(points, space, probes)?;
    Ok(MeshRatio {
        lo: mn.rho_hat / delta,
        hi: (mn.rho_hat + mn.h) / delta,
    })
}

/// Separation, mesh-norm interval and mesh-ratio interval of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub n: usize,
    pub separation: f64,
    pub mesh_norm_lower: f64,
    pub probe_resolution: f64,
    pub mesh_ratio: MeshRatio,
    pub nn_distances: Vec<f64>,
}

pub const QUALITY_CSV_HEADER: [&str; 7] =
    ["N", "s", "delta", "rho_hat", "h", "gamma_lo", "gamma_hi"];

impl QualityReport {
    pub fn csv_row(&self, s: Option<f64>) -> [String; 7] {
        [
            self.n.to_string(),
            s.map_or_else(String::new, |s| s.to_string()),
            self.separation.to_string(),
            self.mesh_norm_lower.to_string(),
            self.probe_resolution.to_string(),
            self.mesh_ratio.lo.to_string(),
            self.mesh_ratio.hi.to_string(),
        ]
    }
}

pub fn quality_report(
    config: &Configuration,
    probes: usize,
) -> Result<QualityReport, QualityError> {
    let (delta, nn) = separation(config.points(), SeparationMethod::Grid)?;
    let mn = mesh_norm(config.points(), config.space(), probes)?;
    Ok(QualityReport {
        n: config.len(),
        separation: delta,
        mesh_norm_lower: mn.rho_hat,
        probe_resolution: mn.h,
        mesh_ratio: MeshRatio {
            lo: mn.rho_hat / delta,
            hi: (mn.rho_hat + mn.h) / delta,
        },
        nn_distances: nn,
    })
}

/// A region cut out by the last ambient coordinate `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    /// `z >= t`.
    Cap { t: f64 },
    /// `lo <= z < hi`, closed at the top when `hi` is the largest value of `z`.
    Band { lo: f64, hi: f64 },
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Cap { t } => write!(f, "cap:{t}"),
            Region::Band { lo, hi } => write!(f, "band:{lo}:{hi}"),
        }
    }
}

impl std::str::FromStr for Region {
    type Err = String;

    /// `cap:<t>` or `band:<lo>:<hi>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| format!("cannot parse region '{s}'"))
        };
        match parts.as_slice() {
            ["cap", t] => Ok(Region::Cap { t: num(t)? }),
            ["band", lo, hi] if num(lo)? < num(hi)? => Ok(Region::Band {
                lo: num(lo)?,
                hi: num(hi)?,
            }),
            _ => Err(format!(
                "cannot parse region '{s}' (expected cap:<t> or band:<lo>:<hi>)"
            )),
        }
    }
}

impl Region {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Region::Cap { t } => (t, f64::INFINITY),
            Region::Band { lo, hi } => (lo, hi),
        }
    }

    fn contains(&self, z: f64, z_top: f64) -> bool {
        let (lo, hi) = self.bounds();
        z >= lo && (z < hi || (hi >= z_top && z <= hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub region: Region,
    pub observed: f64,
    pub target: f64,
    pub gap: f64,
}

const MC_TARGET_SAMPLES: usize = 400_000;
const MC_TARGET_SEED: u64 = 0x5eed_de75;

/// Fraction of points in each region against `int_region sigma dmu`, with
/// `sigma` normalized to total mass one.
pub fn density_check(
    config: &Configuration,
    sigma: &DensityField,
    regions: &[Region],
) -> Result<Vec<RegionCheck>, QualityError> {
    let space = config.space();
    let (z_lo, z_top) = last_coordinate_range(space);
    let targets = region_targets(space, sigma, regions)?;
    let n = config.len() as f64;
    regions
        .iter()
        .zip(targets)
        .map(|(region, target)| {
            let (lo, hi) = region.bounds();
            if lo.max(z_lo) >= hi.min(z_top)
                && !(lo == z_top && matches!(region, Region::Cap { .. }))
            {
                return Err(QualityError::EmptyRegion(*region));
            }
            let count = config
                .points()
                .iter()
                .filter(|p| region.contains(*p.coords().last().unwrap(), z_top))
                .count();
            let observed = count as f64 / n;
            Ok(RegionCheck {
                region: *region,
                observed,
                target,
                gap: (observed - target).abs(),
            })
        })
        .collect()
}

/// The upper half of the range of `z` as a cap, plus three equal bands
/// covering it.
pub fn default_regions(space: &SpaceDescriptor) -> Vec<Region> {
    let (lo, hi) = last_coordinate_range(space);
    let step = (hi - lo) / 3.0;
    vec![
        Region::Cap { t: 0.5 * (lo + hi) },
        Region::Band { lo, hi: lo + step },
        Region::Band {
            lo: lo + step,
            hi: hi - step,
        },
        Region::Band { lo: hi - step, hi },
    ]
}

fn last_coordinate_range(space: &SpaceDescriptor) -> (f64, f64) {
    match space.kind() {
        SpaceKind::Sphere { .. } | SpaceKind::Circle => (-1.0, 1.0),
        SpaceKind::Cap { c, .. } => (c.max(-1.0), 1.0),
        SpaceKind::Cube { .. } => (0.0, 1.0),
        SpaceKind::Torus { minor, .. } => (-minor, minor),
    }
}

fn region_targets(
    space: &SpaceDescriptor,
    sigma: &DensityField,
    regions: &[Region],
) -> Result<Vec<f64>, QualityError> {
    let (z_lo, z_top) = last_coordinate_range(space);
    match space.kind() {
        // on S^2 the height is uniformly distributed, so mass over a z-range
        // is a 2-D integral in (z, phi)
        SpaceKind::Sphere { d: 2 } | SpaceKind::Cap { d: 2, .. } => {
            let integrate = |lo: f64, hi: f64| -> f64 {
                let (lo, hi) = (lo.max(z_lo), hi.min(z_top));
                if lo >= hi {
                    return 0.0;
                }
                let mut acc = CompensatedSum::new();
                for (z, wz) in gauss_legendre_on(64, lo, hi) {
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    for k in 0..128 {
                        let phi = 2.0 * PI * (k as f64 + 0.5) / 128.0;
                        acc.add(wz * sigma.evaluate(&[r * phi.cos(), r * phi.sin(), z]));
                    }
                }
                acc.value()
            };
            let total = integrate(z_lo, z_top);
            Ok(regions
                .iter()
                .map(|r| {
                    let (lo, hi) = r.bounds();
                    integrate(lo, hi) / total
                })
                .collect())
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(MC_TARGET_SEED);
            let samples = space.sample_with(&mut rng, MC_TARGET_SAMPLES);
            let mut totals = vec![CompensatedSum::new(); regions.len()];
            let mut all = CompensatedSum::new();
            for p in &samples {
                let v = sigma.evaluate(p.coords());
                all.add(v);
                let z = *p.coords().last().unwrap();
                for (acc, r) in totals.iter_mut().zip(regions) {
                    if r.contains(z, z_top) {
                        acc.add(v);
                    }
                }
            }
            Ok(totals.iter().map(|t| t.value() / all.value()).collect())
        }
    }
}
