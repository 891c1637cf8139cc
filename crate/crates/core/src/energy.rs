//! Weighted Riesz energy, point potentials and gradients.
//!
//! All pair sums run over ordered pairs in lexicographic order with
//! compensated accumulation. Rows (fixed first index) may be evaluated in
//! parallel; they are combined in row order, so results do not depend on the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{dist2, log_sum_exp, CompensatedSum};
use crate::spaces::{Point, SpaceDescriptor, SpaceError, COINCIDENCE_TOL};
use crate::weights::{WeightRecord, WeightSpec};

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("points {0} and {1} coincide; the energy is infinite")]
    Coincident(usize, usize),
    #[error("query point coincides with configuration point {0}; the potential is infinite")]
    InfinitePotential(usize),
    #[error(
        "plain summation would overflow (s*ln(1/delta) = {0:.1} > 600); use the log-domain mode"
    )]
    Overflow(f64),
    #[error("configuration needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {0} is not on {1} (residual {2:e})")]
    OffSpace(usize, SpaceDescriptor, f64),
    #[error("exponent s must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Provenance of a configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: String,
    /// `(min, max)` of the density behind a density-derived weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_bounds: Option<(f64, f64)>,
}

/// An ordered set of `N >= 2` distinct points on a space.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    space: SpaceDescriptor,
    points: Vec<Point>,
    pub meta: ConfigMeta,
}

const ON_SPACE_TOL: f64 = 1e-12;

impl Configuration {
    pub fn new(
        space: SpaceDescriptor,
        points: Vec<Point>,
        meta: ConfigMeta,
    ) -> Result<Self, EnergyError> {
        if points.len() < 2 {
            return Err(EnergyError::TooFewPoints(points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.tag() != space.kind() {
                return Err(SpaceError::Mismatch(p.tag(), space.kind()).into());
            }
            let res = space.surface_residual(p.coords())?;
            if res > ON_SPACE_TOL * space.diameter().max(1.0) {
                return Err(EnergyError::OffSpace(i, space, res));
            }
        }
        let tol2 = coincidence_tol2(&space);
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if dist2(points[i].coords(), points[j].coords()) <= tol2 {
                    return Err(EnergyError::Coincident(i, j));
                }
            }
        }
        Ok(Self {
            space,
            points,
            meta,
        })
    }

    /// Builds from raw rows of coordinates.
    pub fn from_coords(
        space: SpaceDescriptor,
        rows: Vec<Vec<f64>>,
        meta: ConfigMeta,
    ) -> Result<Self, EnergyError> {
        let points = rows
            .into_iter()
            .map(|r| space.point(r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(space, points, meta)
    }

    pub(crate) fn from_flat(
        space: SpaceDescriptor,
        flat: &[f64],
        meta: ConfigMeta,
    ) -> Result<Self, EnergyError> {
        let p = space.ambient_dim();
        Self::from_coords(space, flat.chunks(p).map(<[f64]>::to_vec).collect(), meta)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coordinates flattened row-major, `N * p` values.
    pub fn flat_coords(&self) -> Vec<f64> {
        self.points
            .iter()
            .flat_map(|p| p.coords().iter().copied())
            .collect()
    }

    /// Same points in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self, EnergyError> {
        let pts = order.iter().map(|&i| self.points[i].clone()).collect();
        Self::new(self.space, pts, self.meta.clone())
    }
}

pub(crate) fn coincidence_tol2(space: &SpaceDescriptor) -> f64 {
    let t = COINCIDENCE_TOL * space.diameter();
    t * t
}

/// Summation mode for the total energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    Plain,
    LogDomain,
    /// Log domain when `s >= 64` or the plain sum could exceed `1e300`.
    Auto,
}

/// Result of [`total_energy`]. In log-domain mode `value` and `per_point`
/// hold natural logarithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub mode: EnergyMode,
    pub value: f64,
    pub per_point: Vec<f64>,
    pub min_pair_distance: f64,
}

impl EnergyReport {
    pub fn log_energy(&self) -> f64 {
        match self.mode {
            EnergyMode::LogDomain => self.value,
            _ => self.value.ln(),
        }
    }

    /// The energy itself; may be `inf` for log-domain reports.
    pub fn energy(&self) -> f64 {
        match self.mode {
            EnergyMode::LogDomain => self.value.exp(),
            _ => self.value,
        }
    }
}

/// `m^(-s)` from a squared distance, with integer fast paths.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RieszKernel {
    s: f64,
    half_int: Option<i32>,
    int: Option<i32>,
}

impl RieszKernel {
    pub(crate) fn new(s: f64) -> Self {
        let half = 0.5 * s;
        let small = |v: f64| v.fract() == 0.0 && v.abs() <= 512.0;
        Self {
            s,
            half_int: small(half).then_some(half as i32),
            int: small(s).then_some(s as i32),
        }
    }

    #[inline]
    pub(crate) fn inv_pow(&self, m2: f64) -> f64 {
        if let Some(k) = self.half_int {
            ipow(1.0 / m2, k)
        } else if let Some(k) = self.int {
            ipow(1.0 / m2.sqrt(), k)
        } else {
            m2.powf(-0.5 * self.s)
        }
    }

    /// `(m^-s, 1 / m^2)` with a single division on the integer paths.
    #[inline(always)]
    pub(crate) fn inv_pow_recip(&self, m2: f64) -> (f64, f64) {
        let r = 1.0 / m2;
        if let Some(k) = self.half_int {
            (ipow(r, k), r)
        } else if let Some(k) = self.int {
            (ipow(r.sqrt(), k), r)
        } else {
            (m2.powf(-0.5 * self.s), r)
        }
    }

    #[inline]
    pub(crate) fn log_inv_pow(&self, m2: f64) -> f64 {
        -0.5 * self.s * m2.ln()
    }
}

/// `x^k` for `k >= 0` by repeated squaring, inlined.
#[inline(always)]
fn ipow(x: f64, k: i32) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        2 => x * x,
        3 => x * x * x,
        4 => {
            let y = x * x;
            y * y
        }
        _ => {
            let (mut base, mut e, mut acc) = (x, k as u32, 1.0);
            while e > 0 {
                if e & 1 == 1 {
                    acc *= base;
                }
                base *= base;
                e >>= 1;
            }
            acc
        }
    }
}

/// Fixed-order compensated sum over four interleaved lanes, which keeps the
/// accumulation off a single dependency chain.
#[derive(Clone, Copy, Default)]
struct LaneSum([CompensatedSum; 4]);

impl LaneSum {
    #[inline(always)]
    fn add(&mut self, lane: usize, x: f64) {
        self.0[lane & 3].add(x);
    }

    fn value(&self) -> f64 {
        self.0
            .iter()
            .map(CompensatedSum::value)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// One sweep over all ordered pairs in plain arithmetic.
pub(crate) struct PlainPass {
    /// `sum_{j != i} w_ij m_ij^-s`.
    pub rows: Vec<f64>,
    /// `sum_{j != i} w_ij m_ij^-s (x_i - x_j) / m_ij^2`, flattened; empty
    /// unless requested.
    pub pull: Vec<f64>,
    pub min_distance: f64,
}

/// Flattened inputs of a pair sum.
pub(crate) struct PairData<'a> {
    pub coords: &'a [f64],
    pub dim: usize,
    pub factors: &'a [f64],
    pub multiplier: f64,
    pub tol2: f64,
}

impl PairData<'_> {
    pub(crate) fn n(&self) -> usize {
        self.factors.len()
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Smallest pair distance, or the coincident pair.
    pub(crate) fn min_distance(&self) -> Result<f64, EnergyError> {
        let n = self.n();
        let mins = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = self.row(i);
                let mut best = f64::INFINITY;
                for j in (i + 1)..n {
                    let m2 = dist2(xi, self.row(j));
                    if m2 <= self.tol2 {
                        return Err(EnergyError::Coincident(i, j));
                    }
                    best = best.min(m2);
                }
                Ok(best)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(mins.into_iter().fold(f64::INFINITY, f64::min).sqrt())
    }

    /// Per-row sums `sum_{j != i} w_ij m_ij^-s` and the minimum distance.
    pub(crate) fn plain_rows(&self, kernel: RieszKernel) -> Result<(Vec<f64>, f64), EnergyError> {
        let pass = self.plain_pass(kernel, false)?;
        Ok((pass.rows, pass.min_distance))
    }

    /// Row sums and, with `with_pull`, the pair-weighted displacement sums
    /// that make up the gradient.
    pub(crate) fn plain_pass(
        &self,
        kernel: RieszKernel,
        with_pull: bool,
    ) -> Result<PlainPass, EnergyError> {
        // a constant dimension lets the compiler unroll the coordinate loops
        match self.dim {
            2 => self.plain_pass_dim::<2>(kernel, with_pull),
            3 => self.plain_pass_dim::<3>(kernel, with_pull),
            4 => self.plain_pass_dim::<4>(kernel, with_pull),
            _ => self.plain_pass_dim::<0>(kernel, with_pull),
        }
    }

    /// `D = 0` means the dimension is only known at run time.
    fn plain_pass_dim<const D: usize>(
        &self,
        kernel: RieszKernel,
        with_pull: bool,
    ) -> Result<PlainPass, EnergyError> {
        let n = self.n();
        let dim = if D > 0 { D } else { self.dim };
        let mut pull = vec![0.0; if with_pull { n * dim } else { 0 }];
        let rows: Vec<(f64, f64)> = if with_pull {
            pull.par_chunks_mut(dim)
                .enumerate()
                .map(|(i, p)| self.plain_row::<D, true>(i, kernel, p))
                .collect::<Result<_, _>>()?
        } else {
            (0..n)
                .into_par_iter()
                .map(|i| self.plain_row::<D, false>(i, kernel, &mut []))
                .collect::<Result<_, _>>()?
        };
        let min2 = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        Ok(PlainPass {
            rows: rows.into_iter().map(|r| r.0).collect(),
            pull,
            min_distance: min2.sqrt(),
        })
    }

    /// Row `i` of a plain pass: `(sum_j w_ij m_ij^-s, min_j m_ij^2)`, adding
    /// the displacement sum into `pull` when `PULL` is set.
    #[inline(always)]
    fn plain_row<const D: usize, const PULL: bool>(
        &self,
        i: usize,
        kernel: RieszKernel,
        pull: &mut [f64],
    ) -> Result<(f64, f64), EnergyError> {
        let dim = if D > 0 { D } else { self.dim };
        let n = self.n();
        let coords = &self.coords[..n * dim];
        let xi = &coords[i * dim..(i + 1) * dim];
        let fi = self.multiplier * self.factors[i];
        let mut acc = LaneSum::default();
        let mut best = f64::INFINITY;
        let mut p = [0.0; 4];
        for (j, (xj, &fj)) in coords.chunks_exact(dim).zip(self.factors).enumerate() {
            if j == i {
                continue;
            }
            let mut m2 = 0.0;
            for k in 0..dim {
                let d = xi[k] - xj[k];
                m2 += d * d;
            }
            best = best.min(m2);
            let (inv, r) = kernel.inv_pow_recip(m2);
            let t = fi * fj * inv;
            acc.add(j, t);
            if PULL {
                let c = t * r;
                if D > 0 {
                    for k in 0..D {
                        p[k] += c * (xi[k] - xj[k]);
                    }
                } else {
                    for k in 0..dim {
                        pull[k] += c * (xi[k] - xj[k]);
                    }
                }
            }
        }
        if best <= self.tol2 {
            let j = (0..n)
                .find(|&j| j != i && dist2(xi, &coords[j * dim..(j + 1) * dim]) <= self.tol2)
                .expect("a coincident partner exists");
            return Err(EnergyError::Coincident(i.min(j), i.max(j)));
        }
        if PULL && D > 0 {
            pull[..D].copy_from_slice(&p[..D]);
        }
        Ok((acc.value(), best))
    }

    /// Per-row `ln sum_{j != i} w_ij m_ij^-s` and the minimum distance.
    pub(crate) fn log_rows(&self, kernel: RieszKernel) -> Result<(Vec<f64>, f64), EnergyError> {
        let n = self.n();
        let ln_mult = self.multiplier.ln();
        let rows = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = self.row(i);
                let lfi = ln_mult + self.factors[i].ln();
                let mut terms = Vec::with_capacity(n - 1);
                let mut best = f64::INFINITY;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let m2 = dist2(xi, self.row(j));
                    if m2 <= self.tol2 {
                        return Err(EnergyError::Coincident(i.min(j), i.max(j)));
                    }
                    best = best.min(m2);
                    terms.push(lfi + self.factors[j].ln() + kernel.log_inv_pow(m2));
                }
                Ok((log_sum_exp(&terms), best))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let min2 = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        Ok((rows.into_iter().map(|r| r.0).collect(), min2.sqrt()))
    }

    /// Gradient of `ln E` with respect to each point (ambient, unprojected),
    /// given `ln E` and per-point gradients of `ln f`.
    pub(crate) fn log_gradient(
        &self,
        kernel: RieszKernel,
        log_energy: f64,
        log_factor_grads: Option<&[f64]>,
        log_domain: bool,
    ) -> Vec<f64> {
        let n = self.n();
        let dim = self.dim;
        let s = kernel.s;
        let ln_mult = self.multiplier.ln();
        let inv_e = (-log_energy).exp();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = self.row(i);
                let mut g = vec![0.0; dim];
                let mut total_w = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let xj = self.row(j);
                    let m2 = dist2(xi, xj);
                    // relative weight of this pair in the energy
                    let rel = if log_domain {
                        (ln_mult
                            + self.factors[i].ln()
                            + self.factors[j].ln()
                            + kernel.log_inv_pow(m2)
                            - log_energy)
                            .exp()
                    } else {
                        self.multiplier
                            * self.factors[i]
                            * self.factors[j]
                            * kernel.inv_pow(m2)
                            * inv_e
                    };
                    total_w += rel;
                    let c = -s * rel / m2;
                    for k in 0..dim {
                        g[k] += c * (xi[k] - xj[k]);
                    }
                }
                if let Some(lg) = log_factor_grads {
                    for k in 0..dim {
                        g[k] += total_w * lg[i * dim + k];
                    }
                }
                // the double sum counts each pair twice
                g.iter_mut().for_each(|v| *v *= 2.0);
                g
            })
            .collect();
        rows.into_iter().flatten().collect()
    }
}

/// Gradient of `ln E` (ambient, unprojected) from a plain pass with pulls:
/// `2 (-s pull_i + E_i grad ln f(x_i)) / E`.
pub(crate) fn plain_log_gradient(
    pass: &PlainPass,
    energy: f64,
    s: f64,
    dim: usize,
    log_factor_grads: Option<&[f64]>,
) -> Vec<f64> {
    let scale = 2.0 / energy;
    let mut g: Vec<f64> = pass.pull.iter().map(|p| -s * scale * p).collect();
    if let Some(lg) = log_factor_grads {
        for (i, e) in pass.rows.iter().enumerate() {
            for k in 0..dim {
                g[i * dim + k] += scale * e * lg[i * dim + k];
            }
        }
    }
    g
}

pub(crate) fn check_exponent(s: f64) -> Result<(), EnergyError> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(EnergyError::BadExponent(s));
    }
    Ok(())
}

/// Per-point weight factors for a flat coordinate array.
pub(crate) fn weight_factors(w: &WeightSpec, coords: &[f64], dim: usize) -> Vec<f64> {
    coords.chunks(dim).map(|x| w.factor(x)).collect()
}

/// Per-point gradients of `ln f` (ambient vectors, flattened).
pub(crate) fn log_factor_gradients(
    w: &WeightSpec,
    coords: &[f64],
    dim: usize,
    factors: &[f64],
) -> Result<Option<Vec<f64>>, EnergyError> {
    if w.is_constant() {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(coords.len());
    for (x, f) in coords.chunks(dim).zip(factors) {
        out.extend(w.factor_gradient(x)?.into_iter().map(|g| g / f));
    }
    Ok(Some(out))
}

/// Chooses plain or log-domain summation.
pub(crate) fn resolve_mode(
    mode: EnergyMode,
    s: f64,
    data: &PairData,
) -> Result<EnergyMode, EnergyError> {
    Ok(match mode {
        EnergyMode::Auto => {
            if s >= 64.0 {
                EnergyMode::LogDomain
            } else {
                let delta = data.min_distance()?;
                let n = data.n() as f64;
                let fmax = data.factors.iter().copied().fold(0.0, f64::max);
                let predicted =
                    (n * (n - 1.0) * data.multiplier * fmax * fmax).ln() - s * delta.ln();
                if predicted > 1e300f64.ln() {
                    EnergyMode::LogDomain
                } else {
                    EnergyMode::Plain
                }
            }
        }
        m => m,
    })
}

const PLAIN_OVERFLOW_LIMIT: f64 = 600.0;

/// Total weighted Riesz energy `sum_{i != j} w(x_i, x_j) / m(x_i, x_j)^s`.
pub fn total_energy(
    config: &Configuration,
    s: f64,
    w: &WeightSpec,
    mode: EnergyMode,
) -> Result<EnergyReport, EnergyError> {
    check_exponent(s)?;
    let coords = config.flat_coords();
    let dim = config.space().ambient_dim();
    let factors = weight_factors(w, &coords, dim);
    let data = PairData {
        coords: &coords,
        dim,
        factors: &factors,
        multiplier: w.multiplier(),
        tol2: coincidence_tol2(config.space()),
    };
    let kernel = RieszKernel::new(s);
    let mode = resolve_mode(mode, s, &data)?;
    match mode {
        EnergyMode::LogDomain => {
            let (rows, min_d) = data.log_rows(kernel)?;
            Ok(EnergyReport {
                mode,
                value: log_sum_exp(&rows),
                per_point: rows,
                min_pair_distance: min_d,
            })
        }
        _ => {
            let (rows, min_d) = data.plain_rows(kernel)?;
            let exponent = -s * min_d.ln();
            if exponent > PLAIN_OVERFLOW_LIMIT {
                return Err(EnergyError::Overflow(exponent));
            }
            Ok(EnergyReport {
                mode: EnergyMode::Plain,
                value: crate::numeric::compensated_sum(&rows),
                per_point: rows,
                min_pair_distance: min_d,
            })
        }
    }
}

/// How [`potential_at`] normalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// `U(y) = (1/N) sum_i w(y, x_i) / m(y, x_i)^s`.
    Mean,
    /// `sum_{i != skip} w(y, x_i) / m(y, x_i)^s`, no `1/N`.
    Sum { skip: Option<usize> },
}

/// Potential of the points at `y`.
pub fn potential_at(
    y: &Point,
    points: &[Point],
    s: f64,
    w: &WeightSpec,
    kind: Potential,
    space: &SpaceDescriptor,
) -> Result<f64, EnergyError> {
    check_exponent(s)?;
    let skip = match kind {
        Potential::Sum { skip } => skip,
        Potential::Mean => None,
    };
    let tol2 = coincidence_tol2(space);
    let kernel = RieszKernel::new(s);
    let mut acc = CompensatedSum::new();
    for (i, x) in points.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if x.tag() != y.tag() {
            return Err(SpaceError::Mismatch(x.tag(), y.tag()).into());
        }
        let m2 = dist2(y.coords(), x.coords());
        if m2 <= tol2 {
            return Err(EnergyError::InfinitePotential(i));
        }
        acc.add(w.eval(y, x) * kernel.inv_pow(m2));
    }
    Ok(match kind {
        Potential::Mean => acc.value() / points.len() as f64,
        Potential::Sum { .. } => acc.value(),
    })
}

/// Whether weight gradients enter the energy gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightGradient {
    /// Full product rule, including the gradient of the density factor.
    #[default]
    Full,
    /// Weights treated as constants (fallback mode).
    Frozen,
}

/// Gradient of the energy with respect to each point, projected onto the
/// directions the point can move in. For boundary points the projection is
/// applied to the descent direction, so `-grad` is always feasible.
pub fn energy_gradient(
    config: &Configuration,
    s: f64,
    w: &WeightSpec,
    weight_gradient: WeightGradient,
) -> Result<Vec<Vec<f64>>, EnergyError> {
    check_exponent(s)?;
    let space = config.space();
    let coords = config.flat_coords();
    let dim = space.ambient_dim();
    let n = config.len();
    let factors = weight_factors(w, &coords, dim);
    let data = PairData {
        coords: &coords,
        dim,
        factors: &factors,
        multiplier: w.multiplier(),
        tol2: coincidence_tol2(space),
    };
    let kernel = RieszKernel::new(s);
    let fgrad = match weight_gradient {
        WeightGradient::Full => weight_factor_gradients(w, &coords, dim)?,
        WeightGradient::Frozen => None,
    };
    data.min_distance()?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = data.row(i);
            let mut g = vec![0.0; dim];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = data.row(j);
                let m2 = dist2(xi, xj);
                let inv = kernel.inv_pow(m2);
                let wij = data.multiplier * factors[i] * factors[j];
                let c = -s * wij * inv / m2;
                for k in 0..dim {
                    g[k] += c * (xi[k] - xj[k]);
                }
                if let Some(fg) = &fgrad {
                    let a = data.multiplier * factors[j] * inv;
                    for k in 0..dim {
                        g[k] += a * fg[i * dim + k];
                    }
                }
            }
            g.iter_mut().for_each(|v| *v *= 2.0);
            g
        })
        .collect();
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, g)| projected_gradient(space, &coords[i * dim..(i + 1) * dim], &g))
        .collect())
}

fn weight_factor_gradients(
    w: &WeightSpec,
    coords: &[f64],
    dim: usize,
) -> Result<Option<Vec<f64>>, EnergyError> {
    if w.is_constant() {
        return Ok(None);
    }
    let mut out = Vec::with_capacity(coords.len());
    for x in coords.chunks(dim) {
        out.extend(w.factor_gradient(x)?);
    }
    Ok(Some(out))
}

/// `-P(x, -g)`: the gradient whose negative is a feasible descent direction.
pub(crate) fn projected_gradient(space: &SpaceDescriptor, x: &[f64], g: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    space
        .tangent_project(x, &neg)
        .into_iter()
        .map(|v| -v)
        .collect()
}

/// Largest number of points [`brute_force_minimal_energy`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 4;
const BRUTE_FORCE_MAX_COMBOS: f64 = 3.0e6;

/// Grid search over a space parametrization followed by a coordinate
/// pattern search. Intended as a test oracle for tiny `N`.
pub fn brute_force_minimal_energy(
    space: &SpaceDescriptor,
    n: usize,
    s: f64,
    w: &WeightSpec,
    grid_resolution: usize,
) -> Result<(f64, Configuration), EnergyError> {
    check_exponent(s)?;
    if !(2..=BRUTE_FORCE_MAX_N).contains(&n) {
        return Err(EnergyError::Usage(format!(
            "brute-force minimization supports 2..={BRUTE_FORCE_MAX_N} points, got {n}"
        )));
    }
    let axes = space.parameter_box().ok_or_else(|| {
        EnergyError::Usage(format!("{space} has no parametrization for grid search"))
    })?;
    let pdim = axes.len();

    // shrink the grid until the number of point subsets is manageable
    let mut res = grid_resolution.max(2);
    let candidates = loop {
        let cands = grid_candidates(space, &axes, res)?;
        if binomial(cands.len(), n) <= BRUTE_FORCE_MAX_COMBOS || res <= 2 {
            break cands;
        }
        res -= 1;
    };
    let dim = space.ambient_dim();
    let tol2 = coincidence_tol2(space);
    let kernel = RieszKernel::new(s);
    let log_energy_of = |coords: &[f64]| -> f64 {
        let factors = weight_factors(w, coords, dim);
        let data = PairData {
            coords,
            dim,
            factors: &factors,
            multiplier: w.multiplier(),
            tol2,
        };
        match data.log_rows(kernel) {
            Ok((rows, _)) => log_sum_exp(&rows),
            Err(_) => f64::INFINITY,
        }
    };

    let mut best = (f64::INFINITY, Vec::new());
    let mut idx: Vec<usize> = (0..n).collect();
    let mut coords = vec![0.0; n * dim];
    loop {
        for (slot, &c) in idx.iter().enumerate() {
            coords[slot * dim..(slot + 1) * dim].copy_from_slice(candidates[c].1.coords());
        }
        let e = log_energy_of(&coords);
        if e < best.0 {
            best = (e, idx.clone());
        }
        if !next_combination(&mut idx, candidates.len()) {
            break;
        }
    }
    if !best.0.is_finite() {
        return Err(EnergyError::Usage(
            "grid search found no admissible configuration".into(),
        ));
    }

    // pattern search in parameter space
    let mut params: Vec<f64> = best
        .1
        .iter()
        .flat_map(|&c| candidates[c].0.clone())
        .collect();
    let to_coords = |params: &[f64]| -> Result<Vec<f64>, EnergyError> {
        let mut out = Vec::with_capacity(n * dim);
        for t in params.chunks(pdim) {
            out.extend_from_slice(space.from_parameters(t)?.coords());
        }
        Ok(out)
    };
    let mut current = best.0;
    let mut steps: Vec<f64> = axes.iter().map(|a| (a.hi - a.lo) / res as f64).collect();
    while steps
        .iter()
        .zip(&axes)
        .any(|(h, a)| *h > 1e-13 * (a.hi - a.lo))
    {
        let mut improved = false;
        for k in 0..params.len() {
            let axis = axes[k % pdim];
            let h = steps[k % pdim];
            for dir in [1.0, -1.0] {
                let old = params[k];
                let mut t = old + dir * h;
                if !axis.periodic {
                    t = t.clamp(axis.lo, axis.hi);
                }
                params[k] = t;
                let e = log_energy_of(&to_coords(&params)?);
                if e < current {
                    current = e;
                    improved = true;
                    break;
                }
                params[k] = old;
            }
        }
        if !improved {
            steps.iter_mut().for_each(|h| *h *= 0.5);
        }
    }
    let meta = ConfigMeta {
        s: Some(s),
        weight: w.record(),
        seed: None,
        generator: "brute-force".into(),
        ..ConfigMeta::default()
    };
    let config = Configuration::from_flat(*space, &to_coords(&params)?, meta)?;
    let energy = total_energy(&config, s, w, EnergyMode::Auto)?.energy();
    Ok((energy, config))
}

fn grid_candidates(
    space: &SpaceDescriptor,
    axes: &[crate::spaces::ParamAxis],
    res: usize,
) -> Result<Vec<(Vec<f64>, Point)>, EnergyError> {
    let ticks: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| {
            if a.periodic {
                (0..res)
                    .map(|k| a.lo + (a.hi - a.lo) * k as f64 / res as f64)
                    .collect()
            } else {
                (0..res)
                    .map(|k| a.lo + (a.hi - a.lo) * k as f64 / (res - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let total: usize = ticks.iter().map(Vec::len).product();
    let tol2 = coincidence_tol2(space).max(1e-24);
    let mut out: Vec<(Vec<f64>, Point)> = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let t: Vec<f64> = ticks
            .iter()
            .map(|tk| {
                let v = tk[rem % tk.len()];
                rem /= tk.len();
                v
            })
            .collect();
        let p = space.from_parameters(&t)?;
        if out
            .iter()
            .all(|(_, q)| dist2(q.coords(), p.coords()) > tol2)
        {
            out.push((t, p));
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
