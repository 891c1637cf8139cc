//! Pair weights for the energy: constants, and weights derived from a
//! target density `sigma` as `(sigma(x) sigma(y))^(-s / 2d)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::numeric::{gauss_legendre_on, CompensatedSum};
use crate::spaces::{Point, SpaceDescriptor, SpaceError, SpaceKind};

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("invalid density expression: {0}")]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("density must be positive and finite; found {0} at {1:?}")]
    NonPositiveDensity(f64, Vec<f64>),
    #[error("density bounds are unknown; supply them or call estimate_bounds")]
    MissingBounds,
    #[error("weight parameter {0} must be positive and finite, got {1}")]
    BadParameter(&'static str, f64),
    #[error("cannot parse weight '{0}'")]
    Parse(String),
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum DensitySource {
    Expr(Expr),
    Func(Arc<ScalarFn>),
}

/// A positive density on a space.
#[derive(Clone)]
pub struct DensityField {
    source: DensitySource,
    space: SpaceDescriptor,
    /// divisor applied to the raw values so that the mean over the space is 1
    scale: f64,
    bounds: Option<(f64, f64)>,
    gradient: Option<Arc<VectorFn>>,
    normalized: bool,
}

impl fmt::Debug for DensityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.source {
            DensitySource::Expr(e) => e.source().to_string(),
            DensitySource::Func(_) => "<closure>".to_string(),
        };
        f.debug_struct("DensityField")
            .field("source", &src)
            .field("space", &self.space)
            .field("scale", &self.scale)
            .field("bounds", &self.bounds)
            .field("normalized", &self.normalized)
            .finish()
    }
}

const BOUND_SAMPLES: usize = 20_000;
const NORMALIZE_SAMPLES: usize = 1_000_000;
const DENSITY_SEED: u64 = 0xD5;

impl DensityField {
    /// Density from an expression in `x1..xp`. Normalizes to unit mean and
    /// estimates bounds unless `normalized` is set, in which case only the
    /// bounds are estimated.
    pub fn from_expr(
        src: &str,
        space: &SpaceDescriptor,
        normalized: bool,
    ) -> Result<Self, WeightError> {
        let expr = Expr::parse_for_dim(src, space.ambient_dim())?;
        Self::build(DensitySource::Expr(expr), space, normalized)
    }

    /// Density from a closure over ambient coordinates.
    pub fn from_fn<F>(f: F, space: &SpaceDescriptor, normalized: bool) -> Result<Self, WeightError>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::build(DensitySource::Func(Arc::new(f)), space, normalized)
    }

    fn build(
        source: DensitySource,
        space: &SpaceDescriptor,
        normalized: bool,
    ) -> Result<Self, WeightError> {
        let mut field = Self {
            source,
            space: *space,
            scale: 1.0,
            bounds: None,
            gradient: None,
            normalized,
        };
        if !normalized {
            field.scale = field.raw_mean()?;
        }
        field.estimate_bounds()?;
        Ok(field)
    }

    /// Attach an analytic gradient of the *raw* (unnormalized) density.
    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    /// Override the estimated bounds.
    pub fn with_bounds(mut self, min: f64, max: f64) -> Self {
        self.bounds = Some((min, max));
        self
    }

    /// Drop the bounds (callers that need them will then fail).
    pub fn without_bounds(mut self) -> Self {
        self.bounds = None;
        self
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn expression(&self) -> Option<&str> {
        match &self.source {
            DensitySource::Expr(e) => Some(e.source()),
            DensitySource::Func(_) => None,
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Divisor applied to raw values to make the mean one.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }

    fn raw(&self, x: &[f64]) -> f64 {
        match &self.source {
            DensitySource::Expr(e) => e.eval(x),
            DensitySource::Func(f) => f(x),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.raw(x) / self.scale
    }

    /// Surface gradient of the normalized density: analytic when supplied,
    /// otherwise central differences through the manifold projection.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, SpaceError> {
        let ambient = match &self.gradient {
            Some(g) => g(x).into_iter().map(|v| v / self.scale).collect(),
            None => {
                let h = 1e-5 * self.space.diameter();
                let mut probe = x.to_vec();
                let mut out = vec![0.0; x.len()];
                for k in 0..x.len() {
                    probe[k] = x[k] + h;
                    let plus = self.evaluate(&self.space.manifold_projection(&probe)?);
                    probe[k] = x[k] - h;
                    let minus = self.evaluate(&self.space.manifold_projection(&probe)?);
                    probe[k] = x[k];
                    out[k] = (plus - minus) / (2.0 * h);
                }
                out
            }
        };
        Ok(project_onto_manifold_tangent(&self.space, x, &ambient))
    }

    /// Mean of the raw density with respect to the normalized reference measure.
    fn raw_mean(&self) -> Result<f64, WeightError> {
        let mean = match self.space.kind() {
            SpaceKind::Sphere { d: 2 } => {
                // Archimedes: height is uniform on [-1, 1], azimuth uniform
                let nphi = 128;
                let mut acc = CompensatedSum::new();
                for (z, wz) in gauss_legendre_on(64, -1.0, 1.0) {
                    let rr = (1.0 - z * z).sqrt();
                    for k in 0..nphi {
                        let phi = 2.0 * PI * k as f64 / nphi as f64;
                        acc.add(
                            wz / (2.0 * nphi as f64)
                                * self.raw(&[rr * phi.cos(), rr * phi.sin(), z]),
                        );
                    }
                }
                acc.value()
            }
            _ => {
                let pts = self.space.sample_measure(NORMALIZE_SAMPLES, DENSITY_SEED);
                let acc: CompensatedSum = pts.iter().map(|p| self.raw(p.coords())).collect();
                acc.value() / NORMALIZE_SAMPLES as f64
            }
        };
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(WeightError::NonPositiveDensity(mean, vec![]));
        }
        Ok(mean)
    }

    /// Estimates `(min, max)` of the normalized density: a sample sweep
    /// followed by local projected ascent/descent from the extreme samples.
    /// The result is widened by a relative `1e-9`.
    pub fn estimate_bounds(&mut self) -> Result<(f64, f64), WeightError> {
        let pts = self.space.sample_measure(BOUND_SAMPLES, DENSITY_SEED + 1);
        let mut vals: Vec<(f64, usize)> = Vec::with_capacity(pts.len());
        for (i, p) in pts.iter().enumerate() {
            let v = self.evaluate(p.coords());
            if !(v > 0.0 && v.is_finite()) {
                return Err(WeightError::NonPositiveDensity(v, p.coords().to_vec()));
            }
            vals.push((v, i));
        }
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut lo = vals[0].0;
        let mut hi = vals[vals.len() - 1].0;
        for &(_, i) in vals.iter().take(6) {
            lo = lo.min(self.local_extremum(pts[i].coords(), -1.0)?);
        }
        for &(_, i) in vals.iter().rev().take(6) {
            hi = hi.max(self.local_extremum(pts[i].coords(), 1.0)?);
        }
        if !(lo > 0.0) {
            return Err(WeightError::NonPositiveDensity(lo, vec![]));
        }
        let b = (lo * (1.0 - 1e-9), hi * (1.0 + 1e-9));
        self.bounds = Some(b);
        Ok(b)
    }

    /// Hill-climb on the space; `sign` +1 maximizes, -1 minimizes.
    fn local_extremum(&self, start: &[f64], sign: f64) -> Result<f64, WeightError> {
        let mut x = start.to_vec();
        let mut fx = sign * self.evaluate(&x);
        let mut step = 0.1 * self.space.diameter();
        for _ in 0..300 {
            let g = self.gradient(&x)?;
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn < 1e-14 {
                break;
            }
            let mut moved = false;
            while step > 1e-12 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(&g)
                    .map(|(a, b)| a + sign * step * b / gn)
                    .collect();
                let y = self.space.retract(&trial)?.into_coords();
                let fy = sign * self.evaluate(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let v = sign * fx;
        if !(v > 0.0 && v.is_finite()) {
            return Err(WeightError::NonPositiveDensity(v, x));
        }
        Ok(v)
    }
}

fn project_onto_manifold_tangent(space: &SpaceDescriptor, x: &[f64], g: &[f64]) -> Vec<f64> {
    match space.kind() {
        // the rim constraint does not apply to gradients of a smooth field
        SpaceKind::Cap { d, .. } => SpaceDescriptor::sphere(d).tangent_project(x, g),
        SpaceKind::Cube { .. } => g.to_vec(),
        _ => space.tangent_project(x, g),
    }
}

/// A pair weight.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    Constant(f64),
    /// `(sigma(x) sigma(y))^(-s / 2d)`.
    Density {
        field: DensityField,
        s: f64,
        d: f64,
    },
}

/// Serialized form of a weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightRecord {
    Constant {
        c: f64,
    },
    Density {
        expr: String,
        s: f64,
        d: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        normalized: bool,
    },
}

impl WeightRecord {
    pub fn build(&self, space: &SpaceDescriptor) -> Result<WeightSpec, WeightError> {
        match self {
            WeightRecord::Constant { c } => WeightSpec::constant(*c),
            WeightRecord::Density {
                expr,
                s,
                d,
                normalized,
            } => {
                let field = DensityField::from_expr(expr, space, *normalized)?;
                WeightSpec::density(field, *s, *d)
            }
        }
    }
}

impl std::str::FromStr for WeightRecord {
    type Err = WeightError;

    /// Flag form: `const:1` or `density:<expr>:s=4:d=2[:normalized]`; a JSON
    /// record is accepted too.
    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let src = src.trim();
        let bad = || WeightError::Parse(src.to_string());
        if src.starts_with('{') {
            return serde_json::from_str(src).map_err(|_| bad());
        }
        let mut parts = src.split(':');
        match parts.next() {
            Some("const" | "constant") => {
                let c = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(WeightRecord::Constant { c })
            }
            Some("density") => {
                let expr = parts.next().ok_or_else(bad)?.to_string();
                let (mut s, mut d, mut normalized) = (None, None, false);
                for kv in parts {
                    match kv.split_once('=') {
                        Some(("s", v)) => s = Some(v.parse().map_err(|_| bad())?),
                        Some(("d", v)) => d = Some(v.parse().map_err(|_| bad())?),
                        None if kv == "normalized" => normalized = true,
                        _ => return Err(bad()),
                    }
                }
                Ok(WeightRecord::Density {
                    expr,
                    s: s.ok_or_else(bad)?,
                    d: d.ok_or_else(bad)?,
                    normalized,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl WeightSpec {
    pub fn constant(c: f64) -> Result<Self, WeightError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(WeightError::BadParameter("c", c));
        }
        Ok(WeightSpec::Constant(c))
    }

    pub fn unit() -> Self {
        WeightSpec::Constant(1.0)
    }

    pub fn density(field: DensityField, s: f64, d: f64) -> Result<Self, WeightError> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(WeightError::BadParameter("s", s));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(WeightError::BadParameter("d", d));
        }
        Ok(WeightSpec::Density { field, s, d })
    }

    pub fn record(&self) -> Option<WeightRecord> {
        match self {
            WeightSpec::Constant(c) => Some(WeightRecord::Constant { c: *c }),
            WeightSpec::Density { field, s, d } => {
                field.expression().map(|e| WeightRecord::Density {
                    expr: e.to_string(),
                    s: *s,
                    d: *d,
                    normalized: field.is_normalized(),
                })
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, WeightSpec::Constant(_))
    }

    /// Overall constant multiplying `factor(x) * factor(y)`.
    pub(crate) fn multiplier(&self) -> f64 {
        match self {
            WeightSpec::Constant(c) => *c,
            WeightSpec::Density { .. } => 1.0,
        }
    }

    fn exponent(&self) -> f64 {
        match self {
            WeightSpec::Constant(_) => 0.0,
            WeightSpec::Density { s, d, .. } => s / (2.0 * d),
        }
    }

    /// Per-point factor `f(x)` with `w(x, y) = multiplier * f(x) * f(y)`.
    pub fn factor(&self, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Constant(_) => 1.0,
            WeightSpec::Density { field, .. } => field.evaluate(x).powf(-self.exponent()),
        }
    }

    /// Surface gradient of the per-point factor.
    pub fn factor_gradient(&self, x: &[f64]) -> Result<Vec<f64>, SpaceError> {
        match self {
            WeightSpec::Constant(_) => Ok(vec![0.0; x.len()]),
            WeightSpec::Density { field, .. } => {
                let a = self.exponent();
                let sigma = field.evaluate(x);
                let coef = -a * sigma.powf(-a - 1.0);
                Ok(field.gradient(x)?.into_iter().map(|g| coef * g).collect())
            }
        }
    }

    /// `w(x, y)`.
    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        match self {
            WeightSpec::Constant(c) => *c,
            WeightSpec::Density { .. } => self.factor(x.coords()) * self.factor(y.coords()),
        }
    }

    /// `(eta, kappa)` with `w >= eta` whenever the pair distance is at most `kappa`.
    pub fn floor(&self, space: &SpaceDescriptor) -> Result<(f64, f64), WeightError> {
        match self {
            WeightSpec::Constant(c) => Ok((*c, space.diameter())),
            WeightSpec::Density { field, s, d } => {
                let (_, max) = field.bounds().ok_or(WeightError::MissingBounds)?;
                Ok((max.powf(-s / d), space.diameter()))
            }
        }
    }

    /// `sup w`.
    pub fn sup_norm(&self) -> Result<f64, WeightError> {
        match self {
            WeightSpec::Constant(c) => Ok(*c),
            WeightSpec::Density { field, s, d } => {
                let (min, _) = field.bounds().ok_or(WeightError::MissingBounds)?;
                Ok(min.powf(-s / d))
            }
        }
    }
}
