//! Approximate minimizers of the weighted Riesz energy and the large-`s`
//! best-packing sweep.
//!
//! The objective is `ln E`, minimized by projected gradient descent with a
//! Barzilai-Borwein trial step, Armijo backtracking and retraction onto the
//! space after every step. Working with `ln E` keeps step sizes meaningful
//! across many orders of magnitude of `E` and lets the same code run in the
//! log domain for very large `s`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{
    check_exponent, coincidence_tol2, log_factor_gradients, plain_log_gradient, projected_gradient,
    weight_factors, ConfigMeta, Configuration, EnergyError, PairData, RieszKernel, WeightGradient,
};
use crate::numeric::{dist2, dot, log_sum_exp, norm};
use crate::quality::fibonacci_sphere;
use crate::spaces::{SpaceDescriptor, SpaceError, SpaceKind};
use crate::weights::WeightSpec;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("invalid optimizer setting: {0}")]
    Config(String),
    #[error("could not draw a finite-energy start after {0} attempts")]
    NoFiniteStart(usize),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    Random,
    /// Jittered low-discrepancy lattice where one exists, random otherwise.
    #[default]
    Stratified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    pub max_iters: usize,
    /// Threshold on `max_i |grad_i ln E| * delta * N / s` (scale free).
    pub grad_tolerance: f64,
    /// Fallback trial step, as a multiple of `delta * N / s`.
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    pub restarts: usize,
    pub seed: u64,
    pub strategy: InitStrategy,
    pub weight_gradient: WeightGradient,
    pub record_trace: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tolerance: 1e-6,
            initial_step: 0.1,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            restarts: 3,
            seed: 0,
            strategy: InitStrategy::default(),
            weight_gradient: WeightGradient::default(),
            record_trace: false,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        if self.max_iters < 1 {
            return Err(OptimError::Config("max_iters must be at least 1".into()));
        }
        if !(self.grad_tolerance > 0.0) {
            return Err(OptimError::Config("grad_tolerance must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(OptimError::Config("shrink must lie in (0, 1)".into()));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(OptimError::Config(
                "sufficient_decrease must lie in (0, 1)".into(),
            ));
        }
        if !(self.initial_step > 0.0) {
            return Err(OptimError::Config("initial_step must be positive".into()));
        }
        if self.restarts < 1 {
            return Err(OptimError::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradTolerance,
    /// No step satisfying sufficient decrease exists at working precision.
    LineSearchStall,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    /// `E`, or `inf` when it overflows a double (see `final_log_energy`).
    #[serde(default = "infinity", skip_serializing_if = "is_infinite")]
    pub final_energy: f64,
    pub final_log_energy: f64,
    pub iterations: usize,
    /// Relative tangent-gradient norm at the returned configuration.
    pub grad_norm: f64,
    pub restart_index_of_best: usize,
    pub stop_reason: StopReason,
    pub log_domain: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

fn infinity() -> f64 {
    f64::INFINITY
}

fn is_infinite(v: &f64) -> bool {
    v.is_infinite()
}

impl OptimResult {
    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIters
    }
}

fn restart_seed(seed: u64, r: usize) -> u64 {
    seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `n` distinct points on `space`.
pub fn initial_configuration(
    space: &SpaceDescriptor,
    n: usize,
    seed: u64,
    strategy: InitStrategy,
) -> Result<Configuration, OptimError> {
    if n < 2 {
        return Err(EnergyError::TooFewPoints(n).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.ambient_dim();
    let min2 = (1e-9 * space.diameter()).powi(2);
    let coords = match (strategy, space.kind()) {
        (InitStrategy::Stratified, SpaceKind::Sphere { d: 2 }) => {
            let lattice = fibonacci_sphere(n);
            let rot = random_rotation(&mut rng);
            let jitter = 0.05 * (4.0 * PI / n as f64).sqrt();
            let mut out = Vec::with_capacity(3 * n);
            for p in lattice.chunks(3) {
                let mut q = [0.0; 3];
                for (r, row) in rot.iter().enumerate() {
                    q[r] = dot(row, p) + jitter * rng.sample::<f64, _>(StandardNormal);
                }
                out.extend(space.retract(&q[..])?.into_coords());
            }
            out
        }
        (InitStrategy::Stratified, SpaceKind::Circle | SpaceKind::Sphere { d: 1 }) => {
            let offset = rng.random::<f64>() * 2.0 * PI;
            let step = 2.0 * PI / n as f64;
            (0..n)
                .flat_map(|k| {
                    let t = offset + step * (k as f64 + 0.1 * (rng.random::<f64>() - 0.5));
                    [t.cos(), t.sin()]
                })
                .collect()
        }
        (InitStrategy::Stratified, SpaceKind::Cube { d }) => {
            // Kronecker sequence with a random shift
            let alpha = kronecker_generators(d);
            let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            (0..n)
                .flat_map(|k| {
                    (0..d)
                        .map(|j| (shift[j] + (k as f64 + 0.5) * alpha[j]).fract())
                        .collect::<Vec<_>>()
                })
                .collect()
        }
        (InitStrategy::Stratified, SpaceKind::Cap { d: 2, c }) => {
            let offset = rng.random::<f64>() * 2.0 * PI;
            let mut out = Vec::with_capacity(3 * n);
            for k in 0..n {
                let z = 1.0 - (1.0 - c) * (k as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = offset + 2.399_963_229_728_653 * k as f64;
                out.extend([r * phi.cos(), r * phi.sin(), z]);
            }
            out
        }
        _ => Vec::new(),
    };
    let coords = if coords.is_empty() || !well_separated(&coords, dim, min2) {
        random_separated(space, n, &mut rng, min2)?
    } else {
        coords
    };
    let meta = ConfigMeta {
        s: None,
        weight: None,
        seed: Some(seed),
        generator: match strategy {
            InitStrategy::Random => "init-random".into(),
            InitStrategy::Stratified => "init-stratified".into(),
        },
        ..ConfigMeta::default()
    };
    Ok(Configuration::from_flat(*space, &coords, meta)?)
}

fn kronecker_generators(d: usize) -> Vec<f64> {
    // root of x^(d+1) = x + 1
    let mut g: f64 = 2.0;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|j| (1.0 / g.powi(j as i32)).fract()).collect()
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let mut q: [f64; 4] = [0.0; 4];
    for v in q.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let n = norm(&q);
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn well_separated(coords: &[f64], dim: usize, min2: f64) -> bool {
    let n = coords.len() / dim;
    (0..n).all(|i| {
        (i + 1..n).all(|j| {
            dist2(
                &coords[i * dim..(i + 1) * dim],
                &coords[j * dim..(j + 1) * dim],
            ) > min2
        })
    })
}

fn random_separated(
    space: &SpaceDescriptor,
    n: usize,
    rng: &mut ChaCha8Rng,
    min2: f64,
) -> Result<Vec<f64>, OptimError> {
    let dim = space.ambient_dim();
    let mut out: Vec<f64> = Vec::with_capacity(n * dim);
    let mut attempts = 0usize;
    while out.len() < n * dim {
        let p = space.sample_with(rng, 1).remove(0);
        if out.chunks(dim).all(|q| dist2(q, p.coords()) > min2) {
            out.extend_from_slice(p.coords());
        }
        attempts += 1;
        if attempts > 1000 * n + 1000 {
            return Err(OptimError::NoFiniteStart(attempts));
        }
    }
    Ok(out)
}

/// Energy state of one iterate.
struct Eval {
    log_energy: f64,
    log_domain: bool,
    delta: f64,
}

/// `ln E` and its gradient for flat coordinates on a fixed space.
struct Objective<'a> {
    space: &'a SpaceDescriptor,
    dim: usize,
    s: f64,
    w: &'a WeightSpec,
    kernel: RieszKernel,
    tol2: f64,
    weight_gradient: WeightGradient,
}

const LOG_DOMAIN_S: f64 = 64.0;

impl<'a> Objective<'a> {
    fn new(
        space: &'a SpaceDescriptor,
        s: f64,
        w: &'a WeightSpec,
        weight_gradient: WeightGradient,
    ) -> Self {
        Self {
            space,
            dim: space.ambient_dim(),
            s,
            w,
            kernel: RieszKernel::new(s),
            tol2: coincidence_tol2(space),
            weight_gradient,
        }
    }

    fn data<'b>(&self, coords: &'b [f64], factors: &'b [f64]) -> PairData<'b> {
        PairData {
            coords,
            dim: self.dim,
            factors,
            multiplier: self.w.multiplier(),
            tol2: self.tol2,
        }
    }

    fn eval(&self, coords: &[f64]) -> Result<Eval, EnergyError> {
        self.eval_inner(coords, false).map(|(ev, _)| ev)
    }

    /// `ln E` and its projected gradient, per point, in one pass where the
    /// plain sum suffices.
    fn eval_with_gradient(&self, coords: &[f64]) -> Result<(Eval, Vec<f64>), EnergyError> {
        self.eval_inner(coords, true)
            .map(|(ev, g)| (ev, g.expect("gradient requested")))
    }

    fn eval_inner(
        &self,
        coords: &[f64],
        with_grad: bool,
    ) -> Result<(Eval, Option<Vec<f64>>), EnergyError> {
        let factors = weight_factors(self.w, coords, self.dim);
        let data = self.data(coords, &factors);
        let log_grads = |factors: &[f64]| match self.weight_gradient {
            WeightGradient::Full if with_grad => {
                log_factor_gradients(self.w, coords, self.dim, factors)
            }
            _ => Ok(None),
        };
        if self.s < LOG_DOMAIN_S {
            let pass = data.plain_pass(self.kernel, with_grad)?;
            let e = crate::numeric::compensated_sum(&pass.rows);
            if e.is_finite() && e > 0.0 && e < 1e300 {
                let ev = Eval {
                    log_energy: e.ln(),
                    log_domain: false,
                    delta: pass.min_distance,
                };
                let grad = match with_grad {
                    true => {
                        let lg = log_grads(&factors)?;
                        Some(self.project(
                            coords,
                            &plain_log_gradient(&pass, e, self.s, self.dim, lg.as_deref()),
                        ))
                    }
                    false => None,
                };
                return Ok((ev, grad));
            }
        }
        let (rows, delta) = data.log_rows(self.kernel)?;
        let ev = Eval {
            log_energy: log_sum_exp(&rows),
            log_domain: true,
            delta,
        };
        let grad = match with_grad {
            true => {
                let lg = log_grads(&factors)?;
                Some(self.project(
                    coords,
                    &data.log_gradient(self.kernel, ev.log_energy, lg.as_deref(), true),
                ))
            }
            false => None,
        };
        Ok((ev, grad))
    }

    fn project(&self, coords: &[f64], raw: &[f64]) -> Vec<f64> {
        coords
            .chunks(self.dim)
            .zip(raw.chunks(self.dim))
            .flat_map(|(x, g)| projected_gradient(self.space, x, g))
            .collect()
    }

    fn retract(&self, coords: &[f64]) -> Result<Vec<f64>, SpaceError> {
        let mut out = Vec::with_capacity(coords.len());
        for x in coords.chunks(self.dim) {
            out.extend(self.space.retract(x)?.into_coords());
        }
        Ok(out)
    }

    /// `max_i |g_i| * delta * N / s`.
    fn relative_grad(&self, g: &[f64], delta: f64) -> f64 {
        let n = g.len() / self.dim;
        let gmax = g.chunks(self.dim).map(norm).fold(0.0, f64::max);
        gmax * delta * n as f64 / self.s
    }
}

const MAX_BACKTRACKS: usize = 60;
const MAX_MOVE_FRACTION: f64 = 0.3;

/// Final coordinates, evaluation, iterations, relative gradient, stop reason and trace.
type Descent = (Vec<f64>, Eval, usize, f64, StopReason, Option<Vec<f64>>);

/// One descent run from `coords`.
fn descend(
    obj: &Objective,
    mut coords: Vec<f64>,
    cfg: &OptimConfig,
) -> Result<Descent, OptimError> {
    let n = coords.len() / obj.dim;
    let (mut cur, mut g) = obj.eval_with_gradient(&coords)?;
    let mut trace = cfg.record_trace.then(|| vec![cur.log_energy]);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut step_hint = cfg.initial_step * cur.delta * n as f64 / obj.s;
    for iter in 0..cfg.max_iters {
        let rel = obj.relative_grad(&g, cur.delta);
        if rel <= cfg.grad_tolerance {
            return Ok((coords, cur, iter, rel, StopReason::GradTolerance, trace));
        }
        let g2 = dot(&g, &g);
        let mut t = match &prev {
            Some((dx, dg)) => {
                let sy = dot(dx, dg);
                if sy > 0.0 {
                    dot(dx, dx) / sy
                } else {
                    2.0 * step_hint
                }
            }
            None => step_hint,
        };
        let gmax = g.chunks(obj.dim).map(norm).fold(0.0, f64::max);
        t = t.min(MAX_MOVE_FRACTION * cur.delta / gmax);
        log::trace!(
            "iter {iter}: ln E = {:.15}, relative gradient {rel:.3e}, step {t:.3e}",
            cur.log_energy
        );

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = coords.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            let trial = obj.retract(&trial)?;
            if let Ok((ev, gn)) = obj.eval_with_gradient(&trial) {
                if ev.log_energy <= cur.log_energy - cfg.sufficient_decrease * t * g2
                    && ev.log_energy < cur.log_energy
                {
                    accepted = Some((trial, ev, gn));
                    break;
                }
            }
            t *= cfg.shrink;
        }
        let Some((next, ev, gn)) = accepted else {
            return Ok((coords, cur, iter, rel, StopReason::LineSearchStall, trace));
        };
        debug_assert!(ev.log_energy < cur.log_energy);
        let dx: Vec<f64> = next.iter().zip(&coords).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        prev = Some((dx, dg));
        step_hint = t;
        coords = next;
        cur = ev;
        g = gn;
        if let Some(tr) = trace.as_mut() {
            tr.push(cur.log_energy);
        }
    }
    let rel = obj.relative_grad(&g, cur.delta);
    let reason = if rel <= cfg.grad_tolerance {
        StopReason::GradTolerance
    } else {
        StopReason::MaxIters
    };
    Ok((coords, cur, cfg.max_iters, rel, reason, trace))
}

fn warn_small_s(space: &SpaceDescriptor, s: f64) {
    let alpha = space.intrinsic_dim();
    if s <= alpha {
        log::warn!(
            "s = {s} does not exceed the dimension {alpha} of {space}; minimizers need not be quasi-uniform"
        );
    }
}

const MAX_START_ATTEMPTS: usize = 10;

/// Best of `cfg.restarts` descents from independent starts.
pub fn minimize_energy(
    space: &SpaceDescriptor,
    n: usize,
    s: f64,
    w: &WeightSpec,
    cfg: &OptimConfig,
) -> Result<(Configuration, OptimResult), OptimError> {
    cfg.validate()?;
    check_exponent(s)?;
    warn_small_s(space, s);
    let obj = Objective::new(space, s, w, cfg.weight_gradient);
    let runs: Vec<Result<_, OptimError>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let base = restart_seed(cfg.seed, r);
            let mut start = None;
            for attempt in 0..MAX_START_ATTEMPTS {
                let seed = restart_seed(base, attempt);
                let init = initial_configuration(space, n, seed, cfg.strategy)?;
                let coords = init.flat_coords();
                if obj.eval(&coords).is_ok_and(|e| e.log_energy.is_finite()) {
                    start = Some(coords);
                    break;
                }
            }
            let coords = start.ok_or(OptimError::NoFiniteStart(MAX_START_ATTEMPTS))?;
            descend(&obj, coords, cfg)
        })
        .collect();
    let mut best: Option<(usize, _)> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let run = run?;
        if best
            .as_ref()
            .is_none_or(|(_, b): &(usize, Descent)| run.1.log_energy < b.1.log_energy)
        {
            best = Some((r, run));
        }
    }
    let (r, run) = best.expect("at least one restart");
    finish(space, s, w, cfg, r, run)
}

/// A single descent warm-started from `start`.
pub fn minimize_from(
    start: &Configuration,
    s: f64,
    w: &WeightSpec,
    cfg: &OptimConfig,
) -> Result<(Configuration, OptimResult), OptimError> {
    cfg.validate()?;
    check_exponent(s)?;
    let space = start.space();
    warn_small_s(space, s);
    let obj = Objective::new(space, s, w, cfg.weight_gradient);
    let run = descend(&obj, start.flat_coords(), cfg)?;
    finish(space, s, w, cfg, 0, run)
}

fn finish(
    space: &SpaceDescriptor,
    s: f64,
    w: &WeightSpec,
    cfg: &OptimConfig,
    restart: usize,
    (coords, ev, iterations, grad_norm, stop_reason, trace): Descent,
) -> Result<(Configuration, OptimResult), OptimError> {
    let meta = ConfigMeta {
        s: Some(s),
        weight: w.record(),
        seed: Some(cfg.seed),
        generator: "minimize-energy".into(),
        sigma_bounds: match w {
            WeightSpec::Density { field, .. } => field.bounds(),
            WeightSpec::Constant(_) => None,
        },
    };
    let config = Configuration::from_flat(*space, &coords, meta)?;
    if stop_reason == StopReason::MaxIters {
        log::warn!(
            "optimizer hit max_iters = {} (relative gradient {grad_norm:.3e})",
            cfg.max_iters
        );
    }
    Ok((
        config,
        OptimResult {
            final_energy: ev.log_energy.exp(),
            final_log_energy: ev.log_energy,
            iterations,
            grad_norm,
            restart_index_of_best: restart,
            stop_reason,
            log_domain: ev.log_domain,
            trace,
        },
    ))
}

/// Per-`s` record of a best-packing sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub s: f64,
    pub delta: f64,
    pub log_energy: f64,
    pub log_domain: bool,
    pub stop_reason: StopReason,
    /// `(N(N-1))^(-1/s) * delta(nu_N) <= delta <= best known`.
    pub bracket_ok: bool,
    /// `delta` dropped by more than 20% from the previous step.
    pub drift: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub steps: Vec<SweepStep>,
    pub configs: Vec<Configuration>,
}

impl SweepResult {
    pub fn schedule(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.s).collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.delta).collect()
    }

    /// The terminal configuration, taken as the best-packing approximation.
    pub fn final_config(&self) -> &Configuration {
        self.configs.last().expect("non-empty sweep")
    }

    pub fn any_drift(&self) -> bool {
        self.steps.iter().any(|s| s.drift)
    }
}

/// `4 alpha, 8 alpha, ..., 128 alpha`.
pub fn default_schedule(alpha: f64) -> Vec<f64> {
    (0..6).map(|k| 4.0 * alpha * f64::from(1u32 << k)).collect()
}

const DRIFT_DROP: f64 = 0.2;

/// Minimizes at each `s` of an increasing schedule, warm-starting from the
/// previous solution.
pub fn s_sweep_best_packing(
    space: &SpaceDescriptor,
    n: usize,
    schedule: &[f64],
    w: &WeightSpec,
    cfg: &OptimConfig,
    best_known: Option<f64>,
) -> Result<SweepResult, OptimError> {
    if schedule.is_empty() {
        return Err(OptimError::Config("empty s schedule".into()));
    }
    if schedule.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(OptimError::Config(
            "s schedule must be strictly increasing".into(),
        ));
    }
    let mut configs: Vec<Configuration> = Vec::with_capacity(schedule.len());
    let mut raw = Vec::with_capacity(schedule.len());
    for (k, &s) in schedule.iter().enumerate() {
        let (cfg_s, res) = match configs.last() {
            None => minimize_energy(space, n, s, w, cfg)?,
            Some(prev) => minimize_from(prev, s, w, cfg)?,
        };
        let delta =
            crate::quality::separation(cfg_s.points(), crate::quality::SeparationMethod::Brute)
                .map_err(|e| OptimError::Config(e.to_string()))?
                .0;
        log::info!(
            "sweep step {k}: s = {s}, delta = {delta:.8}, {:?}",
            res.stop_reason
        );
        raw.push((s, delta, res));
        configs.push(cfg_s);
    }
    let nu_delta = raw.last().map(|r| r.1).unwrap_or(0.0);
    let best = best_known.unwrap_or_else(|| raw.iter().map(|r| r.1).fold(0.0, f64::max));
    let nf = n as f64;
    let slack = 1e-9;
    let steps = raw
        .iter()
        .enumerate()
        .map(|(k, (s, delta, res))| {
            let lower = (nf * (nf - 1.0)).powf(-1.0 / s) * nu_delta;
            SweepStep {
                s: *s,
                delta: *delta,
                log_energy: res.final_log_energy,
                log_domain: res.log_domain,
                stop_reason: res.stop_reason,
                bracket_ok: lower <= delta * (1.0 + slack) && *delta <= best * (1.0 + slack),
                drift: k > 0 && *delta < (1.0 - DRIFT_DROP) * raw[k - 1].1,
            }
        })
        .collect();
    Ok(SweepResult { steps, configs })
}
