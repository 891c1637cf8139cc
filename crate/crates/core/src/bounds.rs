//! Explicit constants of the separation, covering and mesh-ratio estimates
//! for energy minimizers, and evaluators that check measured configurations
//! against them.
//!
//! Every calculator checks its own hypotheses and returns
//! [`BoundError::Hypothesis`] instead of a meaningless number.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::spaces::gamma_d;
use crate::spaces::{RegularityProfile, SpaceDescriptor, SpaceError};
use crate::weights::{WeightError, WeightSpec};

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("the closed form needs d >= 2; use the numeric regularity profile for d = {0}")]
    NeedsProfile(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Result<(), BoundError> {
    if ok {
        Ok(())
    } else {
        Err(BoundError::Hypothesis(what()))
    }
}

fn require_s_above_alpha(s: f64, alpha: f64) -> Result<(), BoundError> {
    require(s.is_finite() && alpha > 0.0 && s > alpha, || {
        format!("need s > alpha, got s = {s}, alpha = {alpha}")
    })
}

fn require_positive(name: &str, v: f64) -> Result<(), BoundError> {
    require(v > 0.0 && v.is_finite(), || {
        format!("{name} must be positive and finite, got {v}")
    })
}

/// Upper regularity constant `gamma_d / d` of the unit sphere `S^d`, `d >= 2`.
pub fn sphere_c0(d: usize) -> Result<f64, BoundError> {
    if d < 2 {
        return Err(BoundError::NeedsProfile(d));
    }
    Ok(gamma_d(d) / d as f64)
}

/// Separation constant for bounded weights:
/// `C2 = [mu(A) (1 - alpha/s) / C0]^(1/alpha) (alpha/s)^(1/s)`.
pub fn sep_constant_c2(s: f64, alpha: f64, mu_a: f64, c0_upper: f64) -> Result<f64, BoundError> {
    require_s_above_alpha(s, alpha)?;
    require_positive("mu(A)", mu_a)?;
    require_positive("C0", c0_upper)?;
    Ok((mu_a * (1.0 - alpha / s) / c0_upper).powf(1.0 / alpha) * (alpha / s).powf(1.0 / s))
}

/// `C2` on the unit sphere `S^d` with the normalized surface measure.
pub fn sphere_c2(d: usize, s: f64) -> Result<f64, BoundError> {
    sep_constant_c2(s, d as f64, 1.0, sphere_c0(d)?)
}

/// Separation constants for `L_p`-integrable weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderConstants {
    pub theta0: f64,
    pub c1: f64,
    pub big_c1: f64,
}

/// `theta0`, `c1` and `C1 = min{kappa, (eta / c1)^(1/s)}`. `p` may be infinite.
#[allow(clippy::too_many_arguments)]
pub fn holder_constants(
    s: f64,
    alpha: f64,
    p: f64,
    w_p_norm: f64,
    mu_a: f64,
    c0_upper: f64,
    eta: f64,
    kappa: f64,
) -> Result<HolderConstants, BoundError> {
    require(p > 1.0, || format!("need 1 < p <= inf, got p = {p}"))?;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let inv_q = 1.0 - inv_p;
    require(s.is_finite() && alpha > 0.0 && s > alpha * inv_q, || {
        format!("need s > alpha (1 - 1/p), got s = {s}, alpha = {alpha}, p = {p}")
    })?;
    require_positive("||w||_{p,inf}", w_p_norm)?;
    require_positive("mu(A)", mu_a)?;
    require_positive("C0", c0_upper)?;
    require_positive("eta", eta)?;
    require(kappa > 0.0, || {
        format!("kappa must be positive, got {kappa}")
    })?;
    let sa = s / alpha;
    let plus = sa + inv_p;
    let minus = sa - inv_q;
    let theta0 = minus / plus;
    let c1 = w_p_norm
        * (c0_upper / mu_a * plus / minus).powf(sa)
        * (plus / mu_a).powf(inv_p)
        * sa.powf(inv_q);
    Ok(HolderConstants {
        theta0,
        c1,
        big_c1: kappa.min((eta / c1).powf(1.0 / s)),
    })
}

/// Energy lower-bound constant and the threshold count from which it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConstant {
    pub c5: f64,
    pub n0: u64,
    /// Upper bound on the count whose best-packing distance is at most `r2`.
    pub m: u64,
}

/// `C5 = Lambda^(-1-s/alpha) eta 2^(-s) (c0(r2) mu(A))^(-s/alpha)` and
/// `N0 = ceil(M Lambda / (Lambda - 1))`.
#[allow(clippy::too_many_arguments)]
pub fn energy_constant_c5(
    s: f64,
    alpha: f64,
    eta: f64,
    lambda: f64,
    c0_lower_r2: f64,
    mu_a: f64,
    r2: f64,
    diam: f64,
) -> Result<EnergyConstant, BoundError> {
    require_s_above_alpha(s, alpha)?;
    require(lambda > 1.0, || format!("need Lambda > 1, got {lambda}"))?;
    require_positive("eta", eta)?;
    require_positive("c0(r2)", c0_lower_r2)?;
    require_positive("mu(A)", mu_a)?;
    require_positive("r2", r2)?;
    let sa = s / alpha;
    let c5 = lambda.powf(-1.0 - sa) * eta * 2f64.powf(-s) * (c0_lower_r2 * mu_a).powf(-sa);
    // disjoint balls of radius r2/2 around an optimal packing bound its size
    let m = if r2 >= diam {
        2
    } else {
        (c0_lower_r2 * mu_a * (2.0 / r2).powf(alpha))
            .ceil()
            .max(2.0) as u64
    };
    let n0 = (m as f64 * lambda / (lambda - 1.0) - 1e-12).ceil() as u64;
    Ok(EnergyConstant { c5, n0, m })
}

/// `eps0 = 1 / (2 (2 s/alpha - 1))`.
pub fn epsilon0(s: f64, alpha: f64) -> Result<f64, BoundError> {
    require_s_above_alpha(s, alpha)?;
    Ok(1.0 / (2.0 * (2.0 * s / alpha - 1.0)))
}

/// `beta(eps) = ||w|| (1+2eps)^s / ((1-alpha/s) (1-2eps)^(s-alpha) (eps C2)^alpha)`.
pub fn beta(eps: f64, s: f64, alpha: f64, w_sup: f64, c2: f64) -> Result<f64, BoundError> {
    require_s_above_alpha(s, alpha)?;
    require(eps > 0.0 && eps < 0.5, || {
        format!("need 0 < eps < 1/2, got {eps}")
    })?;
    Ok(w_sup * (1.0 + 2.0 * eps).powf(s)
        / ((1.0 - alpha / s) * (1.0 - 2.0 * eps).powf(s - alpha) * (eps * c2).powf(alpha)))
}

/// Minimum of [`beta`]: `||w|| (1-alpha/s)^-(s-alpha+1) (4s / (alpha C2))^alpha`.
pub fn beta0(s: f64, alpha: f64, w_sup: f64, c2: f64) -> Result<f64, BoundError> {
    require_s_above_alpha(s, alpha)?;
    require_positive("||w||_inf", w_sup)?;
    require_positive("C2", c2)?;
    Ok(w_sup * (1.0 - alpha / s).powf(-(s - alpha + 1.0)) * (4.0 * s / (alpha * c2)).powf(alpha))
}

/// `C0(R) (1 - tau^(alpha-s)) + C0 tau^(alpha-s)`; equals `C0` at `tau = 1`.
pub fn c_tilde_0(
    tau: f64,
    s: f64,
    alpha: f64,
    c0_upper_at_r: f64,
    c0_upper: f64,
) -> Result<f64, BoundError> {
    require_s_above_alpha(s, alpha)?;
    require(tau >= 1.0, || format!("need tau >= 1, got {tau}"))?;
    let t = tau.powf(alpha - s);
    Ok(c0_upper_at_r * (1.0 - t) + c0_upper * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshConstants {
    pub epsilon0: f64,
    pub beta0: f64,
    pub c_tilde0: f64,
    pub c3: f64,
}

/// Covering constant
/// `C3 = max{diam N0^(1/alpha), [c0(r0) beta0 C~0 / C5]^(1/(s-alpha)), C2/2}`.
#[allow(clippy::too_many_arguments)]
pub fn mesh_constant_c3(
    s: f64,
    alpha: f64,
    w_sup: f64,
    c2: f64,
    c5: f64,
    n0: u64,
    c0_lower_r0: f64,
    c_tilde0: f64,
    diam: f64,
) -> Result<MeshConstants, BoundError> {
    require_positive("C5", c5)?;
    require_positive("c0(r0)", c0_lower_r0)?;
    require_positive("C~0", c_tilde0)?;
    let eps0 = epsilon0(s, alpha)?;
    let b0 = beta0(s, alpha, w_sup, c2)?;
    let middle = (c0_lower_r0 * b0 * c_tilde0 / c5).powf(1.0 / (s - alpha));
    let c3 = (diam * (n0 as f64).powf(1.0 / alpha))
        .max(middle)
        .max(0.5 * c2);
    Ok(MeshConstants {
        epsilon0: eps0,
        beta0: b0,
        c_tilde0,
        c3,
    })
}

/// `(cA, c~A)` with `delta_N <= cA N^(-1/alpha)` and `rho_N >= c~A N^(-1/alpha)`.
pub fn order_bounds(
    alpha: f64,
    mu_a: f64,
    c0_upper: f64,
    c0_lower: f64,
) -> Result<(f64, f64), BoundError> {
    require_positive("alpha", alpha)?;
    require_positive("mu(A)", mu_a)?;
    require_positive("C0", c0_upper)?;
    require_positive("c0", c0_lower)?;
    Ok((
        2.0 * (c0_lower * mu_a).powf(1.0 / alpha),
        (mu_a / c0_upper).powf(1.0 / alpha),
    ))
}

/// Asymptotic mesh-ratio bound `2 (mu(A)/mu(K))^(1/alpha) [c0(0) C0(0)]^(1/alpha)`.
pub fn mesh_ratio_limsup(
    alpha: f64,
    mu_a: f64,
    mu_k: f64,
    c0_upper_zero: f64,
    c0_lower_zero: f64,
) -> Result<f64, BoundError> {
    require_positive("alpha", alpha)?;
    require_positive("mu(A)", mu_a)?;
    require_positive("mu(K)", mu_k)?;
    require_positive("C0(0)", c0_upper_zero)?;
    require_positive("c0(0)", c0_lower_zero)?;
    Ok(2.0 * (mu_a / mu_k).powf(1.0 / alpha) * (c0_lower_zero * c0_upper_zero).powf(1.0 / alpha))
}

/// Finite-`N` mesh-ratio bound
/// `max{1/2, 2 (mu(A)/mu(K))^(1/alpha) [c0(r1) C0(r1)]^(1/alpha)}`.
pub fn mesh_ratio_finite(
    alpha: f64,
    mu_a: f64,
    mu_k: f64,
    c0_upper_r1: f64,
    c0_lower_r1: f64,
) -> Result<f64, BoundError> {
    Ok(mesh_ratio_limsup(alpha, mu_a, mu_k, c0_upper_r1, c0_lower_r1)?.max(0.5))
}

/// Inputs shared by all calculators. `mu_a`, `upper_c0`, `lower_c0` and the
/// zero-radius limits describe the ambient set `A`; `mu_k` and `upper_c0_k`
/// describe the set `K` the points live on (`K = A` unless a subset is used).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub s: f64,
    pub alpha: f64,
    pub p: f64,
    pub mu_a: f64,
    pub mu_k: f64,
    pub upper_c0: f64,
    pub lower_c0: f64,
    pub upper_c0_zero: f64,
    pub lower_c0_zero: f64,
    pub upper_c0_k: f64,
    pub eta: f64,
    pub kappa: f64,
    pub w_sup: f64,
    pub w_p_norm: f64,
    /// Whether `w` is constant; then the bounded-weight separation constant applies.
    pub constant_weight: bool,
    pub lambda: f64,
    pub tau: f64,
    pub diam: f64,
    /// Defaults to `kappa`, capped at `diam`.
    pub r2: Option<f64>,
    /// Local constants of `A`; globals are used where absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<RegularityProfile>,
    /// Overrides the computed uniform-in-`s` covering constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_star: Option<f64>,
}

impl BoundInputs {
    /// Regularity constants of `space` (and of its parent when it is a
    /// subset) with weight norms taken from `w`.
    pub fn for_space(space: &SpaceDescriptor, s: f64, w: &WeightSpec) -> Result<Self, BoundError> {
        let ambient = space.parent().unwrap_or(*space);
        let diam = ambient.diameter();
        let profile = ambient.regularity_profile(&[diam])?;
        let upper_c0_k = if ambient == *space {
            profile.upper_global
        } else {
            space.regularity_profile(&[space.diameter()])?.upper_global
        };
        let (eta, kappa) = w.floor(space)?;
        let w_sup = w.sup_norm()?;
        Ok(Self {
            s,
            alpha: space.intrinsic_dim(),
            p: f64::INFINITY,
            mu_a: ambient.measure_total(),
            mu_k: space.measure_total(),
            upper_c0: profile.upper_global,
            lower_c0: profile.lower_global,
            upper_c0_zero: profile.upper_zero,
            lower_c0_zero: profile.lower_zero,
            upper_c0_k,
            eta,
            kappa,
            w_sup,
            w_p_norm: w_sup,
            constant_weight: w.is_constant(),
            lambda: 2.0,
            tau: 1.0,
            diam,
            r2: None,
            profile: Some(profile),
            c_star: None,
        })
    }

    fn upper_at(&self, r: f64) -> f64 {
        match &self.profile {
            Some(p) if r < self.diam => p.upper_at(r).min(self.upper_c0),
            _ => self.upper_c0,
        }
    }

    fn lower_at(&self, r: f64) -> f64 {
        match &self.profile {
            Some(p) if r < self.diam => p.lower_at(r).min(self.lower_c0),
            _ => self.lower_c0,
        }
    }

    fn r2(&self) -> f64 {
        self.r2.unwrap_or(self.kappa).min(self.diam)
    }

    /// Bounded-weight separation constant on `K`.
    fn c2(&self, s: f64) -> Result<f64, BoundError> {
        sep_constant_c2(s, self.alpha, self.mu_k, self.upper_c0_k)
    }

    fn mesh_at(
        &self,
        s: f64,
        eta: f64,
        w_sup: f64,
    ) -> Result<(f64, EnergyConstant, MeshConstants), BoundError> {
        let c2 = self.c2(s)?;
        let r2 = self.r2();
        let energy = energy_constant_c5(
            s,
            self.alpha,
            eta,
            self.lambda,
            self.lower_at(r2),
            self.mu_a,
            r2,
            self.diam,
        )?;
        // C0(R) <= C0, so the global constant is a valid choice for any tau
        let ct = c_tilde_0(self.tau, s, self.alpha, self.upper_c0, self.upper_c0)?;
        let mesh = mesh_constant_c3(
            s,
            self.alpha,
            w_sup,
            c2,
            energy.c5,
            energy.n0,
            self.lower_c0,
            ct,
            self.diam,
        )?;
        Ok((c2, energy, mesh))
    }

    /// Covering constant valid for every `s >= 2 alpha` with `w = 1`,
    /// computed as the maximum of `C3` over a geometric grid in `s`.
    pub fn c_star(&self) -> Result<f64, BoundError> {
        if let Some(c) = self.c_star {
            return Ok(c);
        }
        let unit_weight = Self {
            kappa: f64::INFINITY,
            r2: Some(self.diam),
            ..self.clone()
        };
        let mut best: f64 = 0.0;
        for k in 0..=24 {
            let s = 2.0 * self.alpha * 2f64.powf(k as f64 / 4.0);
            best = best.max(unit_weight.mesh_at(s, 1.0, 1.0)?.2.c3);
        }
        Ok(best)
    }

    /// `C** = max{C*, cA, (mu(K)/C0(0))^(1/alpha)}`.
    pub fn c_double_star(&self) -> Result<f64, BoundError> {
        let (ca, _) = order_bounds(self.alpha, self.mu_a, self.upper_c0, self.lower_c0)?;
        Ok(self
            .c_star()?
            .max(ca)
            .max((self.mu_k / self.upper_c0_zero).powf(1.0 / self.alpha)))
    }

    /// Finite-`N` mesh-ratio bound with local constants at `r1(N) = C** N^(-1/alpha)`.
    pub fn mesh_ratio_bound(&self, n: usize) -> Result<f64, BoundError> {
        let r1 = self.c_double_star()? * (n as f64).powf(-1.0 / self.alpha);
        mesh_ratio_finite(
            self.alpha,
            self.mu_a,
            self.mu_k,
            self.upper_at(r1),
            self.lower_at(r1),
        )
    }

    /// All named constants.
    pub fn constants(&self) -> Result<BoundConstants, BoundError> {
        let s = self.s;
        let holder = holder_constants(
            s,
            self.alpha,
            self.p,
            self.w_p_norm,
            self.mu_k,
            self.upper_c0_k,
            self.eta,
            self.kappa,
        )?;
        let (c2, energy, mesh) = self.mesh_at(s, self.eta, self.w_sup)?;
        let (ca, cta) = order_bounds(self.alpha, self.mu_a, self.upper_c0, self.lower_c0)?;
        let sphere_c0 = match self.alpha {
            a if a >= 2.0 && a.fract() == 0.0 => Some(sphere_c0(a as usize)?),
            _ => None,
        };
        Ok(BoundConstants {
            gamma_d: (self.alpha.fract() == 0.0).then(|| gamma_d(self.alpha as usize)),
            sphere_c0,
            big_c1: holder.big_c1,
            c1: holder.c1,
            c2,
            c3: mesh.c3,
            c5: energy.c5,
            n0: energy.n0,
            theta0: holder.theta0,
            epsilon0: mesh.epsilon0,
            beta0: mesh.beta0,
            c_tilde0: mesh.c_tilde0,
            packing_coef: ca,
            covering_coef: cta,
            mesh_ratio_limsup: mesh_ratio_limsup(
                self.alpha,
                self.mu_a,
                self.mu_k,
                self.upper_c0_zero,
                self.lower_c0_zero,
            )?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_c0: Option<f64>,
    pub big_c1: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c5: f64,
    pub n0: u64,
    pub theta0: f64,
    pub epsilon0: f64,
    pub beta0: f64,
    pub c_tilde0: f64,
    pub packing_coef: f64,
    pub covering_coef: f64,
    pub mesh_ratio_limsup: f64,
}

impl BoundConstants {
    /// `(name, value, formula)` rows for display.
    pub fn table(&self) -> Vec<(&'static str, f64, &'static str)> {
        let mut rows = Vec::new();
        if let Some(g) = self.gamma_d {
            rows.push(("gamma_d", g, "G((d+1)/2) / (G(d/2) G(1/2))"));
        }
        if let Some(c) = self.sphere_c0 {
            rows.push(("C0_sphere", c, "gamma_d / d"));
        }
        rows.extend([
            ("theta0", self.theta0, "(s/a - 1/q) / (s/a + 1/p)"),
            (
                "c1",
                self.c1,
                "||w||_p (C0/mu (s/a+1/p)/(s/a-1/q))^(s/a) ((s/a+1/p)/mu)^(1/p) (s/a)^(1/q)",
            ),
            ("C1", self.big_c1, "min{kappa, (eta/c1)^(1/s)}"),
            ("C2", self.c2, "[mu (1-a/s) / C0]^(1/a) (a/s)^(1/s)"),
            ("C5", self.c5, "L^(-1-s/a) eta 2^-s (c0 mu)^(-s/a)"),
            ("N0", self.n0 as f64, "ceil(M L / (L-1))"),
            ("eps0", self.epsilon0, "1 / (2 (2s/a - 1))"),
            ("beta0", self.beta0, "||w|| (1-a/s)^-(s-a+1) (4s/(a C2))^a"),
            ("C0~", self.c_tilde0, "C0(R)(1 - t^(a-s)) + C0 t^(a-s)"),
            (
                "C3",
                self.c3,
                "max{diam N0^(1/a), [c0 beta0 C0~ / C5]^(1/(s-a)), C2/2}",
            ),
            ("cA", self.packing_coef, "2 (c0 mu)^(1/a)"),
            ("c~A", self.covering_coef, "(mu / C0)^(1/a)"),
            (
                "gamma_limsup",
                self.mesh_ratio_limsup,
                "2 (muA/muK)^(1/a) [c0(0) C0(0)]^(1/a)",
            ),
        ]);
        rows
    }
}

/// Measured quality of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub n: usize,
    pub delta: f64,
    pub rho_hat: f64,
    pub h: f64,
    /// Natural logarithm of the energy, if measured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_energy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The inequality is not claimed for this input (e.g. `N < N0`).
    Skipped,
}

impl Verdict {
    fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub n: usize,
    pub separation: Verdict,
    pub separation_bound: f64,
    pub mesh: Verdict,
    pub mesh_bound: f64,
    pub energy: Verdict,
    pub energy_log_bound: f64,
    pub mesh_ratio: Verdict,
    pub mesh_ratio_bound: f64,
}

impl VerdictRow {
    pub fn all_pass(&self) -> bool {
        [self.separation, self.mesh, self.energy, self.mesh_ratio]
            .iter()
            .all(|v| *v != Verdict::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constants: BoundConstants,
    pub rows: Vec<VerdictRow>,
}

impl BoundReport {
    pub fn failures(&self) -> Vec<&VerdictRow> {
        self.rows.iter().filter(|r| !r.all_pass()).collect()
    }
}

/// Slack on the asymptotic mesh-ratio bound at finite `N`.
pub const MESH_RATIO_SLACK: f64 = 2.0;

/// Checks each measurement against the separation, covering, energy and
/// mesh-ratio inequalities.
pub fn verify_inequalities(
    measurements: &[Measurement],
    inputs: &BoundInputs,
) -> Result<BoundReport, BoundError> {
    let k = inputs.constants()?;
    let a = inputs.alpha;
    let rows = measurements
        .iter()
        .map(|m| {
            let n = m.n as f64;
            let separation_bound = if inputs.constant_weight {
                k.c2 * n.powf(-1.0 / a)
            } else {
                let inv_p = if inputs.p.is_infinite() {
                    0.0
                } else {
                    1.0 / inputs.p
                };
                k.big_c1 * n.powf(-1.0 / a - inv_p / inputs.s)
            };
            let mesh_bound = k.c3 * n.powf(-1.0 / a);
            let energy_log_bound = k.c5.ln() + (1.0 + inputs.s / a) * n.ln();
            let energy = match m.log_energy {
                Some(le) if m.n as u64 >= k.n0 => Verdict::of(le >= energy_log_bound),
                _ => Verdict::Skipped,
            };
            let mesh_ratio_bound = MESH_RATIO_SLACK * k.mesh_ratio_limsup;
            VerdictRow {
                n: m.n,
                separation: Verdict::of(m.delta >= separation_bound),
                separation_bound,
                mesh: Verdict::of(m.rho_hat <= mesh_bound + m.h),
                mesh_bound,
                energy,
                energy_log_bound,
                mesh_ratio: Verdict::of((m.rho_hat + m.h) / m.delta <= mesh_ratio_bound),
                mesh_ratio_bound,
            }
        })
        .collect();
    Ok(BoundReport { constants: k, rows })
}
