//! Blow-up side: region geometry, the first-iterate bound, the polynomial boost
//! (a_l, b_l, c_l), the power recursion (A_m, B_m, D_m), the blow-up time bound,
//! certificates checked against simulated solutions, and escape detection.

mod regions;
mod sequences;

pub use regions::{area_lower_bound, region_membership, Region};
pub use sequences::{
    blowup_time_bound, boost_exponents, boost_sequence, boosted_bound, e_constant, john_recursion, john_recursion_log,
    log_tilde_c, BoostEntry, BoostSequence, JohnEntry, JohnSequence, TimeBound, TimeInputs, AREA_FACTOR,
    JACOBIAN_FACTOR,
};

use crate::error::{Error, Result};
use crate::fdoracle::{FDConfig, LeapfrogStepper};
use crate::field::SpaceTimeField;
use crate::hypgeo::{log_sinh, QuadratureConfig};
use crate::meanprop::{lower_bound_c0, lower_bound_i};
use crate::nonlin::Nonlinearity;
use crate::profile::{RadialFn, RadialProfile};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupParams {
    pub p: f64,
    pub q: f64,
    pub tau0: f64,
    pub epsilon: f64,
    pub delta0: f64,
    /// The constant C₀ of the propagator lower bound.
    pub c_lower: f64,
    pub c0: f64,
}

impl BlowupParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p < 3.0) {
            return Err(Error::Config(format!("blowup: p must lie in (1, 3), got {}", self.p)));
        }
        if !(self.q > 1.0) {
            return Err(Error::Config(format!("blowup: q must exceed 1, got {}", self.q)));
        }
        if !(self.tau0 > 0.0 && self.epsilon > 0.0) {
            return Err(Error::Config("blowup: tau0 and epsilon must be positive".into()));
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return Err(Error::Config(format!("blowup: delta0 must lie in (0, 1), got {}", self.delta0)));
        }
        if !(self.c_lower > 0.0 && self.c_lower <= 1.0) || !(self.c0 > 0.0) {
            return Err(Error::Config("blowup: need C0 in (0, 1] and c0 > 0".into()));
        }
        let cap = self.delta0 * (0.5 * self.tau0).sinh().sqrt();
        if !(self.c0 * self.epsilon < cap) {
            return Err(Error::Config(format!(
                "blowup: need c0*epsilon < delta0*sinh(tau0/2)^(1/2) = {cap}, got {}",
                self.c0 * self.epsilon
            )));
        }
        Ok(())
    }
}

/// c₀ with u ≥ c₀ε(sinh r)^{−1/2} on S, for data εu₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIterate {
    pub c0: f64,
    pub tau0: f64,
    pub samples: usize,
}

impl FirstIterate {
    /// c₀ε(sinh r)^{−1/2} on S, `None` outside.
    pub fn bound(&self, eps: f64, t: f64, r: f64) -> Option<f64> {
        Region::S { tau0: self.tau0 }.contains(r, t).then(|| self.c0 * eps * (-0.5 * log_sinh(r)).exp())
    }
}

const S_SAMPLES: usize = 40;

/// c₀ = inf over S of (sinh r)^{1/2}·lower_bound_I(u₁, t, r), sampled on a 40×40
/// midpoint grid in (t − r, t + r) ∈ (τ₀, 2τ₀) × (3τ₀, 3τ₀ + 2R), R the support
/// radius of u₁ (10τ₀ when unbounded). Past t + r = 2τ₀ + R the lower bound no
/// longer changes.
pub fn first_iterate_bound(u1: &RadialProfile, tau0: f64, q: &QuadratureConfig) -> Result<FirstIterate> {
    let c_lower = lower_bound_c0(tau0)?;
    let reach = u1.support_radius().filter(|s| *s > 0.0).unwrap_or(10.0 * tau0);
    let pts: Vec<(f64, f64)> = (0..S_SAMPLES)
        .flat_map(|i| {
            (0..S_SAMPLES).map(move |k| {
                let alpha = tau0 * (1.0 + (i as f64 + 0.5) / S_SAMPLES as f64);
                let beta = 3.0 * tau0 + 2.0 * reach * (k as f64 + 0.5) / S_SAMPLES as f64;
                (0.5 * (alpha + beta), 0.5 * (beta - alpha))
            })
        })
        .filter(|&(t, r)| Region::S { tau0 }.contains(r, t))
        .collect();
    if pts.is_empty() {
        return Err(Error::domain("first_iterate_bound", "empty sample of S"));
    }
    let vals = pts
        .par_iter()
        .map(|&(t, r)| {
            let lb = lower_bound_i(u1, t, r, tau0, c_lower, q)?;
            Ok(lb.small.unwrap_or(lb.large).max(lb.large) * (0.5 * log_sinh(r)).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    let c0 = vals.into_iter().fold(f64::INFINITY, f64::min).max(0.0);
    Ok(FirstIterate { c0, tau0, samples: pts.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupCertificate {
    pub params: BlowupParams,
    pub boost: BoostSequence,
    pub john: JohnSequence,
    pub tilde_c: f64,
    pub time: TimeBound,
    /// c₀ before the c₀ε < δ₀(sinh(τ₀/2))^{1/2} clamp.
    pub c0_found: f64,
}

const JOHN_TERMS: u32 = 20;

fn certificate_at(params: BlowupParams, boost: BoostSequence, log_t: f64, c0_found: f64) -> Result<BlowupCertificate> {
    let ltc = log_tilde_c(&boost, params.epsilon, params.tau0, log_t);
    let john = john_recursion_log(boost.a0, ltc + params.epsilon.ln(), params.q, params.c_lower, params.delta0, JOHN_TERMS)?;
    let time = blowup_time_bound(&TimeInputs {
        a0: boost.a0,
        e: john.e - john.e_tail_bound,
        q: params.q,
        tau0: params.tau0,
        c: boost.last().c,
        epsilon: params.epsilon,
        delta0: params.delta0,
        tilde_c: ltc.exp(),
    })?;
    Ok(BlowupCertificate { params, boost, john, tilde_c: ltc.exp(), time, c0_found })
}

/// Builds the constants for data εu₁ and F with the given p, q, δ₀.
///
/// T is solved self-consistently: c̃ is sampled on Y(T), which feeds D₀ = c̃ε
/// and E, which give the required T. The search starts at T = (6l₀ + 1)τ₀ so
/// that Y ⊂ Σ_{l₀}, and bisects in ln T. E enters with its tail bound removed.
pub fn build_certificate(
    u1: &RadialProfile,
    p: f64,
    q_pow: f64,
    delta0: f64,
    tau0: f64,
    epsilon: f64,
    quad: &QuadratureConfig,
) -> Result<BlowupCertificate> {
    let fi = first_iterate_bound(u1, tau0, quad)?;
    if !(fi.c0 > 0.0) {
        return Err(Error::domain("build_certificate", "first-iterate constant c0 is zero"));
    }
    let cap = 0.99 * delta0 * (0.5 * tau0).sinh().sqrt() / epsilon;
    let params =
        BlowupParams { p, q: q_pow, tau0, epsilon, delta0, c_lower: lower_bound_c0(tau0)?, c0: fi.c0.min(cap) };
    params.validate()?;
    let boost = boost_sequence(&params)?;
    let x_min = ((6 * boost.l0 + 1) as f64 * tau0).ln();
    let gap = |x: f64| -> Result<(f64, BlowupCertificate)> {
        let c = certificate_at(params, boost.clone(), x, fi.c0)?;
        Ok((c.time.log_t - x, c))
    };
    let (g, cert) = gap(x_min)?;
    if g < 0.0 {
        return Ok(BlowupCertificate { time: TimeBound { t: x_min.exp(), log_t: x_min, ..cert.time }, ..cert });
    }
    let mut width = 1.0;
    while gap(x_min + width)?.0 >= 0.0 {
        width *= 2.0;
        if width > 1e5 {
            return Err(Error::domain("build_certificate", "no self-consistent blow-up time below exp(1e5)"));
        }
    }
    let (mut lo, mut hi) = (x_min, x_min + width);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)?.0 < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (_, cert) = gap(hi)?;
    Ok(BlowupCertificate { time: TimeBound { t: hi.exp(), log_t: hi, ..cert.time }, ..cert })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// c₀ε(sinh r)^{−1/2} on S.
    FirstIterate,
    /// The l₀-th boosted bound on Σ_{l₀}.
    Boosted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationPoint {
    pub t: f64,
    pub r: f64,
    pub kind: CheckKind,
    pub bound: f64,
    pub simulated: f64,
}

impl VerificationPoint {
    pub fn margin(&self) -> f64 {
        self.simulated - self.bound
    }

    pub fn violated(&self) -> bool {
        !(self.simulated >= self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub points: Vec<VerificationPoint>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn violations(&self) -> impl Iterator<Item = &VerificationPoint> {
        self.points.iter().filter(|p| p.violated())
    }

    pub fn count(&self, kind: CheckKind) -> (usize, usize) {
        let pts = self.points.iter().filter(|p| p.kind == kind);
        let total = pts.clone().count();
        (total, pts.filter(|p| p.violated()).count())
    }

    pub fn min_margin(&self, kind: CheckKind) -> Option<f64> {
        self.points.iter().filter(|p| p.kind == kind).map(|p| p.margin()).reduce(f64::min)
    }
}

/// Checks u_sim against the first-iterate bound on S and the boosted bound on
/// Σ_{l₀} at every covered grid point with r > 0.
pub fn certificate_verify(cert: &BlowupCertificate, u_sim: &SpaceTimeField) -> VerifyReport {
    let pr = &cert.params;
    let fi = FirstIterate { c0: pr.c0, tau0: pr.tau0, samples: 0 };
    let last = cert.boost.last();
    let sigma = Region::Sigma { l: cert.boost.l0, tau0: pr.tau0 };
    let mut points = Vec::new();
    for (t, r, v) in u_sim.iter() {
        if !(r > 0.0) {
            continue;
        }
        if let Some(bound) = fi.bound(pr.epsilon, t, r) {
            points.push(VerificationPoint { t, r, kind: CheckKind::FirstIterate, bound, simulated: v });
        }
        if sigma.contains(r, t) {
            let bound = boosted_bound(last.c, pr.epsilon, last.a, last.b, t, r);
            points.push(VerificationPoint { t, r, kind: CheckKind::Boosted, bound, simulated: v });
        }
    }
    let mut warnings = Vec::new();
    if !points.iter().any(|p| p.kind == CheckKind::FirstIterate) {
        warnings.push("grid contains no point of S; first-iterate bound unchecked".to_string());
    }
    if !points.iter().any(|p| p.kind == CheckKind::Boosted) {
        warnings.push(format!(
            "grid does not reach Sigma_{} (needs t - r > {}); boosted bound unchecked",
            cert.boost.l0,
            6.0 * cert.boost.l0 as f64 * pr.tau0
        ));
    }
    let t_top = u_sim.t_grid().last().copied().unwrap_or(0.0);
    if t_top < cert.time.t {
        warnings.push(format!(
            "simulation ends at t = {t_top}, before the certified time T = {:.6e}; Sigma_{} is only partly covered",
            cert.time.t, cert.boost.l0
        ));
    }
    VerifyReport { points, warnings }
}

/// Raises c₀ to the tightest value u_sim satisfies on S ∩ grid; the boost
/// chain is left unchanged.
pub fn tune_to_simulation(cert: &BlowupCertificate, u_sim: &SpaceTimeField) -> BlowupCertificate {
    let pr = &cert.params;
    let s = Region::S { tau0: pr.tau0 };
    let tight = u_sim
        .iter()
        .filter(|&(t, r, _)| r > 0.0 && s.contains(r, t))
        .map(|(_, r, v)| v * (0.5 * log_sinh(r)).exp() / pr.epsilon)
        .fold(f64::INFINITY, f64::min);
    let mut out = cert.clone();
    if tight.is_finite() && tight > 0.0 {
        out.params.c0 = tight;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeReport {
    pub t_escape: Option<f64>,
    /// Set when a non-finite value appeared before the threshold was crossed.
    pub unstable: bool,
    pub initial_sup: f64,
    pub threshold: f64,
    /// (t, sup_r |u|) every `save_every` steps, plus the escape time.
    pub history: Vec<(f64, f64)>,
}

/// sup_r(|u₀| + |u₁|) on the FD radial grid.
pub fn data_sup(u0: &dyn RadialFn, u1: &dyn RadialFn, cfg: &FDConfig) -> f64 {
    (0..=cfg.n_r()).map(|j| j as f64 * cfg.dr).map(|r| u0.value(r).abs() + u1.value(r).abs()).fold(0.0, f64::max)
}

/// Steps the leapfrog scheme up to `cfg.t_max` and reports the first time
/// sup_r |u| exceeds `threshold`.
pub fn escape_detector(
    u0: &dyn RadialFn,
    u1: &dyn RadialFn,
    f: &dyn Nonlinearity,
    cfg: &FDConfig,
    threshold: f64,
) -> Result<EscapeReport> {
    cfg.validate()?;
    cfg.check_support(u0, "u0")?;
    cfg.check_support(u1, "u1")?;
    if !(threshold > 0.0) {
        return Err(Error::Config(format!("escape threshold must be positive, got {threshold}")));
    }
    let initial_sup = data_sup(u0, u1, cfg);
    let sup = |u: &[f64]| u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut st = LeapfrogStepper::new(u0, u1, f, cfg.dr, cfg.dt, cfg.r_max);
    let mut history = vec![(0.0, sup(st.previous()))];
    let report = |t_escape, unstable, history| EscapeReport { t_escape, unstable, initial_sup, threshold, history };
    for k in 1..=cfg.n_t() {
        if k > 1 {
            if let Err(Error::Instability { t, .. }) = st.step() {
                history.push((t, f64::INFINITY));
                return Ok(report(Some(t), true, history));
            }
        }
        let t = k as f64 * cfg.dt;
        let s = sup(st.current());
        if s > threshold {
            history.push((t, s));
            return Ok(report(Some(t), false, history));
        }
        if k % cfg.save_every == 0 {
            history.push((t, s));
        }
    }
    Ok(report(None, false, history))
}
