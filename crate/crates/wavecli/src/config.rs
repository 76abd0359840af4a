//! Run configuration: `key = value` lines under `[section]` headers (a TOML
//! subset). Every present section is validated before any command runs.

use crate::error::CliError;
use hypwave::fdoracle::FDConfig;
use hypwave::globalsolver::SolverConfig;
use hypwave::nonlin::{NonlinearitySpec, ZeroNonlinearity, Nonlinearity};
use hypwave::{QuadratureConfig, RadialProfile};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Overridden by `--out`.
    pub output_dir: Option<PathBuf>,
    /// Overridden by `--seed`.
    pub seed: Option<u64>,
    pub data: Option<DataSection>,
    pub nonlinearity: Option<NonlinearitySection>,
    pub solver: Option<SolverSection>,
    pub quadrature: Option<QuadratureSection>,
    pub fd: Option<FdSection>,
    pub propagate: Option<PropagateSection>,
    pub decay: Option<DecaySection>,
    pub contraction: Option<ContractionSection>,
    pub blowup: Option<BlowupSection>,
    pub certify: Option<CertifySection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "zero_kind")]
    pub u0: String,
    #[serde(default = "zero_kind")]
    pub u1: String,
    #[serde(default = "one")]
    pub u0_value: f64,
    #[serde(default = "one")]
    pub u1_value: f64,
    #[serde(default = "one")]
    pub u0_k: f64,
    #[serde(default = "one")]
    pub u1_k: f64,
    #[serde(default = "one")]
    pub u0_tau0: f64,
    #[serde(default = "one")]
    pub u1_tau0: f64,
    #[serde(default)]
    pub u0_lo: f64,
    #[serde(default)]
    pub u1_lo: f64,
    #[serde(default = "one")]
    pub u0_hi: f64,
    #[serde(default = "one")]
    pub u1_hi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    #[serde(default = "canonical_kind")]
    pub kind: String,
    pub p: f64,
    #[serde(default = "two")]
    pub q: f64,
    #[serde(default = "delta_default")]
    pub delta0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub h: f64,
    pub epsilon: f64,
    #[serde(default = "eight")]
    pub t_max: f64,
    #[serde(default = "eight")]
    pub r_max: f64,
    #[serde(default = "grid_step")]
    pub dt: f64,
    #[serde(default = "grid_step")]
    pub dr: f64,
    #[serde(default = "iters")]
    pub max_iters: usize,
    #[serde(default = "fp_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "one")]
    pub k: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub nodes_inner: Option<usize>,
    pub nodes_outer: Option<usize>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    pub dr: f64,
    pub dt: f64,
    pub r_max: f64,
    pub t_max: f64,
    #[serde(default = "one_usize")]
    pub save_every: usize,
    #[serde(default = "one_usize")]
    pub r_stride: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateSection {
    #[serde(default = "integral_engine")]
    pub engine: String,
    pub t_max: f64,
    pub r_max: f64,
    pub dt: f64,
    pub dr: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "twelve")]
    pub t_max: f64,
    #[serde(default = "twelve")]
    pub r_max: f64,
    #[serde(default = "quarter")]
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionSection {
    #[serde(default = "pairs")]
    pub pairs: usize,
    #[serde(default = "half")]
    pub target: f64,
    /// Probe at this ε instead of the threshold found by bisection.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSection {
    #[serde(default = "one")]
    pub tau0: f64,
    pub epsilon: f64,
    #[serde(default = "m_max")]
    pub m_max: u32,
    #[serde(default = "threshold_factor")]
    pub threshold_factor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    #[serde(default = "one")]
    pub field_scale: f64,
    #[serde(default)]
    pub tune_to_simulation: bool,
}

fn zero_kind() -> String {
    "zero".into()
}
fn canonical_kind() -> String {
    "canonical".into()
}
fn integral_engine() -> String {
    "integral".into()
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}
fn eight() -> f64 {
    8.0
}
fn twelve() -> f64 {
    12.0
}
fn grid_step() -> f64 {
    0.05
}
fn iters() -> usize {
    60
}
fn fp_tol() -> f64 {
    1e-12
}
fn one_usize() -> usize {
    1
}
fn pairs() -> usize {
    20
}
fn delta_default() -> f64 {
    0.05
}
fn m_max() -> u32 {
    20
}
fn threshold_factor() -> f64 {
    10.0
}

fn cfg_err(e: hypwave::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn profile(kind: &str, value: f64, k: f64, tau0: f64, lo: f64, hi: f64, name: &str) -> Result<RadialProfile, CliError> {
    match kind {
        "zero" => Ok(RadialProfile::zero()),
        "constant" => Ok(RadialProfile::constant(value)),
        "theta" => RadialProfile::theta(k).map(|p| p.scaled(value)).map_err(cfg_err),
        "bump" => RadialProfile::bump(tau0).map(|p| p.scaled(value)).map_err(cfg_err),
        "indicator" => RadialProfile::indicator(lo, hi).map(|p| p.scaled(value)).map_err(cfg_err),
        other => Err(CliError::Config(format!(
            "[data] {name} = \"{other}\" is not one of zero, constant, theta, bump, indicator"
        ))),
    }
}

impl DataSection {
    pub fn profiles(&self) -> Result<(RadialProfile, RadialProfile), CliError> {
        Ok((
            profile(&self.u0, self.u0_value, self.u0_k, self.u0_tau0, self.u0_lo, self.u0_hi, "u0")?,
            profile(&self.u1, self.u1_value, self.u1_k, self.u1_tau0, self.u1_lo, self.u1_hi, "u1")?,
        ))
    }
}

/// The nonlinearity a section describes; `None` for kind = "zero".
pub fn spec_of(n: &NonlinearitySection) -> Result<Option<NonlinearitySpec>, CliError> {
    match n.kind.as_str() {
        "zero" => Ok(None),
        "canonical" => NonlinearitySpec::canonical(n.p).map(Some).map_err(cfg_err),
        "generic" => NonlinearitySpec::generic(n.p, n.q, n.delta0).map(Some).map_err(cfg_err),
        other => Err(CliError::Config(format!(
            "[nonlinearity] kind = \"{other}\" is not one of zero, canonical, generic"
        ))),
    }
}

pub fn boxed(spec: Option<NonlinearitySpec>) -> Box<dyn Nonlinearity> {
    match spec {
        Some(s) => Box::new(s),
        None => Box::new(ZeroNonlinearity),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let d = QuadratureConfig::default();
        match &self.quadrature {
            None => d,
            Some(s) => QuadratureConfig {
                nodes_inner: s.nodes_inner.unwrap_or(d.nodes_inner),
                nodes_outer: s.nodes_outer.unwrap_or(d.nodes_outer),
                abs_tol: s.abs_tol.unwrap_or(d.abs_tol),
                rel_tol: s.rel_tol.unwrap_or(d.rel_tol),
            },
        }
    }

    pub fn fd(&self) -> Result<FDConfig, CliError> {
        let s = Self::require(&self.fd, "fd")?;
        Ok(FDConfig::new(s.dr, s.dt, s.r_max, s.t_max).with_output(s.save_every, s.r_stride))
    }

    /// Solver record; p comes from [nonlinearity].
    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let s = Self::require(&self.solver, "solver")?;
        let n = Self::require(&self.nonlinearity, "nonlinearity")?;
        let mut c = SolverConfig::new(n.p, s.h, s.epsilon).with_grid(s.t_max, s.r_max, s.dt, s.dr);
        c.max_iters = s.max_iters;
        c.fixed_point_tol = s.fixed_point_tol;
        c.k = s.k;
        Ok(c)
    }

    /// Validates every present section.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(d) = &self.data {
            d.profiles()?;
        }
        if let Some(n) = &self.nonlinearity {
            spec_of(n)?;
        }
        if self.solver.is_some() {
            self.solver()?.validate().map_err(cfg_err)?;
        }
        self.quadrature().validate().map_err(cfg_err)?;
        if self.fd.is_some() {
            let fd = self.fd()?;
            fd.validate().map_err(cfg_err)?;
            if fd.save_every == 0 || fd.r_stride == 0 {
                return Err(CliError::Config("[fd] save_every and r_stride must be positive".into()));
            }
        }
        if let Some(p) = &self.propagate {
            if !matches!(p.engine.as_str(), "integral" | "fd" | "both") {
                return Err(CliError::Config(format!(
                    "[propagate] engine = \"{}\" is not one of integral, fd, both",
                    p.engine
                )));
            }
            if !(p.dt > 0.0 && p.dr > 0.0 && p.t_max >= 0.0 && p.r_max >= 0.0) {
                return Err(CliError::Config("[propagate] needs positive dt, dr and nonnegative extents".into()));
            }
        }
        if let Some(d) = &self.decay {
            if !(d.k > 0.0 && d.step > 0.0 && d.t_max > 0.0 && d.r_max > 0.0) {
                return Err(CliError::Config("[decay] k, step, t_max and r_max must be positive".into()));
            }
        }
        if let Some(c) = &self.contraction {
            if c.pairs == 0 || !(c.target >= 0.0) || c.epsilon.is_some_and(|e| !(e > 0.0)) {
                return Err(CliError::Config("[contraction] needs pairs >= 1, target >= 0 and epsilon > 0".into()));
            }
        }
        if let Some(b) = &self.blowup {
            if !(b.tau0 > 0.0 && b.epsilon > 0.0 && b.threshold_factor > 1.0) {
                return Err(CliError::Config("[blowup] needs tau0 > 0, epsilon > 0, threshold_factor > 1".into()));
            }
        }
        if let Some(c) = &self.certify {
            if !c.field_scale.is_finite() {
                return Err(CliError::Config("[certify] field_scale must be finite".into()));
            }
        }
        Ok(())
    }
}
