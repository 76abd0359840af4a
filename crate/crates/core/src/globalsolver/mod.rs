//! Small-data global existence side: Picard iteration in the weighted space,
//! contraction measurements, the claim-integral check and dispersive decay fits.

mod claim;
mod contraction;
mod decay;

pub use claim::claim_bound_check;
pub use contraction::{contraction_probe, epsilon_threshold, ContractionReport, RandomField, ThresholdReport};
pub use decay::{decay_fit, linear_field, DecayFitReport};

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::hypgeo::{log_phi_weight, theta_k, EnvelopeParams, QuadratureConfig};
use crate::meanprop::kernel::{DuhamelOperator, Trapezoid};
use crate::meanprop::linear_solution;
use crate::nonlin::{Nonlinearity, NonlinearitySpec};
use crate::profile::{RadialFn, RadialProfile};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub h: f64,
    pub epsilon: f64,
    pub t_max: f64,
    pub r_max: f64,
    pub dt: f64,
    pub dr: f64,
    pub max_iters: usize,
    pub fixed_point_tol: f64,
    /// Envelope index of the data check |u₀| + |u₁| ≤ θ_k.
    pub k: f64,
}

impl SolverConfig {
    /// Defaults: dt = dr = 0.05, t_max = r_max = 8, 60 iterations, tolerance 1e-12, k = 1.
    pub fn new(p: f64, h: f64, epsilon: f64) -> Self {
        Self { p, h, epsilon, t_max: 8.0, r_max: 8.0, dt: 0.05, dr: 0.05, max_iters: 60, fixed_point_tol: 1e-12, k: 1.0 }
    }

    pub fn with_grid(mut self, t_max: f64, r_max: f64, dt: f64, dr: f64) -> Self {
        self.t_max = t_max;
        self.r_max = r_max;
        self.dt = dt;
        self.dr = dr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 3.0) {
            return Err(Error::Config(format!("solver: p must exceed 3 (weighted contraction needs p > 3), got {}", self.p)));
        }
        if !(self.h > 1.0 && self.h < self.p - 2.0) {
            return Err(Error::Config(format!(
                "solver: h must lie in (1, p - 2) = (1, {}) for the weighted contraction estimate, got {}",
                self.p - 2.0,
                self.h
            )));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!("solver: epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.dt > 0.0 && self.dr > 0.0) {
            return Err(Error::Config("solver: grid spacings must be positive".into()));
        }
        if !(self.t_max >= self.dt) || !(self.r_max > 0.0) {
            return Err(Error::Config("solver: need t_max >= dt and r_max > 0".into()));
        }
        if self.max_iters == 0 || !(self.fixed_point_tol > 0.0) {
            return Err(Error::Config("solver: max_iters and fixed_point_tol must be positive".into()));
        }
        if !(self.k > 0.0) {
            return Err(Error::Config(format!("solver: envelope index k must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

/// max over the grid of Φ_h(t, r)|u(t, r)|.
pub fn weighted_norm(u: &SpaceTimeField, h: f64) -> f64 {
    u.iter()
        .map(|(t, r, v)| if v == 0.0 { 0.0 } else { (log_phi_weight(t, r, h).unwrap_or(f64::NAN)).exp() * v.abs() })
        .fold(0.0, f64::max)
}

/// T = 1/(2√2 e M), capped at 1: the window on which the local Picard map contracts.
pub fn local_existence_window(m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain("local_existence_window", format!("Lipschitz bound must be positive, got {m}")));
    }
    Ok((1.0 / (2.0 * std::f64::consts::SQRT_2 * std::f64::consts::E * m)).min(1.0))
}

/// Everything a Picard run needs that does not depend on ε: the linear solution
/// u⁰ on the light-cone trapezoid, the weights Φ_h, N_h, the effective A and the
/// gridded Duhamel operator.
pub struct SolverContext {
    cfg: SolverConfig,
    spec: Option<NonlinearitySpec>,
    grid: Trapezoid,
    u_lin: Vec<f64>,
    phi: Vec<f64>,
    n_h: f64,
    op: DuhamelOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun {
    /// Final iterate on the trapezoid.
    pub values: Vec<f64>,
    /// Weighted norms of successive differences.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub field: SpaceTimeField,
    pub history: Vec<f64>,
    pub weighted_norm: f64,
    pub n_h: f64,
    pub a: f64,
}

fn steps(len: f64, h: f64, what: &str) -> Result<usize> {
    let n = (len / h).round();
    if (n * h - len).abs() > 1e-9 * len.max(h) {
        return Err(Error::Config(format!("solver: {what} = {len} is not a multiple of the spacing {h}")));
    }
    Ok(n as usize)
}

impl SolverContext {
    /// `spec = None` runs the linear problem (F ≡ 0).
    pub fn new(
        u0: &RadialProfile,
        u1: &RadialProfile,
        spec: Option<&NonlinearitySpec>,
        cfg: &SolverConfig,
        q: &QuadratureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        q.validate()?;
        if let Some(s) = spec {
            s.validate()?;
            if (s.p - cfg.p).abs() > 1e-12 {
                return Err(Error::Config(format!("solver p = {} differs from nonlinearity p = {}", cfg.p, s.p)));
            }
        }
        if (cfg.dt - cfg.dr).abs() > 1e-12 * cfg.dt {
            return Err(Error::Config(format!("solver: dt = {} and dr = {} must be equal", cfg.dt, cfg.dr)));
        }
        let h = cfg.dt;
        let n_t = steps(cfg.t_max, h, "t_max")?;
        let n_r = steps(cfg.r_max, h, "r_max")?;
        let grid = Trapezoid::new(h, n_t, n_r);
        let env = EnvelopeParams::new(cfg.k)?;
        for j in 0..grid.row_len(0) {
            let r = grid.r(j);
            let lhs = u0.value(r).abs() + u1.value(r).abs();
            let bound = theta_k(r, env)?;
            if lhs > bound * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::domain(
                    "picard_solve",
                    format!("data exceed the envelope theta_k (k = {}) at r = {r}: {lhs} > {bound}", cfg.k),
                ));
            }
        }
        let pts: Vec<(usize, usize)> = grid.points().collect();
        let u_lin = pts
            .par_iter()
            .map(|&(i, j)| linear_solution(u0, u1, grid.t(i), grid.r(j), q))
            .collect::<Result<Vec<f64>>>()?;
        let phi: Vec<f64> =
            pts.iter().map(|&(i, j)| log_phi_weight(grid.t(i), grid.r(j), cfg.h).map(f64::exp)).collect::<Result<_>>()?;
        let sup = u_lin.iter().zip(&phi).map(|(u, w)| u.abs() * w).fold(0.0, f64::max);
        let n_h = 1.1 * sup.max(f64::MIN_POSITIVE);
        let spec = spec.map(|s| if s.a > 2.0 * n_h { *s } else { s.with_a(2.0 * n_h * 1.05) });
        let op = DuhamelOperator::new(grid.clone())?;
        Ok(Self { cfg: *cfg, spec, grid, u_lin, phi, n_h, op })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Trapezoid {
        &self.grid
    }

    /// Empirical N_h = 1.1 · sup Φ_h|u⁰|.
    pub fn n_h(&self) -> f64 {
        self.n_h
    }

    /// Effective A, raised above 2N_h when needed; infinite for F ≡ 0.
    pub fn a_const(&self) -> f64 {
        self.spec.map_or(f64::INFINITY, |s| s.a)
    }

    pub fn linear(&self) -> &[f64] {
        &self.u_lin
    }

    pub fn weights(&self) -> &[f64] {
        &self.phi
    }

    pub fn operator(&self) -> &DuhamelOperator {
        &self.op
    }

    fn f(&self, u: f64) -> f64 {
        self.spec.map_or(0.0, |s| s.eval(u))
    }

    /// max Φ_h|v| over the trapezoid.
    pub fn norm(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.phi).map(|(x, w)| x.abs() * w).fold(0.0, f64::max)
    }

    /// L F(u): the Duhamel term of the source F(u).
    pub fn nonlinear_term(&self, u: &[f64]) -> Vec<f64> {
        let src: Vec<f64> = u.iter().map(|&x| self.f(x)).collect();
        self.op.apply(&src)
    }

    pub fn picard(&self, eps: f64) -> Result<PicardRun> {
        let bound = self.spec.map_or(f64::INFINITY, |s| 1.0 / s.a);
        let check = |u: &[f64], iteration: usize| {
            let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if sup > bound || !sup.is_finite() {
                return Err(Error::DomainEscape { iteration, sup, bound });
            }
            Ok(())
        };
        let base: Vec<f64> = self.u_lin.iter().map(|x| eps * x).collect();
        let mut u = base.clone();
        check(&u, 0)?;
        let mut history = Vec::new();
        for n in 1..=self.cfg.max_iters {
            let lin = self.nonlinear_term(&u);
            let next: Vec<f64> = base.iter().zip(&lin).map(|(a, b)| a + b).collect();
            let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
            history.push(self.norm(&diff));
            check(&next, n)?;
            u = next;
            if *history.last().unwrap() < self.cfg.fixed_point_tol {
                return Ok(PicardRun { values: u, history });
            }
        }
        Err(Error::NonConvergence { history })
    }

    /// Φ_h-weighted residual of u = εu⁰ + L F(u).
    pub fn residual(&self, eps: f64, u: &[f64]) -> f64 {
        let lin = self.nonlinear_term(u);
        let res: Vec<f64> = u.iter().zip(&self.u_lin).zip(&lin).map(|((x, l), n)| x - eps * l - n).collect();
        self.norm(&res)
    }

    /// Restriction of trapezoid values to [0, t_max] × [0, r_max].
    pub fn crop(&self, v: &[f64]) -> Result<SpaceTimeField> {
        let g = &self.grid;
        let nr = g.n_r() + 1;
        let mut values = Vec::with_capacity((g.n_t() + 1) * nr);
        for i in 0..=g.n_t() {
            values.extend_from_slice(&g.row(v, i)[..nr]);
        }
        SpaceTimeField::new((0..=g.n_t()).map(|i| g.t(i)).collect(), (0..nr).map(|j| g.r(j)).collect(), values)
    }
}

/// Solves u = εu⁰ + ∫₀ᵗ I(t−τ, r, F(u(τ))) dτ by Picard iteration from u⁽⁰⁾ = εu⁰.
pub fn picard_solve(
    u0: &RadialProfile,
    u1: &RadialProfile,
    spec: &NonlinearitySpec,
    cfg: &SolverConfig,
) -> Result<PicardSolution> {
    let ctx = SolverContext::new(u0, u1, Some(spec), cfg, &QuadratureConfig::default())?;
    let run = ctx.picard(cfg.epsilon)?;
    let field = ctx.crop(&run.values)?;
    Ok(PicardSolution {
        weighted_norm: ctx.norm(&run.values),
        field,
        history: run.history,
        n_h: ctx.n_h(),
        a: ctx.a_const(),
    })
}
