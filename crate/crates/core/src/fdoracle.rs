//! Leapfrog finite differences for u_tt = u_rr + coth(r) u_r + u/4 + F(u).
//!
//! The origin uses the even extension, where coth(r)u_r → u_rr, so the stencil
//! there is 4(u₁−u₀)/dr². The outer node is held at zero. The first step is a
//! third-order Taylor expansion in t.

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::nonlin::Nonlinearity;
use crate::profile::RadialFn;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDConfig {
    pub dr: f64,
    pub dt: f64,
    pub r_max: f64,
    pub t_max: f64,
    /// Keep every `save_every`-th time level in the output.
    pub save_every: usize,
    /// Keep every `r_stride`-th radial node in the output.
    pub r_stride: usize,
}

pub const MAX_CFL: f64 = 0.9;

fn steps(len: f64, h: f64, what: &str) -> Result<usize> {
    let n = (len / h).round();
    if (n * h - len).abs() > 1e-9 * len.max(h) {
        return Err(Error::Config(format!("{what} = {len} is not a multiple of the step {h}")));
    }
    Ok(n as usize)
}

impl FDConfig {
    pub fn new(dr: f64, dt: f64, r_max: f64, t_max: f64) -> Self {
        Self { dr, dt, r_max, t_max, save_every: 1, r_stride: 1 }
    }

    pub fn with_output(mut self, save_every: usize, r_stride: usize) -> Self {
        self.save_every = save_every.max(1);
        self.r_stride = r_stride.max(1);
        self
    }

    pub fn cfl(&self) -> f64 {
        self.dt / self.dr
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dr > 0.0 && self.dt > 0.0 && self.r_max > 0.0 && self.t_max > 0.0) {
            return Err(Error::Config("fd: dr, dt, r_max and t_max must be positive".into()));
        }
        if self.cfl() > MAX_CFL + 1e-12 {
            return Err(Error::Config(format!("fd: cfl = dt/dr = {} exceeds {MAX_CFL}", self.cfl())));
        }
        steps(self.r_max, self.dr, "fd r_max")?;
        steps(self.t_max, self.dt, "fd t_max")?;
        Ok(())
    }

    pub fn n_r(&self) -> usize {
        (self.r_max / self.dr).round() as usize
    }

    pub fn n_t(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub(crate) fn check_support(&self, p: &dyn RadialFn, name: &str) -> Result<()> {
        if let Some(s) = p.support() {
            if s > 0.0 && self.r_max < self.t_max + s {
                return Err(Error::Config(format!(
                    "fd: r_max = {} must be at least t_max + support of {name} = {}",
                    self.r_max,
                    self.t_max + s
                )));
            }
        }
        Ok(())
    }
}

/// Reversible leapfrog integrator holding two time levels.
pub struct LeapfrogStepper<'a> {
    f: &'a dyn Nonlinearity,
    dr: f64,
    dt: f64,
    r: Vec<f64>,
    coth: Vec<f64>,
    prev: Vec<f64>,
    cur: Vec<f64>,
    next: Vec<f64>,
    time: f64,
    dir: f64,
}

fn laplace_into(out: &mut [f64], u: &[f64], coth: &[f64], dr: f64) {
    let n = u.len();
    let inv2 = 1.0 / (dr * dr);
    let inv1 = 0.5 / dr;
    out[0] = 4.0 * (u[1] - u[0]) * inv2;
    for j in 1..n - 1 {
        out[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv2 + coth[j] * (u[j + 1] - u[j - 1]) * inv1;
    }
    out[n - 1] = 0.0;
}

impl<'a> LeapfrogStepper<'a> {
    /// Samples the data and takes the Taylor first step.
    pub fn new(u0: &dyn RadialFn, u1: &dyn RadialFn, f: &'a dyn Nonlinearity, dr: f64, dt: f64, r_max: f64) -> Self {
        let n = (r_max / dr).round() as usize + 1;
        let r: Vec<f64> = (0..n).map(|j| j as f64 * dr).collect();
        let coth: Vec<f64> = r.iter().map(|&x| if x > 0.0 { 1.0 / x.tanh() } else { 0.0 }).collect();
        let mut a: Vec<f64> = r.iter().map(|&x| u0.value(x)).collect();
        let mut b: Vec<f64> = r.iter().map(|&x| u1.value(x)).collect();
        a[n - 1] = 0.0;
        b[n - 1] = 0.0;
        let mut la = vec![0.0; n];
        let mut lb = vec![0.0; n];
        laplace_into(&mut la, &a, &coth, dr);
        laplace_into(&mut lb, &b, &coth, dr);
        let cur: Vec<f64> = (0..n)
            .map(|j| {
                if j == n - 1 {
                    return 0.0;
                }
                let acc = la[j] + 0.25 * a[j] + f.eval(a[j]);
                let jerk = lb[j] + 0.25 * b[j] + f.deriv(a[j]) * b[j];
                a[j] + dt * b[j] + 0.5 * dt * dt * acc + dt * dt * dt / 6.0 * jerk
            })
            .collect();
        Self { f, dr, dt, r, coth, prev: a, cur, next: vec![0.0; n], time: dt, dir: 1.0 }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn current(&self) -> &[f64] {
        &self.cur
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// One leapfrog step; reports the first non-finite node.
    pub fn step(&mut self) -> Result<()> {
        let n = self.cur.len();
        laplace_into(&mut self.next, &self.cur, &self.coth, self.dr);
        let dt2 = self.dt * self.dt;
        for j in 0..n - 1 {
            let u = self.cur[j];
            self.next[j] = 2.0 * u - self.prev[j] + dt2 * (self.next[j] + 0.25 * u + self.f.eval(u));
        }
        self.next[n - 1] = 0.0;
        std::mem::swap(&mut self.prev, &mut self.cur);
        std::mem::swap(&mut self.cur, &mut self.next);
        self.time += self.dir * self.dt;
        if let Some(j) = self.cur.iter().position(|v| !v.is_finite()) {
            return Err(Error::Instability { t: self.time, r: self.r[j] });
        }
        Ok(())
    }

    /// Reverses the direction of time: the next steps retrace the history.
    pub fn reverse(&mut self) {
        std::mem::swap(&mut self.prev, &mut self.cur);
        self.time -= self.dir * self.dt;
        self.dir = -self.dir;
    }
}

/// Runs the scheme to `cfg.t_max` and returns the strided snapshots.
pub fn fd_solve(u0: &dyn RadialFn, u1: &dyn RadialFn, f: &dyn Nonlinearity, cfg: &FDConfig) -> Result<SpaceTimeField> {
    cfg.validate()?;
    cfg.check_support(u0, "u0")?;
    cfg.check_support(u1, "u1")?;
    let n_t = cfg.n_t();
    let mut st = LeapfrogStepper::new(u0, u1, f, cfg.dr, cfg.dt, cfg.r_max);
    let cols: Vec<usize> = (0..st.r.len()).step_by(cfg.r_stride).collect();
    let r_grid: Vec<f64> = cols.iter().map(|&j| st.r[j]).collect();
    let mut t_grid = vec![0.0];
    let mut values: Vec<f64> = cols.iter().map(|&j| st.prev[j]).collect();
    for k in 1..=n_t {
        if k > 1 {
            st.step()?;
        }
        if k % cfg.save_every == 0 {
            t_grid.push(k as f64 * cfg.dt);
            values.extend(cols.iter().map(|&j| st.cur[j]));
        }
    }
    SpaceTimeField::new(t_grid, r_grid, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    /// Values at the probe point, coarse to fine.
    pub values: Vec<f64>,
    /// Errors against the exact value, or successive differences without one.
    pub errors: Vec<f64>,
    pub estimates: Vec<f64>,
    /// Order from the finest pair; `None` when inconclusive.
    pub order: Option<f64>,
    pub inconclusive: bool,
}

/// Observed order of accuracy at (t, r) under repeated halving of dr and dt.
#[allow(clippy::too_many_arguments)]
pub fn convergence_order(
    u0: &dyn RadialFn,
    u1: &dyn RadialFn,
    f: &dyn Nonlinearity,
    cfg: &FDConfig,
    refinements: usize,
    probe: (f64, f64),
    exact: Option<f64>,
) -> Result<OrderReport> {
    cfg.validate()?;
    let (pt, pr) = probe;
    let mut values = Vec::new();
    for level in 0..=refinements {
        let s = 0.5f64.powi(level as i32);
        let (dr, dt) = (cfg.dr * s, cfg.dt * s);
        let nt = steps(pt, dt, "probe t")?;
        let jr = steps(pr, dr, "probe r")?;
        let mut st = LeapfrogStepper::new(u0, u1, f, dr, dt, cfg.r_max);
        for _ in 1..nt {
            st.step()?;
        }
        values.push(if nt == 0 { st.prev[jr] } else { st.cur[jr] });
    }
    let errors: Vec<f64> = match exact {
        Some(x) => values.iter().map(|v| (v - x).abs()).collect(),
        None => values.windows(2).map(|w| (w[1] - w[0]).abs()).collect(),
    };
    let estimates: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let inconclusive =
        refinements < 2 || estimates.is_empty() || !monotone || estimates.iter().any(|e| !e.is_finite());
    let order = if inconclusive { None } else { estimates.last().copied() };
    Ok(OrderReport { values, errors, estimates, order, inconclusive })
}
