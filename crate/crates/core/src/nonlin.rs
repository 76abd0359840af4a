//! Logarithmic nonlinearities F(u) ~ (ln 1/|u|)^{1−p}|u| near zero.
//!
//! `PiecewiseGeneric` is F(u) = δ₀ g(|u|) with
//!
//! ```text
//! g(a) = a (ln 1/a)^{1−p}                        a ≤ δ₀
//! g(a) = exp(y(ln a)), y cubic Hermite           δ₀ < a < 1/δ₀
//! g(a) = a^q                                     a ≥ 1/δ₀
//! ```
//!
//! where y matches ln g and its s-derivative (s = ln a) at both ends. Both lower
//! bounds F ≥ δ₀(ln 1/|u|)^{1−p}|u| (|u| < δ₀) and F ≥ δ₀|u|^q (|u| > 1/δ₀) hold
//! with equality.

use crate::error::{Error, Result};

/// A nonlinearity F with its derivative.
pub trait Nonlinearity: Sync {
    fn eval(&self, u: f64) -> f64;
    fn deriv(&self, u: f64) -> f64;
}

/// F ≡ 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNonlinearity;

impl Nonlinearity for ZeroNonlinearity {
    fn eval(&self, _: f64) -> f64 {
        0.0
    }
    fn deriv(&self, _: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    CanonicalSinhInverse,
    PiecewiseGeneric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec {
    pub p: f64,
    pub q: f64,
    pub delta0: f64,
    /// Upper-bound constant A of |F′(u)| ≤ A(ln 1/|u|)^{1−p} on |u| ≤ 1/A.
    pub a: f64,
    pub kind: NonlinearityKind,
}

impl NonlinearitySpec {
    pub fn new(p: f64, q: f64, delta0: f64, a: f64, kind: NonlinearityKind) -> Result<Self> {
        let s = Self { p, q, delta0, a, kind };
        s.validate()?;
        Ok(s)
    }

    /// F_p with the fitted Lipschitz constant and the largest admissible δ₀ from a
    /// short candidate list.
    pub fn canonical(p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Config(format!("nonlinearity exponent p must exceed 1, got {p}")));
        }
        let a = canonical_lipschitz_constant(p);
        let delta0 = [0.5, 0.25, 0.1, 0.05, 0.01, 1e-3]
            .into_iter()
            .find(|&d| canonical_satisfies_lower_bounds(p, d))
            .ok_or_else(|| Error::Config(format!("no admissible delta0 found for p = {p}")))?;
        Self::new(p, p, delta0, a, NonlinearityKind::CanonicalSinhInverse)
    }

    pub fn generic(p: f64, q: f64, delta0: f64) -> Result<Self> {
        Self::new(p, q, delta0, 1.0, NonlinearityKind::PiecewiseGeneric)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::Config(format!("nonlinearity exponent p must exceed 1, got {}", self.p)));
        }
        if !(self.q > 1.0) {
            return Err(Error::Config(format!("power q must exceed 1, got {}", self.q)));
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return Err(Error::Config(format!("delta0 must lie in (0, 1), got {}", self.delta0)));
        }
        if !(self.a > 0.0) {
            return Err(Error::Config(format!("A must be positive, got {}", self.a)));
        }
        Ok(())
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }
}

impl Nonlinearity for NonlinearitySpec {
    fn eval(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::CanonicalSinhInverse => f_canonical(u, self.p),
            NonlinearityKind::PiecewiseGeneric => f_generic(u, self),
        }
    }

    fn deriv(&self, u: f64) -> f64 {
        match self.kind {
            NonlinearityKind::CanonicalSinhInverse => f_canonical_deriv(u, self.p),
            NonlinearityKind::PiecewiseGeneric => f_generic_deriv(u, self),
        }
    }
}

/// asinh(1/a) = ln(1 + √(1+a²)) − ln a, accurate for tiny and huge a.
fn asinh_inv(a: f64) -> f64 {
    (1.0 + (1.0 + a * a).sqrt()).ln() - a.ln()
}

/// F_p(u) = (asinh(1/|u|))^{1−p}|u|, F_p(0) = 0.
pub fn f_canonical(u: f64, p: f64) -> f64 {
    let a = u.abs();
    if a == 0.0 {
        return 0.0;
    }
    a * asinh_inv(a).powf(1.0 - p)
}

pub fn f_canonical_deriv(u: f64, p: f64) -> f64 {
    let a = u.abs();
    if a == 0.0 {
        return 0.0;
    }
    let l = asinh_inv(a);
    let d = l.powf(1.0 - p) + (p - 1.0) * l.powf(-p) / (1.0 + a * a).sqrt();
    d.copysign(u)
}

/// Cubic Hermite data of y = ln g on s ∈ [ln δ₀, −ln δ₀].
fn blend(spec: &NonlinearitySpec) -> (f64, f64, f64, f64, f64, f64) {
    let s0 = spec.delta0.ln();
    let s1 = -s0;
    let y0 = s0 + (1.0 - spec.p) * (-s0).ln();
    let d0 = 1.0 + (1.0 - spec.p) / s0;
    (s0, s1, y0, d0, spec.q * s1, spec.q)
}

/// Returns (g(a), g′(a)).
fn g_generic(a: f64, spec: &NonlinearitySpec) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let p = spec.p;
    if a <= spec.delta0 {
        let l = -a.ln();
        return (a * l.powf(1.0 - p), l.powf(1.0 - p) + (p - 1.0) * l.powf(-p));
    }
    if a >= 1.0 / spec.delta0 {
        return (a.powf(spec.q), spec.q * a.powf(spec.q - 1.0));
    }
    let (s0, s1, y0, d0, y1, d1) = blend(spec);
    let h = s1 - s0;
    let x = (a.ln() - s0) / h;
    let (x2, x3) = (x * x, x * x * x);
    let y = (2.0 * x3 - 3.0 * x2 + 1.0) * y0
        + (x3 - 2.0 * x2 + x) * h * d0
        + (-2.0 * x3 + 3.0 * x2) * y1
        + (x3 - x2) * h * d1;
    let dy = ((6.0 * x2 - 6.0 * x) * y0 + (3.0 * x2 - 4.0 * x + 1.0) * h * d0 + (-6.0 * x2 + 6.0 * x) * y1
        + (3.0 * x2 - 2.0 * x) * h * d1)
        / h;
    let g = y.exp();
    (g, g * dy / a)
}

/// The generic admissible F described in the module docs.
pub fn f_generic(u: f64, spec: &NonlinearitySpec) -> f64 {
    spec.delta0 * g_generic(u.abs(), spec).0
}

pub fn f_generic_deriv(u: f64, spec: &NonlinearitySpec) -> f64 {
    (spec.delta0 * g_generic(u.abs(), spec).1).copysign(u)
}

/// G(u) = A(ln 1/|u|)^{1−p} on 0 < |u| ≤ 1/A (and |u| < 1).
pub fn g_envelope(u_abs: f64, p: f64, a: f64) -> Result<f64> {
    if !(p > 1.0) || !(a > 0.0) {
        return Err(Error::domain("G_envelope", format!("need p > 1 and A > 0, got p = {p}, A = {a}")));
    }
    if !(u_abs > 0.0 && u_abs <= 1.0 / a && u_abs < 1.0) {
        return Err(Error::domain("G_envelope", format!("|u| = {u_abs} outside (0, min(1/A, 1)) with A = {a}")));
    }
    Ok(a * (-u_abs.ln()).powf(1.0 - p))
}

/// (|F(u)−F(v)|, G(max(|u|,|v|))|u−v|).
pub fn lipschitz_diff_bound(u: f64, v: f64, spec: &NonlinearitySpec) -> Result<(f64, f64)> {
    let lim = 1.0 / spec.a;
    if u.abs() > lim || v.abs() > lim {
        return Err(Error::domain("lipschitz_diff_bound", format!("arguments {u}, {v} exceed 1/A = {lim}")));
    }
    if u == v {
        return Ok((0.0, 0.0));
    }
    let diff = (spec.eval(u) - spec.eval(v)).abs();
    let bound = g_envelope(u.abs().max(v.abs()), spec.p, spec.a)? * (u - v).abs();
    Ok((diff, bound))
}

/// Fitted A for F_p: the fixed point of A ↦ max(1, sup_{|u| ≤ 1/A} |F′(u)|(ln 1/|u|)^{p−1}),
/// sampled on 20 000 log-spaced values of ln(1/|u|), plus a 10⁻⁶ relative margin.
pub fn canonical_lipschitz_constant(p: f64) -> f64 {
    let sup_from = |a: f64| {
        let l_min = a.ln().max(1e-6);
        let n = 20_000;
        let (lo, hi) = (l_min.ln(), 700f64.ln());
        (0..=n)
            .map(|k| {
                let l = (lo + (hi - lo) * k as f64 / n as f64).exp();
                let u = (-l).exp();
                f_canonical_deriv(u, p) * l.powf(p - 1.0)
            })
            .fold(1.0f64, f64::max)
    };
    let mut a = 1.0;
    for _ in 0..50 {
        let s = sup_from(a);
        if s <= a {
            break;
        }
        a = s;
    }
    a * (1.0 + 1e-6)
}

fn canonical_satisfies_lower_bounds(p: f64, delta0: f64) -> bool {
    let n = 400;
    (0..n).all(|k| {
        let x = k as f64 / n as f64;
        let small = delta0 * (-30.0 * x).exp() * (1.0 - 1e-9);
        let large = 1.0 / delta0 * (30.0 * x).exp() * (1.0 + 1e-9);
        let sb = delta0 * (-small.ln()).powf(1.0 - p) * small;
        let lb = delta0 * large.powf(p);
        f_canonical(small, p) >= sb && f_canonical(large, p) >= lb
    })
}

/// Sup of |F′| on [−bound, bound], sampled on a fine grid.
pub fn lipschitz_on_ball(f: &dyn Nonlinearity, bound: f64) -> f64 {
    let n = 4000;
    (0..=n).map(|k| f.deriv(bound * k as f64 / n as f64).abs()).fold(0.0, f64::max)
}
