//! Spherical means on the hyperbolic plane and the integral operators built on them.
//!
//! Two independent quadrature routes evaluate the sine-type propagator
//! I(t, r, φ): [`sine_propagator`] integrates spherical means over the time
//! variable (s outer, λ inner), while [`w_evaluator`] and [`kernel`] swap the order
//! and evaluate the inner s-integral in closed form through K(m).

pub mod kernel;
mod weight;

pub use weight::{MonotoneWeight, WeightKind};

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::hypgeo::quad::{self, ellip_k_comp, Estimate};
use crate::hypgeo::QuadratureConfig;
use crate::profile::{Interp, RadialFn};
use std::f64::consts::PI;

fn check_nonneg(op: &'static str, t: f64, r: f64) -> Result<()> {
    if !(t >= 0.0) || !(r >= 0.0) {
        return Err(Error::domain(op, format!("t and r must be nonnegative, got t = {t}, r = {r}")));
    }
    Ok(())
}

pub(crate) fn quad_err<const N: usize>(op: &'static str) -> impl Fn(Estimate<N>) -> Error {
    move |e| Error::Quadrature { op, value: e.value[0], error: e.error, panels: e.panels }
}

/// acosh(1 + y) for y ≥ 0 without cancellation.
fn acosh1p(y: f64) -> f64 {
    (y + (y * (y + 2.0)).sqrt()).ln_1p()
}

/// Radial spherical mean (M^t f)(r).
///
/// Uses cosh λ = cosh(r−t) + sinh r sinh t (1 − cos ψ), which makes the mean
/// (1/π)∫₀^π f(λ(ψ)) dψ with both endpoint singularities removed. For large r and t
/// the integrand changes over a ψ-window of width ~e^{−min(r,t)} next to ψ = 0, so
/// the initial partition is refined geometrically towards that end.
pub fn spherical_mean<P: RadialFn + ?Sized>(f: &P, t: f64, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_nonneg("spherical_mean", t, r)?;
    if t == 0.0 {
        return Ok(f.value(r));
    }
    if r == 0.0 {
        return Ok(f.value(t));
    }
    let d = (r - t).abs();
    if let Some(s) = f.support() {
        if d > s {
            return Ok(0.0);
        }
    }
    let h = r.sinh() * t.sinh();
    let sd = (0.5 * d).sinh();
    let y0 = 2.0 * sd * sd;
    let lam = |psi: f64| {
        let sp = (0.5 * psi).sin();
        acosh1p(y0 + 2.0 * h * sp * sp)
    };
    let mut pts = vec![0.0, PI];
    let width = ((1.0 + y0) / h).sqrt();
    let mut psi = 0.5 * PI;
    while psi > 0.05 * width && pts.len() < 64 {
        pts.push(psi);
        psi *= 0.5;
    }
    for k in f.kinks() {
        if k > d && k < r + t {
            let s2 = 2.0 * (0.5 * (k + d)).sinh() * (0.5 * (k - d)).sinh() / (2.0 * h);
            if s2 < 1.0 {
                pts.push(2.0 * s2.sqrt().asin());
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    let e = quad::integrate(|psi| f.value(lam(psi)), &pts, q.inner()).map_err(quad_err("spherical_mean"))?;
    Ok(e.value[0] / PI)
}

/// Sine-type propagator I(t, r, φ): the solution at (t, r) of the linear equation
/// with zero position data and velocity φ.
///
/// The time integral is split at s_a = max(0, t−1). On [0, s_a] the kernel
/// sinh s/√(2cosh t − 2cosh s) is smooth; on [s_a, t] the substitution
/// σ² = 2cosh t − 2cosh s turns the kernel into dσ.
pub fn sine_propagator<P: RadialFn + ?Sized>(phi: &P, t: f64, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_nonneg("sine_propagator", t, r)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    if let Some(s) = phi.support() {
        if r - t > s {
            return Ok(0.0);
        }
    }
    let a = MonotoneWeight::two_cosh();
    let sa = (t - 1.0).max(0.0);
    let kinks: Vec<f64> = phi
        .kinks()
        .into_iter()
        .flat_map(|k| [(k - r).abs(), k + r])
        .filter(|&s| s > 0.0 && s < t)
        .collect();
    let mut failure: Option<Error> = None;
    let mut mean = |s: f64| match spherical_mean(phi, s, r, q) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let mut total = 0.0;
    if sa > 0.0 {
        let mut pts = vec![0.0, sa];
        pts.extend(kinks.iter().filter(|&&s| s < sa));
        pts.sort_by(f64::total_cmp);
        let e = quad::integrate(
            |s| s.sinh() / (4.0 * (0.5 * (t + s)).sinh() * (0.5 * (t - s)).sinh()).sqrt() * mean(s),
            &pts,
            q.outer(),
        )
        .map_err(quad_err("sine_propagator"))?;
        total += e.value[0];
    }
    let s1 = a.diff(t, sa).sqrt();
    let mut pts = vec![0.0, s1];
    pts.extend(kinks.iter().filter(|&&s| s > sa).map(|&s| a.diff(t, s).sqrt()));
    pts.sort_by(f64::total_cmp);
    let e = quad::integrate(|sigma| mean(a.inverse_below(t, sigma)), &pts, q.outer())
        .map_err(quad_err("sine_propagator"))?;
    total += e.value[0];
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// ∂_t I(t, r, φ) by central differencing; I is odd in t, so the stencil is
/// valid down to t = 0 where it returns φ(r).
pub fn sine_propagator_dt<P: RadialFn + ?Sized>(phi: &P, t: f64, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_nonneg("sine_propagator_dt", t, r)?;
    if t == 0.0 {
        return Ok(phi.value(r));
    }
    let h = 1e-4_f64.min(0.5 * t);
    let odd = |s: f64| -> Result<f64> {
        if s >= 0.0 {
            sine_propagator(phi, s, r, q)
        } else {
            sine_propagator(phi, -s, r, q).map(|v| -v)
        }
    };
    Ok((odd(t + h)? - odd(t - h)?) / (2.0 * h))
}

/// Linear solution ∂_t I(t, r, u₀) + I(t, r, u₁).
pub fn linear_solution<P: RadialFn + ?Sized, Q: RadialFn + ?Sized>(
    u0: &P,
    u1: &Q,
    t: f64,
    r: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    let pos = if u0.support() == Some(0.0) { 0.0 } else { sine_propagator_dt(u0, t, r, q)? };
    let vel = if u1.support() == Some(0.0) { 0.0 } else { sine_propagator(u1, t, r, q)? };
    Ok(pos + vel)
}

/// The inner s-integral ∫ a′(s) ds / √((a(t)−a(s))(a(r+λ)−a(s))(a(s)−a(r−λ)))
/// over s ∈ [|r−λ|, min(t, r+λ)], in closed form 2K(m)/√(M − a(|r−λ|)).
pub fn beta_inner(t: f64, r: f64, lambda: f64, a: &MonotoneWeight) -> f64 {
    let lo = (r - lambda).abs();
    let rl = r + lambda;
    let (top, mid) = if t >= rl { (t, rl) } else { (rl, t) };
    let width = a.diff(mid, lo);
    let span = a.diff(top, lo);
    if width < 0.0 || !(span > 0.0) {
        return 0.0;
    }
    let m1 = (a.diff(top, mid) / span).min(1.0);
    2.0 * ellip_k_comp(m1) / span.sqrt()
}

/// W(t, r, f) = ∫₀ᵗ∫_{|r−s|}^{r+s} f(λ) a′(s) / √((a(t)−a(s))(a(r+λ)−a(s))(a(s)−a(r−λ))) dλ ds,
/// evaluated with λ outer and the s-integral from [`beta_inner`].
///
/// At r = 0 the s-range degenerates; the integrand is continued by its limit
/// π/√(a(t)−a(λ)), which keeps I(t, r, φ) = W(t, r, φ sinh)/π continuous.
pub fn w_evaluator<P: RadialFn + ?Sized>(
    t: f64,
    r: f64,
    f: &P,
    a: &MonotoneWeight,
    q: &QuadratureConfig,
) -> Result<f64> {
    check_nonneg("W_evaluator", t, r)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let lo = (r - t).max(0.0);
    let hi = r + t;
    let mut sing: Vec<f64> = f.kinks().into_iter().filter(|&k| k > lo && k < hi).collect();
    if t >= r {
        sing.push(t - r);
    }
    let e = quad::integrate_singular(|l| f.value(l) * beta_inner(t, r, l, a), lo, hi, &sing, q.outer())
        .map_err(quad_err("W_evaluator"))?;
    Ok(e.value[0])
}

/// Single-integral majorant of |W|: π∫|f(λ)| |a(r+λ)−a(t)|^{−1/2} dλ over
/// [r−t, r+t] when r ≥ t and over [0, t+r] when t > r.
pub fn w_majorant<P: RadialFn + ?Sized>(
    t: f64,
    r: f64,
    f: &P,
    a: &MonotoneWeight,
    q: &QuadratureConfig,
) -> Result<f64> {
    check_nonneg("W_majorant", t, r)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let (lo, sing) = if r >= t { (r - t, vec![r - t]) } else { (0.0, vec![t - r]) };
    let e = quad::integrate_singular(
        |l| f.value(l).abs() / a.diff(r + l, t).abs().sqrt(),
        lo,
        r + t,
        &sing,
        q.outer(),
    )
    .map_err(quad_err("W_majorant"))?;
    Ok(PI * e.value[0])
}

/// ∫_b^c a′(s)((a(c)−a(s))(a(s)−a(b)))^{−1/2} ds via the Chebyshev–Gauss rule in x = a(s);
/// equals π for every admissible weight.
pub fn beta_identity_check(b: f64, c: f64, a: &MonotoneWeight, q: &QuadratureConfig) -> Result<f64> {
    if !(b >= 0.0 && b < c) {
        return Err(Error::domain("beta_identity_check", format!("need 0 <= b < c, got b = {b}, c = {c}")));
    }
    let nodes = crate::hypgeo::cg_nodes(q.nodes_inner, a.value(b), a.value(c))?;
    Ok(nodes.iter().map(|&(x, w)| w * a.deriv(a.inverse(x)) * a.inverse_deriv(x)).sum())
}

/// Rv(t) = ∫₀ᵗ ½a′(s)(a(t)−a(s))^{−1/2} v(s) ds.
///
/// The kernel is integrated directly on [0, t/2]; on [t/2, t] the substitution
/// σ² = a(t) − a(s) absorbs the endpoint singularity (½a′(s)ds/σ = −dσ).
pub fn r_operator(v: &dyn Fn(f64) -> f64, t: f64, a: &MonotoneWeight, q: &QuadratureConfig) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("r_operator", format!("t must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let sm = 0.5 * t;
    let first = quad::integrate(|s| 0.5 * a.deriv(s) / a.diff(t, s).sqrt() * v(s), &[0.0, sm], q.outer())
        .map_err(quad_err("r_operator"))?;
    let s1 = a.diff(t, sm).sqrt();
    let second = quad::integrate(|sigma| v(a.inverse_below(t, sigma)), &[0.0, s1], q.outer())
        .map_err(quad_err("r_operator"))?;
    Ok(first.value[0] + second.value[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RBoundCheck {
    /// |∂_t(Rv)(t)| by central differences.
    pub lhs: f64,
    pub rhs: f64,
    /// Bound on the differencing and quadrature error of `lhs`.
    pub slack: f64,
}

impl RBoundCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.slack
    }
}

/// Differencing step of [`dt_r_bound_check`].
pub const R_STENCIL: f64 = 1e-4;

/// Checks |∂_t(Rv)(t)| ≤ ½a′(t)(a(t)−a(0))^{−1/2}|v(t)| + R|∂_t v|(t).
pub fn dt_r_bound_check(
    v: &dyn Fn(f64) -> f64,
    dv: &dyn Fn(f64) -> f64,
    t: f64,
    a: &MonotoneWeight,
    q: &QuadratureConfig,
) -> Result<RBoundCheck> {
    let h = R_STENCIL;
    if !(t > 2.0 * h) {
        return Err(Error::domain("dt_r_bound_check", format!("t = {t} is too small for the differencing stencil")));
    }
    let plus = r_operator(v, t + h, a, q)?;
    let minus = r_operator(v, t - h, a, q)?;
    let lhs = ((plus - minus) / (2.0 * h)).abs();
    let rhs = 0.5 * a.deriv(t) / a.diff(t, 0.0).sqrt() * v(t).abs() + r_operator(&|s| dv(s).abs(), t, a, q)?;
    let quad_error = 2.0 * (q.abs_tol + q.rel_tol * plus.abs().max(minus.abs()));
    let slack = quad_error / (2.0 * h) + 1e-6 * lhs.max(1.0);
    Ok(RBoundCheck { lhs, rhs, slack })
}

/// Composite Simpson weights for `n` equal intervals of width `h`; a trailing
/// 3/8 panel handles odd `n ≥ 3`, the trapezoid rule `n = 1`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    match n {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let even = if n.is_multiple_of(2) { n } else { n - 3 };
            for k in (0..even).step_by(2) {
                w[k] += h / 3.0;
                w[k + 1] += 4.0 * h / 3.0;
                w[k + 2] += h / 3.0;
            }
            if n % 2 == 1 {
                let b = n - 3;
                for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[b + o] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    w
}

pub(crate) fn uniform_step(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let h = grid[1] - grid[0];
    grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h).then_some(h)
}

/// Duhamel term ∫₀ᵗ I(t−τ, r, F(τ, ·)) dτ with Simpson's rule on the source's time grid.
pub fn duhamel(source: &SpaceTimeField, t: f64, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_nonneg("duhamel", t, r)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let tg = source.t_grid();
    let dt = uniform_step(tg)
        .filter(|_| tg[0] == 0.0)
        .ok_or_else(|| Error::domain("duhamel", "source time grid must be uniform and start at 0"))?;
    let i = SpaceTimeField::index_of(tg, t)
        .ok_or_else(|| Error::domain("duhamel", format!("t = {t} is not a node of the source time grid")))?;
    let r_last = *source.r_grid().last().unwrap();
    if r + t > r_last * (1.0 + 1e-12) {
        return Err(Error::domain(
            "duhamel",
            format!("source grid (r <= {r_last}) does not cover the backward light cone r + t = {}", r + t),
        ));
    }
    let w = simpson_weights(i, dt);
    let mut total = 0.0;
    for a in 0..i {
        let slice = source.row_profile(a, Interp::Cubic)?;
        total += w[a] * sine_propagator(&slice, tg[i] - tg[a], r, q)?;
    }
    Ok(total)
}

/// C₀ = min over λ > τ₀/8, r > τ₀/2 of ½(tanh λ tanh r)^{1/2}, clamped to (0, 1].
pub fn lower_bound_c0(tau0: f64) -> Result<f64> {
    if !(tau0 > 0.0) {
        return Err(Error::domain("lower_bound_c0", format!("tau0 must be positive, got {tau0}")));
    }
    Ok((0.5 * ((tau0 / 8.0).tanh() * (tau0 / 2.0).tanh()).sqrt()).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBounds {
    pub large: f64,
    pub small: Option<f64>,
}

fn sqrt_sinh_integral<P: RadialFn + ?Sized>(phi: &P, lo: f64, hi: f64, q: &QuadratureConfig) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut pts = vec![lo, hi];
    pts.extend(phi.kinks().into_iter().filter(|&k| k > lo && k < hi));
    pts.sort_by(f64::total_cmp);
    let e = quad::integrate(|l| phi.value(l) * l.sinh().sqrt(), &pts, q.outer()).map_err(quad_err("lower_bound_I"))?;
    Ok(e.value[0])
}

/// Explicit lower bounds for I(t, r, φ) with φ ≥ 0:
/// `large` = C₀(sinh r)^{−1/2}∫_{max(t,r)}^{t+r} φ(λ)(sinh λ)^{1/2} dλ (needs r > τ₀/2) and
/// `small`, the same with lower limit |t−r| (needs also |t−r| > τ₀/8).
pub fn lower_bound_i<P: RadialFn + ?Sized>(
    phi: &P,
    t: f64,
    r: f64,
    tau0: f64,
    c0: f64,
    q: &QuadratureConfig,
) -> Result<LowerBounds> {
    if !(t >= 0.0) || !(tau0 > 0.0) || !(c0 > 0.0 && c0 <= 1.0) {
        return Err(Error::domain("lower_bound_I", format!("invalid arguments t = {t}, tau0 = {tau0}, C0 = {c0}")));
    }
    if !(r > 0.5 * tau0) {
        return Err(Error::domain("lower_bound_I", format!("precondition r > tau0/2 fails: r = {r}, tau0 = {tau0}")));
    }
    let pre = c0 / r.sinh().sqrt();
    let large = pre * sqrt_sinh_integral(phi, t.max(r), t + r, q)?;
    let small = if (t - r).abs() > tau0 / 8.0 {
        Some(pre * sqrt_sinh_integral(phi, (t - r).abs(), t + r, q)?)
    } else {
        None
    };
    Ok(LowerBounds { large, small })
}

/// ∫_{|r−t|}^{r+t} φ(λ) sinh λ (2cosh(r+λ))^{−1/2} dλ, a lower bound of I(t, r, φ) for φ ≥ 0.
pub fn lowerbd_integral<P: RadialFn + ?Sized>(phi: &P, t: f64, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_nonneg("lowerbd_integral", t, r)?;
    let (lo, hi) = ((r - t).abs(), r + t);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut pts = vec![lo, hi];
    pts.extend(phi.kinks().into_iter().filter(|&k| k > lo && k < hi));
    pts.sort_by(f64::total_cmp);
    let e = quad::integrate(|l| phi.value(l) * l.sinh() / (2.0 * (r + l).cosh()).sqrt(), &pts, q.outer())
        .map_err(quad_err("lowerbd_integral"))?;
    Ok(e.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialProfile;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn mean_of_one_and_degenerate_times() {
        let one = RadialProfile::constant(1.0);
        assert!((spherical_mean(&one, 1.3, 0.7, &q()).unwrap() - 1.0).abs() < 1e-12);
        let th = RadialProfile::theta(1.0).unwrap();
        assert_eq!(spherical_mean(&th, 0.0, 2.0, &q()).unwrap(), th.value(2.0));
        assert!(spherical_mean(&th, -1.0, 2.0, &q()).is_err());
    }

    #[test]
    fn propagator_of_constant_is_two_sinh() {
        let one = RadialProfile::constant(1.0);
        let v = sine_propagator(&one, 1.0, 0.4, &q()).unwrap();
        assert!((v - 2.0 * 0.5f64.sinh()).abs() < 1e-9);
        assert_eq!(sine_propagator(&one, 0.0, 0.4, &q()).unwrap(), 0.0);
    }

    #[test]
    fn beta_inner_matches_chebyshev_rule() {
        let a = MonotoneWeight::two_cosh();
        let (t, r, l): (f64, f64, f64) = (2.0, 0.7, 0.9);
        let lo = (r - l).abs();
        let hi = t.min(r + l);
        let m = a.value(r + l).max(a.value(t));
        let nodes = crate::hypgeo::cg_nodes(4000, a.value(lo), a.value(hi)).unwrap();
        let cg: f64 = nodes.iter().map(|&(x, w)| w / (m - x).sqrt()).sum();
        assert!((beta_inner(t, r, l, &a) - cg).abs() < 1e-6 * cg);
    }

    #[test]
    fn elliptic_route_reproduces_constant_data() {
        let a = MonotoneWeight::two_cosh();
        let f = |l: f64| l.sinh();
        for &(t, r) in &[(1.0, 0.7), (1.0, 0.0), (0.5, 2.0), (3.0, 1.0)] {
            let w = w_evaluator(t, r, &f, &a, &QuadratureConfig::precise()).unwrap();
            assert!((w / PI - 2.0 * (0.5 * t).sinh()).abs() < 1e-9, "t={t} r={r} got {}", w / PI);
        }
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for n in 1..9 {
            let h = 0.3;
            let w = simpson_weights(n, h);
            let approx: f64 = w.iter().enumerate().map(|(k, wk)| wk * (k as f64 * h).powi(if n == 1 { 1 } else { 3 })).sum();
            let l = n as f64 * h;
            let exact = if n == 1 { l * l / 2.0 } else { l.powi(4) / 4.0 };
            assert!((approx - exact).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn r_operator_constant() {
        let a = MonotoneWeight::two_cosh();
        let v = r_operator(&|_| 1.0, 1.0, &a, &q()).unwrap();
        assert!((v - 2.0 * 0.5f64.sinh()).abs() < 1e-10);
        assert_eq!(r_operator(&|_| 0.0, 1.0, &a, &q()).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_preconditions() {
        let phi = RadialProfile::indicator(1.0, 3.0).unwrap();
        assert!(lower_bound_i(&phi, 2.0, 0.4, 1.0, 0.1, &q()).is_err());
        let lb = lower_bound_i(&phi, 1.5, 1.5, 1.0, 0.1, &q()).unwrap();
        assert!(lb.small.is_none());
        let c0 = lower_bound_c0(1.0).unwrap();
        assert!(c0 > 0.0 && c0 <= 1.0);
    }
}
