//! Independent reference evaluations built on tanh-sinh quadrature and the
//! hyperboloid model, sharing no code with the library's integrators.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh rule on [a, b]; the nodes cluster doubly exponentially at both
/// ends, so integrable endpoint singularities are handled without special care.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, level: u32) -> f64 {
    let h = 2f64.powi(-(level as i32));
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    let kmax = (4.0 / h) as i64;
    for k in -kmax..=kmax {
        let x = k as f64 * h;
        let u = 0.5 * PI * x.sinh();
        let w = 0.5 * PI * x.cosh() / u.cosh().powi(2);
        let y = u.tanh();
        // distance to the nearer endpoint, computed without cancellation
        let gap = half / (u.abs().exp() * u.cosh());
        let node = if y < 0.0 { a + gap } else { b - gap };
        if gap <= 0.0 || node <= a || node >= b {
            continue;
        }
        let v = f(node);
        if v.is_finite() {
            sum += w * v;
        }
    }
    sum * h * half
}

/// Average of f(dist(o, ·)) over the geodesic circle of radius t centred at
/// distance r from o, by the periodic trapezoid rule on the hyperboloid.
pub fn circle_average(f: impl Fn(f64) -> f64, t: f64, r: f64, n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        let psi = 2.0 * PI * (i as f64 + 0.5) / n as f64;
        // x = (cosh r, sinh r, 0); point = cosh t·x + sinh t(cos ψ·e₁ + sin ψ·e₂)
        let x0 = t.cosh() * r.cosh() + t.sinh() * psi.cos() * r.sinh();
        sum += f(x0.max(1.0).acosh());
    }
    sum / n as f64
}

/// I(t, r, φ) = 2^{−1/2} ∫₀ᵗ sinh s (cosh t − cosh s)^{−1/2} M_s φ(r) ds.
pub fn propagator(f: impl Fn(f64) -> f64 + Copy, t: f64, r: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let g = |s: f64| {
        let d = 2.0 * ((t + s) / 2.0).sinh() * ((t - s) / 2.0).sinh();
        s.sinh() / d.sqrt() * circle_average(f, s, r, 2048)
    };
    tanh_sinh(g, 0.0, t, 7) / std::f64::consts::SQRT_2
}

/// ∫∫ λ dλ dτ over the region of the (λ, τ) plane selected by `inside`, by the
/// midpoint rule on an n×n grid of the box.
pub fn region_moment(inside: impl Fn(f64, f64) -> bool, lam: (f64, f64), tau: (f64, f64), n: usize) -> f64 {
    let (dl, dt) = ((lam.1 - lam.0) / n as f64, (tau.1 - tau.0) / n as f64);
    let mut s = 0.0;
    for i in 0..n {
        let l = lam.0 + (i as f64 + 0.5) * dl;
        for k in 0..n {
            let t = tau.0 + (k as f64 + 0.5) * dt;
            if inside(l, t) {
                s += l;
            }
        }
    }
    s * dl * dt
}
