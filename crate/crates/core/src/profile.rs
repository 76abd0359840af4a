//! Radial functions λ ↦ f(λ) on [0, ∞).

use crate::error::{Error, Result};
use crate::hypgeo::{log_cosh, RHO};

/// Anything that can be evaluated as a radial function.
pub trait RadialFn: Sync {
    fn value(&self, lambda: f64) -> f64;

    /// Radius beyond which the function vanishes, when known.
    fn support(&self) -> Option<f64> {
        None
    }

    /// Points where the function is not smooth; quadrature splits there.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64 + Sync> RadialFn for F {
    fn value(&self, lambda: f64) -> f64 {
        self(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Linear,
    /// Monotone piecewise cubic (Fritsch–Carlson / PCHIP slopes).
    Cubic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Zero,
    Constant(f64),
    /// θ_k(λ) = (cosh λ)^{−k−1/2}.
    Theta { k: f64 },
    /// Smooth bump equal to 1 on [τ₀, 3τ₀], supported in [τ₀/2, 7τ₀/2].
    Bump { tau0: f64 },
    /// Sharp indicator of [lo, hi].
    Indicator { lo: f64, hi: f64 },
    Sampled { lambda: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>, interp: Interp },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    kind: ProfileKind,
    scale: f64,
    support_radius: Option<f64>,
}

/// C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![d[0], d[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    let edge = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() || d0 == 0.0 {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    m[0] = edge(h[0], h[1], d[0], d[1]);
    m[n - 1] = edge(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

impl RadialProfile {
    fn closed(kind: ProfileKind, support_radius: Option<f64>) -> Self {
        Self { kind, scale: 1.0, support_radius }
    }

    pub fn zero() -> Self {
        Self::closed(ProfileKind::Zero, Some(0.0))
    }

    pub fn constant(c: f64) -> Self {
        Self::closed(ProfileKind::Constant(c), None)
    }

    pub fn theta(k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::domain("RadialProfile::theta", format!("k must be positive, got {k}")));
        }
        Ok(Self::closed(ProfileKind::Theta { k }, None))
    }

    pub fn bump(tau0: f64) -> Result<Self> {
        if !(tau0 > 0.0) {
            return Err(Error::domain("RadialProfile::bump", format!("tau0 must be positive, got {tau0}")));
        }
        Ok(Self::closed(ProfileKind::Bump { tau0 }, Some(3.5 * tau0)))
    }

    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi) {
            return Err(Error::domain("RadialProfile::indicator", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self::closed(ProfileKind::Indicator { lo, hi }, Some(hi)))
    }

    /// Profile from samples; flat extrapolation past the last sample unless a
    /// support radius is given.
    pub fn sampled(lambda: Vec<f64>, values: Vec<f64>, interp: Interp, support_radius: Option<f64>) -> Result<Self> {
        let op = "RadialProfile::sampled";
        if lambda.len() < 2 || lambda.len() != values.len() {
            return Err(Error::domain(op, "need at least 2 samples and matching lengths"));
        }
        if lambda[0] < 0.0 || lambda.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(op, "sample abscissae must be nonnegative and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(op, "sample values must be finite"));
        }
        if let Some(s) = support_radius {
            if !(s >= 0.0) {
                return Err(Error::domain(op, "support radius must be nonnegative"));
            }
        }
        let slopes = match interp {
            Interp::Cubic => pchip_slopes(&lambda, &values),
            Interp::Linear => Vec::new(),
        };
        Ok(Self { kind: ProfileKind::Sampled { lambda, values, slopes, interp }, scale: 1.0, support_radius })
    }

    pub fn from_fn(lambda: &[f64], f: impl Fn(f64) -> f64, interp: Interp) -> Result<Self> {
        let values = lambda.iter().map(|&l| f(l)).collect();
        Self::sampled(lambda.to_vec(), values, interp, None)
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.scale *= s;
        self
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
            || match &self.kind {
                ProfileKind::Zero => true,
                ProfileKind::Constant(c) => *c == 0.0,
                ProfileKind::Sampled { values, .. } => values.iter().all(|v| *v == 0.0),
                _ => false,
            }
    }

    fn base(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Zero => 0.0,
            ProfileKind::Constant(c) => *c,
            ProfileKind::Theta { k } => (-(k + RHO) * log_cosh(x)).exp(),
            ProfileKind::Bump { tau0 } => {
                let w = 0.5 * tau0;
                if x < 2.0 * tau0 {
                    smooth_step((x - w) / w)
                } else {
                    smooth_step((3.5 * tau0 - x) / w)
                }
            }
            ProfileKind::Indicator { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileKind::Sampled { lambda, values, slopes, interp } => {
                let n = lambda.len();
                if x <= lambda[0] {
                    return values[0];
                }
                if x >= lambda[n - 1] {
                    return values[n - 1];
                }
                let i = lambda.partition_point(|&l| l <= x) - 1;
                let h = lambda[i + 1] - lambda[i];
                let s = (x - lambda[i]) / h;
                match interp {
                    Interp::Linear => values[i] + s * (values[i + 1] - values[i]),
                    Interp::Cubic => {
                        let s2 = s * s;
                        let s3 = s2 * s;
                        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                        let h10 = s3 - 2.0 * s2 + s;
                        let h01 = -2.0 * s3 + 3.0 * s2;
                        let h11 = s3 - s2;
                        h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1]
                    }
                }
            }
        }
    }
}

impl RadialFn for RadialProfile {
    fn value(&self, lambda: f64) -> f64 {
        if let Some(s) = self.support_radius {
            if lambda > s {
                return 0.0;
            }
        }
        self.scale * self.base(lambda)
    }

    fn support(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(0.0);
        }
        self.support_radius
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k = match &self.kind {
            ProfileKind::Bump { tau0 } => vec![0.5 * tau0, *tau0, 3.0 * tau0, 3.5 * tau0],
            ProfileKind::Indicator { lo, hi } => vec![*lo, *hi],
            _ => Vec::new(),
        };
        k.extend(self.support_radius);
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let b = RadialProfile::bump(1.0).unwrap();
        assert_eq!(b.value(0.4), 0.0);
        assert_eq!(b.value(1.0), 1.0);
        assert_eq!(b.value(2.0), 1.0);
        assert_eq!(b.value(3.0), 1.0);
        assert_eq!(b.value(3.6), 0.0);
        assert!((b.value(0.75) - 0.5).abs() < 1e-15);
        assert!((b.value(3.25) - 0.5).abs() < 1e-15);
        assert_eq!(b.support(), Some(3.5));
    }

    #[test]
    fn cubic_reproduces_monotone_data_without_overshoot() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let p = RadialProfile::from_fn(&x, |l| (-l).exp(), Interp::Cubic).unwrap();
        for i in 0..200 {
            let l = i as f64 * 0.0285;
            let v = p.value(l);
            assert!((v - (-l).exp()).abs() < 2e-3);
        }
        let step = RadialProfile::sampled(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.0, 1.0, 1.0], Interp::Cubic, None).unwrap();
        for i in 0..=300 {
            let v = step.value(i as f64 * 0.01);
            assert!((-1e-15..=1.0 + 1e-15).contains(&v));
        }
    }

    #[test]
    fn linear_interp_and_support() {
        let p = RadialProfile::sampled(vec![0.0, 1.0], vec![1.0, 3.0], Interp::Linear, Some(0.8)).unwrap();
        assert!((p.value(0.5) - 2.0).abs() < 1e-15);
        assert_eq!(p.value(0.9), 0.0);
        assert!(RadialProfile::sampled(vec![0.0], vec![1.0], Interp::Linear, None).is_err());
        assert!(RadialProfile::sampled(vec![1.0, 0.5], vec![1.0, 1.0], Interp::Linear, None).is_err());
    }

    #[test]
    fn scaling_is_linear() {
        let t = RadialProfile::theta(1.0).unwrap();
        let t2 = t.clone().scaled(2.0);
        assert_eq!(t2.value(1.3), 2.0 * t.value(1.3));
        assert!(RadialProfile::zero().is_zero());
        assert!(t.clone().scaled(0.0).is_zero());
    }
}
