//! Scalar kernels, data envelopes, weights and quadrature rules.

pub mod quad;

use crate::error::{Error, Result};
use quad::Tolerance;
use std::f64::consts::{LN_2, PI};

/// Spectral shift exponent ρ = (n−1)/2 for n = 2.
pub const RHO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    k: f64,
}

impl EnvelopeParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::domain("EnvelopeParams", format!("k must be positive, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn rho(&self) -> f64 {
        RHO
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub h: f64,
    pub n_h: f64,
}

impl WeightParams {
    pub fn new(h: f64, n_h: f64) -> Result<Self> {
        if !(h > 0.0) || !(n_h > 0.0) {
            return Err(Error::domain("WeightParams", format!("need h > 0 and N_h > 0, got h = {h}, N_h = {n_h}")));
        }
        Ok(Self { h, n_h })
    }
}

/// Panel budgets and tolerances for the adaptive singular-integral rules.
///
/// `nodes_inner` bounds the panels of the inner (angular) integrals and
/// `nodes_outer` those of the outer (time or λ) integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub nodes_inner: usize,
    pub nodes_outer: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes_inner: 64, nodes_outer: 128, abs_tol: 1e-10, rel_tol: 1e-8 }
    }
}

impl QuadratureConfig {
    /// Tight tolerances used where a result is differenced or compared at 1e-10.
    pub fn precise() -> Self {
        Self { nodes_inner: 200, nodes_outer: 400, abs_tol: 1e-13, rel_tol: 1e-12 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_inner < 4 || self.nodes_outer < 4 {
            return Err(Error::Config(format!(
                "quadrature node counts must be >= 4 (got {}, {})",
                self.nodes_inner, self.nodes_outer
            )));
        }
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("quadrature {name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn inner(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol, self.nodes_inner)
    }

    pub(crate) fn outer(&self) -> Tolerance {
        Tolerance::new(self.abs_tol, self.rel_tol, self.nodes_outer)
    }
}

/// ln cosh x without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// ln sinh x for x > 0 without overflow.
pub fn log_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - LN_2
    }
}

/// Japanese bracket ⟨s⟩ = √(1+s²).
pub fn japanese(s: f64) -> f64 {
    (1.0 + s * s).sqrt()
}

/// ln θ_k(r) = −(k+ρ) ln cosh r.
pub fn log_theta_k(r: f64, params: EnvelopeParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain("theta_k", format!("r must be nonnegative, got {r}")));
    }
    Ok(-(params.k + RHO) * log_cosh(r))
}

/// Data envelope θ_k(r) = (cosh r)^(−k−1/2).
pub fn theta_k(r: f64, params: EnvelopeParams) -> Result<f64> {
    log_theta_k(r, params).map(f64::exp)
}

/// The factor K_k(s) of the dispersive estimate.
pub fn k_factor(s: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain("K_factor", format!("k must be positive, got {k}")));
    }
    Ok(if k < 0.5 {
        ((0.5 - k) * log_cosh(s)).exp()
    } else if k == 0.5 {
        japanese(s)
    } else {
        1.0
    })
}

pub fn log_phi_weight(t: f64, r: f64, h: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain("phi_weight", format!("r must be nonnegative, got {r}")));
    }
    let s = t - r;
    Ok(0.5 * r + 0.5 * h * (s * s).ln_1p())
}

/// Φ_h(t,r) = e^{r/2}⟨t−r⟩^h.
pub fn phi_weight(t: f64, r: f64, h: f64) -> Result<f64> {
    log_phi_weight(t, r, h).map(f64::exp)
}

/// Chebyshev–Gauss rule for ∫ g(x) ((c_hi−x)(x−c_lo))^{−1/2} dx, exact for
/// polynomials of degree < 2n.
pub fn cg_nodes(n: usize, c_lo: f64, c_hi: f64) -> Result<Vec<(f64, f64)>> {
    if n == 0 || !(c_lo < c_hi) {
        return Err(Error::domain("cg_nodes", format!("need n >= 1 and c_lo < c_hi, got n = {n}, [{c_lo}, {c_hi}]")));
    }
    let mid = 0.5 * (c_lo + c_hi);
    let half = 0.5 * (c_hi - c_lo);
    let w = PI / n as f64;
    Ok((1..=n)
        .map(|i| {
            let th = (2 * i - 1) as f64 * PI / (2 * n) as f64;
            (mid + half * th.cos(), w)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_examples() {
        let one = EnvelopeParams::new(1.0).unwrap();
        let half = EnvelopeParams::new(0.5).unwrap();
        assert_eq!(theta_k(0.0, one).unwrap(), 1.0);
        assert_eq!(theta_k(0.0, half).unwrap(), 1.0);
        assert!((theta_k(2.0, half).unwrap() - 1.0 / 2f64.cosh()).abs() < 1e-15);
        assert!(theta_k(-1.0, one).is_err());
        assert!(EnvelopeParams::new(0.0).is_err());
    }

    #[test]
    fn k_factor_branches() {
        assert_eq!(k_factor(0.0, 0.25).unwrap(), 1.0);
        assert_eq!(k_factor(3.0, 1.0).unwrap(), 1.0);
        assert!((k_factor(1.0, 0.5).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((k_factor(2.0, 0.25).unwrap() - 2f64.cosh().powf(0.25)).abs() < 1e-14);
        assert!(k_factor(1.0, 0.0).is_err());
    }

    #[test]
    fn phi_weight_examples() {
        assert_eq!(phi_weight(0.0, 0.0, 1.2).unwrap(), 1.0);
        assert!((phi_weight(3.0, 3.0, 1.7).unwrap() - 1.5f64.exp()).abs() < 1e-14);
        assert!((phi_weight(2.0, 1.0, 2.0).unwrap() - 2.0 * 0.5f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn log_hyperbolics_match_direct() {
        for &x in &[1e-3, 0.5, 1.0, 3.0, 20.0, 300.0] {
            assert!((log_cosh(x) - x.cosh().ln()).abs() < 1e-14 * x.max(1.0));
            assert!((log_sinh(x) - x.sinh().ln()).abs() < 1e-14 * x.max(1.0));
        }
        assert!((log_cosh(1000.0) - (1000.0 - LN_2)).abs() < 1e-12);
        assert!(log_sinh(800.0).is_finite());
    }

    #[test]
    fn cg_examples() {
        let n1 = cg_nodes(1, -1.0, 1.0).unwrap();
        assert!((n1.iter().map(|(_, w)| w).sum::<f64>() - PI).abs() < 1e-15);
        let n4 = cg_nodes(4, 0.0, 2.0).unwrap();
        let s: f64 = n4.iter().map(|(x, w)| w * x).sum();
        assert!((s - PI).abs() < 1e-14);
        assert!(cg_nodes(3, 1.0, 1.0).is_err());
    }
}
