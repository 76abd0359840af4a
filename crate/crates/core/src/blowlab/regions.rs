/// Regions of the (λ, τ) plane used by the lower-bound iteration. Each variant
/// carries the parameters its inequalities need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// τ₀ < τ − λ < 2τ₀, τ + λ > 3τ₀.
    S { tau0: f64 },
    /// τ − λ > 6lτ₀, λ > τ₀/2.
    Sigma { l: u32, tau0: f64 },
    /// τ ≥ 0, τ − λ ≤ t − r, t ≤ τ + λ ≤ t + r, |t − r − τ| ≥ τ₀/8.
    R { r: f64, t: f64, tau0: f64 },
    /// R_{r,t} ∩ Σ_l with (6lτ₀ + t − r)/2 ≤ τ − λ ≤ t − r.
    T { l: u32, r: f64, t: f64, tau0: f64 },
    /// λ > τ₀/2, τ > T, τ + λ ≤ T + τ₀.
    Y { big_t: f64, tau0: f64 },
}

impl Region {
    pub fn contains(&self, lambda: f64, tau: f64) -> bool {
        let (d, s) = (tau - lambda, tau + lambda);
        match *self {
            Region::S { tau0 } => tau0 < d && d < 2.0 * tau0 && s > 3.0 * tau0,
            Region::Sigma { l, tau0 } => d > 6.0 * l as f64 * tau0 && lambda > 0.5 * tau0,
            Region::R { r, t, tau0 } => {
                tau >= 0.0 && d <= t - r && t <= s && s <= t + r && (t - r - tau).abs() >= tau0 / 8.0
            }
            Region::T { l, r, t, tau0 } => {
                Region::R { r, t, tau0 }.contains(lambda, tau)
                    && Region::Sigma { l, tau0 }.contains(lambda, tau)
                    && 0.5 * (6.0 * l as f64 * tau0 + t - r) <= d
                    && d <= t - r
            }
            Region::Y { big_t, tau0 } => lambda > 0.5 * tau0 && tau > big_t && s <= big_t + tau0,
        }
    }
}

/// (λ, τ) membership test.
pub fn region_membership(lambda: f64, tau: f64, region: Region) -> bool {
    region.contains(lambda, tau)
}

/// ½((t − r − 6lτ₀ − 3τ₀)/2)² r, clamped at 0.
///
/// Bounds the integral of λ over T^l_{r,t} in the (α, β) = (τ − λ, τ + λ)
/// measure, that is ∫∫(β − α) dα dβ over the image region.
pub fn area_lower_bound(l: u32, r: f64, t: f64, tau0: f64) -> f64 {
    let w = t - r - 6.0 * l as f64 * tau0 - 3.0 * tau0;
    if !(w > 0.0) || !(r > 0.0) {
        return 0.0;
    }
    0.5 * (0.5 * w).powi(2) * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        assert!(region_membership(1.0, 2.5, Region::S { tau0: 1.0 }));
        assert!(!region_membership(0.4, 10.0, Region::Sigma { l: 1, tau0: 1.0 }));
        assert!(!region_membership(1.0, 100.4, Region::Y { big_t: 100.0, tau0: 1.0 }));
        assert!(region_membership(0.6, 100.2, Region::Y { big_t: 100.0, tau0: 1.0 }));
    }

    #[test]
    fn area_examples() {
        assert_eq!(area_lower_bound(1, 5.0, 14.0, 1.0), 0.0);
        assert!((area_lower_bound(1, 5.0, 17.0, 1.0) - 5.625).abs() < 1e-15);
        assert_eq!(area_lower_bound(1, 5.0, 10.0, 1.0), 0.0);
    }
}
