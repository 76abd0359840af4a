use super::{SolverConfig, SolverContext};
use crate::error::{Error, Result};
use crate::hypgeo::QuadratureConfig;
use crate::nonlin::NonlinearitySpec;
use crate::profile::RadialProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const FEATURES: usize = 8;
const FLOOR: f64 = 1e-12;
const BISECTION_STEPS: usize = 20;

/// ξ(t, r) = Σ c_k cos(ω_k t + φ_k) cos(ν_k r + ψ_k) / Σ|c_k|, so |ξ| ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomField {
    terms: Vec<[f64; 5]>,
    norm: f64,
}

impl RandomField {
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        let tau = std::f64::consts::TAU;
        let terms: Vec<[f64; 5]> = (0..FEATURES)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..3.0),
                    rng.gen_range(0.0..tau),
                    rng.gen_range(0.0..3.0),
                    rng.gen_range(0.0..tau),
                ]
            })
            .collect();
        let norm = terms.iter().map(|c| c[0].abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        Self { terms, norm }
    }

    pub fn value(&self, t: f64, r: f64) -> f64 {
        self.terms.iter().map(|c| c[0] * (c[1] * t + c[2]).cos() * (c[3] * r + c[4]).cos()).sum::<f64>() / self.norm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub epsilon: f64,
    pub sampled_pairs: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub epsilon: f64,
    pub max_ratio: f64,
    /// Every probed (ε, max_ratio) in bisection order.
    pub probes: Vec<(f64, f64)>,
}

/// Seeded pairs; the same seed always yields the same fields.
pub fn sample_pairs(n_pairs: usize, seed: u64) -> Vec<(RandomField, RandomField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_pairs).map(|_| (RandomField::sample(&mut rng), RandomField::sample(&mut rng))).collect()
}

impl SolverContext {
    fn embed(&self, eps: f64, xi: &RandomField) -> Vec<f64> {
        let g = self.grid();
        let scale = 2.0 * eps * self.n_h();
        g.points().zip(self.weights()).map(|((i, j), w)| scale * xi.value(g.t(i), g.r(j)) / w).collect()
    }

    /// ‖LF(u) − LF(v)‖/‖u − v‖, or `None` when u = v on the grid.
    pub fn pair_ratio(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        let den = self.norm(&diff);
        if den == 0.0 {
            return None;
        }
        let lu = self.nonlinear_term(u);
        let lv = self.nonlinear_term(v);
        let num: Vec<f64> = lu.iter().zip(&lv).map(|(a, b)| a - b).collect();
        Some(self.norm(&num) / den)
    }

    pub fn probe_pairs(&self, eps: f64, pairs: &[(RandomField, RandomField)]) -> ContractionReport {
        let found: Vec<Option<f64>> =
            pairs.par_iter().map(|(a, b)| self.pair_ratio(&self.embed(eps, a), &self.embed(eps, b))).collect();
        let ratios: Vec<f64> = found.iter().flatten().copied().collect();
        ContractionReport {
            epsilon: eps,
            sampled_pairs: ratios.len(),
            skipped: pairs.len() - ratios.len(),
            max_ratio: ratios.iter().copied().fold(0.0, f64::max),
            ratios,
        }
    }

    pub fn contraction_probe(&self, eps: f64, n_pairs: usize, seed: u64) -> ContractionReport {
        self.probe_pairs(eps, &sample_pairs(n_pairs, seed))
    }

    /// Geometric bisection on [1e-12, 1]; returns the lower bracket end. An ε
    /// whose ball 2εN_h leaves |u| ≤ 1/A counts as failing.
    pub fn epsilon_threshold(&self, n_pairs: usize, seed: u64, target: f64) -> Result<ThresholdReport> {
        let pairs = sample_pairs(n_pairs, seed);
        let cap = 1.0 / (2.0 * self.n_h() * self.a_const());
        let mut probes = Vec::with_capacity(BISECTION_STEPS + 1);
        let floor = self.probe_pairs(FLOOR, &pairs).max_ratio;
        probes.push((FLOOR, floor));
        if !(floor <= target) {
            return Err(Error::Threshold(format!(
                "max ratio {floor} at epsilon = {FLOOR} already exceeds the target {target}"
            )));
        }
        let (mut lo, mut hi, mut lo_ratio) = (FLOOR, 1.0f64, floor);
        for _ in 0..BISECTION_STEPS {
            let mid = (lo * hi).sqrt();
            let m = self.probe_pairs(mid, &pairs).max_ratio;
            probes.push((mid, m));
            if m <= target && mid <= cap {
                lo = mid;
                lo_ratio = m;
            } else {
                hi = mid;
            }
        }
        Ok(ThresholdReport { epsilon: lo, max_ratio: lo_ratio, probes })
    }
}

fn default_context(spec: &NonlinearitySpec, cfg: &SolverConfig) -> Result<SolverContext> {
    let u1 = RadialProfile::theta(cfg.k)?;
    SolverContext::new(&RadialProfile::zero(), &u1, Some(spec), cfg, &QuadratureConfig::default())
}

/// Probe at `cfg.epsilon` with data u₀ = 0, u₁ = θ_k fixing N_h.
pub fn contraction_probe(
    spec: &NonlinearitySpec,
    cfg: &SolverConfig,
    n_pairs: usize,
    seed: u64,
) -> Result<ContractionReport> {
    Ok(default_context(spec, cfg)?.contraction_probe(cfg.epsilon, n_pairs, seed))
}

pub fn epsilon_threshold(
    spec: &NonlinearitySpec,
    cfg: &SolverConfig,
    n_pairs: usize,
    seed: u64,
    target: f64,
) -> Result<ThresholdReport> {
    default_context(spec, cfg)?.epsilon_threshold(n_pairs, seed, target)
}
