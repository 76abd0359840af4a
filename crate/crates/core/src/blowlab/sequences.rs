use super::BlowupParams;
use crate::error::{Error, Result};

/// Area coefficient and (α, β) Jacobian in c_{l+1} = c_l·C₀δ₀·(1/8)·(1/4).
pub const AREA_FACTOR: f64 = 0.125;
pub const JACOBIAN_FACTOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostEntry {
    pub l: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Multiplier taking c_{l−1} to c_l (for l = 1, c_1/c₀).
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostSequence {
    pub entries: Vec<BoostEntry>,
    pub l0: u32,
    pub a0: f64,
}

impl BoostSequence {
    pub fn last(&self) -> &BoostEntry {
        self.entries.last().expect("boost sequence is never empty")
    }
}

/// l₀ = ⌊2/(3−p)⌋ + 1 and A₀ = l₀(3−p) − 2.
pub fn boost_exponents(p: f64) -> Result<(u32, f64)> {
    if !(p > 1.0 && p < 3.0) {
        return Err(Error::domain("boost_sequence", format!("p must lie in (1, 3), got {p}")));
    }
    let l0 = (2.0 / (3.0 - p)).floor() as u32 + 1;
    Ok((l0, l0 as f64 * (3.0 - p) - 2.0))
}

/// a_l = 2l − 2, b_l = (p − 1)l for l = 1..l₀ with c_1 = min(c₀, τ₀C₀δ₀c₀/4) and
/// c_{l+1} = c_l·C₀δ₀/32.
pub fn boost_sequence(params: &BlowupParams) -> Result<BoostSequence> {
    let (l0, a0) = boost_exponents(params.p)?;
    let step = params.c_lower * params.delta0 * AREA_FACTOR * JACOBIAN_FACTOR;
    let c1 = params.c0.min(0.25 * params.tau0 * params.c_lower * params.delta0 * params.c0);
    let mut entries = Vec::with_capacity(l0 as usize);
    let (mut a, mut b, mut c) = (0.0, params.p - 1.0, c1);
    entries.push(BoostEntry { l: 1, a, b, c, factor: c1 / params.c0 });
    for l in 2..=l0 {
        a += 2.0;
        b += params.p - 1.0;
        c *= step;
        entries.push(BoostEntry { l, a, b, c, factor: step });
    }
    Ok(BoostSequence { entries, l0, a0 })
}

/// The boosted lower bound cε r(sinh r)^{−1/2}(t + r + ln 1/(cε))^{−b}(t − r)^a.
pub fn boosted_bound(c: f64, eps: f64, a: f64, b: f64, t: f64, r: f64) -> f64 {
    if c == 0.0 || !(r > 0.0) || !(t > r) {
        return 0.0;
    }
    (ln_boosted(c, eps, a, b, t, r)).exp()
}

fn ln_boosted(c: f64, eps: f64, a: f64, b: f64, t: f64, r: f64) -> f64 {
    let big_l = -(c * eps).ln();
    (c * eps).ln() + r.ln() - 0.5 * crate::hypgeo::log_sinh(r) - b * (t + r + big_l).ln() + a * (t - r).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohnEntry {
    pub m: u32,
    pub a: f64,
    pub b: f64,
    pub log_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JohnSequence {
    pub q: f64,
    pub entries: Vec<JohnEntry>,
    pub e: f64,
    pub e_tail_bound: f64,
    /// Number of summed series terms.
    pub e_terms: usize,
}

const E_MAX_TERMS: usize = 10_000;

/// Series E = ln D₀ − Σ_j (2 ln(j+1) + 2j ln q − ln(C₀δ₀/4))/q^{j+1}, truncated once
/// a term drops below 1e-16 of the partial sum. The omitted tail is bounded by
/// q^{−(J+2)}(n_{J+1}q/(q−1) + s q/(q−1)²) with s = 2/(J+1) + 2 ln q, because the
/// numerators n_j grow by at most s per step.
pub fn e_constant(log_d0: f64, q: f64, c_lower: f64, delta0: f64) -> Result<(f64, f64, usize)> {
    if !(q > 1.0) {
        return Err(Error::domain("john_recursion", format!("q must exceed 1 for the series to converge, got {q}")));
    }
    if !(c_lower * delta0 > 0.0) {
        return Err(Error::domain("john_recursion", "C0*delta0 must be positive"));
    }
    let lq = q.ln();
    let kappa = -(0.25 * c_lower * delta0).ln();
    let numer = |j: usize| 2.0 * ((j + 1) as f64).ln() + 2.0 * j as f64 * lq + kappa;
    let mut sum = 0.0;
    let mut qpow = q;
    let mut j = 0;
    loop {
        let term = numer(j) / qpow;
        sum += term;
        if (term.abs() < 1e-16 * sum.abs().max(1.0) && j > 0) || j + 1 >= E_MAX_TERMS {
            break;
        }
        j += 1;
        qpow *= q;
    }
    let s = 2.0 / (j + 1) as f64 + 2.0 * lq;
    let tail = (numer(j + 1).max(0.0) * q / (q - 1.0) + s * q / (q - 1.0).powi(2)) / (qpow * q);
    Ok((log_d0 - sum, tail, j + 1))
}

/// A_{m+1} = qA_m, B_{m+1} = qB_m + 2, ln D_{m+1} = ln(C₀δ₀) + q ln D_m − 2 ln B_{m+1},
/// all from B₀ = 0.
pub fn john_recursion(a0: f64, d0: f64, q: f64, c_lower: f64, delta0: f64, m_max: u32) -> Result<JohnSequence> {
    if !(d0 > 0.0) {
        return Err(Error::domain("john_recursion", format!("D0 must be positive, got {d0}")));
    }
    john_recursion_log(a0, d0.ln(), q, c_lower, delta0, m_max)
}

/// As [`john_recursion`] with ln D₀ given directly.
pub fn john_recursion_log(a0: f64, log_d0: f64, q: f64, c_lower: f64, delta0: f64, m_max: u32) -> Result<JohnSequence> {
    let (e, e_tail_bound, e_terms) = e_constant(log_d0, q, c_lower, delta0)?;
    let lc = (c_lower * delta0).ln();
    let mut entries = Vec::with_capacity(m_max as usize + 1);
    let (mut a, mut b, mut ld) = (a0, 0.0, log_d0);
    entries.push(JohnEntry { m: 0, a, b, log_d: ld });
    for m in 1..=m_max {
        a *= q;
        b = b * q + 2.0;
        ld = lc + q * ld - 2.0 * b.ln();
        entries.push(JohnEntry { m, a, b, log_d: ld });
    }
    Ok(JohnSequence { q, entries, e, e_tail_bound, e_terms })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBound {
    /// max of the three thresholds, T = exp(log_t).
    pub t: f64,
    pub log_t: f64,
    /// ln of the positivity, (1/(cε))^{1/A₀} and (1/(δ₀c̃ε))^{1/A₀} thresholds.
    pub log_thresholds: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInputs {
    pub a0: f64,
    pub e: f64,
    pub q: f64,
    pub tau0: f64,
    pub c: f64,
    pub epsilon: f64,
    pub delta0: f64,
    pub tilde_c: f64,
}

/// Smallest T with E + A₀ ln T + (2/(q−1)) ln(τ₀/2) > 0, T > (1/(cε))^{1/A₀}
/// and c̃εT^{A₀} > 1/δ₀ (the infimum, computed in the log domain).
pub fn blowup_time_bound(x: &TimeInputs) -> Result<TimeBound> {
    if !(x.a0 > 0.0 && x.q > 1.0 && x.tau0 > 0.0) {
        return Err(Error::domain("blowup_time_bound", "need A0 > 0, q > 1, tau0 > 0"));
    }
    if !(x.c > 0.0 && x.epsilon > 0.0 && x.delta0 > 0.0 && x.tilde_c > 0.0) {
        return Err(Error::domain("blowup_time_bound", "c, epsilon, delta0 and tilde_c must be positive"));
    }
    let l1 = (-x.e - 2.0 / (x.q - 1.0) * (0.5 * x.tau0).ln()) / x.a0;
    let l2 = -(x.c * x.epsilon).ln() / x.a0;
    let l3 = -(x.delta0 * x.tilde_c * x.epsilon).ln() / x.a0;
    let log_t = l1.max(l2).max(l3);
    Ok(TimeBound { t: log_t.exp(), log_t, log_thresholds: [l1, l2, l3] })
}

/// ln c̃(T) = min over a 20×20 sample of Y of ln(bound/(εt^{A₀})) for the final
/// boost entry.
pub fn log_tilde_c(boost: &BoostSequence, eps: f64, tau0: f64, log_t: f64) -> f64 {
    let e = boost.last();
    let big_t = log_t.exp();
    let n = 20;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let r = 0.5 * tau0 * (1.0 + (i as f64 + 0.5) / n as f64);
        for k in 0..n {
            let t = big_t + (tau0 - r) * (k as f64 + 0.5) / n as f64;
            let v = ln_boosted(e.c, eps, e.a, e.b, t, r) - eps.ln() - boost.a0 * t.ln();
            best = best.min(v);
        }
    }
    best
}
