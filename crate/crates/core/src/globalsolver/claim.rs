use crate::error::{Error, Result};
use crate::hypgeo::{log_cosh, quad, QuadratureConfig};
use crate::meanprop::{quad_err, w_evaluator, MonotoneWeight};

/// (∫₀ᵗ W(t−τ, r, f_τ) dτ, same times (cosh r)^{1/2}⟨t−r⟩^h) with
/// f_τ(λ) = (ln 1/ε + λ)^{1−p} sinh λ ⟨τ−λ⟩^{−h} (cosh λ)^{−1/2}.
pub fn claim_bound_check(p: f64, h: f64, epsilon: f64, t: f64, r: f64, q: &QuadratureConfig) -> Result<(f64, f64)> {
    if !(p > 3.0 && h > 1.0 && h < p - 2.0) {
        return Err(Error::domain("claim_bound_check", format!("need p > 3 and 1 < h < p - 2, got p = {p}, h = {h}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain("claim_bound_check", format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(t >= 0.0 && r >= 0.0) {
        return Err(Error::domain("claim_bound_check", format!("need t, r >= 0, got t = {t}, r = {r}")));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let big_l = (1.0 / epsilon).ln();
    let a = MonotoneWeight::two_cosh();
    let mut failure = None;
    let mut g = |tau: f64| {
        let f = move |l: f64| {
            (big_l + l).powf(1.0 - p) * (l.sinh() * (-0.5 * log_cosh(l)).exp()) * (1.0 + (tau - l).powi(2)).powf(-0.5 * h)
        };
        match w_evaluator(t - tau, r, &f, &a, q) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let mut pts = vec![0.0];
    if t > r && r > 0.0 {
        pts.push(t - r);
    }
    pts.push(t);
    let e = quad::integrate(&mut g, &pts, q.outer()).map_err(quad_err("claim_bound_check"));
    if let Some(err) = failure {
        return Err(err);
    }
    let value = e?.value[0];
    let weighted = value * (0.5 * log_cosh(r)).exp() * (1.0 + (t - r).powi(2)).powf(0.5 * h);
    Ok((value, weighted))
}
