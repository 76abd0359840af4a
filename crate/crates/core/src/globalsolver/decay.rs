use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::hypgeo::{k_factor, log_cosh, QuadratureConfig};
use crate::meanprop::linear_solution;
use crate::profile::RadialFn;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFitReport {
    pub slope_r: f64,
    pub slope_tr: f64,
    pub sup_weighted: f64,
    pub fit_window: String,
}

/// u⁰ = ∂_t I(u₀) + I(u₁) sampled on the product grid.
pub fn linear_field<P: RadialFn + ?Sized, Q: RadialFn + ?Sized>(
    u0: &P,
    u1: &Q,
    t_grid: Vec<f64>,
    r_grid: Vec<f64>,
    q: &QuadratureConfig,
) -> Result<SpaceTimeField> {
    SpaceTimeField::try_from_fn(t_grid, r_grid, |t, r| linear_solution(u0, u1, t, r, q))
}

fn slope(pts: &[(f64, f64)], what: &str) -> Result<f64> {
    if pts.len() < 4 {
        return Err(Error::Fit(format!("{what}: only {} usable points, need at least 4", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit(format!("{what}: degenerate abscissae")));
    }
    Ok(sxy / sxx)
}

/// Fits ln|u| along the ray t − r = 1 (r ≥ 2) and along t − r ≥ 1 at the
/// grid radius nearest to half the reachable range; zeros are skipped.
pub fn decay_fit(field: &SpaceTimeField, k: f64) -> Result<DecayFitReport> {
    if !(k > 0.0) {
        return Err(Error::domain("decay_fit", format!("k must be positive, got {k}")));
    }
    let tg = field.t_grid();
    let rg = field.r_grid();
    let mut ray = Vec::new();
    for (i, &t) in tg.iter().enumerate() {
        for (j, &r) in rg.iter().enumerate() {
            let v = field.get(i, j).abs();
            if (t - r - 1.0).abs() <= 1e-9 && r >= 2.0 && v > 0.0 {
                ray.push((r, v.ln()));
            }
        }
    }
    let slope_r = slope(&ray, "slope along t - r = 1")?;

    let reach = tg.last().copied().unwrap_or(0.0).min(rg.last().copied().unwrap_or(0.0));
    let jf = rg
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - reach / 2.0).abs().total_cmp(&(b.1 - reach / 2.0).abs()))
        .map(|(j, _)| j)
        .ok_or_else(|| Error::Fit("empty radial grid".into()))?;
    let r_fix = rg[jf];
    let col: Vec<(f64, f64)> = tg
        .iter()
        .enumerate()
        .filter(|&(i, &t)| t - r_fix >= 1.0 - 1e-9 && field.get(i, jf) != 0.0)
        .map(|(i, &t)| (t - r_fix, field.get(i, jf).abs().ln()))
        .collect();
    let slope_tr = slope(&col, "slope in t - r")?;

    let mut sup = 0.0f64;
    for (t, r, v) in field.iter() {
        if v != 0.0 {
            let w = (0.5 * log_cosh(r) + 0.5 * log_cosh(t - r)).exp() / k_factor(t - r, k)?;
            sup = sup.max(v.abs() * w);
        }
    }
    Ok(DecayFitReport {
        slope_r,
        slope_tr,
        sup_weighted: sup,
        fit_window: format!("ray t-r=1 with r>=2 ({} pts); r={r_fix} with t-r>=1 ({} pts)", ray.len(), col.len()),
    })
}
