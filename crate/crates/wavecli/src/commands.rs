use crate::config::{boxed, spec_of, RunConfig};
use crate::error::CliError;
use crate::output::{num, pairs, Table};
use hypwave::blowlab::{
    build_certificate, certificate_verify, escape_detector, tune_to_simulation, BlowupCertificate, CheckKind,
    data_sup,
};
use hypwave::fdoracle::fd_solve;
use hypwave::field::uniform_grid;
use hypwave::globalsolver::{decay_fit, linear_field};
use hypwave::globalsolver::SolverContext;
use hypwave::nonlin::NonlinearitySpec;
use hypwave::{Error, RadialProfile, SpaceTimeField};
use std::path::Path;

pub const DEFAULT_SEED: u64 = 0;

fn write_field(dir: &Path, name: &str, f: &SpaceTimeField) -> Result<(), CliError> {
    let mut t = Table::create(dir, name, &["t", "r", "u"])?;
    for (tt, r, u) in f.iter() {
        t.row([num(tt), num(r), num(u)])?;
    }
    t.finish()
}

fn data(cfg: &RunConfig) -> Result<(RadialProfile, RadialProfile), CliError> {
    RunConfig::require(&cfg.data, "data")?.profiles()
}

fn nonzero_spec(cfg: &RunConfig, cmd: &str) -> Result<NonlinearitySpec, CliError> {
    spec_of(RunConfig::require(&cfg.nonlinearity, "nonlinearity")?)?
        .ok_or_else(|| CliError::Config(format!("{cmd} needs a nonzero nonlinearity")))
}

/// Linear propagation by the integral representation, the FD oracle, or both.
pub fn propagate(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let (u0, u1) = data(cfg)?;
    let p = RunConfig::require(&cfg.propagate, "propagate")?;
    let tg = uniform_grid(p.t_max, p.dt)?;
    let rg = uniform_grid(p.r_max, p.dr)?;
    let fd_field = || -> Result<SpaceTimeField, CliError> {
        Ok(fd_solve(&u0, &u1, &hypwave::nonlin::ZeroNonlinearity, &cfg.fd()?)?)
    };
    match p.engine.as_str() {
        "fd" => write_field(dir, "field.csv", &fd_field()?),
        engine => {
            let integral = linear_field(&u0, &u1, tg, rg, &cfg.quadrature())?;
            write_field(dir, "field.csv", &integral)?;
            if engine == "both" {
                let fd = fd_field()?;
                let mut t = Table::create(dir, "diff.csv", &["t", "r", "u_integral", "u_fd", "abs_err", "rel_err"])?;
                for (i, &tt) in integral.t_grid().iter().enumerate() {
                    let Some(fi) = SpaceTimeField::index_of(fd.t_grid(), tt) else { continue };
                    for (j, &r) in integral.r_grid().iter().enumerate() {
                        let Some(fj) = SpaceTimeField::index_of(fd.r_grid(), r) else { continue };
                        let (a, b) = (integral.get(i, j), fd.get(fi, fj));
                        let scale = a.abs().max(b.abs());
                        let rel = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
                        t.row([num(tt), num(r), num(a), num(b), num((a - b).abs()), num(rel)])?;
                    }
                }
                t.finish()?;
            }
            Ok(())
        }
    }
}

/// Picard iteration for the nonlinear problem at the configured ε.
pub fn solve(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let (u0, u1) = data(cfg)?;
    let spec = spec_of(RunConfig::require(&cfg.nonlinearity, "nonlinearity")?)?;
    let sc = cfg.solver()?;
    let ctx = SolverContext::new(&u0, &u1, spec.as_ref(), &sc, &cfg.quadrature())?;
    let write_history = |h: &[f64]| -> Result<(), CliError> {
        let mut t = Table::create(dir, "history.csv", &["iteration", "diff_norm"])?;
        for (i, d) in h.iter().enumerate() {
            t.row([(i + 1).to_string(), num(*d)])?;
        }
        t.finish()
    };
    let write_report = |converged: bool, norm: f64| -> Result<(), CliError> {
        let mut t = Table::create(dir, "report.csv", &["epsilon", "converged", "weighted_norm", "n_h", "a"])?;
        t.row([num(sc.epsilon), converged.to_string(), num(norm), num(ctx.n_h()), num(ctx.a_const())])?;
        t.finish()
    };
    match ctx.picard(sc.epsilon) {
        Ok(run) => {
            write_history(&run.history)?;
            write_report(true, ctx.norm(&run.values))?;
            write_field(dir, "field.csv", &ctx.crop(&run.values)?)
        }
        Err(e) => {
            let history = match &e {
                Error::NonConvergence { history } => history.clone(),
                _ => Vec::new(),
            };
            write_history(&history)?;
            write_report(false, f64::NAN)?;
            Err(CliError::Numeric(format!("picard_solve: {e}")))
        }
    }
}

/// Linear solution on a product grid and its decay-rate fit.
pub fn decay(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let (u0, u1) = data(cfg)?;
    let d = RunConfig::require(&cfg.decay, "decay")?;
    let field = linear_field(&u0, &u1, uniform_grid(d.t_max, d.step)?, uniform_grid(d.r_max, d.step)?, &cfg.quadrature())?;
    let rep = decay_fit(&field, d.k).map_err(|e| CliError::Numeric(format!("decay_fit: {e}")))?;
    let mut t = Table::create(dir, "decay.csv", &["k", "slope_r", "slope_tr", "sup_weighted", "fit_window"])?;
    t.row([num(d.k), num(rep.slope_r), num(rep.slope_tr), num(rep.sup_weighted), rep.fit_window])?;
    t.finish()
}

/// ε-threshold bisection and a contraction probe at the resulting ε.
pub fn contraction(cfg: &RunConfig, dir: &Path, seed: u64) -> Result<(), CliError> {
    let spec = nonzero_spec(cfg, "contraction")?;
    let sc = cfg.solver()?;
    let c = RunConfig::require(&cfg.contraction, "contraction")?;
    let (u0, u1) = match &cfg.data {
        Some(d) => d.profiles()?,
        None => (RadialProfile::zero(), RadialProfile::theta(sc.k)?),
    };
    let ctx = SolverContext::new(&u0, &u1, Some(&spec), &sc, &cfg.quadrature())?;
    let th = ctx.epsilon_threshold(c.pairs, seed, c.target)?;
    let cap = 1.0 / (2.0 * ctx.n_h() * ctx.a_const());
    let mut t = Table::create(dir, "threshold.csv", &["step", "epsilon", "max_ratio", "accepted"])?;
    for (i, &(eps, m)) in th.probes.iter().enumerate() {
        t.row([i.to_string(), num(eps), num(m), (m <= c.target && eps <= cap).to_string()])?;
    }
    t.finish()?;
    let eps = c.epsilon.unwrap_or(th.epsilon);
    let rep = ctx.contraction_probe(eps, c.pairs, seed);
    let mut t = Table::create(dir, "contraction.csv", &["pair", "epsilon", "ratio"])?;
    for (i, r) in rep.ratios.iter().enumerate() {
        t.row([i.to_string(), num(eps), num(*r)])?;
    }
    t.finish()?;
    pairs(
        dir,
        "summary.csv",
        &[
            ("seed", seed.to_string()),
            ("target", num(c.target)),
            ("epsilon_threshold", num(th.epsilon)),
            ("max_ratio_at_threshold", num(th.max_ratio)),
            ("probe_epsilon", num(eps)),
            ("probe_max_ratio", num(rep.max_ratio)),
            ("sampled_pairs", rep.sampled_pairs.to_string()),
            ("skipped_pairs", rep.skipped.to_string()),
            ("n_h", num(ctx.n_h())),
            ("a", num(ctx.a_const())),
        ],
    )
}

fn regime(p: f64) -> &'static str {
    if p < 3.0 {
        "blow-up"
    } else if p == 3.0 {
        "critical, no theory"
    } else {
        "global existence"
    }
}

fn certificate(cfg: &RunConfig) -> Result<(BlowupCertificate, RadialProfile), CliError> {
    let spec = nonzero_spec(cfg, "blow-up")?;
    let b = RunConfig::require(&cfg.blowup, "blowup")?;
    if !(spec.p < 3.0) {
        return Err(CliError::Config(format!("a blow-up certificate needs p < 3, got {}", spec.p)));
    }
    let u1 = RadialProfile::bump(b.tau0)?;
    let cert = build_certificate(&u1, spec.p, spec.q, spec.delta0, b.tau0, b.epsilon, &cfg.quadrature())
        .map_err(|e| CliError::Numeric(format!("build_certificate: {e}")))?;
    Ok((cert, u1))
}

fn certificate_rows(c: &BlowupCertificate) -> Vec<(&'static str, String)> {
    let p = &c.params;
    vec![
        ("regime", regime(p.p).to_string()),
        ("p", num(p.p)),
        ("q", num(p.q)),
        ("tau0", num(p.tau0)),
        ("epsilon", num(p.epsilon)),
        ("delta0", num(p.delta0)),
        ("C0", num(p.c_lower)),
        ("c0", num(p.c0)),
        ("c0_found", num(c.c0_found)),
        ("l0", c.boost.l0.to_string()),
        ("A0", num(c.boost.a0)),
        ("tilde_c", num(c.tilde_c)),
        ("E", num(c.john.e)),
        ("E_tail_bound", num(c.john.e_tail_bound)),
        ("E_terms", c.john.e_terms.to_string()),
        ("log_T", num(c.time.log_t)),
        ("T", num(c.time.t)),
    ]
}

/// Boost and John sequences, the blow-up time bound and an FD escape run.
pub fn blowup(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let spec = nonzero_spec(cfg, "blow-up")?;
    let b = RunConfig::require(&cfg.blowup, "blowup")?;
    let mut summary = vec![("regime", regime(spec.p).to_string()), ("p", num(spec.p))];
    if spec.p < 3.0 {
        let (cert, _) = certificate(cfg)?;
        let mut t = Table::create(dir, "boost.csv", &["l", "a", "b", "c", "factor"])?;
        for e in &cert.boost.entries {
            t.row([e.l.to_string(), num(e.a), num(e.b), num(e.c), num(e.factor)])?;
        }
        t.finish()?;
        let mut t = Table::create(dir, "john.csv", &["m", "a", "b", "log_d"])?;
        for e in cert.john.entries.iter().take(b.m_max as usize + 1) {
            t.row([e.m.to_string(), num(e.a), num(e.b), num(e.log_d)])?;
        }
        t.finish()?;
        pairs(dir, "sequences.csv", &certificate_rows(&cert))?;
        summary.push(("T", num(cert.time.t)));
    } else {
        let mut rows = vec![("regime", regime(spec.p).to_string()), ("p", num(spec.p))];
        rows.push(("q", num(spec.q)));
        pairs(dir, "sequences.csv", &rows)?;
    }
    if cfg.fd.is_some() {
        let fd = cfg.fd()?;
        let u1 = RadialProfile::bump(b.tau0)?.scaled(b.epsilon);
        let u0 = RadialProfile::zero();
        let threshold = b.threshold_factor * data_sup(&u0, &u1, &fd);
        let rep = escape_detector(&u0, &u1, &spec, &fd, threshold)
            .map_err(|e| CliError::Numeric(format!("escape_detector: {e}")))?;
        let mut t = Table::create(dir, "escape.csv", &["t", "sup_abs_u"])?;
        for (tt, s) in &rep.history {
            t.row([num(*tt), num(*s)])?;
        }
        t.finish()?;
        summary.push(("escape_threshold", num(rep.threshold)));
        summary.push(("t_escape", rep.t_escape.map_or_else(|| "none".to_string(), num)));
        summary.push(("unstable", rep.unstable.to_string()));
    }
    pairs(dir, "summary.csv", &summary)
}

/// Checks the certificate against an FD solution scaled by `field_scale`.
pub fn certify(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let (mut cert, u1) = certificate(cfg)?;
    let spec = nonzero_spec(cfg, "certify")?;
    let c = RunConfig::require(&cfg.certify, "certify")?;
    let eps = cert.params.epsilon;
    let sim = fd_solve(&RadialProfile::zero(), &u1.scaled(eps), &*boxed(Some(spec)), &cfg.fd()?)
        .map_err(|e| CliError::Numeric(format!("fd_solve: {e}")))?;
    if c.tune_to_simulation {
        cert = tune_to_simulation(&cert, &sim);
    }
    let field = sim.map(|v| c.field_scale * v)?;
    let rep = certificate_verify(&cert, &field);
    let mut rows = certificate_rows(&cert);
    let (fi_total, fi_bad) = rep.count(CheckKind::FirstIterate);
    let (bo_total, bo_bad) = rep.count(CheckKind::Boosted);
    rows.extend([
        ("field_scale", num(c.field_scale)),
        ("first_iterate_points", fi_total.to_string()),
        ("first_iterate_violations", fi_bad.to_string()),
        ("boosted_points", bo_total.to_string()),
        ("boosted_violations", bo_bad.to_string()),
    ]);
    let warnings = rep.warnings.join("; ");
    rows.push(("warnings", warnings));
    pairs(dir, "certificate.csv", &rows)?;
    let mut t = Table::create(dir, "violations.csv", &["t", "r", "kind", "bound", "simulated", "margin"])?;
    let mut n = 0;
    for v in rep.violations() {
        let kind = match v.kind {
            CheckKind::FirstIterate => "first_iterate",
            CheckKind::Boosted => "boosted",
        };
        t.row([num(v.t), num(v.r), kind.to_string(), num(v.bound), num(v.simulated), num(v.margin())])?;
        n += 1;
    }
    t.finish()?;
    if n > 0 {
        return Err(CliError::Certificate(n));
    }
    Ok(())
}
