use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// a(s) = 2 cosh s.
    TwoCosh,
    /// a(s) = s².
    Square,
}

/// An even C¹ weight `a` with a′(s) > 0 for s > 0, as required by the R-operator
/// and the double-integral estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotoneWeight {
    kind: WeightKind,
}

impl MonotoneWeight {
    /// Builds the weight after checking its two structural conditions on a grid.
    pub fn new(kind: WeightKind) -> Result<Self> {
        let w = Self { kind };
        w.verify()?;
        Ok(w)
    }

    pub fn two_cosh() -> Self {
        Self { kind: WeightKind::TwoCosh }
    }

    pub fn square() -> Self {
        Self { kind: WeightKind::Square }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    fn verify(&self) -> Result<()> {
        for i in 1..=40 {
            let t = 0.25 * i as f64;
            if !(self.deriv(t) > 0.0) {
                return Err(Error::domain("MonotoneWeight", format!("a'({t}) is not positive")));
            }
            let mut prev = f64::INFINITY;
            for k in 0..64 {
                let s = t * k as f64 / 64.0;
                let g = (self.deriv(t) - self.deriv(s)) / self.diff(t, s).sqrt();
                if g > prev * (1.0 + 1e-12) {
                    return Err(Error::domain(
                        "MonotoneWeight",
                        format!("(a'(t)-a'(s))/sqrt(a(t)-a(s)) increases in s at t = {t}, s = {s}"),
                    ));
                }
                prev = g;
            }
        }
        Ok(())
    }

    pub fn value(&self, s: f64) -> f64 {
        match self.kind {
            WeightKind::TwoCosh => 2.0 * s.cosh(),
            WeightKind::Square => s * s,
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match self.kind {
            WeightKind::TwoCosh => 2.0 * s.sinh(),
            WeightKind::Square => 2.0 * s,
        }
    }

    /// a(u) − a(v) without cancellation, for u, v ≥ 0.
    pub fn diff(&self, u: f64, v: f64) -> f64 {
        match self.kind {
            WeightKind::TwoCosh => 4.0 * (0.5 * (u + v)).sinh() * (0.5 * (u - v)).sinh(),
            WeightKind::Square => (u - v) * (u + v),
        }
    }

    /// s ≥ 0 with a(s) = x, for x ≥ a(0).
    pub fn inverse(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::TwoCosh => (0.5 * x).max(1.0).acosh(),
            WeightKind::Square => x.max(0.0).sqrt(),
        }
    }

    /// d(a⁻¹)/dx at x > a(0).
    pub fn inverse_deriv(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::TwoCosh => 1.0 / ((x - 2.0) * (x + 2.0)).sqrt(),
            WeightKind::Square => 0.5 / x.sqrt(),
        }
    }

    /// s ∈ [0, t] with a(t) − a(s) = σ², for 0 ≤ σ ≤ √(a(t) − a(0)).
    pub fn inverse_below(&self, t: f64, sigma: f64) -> f64 {
        match self.kind {
            WeightKind::TwoCosh => {
                let sm = 2.0 * (0.5 * t).sinh();
                let y = ((sm - sigma) * (sm + sigma) * 0.5).max(0.0);
                (y + (y * (y + 2.0)).sqrt()).ln_1p()
            }
            WeightKind::Square => ((t - sigma) * (t + sigma)).max(0.0).sqrt(),
        }
    }
}
