//! Gridded Duhamel operator.
//!
//! On a uniform grid with dt = dr = h the map source ↦ ∫₀ᵗ I(t−τ, r, F(τ,·)) dτ is
//! time-translation invariant. For every time offset d and radius index j the
//! λ-kernel of I(dh, jh, ·) is integrated against piecewise-linear hat functions
//! once, so one application costs a sparse matrix product per time level with
//! Simpson weights in τ.

use super::{beta_inner, quad_err, simpson_weights, MonotoneWeight};
use crate::error::Result;
use crate::hypgeo::quad::{integrate_singular_vec, Tolerance};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Points (i h, j h) with 0 ≤ i ≤ n_t and 0 ≤ j ≤ n_total − i: the backward
/// light cone closure of the rectangle [0, n_t h] × [0, (n_total − n_t) h].
#[derive(Debug, Clone, PartialEq)]
pub struct Trapezoid {
    h: f64,
    n_t: usize,
    n_total: usize,
    offsets: Vec<usize>,
}

impl Trapezoid {
    pub fn new(h: f64, n_t: usize, n_r: usize) -> Self {
        let n_total = n_t + n_r;
        let mut offsets = Vec::with_capacity(n_t + 2);
        let mut acc = 0;
        for i in 0..=n_t {
            offsets.push(acc);
            acc += n_total - i + 1;
        }
        offsets.push(acc);
        Self { h, n_t, n_total, offsets }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of time intervals.
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Number of radial intervals of the reported rectangle.
    pub fn n_r(&self) -> usize {
        self.n_total - self.n_t
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.n_total - i + 1
    }

    pub fn len(&self) -> usize {
        self.offsets[self.n_t + 1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offsets[i] + j
    }

    pub fn row<'a>(&self, v: &'a [f64], i: usize) -> &'a [f64] {
        &v[self.offsets[i]..self.offsets[i + 1]]
    }

    /// All points as (i, j) in storage order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.n_t).flat_map(move |i| (0..self.row_len(i)).map(move |j| (i, j)))
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.h
    }
}

#[derive(Debug, Clone, Copy)]
struct RowSpan {
    b0: usize,
    start: usize,
    len: usize,
}

#[derive(Debug, Clone)]
pub struct DuhamelOperator {
    grid: Trapezoid,
    /// `rows[row_start[d] + j]` is the kernel row for offset d ≥ 1 and radius j.
    row_start: Vec<usize>,
    rows: Vec<RowSpan>,
    weights: Vec<f64>,
    simpson: Vec<Vec<f64>>,
}

fn kernel_row(d: usize, j: usize, h: f64, tol: Tolerance) -> Result<(usize, Vec<f64>)> {
    let a = MonotoneWeight::two_cosh();
    let sigma = d as f64 * h;
    let r = j as f64 * h;
    let b0 = j.saturating_sub(d);
    let b1 = j + d;
    let star = (d >= j).then(|| (d - j) as f64 * h);
    let mut w = vec![0.0; b1 - b0 + 1];
    for b in b0..b1 {
        let (l0, l1) = (b as f64 * h, (b + 1) as f64 * h);
        let sing: Vec<f64> = star.into_iter().filter(|&s| s == l0 || s == l1).collect();
        let e = integrate_singular_vec(
            |l| {
                let k = l.sinh() * beta_inner(sigma, r, l, &a) / PI;
                [k * (l1 - l) / h, k * (l - l0) / h]
            },
            l0,
            l1,
            &sing,
            tol,
        )
        .map_err(quad_err("duhamel kernel"))?;
        w[b - b0] += e.value[0];
        w[b + 1 - b0] += e.value[1];
    }
    Ok((b0, w))
}

impl DuhamelOperator {
    pub fn new(grid: Trapezoid) -> Result<Self> {
        let h = grid.h();
        let tol = Tolerance::new(1e-14, 1e-10, 200);
        let mut keys = Vec::new();
        let mut row_start = vec![0; grid.n_t() + 1];
        for d in 1..=grid.n_t() {
            row_start[d] = keys.len();
            for j in 0..grid.row_len(d) {
                keys.push((d, j));
            }
        }
        let built: Vec<(usize, Vec<f64>)> =
            keys.par_iter().map(|&(d, j)| kernel_row(d, j, h, tol)).collect::<Result<_>>()?;
        let mut rows = Vec::with_capacity(built.len());
        let mut weights = Vec::new();
        for (b0, w) in built {
            rows.push(RowSpan { b0, start: weights.len(), len: w.len() });
            weights.extend(w);
        }
        let simpson = (0..=grid.n_t()).map(|i| simpson_weights(i, h)).collect();
        Ok(Self { grid, row_start, rows, weights, simpson })
    }

    pub fn grid(&self) -> &Trapezoid {
        &self.grid
    }

    /// Kernel weights of I(d h, j h, ·) against the hat functions starting at index `b0`.
    pub fn kernel(&self, d: usize, j: usize) -> (usize, &[f64]) {
        let s = self.rows[self.row_start[d] + j];
        (s.b0, &self.weights[s.start..s.start + s.len])
    }

    /// Applies the Duhamel map to a source stored on the trapezoid.
    pub fn apply(&self, src: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        assert_eq!(src.len(), g.len(), "source does not live on the operator's grid");
        let rows: Vec<Vec<f64>> = (0..=g.n_t())
            .into_par_iter()
            .map(|i| {
                let mut out = vec![0.0; g.row_len(i)];
                let w = &self.simpson[i];
                for a in 0..i {
                    let wa = w[a];
                    if wa == 0.0 {
                        continue;
                    }
                    let s = g.row(src, a);
                    for (j, o) in out.iter_mut().enumerate() {
                        let (b0, k) = self.kernel(i - a, j);
                        let dot: f64 = k.iter().zip(&s[b0..b0 + k.len()]).map(|(x, y)| x * y).sum();
                        *o += wa * dot;
                    }
                }
                out
            })
            .collect();
        rows.concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_layout() {
        let g = Trapezoid::new(0.5, 2, 3);
        assert_eq!(g.row_len(0), 6);
        assert_eq!(g.row_len(2), 4);
        assert_eq!(g.len(), 6 + 5 + 4);
        assert_eq!(g.index(1, 0), 6);
        assert_eq!(g.points().count(), g.len());
    }

    #[test]
    fn constant_source_gives_closed_form() {
        let g = Trapezoid::new(0.1, 10, 5);
        let op = DuhamelOperator::new(g.clone()).unwrap();
        let out = op.apply(&vec![1.0; g.len()]);
        for i in 0..=10 {
            let t = g.t(i);
            let exact = 4.0 * ((0.5 * t).cosh() - 1.0);
            for j in 0..g.row_len(i) {
                let v = out[g.index(i, j)];
                assert!((v - exact).abs() < 2e-6, "i={i} j={j} got {v} want {exact}");
            }
        }
    }

    #[test]
    fn kernel_rows_integrate_constants() {
        let g = Trapezoid::new(0.05, 8, 8);
        let op = DuhamelOperator::new(g).unwrap();
        for d in 1..=8 {
            let sigma = d as f64 * 0.05;
            for j in [0, 1, 3, 8] {
                let s: f64 = op.kernel(d, j).1.iter().sum();
                assert!((s - 2.0 * (0.5 * sigma).sinh()).abs() < 1e-10, "d={d} j={j}");
            }
        }
    }
}
