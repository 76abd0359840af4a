//! Adaptive Gauss–Kronrod integration and the complete elliptic integral.

/// Kronrod nodes on [-1, 1] (non-negative half), Gauss nodes are the odd entries.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_panels: usize) -> Self {
        Self { abs, rel, max_panels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub panels: usize,
}

fn gk15<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> ([f64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for n in 0..N {
        k[n] = WGK[7] * fc[n];
        g[n] = WG[3] * fc[n];
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for n in 0..N {
            let s = f1[n] + f2[n];
            k[n] += WGK[i] * s;
            if i % 2 == 1 {
                g[n] += WG[i / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for n in 0..N {
        k[n] *= h;
        g[n] *= h;
        err = err.max((k[n] - g[n]).abs());
    }
    (k, err)
}

fn norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

/// Adaptive G7K15 integration of a vector-valued integrand over the partition `points`
/// (sorted, first and last entries are the limits). Returns `Err` with the best estimate
/// when the panel budget runs out.
pub fn integrate_vec<const N: usize, F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Estimate<N>, Estimate<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let zero = Estimate { value: [0.0; N], error: 0.0, panels: 0 };
    if points.len() < 2 {
        return Ok(zero);
    }
    if points.len() == 2 {
        let (a, b) = (points[0], points[1]);
        if !(b > a) {
            return Ok(zero);
        }
        let (v, e) = gk15(&mut f, a, b);
        if e <= tol.abs.max(tol.rel * norm(&v)) && e.is_finite() {
            return Ok(Estimate { value: v, error: e, panels: 1 });
        }
    }
    let mut panels: Vec<Panel<N>> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            panels.push(Panel { a: w[0], b: w[1], value: v, error: e });
        }
    }
    let span = points[points.len() - 1] - points[0];
    let min_width = 1e-14 * span.max(points[0].abs()).max(points[points.len() - 1].abs());
    let mut frozen_val = [0.0; N];
    let mut frozen_err = 0.0;
    let mut count = panels.len();
    loop {
        let mut val = frozen_val;
        let mut err = frozen_err;
        let mut worst = None;
        let mut worst_err = -1.0;
        for (i, p) in panels.iter().enumerate() {
            for n in 0..N {
                val[n] += p.value[n];
            }
            err += p.error;
            if p.error > worst_err {
                worst_err = p.error;
                worst = Some(i);
            }
        }
        let target = tol.abs.max(tol.rel * norm(&val));
        if err <= target {
            return Ok(Estimate { value: val, error: err, panels: count });
        }
        let Some(i) = worst else {
            return Err(Estimate { value: val, error: err, panels: count });
        };
        if count >= tol.max_panels || !err.is_finite() {
            return Err(Estimate { value: val, error: err, panels: count });
        }
        let p = panels.swap_remove(i);
        if p.b - p.a <= min_width {
            for n in 0..N {
                frozen_val[n] += p.value[n];
            }
            frozen_err += p.error;
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        panels.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        panels.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        count += 1;
    }
}

/// Scalar form of [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Estimate<1>, Estimate<1>> {
    integrate_vec(|x| [f(x)], points, tol)
}

/// Integrates over [a, b] when the integrand may carry inverse-square-root or
/// logarithmic singularities at the points `singular`. Each panel that ends at a
/// singular point is mapped by λ = p ± u², which turns x^{-1/2} into a smooth function.
pub fn integrate_singular_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    singular: &[f64],
    tol: Tolerance,
) -> Result<Estimate<N>, Estimate<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut total = Estimate { value: [0.0; N], error: 0.0, panels: 0 };
    if !(b > a) {
        return Ok(total);
    }
    let mut pts = vec![(a, singular.contains(&a)), (b, singular.contains(&b))];
    for &s in singular {
        if s > a && s < b {
            pts.push((s, true));
        }
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    pts.dedup_by(|x, y| x.0 == y.0);
    let mut segs: Vec<(f64, f64, bool, bool)> = Vec::new();
    for w in pts.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        if s0 && s1 {
            let m = 0.5 * (x0 + x1);
            segs.push((x0, m, true, false));
            segs.push((m, x1, false, true));
        } else {
            segs.push((x0, x1, s0, s1));
        }
    }
    let mut failed = false;
    for (x0, x1, s0, s1) in segs {
        let w = (x1 - x0).sqrt();
        let res = if s0 {
            integrate_vec(
                |u| {
                    let v = f(x0 + u * u);
                    v.map(|c| 2.0 * u * c)
                },
                &[0.0, w],
                tol,
            )
        } else if s1 {
            integrate_vec(
                |u| {
                    let v = f(x1 - u * u);
                    v.map(|c| 2.0 * u * c)
                },
                &[0.0, w],
                tol,
            )
        } else {
            integrate_vec(&mut f, &[x0, x1], tol)
        };
        let e = match res {
            Ok(e) => e,
            Err(e) => {
                failed = true;
                e
            }
        };
        for n in 0..N {
            total.value[n] += e.value[n];
        }
        total.error += e.error;
        total.panels += e.panels;
    }
    if failed {
        Err(total)
    } else {
        Ok(total)
    }
}

/// Scalar form of [`integrate_singular_vec`].
pub fn integrate_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    singular: &[f64],
    tol: Tolerance,
) -> Result<Estimate<1>, Estimate<1>> {
    integrate_singular_vec(|x| [f(x)], a, b, singular, tol)
}

/// Arithmetic–geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// Complete elliptic integral of the first kind K(m) given the complementary
/// parameter `m1 = 1 - m`, so that the logarithmic end m → 1 keeps full precision.
pub fn ellip_k_comp(m1: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / agm(1.0, m1.max(0.0).sqrt())
}
