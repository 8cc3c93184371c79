//! Shared numerical kernels: deterministic reductions, quadrature, the
//! gamma function, 1-d minimization, and monotone cubic interpolation.
//!
//! Reductions use a fixed pairwise tree (split at the midpoint, sequential
//! base blocks) so that results are bitwise identical no matter how the work
//! is scheduled: with the `parallel` feature the upper levels of the tree run
//! under `rayon::join`, without it the same tree is walked sequentially.

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this length a pairwise block is summed with a plain loop.
const SUM_BLOCK: usize = 64;

/// Minimum length before reductions and maps fan out to the thread pool.
#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 8192;

/// Pairwise sum of `f(lo) + ... + f(hi-1)` over a fixed binary tree.
pub fn pairwise_sum_by<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let n = hi.saturating_sub(lo);
    if n <= SUM_BLOCK {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        return acc;
    }
    let mid = lo + n / 2;
    #[cfg(feature = "parallel")]
    if n >= PAR_MIN_LEN {
        let (a, b) = rayon::join(|| pairwise_sum_by(lo, mid, f), || pairwise_sum_by(mid, hi, f));
        return a + b;
    }
    pairwise_sum_by(lo, mid, f) + pairwise_sum_by(mid, hi, f)
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(0, xs.len(), &|i| xs[i])
}

/// `max over i in lo..hi of f(i)`; `f64::max` is exactly associative, so the
/// reduction order does not matter.
pub fn max_by<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if hi.saturating_sub(lo) >= PAR_MIN_LEN {
        return (lo..hi)
            .into_par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max);
    }
    (lo..hi).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Element-wise map `i -> f(i)` into a vector, parallel for large `n`.
pub fn map_indexed<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if n >= PAR_MIN_LEN {
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// `|x|^e * sign(x)`, the odd power map, with the continuous value 0 at 0.
#[inline]
pub fn odd_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x > 0.0 {
        x.powf(e)
    } else {
        -(-x).powf(e)
    }
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

struct SimpsonCtx<'a> {
    f: &'a dyn Fn(f64) -> f64,
    abs_tol: f64,
}

fn simpson_recurse(
    ctx: &SimpsonCtx,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = (ctx.f)(lm);
    let frm = (ctx.f)(rm);
    let h6 = (b - a) / 12.0;
    let left = h6 * (fa + 4.0 * flm + fm);
    let right = h6 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson integral of `f` over `[a, b]` with relative tolerance
/// `rel_tol` (floored in absolute terms by the first coarse estimate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let scale = whole.abs().max(1e-300);
    let ctx = SimpsonCtx {
        f: &f,
        abs_tol: rel_tol * scale,
    };
    simpson_recurse(&ctx, a, b, fa, fm, fb, whole, ctx.abs_tol, 48)
}

// ---------------------------------------------------------------------------
// Gamma function (Lanczos, g = 607/128, 15 terms)
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_188_9e-5,
    4.652_362_892_704_857_5e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_124_7e-4,
    -2.102_644_417_241_048_7e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_140_5e-5,
    3.689_918_265_953_162e-6,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the approximation in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFF[0];
    for (i, c) in LANCZOS_COEFF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

// ---------------------------------------------------------------------------
// Golden-section minimization
// ---------------------------------------------------------------------------

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: u32) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// C^2 taper: 1 for `x <= 0`, 0 for `x >= 1`, quintic smoothstep between.
#[inline]
pub fn quintic_taper(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

// ---------------------------------------------------------------------------
// Monotone cubic interpolation (Fritsch-Carlson)
// ---------------------------------------------------------------------------

/// Monotonicity-preserving piecewise-cubic interpolant of a tabulated
/// function, with an analytic derivative.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Config(
                "interpolation table needs at least two equal-length columns".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interpolation table entry".into()));
        }
        let n = xs.len();
        let mut secants = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            secants.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        // Shape-preserving three-point estimates at the ends.
        let edge_slope = |h0: f64, h1: f64, s0: f64, s1: f64| -> f64 {
            let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
            if d * s0 <= 0.0 {
                0.0
            } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
                3.0 * s0
            } else {
                d
            }
        };
        let mut slopes = vec![0.0; n];
        slopes[0] = if n == 2 {
            secants[0]
        } else {
            edge_slope(xs[1] - xs[0], xs[2] - xs[1], secants[0], secants[1])
        };
        slopes[n - 1] = if n == 2 {
            secants[n - 2]
        } else {
            edge_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                secants[n - 2],
                secants[n - 3],
            )
        };
        for i in 1..n - 1 {
            let (s0, s1) = (secants[i - 1], secants[i]);
            slopes[i] = if s0 * s1 <= 0.0 {
                0.0
            } else {
                // Weighted harmonic mean keeps the interpolant monotone.
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / s0 + w2 / s1)
            };
        }
        // Fritsch-Carlson limiter on the endpoints of each interval.
        for i in 0..n - 1 {
            let s = secants[i];
            if s == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / s;
            let b = slopes[i + 1] / s;
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slopes[i] = t * a * s;
                slopes[i + 1] = t * b * s;
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Interpolated value; `x` must lie within the table.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < self.x_min() || x > self.x_max() {
            return Err(Error::Domain(format!(
                "x = {x} outside table range [{}, {}]",
                self.x_min(),
                self.x_max()
            )));
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1)
    }

    /// Analytic derivative of the interpolant.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if x < self.x_min() || x > self.x_max() {
            return Err(Error::Domain(format!(
                "x = {x} outside table range [{}, {}]",
                self.x_min(),
                self.x_max()
            )));
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        Ok((6.0 * t2 - 6.0 * t) * (y0 - y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..10_000).map(|i| ((i * 37) % 101) as f64 * 0.01).collect();
        let naive: f64 = xs.iter().sum();
        assert!(rel(pairwise_sum(&xs), naive) < 1e-12);
    }

    #[test]
    fn simpson_exact_on_cubic() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!(rel(v, 4.0) < 1e-14);
    }

    #[test]
    fn simpson_handles_endpoint_cusp() {
        // integral of sqrt(1-x) over [0,1] = 2/3
        let v = adaptive_simpson(|x| (1.0 - x).max(0.0).sqrt(), 0.0, 1.0, 1e-11);
        assert!(rel(v, 2.0 / 3.0) < 1e-9, "got {v}");
    }

    #[test]
    fn gamma_half_integers() {
        // Exact recursion: Gamma(n) = (n-1)!, Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!)
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut exact_int = 1.0; // Gamma(1)
        let mut exact_half = sqrt_pi; // Gamma(1/2)
        for n in 1..=12u32 {
            assert!(rel(gamma(n as f64), exact_int) < 1e-13, "Gamma({n})");
            assert!(
                rel(gamma(n as f64 - 0.5), exact_half) < 1e-13,
                "Gamma({n} - 1/2)"
            );
            exact_int *= n as f64;
            exact_half *= n as f64 - 0.5;
        }
    }

    #[test]
    fn golden_section_finds_parabola_min() {
        let (x, _) = golden_section_min(|x| (x - 1.3) * (x - 1.3), 0.0, 4.0, 60);
        assert!((x - 1.3).abs() < 1e-9);
    }

    #[test]
    fn taper_endpoints_and_smoothness() {
        assert_eq!(quintic_taper(-1.0), 1.0);
        assert_eq!(quintic_taper(0.0), 1.0);
        assert_eq!(quintic_taper(1.0), 0.0);
        assert_eq!(quintic_taper(2.0), 0.0);
        assert!((quintic_taper(0.5) - 0.5).abs() < 1e-15);
        // near-zero derivative at both ends
        let h = 1e-4;
        assert!((quintic_taper(h) - 1.0).abs() < 1e-10);
        assert!(quintic_taper(1.0 - h).abs() < 1e-10);
    }

    #[test]
    fn monotone_cubic_reproduces_sinh() {
        let xs: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sinh()).collect();
        let interp = MonotoneCubic::new(xs, ys).unwrap();
        // Fritsch-Carlson slopes are O(h^2)-accurate, so values carry O(h^3).
        for &x in &[0.005, 0.31, 0.777, 1.5, 1.995] {
            assert!(rel(interp.eval(x).unwrap(), x.sinh()) < 5e-5);
            assert!((interp.derivative(x).unwrap() - x.cosh()).abs() < 1e-3);
        }
        assert!(interp.eval(2.5).is_err());
    }

    #[test]
    fn monotone_cubic_rejects_bad_tables() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0], vec![0.0]).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn pairwise_sum_is_pool_size_invariant() {
        let xs: Vec<f64> = (0..100_000)
            .map(|i| (i as f64 * 0.618).sin() * 1e-3)
            .collect();
        let wide = pairwise_sum(&xs);
        let narrow = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| pairwise_sum(&xs));
        assert_eq!(wide.to_bits(), narrow.to_bits());
    }
}
