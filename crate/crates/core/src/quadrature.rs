//! Globally adaptive Gauss-Kronrod (7/15) quadrature over a list of breakpoints.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{CoreError, Result};

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
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rtol: 1e-10, atol: 0.0, max_panels: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let value = k * h;
    let error = ((k - g) * h).abs();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`; interior breakpoints seed the panels.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], opts: &QuadOptions) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(CoreError::Domain("need at least two breakpoints"));
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(CoreError::Domain("breakpoints must be sorted"));
        }
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1]));
        }
    }
    let mut panels = heap.len();
    let sums = |heap: &BinaryHeap<Panel>| heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    let (mut value, mut error) = sums(&heap);
    let mut since_resum = 0usize;
    loop {
        if !value.is_finite() {
            return Err(CoreError::Domain("integrand is not finite"));
        }
        let target = opts.atol.max(opts.rtol * value.abs());
        if error <= target {
            return Ok(QuadResult { value, error, panels });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(QuadResult { value, error, panels }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || panels >= opts.max_panels {
            return Err(CoreError::Budget { achieved: error, requested: target });
        }
        let left = kronrod(&mut f, worst.a, mid);
        let right = kronrod(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
        since_resum += 1;
        if since_resum == 1024 {
            (value, error) = sums(&heap);
            since_resum = 0;
        }
    }
}

/// Merges, sorts and deduplicates breakpoints, clipped to `[lo, hi]`.
pub fn tidy_breaks(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|x| x.is_finite() && *x > lo && *x < hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    pts
}

/// `∫_0^t (t-s)^{-ν} (1+s)^{-μ} ds` for `ν < 1`, with the endpoint singularity removed
/// by substituting `t - s = w^{1/(1-ν)}`.
pub fn singular_convolution(t: f64, nu: f64, mu: f64, opts: &QuadOptions) -> Result<f64> {
    if !(nu < 1.0) {
        return Err(CoreError::Domain("singular exponent must be below 1"));
    }
    if !(t > 0.0) {
        return Err(CoreError::Domain("time must be positive"));
    }
    let power = 1.0 / (1.0 - nu);
    let top = libm::pow(t, 1.0 - nu);
    let f = |w: f64| {
        let gap = libm::pow(w, power).min(t);
        libm::pow(1.0 + t - gap, -mu)
    };
    let mut pts = Vec::new();
    let mut x = top;
    while x > top * 1e-12 {
        pts.push(x);
        x *= 0.5;
    }
    // Concentrate where s is small, i.e. w close to the top.
    let mut s = 1.0;
    while s < t {
        pts.push(libm::pow(t - s, 1.0 - nu));
        s *= 2.0;
    }
    let breaks = tidy_breaks(pts, 0.0, top);
    Ok(power * integrate(f, &breaks, opts)?.value)
}
