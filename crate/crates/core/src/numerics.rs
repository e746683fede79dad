//! Scalar root finding, bracketed maximization and adaptive quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
pub const MAX_ROOT_ITERATIONS: usize = 200;
pub const MAX_SUBDIVISIONS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketedRoot {
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
    /// `f(root)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Brent's method: inverse quadratic interpolation and secant steps safeguarded
/// by bisection. Stops once the bracket is narrower than `tol` (plus a few ulps)
/// or `f` vanishes exactly.
pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<BracketedRoot>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::DegenerateBracket { lo, hi });
    }
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(BracketedRoot { lo: a, hi: a, root: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(BracketedRoot { lo: b, hi: b, root: b, residual: 0.0, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=MAX_ROOT_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            let (blo, bhi) = if b < c { (b, c) } else { (c, b) };
            return Ok(BracketedRoot { lo: blo, hi: bhi, root: b, residual: fb, iterations: iter });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NoConvergence { iterations: iter });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ROOT_ITERATIONS })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMax {
    pub argmax: f64,
    pub value: f64,
    /// Width of the final bracket around `argmax`.
    pub bracket_width: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn maximize_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<ScalarMax>
where
    F: Fn(f64) -> f64,
{
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() || !(tol > 0.0) {
        return Err(Error::DegenerateBracket { lo, hi });
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iterations = 0;
    while b - a > tol && iterations < MAX_ROOT_ITERATIONS {
        iterations += 1;
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let (argmax, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(ScalarMax { argmax, value, bracket_width: b - a, iterations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: DEFAULT_QUAD_TOL,
            rel_tol: 0.0,
            max_subdivisions: MAX_SUBDIVISIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
    /// False when the subdivision limit was hit before meeting the tolerance.
    pub converged: bool,
}

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

/// 15-point Kronrod rule with the embedded 7-point Gauss error estimate
/// (QUADPACK `qk15` scaling).
fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        fv[j] = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let result = kronrod * half;
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let abs_k = abs_k * half.abs();
    if abs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_k);
    }
    (result, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod quadrature on a finite interval.
pub fn integrate_with<F>(f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Integral
where
    F: Fn(f64) -> f64,
{
    if lo == hi {
        return Integral { value: 0.0, abs_error: 0.0, subdivisions: 0, converged: true };
    }
    let (value, error) = gauss_kronrod(&f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a: lo, b: hi, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 0;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if subdivisions >= opts.max_subdivisions {
            let (value, abs_error) = sum_segments(&heap);
            return Integral { value, abs_error, subdivisions, converged: false };
        }
        let seg = heap.pop().expect("heap never empties");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // interval exhausted in floating point
            heap.push(seg);
            let (value, abs_error) = sum_segments(&heap);
            return Integral { value, abs_error, subdivisions, converged: false };
        }
        let (v1, e1) = gauss_kronrod(&f, seg.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        subdivisions += 1;
        // running sums drift; resynchronise occasionally
        if subdivisions % 64 == 0 {
            let (v, e) = sum_segments(&heap);
            total = v;
            total_err = e;
        }
    }
    let (value, abs_error) = sum_segments(&heap);
    Integral { value, abs_error, subdivisions, converged: true }
}

fn sum_segments(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// [`integrate_with`] with an absolute tolerance only.
pub fn integrate<F>(f: F, lo: f64, hi: f64, abs_tol: f64) -> Integral
where
    F: Fn(f64) -> f64,
{
    integrate_with(
        f,
        lo,
        hi,
        &QuadOptions {
            abs_tol,
            ..QuadOptions::default()
        },
    )
}
