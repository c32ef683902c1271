//! Floating-point convolution for expectations and singular integrals.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Below this many multiply-adds the direct sum is used.
const DIRECT_LIMIT: f64 = 4.0e6;

/// Transform outputs whose estimated relative error exceeds this are recomputed directly.
const REFINE_TOLERANCE: f64 = 1e-10;

/// Product series of `a` and `b`, first `out_len` terms.
pub fn convolve(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let a = trim(&a[..a.len().min(out_len)]);
    let b = trim(&b[..b.len().min(out_len)]);
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return vec![0.0; out_len];
    }
    if (a.len() as f64) * (b.len() as f64) <= DIRECT_LIMIT {
        direct(a, b, out_len)
    } else {
        let mut out = fft(a, b, out_len);
        refine(a, b, &mut out);
        out
    }
}

/// The transform's absolute error is about eps log2(n) |a|_2 |b|_2 at every output,
/// which swamps outputs much smaller than the largest ones.
fn refine(a: &[f64], b: &[f64], out: &mut [f64]) {
    let n = (a.len() + b.len()).next_power_of_two() as f64;
    let noise = 8.0 * f64::EPSILON * n.log2() * norm(a) * norm(b);
    let floor = noise / REFINE_TOLERANCE;
    for (k, o) in out.iter_mut().enumerate() {
        if o.abs() < floor {
            let lo = k.saturating_sub(b.len() - 1);
            *o = (lo..=k.min(a.len() - 1)).map(|i| a[i] * b[k - i]).sum();
        }
    }
}

fn trim(a: &[f64]) -> &[f64] {
    let k = a.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
    &a[..k]
}

/// Direct summation, exact up to ordinary rounding.
pub fn direct(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 || i >= out_len {
            continue;
        }
        let m = (out_len - i).min(b.len());
        for (o, &y) in out[i..i + m].iter_mut().zip(&b[..m]) {
            *o += x * y;
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fft(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let n = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    // Pack a in the real part and b in the imaginary part; one forward transform.
    // Equal norms keep the larger input's rounding out of the smaller one.
    let (na, nb) = (norm(a), norm(b));
    let (sa, sb) = (1.0 / na, 1.0 / nb);
    let mut z = vec![Complex::new(0.0, 0.0); n];
    for (i, &x) in a.iter().enumerate() {
        z[i].re = x * sa;
    }
    for (i, &y) in b.iter().enumerate() {
        z[i].im = y * sb;
    }
    fwd.process(&mut z);
    let mut p = vec![Complex::new(0.0, 0.0); n];
    for k in 0..n {
        let zk = z[k];
        let zc = z[(n - k) % n].conj();
        let fa = (zk + zc) * 0.5;
        let fb = (zk - zc) * Complex::new(0.0, -0.5);
        p[k] = fa * fb;
    }
    inv.process(&mut p);
    let scale = na * nb / n as f64;
    let mut out: Vec<f64> = p.iter().take(out_len).map(|c| c.re * scale).collect();
    out.resize(out_len, 0.0);
    out
}
