//! Independent numerical tools for the integration suites. Everything here
//! is deliberately written from scratch (adaptive Simpson, LU determinant,
//! naive DFT) so library results are checked against a second, unrelated
//! implementation rather than against themselves.
#![allow(dead_code)]

/// Euler-Mascheroni constant, for cosine-integral oracles.
pub const EULER_GAMMA: f64 = 0.5772156649015329;

fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        // Richardson extrapolation of the composite rule.
        return left + right + err / 15.0;
    }
    simpson_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance
/// `tol`. Plain textbook scheme; panics are impossible, accuracy is the
/// caller's judgement via `tol`.
pub fn simpson<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Determinant by LU decomposition with partial pivoting; `a` is a row-major
/// n×n matrix (consumed). Singular pivots yield 0.
pub fn lu_determinant(mut a: Vec<f64>, n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for k in 0..n {
        let mut pivot = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[pivot * n + k].abs() {
                pivot = i;
            }
        }
        if a[pivot * n + k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            for j in 0..n {
                a.swap(k * n + j, pivot * n + j);
            }
            det = -det;
        }
        det *= a[k * n + k];
        for i in k + 1..n {
            let factor = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= factor * a[k * n + j];
            }
        }
    }
    det
}

/// Naive O(n²) DFT magnitude spectrum of a real signal, bins 0..n/2.
pub fn dft_magnitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut mags = Vec::with_capacity(n / 2 + 1);
    for k in 0..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, &v) in x.iter().enumerate() {
            let phi = -std::f64::consts::TAU * (k as f64) * (j as f64) / (n as f64);
            re += v * phi.cos();
            im += v * phi.sin();
        }
        mags.push((re * re + im * im).sqrt());
    }
    mags
}

/// Index of the largest magnitude, ignoring the first `skip` bins (DC peak).
pub fn peak_bin(mags: &[f64], skip: usize) -> usize {
    let mut best = skip;
    for (k, &m) in mags.iter().enumerate().skip(skip) {
        if m > mags[best] {
            best = k;
        }
    }
    best
}

/// Evenly spaced grid including both endpoints.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64)).collect()
}
