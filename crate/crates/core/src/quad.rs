//! Quadrature primitives: Gauss-Legendre panels, adaptive bisection, and
//! alternating-series acceleration for oscillatory tails.
//!
//! Panels are meant to be applied between zeros of the oscillatory factor
//! (phase slabs), where the integrand is a half-wave times a smooth
//! envelope — a regime where 20-point Gauss-Legendre is accurate to near
//! machine precision per slab.

use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = pj;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of n-point Gauss-Legendre on [-1, 1], by Newton
/// iteration from the Chebyshev initial guess.
fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Cached 10-point rule (embedded error estimation).
pub fn gl10() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| legendre_nodes(10))
}

/// Cached 20-point rule (workhorse for phase slabs).
pub fn gl20() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| legendre_nodes(20))
}

/// 20-point Gauss-Legendre over [a, b].
pub fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in gl20() {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Complex-valued 20-point panel.
pub fn panel_complex<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in gl20() {
        acc += f(c + h * x) * w;
    }
    acc * h
}

fn panel10<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in gl10() {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Adaptive bisection with a GL10-vs-GL20 error estimate per panel.
/// `max_depth` bounds the recursion; exceeding it is a hard error rather
/// than a silent loss of accuracy.
pub fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    fn rec<F: FnMut(f64) -> f64>(
        f: &mut F,
        a: f64,
        b: f64,
        abs_tol: f64,
        rel_tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let coarse = panel10(f, a, b);
        let fine = panel(f, a, b);
        let err = (fine - coarse).abs();
        if err <= abs_tol.max(rel_tol * fine.abs()) {
            return Ok(fine);
        }
        if depth == 0 {
            return Err(Error::Numerical(format!(
                "adaptive quadrature failed to converge on [{a}, {b}] (residual {err:.3e})"
            )));
        }
        let m = 0.5 * (a + b);
        let left = rec(f, a, m, abs_tol / 2.0, rel_tol, depth - 1)?;
        let right = rec(f, m, b, abs_tol / 2.0, rel_tol, depth - 1)?;
        Ok(left + right)
    }
    rec(f, a, b, abs_tol, rel_tol, max_depth)
}

/// Limit of a series with strictly alternating term signs by iterated
/// pairwise averaging of the partial sums (van Wijngaarden's transform).
/// Returns the accelerated value and an error estimate obtained by
/// dropping the last few terms and repeating the transform.
pub fn alternating_series_limit(terms: &[f64]) -> (f64, f64) {
    fn transform(terms: &[f64]) -> f64 {
        let m = terms.len();
        let mut s = Vec::with_capacity(m);
        let mut acc = 0.0;
        for &t in terms {
            acc += t;
            s.push(acc);
        }
        for r in 1..m {
            for i in 0..(m - r) {
                s[i] = 0.5 * (s[i] + s[i + 1]);
            }
        }
        s[0]
    }
    if terms.is_empty() {
        return (0.0, 0.0);
    }
    if terms.len() <= 4 {
        let v: f64 = terms.iter().sum();
        let e = terms.last().unwrap().abs();
        return (v, e);
    }
    let full = transform(terms);
    let trimmed = transform(&terms[..terms.len() - 4]);
    (full, (full - trimmed).abs())
}

/// Number of lobes collected before accelerating an oscillatory tail.
/// 48 half-periods put the averaging transform at machine precision even
/// for envelopes as slow as 1/t.
pub const TAIL_LOBES: usize = 48;

/// Integral of an oscillatory function over [start, ∞) whose sign
/// alternates between consecutive zeros spaced `spacing` apart. Lobe
/// integrals are collected (early exit once they drop well below the
/// tolerance) and the alternating series is accelerated.
pub fn oscillatory_tail<F: FnMut(f64) -> f64>(
    f: &mut F,
    start: f64,
    spacing: f64,
    abs_tol: f64,
    max_lobes: usize,
) -> Result<f64> {
    let mut terms = Vec::new();
    let mut z = start;
    let cap = max_lobes.max(8);
    for _ in 0..cap {
        let t = panel(f, z, z + spacing);
        terms.push(t);
        z += spacing;
        if terms.len() >= 6 && t.abs() < abs_tol * 1e-2 {
            break;
        }
    }
    let (value, err) = alternating_series_limit(&terms);
    if err > abs_tol.max(1e-14 * value.abs()) {
        return Err(Error::Numerical(format!(
            "oscillatory tail from {start} did not converge (estimate {err:.3e} > {abs_tol:.3e})"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_is_exact_on_low_degree_polynomials() {
        // 20-point GL integrates polynomials up to degree 39 exactly.
        let mut f = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 2.0 * x - 5.0;
        let got = panel(&mut f, -1.0, 3.0);
        // Antiderivative: 3x^8/8 - x^5/5 + x^2 - 5x.
        let anti = |x: f64| 3.0 * x.powi(8) / 8.0 - x.powi(5) / 5.0 + x * x - 5.0 * x;
        let expected = anti(3.0) - anti(-1.0);
        assert!(((got - expected) / expected).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // Integral of 1/(1e-4 + x^2) over [-1, 1] = 2 atan(1e2)/1e-2.
        let mut f = |x: f64| 1.0 / (1e-4 + x * x);
        let got = adaptive(&mut f, -1.0, 1.0, 1e-12, 1e-12, 60).unwrap();
        let expected = 2.0 * (1e2_f64).atan() / 1e-2;
        assert!(((got - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let mut f = |x: f64| 1.0 / (1e-12 + x * x);
        assert!(adaptive(&mut f, -1.0, 1.0, 1e-13, 1e-13, 2).is_err());
    }

    #[test]
    fn acceleration_reaches_log_two() {
        // sum (-1)^(k+1)/k = ln 2; raw partial sums converge like 1/m.
        let terms: Vec<f64> =
            (1..=40).map(|k| if k % 2 == 1 { 1.0 / k as f64 } else { -1.0 / k as f64 }).collect();
        let (v, e) = alternating_series_limit(&terms);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-13, "value {v}, est {e}");
        assert!(e < 1e-12);
    }

    #[test]
    fn oscillatory_tail_of_sinc_gives_half_pi() {
        let mut f = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
        let v = oscillatory_tail(&mut f, 0.0, std::f64::consts::PI, 1e-10, TAIL_LOBES).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-11, "got {v}");
    }
}
