//! Fresnel integrals, trigonometric integrals, their modified forms with a
//! square-root damping envelope, and the saturation function F(τ) built on
//! them.
//!
//! Conventions:
//!   S(x) = ∫₀ˣ sin(t²) dt,  C(x) = ∫₀ˣ cos(t²) dt
//!   Si(x) = ∫₀ˣ sin(t)/t dt,  Ci(x) = −∫ₓ^∞ cos(t)/t dt
//!   Si_M(β, x) = ∫₀ˣ sin(t)/(t √(βt+1)) dt
//!   Ci_M(β, x) = −∫ₓ^∞ cos(t)/(t √(βt+1)) dt
//!   F(τ) = Si_M(4η/τ, ∞)
//!
//! Each function switches between a power series, piecewise quadrature
//! between zeros of the trigonometric factor, and an asymptotic expansion,
//! with switch points chosen so every branch is accurate to well below the
//! default tolerance of 1e-10.

use crate::quad::{adaptive, oscillatory_tail, panel, TAIL_LOBES};
use crate::{Error, Result};
use num_complex::Complex64;

/// √(π/8), the common x → ∞ limit of both Fresnel integrals.
pub const FRESNEL_LIMIT: f64 = 0.6266570686577501;

const EULER_GAMMA: f64 = 0.5772156649015329;
const PI: f64 = std::f64::consts::PI;

/// Fresnel integrals switch from the Maclaurin series to slab quadrature
/// here, and from slab quadrature to the asymptotic expansion at
/// [`FRESNEL_ASYMPTOTIC_MIN`].
const FRESNEL_SERIES_MAX: f64 = 1.8;
const FRESNEL_ASYMPTOTIC_MIN: f64 = 6.0;

/// Si and Ci switch from slab quadrature to their asymptotic expansions
/// here; at this point the smallest expansion term is ~1e-19 relative.
const TRIG_ASYMPTOTIC_MIN: f64 = 45.0;

/// Head integrals spanning more than this ratio of scales are evaluated
/// under the substitution t = x·eˢ, which absorbs the 1/t weight.
const HEAD_LOG_RATIO: f64 = 10.0;

/// How the improper tails of the modified integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailStrategy {
    /// Integrate between consecutive zeros of the trigonometric factor and
    /// accelerate the alternating lobe series by iterated averaging.
    BetweenZerosAccelerated,
}

/// Tolerances and budgets for the quadrature-backed special functions.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig {
    /// Absolute tolerance on each quadrature result.
    pub abs_tol: f64,
    /// Relative tolerance on each quadrature result.
    pub rel_tol: f64,
    /// Largest number of π-wide slabs a finite integration range may be
    /// split into before the evaluation reroutes through the accelerated
    /// tail (value at infinity minus the remainder).
    pub max_subdivisions: usize,
    /// Tail evaluation method.
    pub tail_strategy: TailStrategy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_strategy: TailStrategy::BetweenZerosAccelerated,
        }
    }
}

impl QuadratureConfig {
    fn validated(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "quadrature tolerances must be positive (abs_tol {}, rel_tol {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Recursion depth for adaptive heads. Deep enough to resolve envelope
/// boundary layers at scale 1/β down to β ~ 1e12.
const HEAD_MAX_DEPTH: u32 = 48;

// ---------------------------------------------------------------------------
// Fresnel integrals

fn fresnel_series(x: f64) -> (f64, f64) {
    // S: sum (-1)^k x^(4k+3) / ((2k+1)! (4k+3)), C: analogous even series.
    let x4 = x.powi(4);
    let mut s = 0.0;
    let mut c = 0.0;
    let mut ps = x.powi(3);
    let mut pc = x;
    let mut sign = 1.0;
    for k in 0..60 {
        let ts = sign * ps / (4 * k + 3) as f64;
        let tc = sign * pc / (4 * k + 1) as f64;
        s += ts;
        c += tc;
        if ts.abs() < 1e-18 * s.abs().max(1e-30) && tc.abs() < 1e-18 * c.abs().max(1e-30) {
            break;
        }
        let k1 = (2 * k + 1) as f64;
        let k2 = (2 * k + 2) as f64;
        ps *= x4 / (k2 * (k2 + 1.0));
        pc *= x4 / (k1 * (k1 + 1.0));
        sign = -sign;
    }
    (s, c)
}

fn fresnel_slabs(x: f64) -> (f64, f64) {
    // Slab boundaries at the zeros sqrt(kπ) of sin(t²); each slab holds at
    // most one half-period of either integrand.
    let mut s = 0.0;
    let mut c = 0.0;
    let mut lo = 0.0;
    let mut k = 1usize;
    loop {
        let z = (k as f64 * PI).sqrt();
        let hi = z.min(x);
        s += panel(&mut |t: f64| (t * t).sin(), lo, hi);
        c += panel(&mut |t: f64| (t * t).cos(), lo, hi);
        if hi >= x {
            break;
        }
        lo = hi;
        k += 1;
    }
    (s, c)
}

/// ∫ₓ^∞ e^{it²} dt for large x, by the asymptotic expansion
/// e^{ix²} Σ Tₖ with T₀ = i/(2x), T_{k+1} = Tₖ (2k+1)/(2i x²).
fn fresnel_tail(x: f64) -> Complex64 {
    let ix2 = Complex64::new(0.0, x * x);
    let two_i_x2 = Complex64::new(0.0, 2.0 * x * x);
    let mut term = Complex64::new(0.0, 1.0 / (2.0 * x));
    let mut sum = term;
    let first = term.norm();
    for k in 0.. {
        let next = term * ((2 * k + 1) as f64) / two_i_x2;
        if next.norm() >= term.norm() || next.norm() < 1e-18 * first {
            break;
        }
        sum += next;
        term = next;
    }
    ix2.exp() * sum
}

fn fresnel_pair(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (s, c) = if ax < FRESNEL_SERIES_MAX {
        fresnel_series(ax)
    } else if ax < FRESNEL_ASYMPTOTIC_MIN {
        fresnel_slabs(ax)
    } else {
        let tail = fresnel_tail(ax);
        (FRESNEL_LIMIT - tail.im, FRESNEL_LIMIT - tail.re)
    };
    if x < 0.0 {
        (-s, -c)
    } else {
        (s, c)
    }
}

/// Fresnel sine integral S(x) = ∫₀ˣ sin(t²) dt (odd in x).
pub fn fresnel_s(x: f64) -> f64 {
    fresnel_pair(x).0
}

/// Fresnel cosine integral C(x) = ∫₀ˣ cos(t²) dt (odd in x).
pub fn fresnel_c(x: f64) -> f64 {
    fresnel_pair(x).1
}

// ---------------------------------------------------------------------------
// Trigonometric integrals

/// Auxiliary asymptotic sums: f(x) ≈ Σ (-1)^k (2k)!/x^{2k+1},
/// g(x) ≈ Σ (-1)^k (2k+1)!/x^{2k+2}, truncated at the smallest term.
fn trig_asymptotic_fg(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let mut tf = 1.0 / x;
    let mut tg = 1.0 / x2;
    let mut f = tf;
    let mut g = tg;
    let mut sign = -1.0;
    for k in 1.. {
        let nf = tf * ((2 * k - 1) * (2 * k)) as f64 / x2;
        let ng = tg * ((2 * k) * (2 * k + 1)) as f64 / x2;
        if nf >= tf || nf < 1e-18 / x {
            break;
        }
        f += sign * nf;
        g += sign * ng;
        tf = nf;
        tg = ng;
        sign = -sign;
    }
    (f, g)
}

/// Sine integral Si(x) = ∫₀ˣ sin(t)/t dt (odd in x).
pub fn sin_integral(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax == 0.0 {
        0.0
    } else if ax.is_infinite() {
        PI / 2.0
    } else if ax < TRIG_ASYMPTOTIC_MIN {
        let mut f = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
        let mut acc = 0.0;
        let mut lo = 0.0;
        while lo < ax {
            let hi = (lo + PI).min(ax);
            acc += panel(&mut f, lo, hi);
            lo = hi;
        }
        acc
    } else {
        let (f, g) = trig_asymptotic_fg(ax);
        PI / 2.0 - f * ax.cos() - g * ax.sin()
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Cosine integral Ci(x) = −∫ₓ^∞ cos(t)/t dt, defined for x > 0 only; the
/// logarithmic divergence at 0 is a domain error.
pub fn cos_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "cos_integral requires x > 0 (got {x}); Ci diverges logarithmically at 0"
        )));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < TRIG_ASYMPTOTIC_MIN {
        // Ci(x) = γ + ln x + ∫₀ˣ (cos t − 1)/t dt; the integrand is written
        // as −2 sin²(t/2)/t to avoid cancellation near t = 0.
        let mut f = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                let s = (0.5 * t).sin();
                -2.0 * s * s / t
            }
        };
        let mut acc = 0.0;
        let mut lo = 0.0;
        while lo < x {
            let hi = (lo + PI).min(x);
            acc += panel(&mut f, lo, hi);
            lo = hi;
        }
        Ok(EULER_GAMMA + x.ln() + acc)
    } else {
        let (f, g) = trig_asymptotic_fg(x);
        Ok(f * x.sin() - g * x.cos())
    }
}

// ---------------------------------------------------------------------------
// Modified trigonometric integrals

fn check_beta(beta: f64, what: &str) -> Result<()> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("{what} requires beta >= 0 (got {beta})")));
    }
    Ok(())
}

/// Si_M(β, ∞) = ∫₀^∞ sin(t)/(t √(βt+1)) dt.
pub fn sin_integral_mod_inf(beta: f64) -> Result<f64> {
    sin_integral_mod_inf_cfg(beta, &QuadratureConfig::default())
}

/// [`sin_integral_mod_inf`] with explicit tolerances.
pub fn sin_integral_mod_inf_cfg(beta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validated()?;
    check_beta(beta, "sin_integral_mod")?;
    if beta == 0.0 {
        return Ok(PI / 2.0);
    }
    let mut f = move |t: f64| {
        if t == 0.0 {
            1.0
        } else {
            t.sin() / (t * (beta * t + 1.0).sqrt())
        }
    };
    // First lobe separately: the envelope has a boundary layer at t ~ 1/β
    // that the fixed-order lobe panels cannot resolve when β is large.
    let head = adaptive(&mut f, 0.0, PI, cfg.abs_tol, cfg.rel_tol, HEAD_MAX_DEPTH)?;
    let TailStrategy::BetweenZerosAccelerated = cfg.tail_strategy;
    let tail = oscillatory_tail(&mut f, PI, PI, cfg.abs_tol, TAIL_LOBES)?;
    Ok(head + tail)
}

/// Modified sine integral Si_M(β, x) = ∫₀ˣ sin(t)/(t √(βt+1)) dt.
/// `x` may be infinite.
pub fn sin_integral_mod(beta: f64, x: f64) -> Result<f64> {
    sin_integral_mod_cfg(beta, x, &QuadratureConfig::default())
}

/// [`sin_integral_mod`] with explicit tolerances.
pub fn sin_integral_mod_cfg(beta: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validated()?;
    check_beta(beta, "sin_integral_mod")?;
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("sin_integral_mod requires x >= 0 (got {x})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return sin_integral_mod_inf_cfg(beta, cfg);
    }
    if beta == 0.0 {
        return Ok(sin_integral(x));
    }
    let mut f = move |t: f64| {
        if t == 0.0 {
            1.0
        } else {
            t.sin() / (t * (beta * t + 1.0).sqrt())
        }
    };
    if x / PI <= cfg.max_subdivisions as f64 {
        let mut acc = adaptive(&mut f, 0.0, PI.min(x), cfg.abs_tol, cfg.rel_tol, HEAD_MAX_DEPTH)?;
        let mut lo = PI;
        while lo < x {
            let hi = (lo + PI).min(x);
            acc += panel(&mut f, lo, hi);
            lo = hi;
        }
        Ok(acc)
    } else {
        // Too many slabs: evaluate as the value at infinity minus the
        // remainder past x, whose lobes alternate from the next zero up.
        let whole = sin_integral_mod_inf_cfg(beta, cfg)?;
        let t1 = PI * (x / PI).ceil();
        let partial = panel(&mut f, x, t1);
        let TailStrategy::BetweenZerosAccelerated = cfg.tail_strategy;
        let tail = oscillatory_tail(&mut f, t1, PI, cfg.abs_tol, TAIL_LOBES)?;
        Ok(whole - partial - tail)
    }
}

/// Modified cosine integral Ci_M(β, x) = −∫ₓ^∞ cos(t)/(t √(βt+1)) dt,
/// defined for x > 0.
pub fn cos_integral_mod(beta: f64, x: f64) -> Result<f64> {
    cos_integral_mod_cfg(beta, x, &QuadratureConfig::default())
}

/// [`cos_integral_mod`] with explicit tolerances.
pub fn cos_integral_mod_cfg(beta: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validated()?;
    check_beta(beta, "cos_integral_mod")?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("cos_integral_mod requires x > 0 (got {x})")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if beta == 0.0 {
        return cos_integral(x);
    }
    let mut f = move |t: f64| t.cos() / (t * (beta * t + 1.0).sqrt());
    // First zero of cos above x.
    let t0 = PI * ((x / PI - 0.5).floor() + 1.5);
    let head = if t0 / x > HEAD_LOG_RATIO {
        // The 1/t weight spans many scales; substitute t = x eˢ so the
        // weight cancels and the integrand stays O(1).
        let mut g =
            move |s: f64| (x * s.exp()).cos() / ((beta * x * s.exp() + 1.0).sqrt());
        adaptive(&mut g, 0.0, (t0 / x).ln(), cfg.abs_tol, cfg.rel_tol, HEAD_MAX_DEPTH)?
    } else {
        adaptive(&mut f, x, t0, cfg.abs_tol, cfg.rel_tol, HEAD_MAX_DEPTH)?
    };
    let TailStrategy::BetweenZerosAccelerated = cfg.tail_strategy;
    let tail = oscillatory_tail(&mut f, t0, PI, cfg.abs_tol, TAIL_LOBES)?;
    Ok(-(head + tail))
}

// ---------------------------------------------------------------------------
// The saturation function F(τ)

/// F(τ) = Si_M(4η/τ, ∞): grows monotonically from F(0) = 0 and saturates
/// at π/2 for τ → ∞. Controls the interaction-induced dephasing envelope.
pub fn f_tau(eta: f64, tau: f64) -> Result<f64> {
    f_tau_cfg(eta, tau, &QuadratureConfig::default())
}

/// [`f_tau`] with explicit tolerances.
pub fn f_tau_cfg(eta: f64, tau: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("f_tau requires eta > 0 (got {eta})")));
    }
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("f_tau requires tau >= 0 (got {tau})")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    sin_integral_mod_inf_cfg(4.0 * eta / tau, cfg)
}
