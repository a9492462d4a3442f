//! The effective pair potential Ũ(r, θ) = C0 + C3 f(θ)/r³ + C6 f(θ)²/r⁶,
//! its coefficients from first-principles cavity parameters, the crossover
//! radii separating its distance regimes, and the two special-detuning
//! closed forms.
//!
//! Units: C0 rad/μs, C3 rad/μs·μm³, C6 rad/μs·μm⁶, radii μm.

use crate::params::{units, PhysicalParams, Transition};
use crate::{Error, Result};

/// Dipole-dipole angular factor f(θ) = 1 − 3cos²θ.
pub fn angular_factor(theta: f64) -> f64 {
    let c = theta.cos();
    1.0 - 3.0 * c * c
}

/// The angle arccos(1/√3) where f(θ) vanishes and the anisotropic terms
/// drop out of the potential.
pub fn magic_angle() -> f64 {
    (1.0 / 3.0f64).sqrt().acos()
}

/// Whether the r-dependent terms carry the angular factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngularMode {
    /// Ũ = C0 + C3/r³ + C6/r⁶ (θ = π/2 geometry).
    Isotropic,
    /// Ũ = C0 + f(θ)·C3/r³ + f(θ)²·C6/r⁶; the angle enters the r⁻³ term
    /// once (both exchange channels are linear in f) and the r⁻⁶ term
    /// twice (it comes from the squared exchange).
    Angular,
}

/// Distance regimes of the pair potential, in order of increasing r.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// r ≤ r0: the perturbative elimination itself is invalid here.
    BelowValidity,
    /// r0 < r < r1: the free-space van der Waals r⁻⁶ term dominates.
    FreeVdw,
    /// r1 ≤ r < r2: the cavity-mediated r⁻³ term dominates.
    DipoleDipole,
    /// r ≥ r2: the distance-independent all-to-all term dominates.
    AllToAll,
}

impl Regime {
    /// Stable label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Regime::BelowValidity => "below_validity",
            Regime::FreeVdw => "free_vdW",
            Regime::DipoleDipole => "dipole_dipole",
            Regime::AllToAll => "all_to_all",
        }
    }
}

/// Coefficients of the pair potential plus derived radii. Fields that only
/// exist when the coefficients come from cavity parameters (rather than
/// being supplied raw) are optional.
#[derive(Clone, Copy, Debug)]
pub struct PotentialCoefficients {
    /// Distance-independent all-to-all strength (rad/μs).
    pub c0: f64,
    /// Cavity-mediated dipole-dipole strength (rad/μs·μm³).
    pub c3: f64,
    /// Free-space van der Waals strength (rad/μs·μm⁶); carries the sign
    /// of the pair-state detuning Δ.
    pub c6: f64,
    /// Cavity van der Waals radius R with R³ = |δ|V/(4πω).
    pub r_cavity: Option<f64>,
    /// η = C6/C3² (None when C3 = 0).
    pub eta: Option<f64>,
    /// Validity radius r0 below which the two-level elimination fails.
    pub r0: Option<f64>,
    /// vdW → dipole-dipole crossover, |C6/r³| = |C3| point.
    pub r1: f64,
    /// Dipole-dipole → all-to-all crossover from the closed quadratic.
    pub r2_closed: f64,
    /// The same crossover from bisection of the defining equation;
    /// classification uses this one.
    pub r2_numeric: f64,
    /// sign(δ), when built from cavity parameters.
    pub sign_delta: Option<f64>,
    /// Cavity detuning δ (rad/μs), when built from cavity parameters.
    pub delta: Option<f64>,
    /// Pair-state detuning Δ (rad/μs), when built from cavity parameters.
    pub big_delta: Option<f64>,
}

/// The three crossover radii (μm).
#[derive(Clone, Copy, Debug)]
pub struct CrossoverRadii {
    pub r0: Option<f64>,
    pub r1: f64,
    pub r2_closed: f64,
    pub r2_numeric: f64,
}

/// Largest r with |C3/r³ + C6/r⁶| = |C0|, from the explicit quadratic in
/// y = 1/r³: the smallest positive root of c6 y² + c3 y = ±|c0|.
fn r2_closed_form(c0: f64, c3: f64, c6: f64) -> f64 {
    if c0 == 0.0 {
        return f64::INFINITY;
    }
    if c3 == 0.0 && c6 == 0.0 {
        return 0.0;
    }
    let mut best_y = f64::INFINITY;
    if c6 == 0.0 {
        best_y = (c0 / c3).abs();
    } else {
        for target in [c0.abs(), -c0.abs()] {
            let disc = c3 * c3 + 4.0 * c6 * target;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            for y in [(-c3 + sq) / (2.0 * c6), (-c3 - sq) / (2.0 * c6)] {
                if y > 0.0 && y < best_y {
                    best_y = y;
                }
            }
        }
    }
    best_y.powf(-1.0 / 3.0)
}

/// Largest r with |C3/r³ + C6/r⁶| = |C0|, by a geometric march inward from
/// far outside all coefficient scales followed by bisection.
fn r2_bisection(c0: f64, c3: f64, c6: f64) -> Result<f64> {
    if c0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    if c3 == 0.0 && c6 == 0.0 {
        return Ok(0.0);
    }
    let excess = |r: f64| (c3 / r.powi(3) + c6 / r.powi(6)).abs() - c0.abs();
    let scale3 = (c3 / c0).abs().cbrt();
    let scale6 = (c6 / c0).abs().powf(1.0 / 6.0);
    let mut hi = 4.0 * scale3.max(scale6).max(f64::MIN_POSITIVE.cbrt());
    let mut grow = 0;
    while excess(hi) >= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::Numerical(
                "no outer bound found for the all-to-all crossover radius".into(),
            ));
        }
    }
    // March down finely enough that a crossing pair pinched around the
    // local maximum of |C3/r³ + C6/r⁶| is unlikely to be stepped over.
    let mut lo = hi;
    let mut steps = 0;
    loop {
        lo *= 0.98;
        steps += 1;
        if excess(lo) >= 0.0 {
            break;
        }
        if steps > 20_000 {
            return Err(Error::Numerical(
                "no crossing of the all-to-all level found while marching inward".into(),
            ));
        }
    }
    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        if (b - a) <= 1e-13 * b {
            break;
        }
        let m = 0.5 * (a + b);
        if excess(m) >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn assemble(
    c0: f64,
    c3: f64,
    c6: f64,
    r_cavity: Option<f64>,
    r0: Option<f64>,
    r1: f64,
    delta: Option<f64>,
    big_delta: Option<f64>,
) -> Result<PotentialCoefficients> {
    let eta = if c3 == 0.0 { None } else { Some(c6 / (c3 * c3)) };
    Ok(PotentialCoefficients {
        c0,
        c3,
        c6,
        r_cavity,
        eta,
        r0,
        r1,
        r2_closed: r2_closed_form(c0, c3, c6),
        r2_numeric: r2_bisection(c0, c3, c6)?,
        sign_delta: delta.map(f64::signum),
        delta,
        big_delta,
    })
}

/// Potential coefficients from first-principles cavity parameters.
pub fn coefficients(p: &PhysicalParams) -> Result<PotentialCoefficients> {
    let dl = p.delta();
    let bd = p.forster_detuning();
    if dl == 0.0 || bd == 0.0 {
        return Err(Error::Domain(format!(
            "potential coefficients require nonzero detunings (delta {dl}, big_delta {bd} rad/us)"
        )));
    }
    let ga = p.cavity_coupling(Transition::A)?;
    let gb = p.cavity_coupling(Transition::B)?;
    let k = units::dipole_dipole_constant();
    let mu2 = p.mu_a * p.mu_b;
    let c0 = 2.0 * (ga * gb).powi(2) / (bd * dl * dl) + 2.0 * ga.powi(4) / dl.powi(3);
    let c3 = k * (4.0 * mu2 * ga * gb / (bd * dl) + 2.0 * p.mu_a * p.mu_a * ga * ga / (dl * dl));
    let c6 = 2.0 * k * k * mu2 * mu2 / bd;
    let r = p.cavity_vdw_radius()?.value;
    let r0 = std::f64::consts::SQRT_2 * (k * mu2 / bd.abs()).cbrt();
    // r1 from the detuning combination directly; equals |C6/C3|^(1/3).
    let a = 1.0 + bd / (2.0 * dl);
    let r1 = if a == 0.0 { f64::INFINITY } else { r / a.abs().cbrt() };
    assemble(c0, c3, c6, Some(r), Some(r0), r1, Some(dl), Some(bd))
}

/// Potential coefficients supplied directly, bypassing the cavity model.
/// Cavity-derived fields (R, r0, detunings) are absent; r1 and r2 still
/// follow from the coefficients themselves.
pub fn from_raw(c0: f64, c3: f64, c6: f64) -> Result<PotentialCoefficients> {
    let r1 = if c6 == 0.0 { 0.0 } else { (c6 / c3).abs().cbrt() };
    assemble(c0, c3, c6, None, None, r1, None, None)
}

/// The pair potential at separation r (μm) and polar angle θ.
pub fn u_tilde(r: f64, theta: f64, c: &PotentialCoefficients, mode: AngularMode) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("pair potential requires r > 0 (got {r} um)")));
    }
    let f = match mode {
        AngularMode::Isotropic => 1.0,
        AngularMode::Angular => angular_factor(theta),
    };
    let y = 1.0 / (r * r * r);
    Ok(c.c0 + f * c.c3 * y + f * f * c.c6 * y * y)
}

/// The crossover radii stored on the coefficients.
pub fn crossover_radii(c: &PotentialCoefficients) -> CrossoverRadii {
    CrossoverRadii { r0: c.r0, r1: c.r1, r2_closed: c.r2_closed, r2_numeric: c.r2_numeric }
}

/// The two exactly solvable detuning arrangements (both need Δ > 0 with
/// δ < 0, where the r⁻³ or r⁰ term drops out).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialDetuning {
    /// δ = −Δ/2: Ũ = C6 (1/r⁶ − 1/(4R⁶)); the r⁻³ term vanishes.
    HalfForster,
    /// δ = −Δ: Ũ = C6 (1/r⁶ − 1/(2R³r³)); the constant term vanishes.
    FullForster,
}

/// Closed-form potential at the special detunings. Errors unless the
/// stored detunings actually satisfy the requested case within 1e-9
/// relative.
pub fn special_case_potential(
    c: &PotentialCoefficients,
    case: SpecialDetuning,
    r: f64,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("pair potential requires r > 0 (got {r} um)")));
    }
    let (delta, big_delta, r_cav) = match (c.delta, c.big_delta, c.r_cavity) {
        (Some(d), Some(b), Some(rc)) => (d, b, rc),
        _ => {
            return Err(Error::Domain(
                "special-detuning forms need coefficients built from cavity parameters".into(),
            ))
        }
    };
    if big_delta <= 0.0 {
        return Err(Error::Domain(format!(
            "special-detuning forms require big_delta > 0 (got {big_delta} rad/us)"
        )));
    }
    let tol = 1e-9 * big_delta.abs();
    let residual = match case {
        SpecialDetuning::HalfForster => delta + big_delta / 2.0,
        SpecialDetuning::FullForster => delta + big_delta,
    };
    if residual.abs() > tol {
        return Err(Error::Domain(format!(
            "detunings (delta {delta}, big_delta {big_delta}) do not satisfy the requested \
             special case (residual {residual} rad/us)"
        )));
    }
    let r3 = r * r * r;
    let rc3 = r_cav * r_cav * r_cav;
    Ok(match case {
        SpecialDetuning::HalfForster => c.c6 * (1.0 / (r3 * r3) - 1.0 / (4.0 * rc3 * rc3)),
        SpecialDetuning::FullForster => c.c6 * (1.0 / (r3 * r3) - 1.0 / (2.0 * rc3 * r3)),
    })
}

/// Which regime a separation falls in. Uses the numeric r2; below-validity
/// is only distinguishable when the coefficients carry r0.
pub fn classify_regime(c: &PotentialCoefficients, r: f64) -> Result<Regime> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("regime classification requires r > 0 (got {r} um)")));
    }
    let r0 = c.r0.unwrap_or(0.0);
    Ok(if r <= r0 {
        Regime::BelowValidity
    } else if r >= c.r2_numeric {
        Regime::AllToAll
    } else if r >= c.r1 {
        Regime::DipoleDipole
    } else {
        Regime::FreeVdw
    })
}
