//! Physical input parameters, unit conventions, and the derived cavity
//! coupling and cavity van der Waals radius.
//!
//! Everything downstream consumes angular frequencies in rad/μs, lengths in
//! μm, and dipole moments in units of a₀e. The [`units`] module holds the
//! CODATA constants and the boundary converters; no other code multiplies
//! by 2π or rescales SI prefixes.

use crate::{Error, Result};

/// Unit conversion constants and helpers. Internal canonical units: μm, μs,
/// rad/μs, a₀e. Conversion factors are fixed at build time from CODATA 2018
/// values; round-trip conversion is exact up to floating-point rounding.
pub mod units {
    use crate::{Error, Result};
    use std::f64::consts::TAU;

    /// Bohr radius a₀ in m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
    /// Elementary charge e in C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Reduced Planck constant ħ in J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Vacuum permittivity ε₀ in F/m.
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    /// Speed of light in μm/μs (numerically equal to m/s).
    pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

    /// Radial dipole-dipole constant: U = k_dd·μ₁μ₂·(1−3cos²θ)/r³ gives
    /// rad/μs for μ in a₀e and r in μm. Value is (a₀e)²/(4πε₀ħ) rescaled to
    /// the internal unit system (≈ 6.126159e-3).
    pub fn dipole_dipole_constant() -> f64 {
        let mu_si = BOHR_RADIUS * ELEMENTARY_CHARGE;
        mu_si * mu_si / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * HBAR) * 1e12
    }

    /// Cavity-coupling constant: g² = K·μ²ω/V gives (rad/μs)² for μ in a₀e,
    /// ω in rad/μs, V in μm³. Defined as exactly 2π times
    /// [`dipole_dipole_constant`]: both carry the same physical factor
    /// 1/(4πε₀ħ) (g² = μ²ω/(2ħε₀V) = (4π/2)·μ²ω/(4πε₀ħV)), and keeping the
    /// ratio exact makes the structural identity C3·R³ = C6·(1+Δ/2δ)·sgn δ
    /// hold to machine precision.
    pub fn coupling_constant() -> f64 {
        TAU * dipole_dipole_constant()
    }

    /// Multiplier taking a tagged frequency value to rad/μs. Ordinary
    /// frequencies pick up the 2π here and nowhere else.
    pub fn frequency_factor(unit: &str) -> Result<f64> {
        match unit {
            "rad/us" => Ok(1.0),
            "Hz" => Ok(TAU * 1e-6),
            "kHz" => Ok(TAU * 1e-3),
            "MHz" => Ok(TAU),
            "GHz" => Ok(TAU * 1e3),
            "THz" => Ok(TAU * 1e6),
            other => Err(Error::Config(format!(
                "unknown frequency unit `{other}` (expected rad/us, Hz, kHz, MHz, GHz, or THz)"
            ))),
        }
    }

    /// Multiplier taking a tagged length value to μm.
    pub fn length_factor(unit: &str) -> Result<f64> {
        match unit {
            "um" => Ok(1.0),
            "nm" => Ok(1e-3),
            "mm" => Ok(1e3),
            other => Err(Error::Config(format!(
                "unknown length unit `{other}` (expected um, nm, or mm)"
            ))),
        }
    }

    /// Multiplier taking a tagged time value to μs.
    pub fn time_factor(unit: &str) -> Result<f64> {
        match unit {
            "us" => Ok(1.0),
            "ns" => Ok(1e-3),
            "ms" => Ok(1e3),
            other => Err(Error::Config(format!(
                "unknown time unit `{other}` (expected us, ns, or ms)"
            ))),
        }
    }

    /// Multiplier taking a tagged volume value to μm³.
    pub fn volume_factor(unit: &str) -> Result<f64> {
        match unit {
            "um^3" => Ok(1.0),
            other => Err(Error::Config(format!(
                "unknown volume unit `{other}` (expected um^3)"
            ))),
        }
    }

    /// Multiplier taking a tagged dipole moment to a₀e.
    pub fn dipole_factor(unit: &str) -> Result<f64> {
        match unit {
            "a0e" => Ok(1.0),
            other => Err(Error::Config(format!(
                "unknown dipole unit `{other}` (expected a0e)"
            ))),
        }
    }

    /// Multiplier taking a tagged number density to μm⁻³.
    pub fn density_factor(unit: &str) -> Result<f64> {
        match unit {
            "1/um^3" => Ok(1.0),
            other => Err(Error::Config(format!(
                "unknown density unit `{other}` (expected 1/um^3)"
            ))),
        }
    }

    /// Multiplier taking a tagged r³-interaction coefficient to rad·μm³/μs.
    pub fn c3_factor(unit: &str) -> Result<f64> {
        match unit {
            "rad/us*um^3" => Ok(1.0),
            "MHz*um^3" => Ok(TAU),
            other => Err(Error::Config(format!(
                "unknown C3 unit `{other}` (expected rad/us*um^3 or MHz*um^3)"
            ))),
        }
    }

    /// Multiplier taking a tagged r⁶-interaction coefficient to rad·μm⁶/μs.
    pub fn c6_factor(unit: &str) -> Result<f64> {
        match unit {
            "rad/us*um^6" => Ok(1.0),
            "MHz*um^6" => Ok(TAU),
            other => Err(Error::Config(format!(
                "unknown C6 unit `{other}` (expected rad/us*um^6 or MHz*um^6)"
            ))),
        }
    }

    /// Angular rad/μs to ordinary MHz (reporting convenience).
    pub fn angular_to_ordinary_mhz(omega: f64) -> f64 {
        omega / TAU
    }
}

/// Default ratio threshold for the perturbative validity gate.
pub const DEFAULT_GATE_THRESHOLD: f64 = 10.0;

/// Which cavity-coupled transition a coupling constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// f ↔ d transition, dipole moment μᵃ.
    A,
    /// d ↔ p transition, dipole moment μᵇ.
    B,
}

/// Atomic and cavity constants in internal units. Immutable in spirit after
/// construction; the constructors validate, and all derived quantities are
/// recomputed on demand so sharing across threads is read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Level d above f, rad/μs.
    pub omega_d: f64,
    /// Cavity detuning δ = ω_d − ω, rad/μs. Stored, not re-derived: δ ≪ ω_d
    /// in practice, so ω_d − (ω_d − δ) would lose ~ulp(ω_d) absolutely, and
    /// δ³ denominators amplify that loss.
    delta: f64,
    /// Förster detuning Δ = 2ω_d − ω_p, rad/μs. Stored for the same reason.
    big_delta: f64,
    /// Transition dipole f↔d, a₀e.
    pub mu_a: f64,
    /// Transition dipole d↔p, a₀e.
    pub mu_b: f64,
    /// Cavity mode volume V, μm³.
    pub mode_volume: f64,
    /// Dimensionless mode-function value Φ at the atoms (1 = antinode).
    pub mode_amplitude: f64,
    /// Ground level g, rad/μs; only the Ramsey fringe frequency uses it.
    pub omega_g: f64,
}

/// Result of [`PhysicalParams::cavity_vdw_radius`]. `degenerate` marks the
/// δ = 0 case where R collapses to zero and the r³-term vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityRadius {
    /// R in μm.
    pub value: f64,
    /// True when δ = 0 (R = 0 by definition, not by smallness).
    pub degenerate: bool,
}

/// One named ratio of the perturbative gate; `value` is +∞ when the
/// coupling in the denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateRatio {
    pub name: &'static str,
    pub value: f64,
}

/// Report of the perturbative validity check: detunings must dominate every
/// coupling by at least `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeReport {
    pub ratios: [GateRatio; 5],
    pub threshold: f64,
    pub pass: bool,
}

impl PhysicalParams {
    /// Equal-dipole constructor (μᵃ = μᵇ = μ, Φ = 1, ω_g = 0). All
    /// frequencies in rad/μs, μ in a₀e, V in μm³.
    pub fn new(
        omega_d: f64,
        omega_p: f64,
        omega_cav: f64,
        mu: f64,
        mode_volume: f64,
    ) -> Result<Self> {
        // Detunings are computed once here and kept; see the field comments.
        Self::from_detunings(omega_d, omega_d - omega_cav, 2.0 * omega_d - omega_p, mu, mode_volume)
    }

    /// Equal-dipole constructor from the detunings themselves (μᵃ = μᵇ = μ,
    /// Φ = 1, ω_g = 0). δ and Δ are stored exactly as given; prefer this over
    /// [`new`](Self::new) whenever the detunings are the primary data.
    pub fn from_detunings(
        omega_d: f64,
        delta: f64,
        big_delta: f64,
        mu: f64,
        mode_volume: f64,
    ) -> Result<Self> {
        let p = Self {
            omega_d,
            delta,
            big_delta,
            mu_a: mu,
            mu_b: mu,
            mode_volume,
            mode_amplitude: 1.0,
            omega_g: 0.0,
        };
        p.validated()
    }

    /// Constructor for a half-wave cavity, V = (λ/2)³ with λ = 2πc/ω, from
    /// the transition frequency ω_d, cavity detuning δ = ω_d − ω, and
    /// Förster detuning Δ = 2ω_d − ω_p. All in rad/μs, μ in a₀e.
    pub fn half_wave_cavity(omega_d: f64, delta: f64, big_delta: f64, mu: f64) -> Result<Self> {
        let omega_cav = omega_d - delta;
        if omega_cav <= 0.0 {
            return Err(Error::Domain(format!(
                "cavity frequency {omega_cav} rad/us is not positive"
            )));
        }
        let lambda = std::f64::consts::TAU * units::SPEED_OF_LIGHT / omega_cav;
        let half = lambda / 2.0;
        Self::from_detunings(omega_d, delta, big_delta, mu, half.powi(3))
    }

    /// Replaces the d↔p dipole moment.
    pub fn with_mu_b(mut self, mu_b: f64) -> Result<Self> {
        self.mu_b = mu_b;
        self.validated()
    }

    /// Replaces the mode-function amplitude Φ.
    pub fn with_mode_amplitude(mut self, phi: f64) -> Result<Self> {
        self.mode_amplitude = phi;
        self.validated()
    }

    /// Sets the ground-level frequency used by the Ramsey fringe.
    pub fn with_omega_g(mut self, omega_g: f64) -> Result<Self> {
        self.omega_g = omega_g;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.mode_volume > 0.0) {
            return Err(Error::Domain(format!(
                "mode volume must be positive, got {} um^3",
                self.mode_volume
            )));
        }
        if self.mu_a < 0.0 || self.mu_b < 0.0 {
            return Err(Error::Domain(format!(
                "dipole moments must be nonnegative, got mu_a = {}, mu_b = {}",
                self.mu_a, self.mu_b
            )));
        }
        if !(self.omega_cav() > 0.0) {
            return Err(Error::Domain(format!(
                "cavity frequency must be positive, got {} rad/us",
                self.omega_cav()
            )));
        }
        for (name, v) in [
            ("omega_d", self.omega_d),
            ("delta", self.delta),
            ("big_delta", self.big_delta),
            ("mode_volume", self.mode_volume),
            ("mode_amplitude", self.mode_amplitude),
            ("omega_g", self.omega_g),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(self)
    }

    /// Cavity detuning δ = ω_d − ω.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Förster detuning Δ = 2ω_d − ω_p.
    pub fn forster_detuning(&self) -> f64 {
        self.big_delta
    }

    /// Cavity mode frequency ω = ω_d − δ, rad/μs. Derived; the rounding is
    /// benign because ω only enters O(1)-relative expressions (g², λ, R³).
    pub fn omega_cav(&self) -> f64 {
        self.omega_d - self.delta
    }

    /// Level p above f, ω_p = 2ω_d − Δ, rad/μs.
    pub fn omega_p(&self) -> f64 {
        2.0 * self.omega_d - self.big_delta
    }

    /// Jaynes-Cummings coupling g = μ·√(ω/2ε₀ħV)·Φ in rad/μs for the chosen
    /// transition.
    pub fn cavity_coupling(&self, which: Transition) -> Result<f64> {
        if !(self.mode_volume > 0.0) {
            return Err(Error::Domain(format!(
                "mode volume must be positive, got {} um^3",
                self.mode_volume
            )));
        }
        let mu = match which {
            Transition::A => self.mu_a,
            Transition::B => self.mu_b,
        };
        Ok(mu
            * (units::coupling_constant() * self.omega_cav() / self.mode_volume).sqrt()
            * self.mode_amplitude)
    }

    /// Cavity van der Waals radius R = (|δ|V/4πω)^(1/3) in μm. δ = 0 yields
    /// R = 0 with the degenerate flag set.
    pub fn cavity_vdw_radius(&self) -> Result<CavityRadius> {
        let omega_cav = self.omega_cav();
        if omega_cav == 0.0 {
            return Err(Error::Domain("cavity frequency is zero".into()));
        }
        if self.delta == 0.0 {
            return Ok(CavityRadius { value: 0.0, degenerate: true });
        }
        let r3 = self.delta.abs() * self.mode_volume / (4.0 * std::f64::consts::PI * omega_cav);
        Ok(CavityRadius { value: r3.cbrt(), degenerate: false })
    }

    /// Direct dipole-dipole coupling U(r,θ) = k_dd·μᵃμᵇ·(1−3cos²θ)/r³ between
    /// |dd⟩ and the symmetric |pf⟩ channel, rad/μs.
    pub fn dipole_dipole_u(&self, r: f64, theta: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("separation must be positive, got {r} um")));
        }
        let f = 1.0 - 3.0 * theta.cos().powi(2);
        Ok(units::dipole_dipole_constant() * self.mu_a * self.mu_b * f / r.powi(3))
    }

    /// Excitation-exchange coupling J(r,θ) = k_dd·(μᵃ)²·(1−3cos²θ)/r³ between
    /// |df⟩ and |fd⟩, rad/μs.
    pub fn dipole_dipole_j(&self, r: f64, theta: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("separation must be positive, got {r} um")));
        }
        let f = 1.0 - 3.0 * theta.cos().powi(2);
        Ok(units::dipole_dipole_constant() * self.mu_a * self.mu_a * f / r.powi(3))
    }

    /// d-level Stark-shifted frequency ω̃_d = ω_d + g²/δ − g⁴/δ³ (single-atom
    /// cavity shift through fourth order).
    pub fn stark_shifted_omega_d(&self) -> Result<f64> {
        let delta = self.delta();
        if delta == 0.0 {
            return Err(Error::Domain("cavity detuning is zero; Stark shift diverges".into()));
        }
        let g = self.cavity_coupling(Transition::A)?;
        Ok(self.omega_d + g * g / delta - g.powi(4) / delta.powi(3))
    }

    /// Perturbative gate at the default threshold. See
    /// [`validate_perturbative_with`](Self::validate_perturbative_with).
    pub fn validate_perturbative(&self, u: f64, j: f64) -> PerturbativeReport {
        self.validate_perturbative_with(u, j, DEFAULT_GATE_THRESHOLD)
    }

    /// Checks |δ|, |Δ| ≫ g, U, J. Each ratio uses the larger of the two
    /// cavity couplings for g; a vanishing coupling reports +∞ and passes.
    /// Report-only: never errors.
    pub fn validate_perturbative_with(&self, u: f64, j: f64, threshold: f64) -> PerturbativeReport {
        let g = self
            .cavity_coupling(Transition::A)
            .unwrap_or(f64::INFINITY)
            .max(self.cavity_coupling(Transition::B).unwrap_or(f64::INFINITY));
        let delta = self.delta().abs();
        let big = self.forster_detuning().abs();
        let ratio = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
        let ratios = [
            GateRatio { name: "|delta|/g", value: ratio(delta, g) },
            GateRatio { name: "|Delta|/g", value: ratio(big, g) },
            GateRatio { name: "|delta|/|U|", value: ratio(delta, u.abs()) },
            GateRatio { name: "|Delta|/|U|", value: ratio(big, u.abs()) },
            GateRatio { name: "|delta|/|J|", value: ratio(delta, j.abs()) },
        ];
        let pass = ratios.iter().all(|r| r.value >= threshold);
        PerturbativeReport { ratios, threshold, pass }
    }
}
