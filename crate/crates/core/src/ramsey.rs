//! Ramsey interferometry of an interacting ensemble: the interaction
//! modulation factor G(τ) by exact pair products, its all-to-all closed
//! form, Monte-Carlo averaging over random atom positions, the continuum
//! integral γ(τ), its large-N expansion, and the asymptotic contrast law.
//!
//! Times in μs, rates in rad/μs, lengths in μm, densities in μm⁻³.

use crate::potential::PotentialCoefficients;
use crate::rng::SplitMix64;
use crate::specfun::{
    cos_integral, cos_integral_mod, f_tau, fresnel_c, fresnel_s, sin_integral,
    sin_integral_mod, FRESNEL_LIMIT,
};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

const PI: f64 = std::f64::consts::PI;

fn cis(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
        Error::Io(e) => Error::Io(e),
    }
}

/// Which terms of the pair potential drive the dephasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionMode {
    /// C0 + C3/r³ + C6/r⁶.
    Full,
    /// C0 + C3/r³ (cavity-mediated terms only).
    DipolePlusConstant,
    /// C0 alone (distance-independent).
    AllToAll,
    /// C6/r⁶ alone (no cavity).
    FreeSpace,
}

impl InteractionMode {
    /// Stable label used in configs and manifests.
    pub fn label(&self) -> &'static str {
        match self {
            InteractionMode::Full => "full",
            InteractionMode::DipolePlusConstant => "dipole_plus_constant",
            InteractionMode::AllToAll => "all_to_all",
            InteractionMode::FreeSpace => "free_space",
        }
    }

    /// Parses the label form.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "full" => InteractionMode::Full,
            "dipole_plus_constant" => InteractionMode::DipolePlusConstant,
            "all_to_all" => InteractionMode::AllToAll,
            "free_space" => InteractionMode::FreeSpace,
            _ => {
                return Err(Error::Config(format!(
                    "unknown interaction mode {s:?} (expected full, dipole_plus_constant, \
                     all_to_all, or free_space)"
                )))
            }
        })
    }
}

/// The isotropic pair potential restricted to the terms of `mode`.
pub fn pair_potential(r: f64, c: &PotentialCoefficients, mode: InteractionMode) -> f64 {
    let y = 1.0 / (r * r * r);
    match mode {
        InteractionMode::Full => c.c0 + c.c3 * y + c.c6 * y * y,
        InteractionMode::DipolePlusConstant => c.c0 + c.c3 * y,
        InteractionMode::AllToAll => c.c0,
        InteractionMode::FreeSpace => c.c6 * y * y,
    }
}

/// Monte-Carlo ensemble configuration.
#[derive(Clone, Debug)]
pub struct RamseyConfig {
    /// Ground-state population after the first pulse.
    pub p_g: f64,
    /// Excited-state population after the first pulse.
    pub p_d: f64,
    /// Atom number N.
    pub atom_count: usize,
    /// Homogeneous density n (μm⁻³); sets the sample radius via
    /// R_s = (3N/(4πn))^(1/3).
    pub density: f64,
    /// Minimum pairwise distance r_B (μm); 0 disables the exclusion.
    pub blockade_radius: f64,
    /// Delay times τ (μs).
    pub tau_grid: Vec<f64>,
    /// Independent position draws to average over.
    pub realizations: usize,
    /// Base seed; realization k uses an independent substream.
    pub seed: u64,
    pub interaction_mode: InteractionMode,
}

impl RamseyConfig {
    /// Validates the population, ensemble, and grid invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.p_d >= 0.0 && self.p_d <= 1.0) {
            return Err(Error::Config(format!("p_d must lie in [0, 1] (got {})", self.p_d)));
        }
        if (self.p_g + self.p_d - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "populations must satisfy p_g + p_d = 1 (got {} + {})",
                self.p_g, self.p_d
            )));
        }
        if self.atom_count < 2 {
            return Err(Error::Config(format!(
                "at least two atoms are required (got {})",
                self.atom_count
            )));
        }
        if !(self.density > 0.0) {
            return Err(Error::Config(format!("density must be positive (got {})", self.density)));
        }
        if !(self.blockade_radius >= 0.0) {
            return Err(Error::Config(format!(
                "blockade radius must be nonnegative (got {})",
                self.blockade_radius
            )));
        }
        let packing = PI * self.density * self.blockade_radius.powi(3) / 6.0;
        if packing > 0.3 {
            return Err(Error::Config(format!(
                "exclusion spheres at this density fill {:.0}% of space; \
                 rejection sampling is infeasible above 30%",
                100.0 * packing
            )));
        }
        if self.tau_grid.is_empty() {
            return Err(Error::Config("tau grid must not be empty".into()));
        }
        if self.tau_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("tau grid entries must be finite and nonnegative".into()));
        }
        if self.realizations == 0 {
            return Err(Error::Config("at least one realization is required".into()));
        }
        Ok(())
    }

    /// Sample sphere radius R_s.
    pub fn sample_radius(&self) -> f64 {
        (3.0 * self.atom_count as f64 / (4.0 * PI * self.density)).cbrt()
    }
}

/// One random homogeneous ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleRealization {
    pub positions: Vec<[f64; 3]>,
    /// The substream seed index this realization was drawn with.
    pub seed: u64,
    /// Candidates discarded by the exclusion radius.
    pub rejected_count: u64,
}

/// Draws `atom_count` positions uniformly in the sample sphere, resampling
/// any candidate closer than the blockade radius to an accepted atom.
pub fn sample_ensemble(cfg: &RamseyConfig, realization: u64) -> Result<EnsembleRealization> {
    cfg.validate()?;
    let mut rng = SplitMix64::substream(cfg.seed, realization);
    let radius = cfg.sample_radius();
    let rb2 = cfg.blockade_radius * cfg.blockade_radius;
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(cfg.atom_count);
    let mut rejected = 0u64;
    let attempt_cap = 10_000u64 * cfg.atom_count as u64;
    while positions.len() < cfg.atom_count {
        let candidate = rng.next_in_ball(radius);
        let clash = rb2 > 0.0
            && positions.iter().any(|p| {
                let dx = p[0] - candidate[0];
                let dy = p[1] - candidate[1];
                let dz = p[2] - candidate[2];
                dx * dx + dy * dy + dz * dz < rb2
            });
        if clash {
            rejected += 1;
            if rejected > attempt_cap {
                return Err(Error::Numerical(format!(
                    "exclusion-radius resampling exceeded {attempt_cap} rejections; \
                     the configuration is too dense to fill"
                )));
            }
        } else {
            positions.push(candidate);
        }
    }
    Ok(EnsembleRealization { positions, seed: realization, rejected_count: rejected })
}

/// G(τ) for fixed positions on a τ grid: per-atom products
/// G_j = Π_{k≠j}(p_g + p_d e^{iŨ_jk τ}) averaged over j. Pair energies are
/// computed once; each pair's factor enters both its atoms' products.
pub fn g_exact_series(
    positions: &[[f64; 3]],
    coeffs: &PotentialCoefficients,
    p_g: f64,
    p_d: f64,
    tau_grid: &[f64],
    mode: InteractionMode,
) -> Result<Vec<Complex64>> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::Domain(format!("need at least two atoms (got {n})")));
    }
    let mut pair_u = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in (j + 1)..n {
            let dx = positions[j][0] - positions[k][0];
            let dy = positions[j][1] - positions[k][1];
            let dz = positions[j][2] - positions[k][2];
            let r = (dx * dx + dy * dy + dz * dz).sqrt();
            if r == 0.0 {
                return Err(Error::Domain(format!(
                    "atoms {j} and {k} coincide; the pair potential diverges"
                )));
            }
            pair_u.push(pair_potential(r, coeffs, mode));
        }
    }
    let mut out = Vec::with_capacity(tau_grid.len());
    let mut products = vec![Complex64::new(1.0, 0.0); n];
    for &tau in tau_grid {
        products.fill(Complex64::new(1.0, 0.0));
        let mut idx = 0;
        for j in 0..n {
            for k in (j + 1)..n {
                let z = Complex64::new(p_g, 0.0) + cis(pair_u[idx] * tau) * p_d;
                products[j] *= z;
                products[k] *= z;
                idx += 1;
            }
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for p in &products {
            sum += p;
        }
        out.push(sum / n as f64);
    }
    Ok(out)
}

/// G(τ) at a single delay; see [`g_exact_series`].
pub fn g_exact(
    positions: &[[f64; 3]],
    coeffs: &PotentialCoefficients,
    p_g: f64,
    p_d: f64,
    tau: f64,
    mode: InteractionMode,
) -> Result<Complex64> {
    Ok(g_exact_series(positions, coeffs, p_g, p_d, &[tau], mode)?[0])
}

/// Contrast and phase of a modulation factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContrastPhase {
    pub contrast: f64,
    pub phase: f64,
}

/// Closed-form all-to-all modulation: contrast
/// [p_g² + p_d² + 2 p_g p_d cos(C0τ)]^((N−1)/2) and phase (N−1)·ζ with
/// tan ζ = p_d sin(C0τ)/(p_g + p_d cos(C0τ)).
pub fn contrast_all_to_all(
    n: usize,
    p_g: f64,
    p_d: f64,
    c0: f64,
    tau: f64,
) -> Result<ContrastPhase> {
    if (p_g + p_d - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "populations must satisfy p_g + p_d = 1 (got {p_g} + {p_d})"
        )));
    }
    if n < 1 {
        return Err(Error::Domain("atom count must be at least 1".into()));
    }
    let phase_step = c0 * tau;
    let a2 = p_g * p_g + p_d * p_d + 2.0 * p_g * p_d * phase_step.cos();
    let m = (n - 1) as f64;
    let contrast = a2.max(0.0).powf(m / 2.0);
    let zeta = (p_d * phase_step.sin()).atan2(p_g + p_d * phase_step.cos());
    Ok(ContrastPhase { contrast, phase: m * zeta })
}

/// Aggregated Monte-Carlo (or analytic) Ramsey curves on a τ grid.
#[derive(Clone, Debug)]
pub struct RamseySeries {
    pub tau: Vec<f64>,
    /// Mean complex G across realizations.
    pub mean_g: Vec<Complex64>,
    /// Mean of |G| across realizations (the contrast estimator).
    pub contrast: Vec<f64>,
    /// Standard error of the contrast across realizations.
    pub contrast_stderr: Vec<f64>,
    /// |mean G|, the alternative estimator.
    pub contrast_of_mean: Vec<f64>,
    /// Unwrapped argument of mean G.
    pub phase: Vec<f64>,
    /// False when some unwrapped phase step comes close to the ±π branch
    /// ambiguity, i.e. the grid is too coarse to trust the unwrapping.
    pub phase_continuous: bool,
    /// SHA-256 of the generating configuration.
    pub config_hash: String,
    pub realizations: usize,
}

/// Unwraps the arguments of a complex series so consecutive steps lie in
/// (−π, π]. The flag is false when a step lands near the ±π branch
/// boundary, i.e. the grid is too coarse to trust the unwrapping.
pub fn unwrap_phases(raw: &[Complex64]) -> (Vec<f64>, bool) {
    let mut out = Vec::with_capacity(raw.len());
    let mut ok = true;
    let mut prev = 0.0;
    for (i, g) in raw.iter().enumerate() {
        let mut phi = g.im.atan2(g.re);
        if i > 0 {
            phi += ((prev - phi) / (2.0 * PI)).round() * 2.0 * PI;
            if (phi - prev).abs() > 3.0 {
                ok = false;
            }
        }
        out.push(phi);
        prev = phi;
    }
    (out, ok)
}

/// Canonical digest of everything that determines a Monte-Carlo result.
fn config_digest(cfg: &RamseyConfig, coeffs: &PotentialCoefficients) -> String {
    let mut h = Sha256::new();
    let mut feed = |label: &str, x: f64| {
        h.update(label.as_bytes());
        h.update(x.to_bits().to_le_bytes());
    };
    feed("c0", coeffs.c0);
    feed("c3", coeffs.c3);
    feed("c6", coeffs.c6);
    feed("p_g", cfg.p_g);
    feed("p_d", cfg.p_d);
    feed("density", cfg.density);
    feed("blockade", cfg.blockade_radius);
    for t in &cfg.tau_grid {
        feed("tau", *t);
    }
    h.update(b"atoms");
    h.update((cfg.atom_count as u64).to_le_bytes());
    h.update(b"realizations");
    h.update((cfg.realizations as u64).to_le_bytes());
    h.update(b"seed");
    h.update(cfg.seed.to_le_bytes());
    h.update(cfg.interaction_mode.label().as_bytes());
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Assembles a series from per-realization G curves (index order fixed).
fn aggregate(
    tau: &[f64],
    per_realization: &[Vec<Complex64>],
    hash: String,
) -> RamseySeries {
    let nt = tau.len();
    let nr = per_realization.len();
    let mut mean_g = vec![Complex64::new(0.0, 0.0); nt];
    let mut contrast = vec![0.0; nt];
    for series in per_realization {
        for (i, g) in series.iter().enumerate() {
            mean_g[i] += g;
            contrast[i] += g.norm();
        }
    }
    for i in 0..nt {
        mean_g[i] /= nr as f64;
        contrast[i] /= nr as f64;
    }
    let mut stderr = vec![0.0; nt];
    if nr > 1 {
        for series in per_realization {
            for (i, g) in series.iter().enumerate() {
                let d = g.norm() - contrast[i];
                stderr[i] += d * d;
            }
        }
        for s in &mut stderr {
            *s = (*s / ((nr - 1) as f64 * nr as f64)).sqrt();
        }
    }
    let (phase, phase_continuous) = unwrap_phases(&mean_g);
    RamseySeries {
        tau: tau.to_vec(),
        contrast_of_mean: mean_g.iter().map(|g| g.norm()).collect(),
        mean_g,
        contrast,
        contrast_stderr: stderr,
        phase,
        phase_continuous,
        config_hash: hash,
        realizations: nr,
    }
}

/// Monte-Carlo estimate of the Ramsey modulation: independent ensembles
/// are drawn from per-realization RNG substreams and evaluated in
/// parallel; aggregation runs in realization order, so the result is
/// bit-identical for a fixed config regardless of thread count.
pub fn monte_carlo_contrast(
    cfg: &RamseyConfig,
    coeffs: &PotentialCoefficients,
) -> Result<RamseySeries> {
    cfg.validate()?;
    let per_realization: Result<Vec<Vec<Complex64>>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|k| {
            let ens = sample_ensemble(cfg, k as u64)?;
            g_exact_series(
                &ens.positions,
                coeffs,
                cfg.p_g,
                cfg.p_d,
                &cfg.tau_grid,
                cfg.interaction_mode,
            )
        })
        .collect();
    let per_realization = per_realization?;
    Ok(aggregate(&cfg.tau_grid, &per_realization, config_digest(cfg, coeffs)))
}

/// How to evaluate the continuum modulation integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMethod {
    /// The explicit Fresnel/Si/Ci expression.
    ClosedForm,
    /// Direct quadrature of the defining ω-integral between stationary
    /// phase slabs.
    Quadrature,
}

/// Continuum pair-dephasing factor
/// γ(τ) = e^{iC0τ}·(ω0ωB/(ωB−ω0))·∫_{ω0}^{ωB} ω⁻² e^{i(ω+ηω²)τ} dω,
/// normalized so γ(0) = 1. ω0 and ωB are the r⁻³ interaction strengths at
/// the sample radius and at the inner cutoff; η = C6/C3² folds in the
/// short-range r⁻⁶ part.
pub fn gamma_continuum(
    tau: f64,
    omega0: f64,
    omega_b: f64,
    eta: f64,
    c0: f64,
    method: GammaMethod,
) -> Result<Complex64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("gamma_continuum requires tau >= 0 (got {tau})")));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("gamma_continuum requires eta > 0 (got {eta})")));
    }
    if omega0 == omega_b {
        // Degenerate window: every pair carries the same constant shift.
        return Ok(cis(c0 * tau));
    }
    if !(omega0 > 0.0 && omega_b > omega0) {
        return Err(Error::Domain(format!(
            "gamma_continuum requires 0 < omega0 < omegaB (got {omega0}, {omega_b})"
        )));
    }
    if tau == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let pref = omega0 * omega_b / (omega_b - omega0);
    let s = |w: f64| (w + eta * w * w) * tau;
    let value = match method {
        GammaMethod::Quadrature => {
            // Integrate between the phase slabs s = s0 + kπ; the inverse
            // of the monotone phase map gives the ω slab boundaries. Each
            // slab is split geometrically so no panel spans more than a
            // factor of two in ω, keeping the ω⁻² weight well resolved.
            let s0 = s(omega0);
            let sb = s(omega_b);
            let omega_of = |sv: f64| (-1.0 + (1.0 + 4.0 * eta * sv / tau).sqrt()) / (2.0 * eta);
            let mut f = |w: f64| cis(s(w)) / (w * w);
            let mut slab = |lo: f64, hi: f64| {
                let m = ((hi / lo).ln() / std::f64::consts::LN_2).ceil().max(1.0);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut a = lo;
                for i in 1..=m as usize {
                    let b = lo * (hi / lo).powf(i as f64 / m);
                    acc += crate::quad::panel_complex(&mut f, a, b);
                    a = b;
                }
                acc
            };
            let mut acc = Complex64::new(0.0, 0.0);
            let mut lo = omega0;
            let mut k = 1.0;
            loop {
                let boundary = s0 + k * PI;
                let hi = if boundary >= sb { omega_b } else { omega_of(boundary) };
                acc += slab(lo, hi);
                if boundary >= sb {
                    break;
                }
                lo = hi;
                k += 1.0;
            }
            acc * pref
        }
        GammaMethod::ClosedForm => {
            let ctx = "continuum closed form";
            let s0 = s(omega0);
            let sb = s(omega_b);
            let beta = 4.0 * eta / tau;
            let sqrt_eta = eta.sqrt();
            let w_hat = |w: f64| (w * sqrt_eta + 0.5 / sqrt_eta) * tau.sqrt();
            let boundary_term =
                (cis(s0) * omega_b - cis(sb) * omega0) / (omega_b - omega0);
            let dc = fresnel_c(w_hat(omega_b)) - fresnel_c(w_hat(omega0));
            let ds = fresnel_s(w_hat(omega_b)) - fresnel_s(w_hat(omega0));
            let fresnel_part = cis(-tau / (4.0 * eta))
                * Complex64::new(-ds, dc)
                * (2.0 * (eta * tau).sqrt());
            let si_part = sin_integral(sb) - sin_integral(s0)
                + sin_integral_mod(beta, sb).map_err(|e| with_context(e, ctx))?
                - sin_integral_mod(beta, s0).map_err(|e| with_context(e, ctx))?;
            let ci_part = cos_integral(sb).map_err(|e| with_context(e, ctx))?
                - cos_integral(s0).map_err(|e| with_context(e, ctx))?
                + cos_integral_mod(beta, sb).map_err(|e| with_context(e, ctx))?
                - cos_integral_mod(beta, s0).map_err(|e| with_context(e, ctx))?;
            let trig_part = Complex64::new(-si_part, ci_part) * (tau / 2.0);
            boundary_term + (fresnel_part + trig_part) * pref
        }
    };
    Ok(cis(c0 * tau) * value)
}

/// Large-N continuum modulation γ(τ) with the slow 1/N terms kept.
#[derive(Clone, Copy, Debug)]
pub struct GammaLargeN {
    pub value: Complex64,
    /// False when the logarithmic Ci(κτ/N) terms sit too close to their
    /// divergence for the phase to be meaningful.
    pub phase_convergent: bool,
    /// False when N is below the expansion's validity threshold (100).
    pub large_n: bool,
}

/// γ(τ) in the N→∞ form with ω0 = κ/N, κ = 4πnC3/3 and the inner cutoff
/// taken to infinity.
pub fn gamma_largen(
    tau: f64,
    kappa: f64,
    eta: f64,
    n_atoms: usize,
    c0: f64,
) -> Result<GammaLargeN> {
    if n_atoms < 2 {
        return Err(Error::Domain(format!("need at least two atoms (got {n_atoms})")));
    }
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("gamma_largen requires tau >= 0 (got {tau})")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("gamma_largen requires kappa > 0 (got {kappa})")));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("gamma_largen requires eta > 0 (got {eta})")));
    }
    let large_n = n_atoms >= 100;
    if tau == 0.0 {
        return Ok(GammaLargeN { value: Complex64::new(1.0, 0.0), phase_convergent: true, large_n });
    }
    let ctx = "large-N continuum";
    let nf = n_atoms as f64;
    let x = kappa * tau / nf;
    let phase_convergent = x >= 1e-12;
    let beta = 4.0 * eta / tau;
    let phi = tau / (4.0 * eta);
    let f_sat = f_tau(eta, tau).map_err(|e| with_context(e, ctx))?;
    let ds = FRESNEL_LIMIT - fresnel_s(phi.sqrt());
    let dc = FRESNEL_LIMIT - fresnel_c(phi.sqrt());
    let ci_sum = cos_integral(x).map_err(|e| with_context(e, ctx))?
        + cos_integral_mod(beta, x).map_err(|e| with_context(e, ctx))?;
    let fresnel_scale = 2.0 * (eta * tau).sqrt() * kappa / nf;
    let re = 1.0 - (kappa * tau / (2.0 * nf)) * (PI / 2.0 + f_sat)
        - fresnel_scale * (ds * phi.cos() - dc * phi.sin());
    let im = (kappa * tau / nf) * (1.0 - 0.5 * ci_sum)
        + fresnel_scale * (dc * phi.cos() - ds * phi.sin());
    let value = cis(c0 * tau) * Complex64::new(re, im);
    Ok(GammaLargeN { value, phase_convergent, large_n })
}

/// κ = 4πnC3/3, the collective dipolar dephasing rate scale.
pub fn kappa(density: f64, c3: f64) -> f64 {
    4.0 * PI * density * c3 / 3.0
}

/// N-independent asymptotic Ramsey contrast at the revival times:
/// exp(−p_d·κτ/2·(π/2+F(τ)))·exp(−2p_d√(ητ)κ·ΔS·cos φ)·exp(2p_d√(ητ)κ·ΔC·sin φ)
/// with φ = τ/(4η) and ΔS, ΔC the Fresnel distances from their limits.
pub fn contrast_asymptotic(tau: f64, kappa: f64, eta: f64, p_d: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("contrast_asymptotic requires tau >= 0 (got {tau})")));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("contrast_asymptotic requires eta > 0 (got {eta})")));
    }
    if tau == 0.0 {
        return Ok(1.0);
    }
    let phi = tau / (4.0 * eta);
    let f_sat = f_tau(eta, tau).map_err(|e| with_context(e, "asymptotic contrast"))?;
    let ds = FRESNEL_LIMIT - fresnel_s(phi.sqrt());
    let dc = FRESNEL_LIMIT - fresnel_c(phi.sqrt());
    let root = 2.0 * p_d * (eta * tau).sqrt() * kappa;
    Ok((-p_d * kappa * tau / 2.0 * (PI / 2.0 + f_sat)).exp()
        * (-root * ds * phi.cos()).exp()
        * (root * dc * phi.sin()).exp())
}

/// Contrast decay from the free-space van der Waals tail alone:
/// exp(−2 p_d √(π/8) κ √(ητ)).
pub fn free_space_contrast(tau: f64, kappa: f64, eta: f64, p_d: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("free_space_contrast requires tau >= 0 (got {tau})")));
    }
    if !(eta >= 0.0) {
        return Err(Error::Domain(format!("free_space_contrast requires eta >= 0 (got {eta})")));
    }
    Ok((-2.0 * p_d * FRESNEL_LIMIT * kappa * (eta * tau).sqrt()).exp())
}

/// Which variable the Ramsey fringe oscillates in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalDomain {
    /// Fringes in the delay τ at the Stark-shifted transition frequency.
    Time,
    /// Fringes in the pulse detuning at fixed delay; `omega_fringe` is
    /// then the detuning from the shifted transition.
    Frequency,
}

/// The Ramsey signal P = 2 p_g p_d (1 + Re{e^{i(ωτ+ξ)} G}). The two
/// domains share the expression; the enum records which quantity the
/// caller swept.
pub fn ramsey_signal(
    tau: f64,
    g: Complex64,
    omega_fringe: f64,
    xi: f64,
    p_g: f64,
    p_d: f64,
    _domain: SignalDomain,
) -> f64 {
    2.0 * p_g * p_d * (1.0 + (cis(omega_fringe * tau + xi) * g).re)
}

/// Fringe frequency of the time-domain signal: the Stark-shifted |d⟩
/// energy relative to the ground state.
pub fn fringe_frequency(p: &crate::params::PhysicalParams) -> Result<f64> {
    Ok(p.stark_shifted_omega_d()? - p.omega_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::from_raw;

    const TAU2PI: f64 = std::f64::consts::TAU;

    fn fig4_coeffs() -> PotentialCoefficients {
        from_raw(1.0, 2.5, 10.0).unwrap()
    }

    fn small_cfg() -> RamseyConfig {
        RamseyConfig {
            p_g: 0.95,
            p_d: 0.05,
            atom_count: 40,
            density: 0.35,
            blockade_radius: 0.0,
            tau_grid: vec![0.0, 0.4, 1.1, 2.0],
            realizations: 6,
            seed: 0x5eed,
            interaction_mode: InteractionMode::Full,
        }
    }

    #[test]
    fn modulation_is_one_at_zero_delay_and_zero_pd() {
        let c = fig4_coeffs();
        let cfg = small_cfg();
        let ens = sample_ensemble(&cfg, 0).unwrap();
        let g0 = g_exact(&ens.positions, &c, 0.95, 0.05, 0.0, InteractionMode::Full).unwrap();
        assert_eq!(g0, Complex64::new(1.0, 0.0));
        let g = g_exact(&ens.positions, &c, 1.0, 0.0, 1.7, InteractionMode::Full).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn modulation_magnitude_never_exceeds_one() {
        let c = fig4_coeffs();
        let cfg = small_cfg();
        let ens = sample_ensemble(&cfg, 3).unwrap();
        for mode in [
            InteractionMode::Full,
            InteractionMode::DipolePlusConstant,
            InteractionMode::AllToAll,
            InteractionMode::FreeSpace,
        ] {
            for tau in [0.1, 0.9, 3.3, 17.0] {
                let g = g_exact(&ens.positions, &c, 0.5, 0.5, tau, mode).unwrap();
                assert!(g.norm() <= 1.0 + 1e-12, "{mode:?} tau={tau}: |G|={}", g.norm());
            }
        }
    }

    #[test]
    fn coincident_atoms_are_rejected() {
        let c = fig4_coeffs();
        let pos = vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(g_exact(&pos, &c, 0.5, 0.5, 1.0, InteractionMode::Full).is_err());
    }

    #[test]
    fn permutation_invariance_of_the_product() {
        let c = fig4_coeffs();
        let cfg = small_cfg();
        let mut pos = sample_ensemble(&cfg, 1).unwrap().positions;
        let g1 = g_exact(&pos, &c, 0.9, 0.1, 1.3, InteractionMode::Full).unwrap();
        pos.reverse();
        pos.swap(3, 11);
        let g2 = g_exact(&pos, &c, 0.9, 0.1, 1.3, InteractionMode::Full).unwrap();
        assert!((g1 - g2).norm() < 1e-14);
    }

    #[test]
    fn all_to_all_product_matches_closed_form() {
        let c = fig4_coeffs();
        let cfg = RamseyConfig {
            interaction_mode: InteractionMode::AllToAll,
            atom_count: 17,
            ..small_cfg()
        };
        let ens = sample_ensemble(&cfg, 0).unwrap();
        for tau in [0.3, 1.9, 5.2] {
            let g = g_exact(&ens.positions, &c, 0.6, 0.4, tau, InteractionMode::AllToAll)
                .unwrap();
            let cp = contrast_all_to_all(17, 0.6, 0.4, c.c0, tau).unwrap();
            assert!((g.norm() - cp.contrast).abs() < 1e-12);
            let phase = g.im.atan2(g.re);
            let wrapped = (cp.phase - phase + PI).rem_euclid(2.0 * PI) - PI;
            assert!(wrapped.abs() < 1e-12, "phase {phase} vs {}", cp.phase);
        }
    }

    #[test]
    fn revivals_and_nulls_of_the_all_to_all_contrast() {
        let c0 = 1.7;
        for k in 1..=3 {
            let tau = TAU2PI * k as f64 / c0;
            let cp = contrast_all_to_all(100, 0.5, 0.5, c0, tau).unwrap();
            assert!((cp.contrast - 1.0).abs() < 1e-12, "revival {k}: {}", cp.contrast);
        }
        for k in 0..3 {
            let tau = (2.0 * k as f64 + 1.0) * PI / c0;
            let cp = contrast_all_to_all(100, 0.5, 0.5, c0, tau).unwrap();
            assert!(cp.contrast.abs() < 1e-12, "null {k}: {}", cp.contrast);
        }
    }

    #[test]
    fn ensemble_respects_radius_and_blockade() {
        let cfg = RamseyConfig {
            blockade_radius: 0.8,
            atom_count: 120,
            ..small_cfg()
        };
        let ens = sample_ensemble(&cfg, 5).unwrap();
        let rs = cfg.sample_radius();
        for p in &ens.positions {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!(r <= rs * (1.0 + 1e-12));
        }
        for i in 0..ens.positions.len() {
            for j in (i + 1)..ens.positions.len() {
                let d: f64 = (0..3)
                    .map(|a| (ens.positions[i][a] - ens.positions[j][a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(d >= cfg.blockade_radius, "pair ({i},{j}) at {d}");
            }
        }
        assert!(ens.rejected_count > 0, "a dense draw should reject at least once");
    }

    #[test]
    fn infeasible_packing_is_rejected() {
        let cfg = RamseyConfig { blockade_radius: 2.0, ..small_cfg() };
        // packing = pi*0.35*8/6 = 1.47 > 0.3.
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_matches_exact_engine() {
        let c = fig4_coeffs();
        let cfg = RamseyConfig { realizations: 1, atom_count: 8, ..small_cfg() };
        let series = monte_carlo_contrast(&cfg, &c).unwrap();
        let again = monte_carlo_contrast(&cfg, &c).unwrap();
        for i in 0..cfg.tau_grid.len() {
            assert_eq!(series.mean_g[i], again.mean_g[i]);
        }
        // Single realization equals the exact product on the same draw.
        let ens = sample_ensemble(&cfg, 0).unwrap();
        let direct = g_exact_series(
            &ens.positions,
            &c,
            cfg.p_g,
            cfg.p_d,
            &cfg.tau_grid,
            cfg.interaction_mode,
        )
        .unwrap();
        for i in 0..cfg.tau_grid.len() {
            assert_eq!(series.mean_g[i], direct[i]);
            assert_eq!(series.contrast[i], direct[i].norm());
            assert_eq!(series.contrast_stderr[i], 0.0);
        }
        assert_eq!(series.contrast[0], 1.0);
    }

    #[test]
    fn monte_carlo_all_to_all_matches_closed_form() {
        let c = fig4_coeffs();
        let cfg = RamseyConfig {
            interaction_mode: InteractionMode::AllToAll,
            realizations: 3,
            atom_count: 25,
            ..small_cfg()
        };
        let series = monte_carlo_contrast(&cfg, &c).unwrap();
        for (i, &tau) in cfg.tau_grid.iter().enumerate() {
            let cp = contrast_all_to_all(25, cfg.p_g, cfg.p_d, c.c0, tau).unwrap();
            assert!((series.contrast[i] - cp.contrast).abs() < 1e-12);
            assert!(series.contrast_stderr[i] < 1e-13);
        }
    }

    #[test]
    fn gamma_continuum_anchor_and_limits() {
        // Reference from 50-digit quadrature of the defining integral.
        let got = gamma_continuum(0.7, 0.3, 12.0, 0.8, 2.2, GammaMethod::ClosedForm).unwrap();
        assert!((got.re - -0.41919702519998129).abs() < 1e-10, "re {}", got.re);
        assert!((got.im - 0.55997544261999874).abs() < 1e-10, "im {}", got.im);
        let quad = gamma_continuum(0.7, 0.3, 12.0, 0.8, 2.2, GammaMethod::Quadrature).unwrap();
        assert!((quad - got).norm() < 1e-9, "closed {got} vs quad {quad}");

        for method in [GammaMethod::ClosedForm, GammaMethod::Quadrature] {
            let one = gamma_continuum(0.0, 0.3, 12.0, 0.8, 2.2, method).unwrap();
            assert_eq!(one, Complex64::new(1.0, 0.0));
        }
        // Degenerate window: pure constant shift.
        let g = gamma_continuum(1.3, 0.0, 0.0, 0.8, 2.2, GammaMethod::ClosedForm).unwrap();
        assert!((g - cis(2.2 * 1.3)).norm() < 1e-15);
        assert!(gamma_continuum(1.0, 5.0, 1.0, 0.8, 0.0, GammaMethod::ClosedForm).is_err());
    }

    #[test]
    fn large_n_modulation_reproduces_the_asymptotic_contrast() {
        // At revival times the contrast |p_g + p_d gamma|^(N-1) built from
        // the 1/N expansion must converge to the N-independent law.
        let kap = kappa(0.35, 2.5);
        let eta = 1.6;
        let (p_g, p_d) = (0.95, 0.05);
        let c0 = 1.0;
        let n = 1_000_000usize;
        for k in 1..=3u32 {
            let tau = TAU2PI * k as f64 / c0;
            let g = gamma_largen(tau, kap, eta, n, c0).unwrap();
            assert!(g.large_n);
            assert!(g.phase_convergent);
            let z = Complex64::new(p_g, 0.0) + g.value * p_d;
            let contrast = z.norm().powf((n - 1) as f64);
            let want = contrast_asymptotic(tau, kap, eta, p_d).unwrap();
            assert!(
                (contrast - want).abs() < 1e-4,
                "tau {tau}: finite-N {contrast:.8e} vs asymptotic {want:.8e}"
            );
        }
        // Zero delay is exact, and a vanishing kappa*tau/N flags the phase.
        let g0 = gamma_largen(0.0, kap, eta, n, c0).unwrap();
        assert_eq!(g0.value, Complex64::new(1.0, 0.0));
        let tiny = gamma_largen(1e-9, 1e-3, eta, n, c0).unwrap();
        assert!(!tiny.phase_convergent);
    }

    #[test]
    fn asymptotic_contrast_reference_values() {
        let kap = kappa(0.35, 2.5);
        let eta = 1.6;
        // Reference from 50-digit evaluation of the closed form.
        let cases = [
            (TAU2PI, 0.12556617196152912),
            (2.0 * TAU2PI, 0.020255606609228608),
            (3.0 * TAU2PI, 0.0033021992401750858),
        ];
        for (tau, want) in cases {
            let got = contrast_asymptotic(tau, kap, eta, 0.05).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "tau {tau}: got {got:.17e}, want {want:.17e}"
            );
        }
        assert_eq!(contrast_asymptotic(0.0, kap, eta, 0.05).unwrap(), 1.0);
    }

    #[test]
    fn free_space_contrast_is_stretched_exponential() {
        let kap = 3.0;
        let (eta, pd) = (1.6, 0.05);
        assert_eq!(free_space_contrast(0.0, kap, eta, pd).unwrap(), 1.0);
        // log-contrast linear in sqrt(tau).
        let slope = |tau: f64| {
            free_space_contrast(tau, kap, eta, pd).unwrap().ln() / tau.sqrt()
        };
        let want = -2.0 * pd * FRESNEL_LIMIT * kap * eta.sqrt();
        for tau in [0.3, 1.0, 7.0] {
            assert!((slope(tau) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ramsey_signal_limits() {
        let p = ramsey_signal(
            0.0,
            Complex64::new(1.0, 0.0),
            3.0,
            0.0,
            0.5,
            0.5,
            SignalDomain::Time,
        );
        assert!((p - 1.0).abs() < 1e-15);
        let p = ramsey_signal(
            2.0,
            Complex64::new(0.0, 0.0),
            3.0,
            1.0,
            0.3,
            0.7,
            SignalDomain::Frequency,
        );
        assert!((p - 2.0 * 0.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn config_validation_catches_bad_populations_and_grids() {
        let mut cfg = small_cfg();
        cfg.p_g = 0.9;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.tau_grid.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.atom_count = 1;
        assert!(cfg.validate().is_err());
    }
}
