//! Invariant checks over many seeded random draws: symmetries, bounds,
//! parities, and cross-module identities that must hold for every valid
//! parameter combination, not just at frozen anchors.

mod common;

use cavity_ramsey::pairham::{build_full, eigenvalues_sym, perturbation_from_couplings};
use cavity_ramsey::params::PhysicalParams;
use cavity_ramsey::potential::{self, Regime};
use cavity_ramsey::ramsey::{self, GammaMethod, InteractionMode};
use cavity_ramsey::rng::SplitMix64;
use cavity_ramsey::specfun;
use std::f64::consts::TAU;

fn random_params(rng: &mut SplitMix64) -> PhysicalParams {
    let omega_d = TAU * (1.0e4 + 9.0e4 * rng.next_f64());
    let delta = TAU * (10.0 + 90.0 * rng.next_f64()) * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
    let big_delta =
        TAU * (100.0 + 900.0 * rng.next_f64()) * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
    let mu = 1.0 + 60.0 * rng.next_f64();
    PhysicalParams::half_wave_cavity(omega_d, delta, big_delta, mu).unwrap()
}

#[test]
fn spectrum_sum_and_product_match_trace_and_determinant() {
    let mut rng = SplitMix64::new(0x5eed_1001);
    for _ in 0..30 {
        let p = random_params(&mut rng);
        let draw = |rng: &mut SplitMix64| 10.0 * (rng.next_f64() - 0.5);
        let h = build_full(
            &p,
            draw(&mut rng),
            draw(&mut rng),
            draw(&mut rng),
            draw(&mut rng),
            draw(&mut rng),
            draw(&mut rng),
        );
        let eig = eigenvalues_sym(&h).unwrap();
        let trace: f64 = (0..6).map(|i| h.at(i, i)).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!(((sum - trace) / trace).abs() < 1e-12);
        let det = common::lu_determinant(h.matrix.clone(), 6);
        let prod: f64 = eig.values.iter().product();
        assert!(((prod - det) / det).abs() < 1e-8, "{prod} vs {det}");
    }
}

#[test]
fn perturbation_orders_have_definite_coupling_parity() {
    // Order 2 is quadratic in (U, J) and the g's; order 3 is linear in the
    // exchange couplings. Sign flips therefore map the breakdown onto
    // itself exactly (the same float products in the same order).
    let mut rng = SplitMix64::new(0x5eed_1002);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let draw = |rng: &mut SplitMix64| 6.0 * (rng.next_f64() - 0.5);
        let (u, j) = (draw(&mut rng), draw(&mut rng));
        let (g1a, g1b, g2a, g2b) =
            (draw(&mut rng), draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let base = perturbation_from_couplings(&p, u, j, g1a, g1b, g2a, g2b).unwrap();
        let flipped_uj = perturbation_from_couplings(&p, -u, -j, g1a, g1b, g2a, g2b).unwrap();
        assert_eq!(base.orders.de2.to_bits(), flipped_uj.orders.de2.to_bits());
        assert_eq!((-base.orders.de3).to_bits(), flipped_uj.orders.de3.to_bits());
        let flipped_g =
            perturbation_from_couplings(&p, u, j, -g1a, -g1b, -g2a, -g2b).unwrap();
        assert_eq!(base.orders.de2.to_bits(), flipped_g.orders.de2.to_bits());
        assert_eq!(base.orders.de3.to_bits(), flipped_g.orders.de3.to_bits());
        assert_eq!(base.orders.de4.to_bits(), flipped_g.orders.de4.to_bits());
        assert_eq!(
            base.pair_interaction.to_bits(),
            flipped_g.pair_interaction.to_bits()
        );
    }
}

#[test]
fn modulation_modulus_never_exceeds_one() {
    // |G| is a mean of products of points on the segment from p_g to
    // p_g + p_d on the unit-circle chord, each of modulus <= 1.
    let mut rng = SplitMix64::new(0x5eed_1003);
    for _ in 0..40 {
        let n = 2 + (rng.next_u64() % 5) as usize;
        let mut positions = Vec::with_capacity(n);
        for _ in 0..n {
            positions.push([
                4.0 * (rng.next_f64() - 0.5),
                4.0 * (rng.next_f64() - 0.5),
                4.0 * (rng.next_f64() - 0.5),
            ]);
        }
        let coeffs = potential::from_raw(
            4.0 * (rng.next_f64() - 0.5),
            4.0 * (rng.next_f64() - 0.5),
            4.0 * (rng.next_f64() - 0.5),
        )
        .unwrap();
        let p_d = rng.next_f64();
        let tau = 5.0 * rng.next_f64();
        for mode in [
            InteractionMode::Full,
            InteractionMode::DipolePlusConstant,
            InteractionMode::AllToAll,
            InteractionMode::FreeSpace,
        ] {
            let g = ramsey::g_exact(&positions, &coeffs, 1.0 - p_d, p_d, tau, mode).unwrap();
            assert!(g.norm() <= 1.0 + 1e-12, "{mode:?}: |G| = {}", g.norm());
        }
    }
}

#[test]
fn modulation_is_invariant_under_atom_relabeling() {
    let mut rng = SplitMix64::new(0x5eed_1004);
    for _ in 0..25 {
        let n = 3 + (rng.next_u64() % 4) as usize;
        let mut positions = Vec::with_capacity(n);
        for _ in 0..n {
            positions.push([
                3.0 * (rng.next_f64() - 0.5),
                3.0 * (rng.next_f64() - 0.5),
                3.0 * (rng.next_f64() - 0.5),
            ]);
        }
        let coeffs = potential::from_raw(0.7, -1.3, 2.1).unwrap();
        let tau = 2.0 * rng.next_f64();
        let g = ramsey::g_exact(&positions, &coeffs, 0.6, 0.4, tau, InteractionMode::Full)
            .unwrap();
        // Fisher-Yates with the same stream; the modulation is a symmetric
        // function of the atoms, so any relabeling leaves it unchanged.
        let mut shuffled = positions.clone();
        for i in (1..n).rev() {
            let k = (rng.next_u64() % (i as u64 + 1)) as usize;
            shuffled.swap(i, k);
        }
        let h = ramsey::g_exact(&shuffled, &coeffs, 0.6, 0.4, tau, InteractionMode::Full)
            .unwrap();
        assert!((g - h).norm() <= 1e-13 * g.norm().max(1e-3), "{g} vs {h}");
    }
}

#[test]
fn closed_form_continuum_matches_quadrature_on_random_draws() {
    let mut rng = SplitMix64::new(0x5eed_1005);
    for i in 0..15 {
        let w0 = 0.05 + 0.45 * rng.next_f64();
        let wb = 5.0 + 15.0 * rng.next_f64();
        let eta = 0.2 + 1.8 * rng.next_f64();
        let c0 = 5.0 * rng.next_f64();
        let tau = 0.01 + 4.99 * rng.next_f64();
        let closed =
            ramsey::gamma_continuum(tau, w0, wb, eta, c0, GammaMethod::ClosedForm).unwrap();
        let quad =
            ramsey::gamma_continuum(tau, w0, wb, eta, c0, GammaMethod::Quadrature).unwrap();
        assert!(
            (closed - quad).norm() < 1e-9,
            "draw {i}: closed {closed} vs quadrature {quad}"
        );
    }
}

#[test]
fn fresnel_derivatives_match_their_integrands() {
    let mut rng = SplitMix64::new(0x5eed_1006);
    let h = 1e-5;
    for _ in 0..20 {
        let x = 0.1 + 4.9 * rng.next_f64();
        let ds = (specfun::fresnel_s(x + h) - specfun::fresnel_s(x - h)) / (2.0 * h);
        let dc = (specfun::fresnel_c(x + h) - specfun::fresnel_c(x - h)) / (2.0 * h);
        assert!((ds - (x * x).sin()).abs() < 1e-6, "S'({x})");
        assert!((dc - (x * x).cos()).abs() < 1e-6, "C'({x})");
    }
}

#[test]
fn saturation_function_is_monotone_and_bounded() {
    // F grows from 0 toward pi/2 as tau increases at fixed eta.
    let eta = 1.6;
    let mut last = 0.0;
    assert_eq!(specfun::f_tau(eta, 0.0).unwrap(), 0.0);
    for i in 1..=50 {
        let tau = 0.02 * i as f64 * i as f64;
        let f = specfun::f_tau(eta, tau).unwrap();
        assert!(f > last - 1e-12, "F({tau}) = {f} after {last}");
        assert!(f < std::f64::consts::FRAC_PI_2);
        last = f;
    }
}

#[test]
fn regime_labels_track_the_dominant_term() {
    // With all-positive coefficients the crossover radii coincide with
    // pointwise dominance, so a 3x margin in one term pins the label.
    let mut rng = SplitMix64::new(0x5eed_1007);
    let mut checked = 0;
    for _ in 0..400 {
        let c0 = 0.01 + 10.0 * rng.next_f64();
        let c3 = 0.01 + 10.0 * rng.next_f64();
        let c6 = 0.01 + 10.0 * rng.next_f64();
        let r = 0.2 + 5.0 * rng.next_f64();
        let coeffs = potential::from_raw(c0, c3, c6).unwrap();
        let y = 1.0 / (r * r * r);
        let (t0, t3, t6) = (c0, c3 * y, c6 * y * y);
        let expected = if t6 >= 3.0 * t3.max(t0) {
            Regime::FreeVdw
        } else if t3 >= 3.0 * t6.max(t0) {
            Regime::DipoleDipole
        } else if t0 >= 3.0 * (t3 + t6) {
            Regime::AllToAll
        } else {
            continue;
        };
        checked += 1;
        let got = potential::classify_regime(&coeffs, r).unwrap();
        assert_eq!(got, expected, "r = {r}, terms ({t0:.3}, {t3:.3}, {t6:.3})");
    }
    assert!(checked > 60, "only {checked} draws had a dominant term");
}

#[test]
fn cavity_radius_links_the_coefficient_ratio() {
    // C3/C6 = (1 + Delta/(2 delta)) sign(delta)/R^3 holds to machine
    // precision because both sides share one dipole-dipole constant.
    let mut rng = SplitMix64::new(0x5eed_1008);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let c = potential::coefficients(&p).unwrap();
        let r = c.r_cavity.unwrap();
        let a = 1.0 + p.forster_detuning() / (2.0 * p.delta());
        let lhs = c.c3 / c.c6;
        let rhs = a * p.delta().signum() / (r * r * r);
        assert!(
            ((lhs - rhs) / rhs).abs() < 1e-12,
            "C3/C6 {lhs} vs detuning form {rhs}"
        );
        let eta = c.eta.unwrap();
        assert!(((c.c6 - eta * c.c3 * c.c3) / c.c6).abs() < 1e-12);
    }
}

#[test]
fn exchange_symmetrization_is_invariant_under_atom_swap() {
    // Swapping the atoms permutes the couplings; the pair interaction and
    // the order sums are symmetric functions of the pair.
    let mut rng = SplitMix64::new(0x5eed_1009);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let draw = |rng: &mut SplitMix64| 6.0 * (rng.next_f64() - 0.5);
        let (u, j) = (draw(&mut rng), draw(&mut rng));
        let (g1a, g1b, g2a, g2b) =
            (draw(&mut rng), draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let a = perturbation_from_couplings(&p, u, j, g1a, g1b, g2a, g2b).unwrap();
        let b = perturbation_from_couplings(&p, u, j, g2a, g2b, g1a, g1b).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-12);
        assert!(rel(a.pair_interaction, b.pair_interaction) < 1e-13);
        assert!(rel(a.orders.total(), b.orders.total()) < 1e-13);
        assert_eq!(a.stark_shift[0].to_bits(), b.stark_shift[1].to_bits());
        assert_eq!(a.stark_shift[1].to_bits(), b.stark_shift[0].to_bits());
    }
}
