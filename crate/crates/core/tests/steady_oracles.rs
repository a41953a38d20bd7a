mod common;

use common::{oracle_residual, oracle_roots, random_params, rng, scan_max};
use cpa_cavity::dynamics::{mean_field_rhs, relax};
use cpa_cavity::model::{effective_cavity_params, soc_effective_params};
use cpa_cavity::steady::{build_polynomial, jacobian, self_consistency_residual};
use cpa_cavity::{solve_steady_states, Stability, SystemParams};
use proptest::prelude::*;

#[test]
fn every_oracle_root_is_found_by_the_solver() {
    let mut r = rng(11);
    for case in 0..100 {
        let p = random_params(&mut r);
        let solved: Vec<f64> = solve_steady_states(&p)
            .unwrap()
            .iter()
            .map(|s| s.n_c)
            .collect();
        let oracle = oracle_roots(&p, 1e-3);
        for n in &oracle {
            assert!(
                solved.iter().any(|m| (m - n).abs() <= 1e-6 * n.max(1.0)),
                "case {case}: oracle root {n} missing from {solved:?} ({p:?})"
            );
        }
    }
}

#[test]
fn root_count_is_odd_when_leading_coefficient_is_positive() {
    let mut r = rng(12);
    let mut checked = 0;
    while checked < 500 {
        let p = random_params(&mut r);
        let poly = build_polynomial(&p);
        if poly.poly().leading().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            continue;
        }
        let roots = solve_steady_states(&p).unwrap();
        assert!(
            roots.len() % 2 == 1,
            "{} roots at n = {:?} for {p:?}",
            roots.len(),
            roots.iter().map(|s| s.n_c).collect::<Vec<_>>()
        );
        checked += 1;
    }
}

#[test]
fn returned_roots_meet_residual_bound_where_resolvable() {
    let mut r = rng(13);
    for _ in 0..300 {
        let p = random_params(&mut r);
        let poly = build_polynomial(&p);
        let c = poly.coeffs();
        let slope = poly.poly().derivative();
        for s in solve_steady_states(&p).unwrap() {
            let bound = 1e-9 * (c[5].abs() * s.n_c.powi(5)).max(1.0);
            // one ulp of n_c moves F by about |F'| ulp; below that no double
            // can meet the bound
            let resolution =
                slope.eval(s.n_c).abs() * 2.0 * f64::EPSILON * s.n_c.max(f64::MIN_POSITIVE)
                    + 4.0 * f64::EPSILON * poly.poly().eval_scale(s.n_c);
            let f = poly.eval(s.n_c);
            assert!(
                f.abs() < bound.max(resolution),
                "|F({})| = {} >= {bound} (resolution {resolution})",
                s.n_c,
                f.abs()
            );
            assert!((s.c_bar.norm_sqr() - s.n_c).abs() <= 1e-8 * s.n_c.max(1.0));
        }
    }
}

#[test]
fn polynomial_matches_scaled_residual_at_random_points() {
    let mut r = rng(14);
    for _ in 0..50 {
        let p = random_params(&mut r);
        let poly = build_polynomial(&p);
        let g2 = p.g * p.g;
        for _ in 0..20 {
            let n = rand::Rng::random_range(&mut r, 0.0..scan_max(&p));
            let d = p.gamma * p.gamma / 4.0 + p.delta_tls * p.delta_tls + 2.0 * g2 * n;
            // without the crystal the common factor kappa0^2 + delta0^2 is dropped
            let expected = if p.g_nl_mag == 0.0 {
                let k0 = 0.5 * p.kappa() + 0.5 * g2 * p.gamma / d;
                let q0 = p.delta_c - g2 * p.delta_tls / d;
                oracle_residual(n, &p) / (k0 * k0 + q0 * q0) * d * d
            } else {
                oracle_residual(n, &p) * d.powi(4)
            };
            let got = poly.eval(n);
            let scale = poly.poly().eval_scale(n).max(expected.abs());
            assert!(
                (got - expected).abs() <= 1e-9 * scale,
                "n = {n}: {got} vs {expected}"
            );
            let closed = self_consistency_residual(n, &p);
            assert!((closed - expected).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn linear_crystal_free_limit_reduces_to_cubic() {
    let mut r = rng(15);
    for _ in 0..50 {
        let p = SystemParams {
            g_nl_mag: 0.0,
            ..random_params(&mut r)
        };
        let poly = build_polynomial(&p);
        assert!(poly.poly().degree() <= 3);
        // n (K^2 + Q^2) - Omega^2 D^2 with K, Q the D-scaled linewidth and detuning
        let cubic = |n: f64| {
            let g2 = p.g * p.g;
            let d = p.gamma * p.gamma / 4.0 + p.delta_tls * p.delta_tls + 2.0 * g2 * n;
            let k = 0.5 * p.kappa() * d + 0.5 * g2 * p.gamma;
            let q = p.delta_c * d - g2 * p.delta_tls;
            n * (k * k + q * q) - p.omega_d * p.omega_d * d * d
        };
        for n in [0.0, 0.5, 3.0, 17.0, 120.0] {
            let want = cubic(n);
            assert!(
                (poly.eval(n) - want).abs() <= 1e-10 * want.abs().max(poly.poly().eval_scale(n)),
                "n = {n}: {} vs {want}",
                poly.eval(n)
            );
        }
    }
}

#[test]
fn effective_parameters_at_fig3_photon_number() {
    for phi in [
        2.0 * std::f64::consts::PI / 3.0,
        4.0 * std::f64::consts::PI / 3.0,
        1.0,
    ] {
        let p = SystemParams {
            gamma: 1.0,
            kappa_l: 10.0,
            kappa_r: 10.0,
            g: 1.0,
            delta_c: 0.0,
            delta_tls: 4.5,
            g_nl_mag: 9.98,
            phi,
            omega_d: 1.0,
        };
        let eff = effective_cavity_params(2.25, &p);
        // D = 0.25 + 20.25 + 4.5 = 25
        assert!((eff.kappa0 - (10.0 + 0.5 / 25.0)).abs() < 1e-12);
        assert!((eff.delta0 - (-4.5 / 25.0)).abs() < 1e-12);
        let soc = soc_effective_params(&p);
        assert!((soc.beta - (10.0 + 2.0 * 9.98 * phi.cos())).abs() < 1e-12);
        assert!((soc.delta_c_prime - (-2.0 * 9.98 * phi.sin())).abs() < 1e-12);
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let mut r = rng(16);
    let mut checked = 0;
    while checked < 100 {
        let p = random_params(&mut r);
        for s in solve_steady_states(&p).unwrap() {
            if checked == 100 {
                break;
            }
            let j = jacobian(&s, &p);
            let y0 = s.state();
            let h = 1e-6;
            for col in 0..5 {
                let (mut yp, mut ym) = (y0, y0);
                yp[col] += h;
                ym[col] -= h;
                let fp = mean_field_rhs(&yp, 0.0, &p, 0.0);
                let fm = mean_field_rhs(&ym, 0.0, &p, 0.0);
                for row in 0..5 {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    assert!(
                        (fd - j[(row, col)]).abs() < 1e-6,
                        "J[{row},{col}] = {} vs {fd}",
                        j[(row, col)]
                    );
                }
            }
            checked += 1;
        }
    }
}

#[test]
fn fixed_points_are_stationary_for_the_dynamics() {
    let mut r = rng(17);
    for _ in 0..100 {
        let p = random_params(&mut r);
        for s in solve_steady_states(&p).unwrap() {
            let f = mean_field_rhs(&s.state(), 0.0, &p, 0.0);
            let scale = 1.0 + p.kappa() * s.n_c.sqrt() + p.omega_d;
            assert!(
                f.iter().all(|v| v.abs() < 1e-7 * scale),
                "{f:?} at n = {}",
                s.n_c
            );
        }
    }
}

/// Perturbed stable points relax back; perturbed unstable points leave.
#[test]
fn stability_class_agrees_with_relaxation() {
    let mut r = rng(18);
    let (mut stable_seen, mut unstable_seen) = (0, 0);
    let mut tries = 0;
    while (stable_seen < 15 || unstable_seen < 5) && tries < 4000 {
        tries += 1;
        let p = random_params(&mut r);
        for s in solve_steady_states(&p).unwrap() {
            if s.margin.abs() < 1e-2 {
                continue;
            }
            let mut y = s.state();
            for v in y.iter_mut() {
                *v += 1e-3 * rand::Rng::random_range(&mut r, -1.0..1.0);
            }
            let dist = |a: &[f64; 5]| {
                a.iter()
                    .zip(s.state())
                    .map(|(x, z)| (x - z).abs())
                    .fold(0.0, f64::max)
            };
            match s.stability {
                Stability::Stable if stable_seen < 15 => {
                    let (end, settled) = relax(&p, y, 1e-8, 4000.0).unwrap();
                    assert!(
                        settled && dist(&end) < 1e-6,
                        "stable point at n = {} (margin {}) did not return: settled {settled}, distance {} ({p:?})",
                        s.n_c,
                        s.margin,
                        dist(&end)
                    );
                    stable_seen += 1;
                }
                Stability::Unstable if unstable_seen < 5 => {
                    let (end, _) = relax(&p, y, 1e-8, 4000.0).unwrap();
                    assert!(dist(&end) > 1e-2, "unstable point at n = {} held", s.n_c);
                    unstable_seen += 1;
                }
                _ => {}
            }
        }
    }
    assert!(
        stable_seen >= 15 && unstable_seen >= 1,
        "{stable_seen} stable, {unstable_seen} unstable"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_points_respect_bloch_bound(seed in any::<u64>()) {
        let p = random_params(&mut rng(seed));
        for s in solve_steady_states(&p).unwrap() {
            let b = s.sigma_minus_bar.norm_sqr() + s.sigma_z_bar * s.sigma_z_bar;
            prop_assert!(b <= 0.25 + 1e-12);
            prop_assert!(s.n_c >= 0.0);
        }
    }

    #[test]
    fn solver_output_is_sorted_and_distinct(seed in any::<u64>()) {
        let p = random_params(&mut rng(seed));
        let n: Vec<f64> = solve_steady_states(&p).unwrap().iter().map(|s| s.n_c).collect();
        prop_assert!(n.windows(2).all(|w| w[0] < w[1]), "{:?}", n);
    }
}
