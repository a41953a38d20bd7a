//! Helpers shared by the integration tests: random parameter draws and an
//! oracle for the steady-state condition written independently of the
//! library's polynomial.

#![allow(dead_code)]

use std::f64::consts::PI;

use cpa_cavity::SystemParams;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A physically reasonable random parameter set in gamma units.
///
/// The crystal stays below the bare-cavity parametric threshold and the
/// drive keeps photon numbers within the oracle scan range.
pub fn random_params(r: &mut StdRng) -> SystemParams {
    let kappa_l: f64 = r.random_range(1.0..12.0);
    let kappa_r: f64 = if r.random_bool(0.7) {
        kappa_l
    } else {
        r.random_range(1.0..12.0)
    };
    let half_kappa = 0.5 * (kappa_l + kappa_r);
    let delta_c: f64 = r.random_range(-8.0..8.0);
    let threshold = 0.5 * (half_kappa * half_kappa + delta_c * delta_c).sqrt();
    let g_nl_mag = if r.random_bool(0.2) {
        0.0
    } else {
        r.random_range(0.0..0.9) * threshold
    };
    SystemParams {
        gamma: 1.0,
        kappa_l,
        kappa_r,
        g: r.random_range(0.3..4.0),
        delta_c,
        delta_tls: r.random_range(-5.0..5.0),
        g_nl_mag,
        phi: r.random_range(0.0..2.0 * PI),
        omega_d: r.random_range(0.1..3.0) * half_kappa,
    }
}

/// `n |den|^2 - |num|^2`: vanishes exactly when the closed-form field at
/// photon number `n` has `|c|^2 = n`. Built from the defining formulas, not
/// from library code.
pub fn oracle_residual(n: f64, p: &SystemParams) -> f64 {
    let g2 = p.g * p.g;
    let d = p.gamma * p.gamma / 4.0 + p.delta_tls * p.delta_tls + 2.0 * g2 * n;
    let kappa0 = (p.kappa_l + p.kappa_r) / 2.0 + g2 * p.gamma / 2.0 / d;
    let delta0 = p.delta_c - g2 * p.delta_tls / d;
    let big_g = Complex64::from_polar(p.g_nl_mag, p.phi);
    let den = kappa0 * kappa0 + delta0 * delta0 - 4.0 * big_g.norm_sqr();
    let num = Complex64::new(kappa0, -delta0) * p.omega_d + 2.0 * big_g * p.omega_d;
    n * den * den - num.norm_sqr()
}

/// Upper end of oracle scans: ten times the empty-cavity photon number,
/// at least 100, and ten times the photon number at which the saturated
/// (large `n`) form of the residual vanishes. The last term matters when the
/// crystal nearly cancels the cavity decay.
pub fn scan_max(p: &SystemParams) -> f64 {
    let hk = 0.5 * (p.kappa_l + p.kappa_r);
    let linear = (10.0 * p.omega_d * p.omega_d / (hk * hk)).max(100.0);
    let big_g = Complex64::from_polar(p.g_nl_mag, p.phi);
    let den = hk * hk + p.delta_c * p.delta_c - 4.0 * big_g.norm_sqr();
    let num = Complex64::new(hk, -p.delta_c) * p.omega_d + 2.0 * big_g * p.omega_d;
    if den > 0.0 {
        linear.max(10.0 * num.norm_sqr() / (den * den))
    } else {
        linear
    }
}

/// Oracle roots over `[0, scan_max]`: uniform steps of `step` up to 100,
/// then steps growing in proportion to `n`.
pub fn oracle_roots(p: &SystemParams, step: f64) -> Vec<f64> {
    let f = |n| oracle_residual(n, p);
    let hi = scan_max(p);
    let mut roots = sign_change_roots(f, 0.0, 100.0f64.min(hi), step);
    let ratio = 1.0 + step / 100.0;
    let (mut a, mut fa) = (100.0, f(100.0));
    while a < hi {
        let b = (a * ratio).min(hi);
        let fb = f(b);
        if fb == 0.0 || (fa != 0.0 && fa.signum() != fb.signum()) {
            roots.push(if fb == 0.0 { b } else { bisect(&f, a, b) });
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Roots of `f` on `[lo, hi]` found from sign changes on a uniform grid,
/// each refined by bisection.
pub fn sign_change_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for k in 1..=n {
        let x1 = (lo + k as f64 * step).min(hi);
        let f1 = f(x1);
        if f0 == 0.0 {
            out.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            out.push(bisect(&f, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        out.push(x0);
    }
    out
}

pub fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let sa = f(a).signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Number of oracle roots at input intensity `input`.
pub fn oracle_root_count(p: &SystemParams, input: f64, step: f64) -> usize {
    oracle_roots(&p.with_input_intensity(input), step).len()
}
