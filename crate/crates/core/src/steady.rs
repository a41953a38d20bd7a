//! Self-consistent steady states.
//!
//! Writing `n_c = |<c>|^2` with the closed-form field turns the steady state
//! into one scalar equation in `n_c`. Multiplying through by `D^4`, with
//! `D = gamma^2/4 + delta_tls^2 + 2 g^2 n_c`, makes it a polynomial of degree
//! at most five:
//!
//! ```text
//! F(n) = n P(n)^2 - omega_d^2 R(n) D(n)^2
//! P = K^2 + Q^2 - 4|G|^2 D^2,  R = |K - iQ + 2 G D|^2
//! K = kappa0 D,  Q = delta0 D
//! ```
//!
//! Without the crystal (`G = 0`) `R = P` and the common positive factor is
//! dropped, leaving the classic bistability cubic `n P - omega_d^2 D^2`
//! (the residual times `D^2`).
//!
//! Every nonnegative real root is a fixed point. Roots are isolated
//! completely (not found by iteration), so unstable branches are recovered
//! alongside the stable ones.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{self, ModelError, EPS_DEN};
use crate::params::{ParamError, SystemParams};
use crate::poly::Poly;
use crate::stability::{self, Stability, StabilityReport, State, EPS_STAB};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
    #[error("parametric regime: leading coefficient {leading:e} is not positive")]
    ParametricRegime { leading: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Roots down to `-eps_root` are accepted and clamped to zero.
    pub eps_root: f64,
    /// Roots closer than this (relative, floor 1) are merged.
    pub merge_radius: f64,
    pub eps_den: f64,
    /// Relative residual acceptance, against [`Poly::eval_scale`].
    pub eps_res: f64,
    pub eps_stab: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps_root: 1e-12,
            merge_radius: 1e-8,
            eps_den: EPS_DEN,
            eps_res: 1e-9,
            eps_stab: EPS_STAB,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub n_c: f64,
    pub c_bar: Complex64,
    pub sigma_minus_bar: Complex64,
    pub sigma_z_bar: f64,
    pub stability: Stability,
    /// Largest real part of the Jacobian spectrum.
    pub margin: f64,
    /// Value of the self-consistency polynomial at `n_c`.
    pub residual: f64,
}

impl SteadyState {
    pub fn state(&self) -> State {
        [
            self.c_bar.re,
            self.c_bar.im,
            self.sigma_minus_bar.re,
            self.sigma_minus_bar.im,
            self.sigma_z_bar,
        ]
    }

    /// Mean output fields for the balanced inputs of `p`.
    pub fn output_fields(&self, p: &SystemParams) -> (Complex64, Complex64) {
        model::balanced_output_fields(self.c_bar, p)
    }

    /// Left and right output intensities.
    pub fn output_intensities(&self, p: &SystemParams) -> (f64, f64) {
        let (l, r) = self.output_fields(p);
        (l.norm_sqr(), r.norm_sqr())
    }
}

/// The self-consistency polynomial, kept split as `gain - omega_d^2 response`
/// so that the drive dependence stays explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfConsistencyPolynomial {
    poly: Poly,
    gain: Poly,
    response: Poly,
    nominal_degree: usize,
}

impl SelfConsistencyPolynomial {
    /// `c0..c5`, zero padded.
    pub fn coeffs(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (o, c) in out.iter_mut().zip(self.poly.coeffs()) {
            *o = *c;
        }
        out
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    /// `n P(n)^2`
    pub fn gain(&self) -> &Poly {
        &self.gain
    }

    /// `R(n) D(n)^2`; the polynomial is `gain - omega_d^2 response`.
    pub fn response(&self) -> &Poly {
        &self.response
    }

    pub fn eval(&self, n_c: f64) -> f64 {
        self.poly.eval_compensated(n_c)
    }

    /// Coefficient of the generic top degree (5 when the atom couples, 1
    /// otherwise).
    pub fn nominal_leading(&self) -> f64 {
        self.poly
            .coeffs()
            .get(self.nominal_degree)
            .copied()
            .unwrap_or(0.0)
    }

    /// Same system at a different drive amplitude.
    pub fn with_drive(&self, omega_d: f64) -> Self {
        Self {
            poly: &self.gain - &self.response.scale(omega_d * omega_d),
            ..self.clone()
        }
    }
}

/// Self-consistency residual evaluated through the closed-form effective
/// cavity, scaled by `D^4` (`D^2` and reduced by the common factor when
/// `G = 0`) so that it coincides with the polynomial.
pub fn self_consistency_residual(n_c: f64, p: &SystemParams) -> f64 {
    let d = model::saturation_denominator(n_c, p);
    let eff = model::effective_cavity_params(n_c, p);
    let den = model::field_denominator(n_c, p);
    let drive = Complex64::new(p.omega_d, 0.0);
    let num = Complex64::new(eff.kappa0, -eff.delta0) * drive + 2.0 * p.g_nl() * drive.conj();
    let d2 = d * d;
    if p.g_nl_mag == 0.0 {
        return (n_c * den - p.omega_d * p.omega_d) * d2;
    }
    (n_c * den * den - num.norm_sqr()) * d2 * d2
}

pub fn build_polynomial(p: &SystemParams) -> SelfConsistencyPolynomial {
    let g2 = p.g * p.g;
    let d = Poly::linear(model::unsaturated_denominator(p), 2.0 * g2);
    let k = &d.scale(0.5 * p.kappa()) + &Poly::constant(0.5 * g2 * p.gamma);
    let q = &d.scale(p.delta_c) - &Poly::constant(g2 * p.delta_tls);
    let d2 = &d * &d;
    let n = Poly::linear(0.0, 1.0);
    let nominal_degree = match (p.g > 0.0, p.g_nl_mag > 0.0) {
        (false, _) => 1,
        (true, false) => 3,
        (true, true) => 5,
    };
    let kq = &(&k * &k) + &(&q * &q);
    if p.g_nl_mag == 0.0 {
        let gain = &n * &kq;
        let poly = &gain - &d2.scale(p.omega_d * p.omega_d);
        return SelfConsistencyPolynomial {
            poly,
            gain,
            response: d2,
            nominal_degree,
        };
    }
    let big_p = &kq - &d2.scale(4.0 * p.g_nl_mag * p.g_nl_mag);
    let pump = 2.0 * p.g_nl();
    let re = &k + &d.scale(pump.re);
    let im = &d.scale(pump.im) - &q;
    let r = &(&re * &re) + &(&im * &im);
    let gain = &n * &(&big_p * &big_p);
    let response = &r * &d2;
    let poly = &gain - &response.scale(p.omega_d * p.omega_d);
    SelfConsistencyPolynomial {
        poly,
        gain,
        response,
        nominal_degree,
    }
}

/// Jacobian of the mean-field equations at a steady state.
pub fn jacobian(s: &SteadyState, p: &SystemParams) -> nalgebra::Matrix5<f64> {
    stability::jacobian_at(&s.state(), p, 0.0)
}

pub fn solve_steady_states(p: &SystemParams) -> Result<Vec<SteadyState>, SolverError> {
    solve_steady_states_with(p, &SolverOptions::default())
}

pub fn solve_steady_states_with(
    p: &SystemParams,
    opts: &SolverOptions,
) -> Result<Vec<SteadyState>, SolverError> {
    p.validate()?;
    let poly = build_polynomial(p);
    let leading = poly.nominal_leading();
    if leading <= 0.0 {
        return Err(SolverError::ParametricRegime { leading });
    }
    let roots = nonnegative_roots(&poly, opts);
    Ok(roots
        .into_iter()
        .filter_map(|n| steady_state_at(n, &poly, p, opts))
        .collect())
}

/// Nonnegative real roots of the polynomial, ascending.
pub fn nonnegative_roots(poly: &SelfConsistencyPolynomial, opts: &SolverOptions) -> Vec<f64> {
    let hi = poly.poly.root_bound().max(1.0);
    poly.poly
        .real_roots_in(-opts.eps_root, hi, opts.merge_radius)
        .into_iter()
        .map(|n| n.max(0.0))
        .collect()
}

/// Number of admissible steady states; cheaper than a full solve.
pub fn count_roots(
    poly: &SelfConsistencyPolynomial,
    p: &SystemParams,
    opts: &SolverOptions,
) -> usize {
    nonnegative_roots(poly, opts)
        .into_iter()
        .filter(|&n| model::field_denominator(n, p).abs() >= opts.eps_den)
        .count()
}

fn steady_state_at(
    n_c: f64,
    poly: &SelfConsistencyPolynomial,
    p: &SystemParams,
    opts: &SolverOptions,
) -> Option<SteadyState> {
    let residual = poly.eval(n_c);
    let scale = poly.poly.eval_scale(n_c);
    if residual.abs() > opts.eps_res * scale.max(1.0) {
        log::warn!("root n_c = {n_c} rejected: residual {residual:e} exceeds tolerance");
        return None;
    }
    let den = model::field_denominator(n_c, p);
    let c_bar = if den.abs() < opts.eps_den {
        Err(ModelError::ParametricSingularity {
            n_c,
            denominator: den,
        })
    } else {
        model::intracavity_field(n_c, p)
    };
    let c_bar = match c_bar {
        Ok(c) => c,
        Err(e) => {
            log::warn!("excluding root: {e}");
            return None;
        }
    };
    let (sigma_minus_bar, sigma_z_bar) = model::atomic_expectations(c_bar, p);
    let mut s = SteadyState {
        n_c,
        c_bar,
        sigma_minus_bar,
        sigma_z_bar,
        stability: Stability::Marginal,
        margin: 0.0,
        residual,
    };
    let report: StabilityReport =
        stability::classify_stability_with(&jacobian(&s, p), opts.eps_stab);
    s.stability = report.class;
    s.margin = report.margin;
    Some(s)
}

/// Independent solves over many parameter points.
pub fn solve_many(params: &[SystemParams]) -> Vec<Result<Vec<SteadyState>, SolverError>> {
    params.par_iter().map(solve_steady_states).collect()
}
