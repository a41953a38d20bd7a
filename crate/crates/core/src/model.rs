//! Closed-form algebra of the mean-field steady state.
//!
//! With the atom adiabatically eliminated, the cavity sees an intensity
//! dependent linewidth `kappa0(n_c)` and detuning `delta0(n_c)`. The field
//! then follows from a 2x2 linear system coupling `<c>` to `<c>*` through the
//! parametric term.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::SystemParams;

/// Guard on `|kappa0^2 + delta0^2 - 4|G|^2|`, in units of `gamma^2`.
pub const EPS_DEN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("parametric singularity: field denominator {denominator:e} vanishes at n_c = {n_c}")]
    ParametricSingularity { n_c: f64, denominator: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCavity {
    pub kappa0: f64,
    pub delta0: f64,
}

/// Effective SOC-dressed decay and detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocParams {
    /// `kappa/2 + 2|G| cos(phi)`; may be negative.
    pub beta: f64,
    /// `delta_c - 2|G| sin(phi)`.
    pub delta_c_prime: f64,
}

/// Saturation denominator `gamma^2/4 + delta_tls^2 + 2 g^2 n_c`.
pub fn saturation_denominator(n_c: f64, p: &SystemParams) -> f64 {
    unsaturated_denominator(p) + 2.0 * p.g * p.g * n_c
}

pub(crate) fn unsaturated_denominator(p: &SystemParams) -> f64 {
    0.25 * p.gamma * p.gamma + p.delta_tls * p.delta_tls
}

pub fn effective_cavity_params(n_c: f64, p: &SystemParams) -> EffectiveCavity {
    let d = saturation_denominator(n_c, p);
    let g2 = p.g * p.g;
    EffectiveCavity {
        kappa0: 0.5 * p.kappa() + 0.5 * g2 * p.gamma / d,
        delta0: p.delta_c - g2 * p.delta_tls / d,
    }
}

/// `kappa0^2 + delta0^2 - 4|G|^2` at photon number `n_c`.
pub fn field_denominator(n_c: f64, p: &SystemParams) -> f64 {
    let eff = effective_cavity_params(n_c, p);
    eff.kappa0 * eff.kappa0 + eff.delta0 * eff.delta0 - 4.0 * p.g_nl_mag * p.g_nl_mag
}

/// Steady intracavity field for an assumed photon number `n_c`.
pub fn intracavity_field(n_c: f64, p: &SystemParams) -> Result<Complex64, ModelError> {
    let eff = effective_cavity_params(n_c, p);
    let den = eff.kappa0 * eff.kappa0 + eff.delta0 * eff.delta0 - 4.0 * p.g_nl_mag * p.g_nl_mag;
    if den.abs() < EPS_DEN {
        return Err(ModelError::ParametricSingularity {
            n_c,
            denominator: den,
        });
    }
    let drive = Complex64::new(p.omega_d, 0.0);
    let num = Complex64::new(eff.kappa0, -eff.delta0) * drive + 2.0 * p.g_nl() * drive.conj();
    Ok(num / den)
}

/// Mean-field atomic coherence and inversion driven by the field `c_bar`.
///
/// Returns `(<sigma_->, <sigma_z>)`.
pub fn atomic_expectations(c_bar: Complex64, p: &SystemParams) -> (Complex64, f64) {
    let d0 = unsaturated_denominator(p);
    let sigma_z = -0.5 * d0 / (d0 + 2.0 * p.g * p.g * c_bar.norm_sqr());
    let sigma_minus = Complex64::new(0.0, 2.0 * p.g) * c_bar * sigma_z
        / Complex64::new(0.5 * p.gamma, p.delta_tls);
    (sigma_minus, sigma_z)
}

/// Mean output fields `(c_out_l, c_out_r)` from input–output relations.
pub fn output_fields(
    c_bar: Complex64,
    c_in_l: Complex64,
    c_in_r: Complex64,
    p: &SystemParams,
) -> (Complex64, Complex64) {
    (
        p.kappa_l.sqrt() * c_bar - c_in_l,
        p.kappa_r.sqrt() * c_bar - c_in_r,
    )
}

/// Output fields for the balanced in-phase inputs carried by `p.omega_d`.
pub fn balanced_output_fields(c_bar: Complex64, p: &SystemParams) -> (Complex64, Complex64) {
    let (l, r) = p.balanced_inputs();
    output_fields(c_bar, l.into(), r.into(), p)
}

pub fn soc_effective_params(p: &SystemParams) -> SocParams {
    let two_g = 2.0 * p.g_nl_mag;
    SocParams {
        beta: two_g.mul_add(p.phi.cos(), 0.5 * p.kappa()),
        delta_c_prime: (-two_g).mul_add(p.phi.sin(), p.delta_c),
    }
}
