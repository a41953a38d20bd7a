//! Coherent-perfect-absorption conditions.
//!
//! Nulling both outputs forces a real field `kappa <c> = omega_d`. Inserting
//! that into the steady state fixes three things at once: the photon number
//! (through the SOC-dressed decay `beta`), the cavity detuning, and the drive.
//! The conditions are necessary only; [`verify_cpa`] always confirms them by
//! solving the full steady state at the predicted drive and computing both
//! outputs directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, soc_effective_params};
use crate::params::{ParamError, SystemParams};
use crate::stability::Stability;
use crate::steady::{self, SolverError};
use crate::sweep::{self, Window};

/// Relative agreement required between a solver root and the predicted CPA
/// photon number.
pub const ROOT_MATCH_REL: f64 = 1e-8;
/// Output intensity at the CPA point, relative to the input intensity.
pub const NULL_OUTPUT_REL: f64 = 1e-12;
/// Relative tolerance for a user-supplied cavity detuning to count as the
/// CPA detuning.
pub const DETUNING_MATCH_REL: f64 = 1e-9;
/// Default relative tolerance of [`cpa_invariance_check`].
pub const INVARIANCE_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpaError {
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
    #[error("effective decay beta = {beta} is not positive; CPA analysis undefined")]
    NonPositiveBeta { beta: f64 },
    #[error("no atomic detuning admits CPA (radicand {radicand:e} <= 0)")]
    Infeasible { radicand: f64 },
    #[error("CPA drive requires symmetric mirrors (kappa_l = {kappa_l}, kappa_r = {kappa_r})")]
    AsymmetricMirrors { kappa_l: f64, kappa_r: f64 },
    #[error("photon number must be nonnegative (got {0})")]
    NegativePhotonNumber(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A violated CPA condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CpaViolation {
    NonPositivePhotonNumber,
    CouplingBelowCritical,
    DetuningExceedsCritical,
    CavityDetuningMismatch,
    NoMatchingRoot,
    OutputNotNulled,
}

impl CpaViolation {
    pub fn tag(&self) -> &'static str {
        match self {
            CpaViolation::NonPositivePhotonNumber => "NonPositivePhotonNumber",
            CpaViolation::CouplingBelowCritical => "CouplingBelowCritical",
            CpaViolation::DetuningExceedsCritical => "DetuningExceedsCritical",
            CpaViolation::CavityDetuningMismatch => "CavityDetuningMismatch",
            CpaViolation::NoMatchingRoot => "NoMatchingRoot",
            CpaViolation::OutputNotNulled => "OutputNotNulled",
        }
    }
}

/// Where the CPA point sits on the input–output curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchLocation {
    /// No multi-root window anywhere on the scanned curve.
    Monostable,
    OutsideBistableStable,
    OutsideBistableUnstable,
    InsideBistableStable,
    InsideBistableUnstable,
}

impl BranchLocation {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchLocation::Monostable => "Monostable",
            BranchLocation::OutsideBistableStable => "OutsideBistableStable",
            BranchLocation::OutsideBistableUnstable => "OutsideBistableUnstable",
            BranchLocation::InsideBistableStable => "InsideBistableStable",
            BranchLocation::InsideBistableUnstable => "InsideBistableUnstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpaReport {
    pub beta: f64,
    pub g_c: f64,
    pub delta_tls_c: f64,
    pub coupling_ratio: f64,
    pub n_c_cpa: f64,
    pub delta_c_required: f64,
    pub input_intensity: f64,
    pub omega_d_cpa: f64,
    pub feasible: bool,
    pub reasons: Vec<CpaViolation>,
    /// Largest of the two output intensities at the operating point.
    pub residual_out: f64,
    pub stability: Option<Stability>,
    pub bistable_window: Option<Window>,
    pub branch_location: Option<BranchLocation>,
}

/// Photon number at which both outputs can vanish.
pub fn cpa_photon_number(p: &SystemParams) -> Result<f64, CpaError> {
    let beta = positive_beta(p)?;
    let g2 = p.g * p.g;
    Ok(
        0.25 * (p.gamma / beta
            - (p.gamma * p.gamma + 4.0 * p.delta_tls * p.delta_tls) / (2.0 * g2)),
    )
}

/// Cavity detuning that makes the nulled field real.
///
/// At `delta_tls = 0` the condition degenerates to `delta_c' = 0`, which the
/// same expression already yields.
pub fn cpa_cavity_detuning(p: &SystemParams) -> f64 {
    let beta = soc_effective_params(p).beta;
    let two_g = 2.0 * p.g_nl_mag;
    two_g.mul_add(p.phi.sin(), 2.0 * beta * p.delta_tls / p.gamma)
}

/// Minimum coupling for CPA; CPA requires `g > g_c`.
pub fn critical_coupling(beta: f64, delta_tls: f64, gamma: f64) -> Result<f64, CpaError> {
    if beta <= 0.0 {
        return Err(CpaError::NonPositiveBeta { beta });
    }
    Ok((0.5 * beta * (gamma + 4.0 * delta_tls * delta_tls / gamma)).sqrt())
}

/// Largest atomic detuning magnitude admitting CPA at coupling `g`.
pub fn critical_detuning(g: f64, beta: f64, gamma: f64) -> Result<f64, CpaError> {
    if beta <= 0.0 {
        return Err(CpaError::NonPositiveBeta { beta });
    }
    let radicand = 0.5 * (g * g * gamma / beta - 0.5 * gamma * gamma);
    if radicand <= 0.0 {
        return Err(CpaError::Infeasible { radicand });
    }
    Ok(radicand.sqrt())
}

/// Drive amplitude and per-port input intensity placing the field at
/// photon number `n_c_cpa` with zero output.
pub fn cpa_input_amplitude(p: &SystemParams, n_c_cpa: f64) -> Result<(f64, f64), CpaError> {
    if !p.symmetric_mirrors() {
        return Err(CpaError::AsymmetricMirrors {
            kappa_l: p.kappa_l,
            kappa_r: p.kappa_r,
        });
    }
    if n_c_cpa < 0.0 {
        return Err(CpaError::NegativePhotonNumber(n_c_cpa));
    }
    let kappa = p.kappa();
    Ok((kappa * n_c_cpa.sqrt(), 0.5 * kappa * n_c_cpa))
}

/// `p` with the cavity detuning replaced by the CPA detuning.
pub fn with_cpa_detuning(p: &SystemParams) -> SystemParams {
    SystemParams {
        delta_c: cpa_cavity_detuning(p),
        ..*p
    }
}

/// `p` at the CPA detuning and drive; fails when the CPA photon number is
/// not positive.
pub fn cpa_operating_point(p: &SystemParams) -> Result<SystemParams, CpaError> {
    let n = cpa_photon_number(p)?;
    if n <= 0.0 {
        return Err(CpaError::Infeasible { radicand: n });
    }
    let (omega_d, _) = cpa_input_amplitude(p, n)?;
    Ok(with_cpa_detuning(p).with_drive(omega_d))
}

fn positive_beta(p: &SystemParams) -> Result<f64, CpaError> {
    let beta = soc_effective_params(p).beta;
    if beta <= 0.0 {
        Err(CpaError::NonPositiveBeta { beta })
    } else {
        Ok(beta)
    }
}

/// Full CPA condition stack for `p`, using `p.delta_c` as given.
///
/// `p.omega_d` is ignored; the report carries the CPA drive.
pub fn verify_cpa(p: &SystemParams) -> Result<CpaReport, CpaError> {
    p.validate()?;
    let beta = positive_beta(p)?;
    let g_c = critical_coupling(beta, p.delta_tls, p.gamma)?;
    let delta_tls_c = critical_detuning(p.g, beta, p.gamma)?;
    let n_c_cpa = cpa_photon_number(p)?;
    let delta_c_required = cpa_cavity_detuning(p);

    let mut reasons = Vec::new();
    if n_c_cpa <= 0.0 {
        reasons.push(CpaViolation::NonPositivePhotonNumber);
    }
    if p.g <= g_c {
        reasons.push(CpaViolation::CouplingBelowCritical);
    }
    if p.delta_tls.abs() >= delta_tls_c {
        reasons.push(CpaViolation::DetuningExceedsCritical);
    }
    if (p.delta_c - delta_c_required).abs() > DETUNING_MATCH_REL * delta_c_required.abs().max(1.0) {
        reasons.push(CpaViolation::CavityDetuningMismatch);
    }
    let (omega_d_cpa, input_intensity) = cpa_input_amplitude(p, n_c_cpa.max(0.0))?;

    let mut report = CpaReport {
        beta,
        g_c,
        delta_tls_c,
        coupling_ratio: p.coupling_ratio(),
        n_c_cpa,
        delta_c_required,
        input_intensity,
        omega_d_cpa,
        feasible: false,
        reasons,
        residual_out: f64::NAN,
        stability: None,
        bistable_window: None,
        branch_location: None,
    };
    if !report.reasons.is_empty() {
        return Ok(report);
    }

    let driven = p.with_drive(omega_d_cpa);
    let states = steady::solve_steady_states(&driven)?;
    let Some(state) = states
        .iter()
        .find(|s| (s.n_c - n_c_cpa).abs() <= ROOT_MATCH_REL * n_c_cpa)
    else {
        report.reasons.push(CpaViolation::NoMatchingRoot);
        return Ok(report);
    };
    let (out_l, out_r) = state.output_intensities(&driven);
    report.residual_out = out_l.max(out_r);
    report.stability = Some(state.stability);
    if !(report.residual_out < NULL_OUTPUT_REL * input_intensity) {
        report.reasons.push(CpaViolation::OutputNotNulled);
    }

    let window = sweep::bistable_window(p, input_intensity)?;
    let any_window =
        window.is_some() || sweep::has_bistable_window(p, 10.0 * input_intensity.max(10.0))?;
    report.bistable_window = window;
    report.branch_location = Some(locate_branch(
        window,
        any_window,
        input_intensity,
        state.stability,
    ));
    report.feasible = report.reasons.is_empty();
    Ok(report)
}

fn locate_branch(
    window: Option<Window>,
    any_window: bool,
    input: f64,
    stability: Stability,
) -> BranchLocation {
    let stable = stability == Stability::Stable;
    let inside = window.is_some_and(|w| w.strictly_contains(input, sweep::WINDOW_MARGIN));
    match (inside, any_window, stable) {
        (true, _, true) => BranchLocation::InsideBistableStable,
        (true, _, false) => BranchLocation::InsideBistableUnstable,
        (false, false, _) => BranchLocation::Monostable,
        (false, true, true) => BranchLocation::OutsideBistableStable,
        (false, true, false) => BranchLocation::OutsideBistableUnstable,
    }
}

/// Whether two SOC settings with equal `beta` put CPA at the same
/// (photon number, input intensity) location.
pub fn cpa_invariance_check(p1: &SystemParams, p2: &SystemParams) -> Result<bool, CpaError> {
    cpa_invariance_check_with(p1, p2, INVARIANCE_REL)
}

pub fn cpa_invariance_check_with(
    p1: &SystemParams,
    p2: &SystemParams,
    rel_tol: f64,
) -> Result<bool, CpaError> {
    let strip = |p: &SystemParams| SystemParams {
        g_nl_mag: 0.0,
        phi: 0.0,
        delta_c: 0.0,
        omega_d: 0.0,
        ..*p
    };
    if strip(p1) != strip(p2) {
        return Err(CpaError::PreconditionViolated(
            "parameter sets differ outside the SOC amplitude and phase".into(),
        ));
    }
    let (b1, b2) = (soc_effective_params(p1).beta, soc_effective_params(p2).beta);
    // beta is a difference of terms of size kappa/2 and 2|G|
    let scale = 0.5 * p1.kappa() + 2.0 * p1.g_nl_mag.max(p2.g_nl_mag);
    if (b1 - b2).abs() > 1e-12 * scale {
        return Err(CpaError::PreconditionViolated(format!(
            "effective decays differ: {b1} vs {b2}"
        )));
    }
    let n1 = cpa_photon_number(p1)?;
    let n2 = cpa_photon_number(p2)?;
    let (_, i1) = cpa_input_amplitude(p1, n1.max(0.0))?;
    let (_, i2) = cpa_input_amplitude(p2, n2.max(0.0))?;
    let close = |a: f64, b: f64| (a - b).abs() <= rel_tol * a.abs().max(b.abs());
    Ok(close(n1, n2) && close(i1, i2))
}

/// Output intensities for an arbitrary field under the balanced inputs of
/// `p`; convenience for callers checking nulling by hand.
pub fn output_intensities(c_bar: num_complex::Complex64, p: &SystemParams) -> (f64, f64) {
    let (l, r) = model::balanced_output_fields(c_bar, p);
    (l.norm_sqr(), r.norm_sqr())
}
