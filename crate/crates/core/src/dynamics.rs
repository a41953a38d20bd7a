//! Time evolution of the mean-field equations.
//!
//! A pump detuned from twice the drive frequency by `delta` leaves the
//! parametric coefficient rotating as `G e^{-i delta t}` in the drive frame.
//! The drive is switched on as a step at `t = 0`.

use num_complex::Complex64;
use thiserror::Error;

use crate::ode::{self, OdeError, Tolerances};
use crate::params::{ParamError, SystemParams};
use crate::stability::State;

/// Empty cavity, atom in its ground state.
pub const VACUUM: State = [0.0, 0.0, 0.0, 0.0, -0.5];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
    #[error("invalid integration window: {0}")]
    InvalidWindow(String),
    #[error("integration failed ({source}); trace truncated at t = {}", .trace.times.last().copied().unwrap_or(0.0))]
    StepFailure {
        source: OdeError,
        trace: Box<TimeTrace>,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeTrace {
    pub delta: f64,
    pub times: Vec<f64>,
    pub n_c: Vec<f64>,
    /// Left-port output intensity under the balanced inputs.
    pub out_intensity: Vec<f64>,
    pub state_final: State,
}

pub fn mean_field_rhs(state: &State, t: f64, p: &SystemParams, delta: f64) -> State {
    let c = Complex64::new(state[0], state[1]);
    let sm = Complex64::new(state[2], state[3]);
    let sz = state[4];
    let i = Complex64::i();
    let pump = 2.0 * Complex64::from_polar(p.g_nl_mag, p.phi - delta * t);
    let dc = -Complex64::new(0.5 * p.kappa(), p.delta_c) * c - i * p.g * sm
        + pump * c.conj()
        + p.omega_d;
    let dsm = -Complex64::new(0.5 * p.gamma, p.delta_tls) * sm + 2.0 * i * p.g * c * sz;
    // i g (c* sm - c sm*) = -2 g Im(c* sm)
    let dsz = -p.gamma * (sz + 0.5) - 2.0 * p.g * (c.conj() * sm).im;
    [dc.re, dc.im, dsm.re, dsm.im, dsz]
}

pub fn integrate(
    p: &SystemParams,
    delta: f64,
    initial: State,
    t_end: f64,
    sample_dt: f64,
) -> Result<TimeTrace, DynamicsError> {
    integrate_with(p, delta, initial, t_end, sample_dt, &Tolerances::default())
}

pub fn integrate_with(
    p: &SystemParams,
    delta: f64,
    initial: State,
    t_end: f64,
    sample_dt: f64,
    tol: &Tolerances,
) -> Result<TimeTrace, DynamicsError> {
    p.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(DynamicsError::InvalidWindow(format!(
            "t_end must be positive (got {t_end})"
        )));
    }
    if !(sample_dt > 0.0 && sample_dt.is_finite()) {
        return Err(DynamicsError::InvalidWindow(format!(
            "sample_dt must be positive (got {sample_dt})"
        )));
    }
    let (c_in, _) = p.balanced_inputs();
    let sqrt_kl = p.kappa_l.sqrt();
    let mut trace = TimeTrace {
        delta,
        state_final: initial,
        ..Default::default()
    };
    let result = ode::integrate_sampled(
        |t, y| mean_field_rhs(y, t, p, delta),
        0.0,
        initial,
        t_end,
        sample_dt,
        tol,
        |t, y| {
            let c = Complex64::new(y[0], y[1]);
            trace.times.push(t);
            trace.n_c.push(c.norm_sqr());
            trace.out_intensity.push((sqrt_kl * c - c_in).norm_sqr());
            trace.state_final = *y;
        },
    );
    match result {
        Ok(y) => {
            trace.state_final = y;
            Ok(trace)
        }
        Err(source) => Err(DynamicsError::StepFailure {
            source,
            trace: Box::new(trace),
        }),
    }
}

/// Integrates with `delta = 0` until the vector field is below `rhs_tol`
/// (max norm) or `max_time` elapses. Returns the final state and whether it
/// settled.
pub fn relax(
    p: &SystemParams,
    initial: State,
    rhs_tol: f64,
    max_time: f64,
) -> Result<(State, bool), DynamicsError> {
    let chunk = 20.0 / p.gamma;
    let mut y = initial;
    let mut elapsed = 0.0;
    while elapsed < max_time {
        let span = chunk.min(max_time - elapsed);
        let tr = integrate(p, 0.0, y, span, span)?;
        y = tr.state_final;
        elapsed += span;
        let f = mean_field_rhs(&y, 0.0, p, 0.0);
        if f.iter().all(|v| v.abs() < rhs_tol) {
            return Ok((y, true));
        }
    }
    Ok((y, false))
}

/// Bloch-vector length squared, `|sigma_-|^2 + sigma_z^2`.
pub fn bloch_norm_sq(y: &State) -> f64 {
    y[2] * y[2] + y[3] * y[3] + y[4] * y[4]
}
