//! Model parameters.
//!
//! Every rate, detuning and coupling is expressed in units of the atomic
//! decay rate `gamma`; field amplitudes carry units of `gamma^{1/2}`. The
//! built-in parameter sets use `gamma = 1`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be positive (got {value})")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be nonnegative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
    #[error("phi must lie in [0, 2pi) (got {0})")]
    PhaseOutOfRange(f64),
}

/// Parameters of the driven atom–cavity–crystal system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Atomic decay rate, the unit of every other rate.
    pub gamma: f64,
    pub kappa_l: f64,
    pub kappa_r: f64,
    /// Atom–cavity coupling strength.
    pub g: f64,
    /// Cavity detuning from the reference drive.
    pub delta_c: f64,
    /// Atomic detuning from the reference drive.
    pub delta_tls: f64,
    /// Magnitude of the pump-induced nonlinear coefficient.
    pub g_nl_mag: f64,
    /// Pump phase relative to the reference drive, in `[0, 2pi)`.
    pub phi: f64,
    /// Total (real) drive amplitude `Omega_l + Omega_r`.
    pub omega_d: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            kappa_l: 10.0,
            kappa_r: 10.0,
            g: 1.0,
            delta_c: 0.0,
            delta_tls: 0.0,
            g_nl_mag: 0.0,
            phi: 0.0,
            omega_d: 0.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let all = [
            ("gamma", self.gamma),
            ("kappa_l", self.kappa_l),
            ("kappa_r", self.kappa_r),
            ("g", self.g),
            ("delta_c", self.delta_c),
            ("delta_tls", self.delta_tls),
            ("g_nl_mag", self.g_nl_mag),
            ("phi", self.phi),
            ("omega_d", self.omega_d),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name, value });
            }
        }
        for (name, value) in [
            ("gamma", self.gamma),
            ("kappa_l", self.kappa_l),
            ("kappa_r", self.kappa_r),
        ] {
            if value <= 0.0 {
                return Err(ParamError::NotPositive { name, value });
            }
        }
        for (name, value) in [
            ("g", self.g),
            ("g_nl_mag", self.g_nl_mag),
            ("omega_d", self.omega_d),
        ] {
            if value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        if !(0.0..TAU).contains(&self.phi) {
            return Err(ParamError::PhaseOutOfRange(self.phi));
        }
        Ok(())
    }

    /// Total cavity decay rate `kappa_l + kappa_r`.
    pub fn kappa(&self) -> f64 {
        self.kappa_l + self.kappa_r
    }

    /// Complex nonlinear coefficient `|G| e^{i phi}`.
    pub fn g_nl(&self) -> Complex64 {
        Complex64::from_polar(self.g_nl_mag, self.phi)
    }

    pub fn symmetric_mirrors(&self) -> bool {
        self.kappa_l == self.kappa_r
    }

    pub fn with_drive(mut self, omega_d: f64) -> Self {
        self.omega_d = omega_d;
        self
    }

    /// Balanced coherent inputs `(c_in_l, c_in_r)` that sum to the drive.
    ///
    /// The inputs are in phase with amplitude ratio `sqrt(kappa_l / kappa_r)`,
    /// so `sqrt(kappa_l) c_in_l + sqrt(kappa_r) c_in_r = omega_d`.
    pub fn balanced_inputs(&self) -> (f64, f64) {
        let k = self.kappa();
        (
            self.kappa_l.sqrt() * self.omega_d / k,
            self.kappa_r.sqrt() * self.omega_d / k,
        )
    }

    /// Left-port input intensity `|c_in_l|^2` of the balanced inputs.
    pub fn input_intensity(&self) -> f64 {
        let (c_l, _) = self.balanced_inputs();
        c_l * c_l
    }

    /// Drive amplitude producing the left-port input intensity `intensity`
    /// with balanced inputs. Symmetric mirrors give `2 sqrt(kappa/2) sqrt(I)`.
    pub fn drive_for_input_intensity(&self, intensity: f64) -> f64 {
        self.kappa() * intensity.max(0.0).sqrt() / self.kappa_l.sqrt()
    }

    pub fn with_input_intensity(self, intensity: f64) -> Self {
        let omega_d = self.drive_for_input_intensity(intensity);
        self.with_drive(omega_d)
    }

    /// Cooperativity-style ratio `g^2 / (kappa gamma)`; below one is the weak
    /// coupling regime.
    pub fn coupling_ratio(&self) -> f64 {
        self.g * self.g / (self.kappa() * self.gamma)
    }
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}
