//! Linear stability of mean-field fixed points.
//!
//! The state is the 5-vector `(Re c, Im c, Re sigma_-, Im sigma_-, sigma_z)`.

use nalgebra::Matrix5;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::SystemParams;

/// Width of the marginal band around zero real part, in units of `gamma`.
pub const EPS_STAB: f64 = 1e-9;

/// Real mean-field state `(Re c, Im c, Re sigma_-, Im sigma_-, sigma_z)`.
pub type State = [f64; 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

impl std::str::FromStr for Stability {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stable" => Ok(Stability::Stable),
            "unstable" => Ok(Stability::Unstable),
            "marginal" => Ok(Stability::Marginal),
            other => Err(format!("unknown stability class '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: [Complex64; 5],
    pub class: Stability,
    /// Largest real part among the eigenvalues.
    pub margin: f64,
}

/// Jacobian of the mean-field vector field at `y`.
///
/// `pump_phase_offset` is the extra pump phase `-delta t` of a mismatched
/// pump; steady states use zero.
pub fn jacobian_at(y: &State, p: &SystemParams, pump_phase_offset: f64) -> Matrix5<f64> {
    let [x1, x2, s1, s2, z] = *y;
    let half_k = 0.5 * p.kappa();
    let half_g = 0.5 * p.gamma;
    let (g, dc, da) = (p.g, p.delta_c, p.delta_tls);
    // 2 G e^{-i delta t} = a + i b
    let pump = 2.0 * Complex64::from_polar(p.g_nl_mag, p.phi + pump_phase_offset);
    let (a, b) = (pump.re, pump.im);
    #[rustfmt::skip]
    let j = Matrix5::new(
        -half_k + a,  dc + b,      0.0,        g,          0.0,
        -dc + b,      -half_k - a, -g,         0.0,        0.0,
        0.0,          -2.0 * g * z, -half_g,   da,         -2.0 * g * x2,
        2.0 * g * z,  0.0,         -da,        -half_g,    2.0 * g * x1,
        -2.0 * g * s2, 2.0 * g * s1, 2.0 * g * x2, -2.0 * g * x1, -p.gamma,
    );
    j
}

pub fn classify_stability(j: &Matrix5<f64>) -> StabilityReport {
    classify_stability_with(j, EPS_STAB)
}

pub fn classify_stability_with(j: &Matrix5<f64>, eps_stab: f64) -> StabilityReport {
    let ev = j.complex_eigenvalues();
    let eigenvalues: [Complex64; 5] = std::array::from_fn(|i| ev[i]);
    let margin = eigenvalues
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let class = if margin < -eps_stab {
        Stability::Stable
    } else if margin > eps_stab {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    StabilityReport {
        eigenvalues,
        class,
        margin,
    }
}
