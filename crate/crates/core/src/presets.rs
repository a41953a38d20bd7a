//! Named parameter sets for the published figures.
//!
//! Common to all: `gamma = 1`, `g = 1`, symmetric mirrors with total
//! `kappa = 20`, and crystal settings sharing `beta = 0.02`. The cavity
//! detuning is always the CPA detuning for the chosen atomic detuning.

use std::f64::consts::PI;

use crate::cpa;
use crate::params::SystemParams;

/// The two atomic detunings compared in each input–output figure, with the
/// labels of their CPA points.
pub const FIG3_DETUNINGS: [f64; 2] = [4.5, 1.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fig3 {
    A,
    B,
    C,
}

impl Fig3 {
    pub const ALL: [Fig3; 3] = [Fig3::A, Fig3::B, Fig3::C];

    pub fn name(&self) -> &'static str {
        match self {
            Fig3::A => "fig3a",
            Fig3::B => "fig3b",
            Fig3::C => "fig3c",
        }
    }

    /// `(|G|, phi)`
    pub fn crystal(&self) -> (f64, f64) {
        match self {
            Fig3::A => (9.98, 2.0 * PI / 3.0),
            Fig3::B => (9.98, 4.0 * PI / 3.0),
            Fig3::C => (4.99, PI),
        }
    }

    /// CPA-point labels for the two atomic detunings of
    /// [`FIG3_DETUNINGS`].
    pub fn labels(&self) -> [&'static str; 2] {
        match self {
            Fig3::A => ["A1", "A2"],
            Fig3::B => ["B1", "B2"],
            Fig3::C => ["C1", "C2"],
        }
    }

    /// Parameters at atomic detuning `delta_tls`, tuned to the CPA detuning,
    /// without drive.
    pub fn params(&self, delta_tls: f64) -> SystemParams {
        let (g_nl_mag, phi) = self.crystal();
        let p = SystemParams {
            delta_tls,
            g_nl_mag,
            phi,
            ..base()
        };
        cpa::with_cpa_detuning(&p)
    }

    /// Input-intensity range swept by default: wide enough to include every
    /// fold and both CPA points.
    pub fn input_range(&self) -> (f64, f64) {
        match self {
            Fig3::A => (0.0, 150.0),
            Fig3::B => (0.0, 250.0),
            Fig3::C => (0.0, 150.0),
        }
    }
}

/// `gamma = g = 1`, `kappa_l = kappa_r = 10`, everything else zero.
pub fn base() -> SystemParams {
    SystemParams {
        gamma: 1.0,
        kappa_l: 10.0,
        kappa_r: 10.0,
        g: 1.0,
        ..Default::default()
    }
}

/// Boundary-map settings: critical coupling drawn at atomic detuning
/// `FIG2_DELTA_TLS`, critical detuning drawn at coupling `FIG2_G`.
pub const FIG2_G: f64 = 1.0;
pub const FIG2_DELTA_TLS: f64 = 20.0;
pub const FIG2_BETA_RANGE: (f64, f64) = (1e-3, 10.0);
pub const FIG2_POINTS: usize = 401;

/// Pump mismatches shown in the time-evolution figure.
pub const FIG4_DELTAS: [f64; 3] = [0.01, 0.1, 1.0];
pub const FIG4_T_END: f64 = 600.0;
pub const FIG4_SAMPLE_DT: f64 = 0.05;

/// Time-evolution setting: the [`Fig3::C`] system at `delta_tls = 4.5`,
/// driven at its CPA input.
pub fn fig4_params() -> SystemParams {
    let p = Fig3::C.params(FIG3_DETUNINGS[0]);
    cpa::cpa_operating_point(&p).expect("preset is CPA-feasible")
}
