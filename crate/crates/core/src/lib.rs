//! Mean-field model of a driven two-sided cavity containing a two-level atom
//! and a pumped second-order nonlinear crystal.
//!
//! All rates, detunings and intensities are in units of the atomic decay
//! rate `gamma`.
//!
//! - [`steady`] finds every steady state as a root of a degree-five
//!   polynomial in the photon number and classifies its linear stability.
//! - [`cpa`] evaluates the coherent-perfect-absorption conditions and checks
//!   them against the full steady state.
//! - [`sweep`] builds input–output curves with folds and bistable windows,
//!   and maps the CPA feasibility boundary.
//! - [`dynamics`] integrates the mean-field equations in time, including a
//!   pump detuned from twice the drive frequency.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpa;
pub mod dynamics;
pub mod io;
pub mod model;
pub mod ode;
pub mod params;
pub mod poly;
pub mod presets;
pub mod stability;
pub mod steady;
pub mod sweep;

pub use cpa::{verify_cpa, BranchLocation, CpaError, CpaReport};
pub use dynamics::{integrate, TimeTrace};
pub use params::{ParamError, SystemParams};
pub use stability::Stability;
pub use steady::{solve_steady_states, SolverError, SteadyState};
pub use sweep::{boundary_map, trace_hysteresis, BoundaryMap, HysteresisCurve, Pattern};
