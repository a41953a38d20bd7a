//! TOML run configuration.
//!
//! ```toml
//! [system]
//! g = 1.0
//! kappa = 20.0            # or kappa_l / kappa_r separately
//! delta_tls = 4.5
//! g_nl_mag = 4.99
//! phi = 3.141592653589793
//! cpa_auto_detuning = true  # or delta_c = ...
//! input_intensity = 22.5    # or omega_d = ...
//!
//! [sweep]
//! input_min = 0.0
//! input_max = 150.0
//! points = 1501
//!
//! [boundary]
//! g_fixed = 1.0
//! delta_tls_fixed = 20.0
//!
//! [evolve]
//! deltas = [0.01, 0.1, 1.0]
//! t_end = 600.0
//!
//! [tolerances]
//! residual = 1e-9
//! stability = 1e-9
//! ```
//!
//! Every key is optional except where noted in [`SystemSection`]; unknown
//! keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpa;
use crate::params::{ParamError, SystemParams};
use crate::steady::SolverOptions;
use crate::sweep;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error{}: {message}", location(*.line, *.column))]
    Parse {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}

impl From<ParamError> for ConfigError {
    fn from(e: ParamError) -> Self {
        ConfigError::Validation(e.to_string())
    }
}

/// Physical parameters as written in the file.
///
/// The mirror rates come either as `kappa` (split evenly) or as both
/// `kappa_l` and `kappa_r`. The cavity detuning is either `delta_c` or
/// derived from the CPA condition with `cpa_auto_detuning = true`. The drive
/// is either `omega_d` or a per-port `input_intensity`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_l: Option<f64>,
    pub kappa_r: Option<f64>,
    pub g: Option<f64>,
    pub delta_c: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cpa_auto_detuning: bool,
    pub delta_tls: Option<f64>,
    pub g_nl_mag: Option<f64>,
    pub phi: Option<f64>,
    pub omega_d: Option<f64>,
    pub input_intensity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub input_min: f64,
    pub input_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            input_min: 0.0,
            input_max: 150.0,
            points: 1501,
            spacing: Spacing::Linear,
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => sweep::linear_grid(self.input_min, self.input_max, self.points),
            Spacing::Log => sweep::log_grid(self.input_min, self.input_max, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundarySection {
    pub g_fixed: f64,
    pub delta_tls_fixed: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for BoundarySection {
    fn default() -> Self {
        Self {
            g_fixed: crate::presets::FIG2_G,
            delta_tls_fixed: crate::presets::FIG2_DELTA_TLS,
            beta_min: crate::presets::FIG2_BETA_RANGE.0,
            beta_max: crate::presets::FIG2_BETA_RANGE.1,
            points: crate::presets::FIG2_POINTS,
            spacing: Spacing::Log,
        }
    }
}

impl BoundarySection {
    pub fn grid(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => sweep::linear_grid(self.beta_min, self.beta_max, self.points),
            Spacing::Log => sweep::log_grid(self.beta_min, self.beta_max, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub deltas: Vec<f64>,
    pub t_end: f64,
    pub sample_dt: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            deltas: crate::presets::FIG4_DELTAS.to_vec(),
            t_end: crate::presets::FIG4_T_END,
            sample_dt: crate::presets::FIG4_SAMPLE_DT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub residual: Option<f64>,
    pub stability: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    boundary: BoundarySection,
    #[serde(default)]
    evolve: EvolveSection,
    #[serde(default)]
    tolerances: ToleranceSection,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub system: SystemParams,
    /// The cavity detuning was derived from the CPA condition.
    pub cpa_auto_detuning: bool,
    pub sweep: SweepSection,
    pub boundary: BoundarySection,
    pub evolve: EvolveSection,
    pub solver: SolverOptions,
}

impl RunConfig {
    /// A fully explicit document that [`parse_config`] reads back to an
    /// equal configuration.
    pub fn to_toml(&self) -> String {
        let p = &self.system;
        let doc = Document {
            system: SystemSection {
                gamma: Some(p.gamma),
                kappa: None,
                kappa_l: Some(p.kappa_l),
                kappa_r: Some(p.kappa_r),
                g: Some(p.g),
                delta_c: (!self.cpa_auto_detuning).then_some(p.delta_c),
                cpa_auto_detuning: self.cpa_auto_detuning,
                delta_tls: Some(p.delta_tls),
                g_nl_mag: Some(p.g_nl_mag),
                phi: Some(p.phi),
                omega_d: Some(p.omega_d),
                input_intensity: None,
            },
            sweep: self.sweep.clone(),
            boundary: self.boundary.clone(),
            evolve: self.evolve.clone(),
            tolerances: ToleranceSection {
                residual: Some(self.solver.eps_res),
                stability: Some(self.solver.eps_stab),
            },
        };
        toml::to_string(&doc).expect("configuration documents always serialize")
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc: Document = toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate(doc)
}

fn validate(doc: Document) -> Result<RunConfig, ConfigError> {
    let s = &doc.system;
    let defaults = SystemParams::default();
    let (kappa_l, kappa_r) = match (s.kappa, s.kappa_l, s.kappa_r) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(ConfigError::Validation(
                "kappa and kappa_l/kappa_r are mutually exclusive".into(),
            ))
        }
        (Some(k), None, None) => (0.5 * k, 0.5 * k),
        (None, l, r) => (l.unwrap_or(defaults.kappa_l), r.unwrap_or(defaults.kappa_r)),
    };
    if s.kappa.is_some_and(|k| !(k > 0.0)) {
        return Err(ParamError::NotPositive {
            name: "kappa",
            value: s.kappa.unwrap_or(f64::NAN),
        }
        .into());
    }
    if s.delta_c.is_some() && s.cpa_auto_detuning {
        return Err(ConfigError::Validation(
            "delta_c and cpa_auto_detuning are mutually exclusive".into(),
        ));
    }
    if s.omega_d.is_some() && s.input_intensity.is_some() {
        return Err(ConfigError::Validation(
            "omega_d and input_intensity are mutually exclusive".into(),
        ));
    }
    let mut system = SystemParams {
        gamma: s.gamma.unwrap_or(defaults.gamma),
        kappa_l,
        kappa_r,
        g: s.g.unwrap_or(defaults.g),
        delta_c: s.delta_c.unwrap_or(0.0),
        delta_tls: s.delta_tls.unwrap_or(0.0),
        g_nl_mag: s.g_nl_mag.unwrap_or(0.0),
        phi: s.phi.unwrap_or(0.0),
        omega_d: s.omega_d.unwrap_or(0.0),
    };
    if let Some(i) = s.input_intensity {
        if !(i >= 0.0 && i.is_finite()) {
            return Err(ParamError::Negative {
                name: "input_intensity",
                value: i,
            }
            .into());
        }
        system = system.with_input_intensity(i);
    }
    system.validate()?;
    if s.cpa_auto_detuning {
        system = cpa::with_cpa_detuning(&system);
    }

    check_grid(
        "sweep",
        doc.sweep.input_min,
        doc.sweep.input_max,
        doc.sweep.points,
        doc.sweep.spacing,
        false,
    )?;
    let b = &doc.boundary;
    check_grid(
        "boundary", b.beta_min, b.beta_max, b.points, b.spacing, true,
    )?;
    if !(b.g_fixed > 0.0 && b.g_fixed.is_finite()) {
        return Err(ConfigError::Validation(format!(
            "boundary.g_fixed must be positive (got {})",
            b.g_fixed
        )));
    }
    if !b.delta_tls_fixed.is_finite() {
        return Err(ConfigError::Validation(
            "boundary.delta_tls_fixed must be finite".into(),
        ));
    }
    let e = &doc.evolve;
    if !(e.t_end > 0.0 && e.t_end.is_finite()) {
        return Err(ConfigError::Validation(format!(
            "evolve.t_end must be positive (got {})",
            e.t_end
        )));
    }
    if !(e.sample_dt > 0.0 && e.sample_dt <= e.t_end) {
        return Err(ConfigError::Validation(format!(
            "evolve.sample_dt must be in (0, t_end] (got {})",
            e.sample_dt
        )));
    }
    if let Some(d) = e.deltas.iter().find(|d| !d.is_finite()) {
        return Err(ConfigError::Validation(format!(
            "evolve.deltas must be finite (got {d})"
        )));
    }

    let mut solver = SolverOptions::default();
    for (name, value, slot) in [
        (
            "tolerances.residual",
            doc.tolerances.residual,
            &mut solver.eps_res,
        ),
        (
            "tolerances.stability",
            doc.tolerances.stability,
            &mut solver.eps_stab,
        ),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Validation(format!(
                    "{name} must be positive (got {v})"
                )));
            }
            *slot = v;
        }
    }

    Ok(RunConfig {
        system,
        cpa_auto_detuning: s.cpa_auto_detuning,
        sweep: doc.sweep,
        boundary: doc.boundary,
        evolve: doc.evolve,
        solver,
    })
}

fn check_grid(
    section: &str,
    lo: f64,
    hi: f64,
    points: usize,
    spacing: Spacing,
    positive: bool,
) -> Result<(), ConfigError> {
    let err = |m: String| Err(ConfigError::Validation(format!("{section}: {m}")));
    if !(lo.is_finite() && hi.is_finite()) {
        return err("range must be finite".into());
    }
    if lo < 0.0 || (positive && lo <= 0.0) {
        return err(format!(
            "lower end must be {} (got {lo})",
            if positive { "positive" } else { "nonnegative" }
        ));
    }
    if hi < lo {
        return err(format!("upper end {hi} is below lower end {lo}"));
    }
    if spacing == Spacing::Log && lo <= 0.0 {
        return err("log spacing needs a positive lower end".into());
    }
    if points == 0 {
        return err("points must be at least 1".into());
    }
    Ok(())
}
