//! Input–output curves, folds, bistable windows and CPA boundary maps.
//!
//! With every parameter but the drive fixed, the steady-state condition
//! `gain(n) = omega_d^2 response(n)` can be solved for the drive instead of
//! the photon number. Since `omega_d^2` is proportional to the input
//! intensity, the whole steady-state manifold is the graph of
//!
//! ```text
//! I(n) = gain(n) / (s response(n)),   s = kappa^2 / kappa_l
//! ```
//!
//! Folds are the critical points of `I(n)` and the branches are its monotone
//! pieces. Branch labels therefore come from the photon number alone and no
//! nearest-neighbour heuristics are involved.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpa;
use crate::model;
use crate::params::{ParamError, SystemParams};
use crate::poly::Poly;
use crate::stability::Stability;
use crate::steady::{self, SelfConsistencyPolynomial, SolverError, SolverOptions};

/// Relative margin used when asking whether an intensity lies strictly inside
/// a window.
pub const WINDOW_MARGIN: f64 = 1e-9;
/// Fold intensities below this fraction of the largest fold intensity are
/// treated as touching zero drive.
const ZERO_FOLD_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid input grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("malformed curve: {0}")]
    MalformedCurve(String),
}

impl From<ParamError> for SweepError {
    fn from(e: ParamError) -> Self {
        SweepError::Solver(SolverError::InvalidParams(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub input_intensity: f64,
    pub n_c: f64,
    pub output_intensity: f64,
    pub stability: Stability,
    pub branch_id: usize,
}

/// A turning point of the input–output curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub input_intensity: f64,
    pub n_c: f64,
    pub output_intensity: f64,
}

/// A maximal input-intensity interval with more than one steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    /// The window extends down to zero drive: the undriven system already has
    /// nonzero steady states.
    pub open_at_zero: bool,
    /// Largest number of coexisting steady states inside the window.
    pub max_roots: usize,
}

impl Window {
    pub fn contains(&self, input: f64) -> bool {
        input > self.lo && input < self.hi
    }

    /// Inside by more than `margin` relative to the window's upper edge.
    pub fn strictly_contains(&self, input: f64, margin: f64) -> bool {
        let m = margin * self.hi.abs().max(1.0);
        input > self.lo + m && input < self.hi - m
    }

    fn distance(&self, input: f64) -> f64 {
        if input < self.lo {
            self.lo - input
        } else if input > self.hi {
            input - self.hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    Monostable,
    ConventionalBistable,
    UnconventionalBistable,
}

impl Pattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            Pattern::Monostable => "Monostable",
            Pattern::ConventionalBistable => "ConventionalBistable",
            Pattern::UnconventionalBistable => "UnconventionalBistable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpaMarker {
    pub label: String,
    pub input_intensity: f64,
    pub n_c: f64,
    pub output_intensity: f64,
    pub stability: Stability,
    pub branch_id: usize,
    /// Unstable CPA points cannot be reached experimentally.
    pub observable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisCurve {
    /// Sorted by `(input_intensity, n_c)`.
    pub points: Vec<CurvePoint>,
    /// Interior turning points, ascending in photon number.
    pub folds: Vec<Fold>,
    pub windows: Vec<Window>,
    pub pattern: Pattern,
    pub cpa_markers: Vec<CpaMarker>,
    /// Set when some grid node's root count disagrees with the branch
    /// structure; [`classify_pattern`] then refuses the curve.
    pub inconsistency: Option<String>,
}

impl HysteresisCurve {
    /// Branch ids in ascending order.
    pub fn branch_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.points.iter().map(|p| p.branch_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn branch(&self, id: usize) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(move |p| p.branch_id == id)
    }
}

/// The steady-state manifold of one parameter set, parametrized by photon
/// number.
#[derive(Debug, Clone)]
pub struct SteadyManifold {
    params: SystemParams,
    scale: f64,
    gain: Poly,
    response: Poly,
    /// Photon numbers splitting the manifold into monotone pieces, ascending.
    breaks: Vec<f64>,
    /// `I` at each break; `+inf` at poles.
    break_intensity: Vec<f64>,
}

impl SteadyManifold {
    pub fn new(p: &SystemParams) -> Result<Self, SolverError> {
        p.validate()?;
        let poly: SelfConsistencyPolynomial = steady::build_polynomial(p);
        let leading = poly.nominal_leading();
        if leading <= 0.0 {
            return Err(SolverError::ParametricRegime { leading });
        }
        let kappa = p.kappa();
        let scale = kappa * kappa / p.kappa_l;
        let gain = poly.gain().clone();
        let response = poly.response().clone();
        let w = &(&gain.derivative() * &response) - &(&gain * &response.derivative());
        let hi = w.root_bound().max(1.0);
        let breaks: Vec<f64> = w
            .real_roots_in(0.0, hi, 1e-12)
            .into_iter()
            .filter(|&n| n > 0.0)
            .collect();
        let mut m = Self {
            params: *p,
            scale,
            gain,
            response,
            break_intensity: Vec::with_capacity(breaks.len()),
            breaks,
        };
        let raw: Vec<f64> = m.breaks.iter().map(|&n| m.intensity_at(n)).collect();
        let top = raw
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0f64, f64::max);
        m.break_intensity = raw
            .into_iter()
            .map(|v| {
                if v.is_finite() && v <= ZERO_FOLD_REL * top.max(1.0) {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Ok(m)
    }

    /// Input intensity whose steady states include photon number `n_c`.
    pub fn intensity_at(&self, n_c: f64) -> f64 {
        let r = self.response.eval(n_c);
        if r <= 1e-14 * self.response.eval_scale(n_c) {
            return f64::INFINITY;
        }
        self.gain.eval(n_c) / (self.scale * r)
    }

    /// Index of the monotone piece containing `n_c`.
    pub fn branch_of(&self, n_c: f64) -> usize {
        self.breaks.partition_point(|&b| b < n_c)
    }

    /// Intensity range `(start, end)` of each monotone piece, in order of
    /// increasing photon number.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        let mut ends = Vec::with_capacity(self.breaks.len() + 2);
        ends.push(0.0);
        ends.extend_from_slice(&self.break_intensity);
        ends.push(f64::INFINITY);
        ends.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Number of steady states at a generic input intensity (not a fold).
    pub fn root_count(&self, input: f64) -> usize {
        self.pieces()
            .into_iter()
            .filter(|&(a, b)| input > a.min(b) && input < a.max(b))
            .count()
    }

    /// Turning points with positive input intensity.
    pub fn folds(&self) -> Vec<Fold> {
        self.breaks
            .iter()
            .zip(&self.break_intensity)
            .filter(|(_, &i)| i > 0.0 && i.is_finite())
            .map(|(&n, &i)| {
                let driven = self.params.with_input_intensity(i);
                let output_intensity = model::intracavity_field(n, &driven)
                    .map(|c| left_output(&driven, c))
                    .unwrap_or(f64::NAN);
                Fold {
                    input_intensity: i,
                    n_c: n,
                    output_intensity,
                }
            })
            .collect()
    }

    /// All multi-root windows, ascending.
    pub fn windows(&self) -> Vec<Window> {
        let mut levels: Vec<f64> = self
            .break_intensity
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut out: Vec<Window> = Vec::new();
        let mut current: Option<Window> = None;
        for (k, &lo) in levels.iter().enumerate() {
            let hi = levels.get(k + 1).copied().unwrap_or(f64::INFINITY);
            let probe = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * lo + 1.0
            };
            let count = self.root_count(probe);
            if count >= 2 {
                let w = current.get_or_insert(Window {
                    lo,
                    hi,
                    open_at_zero: lo == 0.0,
                    max_roots: count,
                });
                w.hi = hi;
                w.max_roots = w.max_roots.max(count);
            } else if let Some(w) = current.take() {
                out.push(w);
            }
        }
        out.extend(current);
        out
    }
}

/// The multi-root window containing `near`, or else the one closest to it.
pub fn bistable_window(p: &SystemParams, near: f64) -> Result<Option<Window>, SolverError> {
    let windows = SteadyManifold::new(p)?.windows();
    Ok(windows
        .into_iter()
        .min_by(|a, b| a.distance(near).total_cmp(&b.distance(near))))
}

/// Whether any multi-root window starts below `i_max`.
pub fn has_bistable_window(p: &SystemParams, i_max: f64) -> Result<bool, SolverError> {
    Ok(SteadyManifold::new(p)?
        .windows()
        .iter()
        .any(|w| w.lo < i_max))
}

fn left_output(p: &SystemParams, c_bar: Complex64) -> f64 {
    let (c_in, _) = p.balanced_inputs();
    (p.kappa_l.sqrt() * c_bar - c_in).norm_sqr()
}

pub fn trace_hysteresis(
    p: &SystemParams,
    input_grid: &[f64],
) -> Result<HysteresisCurve, SweepError> {
    trace_hysteresis_with(p, input_grid, &SolverOptions::default())
}

pub fn trace_hysteresis_with(
    p: &SystemParams,
    input_grid: &[f64],
    opts: &SolverOptions,
) -> Result<HysteresisCurve, SweepError> {
    if let Some(bad) = input_grid.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(SweepError::InvalidGrid(format!(
            "intensities must be finite and nonnegative (got {bad})"
        )));
    }
    if input_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(SweepError::InvalidGrid(
            "intensities must be ascending".into(),
        ));
    }
    let manifold = SteadyManifold::new(p)?;

    let solve_node = |input: f64| -> Result<Vec<CurvePoint>, SolverError> {
        let driven = p.with_input_intensity(input);
        let states = steady::solve_steady_states_with(&driven, opts)?;
        Ok(states
            .iter()
            .map(|s| CurvePoint {
                input_intensity: input,
                n_c: s.n_c,
                output_intensity: left_output(&driven, s.c_bar),
                stability: s.stability,
                branch_id: manifold.branch_of(s.n_c),
            })
            .collect())
    };
    let per_node: Vec<Result<Vec<CurvePoint>, SolverError>> = input_grid
        .par_iter()
        .map(|&input| solve_node(input))
        .collect();

    let folds = manifold.folds();
    let windows = manifold.windows();
    let mut points = Vec::new();
    let mut inconsistency = None;
    for (node, &input) in per_node.into_iter().zip(input_grid) {
        let node = node?;
        let near_fold = folds
            .iter()
            .any(|f| (f.input_intensity - input).abs() <= 1e-6 * input.max(1.0));
        let expected = manifold.root_count(input);
        if input > 0.0 && !near_fold && node.len() != expected && inconsistency.is_none() {
            inconsistency = Some(format!(
                "{} steady states at input {input}, branch structure predicts {expected}",
                node.len()
            ));
        }
        points.extend(node);
    }
    points.sort_by(by_input_then_n);

    let cpa_markers = cpa_marker(p, &manifold, input_grid, opts)
        .into_iter()
        .collect();
    let mut curve = HysteresisCurve {
        points,
        folds,
        windows,
        pattern: Pattern::Monostable,
        cpa_markers,
        inconsistency,
    };
    if let Some(msg) = &curve.inconsistency {
        return Err(SweepError::MalformedCurve(msg.clone()));
    }
    // window midpoints guarantee at least one interior node per window
    let mut probed = curve.points.clone();
    for w in &curve.windows {
        probed.extend(solve_node(0.5 * (w.lo + w.hi))?);
    }
    probed.sort_by(by_input_then_n);
    curve.pattern = classify_nodes(&curve.windows, &probed)?;
    Ok(curve)
}

fn by_input_then_n(a: &CurvePoint, b: &CurvePoint) -> std::cmp::Ordering {
    a.input_intensity
        .total_cmp(&b.input_intensity)
        .then(a.n_c.total_cmp(&b.n_c))
}

fn cpa_marker(
    p: &SystemParams,
    manifold: &SteadyManifold,
    grid: &[f64],
    opts: &SolverOptions,
) -> Option<CpaMarker> {
    let (&first, &last) = (grid.first()?, grid.last()?);
    let n = cpa::cpa_photon_number(p).ok()?;
    let required = cpa::cpa_cavity_detuning(p);
    if n <= 0.0 || (p.delta_c - required).abs() > cpa::DETUNING_MATCH_REL * required.abs().max(1.0)
    {
        return None;
    }
    let (omega_d, input) = cpa::cpa_input_amplitude(p, n).ok()?;
    if input < first || input > last {
        return None;
    }
    let driven = p.with_drive(omega_d);
    let states = steady::solve_steady_states_with(&driven, opts).ok()?;
    let s = states
        .iter()
        .find(|s| (s.n_c - n).abs() <= cpa::ROOT_MATCH_REL * n)?;
    Some(CpaMarker {
        label: "CPA".into(),
        input_intensity: input,
        n_c: s.n_c,
        output_intensity: left_output(&driven, s.c_bar),
        stability: s.stability,
        branch_id: manifold.branch_of(s.n_c),
        observable: s.stability == Stability::Stable,
    })
}

/// Monostable without a multi-root window. Otherwise the curve is a
/// conventional S-shape when, at every grid node inside a window, the lowest
/// and highest photon-number states are both stable and the highest one has
/// the larger output. Anything else (an unstable outer state, or an output
/// inversion from the interference dip) is unconventional.
///
/// Only the curve's own grid nodes are inspected, so a window narrower than
/// the grid spacing is an error here; [`trace_hysteresis`] avoids that by
/// also probing each window's midpoint.
pub fn classify_pattern(curve: &HysteresisCurve) -> Result<Pattern, SweepError> {
    if let Some(msg) = &curve.inconsistency {
        return Err(SweepError::MalformedCurve(msg.clone()));
    }
    classify_nodes(&curve.windows, &curve.points)
}

/// `points` sorted by `(input_intensity, n_c)`.
fn classify_nodes(windows: &[Window], points: &[CurvePoint]) -> Result<Pattern, SweepError> {
    if windows.is_empty() {
        return Ok(Pattern::Monostable);
    }
    let mut inside_nodes = 0usize;
    let mut standard = true;
    for node in points.chunk_by(|a, b| a.input_intensity == b.input_intensity) {
        let input = node[0].input_intensity;
        if node.len() < 2 || !windows.iter().any(|w| w.contains(input)) {
            continue;
        }
        inside_nodes += 1;
        let (lower, upper) = (node[0], node[node.len() - 1]);
        standard &= lower.stability == Stability::Stable
            && upper.stability == Stability::Stable
            && upper.output_intensity > lower.output_intensity;
    }
    if inside_nodes == 0 {
        return Err(SweepError::MalformedCurve(
            "no grid node falls inside a bistable window".into(),
        ));
    }
    Ok(if standard {
        Pattern::ConventionalBistable
    } else {
        Pattern::UnconventionalBistable
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Up,
    Down,
}

/// Quasi-static sweep: stay on the current branch while it has a stable
/// state, otherwise jump to the nearest stable state in photon number.
///
/// Returns one selected point per grid node (in sweep order), or `None` at
/// nodes without a stable state.
pub fn follow_sweep(curve: &HysteresisCurve, direction: SweepDirection) -> Vec<Option<CurvePoint>> {
    let mut nodes: Vec<&[CurvePoint]> = curve
        .points
        .chunk_by(|a, b| a.input_intensity == b.input_intensity)
        .collect();
    if direction == SweepDirection::Down {
        nodes.reverse();
    }
    let mut current: Option<CurvePoint> = None;
    nodes
        .into_iter()
        .map(|node| {
            let stable = || node.iter().filter(|p| p.stability == Stability::Stable);
            let next = match current {
                None => match direction {
                    SweepDirection::Up => stable().next(),
                    SweepDirection::Down => stable().next_back(),
                },
                Some(c) => stable().find(|p| p.branch_id == c.branch_id).or_else(|| {
                    stable().min_by(|a, b| (a.n_c - c.n_c).abs().total_cmp(&(b.n_c - c.n_c).abs()))
                }),
            }
            .copied();
            if next.is_some() {
                current = next;
            }
            next
        })
        .collect()
}

/// Log-spaced grid with `n` nodes from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| match k {
                    0 => lo,
                    k if k == n - 1 => hi,
                    _ => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

/// Evenly spaced grid with `n` nodes from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMap {
    pub gamma: f64,
    pub g_fixed: f64,
    pub delta_tls_fixed: f64,
    pub axis: Vec<f64>,
    /// Critical coupling at `delta_tls_fixed`.
    pub g_c_curve: Vec<f64>,
    /// Critical atomic detuning at `g_fixed`; NaN where no detuning works.
    pub delta_c_curve: Vec<f64>,
    /// Whether `(g_fixed, delta_tls_fixed)` admits CPA.
    pub region_mask: Vec<bool>,
}

pub fn boundary_map(
    gamma: f64,
    g_fixed: f64,
    delta_tls_fixed: f64,
    beta_grid: &[f64],
) -> Result<BoundaryMap, SweepError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ParamError::NotPositive {
            name: "gamma",
            value: gamma,
        }
        .into());
    }
    if !(g_fixed > 0.0 && g_fixed.is_finite()) {
        return Err(ParamError::NotPositive {
            name: "g",
            value: g_fixed,
        }
        .into());
    }
    if let Some(bad) = beta_grid.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(SweepError::InvalidGrid(format!(
            "beta values must be positive (got {bad})"
        )));
    }
    if beta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::InvalidGrid(
            "beta values must be strictly ascending".into(),
        ));
    }
    let mut map = BoundaryMap {
        gamma,
        g_fixed,
        delta_tls_fixed,
        axis: beta_grid.to_vec(),
        g_c_curve: Vec::with_capacity(beta_grid.len()),
        delta_c_curve: Vec::with_capacity(beta_grid.len()),
        region_mask: Vec::with_capacity(beta_grid.len()),
    };
    for &beta in beta_grid {
        let g_c =
            cpa::critical_coupling(beta, delta_tls_fixed, gamma).expect("beta checked positive");
        let d_c = cpa::critical_detuning(g_fixed, beta, gamma).unwrap_or(f64::NAN);
        map.g_c_curve.push(g_c);
        map.delta_c_curve.push(d_c);
        map.region_mask.push(g_fixed > g_c);
    }
    Ok(map)
}
