//! Self-contained SVG figures.
//!
//! Line styles follow one rule throughout: stable branches solid, unstable
//! dashed, marginal dotted. Folds are drawn as diamonds and CPA points as
//! labelled dots.

use std::fmt::Write as _;

use crate::dynamics::TimeTrace;
use crate::stability::Stability;
use crate::sweep::{BoundaryMap, CurvePoint, HysteresisCurve};

use super::Units;

const PALETTE: [&str; 6] = [
    "#1f5fbf", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555",
];
const FEASIBLE_FILL: &str = "#cfe8fb";
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

#[derive(Debug, Clone)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    label: String,
}

impl Axis {
    fn linear(lo: f64, hi: f64, label: &str) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        };
        Self {
            lo,
            hi,
            log: false,
            label: label.into(),
        }
    }

    fn log(lo: f64, hi: f64, label: &str) -> Self {
        let lo = lo.max(f64::MIN_POSITIVE);
        let hi = if hi > lo { hi } else { lo * 10.0 };
        Self {
            lo: lo.log10().floor(),
            hi: hi.log10().ceil(),
            log: true,
            label: label.into(),
        }
    }

    /// Position in `[0, 1]`; `None` for values a log axis cannot show.
    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i32;
            return (self.lo as i32..=self.hi as i32)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last)
            .map(|k| {
                let v = k as f64 * step;
                (v, trim_number(v, step))
            })
            .collect()
    }
}

fn trim_number(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10()).ceil() as usize + 1
    };
    let s = format!("{v:.decimals$}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One plotting area inside the document.
struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    x: Axis,
    y: Axis,
}

impl Panel {
    fn px(&self, v: f64) -> Option<f64> {
        self.x.frac(v).map(|f| self.x0 + f * self.w)
    }

    fn py(&self, v: f64) -> Option<f64> {
        self.y.frac(v).map(|f| self.y0 + self.h - f * self.h)
    }

    fn point(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        Some((self.px(x)?, self.py(y)?))
    }

    fn frame(&self, out: &mut String, title: &str) {
        let (x0, y0, w, h) = (self.x0, self.y0, self.w, self.h);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#000" stroke-width="1"/>"##
        );
        for (v, label) in self.x.ticks() {
            if let Some(px) = self.px(v) {
                let yb = y0 + h;
                let _ = writeln!(
                    out,
                    r##"<line x1="{px:.2}" y1="{yb:.2}" x2="{px:.2}" y2="{:.2}" stroke="#000"/><text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"##,
                    yb - 5.0,
                    yb + 16.0,
                    escape(&label)
                );
            }
        }
        for (v, label) in self.y.ticks() {
            if let Some(py) = self.py(v) {
                let _ = writeln!(
                    out,
                    r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
                    x0 + 5.0,
                    x0 - 6.0,
                    py + 4.0,
                    escape(&label)
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
            x0 + 0.5 * w,
            y0 + h + 40.0,
            escape(&self.x.label)
        );
        let (lx, ly) = (x0 - 58.0, y0 + 0.5 * h);
        let _ = writeln!(
            out,
            r#"<text x="{lx:.2}" y="{ly:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
            escape(&self.y.label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
            x0 + 0.5 * w,
            y0 - 14.0,
            escape(title)
        );
    }

    fn clip_open(&self, out: &mut String, id: &str) {
        let _ = writeln!(
            out,
            r#"<clipPath id="{id}"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath><g clip-path="url(#{id})">"#,
            self.x0, self.y0, self.w, self.h
        );
    }
}

fn path_data(points: &[(f64, f64)]) -> String {
    let mut d = String::with_capacity(points.len() * 16);
    for (k, (x, y)) in points.iter().enumerate() {
        let _ = write!(d, "{}{x:.2},{y:.2}", if k == 0 { "M" } else { " L" });
    }
    d
}

fn stroke_style(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "",
        Stability::Unstable => r#" stroke-dasharray="7 5""#,
        Stability::Marginal => r#" stroke-dasharray="2 3""#,
    }
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{body}</svg>\n"
    )
}

fn legend(out: &mut String, x: f64, y: f64, entries: &[(String, &str)]) {
    for (k, (text, color)) in entries.iter().enumerate() {
        let yy = y + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            x + 22.0,
            x + 27.0,
            yy + 4.0,
            escape(text)
        );
    }
}

/// Runs of consecutive same-stability points along one branch.
fn stability_runs(branch: &[&CurvePoint]) -> Vec<(Stability, Vec<(f64, f64)>)> {
    let mut runs: Vec<(Stability, Vec<(f64, f64)>)> = Vec::new();
    for p in branch {
        let xy = (p.input_intensity, p.output_intensity);
        match runs.last_mut() {
            Some((s, pts)) if *s == p.stability => pts.push(xy),
            Some((_, pts)) => {
                // share the boundary point so the curve stays connected
                let joint = *pts.last().expect("runs are non-empty");
                runs.push((p.stability, vec![joint, xy]));
            }
            None => runs.push((p.stability, vec![xy])),
        }
    }
    runs
}

/// Branch points ordered by photon number, extended to the folds that end
/// them so adjacent branches meet.
fn branches_with_folds(curve: &HysteresisCurve) -> Vec<Vec<CurvePoint>> {
    let mut branches: Vec<Vec<CurvePoint>> = curve
        .branch_ids()
        .into_iter()
        .map(|id| {
            let mut b: Vec<CurvePoint> = curve.branch(id).copied().collect();
            b.sort_by(|x, y| x.n_c.total_cmp(&y.n_c));
            b
        })
        .collect();
    for k in 0..branches.len().saturating_sub(1) {
        let (hi_end, lo_next) = (
            branches[k][branches[k].len() - 1].n_c,
            branches[k + 1][0].n_c,
        );
        let Some(f) = curve
            .folds
            .iter()
            .find(|f| f.n_c > hi_end && f.n_c < lo_next)
        else {
            continue;
        };
        let at = |b: &CurvePoint| CurvePoint {
            input_intensity: f.input_intensity,
            n_c: f.n_c,
            output_intensity: f.output_intensity,
            ..*b
        };
        let end = at(&branches[k][branches[k].len() - 1]);
        let start = at(&branches[k + 1][0]);
        branches[k].push(end);
        branches[k + 1].insert(0, start);
    }
    branches
}

/// Output-versus-input figure for one or more curves sharing axes.
pub fn hysteresis_svg(curves: &[(&HysteresisCurve, &str)], title: &str, units: Units) -> String {
    let all = curves.iter().flat_map(|(c, _)| c.points.iter());
    let (mut xmax, mut ymax) = (0.0f64, 0.0f64);
    let mut xmin = f64::INFINITY;
    for p in all {
        xmin = xmin.min(units.rate(p.input_intensity));
        xmax = xmax.max(units.rate(p.input_intensity));
        ymax = ymax.max(units.rate(p.output_intensity));
    }
    if !xmin.is_finite() {
        xmin = 0.0;
    }
    let panel = Panel {
        x0: MARGIN_L,
        y0: MARGIN_T,
        w: WIDTH - MARGIN_L - MARGIN_R,
        h: HEIGHT - MARGIN_T - MARGIN_B,
        x: Axis::linear(xmin, xmax, &units.label("input intensity")),
        y: Axis::linear(0.0, 1.05 * ymax, &units.label("output intensity")),
    };
    let mut body = String::new();
    panel.frame(&mut body, title);
    panel.clip_open(&mut body, "plot");
    let mut legend_entries = Vec::new();
    for (k, (curve, name)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        legend_entries.push((name.to_string(), color));
        for branch in branches_with_folds(curve) {
            let refs: Vec<&CurvePoint> = branch.iter().collect();
            for (stability, pts) in stability_runs(&refs) {
                let mapped: Vec<(f64, f64)> = pts
                    .iter()
                    .filter_map(|&(x, y)| panel.point(units.rate(x), units.rate(y)))
                    .collect();
                if mapped.len() < 2 {
                    continue;
                }
                let _ = writeln!(
                    body,
                    r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.8"{}/>"#,
                    path_data(&mapped),
                    stroke_style(stability)
                );
            }
        }
        for f in &curve.folds {
            if let Some((x, y)) = panel.point(
                units.rate(f.input_intensity),
                units.rate(f.output_intensity),
            ) {
                let _ = writeln!(
                    body,
                    r##"<path d="M{x:.2},{:.2} L{:.2},{y:.2} L{x:.2},{:.2} L{:.2},{y:.2} Z" fill="{color}" stroke="#000" stroke-width="0.5"/>"##,
                    y - 5.0,
                    x + 5.0,
                    y + 5.0,
                    x - 5.0
                );
            }
        }
    }
    body.push_str("</g>\n");
    for (k, (curve, _)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for m in &curve.cpa_markers {
            if let Some((x, y)) = panel.point(
                units.rate(m.input_intensity),
                units.rate(m.output_intensity),
            ) {
                let fill = if m.observable { color } else { "#fff" };
                let _ = writeln!(
                    body,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="4.5" fill="{fill}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
                    x + 6.0,
                    y - 7.0,
                    escape(&m.label)
                );
            }
        }
    }
    legend(&mut body, panel.x0 + 12.0, panel.y0 + 16.0, &legend_entries);
    document(WIDTH, HEIGHT, &body)
}

/// Two panels against `beta`: critical coupling with the region `g > g_c`
/// shaded, and critical atomic detuning with `|delta_tls| < delta_tls_c`
/// shaded. A strip under each panel marks where the fixed pair admits CPA.
pub fn boundary_svg(map: &BoundaryMap, units: Units) -> String {
    let xs: Vec<f64> = map.axis.iter().map(|&b| units.rate(b)).collect();
    let (xlo, xhi) = (
        xs.first().copied().unwrap_or(1e-3),
        xs.last().copied().unwrap_or(10.0),
    );
    let gc: Vec<f64> = map.g_c_curve.iter().map(|&v| units.rate(v)).collect();
    let dc: Vec<f64> = map.delta_c_curve.iter().map(|&v| units.rate(v)).collect();
    let top = |v: &[f64]| {
        v.iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold(0.0f64, f64::max)
    };
    let panel_w = 0.5 * (2.0 * WIDTH) - MARGIN_L - MARGIN_R;
    let panels = [
        (
            Panel {
                x0: MARGIN_L,
                y0: MARGIN_T,
                w: panel_w,
                h: HEIGHT - MARGIN_T - MARGIN_B,
                x: Axis::log(xlo, xhi, &units.label("beta")),
                y: Axis::linear(0.0, 1.05 * top(&gc), &units.label("critical coupling g_c")),
            },
            &gc,
            true,
            format!("(a) delta_tls = {}", units.rate(map.delta_tls_fixed)),
        ),
        (
            Panel {
                x0: WIDTH + MARGIN_L,
                y0: MARGIN_T,
                w: panel_w,
                h: HEIGHT - MARGIN_T - MARGIN_B,
                x: Axis::log(xlo, xhi, &units.label("beta")),
                y: Axis::linear(
                    0.0,
                    1.05 * top(&dc),
                    &units.label("critical detuning delta_tls_c"),
                ),
            },
            &dc,
            false,
            format!("(b) g = {}", units.rate(map.g_fixed)),
        ),
    ];
    let mut body = String::new();
    for (k, (panel, curve, shade_above, title)) in panels.iter().enumerate() {
        panel.frame(&mut body, title);
        panel.clip_open(&mut body, &format!("panel{k}"));
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(curve.iter())
            .filter_map(|(&x, &y)| panel.point(x, y))
            .collect();
        if pts.len() >= 2 {
            let edge = if *shade_above {
                panel.y0
            } else {
                panel.y0 + panel.h
            };
            let mut region = pts.clone();
            region.push((pts[pts.len() - 1].0, edge));
            region.push((pts[0].0, edge));
            let _ = writeln!(
                body,
                r#"<path d="{} Z" fill="{FEASIBLE_FILL}" stroke="none"/>"#,
                path_data(&region)
            );
            let _ = writeln!(
                body,
                r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.8"/>"#,
                path_data(&pts),
                PALETTE[0]
            );
        }
        body.push_str("</g>\n");
        // feasibility strip for the fixed pair
        let strip_y = panel.y0 + panel.h + 22.0;
        for (j, &ok) in map.region_mask.iter().enumerate() {
            if !ok {
                continue;
            }
            let left = if j == 0 {
                xs[j]
            } else {
                (xs[j - 1] * xs[j]).sqrt()
            };
            let right = if j + 1 == xs.len() {
                xs[j]
            } else {
                (xs[j] * xs[j + 1]).sqrt()
            };
            if let (Some(a), Some(b)) = (panel.px(left), panel.px(right)) {
                let _ = writeln!(
                    body,
                    r#"<rect x="{a:.2}" y="{strip_y:.2}" width="{:.2}" height="4" fill="{}"/>"#,
                    (b - a).max(0.5),
                    PALETTE[2]
                );
            }
        }
    }
    document(2.0 * WIDTH, HEIGHT + 10.0, &body)
}

/// Output intensity against time on a logarithmic scale, one line per trace.
pub fn traces_svg(traces: &[TimeTrace], title: &str, units: Units) -> String {
    let mut tmax = 0.0f64;
    let mut ymax = 0.0f64;
    for tr in traces {
        tmax = tmax.max(tr.times.last().map_or(0.0, |&t| units.time(t)));
        ymax = ymax.max(
            tr.out_intensity
                .iter()
                .map(|&v| units.rate(v))
                .fold(0.0, f64::max),
        );
    }
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let floor = ymax * 1e-12;
    let panel = Panel {
        x0: MARGIN_L,
        y0: MARGIN_T,
        w: WIDTH - MARGIN_L - MARGIN_R,
        h: HEIGHT - MARGIN_T - MARGIN_B,
        x: Axis::linear(0.0, tmax, &units.time_label("time")),
        y: Axis::log(floor, ymax, &units.label("output intensity")),
    };
    let mut body = String::new();
    panel.frame(&mut body, title);
    panel.clip_open(&mut body, "plot");
    let mut entries = Vec::new();
    for (k, tr) in traces.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        entries.push((format!("delta = {}", units.rate(tr.delta)), color));
        let pts: Vec<(f64, f64)> = tr
            .times
            .iter()
            .zip(&tr.out_intensity)
            .filter_map(|(&t, &v)| panel.point(units.time(t), units.rate(v).max(floor)))
            .collect();
        if pts.len() >= 2 {
            let _ = writeln!(
                body,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
                path_data(&pts)
            );
        }
    }
    body.push_str("</g>\n");
    legend(
        &mut body,
        panel.x0 + panel.w - 120.0,
        panel.y0 + panel.h - 16.0 * traces.len() as f64,
        &entries,
    );
    document(WIDTH, HEIGHT, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ticks_are_round() {
        let a = Axis::linear(0.0, 150.0, "x");
        let t: Vec<f64> = a.ticks().into_iter().map(|(v, _)| v).collect();
        assert_eq!(t, vec![0.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0]);
    }

    #[test]
    fn log_axis_spans_decades() {
        let a = Axis::log(2e-3, 7.0, "x");
        assert_eq!((a.lo, a.hi), (-3.0, 1.0));
        assert_eq!(a.frac(1e-3), Some(0.0));
        assert_eq!(a.frac(-1.0), None);
    }

    #[test]
    fn runs_share_joints() {
        let mk = |x: f64, s| CurvePoint {
            input_intensity: x,
            n_c: x,
            output_intensity: x,
            stability: s,
            branch_id: 0,
        };
        let pts = [
            mk(0.0, Stability::Stable),
            mk(1.0, Stability::Stable),
            mk(2.0, Stability::Unstable),
        ];
        let refs: Vec<&CurvePoint> = pts.iter().collect();
        let runs = stability_runs(&refs);
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[1].1, vec![(1.0, 1.0), (2.0, 2.0)]);
    }
}
