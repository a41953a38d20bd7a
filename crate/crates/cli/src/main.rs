use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use cpa_cavity::cpa::{self, CpaError};
use cpa_cavity::dynamics::{self, DynamicsError, TimeTrace, VACUUM};
use cpa_cavity::io::config::{parse_config, ConfigError, RunConfig};
use cpa_cavity::io::{csv, svg, Units};
use cpa_cavity::presets::{self, Fig3, FIG3_DETUNINGS};
use cpa_cavity::steady::{self, SolverError};
use cpa_cavity::sweep::{self, HysteresisCurve, SweepError};

#[derive(Parser, Debug)]
#[command(
    name = "cpa-cavity",
    version,
    about = "Steady states, bistability and coherent perfect absorption of a cavity with a two-level atom and a pumped nonlinear crystal"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Write CSV files (default: both CSV and SVG).
    #[arg(long, global = true)]
    csv: bool,
    /// Write SVG figures (default: both CSV and SVG).
    #[arg(long, global = true)]
    svg: bool,
    /// Residual tolerance for accepting a steady state.
    #[arg(long = "tol-res", global = true)]
    tol_res: Option<f64>,
    /// Band around zero real part classified as marginal.
    #[arg(long = "tol-stab", global = true)]
    tol_stab: Option<f64>,
    /// Physical value of gamma; outputs are rescaled from gamma units.
    #[arg(long, global = true, default_value_t = 1.0)]
    gamma: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All steady states and their stability at one parameter point.
    Steady,
    /// CPA conditions and verification.
    Cpa,
    /// Input-output curve over the configured intensity grid.
    Sweep,
    /// CPA feasibility boundaries over a beta grid.
    Boundary,
    /// Time evolution from the empty cavity for each configured pump mismatch.
    Evolve,
    /// Regenerate a published figure from its named parameter set.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Figure {
    Fig2,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Infeasible(String),
    Numerical(String),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Numerical(_) => 4,
            Failure::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Infeasible(m) => write!(f, "CPA infeasible: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidParams(p) => Failure::Validation(p.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::InvalidGrid(m) => Failure::Validation(m),
            SweepError::Solver(s) => s.into(),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<CpaError> for Failure {
    fn from(e: CpaError) -> Self {
        match e {
            CpaError::InvalidParams(p) => Failure::Validation(p.to_string()),
            CpaError::Solver(s) => s.into(),
            CpaError::PreconditionViolated(m) => Failure::Validation(m),
            other => Failure::Infeasible(other.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidParams(p) => Failure::Validation(p.to_string()),
            DynamicsError::InvalidWindow(m) => Failure::Validation(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<csv::CsvError> for Failure {
    fn from(e: csv::CsvError) -> Self {
        Failure::Other(e.into())
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    csv: bool,
    svg: bool,
    units: Units,
}

impl Ctx {
    fn create(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        let path = self.out.join(name);
        info!("writing {}", path.display());
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<(), Failure> {
        let mut w = self.create(name)?;
        w.write_all(text.as_bytes())
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {name}"))?;
        Ok(())
    }
}

fn load(common: &Common) -> Result<Ctx, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    for (name, value, slot) in [
        ("--tol-res", common.tol_res, &mut cfg.solver.eps_res),
        ("--tol-stab", common.tol_stab, &mut cfg.solver.eps_stab),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Validation(format!(
                    "{name} must be positive (got {v})"
                )));
            }
            *slot = v;
        }
    }
    if !(common.gamma > 0.0 && common.gamma.is_finite()) {
        return Err(Failure::Validation(format!(
            "--gamma must be positive (got {})",
            common.gamma
        )));
    }
    fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let both = !common.csv && !common.svg;
    Ok(Ctx {
        cfg,
        out: common.out.clone(),
        csv: common.csv || both,
        svg: common.svg || both,
        units: Units::new(common.gamma),
    })
}

fn run_steady(ctx: &Ctx) -> Result<(), Failure> {
    let p = &ctx.cfg.system;
    let states = steady::solve_steady_states_with(p, &ctx.cfg.solver)?;
    let u = ctx.units;
    println!("{} steady state(s)", states.len());
    println!(
        "{:>24} {:>24} {:>24} {:>10} {:>14}",
        "n_c", "out_left", "out_right", "stability", "margin"
    );
    let mut rows = Vec::new();
    for s in &states {
        let (l, r) = s.output_intensities(p);
        println!(
            "{:>24} {:>24} {:>24} {:>10} {:>14.6e}",
            csv::fmt_f64(s.n_c),
            csv::fmt_f64(u.rate(l)),
            csv::fmt_f64(u.rate(r)),
            s.stability.as_str(),
            u.rate(s.margin)
        );
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{},{}",
            csv::fmt_f64(s.n_c),
            csv::fmt_f64(s.c_bar.re),
            csv::fmt_f64(s.c_bar.im),
            csv::fmt_f64(s.sigma_minus_bar.re),
            csv::fmt_f64(s.sigma_minus_bar.im),
            csv::fmt_f64(s.sigma_z_bar),
            csv::fmt_f64(u.rate(l)),
            csv::fmt_f64(u.rate(r)),
            s.stability.as_str(),
            csv::fmt_f64(u.rate(s.margin)),
        ));
    }
    if ctx.csv {
        let mut text = String::from(
            "n_c,c_re,c_im,sigma_re,sigma_im,sigma_z,output_left,output_right,stability,margin\n",
        );
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        ctx.write_text("steady.csv", &text)?;
    }
    Ok(())
}

fn run_cpa(ctx: &Ctx) -> Result<(), Failure> {
    let report = cpa::verify_cpa(&ctx.cfg.system)?;
    for (k, v) in csv::cpa_fields(&report, ctx.units) {
        println!("{k} = {v}");
    }
    if ctx.csv {
        csv::write_cpa(&report, ctx.create("cpa.csv")?, ctx.units)?;
    }
    if !report.feasible {
        let reasons: Vec<&str> = report.reasons.iter().map(|r| r.tag()).collect();
        return Err(Failure::Infeasible(reasons.join(", ")));
    }
    Ok(())
}

fn emit_curves(
    ctx: &Ctx,
    stem: &str,
    title: &str,
    curves: &[(HysteresisCurve, String)],
) -> Result<(), Failure> {
    if ctx.csv {
        for (curve, tag) in curves {
            let name = if curves.len() == 1 {
                format!("{stem}.csv")
            } else {
                format!("{stem}_{tag}.csv")
            };
            csv::write_sweep(curve, ctx.create(&name)?, ctx.units)?;
        }
    }
    if ctx.svg {
        let refs: Vec<(&HysteresisCurve, &str)> =
            curves.iter().map(|(c, t)| (c, t.as_str())).collect();
        ctx.write_text(
            &format!("{stem}.svg"),
            &svg::hysteresis_svg(&refs, title, ctx.units),
        )?;
    }
    for (curve, tag) in curves {
        println!(
            "{tag}: {} points, {} fold(s), pattern {}",
            curve.points.len(),
            curve.folds.len(),
            curve.pattern.as_str()
        );
        for w in &curve.windows {
            println!(
                "  multi-root window [{}, {}]{}",
                ctx.units.rate(w.lo),
                ctx.units.rate(w.hi),
                if w.open_at_zero {
                    " (open at zero drive)"
                } else {
                    ""
                }
            );
        }
        for m in &curve.cpa_markers {
            println!(
                "  {} at input {} on a {} branch",
                m.label,
                ctx.units.rate(m.input_intensity),
                m.stability.as_str()
            );
        }
    }
    Ok(())
}

fn run_sweep(ctx: &Ctx) -> Result<(), Failure> {
    let grid = ctx.cfg.sweep.grid();
    let curve = sweep::trace_hysteresis_with(&ctx.cfg.system, &grid, &ctx.cfg.solver)?;
    emit_curves(
        ctx,
        "sweep",
        "input-output curve",
        &[(curve, "sweep".into())],
    )
}

fn emit_boundary(ctx: &Ctx, stem: &str, map: &sweep::BoundaryMap) -> Result<(), Failure> {
    if ctx.csv {
        csv::write_boundary(map, ctx.create(&format!("{stem}.csv"))?, ctx.units)?;
    }
    if ctx.svg {
        ctx.write_text(&format!("{stem}.svg"), &svg::boundary_svg(map, ctx.units))?;
    }
    let feasible = map.region_mask.iter().filter(|&&b| b).count();
    println!(
        "{} beta values, {feasible} admit CPA for the fixed pair",
        map.axis.len()
    );
    Ok(())
}

fn run_boundary(ctx: &Ctx) -> Result<(), Failure> {
    let b = &ctx.cfg.boundary;
    let map = sweep::boundary_map(
        ctx.cfg.system.gamma,
        b.g_fixed,
        b.delta_tls_fixed,
        &b.grid(),
    )?;
    emit_boundary(ctx, "boundary", &map)
}

/// One trace per pump mismatch, each on its own scoped thread.
fn evolve_all(
    p: &cpa_cavity::SystemParams,
    deltas: &[f64],
    t_end: f64,
    sample_dt: f64,
) -> Result<Vec<TimeTrace>, Failure> {
    let results: Vec<Result<TimeTrace, DynamicsError>> = std::thread::scope(|s| {
        let handles: Vec<_> = deltas
            .iter()
            .map(|&delta| s.spawn(move || dynamics::integrate(p, delta, VACUUM, t_end, sample_dt)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration thread panicked"))
            .collect()
    });
    results
        .into_iter()
        .map(|r| r.map_err(Failure::from))
        .collect()
}

fn emit_traces(ctx: &Ctx, stem: &str, title: &str, traces: &[TimeTrace]) -> Result<(), Failure> {
    if ctx.csv {
        for tr in traces {
            let name = csv::trace_file_name(stem, tr.delta, "csv");
            csv::write_trace(tr, ctx.create(&name)?, ctx.units)?;
        }
    }
    if ctx.svg {
        ctx.write_text(
            &format!("{stem}.svg"),
            &svg::traces_svg(traces, title, ctx.units),
        )?;
    }
    for tr in traces {
        let (k_min, min) =
            tr.out_intensity
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |a, (k, v)| if v < a.1 { (k, v) } else { a },
                );
        println!(
            "delta = {}: minimum output {} at t = {}, final output {}",
            ctx.units.rate(tr.delta),
            ctx.units.rate(min),
            ctx.units.time(tr.times[k_min]),
            ctx.units
                .rate(*tr.out_intensity.last().unwrap_or(&f64::NAN))
        );
    }
    Ok(())
}

fn run_evolve(ctx: &Ctx) -> Result<(), Failure> {
    let e = &ctx.cfg.evolve;
    let traces = evolve_all(&ctx.cfg.system, &e.deltas, e.t_end, e.sample_dt)?;
    emit_traces(ctx, "evolve", "output intensity", &traces)
}

fn fig3_curves(ctx: &Ctx, fig: Fig3) -> Result<Vec<(HysteresisCurve, String)>, Failure> {
    let (lo, hi) = fig.input_range();
    let grid = sweep::linear_grid(lo, hi, 1501);
    let mut out = Vec::new();
    for (delta_tls, label) in FIG3_DETUNINGS.iter().zip(fig.labels()) {
        let p = fig.params(*delta_tls);
        let mut curve = sweep::trace_hysteresis_with(&p, &grid, &ctx.cfg.solver)?;
        for m in &mut curve.cpa_markers {
            m.label = label.to_string();
        }
        out.push((curve, format!("delta_tls_{delta_tls}")));
    }
    Ok(out)
}

fn run_reproduce(ctx: &Ctx, figure: Figure) -> Result<(), Failure> {
    match figure {
        Figure::Fig2 => {
            let grid = sweep::log_grid(
                presets::FIG2_BETA_RANGE.0,
                presets::FIG2_BETA_RANGE.1,
                presets::FIG2_POINTS,
            );
            let map = sweep::boundary_map(1.0, presets::FIG2_G, presets::FIG2_DELTA_TLS, &grid)?;
            emit_boundary(ctx, "fig2", &map)
        }
        Figure::Fig3a | Figure::Fig3b | Figure::Fig3c => {
            let fig = match figure {
                Figure::Fig3a => Fig3::A,
                Figure::Fig3b => Fig3::B,
                _ => Fig3::C,
            };
            let curves = fig3_curves(ctx, fig)?;
            let (g_nl, phi) = fig.crystal();
            let title = format!("|G| = {g_nl}, phi = {:.4}", phi);
            emit_curves(ctx, fig.name(), &title, &curves)
        }
        Figure::Fig4 => {
            let p = presets::fig4_params();
            let traces = evolve_all(
                &p,
                &presets::FIG4_DELTAS,
                presets::FIG4_T_END,
                presets::FIG4_SAMPLE_DT,
            )?;
            emit_traces(ctx, "fig4", "output intensity at the CPA drive", &traces)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = load(&cli.common)?;
    match cli.command {
        Command::Steady => run_steady(&ctx),
        Command::Cpa => run_cpa(&ctx),
        Command::Sweep => run_sweep(&ctx),
        Command::Boundary => run_boundary(&ctx),
        Command::Evolve => run_evolve(&ctx),
        Command::Reproduce { figure } => run_reproduce(&ctx, figure),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
