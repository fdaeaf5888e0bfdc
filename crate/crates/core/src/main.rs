//! Command-line front end: analysis reports, trajectory simulation, the
//! alpha survey and the omega-plane map.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lorenz_lab::error::{Error, Result};
use lorenz_lab::integrator::{
    integrate_dde, integrate_ode, oscillation_metrics, OdeField, OscillationMetrics, Trajectory,
};
use lorenz_lab::model::{AlphaParams, RegulationTarget, State};
use lorenz_lab::normal_form::{hopf_normal_form, NormalForm};
use lorenz_lab::omega::{map_contour, origin_crossed, refined_min_distance};
use lorenz_lab::spectral::{
    build_aux_cubic, build_char_poly, critical_delay, routh_hurwitz_tau0, AuxCubic, CharQuasiPoly,
    RouthHurwitz, SwitchAnalysis,
};
use lorenz_lab::sweep::{alpha_sweep, write_sweep_csv};

#[derive(Parser)]
#[command(
    name = "lorenz-lab",
    about = "Delayed-feedback stabilization analysis for the generalized Lorenz family",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full spectral and bifurcation report at one alpha, as JSON.
    Analyze(AnalyzeArgs),
    /// Integrate the controlled loop; trajectory CSV plus a metrics sidecar.
    Simulate(SimulateArgs),
    /// Survey the alpha grid; CSV with one classified row per grid point.
    Sweep(SweepArgs),
    /// Sample the curve nu -> W(i nu, tau); CSV and optional SVG.
    Map(MapArgs),
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("bad number {s:?}: {e}"))?;
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(format!("alpha must lie in [0, 1], got {v}"));
    }
    Ok(v)
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Family parameter in [0, 1].
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Override the target x-coordinate (default: the open-loop equilibrium E+).
    #[arg(long = "x-r")]
    x_r: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Family parameter in [0, 1].
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Feedback delay; 0 runs the undelayed closed loop.
    #[arg(long)]
    tau: f64,
    /// Step size; for tau > 0 it is adjusted to tau / round(tau / h).
    #[arg(long)]
    h: Option<f64>,
    /// Integration horizon.
    #[arg(long = "t-end", default_value_t = 250.0)]
    t_end: f64,
    /// Initial state "x,y,z" (default: target shifted by 0.5 in each axis).
    #[arg(long, value_parser = parse_state)]
    initial: Option<State>,
    /// Trajectory CSV path (default: stdout; the metrics sidecar then goes
    /// to stderr instead of <out>.metrics.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of evenly spaced alpha grid points on [0, 1].
    #[arg(long, default_value_t = 21)]
    n: usize,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// Family parameter in [0, 1].
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Delay at which the curve is sampled.
    #[arg(long)]
    tau: f64,
    /// Half-width of the nu sampling range (default: twice the largest
    /// crossing frequency).
    #[arg(long = "nu-max")]
    nu_max: Option<f64>,
    /// Samples per half-axis; the curve has 2n + 1 points.
    #[arg(long, default_value_t = 4000)]
    n: usize,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the curve as an SVG polyline.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_state(s: &str) -> std::result::Result<State, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut vals = [0.0f64; 3];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p.trim().parse().map_err(|e| format!("bad number {p:?}: {e}"))?;
    }
    Ok(State::new(vals[0], vals[1], vals[2]))
}

#[derive(Serialize)]
struct AnalysisReport {
    params: AlphaParams,
    x_r: f64,
    z_star: f64,
    char_poly: CharQuasiPoly,
    routh_hurwitz: RouthHurwitz,
    aux_cubic: AuxCubic,
    switches: SwitchAnalysis,
    normal_form: Option<NormalForm>,
}

#[derive(Serialize)]
struct MetricsSidecar<'a> {
    alpha: f64,
    tau: f64,
    h_requested: f64,
    h_used: f64,
    t_end: f64,
    initial: State,
    samples: usize,
    metrics: &'a OscillationMetrics,
}

#[derive(Serialize)]
struct MapSummary {
    alpha: f64,
    tau: f64,
    nu_max: f64,
    samples: usize,
    min_distance: f64,
    min_nu: f64,
    origin_crossed: bool,
}

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn setup(alpha: f64, x_r: Option<f64>) -> Result<(AlphaParams, RegulationTarget)> {
    let params = AlphaParams::from_alpha(alpha)?;
    let target = match x_r {
        Some(x) => RegulationTarget::with_x_r(&params, x),
        None => RegulationTarget::e_plus(&params),
    };
    Ok((params, target))
}

fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let (params, target) = setup(args.alpha, args.x_r)?;
    let switches = critical_delay(&params, &target)?;
    let normal_form = match (switches.tau_c, switches.nu0) {
        (Some(tau_c), Some(nu0)) => Some(hopf_normal_form(&params, &target, tau_c, nu0)?),
        _ => None,
    };
    let report = AnalysisReport {
        params,
        x_r: target.x_r,
        z_star: target.z_star,
        char_poly: build_char_poly(&params, &target),
        routh_hurwitz: routh_hurwitz_tau0(&params),
        aux_cubic: build_aux_cubic(&params, &target),
        switches,
        normal_form,
    };
    let mut w = out_writer(&args.out)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let (params, target) = setup(args.alpha, None)?;
    if args.tau < 0.0 {
        return Err(Error::Config(format!("tau must be nonnegative, got {}", args.tau)));
    }
    let initial = args
        .initial
        .unwrap_or_else(|| target.as_state().add_scaled(&State::new(1.0, 1.0, 1.0), 0.5));

    let (traj, h_requested): (Trajectory, f64) = if args.tau == 0.0 {
        let h = args.h.unwrap_or(1e-3);
        (integrate_ode(&params, &target, initial, h, args.t_end, OdeField::Controlled)?, h)
    } else {
        let h_req = args.h.unwrap_or(args.tau / 64.0);
        let n = (args.tau / h_req).round().max(1.0);
        let h = args.tau / n;
        (integrate_dde(&params, &target, args.tau, initial, h, args.t_end)?, h_req)
    };
    let metrics = oscillation_metrics(&traj, &target, 0.25)?;
    let sidecar = MetricsSidecar {
        alpha: args.alpha,
        tau: args.tau,
        h_requested,
        h_used: traj.meta.h,
        t_end: args.t_end,
        initial,
        samples: traj.len(),
        metrics: &metrics,
    };

    let mut w = out_writer(&args.out)?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    match &args.out {
        Some(p) => {
            let side = sidecar_path(p);
            let f = BufWriter::new(File::create(side)?);
            serde_json::to_writer_pretty(f, &sidecar).map_err(io::Error::from)?;
        }
        None => {
            serde_json::to_writer_pretty(io::stderr().lock(), &sidecar)
                .map_err(io::Error::from)?;
            eprintln!();
        }
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".metrics.json");
    out.with_file_name(name)
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    init_thread_pool();
    let entries = alpha_sweep(args.n)?;
    let mut w = out_writer(&args.out)?;
    write_sweep_csv(&entries, &mut w)?;
    w.flush()?;
    let failed: Vec<&_> = entries.iter().filter(|e| e.row.is_none()).collect();
    eprintln!(
        "sweep: {} grid points, {} analyzed, {} failed",
        entries.len(),
        entries.len() - failed.len(),
        failed.len()
    );
    for e in failed {
        eprintln!("  alpha {}: {}", e.alpha, e.error.as_deref().unwrap_or("unknown"));
    }
    Ok(())
}

/// Cap the rayon pool from LORENZ_LAB_THREADS; silently ignored when the
/// global pool was already built or the crate was compiled sequential.
fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("LORENZ_LAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run_map(args: &MapArgs) -> Result<()> {
    let (params, target) = setup(args.alpha, None)?;
    let nu_max = match args.nu_max {
        Some(v) => v,
        None => {
            let sw = critical_delay(&params, &target)?;
            let top = sw.roots.iter().map(|r| r.nu).fold(0.0f64, f64::max);
            if top > 0.0 {
                2.0 * top
            } else {
                50.0
            }
        }
    };
    let poly = build_char_poly(&params, &target);
    let contour = map_contour(&poly, args.tau, nu_max, args.n)?;
    let summary = MapSummary {
        alpha: args.alpha,
        tau: args.tau,
        nu_max,
        samples: contour.nu.len(),
        min_distance: refined_min_distance(&poly, args.tau, nu_max, args.n)?,
        min_nu: contour.closest_nu(),
        origin_crossed: origin_crossed(&params, &target, args.tau, nu_max, args.n)?,
    };
    let mut w = out_writer(&args.out)?;
    contour.write_csv(&mut w)?;
    w.flush()?;
    if let Some(svg) = &args.svg {
        contour.write_svg(BufWriter::new(File::create(svg)?))?;
    }
    serde_json::to_writer_pretty(io::stderr().lock(), &summary).map_err(io::Error::from)?;
    eprintln!();
    Ok(())
}

#[derive(Serialize)]
struct ErrorObject {
    error: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Map(a) => run_map(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let obj = ErrorObject { error: e.to_string() };
            eprintln!("{}", serde_json::to_string(&obj).unwrap_or_else(|_| obj.error.clone()));
            ExitCode::FAILURE
        }
    }
}
