//! Command-line driver: classify equilibria, integrate solitons, verify
//! residuals and emit meshes and portraits.
//!
//! Exit codes: 0 success, 2 usage error, 3 i/o error, 4 numerical or
//! geometric failure. Every randomized sampling is seeded, so identical
//! invocations produce byte-identical outputs.

use clap::{Args, Parser, Subcommand};
use rand::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::ambient::{KillingField, RotationFrame};
use crate::analyze::{self, CurveAnalysis, PortraitGrid};
use crate::charts::{ChartKind, ChartSurface, CurveState, ExactSolution, SurfaceChart};
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegrationConfig, TerminationReason, Trajectory};
use crate::meshio;
use crate::oracle::{self, FdConfig, SampledChart, TrajectoryChart};
use crate::systems::{self, SystemId, Window};

/// Environment variable naming the default directory for relative outputs.
pub const OUT_DIR_ENV: &str = "SPHERELINE_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "sphereline",
    about = "Invariant mean curvature flow solitons in S2 x R: phase-plane analysis, integration and verification",
    version
)]
pub struct RunConfig {
    /// Directory for relative output paths (overrides SPHERELINE_OUT_DIR).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Interpret all angle-valued inputs as degrees.
    #[arg(long, global = true)]
    pub degrees: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List and classify the equilibria of a planar system in a window
    Equilibria(EquilibriaCmd),
    /// Integrate a soliton profile and analyze its geometry
    Soliton(SolitonCmd),
    /// Evaluate the soliton residual H - <N, X> over a chart
    Verify(VerifyCmd),
    /// Sample a phase portrait over a seed grid
    Portrait(PortraitCmd),
}

#[derive(Debug, Args)]
pub struct EquilibriaCmd {
    /// Planar system, s12 or s22.
    #[arg(long)]
    pub system: String,

    /// Window u_min,u_max,theta_min,theta_max (defaults to the analysis
    /// domain of the system).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,

    /// Write the table as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolitonCmd {
    /// Full system, s11 or s21.
    #[arg(long)]
    pub system: String,

    /// Initial state u,v,theta at s = 0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ic: Vec<f64>,

    /// Half-width S of the parameter span [-S, S].
    #[arg(long, default_value_t = 60.0)]
    pub span: f64,

    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,

    /// Absolute integration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,

    /// Largest step the controller may take.
    #[arg(long)]
    pub max_step: Option<f64>,

    /// Stop radius for convergence to an equilibrium of the projected system.
    #[arg(long, default_value_t = 1e-9)]
    pub eq_radius: f64,

    /// Disable convergence stopping so the span runs to the end.
    #[arg(long)]
    pub no_eq_stop: bool,

    /// Number of residual sample points along the curve.
    #[arg(long, default_value_t = 200)]
    pub residual_samples: usize,

    /// Finite-difference step for the residual oracle.
    #[arg(long, default_value_t = 1e-4)]
    pub fd_step: f64,

    /// Seed for randomized sweep coordinates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the trajectory as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    /// Write the curve analysis as JSON.
    #[arg(long)]
    pub analysis: Option<PathBuf>,

    /// Write the residual report as CSV.
    #[arg(long)]
    pub residual: Option<PathBuf>,

    /// Sweep the profile into a mesh and write a projected OBJ.
    #[arg(long)]
    pub mesh: Option<PathBuf>,

    /// Also write the raw mesh (with residual scalars) as JSON.
    #[arg(long)]
    pub mesh_json: Option<PathBuf>,

    /// Number of curve rows in the swept mesh.
    #[arg(long, default_value_t = 201)]
    pub mesh_rows: usize,

    /// Number of sweep samples (columns) in the mesh.
    #[arg(long, default_value_t = 64)]
    pub sweep_samples: usize,

    /// Sweep range; defaults to a full turn for rotational charts and
    /// t in [-3, 3] for vertical ones.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sweep_range: Option<Vec<f64>>,

    /// Triangulate mesh quads on export.
    #[arg(long)]
    pub triangulate: bool,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    /// Exact surface: slice, cylinder-c or geodesic-cylinder.
    #[arg(long, conflicts_with = "chart")]
    pub exact: Option<String>,

    /// Fiber height of the slice.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,

    /// Trajectory CSV (header s,u,v,theta) to verify instead.
    #[arg(long)]
    pub chart: Option<PathBuf>,

    /// Chart kind of the loaded curve: vertical or rotational.
    #[arg(long)]
    pub kind: Option<String>,

    /// Killing field: v, r-z or r-general.
    #[arg(long)]
    pub killing: String,

    /// Frame angles m1,n1,m2,n2 for r-general.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub frame: Option<Vec<f64>>,

    /// Number of (s, w) sample points.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,

    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    pub fd_step: f64,

    /// One level of Richardson extrapolation in the oracle.
    #[arg(long)]
    pub richardson: bool,

    /// Seed for the sample draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the residual report CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PortraitCmd {
    /// Planar system, s12 or s22.
    #[arg(long)]
    pub system: String,

    /// Seed grid u_min,u_max,nu,theta_min,theta_max,ntheta.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<String>>,

    /// Half-width of the integration span per seed.
    #[arg(long, default_value_t = 60.0)]
    pub span: f64,

    /// Output sampling step along each trajectory.
    #[arg(long, default_value_t = 0.1)]
    pub resample: f64,

    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,

    /// Absolute integration tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,

    /// Write the portrait JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn angle(v: f64, degrees: bool) -> f64 {
    if degrees {
        v * PI / 180.0
    } else {
        v
    }
}

fn expect_len<T>(vals: &[T], n: usize, flag: &str) -> Result<()> {
    if vals.len() != n {
        return Err(Error::usage(format!(
            "{flag} expects {n} comma-separated values, got {}",
            vals.len()
        )));
    }
    Ok(())
}

fn resolve_path(path: &Path, out_dir: &Option<PathBuf>) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    let dir = out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    match dir {
        Some(d) => d.join(path),
        None => path.to_path_buf(),
    }
}

fn parse_killing(name: &str, frame: &Option<Vec<f64>>, degrees: bool) -> Result<KillingField> {
    match name {
        "v" => {
            if frame.is_some() {
                return Err(Error::usage("--frame only applies to --killing r-general"));
            }
            Ok(KillingField::Vertical)
        }
        "r-z" => {
            if frame.is_some() {
                return Err(Error::usage("--frame only applies to --killing r-general"));
            }
            Ok(KillingField::RotationZ)
        }
        "r-general" => {
            let f = frame
                .as_ref()
                .ok_or_else(|| Error::usage("--killing r-general requires --frame m1,n1,m2,n2"))?;
            expect_len(f, 4, "--frame")?;
            let a: Vec<f64> = f.iter().map(|&x| angle(x, degrees)).collect();
            Ok(KillingField::Rotation(RotationFrame::from_angles(a[0], a[1], a[2], a[3])?))
        }
        other => Err(Error::usage(format!(
            "unknown killing field '{other}' (expected v, r-z or r-general)"
        ))),
    }
}

#[derive(Debug, Serialize)]
pub struct EquilibriaReport {
    pub system: SystemId,
    pub window: Window,
    pub equilibria: Vec<systems::Equilibrium>,
}

pub fn cmd_equilibria(cmd: &EquilibriaCmd, degrees: bool, out_dir: &Option<PathBuf>, w: &mut dyn Write) -> Result<()> {
    let system = SystemId::parse(&cmd.system)?;
    if !system.is_planar() {
        return Err(Error::usage("equilibria are enumerated for s12 or s22"));
    }
    let window = match &cmd.window {
        Some(vals) => {
            expect_len(vals, 4, "--window")?;
            let a: Vec<f64> = vals.iter().map(|&x| angle(x, degrees)).collect();
            Window::new(a[0], a[1], a[2], a[3])?
        }
        None => match system {
            SystemId::S12 => Window::new(-1.5, 1.5, -PI, PI)?,
            _ => Window::new(-PI, PI, -PI, PI)?,
        },
    };
    let equilibria = systems::equilibria(system, window)?;
    writeln!(w, "equilibria of {} in u [{}, {}], theta [{}, {}]:", system.label(), window.u_min, window.u_max, window.theta_min, window.theta_max).ok();
    if equilibria.is_empty() {
        writeln!(w, "  (none)").ok();
    }
    for e in &equilibria {
        let l = &e.linearization;
        writeln!(
            w,
            "  (u, theta) = ({:.12}, {:.12})  eigenvalues {:.12} {:+.12}i, {:.12} {:+.12}i  {}{}",
            e.u,
            e.theta,
            l.eigenvalues[0].re,
            l.eigenvalues[0].im,
            l.eigenvalues[1].re,
            l.eigenvalues[1].im,
            l.classification.label(),
            if e.non_surface { "  [non-surface]" } else { "" }
        )
        .ok();
    }
    if let Some(path) = &cmd.json {
        let report = EquilibriaReport { system, window, equilibria };
        let path = resolve_path(path, out_dir);
        meshio::export_analysis_json(&report, &path)?;
        writeln!(w, "wrote {}", path.display()).ok();
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SolitonReport {
    pub system: SystemId,
    pub ic: [f64; 3],
    pub span: f64,
    pub termination: TerminationReason,
    pub termination_backward: Option<TerminationReason>,
    pub accepted_steps: usize,
    pub analysis: CurveAnalysis,
    pub max_residual_fd: f64,
    pub max_residual_closed: f64,
    pub residual_samples: usize,
}

fn draw_samples(
    traj_range: (f64, f64),
    kind: ChartKind,
    n: usize,
    rng: &mut StdRng,
) -> Vec<(f64, f64)> {
    let (lo, hi) = traj_range;
    let margin = (hi - lo) * 1e-3;
    (0..n)
        .map(|i| {
            let s = if n == 1 {
                (lo + hi) / 2.0
            } else {
                lo + margin + (hi - lo - 2.0 * margin) * i as f64 / (n - 1) as f64
            };
            let w = match kind {
                ChartKind::Rotational => rng.gen_range(0.0..2.0 * PI),
                ChartKind::Vertical => rng.gen_range(-3.0..3.0),
            };
            (s, w)
        })
        .collect()
}

fn chart_from_trajectory(traj: &Trajectory, rows: usize) -> Result<SurfaceChart> {
    let kind = traj.system.chart_kind().ok_or_else(|| Error::usage("planar run has no chart"))?;
    let (lo, hi) = traj.s_range();
    let rows = rows.max(2);
    let mut curve = Vec::with_capacity(rows);
    for i in 0..rows {
        let s = lo + (hi - lo) * i as f64 / (rows - 1) as f64;
        let st = traj.eval(s)?;
        curve.push(CurveState { s, u: st[0], v: st[1], theta: st[2] });
    }
    SurfaceChart::new(kind, curve)
}

pub fn cmd_soliton(cmd: &SolitonCmd, degrees: bool, out_dir: &Option<PathBuf>, w: &mut dyn Write) -> Result<()> {
    let system = SystemId::parse(&cmd.system)?;
    if system.is_planar() {
        return Err(Error::usage("soliton profiles come from the full systems s11 or s21"));
    }
    if cmd.ic.len() != 3 {
        return Err(Error::usage("--ic expects u,v,theta"));
    }
    if cmd.span <= 0.0 {
        return Err(Error::usage("--span must be positive"));
    }
    let ic = [angle(cmd.ic[0], degrees), cmd.ic[1], angle(cmd.ic[2], degrees)];
    let cfg = IntegrationConfig {
        rtol: cmd.rtol,
        atol: cmd.atol,
        max_step: cmd.max_step,
        span: (-cmd.span, cmd.span),
        equilibrium_radius: if cmd.no_eq_stop { None } else { Some(cmd.eq_radius) },
        ..IntegrationConfig::default()
    };
    let traj = integrate(system, &ic, &cfg)?;
    let kind = system.chart_kind().expect("full system");

    let analysis = analyze::analyze_trajectory(&traj)?;
    let chart = TrajectoryChart::new(&traj)?;
    let mut rng = StdRng::seed_from_u64(cmd.seed);
    let samples = draw_samples(traj.s_range(), kind, cmd.residual_samples, &mut rng);
    let fd = FdConfig { step: cmd.fd_step, richardson: false };
    let killing = match system {
        SystemId::S11 => KillingField::Vertical,
        _ => KillingField::RotationZ,
    };
    let scan = oracle::residual_scan(&chart, &killing, &samples, &fd)?;
    let (max_fd, max_closed) = oracle::residual_maxima(&scan);

    writeln!(w, "system {}, killing field {}", system.label(), killing.label()).ok();
    writeln!(w, "termination: {}{}", traj.termination.label(), match &traj.termination_backward {
        Some(t) => format!(" (forward), {} (backward)", t.label()),
        None => String::new(),
    }).ok();
    if traj.termination == TerminationReason::DomainBoundary
        || traj.termination_backward == Some(TerminationReason::DomainBoundary)
    {
        writeln!(w, "note: the run reached the latitude margin |u| = pi/2 - 1e-6").ok();
    }
    writeln!(w, "accepted steps: {}", traj.len()).ok();
    if let Some(d) = analysis.symmetry_defect {
        writeln!(w, "symmetry defect: {d:e}").ok();
    }
    writeln!(w, "u-axis crossings: {}", analysis.u_axis_crossings).ok();
    writeln!(w, "self-intersections: {}{}", analysis.self_intersections.count,
        if analysis.self_intersections.degenerate { " (degenerate profile)" } else { "" }).ok();
    writeln!(w, "asymptotic to the equator cylinder: {:?} (last-decile max |u| = {:e})",
        analysis.asymptote.verdict, analysis.asymptote.last_decile_max_u).ok();
    writeln!(w, "max residual (finite-difference): {max_fd:e} over {} samples", scan.len()).ok();
    writeln!(w, "max residual (closed-form): {max_closed:e}").ok();

    if let Some(path) = &cmd.csv {
        let path = resolve_path(path, out_dir);
        meshio::export_trajectory_csv(&traj, &path)?;
        writeln!(w, "wrote {}", path.display()).ok();
    }
    if let Some(path) = &cmd.residual {
        let path = resolve_path(path, out_dir);
        meshio::export_residual_csv(&scan, &path)?;
        writeln!(w, "wrote {}", path.display()).ok();
    }
    if let Some(path) = &cmd.analysis {
        let report = SolitonReport {
            system,
            ic,
            span: cmd.span,
            termination: traj.termination.clone(),
            termination_backward: traj.termination_backward.clone(),
            accepted_steps: traj.len(),
            analysis: analysis.clone(),
            max_residual_fd: max_fd,
            max_residual_closed: max_closed,
            residual_samples: scan.len(),
        };
        let path = resolve_path(path, out_dir);
        meshio::export_analysis_json(&report, &path)?;
        writeln!(w, "wrote {}", path.display()).ok();
    }
    if cmd.mesh.is_some() || cmd.mesh_json.is_some() {
        let sampled = chart_from_trajectory(&traj, cmd.mesh_rows)?;
        let range = match &cmd.sweep_range {
            Some(r) => {
                expect_len(r, 2, "--sweep-range")?;
                (r[0], r[1])
            }
            None => match kind {
                ChartKind::Rotational => (0.0, 2.0 * PI),
                ChartKind::Vertical => (-3.0, 3.0),
            },
        };
        let mut mesh = meshio::sweep(&sampled, range, cmd.sweep_samples)?;
        // Per-vertex residual decoration.
        let mut verts = Vec::with_capacity(mesh.vertices.len());
        for st in &sampled.curve {
            for &wv in &mesh.w_values {
                verts.push((st.s, wv));
            }
        }
        let vert_scan = oracle::residual_scan(&chart, &killing, &verts, &fd)?;
        let mesh_max = vert_scan.iter().fold(0.0f64, |m, r| m.max(r.residual_fd.abs()));
        mesh = mesh.with_residual_scalars(&vert_scan)?;
        writeln!(w, "mesh residual max: {mesh_max:e} over {} vertices", mesh.vertices.len()).ok();
        if let Some(path) = &cmd.mesh {
            let projected = meshio::project_mesh(&mesh);
            if !projected.flagged_vertices.is_empty() {
                writeln!(
                    w,
                    "warning: {} vertices near the projection pole, {} faces dropped",
                    projected.flagged_vertices.len(),
                    projected.dropped_faces
                )
                .ok();
            }
            let path = resolve_path(path, out_dir);
            meshio::export_mesh_obj(&projected, &path, cmd.triangulate)?;
            writeln!(w, "wrote {}", path.display()).ok();
        }
        if let Some(path) = &cmd.mesh_json {
            let path = resolve_path(path, out_dir);
            meshio::export_mesh_json(&mesh, &path)?;
            writeln!(w, "wrote {}", path.display()).ok();
        }
    }
    Ok(())
}

pub fn cmd_verify(cmd: &VerifyCmd, degrees: bool, out_dir: &Option<PathBuf>, w: &mut dyn Write) -> Result<()> {
    let killing = parse_killing(&cmd.killing, &cmd.frame, degrees)?;
    let fd = FdConfig { step: cmd.fd_step, richardson: cmd.richardson };
    let mut rng = StdRng::seed_from_u64(cmd.seed);

    enum Source {
        Exact(crate::charts::AnalyticCurve),
        Loaded(SampledChart),
    }
    let source = if let Some(name) = &cmd.exact {
        let exact = ExactSolution::parse(name, cmd.t0)?;
        Source::Exact(exact.analytic())
    } else if let Some(path) = &cmd.chart {
        let kind = match cmd.kind.as_deref() {
            Some("vertical") => ChartKind::Vertical,
            Some("rotational") => ChartKind::Rotational,
            Some(other) => return Err(Error::usage(format!("unknown chart kind '{other}'"))),
            None => return Err(Error::usage("--chart requires --kind vertical|rotational")),
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let (header, rows) = meshio::parse_trajectory_csv(&text)?;
        if header != ["s", "u", "v", "theta"] {
            return Err(Error::usage(format!(
                "expected csv header s,u,v,theta, got {}",
                header.join(",")
            )));
        }
        let curve: Vec<CurveState> = rows
            .iter()
            .map(|r| CurveState { s: r[0], u: r[1], v: r[2], theta: r[3] })
            .collect();
        Source::Loaded(SampledChart::new(SurfaceChart::new(kind, curve)?)?)
    } else {
        return Err(Error::usage("verify needs --exact or --chart"));
    };

    let (kind, s_range): (ChartKind, (f64, f64)) = match &source {
        Source::Exact(c) => (c.kind, c.s_range()),
        Source::Loaded(c) => (c.kind(), c.s_range()),
    };
    let samples = draw_samples(s_range, kind, cmd.samples.max(1), &mut rng);
    let scan = match &source {
        Source::Exact(c) => oracle::residual_scan(c, &killing, &samples, &fd)?,
        Source::Loaded(c) => oracle::residual_scan(c, &killing, &samples, &fd)?,
    };
    let (max_fd, max_closed) = oracle::residual_maxima(&scan);
    let mean_fd = scan.iter().map(|r| r.residual_fd.abs()).sum::<f64>() / scan.len() as f64;

    writeln!(w, "chart kind: {}, killing field: {}", kind.label(), killing.label()).ok();
    writeln!(w, "samples: {}", scan.len()).ok();
    writeln!(w, "max residual (closed-form): {max_closed:e}").ok();
    writeln!(w, "max residual (finite-difference): {max_fd:e}").ok();
    writeln!(w, "mean |residual| (finite-difference): {mean_fd:e}").ok();

    // Rotation about a general axis: report how <N, R> varies with phi.
    if let KillingField::Rotation(frame) = &killing {
        if kind == ChartKind::Rotational {
            let mut max_var = 0.0f64;
            let mut max_dev = 0.0f64;
            for &(s, _) in &samples {
                let st = match &source {
                    Source::Exact(c) => c.state(s)?,
                    Source::Loaded(c) => c.state(s)?,
                };
                let sweep = oracle::phi_sweep(&st, frame, 64);
                max_var = max_var.max(sweep.variance);
                max_dev = max_dev.max(sweep.max_deviation);
            }
            writeln!(w, "phi-variance of <N, R> (max over samples): {max_var:e}").ok();
            writeln!(w, "max |<N, R> - mean| over the phi grid: {max_dev:e}").ok();
            if max_var > 1e-6 {
                writeln!(w, "phi-dependent: yes (not a soliton for this axis)").ok();
            } else {
                writeln!(w, "phi-dependent: no").ok();
            }
        }
    }

    if let Some(path) = &cmd.out {
        let path = resolve_path(path, out_dir);
        meshio::export_residual_csv(&scan, &path)?;
        writeln!(w, "wrote {}", path.display()).ok();
    }
    Ok(())
}

pub fn cmd_portrait(cmd: &PortraitCmd, degrees: bool, out_dir: &Option<PathBuf>, w: &mut dyn Write) -> Result<()> {
    let system = SystemId::parse(&cmd.system)?;
    if !system.is_planar() {
        return Err(Error::usage("portraits are drawn for s12 or s22"));
    }
    let grid = match &cmd.grid {
        Some(vals) => {
            expect_len(vals, 6, "--grid")?;
            let parse_f = |s: &str| -> Result<f64> {
                s.trim().parse().map_err(|e| Error::usage(format!("bad grid value '{s}': {e}")))
            };
            let parse_n = |s: &str| -> Result<usize> {
                s.trim().parse().map_err(|e| Error::usage(format!("bad grid count '{s}': {e}")))
            };
            PortraitGrid {
                resample: cmd.resample,
                ..PortraitGrid::new(
                    (angle(parse_f(&vals[0])?, degrees), angle(parse_f(&vals[1])?, degrees), parse_n(&vals[2])?),
                    (angle(parse_f(&vals[3])?, degrees), angle(parse_f(&vals[4])?, degrees), parse_n(&vals[5])?),
                )
            }
        }
        None => PortraitGrid {
            resample: cmd.resample,
            ..match system {
                SystemId::S12 => PortraitGrid::new((-1.2, 1.2, 7), (-3.0, 3.0, 7)),
                _ => PortraitGrid::new((-1.4, 1.4, 7), (-3.0, 3.0, 7)),
            }
        },
    };
    let cfg = IntegrationConfig {
        rtol: cmd.rtol,
        atol: cmd.atol,
        span: (-cmd.span, cmd.span),
        ..IntegrationConfig::default()
    };
    let portrait = analyze::phase_portrait(system, &grid, &cfg)?;
    writeln!(
        w,
        "portrait of {}: {} equilibria, {} trajectories",
        system.label(),
        portrait.equilibria.len(),
        portrait.trajectories.len()
    )
    .ok();
    for e in &portrait.equilibria {
        writeln!(
            w,
            "  equilibrium ({:.6}, {:.6}): {}{}",
            e.u,
            e.theta,
            e.linearization.classification.label(),
            if e.non_surface { " [non-surface]" } else { "" }
        )
        .ok();
    }
    if let Some(path) = &cmd.out {
        let path = resolve_path(path, out_dir);
        meshio::export_portrait_json(&portrait, &path)?;
        writeln!(w, "wrote {}", path.display()).ok();
    }
    Ok(())
}

/// Run a parsed configuration, writing human-readable output to `w`.
pub fn run(config: &RunConfig, w: &mut dyn Write) -> Result<()> {
    match &config.command {
        Command::Equilibria(cmd) => cmd_equilibria(cmd, config.degrees, &config.out_dir, w),
        Command::Soliton(cmd) => cmd_soliton(cmd, config.degrees, &config.out_dir, w),
        Command::Verify(cmd) => cmd_verify(cmd, config.degrees, &config.out_dir, w),
        Command::Portrait(cmd) => cmd_portrait(cmd, config.degrees, &config.out_dir, w),
    }
}
