//! Finite-difference verification of chart geometry.
//!
//! Everything here works from a point evaluator (s, w) -> R^4 alone: tangents
//! and normals come from central differences and the four-dimensional cross
//! product, the second fundamental form from differences of the normal, and
//! the mean curvature from the quotient formula. None of it consults the
//! closed forms, which is what makes the residual H - <N, X> an independent
//! check of the soliton property.
//!
//! Charts backed by integrated trajectories are evaluated through a local
//! single-step refinement anchored at the query parameter, so difference
//! stencils never straddle interpolation knots.

use serde::Serialize;

use crate::ambient::{cross4, dot4, inner, AmbientPoint, AmbientVector, KillingField, RotationFrame};
use crate::charts::{
    chart_point, closed_form_h, closed_form_normal, ChartKind, ChartSurface, CurveState,
    SurfaceChart,
};
use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::par;
use crate::systems::{self, SystemId};

/// Step and extrapolation policy for the difference stencils.
///
/// The default step balances O(h^2) truncation against the ~eps/h^2 rounding
/// amplification of nested differences; 1e-4 keeps both near 1e-8 for charts
/// with order-one derivatives.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub step: f64,
    /// One level of Richardson extrapolation (evaluates a second stencil at
    /// half the step).
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { step: 1e-4, richardson: false }
    }
}

const GRAM_FLOOR: f64 = 1e-14;

/// First and second fundamental forms measured by finite differences.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
    pub normal: AmbientVector,
    pub mean_curvature: f64,
    pub tangent_s: [f64; 4],
    pub tangent_w: [f64; 4],
}

impl FundamentalForms {
    /// Reverse the orientation: flips the normal, the second form and H.
    pub fn flip_orientation(&mut self) {
        for c in &mut self.normal.components {
            *c = -*c;
        }
        self.b11 = -self.b11;
        self.b12 = -self.b12;
        self.b22 = -self.b22;
        self.mean_curvature = -self.mean_curvature;
    }

    /// Align the orientation against a reference normal.
    pub fn orient_against(&mut self, reference: &AmbientVector) -> Result<()> {
        if inner(&self.normal, reference)? < 0.0 {
            self.flip_orientation();
        }
        Ok(())
    }
}

fn normalize4(v: [f64; 4]) -> Result<[f64; 4]> {
    let n2 = dot4(&v, &v);
    if n2 < GRAM_FLOOR {
        return Err(Error::regularity(format!(
            "degenerate tangent frame (gram determinant {n2:.3e})"
        )));
    }
    let n = n2.sqrt();
    Ok([v[0] / n, v[1] / n, v[2] / n, v[3] / n])
}

/// Unit normal at one point from the evaluator: orthogonal complement of
/// the two difference tangents and the sphere radial inside R^4.
fn fd_normal<F>(eval: &F, s: f64, w: f64, h: f64) -> Result<[f64; 4]>
where
    F: Fn(f64, f64) -> Result<AmbientPoint>,
{
    let p = eval(s, w)?;
    let ts = fd_tangent(eval, s, w, h, true)?;
    let tw = fd_tangent(eval, s, w, h, false)?;
    normalize4(cross4(&ts, &tw, &p.radial()))
}

fn fd_tangent<F>(eval: &F, s: f64, w: f64, h: f64, along_s: bool) -> Result<[f64; 4]>
where
    F: Fn(f64, f64) -> Result<AmbientPoint>,
{
    let (pp, pm) = if along_s {
        (eval(s + h, w)?, eval(s - h, w)?)
    } else {
        (eval(s, w + h)?, eval(s, w - h)?)
    };
    let a = pp.coords();
    let b = pm.coords();
    Ok(std::array::from_fn(|i| (a[i] - b[i]) / (2.0 * h)))
}

fn forms_single_step<F>(eval: &F, at: (f64, f64), h: f64) -> Result<FundamentalForms>
where
    F: Fn(f64, f64) -> Result<AmbientPoint>,
{
    let (s0, w0) = at;
    let center = eval(s0, w0)?;
    let ts = fd_tangent(eval, s0, w0, h, true)?;
    let tw = fd_tangent(eval, s0, w0, h, false)?;
    let n_raw = cross4(&ts, &tw, &center.radial());
    let n = normalize4(n_raw)?;

    // Normals at the four stencil neighbors, aligned with the center.
    let neighbor = |ds: f64, dw: f64| -> Result<[f64; 4]> {
        let mut v = fd_normal(eval, s0 + ds, w0 + dw, h)?;
        if dot4(&v, &n) < 0.0 {
            for c in &mut v {
                *c = -*c;
            }
        }
        Ok(v)
    };
    let n_sp = neighbor(h, 0.0)?;
    let n_sm = neighbor(-h, 0.0)?;
    let n_wp = neighbor(0.0, h)?;
    let n_wm = neighbor(0.0, -h)?;
    let n_s: [f64; 4] = std::array::from_fn(|i| (n_sp[i] - n_sm[i]) / (2.0 * h));
    let n_w: [f64; 4] = std::array::from_fn(|i| (n_wp[i] - n_wm[i]) / (2.0 * h));

    let g11 = dot4(&ts, &ts);
    let g12 = dot4(&ts, &tw);
    let g22 = dot4(&tw, &tw);
    let b11 = -dot4(&n_s, &ts);
    let b12 = -dot4(&n_s, &tw);
    let b22 = -dot4(&n_w, &tw);
    let den = g11 * g22 - g12 * g12;
    if den <= GRAM_FLOOR {
        return Err(Error::regularity(format!(
            "immersion degenerates at (s, w) = ({s0}, {w0}): g determinant {den:.3e}"
        )));
    }
    let mean_curvature = (g22 * b11 - 2.0 * g12 * b12 + g11 * b22) / den;
    Ok(FundamentalForms {
        g11,
        g12,
        g22,
        b11,
        b12,
        b22,
        normal: AmbientVector::new(center, n),
        mean_curvature,
        tangent_s: ts,
        tangent_w: tw,
    })
}

/// Fundamental forms of an arbitrary chart evaluator at a parameter point.
///
/// The evaluator must be smooth in a 2h-neighborhood of `at`. Orientation
/// follows the sign of the R^4 cross product of (Psi_s, Psi_w, radial); use
/// [`FundamentalForms::orient_against`] to match a convention.
pub fn fd_forms<F>(eval: F, at: (f64, f64), cfg: &FdConfig) -> Result<FundamentalForms>
where
    F: Fn(f64, f64) -> Result<AmbientPoint>,
{
    if !cfg.step.is_finite() || cfg.step <= 0.0 {
        return Err(Error::usage("finite-difference step must be positive"));
    }
    let coarse = forms_single_step(&eval, at, cfg.step)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = forms_single_step(&eval, at, cfg.step / 2.0)?;
    let rich = |c: f64, f: f64| (4.0 * f - c) / 3.0;
    let mut n: [f64; 4] = std::array::from_fn(|i| {
        rich(coarse.normal.components[i], fine.normal.components[i])
    });
    n = normalize4(n)?;
    Ok(FundamentalForms {
        g11: rich(coarse.g11, fine.g11),
        g12: rich(coarse.g12, fine.g12),
        g22: rich(coarse.g22, fine.g22),
        b11: rich(coarse.b11, fine.b11),
        b12: rich(coarse.b12, fine.b12),
        b22: rich(coarse.b22, fine.b22),
        normal: AmbientVector::new(fine.normal.base, n),
        mean_curvature: rich(coarse.mean_curvature, fine.mean_curvature),
        tangent_s: fine.tangent_s,
        tangent_w: fine.tangent_w,
    })
}

/// Both routes to the soliton defect at one parameter point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSample {
    pub s: f64,
    pub w: f64,
    /// Mean curvature from the closed forms.
    pub h_closed: f64,
    /// Mean curvature from the difference oracle.
    pub h_fd: f64,
    /// <N, X> with the difference normal.
    pub n_dot_x: f64,
    /// H - <N, X> along the independent route.
    pub residual_fd: f64,
    /// H - <N, X> along the closed-form route.
    pub residual_closed: f64,
}

/// Soliton residual H - <N, X> at (s, w), via both the closed forms and the
/// finite-difference oracle. The oracle normal is oriented against the
/// closed-form one so the two H values are comparable.
pub fn soliton_residual<C>(
    chart: &C,
    killing: &KillingField,
    at: (f64, f64),
    cfg: &FdConfig,
) -> Result<ResidualSample>
where
    C: ChartSurface + ?Sized,
{
    let (s, w) = at;
    let kind = chart.kind();
    let state = chart.state(s)?;
    let theta_prime = chart.theta_prime(s)?;
    let n_closed = closed_form_normal(kind, &state, w)?;
    let h_closed = closed_form_h(kind, &state, theta_prime)?;
    let x = killing.evaluate(&n_closed.base);
    let residual_closed = h_closed - inner(&n_closed, &x)?;

    let eval = |sq: f64, wq: f64| -> Result<AmbientPoint> {
        let (u, v) = chart.curve_near(s, sq - s)?;
        chart_point(kind, u, v, wq)
    };
    let mut forms = fd_forms(eval, at, cfg)?;
    forms.orient_against(&n_closed)?;
    let n_dot_x = inner(&forms.normal, &x)?;
    let residual_fd = forms.mean_curvature - n_dot_x;
    Ok(ResidualSample {
        s,
        w,
        h_closed,
        h_fd: forms.mean_curvature,
        n_dot_x,
        residual_fd,
        residual_closed,
    })
}

/// Residuals over a batch of sample points. Runs in parallel when the
/// `parallel` feature is on.
pub fn residual_scan<C>(
    chart: &C,
    killing: &KillingField,
    samples: &[(f64, f64)],
    cfg: &FdConfig,
) -> Result<Vec<ResidualSample>>
where
    C: ChartSurface + Sync,
{
    par::try_map_collect(samples, |&at| soliton_residual(chart, killing, at, cfg))
}

/// Largest absolute value of both residual routes over a scan.
pub fn residual_maxima(samples: &[ResidualSample]) -> (f64, f64) {
    samples.iter().fold((0.0f64, 0.0f64), |(fd, cl), r| {
        (fd.max(r.residual_fd.abs()), cl.max(r.residual_closed.abs()))
    })
}

/// Coefficients (A, B) of <N, R> = sin(theta) (A sin(phi) + B cos(phi)) for a
/// rotation field with the given frame, acting on a rotational chart.
pub fn nr_coefficients(frame: &RotationFrame) -> (f64, f64) {
    let a = frame.m1.sin() * frame.m2.cos() * frame.n2.sin()
        - frame.m1.cos() * frame.n1.sin() * frame.m2.sin();
    let b = frame.m1.sin() * frame.m2.cos() * frame.n2.cos()
        - frame.m1.cos() * frame.n1.cos() * frame.m2.sin();
    (a, b)
}

/// <N, R> for a rotational chart state against a general-axis rotation field,
/// in closed form. Depends on phi unless the frame axis is (0, 0, 1); that
/// dependence is what rules out rotational solitons for tilted axes.
pub fn general_axis_nr(state: &CurveState, phi: f64, frame: &RotationFrame) -> f64 {
    let (a, b) = nr_coefficients(frame);
    state.theta.sin() * (a * phi.sin() + b * phi.cos())
}

/// Sweep statistics of <N, R> over an n-point phi grid at one curve state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhiSweep {
    pub mean: f64,
    pub variance: f64,
    pub max_abs: f64,
    pub max_deviation: f64,
}

pub fn phi_sweep(state: &CurveState, frame: &RotationFrame, n: usize) -> PhiSweep {
    let vals: Vec<f64> = (0..n)
        .map(|i| general_axis_nr(state, 2.0 * std::f64::consts::PI * i as f64 / n as f64, frame))
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let variance = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_deviation = vals.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    PhiSweep { mean, variance, max_abs, max_deviation }
}

fn rk4_step(sys: SystemId, y: [f64; 3], h: f64) -> Result<[f64; 3]> {
    let k1 = systems::rhs3(sys, y)?;
    let mid1: [f64; 3] = std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]);
    let k2 = systems::rhs3(sys, mid1)?;
    let mid2: [f64; 3] = std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]);
    let k3 = systems::rhs3(sys, mid2)?;
    let end: [f64; 3] = std::array::from_fn(|i| y[i] + h * k3[i]);
    let k4 = systems::rhs3(sys, end)?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// A chart generated by an integrated trajectory of S11 or S21.
///
/// `curve_near` refines the curve with one classical Runge-Kutta step from
/// the dense state at the anchor parameter. A step of length |ds| <= 1e-2
/// carries a local error around |ds|^5, far below the difference-stencil
/// noise floor, and is an analytic function of ds, which keeps the stencils
/// smooth.
pub struct TrajectoryChart<'a> {
    trajectory: &'a Trajectory,
    kind: ChartKind,
}

impl<'a> TrajectoryChart<'a> {
    pub fn new(trajectory: &'a Trajectory) -> Result<Self> {
        let kind = trajectory.system.chart_kind().ok_or_else(|| {
            Error::usage(format!(
                "{} trajectories are planar projections and do not generate charts",
                trajectory.system.label()
            ))
        })?;
        Ok(TrajectoryChart { trajectory, kind })
    }

    fn full_state(&self, s: f64) -> Result<[f64; 3]> {
        let v = self.trajectory.eval(s)?;
        Ok([v[0], v[1], v[2]])
    }
}

impl ChartSurface for TrajectoryChart<'_> {
    fn kind(&self) -> ChartKind {
        self.kind
    }

    fn state(&self, s: f64) -> Result<CurveState> {
        let y = self.full_state(s)?;
        Ok(CurveState { s, u: y[0], v: y[1], theta: y[2] })
    }

    fn theta_prime(&self, s: f64) -> Result<f64> {
        let y = self.full_state(s)?;
        Ok(systems::rhs3(self.trajectory.system, y)?[2])
    }

    fn curve_near(&self, s0: f64, ds: f64) -> Result<(f64, f64)> {
        let anchor = self.full_state(s0)?;
        if ds == 0.0 {
            return Ok((anchor[0], anchor[1]));
        }
        if ds.abs() > 1e-2 {
            return Err(Error::usage(format!(
                "local refinement only supports |ds| <= 1e-2, got {ds}"
            )));
        }
        let y = rk4_step(self.trajectory.system, anchor, ds)?;
        Ok((y[0], y[1]))
    }

    fn s_range(&self) -> (f64, f64) {
        self.trajectory.s_range()
    }
}

/// A chart interpolated from tabulated curve states (for data loaded from
/// files). Between samples, u and v follow a cubic Hermite interpolant whose
/// slopes come from the chart parametrization; theta uses difference slopes.
/// `curve_near` extends the anchor interval's polynomial so stencils stay
/// smooth across knots.
pub struct SampledChart {
    chart: SurfaceChart,
    theta_slopes: Vec<f64>,
}

impl SampledChart {
    pub fn new(chart: SurfaceChart) -> Result<Self> {
        if chart.curve.len() < 2 {
            return Err(Error::usage("sampled chart needs at least two states"));
        }
        let c = &chart.curve;
        let n = c.len();
        let theta_slopes: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                (c[b].theta - c[a].theta) / (c[b].s - c[a].s)
            })
            .collect();
        Ok(SampledChart { chart, theta_slopes })
    }

    pub fn inner_chart(&self) -> &SurfaceChart {
        &self.chart
    }

    fn interval(&self, s: f64) -> usize {
        let c = &self.chart.curve;
        let idx = c.partition_point(|st| st.s <= s);
        idx.clamp(1, c.len() - 1) - 1
    }

    /// Slopes of (u, v) implied by the parametrization convention.
    fn uv_slopes(&self, st: &CurveState) -> (f64, f64) {
        let du = match self.chart.kind {
            ChartKind::Vertical => st.u.cos() * st.theta.cos(),
            ChartKind::Rotational => st.theta.cos(),
        };
        (du, st.theta.sin())
    }

    fn eval_interval(&self, i: usize, s: f64) -> (f64, f64, f64) {
        let c = &self.chart.curve;
        let (a, b) = (&c[i], &c[i + 1]);
        let dt = b.s - a.s;
        let t = (s - a.s) / dt;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let (dua, dva) = self.uv_slopes(a);
        let (dub, dvb) = self.uv_slopes(b);
        let u = h00 * a.u + h10 * dt * dua + h01 * b.u + h11 * dt * dub;
        let v = h00 * a.v + h10 * dt * dva + h01 * b.v + h11 * dt * dvb;
        let theta = h00 * a.theta + h10 * dt * self.theta_slopes[i] + h01 * b.theta
            + h11 * dt * self.theta_slopes[i + 1];
        (u, v, theta)
    }
}

impl ChartSurface for SampledChart {
    fn kind(&self) -> ChartKind {
        self.chart.kind
    }

    fn state(&self, s: f64) -> Result<CurveState> {
        let (u, v, theta) = self.eval_interval(self.interval(s), s);
        crate::charts::check_latitude(u)?;
        Ok(CurveState { s, u, v, theta })
    }

    fn theta_prime(&self, s: f64) -> Result<f64> {
        let i = self.interval(s);
        let c = &self.chart.curve;
        let t = (s - c[i].s) / (c[i + 1].s - c[i].s);
        Ok(self.theta_slopes[i] * (1.0 - t) + self.theta_slopes[i + 1] * t)
    }

    fn curve_near(&self, s0: f64, ds: f64) -> Result<(f64, f64)> {
        let i = self.interval(s0);
        let (u, v, _) = self.eval_interval(i, s0 + ds);
        crate::charts::check_latitude(u)?;
        Ok((u, v))
    }

    fn s_range(&self) -> (f64, f64) {
        self.chart.s_range()
    }
}
