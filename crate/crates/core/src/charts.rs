//! Invariant surface charts and their closed-form geometry.
//!
//! Two families of surfaces are handled: vertical surfaces, swept by
//! translating a spherical generating curve along the fibers, and rotational
//! surfaces, swept by rotating a profile curve about the z-axis of the sphere
//! factor. Generating curves are described by latitude u(s), a second
//! coordinate v(s) (longitude for vertical charts, fiber height for
//! rotational ones) and a direction angle theta(s) satisfying
//!
//! * vertical:   u' = cos u cos theta,  v' = sin theta
//! * rotational: u' = cos theta,        v' = sin theta
//!
//! theta is stored unwrapped; winding information matters downstream.

use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

use crate::ambient::{AmbientPoint, AmbientVector};
use crate::error::{Error, Result};

/// Chart regularity requires |u| < pi/2.
pub const LATITUDE_LIMIT: f64 = FRAC_PI_2;

/// Which invariant family a chart belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    /// Invariant under fiber translations; sweep parameter is t.
    Vertical,
    /// Invariant under z-axis rotations; sweep parameter is phi.
    Rotational,
}

impl ChartKind {
    pub fn label(&self) -> &'static str {
        match self {
            ChartKind::Vertical => "vertical",
            ChartKind::Rotational => "rotational",
        }
    }
}

/// One generating-curve state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveState {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub theta: f64,
}

/// A chart kind plus a sampled generating curve.
#[derive(Debug, Clone)]
pub struct SurfaceChart {
    pub kind: ChartKind,
    pub curve: Vec<CurveState>,
}

impl SurfaceChart {
    pub fn new(kind: ChartKind, curve: Vec<CurveState>) -> Result<Self> {
        if curve.is_empty() {
            return Err(Error::usage("surface chart needs at least one curve state"));
        }
        for w in curve.windows(2) {
            if w[1].s <= w[0].s {
                return Err(Error::usage(format!(
                    "curve parameter must be strictly increasing, got {} then {}",
                    w[0].s, w[1].s
                )));
            }
        }
        for st in &curve {
            check_latitude(st.u)?;
        }
        Ok(SurfaceChart { kind, curve })
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.curve[0].s, self.curve[self.curve.len() - 1].s)
    }
}

pub(crate) fn check_latitude(u: f64) -> Result<()> {
    if !u.is_finite() || u.abs() >= LATITUDE_LIMIT {
        return Err(Error::regularity(format!(
            "latitude u = {u} outside (-pi/2, pi/2)"
        )));
    }
    Ok(())
}

/// Embedding point of a chart. `w` is t for vertical charts and phi for
/// rotational ones.
pub fn chart_point(kind: ChartKind, u: f64, v: f64, w: f64) -> Result<AmbientPoint> {
    check_latitude(u)?;
    let (cu, su) = (u.cos(), u.sin());
    match kind {
        ChartKind::Vertical => AmbientPoint::new(cu * v.cos(), cu * v.sin(), su, w),
        ChartKind::Rotational => AmbientPoint::new(cu * w.cos(), cu * w.sin(), su, v),
    }
}

/// Closed-form unit normal of a chart at a curve state and sweep value.
pub fn closed_form_normal(kind: ChartKind, state: &CurveState, w: f64) -> Result<AmbientVector> {
    check_latitude(state.u)?;
    let (u, v, theta) = (state.u, state.v, state.theta);
    let (cu, su) = (u.cos(), u.sin());
    let (ct, st) = (theta.cos(), theta.sin());
    let base = chart_point(kind, u, v, w)?;
    let n = match kind {
        ChartKind::Vertical => {
            let (cv, sv) = (v.cos(), v.sin());
            [
                ct * sv - st * su * cv,
                -ct * cv - st * su * sv,
                st * cu,
                0.0,
            ]
        }
        ChartKind::Rotational => {
            let (cp, sp) = (w.cos(), w.sin());
            [st * su * cp, st * su * sp, -st * cu, ct]
        }
    };
    Ok(AmbientVector::new(base, n))
}

/// Closed-form mean curvature (sum of principal curvatures with respect to
/// `closed_form_normal`). `theta_prime` comes from the governing equation or
/// from numerical differentiation along the curve.
pub fn closed_form_h(kind: ChartKind, state: &CurveState, theta_prime: f64) -> Result<f64> {
    check_latitude(state.u)?;
    let (u, theta) = (state.u, state.theta);
    Ok(match kind {
        ChartKind::Vertical => u.tan() * theta.sin() - theta_prime / u.cos(),
        ChartKind::Rotational => theta_prime - theta.sin() * u.tan(),
    })
}

/// Anything that can be sampled as an invariant chart: exact curves,
/// integrated soliton profiles, or tabulated data. `curve_near` must be
/// smooth in `ds`; finite-difference consumers take stencils through it.
pub trait ChartSurface {
    fn kind(&self) -> ChartKind;
    fn state(&self, s: f64) -> Result<CurveState>;
    fn theta_prime(&self, s: f64) -> Result<f64>;
    /// (u, v) at s0 + ds. Implementations guarantee smoothness in ds near 0
    /// so that difference quotients through a fixed s0 are well conditioned.
    fn curve_near(&self, s0: f64, ds: f64) -> Result<(f64, f64)>;
    fn s_range(&self) -> (f64, f64);

    fn point(&self, s: f64, w: f64) -> Result<AmbientPoint> {
        let st = self.state(s)?;
        chart_point(self.kind(), st.u, st.v, w)
    }
}

fn gudermann(x: f64) -> f64 {
    x.sinh().atan()
}

fn gudermann_inv(u: f64) -> f64 {
    u.tan().asinh()
}

/// Generating curve with constant turning rate: theta(s) = theta0 + omega s.
///
/// Both chart conventions integrate in closed form for this family, so it
/// provides exact chart data at arbitrary parameters. omega = 0 yields
/// straight profile lines (slices, cylinders); omega != 0 yields circles in
/// the (u, v)-plane for rotational charts and loxodrome-like spherical
/// curves for vertical ones.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticCurve {
    pub kind: ChartKind,
    pub u0: f64,
    pub v0: f64,
    pub theta0: f64,
    pub omega: f64,
    s_min: f64,
    s_max: f64,
}

impl AnalyticCurve {
    pub fn new(
        kind: ChartKind,
        u0: f64,
        v0: f64,
        theta0: f64,
        omega: f64,
        s_range: (f64, f64),
    ) -> Result<Self> {
        check_latitude(u0)?;
        if s_range.1 <= s_range.0 {
            return Err(Error::usage("empty parameter range"));
        }
        Ok(AnalyticCurve {
            kind,
            u0,
            v0,
            theta0,
            omega,
            s_min: s_range.0,
            s_max: s_range.1,
        })
    }

    fn raw_state(&self, s: f64) -> (f64, f64, f64) {
        let theta = self.theta0 + self.omega * s;
        // Antiderivatives of cos theta(s) and sin theta(s).
        let (int_cos, int_sin) = if self.omega == 0.0 {
            (self.theta0.cos() * s, self.theta0.sin() * s)
        } else {
            (
                (theta.sin() - self.theta0.sin()) / self.omega,
                -(theta.cos() - self.theta0.cos()) / self.omega,
            )
        };
        match self.kind {
            ChartKind::Rotational => (self.u0 + int_cos, self.v0 + int_sin, theta),
            ChartKind::Vertical => {
                let w = gudermann_inv(self.u0) + int_cos;
                (gudermann(w), self.v0 + int_sin, theta)
            }
        }
    }

    pub fn sample_chart(&self, samples: usize) -> Result<SurfaceChart> {
        if samples < 2 {
            return Err(Error::usage("need at least two samples"));
        }
        let mut curve = Vec::with_capacity(samples);
        for i in 0..samples {
            let s = self.s_min + (self.s_max - self.s_min) * i as f64 / (samples - 1) as f64;
            curve.push(self.state(s)?);
        }
        SurfaceChart::new(self.kind, curve)
    }
}

impl ChartSurface for AnalyticCurve {
    fn kind(&self) -> ChartKind {
        self.kind
    }

    fn state(&self, s: f64) -> Result<CurveState> {
        let (u, v, theta) = self.raw_state(s);
        check_latitude(u)?;
        Ok(CurveState { s, u, v, theta })
    }

    fn theta_prime(&self, _s: f64) -> Result<f64> {
        Ok(self.omega)
    }

    fn curve_near(&self, s0: f64, ds: f64) -> Result<(f64, f64)> {
        let (u, v, _) = self.raw_state(s0 + ds);
        check_latitude(u)?;
        Ok((u, v))
    }

    fn s_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }
}

/// Surfaces whose soliton property holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution {
    /// The totally geodesic sphere at fiber height t0, as a rotational chart
    /// with curve (u, v, theta)(s) = (s, t0, 0).
    Slice { t0: f64 },
    /// The cylinder over the equator as a rotational chart,
    /// (u, v, theta)(s) = (0, s, pi/2).
    CylinderC,
    /// The same cylinder as a vertical chart over the equatorial geodesic,
    /// generating curve (cos s, sin s, 0).
    GeodesicCylinder,
}

impl ExactSolution {
    pub fn analytic(&self) -> AnalyticCurve {
        match self {
            ExactSolution::Slice { t0 } => AnalyticCurve::new(
                ChartKind::Rotational,
                0.0,
                *t0,
                0.0,
                0.0,
                (-1.45, 1.45),
            )
            .expect("slice curve is valid"),
            ExactSolution::CylinderC => AnalyticCurve::new(
                ChartKind::Rotational,
                0.0,
                0.0,
                FRAC_PI_2,
                0.0,
                (-20.0, 20.0),
            )
            .expect("cylinder curve is valid"),
            ExactSolution::GeodesicCylinder => AnalyticCurve::new(
                ChartKind::Vertical,
                0.0,
                0.0,
                FRAC_PI_2,
                0.0,
                (-20.0, 20.0),
            )
            .expect("geodesic cylinder curve is valid"),
        }
    }

    pub fn chart(&self, samples: usize) -> Result<SurfaceChart> {
        self.analytic().sample_chart(samples)
    }

    pub fn parse(name: &str, t0: f64) -> Result<Self> {
        match name {
            "slice" => Ok(ExactSolution::Slice { t0 }),
            "cylinder-c" => Ok(ExactSolution::CylinderC),
            "geodesic-cylinder" => Ok(ExactSolution::GeodesicCylinder),
            other => Err(Error::usage(format!(
                "unknown exact solution '{other}' (expected slice, cylinder-c or geodesic-cylinder)"
            ))),
        }
    }
}
