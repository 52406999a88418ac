//! The four autonomous systems governing invariant solitons.
//!
//! * S11: rotational surfaces whose normal tracks the fiber field,
//!   u' = cos theta, v' = sin theta, theta' = sin theta tan u + cos theta.
//! * S12: the (u, theta) projection of S11.
//! * S21: vertical surfaces whose normal tracks the z-axis rotation field,
//!   u' = cos u cos theta, v' = sin theta,
//!   theta' = sin theta sin u + cos^2 u cos theta.
//! * S22: the (u, theta) projection of S21.
//!
//! S11/S12 are singular at |u| = pi/2 (tan u); S21/S22 extend smoothly to the
//! whole (u, theta)-plane, although only |u| < pi/2 describes surfaces.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::charts::ChartKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    S11,
    S12,
    S21,
    S22,
}

impl SystemId {
    pub fn dimension(&self) -> usize {
        match self {
            SystemId::S11 | SystemId::S21 => 3,
            SystemId::S12 | SystemId::S22 => 2,
        }
    }

    pub fn is_planar(&self) -> bool {
        self.dimension() == 2
    }

    /// The planar system obtained by dropping v.
    pub fn planar(&self) -> SystemId {
        match self {
            SystemId::S11 | SystemId::S12 => SystemId::S12,
            SystemId::S21 | SystemId::S22 => SystemId::S22,
        }
    }

    /// Chart family generated by the full system's solutions.
    pub fn chart_kind(&self) -> Option<ChartKind> {
        match self {
            SystemId::S11 => Some(ChartKind::Rotational),
            SystemId::S21 => Some(ChartKind::Vertical),
            _ => None,
        }
    }

    /// Index of theta within the state vector.
    pub fn theta_index(&self) -> usize {
        self.dimension() - 1
    }

    /// Whether the right-hand side blows up at |u| = pi/2.
    pub fn singular_at_poles(&self) -> bool {
        matches!(self, SystemId::S11 | SystemId::S12)
    }

    pub fn label(&self) -> &'static str {
        match self {
            SystemId::S11 => "s11",
            SystemId::S12 => "s12",
            SystemId::S21 => "s21",
            SystemId::S22 => "s22",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "s11" => Ok(SystemId::S11),
            "s12" => Ok(SystemId::S12),
            "s21" => Ok(SystemId::S21),
            "s22" => Ok(SystemId::S22),
            other => Err(Error::usage(format!("unknown system '{other}'"))),
        }
    }
}

fn check_pole(sys: SystemId, u: f64) -> Result<()> {
    if sys.singular_at_poles() && u.abs() >= FRAC_PI_2 {
        return Err(Error::regularity(format!(
            "{} is singular at |u| >= pi/2 (u = {u})",
            sys.label()
        )));
    }
    if !u.is_finite() {
        return Err(Error::regularity(format!("non-finite latitude u = {u}")));
    }
    Ok(())
}

/// Right-hand side, written into `out`. State layout is (u, v, theta) for the
/// three-dimensional systems and (u, theta) for the planar ones.
pub fn rhs(sys: SystemId, state: &[f64], out: &mut [f64]) -> Result<()> {
    let dim = sys.dimension();
    if state.len() != dim || out.len() != dim {
        return Err(Error::usage(format!(
            "{} expects state dimension {dim}",
            sys.label()
        )));
    }
    let u = state[0];
    let theta = state[sys.theta_index()];
    check_pole(sys, u)?;
    let (ct, st) = (theta.cos(), theta.sin());
    match sys {
        SystemId::S11 => {
            out[0] = ct;
            out[1] = st;
            out[2] = st * u.tan() + ct;
        }
        SystemId::S12 => {
            out[0] = ct;
            out[1] = st * u.tan() + ct;
        }
        SystemId::S21 => {
            let cu = u.cos();
            out[0] = cu * ct;
            out[1] = st;
            out[2] = st * u.sin() + cu * cu * ct;
        }
        SystemId::S22 => {
            let cu = u.cos();
            out[0] = cu * ct;
            out[1] = st * u.sin() + cu * cu * ct;
        }
    }
    Ok(())
}

pub fn rhs2(sys: SystemId, state: [f64; 2]) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    rhs(sys, &state, &mut out)?;
    Ok(out)
}

pub fn rhs3(sys: SystemId, state: [f64; 3]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    rhs(sys, &state, &mut out)?;
    Ok(out)
}

/// Eigenvalue of a real 2x2 matrix, stored as re/im.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    StableSpiral,
    UnstableSpiral,
    Saddle,
    /// Real part below threshold or otherwise outside the spiral/saddle
    /// taxonomy; left unclassified rather than guessed.
    Degenerate,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::StableSpiral => "stable-spiral",
            Classification::UnstableSpiral => "unstable-spiral",
            Classification::Saddle => "saddle",
            Classification::Degenerate => "degenerate",
        }
    }
}

const DEGENERATE_RE: f64 = 1e-10;

/// Linearized system at a point of the phase plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Linearization {
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [Eigenvalue; 2],
    pub classification: Classification,
}

/// Analytic Jacobian of a planar system.
pub fn jacobian(sys: SystemId, point: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let (u, theta) = (point[0], point[1]);
    let (ct, st) = (theta.cos(), theta.sin());
    let j = match sys {
        SystemId::S12 => {
            check_pole(sys, u)?;
            let sec2 = 1.0 / (u.cos() * u.cos());
            [[0.0, -st], [st * sec2, ct * u.tan() - st]]
        }
        SystemId::S22 => {
            let (cu, su) = (u.cos(), u.sin());
            [
                [-su * ct, -cu * st],
                [st * cu - 2.0 * su * cu * ct, ct * su - cu * cu * st],
            ]
        }
        other => {
            return Err(Error::usage(format!(
                "jacobian is defined for planar systems, got {}",
                other.label()
            )))
        }
    };
    Ok(j)
}

fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Eigenvalue; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        let im = (-disc).sqrt() / 2.0;
        [
            Eigenvalue { re: tr / 2.0, im },
            Eigenvalue { re: tr / 2.0, im: -im },
        ]
    } else {
        let r = disc.sqrt();
        [
            Eigenvalue { re: (tr + r) / 2.0, im: 0.0 },
            Eigenvalue { re: (tr - r) / 2.0, im: 0.0 },
        ]
    }
}

fn classify(eigs: &[Eigenvalue; 2]) -> Classification {
    if eigs[0].im != 0.0 {
        if eigs[0].re < -DEGENERATE_RE {
            Classification::StableSpiral
        } else if eigs[0].re > DEGENERATE_RE {
            Classification::UnstableSpiral
        } else {
            Classification::Degenerate
        }
    } else if eigs[0].re > DEGENERATE_RE && eigs[1].re < -DEGENERATE_RE {
        Classification::Saddle
    } else {
        Classification::Degenerate
    }
}

/// Jacobian, eigenvalues and classification at a point.
pub fn linearize(sys: SystemId, point: [f64; 2]) -> Result<Linearization> {
    let matrix = jacobian(sys, point)?;
    for row in &matrix {
        for e in row {
            if !e.is_finite() {
                return Err(Error::regularity(format!(
                    "jacobian not finite at ({}, {})",
                    point[0], point[1]
                )));
            }
        }
    }
    let eigenvalues = eigenvalues_2x2(&matrix);
    Ok(Linearization {
        matrix,
        eigenvalues,
        classification: classify(&eigenvalues),
    })
}

/// Rectangular window of the (u, theta)-plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Window {
    pub u_min: f64,
    pub u_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Window {
    pub fn new(u_min: f64, u_max: f64, theta_min: f64, theta_max: f64) -> Result<Self> {
        if u_min > u_max || theta_min > theta_max {
            return Err(Error::usage("window bounds are reversed"));
        }
        Ok(Window { u_min, u_max, theta_min, theta_max })
    }

    fn contains(&self, u: f64, theta: f64) -> bool {
        let eps = 1e-12;
        u >= self.u_min - eps
            && u <= self.u_max + eps
            && theta >= self.theta_min - eps
            && theta <= self.theta_max + eps
    }
}

/// An equilibrium point of a planar system with its linearization attached.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Equilibrium {
    pub u: f64,
    pub theta: f64,
    pub linearization: Linearization,
    /// Set when |u| = pi/2: the phase point is a genuine equilibrium but the
    /// corresponding map degenerates and describes no surface.
    pub non_surface: bool,
}

/// All equilibria of S12 or S22 inside a window, from the closed-form zero
/// sets. S12 admits (0, pi/2 + k pi). S22 additionally has (+-pi/2, k pi).
pub fn equilibria(sys: SystemId, window: Window) -> Result<Vec<Equilibrium>> {
    let u_bound = match sys {
        SystemId::S12 => FRAC_PI_2,
        SystemId::S22 => PI,
        other => {
            return Err(Error::usage(format!(
                "equilibria enumeration works on planar systems, got {}",
                other.label()
            )))
        }
    };
    if window.u_min < -u_bound - 1e-12 || window.u_max > u_bound + 1e-12 {
        return Err(Error::usage(format!(
            "window exceeds the analysis domain |u| <= {u_bound} of {}",
            sys.label()
        )));
    }

    let mut found = Vec::new();
    let mut push = |u: f64, theta: f64, non_surface: bool| -> Result<()> {
        if window.contains(u, theta) {
            found.push(Equilibrium {
                u,
                theta,
                linearization: linearize(sys, [u, theta])?,
                non_surface,
            });
        }
        Ok(())
    };

    // Family on the axis u = 0, theta = pi/2 + k pi.
    let k_lo = ((window.theta_min - FRAC_PI_2) / PI).floor() as i64 - 1;
    let k_hi = ((window.theta_max - FRAC_PI_2) / PI).ceil() as i64 + 1;
    for k in k_lo..=k_hi {
        push(0.0, FRAC_PI_2 + k as f64 * PI, false)?;
    }

    // S22 only: poles u = +-pi/2 with theta = k pi; regularity is lost there.
    if sys == SystemId::S22 {
        let k_lo = (window.theta_min / PI).floor() as i64 - 1;
        let k_hi = (window.theta_max / PI).ceil() as i64 + 1;
        for u in [FRAC_PI_2, -FRAC_PI_2] {
            for k in k_lo..=k_hi {
                push(u, k as f64 * PI, true)?;
            }
        }
    }

    found.sort_by(|a, b| {
        (a.u, a.theta)
            .partial_cmp(&(b.u, b.theta))
            .expect("finite coordinates")
    });
    Ok(found)
}

/// The equilibrium of the planar projection closest to (u, theta), used for
/// convergence detection during integration.
pub fn nearest_equilibrium(sys: SystemId, u: f64, theta: f64) -> (f64, f64) {
    let planar = sys.planar();
    let mut best = (0.0, FRAC_PI_2);
    let mut best_d2 = f64::INFINITY;
    let mut consider = |eu: f64, et: f64| {
        let d2 = (u - eu) * (u - eu) + (theta - et) * (theta - et);
        if d2 < best_d2 {
            best_d2 = d2;
            best = (eu, et);
        }
    };
    let k = ((theta - FRAC_PI_2) / PI).round();
    for dk in [-1.0, 0.0, 1.0] {
        consider(0.0, FRAC_PI_2 + (k + dk) * PI);
    }
    if planar == SystemId::S22 {
        let k = (theta / PI).round();
        for dk in [-1.0, 0.0, 1.0] {
            for eu in [FRAC_PI_2, -FRAC_PI_2] {
                consider(eu, (k + dk) * PI);
            }
        }
    }
    best
}
