//! Post-hoc geometry of computed trajectories: self-intersections of the
//! profile curve, asymptotics toward the cylinder over the equator,
//! bi-graph and symmetry checks, and whole-phase-plane portraits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{detect_events, integrate, EventFn, IntegrationConfig, TerminationReason, Trajectory};
use crate::par;
use crate::systems::{self, Equilibrium, SystemId, Window};

/// A refined crossing of the profile curve with itself.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntersectionRecord {
    pub s_a: f64,
    pub s_b: f64,
    pub point: [f64; 2],
    /// |beta(s_a) - beta(s_b)| after refinement.
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfIntersectionReport {
    /// The curve collapses onto the v-axis (u identically zero); crossings
    /// are meaningless there.
    pub degenerate: bool,
    pub count: usize,
    pub records: Vec<IntersectionRecord>,
}

/// Parametric intersection of two segments, interior on both.
fn segment_crossing(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> Option<(f64, f64)> {
    let d1 = [a2[0] - a1[0], a2[1] - a1[1]];
    let d2 = [b2[0] - b1[0], b2[1] - b1[1]];
    let denom = d1[0] * d2[1] - d1[1] * d2[0];
    if denom == 0.0 {
        return None;
    }
    let r = [b1[0] - a1[0], b1[1] - a1[1]];
    let t = (r[0] * d2[1] - r[1] * d2[0]) / denom;
    let u = (r[0] * d1[1] - r[1] * d1[0]) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

const INTERSECTION_SEPARATION: f64 = 1e-8;
const INTERSECTION_MIN_GAP: f64 = 1e-3;
const DEGENERATE_U: f64 = 1e-12;

/// All transversal self-crossings of the (u, v) profile of a full (3d)
/// trajectory. Candidates come from an O(n^2) polyline sweep; each one is
/// refined on the dense output with Newton steps that use the exact curve
/// velocity (cos theta-type expressions) as the Jacobian.
pub fn find_self_intersections(traj: &Trajectory) -> Result<SelfIntersectionReport> {
    if traj.dim() != 3 {
        return Err(Error::usage(
            "self-intersections are defined for the (u, v) profile of a 3d trajectory",
        ));
    }
    let pts: Vec<[f64; 2]> = (0..traj.len())
        .map(|i| {
            let st = traj.state(i);
            [st[0], st[1]]
        })
        .collect();
    let max_u = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()));
    if max_u < DEGENERATE_U {
        return Ok(SelfIntersectionReport { degenerate: true, count: 0, records: Vec::new() });
    }

    let s = traj.s_values();
    let n = pts.len();
    // Parallel sweep over the first segment index.
    let idx: Vec<usize> = (0..n.saturating_sub(1)).collect();
    let hits: Vec<Vec<(f64, f64)>> = par::map_collect(&idx, |&i| {
        let mut local = Vec::new();
        let (a1, a2) = (pts[i], pts[i + 1]);
        let (alo, ahi) = (
            [a1[0].min(a2[0]), a1[1].min(a2[1])],
            [a1[0].max(a2[0]), a1[1].max(a2[1])],
        );
        for j in (i + 2)..n - 1 {
            let (b1, b2) = (pts[j], pts[j + 1]);
            if b1[0].min(b2[0]) > ahi[0]
                || b1[0].max(b2[0]) < alo[0]
                || b1[1].min(b2[1]) > ahi[1]
                || b1[1].max(b2[1]) < alo[1]
            {
                continue;
            }
            if let Some((t, u)) = segment_crossing(a1, a2, b1, b2) {
                let sa = s[i] + t * (s[i + 1] - s[i]);
                let sb = s[j] + u * (s[j + 1] - s[j]);
                local.push((sa, sb));
            }
        }
        local
    });

    let mut records = Vec::new();
    for (sa0, sb0) in hits.into_iter().flatten() {
        if let Some(rec) = refine_intersection(traj, sa0, sb0) {
            records.push(rec);
        }
    }
    records.sort_by(|a, b| (a.s_a, a.s_b).partial_cmp(&(b.s_a, b.s_b)).expect("finite"));
    records.dedup_by(|a, b| (a.s_a - b.s_a).abs() < 1e-6 && (a.s_b - b.s_b).abs() < 1e-6);
    Ok(SelfIntersectionReport { degenerate: false, count: records.len(), records })
}

fn refine_intersection(traj: &Trajectory, mut sa: f64, mut sb: f64) -> Option<IntersectionRecord> {
    let (lo, hi) = traj.s_range();
    let beta = |s: f64| -> Option<[f64; 2]> {
        let st = traj.eval(s).ok()?;
        Some([st[0], st[1]])
    };
    let velocity = |s: f64| -> Option<[f64; 2]> {
        let st = traj.eval(s).ok()?;
        let d = systems::rhs3(traj.system, [st[0], st[1], st[2]]).ok()?;
        Some([d[0], d[1]])
    };
    for _ in 0..60 {
        let pa = beta(sa)?;
        let pb = beta(sb)?;
        let f = [pa[0] - pb[0], pa[1] - pb[1]];
        let res = (f[0] * f[0] + f[1] * f[1]).sqrt();
        if res < 1e-11 {
            break;
        }
        let va = velocity(sa)?;
        let vb = velocity(sb)?;
        // Solve [va | -vb] d = -f.
        let det = va[0] * (-vb[1]) - (-vb[0]) * va[1];
        if det.abs() < 1e-18 {
            return None;
        }
        let da = (-f[0] * (-vb[1]) - (-vb[0]) * (-f[1])) / det;
        let db = (va[0] * (-f[1]) - (-f[0]) * va[1]) / det;
        sa = (sa + da).clamp(lo, hi);
        sb = (sb + db).clamp(lo, hi);
    }
    let pa = beta(sa)?;
    let pb = beta(sb)?;
    let separation = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
    if separation < INTERSECTION_SEPARATION && (sa - sb).abs() > INTERSECTION_MIN_GAP {
        Some(IntersectionRecord {
            s_a: sa.min(sb),
            s_b: sa.max(sb),
            point: [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0],
            separation,
        })
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    True,
    False,
    /// Not enough data to distinguish (short, unconverged trajectory).
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoteReport {
    pub verdict: Verdict,
    /// max |u| over the trailing tenth of the samples.
    pub last_decile_max_u: f64,
    /// Whether |v| keeps growing monotonically beyond its early range
    /// (only for 3d trajectories).
    pub v_unbounded: Option<bool>,
}

const ASYMPTOTE_U_TOL: f64 = 1e-4;
const ASYMPTOTE_MIN_SPAN: f64 = 40.0;

/// Does the trajectory settle onto the axis u = 0, i.e. is the surface
/// asymptotic to the cylinder over the equator? The limit statement is
/// operationalized on the trailing tenth of the parameter span of each
/// outgoing end (forward always, backward when the span extends below 0).
pub fn asymptote_check(traj: &Trajectory) -> AsymptoteReport {
    let n = traj.len();
    if n < 20 {
        return AsymptoteReport {
            verdict: Verdict::Inconclusive,
            last_decile_max_u: f64::NAN,
            v_unbounded: None,
        };
    }
    let (lo, hi) = traj.s_range();
    let span = hi - lo;
    let decile = span / 10.0;
    let grid = 64;
    let mut ends: Vec<(f64, f64)> = vec![(hi - decile, hi)];
    if lo < -1e-9 {
        ends.push((lo, lo + decile));
    }

    let mut tail_max_u = 0.0f64;
    let mut v_monotone = true;
    for &(a, b) in &ends {
        let mut prev_abs_v: Option<f64> = None;
        for i in 0..=grid {
            // Walk outward: from the inner edge of the decile to the end.
            let q = i as f64 / grid as f64;
            let s = if a == lo { b - (b - a) * q } else { a + (b - a) * q };
            let Ok(st) = traj.eval(s) else { continue };
            tail_max_u = tail_max_u.max(st[0].abs());
            if traj.dim() == 3 {
                let av = st[1].abs();
                if let Some(p) = prev_abs_v {
                    if av < p {
                        v_monotone = false;
                    }
                }
                prev_abs_v = Some(av);
            }
        }
    }

    let v_unbounded = (traj.dim() == 3).then(|| {
        // Reference |v| range near the span interior.
        let c = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { (lo + hi) / 2.0 };
        let half = span / 20.0;
        let mut inner_max = 0.0f64;
        for i in 0..=grid {
            let s = (c - half + span / 10.0 * i as f64 / grid as f64).clamp(lo, hi);
            if let Ok(st) = traj.eval(s) {
                inner_max = inner_max.max(st[1].abs());
            }
        }
        let mut end_abs_v = f64::INFINITY;
        for &(a, b) in &ends {
            let s = if a == lo { lo } else { b };
            if let Ok(st) = traj.eval(s) {
                end_abs_v = end_abs_v.min(st[1].abs());
            }
        }
        v_monotone && end_abs_v > inner_max
    });

    let converged = matches!(traj.termination, TerminationReason::ConvergedToEquilibrium { .. })
        || matches!(
            traj.termination_backward,
            Some(TerminationReason::ConvergedToEquilibrium { .. })
        );
    let verdict = if tail_max_u >= ASYMPTOTE_U_TOL {
        Verdict::False
    } else if converged || span >= ASYMPTOTE_MIN_SPAN {
        Verdict::True
    } else {
        Verdict::Inconclusive
    };
    AsymptoteReport { verdict, last_decile_max_u: tail_max_u, v_unbounded }
}

/// Largest deviation from the reflection symmetry
/// (u, v, theta)(-s) = (-u, v, -theta)(s) over a matched grid.
pub fn symmetry_defect(traj: &Trajectory, grid: usize) -> Result<Option<f64>> {
    if traj.dim() != 3 {
        return Ok(None);
    }
    let (lo, hi) = traj.s_range();
    let reach = (-lo).min(hi);
    if reach <= 0.0 {
        return Ok(None);
    }
    let mut worst = 0.0f64;
    for i in 1..=grid {
        let s = reach * i as f64 / grid as f64;
        let plus = traj.eval(s)?;
        let minus = traj.eval(-s)?;
        worst = worst
            .max((minus[0] + plus[0]).abs())
            .max((minus[1] - plus[1]).abs())
            .max((minus[2] + plus[2]).abs());
    }
    Ok(Some(worst))
}

/// v' never vanishes away from s = 0: sin theta keeps the sign of s.
pub fn v_monotone_per_branch(traj: &Trajectory) -> Option<bool> {
    if traj.dim() != 3 {
        return None;
    }
    let mut ok = true;
    for i in 0..traj.len() {
        let s = traj.s_values()[i];
        if s.abs() < 1e-3 {
            continue;
        }
        let vp = traj.state(i)[2].sin();
        if vp * s.signum() <= 0.0 {
            ok = false;
        }
    }
    Some(ok)
}

/// Full analysis bundle for a soliton trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct CurveAnalysis {
    pub symmetry_defect: Option<f64>,
    pub u_axis_crossings: usize,
    /// Roots of sin theta strictly inside the span (candidate critical
    /// points of v).
    pub v_critical_interior: usize,
    /// v'' at s = 0 computed from the governing equation, when s = 0 is
    /// inside the span.
    pub v_second_derivative_at_zero: Option<f64>,
    pub v_monotone_per_branch: Option<bool>,
    pub self_intersections: SelfIntersectionReport,
    pub asymptote: AsymptoteReport,
}

pub fn analyze_trajectory(traj: &Trajectory) -> Result<CurveAnalysis> {
    let scans = detect_events(traj, &[EventFn::u_axis(), EventFn::v_critical()]);
    let u_axis_crossings = if scans[0].degenerate { 0 } else { scans[0].roots.len() };
    let v_critical_interior = if scans[1].degenerate {
        0
    } else {
        scans[1].roots.iter().filter(|r| r.s.abs() > 1e-6).count()
    };

    let (lo, hi) = traj.s_range();
    let v_second_derivative_at_zero = if traj.dim() == 3 && lo <= 0.0 && hi >= 0.0 {
        let st = traj.eval(0.0)?;
        let d = systems::rhs3(traj.system, [st[0], st[1], st[2]])?;
        Some(d[2] * st[2].cos())
    } else {
        None
    };

    let self_intersections = if traj.dim() == 3 {
        find_self_intersections(traj)?
    } else {
        SelfIntersectionReport { degenerate: false, count: 0, records: Vec::new() }
    };

    Ok(CurveAnalysis {
        symmetry_defect: symmetry_defect(traj, 200)?,
        u_axis_crossings,
        v_critical_interior,
        v_second_derivative_at_zero,
        v_monotone_per_branch: v_monotone_per_branch(traj),
        self_intersections,
        asymptote: asymptote_check(traj),
    })
}

/// Seed lattice and output resolution for a phase portrait.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PortraitGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub nu: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub ntheta: usize,
    /// Output sampling step along each trajectory.
    pub resample: f64,
}

impl PortraitGrid {
    pub fn new(u: (f64, f64, usize), theta: (f64, f64, usize)) -> Self {
        PortraitGrid {
            u_min: u.0,
            u_max: u.1,
            nu: u.2,
            theta_min: theta.0,
            theta_max: theta.1,
            ntheta: theta.2,
            resample: 0.1,
        }
    }

    pub fn seeds(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.nu * self.ntheta);
        let pick = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 { (lo + hi) / 2.0 } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }
        };
        for i in 0..self.nu {
            for j in 0..self.ntheta {
                out.push([
                    pick(self.u_min, self.u_max, self.nu, i),
                    pick(self.theta_min, self.theta_max, self.ntheta, j),
                ]);
            }
        }
        out
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.u_min, self.u_max, self.theta_min, self.theta_max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PortraitTrajectory {
    pub seed: [f64; 2],
    /// Rows of [s, u, theta].
    pub samples: Vec<[f64; 3]>,
    pub termination: TerminationReason,
    pub termination_backward: Option<TerminationReason>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhasePortrait {
    pub system: SystemId,
    pub equilibria: Vec<Equilibrium>,
    pub trajectories: Vec<PortraitTrajectory>,
}

/// Forward and backward runs from every grid seed, plus the classified
/// equilibria of the window. Runs in parallel over seeds.
pub fn phase_portrait(
    system: SystemId,
    grid: &PortraitGrid,
    cfg: &IntegrationConfig,
) -> Result<PhasePortrait> {
    if !system.is_planar() {
        return Err(Error::usage("phase portraits are drawn for the planar systems"));
    }
    if !grid.resample.is_finite() || grid.resample <= 0.0 {
        return Err(Error::usage("portrait resample step must be positive"));
    }
    let equilibria = systems::equilibria(system, grid.window()?)?;
    let seeds = grid.seeds();
    let trajectories = par::try_map_collect(&seeds, |&seed| {
        let traj = integrate(system, &seed, cfg)?;
        let (lo, hi) = traj.s_range();
        let mut samples = Vec::new();
        let steps = ((hi - lo) / grid.resample).ceil() as usize;
        for i in 0..=steps {
            let s = (lo + grid.resample * i as f64).min(hi);
            let st = traj.eval(s)?;
            samples.push([s, st[0], st[1]]);
            if s >= hi {
                break;
            }
        }
        Ok(PortraitTrajectory {
            seed,
            samples,
            termination: traj.termination.clone(),
            termination_backward: traj.termination_backward.clone(),
        })
    })?;
    Ok(PhasePortrait { system, equilibria, trajectories })
}

impl PhasePortrait {
    /// Transversal crossings between distinct trajectory polylines. By
    /// uniqueness of solutions the count must be zero up to sampling
    /// resolution; near-parallel chord artifacts are filtered by the angle
    /// and endpoint-distance thresholds.
    pub fn crossing_defects(&self, min_angle: f64, min_depth: f64) -> usize {
        let polys: Vec<&PortraitTrajectory> = self.trajectories.iter().collect();
        let mut defects = 0;
        for a in 0..polys.len() {
            for b in a + 1..polys.len() {
                defects += polyline_crossings(&polys[a].samples, &polys[b].samples, min_angle, min_depth);
            }
        }
        defects
    }
}

fn polyline_crossings(pa: &[[f64; 3]], pb: &[[f64; 3]], min_angle: f64, min_depth: f64) -> usize {
    let mut count = 0;
    for i in 0..pa.len().saturating_sub(1) {
        let a1 = [pa[i][1], pa[i][2]];
        let a2 = [pa[i + 1][1], pa[i + 1][2]];
        for j in 0..pb.len().saturating_sub(1) {
            let b1 = [pb[j][1], pb[j][2]];
            let b2 = [pb[j + 1][1], pb[j + 1][2]];
            if b1[0].min(b2[0]) > a1[0].max(a2[0])
                || b1[0].max(b2[0]) < a1[0].min(a2[0])
                || b1[1].min(b2[1]) > a1[1].max(a2[1])
                || b1[1].max(b2[1]) < a1[1].min(a2[1])
            {
                continue;
            }
            if let Some((t, u)) = segment_crossing(a1, a2, b1, b2) {
                let da = [a2[0] - a1[0], a2[1] - a1[1]];
                let db = [b2[0] - b1[0], b2[1] - b1[1]];
                let cross = (da[0] * db[1] - da[1] * db[0]).abs();
                let na = (da[0] * da[0] + da[1] * da[1]).sqrt();
                let nb = (db[0] * db[0] + db[1] * db[1]).sqrt();
                if na == 0.0 || nb == 0.0 {
                    continue;
                }
                let angle = (cross / (na * nb)).asin();
                let x = [a1[0] + t * da[0], a1[1] + t * da[1]];
                let depth = [a1, a2, b1, b2]
                    .iter()
                    .map(|p| ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                let _ = u;
                if angle > min_angle && depth > min_depth {
                    count += 1;
                }
            }
        }
    }
    count
}
