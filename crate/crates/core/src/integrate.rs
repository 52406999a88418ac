//! Adaptive integration of the soliton systems.
//!
//! The stepper is an embedded Dormand-Prince 5(4) pair with the classic
//! fourth-order continuous extension, so trajectories carry dense output for
//! event location and post-hoc analysis. Integration stops at the domain
//! margin |u| = pi/2 - delta instead of clamping, optionally when the
//! projected (u, theta) state has converged to an equilibrium, or when a
//! user event fires.

use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::systems::{self, SystemId};

/// Tolerances, span and stopping rules for one integration.
#[derive(Debug, Clone)]
pub struct IntegrationConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step the controller may take. `None` means a tenth of the span.
    pub max_step: Option<f64>,
    /// Parameter span (s_min <= 0 <= s_max); the initial state sits at s = 0.
    pub span: (f64, f64),
    /// Stop once |u| > pi/2 - domain_margin.
    pub domain_margin: f64,
    /// Radius for convergence-to-equilibrium stopping of the projected
    /// (u, theta) state; `None` disables the check so spans run to the end.
    pub equilibrium_radius: Option<f64>,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: None,
            span: (-60.0, 60.0),
            domain_margin: 1e-6,
            equilibrium_radius: Some(1e-9),
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::usage("tolerances must be positive"));
        }
        if !(self.domain_margin > 0.0 && self.domain_margin < FRAC_PI_2 / 2.0) {
            return Err(Error::usage("domain margin must lie in (0, pi/4)"));
        }
        if self.span.0 > 0.0 || self.span.1 < 0.0 || self.span.0 == self.span.1 {
            return Err(Error::usage(
                "span must satisfy s_min <= 0 <= s_max with s_min < s_max",
            ));
        }
        if let Some(h) = self.max_step {
            if h <= 0.0 {
                return Err(Error::usage("max step must be positive"));
            }
        }
        Ok(())
    }
}

/// Why an integration direction ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum TerminationReason {
    SpanExhausted,
    DomainBoundary,
    ConvergedToEquilibrium { u: f64, theta: f64 },
    EventStop { name: String, s: f64 },
}

impl TerminationReason {
    pub fn label(&self) -> &'static str {
        match self {
            TerminationReason::SpanExhausted => "span-exhausted",
            TerminationReason::DomainBoundary => "domain-boundary",
            TerminationReason::ConvergedToEquilibrium { .. } => "converged-to-equilibrium",
            TerminationReason::EventStop { .. } => "event-stop",
        }
    }
}

/// Boxed scalar function of the state vector.
pub type StateFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

/// A stopping event: integration halts at the first root of `f` along the
/// trajectory.
pub struct StopEvent {
    pub name: String,
    pub f: StateFn,
}

/// Scalar function of the state whose roots are located post hoc.
pub struct EventFn {
    pub name: String,
    pub f: StateFn,
}

impl EventFn {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Sync + 'static) -> Self {
        EventFn { name: name.into(), f: Box::new(f) }
    }

    /// Crossings of the u = 0 axis.
    pub fn u_axis() -> Self {
        EventFn::new("u-axis", |state: &[f64]| state[0])
    }

    /// Critical points of v, i.e. roots of sin theta. The theta component is
    /// the last one for every system handled here.
    pub fn v_critical() -> Self {
        EventFn::new("v-critical", |state: &[f64]| state[state.len() - 1].sin())
    }
}

/// A located event root.
#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub name: String,
    pub s: f64,
    pub state: Vec<f64>,
    pub value: f64,
}

/// Result of scanning one event function over a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct EventScan {
    pub name: String,
    /// The event function vanishes along essentially the whole trajectory;
    /// crossings are meaningless and none are reported.
    pub degenerate: bool,
    pub roots: Vec<EventRecord>,
}

/// One dense-output segment: a quartic polynomial built over a step of size
/// `h` from `s0` (h may be negative for backward steps). `end` marks how far
/// along the step the segment is valid; it differs from s0 + h only when a
/// stop condition truncated the step.
#[derive(Debug, Clone)]
struct DenseSegment {
    s0: f64,
    h: f64,
    end: f64,
    /// Five interpolation coefficient vectors, each of length `dim`.
    r: Vec<f64>,
}

impl DenseSegment {
    fn eval_into(&self, dim: usize, s: f64, out: &mut [f64]) {
        let sigma = ((s - self.s0) / self.h).clamp(0.0, 1.0);
        let om = 1.0 - sigma;
        for (i, o) in out.iter_mut().enumerate().take(dim) {
            let r1 = self.r[i];
            let r2 = self.r[dim + i];
            let r3 = self.r[2 * dim + i];
            let r4 = self.r[3 * dim + i];
            let r5 = self.r[4 * dim + i];
            *o = r1 + sigma * (r2 + om * (r3 + sigma * (r4 + om * r5)));
        }
    }

    fn left(&self) -> f64 {
        self.s0.min(self.end)
    }

    fn covers(&self, s: f64) -> bool {
        let (lo, hi) = (self.s0.min(self.end), self.s0.max(self.end));
        s >= lo - 1e-14 && s <= hi + 1e-14
    }
}

/// A computed solution curve with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub system: SystemId,
    dim: usize,
    /// Accepted-step parameters, strictly increasing.
    s: Vec<f64>,
    /// Accepted-step states, row-major (len = s.len() * dim).
    states: Vec<f64>,
    segments: Vec<DenseSegment>,
    /// Why the forward (increasing s) end stopped.
    pub termination: TerminationReason,
    /// Why the backward end stopped; `None` when the span starts at 0.
    pub termination_backward: Option<TerminationReason>,
    pub events: Vec<EventRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.s[0], self.s[self.s.len() - 1])
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Dense evaluation at any s inside the computed range.
    pub fn eval(&self, s: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(s, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        let (lo, hi) = self.s_range();
        if s < lo - 1e-12 || s > hi + 1e-12 {
            return Err(Error::usage(format!(
                "parameter {s} outside computed range [{lo}, {hi}]"
            )));
        }
        if self.segments.is_empty() {
            out.copy_from_slice(self.state(0));
            return Ok(());
        }
        // Segments are sorted by left endpoint.
        let idx = self.segments.partition_point(|seg| seg.left() <= s);
        let seg = &self.segments[idx.saturating_sub(1).min(self.segments.len() - 1)];
        let seg = if seg.covers(s) {
            seg
        } else {
            self.segments
                .iter()
                .find(|c| c.covers(s))
                .ok_or_else(|| Error::numerical(format!("no dense segment covers s = {s}")))?
        };
        seg.eval_into(self.dim, s, out);
        Ok(())
    }

    /// The (s, u, v) polyline of a three-dimensional trajectory, or (s, u, 0)
    /// rows for planar ones.
    pub fn uv_samples(&self) -> Vec<[f64; 3]> {
        (0..self.len())
            .map(|i| {
                let st = self.state(i);
                let v = if self.dim == 3 { st[1] } else { 0.0 };
                [self.s[i], st[0], v]
            })
            .collect()
    }

    /// The (u, theta) projection at every sample.
    pub fn planar_samples(&self) -> Vec<[f64; 3]> {
        (0..self.len())
            .map(|i| {
                let st = self.state(i);
                [self.s[i], st[0], st[self.dim - 1]]
            })
            .collect()
    }

    pub fn csv_header(&self) -> &'static str {
        if self.dim == 3 { "s,u,v,theta" } else { "s,u,theta" }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error weights: fifth-order minus embedded fourth-order coefficients.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;
// Stage weights; the c-nodes are irrelevant for autonomous systems.
const STAGE_COEFFS: [[f64; 6]; 5] = [
    [A21, 0.0, 0.0, 0.0, 0.0, 0.0],
    [A31, A32, 0.0, 0.0, 0.0, 0.0],
    [A41, A42, A43, 0.0, 0.0, 0.0],
    [A51, A52, A53, A54, 0.0, 0.0],
    [A61, A62, A63, A64, A65, 0.0],
];

struct RawRun<const D: usize> {
    samples: Vec<(f64, [f64; D])>,
    segments: Vec<DenseSegment>,
    termination: TerminationReason,
}

/// What the per-step inspector decides after an accepted step.
enum StepVerdict {
    Continue,
    /// Stop at parameter s (located on the dense output of this step).
    StopAt(f64, TerminationReason),
}

fn weighted_error<const D: usize>(err: &[f64; D], y: &[f64; D], ynew: &[f64; D], rtol: f64, atol: f64) -> f64 {
    let mut m = 0.0f64;
    for i in 0..D {
        let scale = atol + rtol * y[i].abs().max(ynew[i].abs());
        m = m.max((err[i] / scale).abs());
    }
    m
}

fn dense_coeffs<const D: usize>(y: &[f64; D], ynew: &[f64; D], k: &[[f64; D]; 7], h: f64) -> Vec<f64> {
    let mut r = vec![0.0; 5 * D];
    for i in 0..D {
        let dy = ynew[i] - y[i];
        let bspl = h * k[0][i] - dy;
        r[i] = y[i];
        r[D + i] = dy;
        r[2 * D + i] = bspl;
        r[3 * D + i] = dy - h * k[6][i] - bspl;
        r[4 * D + i] = h
            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                + D7 * k[6][i]);
    }
    r
}

fn initial_step<const D: usize, F>(f: &F, y0: &[f64; D], dir: f64, span_len: f64, rtol: f64, atol: f64, max_step: f64) -> f64
where
    F: Fn(&[f64; D]) -> Result<[f64; D]>,
{
    let cap = max_step.min(span_len);
    let f0 = match f(y0) {
        Ok(v) => v,
        Err(_) => return 1e-8 * dir,
    };
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..D {
        let sc = atol + rtol * y0[i].abs();
        d0 = d0.max((y0[i] / sc).abs());
        d1 = d1.max((f0[i] / sc).abs());
    }
    let mut h = if d1 < 1e-10 { 1e-6 } else { 0.01 * d0.max(1e-5) / d1 };
    h = h.min(cap).max(1e-10);
    // One Euler probe to bound the derivative variation.
    let mut y1 = *y0;
    for i in 0..D {
        y1[i] += dir * h * f0[i];
    }
    if let Ok(f1) = f(&y1) {
        let mut d2 = 0.0f64;
        for i in 0..D {
            let sc = atol + rtol * y0[i].abs();
            d2 = d2.max(((f1[i] - f0[i]) / sc).abs() / h);
        }
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / dmax).powf(0.2) };
        h = (100.0 * h).min(h1).min(cap);
    }
    h * dir
}

fn run_direction<const D: usize, F, G>(
    f: &F,
    y0: [f64; D],
    s_end: f64,
    cfg: &IntegrationConfig,
    mut inspect: G,
) -> Result<RawRun<D>>
where
    F: Fn(&[f64; D]) -> Result<[f64; D]>,
    G: FnMut(f64, f64, &DenseSegment, &[f64; D]) -> StepVerdict,
{
    let dir = if s_end >= 0.0 { 1.0 } else { -1.0 };
    let span_len = s_end.abs();
    let max_step = cfg.max_step.unwrap_or(span_len / 10.0).min(span_len.max(1e-6));

    let mut samples = vec![(0.0, y0)];
    let mut segments = Vec::new();
    if span_len == 0.0 {
        return Ok(RawRun { samples, segments, termination: TerminationReason::SpanExhausted });
    }

    let mut s = 0.0f64;
    let mut y = y0;
    let mut k1 = f(&y)?;
    let mut h = initial_step(f, &y, dir, span_len, cfg.rtol, cfg.atol, max_step);
    let mut rejected_on_domain = false;

    for _step in 0..MAX_STEPS {
        if (s - s_end) * dir >= 0.0 {
            return Ok(RawRun { samples, segments, termination: TerminationReason::SpanExhausted });
        }
        // Do not step past the end of the span.
        if (s + h - s_end) * dir > 0.0 {
            h = s_end - s;
        }
        if h.abs() < 1e-14 * s.abs().max(1.0) {
            if rejected_on_domain {
                return Ok(RawRun { samples, segments, termination: TerminationReason::DomainBoundary });
            }
            return Err(Error::numerical(format!(
                "step size underflow at s = {s} without a domain cause"
            )));
        }

        // Stages; a regularity failure inside a stage rejects the step.
        let mut k = [[0.0; D]; 7];
        k[0] = k1;
        let mut stage_failed = false;
        for stage in 0..5 {
            let mut ys = y;
            for (j, a) in STAGE_COEFFS[stage].iter().enumerate().take(stage + 1) {
                for i in 0..D {
                    ys[i] += h * a * k[j][i];
                }
            }
            match f(&ys) {
                Ok(v) => k[stage + 1] = v,
                Err(_) => {
                    stage_failed = true;
                    break;
                }
            }
        }
        let mut regularity_reject = stage_failed;
        let (ynew, err_norm) = if stage_failed {
            ([0.0; D], f64::INFINITY)
        } else {
            let mut ynew = y;
            for i in 0..D {
                ynew[i] += h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
            }
            match f(&ynew) {
                Ok(k7) => {
                    k[6] = k7;
                    let mut err = [0.0; D];
                    for i in 0..D {
                        err[i] = h
                            * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i]
                                + E6 * k[5][i] + E7 * k[6][i]);
                    }
                    (ynew, weighted_error(&err, &y, &ynew, cfg.rtol, cfg.atol))
                }
                Err(_) => {
                    regularity_reject = true;
                    ([0.0; D], f64::INFINITY)
                }
            }
        };

        if err_norm <= 1.0 {
            rejected_on_domain = false;
            let seg = DenseSegment { s0: s, h, end: s + h, r: dense_coeffs(&y, &ynew, &k, h) };
            let verdict = inspect(s, h, &seg, &ynew);
            match verdict {
                StepVerdict::Continue => {
                    s += h;
                    y = ynew;
                    k1 = k[6];
                    samples.push((s, y));
                    segments.push(seg);
                    let scale = if err_norm == 0.0 { 10.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 10.0) };
                    h = (h * scale).clamp(-max_step, max_step);
                    if h == 0.0 {
                        h = 1e-12 * dir;
                    }
                }
                StepVerdict::StopAt(s_stop, reason) => {
                    let mut yst = [0.0; D];
                    seg.eval_into(D, s_stop, &mut yst);
                    let mut truncated = seg;
                    truncated.end = s_stop;
                    if (truncated.end - truncated.s0).abs() > 1e-14 {
                        segments.push(truncated);
                        samples.push((s_stop, yst));
                    }
                    return Ok(RawRun { samples, segments, termination: reason });
                }
            }
        } else {
            rejected_on_domain = regularity_reject;
            let scale = if err_norm.is_finite() { (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h *= scale;
        }
    }
    Err(Error::numerical("maximum step count exceeded"))
}

/// Locate the first parameter in the step where `g` changes sign, by
/// sampling followed by bisection on the dense output.
fn first_root_in_segment<const D: usize, G>(
    seg: &DenseSegment,
    g: &G,
    samples: usize,
) -> Option<f64>
where
    G: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut y = [0.0; D];
    let s_at = |q: f64| seg.s0 + q * seg.h;
    let mut prev_q = 0.0;
    seg.eval_into(D, s_at(0.0), &mut y);
    let mut prev_g = g(&y);
    for i in 1..=samples {
        let q = i as f64 / samples as f64;
        seg.eval_into(D, s_at(q), &mut y);
        let gi = g(&y);
        if prev_g == 0.0 && gi != 0.0 && prev_q > 0.0 {
            return Some(s_at(prev_q));
        }
        if prev_g * gi < 0.0 {
            // Bisection to 1e-13 in q-units of s.
            let (mut qa, mut qb) = (prev_q, q);
            let (mut ga, _) = (prev_g, gi);
            for _ in 0..200 {
                let qm = 0.5 * (qa + qb);
                seg.eval_into(D, s_at(qm), &mut y);
                let gm = g(&y);
                if ga * gm <= 0.0 {
                    qb = qm;
                } else {
                    qa = qm;
                    ga = gm;
                }
                if (qb - qa).abs() * seg.h.abs() < 1e-13 {
                    break;
                }
            }
            return Some(s_at(0.5 * (qa + qb)));
        }
        prev_q = q;
        prev_g = gi;
    }
    None
}

fn run_system<const D: usize>(
    system: SystemId,
    initial: [f64; D],
    cfg: &IntegrationConfig,
    stops: &[StopEvent],
) -> Result<Trajectory> {
    let theta_idx = system.theta_index();
    let margin = FRAC_PI_2 - cfg.domain_margin;
    if initial[0].abs() >= margin {
        return Err(Error::usage(format!(
            "initial latitude u = {} outside the integration domain |u| < pi/2 - {}",
            initial[0], cfg.domain_margin
        )));
    }

    let f = move |y: &[f64; D]| -> Result<[f64; D]> {
        let mut out = [0.0; D];
        systems::rhs(system, y, &mut out)?;
        Ok(out)
    };

    let converged = |y: &[f64; D]| -> Option<(f64, f64)> {
        let eps = cfg.equilibrium_radius?;
        let (u, theta) = (y[0], y[theta_idx]);
        let (eu, eth) = systems::nearest_equilibrium(system, u, theta);
        let dist = ((u - eu).powi(2) + (theta - eth).powi(2)).sqrt();
        if dist >= eps {
            return None;
        }
        let d = systems::rhs2(system.planar(), [u, theta]).ok()?;
        if (d[0] * d[0] + d[1] * d[1]).sqrt() < eps {
            Some((eu, eth))
        } else {
            None
        }
    };

    let inspect = |_s: f64, _h: f64, seg: &DenseSegment, ynew: &[f64; D]| -> StepVerdict {
        // Domain margin, located on the dense output.
        if ynew[0].abs() > margin {
            let g = move |st: &[f64]| margin - st[0].abs();
            if let Some(s_stop) = first_root_in_segment::<D, _>(seg, &g, 16) {
                return StepVerdict::StopAt(s_stop, TerminationReason::DomainBoundary);
            }
            return StepVerdict::StopAt(seg.s0 + seg.h, TerminationReason::DomainBoundary);
        }
        for ev in stops {
            if let Some(s_stop) = first_root_in_segment::<D, _>(seg, ev.f.as_ref(), 16) {
                return StepVerdict::StopAt(
                    s_stop,
                    TerminationReason::EventStop { name: ev.name.clone(), s: s_stop },
                );
            }
        }
        if let Some((eu, eth)) = converged(ynew) {
            return StepVerdict::StopAt(
                seg.s0 + seg.h,
                TerminationReason::ConvergedToEquilibrium { u: eu, theta: eth },
            );
        }
        StepVerdict::Continue
    };

    // Immediate convergence (seeded at an equilibrium).
    if let Some((eu, eth)) = converged(&initial) {
        return Ok(Trajectory {
            system,
            dim: D,
            s: vec![0.0],
            states: initial.to_vec(),
            segments: Vec::new(),
            termination: TerminationReason::ConvergedToEquilibrium { u: eu, theta: eth },
            termination_backward: None,
            events: Vec::new(),
        });
    }

    let forward = if cfg.span.1 > 0.0 {
        Some(run_direction(&f, initial, cfg.span.1, cfg, inspect)?)
    } else {
        None
    };
    let backward = if cfg.span.0 < 0.0 {
        Some(run_direction(&f, initial, cfg.span.0, cfg, inspect)?)
    } else {
        None
    };

    let mut s = Vec::new();
    let mut states = Vec::new();
    let mut segments = Vec::new();
    let mut termination_backward = None;
    if let Some(b) = &backward {
        for (sv, st) in b.samples.iter().rev() {
            s.push(*sv);
            states.extend_from_slice(st);
        }
        // Drop the duplicate s = 0 sample; the forward run re-adds it.
        if forward.is_some() {
            s.pop();
            states.truncate(states.len() - D);
        }
        segments.extend(b.segments.iter().rev().cloned());
        termination_backward = Some(b.termination.clone());
    }
    let termination = match &forward {
        Some(fr) => {
            for (sv, st) in &fr.samples {
                s.push(*sv);
                states.extend_from_slice(st);
            }
            segments.extend(fr.segments.iter().cloned());
            fr.termination.clone()
        }
        None => {
            // Backward-only run: the "forward" end is just s = 0.
            TerminationReason::SpanExhausted
        }
    };

    Ok(Trajectory {
        system,
        dim: D,
        s,
        states,
        segments,
        termination,
        termination_backward,
        events: Vec::new(),
    })
}

/// Integrate a system from `initial` (taken at s = 0) over the configured
/// span, in both directions when the span brackets zero.
pub fn integrate(system: SystemId, initial: &[f64], cfg: &IntegrationConfig) -> Result<Trajectory> {
    integrate_with_stop_events(system, initial, cfg, &[])
}

/// Same as [`integrate`], halting at the first root of any stop event.
pub fn integrate_with_stop_events(
    system: SystemId,
    initial: &[f64],
    cfg: &IntegrationConfig,
    stops: &[StopEvent],
) -> Result<Trajectory> {
    cfg.validate()?;
    match system.dimension() {
        2 => {
            let y0: [f64; 2] = initial
                .try_into()
                .map_err(|_| Error::usage(format!("{} expects a 2d state", system.label())))?;
            run_system::<2>(system, y0, cfg, stops)
        }
        3 => {
            let y0: [f64; 3] = initial
                .try_into()
                .map_err(|_| Error::usage(format!("{} expects a 3d state", system.label())))?;
            run_system::<3>(system, y0, cfg, stops)
        }
        _ => unreachable!(),
    }
}

const DEGENERATE_EVENT_TOL: f64 = 1e-12;
const EVENT_VALUE_TOL: f64 = 1e-11;

/// Locate all sign-change roots of each event function on the dense output.
pub fn detect_events(traj: &Trajectory, events: &[EventFn]) -> Vec<EventScan> {
    events
        .iter()
        .map(|ev| {
            let mut roots = Vec::new();
            let mut n_samples = 0usize;
            let mut n_tiny = 0usize;
            let mut state = vec![0.0; traj.dim];
            let mut prev: Option<(f64, f64)> = None;
            for seg in &traj.segments {
                let subdiv = 8;
                for i in 0..=subdiv {
                    let s = seg.s0 + seg.h * i as f64 / subdiv as f64;
                    seg.eval_into(traj.dim, s, &mut state);
                    let g = (ev.f)(&state);
                    n_samples += 1;
                    if g.abs() < DEGENERATE_EVENT_TOL {
                        n_tiny += 1;
                    }
                    if let Some((ps, pg)) = prev {
                        if pg * g < 0.0 && s != ps {
                            let mut root = refine_root(traj, ev.f.as_ref(), ps, s, &mut state);
                            root.name = ev.name.clone();
                            roots.push(root);
                        }
                    }
                    prev = Some((s, g));
                }
            }
            let degenerate = n_samples > 0 && n_tiny * 10 >= n_samples * 9;
            let roots = if degenerate {
                Vec::new()
            } else {
                dedup_roots(roots)
            };
            EventScan { name: ev.name.clone(), degenerate, roots }
        })
        .collect()
}

fn refine_root<G>(
    traj: &Trajectory,
    g: &G,
    mut a: f64,
    mut b: f64,
    state: &mut [f64],
) -> EventRecord
where
    G: Fn(&[f64]) -> f64 + ?Sized,
{
    traj.eval_into(a, state).expect("inside range");
    let mut ga = g(state);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        traj.eval_into(m, state).expect("inside range");
        let gm = g(state);
        if ga * gm <= 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    let s = 0.5 * (a + b);
    traj.eval_into(s, state).expect("inside range");
    let value = g(state);
    debug_assert!(value.abs() < EVENT_VALUE_TOL || (b - a).abs() < 1e-12);
    EventRecord { name: String::new(), s, state: state.to_vec(), value }
}

fn dedup_roots(mut roots: Vec<EventRecord>) -> Vec<EventRecord> {
    roots.sort_by(|a, b| a.s.partial_cmp(&b.s).expect("finite"));
    let mut out: Vec<EventRecord> = Vec::with_capacity(roots.len());
    for r in roots {
        if out.last().is_none_or(|p| (r.s - p.s).abs() > 1e-10) {
            out.push(r);
        }
    }
    out
}
