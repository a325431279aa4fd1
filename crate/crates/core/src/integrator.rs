//! Dormand–Prince 5(4) with PI step control, dense output and event location.
//!
//! The solver works on fixed-size real states `[f64; N]` so the same code
//! integrates the quaternion fields (`N = 4`) and the planar reductions used
//! by the structure analyses (`N = 2`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::quat::Quaternion;

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl OdeSystem<4> for FieldSpec {
    fn rhs(&self, _t: f64, y: &[f64; 4]) -> [f64; 4] {
        self.eval_array(y)
    }
}

/// Wraps a closure as an [`OdeSystem`].
pub struct FnSystem<F>(pub F);

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> OdeSystem<N> for FnSystem<F> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.0)(t, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u64,
    /// `|y|` beyond which the run stops with [`Termination::Escape`].
    pub escape_radius: f64,
    /// A step-size collapse with `|y|` at least this large is read as
    /// finite-time blow-up and reported as an escape.
    pub blowup_radius: f64,
    pub h_init: Option<f64>,
    pub h_max: Option<f64>,
    /// Take uniform steps of this size without error control.
    pub fixed_step: Option<f64>,
    /// Keep the per-step interpolation coefficients.
    pub dense: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
            escape_radius: 1e8,
            blowup_radius: 1e4,
            h_init: None,
            h_max: None,
            fixed_step: None,
            dense: true,
        }
    }
}

impl Options {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Options { rtol, atol, ..Options::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive, got rtol={} atol={}",
                self.rtol, self.atol
            )));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) {
                return Err(Error::InvalidArgument("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crossing {
    Rising,
    Falling,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventAction {
    Record,
    Terminate,
}

type EventFn<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'a>;

/// A scalar surface `g(t, y) = 0` to watch for.
pub struct EventSpec<'a, const N: usize> {
    pub name: String,
    pub g: EventFn<'a, N>,
    pub crossing: Crossing,
    pub action: EventAction,
}

impl<'a, const N: usize> EventSpec<'a, N> {
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'a,
        crossing: Crossing,
        action: EventAction,
    ) -> Self {
        EventSpec { name: name.into(), g: Box::new(g), crossing, action }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord<const N: usize> {
    pub t: f64,
    pub name: String,
    #[serde(with = "serde_arrays")]
    pub y: [f64; N],
}

/// Serde for const-generic arrays, which serde does not derive directly.
mod serde_arrays {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(v: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[f64; N], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into().map_err(|_| serde::de::Error::custom(format!("expected {N} components")))
    }
}

pub const ESCAPE_EVENT: &str = "ESCAPE";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Event(String),
    Escape,
    StepLimit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

#[derive(Clone, Copy, Debug)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.r;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<const N: usize> {
    /// Accepted step end points, starting with the initial condition.
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub events: Vec<EventRecord<N>>,
    pub termination: Termination,
    pub stats: Stats,
    pub options: Options,
    segments: Vec<Segment<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }

    pub fn direction(&self) -> f64 {
        if self.t.len() > 1 && self.t[1] < self.t[0] {
            -1.0
        } else {
            1.0
        }
    }

    /// Interpolated state at `t`, if `t` lies in the integrated range and
    /// dense output was kept.
    pub fn dense_eval(&self, t: f64) -> Option<[f64; N]> {
        if self.segments.is_empty() {
            return (self.t.len() == 1 && t == self.t[0]).then(|| self.y[0]);
        }
        let dir = self.direction();
        let first = self.segments.first()?;
        let last = self.segments.last()?;
        let (lo, hi) = (first.t0, last.t0 + last.h);
        if dir * (t - lo) < 0.0 || dir * (t - hi) > 0.0 {
            return None;
        }
        let idx = self.segments.partition_point(|s| dir * (s.t0 + s.h - t) < 0.0);
        let seg = self.segments.get(idx.min(self.segments.len() - 1))?;
        Some(seg.eval(t))
    }
}

fn norm<const N: usize>(y: &[f64; N]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BISECTION_ITERS: usize = 60;

struct Step<const N: usize> {
    y_new: [f64; N],
    k7: [f64; N],
    err: f64,
    seg: Segment<N>,
}

struct Solver<'s, S, const N: usize> {
    sys: &'s S,
    opts: Options,
    stats: Stats,
}

impl<'s, const N: usize, S: OdeSystem<N>> Solver<'s, S, N> {
    fn f(&mut self, t: f64, y: &[f64; N]) -> [f64; N] {
        self.stats.rhs_evals += 1;
        self.sys.rhs(t, y)
    }

    fn scale(&self, y: &[f64; N], y_new: &[f64; N], i: usize) -> f64 {
        self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs())
    }

    fn initial_step(&mut self, t: f64, y: &[f64; N], f0: &[f64; N], dir: f64, span: f64) -> f64 {
        let h_max = self.opts.h_max.unwrap_or(span).min(span);
        let sk: [f64; N] = std::array::from_fn(|i| self.opts.atol + self.opts.rtol * y[i].abs());
        let dnf: f64 = (0..N).map(|i| (f0[i] / sk[i]).powi(2)).sum();
        let dny: f64 = (0..N).map(|i| (y[i] / sk[i]).powi(2)).sum();
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
        h = h.min(h_max);
        let y1 = axpy(y, dir * h, &[(1.0, f0)]);
        let f1 = self.f(t + dir * h, &y1);
        let der2 = (0..N).map(|i| ((f1[i] - f0[i]) / sk[i]).powi(2)).sum::<f64>().sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
        (100.0 * h).min(h1).min(h_max)
    }

    fn step(&mut self, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Step<N> {
        let k2 = self.f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = self.f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = self.f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = self.f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = self.f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = self.f(t + h, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err += (e / self.scale(y, &y_new, i)).powi(2);
        }
        let err = (err / N as f64).sqrt();

        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let err = if finite(&y_new) && finite(&k7) && err.is_finite() { err } else { f64::INFINITY };
        Step { y_new, k7, err, seg: Segment { t0: t, h, r } }
    }
}

struct EventState<'e, 'a, const N: usize> {
    spec: &'e EventSpec<'a, N>,
    g_prev: f64,
}

fn crossing_matches(c: Crossing, g0: f64, g1: f64) -> bool {
    let rising = g0 < 0.0 && g1 >= 0.0;
    let falling = g0 > 0.0 && g1 <= 0.0;
    match c {
        Crossing::Rising => rising,
        Crossing::Falling => falling,
        Crossing::Both => rising || falling,
    }
}

/// Root of `g` on the dense interpolant of one step.
fn locate<const N: usize>(ev: &EventSpec<'_, N>, seg: &Segment<N>, g0: f64) -> (f64, [f64; N]) {
    let (mut lo, mut hi) = (seg.t0, seg.t0 + seg.h);
    let mut glo = g0;
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = (ev.g)(mid, &seg.eval(mid));
        if gm == 0.0 {
            return (mid, seg.eval(mid));
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    // hi is on the far side of the sign change; pick whichever end is closer to zero
    let (yl, yh) = (seg.eval(lo), seg.eval(hi));
    if (ev.g)(lo, &yl).abs() < (ev.g)(hi, &yh).abs() {
        (lo, yl)
    } else {
        (hi, yh)
    }
}

/// Integrate `sys` from `y0` over `t_span`, which may run backward.
pub fn integrate<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: [f64; N],
    t_span: (f64, f64),
    opts: &Options,
    events: &[EventSpec<'_, N>],
) -> Result<Trajectory<N>> {
    opts.validate()?;
    let (t0, t_end) = t_span;
    if !(t0.is_finite() && t_end.is_finite()) || t0 == t_end {
        return Err(Error::InvalidArgument(format!("degenerate time span {t0}:{t_end}")));
    }
    if !finite(&y0) {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }
    let dir = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let mut solver = Solver { sys, opts: *opts, stats: Stats::default() };

    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        events: Vec::new(),
        termination: Termination::Completed,
        stats: Stats::default(),
        options: *opts,
        segments: Vec::new(),
    };
    let mut states: Vec<EventState<N>> =
        events.iter().map(|spec| EventState { spec, g_prev: (spec.g)(t0, &y0) }).collect();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = solver.f(t, &y);
    if !finite(&k1) {
        return Err(Error::NonFiniteRhs { t });
    }
    let h_max = opts.h_max.unwrap_or(span);
    let mut h = match (opts.fixed_step, opts.h_init) {
        (Some(h), _) => h,
        (None, Some(h)) => h.abs().min(h_max),
        (None, None) => solver.initial_step(t, &y, &k1, dir, span),
    };
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    'outer: loop {
        if traj.stats.accepted >= opts.max_steps {
            traj.termination = Termination::StepLimit;
            break;
        }
        let remaining = (t_end - t) * dir;
        let last = h >= remaining * (1.0 - 1e-12);
        let h_try = if last { remaining } else { h };
        if h_try.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            if norm(&y) >= opts.blowup_radius {
                push_escape(&mut traj, t, y);
                break;
            }
            return Err(Error::StepSizeUnderflow { t, last_state: y.to_vec() });
        }

        let step = solver.step(t, &y, &k1, dir * h_try);
        let err = if opts.fixed_step.is_some() && step.err.is_finite() { 0.0 } else { step.err };

        if err > 1.0 {
            traj.stats.rejected += 1;
            let shrink = if err.is_finite() { (err.powf(0.2 - BETA * 0.75) / SAFETY).min(1.0 / FAC_MIN) } else { 10.0 };
            h = h_try / shrink;
            last_rejected = true;
            continue;
        }

        traj.stats.accepted += 1;
        let t_new = if last { t_end } else { t + dir * h_try };
        let y_new = step.y_new;
        if opts.dense {
            traj.segments.push(step.seg);
        }

        for st in states.iter_mut() {
            let g_new = (st.spec.g)(t_new, &y_new);
            if crossing_matches(st.spec.crossing, st.g_prev, g_new) {
                let (te, ye) = locate(st.spec, &step.seg, st.g_prev);
                traj.events.push(EventRecord { t: te, name: st.spec.name.clone(), y: ye });
                if st.spec.action == EventAction::Terminate {
                    traj.t.push(te);
                    traj.y.push(ye);
                    traj.termination = Termination::Event(st.spec.name.clone());
                    break 'outer;
                }
            }
            st.g_prev = g_new;
        }

        t = t_new;
        y = y_new;
        k1 = step.k7;
        traj.t.push(t);
        traj.y.push(y);

        if norm(&y) > opts.escape_radius {
            push_escape(&mut traj, t, y);
            break;
        }
        if last {
            break;
        }

        if let Some(hf) = opts.fixed_step {
            h = hf;
            continue;
        }
        let expo = 0.2 - BETA * 0.75;
        let fac11 = err.max(1e-300).powf(expo);
        let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = (h_try / fac).min(h_max);
        if last_rejected {
            h_new = h_new.min(h_try);
        }
        fac_old = err.max(1e-4);
        last_rejected = false;
        h = h_new;
    }

    traj.stats = solver.stats_merge(traj.stats);
    Ok(traj)
}

impl<'s, S, const N: usize> Solver<'s, S, N> {
    fn stats_merge(&self, s: Stats) -> Stats {
        Stats { rhs_evals: self.stats.rhs_evals, ..s }
    }
}

fn push_escape<const N: usize>(traj: &mut Trajectory<N>, t: f64, y: [f64; N]) {
    traj.events.push(EventRecord { t, name: ESCAPE_EVENT.to_string(), y });
    traj.termination = Termination::Escape;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// A set a trajectory may converge to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Point(Quaternion),
    /// The solutions of `q^exponent = value` for real `value`: isolated
    /// real roots together with 2-spheres of nonreal roots.
    PowerRoots { exponent: u32, value: f64 },
}

impl Target {
    pub fn distance(&self, q: Quaternion) -> f64 {
        match *self {
            Target::Point(p) => (q - p).norm(),
            Target::PowerRoots { exponent, value } => {
                // every root is conjugate to a complex root ζ; project q to its
                // complex slice q0 + |Im q| i and compare there
                let z = num_complex::Complex64::new(q.q0, q.imag_norm_sq().sqrt());
                complex_roots(exponent, value)
                    .into_iter()
                    .map(|r| {
                        let r = num_complex::Complex64::new(r.re, r.im.abs());
                        (z - r).norm()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// The `m` complex `m`-th roots of a real number.
pub fn complex_roots(m: u32, value: f64) -> Vec<num_complex::Complex64> {
    let r = value.abs().powf(1.0 / m as f64);
    let offset = if value < 0.0 { std::f64::consts::PI } else { 0.0 };
    (0..m)
        .map(|k| {
            let ang = (offset + 2.0 * std::f64::consts::PI * k as f64) / m as f64;
            num_complex::Complex64::from_polar(r, ang)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeOutcome {
    Converged { target: usize, residual: f64, time: f64 },
    Escaped { time: f64 },
    Undecided { distance: f64 },
}

/// Thresholds of [`limit_set_probe`].
pub const PROBE_DISTANCE: f64 = 1e-4;
const PROBE_WINDOWS: usize = 10;
/// Envelope growth below this size is integration noise, not divergence.
const PROBE_NOISE: f64 = 1e-8;

/// Follow an orbit for `t_max` and decide whether it settles on one of
/// `targets`.
///
/// Convergence needs a terminal distance below [`PROBE_DISTANCE`] and a
/// non-increasing envelope: the last tenth of the run is cut into ten
/// windows and the maximum distance per window may not grow.
pub fn limit_set_probe<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    y0: [f64; N],
    direction: Direction,
    distance: impl Fn(&[f64; N]) -> (usize, f64),
    t_max: f64,
    opts: &Options,
) -> Result<ProbeOutcome> {
    let (idx, d0) = distance(&y0);
    if d0 == 0.0 {
        return Ok(ProbeOutcome::Converged { target: idx, residual: 0.0, time: 0.0 });
    }
    let opts = Options { dense: false, ..*opts };
    let traj = integrate(sys, y0, (0.0, direction.sign() * t_max), &opts, &[])?;
    let (t_last, y_last) = traj.last();
    if traj.termination == Termination::Escape {
        return Ok(ProbeOutcome::Escaped { time: t_last.abs() });
    }
    let (target, residual) = distance(&y_last);
    if residual >= PROBE_DISTANCE || traj.termination != Termination::Completed {
        return Ok(ProbeOutcome::Undecided { distance: residual });
    }
    let tail_start = 0.9 * t_max;
    let width = 0.1 * t_max / PROBE_WINDOWS as f64;
    let mut envelope = [0.0f64; PROBE_WINDOWS];
    for (t, y) in traj.t.iter().zip(&traj.y) {
        let s = t.abs();
        if s < tail_start {
            continue;
        }
        let w = (((s - tail_start) / width) as usize).min(PROBE_WINDOWS - 1);
        envelope[w] = envelope[w].max(distance(y).1);
    }
    // windows without samples (one long step) inherit the previous maximum
    for w in 1..PROBE_WINDOWS {
        if envelope[w] == 0.0 {
            envelope[w] = envelope[w - 1];
        }
    }
    let monotone = envelope.windows(2).all(|p| p[1] <= p[0] + PROBE_NOISE);
    if monotone {
        Ok(ProbeOutcome::Converged { target, residual, time: t_last.abs() })
    } else {
        Ok(ProbeOutcome::Undecided { distance: residual })
    }
}

/// [`limit_set_probe`] for a quaternion field; targets must be equilibria.
pub fn probe_field(
    spec: &FieldSpec,
    q0: Quaternion,
    direction: Direction,
    targets: &[Target],
    t_max: f64,
    opts: &Options,
) -> Result<ProbeOutcome> {
    for t in targets {
        if let Target::Point(p) = t {
            let v = spec.eval(*p).norm();
            if v >= 1e-10 {
                return Err(Error::InvalidArgument(format!("target {p} is not an equilibrium (|field| = {v:e})")));
            }
        }
    }
    let distance = |y: &[f64; 4]| {
        let q = Quaternion::from_array(*y);
        targets
            .iter()
            .enumerate()
            .map(|(i, t)| (i, t.distance(q)))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    };
    limit_set_probe(spec, q0.to_array(), direction, distance, t_max, opts)
}
