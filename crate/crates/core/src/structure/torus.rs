//! Invariant tori `{H = h} ∩ {F = f}` of the cubic Bernoulli equation with
//! `a = i` and of the cubic equation `q̇ = i (q − c0) (q + c0) q`, their
//! rotation numbers, and the search for tori filled with periodic orbits.
//!
//! With `q2 = √f cos θ`, `q3 = √f sin θ` and `q0 + i q1 = √G e^{iφ}`, the
//! Bernoulli torus has
//! `G(φ) = h cos 2φ − f + √(h² cos² 2φ − 2fh cos 2φ − 2fh − c0 h)`.
//! The cubic level `|q|⁴ = h (q0² − |Im q|² − c0²/2)` is the Bernoulli level
//! with `h/2` and `c0²` in place of `h` and `c0`, so both share one
//! parametrization.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::integrator::{integrate, Crossing, EventAction, EventSpec, FnSystem, Options, Termination};
use crate::invariants::{IntegralDescriptor, IntegralId};
use crate::quadrature::{self, QuadResult};
use crate::quat::Quaternion;
use crate::rational::{classify_default, Classification, Q_MAX};

/// Grid size of the positivity checks on `G` and on the radicand.
pub const POSITIVITY_GRID: usize = 2048;
const QUAD_TOL: f64 = 1e-13;
/// Return-map closure needed for a periodic torus.
pub const CLOSURE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusFamily {
    Bernoulli,
    Cubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub family: TorusFamily,
    pub h: f64,
    pub f: f64,
    pub c0: f64,
}

impl TorusSpec {
    pub fn bernoulli(h: f64, f: f64, c0: f64) -> Self {
        TorusSpec { family: TorusFamily::Bernoulli, h, f, c0 }
    }

    pub fn cubic(h: f64, f: f64, c0: f64) -> Self {
        TorusSpec { family: TorusFamily::Cubic, h, f, c0 }
    }

    pub fn field(&self) -> Result<FieldSpec> {
        match self.family {
            TorusFamily::Bernoulli => FieldSpec::bernoulli(Quaternion::I, Quaternion::real(self.c0), 3),
            TorusFamily::Cubic => FieldSpec::cubic(Quaternion::I, self.c0),
        }
    }

    /// `(h, c0)` of the Bernoulli level with the same `(q0, q1)` curve.
    fn reduced(&self) -> (f64, f64) {
        match self.family {
            TorusFamily::Bernoulli => (self.h, self.c0),
            TorusFamily::Cubic => (self.h / 2.0, self.c0 * self.c0),
        }
    }

    /// `−(f² + (2f + c0) h)` in reduced parameters; positive inside the domain.
    pub fn domain_margin(&self) -> f64 {
        let (h, c0) = self.reduced();
        -(self.f * self.f + (2.0 * self.f + c0) * h)
    }

    /// `h² cos² ψ − 2fh cos ψ − (2f + c0) h`.
    pub fn radicand(&self, psi: f64) -> f64 {
        let (h, c0) = self.reduced();
        let (f, c) = (self.f, psi.cos());
        h * h * c * c - 2.0 * f * h * c - (2.0 * f + c0) * h
    }

    /// Squared radius in the `(q0, q1)` plane at angle `φ`, on the `+√` branch.
    pub fn g(&self, phi: f64) -> f64 {
        let (h, _) = self.reduced();
        h * (2.0 * phi).cos() - self.f + self.radicand(2.0 * phi).max(0.0).sqrt()
    }

    fn g_minus(&self, phi: f64) -> f64 {
        let (h, _) = self.reduced();
        h * (2.0 * phi).cos() - self.f - self.radicand(2.0 * phi).max(0.0).sqrt()
    }

    pub fn point(&self, phi: f64, theta: f64) -> Quaternion {
        let (r, s) = (self.g(phi).sqrt(), self.f.sqrt());
        Quaternion::new(r * phi.cos(), r * phi.sin(), s * theta.cos(), s * theta.sin())
    }

    fn integrals(&self) -> Result<(IntegralDescriptor, IntegralDescriptor)> {
        let spec = self.field()?;
        let h = match self.family {
            TorusFamily::Bernoulli => IntegralId::Hn,
            TorusFamily::Cubic => IntegralId::HE417,
        };
        Ok((IntegralDescriptor::new(h, &spec)?, IntegralDescriptor::new(IntegralId::FCyl, &spec)?))
    }
}

/// Minimum of `f` over `[0, 2π)`: a grid scan refined by golden-section search.
fn periodic_min(f: impl Fn(f64) -> f64) -> f64 {
    let step = 2.0 * PI / POSITIVITY_GRID as f64;
    let (k, _) = (0..POSITIVITY_GRID)
        .map(|k| (k, f(k as f64 * step)))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let (mut lo, mut hi) = ((k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (x1, x2) = (hi - ratio * (hi - lo), lo + ratio * (hi - lo));
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    f(0.5 * (lo + hi)).min(f(k as f64 * step))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationMethod {
    /// The rotation integral over `ψ`.
    Quadrature,
    /// Angle accumulated along one loop of the `(q0, q1)` curve.
    Loop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    /// Time between consecutive crossings of `{q1 = 0}` in the start's direction.
    pub return_time: f64,
    pub returns: usize,
    /// `Δθ / Δφ` measured over all returns.
    pub measured_winding: f64,
    pub winding_error: f64,
    /// `|q − q_start|` after `q` returns for a periodic torus.
    pub closure_residual: Option<f64>,
    /// Smallest `|q − q_start|` over all returns.
    pub min_return_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationResult {
    pub family: TorusFamily,
    pub h: f64,
    pub f: f64,
    pub c0: f64,
    #[serde(rename = "I")]
    pub i_value: f64,
    pub abs_err: f64,
    /// `1 + I`: turns in `θ` per turn in `φ`.
    pub winding_ratio: f64,
    pub classification: Classification,
    pub method: RotationMethod,
    pub domain_margin: f64,
    pub g_min: f64,
    pub radicand_min: f64,
    /// Largest relative drift of `H` and `F` over `T = 20` from a torus point.
    pub invariance_drift: f64,
    pub cross_check: Option<CrossCheck>,
    pub notes: Vec<String>,
}

/// Check the domain and positivity conditions of a torus around the origin.
fn validate(ts: &TorusSpec) -> Result<(f64, f64)> {
    if !(ts.f > 0.0) {
        return Err(Error::DomainViolation(format!("f = {} must be positive", ts.f)));
    }
    let margin = ts.domain_margin();
    if !(margin > 0.0) {
        return Err(Error::DomainViolation(format!(
            "f² + (2f + c0) h = {:e} is not negative for (h, f, c0) = ({}, {}, {})",
            -margin, ts.h, ts.f, ts.c0
        )));
    }
    let radicand_min = periodic_min(|psi| ts.radicand(psi));
    let g_min = periodic_min(|phi| ts.g(phi));
    if !(radicand_min > 0.0 && g_min > 0.0) {
        return Err(Error::DomainViolation(format!(
            "torus parametrization degenerates: min radicand {radicand_min:e}, min G {g_min:e}"
        )));
    }
    Ok((radicand_min, g_min))
}

/// `I = (1/2π) ∫₀^{2π} h (1 + cos ψ) / √radicand dψ` for an in-domain torus.
pub fn rotation_integral(ts: &TorusSpec) -> Result<QuadResult> {
    validate(ts)?;
    rotation_integral_unchecked(ts)
}

fn rotation_integral_unchecked(ts: &TorusSpec) -> Result<QuadResult> {
    let (h, _) = ts.reduced();
    let integrand = |psi: f64| h * (1.0 + psi.cos()) / ts.radicand(psi).sqrt();
    let r = quadrature::integrate(integrand, 0.0, 2.0 * PI, QUAD_TOL, 20_000)?;
    Ok(QuadResult { value: r.value / (2.0 * PI), abs_err: r.abs_err / (2.0 * PI), intervals: r.intervals })
}

/// The same integral by composite Simpson, as an independent check.
pub fn rotation_integral_simpson(ts: &TorusSpec, panels: usize) -> f64 {
    let (h, _) = ts.reduced();
    quadrature::simpson(|psi| h * (1.0 + psi.cos()) / ts.radicand(psi).sqrt(), 0.0, 2.0 * PI, panels) / (2.0 * PI)
}

/// Largest relative drift of `H` and `F` along `T = 20` from `start`.
fn invariance_drift(ts: &TorusSpec, start: Quaternion) -> Result<f64> {
    let spec = ts.field()?;
    let (hd, fd) = ts.integrals()?;
    let (h0, f0) = (hd.value(start)?, fd.value(start)?);
    let traj = integrate(&spec, start.to_array(), (0.0, 20.0), &Options::default(), &[])?;
    let mut drift: f64 = 0.0;
    for y in &traj.y {
        let q = Quaternion::from_array(*y);
        drift = drift.max((hd.value(q)? - h0).abs() / h0.abs()).max((fd.value(q)? - f0).abs() / f0);
    }
    Ok(drift)
}

/// Follow the flow with an accumulated `θ` through `returns` crossings of
/// `{q1 = 0}` in the direction the start leaves it.
///
/// Returns the time of the first crossing, the states and accumulated
/// angles at each crossing, and `sign(q̇1)` at the start.
fn returns_with_angle(
    spec: &FieldSpec,
    start: Quaternion,
    returns: usize,
    opts: &Options,
) -> Result<(f64, Vec<(Quaternion, f64)>, f64)> {
    let sys = FnSystem(|_t: f64, y: &[f64; 5]| {
        let q = Quaternion::new(y[0], y[1], y[2], y[3]);
        let v = spec.eval(q);
        let w = (q.q2 * v.q3 - q.q3 * v.q2) / (q.q2 * q.q2 + q.q3 * q.q3);
        [v.q0, v.q1, v.q2, v.q3, w]
    });
    let dir = spec.eval(start).q1.signum();
    if dir == 0.0 {
        return Err(Error::InvalidArgument(format!("the flow is tangent to q1 = 0 at {start}")));
    }
    let crossing = if dir > 0.0 { Crossing::Rising } else { Crossing::Falling };
    let y0 = [start.q0, start.q1, start.q2, start.q3, 0.0];

    let first = EventSpec::new("return", |_t: f64, y: &[f64; 5]| y[1], crossing, EventAction::Terminate);
    let traj = integrate(&sys, y0, (0.0, 1e4), opts, &[first])?;
    if traj.termination != Termination::Event("return".into()) {
        return Err(Error::InvalidArgument(format!("no return to q1 = 0 from {start}")));
    }
    let period = traj.last().0;

    let ev = EventSpec::new("return", |_t: f64, y: &[f64; 5]| y[1], crossing, EventAction::Record);
    let traj = integrate(&sys, y0, (0.0, (returns as f64 + 0.5) * period), opts, &[ev])?;
    let hits: Vec<(Quaternion, f64)> =
        traj.events.iter().map(|e| (Quaternion::new(e.y[0], e.y[1], e.y[2], e.y[3]), e.y[4])).collect();
    if hits.len() < returns {
        return Err(Error::InvalidArgument(format!("only {} of {returns} returns recorded", hits.len())));
    }
    Ok((period, hits[..returns].to_vec(), dir))
}

fn cross_check(ts: &TorusSpec, start: Quaternion, classification: &Classification, expected: f64, loops: bool) -> Result<CrossCheck> {
    let spec = ts.field()?;
    let n = match classification {
        Classification::Periodic { q, .. } => *q as usize,
        _ => Q_MAX as usize,
    };
    let (return_time, hits, dir) = returns_with_angle(&spec, start, n, &Options::default())?;
    let (_, theta) = hits[n - 1];
    let measured_winding = if loops { theta / (2.0 * PI * n as f64) } else { theta / (2.0 * PI * n as f64 * dir) };
    let residuals: Vec<f64> = hits.iter().map(|(q, _)| (*q - start).norm()).collect();
    Ok(CrossCheck {
        return_time,
        returns: n,
        measured_winding,
        winding_error: (measured_winding - expected).abs(),
        closure_residual: matches!(classification, Classification::Periodic { .. }).then(|| residuals[n - 1]),
        min_return_residual: residuals.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Rotation number of a torus around the origin, with the return-map cross-check.
pub fn rotation_number(ts: &TorusSpec) -> Result<RotationResult> {
    let (radicand_min, g_min) = validate(ts)?;
    let quad = rotation_integral_unchecked(ts)?;
    if quad.abs_err >= 1e-10 {
        return Err(Error::QuadratureFailure(format!("error estimate {:e} above 1e-10", quad.abs_err)));
    }
    let classification = classify_default(quad.value);
    let start = ts.point(0.0, 0.0);
    let mut notes = Vec::new();
    let g_minus_max = -periodic_min(|phi| -ts.g_minus(phi));
    if g_minus_max > 0.0 {
        notes.push(format!("the -sqrt branch of G is positive somewhere (max {g_minus_max:e}) and is not used"));
    }
    let invariance_drift = invariance_drift(ts, start)?;
    let cross_check = cross_check(ts, start, &classification, 1.0 + quad.value, false)?;
    Ok(RotationResult {
        family: ts.family,
        h: ts.h,
        f: ts.f,
        c0: ts.c0,
        i_value: quad.value,
        abs_err: quad.abs_err,
        winding_ratio: 1.0 + quad.value,
        classification,
        method: RotationMethod::Quadrature,
        domain_margin: ts.domain_margin(),
        g_min,
        radicand_min,
        invariance_drift,
        cross_check: Some(cross_check),
        notes,
    })
}

/// Tori of the cubic equation with `a = i`.
///
/// For `h < 0` the torus surrounds the origin and is handled like the
/// Bernoulli one. For `h > 2c0²` each level component is a loop in the
/// `(q0, q1)` plane around `±c0` times a circle in `θ`; the winding is the
/// angle `θ` gained along one loop, found by integration at two tolerances.
pub fn cubic_torus_analysis(ts: &TorusSpec) -> Result<RotationResult> {
    if ts.family != TorusFamily::Cubic {
        return Err(Error::InvalidArgument("cubic_torus_analysis needs a cubic torus".into()));
    }
    let (h, f, c0) = (ts.h, ts.f, ts.c0);
    let c2 = c0 * c0;
    if h >= 0.0 && h <= 2.0 * c2 {
        return Err(Error::DomainViolation(format!("h = {h} lies in [0, 2c0²] = [0, {}]", 2.0 * c2)));
    }
    if h < 0.0 {
        return rotation_number(ts);
    }
    if !(f > 0.0) {
        return Err(Error::DomainViolation(format!("f = {f} must be positive")));
    }
    // q1 = 0 crossings: x = q0² solves x² + (2f − h) x + f² + hf + h c0²/2 = 0
    let disc = h * (h - 8.0 * f - 2.0 * c2);
    if !(disc > 0.0) {
        return Err(Error::DomainViolation(format!("the level (h, f) = ({h}, {f}) is empty: h must exceed 8f + 2c0²")));
    }
    let x_plus = ((h - 2.0 * f) + disc.sqrt()) / 2.0;
    let start = Quaternion::new(x_plus.sqrt(), 0.0, f.sqrt(), 0.0);
    let spec = ts.field()?;

    let winding = |rtol: f64| -> Result<f64> {
        let (_, hits, _) = returns_with_angle(&spec, start, 1, &Options::with_tolerances(rtol, rtol * 1e-2))?;
        Ok(hits[0].1 / (2.0 * PI))
    };
    let (fine, coarse) = (winding(1e-12)?, winding(1e-10)?);
    let i_value = fine - 1.0;
    let classification = classify_default(i_value);
    let invariance_drift = invariance_drift(ts, start)?;
    let cross_check = cross_check(ts, start, &classification, fine, true)?;
    Ok(RotationResult {
        family: ts.family,
        h,
        f,
        c0,
        i_value,
        abs_err: (fine - coarse).abs(),
        winding_ratio: fine,
        classification,
        method: RotationMethod::Loop,
        domain_margin: disc,
        g_min: x_plus,
        radicand_min: disc,
        invariance_drift,
        cross_check: Some(cross_check),
        notes: vec!["loop torus: I is the theta winding per loop minus one".into()],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub f: f64,
    pub c0: f64,
    pub target: String,
    pub h: f64,
    #[serde(rename = "I")]
    pub i_value: f64,
    pub residual: f64,
    /// `(h, I)` samples of the bracketing scan.
    pub scan: Vec<(f64, f64)>,
    pub rotation: RotationResult,
}

/// Sample `I` on 100 in-domain levels, from the domain edge
/// `h = −f²/(2f + c0)` to `10⁶` beyond it on a log scale.
pub fn scan_rotation(f: f64, c0: f64) -> Result<Vec<(f64, f64)>> {
    if !(f > 0.0 && 2.0 * f + c0 > 0.0) {
        return Err(Error::InvalidArgument(format!("scan needs f > 0 and 2f + c0 > 0, got f = {f}, c0 = {c0}")));
    }
    let edge = -f * f / (2.0 * f + c0);
    let unit = edge.abs().max(1.0);
    Ok((0..100)
        .filter_map(|k| {
            let h = edge - unit * 10f64.powf(-6.0 + 12.0 * k as f64 / 99.0);
            rotation_integral(&TorusSpec::bernoulli(h, f, c0)).ok().map(|r| (h, r.value))
        })
        .collect())
}

/// Level `h` with `I(h) = target`, by scanning and then the Illinois variant
/// of regula falsi.
pub fn solve_rotation(f: f64, c0: f64, target: f64) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let scan = scan_rotation(f, c0)?;
    let bracket = scan.windows(2).find(|w| (w[0].1 - target) * (w[1].1 - target) <= 0.0);
    let Some(w) = bracket else {
        let (lo, hi) = scan.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), s| (l.min(s.1), u.max(s.1)));
        return Err(Error::NoBracket(format!("I ranges over [{lo}, {hi}] on the scan, target {target} is outside")));
    };
    let eval = |h: f64| -> Result<f64> { Ok(rotation_integral(&TorusSpec::bernoulli(h, f, c0))?.value - target) };
    let (mut a, mut fa) = (w[0].0, w[0].1 - target);
    let (mut b, mut fb) = (w[1].0, w[1].1 - target);
    for _ in 0..200 {
        if fa.abs() < 1e-11 {
            return Ok((a, fa + target, scan));
        }
        if fb.abs() < 1e-11 {
            return Ok((b, fb + target, scan));
        }
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = eval(c)?;
        if fc * fb < 0.0 {
            (a, fa) = (b, fb);
        } else {
            fa *= 0.5;
        }
        (b, fb) = (c, fc);
    }
    Err(Error::NoBracket(format!("root finding did not reach |I - target| < 1e-11 (last {:e})", fb.abs())))
}

/// A torus of the Bernoulli equation filled with periodic orbits of rotation `target`.
pub fn periodic_torus_search(f: f64, c0: f64, target: Ratio<i64>) -> Result<SearchResult> {
    let value = *target.numer() as f64 / *target.denom() as f64;
    let (h, i_value, scan) = solve_rotation(f, c0, value)?;
    let rotation = rotation_number(&TorusSpec::bernoulli(h, f, c0))?;
    Ok(SearchResult { f, c0, target: target.to_string(), h, i_value, residual: (i_value - value).abs(), scan, rotation })
}
