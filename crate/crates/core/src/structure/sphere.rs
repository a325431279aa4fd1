//! Quadratic equation with real `a` and purely imaginary `c = c1 i`: the
//! plane `{q2 = q3 = 0}` holds two period annuli around `0` and `c`, and the
//! sphere `{q0 = 0, |q|² = c1 q1}` is filled with periodic orbits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{planar_return, require, rng};
use crate::error::Result;
use crate::field::{FieldSpec, Regime, StructureCase};
use crate::integrator::{integrate, Options};
use crate::quat::Quaternion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Complex64,
    pub orientation: i8,
    pub linear_period: f64,
    /// `(radius, return time, closure)` per sampled orbit.
    pub returns: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereReport {
    pub family: String,
    pub spec: FieldSpec,
    pub regime: Regime,
    pub equilibria: Vec<Quaternion>,
    /// Largest `|v2| + |v3|` of the field on the plane `{q2 = q3 = 0}`.
    pub plane_tangency: f64,
    pub annuli: Vec<Annulus>,
    /// Largest departure from the sphere along sampled orbits.
    pub sphere_drift: f64,
    /// Largest relative change of `q2² + q3²` along sampled sphere orbits.
    pub sphere_integral_drift: f64,
    /// Largest `|q(T) − q(0)|` after one period `2π/|a c1|` on the sphere.
    pub sphere_closure: f64,
    pub sphere_period: f64,
    pub ok: bool,
}

pub fn sphere_and_annuli_report(spec: &FieldSpec, samples: usize, seed: u64) -> Result<SphereReport> {
    require(spec, &[StructureCase::QuadraticSphere], "the invariant sphere")?;
    let nf = spec.normal_form();
    let (a, c1) = (nf.a().q0, nf.c().q1);
    let period = 2.0 * PI / (a * c1).abs();
    let mut r = rng(seed);

    let mut plane_tangency: f64 = 0.0;
    for _ in 0..samples.max(100) {
        let p = Quaternion::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), 0.0, 0.0) * c1.abs();
        let v = nf.eval(p);
        plane_tangency = plane_tangency.max(v.q2.abs() + v.q3.abs());
    }

    let c = Complex64::new(0.0, c1);
    let origin_dir = (a * c1).signum() as i8;
    let mut annuli = Vec::new();
    for (center, other, orientation) in [(Complex64::new(0.0, 0.0), c, origin_dir), (c, Complex64::new(0.0, 0.0), -origin_dir)] {
        let away = (center - other) / (center - other).norm();
        let mut returns = Vec::new();
        for frac in [0.1, 0.3] {
            let start = center + away * (frac * c1.abs());
            let (t, closure) = planar_return(spec, center, start, orientation, 0.25 * period, 5.0 * period)?;
            returns.push((frac * c1.abs(), t, closure));
        }
        annuli.push(Annulus { center, orientation, linear_period: period, returns });
    }

    let opts = Options::default();
    let (mut sphere_drift, mut sphere_integral_drift, mut sphere_closure) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        // a point on the sphere of radius |c1|/2 around c/2, away from its poles
        let polar = r.random_range(0.2..PI - 0.2);
        let az = r.random_range(0.0..2.0 * PI);
        let half = c1 / 2.0;
        let p = Quaternion::new(0.0, half + half * polar.cos(), half.abs() * polar.sin() * az.cos(), half.abs() * polar.sin() * az.sin());
        let q0 = spec.from_normal(p);
        let f0 = p.q2 * p.q2 + p.q3 * p.q3;
        let traj = integrate(spec, q0.to_array(), (0.0, 20.0), &opts, &[])?;
        for y in &traj.y {
            let p = spec.to_normal(Quaternion::from_array(*y));
            sphere_drift = sphere_drift.max(p.q0.abs()).max((p.norm_sq() - c1 * p.q1).abs());
            sphere_integral_drift = sphere_integral_drift.max((p.q2 * p.q2 + p.q3 * p.q3 - f0).abs() / f0);
        }
        let traj = integrate(spec, q0.to_array(), (0.0, period), &opts, &[])?;
        sphere_closure = sphere_closure.max((Quaternion::from_array(traj.last().1) - q0).norm());
    }

    let ok = plane_tangency < 1e-12
        && sphere_drift < 1e-8
        && sphere_integral_drift < 1e-8
        && sphere_closure < 1e-6
        && annuli.iter().flat_map(|a| &a.returns).all(|r| r.2 < 1e-6);
    Ok(SphereReport {
        family: spec.family().to_string(),
        spec: *spec,
        regime: spec.regime(),
        equilibria: vec![Quaternion::ZERO, spec.from_normal(nf.c())],
        plane_tangency,
        annuli,
        sphere_drift,
        sphere_integral_drift,
        sphere_closure,
        sphere_period: period,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_and_annuli() {
        let s = FieldSpec::bernoulli(Quaternion::real(1.5), Quaternion::new(0.0, 1.0, 0.0, 0.0), 2).unwrap();
        let rep = sphere_and_annuli_report(&s, 5, 1).unwrap();
        assert!(rep.ok, "{rep:#?}");
        // the Riccati equation on the plane linearizes under w = 1/z, so the
        // annuli are isochronous
        for a in &rep.annuli {
            for (_, t, _) in &a.returns {
                assert!((t - rep.sphere_period).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rotated_frame() {
        let s = FieldSpec::bernoulli(Quaternion::real(-1.0), Quaternion::new(0.0, 0.0, 1.2, -0.5), 2).unwrap();
        let rep = sphere_and_annuli_report(&s, 3, 2).unwrap();
        assert!(rep.ok, "{rep:#?}");
    }

    #[test]
    fn wrong_regime() {
        let s = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::new(1.0, 1.0, 0.0, 0.0), 2).unwrap();
        assert!(sphere_and_annuli_report(&s, 1, 0).is_err());
    }
}
