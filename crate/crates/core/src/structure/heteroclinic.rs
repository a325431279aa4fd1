//! Heteroclinic connections through invariant hypersurfaces: the plane
//! `L = 0` of the quadratic equation with real `a` and nonreal `c`, and the
//! hyperboloid `L = 0` of the cubic equation.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require, rng};
use crate::error::Result;
use crate::field::{FieldSpec, Regime, StructureCase};
use crate::integrator::{probe_field, Direction, Options, ProbeOutcome, Target};
use crate::quat::Quaternion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicOrbit {
    pub start: Quaternion,
    pub forward: ProbeOutcome,
    pub backward: ProbeOutcome,
    /// Index into the report's equilibria.
    pub expected_forward: usize,
    pub expected_backward: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicReport {
    pub family: String,
    pub spec: FieldSpec,
    pub regime: Regime,
    pub equilibria: Vec<Quaternion>,
    pub orbits: Vec<HeteroclinicOrbit>,
    /// Largest terminal distance over all converged probes.
    pub max_terminal_distance: f64,
    pub ok: bool,
}

fn hits(o: &ProbeOutcome, target: usize) -> bool {
    matches!(o, ProbeOutcome::Converged { target: t, .. } if *t == target)
}

fn terminal(o: &ProbeOutcome) -> f64 {
    match o {
        ProbeOutcome::Converged { residual, .. } => *residual,
        ProbeOutcome::Escaped { .. } => f64::INFINITY,
        ProbeOutcome::Undecided { distance } => *distance,
    }
}

fn run(
    spec: &FieldSpec,
    equilibria: Vec<Quaternion>,
    starts: Vec<(Quaternion, usize, usize)>,
    t_max: f64,
) -> Result<HeteroclinicReport> {
    let targets: Vec<Target> = equilibria.iter().map(|e| Target::Point(*e)).collect();
    let opts = Options::default();
    let orbits = starts
        .par_iter()
        .map(|&(start, expected_forward, expected_backward)| {
            let forward = probe_field(spec, start, Direction::Forward, &targets, t_max, &opts)?;
            let backward = probe_field(spec, start, Direction::Backward, &targets, t_max, &opts)?;
            let ok = hits(&forward, expected_forward) && hits(&backward, expected_backward);
            Ok(HeteroclinicOrbit { start, forward, backward, expected_forward, expected_backward, ok })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_terminal_distance =
        orbits.iter().flat_map(|o| [terminal(&o.forward), terminal(&o.backward)]).fold(0.0, f64::max);
    Ok(HeteroclinicReport {
        family: spec.family().to_string(),
        spec: *spec,
        regime: spec.regime(),
        equilibria,
        ok: orbits.iter().all(|o| o.ok),
        orbits,
        max_terminal_distance,
    })
}

/// Quadratic equation, real `a`, `c` off the real axis: orbits starting on
/// the plane `L = 0` run between the origin and `c`, towards `c` in forward
/// time when `a c0 > 0`.
pub fn quadratic_spiral_report(spec: &FieldSpec, starts: usize, seed: u64) -> Result<HeteroclinicReport> {
    require(spec, &[StructureCase::QuadraticSpiral], "the plane L = 0")?;
    let nf = spec.normal_form();
    let (a, c) = (nf.a().q0, nf.c());
    let c_abs = c.norm();
    let toward_c = a * c.q0 > 0.0;
    let (fwd, bwd) = if toward_c { (1, 0) } else { (0, 1) };
    let mut r = rng(seed);
    let pts = (0..starts)
        .map(|_| {
            // c/2 plus a step along the line c0 p0 + c1 p1 = |c|²/2, plus a transverse part
            let s = r.random_range(-1.0..1.0) * c_abs;
            let p = Quaternion::new(
                c.q0 / 2.0 - s * c.q1 / c_abs,
                c.q1 / 2.0 + s * c.q0 / c_abs,
                r.random_range(-1.0..1.0) * c_abs,
                r.random_range(-1.0..1.0) * c_abs,
            );
            (spec.from_normal(p), fwd, bwd)
        })
        .collect();
    let t_max = 60.0 / (a * c.q0).abs();
    run(spec, vec![Quaternion::ZERO, spec.from_normal(c)], pts, t_max)
}

/// Cubic equation with `a + ā ≠ 0`: orbits starting on the two sheets of
/// the hyperboloid `L = 0` run from the origin to `±c0` when `a0 < 0`, and
/// the other way round when `a0 > 0`.
pub fn cubic_heteroclinic_report(spec: &FieldSpec, starts: usize, seed: u64) -> Result<HeteroclinicReport> {
    require(spec, &[StructureCase::CubicHeteroclinic], "the hyperboloid L = 0")?;
    let nf = spec.normal_form();
    let (a0, c0) = (nf.a().q0, nf.c0());
    let mut r = rng(seed);
    let pts = (0..starts)
        .map(|k| {
            // alternate between the sheets q0 > 0 and q0 < 0
            let sheet = if k % 2 == 0 { 1.0 } else { -1.0 };
            let rad = r.random_range(0.0..1.0) * c0.abs();
            let (theta, phi) = (r.random_range(0.0..PI), r.random_range(0.0..2.0 * PI));
            let imag = [rad * theta.cos(), rad * theta.sin() * phi.cos(), rad * theta.sin() * phi.sin()];
            let p0 = sheet * (rad * rad + c0 * c0 / 2.0).sqrt();
            let p = Quaternion::new(p0, imag[0], imag[1], imag[2]);
            let outer = if sheet > 0.0 { 1 } else { 2 };
            let (fwd, bwd) = if a0 < 0.0 { (outer, 0) } else { (0, outer) };
            (spec.from_normal(p), fwd, bwd)
        })
        .collect();
    let t_max = 60.0 / (a0 * c0 * c0).abs();
    let c = Quaternion::real(c0);
    run(spec, vec![Quaternion::ZERO, c, -c], pts, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spiral_towards_c() {
        let s = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::new(1.0, 0.5, 0.0, 0.0), 2).unwrap();
        let rep = quadratic_spiral_report(&s, 4, 3).unwrap();
        assert!(rep.ok, "{rep:#?}");
        assert!(rep.orbits.iter().all(|o| o.expected_forward == 1));
        assert!(rep.max_terminal_distance < 1e-4);
    }

    #[test]
    fn spiral_reversed_and_rotated() {
        let s = FieldSpec::bernoulli(Quaternion::real(-0.5), Quaternion::new(1.0, 0.0, 0.3, -0.4), 2).unwrap();
        let rep = quadratic_spiral_report(&s, 4, 4).unwrap();
        assert!(rep.ok, "{rep:#?}");
        assert!(rep.orbits.iter().all(|o| o.expected_forward == 0));
    }

    #[test]
    fn cubic_sheets() {
        for a in [Quaternion::real(-1.0), Quaternion::new(0.5, 0.3, 0.0, 0.0)] {
            let s = FieldSpec::cubic(a, 1.0).unwrap();
            let rep = cubic_heteroclinic_report(&s, 4, 5).unwrap();
            assert!(rep.ok, "{rep:#?}");
        }
    }

    #[test]
    fn wrong_regimes() {
        let s = FieldSpec::cubic(Quaternion::I, 1.0).unwrap();
        assert!(cubic_heteroclinic_report(&s, 1, 0).is_err());
        let s = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::ONE, 2).unwrap();
        assert!(quadratic_spiral_report(&s, 1, 0).is_err());
    }
}
