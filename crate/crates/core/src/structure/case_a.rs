//! Real `a`, real `c`: the foliation by invariant planes and the planar
//! complex flow `ż = a (c0 z − zⁿ)` on each leaf.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require, rng};
use crate::error::Result;
use crate::field::{FieldSpec, Regime, StructureCase};
use crate::integrator::{complex_roots, integrate, limit_set_probe, Direction, OdeSystem, Options, ProbeOutcome};
use crate::invariants::{IntegralDescriptor, IntegralId};
use crate::quat::Quaternion;

/// The planar complex equation on the leaf `{q2 = h2 q1, q3 = h3 q1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseAReduction {
    pub a0: f64,
    pub c0: f64,
    pub n: u32,
    pub h2: f64,
    pub h3: f64,
    /// `√(1 + h2² + h3²)`, the factor between `q1` and `Im z`.
    pub scale: f64,
}

impl CaseAReduction {
    pub fn new(spec: &FieldSpec, h2: f64, h3: f64) -> Result<Self> {
        require(spec, &[StructureCase::BernoulliRealA], "the planar reduction")?;
        Ok(CaseAReduction {
            a0: spec.a().q0,
            c0: spec.c0(),
            n: spec.n(),
            h2,
            h3,
            scale: (1.0 + h2 * h2 + h3 * h3).sqrt(),
        })
    }

    pub fn embed(&self, z: Complex64) -> Quaternion {
        let q1 = z.im / self.scale;
        Quaternion::new(z.re, q1, self.h2 * q1, self.h3 * q1)
    }

    pub fn project(&self, q: Quaternion) -> Complex64 {
        Complex64::new(q.q0, q.q1 * self.scale)
    }

    pub fn field(&self, z: Complex64) -> Complex64 {
        (z * self.c0 - z.powu(self.n)) * self.a0
    }

    /// The origin followed by the `n − 1` roots of `zⁿ⁻¹ = c0`.
    pub fn equilibria(&self) -> Vec<Complex64> {
        let mut eq = vec![Complex64::new(0.0, 0.0)];
        eq.extend(complex_roots(self.n - 1, self.c0));
        eq
    }

    /// Directions of the `n − 1` invariant rays that join the origin to
    /// infinity without meeting another equilibrium: `e^{i(n−1)α} = −sign(c0)`.
    pub fn escape_ray_angles(&self) -> Vec<f64> {
        let m = (self.n - 1) as f64;
        let offset = if self.c0 > 0.0 { PI } else { 0.0 };
        (0..self.n - 1).map(|k| (offset + 2.0 * PI * k as f64) / m).collect()
    }
}

impl OdeSystem<2> for CaseAReduction {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> [f64; 2] {
        let v = self.field(Complex64::new(y[0], y[1]));
        [v.re, v.im]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayOrbit {
    pub start: Complex64,
    pub forward: ProbeOutcome,
    pub backward: ProbeOutcome,
    pub as_expected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseAReport {
    pub family: String,
    pub spec: FieldSpec,
    pub regime: Regime,
    pub equilibria: Vec<Complex64>,
    /// `true` when the origin repels, i.e. `a c0 > 0`.
    pub origin_repelling: bool,
    /// Rays joining the origin and infinity.
    pub escape_rays: Vec<RayOrbit>,
    /// Rays joining each nonzero equilibrium and infinity.
    pub outer_rays: Vec<RayOrbit>,
    pub generic_samples: usize,
    /// Generic orbits whose limits are the origin on one side and a nonzero
    /// equilibrium on the other.
    pub generic_origin_to_root: usize,
    /// Largest distance between the projected 4D flow and the planar flow.
    pub dual_integration_residual: f64,
    pub leaf_integral_drift: f64,
    pub ok: bool,
}

fn converged_to(o: &ProbeOutcome, target: usize) -> bool {
    matches!(o, ProbeOutcome::Converged { target: t, .. } if *t == target)
}

fn converged_to_root(o: &ProbeOutcome) -> bool {
    matches!(o, ProbeOutcome::Converged { target, .. } if *target >= 1)
}

fn escaped(o: &ProbeOutcome) -> bool {
    matches!(o, ProbeOutcome::Escaped { .. })
}

/// Endpoint structure of the planar flow together with a 4D cross-check.
pub fn classify_case_a(spec: &FieldSpec, samples: usize, seed: u64) -> Result<CaseAReport> {
    let red = CaseAReduction::new(spec, 0.0, 0.0)?;
    let eq = red.equilibria();
    let radius = red.c0.abs().powf(1.0 / (red.n - 1) as f64);
    let repelling = red.a0 * red.c0 > 0.0;
    // the direction in which generic orbits approach the nonzero equilibria
    let (to_root, to_origin) =
        if repelling { (Direction::Forward, Direction::Backward) } else { (Direction::Backward, Direction::Forward) };
    let t_max = 50.0 / (red.a0 * red.c0).abs();
    let opts = Options::default();

    let distance = |y: &[f64; 2]| {
        let z = Complex64::new(y[0], y[1]);
        eq.iter()
            .enumerate()
            .map(|(i, e)| (i, (z - e).norm()))
            .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
    };
    let probe = |z: Complex64, dir: Direction| limit_set_probe(&red, [z.re, z.im], dir, distance, t_max, &opts);
    let both = |z: Complex64| -> Result<(ProbeOutcome, ProbeOutcome)> {
        Ok((probe(z, Direction::Forward)?, probe(z, Direction::Backward)?))
    };
    let pick = |fwd: ProbeOutcome, bwd: ProbeOutcome, d: Direction| if d == Direction::Forward { fwd } else { bwd };

    let mut escape_rays = Vec::new();
    for alpha in red.escape_ray_angles() {
        let start = Complex64::from_polar(0.5 * radius, alpha);
        let (forward, backward) = both(start)?;
        let as_expected =
            escaped(&pick(forward.clone(), backward.clone(), to_root)) && converged_to(&pick(forward.clone(), backward.clone(), to_origin), 0);
        escape_rays.push(RayOrbit { start, forward, backward, as_expected });
    }

    let mut outer_rays = Vec::new();
    for (k, root) in eq.iter().enumerate().skip(1) {
        let start = root * 2.0;
        let (forward, backward) = both(start)?;
        let as_expected =
            converged_to(&pick(forward.clone(), backward.clone(), to_root), k) && escaped(&pick(forward.clone(), backward.clone(), to_origin));
        outer_rays.push(RayOrbit { start, forward, backward, as_expected });
    }

    let mut r = rng(seed);
    let starts: Vec<Complex64> = (0..samples)
        .map(|_| Complex64::from_polar(radius * r.random_range(0.05..1.5), r.random_range(0.0..2.0 * PI)))
        .collect();
    let generic: Vec<(ProbeOutcome, ProbeOutcome)> = starts.par_iter().map(|z| both(*z)).collect::<Result<_>>()?;
    let generic_origin_to_root = generic
        .iter()
        .filter(|(f, b)| {
            converged_to_root(&pick(f.clone(), b.clone(), to_root)) && converged_to(&pick(f.clone(), b.clone(), to_origin), 0)
        })
        .count();

    let (dual_integration_residual, leaf_integral_drift) = dual_check(spec, seed)?;

    let ok = escape_rays.iter().all(|r| r.as_expected)
        && outer_rays.iter().all(|r| r.as_expected)
        && generic_origin_to_root == samples
        && dual_integration_residual < 1e-8
        && leaf_integral_drift < 1e-8;
    Ok(CaseAReport {
        family: spec.family().to_string(),
        spec: *spec,
        regime: spec.regime(),
        equilibria: eq,
        origin_repelling: repelling,
        escape_rays,
        outer_rays,
        generic_samples: samples,
        generic_origin_to_root,
        dual_integration_residual,
        leaf_integral_drift,
        ok,
    })
}

/// Integrate the 4D flow from a point on a tilted leaf and the planar flow
/// from its projection for `T = 5`; returns the largest projected distance
/// and the drift of `H2`, `H3`.
pub fn dual_check(spec: &FieldSpec, seed: u64) -> Result<(f64, f64)> {
    let mut r = rng(seed ^ 0x5eed);
    let (h2, h3) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    let red = CaseAReduction::new(spec, h2, h3)?;
    let radius = red.c0.abs().powf(1.0 / (red.n - 1) as f64);
    let z0 = Complex64::from_polar(0.6 * radius, r.random_range(0.3..1.2));
    let q0 = red.embed(z0);
    let t_end = 5.0;
    let opts = Options::default();
    let full = integrate(spec, q0.to_array(), (0.0, t_end), &opts, &[])?;
    let planar = integrate(&red, [z0.re, z0.im], (0.0, t_end), &opts, &[])?;
    let h2d = IntegralDescriptor::new(IntegralId::H2, spec)?;
    let h3d = IntegralDescriptor::new(IntegralId::H3, spec)?;
    let mut worst: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for (t, y) in full.t.iter().zip(&full.y) {
        let q = Quaternion::from_array(*y);
        let Some(p) = planar.dense_eval(*t) else { continue };
        worst = worst.max((red.project(q) - Complex64::new(p[0], p[1])).norm());
        drift = drift.max((h2d.value(q)? - h2).abs() / (1.0 + h2.abs()));
        drift = drift.max((h3d.value(q)? - h3).abs() / (1.0 + h3.abs()));
    }
    Ok((worst, drift))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64, c0: f64, n: u32) -> FieldSpec {
        FieldSpec::bernoulli(Quaternion::real(a), Quaternion::real(c0), n).unwrap()
    }

    #[test]
    fn embedding_on_the_flat_leaf_is_the_identity() {
        let red = CaseAReduction::new(&spec(1.0, 1.0, 3), 0.0, 0.0).unwrap();
        let z = Complex64::new(0.3, -0.7);
        assert_eq!(red.embed(z), Quaternion::new(0.3, -0.7, 0.0, 0.0));
        assert_eq!(red.project(red.embed(z)), z);
    }

    #[test]
    fn equilibria_positions() {
        let red = CaseAReduction::new(&spec(1.0, 1.0, 2), 0.0, 0.0).unwrap();
        let eq = red.equilibria();
        assert_eq!(eq.len(), 2);
        assert!((eq[1] - 1.0).norm() < 1e-15);

        let red = CaseAReduction::new(&spec(1.0, -1.0, 2), 0.0, 0.0).unwrap();
        assert!((red.equilibria()[1] + 1.0).norm() < 1e-15);

        let red = CaseAReduction::new(&spec(1.0, 1.0, 3), 0.0, 0.0).unwrap();
        let eq = red.equilibria();
        assert!((eq[1] - 1.0).norm() < 1e-15 && (eq[2] + 1.0).norm() < 1e-15);
        for z in eq {
            assert!(red.field(z).norm() < 1e-14);
        }
    }

    #[test]
    fn wrong_regime() {
        let s = FieldSpec::bernoulli(Quaternion::I, Quaternion::ONE, 2).unwrap();
        assert!(CaseAReduction::new(&s, 0.0, 0.0).is_err());
    }

    #[test]
    fn quadratic_endpoints() {
        let rep = classify_case_a(&spec(1.0, 1.0, 2), 6, 1).unwrap();
        assert!(rep.origin_repelling);
        assert_eq!(rep.escape_rays.len(), 1);
        assert!(rep.ok, "{rep:#?}");
    }

    #[test]
    fn cubic_endpoints_with_reversed_orientation() {
        let rep = classify_case_a(&spec(-0.5, 1.0, 3), 6, 2).unwrap();
        assert!(!rep.origin_repelling);
        assert_eq!(rep.escape_rays.len(), 2);
        assert_eq!(rep.outer_rays.len(), 2);
        assert!(rep.ok, "{rep:#?}");
    }
}
