//! `a` with nonzero real and imaginary parts, real `c`: orbits crossing the
//! hypersurface `P = {S = 0}` run from the origin to a root of `qⁿ⁻¹ = c0`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require, rng};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Regime, StructureCase};
use crate::integrator::{probe_field, Direction, Options, ProbeOutcome, Target};
use crate::invariants::{IntegralDescriptor, IntegralId};
use crate::quat::Quaternion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingOrbit {
    pub start: Quaternion,
    pub forward: ProbeOutcome,
    pub backward: ProbeOutcome,
    /// One limit is the origin and the other a root of `qⁿ⁻¹ = c0`.
    pub heteroclinic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelGap {
    pub points: usize,
    /// Points where `Hn` falls inside `(0, c0)`.
    pub in_gap: usize,
    /// Closest value to the gap seen from below and from above.
    pub nearest_below: f64,
    pub nearest_above: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseBReport {
    pub family: String,
    pub spec: FieldSpec,
    pub regime: Regime,
    /// The origin and the roots of `qⁿ⁻¹ = c0`.
    pub equilibria: Vec<Target>,
    /// Points sampled on `P` whose derivative of `S` has the sign of `a + ā`.
    pub transversal: usize,
    /// Largest relative gap between `dS/dt` and `(n−1)(a+ā)|q|^{2(n−1)}` on `P`.
    pub transversality_residual: f64,
    pub orbits: Vec<CrossingOrbit>,
    pub heteroclinic: usize,
    pub level_gap: Option<LevelGap>,
    pub ok: bool,
}

/// A point of `P` on the ray through the unit quaternion `u`, if the ray meets `P`.
pub fn point_on_p(spec: &FieldSpec, u: Quaternion) -> Option<Quaternion> {
    let nf = spec.normal_form();
    let m = nf.n() - 1;
    let re = u.pow(m).q0;
    let ratio = nf.c0() / (2.0 * re);
    (ratio > 0.0 && ratio.is_finite()).then(|| spec.from_normal(u * ratio.powf(1.0 / m as f64)))
}

/// Count points where `Hn` lands in `(0, c0)`.
pub fn level_gap_check(spec: &FieldSpec, points: usize, seed: u64) -> Result<LevelGap> {
    let hn = IntegralDescriptor::new(IntegralId::Hn, spec)?;
    let c0 = spec.c0();
    if c0 <= 0.0 {
        return Err(Error::InvalidArgument(format!("the level gap (0, c0) is empty for c0 = {c0}")));
    }
    let mut r = rng(seed);
    let (mut in_gap, mut nearest_below, mut nearest_above) = (0, f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..points {
        let q = Quaternion::from_array(std::array::from_fn(|_| r.random_range(-2.0..2.0)));
        let Ok(h) = hn.value(q) else { continue };
        if h > 0.0 && h < c0 {
            in_gap += 1;
        } else if h <= 0.0 {
            nearest_below = nearest_below.max(h);
        } else {
            nearest_above = nearest_above.min(h);
        }
    }
    Ok(LevelGap { points, in_gap, nearest_below, nearest_above })
}

pub fn case_b_region_report(spec: &FieldSpec, samples: usize, seed: u64) -> Result<CaseBReport> {
    require(spec, &[StructureCase::BernoulliMixedA], "the hypersurface P")?;
    let nf = spec.normal_form();
    let (a0, c0, n) = (nf.a().q0, nf.c0(), nf.n());
    let s = IntegralDescriptor::new(IntegralId::S, spec)?;

    let mut r = rng(seed);
    let mut starts = Vec::new();
    while starts.len() < samples {
        let u = Quaternion::from_array(std::array::from_fn(|_| r.random_range(-1.0..1.0)));
        if u.norm() < 1e-3 {
            continue;
        }
        if let Some(p) = point_on_p(spec, u / u.norm()) {
            starts.push(p);
        }
    }

    let mut transversal = 0;
    let mut transversality_residual: f64 = 0.0;
    for q in &starts {
        let lie = s.lie_derivative(*q)?;
        let expect = s.zero_set_derivative(*q)?;
        if lie.signum() == a0.signum() {
            transversal += 1;
        }
        transversality_residual = transversality_residual.max((lie - expect).abs() / expect.abs().max(1e-300));
    }

    let targets = [Target::Point(Quaternion::ZERO), Target::PowerRoots { exponent: n - 1, value: c0 }];
    let t_max = 60.0 / (a0 * c0).abs();
    let opts = Options::default();
    let orbits = starts
        .par_iter()
        .map(|q| {
            let forward = probe_field(spec, *q, Direction::Forward, &targets, t_max, &opts)?;
            let backward = probe_field(spec, *q, Direction::Backward, &targets, t_max, &opts)?;
            let at = |o: &ProbeOutcome, k: usize| matches!(o, ProbeOutcome::Converged { target, .. } if *target == k);
            let heteroclinic = (at(&forward, 0) && at(&backward, 1)) || (at(&forward, 1) && at(&backward, 0));
            Ok(CrossingOrbit { start: *q, forward, backward, heteroclinic })
        })
        .collect::<Result<Vec<_>>>()?;
    let heteroclinic = orbits.iter().filter(|o| o.heteroclinic).count();

    let level_gap = if c0 > 0.0 { Some(level_gap_check(spec, 10_000, seed)?) } else { None };
    let ok = transversal == samples
        && transversality_residual < 1e-9
        && heteroclinic == samples
        && level_gap.as_ref().is_none_or(|g| g.in_gap == 0);
    Ok(CaseBReport {
        family: spec.family().to_string(),
        spec: *spec,
        regime: spec.regime(),
        equilibria: targets.to_vec(),
        transversal,
        transversality_residual,
        orbits,
        heteroclinic,
        level_gap,
        ok,
    })
}
