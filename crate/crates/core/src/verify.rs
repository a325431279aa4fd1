//! Randomized residual checks of every identity that applies to a spec.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Regime, StructureCase};
use crate::integrator::{integrate, Options, Termination};
use crate::invariants::{cofactor_residual, Hyperplane, IntegralDescriptor, IntegralId, IntegralKind, PoissonStructure};
use crate::quat::Quaternion;

/// Threshold for Lie-derivative identities, relative to `1 + |∇I| |field|`.
pub const IDENTITY_TOL: f64 = 1e-9;
pub const COFACTOR_TOL: f64 = 1e-10;
pub const DRIFT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub points: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: String, points: usize, max_residual: f64, threshold: f64) -> Self {
        // an identity never evaluated has not been verified
        let pass = points > 0 && max_residual < threshold;
        IdentityCheck { name, points, max_residual, threshold, pass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: String,
    pub spec: FieldSpec,
    pub regime: Regime,
    pub seed: u64,
    pub points: usize,
    pub identities: Vec<IdentityCheck>,
    pub pass: bool,
}

pub fn random_point(rng: &mut impl Rng, scale: f64) -> Quaternion {
    Quaternion::from_array(std::array::from_fn(|_| rng.random_range(-scale..scale)))
}

/// Newton steps along the gradient onto `{I = 0}`.
fn project_to_zero_set(d: &IntegralDescriptor, mut x: Quaternion) -> Option<Quaternion> {
    for _ in 0..50 {
        let v = d.value(x).ok()?;
        if v.abs() < 1e-14 * (1.0 + x.norm_sq()) {
            return Some(x);
        }
        let g = d.gradient(x).ok()?;
        let g2 = g.norm_sq();
        if g2 < 1e-20 {
            return None;
        }
        x = x - g * (v / g2);
    }
    None
}

/// `max |∇I · field − closed form| / (1 + |∇I| |field|)` over the points
/// where both sides are defined, with the number of such points.
fn lie_residual(d: &IntegralDescriptor, pts: &[Quaternion], zero_set: bool) -> (usize, f64) {
    let spec = d.spec();
    let mut used = 0;
    let mut worst: f64 = 0.0;
    for x in pts {
        let x = if zero_set {
            match project_to_zero_set(d, *x) {
                Some(y) => y,
                None => continue,
            }
        } else {
            *x
        };
        let expected = match d.kind() {
            _ if zero_set => d.zero_set_derivative(x),
            IntegralKind::Conserved => Ok(0.0),
            IntegralKind::Identity => d.closed_form_derivative(x),
        };
        let (Ok(lie), Ok(expected), Ok(g)) = (d.lie_derivative(x), expected, d.gradient(x)) else { continue };
        let scale = 1.0 + g.norm() * spec.eval(x).norm();
        worst = worst.max((lie - expected).abs() / scale);
        used += 1;
    }
    (used, worst)
}

/// Run every applicable identity on `points` random points in `[−1.5, 1.5]⁴`.
pub fn verify_identities(spec: &FieldSpec, points: usize, seed: u64) -> Result<VerifyReport> {
    let descriptors = IntegralDescriptor::applicable(spec);
    let case = spec.structure_case();
    if descriptors.is_empty() && case != StructureCase::BernoulliRealA {
        return Err(Error::WrongRegime(format!("no identities are known for {} in case {case:?}", spec.family())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Quaternion> = (0..points).map(|_| random_point(&mut rng, 1.5)).collect();
    let mut identities = Vec::new();

    for d in &descriptors {
        let label = match d.kind() {
            IntegralKind::Conserved => "conserved",
            IntegralKind::Identity => "closed form",
        };
        let (used, worst) = lie_residual(d, &pts, false);
        identities.push(IdentityCheck::new(format!("d{}/dt ({label})", d.id()), used, worst, IDENTITY_TOL));
        if matches!(d.id(), IntegralId::S | IntegralId::LPlane | IntegralId::LHyp) {
            let (used, worst) = lie_residual(d, &pts, true);
            identities.push(IdentityCheck::new(format!("d{}/dt on {} = 0", d.id(), d.id()), used, worst, IDENTITY_TOL));
        }
    }

    if case == StructureCase::BernoulliRealA {
        for plane in Hyperplane::ALL {
            let worst = pts
                .iter()
                .map(|x| cofactor_residual(plane, spec, *x).map(f64::abs))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            identities.push(IdentityCheck::new(format!("cofactor {plane:?}"), pts.len(), worst, COFACTOR_TOL));
        }
    }

    if case == StructureCase::BernoulliImaginaryA {
        let ps = PoissonStructure::new(spec)?;
        let h = IntegralDescriptor::new(IntegralId::Hn, spec)?;
        let f = IntegralDescriptor::new(IntegralId::FCyl, spec)?;
        let (mut used, mut bracket, mut ham) = (0, 0.0f64, 0.0f64);
        for x in &pts {
            let Ok(m) = ps.matrix_normal(spec.to_normal(*x)) else { continue };
            let (Ok(hf), Ok(v), Ok(g)) = (ps.bracket(&h, &f, *x), ps.hamiltonian_field(*x), h.gradient(*x)) else {
                continue;
            };
            let scale = 1.0 + m.norm() * g.norm();
            bracket = bracket.max(hf.abs() / scale);
            ham = ham.max((v - spec.eval(*x)).norm() / scale);
            used += 1;
        }
        identities.push(IdentityCheck::new("{Hn, F_cyl}".into(), used, bracket, IDENTITY_TOL));
        identities.push(IdentityCheck::new("field = Hamiltonian vector field of Hn".into(), used, ham, IDENTITY_TOL));
    }

    Ok(VerifyReport {
        family: spec.family().to_string(),
        spec: *spec,
        regime: spec.regime(),
        seed,
        points,
        pass: identities.iter().all(|c| c.pass),
        identities,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub integral: IntegralId,
    pub starts: usize,
    pub t_end: f64,
    pub max_relative_drift: f64,
    /// Starts replaced because the orbit left every bounded set before `t_end`.
    pub escaped_and_redrawn: usize,
}

/// Relative drift of each conserved descriptor along `starts` trajectories
/// of length `t_end` from random points in `[−scale, scale]⁴`.
pub fn conservation_drift(
    spec: &FieldSpec,
    ids: &[IntegralId],
    starts: usize,
    t_end: f64,
    scale: f64,
    seed: u64,
) -> Result<Vec<DriftReport>> {
    let ds = ids.iter().map(|id| IntegralDescriptor::new(*id, spec)).collect::<Result<Vec<_>>>()?;
    if let Some(d) = ds.iter().find(|d| d.kind() != IntegralKind::Conserved) {
        return Err(Error::WrongRegime(format!("{} is not conserved for this spec", d.id())));
    }
    // integrals such as q2/q1 are ratios of decaying components, so the
    // error control has to stay relative down to tiny magnitudes
    let opts = Options::with_tolerances(1e-10, 1e-20);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = vec![0.0f64; ds.len()];
    let (mut done, mut redrawn, mut attempts) = (0, 0, 0);
    while done < starts {
        attempts += 1;
        if attempts > 100 * starts {
            return Err(Error::InvalidArgument("too many starts rejected".into()));
        }
        let x = random_point(&mut rng, scale);
        // start where every integral is finite and away from its singular set
        let Ok(v0) = ds.iter().map(|d| d.value(x)).collect::<Result<Vec<_>>>() else { continue };
        if v0.iter().any(|v| v.abs() > 1e3 || v.abs() < 1e-3) {
            continue;
        }
        let traj = integrate(spec, x.to_array(), (0.0, t_end), &opts, &[])?;
        if traj.termination != Termination::Completed {
            redrawn += 1;
            continue;
        }
        for y in &traj.y {
            let q = Quaternion::from_array(*y);
            for (k, d) in ds.iter().enumerate() {
                worst[k] = worst[k].max((d.value(q)? - v0[k]).abs() / v0[k].abs());
            }
        }
        done += 1;
    }
    Ok(ds
        .iter()
        .zip(worst)
        .map(|(d, w)| DriftReport { integral: d.id(), starts, t_end, max_relative_drift: w, escaped_and_redrawn: redrawn })
        .collect())
}
