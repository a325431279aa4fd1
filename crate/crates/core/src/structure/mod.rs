//! Structural analyses built on the field catalog, the invariants and
//! the integrator.
//!
//! Each analysis checks the regime it needs up front and returns a
//! serializable report with the measured residuals next to the predicted
//! values.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, StructureCase};
use crate::integrator::{integrate, Crossing, EventAction, EventSpec, Options, Termination};
use crate::quat::Quaternion;

pub mod case_a;
pub mod case_b;
pub mod closed_form;
pub mod heteroclinic;
pub mod isochronous;
pub mod spectrum;
pub mod sphere;
pub mod torus;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn require(spec: &FieldSpec, cases: &[StructureCase], what: &str) -> Result<()> {
    let case = spec.structure_case();
    if cases.contains(&case) {
        Ok(())
    } else {
        Err(Error::WrongRegime(format!("{what} needs {cases:?}, spec is {case:?}")))
    }
}

/// `(q0, q1)` as a complex number.
pub fn plane_coords(q: Quaternion) -> Complex64 {
    Complex64::new(q.q0, q.q1)
}

pub fn from_plane(z: Complex64) -> Quaternion {
    Quaternion::new(z.re, z.im, 0.0, 0.0)
}

/// Time of first return to the ray from `center` through `start`, both in
/// normal-frame plane coordinates, and the distance from the start then.
///
/// `orientation` is the expected sense of rotation; crossings before `gate`
/// are ignored so the start itself does not count.
pub(crate) fn planar_return(
    spec: &FieldSpec,
    center: Complex64,
    start: Complex64,
    orientation: i8,
    gate: f64,
    t_max: f64,
) -> Result<(f64, f64)> {
    let q0 = spec.from_normal(from_plane(start));
    let turn = (start - center).conj() / (start - center).norm();
    let event = EventSpec::new(
        "return",
        move |t: f64, y: &[f64; 4]| {
            if t < gate {
                return orientation as f64;
            }
            let z = plane_coords(spec.to_normal(Quaternion::from_array(*y)));
            ((z - center) * turn).im
        },
        if orientation > 0 { Crossing::Rising } else { Crossing::Falling },
        EventAction::Terminate,
    );
    let traj = integrate(spec, q0.to_array(), (0.0, t_max), &Options::default(), &[event])?;
    if traj.termination != Termination::Event("return".into()) {
        return Err(Error::InvalidArgument(format!("no return around {center} from {start} within t = {t_max}")));
    }
    let (t, y) = traj.last();
    Ok((t, (Quaternion::from_array(y) - q0).norm()))
}
