//! Purely imaginary `a`: the invariant plane through the real axis carries
//! isochronous centres at the origin and at the roots of `zⁿ⁻¹ = c0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{planar_return, require};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Regime, StructureCase};
use crate::integrator::complex_roots;

/// Start radii, as fractions of `|c0|^{1/(n−1)}`, at which return times are measured.
pub const RETURN_RADII: [f64; 2] = [0.01, 0.1];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTime {
    pub radius: f64,
    pub period: f64,
    pub rel_err: f64,
    /// Distance from the start after one return.
    pub closure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Center {
    /// Location in normal-frame plane coordinates `q0 + i q1`.
    pub location: Complex64,
    pub predicted_period: f64,
    /// `+1` counter-clockwise, `−1` clockwise, as predicted by the linearization.
    pub orientation: i8,
    pub returns: Vec<ReturnTime>,
}

impl Center {
    pub fn max_rel_err(&self) -> f64 {
        self.returns.iter().map(|r| r.rel_err).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsochronousReport {
    pub family: String,
    pub spec: FieldSpec,
    pub regime: Regime,
    pub origin: Center,
    pub outer: Vec<Center>,
    pub opposite_orientation: bool,
    pub max_rel_err: f64,
}

/// Locate the centres and measure return times around each.
pub fn isochronous_centers(spec: &FieldSpec) -> Result<IsochronousReport> {
    require(spec, &[StructureCase::BernoulliImaginaryA], "isochronous centres")?;
    let nf = spec.normal_form();
    let (a1, c0, n) = (nf.a().q1, nf.c0(), nf.n());
    if c0 == 0.0 {
        return Err(Error::WrongRegime("isochronous centres need c0 != 0".into()));
    }
    let omega = a1 * c0;
    let scale = c0.abs().powf(1.0 / (n - 1) as f64);

    let origin_dir = omega.signum() as i8;
    let origin = measure(spec, Complex64::new(0.0, 0.0), 2.0 * PI / omega.abs(), origin_dir, scale)?;
    let outer = complex_roots(n - 1, c0)
        .into_iter()
        .map(|z| measure(spec, z, 2.0 * PI / ((n - 1) as f64 * omega.abs()), -origin_dir, scale))
        .collect::<Result<Vec<_>>>()?;

    let max_rel_err = outer.iter().map(Center::max_rel_err).fold(origin.max_rel_err(), f64::max);
    Ok(IsochronousReport {
        family: spec.family().to_string(),
        spec: *spec,
        regime: spec.regime(),
        opposite_orientation: outer.iter().all(|c| c.orientation == -origin.orientation),
        origin,
        outer,
        max_rel_err,
    })
}

fn measure(spec: &FieldSpec, center: Complex64, predicted: f64, orientation: i8, scale: f64) -> Result<Center> {
    let mut returns = Vec::new();
    for frac in RETURN_RADII {
        let radius = frac * scale;
        // start on the outward ray away from the other centres
        let beta = center.arg() + if center.norm() == 0.0 { PI / 7.0 } else { 0.0 };
        let start = center + Complex64::from_polar(radius, beta);
        let (t, closure) = planar_return(spec, center, start, orientation, 0.25 * predicted, 3.0 * predicted)?;
        returns.push(ReturnTime { radius, period: t, rel_err: (t - predicted).abs() / predicted, closure });
    }
    Ok(Center { location: center, predicted_period: predicted, orientation, returns })
}
