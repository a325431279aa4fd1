//! Explicit solutions of the quadratic equation with `a = i` and real `c`.
//!
//! With `z = q0 − c0/2 + i q1`, `q2 = r cos θ`, `q3 = r sin θ` the flow reads
//! `ż = −i z² + i R²`, `ṙ = 0`, `θ̇ = −2 Re z`, where `R = √(r² + c0²/4)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::integrator::{integrate, Options};
use crate::quat::Quaternion;

/// `(z, r, θ)` of a point.
pub fn to_torus_coords(q: Quaternion, c0: f64) -> (Complex64, f64, f64) {
    (Complex64::new(q.q0 - c0 / 2.0, q.q1), q.q2.hypot(q.q3), q.q3.atan2(q.q2))
}

pub fn from_torus_coords(z: Complex64, r: f64, theta: f64, c0: f64) -> Quaternion {
    Quaternion::new(z.re + c0 / 2.0, z.im, r * theta.cos(), r * theta.sin())
}

/// Period of every orbit with cylinder radius `r`.
pub fn period(r: f64, c0: f64) -> f64 {
    PI / (r * r + c0 * c0 / 4.0).sqrt()
}

/// Evaluate `(z(t), θ(t))` from `(z0, θ0)`.
///
/// `θ` is the continuous angle: `θ(t) = θ0 − 2Rt − 2 arg(D(t)/2R)` with
/// `D = z0 + R − (z0 − R) e^{−2iRt}`, where the argument is followed
/// continuously from `0` at `t = 0`.
pub fn closed_form_n2(z0: Complex64, r: f64, theta0: f64, t: f64, c0: f64) -> Result<(Complex64, f64)> {
    let big_r = (r * r + c0 * c0 / 4.0).sqrt();
    if big_r == 0.0 {
        return Err(Error::Domain("R = 0: the equation degenerates to ż = −iz²".into()));
    }
    let (a, b) = (z0 + big_r, z0 - big_r);
    // |w0| = 1 exactly when Re z0 = 0, i.e. on the invariant hyperplane
    if z0.re.abs() < 1e-12 * (1.0 + big_r) {
        return Err(Error::Domain(format!("z0 = {z0} lies on the hyperplane q0 = c0/2")));
    }
    let e = Complex64::from_polar(1.0, -2.0 * big_r * t);
    let den = a - b * e;
    let z = (a + b * e) * big_r / den;
    let w0 = b / a;
    let one = Complex64::new(1.0, 0.0);
    let arg_change = if w0.norm() < 1.0 {
        (one - w0 * e).arg() - (one - w0).arg()
    } else {
        -2.0 * big_r * t + (one - one / (w0 * e)).arg() - (one - one / w0).arg()
    };
    Ok((z, theta0 - 2.0 * big_r * t - 2.0 * arg_change))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCheck {
    pub c0: f64,
    pub starts: usize,
    pub t_end: f64,
    /// Largest distance between integration and the closed form on `[0, t_end]`.
    pub max_deviation: f64,
    /// Largest `|q(π/R) − q(0)|`.
    pub max_closure: f64,
}

/// Compare integration of the 4D system with the closed form from random
/// starts off the hyperplane `q0 = c0/2`.
pub fn closed_form_check(c0: f64, starts: usize, t_end: f64, seed: u64) -> Result<ClosedFormCheck> {
    let spec = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(c0), 2)?;
    let opts = Options::default();
    let mut r = rng(seed);
    let (mut max_deviation, mut max_closure) = (0.0f64, 0.0f64);
    for _ in 0..starts {
        let re = r.random_range(0.1..1.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
        let z0 = Complex64::new(re, r.random_range(-1.0..1.0));
        let (rad, th0) = (r.random_range(0.1..1.0), r.random_range(-PI..PI));
        let q0 = from_torus_coords(z0, rad, th0, c0);

        let traj = integrate(&spec, q0.to_array(), (0.0, t_end), &opts, &[])?;
        for (t, y) in traj.t.iter().zip(&traj.y) {
            let (z, th) = closed_form_n2(z0, rad, th0, *t, c0)?;
            let exact = from_torus_coords(z, rad, th, c0);
            max_deviation = max_deviation.max((Quaternion::from_array(*y) - exact).norm());
        }

        let per = period(rad, c0);
        let traj = integrate(&spec, q0.to_array(), (0.0, per), &opts, &[])?;
        max_closure = max_closure.max((Quaternion::from_array(traj.last().1) - q0).norm());
    }
    Ok(ClosedFormCheck { c0, starts, t_end, max_deviation, max_closure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn initial_value() {
        let z0 = Complex64::new(0.3, -0.4);
        let (z, th) = closed_form_n2(z0, 0.7, 1.1, 0.0, 1.0).unwrap();
        assert!((z - z0).norm() < 1e-15);
        assert!((th - 1.1).abs() < 1e-15);
    }

    #[test]
    fn fixed_point() {
        let big_r = (0.49f64 + 0.25).sqrt();
        for t in [0.3, 2.0, 17.0] {
            let (z, _) = closed_form_n2(Complex64::new(big_r, 0.0), 0.7, 0.0, t, 1.0).unwrap();
            assert!((z - big_r).norm() < 1e-14);
        }
    }

    #[test]
    fn hyperplane_is_refused() {
        assert!(matches!(closed_form_n2(Complex64::new(0.0, 0.5), 0.7, 0.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn periodicity_in_t() {
        let (z0, r, c0) = (Complex64::new(-0.4, 0.9), 0.5, 1.3);
        let per = period(r, c0);
        let mut shifts = Vec::new();
        for t in [0.1, 0.77, 1.9] {
            let (za, ta) = closed_form_n2(z0, r, 0.2, t, c0).unwrap();
            let (zb, tb) = closed_form_n2(z0, r, 0.2, t + per, c0).unwrap();
            assert!((za - zb).norm() < 1e-12);
            shifts.push(tb - ta);
        }
        for s in &shifts {
            assert!((s - shifts[0]).abs() < 1e-12);
            // a whole number of turns
            assert!((s / (2.0 * PI) - (s / (2.0 * PI)).round()).abs() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_integration() {
        let chk = closed_form_check(1.0, 4, 3.0, 11).unwrap();
        assert!(chk.max_deviation < 1e-6, "{chk:?}");
        assert!(chk.max_closure < 1e-6, "{chk:?}");
    }

    proptest! {
        #[test]
        fn satisfies_the_reduced_equation(
            re in prop_oneof![-2.0f64..-0.05, 0.05f64..2.0],
            im in -2.0f64..2.0,
            r in 0.05f64..2.0,
            c0 in -2.0f64..2.0,
            t in 0.0f64..10.0,
        ) {
            let z0 = Complex64::new(re, im);
            let big_r2 = r * r + c0 * c0 / 4.0;
            let h = 1e-5;
            let (zp, tp) = closed_form_n2(z0, r, 0.0, t + h, c0).unwrap();
            let (zm, tm) = closed_form_n2(z0, r, 0.0, t - h, c0).unwrap();
            let (z, _) = closed_form_n2(z0, r, 0.0, t, c0).unwrap();
            let scale = 1.0 + z.norm_sqr() + big_r2;
            let dz = (zp - zm) / (2.0 * h);
            let rhs = Complex64::i() * (big_r2 - z * z);
            prop_assert!((dz - rhs).norm() < 1e-6 * scale, "dz {dz} vs {rhs}");
            let dth = (tp - tm) / (2.0 * h);
            prop_assert!((dth + 2.0 * z.re).abs() < 1e-6 * scale, "dθ {dth} vs {}", -2.0 * z.re);
        }
    }
}
