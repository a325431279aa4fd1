//! Eigenvalues of the linear families, in closed form and numerically.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng;
use crate::error::{Error, Result};
use crate::field::{Family, FieldSpec};
use crate::quat::Quaternion;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub family: String,
    pub spec: FieldSpec,
    pub formula: [Complex64; 4],
    /// Eigenvalues of the 4×4 component matrix, reordered to pair with `formula`.
    pub numeric: [Complex64; 4],
    /// Largest `|formula − numeric|` under the optimal pairing.
    pub max_deviation: f64,
    /// Largest difference between the characteristic polynomial of the
    /// component matrix and the one built from `formula`.
    pub charpoly_deviation: f64,
    /// For `q̇ = aq + qb`: largest relative error of `d|q|²/dt = 2(a0 + b0)|q|²`.
    pub energy_identity_residual: Option<f64>,
}

/// `±√x` for real `x`, imaginary when `x < 0`.
fn root_pair(x: f64) -> [Complex64; 2] {
    let s = if x >= 0.0 { Complex64::new(x.sqrt(), 0.0) } else { Complex64::new(0.0, (-x).sqrt()) };
    [s, -s]
}

/// The closed-form eigenvalues of a linear family.
pub fn formula_eigenvalues(spec: &FieldSpec) -> Result<[Complex64; 4]> {
    let (a, b) = (spec.a(), spec.b());
    let im = |q: Quaternion| q.imag_norm_sq().sqrt();
    let pair = |center: f64, half: [Complex64; 2], center2: f64, half2: [Complex64; 2]| {
        [center + half[0], center + half[1], center2 + half2[0], center2 + half2[1]]
    };
    let second = || root_pair(b.norm_sq() - a.imag_norm_sq());
    Ok(match spec.family() {
        Family::LinearLL => {
            let (x, y) = (im(a), im(b));
            let c = a.q0 + b.q0;
            [
                Complex64::new(c, x + y),
                Complex64::new(c, x - y),
                Complex64::new(c, -x + y),
                Complex64::new(c, -x - y),
            ]
        }
        Family::LinearLConj => pair(a.q0 - b.q0, root_pair(-im(a + b).powi(2)), a.q0, second()),
        Family::LinearConjL => pair(a.q0 - b.q0, root_pair(-im(a - b).powi(2)), a.q0, second()),
        other => return Err(Error::WrongFamily(format!("{other} is not a linear family"))),
    })
}

/// Match `b` to `a` minimizing the largest pairwise distance over all 24 orderings.
fn optimal_pairing(a: &[Complex64; 4], b: &[Complex64; 4]) -> ([Complex64; 4], f64) {
    let mut best = (*b, f64::INFINITY);
    let mut idx = [0usize, 1, 2, 3];
    permute(&mut idx, 0, &mut |p| {
        let d = (0..4).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max);
        if d < best.1 {
            best = ([b[p[0]], b[p[1]], b[p[2]], b[p[3]]], d);
        }
    });
    best
}

fn permute(idx: &mut [usize; 4], k: usize, visit: &mut impl FnMut(&[usize; 4])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Coefficients of `∏ (x − λᵢ)`, lowest degree first.
fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c
}

pub fn linear_spectrum(spec: &FieldSpec) -> Result<SpectrumResult> {
    let formula = formula_eigenvalues(spec)?;
    let m = spec.component_matrix_linear()?;
    let eig = m.complex_eigenvalues();
    let raw = [eig[0], eig[1], eig[2], eig[3]];
    let (numeric, max_deviation) = optimal_pairing(&formula, &raw);

    // the characteristic polynomial stays well conditioned at repeated eigenvalues
    let expected = poly_from_roots(&formula);
    let t = m.trace();
    let m2 = m * m;
    let c2 = 0.5 * (t * t - m2.trace());
    let c1 = (t * t * t - 3.0 * t * m2.trace() + 2.0 * (m2 * m).trace()) / 6.0;
    let actual = [m.determinant(), -c1, c2, -t, 1.0];
    let charpoly_deviation = expected.iter().zip(actual).map(|(e, a)| (e - a).norm()).fold(0.0, f64::max);

    let energy_identity_residual = (spec.family() == Family::LinearLL).then(|| {
        let mut r = rng(0);
        let k = 2.0 * (spec.a().q0 + spec.b().q0);
        (0..100)
            .map(|_| {
                let q = Quaternion::from_array(std::array::from_fn(|_| r.random_range(-2.0..2.0)));
                let lhs = 2.0 * q.dot(spec.eval(q));
                (lhs - k * q.norm_sq()).abs() / (1.0 + k.abs() * q.norm_sq())
            })
            .fold(0.0, f64::max)
    });

    Ok(SpectrumResult {
        family: spec.family().to_string(),
        spec: *spec,
        formula,
        numeric,
        max_deviation,
        charpoly_deviation,
        energy_identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lin(f: Family, a: [f64; 4], b: [f64; 4]) -> FieldSpec {
        FieldSpec::linear(f, Quaternion::from_array(a), Quaternion::from_array(b)).unwrap()
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    }

    fn close(a: Vec<Complex64>, b: Vec<Complex64>) -> bool {
        sorted(a).iter().zip(sorted(b)).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn real_scalars_act_diagonally() {
        let r = linear_spectrum(&lin(Family::LinearLL, [0.5, 0.0, 0.0, 0.0], [-1.5, 0.0, 0.0, 0.0])).unwrap();
        for l in r.formula {
            assert!((l - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        }
        assert!(r.max_deviation < 1e-12);
    }

    #[test]
    fn left_i_right_j() {
        let r = linear_spectrum(&lin(Family::LinearLL, [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0])).unwrap();
        let want = vec![Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, -2.0)];
        assert!(close(r.formula.to_vec(), want));
        assert!(r.max_deviation < 1e-10, "{r:?}");
        assert!(r.energy_identity_residual.unwrap() < 1e-12);
    }

    #[test]
    fn conjugate_family_with_repeated_eigenvalue() {
        // a = 1 + i, b = 1: {±i} and a double eigenvalue 1 in a Jordan block
        let r = linear_spectrum(&lin(Family::LinearLConj, [1.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])).unwrap();
        let want = vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(close(r.formula.to_vec(), want));
        assert!(r.charpoly_deviation < 1e-12, "{r:?}");
        assert!(r.max_deviation < 1e-10, "{r:?}");
    }

    #[test]
    fn non_linear_family() {
        let s = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::ONE, 2).unwrap();
        assert!(matches!(linear_spectrum(&s), Err(Error::WrongFamily(_))));
    }

    #[test]
    fn pairing_is_optimal() {
        let a = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)];
        let b = [a[3], a[1], a[0], a[2]];
        let (p, d) = optimal_pairing(&a, &b);
        assert_eq!(p, a);
        assert_eq!(d, 0.0);
    }

    fn quat() -> impl Strategy<Value = [f64; 4]> {
        prop::array::uniform4(-2.0f64..2.0)
    }

    proptest! {
        #[test]
        fn formulas_match_numeric(a in quat(), b in quat(), fam in 0usize..3) {
            let f = [Family::LinearLL, Family::LinearLConj, Family::LinearConjL][fam];
            let r = linear_spectrum(&lin(f, a, b)).unwrap();
            prop_assert!(r.charpoly_deviation < 1e-10, "{:?}", r);
            prop_assert!(r.max_deviation < 1e-10 || r.charpoly_deviation < 1e-12, "{:?}", r);
        }
    }
}
