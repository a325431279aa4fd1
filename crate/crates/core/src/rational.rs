//! Continued fractions and the periodic / quasiperiodic decision.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Largest denominator accepted as a periodic orbit.
pub const Q_MAX: i64 = 64;
/// Denominators in `(Q_MAX, Q_RESOLVE]` are reported as unresolved.
pub const Q_RESOLVE: i64 = 1000;
pub const RATIONAL_TOL: f64 = 1e-9;

/// Convergents `p/q` of `x`, stopping once `q` exceeds `q_limit` or the
/// expansion terminates.
pub fn convergents(x: f64, q_limit: i64) -> Vec<Ratio<i64>> {
    let mut out = Vec::new();
    if !x.is_finite() {
        return out;
    }
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p, mut q) = (x.floor() as i64, 1i64);
    let mut rem = x - x.floor();
    out.push(Ratio::new(p, q));
    while rem > 1e-15 {
        let inv = 1.0 / rem;
        let a = inv.floor();
        if a > 1e12 {
            break;
        }
        let a = a as i64;
        rem = inv - a as f64;
        let (Some(pn), Some(qn)) = (a.checked_mul(p).and_then(|v| v.checked_add(p_prev)), a.checked_mul(q).and_then(|v| v.checked_add(q_prev)))
        else {
            break;
        };
        if qn > q_limit {
            break;
        }
        (p_prev, q_prev, p, q) = (p, q, pn, qn);
        out.push(Ratio::new(p, q));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Periodic { p: i64, q: i64 },
    Quasiperiodic,
    Unresolved { p: i64, q: i64 },
}

/// Decide whether `x` is numerically rational.
///
/// Any `p/q` with `|x − p/q| < 1/(2q²)` is a convergent, so scanning the
/// convergents finds the smallest-denominator fraction within `tol`.
pub fn classify(x: f64, tol: f64, q_max: i64, q_resolve: i64) -> Classification {
    for r in convergents(x, q_resolve) {
        let (p, q) = (*r.numer(), *r.denom());
        if (x - p as f64 / q as f64).abs() < tol {
            return if q <= q_max { Classification::Periodic { p, q } } else { Classification::Unresolved { p, q } };
        }
    }
    Classification::Quasiperiodic
}

pub fn classify_default(x: f64) -> Classification {
    classify(x, RATIONAL_TOL, Q_MAX, Q_RESOLVE)
}
