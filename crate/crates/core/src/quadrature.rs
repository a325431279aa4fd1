//! Adaptive Gauss–Kronrod quadrature and a composite Simpson reference rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 15-point Kronrod estimate on `[a, b]` with `|K15 − G7|` as its error.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Globally adaptive bisection on the interval with the largest error until
/// the summed error estimate drops below `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration limits must be finite".into()));
    }
    let (value, err) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value, err });
    let (mut total, mut total_err) = (value, err);
    while total_err > abs_tol {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureFailure("integrand is not finite".into()));
        }
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureFailure(format!(
                "error estimate {total_err:e} above {abs_tol:e} after {max_intervals} intervals"
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure(format!("interval [{}, {}] cannot be split", worst.a, worst.b)));
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Interval { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Interval { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // resum to shed the drift of the running updates
    let intervals = heap.len();
    let (value, abs_err) = heap.into_iter().fold((0.0, 0.0), |(v, e), iv| (v + iv.value, e + iv.err));
    Ok(QuadResult { value, abs_err, intervals })
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0, "Simpson needs an even panel count");
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let x = a + h * k as f64;
        if k % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        // K15 integrates degree 22 exactly
        let r = gk15(&|x: f64| x.powi(10) - 3.0 * x.powi(3), -1.0, 2.0);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((r.0 - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.3).powi(2));
        let exact = 100.0 * ((0.7f64 / 1e-2).atan() + (0.3f64 / 1e-2).atan());
        let r = integrate(f, 0.0, 1.0, 1e-10, 10_000).unwrap();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {exact}", r.value);
        assert!(r.abs_err < 1e-10);
        assert!(r.intervals > 1);
    }

    #[test]
    fn periodic_integrand_against_simpson() {
        // ∫₀^{2π} dψ / (2 + cos ψ) = 2π/√3
        let f = |x: f64| 1.0 / (2.0 + x.cos());
        let exact = 2.0 * PI / 3f64.sqrt();
        let r = integrate(f, 0.0, 2.0 * PI, 1e-12, 1000).unwrap();
        assert!((r.value - exact).abs() < 1e-12);
        assert!((simpson(f, 0.0, 2.0 * PI, 1 << 12) - exact).abs() < 1e-12);
    }

    #[test]
    fn failures() {
        assert!(matches!(integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10, 50), Err(Error::QuadratureFailure(_))));
        assert!(integrate(|x| x, 0.0, f64::INFINITY, 1e-10, 50).is_err());
    }
}
