//! First integrals, invariant hypersurfaces and the Poisson structure.
//!
//! Every descriptor is bound to a [`FieldSpec`] and evaluated in that spec's
//! normal frame. Values, gradients and closed-form derivatives are all
//! written out by hand; [`IntegralDescriptor::lie_derivative`] is the
//! independent `∇I · field` dot product they are checked against.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Family, FieldSpec, StructureCase, REGIME_EPS};
use crate::quat::Quaternion;

/// Denominators below this magnitude are reported as [`Error::SingularLocus`].
pub const SINGULAR_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntegralId {
    /// `q2 / q1`
    H2,
    /// `q3 / q1`
    H3,
    /// `(q q̄)ⁿ⁻¹ / S`
    Hn,
    /// `qⁿ⁻¹ + q̄ⁿ⁻¹ − c0`
    S,
    /// `q2² + q3²`
    #[serde(rename = "F_cyl")]
    FCyl,
    /// `|q|² / (2 c0 q0 + 2 c1 q1 − c0² − c1²)`
    #[serde(rename = "H_e51")]
    HE51,
    /// `|q|⁴ / ((2 q1 − c1)² + 4 q2² + 4 q3²)`
    #[serde(rename = "F_e50b")]
    FE50b,
    /// `c0 q0 + c1 q1 − (c0² + c1²)/2`
    #[serde(rename = "L_plane")]
    LPlane,
    /// `|q|⁴ / (q0² − q1² − q2² − q3² − c0²/2)`
    #[serde(rename = "H_e417")]
    HE417,
    /// `q0² − q1² − q2² − q3² − c0²/2`
    #[serde(rename = "L_hyp")]
    LHyp,
}

impl IntegralId {
    pub const ALL: [IntegralId; 10] = [
        IntegralId::H2,
        IntegralId::H3,
        IntegralId::Hn,
        IntegralId::S,
        IntegralId::FCyl,
        IntegralId::HE51,
        IntegralId::FE50b,
        IntegralId::LPlane,
        IntegralId::HE417,
        IntegralId::LHyp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntegralId::H2 => "H2",
            IntegralId::H3 => "H3",
            IntegralId::Hn => "Hn",
            IntegralId::S => "S",
            IntegralId::FCyl => "F_cyl",
            IntegralId::HE51 => "H_e51",
            IntegralId::FE50b => "F_e50b",
            IntegralId::LPlane => "L_plane",
            IntegralId::HE417 => "H_e417",
            IntegralId::LHyp => "L_hyp",
        }
    }
}

impl fmt::Display for IntegralId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegralId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntegralId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown integral '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntegralKind {
    /// The Lie derivative vanishes identically for this spec.
    Conserved,
    /// The Lie derivative equals a known nonzero closed form.
    Identity,
}

/// A named scalar function bound to one field spec.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralDescriptor {
    id: IntegralId,
    spec: FieldSpec,
    nf: FieldSpec,
}

fn small(x: f64) -> bool {
    x.abs() <= REGIME_EPS
}

fn guard(den: f64, what: &str) -> Result<f64> {
    if den.abs() < SINGULAR_GUARD || !den.is_finite() {
        Err(Error::SingularLocus(format!("{what} denominator is {den:e}")))
    } else {
        Ok(den)
    }
}

/// `c − c̄ = 0` and `a` in the `a0 + a1 i` plane after normalization.
fn real_c_bernoulli(spec: &FieldSpec) -> bool {
    let nf = spec.normal_form();
    spec.family() == Family::Bernoulli
        && spec.regime().c_minus_conj_zero
        && small(nf.a().q2)
        && small(nf.a().q3)
}

fn quadratic_real_a(spec: &FieldSpec) -> bool {
    matches!(spec.structure_case(), StructureCase::QuadraticSpiral | StructureCase::QuadraticSphere)
}

impl IntegralDescriptor {
    pub fn new(id: IntegralId, spec: &FieldSpec) -> Result<Self> {
        let nf = spec.normal_form();
        let ok = match id {
            IntegralId::H2 | IntegralId::H3 => spec.structure_case() == StructureCase::BernoulliRealA,
            IntegralId::Hn | IntegralId::S => real_c_bernoulli(spec),
            IntegralId::FCyl => {
                real_c_bernoulli(spec) || (spec.family() == Family::Cubic && small(nf.a().q2) && small(nf.a().q3))
            }
            IntegralId::HE51 | IntegralId::LPlane => quadratic_real_a(spec),
            IntegralId::FE50b => spec.structure_case() == StructureCase::QuadraticSphere,
            IntegralId::HE417 | IntegralId::LHyp => spec.family() == Family::Cubic,
        };
        if !ok {
            return Err(Error::WrongRegime(format!(
                "{id} is not defined for {} with a = {}, c = {}",
                spec.family(),
                spec.a(),
                spec.c()
            )));
        }
        Ok(IntegralDescriptor { id, spec: *spec, nf })
    }

    /// Parse a comma-separated list such as `"Hn,F_cyl"`.
    pub fn parse_list(list: &str, spec: &FieldSpec) -> Result<Vec<Self>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| IntegralDescriptor::new(s.parse()?, spec))
            .collect()
    }

    /// Every descriptor that applies to `spec`.
    pub fn applicable(spec: &FieldSpec) -> Vec<Self> {
        IntegralId::ALL
            .into_iter()
            .filter_map(|id| IntegralDescriptor::new(id, spec).ok())
            .collect()
    }

    pub fn id(&self) -> IntegralId {
        self.id
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn kind(&self) -> IntegralKind {
        let a = self.nf.a();
        let conserved = match self.id {
            IntegralId::H2 | IntegralId::H3 | IntegralId::FE50b => true,
            IntegralId::Hn | IntegralId::FCyl | IntegralId::HE417 => small(a.q0),
            IntegralId::HE51 => small(self.nf.c().q0),
            IntegralId::S | IntegralId::LPlane | IntegralId::LHyp => false,
        };
        if conserved {
            IntegralKind::Conserved
        } else {
            IntegralKind::Identity
        }
    }

    pub fn value(&self, q: Quaternion) -> Result<f64> {
        self.value_normal(self.spec.to_normal(q))
    }

    pub fn gradient(&self, q: Quaternion) -> Result<Quaternion> {
        let g = self.gradient_normal(self.spec.to_normal(q))?;
        Ok(self.spec.from_normal(g))
    }

    /// `∇I(q) · field(q)`, using the raw field.
    pub fn lie_derivative(&self, q: Quaternion) -> Result<f64> {
        Ok(self.gradient(q)?.dot(self.spec.eval(q)))
    }

    /// The closed-form expression the Lie derivative is known to equal.
    pub fn closed_form_derivative(&self, q: Quaternion) -> Result<f64> {
        let p = self.spec.to_normal(q);
        let nf = &self.nf;
        let (a0, a1) = (nf.a().q0, nf.a().q1);
        let n = nf.n();
        let r2 = p.norm_sq();
        let d2 = p.imag_norm_sq();
        let v = match self.id {
            IntegralId::H2 | IntegralId::H3 => {
                guard(p.q1, "q1")?;
                0.0
            }
            IntegralId::Hn => {
                let h = self.value_normal(p)?;
                (n - 1) as f64 * 2.0 * a0 * (nf.c0() - h) * h
            }
            IntegralId::S => {
                let pm = p.pow(n - 1);
                let w = nf.a() * pm * (Quaternion::real(nf.c0()) - pm);
                (n - 1) as f64 * 2.0 * w.q0
            }
            IntegralId::FCyl => {
                let f = p.q2 * p.q2 + p.q3 * p.q3;
                match nf.family() {
                    Family::Cubic => -2.0 * a0 * cubic_a(nf.c0(), p) * f,
                    _ => 2.0 * a0 * (nf.c0() - p.binomial_expand(n).vector_coeff) * f,
                }
            }
            IntegralId::HE51 => {
                let (c0, c1) = (nf.c().q0, nf.c().q1);
                let den = guard(2.0 * c0 * p.q0 + 2.0 * c1 * p.q1 - c0 * c0 - c1 * c1, "H_e51")?;
                let b = (p - nf.c()).norm_sq();
                a0 * (-2.0 * c0 * r2 * b) / (den * den)
            }
            IntegralId::FE50b => {
                let c1 = nf.c().q1;
                guard((2.0 * p.q1 - c1).powi(2) + 4.0 * p.q2 * p.q2 + 4.0 * p.q3 * p.q3, "F_e50b")?;
                0.0
            }
            IntegralId::LPlane => {
                let l = self.value_normal(p)?;
                a0 * (nf.c().q0 * r2 - 2.0 * p.q0 * l)
            }
            IntegralId::HE417 => {
                let c0sq = nf.c0() * nf.c0();
                let m = p.q0 * p.q0 - d2;
                let den = guard(c0sq - 2.0 * m, "H_e417")?;
                let big_n = c0sq * c0sq - 2.0 * c0sq * m + r2 * r2;
                8.0 * a0 * big_n * r2 * r2 / (den * den)
            }
            IntegralId::LHyp => {
                let l = self.value_normal(p)?;
                let c0sq = nf.c0() * nf.c0();
                let big_a = c0sq - 3.0 * p.q0 * p.q0 + d2;
                let big_b = c0sq - p.q0 * p.q0 + 3.0 * d2;
                -8.0 * a1 * p.q0 * p.q1 * l + 2.0 * a0 * (big_a * d2 - p.q0 * p.q0 * big_b)
            }
        };
        Ok(v)
    }

    /// For the hypersurface descriptors `S`, `L_plane` and `L_hyp`: the
    /// derivative on the zero set, where it takes a simpler form.
    pub fn zero_set_derivative(&self, q: Quaternion) -> Result<f64> {
        let p = self.spec.to_normal(q);
        let a0 = self.nf.a().q0;
        match self.id {
            IntegralId::S => {
                let n = self.nf.n();
                Ok((n - 1) as f64 * 2.0 * a0 * p.norm_sq().powi((n - 1) as i32))
            }
            IntegralId::LPlane => Ok(a0 * self.nf.c().q0 * p.norm_sq()),
            IntegralId::LHyp => {
                let c0 = self.nf.c0();
                Ok(-2.0 * a0 * (2.0 * p.q0 * p.q0 - c0 * c0 / 2.0).powi(2))
            }
            other => Err(Error::InvalidArgument(format!("{other} is not a hypersurface descriptor"))),
        }
    }

    fn value_normal(&self, p: Quaternion) -> Result<f64> {
        let nf = &self.nf;
        let r2 = p.norm_sq();
        Ok(match self.id {
            IntegralId::H2 => p.q2 / guard(p.q1, "q1")?,
            IntegralId::H3 => p.q3 / guard(p.q1, "q1")?,
            IntegralId::Hn => {
                let m = (nf.n() - 1) as i32;
                r2.powi(m) / guard(s_value(nf, p), "S")?
            }
            IntegralId::S => s_value(nf, p),
            IntegralId::FCyl => p.q2 * p.q2 + p.q3 * p.q3,
            IntegralId::HE51 => {
                let (c0, c1) = (nf.c().q0, nf.c().q1);
                r2 / guard(2.0 * c0 * p.q0 + 2.0 * c1 * p.q1 - c0 * c0 - c1 * c1, "H_e51")?
            }
            IntegralId::FE50b => {
                let c1 = nf.c().q1;
                let den = (2.0 * p.q1 - c1).powi(2) + 4.0 * p.q2 * p.q2 + 4.0 * p.q3 * p.q3;
                r2 * r2 / guard(den, "F_e50b")?
            }
            IntegralId::LPlane => {
                let (c0, c1) = (nf.c().q0, nf.c().q1);
                c0 * p.q0 + c1 * p.q1 - (c0 * c0 + c1 * c1) / 2.0
            }
            IntegralId::HE417 => r2 * r2 / guard(hyperboloid(nf.c0(), p), "H_e417")?,
            IntegralId::LHyp => hyperboloid(nf.c0(), p),
        })
    }

    fn gradient_normal(&self, p: Quaternion) -> Result<Quaternion> {
        let nf = &self.nf;
        let r2 = p.norm_sq();
        let quotient = |num: f64, dnum: Quaternion, den: f64, dden: Quaternion| (dnum * den - dden * num) / (den * den);
        Ok(match self.id {
            IntegralId::H2 => {
                let q1 = guard(p.q1, "q1")?;
                Quaternion::new(0.0, -p.q2 / (q1 * q1), 1.0 / q1, 0.0)
            }
            IntegralId::H3 => {
                let q1 = guard(p.q1, "q1")?;
                Quaternion::new(0.0, -p.q3 / (q1 * q1), 0.0, 1.0 / q1)
            }
            IntegralId::Hn => {
                let m = nf.n() - 1;
                let s = guard(s_value(nf, p), "S")?;
                let num = r2.powi(m as i32);
                let dnum = p * (2.0 * m as f64 * r2.powi(m as i32 - 1));
                quotient(num, dnum, s, s_gradient(nf, p))
            }
            IntegralId::S => s_gradient(nf, p),
            IntegralId::FCyl => Quaternion::new(0.0, 0.0, 2.0 * p.q2, 2.0 * p.q3),
            IntegralId::HE51 => {
                let (c0, c1) = (nf.c().q0, nf.c().q1);
                let den = guard(2.0 * c0 * p.q0 + 2.0 * c1 * p.q1 - c0 * c0 - c1 * c1, "H_e51")?;
                quotient(r2, p * 2.0, den, Quaternion::new(2.0 * c0, 2.0 * c1, 0.0, 0.0))
            }
            IntegralId::FE50b => {
                let c1 = nf.c().q1;
                let den = (2.0 * p.q1 - c1).powi(2) + 4.0 * p.q2 * p.q2 + 4.0 * p.q3 * p.q3;
                let den = guard(den, "F_e50b")?;
                let dden = Quaternion::new(0.0, 4.0 * (2.0 * p.q1 - c1), 8.0 * p.q2, 8.0 * p.q3);
                quotient(r2 * r2, p * (4.0 * r2), den, dden)
            }
            IntegralId::LPlane => Quaternion::new(nf.c().q0, nf.c().q1, 0.0, 0.0),
            IntegralId::HE417 => {
                let den = guard(hyperboloid(nf.c0(), p), "H_e417")?;
                quotient(r2 * r2, p * (4.0 * r2), den, p.conj() * 2.0)
            }
            IntegralId::LHyp => p.conj() * 2.0,
        })
    }
}

fn s_value(nf: &FieldSpec, p: Quaternion) -> f64 {
    2.0 * p.binomial_expand(nf.n() - 1).scalar - nf.c0()
}

/// `∇ Re(pᵐ) = m · conj(pᵐ⁻¹)` as a vector in `ℝ⁴`.
fn s_gradient(nf: &FieldSpec, p: Quaternion) -> Quaternion {
    let m = nf.n() - 1;
    p.pow(m - 1).conj() * (2.0 * m as f64)
}

fn hyperboloid(c0: f64, p: Quaternion) -> f64 {
    p.q0 * p.q0 - p.imag_norm_sq() - c0 * c0 / 2.0
}

fn cubic_a(c0: f64, p: Quaternion) -> f64 {
    c0 * c0 - 3.0 * p.q0 * p.q0 + p.imag_norm_sq()
}

/// Polynomials `q1`, `q2`, `q3` whose zero sets are invariant hyperplanes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hyperplane {
    Q1,
    Q2,
    Q3,
}

impl Hyperplane {
    pub const ALL: [Hyperplane; 3] = [Hyperplane::Q1, Hyperplane::Q2, Hyperplane::Q3];

    fn component(self, q: Quaternion) -> f64 {
        match self {
            Hyperplane::Q1 => q.q1,
            Hyperplane::Q2 => q.q2,
            Hyperplane::Q3 => q.q3,
        }
    }
}

/// Cofactor `K = a (c0 − (qⁿ − q̄ⁿ)/(q − q̄))` shared by the three hyperplanes
/// when `a` and `c` are real.
pub fn cofactor(spec: &FieldSpec, q: Quaternion) -> Result<f64> {
    if spec.structure_case() != StructureCase::BernoulliRealA {
        return Err(Error::WrongRegime("cofactors need a Bernoulli spec with a and c real".into()));
    }
    Ok(spec.a().q0 * (spec.c0() - q.binomial_expand(spec.n()).vector_coeff))
}

/// `d(poly)/dt − K · poly`, which vanishes identically.
pub fn cofactor_residual(poly: Hyperplane, spec: &FieldSpec, q: Quaternion) -> Result<f64> {
    let k = cofactor(spec, q)?;
    Ok(poly.component(spec.eval(q)) - k * poly.component(q))
}

/// The state-dependent structure matrix under which the imaginary-`a`
/// Bernoulli equation is Hamiltonian with Hamiltonian `Hn`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonStructure {
    spec: FieldSpec,
    nf: FieldSpec,
}

impl PoissonStructure {
    pub fn new(spec: &FieldSpec) -> Result<Self> {
        if !real_c_bernoulli(spec) {
            return Err(Error::WrongRegime("the Poisson structure needs a Bernoulli spec with c real".into()));
        }
        Ok(PoissonStructure { spec: *spec, nf: spec.normal_form() })
    }

    /// `M(p)` in normal-frame coordinates.
    pub fn matrix_normal(&self, p: Quaternion) -> Result<Matrix4<f64>> {
        let n = self.nf.n();
        let r2 = p.norm_sq();
        if n > 2 && r2 < SINGULAR_GUARD {
            return Err(Error::SingularLocus("M(q) is singular at the origin".into()));
        }
        let s = guard(s_value(&self.nf, p), "S")?;
        let pref = s * s / (2.0 * (n - 1) as f64 * r2.powi(n as i32 - 2));
        #[rustfmt::skip]
        let j = Matrix4::new(
            0.0, -1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0,
        );
        Ok(j * pref)
    }

    /// `{f, g}(q) = ∇f · M · ∇g`, evaluated in the normal frame.
    pub fn bracket(&self, f: &IntegralDescriptor, g: &IntegralDescriptor, q: Quaternion) -> Result<f64> {
        for d in [f, g] {
            if d.spec != self.spec {
                return Err(Error::InvalidArgument(format!("{} is bound to a different spec", d.id)));
            }
        }
        let p = self.spec.to_normal(q);
        let pref = self.matrix_normal(p)?[(1, 0)];
        let (x, y) = (f.gradient_normal(p)?, g.gradient_normal(p)?);
        // written out so that {f, f} is exactly zero
        Ok(pref * ((x.q1 * y.q0 - x.q0 * y.q1) + (x.q3 * y.q2 - x.q2 * y.q3)))
    }

    /// `−a1 · M ∇Hn`, mapped back to the original frame. Equals the field
    /// when `a` is purely imaginary.
    pub fn hamiltonian_field(&self, q: Quaternion) -> Result<Quaternion> {
        let p = self.spec.to_normal(q);
        let h = IntegralDescriptor::new(IntegralId::Hn, &self.spec)?;
        let m = self.matrix_normal(p)?;
        let v = m * nalgebra::Vector4::from(h.gradient_normal(p)?.to_array()) * (-self.nf.a().q1);
        Ok(self.spec.from_normal(Quaternion::new(v[0], v[1], v[2], v[3])))
    }
}

/// Named critical and invariant sets, each with a scalar membership residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalSet {
    /// `{q2 = 0, q3 = 0}`
    S1,
    /// `{Re(qⁿ) − c0 q0 = 0, L_{n−1} = c0}`
    S2,
    /// `{Re(qⁿ) − c0 q0 = 0, q1 = 0}`
    S3,
    /// `{q0 = 0, −c1 q1 + |q|² = 0}`
    Sphere,
    /// `{L = 0, q0 ≥ c0/√2}`
    HyperboloidPlus,
    /// `{L = 0, q0 ≤ −c0/√2}`
    HyperboloidMinus,
}

impl CriticalSet {
    /// Largest absolute defining residual at `q`, in the spec's normal frame.
    /// Points on the wrong sheet of the hyperboloid get `+∞`.
    pub fn residual(self, spec: &FieldSpec, q: Quaternion) -> f64 {
        let nf = spec.normal_form();
        let p = spec.to_normal(q);
        let c0 = nf.c0();
        let reduced = || {
            let parts = p.binomial_expand(nf.n());
            (parts.scalar - c0 * p.q0, parts.vector_coeff)
        };
        match self {
            CriticalSet::S1 => p.q2.abs().max(p.q3.abs()),
            CriticalSet::S2 => {
                let (x, v) = reduced();
                x.abs().max((v - c0).abs())
            }
            CriticalSet::S3 => {
                let (x, _) = reduced();
                x.abs().max(p.q1.abs())
            }
            CriticalSet::Sphere => p.q0.abs().max((p.norm_sq() - nf.c().q1 * p.q1).abs()),
            CriticalSet::HyperboloidPlus | CriticalSet::HyperboloidMinus => {
                let l = hyperboloid(c0, p).abs();
                let on_sheet = if self == CriticalSet::HyperboloidPlus { p.q0 > 0.0 } else { p.q0 < 0.0 };
                if on_sheet {
                    l
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn contains(self, spec: &FieldSpec, q: Quaternion, tol: f64) -> bool {
        self.residual(spec, q) <= tol
    }
}

/// The critical and invariant sets relevant to `spec`'s regime.
pub fn critical_sets(spec: &FieldSpec) -> Result<Vec<CriticalSet>> {
    match spec.structure_case() {
        StructureCase::BernoulliImaginaryA => Ok(vec![CriticalSet::S1, CriticalSet::S2, CriticalSet::S3]),
        StructureCase::QuadraticSphere => Ok(vec![CriticalSet::S1, CriticalSet::Sphere]),
        StructureCase::CubicHeteroclinic | StructureCase::CubicTori => {
            Ok(vec![CriticalSet::HyperboloidPlus, CriticalSet::HyperboloidMinus])
        }
        other => Err(Error::WrongRegime(format!("no critical-set catalog for {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(v: [f64; 4]) -> Quaternion {
        Quaternion::from_array(v)
    }

    fn cloud(seed: u64, n: usize, scale: f64) -> Vec<Quaternion> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                q([
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                ])
            })
            .collect()
    }

    fn fd_gradient(d: &IntegralDescriptor, x: Quaternion, h: f64) -> Option<Quaternion> {
        let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
        let mut g = [0.0; 4];
        for (k, e) in basis.iter().enumerate() {
            let f = |s: f64| d.value(x + *e * (s * h)).ok();
            g[k] = (-f(2.0)? + 8.0 * f(1.0)? - 8.0 * f(-1.0)? + f(-2.0)?) / (12.0 * h);
        }
        Some(Quaternion::from_array(g))
    }

    fn sample_specs() -> Vec<FieldSpec> {
        vec![
            FieldSpec::bernoulli(q([1.3, 0.0, 0.0, 0.0]), Quaternion::real(0.7), 3).unwrap(),
            FieldSpec::bernoulli(q([0.4, -0.3, 0.8, 0.2]), Quaternion::real(1.1), 4).unwrap(),
            FieldSpec::bernoulli(q([0.0, 0.3, -0.5, 0.6]), Quaternion::real(1.0), 2).unwrap(),
            FieldSpec::bernoulli(q([-0.6, 0.0, 0.0, 0.0]), q([0.8, 0.2, -0.5, 0.3]), 2).unwrap(),
            FieldSpec::bernoulli(q([0.9, 0.0, 0.0, 0.0]), q([0.0, 0.4, 0.6, 0.0]), 2).unwrap(),
            FieldSpec::cubic(q([-0.5, 0.7, 0.1, -0.2]), 1.2).unwrap(),
            FieldSpec::cubic(q([0.0, 0.0, 0.0, 1.5]), 0.8).unwrap(),
        ]
    }

    #[test]
    fn names_round_trip() {
        for id in IntegralId::ALL {
            assert_eq!(id.name().parse::<IntegralId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.name()));
        }
        assert!(matches!("Hx".parse::<IntegralId>(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn value_examples() {
        let spec = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 3).unwrap();
        let f = IntegralDescriptor::new(IntegralId::FCyl, &spec).unwrap();
        assert!((f.value(q([0.3, 0.4, 0.1, 0.2])).unwrap() - 0.05).abs() < 1e-16);

        // Hn = c0 on the roots of qⁿ⁻¹ = c0
        let spec = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(2.0), 3).unwrap();
        let h = IntegralDescriptor::new(IntegralId::Hn, &spec).unwrap();
        assert!((h.value(Quaternion::real(2f64.sqrt())).unwrap() - 2.0).abs() < 1e-14);

        let spec = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 2).unwrap();
        let h = IntegralDescriptor::new(IntegralId::Hn, &spec).unwrap();
        let u = q([0.5, -0.5, 0.5, 0.5]);
        assert!(h.value(u * 1e-3).unwrap().abs() < 1e-4);
        // S = 2q0 − c0 vanishes on q0 = 1/2
        assert!(matches!(h.value(q([0.5, 0.1, 0.2, 0.3])), Err(Error::SingularLocus(_))));
    }

    #[test]
    fn applicability() {
        let case_c = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 3).unwrap();
        assert!(IntegralDescriptor::new(IntegralId::H2, &case_c).is_err());
        assert!(IntegralDescriptor::new(IntegralId::HE417, &case_c).is_err());
        let ids: Vec<_> = IntegralDescriptor::applicable(&case_c).iter().map(|d| d.id()).collect();
        assert_eq!(ids, vec![IntegralId::Hn, IntegralId::S, IntegralId::FCyl]);
        assert_eq!(IntegralDescriptor::new(IntegralId::Hn, &case_c).unwrap().kind(), IntegralKind::Conserved);
        let case_b = FieldSpec::bernoulli(q([1.0, 1.0, 0.0, 0.0]), Quaternion::real(1.0), 3).unwrap();
        assert_eq!(IntegralDescriptor::new(IntegralId::Hn, &case_b).unwrap().kind(), IntegralKind::Identity);
        assert!(IntegralDescriptor::parse_list("Hn,F_cyl", &case_c).is_ok());
        assert!(IntegralDescriptor::parse_list("Hn,bogus", &case_c).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        for spec in sample_specs() {
            for d in IntegralDescriptor::applicable(&spec) {
                let mut checked = 0;
                for x in cloud(21, 200, 1.5) {
                    let Ok(g) = d.gradient(x) else { continue };
                    let Some(fd) = fd_gradient(&d, x, 1e-4) else { continue };
                    // stay away from the singular locus where FD breaks down
                    if d.value(x).unwrap().abs() > 1e2 {
                        continue;
                    }
                    let err = (g - fd).norm() / (1.0 + g.norm());
                    assert!(err < 1e-6, "{} on {:?}: {err}", d.id(), spec.family());
                    checked += 1;
                }
                assert!(checked > 100, "{}: only {checked} points", d.id());
            }
        }
    }

    #[test]
    fn lie_derivatives_match_closed_forms() {
        for spec in sample_specs() {
            for d in IntegralDescriptor::applicable(&spec) {
                for x in cloud(4, 500, 1.5) {
                    let (Ok(lie), Ok(cf)) = (d.lie_derivative(x), d.closed_form_derivative(x)) else { continue };
                    // rounding in a dot product scales with |∇I| |field|
                    let scale = d.gradient(x).unwrap().norm() * spec.eval(x).norm();
                    let err = (lie - cf).abs() / (1.0 + scale);
                    assert!(err < 1e-9, "{} on {:?} at {x}: {lie} vs {cf}", d.id(), spec.family());
                }
            }
        }
    }

    #[test]
    fn hn_identity_example() {
        // a = 1, n = 2, c0 = 1: dH/dt = 2(1 − H)H
        let spec = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::ONE, 2).unwrap();
        let d = IntegralDescriptor::new(IntegralId::Hn, &spec).unwrap();
        for x in cloud(8, 100, 2.0) {
            let Ok(h) = d.value(x) else { continue };
            let lie = d.lie_derivative(x).unwrap();
            assert!((lie - 2.0 * (1.0 - h) * h).abs() <= 1e-9 * (1.0 + lie.abs()));
        }
    }

    #[test]
    fn zero_set_derivatives() {
        // project onto the zero set along q0 and compare
        let spec = FieldSpec::cubic(q([-0.8, 0.6, 0.0, 0.0]), 1.0).unwrap();
        let l = IntegralDescriptor::new(IntegralId::LHyp, &spec).unwrap();
        for x in cloud(5, 100, 1.0) {
            let q0 = (x.imag_norm_sq() + 0.5).sqrt() * x.q0.signum();
            let y = q([q0, x.q1, x.q2, x.q3]);
            assert!(l.value(y).unwrap().abs() < 1e-14);
            let expected = -2.0 * -0.8 * (2.0 * q0 * q0 - 0.5).powi(2);
            assert!((l.lie_derivative(y).unwrap() - expected).abs() < 1e-9 * (1.0 + expected.abs()));
            assert!((l.zero_set_derivative(y).unwrap() - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        }

        let spec = FieldSpec::bernoulli(q([0.7, -0.4, 0.0, 0.0]), Quaternion::real(1.5), 3).unwrap();
        let s = IntegralDescriptor::new(IntegralId::S, &spec).unwrap();
        for x in cloud(6, 100, 1.0) {
            // S = 2(q0² − Δ²) − c0 for n = 3
            let q0sq = x.imag_norm_sq() + 0.75;
            let y = q([q0sq.sqrt(), x.q1, x.q2, x.q3]);
            assert!(s.value(y).unwrap().abs() < 1e-13);
            let (lie, z) = (s.lie_derivative(y).unwrap(), s.zero_set_derivative(y).unwrap());
            assert!((lie - z).abs() < 1e-9 * (1.0 + z.abs()));
            assert!(z > 0.0);
        }

        let spec = FieldSpec::bernoulli(Quaternion::real(1.0), q([0.8, 0.5, 0.0, 0.0]), 2).unwrap();
        let lp = IntegralDescriptor::new(IntegralId::LPlane, &spec).unwrap();
        for x in cloud(7, 50, 1.0) {
            let q0 = (0.89 / 2.0 - 0.5 * x.q1) / 0.8;
            let y = q([q0, x.q1, x.q2, x.q3]);
            let (lie, z) = (lp.lie_derivative(y).unwrap(), lp.zero_set_derivative(y).unwrap());
            assert!((lie - z).abs() < 1e-12 * (1.0 + z.abs()));
            assert!((z - 0.8 * y.norm_sq()).abs() < 1e-14);
        }
        assert!(lp.zero_set_derivative(Quaternion::ZERO).is_ok());
        let h = IntegralDescriptor::new(IntegralId::HE51, &spec).unwrap();
        assert!(h.zero_set_derivative(Quaternion::ONE).is_err());
    }

    #[test]
    fn cofactors() {
        let spec = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::real(2.0), 3).unwrap();
        let mut worst: f64 = 0.0;
        for x in cloud(12, 1000, 1.5) {
            for p in Hyperplane::ALL {
                worst = worst.max(cofactor_residual(p, &spec, x).unwrap().abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
        let on_plane = q([0.4, -1.0, 0.0, 0.7]);
        assert_eq!(spec.eval(on_plane).q2, 0.0);
        let wrong = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(2.0), 3).unwrap();
        assert!(matches!(cofactor_residual(Hyperplane::Q1, &wrong, on_plane), Err(Error::WrongRegime(_))));
    }

    #[test]
    fn poisson_structure() {
        for (a, n) in [(q([0.0, 1.0, 0.0, 0.0]), 2), (q([0.0, 0.4, -0.9, 0.3]), 3), (q([0.0, -2.0, 0.0, 0.0]), 4)] {
            let spec = FieldSpec::bernoulli(a, Quaternion::real(1.3), n).unwrap();
            let ps = PoissonStructure::new(&spec).unwrap();
            let h = IntegralDescriptor::new(IntegralId::Hn, &spec).unwrap();
            let f = IntegralDescriptor::new(IntegralId::FCyl, &spec).unwrap();
            for x in cloud(13, 300, 1.5) {
                let Ok(m) = ps.matrix_normal(spec.to_normal(x)) else { continue };
                assert_eq!(m.transpose(), -m);
                assert_eq!(ps.bracket(&h, &h, x).unwrap(), 0.0);
                let hf = ps.bracket(&h, &f, x).unwrap();
                assert!(hf.abs() < 1e-9 * (1.0 + m.norm()), "{hf}");
                let fh = ps.bracket(&f, &h, x).unwrap();
                assert!((hf + fh).abs() <= 1e-12 * (1.0 + hf.abs()));
                let field = spec.eval(x);
                let ham = ps.hamiltonian_field(x).unwrap();
                assert!((field - ham).norm() < 1e-9 * (1.0 + field.norm()), "{field} vs {ham}");
            }
        }
        let real_a = FieldSpec::bernoulli(Quaternion::real(0.5), q([1.0, 0.0, 0.2, 0.0]), 2).unwrap();
        assert!(PoissonStructure::new(&real_a).is_err());
    }

    #[test]
    fn hn_and_fcyl_are_independent_off_critical_sets() {
        let spec = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 3).unwrap();
        let h = IntegralDescriptor::new(IntegralId::Hn, &spec).unwrap();
        let f = IntegralDescriptor::new(IntegralId::FCyl, &spec).unwrap();
        for x in cloud(14, 300, 1.5) {
            if CriticalSet::S1.residual(&spec, x) < 1e-3 {
                continue;
            }
            let (Ok(gh), Ok(gf)) = (h.gradient(x), f.gradient(x)) else { continue };
            let mut jac = nalgebra::Matrix2x4::zeros();
            for k in 0..4 {
                jac[(0, k)] = gh.to_array()[k] / gh.norm();
                jac[(1, k)] = gf.to_array()[k] / gf.norm();
            }
            let sv = jac.singular_values();
            if sv.min() < 1e-8 {
                // only on S2/S3
                let near = CriticalSet::S2.residual(&spec, x).min(CriticalSet::S3.residual(&spec, x));
                assert!(near < 1e-3, "rank drop at {x}");
            }
        }
    }

    #[test]
    fn critical_set_membership() {
        let spec = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 3).unwrap();
        assert_eq!(critical_sets(&spec).unwrap(), vec![CriticalSet::S1, CriticalSet::S2, CriticalSet::S3]);
        assert!(CriticalSet::S1.contains(&spec, q([1.0, 0.5, 0.0, 0.0]), 1e-10));
        assert!(!CriticalSet::S1.contains(&spec, q([1.0, 0.5, 0.1, 0.0]), 1e-10));

        // S2 is where the reduced complex equation has nonreal fixed points:
        // z³ = c0 for n = 4, i.e. q0 = −1/2, Δ = √3/2 when c0 = 1.
        let spec4 = FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 4).unwrap();
        for x in cloud(16, 50, 1.0) {
            let u = x.imag() * (1.0 / x.imag().norm());
            let p = Quaternion::real(-0.5) + u * (3f64.sqrt() / 2.0);
            assert!(CriticalSet::S2.contains(&spec4, p, 1e-10));
            assert!(spec4.eval(p).norm() < 1e-10);
        }
        assert!(!CriticalSet::S2.contains(&spec4, q([0.3, 0.2, 0.0, 0.0]), 1e-10));

        let sphere_spec = FieldSpec::bernoulli(Quaternion::real(1.0), q([0.0, 0.8, 0.0, 0.0]), 2).unwrap();
        // centre (0, 0.4, 0, 0), radius 0.4
        let p = q([0.0, 0.4 + 0.4 * 0.6, 0.4 * 0.8, 0.0]);
        assert!(CriticalSet::Sphere.contains(&sphere_spec, p, 1e-12));
        let d = CriticalSet::Sphere;
        let field = sphere_spec.eval(p);
        // tangency: the normal of both defining functions is orthogonal to the field
        assert!(field.q0.abs() < 1e-12);
        let grad = q([0.0, 2.0 * p.q1 - 0.8, 2.0 * p.q2, 2.0 * p.q3]);
        assert!(grad.dot(field).abs() < 1e-12);
        assert!(d.residual(&sphere_spec, q([0.1, 0.0, 0.0, 0.0])) > 0.0);

        let cubic = FieldSpec::cubic(Quaternion::real(-1.0), 1.0).unwrap();
        let r = 0.5f64.sqrt();
        assert!(CriticalSet::HyperboloidPlus.contains(&cubic, Quaternion::real(r), 1e-12));
        assert!(!CriticalSet::HyperboloidMinus.contains(&cubic, Quaternion::real(r), 1e-12));
        assert!(CriticalSet::HyperboloidMinus.contains(&cubic, Quaternion::real(-r), 1e-12));
        assert!(critical_sets(&FieldSpec::homogeneous(Quaternion::I, 3).unwrap()).is_err());
    }
}
