//! The catalog of quaternion vector fields.
//!
//! A [`FieldSpec`] names one equation family together with its parameters.
//! [`FieldSpec::eval`] computes the right-hand side with quaternion
//! arithmetic. [`FieldSpec::component_field`] evaluates the same vector field
//! from hand-expanded real component systems, which is only useful as a
//! cross-check.
//!
//! Every spec carries a *normal frame*: a unit quaternion `u` such that in
//! the coordinates `p = u q ū` the leading parameter takes the form
//! `a0 + a1 i`. Conjugation by a unit is an algebra automorphism, so the
//! transformed equation belongs to the same family with conjugated
//! parameters. Invariants and structural analyses are all expressed in that
//! frame.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

/// Velocity of a trajectory in `ℝ⁴`, stored with the same component layout
/// as a point.
pub type TangentVector = Quaternion;

/// Absolute threshold used to decide the regime flags on normalized
/// parameters.
pub const REGIME_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `q̇ = a qⁿ`
    #[serde(rename = "homogeneous")]
    Homogeneous,
    /// `q̇ = a (c q − qⁿ)`
    #[serde(rename = "bernoulli")]
    Bernoulli,
    /// `q̇ = a (q − c0)(q + c0) q`
    #[serde(rename = "cubic")]
    Cubic,
    /// `q̇ = a q + q b`
    #[serde(rename = "esu1")]
    LinearLL,
    /// `q̇ = a q + q̄ b`
    #[serde(rename = "esu2")]
    LinearLConj,
    /// `q̇ = a q + b q̄`
    #[serde(rename = "esu3")]
    LinearConjL,
    /// `q̇ = b + a q`
    #[serde(rename = "affine_left")]
    AffineL,
    /// `q̇ = b + q a`
    #[serde(rename = "affine_right")]
    AffineR,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Homogeneous => "homogeneous",
            Family::Bernoulli => "bernoulli",
            Family::Cubic => "cubic",
            Family::LinearLL => "esu1",
            Family::LinearLConj => "esu2",
            Family::LinearConjL => "esu3",
            Family::AffineL => "affine_left",
            Family::AffineR => "affine_right",
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Family::LinearLL | Family::LinearLConj | Family::LinearConjL)
    }

    pub fn is_affine(self) -> bool {
        matches!(self, Family::AffineL | Family::AffineR)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fam = match s.to_ascii_lowercase().as_str() {
            "homogeneous" | "e1" => Family::Homogeneous,
            "bernoulli" | "e5" => Family::Bernoulli,
            "cubic" | "e3" => Family::Cubic,
            "esu1" | "linear_ll" => Family::LinearLL,
            "esu2" | "linear_lconj" => Family::LinearLConj,
            "esu3" | "linear_conjl" => Family::LinearConjL,
            "affine_left" | "affinel" => Family::AffineL,
            "affine_right" | "affiner" => Family::AffineR,
            other => return Err(Error::InvalidSpec(format!("unknown family '{other}'"))),
        };
        Ok(fam)
    }
}

/// Sign conditions on the normalized parameters that the theorems branch on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    /// `a + ā = 0`
    pub a_plus_conj_zero: bool,
    /// `a − ā = 0`
    pub a_minus_conj_zero: bool,
    /// `c − c̄ = 0`
    pub c_minus_conj_zero: bool,
    /// `c + c̄ = 0`
    pub c_plus_conj_zero: bool,
}

/// Which structural statement applies to a spec.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureCase {
    /// Bernoulli, `c` real, `a` real: foliation by invariant planes.
    BernoulliRealA,
    /// Bernoulli, `c` real, `a² ≠ ā²`: heteroclinics through `P`.
    BernoulliMixedA,
    /// Bernoulli, `c` real, `a` purely imaginary: isochronous centers and tori.
    BernoulliImaginaryA,
    /// Bernoulli `n = 2`, `a` real, `c` not real, `c + c̄ ≠ 0`.
    QuadraticSpiral,
    /// Bernoulli `n = 2`, `a` real, `c` purely imaginary.
    QuadraticSphere,
    /// Cubic with `a + ā ≠ 0`.
    CubicHeteroclinic,
    /// Cubic with `a + ā = 0`.
    CubicTori,
    Linear,
    Affine,
    /// Homogeneous equations and Bernoulli parameter sets the analyses do
    /// not cover.
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSpec {
    family: Family,
    a: Quaternion,
    b: Quaternion,
    c: Quaternion,
    c0: f64,
    n: u32,
    frame: Quaternion,
}

/// Wire shape of a spec: `{"family", "a", "b"?, "c"?, "c0"?, "n"?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpecJson {
    pub family: String,
    pub a: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

impl FieldSpec {
    pub fn homogeneous(a: Quaternion, n: u32) -> Result<Self> {
        Self::build(Family::Homogeneous, a, Quaternion::ZERO, Quaternion::ZERO, 0.0, n)
    }

    pub fn bernoulli(a: Quaternion, c: Quaternion, n: u32) -> Result<Self> {
        Self::build(Family::Bernoulli, a, Quaternion::ZERO, c, 0.0, n)
    }

    pub fn cubic(a: Quaternion, c0: f64) -> Result<Self> {
        Self::build(Family::Cubic, a, Quaternion::ZERO, Quaternion::ZERO, c0, 3)
    }

    /// One of the three linear families or the two affine ones.
    pub fn linear(family: Family, a: Quaternion, b: Quaternion) -> Result<Self> {
        if !family.is_linear() && !family.is_affine() {
            return Err(Error::WrongFamily(format!("{family} is not linear or affine")));
        }
        Self::build(family, a, b, Quaternion::ZERO, 0.0, 1)
    }

    fn build(family: Family, a: Quaternion, b: Quaternion, c: Quaternion, c0: f64, n: u32) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && c0.is_finite()) {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        match family {
            // a = 0 is allowed here only when b carries the dynamics, which is
            // what the right-affine reduction produces.
            Family::LinearLL => {
                if a.norm_sq() == 0.0 && b.norm_sq() == 0.0 {
                    return Err(Error::InvalidSpec("esu1 needs a ≠ 0 or b ≠ 0".into()));
                }
            }
            _ => {
                if a.norm_sq() == 0.0 {
                    return Err(Error::InvalidSpec("a must be nonzero".into()));
                }
            }
        }
        match family {
            Family::Homogeneous | Family::Bernoulli if n < 2 => {
                return Err(Error::InvalidSpec(format!("n must be at least 2, got {n}")));
            }
            Family::Bernoulli if c.norm_sq() == 0.0 => {
                return Err(Error::InvalidSpec(
                    "bernoulli needs c ≠ 0 (c = 0 is the homogeneous equation)".into(),
                ));
            }
            Family::Cubic if c0 <= 0.0 => {
                return Err(Error::InvalidSpec(format!("cubic needs c0 > 0, got {c0}")));
            }
            _ => {}
        }
        let frame = match family {
            Family::Homogeneous | Family::Cubic => a.similarity_normalize()?.0,
            Family::Bernoulli => {
                if a.imag_norm_sq().sqrt() > REGIME_EPS {
                    a.similarity_normalize()?.0
                } else if c.imag_norm_sq().sqrt() > REGIME_EPS {
                    c.similarity_normalize()?.0
                } else {
                    Quaternion::ONE
                }
            }
            _ => Quaternion::ONE,
        };
        Ok(FieldSpec { family, a, b, c, c0, n, frame })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn a(&self) -> Quaternion {
        self.a
    }

    pub fn b(&self) -> Quaternion {
        self.b
    }

    pub fn c(&self) -> Quaternion {
        self.c
    }

    /// Real constant of the cubic family; for Bernoulli specs this is the
    /// real part of `c`.
    pub fn c0(&self) -> f64 {
        match self.family {
            Family::Bernoulli => self.c.q0,
            _ => self.c0,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Unit `u` with `p = u q ū` the normal-frame coordinates.
    pub fn frame(&self) -> Quaternion {
        self.frame
    }

    pub fn to_normal(&self, q: Quaternion) -> Quaternion {
        q.rotate_by(self.frame)
    }

    pub fn from_normal(&self, p: Quaternion) -> Quaternion {
        p.rotate_by(self.frame.conj())
    }

    /// The same equation written in the normal frame.
    pub fn normal_form(&self) -> FieldSpec {
        let u = self.frame;
        FieldSpec {
            family: self.family,
            a: self.a.rotate_by(u),
            b: self.b.rotate_by(u),
            c: self.c.rotate_by(u),
            c0: self.c0,
            n: self.n,
            frame: Quaternion::ONE,
        }
    }

    pub fn is_normal(&self) -> bool {
        self.frame == Quaternion::ONE
    }

    pub fn regime(&self) -> Regime {
        let nf = self.normal_form();
        let small = |x: f64| x.abs() <= REGIME_EPS;
        let a = nf.a;
        let c = nf.c;
        Regime {
            a_plus_conj_zero: small(a.q0),
            a_minus_conj_zero: small(a.imag_norm_sq().sqrt()),
            c_minus_conj_zero: small(c.imag_norm_sq().sqrt()),
            c_plus_conj_zero: small(c.q0),
        }
    }

    pub fn structure_case(&self) -> StructureCase {
        let r = self.regime();
        let nf = self.normal_form();
        match self.family {
            Family::Bernoulli if r.c_minus_conj_zero => {
                if r.a_minus_conj_zero {
                    StructureCase::BernoulliRealA
                } else if r.a_plus_conj_zero {
                    StructureCase::BernoulliImaginaryA
                } else {
                    StructureCase::BernoulliMixedA
                }
            }
            Family::Bernoulli
                if r.a_minus_conj_zero && self.n == 2 && nf.c.q2.abs() <= REGIME_EPS && nf.c.q3.abs() <= REGIME_EPS =>
            {
                if r.c_plus_conj_zero {
                    StructureCase::QuadraticSphere
                } else {
                    StructureCase::QuadraticSpiral
                }
            }
            Family::Cubic => {
                if r.a_plus_conj_zero {
                    StructureCase::CubicTori
                } else {
                    StructureCase::CubicHeteroclinic
                }
            }
            f if f.is_linear() => StructureCase::Linear,
            f if f.is_affine() => StructureCase::Affine,
            _ => StructureCase::Unclassified,
        }
    }

    /// Right-hand side of the equation at `q`, by quaternion arithmetic.
    pub fn eval(&self, q: Quaternion) -> TangentVector {
        let (a, b, c) = (self.a, self.b, self.c);
        match self.family {
            Family::Homogeneous => a * q.pow(self.n),
            Family::Bernoulli => a * (c * q - q.pow(self.n)),
            Family::Cubic => {
                let c0 = Quaternion::real(self.c0);
                a * ((q - c0) * (q + c0) * q)
            }
            Family::LinearLL => a * q + q * b,
            Family::LinearLConj => a * q + q.conj() * b,
            Family::LinearConjL => a * q + b * q.conj(),
            Family::AffineL => b + a * q,
            Family::AffineR => b + q * a,
        }
    }

    pub fn eval_array(&self, y: &[f64; 4]) -> [f64; 4] {
        self.eval(Quaternion::from_array(*y)).to_array()
    }

    /// The component system that [`FieldSpec::component_field`] uses for this
    /// spec, if one exists.
    pub fn component_system(&self) -> Option<ComponentSystem> {
        let nf = self.normal_form();
        let r = self.regime();
        let planar_a = nf.a.q2.abs() <= REGIME_EPS && nf.a.q3.abs() <= REGIME_EPS;
        match self.family {
            Family::Bernoulli if r.c_minus_conj_zero && planar_a => {
                let is_i = nf.a == Quaternion::I;
                Some(match self.n {
                    2 if is_i => ComponentSystem::QuadraticImaginary,
                    3 if is_i => ComponentSystem::CubicImaginary,
                    _ => ComponentSystem::Bernoulli,
                })
            }
            Family::Bernoulli
                if r.a_minus_conj_zero && self.n == 2 && nf.c.q2.abs() <= REGIME_EPS && nf.c.q3.abs() <= REGIME_EPS =>
            {
                Some(ComponentSystem::QuadraticComplexC)
            }
            Family::Cubic if planar_a => Some(ComponentSystem::Cubic),
            _ => None,
        }
    }

    /// The field evaluated from the expanded real component system instead
    /// of quaternion products. Used only to cross-check [`FieldSpec::eval`].
    pub fn component_field(&self, q: Quaternion) -> Result<TangentVector> {
        let system = self
            .component_system()
            .ok_or_else(|| Error::WrongRegime(format!("no component system for {} in this regime", self.family)))?;
        let nf = self.normal_form();
        let p = self.to_normal(q);
        let v = system.eval(&nf, p);
        Ok(self.from_normal(v))
    }

    /// `M` with `eval(q) = M · (q0, q1, q2, q3)ᵀ` for the linear families.
    pub fn component_matrix_linear(&self) -> Result<Matrix4<f64>> {
        if !self.family.is_linear() {
            return Err(Error::WrongFamily(format!("{} is not a linear family", self.family)));
        }
        let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
        let mut m = Matrix4::zeros();
        for (col, e) in basis.iter().enumerate() {
            let v = self.eval(*e).to_array();
            for row in 0..4 {
                m[(row, col)] = v[row];
            }
        }
        Ok(m)
    }

    /// Translate an affine equation to a linear one.
    ///
    /// Returns the linear spec in `p = q + shift` together with `shift`:
    /// `a⁻¹ b` for `b + a q`, `b a⁻¹` for `b + q a`.
    pub fn affine_reduce(&self) -> Result<(FieldSpec, Quaternion)> {
        let inv = self.a.inverse()?;
        match self.family {
            Family::AffineL => {
                let shift = inv * self.b;
                Ok((FieldSpec::linear(Family::LinearLL, self.a, Quaternion::ZERO)?, shift))
            }
            Family::AffineR => {
                let shift = self.b * inv;
                Ok((FieldSpec::linear(Family::LinearLL, Quaternion::ZERO, self.a)?, shift))
            }
            other => Err(Error::WrongFamily(format!("{other} is not an affine family"))),
        }
    }

    pub fn to_json(&self) -> FieldSpecJson {
        let arr = |q: Quaternion| q.to_array();
        let (b, c, c0, n) = match self.family {
            Family::Homogeneous => (None, None, None, Some(self.n)),
            Family::Bernoulli => (None, Some(arr(self.c)), None, Some(self.n)),
            Family::Cubic => (None, None, Some(self.c0), None),
            _ => (Some(arr(self.b)), None, None, None),
        };
        FieldSpecJson { family: self.family.name().to_string(), a: arr(self.a), b, c, c0, n }
    }
}

impl TryFrom<FieldSpecJson> for FieldSpec {
    type Error = Error;

    fn try_from(j: FieldSpecJson) -> Result<Self> {
        let family: Family = j.family.parse()?;
        let a = Quaternion::from_array(j.a);
        let missing = |what: &str| Error::InvalidSpec(format!("{family} needs '{what}'"));
        match family {
            Family::Homogeneous => FieldSpec::homogeneous(a, j.n.ok_or_else(|| missing("n"))?),
            Family::Bernoulli => {
                let c = match (j.c, j.c0) {
                    (Some(c), None) => Quaternion::from_array(c),
                    (None, Some(c0)) => Quaternion::real(c0),
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidSpec("give either 'c' or 'c0' for bernoulli, not both".into()))
                    }
                    (None, None) => return Err(missing("c")),
                };
                FieldSpec::bernoulli(a, c, j.n.ok_or_else(|| missing("n"))?)
            }
            Family::Cubic => FieldSpec::cubic(a, j.c0.ok_or_else(|| missing("c0"))?),
            _ => FieldSpec::linear(family, a, Quaternion::from_array(j.b.ok_or_else(|| missing("b"))?)),
        }
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FieldSpecJson::deserialize(d)?;
        FieldSpec::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

/// Hand-expanded real forms of the catalog equations, written in the normal
/// frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentSystem {
    /// Bernoulli with `a = a0 + a1 i`, `c = c0` real, any `n`.
    Bernoulli,
    /// Bernoulli with `n = 2`, `a = i`.
    QuadraticImaginary,
    /// Bernoulli with `n = 3`, `a = i`.
    CubicImaginary,
    /// Bernoulli with `n = 2`, `a` real, `c = c0 + c1 i`.
    QuadraticComplexC,
    /// The cubic family with `a = a0 + a1 i`.
    Cubic,
}

impl ComponentSystem {
    fn eval(self, nf: &FieldSpec, p: Quaternion) -> Quaternion {
        let Quaternion { q0, q1, q2, q3 } = p;
        let delta_sq = p.imag_norm_sq();
        match self {
            ComponentSystem::Bernoulli => {
                let (a0, a1) = (nf.a.q0, nf.a.q1);
                let c0 = nf.c.q0;
                let parts = p.binomial_expand(nf.n);
                let x = c0 * q0 - parts.scalar;
                let k = c0 - parts.vector_coeff;
                Quaternion::new(
                    a0 * x - a1 * k * q1,
                    a0 * k * q1 + a1 * x,
                    (a0 * q2 - a1 * q3) * k,
                    (a1 * q2 + a0 * q3) * k,
                )
            }
            ComponentSystem::QuadraticImaginary => {
                let c0 = nf.c.q0;
                let s = 2.0 * q0 - c0;
                Quaternion::new(s * q1, c0 * q0 - q0 * q0 + delta_sq, s * q3, -s * q2)
            }
            ComponentSystem::CubicImaginary => {
                let c0 = nf.c.q0;
                let w = c0 - 3.0 * q0 * q0 + delta_sq;
                Quaternion::new(-w * q1, (c0 - q0 * q0 + 3.0 * delta_sq) * q0, -w * q3, w * q2)
            }
            ComponentSystem::QuadraticComplexC => {
                let a = nf.a.q0;
                let (c0, c1) = (nf.c.q0, nf.c.q1);
                let s = c0 - 2.0 * q0;
                Quaternion::new(
                    c0 * q0 - c1 * q1 - q0 * q0 + delta_sq,
                    c1 * q0 + s * q1,
                    s * q2 - c1 * q3,
                    c1 * q2 + s * q3,
                ) * a
            }
            ComponentSystem::Cubic => {
                let (a0, a1) = (nf.a.q0, nf.a.q1);
                let c0sq = nf.c0 * nf.c0;
                let big_a = c0sq - 3.0 * q0 * q0 + delta_sq;
                let big_b = c0sq - q0 * q0 + 3.0 * delta_sq;
                Quaternion::new(
                    a1 * q1 * big_a - a0 * q0 * big_b,
                    -a0 * q1 * big_a - a1 * q0 * big_b,
                    -(a0 * q2 - a1 * q3) * big_a,
                    -(a1 * q2 + a0 * q3) * big_a,
                )
            }
        }
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

    fn rand_q(rng: &mut ChaCha8Rng, scale: f64) -> Quaternion {
        q([
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        ])
    }

    fn rel(a: Quaternion, b: Quaternion) -> f64 {
        (a - b).norm() / (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn validation() {
        assert!(FieldSpec::bernoulli(Quaternion::ZERO, Quaternion::ONE, 2).is_err());
        assert!(FieldSpec::bernoulli(Quaternion::I, Quaternion::ZERO, 2).is_err());
        assert!(FieldSpec::bernoulli(Quaternion::I, Quaternion::ONE, 1).is_err());
        assert!(FieldSpec::cubic(Quaternion::I, 0.0).is_err());
        assert!(FieldSpec::cubic(Quaternion::I, -1.0).is_err());
        assert!(FieldSpec::linear(Family::Cubic, Quaternion::I, Quaternion::J).is_err());
        assert!(FieldSpec::linear(Family::LinearLConj, Quaternion::ZERO, Quaternion::J).is_err());
        assert!(FieldSpec::linear(Family::LinearLL, Quaternion::ZERO, Quaternion::J).is_ok());
    }

    #[test]
    fn json_shape_round_trip() {
        let s: FieldSpec = r#"{"family":"bernoulli","a":[0,1,0,0],"c":[1,0,0,0],"n":3}"#.parse().unwrap();
        assert_eq!(s.family(), Family::Bernoulli);
        assert_eq!(s.c0(), 1.0);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"family":"bernoulli","a":[0.0,1.0,0.0,0.0],"c":[1.0,0.0,0.0,0.0],"n":3}"#);
        let back: FieldSpec = text.parse().unwrap();
        assert_eq!(back, s);

        let s: FieldSpec = r#"{"family":"bernoulli","a":[0,1,0,0],"c0":2,"n":2}"#.parse().unwrap();
        assert_eq!(s.c(), Quaternion::real(2.0));
        let s: FieldSpec = r#"{"family":"esu1","a":[0,1,0,0],"b":[0,0,1,0]}"#.parse().unwrap();
        assert_eq!(s.family(), Family::LinearLL);
        assert!(r#"{"family":"cubic","a":[0,1,0,0]}"#.parse::<FieldSpec>().is_err());
        assert!(r#"{"family":"quintic","a":[0,1,0,0]}"#.parse::<FieldSpec>().is_err());
        assert!(r#"{"family":"cubic","a":[0,1,0,0],"c0":1,"x":2}"#.parse::<FieldSpec>().is_err());
    }

    #[test]
    fn singular_points_vanish() {
        // a (c − q^{n−1}) q = 0 wherever q^{n−1} = c.
        let s = FieldSpec::bernoulli(q([0.3, -1.1, 0.2, 0.5]), Quaternion::real(2.0), 3).unwrap();
        let root = Quaternion::real(2f64.sqrt());
        assert!(s.eval(root).norm() < 1e-14);
        assert!(s.eval(-root).norm() < 1e-14);

        let cubic = FieldSpec::cubic(q([0.7, 0.2, -0.4, 1.0]), 1.3).unwrap();
        for p in [Quaternion::ZERO, Quaternion::real(1.3), Quaternion::real(-1.3)] {
            assert!(cubic.eval(p).norm() < 1e-14);
        }
    }

    #[test]
    fn quadratic_imaginary_dual_path() {
        let s = FieldSpec::bernoulli(Quaternion::I, Quaternion::ONE, 2).unwrap();
        assert_eq!(s.component_system(), Some(ComponentSystem::QuadraticImaginary));
        let p = q([0.3, 0.4, 0.1, 0.2]);
        let via_quat = s.eval(p);
        let via_components = s.component_field(p).unwrap();
        assert!((via_quat - via_components).norm() < 1e-13);
        // (2q0 − c0) q1 = −0.4·0.4
        assert!((via_components.q0 + 0.16).abs() < 1e-15);
    }

    #[test]
    fn dual_path_all_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let specs = [
            FieldSpec::bernoulli(q([0.7, -1.3, 0.0, 0.0]), Quaternion::real(1.4), 4).unwrap(),
            FieldSpec::bernoulli(q([0.2, 0.5, -0.9, 0.3]), Quaternion::real(-0.8), 5).unwrap(),
            FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.0), 2).unwrap(),
            FieldSpec::bernoulli(Quaternion::I, Quaternion::real(1.5), 3).unwrap(),
            FieldSpec::bernoulli(Quaternion::real(0.8), q([0.6, -0.9, 0.0, 0.0]), 2).unwrap(),
            FieldSpec::bernoulli(Quaternion::real(-1.2), q([0.6, 0.3, 0.4, -0.2]), 2).unwrap(),
            FieldSpec::cubic(q([-0.7, 0.4, 0.0, 0.0]), 1.1).unwrap(),
            FieldSpec::cubic(q([0.1, 0.0, 0.6, -0.3]), 0.9).unwrap(),
        ];
        for s in specs {
            assert!(s.component_system().is_some(), "{s:?}");
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let p = rand_q(&mut rng, 1.5);
                worst = worst.max(rel(s.eval(p), s.component_field(p).unwrap()));
            }
            assert!(worst < 1e-12, "{:?}: {worst}", s.component_system());
        }
    }

    #[test]
    fn component_path_refuses_uncovered_specs() {
        let s = FieldSpec::bernoulli(q([0.2, 0.5, 0.0, 0.0]), q([1.0, 0.0, 0.7, 0.0]), 3).unwrap();
        assert!(matches!(s.component_field(Quaternion::ONE), Err(Error::WrongRegime(_))));
        let h = FieldSpec::homogeneous(Quaternion::I, 3).unwrap();
        assert!(h.component_system().is_none());
    }

    #[test]
    fn normal_form_conjugates_the_flow() {
        let s = FieldSpec::bernoulli(q([0.4, 0.1, -0.7, 0.5]), Quaternion::real(1.2), 3).unwrap();
        let nf = s.normal_form();
        assert!(nf.a().q2.abs() < 1e-15 && nf.a().q3.abs() < 1e-15);
        assert!(nf.a().q1 > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = rand_q(&mut rng, 1.0);
            let lhs = s.to_normal(s.eval(x));
            let rhs = nf.eval(s.to_normal(x));
            assert!(rel(lhs, rhs) < 1e-13);
        }
    }

    #[test]
    fn regimes_and_cases() {
        let case = |a: [f64; 4], c: [f64; 4], n: u32| FieldSpec::bernoulli(q(a), q(c), n).unwrap().structure_case();
        assert_eq!(case([1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], 3), StructureCase::BernoulliRealA);
        assert_eq!(case([1.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], 3), StructureCase::BernoulliMixedA);
        assert_eq!(case([0.0, 0.0, 2.0, 0.0], [1.0, 0.0, 0.0, 0.0], 3), StructureCase::BernoulliImaginaryA);
        assert_eq!(case([1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.3, 0.4], 2), StructureCase::QuadraticSpiral);
        assert_eq!(case([1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.3, 0.4], 2), StructureCase::QuadraticSphere);
        assert_eq!(case([1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.3, 0.4], 3), StructureCase::Unclassified);
        let r = FieldSpec::bernoulli(q([0.0, 0.0, 2.0, 0.0]), q([1.0, 0.0, 0.0, 0.0]), 3).unwrap().regime();
        assert!(r.a_plus_conj_zero && !r.a_minus_conj_zero && r.c_minus_conj_zero && !r.c_plus_conj_zero);
        assert_eq!(FieldSpec::cubic(Quaternion::I, 1.0).unwrap().structure_case(), StructureCase::CubicTori);
        assert_eq!(
            FieldSpec::cubic(q([-1.0, 0.0, 0.0, 0.0]), 1.0).unwrap().structure_case(),
            StructureCase::CubicHeteroclinic
        );
    }

    #[test]
    fn linear_matrix() {
        let s = FieldSpec::linear(Family::LinearLL, Quaternion::real(1.5), Quaternion::real(-0.25)).unwrap();
        assert_eq!(s.component_matrix_linear().unwrap(), Matrix4::identity() * 1.25);

        let s = FieldSpec::linear(Family::LinearLL, Quaternion::I, Quaternion::J).unwrap();
        assert_eq!(s.component_matrix_linear().unwrap().trace(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for fam in [Family::LinearLL, Family::LinearLConj, Family::LinearConjL] {
            let s = FieldSpec::linear(fam, rand_q(&mut rng, 2.0), rand_q(&mut rng, 2.0)).unwrap();
            let m = s.component_matrix_linear().unwrap();
            let tr = m.trace();
            if fam == Family::LinearLL {
                assert!((tr - 4.0 * (s.a().q0 + s.b().q0)).abs() < 1e-13);
            }
            for _ in 0..20 {
                let x = rand_q(&mut rng, 2.0);
                let mx = m * nalgebra::Vector4::from(x.to_array());
                let fx = s.eval(x);
                assert!(rel(Quaternion::new(mx[0], mx[1], mx[2], mx[3]), fx) < 1e-14);
                // additivity and homogeneity
                let y = rand_q(&mut rng, 2.0);
                assert!(rel(s.eval(x + y), s.eval(x) + s.eval(y)) < 1e-14);
                assert!(rel(s.eval(x * 3.5), s.eval(x) * 3.5) < 1e-14);
            }
        }
        let cubic = FieldSpec::cubic(Quaternion::I, 1.0).unwrap();
        assert!(matches!(cubic.component_matrix_linear(), Err(Error::WrongFamily(_))));
    }

    #[test]
    fn affine_reduction() {
        let s = FieldSpec::linear(Family::AffineL, Quaternion::I, Quaternion::ZERO).unwrap();
        let (lin, shift) = s.affine_reduce().unwrap();
        assert_eq!(shift, Quaternion::ZERO);
        assert_eq!(lin.a(), Quaternion::I);

        let s = FieldSpec::linear(Family::AffineL, Quaternion::I, Quaternion::J).unwrap();
        let (lin, shift) = s.affine_reduce().unwrap();
        assert_eq!(shift, -Quaternion::K);
        assert!(s.eval(-shift).norm() < 1e-15);
        assert!(lin.eval(Quaternion::ZERO).norm() == 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for fam in [Family::AffineL, Family::AffineR] {
            for _ in 0..200 {
                let a = rand_q(&mut rng, 2.0);
                let b = rand_q(&mut rng, 2.0);
                let s = FieldSpec::linear(fam, a, b).unwrap();
                let (lin, shift) = s.affine_reduce().unwrap();
                assert!(s.eval(-shift).norm() < 1e-13);
                let x = rand_q(&mut rng, 2.0);
                // q̇ at q equals ṗ at p = q + shift
                assert!(rel(s.eval(x), lin.eval(x + shift)) < 1e-12);
            }
        }
        let lin = FieldSpec::linear(Family::LinearLL, Quaternion::I, Quaternion::J).unwrap();
        assert!(matches!(lin.affine_reduce(), Err(Error::WrongFamily(_))));
    }

    #[test]
    fn bernoulli_fixed_points_on_circle() {
        // In the normalized reduction the nonzero fixed points sit at radius |c0|^{1/(n−1)}.
        for n in 2..=5u32 {
            let c0 = 1.7;
            let s = FieldSpec::bernoulli(q([1.0, 0.0, 0.0, 0.0]), Quaternion::real(c0), n).unwrap();
            let r = c0.powf(1.0 / (n - 1) as f64);
            for k in 0..(n - 1) {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64;
                let z = q([r * ang.cos(), r * ang.sin(), 0.0, 0.0]);
                assert!(s.eval(z).norm() < 1e-12, "n={n} k={k}");
            }
        }
    }
}
