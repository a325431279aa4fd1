//! The acceptance suite: nine numbered criteria, each with a pass/fail
//! verdict, a one-line summary and the measured numbers behind it.

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Family, FieldSpec};
use crate::invariants::IntegralId;
use crate::quat::Quaternion;
use crate::rational::Classification;
use crate::structure::case_a::classify_case_a;
use crate::structure::case_b::level_gap_check;
use crate::structure::closed_form::closed_form_check;
use crate::structure::heteroclinic::{cubic_heteroclinic_report, quadratic_spiral_report};
use crate::structure::isochronous::isochronous_centers;
use crate::structure::spectrum::linear_spectrum;
use crate::structure::torus::{
    cubic_torus_analysis, periodic_torus_search, rotation_integral, rotation_integral_simpson, rotation_number,
    solve_rotation, TorusSpec, CLOSURE_TOL,
};
use crate::verify::{conservation_drift, random_point, verify_identities, DRIFT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub summary: String,
    pub details: Value,
}

pub const TITLES: [&str; 9] = [
    "quaternion algebra",
    "derivative identities",
    "conservation along trajectories",
    "closed-form quadratic solution",
    "isochronous periods",
    "rotation numbers",
    "heteroclinic connections",
    "linear spectra",
    "empty levels and admissibility",
];

fn outcome(id: u8, pass: bool, summary: String, details: Value) -> CriterionOutcome {
    CriterionOutcome { id, title: TITLES[id as usize - 1].into(), pass, summary, details }
}

/// Run criterion `id` (1 to 9). Errors inside a criterion become a failure
/// carrying the error message.
pub fn run_criterion(id: u8, seed: u64) -> CriterionOutcome {
    let r = match id {
        1 => algebra(seed),
        2 => identities(seed),
        3 => conservation(seed),
        4 => closed_form(seed),
        5 => isochronous(),
        6 => rotation(),
        7 => heteroclinic(seed),
        8 => spectra(seed),
        9 => levels(seed),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    r.unwrap_or_else(|e| outcome(id.clamp(1, 9), false, format!("error: {e}"), Value::Null))
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    (1..=9).map(|id| run_criterion(id, seed)).collect()
}

fn algebra(seed: u64) -> Result<CriterionOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut assoc, mut dist, mut conj, mut norm, mut binom) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (a, b, c) = (random_point(&mut rng, 2.0), random_point(&mut rng, 2.0), random_point(&mut rng, 2.0));
        let (na, nb, nc) = (a.norm(), b.norm(), c.norm());
        assoc = assoc.max(((a * b) * c - a * (b * c)).norm() / (na * nb * nc));
        dist = dist.max((a * (b + c) - (a * b + a * c)).norm() / (na * (nb + nc)));
        dist = dist.max(((b + c) * a - (b * a + c * a)).norm() / (na * (nb + nc)));
        conj = conj.max(((a * b).conj() - b.conj() * a.conj()).norm() / (na * nb));
        norm = norm.max(((a * b).norm() - na * nb).abs() / (na * nb));
        for n in 1..=10 {
            let parts = a.binomial_expand(n);
            let expanded = Quaternion::real(parts.scalar) + a.imag() * parts.vector_coeff;
            binom = binom.max((expanded - a.pow(n)).norm() / na.powi(n as i32));
        }
    }
    let worst = assoc.max(dist).max(conj).max(norm).max(binom);
    Ok(outcome(
        1,
        worst < 1e-12,
        format!("10^4 triples, worst relative error {worst:.2e} (limit 1e-12)"),
        json!({"associativity": assoc, "distributivity": dist, "conjugate_anti_homomorphism": conj,
               "norm_multiplicativity": norm, "binomial_vs_pow_n_le_10": binom}),
    ))
}

fn identity_specs() -> Result<Vec<FieldSpec>> {
    let q = Quaternion::new;
    Ok(vec![
        // Hn, S, and S on P with a mixed a
        FieldSpec::bernoulli(q(0.7, -0.4, 0.3, 0.0), Quaternion::real(1.1), 3)?,
        FieldSpec::bernoulli(q(-0.5, 0.2, 0.0, 0.6), Quaternion::real(0.9), 4)?,
        // cofactors of the q1, q2, q3 hyperplanes
        FieldSpec::bernoulli(Quaternion::real(1.3), Quaternion::real(0.7), 3)?,
        // Poisson bracket
        FieldSpec::bernoulli(q(0.0, 0.4, -0.9, 0.3), Quaternion::real(1.3), 3)?,
        // H_e51 and L_plane
        FieldSpec::bernoulli(Quaternion::real(-0.6), q(0.8, 0.2, -0.5, 0.3), 2)?,
        // H_e417 and L_hyp
        FieldSpec::cubic(q(-0.5, 0.7, 0.1, -0.2), 1.2)?,
    ])
}

fn identities(seed: u64) -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    for spec in identity_specs()? {
        let r = verify_identities(&spec, 1000, seed)?;
        pass &= r.pass;
        for c in &r.identities {
            worst_ratio = worst_ratio.max(c.max_residual / c.threshold);
            checks.push(json!({"spec": spec, "identity": c.name, "points": c.points,
                               "max_residual": c.max_residual, "threshold": c.threshold, "pass": c.pass}));
        }
    }
    Ok(outcome(
        2,
        pass,
        format!("{} identity checks on 10^3 points each, worst residual at {worst_ratio:.2e} of its threshold", checks.len()),
        Value::Array(checks),
    ))
}

fn conservation(seed: u64) -> Result<CriterionOutcome> {
    let q = Quaternion::new;
    let regimes = [
        ("real a", FieldSpec::bernoulli(Quaternion::real(0.2), Quaternion::ONE, 3)?, vec![IntegralId::H2, IntegralId::H3]),
        ("imaginary a", FieldSpec::bernoulli(Quaternion::I, Quaternion::ONE, 3)?, vec![IntegralId::Hn, IntegralId::FCyl]),
        ("quadratic sphere", FieldSpec::bernoulli(Quaternion::ONE, q(0.0, 1.0, 0.0, 0.0), 2)?, vec![IntegralId::HE51, IntegralId::FE50b]),
        ("cubic tori", FieldSpec::cubic(Quaternion::I, 1.0)?, vec![IntegralId::HE417, IntegralId::FCyl]),
    ];
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, spec, ids) in regimes {
        for d in conservation_drift(&spec, &ids, 20, 20.0, 1.0, seed)? {
            worst = worst.max(d.max_relative_drift);
            details.push(json!({"regime": name, "spec": spec, "drift": d}));
        }
    }
    Ok(outcome(
        3,
        worst < DRIFT_TOL,
        format!("4 regimes x 20 starts x T=20, worst relative drift {worst:.2e} (limit 1e-8)"),
        Value::Array(details),
    ))
}

fn closed_form(seed: u64) -> Result<CriterionOutcome> {
    let chk = closed_form_check(1.0, 10, 3.0, seed)?;
    Ok(outcome(
        4,
        chk.max_deviation < 1e-6 && chk.max_closure < 1e-6,
        format!(
            "10 starts, deviation {:.2e} over T=3, closure after pi/R {:.2e} (limits 1e-6)",
            chk.max_deviation, chk.max_closure
        ),
        json!(chk),
    ))
}

fn isochronous() -> Result<CriterionOutcome> {
    let mut worst: f64 = 0.0;
    let mut opposite = true;
    let mut details = Vec::new();
    for n in [2, 3] {
        for c0 in [1.0, 2.0] {
            let rep = isochronous_centers(&FieldSpec::bernoulli(Quaternion::I, Quaternion::real(c0), n)?)?;
            worst = worst.max(rep.max_rel_err);
            opposite &= rep.opposite_orientation;
            details.push(json!(rep));
        }
    }
    Ok(outcome(
        5,
        worst < 1e-3 && opposite,
        format!("(n, c0) in {{2,3}}x{{1,2}}, worst relative period error {worst:.2e} (limit 1e-3)"),
        Value::Array(details),
    ))
}

fn rotation() -> Result<CriterionOutcome> {
    let (f, c0) = (1.0, 1.0);
    // 10 levels inside the domain h < -f²/(2f + c0) = -1/3
    let mut quad_vs_simpson: f64 = 0.0;
    let mut grid = Vec::new();
    for k in 0..10 {
        let ts = TorusSpec::bernoulli(-0.4 - 0.6 * k as f64, f, c0);
        let adaptive = rotation_integral(&ts)?;
        let simpson = rotation_integral_simpson(&ts, 1 << 20);
        quad_vs_simpson = quad_vs_simpson.max((adaptive.value - simpson).abs());
        grid.push(json!({"h": ts.h, "I": adaptive.value, "abs_err": adaptive.abs_err, "simpson": simpson}));
    }
    let grid_ok = quad_vs_simpson < 1e-9;

    let (search_ok, search) = match periodic_torus_search(f, c0, Ratio::new(1, 3)) {
        Ok(r) => {
            let closure = r.rotation.cross_check.as_ref().and_then(|c| c.closure_residual).unwrap_or(f64::INFINITY);
            (r.residual < 1e-11 && closure < CLOSURE_TOL, json!(r))
        }
        Err(e) => (false, json!({"error": e.to_string()})),
    };

    // a torus with rotation 1/3 of a turn in θ per turn in φ, i.e. I = -2/3
    let supplementary = periodic_torus_search(f, c0, Ratio::new(-2, 3))?;
    let supplementary_closure = supplementary.rotation.cross_check.as_ref().and_then(|c| c.closure_residual);

    let golden = -(5f64.sqrt() - 1.0) / 2.0;
    let (h, _, _) = solve_rotation(f, c0, golden)?;
    let quasi = rotation_number(&TorusSpec::bernoulli(h, f, c0))?;
    let min_return = quasi.cross_check.as_ref().map_or(0.0, |c| c.min_return_residual);
    let quasi_ok = quasi.classification == Classification::Quasiperiodic && min_return > CLOSURE_TOL;

    let range = grid.iter().filter_map(|g| g["I"].as_f64()).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), v| (l.min(v), u.max(v)));
    let summary = format!(
        "quadrature vs Simpson {quad_vs_simpson:.2e}; I = 1/3 search {}; quasiperiodic min return {min_return:.2e}; \
         I = -2/3 closure {:.2e}",
        if search_ok { "found" } else { "not found (I < 0 on the whole domain)" },
        supplementary_closure.unwrap_or(f64::NAN),
    );
    Ok(outcome(
        6,
        grid_ok && search_ok && quasi_ok,
        summary,
        json!({"grid": grid, "grid_I_range": [range.0, range.1], "quadrature_vs_simpson": quad_vs_simpson,
               "search_one_third": search, "supplementary_minus_two_thirds": supplementary,
               "quasiperiodic": quasi, "quasiperiodic_h": h}),
    ))
}

fn heteroclinic(seed: u64) -> Result<CriterionOutcome> {
    let case_a = classify_case_a(&FieldSpec::bernoulli(Quaternion::ONE, Quaternion::ONE, 3)?, 20, seed)?;
    let spiral = quadratic_spiral_report(&FieldSpec::bernoulli(Quaternion::ONE, Quaternion::new(1.0, 0.5, 0.0, 0.0), 2)?, 20, seed)?;
    let cubic = cubic_heteroclinic_report(&FieldSpec::cubic(Quaternion::real(-1.0), 1.0)?, 20, seed)?;
    let terminal = spiral.max_terminal_distance.max(cubic.max_terminal_distance);
    Ok(outcome(
        7,
        case_a.ok && spiral.ok && cubic.ok && terminal < 1e-4,
        format!(
            "planar reduction n=3: {}/{} generic orbits 0 -> z_k, {} escaping rays; L = 0 probes {}/20 and {}/20, \
             worst terminal distance {terminal:.2e}",
            case_a.generic_origin_to_root,
            case_a.generic_samples,
            case_a.escape_rays.iter().filter(|r| r.as_expected).count(),
            spiral.orbits.iter().filter(|o| o.ok).count(),
            cubic.orbits.iter().filter(|o| o.ok).count(),
        ),
        json!({"planar_reduction": case_a, "quadratic_plane": spiral, "cubic_hyperboloid": cubic}),
    ))
}

fn spectra(seed: u64) -> Result<CriterionOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_family = Vec::new();
    let mut pass = true;
    let mut energy: f64 = 0.0;
    for fam in [Family::LinearLL, Family::LinearLConj, Family::LinearConjL] {
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let spec = FieldSpec::linear(fam, random_point(&mut rng, 2.0), random_point(&mut rng, 2.0))?;
            let r = linear_spectrum(&spec)?;
            worst = worst.max(r.max_deviation);
            if let Some(e) = r.energy_identity_residual {
                energy = energy.max(e);
            }
        }
        pass &= worst < 1e-10;
        per_family.push(json!({"family": fam.name(), "max_deviation": worst}));
    }
    let mut affine: f64 = 0.0;
    for fam in [Family::AffineL, Family::AffineR] {
        for _ in 0..1000 {
            let spec = FieldSpec::linear(fam, random_point(&mut rng, 2.0), random_point(&mut rng, 2.0))?;
            let (lin, shift) = spec.affine_reduce()?;
            affine = affine.max(spec.eval(-shift).norm());
            let p = random_point(&mut rng, 2.0);
            affine = affine.max((spec.eval(p - shift) - lin.eval(p)).norm() / (1.0 + lin.eval(p).norm()));
        }
    }
    pass &= energy < 1e-10 && affine < 1e-13;
    Ok(outcome(
        8,
        pass,
        format!(
            "10^3 draws per family, worst eigenvalue deviation {:.2e}; |q|^2 identity {energy:.2e}; affine zero {affine:.2e}",
            per_family.iter().filter_map(|f| f["max_deviation"].as_f64()).fold(0.0, f64::max)
        ),
        json!({"families": per_family, "energy_identity": energy, "affine_reduce": affine}),
    ))
}

fn levels(seed: u64) -> Result<CriterionOutcome> {
    let q = Quaternion::new;
    let mut gaps = Vec::new();
    let mut in_gap = 0;
    for spec in [
        FieldSpec::bernoulli(Quaternion::I, Quaternion::ONE, 3)?,
        FieldSpec::bernoulli(Quaternion::real(0.8), Quaternion::real(1.5), 2)?,
        FieldSpec::bernoulli(q(0.6, -0.3, 0.5, 0.0), Quaternion::real(0.7), 4)?,
    ] {
        let g = level_gap_check(&spec, 100_000, seed)?;
        in_gap += g.in_gap;
        gaps.push(json!({"spec": spec, "gap": g}));
    }
    let mut gate = Vec::new();
    let mut rejected = true;
    for c0 in [1.0, 1.5] {
        for k in 0..=8 {
            let h = 2.0 * c0 * c0 * k as f64 / 8.0;
            let r = cubic_torus_analysis(&TorusSpec::cubic(h, 1.0, c0));
            let ok = matches!(r, Err(Error::DomainViolation(_)));
            rejected &= ok;
            gate.push(json!({"c0": c0, "h": h, "rejected": ok}));
        }
    }
    let admitted = cubic_torus_analysis(&TorusSpec::cubic(-2.0, 1.0, 1.0)).is_ok();
    Ok(outcome(
        9,
        in_gap == 0 && rejected && admitted,
        format!(
            "Hn in (0, c0) at {in_gap} of 3x10^5 points; cubic gate rejects all {} levels in [0, 2c0^2]",
            gate.len()
        ),
        json!({"level_gap": gaps, "cubic_gate": gate, "h_minus_2_admitted": admitted}),
    ))
}
