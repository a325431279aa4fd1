use quatdyn::integrator::{integrate, probe_field, Direction, Options, ProbeOutcome, Target, Termination};
use quatdyn::invariants::{IntegralDescriptor, IntegralId};
use quatdyn::structure::torus::{rotation_number, TorusSpec};
use quatdyn::{FieldSpec, Quaternion, StructureCase};

#[test]
fn spec_json_round_trip() {
    let text = r#"{"family":"bernoulli","a":[0.5,1,0,0],"c0":2,"n":3}"#;
    let spec: FieldSpec = text.parse().unwrap();
    assert_eq!(spec.structure_case(), StructureCase::BernoulliMixedA);
    let back: FieldSpec = serde_json::to_string(&spec).unwrap().parse().unwrap();
    assert_eq!(back, spec);
    assert!(r#"{"family":"bernoulli","a":[1,0,0,0],"n":3}"#.parse::<FieldSpec>().is_err());
    assert!(r#"{"family":"nope","a":[1,0,0,0]}"#.parse::<FieldSpec>().is_err());
}

#[test]
fn integrals_hold_along_a_rotated_spec() {
    // a off the i axis exercises the normal frame
    let a = Quaternion::new(0.0, 0.3, -0.8, 0.5);
    let spec = FieldSpec::bernoulli(a, Quaternion::real(1.0), 3).unwrap();
    assert_eq!(spec.structure_case(), StructureCase::BernoulliImaginaryA);
    let ds = IntegralDescriptor::parse_list("Hn,F_cyl", &spec).unwrap();
    let q0 = Quaternion::new(0.3, -0.2, 0.4, 0.1);
    let traj = integrate(&spec, q0.to_array(), (0.0, 15.0), &Options::default(), &[]).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    for d in &ds {
        let v0 = d.value(q0).unwrap();
        for y in &traj.y {
            let v = d.value(Quaternion::from_array(*y)).unwrap();
            assert!((v - v0).abs() < 1e-8 * (1.0 + v0.abs()), "{} drifts", d.id());
        }
    }
}

#[test]
fn inapplicable_integral_is_refused() {
    let spec = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::real(1.0), 3).unwrap();
    assert!(IntegralDescriptor::new(IntegralId::LHyp, &spec).is_err());
    assert!(IntegralDescriptor::new(IntegralId::H2, &spec).is_ok());
}

#[test]
fn real_axis_orbit_settles_on_root() {
    let spec = FieldSpec::bernoulli(Quaternion::ONE, Quaternion::real(1.0), 3).unwrap();
    let targets = [Target::Point(Quaternion::ZERO), Target::PowerRoots { exponent: 2, value: 1.0 }];
    let q = Quaternion::new(0.4, 0.1, 0.0, 0.0);
    let out = probe_field(&spec, q, Direction::Forward, &targets, 30.0, &Options::default()).unwrap();
    assert!(matches!(out, ProbeOutcome::Converged { target: 1, .. }), "{out:?}");
    let back = probe_field(&spec, q, Direction::Backward, &targets, 30.0, &Options::default()).unwrap();
    assert!(matches!(back, ProbeOutcome::Converged { target: 0, .. }), "{back:?}");
}

#[test]
fn rotation_is_negative_and_bounded() {
    for h in [-0.5, -1.0, -4.0] {
        let r = rotation_number(&TorusSpec::bernoulli(h, 1.0, 1.0)).unwrap();
        assert!(r.i_value < -0.29 && r.i_value > -5.0, "h = {h}: I = {}", r.i_value);
        assert!(r.cross_check.as_ref().is_some_and(|c| c.winding_error < 1e-6), "{r:?}");
    }
}
