use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use quatdyn::integrator::{integrate, Options, Termination};
use quatdyn::invariants::IntegralDescriptor;
use quatdyn::repro::{run_criterion, CriterionOutcome};
use quatdyn::structure::case_a::classify_case_a;
use quatdyn::structure::case_b::case_b_region_report;
use quatdyn::structure::heteroclinic::{cubic_heteroclinic_report, quadratic_spiral_report};
use quatdyn::structure::isochronous::isochronous_centers;
use quatdyn::structure::spectrum::linear_spectrum;
use quatdyn::structure::sphere::sphere_and_annuli_report;
use quatdyn::structure::torus::{cubic_torus_analysis, periodic_torus_search, rotation_number, TorusSpec};
use quatdyn::verify::{random_point, verify_identities};
use quatdyn::{Error, Family, FieldSpec, Quaternion, StructureCase};

use crate::args::*;
use crate::output::{emit_json, envelope, num, print_stdout, write_csv};
use crate::{Failure, EXIT_IDENTITY, EXIT_INTEGRATION};

pub fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Classify(a) => classify(a),
        Command::Rotation(a) => rotation(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Search(a) => search(a),
        Command::Repro(a) => repro(a),
    }
}

/// `--spec` is inline JSON when it starts with `{`, a file path otherwise.
pub fn load_spec(arg: &str) -> Result<FieldSpec, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::config(anyhow!("cannot read spec file '{arg}': {e}")))?
    };
    Ok(text.parse()?)
}

/// The command's arguments with the parsed spec in place of the raw flag.
fn config(args: &impl Serialize, spec: Option<&FieldSpec>) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let (Some(spec), Value::Object(m)) = (spec, &mut v) {
        m.insert("spec".into(), json!(spec));
    }
    v
}

fn simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let spec = load_spec(&args.spec)?;
    let integrals = match &args.integrals {
        Some(list) => IntegralDescriptor::parse_list(list, &spec)?,
        None => Vec::new(),
    };
    let opts = Options { dense: false, ..Options::with_tolerances(args.rtol, args.atol) };
    let q0 = args.q0.unwrap_or_else(|| random_point(&mut ChaCha8Rng::seed_from_u64(args.common.seed), 1.0));
    let traj = integrate(&spec, q0.to_array(), args.t_span, &opts, &[])?;

    let out = args.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let mut header: Vec<String> = ["t", "q0", "q1", "q2", "q3"].map(String::from).to_vec();
    header.extend(integrals.iter().map(|d| d.id().to_string()));
    let rows = traj.t.iter().zip(&traj.y).map(|(t, y)| {
        let q = Quaternion::from_array(*y);
        let mut row = vec![*t, y[0], y[1], y[2], y[3]];
        row.extend(integrals.iter().map(|d| d.value(q).unwrap_or(f64::NAN)));
        row
    });
    write_csv(&out.join("trajectory.csv"), &header, rows)?;
    write_events(&out.join("events.csv"), &traj.events)?;

    let (t_last, y_last) = traj.last();
    let mut cfg = config(&args, Some(&spec));
    cfg["q0"] = json!(q0);
    cfg["options"] = json!(opts);
    let result = json!({
        "termination": traj.termination,
        "stats": traj.stats,
        "samples": traj.t.len(),
        "events": traj.events.len(),
        "t_final": t_last,
        "q_final": y_last,
    });
    emit_json(Some(&out), "simulate.json", &envelope("simulate", &cfg, args.common.seed, &result))?;
    if traj.termination == Termination::StepLimit {
        return Err(Failure { code: EXIT_INTEGRATION, error: anyhow!("step limit reached at t = {t_last}") });
    }
    Ok(0)
}

fn write_events(path: &Path, events: &[quatdyn::integrator::EventRecord<4>]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,event,q0,q1,q2,q3")?;
    for e in events {
        let y: Vec<String> = e.y.iter().map(|x| num(*x)).collect();
        writeln!(w, "{},{},{}", num(e.t), e.name, y.join(","))?;
    }
    w.flush()
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let spec = load_spec(&args.spec)?;
    let report = verify_identities(&spec, args.points, args.common.seed)?;
    let doc = envelope("verify", &config(&args, Some(&spec)), args.common.seed, &report);
    emit_json(args.common.out.as_deref(), "verify.json", &doc)?;
    if !report.pass {
        let failed: Vec<_> = report.identities.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(Failure { code: EXIT_IDENTITY, error: anyhow!("identities failed: {}", failed.join(", ")) });
    }
    Ok(0)
}

fn torus_levels(args: &ClassifyArgs) -> Result<(f64, f64), Failure> {
    match (args.h, args.f) {
        (Some(h), Some(f)) => Ok((h, f)),
        _ => Err(Failure::config(anyhow!("cubic tori need the level: pass --h and --f"))),
    }
}

fn classify(args: ClassifyArgs) -> Result<u8, Failure> {
    let spec = load_spec(&args.spec)?;
    let (n, seed) = (args.samples, args.common.seed);
    let case = spec.structure_case();
    let report = match case {
        StructureCase::BernoulliRealA => json!(classify_case_a(&spec, n, seed)?),
        StructureCase::BernoulliMixedA => json!(case_b_region_report(&spec, n, seed)?),
        StructureCase::BernoulliImaginaryA => json!(isochronous_centers(&spec)?),
        StructureCase::QuadraticSpiral => json!(quadratic_spiral_report(&spec, n, seed)?),
        StructureCase::QuadraticSphere => json!(sphere_and_annuli_report(&spec, n, seed)?),
        StructureCase::CubicHeteroclinic => json!(cubic_heteroclinic_report(&spec, n, seed)?),
        StructureCase::CubicTori => {
            let (h, f) = torus_levels(&args)?;
            json!(cubic_torus_analysis(&TorusSpec::cubic(h, f, spec.c0()))?)
        }
        StructureCase::Linear => json!(linear_spectrum(&spec)?),
        StructureCase::Affine => {
            let (linear, shift) = spec.affine_reduce()?;
            json!({"shift": shift, "linear": linear, "spectrum": linear_spectrum(&linear)?})
        }
        StructureCase::Unclassified => {
            return Err(Error::WrongRegime(format!("no structural analysis covers this {} spec", spec.family())).into())
        }
    };
    let doc = envelope("classify", &config(&args, Some(&spec)), seed, &json!({"case": case, "report": report}));
    emit_json(args.common.out.as_deref(), "classify.json", &doc)?;
    Ok(0)
}

/// The torus family of a spec and its `c0`, in the normalized time scale.
fn torus_family(spec: &FieldSpec) -> Result<(fn(f64, f64, f64) -> TorusSpec, f64), Failure> {
    match spec.structure_case() {
        StructureCase::BernoulliImaginaryA if spec.n() == 3 => Ok((TorusSpec::bernoulli, spec.normal_form().c0())),
        StructureCase::CubicTori => Ok((TorusSpec::cubic, spec.c0())),
        _ => Err(Error::WrongRegime(
            "rotation needs a Bernoulli spec with n = 3 and imaginary a, or a cubic spec with a + ā = 0".into(),
        )
        .into()),
    }
}

fn analyze(ts: &TorusSpec) -> quatdyn::Result<quatdyn::structure::torus::RotationResult> {
    match ts.family {
        quatdyn::structure::torus::TorusFamily::Bernoulli => rotation_number(ts),
        quatdyn::structure::torus::TorusFamily::Cubic => cubic_torus_analysis(ts),
    }
}

fn rotation(args: RotationArgs) -> Result<u8, Failure> {
    let spec = load_spec(&args.spec)?;
    let (make, c0) = torus_family(&spec)?;
    let f = args.f;
    let result = match (args.h, args.grid) {
        (Some(h), None) => json!(analyze(&make(h, f, c0))?),
        (None, Some(n)) => {
            if n < 2 {
                return Err(Failure::config(anyhow!("--grid needs at least 2 levels")));
            }
            // levels below the domain edge, log-spaced in distance from it
            let h_edge = edge_level(&make(0.0, f, c0));
            let levels: Vec<f64> = (0..n).map(|k| h_edge - 10f64.powf(-6.0 + 12.0 * k as f64 / (n - 1) as f64)).collect();
            let rows: Vec<Value> = levels
                .par_iter()
                .map(|&h| match analyze(&make(h, f, c0)) {
                    Ok(r) => json!(r),
                    Err(e) => json!({"h": h, "f": f, "c0": c0, "error": e.to_string()}),
                })
                .collect();
            json!(rows)
        }
        _ => return Err(Failure::config(anyhow!("give either --h or --grid"))),
    };
    let doc = envelope("rotation", &config(&args, Some(&spec)), args.common.seed, &result);
    emit_json(args.common.out.as_deref(), "rotation.json", &doc)?;
    Ok(0)
}

/// The level `h` at which the torus family with this `f` degenerates.
fn edge_level(ts: &TorusSpec) -> f64 {
    use quatdyn::structure::torus::TorusFamily;
    let f = ts.f;
    match ts.family {
        TorusFamily::Bernoulli => -f * f / (2.0 * f + ts.c0),
        TorusFamily::Cubic => -2.0 * f * f / (2.0 * f + ts.c0 * ts.c0),
    }
}

fn spectrum(args: SpectrumArgs) -> Result<u8, Failure> {
    let spec = match (&args.spec, &args.family, args.a, args.b) {
        (Some(s), ..) => load_spec(s)?,
        (None, Some(fam), Some(a), Some(b)) => {
            let family: Family = fam.parse()?;
            if family.is_affine() {
                FieldSpec::try_from(quatdyn::field::FieldSpecJson {
                    family: fam.clone(),
                    a: a.to_array(),
                    b: Some(b.to_array()),
                    c: None,
                    c0: None,
                    n: None,
                })?
            } else {
                FieldSpec::linear(family, a, b)?
            }
        }
        _ => return Err(Failure::config(anyhow!("give --spec, or --family with --a and --b"))),
    };
    let result = if spec.family().is_affine() {
        let (linear, shift) = spec.affine_reduce()?;
        json!({"shift": shift, "linear": linear, "spectrum": linear_spectrum(&linear)?})
    } else {
        json!(linear_spectrum(&spec)?)
    };
    let doc = envelope("spectrum", &config(&args, Some(&spec)), args.common.seed, &result);
    emit_json(args.common.out.as_deref(), "spectrum.json", &doc)?;
    Ok(0)
}

fn search(args: SearchArgs) -> Result<u8, Failure> {
    let result = periodic_torus_search(args.f, args.c0, args.target)?;
    let doc = envelope("search", &config(&args, None), args.common.seed, &result);
    emit_json(args.common.out.as_deref(), "search.json", &doc)?;
    Ok(0)
}

fn summary_table(outcomes: &[CriterionOutcome]) -> String {
    let mut s = String::from("| # | criterion | result | summary |\n|---|---|---|---|\n");
    for o in outcomes {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        s += &format!("| {} | {} | {verdict} | {} |\n", o.id, o.title, o.summary.replace('|', "\\|"));
    }
    s
}

fn repro(args: ReproArgs) -> Result<u8, Failure> {
    let ids: Vec<u8> = if args.criteria.is_empty() { (1..=9).collect() } else { args.criteria.clone() };
    if let Some(bad) = ids.iter().find(|id| !(1..=9).contains(*id)) {
        return Err(Failure::config(anyhow!("no criterion {bad}; criteria run from 1 to 9")));
    }
    let outcomes: Vec<CriterionOutcome> = ids.par_iter().map(|&id| run_criterion(id, args.seed)).collect();
    let table = summary_table(&outcomes);
    print_stdout(&table)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.md"), &table)?;
        emit_json(Some(dir), "repro.json", &envelope("repro", &config(&args, None), args.seed, &outcomes))?;
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed criteria: {failed:?}");
        Ok(EXIT_IDENTITY)
    }
}
