use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::Serialize;

use quatdyn::Quaternion;

#[derive(Debug, Parser)]
#[command(name = "quatdyn", version, about = "Quaternion polynomial ODEs: simulation and structural checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one orbit and write trajectory and event CSVs.
    Simulate(SimulateArgs),
    /// Check every derivative identity that applies to the spec on random points.
    Verify(VerifyArgs),
    /// Run the structural analysis matching the spec's parameter case.
    Classify(ClassifyArgs),
    /// Rotation number of an invariant torus, or a sweep over levels.
    Rotation(RotationArgs),
    /// Closed-form and numerical eigenvalues of a linear equation.
    Spectrum(SpectrumArgs),
    /// Find the torus level with a given rational rotation.
    Search(SearchArgs),
    /// Run the acceptance suite and write a summary table.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for the report files; reports go to stdout without it.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Field spec: a JSON file or inline JSON.
    #[arg(long)]
    pub spec: String,
    /// Time span `A:B`; `B < A` integrates backward.
    #[arg(long = "t", default_value = "0:10", value_parser = parse_span, allow_hyphen_values = true)]
    pub t_span: (f64, f64),
    /// Initial point `q0,q1,q2,q3`; drawn from the seed when absent.
    #[arg(long, value_parser = parse_quat, allow_hyphen_values = true)]
    pub q0: Option<Quaternion>,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Comma-separated integrals appended as columns, e.g. `Hn,F_cyl`.
    #[arg(long)]
    pub integrals: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: String,
    /// Number of random points.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub spec: String,
    /// Number of sampled orbits.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Torus level `H`, needed for cubic specs with `a + ā = 0`.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// Torus level `F`, needed with `--h`.
    #[arg(long)]
    pub f: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RotationArgs {
    /// A Bernoulli spec with imaginary `a` or a cubic spec with `a + ā = 0`.
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub f: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<f64>,
    /// Sweep this many levels beyond the domain edge instead of one `--h`.
    #[arg(long, conflicts_with = "h")]
    pub grid: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Field spec; alternatively give `--family`, `--a` and `--b`.
    #[arg(long, conflicts_with_all = ["family", "a", "b"])]
    pub spec: Option<String>,
    #[arg(long, requires_all = ["a", "b"])]
    pub family: Option<String>,
    #[arg(long, value_parser = parse_quat, allow_hyphen_values = true)]
    pub a: Option<Quaternion>,
    #[arg(long, value_parser = parse_quat, allow_hyphen_values = true)]
    pub b: Option<Quaternion>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub f: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c0: f64,
    /// Rotation `P/Q`.
    #[arg(long, value_parser = parse_ratio, allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_ratio")]
    pub target: Ratio<i64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproArgs {
    /// Only these criteria, e.g. `1,4,8`.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn parse_span(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got '{s}'"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
    let (a, b) = (num(a)?, num(b)?);
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(format!("time span '{s}' must be finite and non-empty"));
    }
    Ok((a, b))
}

pub fn parse_quat(s: &str) -> Result<Quaternion, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let arr: [f64; 4] = v.try_into().map_err(|v: Vec<f64>| format!("expected 4 components, got {}", v.len()))?;
    Ok(Quaternion::from_array(arr))
}

pub fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let r: Ratio<i64> = s.trim().parse().map_err(|e| format!("'{s}': {e}"))?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        assert_eq!(parse_span("0:20").unwrap(), (0.0, 20.0));
        assert_eq!(parse_span("5:-1.5").unwrap(), (5.0, -1.5));
        assert!(parse_span("3").is_err());
        assert!(parse_span("1:1").is_err());
    }

    #[test]
    fn quaternions() {
        assert_eq!(parse_quat("0,1,0,0").unwrap(), Quaternion::I);
        assert!(parse_quat("1,2,3").is_err());
        assert!(parse_quat("1,x,0,0").is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("1/3").unwrap(), Ratio::new(1, 3));
        assert_eq!(parse_ratio("-4/6").unwrap(), Ratio::new(-2, 3));
        assert!(parse_ratio("1/0").is_err());
    }

    #[test]
    fn cli_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
