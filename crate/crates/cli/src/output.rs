use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every report carries the command, its full configuration and the seed.
pub fn envelope(command: &str, config: &impl Serialize, seed: u64, result: &impl Serialize) -> serde_json::Value {
    json!({
        "command": command,
        "version": VERSION,
        "seed": seed,
        "config": config,
        "result": result,
    })
}

/// Write `value` to `DIR/name` when an output directory is set, else to stdout.
pub fn emit_json(out: Option<&Path>, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::config)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text + "\n")?;
        }
        None => print_stdout(&(text + "\n"))?,
    }
    Ok(())
}

pub fn print_stdout(text: &str) -> std::io::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        // a closed pipe means the reader has what it wants
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

/// Shortest form is not stable across formatters; 17 significant digits is.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn envelope_fields() {
        let v = envelope("verify", &json!({"points": 3}), 7, &json!([1, 2]));
        assert_eq!(v["seed"], 7);
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["config"]["points"], 3);
    }
}
