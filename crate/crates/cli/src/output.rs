use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

/// Renders a header and rows. CSV gets `#` comment lines for the tool
/// version, config and seed; JSON lines get a leading metadata object.
pub fn render<C: Serialize, T: Serialize>(
    format: Format,
    config: &C,
    seed: u64,
    rows: &[T],
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "# discrim {VERSION}")?;
            writeln!(buf, "# config {}", serde_json::to_string(config)?)?;
            writeln!(buf, "# seed {seed}")?;
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let meta = json!({ "tool": "discrim", "version": VERSION, "config": config, "seed": seed });
            writeln!(buf, "{meta}")?;
            for row in rows {
                writeln!(buf, "{}", serde_json::to_string(row)?)?;
            }
        }
    }
    Ok(buf)
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn write_atomic(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let Some(path) = path else {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: String,
    }

    #[test]
    fn csv_and_jsonl_carry_the_same_fields() {
        let rows = [Row { a: 1, b: "x;y".into() }];
        let csv = String::from_utf8(render(Format::Csv, &json!({"k": 1}), 7, &rows).unwrap()).unwrap();
        assert_eq!(csv, format!("# discrim {VERSION}\n# config {{\"k\":1}}\n# seed 7\na,b\n1,x;y\n"));
        let jl = String::from_utf8(render(Format::Jsonl, &json!({"k": 1}), 7, &rows).unwrap()).unwrap();
        let lines: Vec<&str> = jl.lines().collect();
        assert_eq!(lines[1], r#"{"a":1,"b":"x;y"}"#);
        assert!(lines[0].contains("\"seed\":7"));
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(Some(&p), b"one").unwrap();
        write_atomic(Some(&p), b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
